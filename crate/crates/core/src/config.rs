//! Flat key-value run configuration, stored as TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::linsolve::{EigenConfig, EigenMethod, InnerSchur, KrylovConfig, SolverConfig, SolverMethod};
use crate::nonlinear::{InitialGuess, JacobianMode, NewtonConfig};
use crate::problems::{Benchmark, Overrides};
use crate::{Error, Result};

/// Uniform or adaptive refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RefinementMode {
    Uniform,
    Adaptive { theta: f64 },
}

/// All parameters of one run. Unset optional keys take the benchmark defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub benchmark: String,
    pub degree: Option<usize>,
    /// `uniform` or `adaptive`.
    pub mode: String,
    pub theta: Option<f64>,
    /// Stop once the estimator drops below this value.
    pub tol: Option<f64>,
    pub max_dof: Option<usize>,
    pub max_levels: usize,
    pub cells_x: Option<usize>,
    pub cells_y: Option<usize>,

    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    /// Interior penalty; boundary edges get twice this value.
    pub sigma: Option<f64>,

    pub solver: String,
    pub krylov_tol: f64,
    pub krylov_max_iter: usize,
    /// Inner Schur steps inside the block preconditioners; 0 means one ILU(S) application.
    pub inner_steps: usize,
    pub ilu_shift: Option<f64>,
    /// Block LU methods switch to a direct Schur solve after this many failing
    /// iterations; 0 disables the switch.
    pub direct_fallback_after: usize,
    /// `lanczos` or `power`.
    pub eigen_method: String,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,

    pub newton_max_iter: usize,
    pub newton_residual_tol: f64,
    pub newton_correction_tol: f64,
    /// `frozen` or `full`.
    pub jacobian: String,
    pub damping: bool,
    /// Constant start value per component on the coarsest mesh.
    pub initial_guess: Option<Vec<f64>>,
    /// Start finer levels from the transferred previous solution.
    pub warm_start: bool,

    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Write wall-clock columns to `report.csv`.
    pub timings: bool,
    pub vtk: bool,
    pub indicators: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            benchmark: "ex1".into(),
            degree: None,
            mode: "adaptive".into(),
            theta: None,
            tol: None,
            max_dof: None,
            max_levels: 30,
            cells_x: None,
            cells_y: None,
            epsilon: None,
            alpha: None,
            sigma: None,
            solver: "blocklu-ilu".into(),
            krylov_tol: 1e-7,
            krylov_max_iter: 20_000,
            inner_steps: 5,
            ilu_shift: None,
            direct_fallback_after: 1000,
            eigen_method: "lanczos".into(),
            eigen_tol: 1e-8,
            eigen_max_iter: 5000,
            newton_max_iter: 50,
            newton_residual_tol: 1e-8,
            newton_correction_tol: 1e-10,
            jacobian: "frozen".into(),
            damping: false,
            initial_guess: None,
            warm_start: true,
            out: None,
            seed: 0,
            timings: true,
            vtk: true,
            indicators: true,
        }
    }
}

impl RunConfig {
    pub fn for_benchmark(name: &str) -> Self {
        RunConfig { benchmark: name.into(), ..Default::default() }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn overrides(&self) -> Overrides {
        Overrides { epsilon: self.epsilon, alpha: self.alpha, sigma: self.sigma }
    }

    pub fn benchmark(&self) -> Result<Benchmark> {
        Benchmark::by_name(&self.benchmark, &self.overrides())
    }

    /// Copy with every optional key filled from the benchmark defaults.
    pub fn resolved(&self) -> Result<RunConfig> {
        let b = self.benchmark()?;
        let d = &b.defaults;
        let mut r = self.clone();
        r.degree.get_or_insert(d.degree);
        r.theta.get_or_insert(d.theta);
        r.tol.get_or_insert(d.tol);
        r.max_dof.get_or_insert(d.max_dof);
        r.cells_x.get_or_insert(d.cells[0]);
        r.cells_y.get_or_insert(d.cells[1]);
        r.initial_guess.get_or_insert_with(|| d.initial_guess.clone());
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        self.refinement_mode()?;
        self.solver_config()?;
        self.newton_config()?.validate()?;
        if self.degree == Some(0) {
            return Err(Error::Config("degree must be at least 1".into()));
        }
        if self.max_levels == 0 {
            return Err(Error::Config("max_levels must be at least 1".into()));
        }
        Ok(())
    }

    pub fn refinement_mode(&self) -> Result<RefinementMode> {
        match self.mode.as_str() {
            "uniform" => Ok(RefinementMode::Uniform),
            "adaptive" => {
                let theta = self.theta.unwrap_or(0.5);
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(Error::InvalidTheta(theta));
                }
                Ok(RefinementMode::Adaptive { theta })
            }
            m => Err(Error::Config(format!("unknown mode '{m}' (expected uniform|adaptive)"))),
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let method: SolverMethod = self.solver.parse()?;
        let eigen_method = match self.eigen_method.as_str() {
            "lanczos" => EigenMethod::Lanczos,
            "power" => EigenMethod::Power,
            m => return Err(Error::Config(format!("unknown eigen_method '{m}' (expected lanczos|power)"))),
        };
        if !(self.krylov_tol > 0.0) || self.krylov_max_iter == 0 {
            return Err(Error::Config("krylov_tol > 0 and krylov_max_iter >= 1 required".into()));
        }
        Ok(SolverConfig {
            method,
            krylov: KrylovConfig { tol: self.krylov_tol, max_iter: self.krylov_max_iter, ..Default::default() },
            inner: if self.inner_steps == 0 { InnerSchur::IluApply } else { InnerSchur::Iterations(self.inner_steps) },
            eigen: EigenConfig { method: eigen_method, tol: self.eigen_tol, max_iter: self.eigen_max_iter },
            ilu_shift: self.ilu_shift,
            direct_fallback: (self.direct_fallback_after > 0).then_some(self.direct_fallback_after),
        })
    }

    pub fn newton_config(&self) -> Result<NewtonConfig> {
        let jacobian_mode = match self.jacobian.as_str() {
            "frozen" => JacobianMode::Frozen,
            "full" => JacobianMode::Full,
            m => return Err(Error::Config(format!("unknown jacobian mode '{m}' (expected frozen|full)"))),
        };
        Ok(NewtonConfig {
            max_iter: self.newton_max_iter,
            residual_tol: self.newton_residual_tol,
            correction_tol: self.newton_correction_tol,
            jacobian_mode,
            initial_guess: match &self.initial_guess {
                Some(c) => InitialGuess::Constant(c.clone()),
                None => InitialGuess::PreviousLevel,
            },
            damping: self.damping,
        })
    }
}
