//! 2x2 block partition of a reordered matrix.

use log::warn;

use super::sparse::SparseMatrix;
use crate::Result;

/// `N = [[A, B], [C^T, D]]` with `A` of size `s x s`.
#[derive(Clone, Debug)]
pub struct BlockPartition {
    pub split: usize,
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub ct: SparseMatrix,
    pub d: SparseMatrix,
}

impl BlockPartition {
    pub fn dim(&self) -> usize {
        self.split + self.d.nrows()
    }

    /// Reassembles `N`.
    pub fn assemble(&self) -> SparseMatrix {
        let s = self.split;
        let mut t = Vec::with_capacity(self.a.nnz() + self.b.nnz() + self.ct.nnz() + self.d.nnz());
        for (m, r0, c0) in [(&self.a, 0, 0), (&self.b, 0, s), (&self.ct, s, 0), (&self.d, s, s)] {
            for i in 0..m.nrows() {
                let (c, v) = m.row(i);
                t.extend(c.iter().zip(v).map(|(&j, &x)| (i + r0, j + c0, x)));
            }
        }
        let n = self.dim();
        SparseMatrix::from_triplets(n, n, &t)
    }
}

/// Position of the largest gap between consecutive sorted values, restricted to
/// `[ceil(0.2 n), floor(0.8 n)]`. Returns `None` when no positive gap exists there.
pub fn largest_gap_split(sorted: &[f64]) -> Option<usize> {
    let n = sorted.len();
    if n < 2 {
        return None;
    }
    let lo = ((0.2 * n as f64).ceil() as usize).max(1);
    let hi = ((0.8 * n as f64).floor() as usize).min(n - 1);
    let mut best: Option<(usize, f64)> = None;
    for s in lo..=hi {
        let gap = (sorted[s - 1] - sorted[s]).abs();
        if gap > 0.0 && best.is_none_or(|(_, g)| gap > g) {
            best = Some((s, gap));
        }
    }
    best.map(|(s, _)| s)
}

/// Splits `n` at the largest eigenvector gap, falling back to `ceil(n/2)`.
pub fn choose_split(sorted: &[f64]) -> usize {
    let n = sorted.len();
    match largest_gap_split(sorted) {
        Some(s) if s > 0 && s < n => s,
        _ => {
            let s = n.div_ceil(2);
            if n > 1 {
                warn!("no usable eigenvector gap, splitting at {s} of {n}");
            }
            s
        }
    }
}

/// Extracts the four blocks of `n` at `split`.
pub fn partition_at(n: &SparseMatrix, split: usize) -> Result<BlockPartition> {
    let dim = n.nrows();
    Ok(BlockPartition {
        split,
        a: n.submatrix(0..split, 0..split),
        b: n.submatrix(0..split, split..dim),
        ct: n.submatrix(split..dim, 0..split),
        d: n.submatrix(split..dim, split..dim),
    })
}

/// Partitions a reordered matrix using its sorted eigenvector values.
pub fn block_partition(n: &SparseMatrix, sorted_values: &[f64]) -> Result<BlockPartition> {
    partition_at(n, choose_split(sorted_values))
}
