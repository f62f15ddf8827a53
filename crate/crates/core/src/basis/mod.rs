//! Polynomial bases, quadrature and the DG space.

pub mod affine;
pub mod dubiner;
pub mod jacobi;
pub mod quadrature;
pub mod space;

pub use affine::AffineMap;
pub use dubiner::{basis_indices, dubiner, dubiner_all, local_dim, local_index, Jet};
pub use jacobi::{gauss_legendre, jacobi, jacobi_derivative};
pub use quadrature::{line_rule, triangle_rule, LineRule, TriangleRule};
pub use space::{reference_edge_point, DgSpace};
