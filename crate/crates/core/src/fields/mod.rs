//! Discrete calculus on gridded scalar fields.

pub mod calculus;
pub mod grid;
pub mod io;
pub mod legendre;
pub mod newton;
pub mod spectral;

pub use calculus::{b_field, empirical_forcing, fd_gradient, fd_hessian, jacobi_gap, jacobi_terms, BField, JacobiReport, PointFlag};
pub use grid::ScalarField;
pub use legendre::{gradient_map_monotonicity, legendre_field, DualGrid, LegendreReport};
pub use newton::{newton_divergence, newton_tensor, NewtonDivergence};
pub use spectral::{eigen_sym, SpectralPoint};
