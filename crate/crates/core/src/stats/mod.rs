//! Special functions, gamma sampling, deterministic quadrature, and
//! reproducible random streams.

pub mod erf;
pub mod gamma;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use gamma::{draw_gamma, gamma_sample, GammaParams, LatentModel};
pub use quadrature::{build_grid, gamma_measure_nodes, QuadratureGrid};
pub use rng::{RandomStream, StreamRng};
pub use special::{norm_cdf, norm_pdf, norm_quantile};
