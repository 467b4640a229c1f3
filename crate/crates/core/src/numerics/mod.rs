//! Numerical building blocks shared by every bound engine.

pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod special;

pub use montecarlo::{mc_mi_estimate, McEstimate, DEFAULT_MC_SAMPLES, DEFAULT_SEED};
pub use optimize::{bisect_root, golden_max, Maximum};
pub use quadrature::{entropy_quadrature, gauss_legendre, integrate, integrate_adaptive, Integral, Interval, QuadratureSpec};
pub use special::{binary_entropy, digamma_int, erfcx, ln_factorial, q_function, EULER_GAMMA, E_OVER_2PI, SQRT_2PI_E};
