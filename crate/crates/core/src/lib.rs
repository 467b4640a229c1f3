//! Capacity-region bounds for the optical intensity multiple access channel.
//!
//! Rates are in nats throughout. Operating points are optical SNRs
//! `E_i / sigma` (average limit) or PNRs `A_i / sigma` (peak limit).
//!
//! ```
//! use oimac::avg_power::{ap_outer_2u, ApOperatingPoint};
//!
//! let outer = ap_outer_2u(&ApOperatingPoint::unit(vec![10.0, 5.0])?)?;
//! assert_eq!(outer.halfspaces.len(), 3);
//! # Ok::<(), oimac::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avg_power;
pub mod capacity_solver;
pub mod distributions;
pub mod error;
pub mod mutual_information;
pub mod numerics;
pub mod peak_power;
pub mod region;
pub mod report;

pub use error::{Error, Result};

/// Book chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/inputs.md")]
    pub mod inputs {}
    #[doc = include_str!("../../../book/src/mutual_information.md")]
    pub mod mutual_information {}
    #[doc = include_str!("../../../book/src/average_power.md")]
    pub mod average_power {}
    #[doc = include_str!("../../../book/src/peak_power.md")]
    pub mod peak_power {}
    #[doc = include_str!("../../../book/src/capacity_solver.md")]
    pub mod capacity_solver {}
    #[doc = include_str!("../../../book/src/regions.md")]
    pub mod regions {}
}
