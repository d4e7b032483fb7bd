//! Numerical tools for indifferent holomorphic germs at a fixed point:
//! truncated series algebra, continued fractions and rotation nets,
//! formal normal forms, orbit-scaling experiments, grid approximations of
//! invariant compacta, and parabolic petals with Fatou coordinates.
//!
//! The crate is `no_std` with `alloc`; IO lives in the `hedgehog` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod dd;
pub mod compacta;
pub mod error;
pub mod fit;
pub mod scalar;
pub mod normal_form;
pub mod orbit;
pub mod parabolic;
pub mod probe;
pub mod raster;
pub mod report;
pub mod rotation;
pub mod series;

pub use error::{Error, Result};
pub use scalar::{Dd, Mp, Real};
pub use rotation::{LiouvilleGrowth, RotationNumber};
pub use series::{InverseMap, InverseMode, Tangency, TruncatedGerm};
