//! Certified computation of the range on which Ramanujan's inequality
//! π(x)² < (e x / log x) · π(x/e) can still fail, together with exact
//! prime-counting verification at concrete integers.
//!
//! Every analytic quantity is carried as an outward-rounded interval
//! ([`numerics::CertReal`]); a claimed inequality is only reported as
//! certified when it holds between the appropriate interval endpoints.

pub mod envelope;
pub mod error;
pub mod logint;
pub mod numerics;
pub mod ramanujan;
pub mod sieve;
pub mod theta;

pub use error::{Error, Result};
