//! Extended-precision interval arithmetic, certified quadrature, asymptotic
//! summation and bisection — the substrate for every analytic module.

pub mod asymptotic;
pub mod bisect;
pub mod interval;
pub mod quad;
pub mod scalar;
pub mod taylor;

pub use asymptotic::sum_asymptotic;
pub use bisect::find_root_bisect;
pub use interval::{CertReal, LogPoint, PrecisionContext};
pub use quad::{integrate_adaptive, Integrand};
pub use scalar::Scalar;
pub use taylor::Jet;
