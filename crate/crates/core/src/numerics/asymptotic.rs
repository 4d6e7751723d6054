//! Truncation of divergent asymptotic series Σ c_k / u^k.
//!
//! The series behind li/E diverge for every u; what can be certified is the
//! partial sum up to (at latest) the smallest term, with an error interval of
//! twice the first omitted term. Past the smallest term nothing is certified
//! and the summation refuses to continue.

use crate::error::{Error, Result};
use crate::numerics::interval::CertReal;

const MAX_TERMS: usize = 100_000;

/// Sum Σ_{k≥0} c_k / u^k with certified truncation.
///
/// Terms must decrease in magnitude from the start (else
/// [`Error::DivergenceAtArgument`]); summation stops at the smallest term or
/// once a term drops below `tol` relative to the running sum, whichever comes
/// first, and the first omitted term enters the result as a `±2·|term|`
/// error interval. Signed (e.g. alternating) coefficient streams are fine;
/// the decrease test is on magnitudes.
pub fn sum_asymptotic(
    mut coeff: impl FnMut(usize) -> CertReal,
    u: &CertReal,
    tol: f64,
) -> Result<CertReal> {
    if u.sign() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain(format!("u = {u} must be certifiably positive")));
    }
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let prec = u.prec();
    let inv_u = u.recip()?;

    let mut sum = CertReal::zero(prec);
    let mut u_pow = CertReal::one(prec); // u^{-k}
    let mut prev_mag: Option<CertReal> = None;

    for k in 0..MAX_TERMS {
        let term = coeff(k).mul(&u_pow);
        let mag = term.abs();

        if let Some(prev) = &prev_mag {
            let decreasing = mag.hi() < prev.lo();
            if !decreasing && !mag.hi().is_zero() {
                if k == 1 {
                    // the very first step does not decrease: u is too small
                    return Err(Error::DivergenceAtArgument);
                }
                // smallest term reached (or decrease not certifiable):
                // truncate here, the omitted term enters as ±2·|term|
                return Ok(attach_remainder(sum, &mag));
            }
            let small_enough =
                mag.hi().to_f64() <= tol * sum.abs().lo().to_f64().max(f64::MIN_POSITIVE);
            if small_enough || mag.hi().is_zero() {
                return Ok(attach_remainder(sum, &mag));
            }
        }

        sum = sum.add(&term);
        prev_mag = Some(mag);
        u_pow = u_pow.mul(&inv_u);
    }
    Err(Error::NonConvergence(format!(
        "asymptotic series did not truncate within {MAX_TERMS} terms"
    )))
}

fn attach_remainder(sum: CertReal, omitted_mag: &CertReal) -> CertReal {
    let bound = omitted_mag.scale_u64(2);
    let hi = bound.hi().clone();
    sum.add(&CertReal::new(-hi.clone(), hi))
}
