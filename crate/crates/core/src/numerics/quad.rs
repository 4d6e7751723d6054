//! Certified adaptive quadrature.
//!
//! Each cell is enclosed by a Taylor model: interval Taylor coefficients at
//! the cell midpoint, integrated term by term, plus the top coefficient
//! recomputed over the whole cell as a Lagrange remainder. The result is an
//! enclosure, not an estimate — the error control is part of the interval,
//! and the tolerance only drives how far cells are subdivided.

use crate::error::{Error, Result};
use crate::numerics::interval::{CertReal, PrecisionContext};
use crate::numerics::scalar::Scalar;
use crate::numerics::taylor::Jet;

/// An integrand evaluable both on plain intervals and on Taylor jets.
pub trait Integrand {
    fn eval<S: Scalar>(&self, x: &S) -> Result<S>;
}

/// Taylor order per cell. High enough that smooth integrands converge in a
/// handful of bisections; the adaptive splitting handles the rest.
const ORDER: usize = 12;

/// Enclosure of ∫f over one cell [a, b] via the degree-`ORDER` Taylor model.
fn cell_enclosure<F: Integrand>(f: &F, a: &CertReal, b: &CertReal) -> Result<CertReal> {
    let prec = a.prec().max(b.prec());
    let cell = a.hull(b);
    let c = cell.mid_point();

    let at_center = f.eval(&Jet::var(&c, ORDER))?;
    let over_cell = f.eval(&Jet::var(&cell, ORDER))?;

    // offsets from the expansion point
    let lo_off = a.sub(&c);
    let hi_off = b.sub(&c);

    let mut total = CertReal::zero(prec);
    let mut lo_pow = lo_off.clone();
    let mut hi_pow = hi_off.clone();
    for k in 0..=ORDER {
        // ∫ (t-c)^k dt over [a,b] = (hi_off^{k+1} - lo_off^{k+1}) / (k+1)
        lo_pow = if k == 0 { lo_off.clone() } else { lo_pow.mul(&lo_off) };
        hi_pow = if k == 0 { hi_off.clone() } else { hi_pow.mul(&hi_off) };
        let moment = hi_pow
            .sub(&lo_pow)
            .div(&CertReal::from_u64(k as u64 + 1, prec))
            .expect("k+1 > 0");
        let coeff = if k < ORDER {
            at_center.coeff(k)
        } else {
            // Lagrange remainder: the top coefficient evaluated over the cell
            over_cell.coeff(ORDER)
        };
        total = total.add(&coeff.mul(&moment));
        if !total.is_finite() {
            return Err(Error::Domain(
                "integrand produced a non-finite enclosure inside the range".into(),
            ));
        }
    }
    Ok(total)
}

/// Certified enclosure of ∫_lo^hi f(t) dt with width ≤ tol·max(1, |result|).
///
/// Deterministic for a fixed `PrecisionContext`: the subdivision order is a
/// plain stack discipline with no data-dependent tie-breaking.
pub fn integrate_adaptive<F: Integrand>(
    f: &F,
    lo: &CertReal,
    hi: &CertReal,
    tol: f64,
    ctx: &PrecisionContext,
) -> Result<CertReal> {
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if lo.lo() > hi.hi() {
        return Err(Error::Domain(format!("inverted range [{lo}, {hi}]")));
    }
    let prec = lo.prec().max(hi.prec());
    let length = hi.sub(lo);
    if length.hi().is_zero() {
        return Ok(CertReal::zero(prec));
    }
    // Absolute width target; the relative form of the postcondition can only
    // be looser than this.
    let tol_per_length = tol / length.hi().to_f64();

    let mut total = CertReal::zero(prec);
    let mut stack: Vec<(CertReal, CertReal, u32)> = vec![(lo.clone(), hi.clone(), 0)];
    while let Some((a, b, depth)) = stack.pop() {
        let enclosure = cell_enclosure(f, &a, &b)?;
        let cell_len = b.sub(&a).hi().to_f64();
        if enclosure.width().to_f64() <= tol_per_length * cell_len {
            total = total.add(&enclosure);
            continue;
        }
        if depth >= ctx.max_quadrature_depth {
            return Err(Error::NonConvergence(format!(
                "depth budget {} exhausted on cell [{a:.6}, {b:.6}]",
                ctx.max_quadrature_depth
            )));
        }
        let mid = a.hull(&b).mid_point();
        stack.push((mid.clone(), b, depth + 1));
        stack.push((a, mid, depth + 1));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Identity;
    impl Integrand for Identity {
        fn eval<S: Scalar>(&self, x: &S) -> Result<S> {
            Ok(x.clone())
        }
    }

    struct Reciprocal;
    impl Integrand for Reciprocal {
        fn eval<S: Scalar>(&self, x: &S) -> Result<S> {
            x.lift_u64(1).div(x)
        }
    }

    /// 1/(8π√t)
    struct B2Density {
        eight_pi: CertReal,
    }
    impl B2Density {
        fn new(prec: u32) -> Self {
            Self {
                eight_pi: CertReal::pi(prec).scale_u64(8),
            }
        }
    }
    impl Integrand for B2Density {
        fn eval<S: Scalar>(&self, x: &S) -> Result<S> {
            x.lift_u64(1).div(&x.lift(&self.eight_pi).mul(&x.sqrt()?))
        }
    }

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn cr(s: &str) -> CertReal {
        CertReal::from_decimal(s, ctx().prec_bits()).unwrap()
    }

    #[test]
    fn linear_integrand() {
        let r = integrate_adaptive(&Identity, &cr("0"), &cr("1"), 1e-30, &ctx()).unwrap();
        assert!(r.agrees_f64(0.5));
        assert!(r.width().to_f64() <= 1e-30);
    }

    #[test]
    fn log_antiderivative() {
        // ∫ 1/t over [1, e] = 1
        let e = CertReal::e(ctx().prec_bits());
        let r = integrate_adaptive(&Reciprocal, &cr("1"), &e, 1e-25, &ctx()).unwrap();
        assert!(r.agrees_f64(1.0));
        assert!(
            r.contains(&CertReal::one(r.prec())) || r.width().to_f64() < 1e-25,
            "enclosure {r} must contain 1"
        );
        let one = CertReal::one(r.prec());
        assert!(r.lo() <= one.lo() && one.hi() <= r.hi());
    }

    #[test]
    fn b2_closed_form() {
        // ∫ 1/(8π√t) over [599, 1e6] = (√1e6 − √599)/(4π); closed form
        // evaluated independently at working precision.
        let prec = ctx().prec_bits();
        let r = integrate_adaptive(&B2Density::new(prec), &cr("599"), &cr("1000000"), 1e-16, &ctx())
            .unwrap();
        let closed = cr("1000000")
            .sqrt()
            .unwrap()
            .sub(&cr("599").sqrt().unwrap())
            .div(&CertReal::pi(prec).scale_u64(4))
            .unwrap();
        // frozen reference: 77.6298545885841260534343806715
        assert!(r.agrees_f64(77.62985458858413));
        assert!(closed.lo() >= r.lo() && closed.hi() <= r.hi(), "closed form {closed} outside {r}");
        let rel = r.width().to_f64() / 77.6;
        assert!(rel <= 1e-12, "relative width {rel}");
    }

    #[test]
    fn depth_budget_is_enforced() {
        struct Spike;
        impl Integrand for Spike {
            fn eval<S: Scalar>(&self, x: &S) -> Result<S> {
                // 1/sqrt(t): unbounded derivative load near 0
                x.lift_u64(1).div(&x.sqrt()?)
            }
        }
        let mut tight = ctx();
        tight.max_quadrature_depth = 3;
        let err = integrate_adaptive(&Spike, &cr("0.0000001"), &cr("1"), 1e-25, &tight);
        assert!(matches!(err, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn empty_range_is_zero() {
        let r = integrate_adaptive(&Identity, &cr("3"), &cr("3"), 1e-10, &ctx()).unwrap();
        assert_eq!(r.sign(), Some(std::cmp::Ordering::Equal));
    }
}
