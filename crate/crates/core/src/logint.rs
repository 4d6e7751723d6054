//! The logarithmic integral and the scaled remainder Ê of its degree-six
//! asymptotic expansion.
//!
//! li is computed from the exponential integral's convergent power series,
//! with a certified geometric tail bound. The remainder
//!
//!   E(x) = (li(x) − x Σ_{k=0}^{5} k!/log^{k+1}x) / 720,   E'(x) = 1/log⁷x
//!
//! is what the envelope machinery consumes, always in the scaled form
//! Ê(u) = E(e^u) u⁶ e^{-u}. Two independent routes compute Ê: the exact one
//! through li (usable while the series cost ~u terms is tolerable) and the
//! divergent asymptotic series Σ_{j≥0} ((j+6)!/720)/u^{j+1} with certified
//! truncation (usable for large u, which is where the anchor lives).

use rug::Integer;

use crate::error::{Error, Result};
use crate::numerics::interval::CertReal;
use crate::numerics::sum_asymptotic;

const MAX_SERIES_TERMS: usize = 200_000;

/// The exponential integral Ei(t) = γ + log|t| + Σ_{k≥1} t^k/(k·k!), for t
/// certifiably nonzero.
pub fn ei(t: &CertReal) -> Result<CertReal> {
    let sign = t.sign().ok_or_else(|| {
        Error::Domain(format!("Ei needs a certifiably nonzero argument, got {t}"))
    })?;
    if sign == std::cmp::Ordering::Equal {
        return Err(Error::Domain("Ei is not defined at 0".into()));
    }
    let prec = t.prec();
    // For t < 0 the alternating series cancels down from terms of size ~1 to
    // a value of size ~e^{-|t|}; that costs |t|·log2(e) bits of precision.
    let t_mag = t.abs().hi().to_f64();
    let boost = if sign == std::cmp::Ordering::Less {
        (t_mag * 1.4427).ceil() as u32
    } else {
        0
    };
    let prec_w = prec + boost + 32;
    let t = t.with_prec(prec_w);

    let mut sum = CertReal::zero(prec_w);
    let mut pow = CertReal::one(prec_w); // t^k
    let mut fact = Integer::from(1u32); // k!
    let mut k = 0usize;
    loop {
        k += 1;
        if k > MAX_SERIES_TERMS {
            return Err(Error::NonConvergence(format!(
                "Ei series needed more than {MAX_SERIES_TERMS} terms at t = {t:.6}"
            )));
        }
        pow = pow.mul(&t);
        fact *= k as u32;
        let denom = Integer::from(&fact * k as u32);
        let term = pow.div(&CertReal::from_integer(&denom, prec_w))?;
        sum = sum.add(&term);

        // Past k ≥ 2|t| the tail is dominated by the geometric series with
        // ratio |t|/(k+2) ≤ 1/2, so it is at most twice the next term.
        if k as f64 >= 2.0 * t_mag {
            let next_mag = term.abs().mul(&t.abs()).hi().to_f64() / (k as f64 + 1.0);
            let sum_scale = sum.abs().hi().to_f64().max(1.0);
            if next_mag <= sum_scale * 2f64.powi(-(prec_w as i32) + 4) {
                let mut bound = term.abs().mul(&t.abs());
                bound = bound
                    .div(&CertReal::from_u64(k as u64 + 1, prec_w))
                    .expect("k+1 > 0")
                    .scale_u64(2);
                let hi = bound.hi().clone();
                sum = sum.add(&CertReal::new(-hi.clone(), hi));
                break;
            }
        }
    }

    let gamma = CertReal::euler_gamma(prec_w);
    let log_abs = t.abs().ln()?;
    Ok(gamma.add(&log_abs).add(&sum).with_prec(prec))
}

/// li(x) = Ei(log x); x must be certifiably positive and away from 1.
pub fn li(x: &CertReal) -> Result<CertReal> {
    ei(&x.ln()?)
}

/// E(x) = (li(x) − x Σ_{k=0}^{5} k!/log^{k+1}x)/720, for x certifiably > 1.
pub fn remainder_e(x: &CertReal) -> Result<CertReal> {
    let u = x.ln()?;
    if u.sign() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain(format!("E(x) needs x > 1, got {x}")));
    }
    let prec = x.prec();
    let mut expansion = CertReal::zero(prec);
    let mut inv_u_pow = u.recip()?; // u^{-(k+1)}
    let mut fact = CertReal::one(prec);
    for k in 0..=5u64 {
        if k > 0 {
            fact = fact.scale_u64(k);
        }
        expansion = expansion.add(&fact.mul(&inv_u_pow));
        inv_u_pow = inv_u_pow.div(&u)?;
    }
    li(x)?
        .sub(&x.mul(&expansion))
        .div(&CertReal::from_u64(720, prec))
}

/// Ê(u) = E(e^u) u⁶ e^{-u} through the exact li route. Cost grows linearly
/// in u; intended for moderate u and for cross-checking the asymptotic route.
pub fn scaled_e_exact(u: &CertReal) -> Result<CertReal> {
    if u.sign() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain(format!("scaled E needs u > 0, got {u}")));
    }
    let prec = u.prec();
    // Ê = (Ei(u) e^{-u} − Σ_{k=0}^{5} k!/u^{k+1}) · u⁶/720; the subtraction
    // cancels ~6 log2(u) bits, and Ei itself must carry them.
    let prec_w = prec + 96;
    let u = u.with_prec(prec_w);
    let scaled_li = ei(&u.with_prec(prec_w + 96))
        .map(|v| v.with_prec(prec_w))?
        .mul(&u.neg().exp());
    let mut expansion = CertReal::zero(prec_w);
    let mut inv_u_pow = u.recip()?;
    let mut fact = CertReal::one(prec_w);
    for k in 0..=5u64 {
        if k > 0 {
            fact = fact.scale_u64(k);
        }
        expansion = expansion.add(&fact.mul(&inv_u_pow));
        inv_u_pow = inv_u_pow.div(&u)?;
    }
    Ok(scaled_li
        .sub(&expansion)
        .mul(&u.powi(6))
        .div(&CertReal::from_u64(720, prec_w))?
        .with_prec(prec))
}

/// Ê(u) by certified truncation of the asymptotic series
/// (1/u) Σ_{j≥0} ((j+6)!/720)/u^j. Fails with
/// [`Error::DivergenceAtArgument`] when u is too small for the series to
/// decrease at all (u ≲ 7); use [`scaled_e_exact`] there.
pub fn scaled_e(u: &CertReal, tol: f64) -> Result<CertReal> {
    let prec = u.prec();
    let mut c = Integer::from(1u32); // (j+6)!/720, starting at j = 0
    let sum = sum_asymptotic(
        |j| {
            if j > 0 {
                c *= (j + 6) as u32;
            }
            CertReal::from_integer(&c, prec)
        },
        u,
        tol,
    )?;
    sum.div(u)
}

/// Ê(u) − Ê(u1)·(u/u1)⁶·e^{u1-u}, the combination the envelope divides by
/// the a-weighted mass. Both terms use the asymptotic route.
pub fn scaled_e_diff(u: &CertReal, u1: &CertReal, tol: f64) -> Result<CertReal> {
    let ratio = u.div(u1)?.powi(6);
    let damp = u1.sub(u).exp();
    Ok(scaled_e(u, tol)?.sub(&scaled_e(u1, tol)?.mul(&ratio).mul(&damp)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    const PREC: u32 = 224;

    fn cr(s: &str) -> CertReal {
        CertReal::from_decimal(s, PREC).unwrap()
    }

    #[test]
    fn li_at_two() {
        let v = li(&cr("2")).unwrap();
        // frozen: 1.04516378011749278484458888919
        assert!(v.agrees_f64(1.0451637801174928), "li(2) = {v}");
        assert!(v.width().to_f64() < 1e-55);
    }

    #[test]
    fn li_at_one_million() {
        let v = li(&cr("1000000")).unwrap();
        // frozen: 78627.5491594621819198629107479
        assert!(v.agrees_f64(78627.54915946218), "li(1e6) = {v}");
    }

    #[test]
    fn li_rejects_bad_domain() {
        assert!(li(&cr("-3")).is_err());
        assert!(li(&cr("0")).is_err());
        // an enclosure straddling 1 makes log x straddle 0
        let straddle = CertReal::new(
            Float::with_val(PREC, 0.5),
            Float::with_val(PREC, 2),
        );
        assert!(li(&straddle).is_err());
    }

    /// Dual route: our series against MPFR's eint.
    #[test]
    fn ei_matches_mpfr() {
        for t in [-12.5f64, -5.0, -0.75, 0.25, 1.0, 10.0, 42.0] {
            let ours = ei(&CertReal::point(Float::with_val(PREC, t))).unwrap();
            let reference = Float::with_val(PREC, t).eint();
            assert!(
                ours.agrees_f64(reference.to_f64()),
                "Ei({t}): {ours} vs {reference}"
            );
        }
    }

    #[test]
    fn remainder_is_antiderivative_of_inverse_log_seventh() {
        // E(1e6) − E(1e3) = ∫_{1e3}^{1e6} dt/log⁷t,
        // frozen: 0.02399283384586495658465625
        let d = remainder_e(&cr("1000000"))
            .unwrap()
            .sub(&remainder_e(&cr("1000")).unwrap());
        assert!(d.agrees_f64(0.023992833845864957), "E(1e6)-E(1e3) = {d}");
    }

    #[test]
    fn scaled_e_exact_at_fifty() {
        let v = scaled_e_exact(&cr("50")).unwrap();
        // frozen: 0.02334947889178745646835
        assert!(v.agrees_f64(0.023349478891787456), "Ê(50) = {v}");
        assert!(v.width().to_f64() < 1e-40);
    }

    #[test]
    fn scaled_e_asymptotic_values() {
        let v = scaled_e(&cr("673"), 1e-45).unwrap();
        // frozen: 1.501525270133485669151187e-3
        assert!(v.agrees_f64(1.5015252701334857e-3), "Ê(673) = {v}");
        let v = scaled_e(&cr("3157.442"), 1e-45).unwrap();
        // frozen: 3.17416002490788461846024542674e-4
        assert!(v.agrees_f64(3.1741600249078846e-4), "Ê(3157.442) = {v}");
        assert!(v.width().to_f64() < 1e-40);
    }

    #[test]
    fn two_routes_agree() {
        for u in ["40", "50", "120", "673"] {
            let exact = scaled_e_exact(&cr(u)).unwrap();
            let asym = scaled_e(&cr(u), 1e-45).unwrap();
            assert!(
                !(asym.hi() < exact.lo() || exact.hi() < asym.lo()),
                "routes disagree at u = {u}: {exact} vs {asym}"
            );
        }
    }

    #[test]
    fn asymptotic_route_refuses_small_u() {
        assert!(matches!(
            scaled_e(&cr("5"), 1e-30),
            Err(Error::DivergenceAtArgument)
        ));
    }

    #[test]
    fn scaled_e_decreasing() {
        let mut prev = scaled_e_exact(&cr("30")).unwrap();
        for u in ["60", "120", "240", "480", "960"] {
            let v = scaled_e(&cr(u), 1e-40).unwrap();
            assert!(v.lt_certain(&prev), "Ê not decreasing at u = {u}");
            prev = v;
        }
    }

    #[test]
    fn scaled_diff_near_anchor() {
        let u1 = cr("3157.442");
        let u = cr("3158.442");
        let d = scaled_e_diff(&u, &u1, 1e-45).unwrap();
        // frozen: 2.0032238771535360818e-4
        assert!(d.agrees_f64(2.0032238771535361e-4), "diff = {d}");
        assert_eq!(d.sign(), Some(std::cmp::Ordering::Greater));
        // at u = u1 the difference is exactly zero up to enclosure width
        let z = scaled_e_diff(&u1, &u1, 1e-45).unwrap();
        assert!(z.contains_zero());
        assert!(z.width().to_f64() < 1e-40);
    }
}
