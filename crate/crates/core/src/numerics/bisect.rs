//! Bisection with certified signs.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::numerics::interval::CertReal;

/// Locate a sign change of `f` inside `[lo, hi]` to within `tol`.
///
/// Endpoint signs must be certifiable and opposite. Midpoint evaluations
/// whose enclosure straddles zero are retried at nearby probe points; if no
/// probe certifies a sign the current (still valid) bracket is returned as
/// long as it already meets the tolerance.
pub fn find_root_bisect(
    f: impl Fn(&CertReal) -> Result<CertReal>,
    lo: &CertReal,
    hi: &CertReal,
    tol: f64,
) -> Result<CertReal> {
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let sign_at = |x: &CertReal| -> Result<Option<Ordering>> { Ok(f(x)?.sign()) };

    let mut a = lo.mid_point();
    let mut b = hi.mid_point();
    let sa = sign_at(&a)?.ok_or_else(|| {
        Error::NoSignChange(format!("sign at lower endpoint {a:.8} not certifiable"))
    })?;
    let sb = sign_at(&b)?.ok_or_else(|| {
        Error::NoSignChange(format!("sign at upper endpoint {b:.8} not certifiable"))
    })?;
    if sa == Ordering::Equal {
        return Ok(a);
    }
    if sb == Ordering::Equal {
        return Ok(b);
    }
    if sa == sb {
        return Err(Error::NoSignChange(format!(
            "same certified sign {sa:?} at both endpoints"
        )));
    }

    loop {
        let bracket = a.hull(&b);
        if bracket.width().to_f64() <= tol {
            return Ok(bracket);
        }
        let mid = bracket.mid_point();
        // probe the midpoint, then slight offsets if the sign is ambiguous
        let width = bracket.width();
        let mut decided = None;
        for num in [0i64, 1, -1, 3, -3] {
            let offset = CertReal::point(width.clone() / 32u32)
                .mul(&CertReal::from_i64(num, mid.prec()));
            let probe = mid.add(&offset).mid_point();
            if let Some(s) = sign_at(&probe)? {
                decided = Some((probe, s));
                break;
            }
        }
        let (probe, s) = match decided {
            Some(d) => d,
            None => {
                return Err(Error::NonConvergence(format!(
                    "sign not certifiable anywhere near {mid:.10}; bracket width {}",
                    bracket.width()
                )))
            }
        };
        match s {
            Ordering::Equal => return Ok(probe),
            s if s == sa => a = probe,
            _ => b = probe,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREC: u32 = 220;

    fn cr(s: &str) -> CertReal {
        CertReal::from_decimal(s, PREC).unwrap()
    }

    #[test]
    fn linear_root() {
        let r = find_root_bisect(|u| Ok(u.sub(&cr("2"))), &cr("0"), &cr("10"), 1e-30).unwrap();
        assert!(r.agrees_f64(2.0));
        assert!(r.width().to_f64() <= 1e-30);
    }

    #[test]
    fn sqrt_two() {
        let r = find_root_bisect(
            |u| Ok(u.mul(u).sub(&cr("2"))),
            &cr("1"),
            &cr("2"),
            1e-40,
        )
        .unwrap();
        // frozen: 1.41421356237309504880168872421
        assert!(r.agrees_f64(1.4142135623730951));
        let two = cr("2");
        let back = r.mul(&r);
        assert!(back.lo() <= two.hi() && two.lo() <= back.hi());
    }

    #[test]
    fn postcondition_recheck() {
        // returned bracket must still show a sign change at its endpoints
        let f = |u: &CertReal| Ok(u.mul(u).mul(u).sub(&cr("5")));
        let r = find_root_bisect(&f, &cr("1"), &cr("2"), 1e-25).unwrap();
        let at_lo = f(&CertReal::point(r.lo().clone())).unwrap();
        let at_hi = f(&CertReal::point(r.hi().clone())).unwrap();
        assert_eq!(at_lo.sign(), Some(Ordering::Less));
        assert_eq!(at_hi.sign(), Some(Ordering::Greater));
    }

    #[test]
    fn no_sign_change_detected() {
        let err = find_root_bisect(
            |u| Ok(u.mul(u).add(&cr("1"))),
            &cr("-1"),
            &cr("1"),
            1e-10,
        );
        assert!(matches!(err, Err(Error::NoSignChange(_))));
    }
}
