//! The piecewise function a(x) bounding |θ(x) − x| ≤ a(x)·x/log⁵x, with the
//! monotonicity certificate for its final branch.
//!
//! Everything is evaluated in u-space (u = log x). The branch expressions
//! below are a(x)/log⁵x rewritten in u, so a(u) = u⁵ · expr(u):
//!
//!   B1  [log 2, log 599)          (2 − log 2)/2
//!   B2  [log 599, log(1.101e26))  u² e^{-u/2} / (8π)
//!   B3  [log(1.101e26), 673)      √(8/(17π)) (u/6.455)^{1/4} e^{-√(u/6.455)}
//!   B4  [673, ∞)                  121.0961 (u/R)^{3/2} e^{-2√(u/R)},  R = 5.5666305
//!
//! Boundaries are half-open [lo, hi); ties go to the upper branch. a(x) is
//! not continuous at the boundaries and nothing here smooths it.

use crate::error::{Error, Result};
use crate::numerics::interval::{CertReal, LogPoint};
use crate::numerics::scalar::Scalar;

/// Refuse x-scaled forms above this u; callers must stay in u-space there.
const X_SCALE_U_LIMIT: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    B1,
    B2,
    B3,
    B4,
}

#[derive(Debug, Clone)]
pub struct BranchSpec {
    pub id: Branch,
    /// inclusive
    pub u_lo: CertReal,
    /// exclusive; absent for the last branch
    pub u_hi: Option<CertReal>,
}

/// The branch constants, parsed outward once per precision.
#[derive(Debug, Clone)]
pub struct ThetaParams {
    prec: u32,
    pub ln2: CertReal,
    pub ln599: CertReal,
    /// log(1.101e26), with the boundary stored as the exact integer 1101e23
    pub ln_b3: CertReal,
    pub u_b4: CertReal, // 673
    b1_const: CertReal,          // (2 - log 2)/2
    eight_pi: CertReal,          // 8π
    b3_front: CertReal,          // sqrt(8/(17π))
    b3_scale: CertReal,          // 6.455
    b4_front: CertReal,          // 121.0961
    pub r: CertReal,             // R = 5.5666305, exactly as a decimal literal
    six_point_five_sq_r: CertReal, // 6.5² · R, the analytic crossover
}

impl ThetaParams {
    pub fn new(prec: u32) -> Self {
        let two = CertReal::from_u64(2, prec);
        let ln2 = CertReal::ln2(prec);
        let b1_const = two.sub(&ln2).div(&two).expect("2 != 0");
        let pi = CertReal::pi(prec);
        let r = CertReal::from_decimal("5.5666305", prec).expect("literal");
        // boundary 1.101e26 kept as the exact decimal 1101·10^23
        let b3_boundary = {
            let mut v = rug::Integer::from(1101u32);
            v *= rug::Integer::from(rug::Integer::u_pow_u(10, 23));
            CertReal::from_integer(&v, prec)
        };
        Self {
            prec,
            ln2,
            ln599: CertReal::from_u64(599, prec).ln().expect("599 > 0"),
            ln_b3: b3_boundary.ln().expect("positive"),
            u_b4: CertReal::from_u64(673, prec),
            b1_const,
            eight_pi: pi.scale_u64(8),
            b3_front: CertReal::from_u64(8, prec)
                .div(&pi.scale_u64(17))
                .expect("17π != 0")
                .sqrt()
                .expect("positive"),
            b3_scale: CertReal::from_decimal("6.455", prec).expect("literal"),
            b4_front: CertReal::from_decimal("121.0961", prec).expect("literal"),
            six_point_five_sq_r: CertReal::from_decimal("42.25", prec)
                .expect("literal")
                .mul(&r),
            r,
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn branch_table(&self) -> [BranchSpec; 4] {
        [
            BranchSpec {
                id: Branch::B1,
                u_lo: self.ln2.clone(),
                u_hi: Some(self.ln599.clone()),
            },
            BranchSpec {
                id: Branch::B2,
                u_lo: self.ln599.clone(),
                u_hi: Some(self.ln_b3.clone()),
            },
            BranchSpec {
                id: Branch::B3,
                u_lo: self.ln_b3.clone(),
                u_hi: Some(self.u_b4.clone()),
            },
            BranchSpec {
                id: Branch::B4,
                u_lo: self.u_b4.clone(),
                u_hi: None,
            },
        ]
    }

    /// Branches whose domain intersects the enclosure of u.
    pub fn branches_for(&self, u: &CertReal) -> Vec<Branch> {
        self.branch_table()
            .iter()
            .filter(|spec| {
                let above_lo = !(u.hi() < spec.u_lo.lo());
                let below_hi = match &spec.u_hi {
                    Some(hi) => u.lo() < hi.hi(),
                    None => true,
                };
                above_lo && below_hi
            })
            .map(|spec| spec.id)
            .collect()
    }

    /// a(x)/log⁵x as a function of u, generic over intervals and jets.
    pub fn branch_expr<S: Scalar>(&self, branch: Branch, u: &S) -> Result<S> {
        match branch {
            Branch::B1 => Ok(u.lift(&self.b1_const)),
            Branch::B2 => {
                // u² e^{-u/2} / (8π)
                let half = u.div(&u.lift_u64(2))?;
                u.powi(2)
                    .mul(&half.neg().exp())
                    .div(&u.lift(&self.eight_pi))
            }
            Branch::B3 => {
                let y = u.div(&u.lift(&self.b3_scale))?;
                let quarter_root = y.sqrt()?.sqrt()?;
                Ok(u.lift(&self.b3_front)
                    .mul(&quarter_root)
                    .mul(&y.sqrt()?.neg().exp()))
            }
            Branch::B4 => {
                let y = u.div(&u.lift(&self.r))?;
                let three_half = y.mul(&y.sqrt()?);
                let decay = y.sqrt()?.mul(&u.lift_u64(2)).neg().exp();
                Ok(u.lift(&self.b4_front).mul(&three_half).mul(&decay))
            }
        }
    }

    /// a(u) = u⁵ · branch expression, generic like [`branch_expr`].
    pub fn a_expr<S: Scalar>(&self, branch: Branch, u: &S) -> Result<S> {
        Ok(u.powi(5).mul(&self.branch_expr(branch, u)?))
    }
}

/// a(x) at u = log x. When the enclosure of u straddles a branch boundary
/// the result is the hull over all touched branches (a is discontinuous
/// there; the hull is the sound enclosure).
pub fn a_eval(params: &ThetaParams, u: &LogPoint) -> Result<CertReal> {
    let u = u.u();
    let mut result: Option<CertReal> = None;
    for branch in params.branches_for(u) {
        let v = params.a_expr(branch, u)?;
        result = Some(match result {
            Some(acc) => acc.hull(&v),
            None => v,
        });
    }
    result.ok_or_else(|| Error::Domain(format!("u = {u} below log 2")))
}

/// The certified bound on |θ(x) − x|, namely a(x)·x/log⁵x, for x given
/// exactly.
pub fn theta_gap_bound_u64(params: &ThetaParams, x: u64) -> Result<CertReal> {
    if x < 2 {
        return Err(Error::Domain(format!("x = {x} < 2")));
    }
    let lp = LogPoint::from_x_u64(x, params.prec)?;
    theta_gap_bound(params, &lp)
}

/// Same bound for a log-point, as long as x = e^u is still a sensible
/// scale to materialize.
pub fn theta_gap_bound(params: &ThetaParams, lp: &LogPoint) -> Result<CertReal> {
    let u = lp.u();
    if u.hi().to_f64() > X_SCALE_U_LIMIT {
        return Err(Error::OverflowRefusal(format!("{u:.8}")));
    }
    let x = u.exp();
    let mut result: Option<CertReal> = None;
    for branch in params.branches_for(u) {
        let v = params.branch_expr(branch, u)?.mul(&x);
        result = Some(match result {
            Some(acc) => acc.hull(&v),
            None => v,
        });
    }
    Ok(result.expect("LogPoint guarantees u >= log 2"))
}

/// Lemma-level certificate that a is strictly decreasing at u (branch B4
/// only): the sign condition √(u/R) > 6.5 of the log-derivative of
/// u^{6.5} e^{-2√(u/R)}.
pub fn a_monotone_certificate(params: &ThetaParams, u: &CertReal) -> Result<bool> {
    if u.lo() < params.u_b4.lo() {
        return Err(Error::Domain(format!(
            "monotonicity certificate only applies on branch B4 (u >= 673); got {u:.8}"
        )));
    }
    let root = u.div(&params.r)?.sqrt()?;
    let six_five = CertReal::from_decimal("6.5", params.prec).expect("literal");
    Ok(six_five.lt_certain(&root))
}

/// The analytic crossover 6.5²·R of the certificate, for checking that it
/// sits strictly below the start of branch B4 (so the certificate covers the
/// whole branch).
pub fn monotone_crossover(params: &ThetaParams) -> CertReal {
    params.six_point_five_sq_r.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::interval::PrecisionContext;

    fn params() -> ThetaParams {
        ThetaParams::new(PrecisionContext::default().prec_bits())
    }

    fn lp(p: &ThetaParams, s: &str) -> LogPoint {
        LogPoint::new(CertReal::from_decimal(s, p.prec()).unwrap()).unwrap()
    }

    #[test]
    fn a_at_anchor_matches_paper() {
        let p = params();
        let a = a_eval(&p, &lp(&p, "3157.442")).unwrap();
        // 1056.767676… with enclosure width well under 1e-5
        assert!(a.agrees_f64(1056.7676762075824), "a(x1) = {a}");
        assert!(a.width().to_f64() < 1e-5);
    }

    #[test]
    fn branch_b1_closed_form() {
        let p = params();
        let u = CertReal::from_u64(4, p.prec()).ln().unwrap();
        let a = a_eval(&p, &LogPoint::new(u).unwrap()).unwrap();
        // ((2-log2)/2)·log⁵4, frozen 3.34559962691096080783914
        assert!(a.agrees_f64(3.345599626910961), "a(4) = {a}");
    }

    #[test]
    fn branch_b2_closed_form() {
        let p = params();
        let u = CertReal::from_u64(1_000_000, p.prec()).ln().unwrap();
        let a = a_eval(&p, &LogPoint::new(u).unwrap()).unwrap();
        // log⁷(1e6)/(8π·1e3), frozen 3822.334707273237735513592
        assert!(a.agrees_f64(3822.3347072732377), "a(1e6) = {a}");
    }

    #[test]
    fn gap_bound_tight_at_two() {
        let p = params();
        let b = theta_gap_bound_u64(&p, 2).unwrap();
        // exactly 2 - log 2
        let expect = CertReal::from_u64(2, p.prec()).sub(&CertReal::ln2(p.prec()));
        assert!(b.lo() <= expect.lo() && expect.hi() <= b.hi());
        assert!(b.agrees_f64(1.3068528194400547));
    }

    #[test]
    fn gap_bound_b2_closed_forms() {
        let p = params();
        // x = 1e6: √x·log²x/(8π), frozen 7594.409628469951606593704
        let b = theta_gap_bound_u64(&p, 1_000_000).unwrap();
        assert!(b.agrees_f64(7594.409628469952), "bound(1e6) = {b}");
        // x = 599 selects B2 (half-open boundary, ties to the upper branch):
        // √599·log²599/(8π), frozen 39.82815416328248306396239
        let b = theta_gap_bound_u64(&p, 599).unwrap();
        assert!(b.agrees_f64(39.82815416328248), "bound(599) = {b}");
        // and 598 is still B1
        let b = theta_gap_bound_u64(&p, 598).unwrap();
        assert!(b.agrees_f64(598.0 * 0.6534264097200273), "bound(598) = {b}");
    }

    #[test]
    fn gap_bound_refuses_huge_u() {
        let p = params();
        let err = theta_gap_bound(&p, &lp(&p, "3157.442"));
        assert!(matches!(err, Err(Error::OverflowRefusal(_))));
    }

    #[test]
    fn monotone_certificate() {
        let p = params();
        let u673 = CertReal::from_u64(673, p.prec());
        assert!(a_monotone_certificate(&p, &u673).unwrap());
        let anchor = CertReal::from_decimal("3157.442", p.prec()).unwrap();
        assert!(a_monotone_certificate(&p, &anchor).unwrap());
        // below branch B4 the certificate does not apply
        let u600 = CertReal::from_u64(600, p.prec());
        assert!(a_monotone_certificate(&p, &u600).is_err());
        // analytic crossover 6.5²·R ≈ 235.19 sits below 673, so the
        // certificate holds on the whole branch
        let crossover = monotone_crossover(&p);
        assert!(crossover.agrees_f64(235.190138625));
        assert!(crossover.lt_certain(&u673));
    }

    #[test]
    fn a_monotone_on_b4_grid() {
        let p = params();
        let mut prev: Option<CertReal> = None;
        for i in 0..40 {
            let u = 673.0 + (i as f64) * 100.0;
            let a = a_eval(&p, &lp(&p, &format!("{u}"))).unwrap();
            assert!(
                a_monotone_certificate(&p, &CertReal::from_decimal(&format!("{u}"), p.prec()).unwrap())
                    .unwrap()
            );
            if let Some(prev) = &prev {
                assert!(a.lt_certain(prev), "a not decreasing at u = {u}");
            }
            prev = Some(a);
        }
    }

    #[test]
    fn a_positive_across_branches() {
        let p = params();
        for s in ["0.6931471805599454", "2", "6.5", "30", "59.96", "100", "672", "673", "700", "4000"] {
            let a = a_eval(&p, &lp(&p, s)).unwrap();
            assert_eq!(a.sign(), Some(std::cmp::Ordering::Greater), "a at u={s}");
        }
    }

    #[test]
    fn straddling_boundary_hulls_both_branches() {
        let p = params();
        // an interval around log 599 touches B1 and B2
        let u = CertReal::new(
            CertReal::from_decimal("6.39", p.prec()).unwrap().lo().clone(),
            CertReal::from_decimal("6.40", p.prec()).unwrap().hi().clone(),
        );
        let branches = p.branches_for(&u);
        assert_eq!(branches, vec![Branch::B1, Branch::B2]);
        let a = a_eval(&p, &LogPoint::new(u).unwrap()).unwrap();
        assert!(a.width().to_f64() > 1.0, "hull across the jump is wide: {a}");
    }
}
