//! Empirical audit of the |θ(x) − x| envelope.
//!
//! For every prime p ≤ limit the ratio |θ(x) − x|·log⁵x/(x·a(x)) is
//! evaluated on both sides of the jump at p (at x = p − 1 and x = p) and at
//! x = limit. A fast float screen with a rigorous slack discards points
//! whose ratio is certainly below 0.9; every surviving point is recomputed
//! with interval arithmetic, so the reported maximum is certified. Every
//! ratio above 0.9 (the runner-up region near the x = 599 branch boundary
//! peaks at about 0.97) therefore carries a certified enclosure.

use rug::Integer;

use crate::error::{Error, Result};
use crate::numerics::interval::CertReal;
use crate::theta::{theta_gap_bound_u64, ThetaParams};

use super::engine;
use super::SieveConfig;

/// Screen threshold; candidates above it get the certified treatment.
const SCREEN_CUTOFF: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct ThetaAuditReport {
    pub limit: u64,
    /// certified enclosure of the maximum ratio over all audited points
    pub max_ratio: CertReal,
    /// the x attaining it
    pub argmax_x: u64,
    /// upper bound on every other audited point's ratio
    pub runner_up: f64,
    pub runner_up_x: u64,
    pub points_checked: u64,
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// a(x)/log⁵x in plain floats, deflated so the screened ratio is an upper
/// bound. Only the branches below the 10¹¹ ceiling matter.
fn branch_expr_f64(x: f64) -> f64 {
    let v = if x < 599.0 {
        (2.0 - std::f64::consts::LN_2) / 2.0
    } else {
        let u = x.ln();
        u * u * (-u / 2.0).exp() / (8.0 * std::f64::consts::PI)
    };
    v * (1.0 - 1e-9)
}

/// Upper bound on the ratio at x from the float accumulator. The theta
/// error budget covers Kahan summation (≤ 2ε·θ) and one ulp per log.
fn screened_ratio(x: u64, theta: f64, pi_so_far: u64) -> f64 {
    let xf = x as f64;
    let err = theta * 1e-15 + pi_so_far as f64 * 1e-15 + 1e-12;
    (((theta - xf).abs() + err) / (xf * branch_expr_f64(xf))) * (1.0 + 1e-9)
}

struct AuditState {
    params: ThetaParams,
    theta_f: Kahan,
    theta_cert: CertReal,
    product: Integer,
    pi: u64,
    candidates: Vec<(u64, CertReal)>,
    best: (f64, u64),
    second: (f64, u64),
    points: u64,
}

impl AuditState {
    fn flush(&mut self) -> Result<()> {
        if self.product != 1 {
            let term =
                CertReal::from_integer(&self.product, self.params.prec()).ln()?;
            self.theta_cert = self.theta_cert.add(&term);
            self.product = Integer::from(1);
        }
        Ok(())
    }

    /// Audit one point with the current accumulators (θ of all primes
    /// multiplied in so far).
    fn eval(&mut self, x: u64) -> Result<()> {
        self.points += 1;
        let screened = screened_ratio(x, self.theta_f.sum, self.pi);
        if screened <= SCREEN_CUTOFF {
            if screened > self.best.0 {
                self.second = self.best;
                self.best = (screened, x);
            } else if screened > self.second.0 {
                self.second = (screened, x);
            }
            return Ok(());
        }
        self.flush()?;
        let prec = self.params.prec();
        let gap = self.theta_cert.sub(&CertReal::from_u64(x, prec)).abs();
        let bound = theta_gap_bound_u64(&self.params, x)?;
        let ratio = gap.div(&bound)?;
        if CertReal::one(prec).lt_certain(&ratio) {
            return Err(Error::Domain(format!(
                "theta envelope certifiably exceeded at x = {x}: ratio {ratio:.8}"
            )));
        }
        self.candidates.push((x, ratio));
        Ok(())
    }
}

/// Certified maximum of |θ(x) − x|·log⁵x/(x·a(x)) over primes, the integers
/// just below each prime, and the limit itself.
pub fn audit_theta_bound(limit: u64, cfg: &SieveConfig) -> Result<ThetaAuditReport> {
    if limit < 2 {
        return Err(Error::Domain(format!("limit = {limit} < 2")));
    }
    cfg.guard(limit)?;

    let mut st = AuditState {
        params: ThetaParams::new(cfg.prec),
        theta_f: Kahan::default(),
        theta_cert: CertReal::zero(cfg.prec),
        product: Integer::from(1),
        pi: 0,
        candidates: Vec::new(),
        best: (f64::NEG_INFINITY, 0),
        second: (f64::NEG_INFINITY, 0),
        points: 0,
    };
    let mut prev: Option<u64> = None;

    engine::for_each_prime(&engine::Pass::new(limit, cfg.span()), |p| {
        if let Some(q) = prev {
            // left side of the jump at p; skip when it coincides with q
            if p - 1 > q {
                st.eval(p - 1)?;
            }
        }
        st.theta_f.add((p as f64).ln());
        st.product *= p;
        st.pi += 1;
        if st.product.significant_bits() > super::THETA_BATCH_BITS {
            st.flush()?;
        }
        st.eval(p)?;
        prev = Some(p);
        Ok(())
    })?;
    if prev.map_or(true, |p| p < limit) {
        st.eval(limit)?;
    }

    // the x = 2 point always survives the screen (its ratio is exactly 1),
    // so the candidate list is never empty
    let (argmax_x, max_ratio) = st
        .candidates
        .iter()
        .max_by(|a, b| a.1.hi().partial_cmp(b.1.hi()).expect("finite"))
        .map(|(x, r)| (*x, r.clone()))
        .expect("x = 2 is always certified");
    let mut runner_up = st.best.0.max(st.second.0);
    let mut runner_up_x = if st.best.0 >= st.second.0 {
        st.best.1
    } else {
        st.second.1
    };
    for (x, r) in &st.candidates {
        if *x != argmax_x {
            let hi = r.hi().to_f64();
            if hi > runner_up {
                runner_up = hi;
                runner_up_x = *x;
            }
        }
    }
    Ok(ThetaAuditReport {
        limit,
        max_ratio,
        argmax_x,
        runner_up,
        runner_up_x,
        points_checked: st.points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SieveConfig {
        SieveConfig {
            segment_span: Some(1 << 18),
            ..SieveConfig::default()
        }
    }

    #[test]
    fn maximum_is_one_at_two() {
        let report = audit_theta_bound(599, &cfg()).unwrap();
        assert_eq!(report.argmax_x, 2);
        assert!(report.max_ratio.contains_float(&rug::Float::with_val(64, 1)));
        assert!(report.max_ratio.width().to_f64() < 1e-12);
        // runner-up is the branch boundary itself, certified above the screen
        assert_eq!(report.runner_up_x, 599);
        assert!((report.runner_up - 0.904_357_262_669_127_5).abs() < 1e-6);
    }

    #[test]
    fn million_point_audit_stays_below_one() {
        let report = audit_theta_bound(1_000_000, &cfg()).unwrap();
        assert_eq!(report.argmax_x, 2);
        assert_eq!(report.runner_up_x, 1422);
        assert!((report.runner_up - 0.966_599_192_775_520_4).abs() < 1e-6);
        assert!(report.runner_up < 0.97);
        // both sides of every jump plus the endpoint
        assert!(report.points_checked > 2 * 78_000);
    }

    #[test]
    fn screen_matches_certified_ratio_at_four() {
        // θ(4) = log 6; the exact ratio is (4 − log 6)/(4·(2 − log 2)/2)
        let v = (4.0 - 6.0f64.ln()) / (4.0 * (2.0 - std::f64::consts::LN_2) / 2.0);
        assert!((v - 0.844_869_635_632_766_4).abs() < 1e-15);
    }
}
