//! Exact prime counting and Chebyshev sums by segmented sieve, with the
//! pointwise inequality check π(x)² < (αx/log x)·π(⌊x/α⌋) and an empirical
//! audit of the |θ(x) − x| bound against its certified envelope.
//!
//! π is exact (u64/u128 arithmetic); θ and every right-hand side are
//! outward-rounded intervals, so a reported verdict at a point is certified,
//! never a float comparison.

mod audit;
mod checkpoint;
mod engine;

pub use audit::{audit_theta_bound, ThetaAuditReport};
pub use checkpoint::{Checkpoint, CheckpointRecord};
pub use engine::simple_primes;

use std::path::Path;

use rug::Integer;

use crate::error::{Error, Result};
use crate::numerics::interval::{CertReal, PrecisionContext};

/// Flush the running prime product into the theta sum once it reaches this
/// many bits; one extended-precision ln per flush.
const THETA_BATCH_BITS: u32 = 65_536;

/// Hard cap on query points a single scan may materialize.
const MAX_SCAN_POINTS: usize = 4_000_000;

/// Checkpoint record cadence, in segments.
const CHECKPOINT_STRIDE: u64 = 16;

#[derive(Debug, Clone)]
pub struct SieveConfig {
    /// largest x any operation will accept
    pub ceiling: u64,
    /// streaming memory budget in bytes; bounds the default segment span
    pub memory_budget: u64,
    /// explicit segment span in numbers; derived from the budget when unset
    pub segment_span: Option<u64>,
    /// working precision for theta and right-hand sides
    pub prec: u32,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            ceiling: 100_000_000_000,
            memory_budget: 256 << 20,
            segment_span: None,
            prec: PrecisionContext::new(60).expect("default digits valid").prec_bits(),
        }
    }
}

impl SieveConfig {
    /// Segment span in numbers (even). One byte of bitmap covers 16 numbers;
    /// the span is clamped so the bitmap stays within the memory budget.
    pub fn span(&self) -> u64 {
        let from_budget = self.memory_budget.saturating_mul(16).min(1 << 26);
        (self.segment_span.unwrap_or(from_budget).max(128)) & !1
    }

    fn guard(&self, x: u64) -> Result<()> {
        if x > self.ceiling {
            return Err(Error::ResourceLimit(format!(
                "x = {x} exceeds the configured ceiling {}",
                self.ceiling
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PrimeCountResult {
    pub x: u64,
    pub pi: u64,
    /// Σ_{p ≤ x} log p, outward-rounded
    pub theta: CertReal,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub x: u64,
    pub alpha: CertReal,
    /// ⌊x/α⌋ taken on a certified enclosure of x/α
    pub floor_x_over_alpha: u64,
    pub pi_x: u64,
    pub pi_floor: u64,
    /// π(x)², exact
    pub lhs: u128,
    /// αx/log x · π(⌊x/α⌋)
    pub rhs: CertReal,
    /// None when the rhs enclosure contains lhs (undecided, never rounded)
    pub holds: Option<bool>,
}

/// Accumulates ln of a running product of primes, flushing to an interval
/// sum in batches so the per-prime cost stays integer-only.
struct ThetaAccumulator {
    prec: u32,
    product: Integer,
    total: CertReal,
}

impl ThetaAccumulator {
    fn new(prec: u32) -> Self {
        Self {
            prec,
            product: Integer::from(1),
            total: CertReal::zero(prec),
        }
    }

    fn push(&mut self, p: u64) -> Result<()> {
        self.product *= p;
        if self.product.significant_bits() > THETA_BATCH_BITS {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        if self.product != 1 {
            let term = CertReal::from_integer(&self.product, self.prec).ln()?;
            self.total = self.total.add(&term);
            self.product = Integer::from(1);
        }
        Ok(())
    }

    fn value(&mut self) -> Result<CertReal> {
        self.flush()?;
        Ok(self.total.clone())
    }
}

/// Exact π(x) together with a tight enclosure of θ(x).
pub fn sieve_pi_theta(x: u64, cfg: &SieveConfig) -> Result<PrimeCountResult> {
    if x < 2 {
        return Err(Error::Domain(format!("x = {x} < 2")));
    }
    cfg.guard(x)?;
    let mut pi = 0u64;
    let mut theta = ThetaAccumulator::new(cfg.prec);
    engine::for_each_prime(&engine::Pass::new(x, cfg.span()), |p| {
        pi += 1;
        theta.push(p)
    })?;
    Ok(PrimeCountResult {
        x,
        pi,
        theta: theta.value()?,
    })
}

/// ⌊x/α⌋ from an interval quotient; precision is doubled and the quotient
/// recomputed up to two times before giving up with UndecidedFloor.
pub fn certified_floor(x: u64, alpha: &CertReal, prec: u32) -> Result<u64> {
    let zero = CertReal::zero(prec);
    if !zero.lt_certain(alpha) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha:.8}")));
    }
    let mut p = prec;
    for _ in 0..3 {
        let q = CertReal::from_u64(x, p).div(&alpha.with_prec(p))?;
        let lo = q.lo().clone().floor().to_integer().expect("finite");
        let hi = q.hi().clone().floor().to_integer().expect("finite");
        if lo == hi {
            return lo
                .to_u64()
                .ok_or_else(|| Error::ResourceLimit(format!("floor of {x}/alpha out of u64")));
        }
        p *= 2;
    }
    Err(Error::UndecidedFloor(x))
}

fn decide(lhs: u128, rhs: &CertReal, prec: u32) -> Option<bool> {
    let lhs_cr = CertReal::from_u128(lhs, prec);
    if lhs_cr.lt_certain(rhs) {
        Some(true)
    } else if rhs.le_certain(&lhs_cr) {
        Some(false)
    } else {
        None
    }
}

fn build_check(
    x: u64,
    alpha: &CertReal,
    floor: u64,
    pi_x: u64,
    pi_floor: u64,
    prec: u32,
) -> Result<CheckResult> {
    let x_cr = CertReal::from_u64(x, prec);
    let rhs = alpha
        .with_prec(prec)
        .mul(&x_cr)
        .div(&x_cr.ln()?)?
        .mul(&CertReal::from_u64(pi_floor, prec));
    let lhs = (pi_x as u128) * (pi_x as u128);
    let holds = decide(lhs, &rhs, prec);
    Ok(CheckResult {
        x,
        alpha: alpha.clone(),
        floor_x_over_alpha: floor,
        pi_x,
        pi_floor,
        lhs,
        rhs,
        holds,
    })
}

/// One-point check of π(x)² < (αx/log x)·π(⌊x/α⌋).
pub fn check_point(x: u64, alpha: &CertReal, cfg: &SieveConfig) -> Result<CheckResult> {
    if x < 2 {
        return Err(Error::Domain(format!("x = {x} < 2")));
    }
    cfg.guard(x)?;
    let floor = certified_floor(x, alpha, cfg.prec)?;
    let mut points = vec![floor, x];
    points.sort_unstable();
    points.dedup();
    let answers =
        engine::pi_at_sorted_points(&engine::Pass::new(x, cfg.span()), &points, |_, _| Ok(()))?;
    let lookup = |q: u64| answers[points.binary_search(&q).expect("queried")];
    build_check(x, alpha, floor, lookup(x), lookup(floor), cfg.prec)
}

/// Full check results for every integer in [lo, hi], from one shared sieve
/// pass over [2, hi]. `checkpoint` names an optional resumable state file.
pub fn scan_range_detailed(
    lo: u64,
    hi: u64,
    alpha: &CertReal,
    cfg: &SieveConfig,
    checkpoint_path: Option<&Path>,
) -> Result<Vec<CheckResult>> {
    if lo < 2 || lo > hi {
        return Err(Error::Domain(format!("bad scan range [{lo}, {hi}]")));
    }
    cfg.guard(hi)?;
    let n = (hi - lo + 1) as usize;
    if n * 2 > MAX_SCAN_POINTS {
        return Err(Error::ResourceLimit(format!(
            "scan of {n} integers needs more than {MAX_SCAN_POINTS} query points"
        )));
    }

    let floors: Vec<u64> = (lo..=hi)
        .map(|x| certified_floor(x, alpha, cfg.prec))
        .collect::<Result<_>>()?;
    let mut points: Vec<u64> = floors.iter().copied().chain(lo..=hi).collect();
    points.sort_unstable();
    points.dedup();

    let span = cfg.span();
    let mut pass = engine::Pass::new(hi, span);
    let mut state = Checkpoint::new(span, cfg.prec);
    if let Some(path) = checkpoint_path {
        if path.exists() {
            let prior = Checkpoint::read(path)?;
            if prior.span != span || prior.prec != cfg.prec {
                return Err(Error::Format(format!(
                    "checkpoint was written with span {} / prec {}, run uses span {span} / prec {}",
                    prior.span, prior.prec, cfg.prec
                )));
            }
            let first_sieved = points.iter().copied().find(|&q| q >= 3).unwrap_or(u64::MAX);
            pass.resume = prior.best_resume(first_sieved);
            state = prior;
        }
    }

    let mut seg_count = 0u64;
    let answers = engine::pi_at_sorted_points(&pass, &points, |base, cum| {
        if let Some(path) = checkpoint_path {
            seg_count += 1;
            if seg_count % CHECKPOINT_STRIDE == 0 {
                if state.records.last().map(|r| r.base) < Some(base) {
                    state.records.push(CheckpointRecord {
                        base,
                        cum_pi: cum,
                        theta: None,
                    });
                }
                state.write(path)?;
            }
        }
        Ok(())
    })?;
    let lookup = |q: u64| answers[points.binary_search(&q).expect("queried")];

    (lo..=hi)
        .zip(floors)
        .map(|(x, floor)| build_check(x, alpha, floor, lookup(x), lookup(floor), cfg.prec))
        .collect()
}

/// Integers in [lo, hi] where the inequality certifiably fails. An undecided
/// point is an error, never silently dropped or counted.
pub fn scan_range(
    lo: u64,
    hi: u64,
    alpha: &CertReal,
    cfg: &SieveConfig,
    checkpoint_path: Option<&Path>,
) -> Result<Vec<u64>> {
    scan_range_detailed(lo, hi, alpha, cfg, checkpoint_path)?
        .into_iter()
        .filter_map(|r| match r.holds {
            Some(false) => Some(Ok(r.x)),
            Some(true) => None,
            None => Some(Err(Error::Domain(format!(
                "comparison undecided at x = {}",
                r.x
            )))),
        })
        .collect()
}

/// CSV rendering of scan results. Interval endpoints are exact decimal
/// strings, so equal runs produce byte-identical files.
pub fn scan_csv(results: &[CheckResult]) -> String {
    let mut out = String::from("x,pi_x,floor_x_over_alpha,pi_floor,lhs,rhs_lo,rhs_hi,holds\n");
    for r in results {
        let (rhs_lo, rhs_hi) = r.rhs.to_decimal_pair();
        let holds = match r.holds {
            Some(true) => "true",
            Some(false) => "false",
            None => "undecided",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.x, r.pi_x, r.floor_x_over_alpha, r.pi_floor, r.lhs, rhs_lo, rhs_hi, holds
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_small() -> SieveConfig {
        SieveConfig {
            segment_span: Some(1 << 16),
            ..SieveConfig::default()
        }
    }

    fn trial_division_pi(x: u64) -> u64 {
        (2..=x)
            .filter(|&n| {
                let mut d = 2;
                while d * d <= n {
                    if n % d == 0 {
                        return false;
                    }
                    d += 1;
                }
                true
            })
            .count() as u64
    }

    #[test]
    fn pi_matches_trial_division() {
        let cfg = cfg_small();
        for x in [2u64, 3, 10, 97, 1000, 99_991, 100_000] {
            assert_eq!(sieve_pi_theta(x, &cfg).unwrap().pi, trial_division_pi(x));
        }
    }

    #[test]
    fn theta_of_ten_is_log_210() {
        let r = sieve_pi_theta(10, &cfg_small()).unwrap();
        assert_eq!(r.pi, 4);
        assert!(r.theta.agrees_f64(5.347_107_530_717_468_6));
        let direct = CertReal::from_u64(210, r.theta.prec()).ln().unwrap();
        assert!(!(r.theta.hi() < direct.lo()) && !(direct.hi() < r.theta.lo()));
    }

    #[test]
    fn theta_contains_double_precision_recomputation() {
        let cfg = cfg_small();
        let base = sieve_pi_theta(100_000, &cfg).unwrap();
        let fine = sieve_pi_theta(
            100_000,
            &SieveConfig {
                prec: cfg.prec * 2,
                ..cfg
            },
        )
        .unwrap();
        // both enclose the same real number, so they must overlap and the
        // doubled-precision one must be at least as tight
        assert!(!(base.theta.hi() < fine.theta.lo()));
        assert!(!(fine.theta.hi() < base.theta.lo()));
        assert!(fine.theta.width() <= base.theta.width());
    }

    #[test]
    fn theta_is_segmentation_invariant_and_tight() {
        let a = sieve_pi_theta(50_000, &cfg_small()).unwrap();
        let b = sieve_pi_theta(
            50_000,
            &SieveConfig {
                segment_span: Some(4096),
                ..SieveConfig::default()
            },
        )
        .unwrap();
        assert_eq!(a.pi, b.pi);
        assert!(!(a.theta.hi() < b.theta.lo()) && !(b.theta.hi() < a.theta.lo()));
        let rel = a.theta.width().to_f64() / a.theta.to_f64();
        assert!(rel < 1e-20, "relative width {rel}");
    }

    #[test]
    fn ceiling_is_enforced() {
        let cfg = SieveConfig {
            ceiling: 1_000,
            ..cfg_small()
        };
        assert!(matches!(
            sieve_pi_theta(1_001, &cfg),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn check_at_three_fails_with_zero_rhs() {
        let cfg = cfg_small();
        let alpha = CertReal::e(cfg.prec);
        let r = check_point(3, &alpha, &cfg).unwrap();
        assert_eq!(r.pi_x, 2);
        assert_eq!(r.floor_x_over_alpha, 1);
        assert_eq!(r.pi_floor, 0);
        assert_eq!(r.lhs, 4);
        assert!(r.rhs.contains_zero() && r.rhs.width().to_f64() == 0.0);
        assert_eq!(r.holds, Some(false));
    }

    #[test]
    fn check_at_hundred_holds() {
        let cfg = cfg_small();
        let alpha = CertReal::e(cfg.prec);
        let r = check_point(100, &alpha, &cfg).unwrap();
        assert_eq!(r.pi_x, 25);
        assert_eq!(r.floor_x_over_alpha, 36);
        assert_eq!(r.pi_floor, 11);
        assert_eq!(r.lhs, 625);
        assert_eq!(r.holds, Some(true));
    }

    #[test]
    fn scan_two_to_five_all_fail() {
        let cfg = cfg_small();
        let alpha = CertReal::e(cfg.prec);
        let failing = scan_range(2, 5, &alpha, &cfg, None).unwrap();
        assert_eq!(failing, vec![2, 3, 4, 5]);
    }

    #[test]
    fn larger_alpha_same_floor_never_flips_true_to_false() {
        // 100/e = 36.79.., 100/2.73 = 36.63..: same floor, larger rhs
        let cfg = cfg_small();
        let a1 = CertReal::e(cfg.prec);
        let a2 = CertReal::from_decimal("2.73", cfg.prec).unwrap();
        let r1 = check_point(100, &a1, &cfg).unwrap();
        let r2 = check_point(100, &a2, &cfg).unwrap();
        assert_eq!(r1.floor_x_over_alpha, r2.floor_x_over_alpha);
        assert_eq!(r1.holds, Some(true));
        assert_eq!(r2.holds, Some(true));
        assert!(r1.rhs.lt_certain(&r2.rhs) || r2.rhs.lt_certain(&r1.rhs));
    }

    #[test]
    fn csv_has_contracted_columns() {
        let cfg = cfg_small();
        let alpha = CertReal::e(cfg.prec);
        let rows = scan_range_detailed(2, 4, &alpha, &cfg, None).unwrap();
        let csv = scan_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "x,pi_x,floor_x_over_alpha,pi_floor,lhs,rhs_lo,rhs_hi,holds"
        );
        assert_eq!(lines.count(), 3);
        assert!(csv.contains("2,1,0,0,1,0,0,false"));
    }

    #[test]
    fn scan_resumes_from_checkpoint_identically() {
        let cfg = SieveConfig {
            segment_span: Some(4096),
            ..SieveConfig::default()
        };
        let alpha = CertReal::e(cfg.prec);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ckpt");
        let fresh = scan_range_detailed(400_000, 400_020, &alpha, &cfg, Some(&path)).unwrap();
        assert!(path.exists());
        let ck = Checkpoint::read(&path).unwrap();
        assert!(!ck.records.is_empty());
        let resumed = scan_range_detailed(400_000, 400_020, &alpha, &cfg, Some(&path)).unwrap();
        for (a, b) in fresh.iter().zip(&resumed) {
            assert_eq!((a.x, a.pi_x, a.pi_floor, a.holds), (b.x, b.pi_x, b.pi_floor, b.holds));
            assert_eq!(a.rhs.to_decimal_pair(), b.rhs.to_decimal_pair());
        }
    }

    #[test]
    fn undecided_floor_is_reported() {
        // alpha = 1 makes x/alpha land exactly on an integer; the enclosure
        // of 7/1 is a point, so the floor is decided. A tiny interval around
        // 1 that straddles 7/alpha across 7 forces the undecided path.
        let cfg = cfg_small();
        let alpha = CertReal::from_decimal_pair("0.9999999", "1.0000001", cfg.prec).unwrap();
        assert!(matches!(
            certified_floor(7, &alpha, cfg.prec),
            Err(Error::UndecidedFloor(7))
        ));
    }
}
