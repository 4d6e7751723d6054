//! The endgame: the ε-polynomials built from the envelope constants, the
//! certified threshold above which π(x)² < (ex/log x)·π(x/e), and the exact
//! integer coefficients of the full asymptotic expansion of the difference.
//!
//! With constants m ≤ m(u), M ≥ M(u) on [u1, ∞), the inequality reduces to
//! ε_M(u) − ε_m(u) < u for u ≥ u1 + 1, where
//!
//!   ε_m(u) = 206 + m + 364/u + 381/u² + 238/u³ + 97/u⁴ + 30/u⁵ + 8/u⁶
//!   ε_M(u) = 72 + 2M + (2M+132)/u + (4M+288)/u² + (12M+576)/u³
//!            + 48M/u⁴ + M²/u⁵
//!
//! (the source display of ε_M carries a stray doubled plus sign before the
//! 48M term; it is read as a single plus, and that policy is recorded in the
//! certificate). The two polynomials are evaluated separately and subtracted
//! as intervals so the printed coefficients stay auditable.

use std::time::{SystemTime, UNIX_EPOCH};

use rug::Integer;
use serde_json::{json, Map, Value};

use crate::envelope::{envelope_constants, EnvelopeConstants};
use crate::error::{Error, Result};
use crate::numerics::interval::{CertReal, PrecisionContext};
use crate::numerics::find_root_bisect;

#[derive(Debug, Clone)]
pub struct EpsilonParams {
    /// the lower envelope constant m
    pub lower: CertReal,
    /// the upper envelope constant M
    pub upper: CertReal,
}

impl EpsilonParams {
    pub fn new(lower: CertReal, upper: CertReal) -> Self {
        Self { lower, upper }
    }

    pub fn from_envelope(env: &EnvelopeConstants) -> Self {
        Self::new(env.lower.clone(), env.upper.clone())
    }

    /// Coefficients of ε_m over 1/u⁰..1/u⁶, exactly as displayed.
    pub fn lower_coeffs(&self) -> [CertReal; 7] {
        let prec = self.lower.prec();
        let c = |v: u64| CertReal::from_u64(v, prec);
        [
            c(206).add(&self.lower),
            c(364),
            c(381),
            c(238),
            c(97),
            c(30),
            c(8),
        ]
    }

    /// Coefficients of ε_M over 1/u⁰..1/u⁵, exactly as displayed.
    pub fn upper_coeffs(&self) -> [CertReal; 6] {
        let prec = self.upper.prec();
        let c = |v: u64| CertReal::from_u64(v, prec);
        let m = &self.upper;
        [
            c(72).add(&m.scale_u64(2)),
            m.scale_u64(2).add(&c(132)),
            m.scale_u64(4).add(&c(288)),
            m.scale_u64(12).add(&c(576)),
            m.scale_u64(48),
            m.mul(m),
        ]
    }
}

fn poly_in_inverse_u(coeffs: &[CertReal], u: &CertReal) -> Result<CertReal> {
    let inv = u.recip()?;
    let mut acc = CertReal::zero(u.prec());
    for c in coeffs.iter().rev() {
        acc = acc.mul(&inv).add(c);
    }
    Ok(acc)
}

/// ε_M(u) − ε_m(u), as an interval subtraction of the two polynomial values.
pub fn epsilon_gap(u: &CertReal, params: &EpsilonParams) -> Result<CertReal> {
    if u.sign() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain(format!("gap needs u > 0, got {u}")));
    }
    let upper = poly_in_inverse_u(&params.upper_coeffs(), u)?;
    let lower = poly_in_inverse_u(&params.lower_coeffs(), u)?;
    Ok(upper.sub(&lower))
}

/// The u → ∞ limit of the gap: (72 + 2M) − (206 + m).
pub fn epsilon_gap_limit(params: &EpsilonParams) -> CertReal {
    params.upper_coeffs()[0].sub(&params.lower_coeffs()[0])
}

/// Whether gap(u) − u is certifiably strictly decreasing on [from, ∞).
///
/// The derivative is −1 − Σ_k k·δ_k/u^{k+1} with δ_k the coefficient
/// differences; only the negative δ_k can push it up, each by at most
/// k·|δ_k|/from^{k+1} (decreasing in u). Certified when that sum is < 1.
fn decreasing_from(params: &EpsilonParams, from: &CertReal) -> Result<bool> {
    if from.sign() != Some(std::cmp::Ordering::Greater) {
        return Ok(false);
    }
    let prec = from.prec();
    let upper = params.upper_coeffs();
    let lower = params.lower_coeffs();
    let mut push = CertReal::zero(prec);
    let mut inv_pow = from.recip()?.powi(2);
    for k in 1..=6usize {
        let delta = upper
            .get(k)
            .cloned()
            .unwrap_or_else(|| CertReal::zero(prec))
            .sub(&lower[k]);
        let negative_part = delta.min(&CertReal::zero(prec)).abs();
        push = push.add(&negative_part.scale_u64(k as u64).mul(&inv_pow));
        inv_pow = inv_pow.div(from)?;
    }
    Ok(push.lt_certain(&CertReal::one(prec)))
}

/// Smallest point (by doubling from `start`) where the decrease certificate
/// holds.
fn decrease_point(params: &EpsilonParams, start: &CertReal) -> Result<CertReal> {
    let mut u = start.clone();
    for _ in 0..60 {
        if decreasing_from(params, &u)? {
            return Ok(u);
        }
        u = u.scale_u64(2);
    }
    Err(Error::TailUnbounded(
        "gap(u) - u never becomes certifiably decreasing".into(),
    ))
}

/// Certify f(u) = gap(u) − u < 0 on the compact range [a, b] by adaptive
/// interval subdivision.
fn certify_negative_on(params: &EpsilonParams, a: &CertReal, b: &CertReal) -> Result<()> {
    let mut stack = vec![(a.clone(), b.clone(), 0u32)];
    while let Some((a, b, depth)) = stack.pop() {
        let cell = a.hull(&b);
        let f = epsilon_gap(&cell, params)?.sub(&cell);
        if f.sign() == Some(std::cmp::Ordering::Less) {
            continue;
        }
        if depth >= 40 {
            return Err(Error::NonConvergence(format!(
                "could not certify gap(u) < u on [{a:.6}, {b:.6}]"
            )));
        }
        let mid = cell.mid_point();
        stack.push((mid.clone(), b, depth + 1));
        stack.push((a, mid, depth + 1));
    }
    Ok(())
}

/// Certified u* with gap(u) < u for every u ≥ u* (taking u* at the upper
/// endpoint of the returned enclosure). Fails with
/// [`Error::ThresholdAboveAnchor`] when gap(u1+1) is not certifiably below
/// u1+1, i.e. the statement would not hold at e·x1.
pub fn threshold_solve_with(
    params: &EpsilonParams,
    u1: &CertReal,
    tol: f64,
) -> Result<CertReal> {
    let prec = u1.prec();
    let anchor = u1.add(&CertReal::one(prec));
    let f = |u: &CertReal| Ok(epsilon_gap(u, params)?.sub(u));

    let at_anchor = f(&anchor)?;
    if at_anchor.sign() != Some(std::cmp::Ordering::Less) {
        // best-effort root location above the anchor, for the error message
        let limit = epsilon_gap_limit(params);
        let far = limit.abs().add(&anchor).scale_u64(4);
        let located = find_root_bisect(&f, &anchor, &far, 1e-6)
            .map(|r| format!("{r:.10}"))
            .unwrap_or_else(|_| "above the search range".into());
        return Err(Error::ThresholdAboveAnchor {
            threshold: located,
            anchor: format!("{anchor:.10}"),
        });
    }

    let floor = CertReal::ln2(prec);
    let at_floor = f(&floor)?;
    let root = if at_floor.sign() == Some(std::cmp::Ordering::Less) {
        // already below at the domain floor: the threshold is the floor
        floor.clone()
    } else {
        find_root_bisect(&f, &floor, &anchor, tol)?
    };

    // gap(u) < u beyond the root: certified negative up to the point where
    // the decrease certificate takes over, strictly decreasing after.
    let from = CertReal::point(root.hi().clone());
    let handoff = decrease_point(params, &from)?;
    certify_negative_on(params, &from, &handoff)?;
    Ok(root)
}

/// Threshold from certified envelope constants.
pub fn threshold_solve(env: &EnvelopeConstants, tol: f64) -> Result<CertReal> {
    threshold_solve_with(&EpsilonParams::from_envelope(env), &env.u1, tol)
}

#[derive(Debug, Clone)]
pub struct CertificateMetadata {
    pub schema: String,
    pub digits: u32,
    pub prec_bits: u32,
    pub tolerance: f64,
    /// unix seconds; absent when reproducible output is requested
    pub generated_at_unix: Option<u64>,
    /// the stray doubled plus in the ε_M display is read as a single plus
    pub epsilon_upper_plus_plus_read_as_single: bool,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub u1: CertReal,
    pub env: EnvelopeConstants,
    /// certified threshold; absent when it exceeds the anchor u1 + 1
    pub u_threshold: Option<CertReal>,
    /// ε_M − ε_m at u = u1 + 1
    pub gap_at_anchor: CertReal,
    /// (u1 + 1) − gap(u1 + 1); positive iff the inequality is certified there
    pub margin: CertReal,
    pub verdict: bool,
    pub failure: Option<String>,
    pub metadata: CertificateMetadata,
}

/// Full pipeline with the given envelope constants (so that published
/// constants can be substituted for the certified ones).
pub fn build_certificate_with_env(
    env: EnvelopeConstants,
    ctx: &PrecisionContext,
) -> Result<Certificate> {
    let tol = ctx.default_tolerance;
    let u1 = env.u1.clone();
    let prec = u1.prec();
    let params = EpsilonParams::from_envelope(&env);
    let anchor = u1.add(&CertReal::one(prec));
    let gap_at_anchor = epsilon_gap(&anchor, &params)?;
    let margin = anchor.sub(&gap_at_anchor);

    let (u_threshold, verdict, failure) = match threshold_solve_with(&params, &u1, tol) {
        Ok(t) => {
            let ok = margin.sign() == Some(std::cmp::Ordering::Greater);
            (
                Some(t),
                ok,
                if ok {
                    None
                } else {
                    Some("margin at u1 + 1 not certifiably positive".to_string())
                },
            )
        }
        Err(Error::ThresholdAboveAnchor { threshold, anchor }) => (
            None,
            false,
            Some(format!(
                "threshold {threshold} exceeds the anchor {anchor}"
            )),
        ),
        Err(e) => return Err(e),
    };

    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(Certificate {
        u1,
        env,
        u_threshold,
        gap_at_anchor,
        margin,
        verdict,
        failure,
        metadata: CertificateMetadata {
            schema: "certificate/1".into(),
            digits: ctx.digits(),
            prec_bits: ctx.prec_bits(),
            tolerance: tol,
            generated_at_unix: Some(now),
            epsilon_upper_plus_plus_read_as_single: true,
        },
    })
}

/// Full pipeline from scratch: envelope constants, ε-gap, threshold.
pub fn build_certificate(u1: &CertReal, ctx: &PrecisionContext) -> Result<Certificate> {
    let env = envelope_constants(u1, ctx.default_tolerance, ctx)?;
    build_certificate_with_env(env, ctx)
}

fn pair(v: &CertReal) -> Value {
    let (lo, hi) = v.to_decimal_pair();
    json!([lo, hi])
}

fn unpair(v: &Value, key: &str, prec: u32) -> Result<CertReal> {
    let arr = v
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format(format!("missing interval field {key:?}")))?;
    let (lo, hi) = match arr.as_slice() {
        [Value::String(lo), Value::String(hi)] => (lo, hi),
        _ => return Err(Error::Format(format!("field {key:?} is not a string pair"))),
    };
    CertReal::from_decimal_pair(lo, hi, prec)
}

impl Certificate {
    /// Flat key-value document; every numeric quantity is an exact decimal
    /// endpoint pair that round-trips bit-identically at the same precision.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), json!(self.metadata.schema));
        m.insert("digits".into(), json!(self.metadata.digits));
        m.insert("prec_bits".into(), json!(self.metadata.prec_bits));
        m.insert("tolerance".into(), json!(self.metadata.tolerance));
        if let Some(ts) = self.metadata.generated_at_unix {
            m.insert("generated_at_unix".into(), json!(ts));
        }
        m.insert(
            "epsilon_upper_plus_plus_read_as_single".into(),
            json!(self.metadata.epsilon_upper_plus_plus_read_as_single),
        );
        m.insert("u1".into(), pair(&self.u1));
        m.insert("a_at_anchor".into(), pair(&self.env.a_at_anchor));
        m.insert("scaled_c0".into(), pair(&self.env.scaled_c0));
        m.insert("scaled_c1".into(), pair(&self.env.scaled_c1));
        m.insert("m_lower".into(), pair(&self.env.lower));
        m.insert("m_upper".into(), pair(&self.env.upper));
        if let Some(t) = &self.u_threshold {
            m.insert("u_threshold".into(), pair(t));
        }
        m.insert("gap_at_anchor".into(), pair(&self.gap_at_anchor));
        m.insert("margin".into(), pair(&self.margin));
        m.insert("verdict".into(), json!(self.verdict));
        if let Some(f) = &self.failure {
            m.insert("failure".into(), json!(f));
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Format("certificate document is not an object".into()))?;
        let schema = obj
            .get("schema")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Format("missing schema field".into()))?;
        if schema != "certificate/1" {
            return Err(Error::Format(format!("unknown schema {schema:?}")));
        }
        let digits = obj
            .get("digits")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Format("missing digits".into()))? as u32;
        let prec_bits = obj
            .get("prec_bits")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Format("missing prec_bits".into()))? as u32;
        let prec = prec_bits;
        let u1 = unpair(v, "u1", prec)?;
        let env = EnvelopeConstants {
            u1: u1.clone(),
            a_at_anchor: unpair(v, "a_at_anchor", prec)?,
            scaled_c0: unpair(v, "scaled_c0", prec)?,
            scaled_c1: unpair(v, "scaled_c1", prec)?,
            lower: unpair(v, "m_lower", prec)?,
            upper: unpair(v, "m_upper", prec)?,
        };
        Ok(Self {
            u1,
            env,
            u_threshold: if obj.contains_key("u_threshold") {
                Some(unpair(v, "u_threshold", prec)?)
            } else {
                None
            },
            gap_at_anchor: unpair(v, "gap_at_anchor", prec)?,
            margin: unpair(v, "margin", prec)?,
            verdict: obj
                .get("verdict")
                .and_then(Value::as_bool)
                .ok_or_else(|| Error::Format("missing verdict".into()))?,
            failure: obj
                .get("failure")
                .and_then(Value::as_str)
                .map(str::to_string),
            metadata: CertificateMetadata {
                schema: schema.to_string(),
                digits,
                prec_bits,
                tolerance: obj
                    .get("tolerance")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::Format("missing tolerance".into()))?,
                generated_at_unix: obj.get("generated_at_unix").and_then(Value::as_u64),
                epsilon_upper_plus_plus_read_as_single: obj
                    .get("epsilon_upper_plus_plus_read_as_single")
                    .and_then(Value::as_bool)
                    .unwrap_or(true),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymptoticCoefficient {
    pub k: u32,
    pub d_k: Integer,
}

/// d_k = Σ_{j=0}^{k} j!·((k−j)! − C(k, j)), exactly.
pub fn hassani_dk(k: u32) -> AsymptoticCoefficient {
    let mut d = Integer::new();
    for j in 0..=k {
        let fact_j = Integer::from(Integer::factorial(j));
        let fact_kj = Integer::from(Integer::factorial(k - j));
        let binom = Integer::from(Integer::binomial_u(k, j));
        d += fact_j * (fact_kj - binom);
    }
    AsymptoticCoefficient { k, d_k: d }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn cr(s: &str) -> CertReal {
        CertReal::from_decimal(s, ctx().prec_bits()).unwrap()
    }

    /// The published 11-decimal constants, taken verbatim.
    fn published() -> EpsilonParams {
        EpsilonParams::new(cr("-936.64603213534"), cr("1177.56019022252"))
    }

    #[test]
    fn gap_with_published_constants() {
        let p = published();
        let g = epsilon_gap(&cr("3158.442"), &p).unwrap();
        // frozen: 3158.439080847056029015215
        assert!(g.agrees_f64(3158.439080847056), "gap = {g}");
        let margin = cr("3158.442").sub(&g);
        // frozen: 0.002919152943970984784692
        assert!(margin.agrees_f64(0.002919152943971), "margin = {margin}");
        assert_eq!(margin.sign(), Some(std::cmp::Ordering::Greater));
        let limit = epsilon_gap_limit(&p);
        // frozen: 3157.76641258038
        assert!(limit.agrees_f64(3157.76641258038), "limit = {limit}");
    }

    #[test]
    fn gap_flips_with_inflated_upper_constant() {
        let p = EpsilonParams::new(cr("-936.64603213534"), cr("1178.56019022252"));
        let g = epsilon_gap(&cr("3158.442"), &p).unwrap();
        assert!(cr("3158.442").lt_certain(&g), "gap must exceed u: {g}");
    }

    #[test]
    fn threshold_with_published_constants() {
        let p = published();
        let t = threshold_solve_with(&p, &cr("3157.442"), 1e-12).unwrap();
        // frozen: 3158.439081469058422196941
        assert!(t.agrees_f64(3158.4390814690584), "u* = {t}");
        assert!(t.hi().to_f64() <= 3158.442);
    }

    #[test]
    fn threshold_certified_end_to_end() {
        let env = envelope_constants(&cr("3157.442"), 1e-25, &ctx()).unwrap();
        let t = threshold_solve(&env, 1e-10).unwrap();
        // frozen for the certified constants: 3158.216008055819042200423;
        // the enclosure-bound constants move the root by < 1e-3
        let root = t.to_f64();
        assert!((root - 3158.216).abs() < 0.05, "u* = {t}");
        assert!(t.hi().to_f64() <= 3158.442);

        let cert = build_certificate_with_env(env, &ctx()).unwrap();
        assert!(cert.verdict);
        assert!(cert.margin.lo().to_f64() > 0.0);
        assert!(cert.u_threshold.is_some());
        // round trip
        let doc = cert.to_json();
        let back = Certificate::from_json(&doc).unwrap();
        assert_eq!(doc, back.to_json());
        assert_eq!(back.margin.to_decimal_pair(), cert.margin.to_decimal_pair());
    }

    #[test]
    fn threshold_above_anchor_for_wide_constants() {
        let p = EpsilonParams::new(cr("-1000"), cr("1300"));
        let err = threshold_solve_with(&p, &cr("3157.442"), 1e-9);
        match err {
            Err(Error::ThresholdAboveAnchor { threshold, .. }) => {
                // limit is (72 + 2600) − (206 − 1000) = 3466; the root sits
                // slightly above it
                let t: f64 = threshold
                    .trim_start_matches('[')
                    .split(',')
                    .next()
                    .unwrap()
                    .parse()
                    .unwrap_or(f64::NAN);
                assert!((3460.0..3480.0).contains(&t), "threshold = {threshold}");
            }
            other => panic!("expected ThresholdAboveAnchor, got {other:?}"),
        }
    }

    #[test]
    fn zero_constants_threshold_at_domain_floor() {
        let p = EpsilonParams::new(cr("0"), cr("0"));
        let t = threshold_solve_with(&p, &cr("3157.442"), 1e-9).unwrap();
        assert!(t.agrees_f64(std::f64::consts::LN_2), "u* = {t}");
    }

    #[test]
    fn dk_values() {
        let expect: [i64; 9] = [0, 0, 0, 0, -1, -14, -145, -1412, -13985];
        for (k, want) in expect.iter().enumerate() {
            let got = hassani_dk(k as u32);
            assert_eq!(got.d_k, Integer::from(*want), "d_{k}");
        }
    }

    #[test]
    fn decrease_certificate_scales() {
        let p = published();
        assert!(decreasing_from(&p, &cr("100")).unwrap());
        assert!(decreasing_from(&p, &cr("3158")).unwrap());
        assert!(!decreasing_from(&p, &cr("0.7")).unwrap());
    }
}
