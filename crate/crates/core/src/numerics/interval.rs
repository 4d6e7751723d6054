//! Outward-rounded interval arithmetic on MPFR floats.
//!
//! [`CertReal`] is the carrier for every analytic quantity in this crate: an
//! interval `[lo, hi]` whose endpoints are rounded outward on every
//! operation, so the true value of any composed expression is guaranteed to
//! lie inside the result. MPFR's 64-bit exponent range means quantities like
//! `exp(-3157)` are ordinary numbers here; no ad-hoc log-scale bookkeeping is
//! needed for representability (the envelope math still works in u-space,
//! but for conditioning rather than range).

use std::cmp::Ordering;
use std::fmt;

use rug::float::{Constant, Round};
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound, SubAssignRound};
use rug::{Float, Integer};

use crate::error::{Error, Result};

/// Precision and budget settings shared by the whole pipeline.
#[derive(Debug, Clone)]
pub struct PrecisionContext {
    digits: u32,
    pub max_quadrature_depth: u32,
    pub default_tolerance: f64,
}

impl PrecisionContext {
    /// At least 40 significant decimal digits are required: the final ε-gap
    /// margin is ~3e-3 against quantities of size ~3e3, with intermediate
    /// scalings spanning e^{±3157}.
    pub const MIN_DIGITS: u32 = 40;
    pub const DEFAULT_DIGITS: u32 = 60;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::Domain(format!(
                "precision of {digits} digits cannot certify; need >= {}",
                Self::MIN_DIGITS
            )));
        }
        Ok(Self {
            digits,
            max_quadrature_depth: 40,
            default_tolerance: 1e-30,
        })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Working precision in bits, with headroom over the decimal request.
    pub fn prec_bits(&self) -> u32 {
        // digits * log2(10), rounded up, plus guard bits
        (self.digits * 3322 + 999) / 1000 + 24
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIGITS).expect("default digits are valid")
    }
}

/// A certified enclosure `[lo, hi]` of a real number.
#[derive(Debug, Clone, PartialEq)]
pub struct CertReal {
    lo: Float,
    hi: Float,
}

fn assert_valid(lo: &Float, hi: &Float) {
    debug_assert!(lo.is_finite() && hi.is_finite(), "non-finite endpoint");
    debug_assert!(*lo <= *hi, "inverted interval: [{lo}, {hi}]");
}

impl CertReal {
    pub fn new(lo: Float, hi: Float) -> Self {
        assert_valid(&lo, &hi);
        Self { lo, hi }
    }

    /// A degenerate (thin) interval around an exactly-representable value.
    pub fn point(v: Float) -> Self {
        let hi = v.clone();
        Self::new(v, hi)
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        // exact if prec >= 64, outward otherwise
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        Self::new(lo, hi)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        Self::new(lo, hi)
    }

    pub fn from_u128(v: u128, prec: u32) -> Self {
        let i = Integer::from(v);
        let lo = Float::with_val_round(prec, &i, Round::Down).0;
        let hi = Float::with_val_round(prec, &i, Round::Up).0;
        Self::new(lo, hi)
    }

    pub fn from_integer(v: &Integer, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        Self::new(lo, hi)
    }

    /// Parse a decimal literal outward, so published constants like
    /// `5.5666305` enclose the exact decimal value.
    pub fn from_decimal(s: &str, prec: u32) -> Result<Self> {
        let parsed = Float::parse(s)
            .map_err(|e| Error::Format(format!("bad decimal literal {s:?}: {e}")))?;
        let lo = Float::with_val_round(prec, parsed, Round::Down).0;
        let parsed = Float::parse(s).expect("parsed once already");
        let hi = Float::with_val_round(prec, parsed, Round::Up).0;
        Ok(Self::new(lo, hi))
    }

    pub fn zero(prec: u32) -> Self {
        Self::point(Float::with_val(prec, 0))
    }

    pub fn one(prec: u32) -> Self {
        Self::point(Float::with_val(prec, 1))
    }

    pub fn pi(prec: u32) -> Self {
        let lo = Float::with_val_round(prec, Constant::Pi, Round::Down).0;
        let hi = Float::with_val_round(prec, Constant::Pi, Round::Up).0;
        Self::new(lo, hi)
    }

    pub fn euler_gamma(prec: u32) -> Self {
        let lo = Float::with_val_round(prec, Constant::Euler, Round::Down).0;
        let hi = Float::with_val_round(prec, Constant::Euler, Round::Up).0;
        Self::new(lo, hi)
    }

    /// Euler's number e as `exp(1)`.
    pub fn e(prec: u32) -> Self {
        Self::one(prec).exp()
    }

    pub fn ln2(prec: u32) -> Self {
        Self::from_u64(2, prec).ln().expect("2 > 0")
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn width(&self) -> Float {
        let mut w = self.hi.clone();
        w.sub_assign_round(&self.lo, Round::Up);
        w
    }

    /// Midpoint, rounded to nearest (not certified; for reporting and for
    /// choosing subdivision points only).
    pub fn mid(&self) -> Float {
        let mut m = self.lo.clone();
        m.add_assign_round(&self.hi, Round::Nearest);
        m.div_assign_round(2u32, Round::Nearest);
        m
    }

    pub fn mid_point(&self) -> Self {
        Self::point(self.mid())
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0u32 && self.hi >= 0u32
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Agreement with an f64 reference at f64 resolution: the enclosure,
    /// widened by a few ulps of `v`, contains `v`. Enclosures here are
    /// routinely tighter than one f64 ulp, so exact containment of a
    /// nearest-rounded double would be the wrong test.
    pub fn agrees_f64(&self, v: f64) -> bool {
        let tol = (v.abs() * 1e-14).max(1e-290);
        self.lo.to_f64() - tol <= v && v <= self.hi.to_f64() + tol
    }

    pub fn contains_float(&self, v: &Float) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    /// Certified sign: `Some(Greater)` iff every point is > 0, `Some(Less)`
    /// iff every point is < 0, `Some(Equal)` for the exact zero interval,
    /// `None` when the enclosure straddles zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo > 0u32 {
            Some(Ordering::Greater)
        } else if self.hi < 0u32 {
            Some(Ordering::Less)
        } else if self.lo == 0u32 && self.hi == 0u32 {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certified `self < other`.
    pub fn lt_certain(&self, other: &Self) -> bool {
        self.hi < other.lo
    }

    /// Certified `self <= other` (every point of self ≤ every point of other).
    pub fn le_certain(&self, other: &Self) -> bool {
        self.hi <= other.lo
    }

    pub fn hull(&self, other: &Self) -> Self {
        let lo = if self.lo <= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi >= other.hi { self.hi.clone() } else { other.hi.clone() };
        Self::new(lo, hi)
    }

    pub fn min(&self, other: &Self) -> Self {
        let lo = if self.lo <= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi <= other.hi { self.hi.clone() } else { other.hi.clone() };
        Self::new(lo, hi)
    }

    pub fn max(&self, other: &Self) -> Self {
        let lo = if self.lo >= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi >= other.hi { self.hi.clone() } else { other.hi.clone() };
        Self::new(lo, hi)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.hi.clone(), -self.lo.clone())
    }

    pub fn abs(&self) -> Self {
        if self.lo >= 0u32 {
            self.clone()
        } else if self.hi <= 0u32 {
            self.neg()
        } else {
            let a = self.lo.clone().abs();
            let b = self.hi.clone().abs();
            let hi = if a >= b { a } else { b };
            Self::new(Float::with_val(self.prec(), 0), hi)
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut lo = self.lo.clone();
        lo.add_assign_round(&other.lo, Round::Down);
        let mut hi = self.hi.clone();
        hi.add_assign_round(&other.hi, Round::Up);
        Self::new(lo, hi)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut lo = self.lo.clone();
        lo.sub_assign_round(&other.hi, Round::Down);
        let mut hi = self.hi.clone();
        hi.sub_assign_round(&other.lo, Round::Up);
        Self::new(lo, hi)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let mut d = (*a).clone();
            d.mul_assign_round(b, Round::Down);
            let mut u = (*a).clone();
            u.mul_assign_round(b, Round::Up);
            lo = Some(match lo {
                Some(cur) if cur <= d => cur,
                _ => d,
            });
            hi = Some(match hi {
                Some(cur) if cur >= u => cur,
                _ => u,
            });
        }
        Self::new(lo.unwrap(), hi.unwrap())
    }

    /// Division; the divisor must be certifiably nonzero.
    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.contains_zero() {
            return Err(Error::Domain(format!(
                "division by an interval containing zero: {other}"
            )));
        }
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let mut d = (*a).clone();
            d.div_assign_round(b, Round::Down);
            let mut u = (*a).clone();
            u.div_assign_round(b, Round::Up);
            lo = Some(match lo {
                Some(cur) if cur <= d => cur,
                _ => d,
            });
            hi = Some(match hi {
                Some(cur) if cur >= u => cur,
                _ => u,
            });
        }
        Ok(Self::new(lo.unwrap(), hi.unwrap()))
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one(self.prec()).div(self)
    }

    pub fn scale_u64(&self, k: u64) -> Self {
        self.mul(&Self::from_u64(k, self.prec()))
    }

    /// exp is increasing: round endpoints outward independently.
    pub fn exp(&self) -> Self {
        let mut lo = self.lo.clone();
        lo.exp_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.exp_round(Round::Up);
        Self::new(lo, hi)
    }

    pub fn ln(&self) -> Result<Self> {
        if self.lo <= 0u32 {
            return Err(Error::Domain(format!("ln of non-positive interval {self}")));
        }
        let mut lo = self.lo.clone();
        lo.ln_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.ln_round(Round::Up);
        Ok(Self::new(lo, hi))
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo < 0u32 {
            return Err(Error::Domain(format!("sqrt of negative interval {self}")));
        }
        let mut lo = self.lo.clone();
        lo.sqrt_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.sqrt_round(Round::Up);
        Ok(Self::new(lo, hi))
    }

    /// Integer power by repeated squaring over interval products.
    pub fn powi(&self, n: u32) -> Self {
        let mut result = Self::one(self.prec());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        result
    }

    /// x^(3/2) for nonnegative x.
    pub fn pow_3_2(&self) -> Result<Self> {
        Ok(self.mul(&self.sqrt()?))
    }

    /// x^(1/4) for nonnegative x.
    pub fn pow_1_4(&self) -> Result<Self> {
        self.sqrt()?.sqrt()
    }

    /// Exact decimal serialization of both endpoints. Binary floats are
    /// finite decimals, so the strings are exact and re-parsing them (in any
    /// rounding mode) at the same precision reproduces the bits.
    pub fn to_decimal_pair(&self) -> (String, String) {
        (exact_decimal(&self.lo), exact_decimal(&self.hi))
    }

    /// Inverse of [`to_decimal_pair`]: endpoints parsed outward at `prec`.
    pub fn from_decimal_pair(lo: &str, hi: &str, prec: u32) -> Result<Self> {
        let lo_p = Float::parse(lo)
            .map_err(|e| Error::Format(format!("bad lo endpoint {lo:?}: {e}")))?;
        let hi_p = Float::parse(hi)
            .map_err(|e| Error::Format(format!("bad hi endpoint {hi:?}: {e}")))?;
        let lo = Float::with_val_round(prec, lo_p, Round::Down).0;
        let hi = Float::with_val_round(prec, hi_p, Round::Up).0;
        if lo > hi {
            return Err(Error::Format("inverted interval endpoints".into()));
        }
        Ok(Self::new(lo, hi))
    }

    /// Round this enclosure into a (wider or equal) one at lower precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, &self.lo, Round::Down).0;
        let hi = Float::with_val_round(prec, &self.hi, Round::Up).0;
        Self::new(lo, hi)
    }
}

/// The exact decimal expansion of a binary float: with f = m·2^e and e < 0,
/// the fractional part is m·5^{|e|} shifted |e| places.
fn exact_decimal(f: &Float) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let (m, e) = f.to_integer_exp().expect("finite by invariant");
    if e >= 0 {
        return (m << e as u32).to_string();
    }
    let k = (-e) as usize;
    let sign = if m < 0 { "-" } else { "" };
    let digits = (m.abs() * Integer::from(Integer::u_pow_u(5, k as u32))).to_string();
    let (int_part, frac_part) = if digits.len() > k {
        let (a, b) = digits.split_at(digits.len() - k);
        (a.to_string(), b.to_string())
    } else {
        ("0".to_string(), format!("{:0>width$}", digits, width = k))
    };
    let frac_part = frac_part.trim_end_matches('0');
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

impl fmt::Display for CertReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(24);
        write!(
            f,
            "[{}, {}]",
            self.lo.to_string_radix(10, Some(digits)),
            self.hi.to_string_radix(10, Some(digits))
        )
    }
}

/// A real argument x carried as u = log x; the only workable representation
/// for x up to e^3158 as far as the analytic bounds are concerned.
#[derive(Debug, Clone)]
pub struct LogPoint {
    u: CertReal,
}

impl LogPoint {
    /// All the explicit estimates start at x = 2, i.e. u >= log 2.
    pub fn new(u: CertReal) -> Result<Self> {
        let ln2 = CertReal::ln2(u.prec());
        if u.lo() < ln2.lo() {
            return Err(Error::Domain(format!(
                "log-point u = {u} below log 2; estimates start at x = 2"
            )));
        }
        Ok(Self { u })
    }

    pub fn from_x_u64(x: u64, prec: u32) -> Result<Self> {
        if x < 2 {
            return Err(Error::Domain(format!("x = {x} < 2")));
        }
        Self::new(CertReal::from_u64(x, prec).ln()?)
    }

    pub fn u(&self) -> &CertReal {
        &self.u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cr(s: &str) -> CertReal {
        CertReal::from_decimal(s, 220).unwrap()
    }

    #[test]
    fn outward_rounding_on_parse() {
        let x = cr("0.1");
        assert!(x.lo() < x.hi(), "0.1 is not binary-representable");
        assert!(x.agrees_f64(0.1f64) || x.width().to_f64() < 1e-60);
    }

    #[test]
    fn arithmetic_encloses_truth() {
        let a = cr("1.25"); // exact in binary
        let b = cr("3.5");
        assert_eq!(a.add(&b).to_f64(), 4.75);
        assert_eq!(a.mul(&b).to_f64(), 4.375);
        let q = b.div(&a).unwrap();
        assert!(q.agrees_f64(2.8));
    }

    #[test]
    fn division_by_zero_interval_fails() {
        let a = cr("1");
        let z = CertReal::new(
            Float::with_val(64, -1),
            Float::with_val(64, 1),
        );
        assert!(a.div(&z).is_err());
    }

    #[test]
    fn elementary_functions() {
        let two = cr("2");
        let r = two.sqrt().unwrap();
        assert!(r.agrees_f64(std::f64::consts::SQRT_2));
        assert!(r.width().to_f64() < 1e-60);
        let l = two.ln().unwrap();
        assert!(l.agrees_f64(std::f64::consts::LN_2));
        assert!(l.exp().contains(&two) || l.exp().agrees_f64(2.0));
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let x = cr("1.5");
        let direct = x.mul(&x).mul(&x).mul(&x).mul(&x);
        let fast = x.powi(5);
        assert!(fast.agrees_f64(direct.to_f64()));
        assert!(direct.agrees_f64(7.59375));
    }

    #[test]
    fn sign_and_ordering() {
        assert_eq!(cr("2").sign(), Some(Ordering::Greater));
        assert_eq!(cr("-2").sign(), Some(Ordering::Less));
        let straddle = CertReal::new(Float::with_val(64, -1), Float::with_val(64, 1));
        assert_eq!(straddle.sign(), None);
        assert!(cr("1").lt_certain(&cr("2")));
        assert!(!cr("2").lt_certain(&cr("2")));
    }

    #[test]
    fn decimal_pair_round_trip_is_exact() {
        let x = cr("3157.442").exp().ln().unwrap().powi(3);
        let (lo, hi) = x.to_decimal_pair();
        let back = CertReal::from_decimal_pair(&lo, &hi, x.prec()).unwrap();
        assert_eq!(back.lo(), x.lo());
        assert_eq!(back.hi(), x.hi());
        let (lo2, hi2) = back.to_decimal_pair();
        assert_eq!((lo, hi), (lo2, hi2));
    }

    #[test]
    fn extended_exponent_range() {
        // e^{-3157} must be an ordinary nonzero number
        let u = cr("3157.442");
        let tiny = u.neg().exp();
        assert_eq!(tiny.sign(), Some(Ordering::Greater));
        assert!(tiny.hi().to_f64() == 0.0, "underflows f64 but not MPFR");
    }

    #[test]
    fn precision_context_floor() {
        assert!(PrecisionContext::new(39).is_err());
        let ctx = PrecisionContext::new(60).unwrap();
        assert!(ctx.prec_bits() >= 220);
    }

    #[test]
    fn log_point_floor() {
        assert!(LogPoint::from_x_u64(1, 128).is_err());
        assert!(LogPoint::from_x_u64(2, 128).is_ok());
        let below = CertReal::from_decimal("0.5", 128).unwrap();
        assert!(LogPoint::new(below).is_err());
    }
}
