//! Truncated Taylor series with interval coefficients.
//!
//! `Jet` holds the first `n+1` Taylor coefficients of a function expansion
//! at a point (or around a whole cell, when the expansion point is a wide
//! interval — that is what turns the top coefficient into a rigorous
//! Lagrange remainder for the quadrature).

use crate::error::{Error, Result};
use crate::numerics::interval::CertReal;
use crate::numerics::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Jet {
    coeffs: Vec<CertReal>,
}

impl Jet {
    /// The identity function `t ↦ t` expanded at `at`: coefficients
    /// `[at, 1, 0, ..., 0]` with `order + 1` entries.
    pub fn var(at: &CertReal, order: usize) -> Self {
        let prec = at.prec();
        let mut coeffs = vec![CertReal::zero(prec); order + 1];
        coeffs[0] = at.clone();
        if order >= 1 {
            coeffs[1] = CertReal::one(prec);
        }
        Self { coeffs }
    }

    pub fn constant(v: &CertReal, order: usize) -> Self {
        let mut coeffs = vec![CertReal::zero(v.prec()); order + 1];
        coeffs[0] = v.clone();
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &CertReal {
        &self.coeffs[k]
    }

    fn zero_like(&self) -> CertReal {
        CertReal::zero(self.prec())
    }
}

impl Scalar for Jet {
    fn lift(&self, v: &CertReal) -> Self {
        Jet::constant(v, self.order())
    }

    fn prec(&self) -> u32 {
        self.coeffs[0].prec()
    }

    fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.order(), o.order());
        let coeffs = self
            .coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        Self { coeffs }
    }

    fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.order(), o.order());
        let coeffs = self
            .coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| a.sub(b))
            .collect();
        Self { coeffs }
    }

    fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.order(), o.order());
        let n = self.coeffs.len();
        let mut coeffs = vec![self.zero_like(); n];
        for k in 0..n {
            let mut acc = self.zero_like();
            for j in 0..=k {
                acc = acc.add(&self.coeffs[j].mul(&o.coeffs[k - j]));
            }
            coeffs[k] = acc;
        }
        Self { coeffs }
    }

    fn div(&self, o: &Self) -> Result<Self> {
        debug_assert_eq!(self.order(), o.order());
        if o.coeffs[0].contains_zero() {
            return Err(Error::Domain(
                "Taylor division by a series whose value straddles zero".into(),
            ));
        }
        let n = self.coeffs.len();
        let mut coeffs = vec![self.zero_like(); n];
        for k in 0..n {
            let mut acc = self.coeffs[k].clone();
            for j in 0..k {
                acc = acc.sub(&coeffs[j].mul(&o.coeffs[k - j]));
            }
            coeffs[k] = acc.div(&o.coeffs[0])?;
        }
        Ok(Self { coeffs })
    }

    fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(CertReal::neg).collect(),
        }
    }

    // g = exp(f):  k g_k = sum_{j=1..k} j f_j g_{k-j}
    fn exp(&self) -> Self {
        let n = self.coeffs.len();
        let mut coeffs = vec![self.zero_like(); n];
        coeffs[0] = self.coeffs[0].exp();
        let prec = self.prec();
        for k in 1..n {
            let mut acc = self.zero_like();
            for j in 1..=k {
                let jf = self.coeffs[j].mul(&CertReal::from_u64(j as u64, prec));
                acc = acc.add(&jf.mul(&coeffs[k - j]));
            }
            coeffs[k] = acc
                .div(&CertReal::from_u64(k as u64, prec))
                .expect("k > 0");
        }
        Self { coeffs }
    }

    // g = ln(f):  g_k = (f_k - (1/k) sum_{j=1..k-1} j g_j f_{k-j}) / f_0
    fn ln(&self) -> Result<Self> {
        if self.coeffs[0].sign() != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Domain(
                "Taylor ln of a series whose value is not certifiably positive".into(),
            ));
        }
        let n = self.coeffs.len();
        let prec = self.prec();
        let mut coeffs = vec![self.zero_like(); n];
        coeffs[0] = self.coeffs[0].ln()?;
        for k in 1..n {
            let mut acc = self.zero_like();
            for j in 1..k {
                let jg = coeffs[j].mul(&CertReal::from_u64(j as u64, prec));
                acc = acc.add(&jg.mul(&self.coeffs[k - j]));
            }
            let acc = acc.div(&CertReal::from_u64(k as u64, prec)).expect("k > 0");
            coeffs[k] = self.coeffs[k].sub(&acc).div(&self.coeffs[0])?;
        }
        Ok(Self { coeffs })
    }

    // g = sqrt(f):  g_k = (f_k - sum_{j=1..k-1} g_j g_{k-j}) / (2 g_0)
    fn sqrt(&self) -> Result<Self> {
        if self.coeffs[0].sign() != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Domain(
                "Taylor sqrt of a series whose value is not certifiably positive".into(),
            ));
        }
        let n = self.coeffs.len();
        let prec = self.prec();
        let mut coeffs = vec![self.zero_like(); n];
        coeffs[0] = self.coeffs[0].sqrt()?;
        let two_g0 = coeffs[0].mul(&CertReal::from_u64(2, prec));
        for k in 1..n {
            let mut acc = self.zero_like();
            for j in 1..k {
                acc = acc.add(&coeffs[j].mul(&coeffs[k - j]));
            }
            coeffs[k] = self.coeffs[k].sub(&acc).div(&two_g0)?;
        }
        Ok(Self { coeffs })
    }

    fn powi(&self, n: u32) -> Self {
        let mut result = Jet::constant(&CertReal::one(self.prec()), self.order());
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
}
