//! A small closed set of operations that an integrand may use, implemented
//! both by plain intervals and by truncated Taylor series. Writing an
//! integrand once against this trait gives the quadrature both a value
//! enclosure and rigorous Taylor coefficients from the same code path.

use crate::error::Result;
use crate::numerics::interval::CertReal;

pub trait Scalar: Clone {
    /// Lift an interval constant into this scalar, using `self` as the
    /// template for precision / truncation order.
    fn lift(&self, v: &CertReal) -> Self;

    fn lift_u64(&self, v: u64) -> Self {
        self.lift(&CertReal::from_u64(v, self.prec()))
    }

    fn prec(&self) -> u32;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn neg(&self) -> Self;

    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn powi(&self, n: u32) -> Self;
}

impl Scalar for CertReal {
    fn lift(&self, v: &CertReal) -> Self {
        v.clone()
    }

    fn prec(&self) -> u32 {
        CertReal::prec(self)
    }

    fn add(&self, o: &Self) -> Self {
        CertReal::add(self, o)
    }

    fn sub(&self, o: &Self) -> Self {
        CertReal::sub(self, o)
    }

    fn mul(&self, o: &Self) -> Self {
        CertReal::mul(self, o)
    }

    fn div(&self, o: &Self) -> Result<Self> {
        CertReal::div(self, o)
    }

    fn neg(&self) -> Self {
        CertReal::neg(self)
    }

    fn exp(&self) -> Self {
        CertReal::exp(self)
    }

    fn ln(&self) -> Result<Self> {
        CertReal::ln(self)
    }

    fn sqrt(&self) -> Result<Self> {
        CertReal::sqrt(self)
    }

    fn powi(&self, n: u32) -> Self {
        CertReal::powi(self, n)
    }
}
