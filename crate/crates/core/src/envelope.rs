//! Certified envelope constants for the five-term prime counting expansion.
//!
//! With x1 = e^{u1}, the two accumulated constants are
//!
//!   C_σ = ∫_2^{x1} (720 + σ a(t))/log⁷t dt − 2 Σ_{k=1}^{5} k!/log^{k+1}2,
//!
//! and the pointwise envelope around π(x)·(coefficients of x/log^k x) is
//!
//!   m(u) = 120 − a(u) + C₀ β(u) + (720 − a(u1)) D(u),
//!   M(u) = 120 + a(u) + C₁ β(u) + (720 + a(u1)) D(u),
//!
//! where β(u) = (u/u1)⁶ e^{u1−u} and D(u) = Ê(u) − Ê(u1) β(u). Everything is
//! carried in the scaled form u1⁶ e^{−u1}·C_σ, which is O(1); the raw C_σ at
//! the default anchor would be ~e^{3150}. The certified constants are a lower
//! bound for inf m and an upper bound for sup M over [u1, ∞), obtained by
//! branch-and-bound interval evaluation on a finite window plus closed
//! monotone bounds for the tail.

use rug::Float;

use crate::error::{Error, Result};
use crate::logint::{scaled_e, scaled_e_diff};
use crate::numerics::interval::{CertReal, LogPoint, PrecisionContext};
use crate::numerics::quad::{integrate_adaptive, Integrand};
use crate::numerics::scalar::Scalar;
use crate::theta::{a_eval, a_monotone_certificate, Branch, ThetaParams};

/// Truncation window for the a-weighted integral, in natural-log units. The
/// discarded mass below u1 − W carries a factor e^{−W}.
pub const A_INTEGRAL_WINDOW: f64 = 200.0;

/// Width of the finite search window for the envelope optimum; beyond
/// u1 + this, closed tail bounds take over.
pub const SEARCH_WINDOW: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CSign {
    Minus,
    Plus,
}

#[derive(Debug, Clone)]
pub struct EnvelopeConstants {
    /// anchor u1 = log x1
    pub u1: CertReal,
    pub a_at_anchor: CertReal,
    /// u1⁶ e^{−u1} · C₀
    pub scaled_c0: CertReal,
    /// u1⁶ e^{−u1} · C₁
    pub scaled_c1: CertReal,
    /// certified lower bound: m(u) ≥ lower for every u ≥ u1
    pub lower: CertReal,
    /// certified upper bound: M(u) ≤ upper for every u ≥ u1
    pub upper: CertReal,
}

#[derive(Debug, Clone)]
pub struct EnvelopeValue {
    pub u: CertReal,
    pub lower: CertReal,
    pub upper: CertReal,
}

/// e^{u−u1} · a(u)/u⁷ · u1⁶ on the final branch; integrating this over u
/// gives the scaled a-integral.
struct ScaledBranchMass<'a> {
    params: &'a ThetaParams,
    u1: CertReal,
    u1_pow6: CertReal,
}

impl Integrand for ScaledBranchMass<'_> {
    fn eval<S: Scalar>(&self, u: &S) -> Result<S> {
        let expr = self.params.branch_expr(Branch::B4, u)?;
        u.sub(&u.lift(&self.u1))
            .exp()
            .mul(&expr)
            .div(&u.powi(2))
            .map(|v| v.mul(&u.lift(&self.u1_pow6)))
    }
}

/// β(u) = (u/u1)⁶ e^{u1−u}; equals 1 at u = u1 and decreases for u > 6
/// (log-derivative 6/u − 1 < 0).
pub fn beta(u: &CertReal, u1: &CertReal) -> Result<CertReal> {
    Ok(u.div(u1)?.powi(6).mul(&u1.sub(u).exp()))
}

/// sup of expr_branch(u)/u² over the given branch's domain, taken at the
/// left endpoint: on each branch the density is a product of factors that
/// decrease there (c/u²; e^{−u/2}; √y e^{−y} with y = √(u/6.455) ≥ 3;
/// e^{−2y}/y with y = √(u/R)).
fn branch_density_sup(params: &ThetaParams, branch: Branch) -> Result<CertReal> {
    let left = match branch {
        Branch::B1 => params.ln2.clone(),
        Branch::B2 => params.ln599.clone(),
        Branch::B3 => params.ln_b3.clone(),
        Branch::B4 => params.u_b4.clone(),
    };
    params.branch_expr(branch, &left)?.div(&left.powi(2))
}

/// u1⁶ ∫_{log 2}^{u1} e^{u−u1} a(u)/u⁷ du: quadrature on [u1 − W, u1] (final
/// branch only) plus certified remainder intervals for everything below.
fn scaled_a_integral(
    params: &ThetaParams,
    u1: &CertReal,
    tol: f64,
    ctx: &PrecisionContext,
) -> Result<CertReal> {
    let prec = u1.prec();
    let u1_pow6 = u1.powi(6);
    let window = CertReal::from_decimal(&format!("{A_INTEGRAL_WINDOW}"), prec)?;
    let quad_lo = u1.sub(&window).max(&params.u_b4);
    let mass = ScaledBranchMass {
        params,
        u1: u1.clone(),
        u1_pow6: u1_pow6.clone(),
    };
    let mut total = integrate_adaptive(&mass, &quad_lo, u1, tol, ctx)?;

    // final-branch mass below the window: ∫_{673}^{quad_lo} e^{u−u1} g(u) du
    // ≤ sup g · e^{quad_lo − u1}, with g decreasing on the branch
    if params.u_b4.lt_certain(&quad_lo) {
        let bound = branch_density_sup(params, Branch::B4)?
            .mul(&quad_lo.sub(u1).exp())
            .mul(&u1_pow6);
        total = total.add(&CertReal::new(Float::with_val(prec, 0), bound.hi().clone()));
    }

    // mass of the first three branches, all below u = 673: the same sup
    // argument with the factor e^{673 − u1}
    let sup123 = branch_density_sup(params, Branch::B1)?
        .max(&branch_density_sup(params, Branch::B2)?)
        .max(&branch_density_sup(params, Branch::B3)?);
    let bound = sup123.mul(&params.u_b4.sub(u1).exp()).mul(&u1_pow6);
    total = total.add(&CertReal::new(Float::with_val(prec, 0), bound.hi().clone()));
    Ok(total)
}

/// u1⁶ e^{−u1} · C_σ. The 720-part is 720(Ê(u1) − E(2)·u1⁶e^{−u1}); the
/// subtraction constant is scaled by the same exponentially small weight.
/// Both small pieces are ordinary MPFR numbers here, so they are computed
/// outright rather than padded into a fixed negligible interval.
pub fn scaled_c(u1: &CertReal, sign: CSign, tol: f64, ctx: &PrecisionContext) -> Result<CertReal> {
    let prec = u1.prec();
    let params = ThetaParams::new(prec);
    if u1.lo() < params.u_b4.lo() {
        return Err(Error::Domain(format!(
            "anchor u1 = {u1:.6} below 673; the envelope derivation needs the final branch"
        )));
    }
    let weight = u1.powi(6).mul(&u1.neg().exp());
    let seven_twenty = CertReal::from_u64(720, prec);

    let e_hat_u1 = scaled_e(u1, tol)?;
    let e_at_two = crate::logint::remainder_e(&CertReal::from_u64(2, prec))?;

    // 2 Σ_{k=1}^{5} k!/log^{k+1} 2
    let ln2 = CertReal::ln2(prec);
    let mut sub = CertReal::zero(prec);
    let mut fact = CertReal::one(prec);
    let mut inv_pow = ln2.recip()?.powi(2);
    for k in 1..=5u64 {
        fact = fact.scale_u64(k);
        sub = sub.add(&fact.mul(&inv_pow));
        inv_pow = inv_pow.div(&ln2)?;
    }
    sub = sub.scale_u64(2);

    let base = seven_twenty
        .mul(&e_hat_u1.sub(&e_at_two.mul(&weight)))
        .sub(&sub.mul(&weight));
    let a_part = scaled_a_integral(&params, u1, tol, ctx)?;
    Ok(match sign {
        CSign::Minus => base.sub(&a_part),
        CSign::Plus => base.add(&a_part),
    })
}

/// Everything envelope_at and the optimum search need, computed once.
struct EnvelopeFrame {
    params: ThetaParams,
    u1: CertReal,
    a_at_anchor: CertReal,
    scaled_c0: CertReal,
    scaled_c1: CertReal,
    e_hat_u1: CertReal,
    /// 720 − a(u1)
    coeff_lower: CertReal,
    /// 720 + a(u1)
    coeff_upper: CertReal,
    tol: f64,
}

impl EnvelopeFrame {
    fn new(u1: &CertReal, tol: f64, ctx: &PrecisionContext) -> Result<Self> {
        let prec = u1.prec();
        let params = ThetaParams::new(prec);
        let a_at_anchor = a_eval(&params, &LogPoint::new(u1.clone())?)?;
        let scaled_c0 = scaled_c(u1, CSign::Minus, tol, ctx)?;
        let scaled_c1 = scaled_c(u1, CSign::Plus, tol, ctx)?;
        let seven_twenty = CertReal::from_u64(720, prec);
        Ok(Self {
            coeff_lower: seven_twenty.sub(&a_at_anchor),
            coeff_upper: seven_twenty.add(&a_at_anchor),
            e_hat_u1: scaled_e(u1, tol)?,
            params,
            u1: u1.clone(),
            a_at_anchor,
            scaled_c0,
            scaled_c1,
            tol,
        })
    }

    /// Interval evaluation of (m, M) over an arbitrary enclosure of u; a
    /// point gives the envelope value, a cell gives a range enclosure.
    fn eval(&self, u: &CertReal) -> Result<(CertReal, CertReal)> {
        let prec = u.prec();
        let a_u = a_eval(&self.params, &LogPoint::new(u.clone())?)?;
        let beta_u = beta(u, &self.u1)?;
        let d_u = scaled_e(u, self.tol)?.sub(&self.e_hat_u1.mul(&beta_u));
        let base = CertReal::from_u64(120, prec);
        let lower = base
            .sub(&a_u)
            .add(&self.scaled_c0.mul(&beta_u))
            .add(&self.coeff_lower.mul(&d_u));
        let upper = base
            .add(&a_u)
            .add(&self.scaled_c1.mul(&beta_u))
            .add(&self.coeff_upper.mul(&d_u));
        Ok((lower, upper))
    }
}

/// Pointwise envelope (m(u), M(u)) from previously certified constants;
/// valid only at u ≥ u1.
pub fn envelope_at(u: &CertReal, env: &EnvelopeConstants, tol: f64) -> Result<EnvelopeValue> {
    if u.lo() < env.u1.lo() {
        return Err(Error::Domain(format!(
            "envelope evaluated at u = {u:.6} below its anchor {:.6}",
            env.u1
        )));
    }
    let prec = u.prec();
    let params = ThetaParams::new(prec);
    let a_u = a_eval(&params, &LogPoint::new(u.clone())?)?;
    let beta_u = beta(u, &env.u1)?;
    let d_u = scaled_e_diff(u, &env.u1, tol)?;
    let base = CertReal::from_u64(120, prec);
    let seven_twenty = CertReal::from_u64(720, prec);
    let lower = base
        .sub(&a_u)
        .add(&env.scaled_c0.mul(&beta_u))
        .add(&seven_twenty.sub(&env.a_at_anchor).mul(&d_u));
    let upper = base
        .add(&a_u)
        .add(&env.scaled_c1.mul(&beta_u))
        .add(&seven_twenty.add(&env.a_at_anchor).mul(&d_u));
    Ok(EnvelopeValue {
        u: u.clone(),
        lower,
        upper,
    })
}

/// Upper bound for Ê over the whole ray [U, ∞), from the exact splitting
/// Ê(u) = E(e^U)·u⁶e^{−u} + ∫_0^{u−U} e^{−s} u⁶/(u−s)⁷ ds:
/// the first part is at most Ê(U) (β-decay), the integral over s ≤ u/2 is at
/// most 128/u ≤ 128/U, and the s > u/2 remnant is at most
/// sup_{u ≥ 2U} e^{−u/2}u⁷/(2U⁷) = 64 e^{−U} (decreasing beyond u = 14).
fn scaled_e_ray_sup(u_from: &CertReal, tol: f64) -> Result<CertReal> {
    let prec = u_from.prec();
    if *u_from.lo() < 14u32 {
        return Err(Error::TailUnbounded(format!(
            "ray bound for Ê needs u ≥ 14, got {u_from:.6}"
        )));
    }
    let at_start = scaled_e(u_from, tol)?;
    if at_start.sign() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::TailUnbounded(format!(
            "Ê({u_from:.6}) not certifiably positive; cannot bound the tail"
        )));
    }
    let mid = CertReal::from_u64(128, prec).div(u_from)?;
    let far = CertReal::from_u64(64, prec).mul(&u_from.neg().exp());
    Ok(at_start.add(&mid).add(&far))
}

/// Certified inf of m and sup of M over [u1, ∞).
///
/// The window [u1, u1 + 2000] is covered by unit cells evaluated as
/// intervals; the cells currently holding the optimum bound are bisected
/// until they are narrow, so the bound tightens adaptively where it matters.
/// Past the window every term is boxed by closed monotone bounds.
pub fn envelope_constants(
    u1: &CertReal,
    tol: f64,
    ctx: &PrecisionContext,
) -> Result<EnvelopeConstants> {
    let prec = u1.prec();
    let frame = EnvelopeFrame::new(u1, tol, ctx)?;

    // a must decrease on the whole ray for the tail box (and for the search
    // window to mean anything); the certificate at u1 covers u ≥ u1 since
    // its condition √(u/R) > 6.5 is monotone in u.
    if !a_monotone_certificate(&frame.params, u1)? {
        return Err(Error::TailUnbounded(format!(
            "decrease certificate for a failed at u1 = {u1:.6}"
        )));
    }

    // coarse pass over unit cells
    let window = SEARCH_WINDOW as u64;
    let mut cells: Vec<(CertReal, CertReal)> = Vec::with_capacity(window as usize);
    let mut lower_cells: Vec<(Float, usize)> = Vec::new();
    let mut upper_cells: Vec<(Float, usize)> = Vec::new();
    let mut bounds: Vec<(CertReal, CertReal)> = Vec::new();
    for k in 0..window {
        let a = u1.add(&CertReal::from_u64(k, prec));
        let b = u1.add(&CertReal::from_u64(k + 1, prec));
        let cell = a.hull(&b);
        let (lo_enc, hi_enc) = frame.eval(&cell)?;
        lower_cells.push((lo_enc.lo().clone(), cells.len()));
        upper_cells.push((hi_enc.hi().clone(), cells.len()));
        cells.push((a, b));
        bounds.push((lo_enc, hi_enc));
    }

    // refine whichever cell currently carries the optimum until it is narrow
    let min_width = 1e-4;
    let max_refinements = 4000usize;
    for target_upper in [false, true] {
        for _ in 0..max_refinements {
            let (idx, width) = {
                let best = if target_upper {
                    upper_cells
                        .iter()
                        .max_by(|x, y| x.0.partial_cmp(&y.0).expect("finite bounds"))
                } else {
                    lower_cells
                        .iter()
                        .min_by(|x, y| x.0.partial_cmp(&y.0).expect("finite bounds"))
                };
                let &(_, idx) = best.expect("non-empty cell list");
                let (a, b) = &cells[idx];
                (idx, b.sub(a).hi().to_f64())
            };
            if width <= min_width {
                break;
            }
            let (a, b) = cells[idx].clone();
            let mid = a.hull(&b).mid_point();
            for (na, nb) in [(a, mid.clone()), (mid, b)] {
                let cell = na.hull(&nb);
                let (lo_enc, hi_enc) = frame.eval(&cell)?;
                lower_cells.push((lo_enc.lo().clone(), cells.len()));
                upper_cells.push((hi_enc.hi().clone(), cells.len()));
                cells.push((na, nb));
                bounds.push((lo_enc, hi_enc));
            }
            // retire the split cell from both heaps
            lower_cells.retain(|&(_, i)| i != idx);
            upper_cells.retain(|&(_, i)| i != idx);
        }
    }

    let mut inf_bound: Option<Float> = None;
    for (lo, _) in &lower_cells {
        inf_bound = Some(match inf_bound {
            Some(cur) if cur <= *lo => cur,
            _ => lo.clone(),
        });
    }
    let mut sup_bound: Option<Float> = None;
    for (hi, _) in &upper_cells {
        sup_bound = Some(match sup_bound {
            Some(cur) if cur >= *hi => cur,
            _ => hi.clone(),
        });
    }
    let mut inf_bound = inf_bound.expect("window has cells");
    let mut sup_bound = sup_bound.expect("window has cells");

    // tail u ≥ u1 + window: box every non-constant term.
    //  0 ≤ a(u) ≤ a(edge)            (decrease certificate above)
    //  0 ≤ β(u) ≤ β(edge)            (decreasing for u > 6)
    //  −Ê(u1)β(edge) ≤ D(u) ≤ ray sup of Ê   (Ê(u) ≥ 0 since E increases
    //                                 from its certified-positive value at u1)
    let edge = u1.add(&CertReal::from_u64(window, prec));
    let zero = CertReal::zero(prec);
    let a_box = zero.hull(&a_eval(&frame.params, &LogPoint::new(edge.clone())?)?);
    let beta_box = zero.hull(&beta(&edge, u1)?);
    let d_hi = scaled_e_ray_sup(&edge, tol)?;
    let d_lo = frame.e_hat_u1.mul(&beta_box).neg();
    let d_box = d_lo.hull(&d_hi);
    let base = CertReal::from_u64(120, prec);
    let tail_lower = base
        .sub(&a_box)
        .add(&frame.scaled_c0.mul(&beta_box))
        .add(&frame.coeff_lower.mul(&d_box));
    let tail_upper = base
        .add(&a_box)
        .add(&frame.scaled_c1.mul(&beta_box))
        .add(&frame.coeff_upper.mul(&d_box));
    if *tail_lower.lo() < inf_bound {
        inf_bound = tail_lower.lo().clone();
    }
    if *tail_upper.hi() > sup_bound {
        sup_bound = tail_upper.hi().clone();
    }

    Ok(EnvelopeConstants {
        u1: u1.clone(),
        a_at_anchor: frame.a_at_anchor,
        scaled_c0: frame.scaled_c0,
        scaled_c1: frame.scaled_c1,
        lower: CertReal::point(inf_bound),
        upper: CertReal::point(sup_bound),
    })
}
