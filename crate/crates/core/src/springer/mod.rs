//! Membership in the fibers `M_A`, `Y_{Ã,λ}`, leading terms and regular
//! points, plus the regularization search and tangent dimensions.

mod search;
mod tangent;

pub use search::{
    coweights, regularization_search, weyl_and_elementary, SearchCertificate, SearchStats,
    DEFAULT_COWEIGHT_BOUND, DEFAULT_DEPTH_BOUND,
};
pub use tangent::{default_window_depth, tangent_dim_at_depth, tangent_space_dim};

use crate::error::{Error, Result};
use crate::gauge::{gauge_transform, vanishes_below, Connection, GaugeElement};
use crate::laurent::matrix::MatrixSeries;
use crate::laurent::rational::Rational;
use crate::liealg::is_nilpotent;
use crate::linalg::Mat;

/// `Ã = t^{-r} A` together with `r` and the deformation parameter `λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformedFiberQuery {
    pub a_tilde: Connection,
    pub r: i64,
    pub lambda: Rational,
}

impl DeformedFiberQuery {
    pub fn new(a_tilde: Connection, r: i64, lambda: Rational) -> Result<Self> {
        if r > -1 {
            return Err(Error::InvalidOrder(r));
        }
        if a_tilde.series().valuation_bound().is_some_and(|v| v < 0) {
            return Err(Error::NotInAlgebra("Ã must have no poles".into()));
        }
        Ok(DeformedFiberQuery { a_tilde, r, lambda })
    }

    /// Query for `A` at its own order.
    pub fn from_connection(a: &Connection, lambda: Rational) -> Result<Self> {
        let r = a.finite_order()?;
        Self::new(a.shift_valuation(-r), r, lambda)
    }

    /// `t^r Ã`.
    pub fn connection(&self) -> Connection {
        self.a_tilde.shift_valuation(self.r)
    }
}

/// `ord(Ga_{g^{-1}}(A)) >= ord(A)`.
pub fn in_m_a(a: &Connection, g: &GaugeElement) -> Result<bool> {
    let r = a.finite_order()?;
    let b = gauge_transform(&g.inverse()?, a)?;
    vanishes_below(b.series(), r)
}

/// `Ad_{g^{-1}}(Ã) - λ t^{-r} dlog(g^{-1})`.
pub fn deformed_expression(q: &DeformedFiberQuery, g: &GaugeElement) -> Result<MatrixSeries> {
    let ginv = g.inverse()?;
    let ad = ginv.adjoint(q.a_tilde.series());
    Ok(ad.sub(&ginv.dlog().shift(-q.r).scale(&q.lambda)))
}

fn window_exhausted(e: Error) -> Error {
    match e {
        Error::OrderUndetermined => Error::PrecisionExhausted(
            "fiber condition is undecided on the known window".into(),
        ),
        other => other,
    }
}

/// The deformed condition lands in `g(O)`.
pub fn in_deformed_fiber(q: &DeformedFiberQuery, g: &GaugeElement) -> Result<bool> {
    vanishes_below(&deformed_expression(q, g)?, 0).map_err(window_exhausted)
}

/// Iwahori variant: in the fiber with upper-triangular constant term.
pub fn in_iwahori_fiber(q: &DeformedFiberQuery, g: &GaugeElement) -> Result<bool> {
    if !in_deformed_fiber(q, g)? {
        return Ok(false);
    }
    let c0 = deformed_expression(q, g)?
        .coeff(0)
        .ok_or_else(|| Error::PrecisionExhausted("constant term is beyond the window".into()))?;
    Ok(c0.is_upper_triangular())
}

/// Constant term of the deformed expression; nilpotent whenever `A_r` is.
pub fn leading_term(q: &DeformedFiberQuery, g: &GaugeElement) -> Result<Mat> {
    let ar = q
        .a_tilde
        .coeff(0)
        .ok_or_else(|| Error::PrecisionExhausted("A_r is beyond the window".into()))?;
    if !is_nilpotent(&ar) {
        return Err(Error::NotNilpotent);
    }
    if !in_deformed_fiber(q, g)? {
        return Err(Error::NotMember);
    }
    let c0 = deformed_expression(q, g)?
        .coeff(0)
        .ok_or_else(|| Error::PrecisionExhausted("constant term is beyond the window".into()))?;
    if !is_nilpotent(&c0) {
        return Err(Error::LemmaViolation(format!("leading term {c0} is not nilpotent")));
    }
    Ok(c0)
}

pub fn is_regular_point(q: &DeformedFiberQuery, g: &GaugeElement) -> Result<bool> {
    Ok(crate::liealg::is_regular_nilpotent(&leading_term(q, g)?))
}
