//! Connections `d + A dt` on the punctured disc and the gauge action
//! `Ga_g(A) = g A g^{-1} - (∂_t g) g^{-1}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::laurent::matrix::{MatrixSeries, DEFAULT_PRECISION};
use crate::laurent::series::{Order, Series};
use crate::liealg::{is_nilpotent, AlgebraContext, Context, Kind};
use crate::linalg::Mat;

fn same_context(a: &Context, b: &Context) -> Result<()> {
    if Arc::ptr_eq(a, b) || (a.n == b.n && a.kind == b.kind) {
        Ok(())
    } else {
        Err(Error::ContextMismatch(format!(
            "{}_{} vs {}_{}",
            a.kind, a.n, b.kind, b.n
        )))
    }
}

/// A `g(F)`-valued series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    ctx: Context,
    series: MatrixSeries,
}

impl Connection {
    /// Checks size and, for `sl`, that the trace vanishes on the window.
    pub fn new(ctx: Context, series: MatrixSeries) -> Result<Self> {
        if series.n() != ctx.n {
            return Err(Error::NotInAlgebra(format!(
                "expected {0}x{0} entries, got {1}x{1}",
                ctx.n,
                series.n()
            )));
        }
        if ctx.kind == Kind::Sl && !series.trace().is_zero_on_window() {
            return Err(Error::NotInAlgebra("trace is nonzero".into()));
        }
        Ok(Connection { ctx, series })
    }

    pub fn from_terms(ctx: Context, terms: &[(i64, Mat)], prec: Option<i64>) -> Result<Self> {
        let n = ctx.n;
        Self::new(ctx, MatrixSeries::from_terms(n, terms, prec))
    }

    pub fn zero(ctx: Context) -> Self {
        let n = ctx.n;
        Connection {
            ctx,
            series: MatrixSeries::zeros(n),
        }
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn series(&self) -> &MatrixSeries {
        &self.series
    }

    pub fn precision(&self) -> Option<i64> {
        self.series.precision()
    }

    pub fn order(&self) -> Result<Order> {
        self.series.order()
    }

    /// Finite order, rejecting the zero connection.
    pub fn finite_order(&self) -> Result<i64> {
        self.order()?
            .finite()
            .ok_or_else(|| Error::NotInAlgebra("connection is identically zero".into()))
    }

    pub fn coeff(&self, k: i64) -> Option<Mat> {
        self.series.coeff(k)
    }

    /// `t^k A`; with `k = -r` this gives the normalized `Ã`.
    pub fn shift_valuation(&self, k: i64) -> Self {
        Connection {
            ctx: self.ctx.clone(),
            series: self.series.shift(k),
        }
    }

    pub fn truncate(&self, prec: i64) -> Self {
        Connection {
            ctx: self.ctx.clone(),
            series: self.series.truncate(prec),
        }
    }

    /// Truncates an exact connection to `order + rel`; inexact ones are kept.
    pub fn with_working_window(&self, rel: i64) -> Result<Self> {
        if self.precision().is_some() {
            return Ok(self.clone());
        }
        match self.order()? {
            Order::Finite(r) => Ok(self.truncate(r + rel)),
            Order::Infinite => Ok(self.clone()),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_context(&self.ctx, &other.ctx)?;
        Ok(Connection {
            ctx: self.ctx.clone(),
            series: self.series.add(&other.series),
        })
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.ctx.n == other.ctx.n && self.series.agrees_with(&other.series)
    }
}

/// One factor of a gauge element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Constant(Mat),
    /// `exp(t^k X)`; `k <= 0` requires `X` nilpotent.
    Exp { k: i64, x: Mat },
    /// `t^λ = diag(t^{λ_1}, …, t^{λ_n})`.
    Coweight(Vec<i64>),
}

impl Factor {
    fn matrix(&self, n: usize, prec: i64) -> Result<MatrixSeries> {
        match self {
            Factor::Constant(m) => Ok(MatrixSeries::from_const(m)),
            Factor::Exp { k, x } => MatrixSeries::monomial(x, *k).exp_positive(prec),
            Factor::Coweight(l) => Ok(coweight_matrix(n, l)),
        }
    }

    fn inverse(&self) -> Result<Factor> {
        Ok(match self {
            Factor::Constant(m) => Factor::Constant(
                m.inverse()
                    .ok_or_else(|| Error::NotInGroup("singular constant factor".into()))?,
            ),
            Factor::Exp { k, x } => Factor::Exp { k: *k, x: x.neg() },
            Factor::Coweight(l) => Factor::Coweight(l.iter().map(|v| -v).collect()),
        })
    }
}

pub fn coweight_matrix(n: usize, l: &[i64]) -> MatrixSeries {
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            if i == j {
                Series::monomial(crate::laurent::rational::int(1), l[i])
            } else {
                Series::zero()
            }
        })
        .collect();
    MatrixSeries::from_entries(n, entries)
}

/// An invertible matrix series, stored with its inverse.
///
/// `factors`, when present, lists factors in the order they act: the element
/// is `factors[m-1] ⋯ factors[0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeElement {
    ctx: Context,
    g: MatrixSeries,
    inv: MatrixSeries,
    factors: Option<Vec<Factor>>,
}

impl GaugeElement {
    pub fn identity(ctx: Context) -> Self {
        let n = ctx.n;
        GaugeElement {
            ctx,
            g: MatrixSeries::identity(n),
            inv: MatrixSeries::identity(n),
            factors: Some(Vec::new()),
        }
    }

    /// Wraps a matrix series after checking that its determinant is a unit
    /// of `F`, and a nonzero constant for `sl`.
    pub fn new(ctx: Context, g: MatrixSeries) -> Result<Self> {
        Self::with_inverse_precision(ctx, g, DEFAULT_PRECISION)
    }

    /// As [`new`](Self::new); an exact `g` whose inverse is an infinite
    /// series gets an inverse with relative precision `rel`.
    pub fn with_inverse_precision(ctx: Context, g: MatrixSeries, rel: i64) -> Result<Self> {
        check_group(&ctx, &g)?;
        let inv = g.inverse(rel)?;
        Ok(GaugeElement {
            ctx,
            g,
            inv,
            factors: None,
        })
    }

    /// Expands a factorization; inexact exponentials are cut at `t^prec`.
    pub fn from_factors(ctx: Context, factors: Vec<Factor>, prec: i64) -> Result<Self> {
        let n = ctx.n;
        let mut g = MatrixSeries::identity(n);
        let mut inv = MatrixSeries::identity(n);
        for fac in &factors {
            if let Factor::Exp { k, x } = fac {
                if *k <= 0 && !is_nilpotent(x) {
                    return Err(Error::NonPositiveValuation);
                }
                ctx.check_in_algebra(x)?;
            }
            g = fac.matrix(n, prec)?.mul(&g);
            inv = inv.mul(&fac.inverse()?.matrix(n, prec)?);
        }
        check_group(&ctx, &g)?;
        Ok(GaugeElement {
            ctx,
            g,
            inv,
            factors: Some(factors),
        })
    }

    pub fn constant(ctx: Context, m: &Mat) -> Result<Self> {
        Self::from_factors(ctx, vec![Factor::Constant(m.clone())], 0)
    }

    pub fn coweight(ctx: Context, l: &[i64]) -> Result<Self> {
        Self::from_factors(ctx, vec![Factor::Coweight(l.to_vec())], 0)
    }

    /// `exp(t^k X)`, cut at `t^prec` when the sum does not terminate.
    pub fn exp(ctx: Context, k: i64, x: &Mat, prec: i64) -> Result<Self> {
        Self::from_factors(ctx, vec![Factor::Exp { k, x: x.clone() }], prec)
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn matrix(&self) -> &MatrixSeries {
        &self.g
    }

    pub fn inverse_matrix(&self) -> &MatrixSeries {
        &self.inv
    }

    pub fn factors(&self) -> Option<&[Factor]> {
        self.factors.as_deref()
    }

    pub fn precision(&self) -> Option<i64> {
        self.g.precision()
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &GaugeElement) -> Result<GaugeElement> {
        same_context(&self.ctx, &other.ctx)?;
        let factors = match (&self.factors, &other.factors) {
            (Some(a), Some(b)) => Some(b.iter().chain(a).cloned().collect()),
            _ => None,
        };
        Ok(GaugeElement {
            ctx: self.ctx.clone(),
            g: self.g.mul(&other.g),
            inv: other.inv.mul(&self.inv),
            factors,
        })
    }

    pub fn inverse(&self) -> Result<GaugeElement> {
        let factors = match &self.factors {
            Some(fs) => Some(fs.iter().rev().map(Factor::inverse).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        Ok(GaugeElement {
            ctx: self.ctx.clone(),
            g: self.inv.clone(),
            inv: self.g.clone(),
            factors,
        })
    }

    /// `Ad_g(M) = g M g^{-1}`.
    pub fn adjoint(&self, m: &MatrixSeries) -> MatrixSeries {
        self.g.mul(m).mul(&self.inv)
    }

    /// `(∂_t g) g^{-1}`.
    pub fn dlog(&self) -> MatrixSeries {
        self.g.derivative().mul(&self.inv)
    }

    pub fn agrees_with(&self, other: &GaugeElement) -> bool {
        self.g.agrees_with(&other.g)
    }
}

fn check_group(ctx: &AlgebraContext, g: &MatrixSeries) -> Result<()> {
    if g.n() != ctx.n {
        return Err(Error::NotInGroup(format!(
            "expected {0}x{0} entries, got {1}x{1}",
            ctx.n,
            g.n()
        )));
    }
    let det = g.det();
    if det.leading().is_none() {
        return Err(Error::NotInGroup("determinant vanishes on the window".into()));
    }
    if ctx.kind == Kind::Sl && !(det.valuation_bound() == Some(0) && det.is_constant_on_window()) {
        return Err(Error::NotInGroup(format!(
            "determinant {det} is not a nonzero constant"
        )));
    }
    Ok(())
}

/// `(∂_t g) g^{-1}`.
pub fn dlog(g: &GaugeElement) -> MatrixSeries {
    g.dlog()
}

/// `Ga_g(A) = g A g^{-1} - (∂_t g) g^{-1}`.
pub fn gauge_transform(g: &GaugeElement, a: &Connection) -> Result<Connection> {
    same_context(&g.ctx, &a.ctx)?;
    let out = g.adjoint(&a.series).sub(&g.dlog());
    // the window is empty when nothing nonzero is known and the known part
    // does not even reach the input valuation
    if let (Some(n), Some(v)) = (out.precision(), a.series.valuation_bound()) {
        if n < v && out.order().is_err() {
            return Err(Error::PrecisionExhausted(format!(
                "gauge transform is known only through t^{n}, below the input valuation {v}"
            )));
        }
    }
    Connection::new(a.ctx.clone(), out)
}

pub fn compose(g: &GaugeElement, h: &GaugeElement) -> Result<GaugeElement> {
    g.compose(h)
}

pub fn inverse(g: &GaugeElement) -> Result<GaugeElement> {
    g.inverse()
}

pub fn order(a: &Connection) -> Result<Order> {
    a.order()
}

/// True when a series is zero at every known exponent below `bound`.
pub(crate) fn vanishes_below(s: &MatrixSeries, bound: i64) -> Result<bool> {
    if s.is_exact_zero() {
        return Ok(true);
    }
    let v = s.valuation_bound().expect("nonzero");
    let top = s.precision().map_or(bound - 1, |p| p.min(bound - 1));
    for k in v..=top {
        if !s.coeff(k).expect("inside window").is_zero() {
            return Ok(false);
        }
    }
    if s.precision().is_some_and(|p| p < bound - 1) {
        return Err(Error::OrderUndetermined);
    }
    Ok(true)
}
