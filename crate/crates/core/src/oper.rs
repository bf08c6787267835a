//! Oper-form test and the normalizer bringing a connection with regular
//! leading term into `S t^r + g^e(F)`.

use crate::error::{Error, Result};
use crate::gauge::{gauge_transform, Connection, Factor, GaugeElement};
use crate::laurent::matrix::{MatrixSeries, DEFAULT_PRECISION};
use crate::laurent::rational::Rational;
use crate::laurent::series::{Order, Series};
use crate::liealg::{
    conjugate_regular_nilpotent_to_f, conjugate_regular_to_slice, is_regular,
    is_regular_nilpotent, Context,
};
use crate::linalg::Mat;

/// `leading · t^r + Σ_j c_j(t) · ge_basis[j]` with `val(c_j) >= r + 1`.
///
/// `leading` is `f` for the nilpotent normalizer and a Kostant slice point
/// otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperForm {
    pub ctx: Context,
    pub r: i64,
    pub leading: Mat,
    pub ge_coefficients: Vec<Series>,
}

impl OperForm {
    pub fn expand(&self) -> Result<Connection> {
        expand(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationCertificate {
    /// Constant conjugator followed by the `exp(t^k X_k)` factors.
    pub gauge: GaugeElement,
    pub conjugator: Mat,
    /// Nonzero steps `(k, X_k)` in the order applied.
    pub steps: Vec<(i64, Mat)>,
    pub result: OperForm,
    /// `(r, N)`; `N` is `None` when the result is exact.
    pub window: (i64, Option<i64>),
}

impl NormalizationCertificate {
    pub fn k(&self) -> usize {
        self.steps.len()
    }
}

/// `Σ ψ_i X_{-α_i} + v` with units `ψ_i` and `v` upper triangular.
pub fn is_oper_form(a: &Connection) -> Result<bool> {
    let n = a.ctx().n;
    let s = a.series();
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            if !s.entry(i, j).is_zero_on_window() {
                return Ok(false);
            }
        }
    }
    let mut undetermined = false;
    for i in 1..n {
        let psi = s.entry(i, i - 1);
        if psi.is_exact_zero() {
            return Ok(false);
        }
        if psi.is_zero_on_window() {
            undetermined = true;
        }
    }
    if undetermined {
        return Err(Error::OrderUndetermined);
    }
    Ok(true)
}

pub fn expand(of: &OperForm) -> Result<Connection> {
    let n = of.ctx.n;
    let mut series = MatrixSeries::monomial(&of.leading, of.r);
    for (c, b) in of.ge_coefficients.iter().zip(&of.ctx.ge_basis) {
        series = series.add(&MatrixSeries::from_const(b).scale_series(c));
    }
    debug_assert_eq!(series.n(), n);
    Connection::new(of.ctx.clone(), series)
}

/// Decomposes `B - leading t^r` along `ge_basis`, failing if some known
/// coefficient above `t^r` leaves `g^e`.
fn read_oper_form(b: &Connection, r: i64, leading: &Mat) -> Result<OperForm> {
    let ctx = b.ctx().clone();
    let rest = b.series().sub(&MatrixSeries::monomial(leading, r));
    let prec = rest.precision();
    let mut coeffs: Vec<Vec<Rational>> = vec![Vec::new(); ctx.rank()];
    let start = r + 1;
    if !rest.is_exact_zero() {
        let lo = rest.valuation_bound().expect("nonzero");
        if lo < start {
            return Err(Error::Invariant(format!(
                "coefficient at t^{lo} survives below the leading term"
            )));
        }
        let hi = match prec {
            Some(p) => p,
            None => rest.terms().last().map_or(start, |(k, _)| *k),
        };
        for k in start..=hi {
            let m = rest.coeff(k).expect("inside window");
            let c = ctx.ge_coords(&m).filter(|_| ctx.in_ge(&m)).ok_or_else(|| {
                Error::Invariant(format!("coefficient at t^{k} is not in g^e"))
            })?;
            for (j, x) in c.into_iter().enumerate() {
                coeffs[j].push(x);
            }
        }
    }
    let ge_coefficients = coeffs
        .into_iter()
        .map(|c| match prec {
            Some(p) => Series::truncated(start, c, p),
            None => Series::exact(start, c),
        })
        .collect();
    Ok(OperForm {
        ctx,
        r,
        leading: leading.clone(),
        ge_coefficients,
    })
}

/// Every known coefficient strictly above `t^r` lies in `g^e`.
pub fn tail_in_ge(b: &Connection, r: i64) -> bool {
    let ctx = b.ctx();
    b.series()
        .terms()
        .iter()
        .all(|(k, m)| *k <= r || ctx.in_ge(m))
}

/// Per-step solver: given `Y`, returns `X` and `P ∈ g^e` with
/// `Y + [X, S] = P`.
trait StepSolver {
    fn solve(&self, y: &Mat) -> Result<(Mat, Mat)>;
}

struct Nilpotent<'a>(&'a Context);

impl StepSolver for Nilpotent<'_> {
    fn solve(&self, y: &Mat) -> Result<(Mat, Mat)> {
        self.0.solve_ad_f(y)
    }
}

/// Solves `[X, S] - P = -Y` with `X` over all of `g` and `P ∈ g^e`; free
/// variables are set to zero.
struct SliceSolver<'a> {
    ctx: &'a Context,
    system: Mat,
}

impl<'a> SliceSolver<'a> {
    fn new(ctx: &'a Context, s: &Mat) -> Result<Self> {
        let mut cols: Vec<Vec<Rational>> = ctx
            .g_basis
            .iter()
            .map(|b| ctx.coords(&b.bracket(s)))
            .collect();
        cols.extend(
            ctx.ge_basis
                .iter()
                .map(|b| ctx.coords(b).into_iter().map(|c| -c).collect()),
        );
        let system = Mat::from_columns(&cols);
        if system.rank() < ctx.dim() {
            return Err(Error::SolverDegenerate(format!(
                "g^e + [g, S] has rank {} < {}",
                system.rank(),
                ctx.dim()
            )));
        }
        Ok(SliceSolver { ctx, system })
    }
}

impl StepSolver for SliceSolver<'_> {
    fn solve(&self, y: &Mat) -> Result<(Mat, Mat)> {
        self.ctx.check_in_algebra(y)?;
        let rhs: Vec<Rational> = self.ctx.coords(y).into_iter().map(|c| -c).collect();
        let sol = self
            .system
            .solve(&rhs)
            .ok_or_else(|| Error::SolverDegenerate("step system is inconsistent".into()))?;
        let d = self.ctx.dim();
        let x = self.ctx.from_coords(&sol[..d]);
        let p = self
            .ctx
            .ge_basis
            .iter()
            .zip(&sol[d..])
            .fold(Mat::zeros(self.ctx.n, self.ctx.n), |acc, (b, c)| acc.add(&b.scale(c)));
        Ok((x, p))
    }
}

/// Intermediate states of a normalization, for stability checks.
#[derive(Clone, Debug)]
pub struct NormalizationTrace {
    pub certificate: NormalizationCertificate,
    /// `(k, B)` after each applied step, starting with `k = 0` (after the
    /// constant conjugation).
    pub states: Vec<(i64, Connection)>,
}

fn leading_order(a: &Connection) -> Result<i64> {
    match a.order()? {
        Order::Finite(r) if r < -1 => Ok(r),
        Order::Finite(r) => Err(Error::OrderTooLarge(r)),
        Order::Infinite => Err(Error::NotRegular),
    }
}

fn run(
    a: &Connection,
    r: i64,
    conjugator: Mat,
    leading: Mat,
    solver: &dyn StepSolver,
    rel: i64,
    trace: bool,
) -> Result<NormalizationTrace> {
    let ctx = a.ctx().clone();
    let mut factors = vec![Factor::Constant(conjugator.clone())];
    let h = GaugeElement::constant(ctx.clone(), &conjugator)?;
    let mut b = gauge_transform(&h, a)?;
    let mut states = Vec::new();
    if trace {
        states.push((0, b.clone()));
    }
    let cap = r + rel;
    let mut steps = Vec::new();
    let mut k = 1;
    loop {
        let top = match b.precision() {
            Some(p) => p,
            None if tail_in_ge(&b, r) => break,
            None => cap,
        };
        if r + k > top {
            if b.precision().is_none() {
                b = b.truncate(cap);
            }
            break;
        }
        let y = b.coeff(r + k).expect("inside window");
        let (x, _) = solver.solve(&y)?;
        if !x.is_zero() {
            // exp factors must be known through N_B - r to keep B's window
            let exp_prec = b.precision().unwrap_or(cap) - r;
            let gk = GaugeElement::exp(ctx.clone(), k, &x, exp_prec)?;
            if b.precision().is_none() && gk.precision().is_some() {
                b = b.truncate(cap);
            }
            b = gauge_transform(&gk, &b)?;
            factors.push(Factor::Exp { k, x: x.clone() });
            steps.push((k, x));
        }
        if trace {
            states.push((k, b.clone()));
        }
        k += 1;
    }
    let result = read_oper_form(&b, r, &leading)?;
    let window_top = b.precision();
    let exp_prec = window_top.unwrap_or(cap) - r;
    let gauge = GaugeElement::from_factors(ctx, factors, exp_prec)?;
    Ok(NormalizationTrace {
        certificate: NormalizationCertificate {
            gauge,
            conjugator,
            steps,
            result,
            window: (r, window_top),
        },
        states,
    })
}

/// Brings `A` with regular nilpotent `A_r`, `r < -1`, into
/// `f t^r + g^e(F)`. Exact inputs that do not terminate are cut at
/// `t^{r + DEFAULT_PRECISION}`.
pub fn normalize_regular_nilpotent(a: &Connection) -> Result<NormalizationCertificate> {
    normalize_regular_nilpotent_traced(a, DEFAULT_PRECISION, false).map(|t| t.certificate)
}

pub fn normalize_regular_nilpotent_traced(
    a: &Connection,
    rel: i64,
    trace: bool,
) -> Result<NormalizationTrace> {
    let ctx = a.ctx().clone();
    let r = match a.order()? {
        Order::Infinite => return Err(Error::NotRegularNilpotent),
        _ => leading_order(a)?,
    };
    let ar = a.coeff(r).expect("order is inside window");
    if !is_regular_nilpotent(&ar) {
        return Err(Error::NotRegularNilpotent);
    }
    let h = conjugate_regular_nilpotent_to_f(&ctx, &ar)?;
    run(a, r, h, ctx.f.clone(), &Nilpotent(&ctx), rel, trace)
}

/// Brings `A` with regular `A_r`, `r < -1`, into `S t^r + g^e(F)` where `S`
/// is the Kostant slice point of `A_r`.
pub fn normalize_regular(a: &Connection) -> Result<NormalizationCertificate> {
    normalize_regular_traced(a, DEFAULT_PRECISION, false).map(|t| t.certificate)
}

pub fn normalize_regular_traced(
    a: &Connection,
    rel: i64,
    trace: bool,
) -> Result<NormalizationTrace> {
    let ctx = a.ctx().clone();
    let r = leading_order(a)?;
    let ar = a.coeff(r).expect("order is inside window");
    if !is_regular(&ar) {
        return Err(Error::NotRegular);
    }
    let (s, h) = conjugate_regular_to_slice(&ctx, &ar)?;
    let solver = SliceSolver::new(&ctx, &s)?;
    run(a, r, h, s, &solver, rel, trace)
}

/// Replays a certificate with [`gauge_transform`] only.
pub fn verify_certificate(a: &Connection, cert: &NormalizationCertificate) -> Result<bool> {
    let replay = gauge_transform(&cert.gauge, a)?;
    let expanded = expand(&cert.result)?;
    Ok(replay.agrees_with(&expanded)
        && cert.steps.iter().all(|(k, _)| *k >= 1)
        && expanded.coeff(cert.result.r) == Some(cert.result.leading.clone())
        && tail_in_ge(&expanded, cert.result.r)
        && cert.gauge.matrix().coeff(0) == Some(cert.conjugator.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::rational::int;
    use crate::liealg::{make_context, Kind};

    fn sl(n: usize) -> Context {
        make_context(n, Kind::Sl).unwrap()
    }

    #[test]
    fn oper_form_examples() {
        let c = sl(2);
        let a = Connection::from_terms(c.clone(), &[(-2, c.f.clone())], None).unwrap();
        assert_eq!(is_oper_form(&a), Ok(true));
        let b = Connection::from_terms(c.clone(), &[(-1, c.e.clone())], None).unwrap();
        assert_eq!(is_oper_form(&b), Ok(false));
        let d = Connection::from_terms(
            c.clone(),
            &[(-2, c.f.clone()), (0, c.e.scale(&int(2)))],
            None,
        )
        .unwrap();
        assert_eq!(is_oper_form(&d), Ok(true));
        let undetermined = Connection::from_terms(c.clone(), &[(-1, c.e.clone())], Some(3)).unwrap();
        assert_eq!(is_oper_form(&undetermined), Err(Error::OrderUndetermined));
    }

    #[test]
    fn already_normal_gives_identity_certificate() {
        let c = sl(2);
        let a = Connection::from_terms(c.clone(), &[(-2, c.f.clone())], None).unwrap();
        let cert = normalize_regular_nilpotent(&a).unwrap();
        assert_eq!(cert.k(), 0);
        assert_eq!(cert.conjugator, Mat::identity(2));
        assert_eq!(expand(&cert.result).unwrap(), a);
        assert_eq!(cert.window, (-2, None));
    }

    #[test]
    fn one_step_example() {
        let c = sl(2);
        let h = c.two_rho_check.clone();
        let a = Connection::from_terms(c.clone(), &[(-2, c.f.clone()), (-1, h)], None).unwrap();
        let cert = normalize_regular_nilpotent(&a).unwrap();
        assert_eq!(cert.steps, vec![(1, c.e.neg())]);
        let expected = Connection::from_terms(
            c.clone(),
            &[(-2, c.f.clone()), (0, c.e.scale(&int(2)))],
            None,
        )
        .unwrap();
        assert_eq!(expand(&cert.result).unwrap(), expected);
        assert_eq!(cert.result.ge_coefficients, vec![Series::constant(int(2))]);
        assert!(verify_certificate(&a, &cert).unwrap());
    }

    #[test]
    fn expand_examples() {
        let c = sl(2);
        let of = OperForm {
            ctx: c.clone(),
            r: -2,
            leading: c.f.clone(),
            ge_coefficients: vec![Series::zero()],
        };
        let a = Connection::from_terms(c.clone(), &[(-2, c.f.clone())], None).unwrap();
        assert_eq!(expand(&of).unwrap(), a);
        let of2 = OperForm {
            ge_coefficients: vec![Series::constant(int(2))],
            ..of
        };
        assert!(is_oper_form(&expand(&of2).unwrap()).unwrap());
    }

    #[test]
    fn sl3_inexact_input_replays() {
        let c = sl(3);
        let y = Mat::from_ints(3, &[1, -1, 2, 0, 1, 3, 1, -2, -2]);
        let a = Connection::from_terms(
            c.clone(),
            &[(-3, c.f.clone()), (-2, y.clone()), (0, y.transpose())],
            Some(12),
        )
        .unwrap();
        let tr = normalize_regular_nilpotent_traced(&a, DEFAULT_PRECISION, true).unwrap();
        let cert = &tr.certificate;
        assert!(verify_certificate(&a, cert).unwrap());
        assert_eq!(cert.window, (-3, Some(12)));
        assert!(is_oper_form(&expand(&cert.result).unwrap()).unwrap());
        // coefficients through t^{r+k} freeze after step k
        for (i, (k, before)) in tr.states.iter().enumerate() {
            for (_, later) in &tr.states[i + 1..] {
                for m in -3..=(-3 + k) {
                    assert_eq!(before.coeff(m), later.coeff(m));
                }
            }
        }
    }

    #[test]
    fn regular_leading_term() {
        let c = sl(2);
        let fe = c.f.add(&c.e);
        let a = Connection::from_terms(c.clone(), &[(-2, fe.clone())], None).unwrap();
        let cert = normalize_regular(&a).unwrap();
        assert_eq!(cert.k(), 0);
        assert_eq!(cert.conjugator, Mat::identity(2));

        let h = c.two_rho_check.clone();
        let b = Connection::from_terms(c.clone(), &[(-2, h), (-1, c.e.clone())], None).unwrap();
        let cert = normalize_regular(&b).unwrap();
        assert_eq!(cert.result.leading, fe);
        assert!(verify_certificate(&b, &cert).unwrap());

        let z = Connection::from_terms(c.clone(), &[(-2, Mat::zeros(2, 2))], None).unwrap();
        assert!(normalize_regular(&z).is_err());
        let low = Connection::from_terms(c.clone(), &[(-1, c.f.clone())], None).unwrap();
        assert_eq!(normalize_regular(&low), Err(Error::OrderTooLarge(-1)));
    }

    #[test]
    fn preconditions() {
        let c = sl(3);
        let a = Connection::from_terms(c.clone(), &[(-2, Mat::unit(3, 0, 2))], None).unwrap();
        assert_eq!(normalize_regular_nilpotent(&a), Err(Error::NotRegularNilpotent));
        let b = Connection::from_terms(c.clone(), &[(-1, c.f.clone())], None).unwrap();
        assert_eq!(normalize_regular_nilpotent(&b), Err(Error::OrderTooLarge(-1)));
    }
}
