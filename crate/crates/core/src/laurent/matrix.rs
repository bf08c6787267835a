use std::fmt;

use super::rational::{int, Rational};
use super::series::{min_prec, Order, Series};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Default number of coefficients kept beyond the valuation when an exact
/// input has to be expanded into an infinite series.
pub const DEFAULT_PRECISION: i64 = 16;

/// `n × n` matrix of truncated Laurent series sharing one precision `N`.
///
/// Exact entries (Laurent polynomials, including structural zeros) are
/// known beyond `N`; every non-exact entry is known exactly through `N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixSeries {
    n: usize,
    entries: Vec<Series>,
}

impl MatrixSeries {
    pub fn zeros(n: usize) -> Self {
        MatrixSeries {
            n,
            entries: vec![Series::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_const(&Mat::identity(n))
    }

    pub fn from_const(m: &Mat) -> Self {
        Self::monomial(m, 0)
    }

    /// Exact `m · t^k`.
    pub fn monomial(m: &Mat, k: i64) -> Self {
        let n = m.rows();
        let entries = (0..n * n)
            .map(|idx| Series::monomial(m[(idx / n, idx % n)].clone(), k))
            .collect();
        MatrixSeries { n, entries }
    }

    /// `Σ m_k t^k`, every entry known through `prec` (or exact when `None`).
    pub fn from_terms(n: usize, terms: &[(i64, Mat)], prec: Option<i64>) -> Self {
        let entries = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let mut s = match prec {
                    Some(p) => Series::zero_to(p),
                    None => Series::zero(),
                };
                for (k, m) in terms {
                    s = s.add(&Series::monomial(m[(i, j)].clone(), *k));
                }
                s
            })
            .collect();
        Self::from_entries(n, entries)
    }

    /// Builds from row-major entries, truncating non-exact ones to a common
    /// precision.
    pub fn from_entries(n: usize, entries: Vec<Series>) -> Self {
        assert_eq!(entries.len(), n * n, "expected {} entries", n * n);
        MatrixSeries { n, entries }.synced()
    }

    fn synced(mut self) -> Self {
        if let Some(p) = self.precision() {
            for e in &mut self.entries {
                if e.precision().is_some_and(|q| q > p) {
                    *e = e.truncate(p);
                }
            }
        }
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Series {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Series] {
        &self.entries
    }

    /// Common precision `N` of the non-exact entries; `None` when exact.
    pub fn precision(&self) -> Option<i64> {
        self.entries
            .iter()
            .fold(None, |acc, e| min_prec(acc, e.precision()))
    }

    pub fn is_exact(&self) -> bool {
        self.precision().is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.entries.iter().all(Series::is_exact_zero)
    }

    /// Minimum entry valuation bound; `None` for the exact zero matrix.
    pub fn valuation_bound(&self) -> Option<i64> {
        self.entries.iter().filter_map(Series::valuation_bound).min()
    }

    pub fn order(&self) -> Result<Order> {
        if self.is_exact_zero() {
            return Ok(Order::Infinite);
        }
        self.entries
            .iter()
            .filter(|e| !e.is_zero_on_window())
            .filter_map(Series::valuation_bound)
            .min()
            .map(Order::Finite)
            .ok_or(Error::OrderUndetermined)
    }

    /// Constant matrix of `t^k` coefficients, `None` beyond the window.
    pub fn coeff(&self, k: i64) -> Option<Mat> {
        if self.precision().is_some_and(|p| k > p) {
            return None;
        }
        Some(Mat::from_fn(self.n, self.n, |i, j| {
            self.entry(i, j).coeff(k).expect("inside window")
        }))
    }

    /// Nonzero coefficient matrices in increasing exponent order.
    pub fn terms(&self) -> Vec<(i64, Mat)> {
        let mut exps: Vec<i64> = self
            .entries
            .iter()
            .flat_map(|e| e.terms().map(|(k, _)| k).collect::<Vec<_>>())
            .collect();
        exps.sort_unstable();
        exps.dedup();
        exps.into_iter()
            .map(|k| (k, self.coeff(k).expect("stored coefficient")))
            .collect()
    }

    fn zip(&self, other: &Self, f: impl Fn(&Series, &Series) -> Series) -> Self {
        assert_eq!(self.n, other.n, "size mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| f(a, b))
            .collect();
        Self::from_entries(self.n, entries)
    }

    fn map(&self, f: impl Fn(&Series) -> Series) -> Self {
        Self::from_entries(self.n, self.entries.iter().map(f).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, Series::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, Series::sub)
    }

    pub fn neg(&self) -> Self {
        self.map(Series::neg)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|e| e.scale(c))
    }

    pub fn scale_series(&self, s: &Series) -> Self {
        self.map(|e| e.mul(s))
    }

    pub fn derivative(&self) -> Self {
        self.map(Series::derivative)
    }

    pub fn shift(&self, k: i64) -> Self {
        self.map(|e| e.shift(k))
    }

    pub fn truncate(&self, prec: i64) -> Self {
        self.map(|e| e.truncate(prec))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "size mismatch");
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Series::zero();
                for k in 0..n {
                    let a = self.entry(i, k);
                    let b = other.entry(k, j);
                    if a.is_exact_zero() || b.is_exact_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b));
                }
                entries.push(acc);
            }
        }
        Self::from_entries(n, entries)
    }

    pub fn mul_vec(&self, v: &[Series]) -> Vec<Series> {
        let n = self.n;
        let out: Vec<Series> = (0..n)
            .map(|i| {
                (0..n).fold(Series::zero(), |acc, k| {
                    acc.add(&self.entry(i, k).mul(&v[k]))
                })
            })
            .collect();
        sync_vector(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.n);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn trace(&self) -> Series {
        (0..self.n).fold(Series::zero(), |acc, i| acc.add(self.entry(i, i)))
    }

    /// `[self, other]`.
    pub fn bracket(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let n = self.n;
        let entries = (0..n)
            .filter(|&i| i != row)
            .flat_map(|i| {
                (0..n)
                    .filter(move |&j| j != col)
                    .map(move |j| self.entry(i, j).clone())
            })
            .collect();
        MatrixSeries { n: n - 1, entries }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Series {
        match self.n {
            0 => Series::one(),
            1 => self.entries[0].clone(),
            n => {
                let mut acc = Series::zero();
                for j in 0..n {
                    let a = self.entry(0, j);
                    if a.is_exact_zero() {
                        continue;
                    }
                    let term = a.mul(&self.minor(0, j).det());
                    acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
                }
                acc
            }
        }
    }

    /// Inverse of a unit `t^v (M_0 + O(t))` with `M_0` invertible, by Neumann
    /// iteration on the regular part. The result keeps the input's relative
    /// precision `N - v`.
    pub fn invert_unit(&self) -> Result<Self> {
        self.invert_unit_to(DEFAULT_PRECISION)
    }

    /// As [`invert_unit`](Self::invert_unit); exact inputs whose inverse is
    /// not a Laurent polynomial get relative precision `rel_if_exact`.
    pub fn invert_unit_to(&self, rel_if_exact: i64) -> Result<Self> {
        let n = self.n;
        let v = self.valuation_bound().ok_or(Error::SingularLeadingMatrix)?;
        let m0 = self.coeff(v).ok_or(Error::SingularLeadingMatrix)?;
        let m0_inv = m0.inverse().ok_or(Error::SingularLeadingMatrix)?;
        let m0_inv_s = Self::from_const(&m0_inv);
        // self = t^v M_0 (1 + R), val(R) >= 1
        let r = m0_inv_s.mul(&self.shift(-v)).sub(&Self::identity(n));
        let minus_r = r.neg();
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        if r.is_exact() && r.pow(n as u32).is_exact_zero() {
            for _ in 1..n {
                term = term.mul(&minus_r);
                sum = sum.add(&term);
            }
        } else {
            let rel = self.precision().map_or(rel_if_exact, |p| p - v);
            let r_trunc = minus_r.truncate(rel);
            sum = sum.truncate(rel);
            for _ in 1..=rel.max(0) {
                term = term.mul(&r_trunc);
                if term.valuation_bound().is_none_or(|b| b > rel) {
                    break;
                }
                sum = sum.add(&term);
            }
        }
        Ok(sum.mul(&m0_inv_s).shift(-v))
    }

    /// General inverse `adj(m) / det(m)`; works whenever the determinant has
    /// a detectable leading coefficient.
    pub fn inverse(&self, rel_if_exact: i64) -> Result<Self> {
        let n = self.n;
        let det = self.det();
        let det_inv = det.inverse(rel_if_exact)?;
        if n == 1 {
            return Ok(Self::from_entries(1, vec![det_inv]));
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(j, i).det();
                let c = if (i + j) % 2 == 0 { c } else { c.neg() };
                entries.push(c.mul(&det_inv));
            }
        }
        Ok(Self::from_entries(n, entries))
    }

    /// `exp(X) = Σ X^m / m!`. Requires `val(X) >= 1`, or `X` exact and
    /// nilpotent, in which case the sum is a finite exact polynomial.
    /// Non-terminating sums are truncated at `t^prec`.
    pub fn exp_positive(&self, prec: i64) -> Result<Self> {
        let n = self.n;
        if self.is_exact_zero() {
            return Ok(Self::identity(n));
        }
        let nilpotent = self.is_exact() && self.pow(n as u32).is_exact_zero();
        let val = self.valuation_bound().expect("nonzero");
        if !nilpotent && val < 1 {
            return Err(Error::NonPositiveValuation);
        }
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        if nilpotent {
            for m in 1..n as i64 {
                term = term.mul(self).scale(&int(m).recip());
                sum = sum.add(&term);
            }
            return Ok(sum);
        }
        let target = self.precision().map_or(prec, |p| p.min(prec));
        let x = self.truncate(target);
        sum = sum.truncate(target);
        let mut m = 1;
        loop {
            term = term.mul(&x).scale(&int(m).recip());
            if term.valuation_bound().is_none_or(|b| b > target) {
                break;
            }
            sum = sum.add(&term);
            m += 1;
        }
        Ok(sum)
    }

    /// Coefficientwise equality on the common window.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.n == other.n
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.agrees_with(b))
    }
}

/// Truncates a vector of series to the common precision of its entries.
pub fn sync_vector(v: Vec<Series>) -> Vec<Series> {
    let p = v.iter().fold(None, |acc, e| min_prec(acc, e.precision()));
    match p {
        Some(p) => v.into_iter().map(|e| if e.is_exact() { e } else { e.truncate(p) }).collect(),
        None => v,
    }
}

impl fmt::Display for MatrixSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            write!(f, "0")?;
        }
        for (idx, (k, m)) in terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{m}*t^{k}")?;
        }
        if let Some(p) = self.precision() {
            write!(f, " + O(t^{})", p + 1)?;
        }
        Ok(())
    }
}

impl Default for MatrixSeries {
    fn default() -> Self {
        Self::zeros(1)
    }
}
