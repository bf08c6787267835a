use std::fmt;

use num_traits::{One, Zero};

use super::rational::{int, Rational};
use crate::error::{Error, Result};

/// Order of a series: the exponent of its leading nonzero coefficient, or
/// `Infinite` for an exactly zero series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(i64),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<i64> {
        match self {
            Order::Finite(r) => Some(r),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(r) => write!(f, "{r}"),
            Order::Infinite => write!(f, "+inf"),
        }
    }
}

/// Truncated Laurent series `Σ c_k t^k` over ℚ.
///
/// Coefficients are stored for the exponents `start ..= N` where `N` is the
/// precision; everything above `N` is unknown. A series with no precision is
/// exact, i.e. a Laurent polynomial whose omitted coefficients are zero.
///
/// Invariants after normalization:
/// - finite precision: `coeffs.len() == N - start + 1`, `coeffs[0] != 0`
///   unless the window is empty, in which case `start == N + 1`;
/// - exact: no leading or trailing zeros; the exact zero has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Series {
    start: i64,
    coeffs: Vec<Rational>,
    prec: Option<i64>,
}

pub(crate) fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Series {
    pub fn zero() -> Self {
        Series {
            start: 0,
            coeffs: Vec::new(),
            prec: None,
        }
    }

    /// The series known to vanish through `t^prec` and unknown beyond.
    pub fn zero_to(prec: i64) -> Self {
        Series {
            start: prec + 1,
            coeffs: Vec::new(),
            prec: Some(prec),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: Rational, k: i64) -> Self {
        Self::exact(k, vec![c])
    }

    /// Exact Laurent polynomial with `coeffs[i]` at `t^(start + i)`.
    pub fn exact(start: i64, coeffs: Vec<Rational>) -> Self {
        Series {
            start,
            coeffs,
            prec: None,
        }
        .normalized()
    }

    /// Series known through `t^prec`. Coefficients past the end of `coeffs`
    /// but inside the window are zero; those past `prec` are dropped.
    pub fn truncated(start: i64, coeffs: Vec<Rational>, prec: i64) -> Self {
        Series {
            start,
            coeffs,
            prec: Some(prec),
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        match self.prec {
            None => {
                while self.coeffs.last().is_some_and(Zero::is_zero) {
                    self.coeffs.pop();
                }
                let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
                self.coeffs.drain(..lead);
                self.start += lead as i64;
                if self.coeffs.is_empty() {
                    self.start = 0;
                }
            }
            Some(n) => {
                if self.start > n + 1 {
                    self.start = n + 1;
                    self.coeffs.clear();
                    return self;
                }
                let len = (n - self.start + 1) as usize;
                self.coeffs.resize(len, Rational::zero());
                let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
                self.coeffs.drain(..lead);
                self.start += lead as i64;
            }
        }
        self
    }

    pub fn precision(&self) -> Option<i64> {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.prec.is_none() && self.coeffs.is_empty()
    }

    /// True when no nonzero coefficient is known (exact zero included).
    pub fn is_zero_on_window(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lower bound on the valuation; `None` for the exact zero.
    pub fn valuation_bound(&self) -> Option<i64> {
        (!self.is_exact_zero()).then_some(self.start)
    }

    pub fn order(&self) -> Result<Order> {
        if self.is_exact_zero() {
            Ok(Order::Infinite)
        } else if self.coeffs.is_empty() {
            Err(Error::OrderUndetermined)
        } else {
            Ok(Order::Finite(self.start))
        }
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.first()
    }

    /// Coefficient of `t^k`, or `None` when it lies beyond the window.
    pub fn coeff(&self, k: i64) -> Option<Rational> {
        if self.prec.is_some_and(|n| k > n) {
            return None;
        }
        Some(self.raw(k))
    }

    fn raw(&self, k: i64) -> Rational {
        if k < self.start {
            return Rational::zero();
        }
        self.coeffs
            .get((k - self.start) as usize)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Nonzero `(exponent, coefficient)` pairs inside the window.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.start + i as i64, c))
    }

    /// Highest exponent carrying a stored coefficient.
    fn end(&self) -> i64 {
        self.start + self.coeffs.len() as i64 - 1
    }

    pub fn add(&self, other: &Series) -> Series {
        if self.is_exact_zero() {
            return other.clone();
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        let prec = min_prec(self.prec, other.prec);
        let start = self.start.min(other.start);
        let end = prec.unwrap_or_else(|| self.end().max(other.end()));
        let coeffs = (start..=end).map(|k| self.raw(k) + other.raw(k)).collect();
        Series {
            start,
            coeffs,
            prec,
        }
        .normalized()
    }

    pub fn neg(&self) -> Series {
        Series {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Series {
        if c.is_zero() {
            return Series::zero();
        }
        Series {
            start: self.start,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            prec: self.prec,
        }
    }

    /// Cauchy product; precision is `min(N_a + v_b, N_b + v_a)`.
    pub fn mul(&self, other: &Series) -> Series {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Series::zero();
        }
        let prec = match (self.prec, other.prec) {
            (None, None) => None,
            (Some(na), None) => Some(na + other.start),
            (None, Some(nb)) => Some(nb + self.start),
            (Some(na), Some(nb)) => Some((na + other.start).min(nb + self.start)),
        };
        let start = self.start + other.start;
        let len = match prec {
            Some(n) => (n - start + 1).max(0) as usize,
            None => self.coeffs.len() + other.coeffs.len() - 1,
        };
        let mut coeffs = vec![Rational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        Series {
            start,
            coeffs,
            prec,
        }
        .normalized()
    }

    /// Termwise `d/dt`; the window shrinks by one.
    pub fn derivative(&self) -> Series {
        if self.is_exact_zero() {
            return Series::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * int(self.start + i as i64))
            .collect();
        Series {
            start: self.start - 1,
            coeffs,
            prec: self.prec.map(|n| n - 1),
        }
        .normalized()
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i64) -> Series {
        if self.is_exact_zero() {
            return Series::zero();
        }
        Series {
            start: self.start + k,
            coeffs: self.coeffs.clone(),
            prec: self.prec.map(|n| n + k),
        }
    }

    /// Forget everything above `t^n`.
    pub fn truncate(&self, n: i64) -> Series {
        if self.is_exact_zero() {
            return Series::zero();
        }
        Series {
            start: self.start,
            coeffs: self.coeffs.clone(),
            prec: Some(self.prec.map_or(n, |p| p.min(n))),
        }
        .normalized()
    }

    /// Multiplicative inverse. A finite series `c t^v (1 + O(t))` known
    /// through `t^N` inverts to relative precision `N - v`; an exact
    /// non-monomial inverts to relative precision `rel_if_exact`.
    pub fn inverse(&self, rel_if_exact: i64) -> Result<Series> {
        let c0 = self.leading().ok_or(Error::SingularLeadingMatrix)?.clone();
        let v = self.start;
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(Series::monomial(c0.recip(), -v));
        }
        let rel = match self.prec {
            Some(n) => n - v,
            None => rel_if_exact,
        };
        let inv0 = c0.recip();
        let mut out: Vec<Rational> = Vec::with_capacity(rel as usize + 1);
        out.push(inv0.clone());
        for k in 1..=rel as usize {
            let mut acc = Rational::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &out[k - j];
                }
            }
            out.push(-acc * &inv0);
        }
        Ok(Series::truncated(-v, out, -v + rel))
    }

    /// Coefficientwise equality on the common window.
    pub fn agrees_with(&self, other: &Series) -> bool {
        if self.is_exact() && other.is_exact() {
            return self == other;
        }
        let hi = min_prec(self.prec, other.prec).expect("one side is finite");
        let lo = self.start.min(other.start);
        (lo..=hi).all(|k| self.raw(k) == other.raw(k))
    }

    /// True when every known coefficient away from `t^0` vanishes.
    pub fn is_constant_on_window(&self) -> bool {
        self.terms().all(|(k, _)| k == 0)
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.terms() {
            let body = match k {
                0 => c.to_string(),
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{k}"),
            };
            if first {
                write!(f, "{body}")?;
            } else if let Some(rest) = body.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {body}")?;
            }
            first = false;
        }
        match self.prec {
            Some(n) if first => write!(f, "O(t^{})", n + 1),
            Some(n) => write!(f, " + O(t^{})", n + 1),
            None if first => write!(f, "0"),
            None => Ok(()),
        }
    }
}
