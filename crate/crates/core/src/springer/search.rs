use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gauge::{gauge_transform, vanishes_below, Connection, Factor, GaugeElement};
use crate::laurent::rational::{int, Rational};
use crate::laurent::series::Order;
use crate::liealg::{is_nilpotent, is_regular_nilpotent, AlgebraContext, Kind};
use crate::linalg::Mat;

pub const DEFAULT_COWEIGHT_BOUND: i64 = 2;
pub const DEFAULT_DEPTH_BOUND: i64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchStats {
    pub coweight_bound: i64,
    pub depth_bound: i64,
    pub candidates_tried: usize,
}

/// A gauge `γ` with `Ga_γ(A)` of order `>= r` and regular nilpotent
/// `t^r` coefficient; `γ^{-1}` is the regular point of `Y_A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchCertificate {
    pub gauge: GaugeElement,
    pub transformed: Connection,
    pub leading: Mat,
    pub r: i64,
    pub stats: SearchStats,
}

impl SearchCertificate {
    fn build(a: &Connection, gauge: GaugeElement, r: i64, stats: SearchStats) -> Result<Self> {
        let transformed = gauge_transform(&gauge, a)?;
        let leading = transformed
            .coeff(r)
            .ok_or_else(|| Error::PrecisionExhausted("t^r is beyond the window".into()))?;
        let cert = SearchCertificate {
            gauge,
            transformed,
            leading,
            r,
            stats,
        };
        if !cert.verify(a)? {
            return Err(Error::Invariant("search certificate failed its own check".into()));
        }
        Ok(cert)
    }

    /// Replays the gauge action and re-checks order and regularity.
    pub fn verify(&self, a: &Connection) -> Result<bool> {
        let replay = gauge_transform(&self.gauge, a)?;
        Ok(replay.agrees_with(&self.transformed)
            && vanishes_below(replay.series(), self.r)?
            && replay.coeff(self.r).as_ref() == Some(&self.leading)
            && is_regular_nilpotent(&self.leading))
    }
}

/// Coweights of height `max |λ_i| = h`, entries summing to zero for `sl`,
/// in lexicographic order.
pub fn coweights(n: usize, kind: Kind, h: i64) -> Vec<Vec<i64>> {
    let width = (2 * h + 1) as usize;
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let l: Vec<i64> = idx.iter().map(|&i| i as i64 - h).collect();
        let height = l.iter().map(|x| x.abs()).max().unwrap_or(0);
        if height == h && (kind == Kind::Gl || l.iter().sum::<i64>() == 0) {
            out.push(l);
        }
        let mut pos = n;
        let mut done = true;
        while pos > 0 {
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < width {
                done = false;
                break;
            }
            idx[pos] = 0;
        }
        if done {
            break;
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Constant factors tried first: identity, `I ± E_ij`, then signed
/// permutation matrices of determinant one.
pub fn weyl_and_elementary(ctx: &AlgebraContext) -> Vec<Mat> {
    let n = ctx.n;
    let mut out = vec![Mat::identity(n)];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                for s in [1, -1] {
                    out.push(Mat::identity(n).add(&Mat::unit(n, i, j).scale(&int(s))));
                }
            }
        }
    }
    for p in permutations(n) {
        if p.iter().enumerate().all(|(i, &j)| i == j) {
            continue;
        }
        let mut m = Mat::from_fn(n, n, |i, j| {
            if p[j] == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        });
        if m.det() != Rational::one() {
            for i in 0..n {
                let v = -m[(i, 0)].clone();
                m[(i, 0)] = v;
            }
        }
        out.push(m);
    }
    out
}

/// Strictly upper triangular matrices with entries in `{0, 1, -1}`, in
/// lexicographic order of the entry sequence `0 < 1 < -1`.
fn upper_alphabet(n: usize) -> Vec<Mat> {
    let slots: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let total = 3usize.pow(slots.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut digits = vec![0usize; slots.len()];
            for d in digits.iter_mut().rev() {
                *d = code % 3;
                code /= 3;
            }
            let mut m = Mat::zeros(n, n);
            for (&(i, j), &d) in slots.iter().zip(&digits) {
                m[(i, j)] = match d {
                    0 => Rational::zero(),
                    1 => Rational::one(),
                    _ => -Rational::one(),
                };
            }
            m
        })
        .collect()
}

/// Searches `γ = t^λ · exp(t^{-1} X_1) ⋯ exp(t^{-d} X_d) · g_0` in the order
/// (coweight height, depth, `g_0`, `λ`, `X` tuple) for a certificate. The
/// zero connection is handled by `γ = exp(f t^{-1})` at `r = -2`.
pub fn regularization_search(
    a: &Connection,
    coweight_bound: i64,
    depth_bound: i64,
) -> Result<SearchCertificate> {
    let ctx = a.ctx().clone();
    let n = ctx.n;
    let mut stats = SearchStats {
        coweight_bound,
        depth_bound,
        candidates_tried: 0,
    };
    let r = match a.order()? {
        Order::Infinite => {
            let r = -2;
            stats.candidates_tried = 1;
            let x = ctx.f.scale(&int(-r - 1).recip());
            let gauge = GaugeElement::from_factors(ctx, vec![Factor::Exp { k: r + 1, x }], 0)?;
            return SearchCertificate::build(a, gauge, r, stats);
        }
        Order::Finite(r) if r > -2 => return Err(Error::InvalidOrder(r)),
        Order::Finite(r) => r,
    };
    let ar = a.coeff(r).expect("order is inside window");
    if !is_nilpotent(&ar) {
        return Err(Error::NotNilpotent);
    }
    let g0s = weyl_and_elementary(&ctx);
    let letters = upper_alphabet(n);
    for height in 0..=coweight_bound.max(0) {
        let lambdas = coweights(n, ctx.kind, height);
        for depth in 0..=depth_bound.max(0) as usize {
            for g0 in &g0s {
                for lambda in &lambdas {
                    let mut idx = vec![0usize; depth];
                    loop {
                        // the deepest factor must be nontrivial, so each
                        // depth only adds new candidates
                        if depth == 0 || idx[depth - 1] != 0 {
                            stats.candidates_tried += 1;
                            let mut factors = vec![Factor::Constant(g0.clone())];
                            for k in (1..=depth).rev() {
                                if idx[k - 1] != 0 {
                                    factors.push(Factor::Exp {
                                        k: -(k as i64),
                                        x: letters[idx[k - 1]].clone(),
                                    });
                                }
                            }
                            if lambda.iter().any(|&l| l != 0) {
                                factors.push(Factor::Coweight(lambda.clone()));
                            }
                            let gauge = GaugeElement::from_factors(ctx.clone(), factors, 0)?;
                            if accepts(a, &gauge, r)? {
                                return SearchCertificate::build(a, gauge, r, stats);
                            }
                        }
                        if !advance(&mut idx, letters.len()) {
                            break;
                        }
                    }
                }
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no regular point within coweight bound {coweight_bound} and depth bound {depth_bound} ({} candidates)",
        stats.candidates_tried
    )))
}

fn advance(idx: &mut [usize], size: usize) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < size {
            return true;
        }
        idx[pos] = 0;
    }
    false
}

fn accepts(a: &Connection, gauge: &GaugeElement, r: i64) -> Result<bool> {
    let b = gauge_transform(gauge, a)?;
    match vanishes_below(b.series(), r) {
        Ok(true) => {}
        Ok(false) | Err(Error::OrderUndetermined) => return Ok(false),
        Err(e) => return Err(e),
    }
    Ok(b.coeff(r).is_some_and(|m| is_regular_nilpotent(&m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::matrix::MatrixSeries;
    use crate::liealg::{make_context, Context};

    fn sl(n: usize) -> Context {
        make_context(n, Kind::Sl).unwrap()
    }

    #[test]
    fn zero_connection_sl2() {
        let c = sl(2);
        let cert = regularization_search(&Connection::zero(c.clone()), 2, 2).unwrap();
        // Id + f t^-1
        let expected = MatrixSeries::from_terms(
            2,
            &[(-1, c.f.clone()), (0, Mat::identity(2))],
            None,
        );
        assert_eq!(cert.gauge.matrix(), &expected);
        assert_eq!(cert.transformed.series(), &MatrixSeries::monomial(&c.f, -2));
        assert_eq!(cert.leading, c.f);
    }

    #[test]
    fn regular_leading_term_needs_nothing() {
        let c = sl(2);
        let a = Connection::from_terms(c.clone(), &[(-2, c.e.clone())], None).unwrap();
        let cert = regularization_search(&a, 2, 2).unwrap();
        assert_eq!(cert.gauge.matrix(), &MatrixSeries::identity(2));
        assert_eq!(cert.stats.candidates_tried, 1);
    }

    #[test]
    fn curated_sl3_cases() {
        let c = sl(3);
        let e13 = Mat::unit(3, 0, 2);
        let e23 = Mat::unit(3, 1, 2);
        for m in [e13.clone(), e13.add(&e23)] {
            let a = Connection::from_terms(c.clone(), &[(-2, m)], None).unwrap();
            let cert = regularization_search(&a, 2, 2).unwrap();
            assert!(cert.verify(&a).unwrap());
            assert!(is_regular_nilpotent(&cert.leading));
        }
        let z = regularization_search(&Connection::zero(c.clone()), 2, 2).unwrap();
        assert_eq!(z.leading, c.f);
    }

    #[test]
    fn preconditions() {
        let c = sl(2);
        let a = Connection::from_terms(c.clone(), &[(-1, c.e.clone())], None).unwrap();
        assert_eq!(regularization_search(&a, 2, 2), Err(Error::InvalidOrder(-1)));
        let b = Connection::from_terms(c.clone(), &[(-2, c.two_rho_check.clone())], None).unwrap();
        assert_eq!(regularization_search(&b, 2, 2), Err(Error::NotNilpotent));
    }

    #[test]
    fn zero_bounds_exhaust() {
        let c = sl(3);
        let a = Connection::from_terms(c, &[(-2, Mat::unit(3, 0, 2))], None).unwrap();
        assert!(matches!(
            regularization_search(&a, 0, 0),
            Err(Error::SearchExhausted(_))
        ));
    }

    #[test]
    fn enumeration_shapes() {
        assert_eq!(coweights(2, Kind::Sl, 1), vec![vec![-1, 1], vec![1, -1]]);
        assert_eq!(coweights(3, Kind::Sl, 0), vec![vec![0, 0, 0]]);
        let g0 = weyl_and_elementary(&sl(3));
        assert_eq!(g0.len(), 1 + 12 + 5);
        assert!(g0.iter().all(|m| m.det() == int(1)));
        assert_eq!(upper_alphabet(3).len(), 27);
    }
}
