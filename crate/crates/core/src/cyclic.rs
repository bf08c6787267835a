//! Cyclic vectors for `gl_n` connections and the companion-form oper they
//! induce.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gauge::{gauge_transform, Connection, GaugeElement};
use crate::laurent::matrix::{sync_vector, MatrixSeries, DEFAULT_PRECISION};
use crate::laurent::rational::int;
use crate::laurent::series::Series;
use crate::liealg::Kind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicWitness {
    pub phi: Vec<Series>,
    /// Columns `φ, ∇φ, …, ∇^{n-1}φ`.
    pub wronskian_matrix: MatrixSeries,
    pub det_valuation: i64,
    /// Candidates examined, the accepted one included.
    pub candidates_tried: usize,
}

pub fn default_pole_budget(n: usize) -> i64 {
    2 * n as i64
}

/// `∇v = ∂_t v + A v`.
pub fn apply_nabla(a: &Connection, v: &[Series]) -> Vec<Series> {
    let av = a.series().mul_vec(v);
    sync_vector(v.iter().zip(av).map(|(x, y)| x.derivative().add(&y)).collect())
}

fn wronskian(a: &Connection, phi: &[Series]) -> MatrixSeries {
    let n = phi.len();
    let mut cols = Vec::with_capacity(n);
    let mut cur = phi.to_vec();
    for _ in 0..n {
        let next = apply_nabla(a, &cur);
        cols.push(cur);
        cur = next;
    }
    let entries = (0..n * n).map(|idx| cols[idx % n][idx / n].clone()).collect();
    MatrixSeries::from_entries(n, entries)
}

/// Letters `0, c t^m` ordered by height `max(|c|, |m|)`, then `m` in
/// `0, 1, -1, 2, …`, then `c` in `1, -1, 2, …`.
fn alphabet(h: i64) -> Vec<(i64, Series)> {
    let signed = |k: i64| if k % 2 == 1 { (k + 1) / 2 } else { -(k / 2) };
    let mut out = vec![(0, Series::zero())];
    for height in 1..=h {
        let mut layer = Vec::new();
        for mi in 0..=2 * height {
            let m = signed(mi);
            for ci in 1..=2 * height {
                let c = signed(ci);
                if c.abs().max(m.abs()) == height {
                    layer.push((height, Series::monomial(int(c), m)));
                }
            }
        }
        out.extend(layer);
    }
    out
}

enum Verdict {
    Cyclic(MatrixSeries, i64),
    NotCyclic,
    Undetermined,
}

fn test_candidate(a: &Connection, phi: &[Series]) -> Verdict {
    let w = wronskian(a, phi);
    let det = w.det();
    if det.is_exact_zero() {
        Verdict::NotCyclic
    } else if det.is_zero_on_window() {
        Verdict::Undetermined
    } else {
        let v = det.valuation_bound().expect("nonzero");
        Verdict::Cyclic(w, v)
    }
}

/// Advances `idx` to the next tuple over `0..size` in lexicographic order.
fn next_tuple(idx: &mut [usize], size: usize) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < size {
            return true;
        }
        idx[pos] = 0;
    }
    false
}

/// First cyclic vector in the fixed enumeration: standard basis vectors,
/// then for `H = 0, 1, …, pole_budget` every vector over the height-`H`
/// alphabet that uses a letter of height exactly `H`, in lexicographic
/// order, skipping the zero vector and earlier candidates.
pub fn find_cyclic_vector(a: &Connection, pole_budget: i64) -> Result<CyclicWitness> {
    let ctx = a.ctx();
    if ctx.kind != Kind::Gl {
        return Err(Error::ContextMismatch("cyclic vectors are defined for gl".into()));
    }
    if pole_budget < 0 {
        return Err(Error::SearchExhausted("negative pole budget".into()));
    }
    let n = ctx.n;
    let mut tried = 0usize;
    let mut undetermined = false;
    let check = |phi: Vec<Series>, tried: &mut usize, undetermined: &mut bool| {
        *tried += 1;
        match test_candidate(a, &phi) {
            Verdict::Cyclic(w, v) => Some(CyclicWitness {
                phi,
                wronskian_matrix: w,
                det_valuation: v,
                candidates_tried: *tried,
            }),
            Verdict::NotCyclic => None,
            Verdict::Undetermined => {
                *undetermined = true;
                None
            }
        }
    };
    let unit = |i: usize| -> Vec<Series> {
        (0..n)
            .map(|j| if i == j { Series::one() } else { Series::zero() })
            .collect()
    };
    for i in 0..n {
        if let Some(w) = check(unit(i), &mut tried, &mut undetermined) {
            return Ok(w);
        }
    }
    let letters = alphabet(pole_budget);
    let size_at = |h: i64| letters.iter().filter(|(ht, _)| *ht <= h).count();
    for h in 0..=pole_budget {
        let size = size_at(h);
        let prev = if h == 0 { 0 } else { size_at(h - 1) };
        let mut idx = vec![0usize; n];
        loop {
            let fresh = idx.iter().any(|&i| i >= prev);
            let nonzero_count = idx.iter().filter(|&&i| i != 0).count();
            let is_unit = nonzero_count == 1
                && idx.iter().all(|&i| i == 0 || letters[i].1 == Series::one());
            if fresh && nonzero_count > 0 && !is_unit {
                let phi: Vec<Series> = idx.iter().map(|&i| letters[i].1.clone()).collect();
                if let Some(w) = check(phi, &mut tried, &mut undetermined) {
                    return Ok(w);
                }
            }
            if !next_tuple(&mut idx, size) {
                break;
            }
        }
    }
    if undetermined {
        Err(Error::PrecisionExhausted(
            "some Wronskian determinants vanish on the whole window".into(),
        ))
    } else {
        Err(Error::SearchExhausted(format!(
            "no cyclic vector with pole budget {pole_budget} ({tried} candidates)"
        )))
    }
}

/// `g = W` and `B = Ga_{g^{-1}}(A)`, the companion form of `∇` in the basis
/// `φ, ∇φ, …`.
pub fn oper_from_cyclic(a: &Connection, w: &CyclicWitness) -> Result<(GaugeElement, Connection)> {
    let rel = match a.precision() {
        Some(p) => p - a.series().valuation_bound().unwrap_or(0) + 2,
        None => DEFAULT_PRECISION,
    };
    let g = GaugeElement::with_inverse_precision(a.ctx().clone(), w.wronskian_matrix.clone(), rel)
        .map_err(|e| match e {
            Error::NotInGroup(_) => Error::SingularLeadingMatrix,
            other => other,
        })?;
    let b = gauge_transform(&g.inverse()?, a)?;
    Ok((g, b))
}

/// Checks the witness invariants directly.
pub fn verify_witness(a: &Connection, w: &CyclicWitness) -> bool {
    let recomputed = wronskian(a, &w.phi);
    let det = recomputed.det();
    recomputed == w.wronskian_matrix
        && det.leading().is_some_and(|c| !c.is_zero())
        && det.valuation_bound() == Some(w.det_valuation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::rational::rat;
    use crate::liealg::make_context;
    use crate::linalg::Mat;
    use crate::oper::is_oper_form;

    fn gl(n: usize) -> crate::liealg::Context {
        make_context(n, Kind::Gl).unwrap()
    }

    #[test]
    fn nabla_examples() {
        let c = gl(2);
        let zero = Connection::zero(c.clone());
        let v = vec![Series::one(), Series::monomial(int(1), 1)];
        assert_eq!(apply_nabla(&zero, &v), vec![Series::zero(), Series::one()]);

        let z1 = Connection::zero(gl(1));
        assert_eq!(apply_nabla(&z1, &[Series::constant(int(5))]), vec![Series::zero()]);

        let a = Connection::from_terms(c.clone(), &[(-2, c.f.clone())], None).unwrap();
        assert_eq!(
            apply_nabla(&a, &[Series::one(), Series::zero()]),
            vec![Series::zero(), Series::monomial(int(1), -2)]
        );
    }

    #[test]
    fn rank_one_is_always_cyclic() {
        let c = gl(1);
        let a = Connection::from_terms(c, &[(-3, Mat::from_ints(1, &[4]))], Some(5)).unwrap();
        let w = find_cyclic_vector(&a, 2).unwrap();
        assert_eq!(w.phi, vec![Series::one()]);
        let (_, b) = oper_from_cyclic(&a, &w).unwrap();
        assert!(b.agrees_with(&a));
    }

    #[test]
    fn zero_connection_gl2() {
        let c = gl(2);
        let a = Connection::zero(c.clone());
        let w = find_cyclic_vector(&a, 4).unwrap();
        assert_eq!(w.phi, vec![Series::one(), Series::monomial(int(1), 1)]);
        assert_eq!(
            w.wronskian_matrix,
            MatrixSeries::from_terms(2, &[(0, Mat::identity(2)), (1, Mat::unit(2, 1, 0))], None)
        );
        assert_eq!(w.det_valuation, 0);
        let (_, b) = oper_from_cyclic(&a, &w).unwrap();
        // oracle: B = f
        assert_eq!(b.series(), &MatrixSeries::from_const(&c.f));
        assert!(is_oper_form(&b).unwrap());

        assert!(matches!(find_cyclic_vector(&a, 0), Err(Error::SearchExhausted(_))));
    }

    #[test]
    fn diagonal_pole() {
        let c = gl(2);
        let cc = rat(3, 2);
        let a = Connection::from_terms(c, &[(-1, Mat::diag(&[cc.clone(), int(0)]))], None).unwrap();
        let w = find_cyclic_vector(&a, 4).unwrap();
        assert_eq!(w.phi, vec![Series::one(), Series::one()]);
        // oracle: det = -c/t
        assert_eq!(w.wronskian_matrix.det(), Series::monomial(-cc, -1));
        let (_, b) = oper_from_cyclic(&a, &w).unwrap();
        assert!(is_oper_form(&b).unwrap());
    }

    #[test]
    fn truncated_gl2_connection() {
        let c = gl(2);
        let a = Connection::from_terms(
            c,
            &[
                (-2, Mat::from_ints(2, &[1, 2, 0, -1])),
                (0, Mat::from_ints(2, &[0, 1, 3, 2])),
            ],
            Some(12),
        )
        .unwrap();
        let w = find_cyclic_vector(&a, 4).unwrap();
        assert!(verify_witness(&a, &w));
        let (g, b) = oper_from_cyclic(&a, &w).unwrap();
        assert!(is_oper_form(&b).unwrap());
        let replay = gauge_transform(&g.inverse().unwrap(), &a).unwrap();
        assert!(replay.agrees_with(&b));
    }

    #[test]
    fn alphabet_order() {
        let a = alphabet(1);
        let shown: Vec<String> = a.iter().map(|(_, s)| s.to_string()).collect();
        assert_eq!(shown, ["0", "1", "-1", "1*t", "-1*t", "1*t^-1", "-1*t^-1"]);
    }
}
