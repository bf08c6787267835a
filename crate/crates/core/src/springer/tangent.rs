use crate::error::{Error, Result};
use crate::gauge::{gauge_transform, Connection, GaugeElement};
use crate::laurent::rational::int;
use crate::linalg::Mat;

use super::in_m_a;

/// `(-r) · dim g`, the a priori bound on the tangent dimension.
pub fn default_window_depth(a: &Connection) -> Result<i64> {
    let r = a.finite_order()?;
    Ok((-r) * a.ctx().dim() as i64)
}

/// Dimension of `{X ∈ g(F) : ∂X + [B, X] ∈ t^r g(O)} / g(O)` with
/// `B = Ga_{g^{-1}}(A)`, checked to agree at `window_depth` and
/// `window_depth + 2`.
pub fn tangent_space_dim(a: &Connection, g: &GaugeElement, window_depth: i64) -> Result<usize> {
    let r = a.finite_order()?;
    if !in_m_a(a, g)? {
        return Err(Error::NotMember);
    }
    let b = gauge_transform(&g.inverse()?, a)?;
    let lower = tangent_dim_at_depth(&b, r, window_depth)?;
    let upper = tangent_dim_at_depth(&b, r, window_depth + 2)?;
    if lower != upper {
        return Err(Error::Unstabilized {
            depth: window_depth,
            lower,
            upper,
        });
    }
    Ok(lower)
}

/// Solutions `X = Σ_{k=-D}^{-1} X_k t^k` of the tangent condition; the
/// polar part alone decides it because `g(O)` always satisfies it.
pub fn tangent_dim_at_depth(b: &Connection, r: i64, depth: i64) -> Result<usize> {
    let ctx = b.ctx();
    if depth <= 0 {
        return Ok(0);
    }
    let basis = &ctx.g_basis;
    let dim = basis.len();
    let n = ctx.n;
    let unknowns = depth as usize * dim;
    let Some(vb) = b.series().valuation_bound() else {
        // B = 0: only ∂X matters
        return tangent_dim_of_terms(&[], r, depth, n, basis, unknowns);
    };
    let need = r - 1 + depth;
    if b.precision().is_some_and(|p| p < need) {
        return Err(Error::PrecisionExhausted(format!(
            "tangent system needs B through t^{need}"
        )));
    }
    let terms: Vec<(i64, Mat)> = (vb..=need)
        .map(|j| (j, b.coeff(j).expect("inside window")))
        .filter(|(_, m)| !m.is_zero())
        .collect();
    tangent_dim_of_terms(&terms, r, depth, n, basis, unknowns)
}

fn tangent_dim_of_terms(
    terms: &[(i64, Mat)],
    r: i64,
    depth: i64,
    n: usize,
    basis: &[Mat],
    unknowns: usize,
) -> Result<usize> {
    let vb = terms.first().map_or(r, |(j, _)| *j).min(r);
    let lo = vb - depth;
    let dim = basis.len();
    let mut rows: Vec<Vec<crate::laurent::rational::Rational>> = Vec::new();
    for m in lo..r {
        // coefficient of t^m in ∂X + [B, X]
        let mut block = vec![Mat::zeros(n, n); unknowns];
        for k in -depth..0 {
            let col0 = ((k + depth) as usize) * dim;
            for (bi, bm) in basis.iter().enumerate() {
                let mut acc = Mat::zeros(n, n);
                if k == m + 1 {
                    acc = acc.add(&bm.scale(&int(k)));
                }
                if let Some((_, bj)) = terms.iter().find(|(j, _)| *j == m - k) {
                    acc = acc.add(&bj.bracket(bm));
                }
                block[col0 + bi] = acc;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let row: Vec<_> = block.iter().map(|mat| mat[(i, j)].clone()).collect();
                if row.iter().any(|x| *x != int(0)) {
                    rows.push(row);
                }
            }
        }
    }
    if rows.is_empty() {
        return Ok(unknowns);
    }
    Ok(unknowns - Mat::from_rows(rows).rank())
}
