#![allow(dead_code)]

use operforge::gauge::{Connection, Factor};
use operforge::laurent::rational::{int, rat, Rational};
use operforge::liealg::{AlgebraContext, Kind};
use operforge::linalg::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn small_rat(rng: &mut Rng8) -> Rational {
    rat(rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

/// Random element of the algebra with small rational coordinates; each
/// coordinate is zero with probability `1 - density`.
pub fn random_element(rng: &mut Rng8, ctx: &AlgebraContext, density: f64) -> Mat {
    let coords: Vec<Rational> = (0..ctx.dim())
        .map(|_| {
            if rng.gen_bool(density) {
                small_rat(rng)
            } else {
                int(0)
            }
        })
        .collect();
    ctx.from_coords(&coords)
}

pub fn random_strictly_upper(rng: &mut Rng8, n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| {
        if j > i {
            int(rng.gen_range(-2..=2))
        } else {
            int(0)
        }
    })
}

/// Product of three elementary matrices `I + c E_ij`.
pub fn random_unipotent(rng: &mut Rng8, n: usize) -> Mat {
    let mut m = Mat::identity(n);
    if n < 2 {
        return m;
    }
    for _ in 0..3 {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = int(rng.gen_range(-2..=2));
        m = Mat::identity(n).add(&Mat::unit(n, i, j).scale(&c)).mul(&m);
    }
    m
}

pub fn random_coweight(rng: &mut Rng8, n: usize, kind: Kind) -> Vec<i64> {
    loop {
        let l: Vec<i64> = (0..n).map(|_| rng.gen_range(-1..=1)).collect();
        if kind == Kind::Gl || l.iter().sum::<i64>() == 0 {
            return l;
        }
    }
}

/// `leading t^r + Σ_{k=1}^{len} C_k t^{r+k}`.
pub fn random_connection(
    rng: &mut Rng8,
    ctx: &operforge::liealg::Context,
    r: i64,
    leading: Mat,
    len: i64,
    prec: Option<i64>,
) -> Connection {
    let mut terms = vec![(r, leading)];
    for k in 1..=len {
        if prec.is_some_and(|p| r + k > p) {
            break;
        }
        terms.push((r + k, random_element(rng, ctx, 0.6)));
    }
    Connection::from_terms(ctx.clone(), &terms, prec).expect("random connection is valid")
}

/// Factors of an element of `G(O)`: a unipotent constant and `exp(t^k X)`.
pub fn random_g_o(rng: &mut Rng8, ctx: &AlgebraContext, exact: bool) -> Vec<Factor> {
    let n = ctx.n;
    let mut fs = vec![Factor::Constant(random_unipotent(rng, n))];
    if ctx.kind == Kind::Gl && rng.gen_bool(0.5) {
        let d: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(1..=2))).collect();
        fs.push(Factor::Constant(Mat::diag(&d)));
    }
    for k in 1..=2 {
        if rng.gen_bool(0.6) {
            let x = if exact {
                random_strictly_upper(rng, n)
            } else {
                random_element(rng, ctx, 0.5)
            };
            fs.push(Factor::Exp { k, x });
        }
    }
    fs
}

/// Factors of a general element of `G(F)`: `G(O)` pieces, a coweight and
/// a nilpotent `exp(t^{-1} X)`. Exact when `exact` is set.
pub fn random_g_f(rng: &mut Rng8, ctx: &AlgebraContext, exact: bool) -> Vec<Factor> {
    let n = ctx.n;
    let mut fs = random_g_o(rng, ctx, exact);
    if rng.gen_bool(0.5) {
        fs.push(Factor::Exp {
            k: -1,
            x: random_strictly_upper(rng, n),
        });
    }
    if rng.gen_bool(0.6) {
        fs.push(Factor::Coweight(random_coweight(rng, n, ctx.kind)));
    }
    if rng.gen_bool(0.3) {
        fs.push(Factor::Constant(random_unipotent(rng, n).transpose()));
    }
    fs
}
