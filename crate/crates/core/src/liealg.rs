//! Structure data for `sl_n` and `gl_n`: the principal triple, the
//! centralizer `g^e`, regularity tests and the Kostant slice.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::rational::{int, nth_root, Rational};
use crate::linalg::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Sl,
    Gl,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Sl => "sl",
            Kind::Gl => "gl",
        })
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sl" => Ok(Kind::Sl),
            "gl" => Ok(Kind::Gl),
            other => Err(format!("unknown algebra kind {other:?}, expected \"sl\" or \"gl\"")),
        }
    }
}

/// Splitting `g = g^e ⊕ ad f(im ad e)` as a precomputed linear solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdfDecomposition {
    /// Basis of `im(ad e)`.
    pub im_ad_e: Vec<Mat>,
    /// Inverse of the square system `(x, p) ↦ [X(x), f] - P(p)` in
    /// coordinates; unknowns are `im_ad_e` coefficients then `ge_basis` ones.
    solver: Mat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraContext {
    pub n: usize,
    pub kind: Kind,
    pub simple_negatives: Vec<Mat>,
    pub f: Mat,
    pub e: Mat,
    pub two_rho_check: Mat,
    pub ge_basis: Vec<Mat>,
    /// Coordinate basis of `g`: `E_ij` (`i != j`) then the diagonal part.
    pub g_basis: Vec<Mat>,
    pub adf: AdfDecomposition,
}

pub type Context = Arc<AlgebraContext>;

/// Builds and self-checks the context for `(n, kind)`.
pub fn make_context(n: usize, kind: Kind) -> Result<Context> {
    if n == 0 {
        return Err(Error::Invariant("matrix size must be positive".into()));
    }
    let simple_negatives: Vec<Mat> = (0..n - 1).map(|i| Mat::unit(n, i + 1, i)).collect();
    let f = simple_negatives
        .iter()
        .fold(Mat::zeros(n, n), |acc, m| acc.add(m));
    let e = Mat::from_fn(n, n, |i, j| {
        if j == i + 1 {
            int(((i + 1) * (n - i - 1)) as i64)
        } else {
            Rational::zero()
        }
    });
    let two_rho_check = Mat::diag(
        &(0..n)
            .map(|i| int(n as i64 - 1 - 2 * i as i64))
            .collect::<Vec<_>>(),
    );
    let g_basis = g_basis(n, kind);

    let mut ge_basis: Vec<Mat> = Vec::new();
    if kind == Kind::Gl {
        ge_basis.push(Mat::identity(n));
    }
    for k in 1..n {
        ge_basis.push(e.pow(k as u32));
    }

    let mut ctx = AlgebraContext {
        n,
        kind,
        simple_negatives,
        f,
        e,
        two_rho_check,
        ge_basis,
        g_basis,
        adf: AdfDecomposition {
            im_ad_e: Vec::new(),
            solver: Mat::zeros(0, 0),
        },
    };

    // ker(ad e) solved exactly must match span{e^k} (plus Id for gl)
    let ad_e = ctx.ad_matrix(&ctx.e);
    let kernel = ad_e.nullspace();
    if kernel.len() != ctx.ge_basis.len() {
        return Err(Error::Invariant(format!(
            "dim ker(ad e) = {}, expected {}",
            kernel.len(),
            ctx.ge_basis.len()
        )));
    }
    let closed = Mat::from_columns(
        &ctx.ge_basis
            .iter()
            .map(|b| ctx.coords(b))
            .collect::<Vec<_>>(),
    );
    if closed.rank() != kernel.len() || !ctx.ge_basis.iter().all(|b| ctx.e.bracket(b).is_zero()) {
        return Err(Error::Invariant("closed-form g^e basis disagrees with ker(ad e)".into()));
    }

    let im_ad_e = column_space(&ctx, &ad_e);
    let dim = ctx.dim();
    let mut columns: Vec<Vec<Rational>> = im_ad_e
        .iter()
        .map(|x| ctx.coords(&x.bracket(&ctx.f)))
        .collect();
    columns.extend(ctx.ge_basis.iter().map(|b| {
        ctx.coords(b).into_iter().map(|c| -c).collect::<Vec<_>>()
    }));
    let system = Mat::from_columns(&columns);
    if system.rows() != dim || system.cols() != dim {
        return Err(Error::Invariant("ad f decomposition is not square".into()));
    }
    let solver = system
        .inverse()
        .ok_or_else(|| Error::Invariant("g is not g^e + [im ad e, f]".into()))?;
    ctx.adf = AdfDecomposition { im_ad_e, solver };
    Ok(Arc::new(ctx))
}

fn g_basis(n: usize, kind: Kind) -> Vec<Mat> {
    let mut basis = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                basis.push(Mat::unit(n, i, j));
            }
        }
    }
    match kind {
        Kind::Gl => basis.extend((0..n).map(|i| Mat::unit(n, i, i))),
        Kind::Sl => basis.extend((0..n - 1).map(|i| Mat::unit(n, i, i).sub(&Mat::unit(n, i + 1, i + 1)))),
    }
    basis
}

fn column_space(ctx: &AlgebraContext, m: &Mat) -> Vec<Mat> {
    let (_, pivots) = m.rref();
    pivots
        .into_iter()
        .map(|c| ctx.from_coords(&m.column(c)))
        .collect()
}

impl AlgebraContext {
    pub fn dim(&self) -> usize {
        self.g_basis.len()
    }

    pub fn rank(&self) -> usize {
        self.ge_basis.len()
    }

    /// Coordinates of `m` in `g_basis`. For `sl` the trace is ignored, so
    /// callers must check membership first.
    pub fn coords(&self, m: &Mat) -> Vec<Rational> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.push(m[(i, j)].clone());
                }
            }
        }
        match self.kind {
            Kind::Gl => out.extend((0..n).map(|i| m[(i, i)].clone())),
            Kind::Sl => {
                let mut acc = Rational::zero();
                for i in 0..n - 1 {
                    acc += &m[(i, i)];
                    out.push(acc.clone());
                }
            }
        }
        out
    }

    pub fn from_coords(&self, c: &[Rational]) -> Mat {
        self.g_basis
            .iter()
            .zip(c)
            .filter(|(_, x)| !x.is_zero())
            .fold(Mat::zeros(self.n, self.n), |acc, (b, x)| acc.add(&b.scale(x)))
    }

    pub fn contains(&self, m: &Mat) -> bool {
        m.rows() == self.n
            && m.cols() == self.n
            && (self.kind == Kind::Gl || m.trace().is_zero())
    }

    pub fn check_in_algebra(&self, m: &Mat) -> Result<()> {
        if m.rows() != self.n || m.cols() != self.n {
            return Err(Error::NotInAlgebra(format!(
                "expected {0}x{0} matrix, got {1}x{2}",
                self.n,
                m.rows(),
                m.cols()
            )));
        }
        if !self.contains(m) {
            return Err(Error::NotInAlgebra(format!("trace {} is nonzero", m.trace())));
        }
        Ok(())
    }

    /// Matrix of `ad m` in `g_basis` coordinates.
    pub fn ad_matrix(&self, m: &Mat) -> Mat {
        let cols: Vec<Vec<Rational>> = self
            .g_basis
            .iter()
            .map(|b| self.coords(&m.bracket(b)))
            .collect();
        Mat::from_columns(&cols)
    }

    /// Coordinates of `m` in `ge_basis`, or `None` when `m ∉ g^e`.
    pub fn ge_coords(&self, m: &Mat) -> Option<Vec<Rational>> {
        if !self.contains(m) {
            return None;
        }
        let basis = Mat::from_columns(
            &self.ge_basis.iter().map(|b| self.coords(b)).collect::<Vec<_>>(),
        );
        basis.solve(&self.coords(m))
    }

    pub fn in_ge(&self, m: &Mat) -> bool {
        self.contains(m) && self.e.bracket(m).is_zero()
    }

    fn solve_adf_coords(&self, y: &[Rational]) -> (Mat, Mat) {
        let rhs: Vec<Rational> = y.iter().map(|c| -c).collect();
        let sol = self.adf.solver.mul_vec(&rhs);
        let m = self.adf.im_ad_e.len();
        let x = self
            .adf
            .im_ad_e
            .iter()
            .zip(&sol[..m])
            .fold(Mat::zeros(self.n, self.n), |acc, (b, c)| acc.add(&b.scale(c)));
        let p = self
            .ge_basis
            .iter()
            .zip(&sol[m..])
            .fold(Mat::zeros(self.n, self.n), |acc, (b, c)| acc.add(&b.scale(c)));
        (x, p)
    }

    /// `X ∈ im(ad e)` with `Y + [X, f] ∈ g^e`.
    pub fn section_x(&self, y: &Mat) -> Result<Mat> {
        self.solve_ad_f(y).map(|(x, _)| x)
    }

    /// The `g^e` component of `Y` along `[im ad e, f]`.
    pub fn projection_to_ge(&self, y: &Mat) -> Result<Mat> {
        self.solve_ad_f(y).map(|(_, p)| p)
    }

    /// Returns `(X, P)` with `Y + [X, f] = P`, `P ∈ g^e`, `X ∈ im(ad e)`.
    pub fn solve_ad_f(&self, y: &Mat) -> Result<(Mat, Mat)> {
        self.check_in_algebra(y)?;
        Ok(self.solve_adf_coords(&self.coords(y)))
    }
}

pub fn is_nilpotent(m: &Mat) -> bool {
    m.pow(m.rows() as u32).is_zero()
}

/// Minimal polynomial equals characteristic polynomial.
pub fn is_regular(m: &Mat) -> bool {
    let n = m.rows();
    let mut powers = Vec::with_capacity(n);
    let mut p = Mat::identity(n);
    for _ in 0..n {
        powers.push(p.to_vec());
        p = p.mul(m);
    }
    Mat::from_columns(&powers).rank() == n
}

pub fn is_regular_nilpotent(m: &Mat) -> bool {
    let n = m.rows();
    is_nilpotent(m) && m.pow(n as u32 - 1).rank() == 1
}

/// Unique point of `f + g^e` with the characteristic polynomial of `m`.
pub fn kostant_normal_form(ctx: &AlgebraContext, m: &Mat) -> Result<Mat> {
    ctx.check_in_algebra(m)?;
    if !is_regular(m) {
        return Err(Error::NotRegular);
    }
    let target = m.char_poly();
    let n = ctx.n;
    let mut coeffs = vec![Rational::zero(); ctx.rank()];
    let slice = |c: &[Rational]| {
        ctx.ge_basis
            .iter()
            .zip(c)
            .fold(ctx.f.clone(), |acc, (b, x)| acc.add(&b.scale(x)))
    };
    // ge_basis[j] has weight matching char-poly coefficient `first + j`;
    // each coefficient is affine in its own parameter once lower ones are fixed.
    let first = if ctx.kind == Kind::Gl { 1 } else { 2 };
    for (j, k) in (first..=n).enumerate() {
        coeffs[j] = Rational::zero();
        let at0 = slice(&coeffs).char_poly()[k].clone();
        coeffs[j] = Rational::one();
        let at1 = slice(&coeffs).char_poly()[k].clone();
        let slope = at1 - &at0;
        if slope.is_zero() {
            return Err(Error::Invariant(format!("slice coefficient {k} is not affine")));
        }
        coeffs[j] = (&target[k] - at0) / slope;
    }
    let out = slice(&coeffs);
    if out.char_poly() != target {
        return Err(Error::Invariant("slice point has the wrong characteristic polynomial".into()));
    }
    Ok(out)
}

/// `[v, Mv, …, M^{n-1} v]` as columns.
pub fn krylov(m: &Mat, v: &[Rational]) -> Mat {
    let mut cols = Vec::with_capacity(m.rows());
    let mut cur = v.to_vec();
    for _ in 0..m.rows() {
        let next = m.mul_vec(&cur);
        cols.push(cur);
        cur = next;
    }
    Mat::from_columns(&cols)
}

/// First cyclic vector of `m`: standard basis vectors, then integer vectors
/// with entries in `[-H, H]` for growing `H`, lexicographically.
pub fn cyclic_vector(m: &Mat) -> Option<Vec<Rational>> {
    let n = m.rows();
    for i in 0..n {
        let mut v = vec![Rational::zero(); n];
        v[i] = Rational::one();
        if krylov(m, &v).rank() == n {
            return Some(v);
        }
    }
    if !is_regular(m) {
        return None;
    }
    for h in 1..=64i64 {
        let width = (2 * h + 1) as usize;
        let total = width.pow(n as u32);
        for idx in 0..total {
            let mut rest = idx;
            let mut raw = Vec::with_capacity(n);
            for _ in 0..n {
                raw.push((rest % width) as i64 - h);
                rest /= width;
            }
            raw.reverse();
            if raw.iter().all(|x| x.abs() < h) {
                continue;
            }
            let v: Vec<Rational> = raw.into_iter().map(int).collect();
            if krylov(m, &v).rank() == n {
                return Some(v);
            }
        }
    }
    None
}

/// Rescales `h` to determinant one when the needed root is rational.
fn normalize_det(ctx: &AlgebraContext, h: Mat) -> Mat {
    if ctx.kind != Kind::Sl {
        return h;
    }
    match nth_root(&h.det().recip(), ctx.n as u32) {
        Some(s) => h.scale(&s),
        None => h,
    }
}

/// `h` with `h M h^{-1} = f`, from the Krylov basis of the first standard
/// vector that is cyclic for `M`.
pub fn conjugate_regular_nilpotent_to_f(ctx: &AlgebraContext, m: &Mat) -> Result<Mat> {
    ctx.check_in_algebra(m)?;
    if !is_regular_nilpotent(m) {
        return Err(Error::NotRegularNilpotent);
    }
    let n = ctx.n;
    let v = (0..n)
        .map(|i| {
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::one();
            v
        })
        .find(|v| krylov(m, v).rank() == n)
        .ok_or(Error::NotRegularNilpotent)?;
    let k = krylov(m, &v);
    let h = normalize_det(ctx, k.inverse().ok_or(Error::NotRegularNilpotent)?);
    let check = h.mul(m).mul(&h.inverse().expect("invertible"));
    if check != ctx.f {
        return Err(Error::Invariant("conjugator does not carry M to f".into()));
    }
    Ok(h)
}

/// `(S, h)` with `S` the Kostant normal form of `M` and `h M h^{-1} = S`.
pub fn conjugate_regular_to_slice(ctx: &AlgebraContext, m: &Mat) -> Result<(Mat, Mat)> {
    let s = kostant_normal_form(ctx, m)?;
    if &s == m {
        return Ok((s, Mat::identity(ctx.n)));
    }
    let vm = cyclic_vector(m).ok_or(Error::NotRegular)?;
    let vs = cyclic_vector(&s).ok_or(Error::NotRegular)?;
    let km = krylov(m, &vm);
    let ks = krylov(&s, &vs);
    let h = normalize_det(ctx, ks.mul(&km.inverse().ok_or(Error::NotRegular)?));
    let check = h.mul(m).mul(&h.inverse().expect("invertible"));
    if check != s {
        return Err(Error::Invariant("conjugator does not carry M to its slice point".into()));
    }
    Ok((s, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::rational::rat;
    use proptest::prelude::*;

    fn sl(n: usize) -> Context {
        make_context(n, Kind::Sl).unwrap()
    }

    #[test]
    fn sl2_context() {
        let c = sl(2);
        assert_eq!(c.e, Mat::from_ints(2, &[0, 1, 0, 0]));
        assert_eq!(c.f, Mat::from_ints(2, &[0, 0, 1, 0]));
        assert_eq!(c.two_rho_check, Mat::from_ints(2, &[1, 0, 0, -1]));
        assert_eq!(c.ge_basis, vec![c.e.clone()]);
    }

    #[test]
    fn gl1_context_is_abelian() {
        let c = make_context(1, Kind::Gl).unwrap();
        assert!(c.f.is_zero() && c.e.is_zero());
        assert_eq!(c.ge_basis, vec![Mat::identity(1)]);
    }

    #[test]
    fn sl3_context() {
        let c = sl(3);
        assert_eq!(c.e, Mat::from_ints(3, &[0, 2, 0, 0, 0, 2, 0, 0, 0]));
        assert_eq!(c.two_rho_check, Mat::from_ints(3, &[2, 0, 0, 0, 0, 0, 0, 0, -2]));
        assert_eq!(c.ge_basis.len(), 2);
    }

    #[test]
    fn triple_relations_up_to_eight() {
        for n in 1..=8 {
            for kind in [Kind::Sl, Kind::Gl] {
                let c = make_context(n, kind).unwrap();
                assert_eq!(c.e.bracket(&c.f), c.two_rho_check);
                assert_eq!(c.two_rho_check.bracket(&c.e), c.e.scale(&int(2)));
                assert_eq!(c.two_rho_check.bracket(&c.f), c.f.scale(&int(-2)));
                let expected = if kind == Kind::Sl { n - 1 } else { n };
                assert_eq!(c.rank(), expected);
                assert_eq!(c.ad_matrix(&c.e).nullspace().len(), expected);
            }
        }
    }

    #[test]
    fn coords_roundtrip() {
        let c = sl(3);
        let m = Mat::from_ints(3, &[1, 2, 3, 4, 5, 6, 7, 8, -6]);
        assert_eq!(c.from_coords(&c.coords(&m)), m);
    }

    #[test]
    fn solve_ad_f_examples() {
        let c = sl(2);
        let h = Mat::from_ints(2, &[1, 0, 0, -1]);
        let (x, p) = c.solve_ad_f(&h).unwrap();
        assert_eq!(x, c.e.neg());
        assert!(p.is_zero());

        let (x, p) = c.solve_ad_f(&c.e).unwrap();
        assert!(x.is_zero());
        assert_eq!(p, c.e);

        // oracle: f + [h/2, f] = 0
        let (x, p) = c.solve_ad_f(&c.f).unwrap();
        assert_eq!(x, h.scale(&rat(1, 2)));
        assert!(p.is_zero());

        assert!(matches!(
            c.solve_ad_f(&Mat::identity(2)),
            Err(Error::NotInAlgebra(_))
        ));
    }

    #[test]
    fn nilpotency_predicates() {
        let c = sl(2);
        assert!(is_nilpotent(&c.f) && is_regular(&c.f) && is_regular_nilpotent(&c.f));
        let z = Mat::zeros(3, 3);
        assert!(is_nilpotent(&z) && !is_regular(&z));
        let e13 = Mat::unit(3, 0, 2);
        assert!(is_nilpotent(&e13) && !is_regular(&e13) && !is_regular_nilpotent(&e13));
    }

    #[test]
    fn kostant_examples() {
        let c = sl(2);
        let h = Mat::from_ints(2, &[1, 0, 0, -1]);
        assert_eq!(kostant_normal_form(&c, &h).unwrap(), Mat::from_ints(2, &[0, 1, 1, 0]));
        assert_eq!(kostant_normal_form(&c, &c.f).unwrap(), c.f);

        // oracle: f + e/4 has char poly λ^3 - λ
        let c3 = sl(3);
        let d = Mat::diag(&[int(1), int(0), int(-1)]);
        let s = kostant_normal_form(&c3, &d).unwrap();
        assert_eq!(s, c3.f.add(&c3.e.scale(&rat(1, 4))));
        assert_eq!(s.char_poly(), vec![int(1), int(0), int(-1), int(0)]);

        assert_eq!(kostant_normal_form(&c3, &Mat::zeros(3, 3)), Err(Error::NotRegular));
    }

    #[test]
    fn conjugation_to_f() {
        let c = sl(2);
        assert_eq!(conjugate_regular_nilpotent_to_f(&c, &c.f).unwrap(), Mat::identity(2));
        let h = conjugate_regular_nilpotent_to_f(&c, &c.e).unwrap();
        assert_eq!(h.mul(&c.e).mul(&h.inverse().unwrap()), c.f);
        // det -1 has no rational square root, so it is kept
        assert_eq!(h.det(), int(-1));

        let c3 = sl(3);
        // f conjugated by I + E12 stays regular nilpotent
        let u = Mat::identity(3).add(&Mat::unit(3, 0, 1));
        let m = u.mul(&c3.f).mul(&u.inverse().unwrap());
        let h = conjugate_regular_nilpotent_to_f(&c3, &m).unwrap();
        assert_eq!(h.mul(&m).mul(&h.inverse().unwrap()), c3.f);
        assert_eq!(
            conjugate_regular_nilpotent_to_f(&c3, &Mat::unit(3, 0, 2)),
            Err(Error::NotRegularNilpotent)
        );
    }

    fn sl_mat(n: usize) -> impl Strategy<Value = Mat> {
        proptest::collection::vec(-3i64..=3, n * n).prop_map(move |mut v| {
            let tr: i64 = (0..n - 1).map(|i| v[i * n + i]).sum();
            v[n * n - 1] = -tr;
            Mat::from_ints(n, &v)
        })
    }

    proptest! {
        #[test]
        fn decomposition_is_sound(n in 2usize..=4, seed in any::<u64>()) {
            let c = sl(n);
            let mut s = seed;
            let mut vals = Vec::new();
            for _ in 0..n * n {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                vals.push(((s >> 33) % 7) as i64 - 3);
            }
            let tr: i64 = (0..n - 1).map(|i| vals[i * n + i]).sum();
            vals[n * n - 1] = -tr;
            let y = Mat::from_ints(n, &vals);
            let (x, p) = c.solve_ad_f(&y).unwrap();
            prop_assert!(y.add(&x.bracket(&c.f)).sub(&p).is_zero());
            prop_assert!(c.e.bracket(&p).is_zero());
        }

        #[test]
        fn slice_preserves_char_poly(m in sl_mat(3)) {
            let c = sl(3);
            match kostant_normal_form(&c, &m) {
                Ok(s) => {
                    prop_assert_eq!(s.char_poly(), m.char_poly());
                    prop_assert!(is_regular(&s));
                    let (s2, h) = conjugate_regular_to_slice(&c, &m).unwrap();
                    prop_assert_eq!(&s2, &s);
                    prop_assert_eq!(h.mul(&m), s.mul(&h));
                }
                Err(err) => {
                    prop_assert_eq!(err, Error::NotRegular);
                    prop_assert!(!is_regular(&m));
                }
            }
        }
    }
}
