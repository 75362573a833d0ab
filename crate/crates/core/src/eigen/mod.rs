//! Dense eigensolvers at arbitrary precision: cyclic Jacobi for real
//! symmetric matrices, shifted Hessenberg QR for complex ones, inverse
//! iteration for complex eigenvectors, and a shift-invert partial solver for
//! the lowest few levels.

mod inverse;
mod jacobi;
mod partial;
mod qr;

use std::cmp::Ordering;

use rug::{Assign, Complex, Float};

use crate::error::{Error, Result, Warning};
use crate::numeric::{BigComplex, BigReal, PrecisionContext};

pub use inverse::inverse_iteration;
pub use jacobi::jacobi_eigen;
pub use partial::partial_eigen;
pub use qr::qr_eigen_complex;

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type RealMatrix = Matrix<BigReal>;
pub type ComplexMatrix = Matrix<BigComplex>;

impl<T> Matrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    /// Builds from row-major entries; panics unless `data.len() == n * n`.
    pub fn from_vec(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data has the wrong length");
        Matrix { n, data }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }
}

impl<T: PartialEq> Matrix<T> {
    /// Exact `A = Aᵀ` (no conjugation).
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

impl RealMatrix {
    pub fn frobenius(&self) -> BigReal {
        let bits = self.data.first().map_or(64, Float::prec);
        let mut acc = Float::new(bits);
        for x in &self.data {
            acc += Float::with_val(bits, x.square_ref());
        }
        acc.sqrt()
    }

    pub fn mul_vec(&self, v: &[BigReal]) -> Vec<BigReal> {
        let bits = v.first().map_or(64, Float::prec);
        let mut tmp = Float::new(bits);
        (0..self.n)
            .map(|i| {
                let mut acc = Float::new(bits);
                for (a, x) in self.data[i * self.n..(i + 1) * self.n].iter().zip(v) {
                    tmp.assign(a * x);
                    acc += &tmp;
                }
                acc
            })
            .collect()
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| Complex::with_val(x.prec(), (x, 0))).collect(),
        }
    }

    pub(crate) fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(Float::to_f64).collect()
    }
}

impl ComplexMatrix {
    pub fn frobenius(&self) -> BigReal {
        let bits = self.data.first().map_or(64, |z| z.prec().0);
        let mut acc = Float::new(bits);
        for z in &self.data {
            acc += Float::with_val(bits, z.real().square_ref());
            acc += Float::with_val(bits, z.imag().square_ref());
        }
        acc.sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.imag().is_zero())
    }

    pub fn mul_vec(&self, v: &[BigComplex]) -> Vec<BigComplex> {
        let bits = v.first().map_or(64, |z| z.prec().0);
        let mut tmp = Complex::new(bits);
        (0..self.n)
            .map(|i| {
                let mut acc = Complex::new(bits);
                for (a, x) in self.data[i * self.n..(i + 1) * self.n].iter().zip(v) {
                    tmp.assign(a * x);
                    acc += &tmp;
                }
                acc
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryTag {
    RealSymmetric,
    ComplexSymmetric,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DenseMatrix {
    RealSymmetric(RealMatrix),
    ComplexSymmetric(ComplexMatrix),
    General(ComplexMatrix),
}

impl DenseMatrix {
    /// Tags a complex matrix by inspecting its entries.
    pub fn classify(m: ComplexMatrix) -> Self {
        if !m.is_symmetric() {
            DenseMatrix::General(m)
        } else if m.is_real() {
            let n = m.n;
            DenseMatrix::RealSymmetric(Matrix {
                n,
                data: m.data.into_iter().map(|z| z.into_real_imag().0).collect(),
            })
        } else {
            DenseMatrix::ComplexSymmetric(m)
        }
    }

    pub fn tag(&self) -> SymmetryTag {
        match self {
            DenseMatrix::RealSymmetric(_) => SymmetryTag::RealSymmetric,
            DenseMatrix::ComplexSymmetric(_) => SymmetryTag::ComplexSymmetric,
            DenseMatrix::General(_) => SymmetryTag::General,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            DenseMatrix::RealSymmetric(m) => m.order(),
            DenseMatrix::ComplexSymmetric(m) | DenseMatrix::General(m) => m.order(),
        }
    }

    pub fn frobenius(&self) -> BigReal {
        match self {
            DenseMatrix::RealSymmetric(m) => m.frobenius(),
            DenseMatrix::ComplexSymmetric(m) | DenseMatrix::General(m) => m.frobenius(),
        }
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        match self {
            DenseMatrix::RealSymmetric(m) => m.to_complex(),
            DenseMatrix::ComplexSymmetric(m) | DenseMatrix::General(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Ascending by real part, ties broken by imaginary part.
    pub values: Vec<BigComplex>,
    pub vectors: Option<Vec<Vec<BigComplex>>>,
    /// Upper bound on `‖A c − E c‖₂` over the returned pairs (on the
    /// eigenvalue error when no vectors were requested).
    pub residual_bound: BigReal,
    pub warnings: Vec<Warning>,
}

/// Full spectrum of any tagged matrix. Real symmetric input goes to Jacobi;
/// everything else to Hessenberg QR, with vectors from inverse iteration.
pub fn full_eigen(m: &DenseMatrix, ctx: &PrecisionContext, want_vectors: bool) -> Result<EigenResult> {
    match m {
        DenseMatrix::RealSymmetric(a) => jacobi_eigen(a, ctx, want_vectors),
        DenseMatrix::ComplexSymmetric(a) | DenseMatrix::General(a) => {
            let values = qr_eigen_complex(a, ctx)?;
            complex_pairs(a, values, ctx, want_vectors, None)
        }
    }
}

/// Attaches inverse-iteration vectors to QR eigenvalues, optionally only for
/// the first `limit` values.
pub(crate) fn complex_pairs(
    a: &ComplexMatrix,
    mut values: Vec<BigComplex>,
    ctx: &PrecisionContext,
    want_vectors: bool,
    limit: Option<usize>,
) -> Result<EigenResult> {
    let bits = ctx.bits();
    if let Some(k) = limit {
        values.truncate(k);
    }
    let mut bound = Float::new(bits);
    let vectors = if want_vectors {
        let mut vecs = Vec::with_capacity(values.len());
        // The QR values are kept as reported; refinement only steers the vector.
        for mu in values.iter() {
            let (_, v) = inverse_iteration(a, mu, ctx)?;
            let r = residual_norm_complex(a, mu, &v);
            if r > bound {
                bound = r;
            }
            vecs.push(v);
        }
        Some(vecs)
    } else {
        bound = Float::with_val(bits, a.frobenius() * ctx.refinement_tol());
        None
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| cmp_complex(&values[i], &values[j]));
    let values = order.iter().map(|&i| values[i].clone()).collect();
    let vectors = vectors.map(|v| order.iter().map(|&i| v[i].clone()).collect());
    Ok(EigenResult {
        values,
        vectors,
        residual_bound: bound,
        warnings: Vec::new(),
    })
}

pub(crate) fn cmp_complex(a: &Complex, b: &Complex) -> Ordering {
    a.real()
        .partial_cmp(b.real())
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.imag().partial_cmp(b.imag()).unwrap_or(Ordering::Equal))
}

pub(crate) fn residual_norm_complex(a: &ComplexMatrix, mu: &Complex, v: &[Complex]) -> Float {
    let bits = mu.prec().0;
    let av = a.mul_vec(v);
    let mut acc = Float::new(bits);
    let mut t = Complex::new(bits);
    for (x, y) in av.iter().zip(v) {
        t.assign(mu * y);
        t -= x;
        acc += Float::with_val(bits, t.norm_ref());
    }
    acc.sqrt()
}

/// Operations the LU solver needs from a field element.
pub(crate) trait Scalar: Clone {
    fn zero_like(&self) -> Self;
    /// `|re| + |im|`, used only to choose pivots.
    fn magnitude(&self) -> Float;
    fn is_zero(&self) -> bool;
    /// `self -= a * b`, using `tmp` as scratch.
    fn sub_mul(&mut self, a: &Self, b: &Self, tmp: &mut Self);
    fn div_assign(&mut self, d: &Self);
}

impl Scalar for Float {
    fn zero_like(&self) -> Self {
        Float::new(self.prec())
    }
    fn magnitude(&self) -> Float {
        Float::with_val(self.prec(), self.abs_ref())
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn sub_mul(&mut self, a: &Self, b: &Self, tmp: &mut Self) {
        tmp.assign(a * b);
        *self -= &*tmp;
    }
    fn div_assign(&mut self, d: &Self) {
        *self /= d;
    }
}

impl Scalar for Complex {
    fn zero_like(&self) -> Self {
        Complex::new(self.prec())
    }
    fn magnitude(&self) -> Float {
        Float::with_val(self.prec().0, self.real().abs_ref()) + Float::with_val(self.prec().0, self.imag().abs_ref())
    }
    fn is_zero(&self) -> bool {
        Complex::is_zero(self)
    }
    fn sub_mul(&mut self, a: &Self, b: &Self, tmp: &mut Self) {
        tmp.assign(a * b);
        *self -= &*tmp;
    }
    fn div_assign(&mut self, d: &Self) {
        *self /= d;
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
pub(crate) struct Lu<T> {
    n: usize,
    data: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    /// Factors in place; `None` when a pivot column is exactly zero.
    pub(crate) fn factor(n: usize, mut data: Vec<T>) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut tmp = data[0].zero_like();
        for k in 0..n {
            let mut best = k;
            let mut best_mag = data[k * n + k].magnitude();
            for i in k + 1..n {
                let m = data[i * n + k].magnitude();
                if m > best_mag {
                    best = i;
                    best_mag = m;
                }
            }
            if best_mag.is_zero() {
                return None;
            }
            if best != k {
                for j in 0..n {
                    data.swap(k * n + j, best * n + j);
                }
                perm.swap(k, best);
            }
            let (upper, lower) = data.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..];
            for i in 0..n - k - 1 {
                let row = &mut lower[i * n..(i + 1) * n];
                if row[k].is_zero() {
                    continue;
                }
                row[k].div_assign(&pivot_row[k]);
                let (head, tail) = row.split_at_mut(k + 1);
                let l = &head[k];
                for (x, u) in tail.iter_mut().zip(&pivot_row[k + 1..]) {
                    x.sub_mul(l, u, &mut tmp);
                }
            }
        }
        Some(Lu { n, data, perm })
    }

    pub(crate) fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        let mut tmp = x[0].zero_like();
        for i in 0..n {
            let (done, rest) = x.split_at_mut(i);
            for (l, xj) in self.data[i * n..i * n + i].iter().zip(done.iter()) {
                rest[0].sub_mul(l, xj, &mut tmp);
            }
        }
        for i in (0..n).rev() {
            let (head, done) = x.split_at_mut(i + 1);
            for (u, xj) in self.data[i * n + i + 1..(i + 1) * n].iter().zip(done.iter()) {
                head[i].sub_mul(u, xj, &mut tmp);
            }
            head[i].div_assign(&self.data[i * n + i]);
        }
        x
    }
}

pub(crate) fn convergence_failure(solver: &'static str, iterations: usize) -> Error {
    Error::ConvergenceFailure { solver, iterations }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Deterministic pseudo-random rationals in [-1, 1] with small denominators.
    pub fn lcg_values(seed: u64, count: usize) -> Vec<f64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..count)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 33) % 2001) as f64 / 1000.0 - 1.0
            })
            .collect()
    }

    pub fn random_symmetric(n: usize, seed: u64, ctx: &PrecisionContext) -> RealMatrix {
        let vals = lcg_values(seed, n * n);
        Matrix::from_fn(n, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            ctx.real(vals[a * n + b])
        })
    }

    pub fn close(a: &Float, b: &Float, tol: &Float) -> bool {
        Float::with_val(a.prec(), a - b).abs() <= *tol
    }
}
