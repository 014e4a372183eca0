//! Small dense complex matrices.
//!
//! The Dicke space of N particles has dimension N+1, so everything here is
//! plain row-major storage with O(n^3) kernels.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

pub type CVector<T> = Vec<Complex<T>>;

/// Square complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| *z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * *b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> CVector<T> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim];
        self.matvec_into(v, &mut out);
        out
    }

    pub fn matvec_into(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        assert_eq!(v.len(), self.dim);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.dim)) {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (a, x) in row.iter().zip(v) {
                acc += *a * *x;
            }
            *o = acc;
        }
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    /// `||U^dagger U - I||_F`.
    pub fn unitarity_defect(&self) -> T {
        self.adjoint().matmul(self).sub(&Self::identity(self.dim)).frobenius_norm()
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

/// Eigendecomposition `A = V diag(values) V^dagger` of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending; column `k` of `vectors` belongs to
/// `values[k]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Cyclic complex Jacobi iteration.
    ///
    /// Each rotation first removes the phase of the pivot `a_pq` and then
    /// applies a real Jacobi rotation, so the iterate stays Hermitian.
    pub fn new(a: &CMatrix<T>) -> Self {
        let n = a.dim();
        let mut a = a.clone();
        let mut v = CMatrix::identity(n);
        let zero = Complex::new(T::zero(), T::zero());
        let scale = a.frobenius_norm().max(T::min_positive_value());
        let tol = T::epsilon() * scale * T::lit(1e-2);

        for _sweep in 0..100 {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    if r <= tol * T::lit(1e-3) {
                        continue;
                    }
                    // e^{-i alpha} where a_pq = r e^{i alpha}
                    let phase_conj = apq.conj() / r;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let theta = (aqq - app) / (r + r);
                    let t = {
                        let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                        if theta < T::zero() {
                            -t
                        } else {
                            t
                        }
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    // U on the (p, q) block:
                    //   [ c              s              ]
                    //   [ -s e^{-ia}     c e^{-ia}      ]
                    let u_pp = Complex::new(c, T::zero());
                    let u_pq = Complex::new(s, T::zero());
                    let u_qp = phase_conj * (-s);
                    let u_qq = phase_conj * c;

                    // A <- A U
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * u_pp + akq * u_qp;
                        a[(k, q)] = akp * u_pq + akq * u_qq;
                    }
                    // A <- U^dagger A
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                    }
                    a[(p, q)] = zero;
                    a[(q, p)] = zero;
                    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
                    // V <- V U
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * u_pp + vkq * u_qp;
                        v[(k, q)] = vkp * u_pq + vkq * u_qq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = CMatrix::from_fn(n, |row, col| v[(row, order[col])]);
        Self { values, vectors }
    }

    /// `V diag(f(lambda_k)) V^dagger`.
    pub fn map_spectrum(&self, mut f: impl FnMut(T) -> Complex<T>) -> CMatrix<T> {
        let n = self.values.len();
        let fv: Vec<Complex<T>> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    acc += self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CMatrix::from_fn(n, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        g.add(&g.adjoint()).scale(Complex::new(0.5, 0.0))
    }

    #[test]
    fn eigen_reconstructs_random_hermitian() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (9, 4), (17, 5)] {
            let a = random_hermitian(n, seed);
            let eig = HermitianEigen::new(&a);
            let back = eig.map_spectrum(|l| Complex::new(l, 0.0));
            assert!(back.max_abs_diff(&a) < 1e-12, "n={n}");
            assert!(eig.vectors.unitarity_defect() < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigen_handles_degenerate_spectrum() {
        let a = CMatrix::<f64>::identity(4).scale(Complex::new(2.5, 0.0));
        let eig = HermitianEigen::new(&a);
        assert!(eig.values.iter().all(|&l| (l - 2.5).abs() < 1e-15));
    }

    #[test]
    fn eigen_matches_trace_and_determinant_2x2() {
        let a = CMatrix::<f64>::from_fn(2, |i, j| match (i, j) {
            (0, 0) => Complex::new(1.0, 0.0),
            (0, 1) => Complex::new(0.3, -0.4),
            (1, 0) => Complex::new(0.3, 0.4),
            _ => Complex::new(-2.0, 0.0),
        });
        let eig = HermitianEigen::new(&a);
        // det = -2 - 0.25, tr = -1
        let (l0, l1) = (eig.values[0], eig.values[1]);
        assert!((l0 + l1 + 1.0).abs() < 1e-14);
        assert!((l0 * l1 + 2.25).abs() < 1e-14);
    }
}
