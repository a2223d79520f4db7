//! Dense square complex matrices and Hermitian eigenvalues.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMatrix { n, data }
    }

    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Ok(CMatrix { n, data })
    }

    /// `|u><v|` in the coordinates given.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    /// max |A_ij - conj(A_ji)|
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CMatrix { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `AB - BA`
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// `<u, A v>` with the first argument conjugated.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let n = self.n;
        let mut acc = Complex64::zero();
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let av: Complex64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            acc += u[i].conj() * av;
        }
        acc
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// Householder reduction to a real symmetric tridiagonal matrix followed
    /// by implicit QL; rejects input whose Hermitian defect exceeds `tol`.
    pub fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        let defect = self.hermitian_defect();
        if defect > tol {
            return Err(Error::NotHermitian { defect });
        }
        let (mut diag, mut off) = tridiagonalize(self);
        tridiagonal_ql(&mut diag, &mut off)?;
        diag.sort_by(|a, b| a.total_cmp(b));
        Ok(diag)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

// Returns the real diagonal and the moduli of the subdiagonal. A Hermitian
// tridiagonal matrix is unitarily similar (by a diagonal phase matrix) to the
// real symmetric one with |e_k| on the off-diagonal.
fn tridiagonalize(matrix: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = matrix.n;
    let mut a = matrix.clone();
    // symmetrise so that rounding in the input cannot leak into the result
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![Complex64::zero(); n];
    let mut p = vec![Complex64::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let start = k + 1;
        let norm = (start..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let x0 = a[(start, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        for i in start..n {
            v[i] = a[(i, k)];
        }
        v[start] -= alpha;
        let vnorm = (start..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            off[k] = norm;
            continue;
        }
        for item in v.iter_mut().take(n).skip(start) {
            *item /= vnorm;
        }
        // p = A v on the trailing block (rows/cols start..n)
        for i in start..n {
            let mut acc = Complex64::zero();
            for j in start..n {
                acc += a[(i, j)] * v[j];
            }
            p[i] = acc;
        }
        let vp: Complex64 = (start..n).map(|i| v[i].conj() * p[i]).sum();
        // w = p - (v* p) v, A <- A - 2 v w* - 2 w v*
        for i in start..n {
            p[i] -= vp * v[i];
        }
        for i in start..n {
            for j in start..n {
                let delta = v[i] * p[j].conj() + p[i] * v[j].conj();
                a[(i, j)] -= delta * 2.0;
            }
        }
        a[(start, k)] = alpha;
        a[(k, start)] = alpha.conj();
        for i in start + 1..n {
            a[(i, k)] = Complex64::zero();
            a[(k, i)] = Complex64::zero();
        }
        off[k] = norm;
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1, n - 2)].norm();
    }
    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    (diag, off)
}

// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix;
// `diag` is overwritten by the eigenvalues.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n < 2 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // off-diagonals below eps * ||T|| are negligible; without this floor
    // clusters of zero eigenvalues never satisfy the relative test
    let scale = (0..n).map(|i| diag[i].abs() + e[i].abs()).fold(0.0, f64::max);
    let floor = f64::EPSILON * scale;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::IterationLimit { iterations, deviations: vec![e[l].abs()] });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = Stream::new(seed);
        let g = CMatrix::from_fn(n, |_, _| Complex64::new(rng.normal(), rng.normal()));
        g.add(&g.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    #[test]
    fn diagonal_matrix_eigenvalues() {
        let m = CMatrix::from_fn(
            3,
            |i, j| {
                if i == j {
                    Complex64::new([2.0, -1.0, 0.5][i], 0.0)
                } else {
                    Complex64::zero()
                }
            },
        );
        let ev = m.hermitian_eigenvalues(1e-12).unwrap();
        assert_eq!(ev, vec![-1.0, 0.5, 2.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[a, b], [b*, d]] has eigenvalues (a+d)/2 +- sqrt(((a-d)/2)^2 + |b|^2)
        let b = Complex64::new(0.3, -0.4);
        let m =
            CMatrix::from_row_major(2, vec![Complex64::new(1.0, 0.0), b, b.conj(), Complex64::new(-2.0, 0.0)]).unwrap();
        let ev = m.hermitian_eigenvalues(1e-12).unwrap();
        let disc = (1.5f64 * 1.5 + 0.25).sqrt();
        assert!((ev[0] - (-0.5 - disc)).abs() < 1e-14);
        assert!((ev[1] - (-0.5 + disc)).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_reproduce_trace_and_frobenius() {
        for (n, seed) in [(5, 1u64), (16, 2), (40, 3)] {
            let m = random_hermitian(n, seed);
            let ev = m.hermitian_eigenvalues(1e-12).unwrap();
            let tr: f64 = ev.iter().sum();
            let fro: f64 = ev.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((tr - m.trace().re).abs() < 1e-10 * n as f64);
            assert!((fro - m.frobenius()).abs() < 1e-10 * n as f64);
            // trace of A^3 pins down the spectrum further
            let cube = m.matmul(&m).matmul(&m).trace().re;
            let ev3: f64 = ev.iter().map(|x| x * x * x).sum();
            assert!((cube - ev3).abs() < 1e-9 * cube.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_fn(2, |i, j| Complex64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(m.hermitian_eigenvalues(1e-8), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn low_rank_spectrum() {
        let mut rng = Stream::new(9);
        let u: Vec<Complex64> = (0..64).map(|_| Complex64::new(rng.normal(), rng.normal()) * 1e-9).collect();
        let norm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let eig = CMatrix::outer(&u, &u).hermitian_eigenvalues(1e-12).unwrap();
        assert!((eig[63] - norm2).abs() <= 1e-12 * norm2);
        assert!(eig[..63].iter().all(|l| l.abs() <= 1e-15 * norm2));
    }
}
