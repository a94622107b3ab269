//! Small dense complex linear algebra.
//!
//! Everything here is sized for the matrices this crate works with (a few
//! levels up to a few dozen), so the routines favour accuracy and
//! determinism over blocking or SIMD tricks.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(*d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails unless `data.len()` is a
    /// perfect square.
    pub fn from_row_major(data: Vec<C64>) -> Result<Self> {
        let dim = integer_sqrt(data.len());
        if dim * dim != data.len() || dim == 0 {
            return Err(Error::ShapeMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        let mut data = Vec::with_capacity(N * N);
        for row in rows.iter() {
            data.extend_from_slice(row);
        }
        Self { dim: N, data }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[C64]) {
        for (i, v) in col.iter().enumerate() {
            self[(i, j)] = *v;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self† · rhs` without materialising the adjoint.
    pub fn adjoint_matmul(&self, rhs: &Self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.data[k * n + i].conj() * rhs.data[k * n + j])
                .sum()
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `self + s·rhs`, in place.
    pub fn axpy(&mut self, s: C64, rhs: &Self) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += s * b;
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A_ij − conj(A_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let r = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Frobenius norm of `A†A − I`.
    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint_matmul(self)
            .sub(&Self::identity(self.dim))
            .frobenius_norm()
    }

    /// Replaces the matrix by its Hermitian part `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

fn integer_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `⟨a|b⟩ = Σ conj(a_i)·b_i`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending; column `n` of the returned matrix is the
/// unit eigenvector for eigenvalue `n`. Only the Hermitian part of `a` is
/// used.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    if n > 1 {
        jacobi_sweeps(&mut m, &mut v);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

// Cyclic complex Jacobi. Each rotation is a phase on column q followed by a
// real Givens rotation, so A ← G†AG stays Hermitian to roundoff.
fn jacobi_sweeps(m: &mut CMatrix, v: &mut CMatrix) {
    let n = m.dim();
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G_pp = c, G_pq = s, G_qp = -s·conj(phase), G_qq = c·conj(phase)
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                apply_right(m, p, q, gpp, gpq, gqp, gqq);
                apply_left_adjoint(m, p, q, gpp, gpq, gqp, gqq);
                apply_right(v, p, q, gpp, gpq, gqp, gqq);
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }
}

#[inline]
fn apply_right(m: &mut CMatrix, p: usize, q: usize, gpp: C64, gpq: C64, gqp: C64, gqq: C64) {
    for i in 0..m.dim() {
        let xp = m[(i, p)];
        let xq = m[(i, q)];
        m[(i, p)] = xp * gpp + xq * gqp;
        m[(i, q)] = xp * gpq + xq * gqq;
    }
}

#[inline]
fn apply_left_adjoint(m: &mut CMatrix, p: usize, q: usize, gpp: C64, gpq: C64, gqp: C64, gqq: C64) {
    for j in 0..m.dim() {
        let xp = m[(p, j)];
        let xq = m[(q, j)];
        m[(p, j)] = gpp.conj() * xp + gqp.conj() * xq;
        m[(q, j)] = gpq.conj() * xp + gqq.conj() * xq;
    }
}

/// Solves `A·X = B` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = a.dim();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let (piv, pmag) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if pmag == 0.0 || !pmag.is_finite() {
            return Err(Error::SingularMatrix);
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
                let tmp = x[(k, j)];
                x[(k, j)] = x[(piv, j)];
                x[(piv, j)] = tmp;
            }
        }
        let d = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / d;
            if f == ZERO {
                continue;
            }
            for j in k..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
            for j in 0..n {
                let u = x[(k, j)];
                x[(i, j)] -= f * u;
            }
        }
    }
    for k in (0..n).rev() {
        let d = lu[(k, k)];
        for j in 0..n {
            let mut s = x[(k, j)];
            for i in (k + 1)..n {
                s -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = s / d;
        }
    }
    Ok(x)
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
#[allow(clippy::excessive_precision)]
const THETA: [f64; 5] = [
    1.495585217958292e-2,
    2.539398330063230e-1,
    9.504178996162932e-1,
    2.097847961257068e0,
    5.371920351148152e0,
];

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3–13 chosen from the 1-norm.
///
/// Diagonal Padé approximants map anti-Hermitian arguments to unitary
/// matrices, so `expm(-i·H·dt)` is unitary to roundoff.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.dim();
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = a.one_norm();
    let id = CMatrix::identity(n);
    if norm == 0.0 {
        return Ok(id);
    }

    let low: [(&[f64], f64); 4] = [
        (&PADE3, THETA[0]),
        (&PADE5, THETA[1]),
        (&PADE7, THETA[2]),
        (&PADE9, THETA[3]),
    ];
    for (coeffs, theta) in low {
        if norm <= theta {
            return pade_low(a, coeffs);
        }
    }

    let s = if norm > THETA[4] {
        (norm / THETA[4]).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(s));
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

fn pade_low(a: &CMatrix, b: &[f64]) -> Result<CMatrix> {
    let n = a.dim();
    let a2 = a.matmul(a);
    let mut u = CMatrix::identity(n).scale_real(b[1]);
    let mut v = CMatrix::identity(n).scale_real(b[0]);
    let mut power = CMatrix::identity(n);
    let mut k = 2;
    while k < b.len() {
        power = power.matmul(&a2);
        v.axpy(C64::new(b[k], 0.0), &power);
        if k + 1 < b.len() {
            u.axpy(C64::new(b[k + 1], 0.0), &power);
        }
        k += 2;
    }
    let u = a.matmul(&u);
    solve(&v.sub(&u), &v.add(&u))
}

fn pade13(a: &CMatrix) -> Result<CMatrix> {
    let b = &PADE13;
    let n = a.dim();
    let id = CMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let c = |x: f64| C64::new(x, 0.0);

    let mut inner_u = a6.scale_real(b[13]);
    inner_u.axpy(c(b[11]), &a4);
    inner_u.axpy(c(b[9]), &a2);
    let mut u = a6.matmul(&inner_u);
    u.axpy(c(b[7]), &a6);
    u.axpy(c(b[5]), &a4);
    u.axpy(c(b[3]), &a2);
    u.axpy(c(b[1]), &id);
    let u = a.matmul(&u);

    let mut inner_v = a6.scale_real(b[12]);
    inner_v.axpy(c(b[10]), &a4);
    inner_v.axpy(c(b[8]), &a2);
    let mut v = a6.matmul(&inner_v);
    v.axpy(c(b[6]), &a6);
    v.axpy(c(b[4]), &a4);
    v.axpy(c(b[2]), &a2);
    v.axpy(c(b[0]), &id);

    solve(&v.sub(&u), &v.add(&u))
}

/// `exp(−i·H·dt)` for Hermitian `H`.
pub fn unitary_step(h: &CMatrix, dt: f64) -> Result<CMatrix> {
    expm(&h.scale(C64::new(0.0, -dt)))
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn hermitian_spectral_norm(h: &CMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(h);
    vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample_hermitian() -> CMatrix {
        CMatrix::from_rows([
            [c(1.0, 0.0), c(0.3, -0.2), c(0.0, 0.7)],
            [c(0.3, 0.2), c(-0.5, 0.0), c(0.1, 0.1)],
            [c(0.0, -0.7), c(0.1, -0.1), c(2.0, 0.0)],
        ])
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let h = sample_hermitian();
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(vecs.unitarity_residual() < 1e-13);
        for (n, e) in vals.iter().enumerate() {
            let v = vecs.column(n);
            let hv = h.mul_vec(&v);
            let res: f64 = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * e).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-13, "residual {res}");
        }
    }

    #[test]
    fn eigen_of_pauli_x() {
        let sx = CMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]]);
        let (vals, _) = hermitian_eigen(&sx);
        assert!((vals[0] + 1.0).abs() < 1e-15);
        assert!((vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expm_of_diagonal_matches_scalar_exponentials() {
        for scale in [1e-4, 0.1, 1.0, 3.0, 40.0] {
            let d = CMatrix::from_real_diagonal(&[-0.5 * scale, 0.25 * scale, scale]);
            let u = unitary_step(&d, 1.0).unwrap();
            for (i, e) in [-0.5 * scale, 0.25 * scale, scale].iter().enumerate() {
                let expected = C64::from_polar(1.0, -e);
                assert!((u[(i, i)] - expected).norm() < 1e-12, "scale {scale}");
            }
        }
    }

    #[test]
    fn expm_matches_eigen_route_and_is_unitary() {
        let h = sample_hermitian();
        for dt in [1e-3, 0.05, 0.7, 5.0, 60.0] {
            let u = unitary_step(&h, dt).unwrap();
            assert!(u.unitarity_residual() < 1e-12, "dt {dt}");
            let (vals, vecs) = hermitian_eigen(&h);
            let phases: Vec<C64> = vals.iter().map(|e| C64::from_polar(1.0, -e * dt)).collect();
            let reference = vecs
                .matmul(&CMatrix::from_diagonal(&phases))
                .matmul(&vecs.adjoint());
            assert!(u.sub(&reference).max_abs() < 1e-11, "dt {dt}");
        }
    }

    #[test]
    fn solve_recovers_identity() {
        let a = CMatrix::from_rows([[c(0.0, 1.0), c(2.0, 0.0)], [c(1.0, 0.0), c(1.0, 1.0)]]);
        let x = solve(&a, &a).unwrap();
        assert!(x.sub(&CMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn singular_solve_is_reported() {
        let a = CMatrix::zeros(2);
        assert!(matches!(
            solve(&a, &CMatrix::identity(2)),
            Err(Error::SingularMatrix)
        ));
    }
}
