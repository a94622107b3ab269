//! Time-dependent Hermitian Hamiltonians on a finite domain `[0, T]`.
//!
//! A [`TimeDependentHamiltonian`] pairs a [`HamiltonianModel`] (the matrix
//! path itself) with its horizon and the numerical settings used when the
//! model has no analytic derivative. Units are `ħ = 1` throughout.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_spectral_norm, CMatrix, C64, ONE, ZERO};

pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-12;
pub const DEFAULT_FD_STEP_FRACTION: f64 = 1e-6;
const DOMAIN_SLACK: f64 = 1e-12;

/// A matrix that passed the hermiticity check.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Accepts `m` when `max|m_ij − conj(m_ji)| ≤ tol·(1 + max|m_ij|)`.
    pub fn new(m: CMatrix, tol: f64) -> Result<Self> {
        Self::checked_at(m, tol, f64::NAN)
    }

    fn checked_at(m: CMatrix, tol: f64, t: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let residual = m.hermiticity_residual();
        if residual > tol * (1.0 + m.max_abs()) {
            return Err(Error::NonHermitianSample { t, residual });
        }
        Ok(Self(m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(CMatrix::from_real_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }
}

impl AsRef<CMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HamiltonianKind {
    Amin,
    LandauZener,
    Constant,
    DualDerived,
    CustomSampled,
    Custom,
}

impl HamiltonianKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HamiltonianKind::Amin => "amin",
            HamiltonianKind::LandauZener => "landau_zener",
            HamiltonianKind::Constant => "constant",
            HamiltonianKind::DualDerived => "dual_derived",
            HamiltonianKind::CustomSampled => "custom_sampled",
            HamiltonianKind::Custom => "custom",
        }
    }
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A Hermitian matrix path `t ↦ H(t)`.
///
/// Implementations return raw matrices; domain and hermiticity checks are
/// applied by [`TimeDependentHamiltonian`].
pub trait HamiltonianModel: Send + Sync {
    fn dim(&self) -> usize;

    fn kind(&self) -> HamiltonianKind;

    fn matrix_at(&self, t: f64) -> CMatrix;

    /// Exact `dH/dt`, when the model knows it.
    fn derivative_at(&self, _t: f64) -> Option<CMatrix> {
        None
    }
}

#[derive(Clone)]
pub struct TimeDependentHamiltonian {
    model: Arc<dyn HamiltonianModel>,
    horizon: f64,
    fd_step: f64,
    hermiticity_tol: f64,
}

impl fmt::Debug for TimeDependentHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentHamiltonian")
            .field("kind", &self.kind())
            .field("dim", &self.dim())
            .field("horizon", &self.horizon)
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl TimeDependentHamiltonian {
    pub fn new<M: HamiltonianModel + 'static>(model: M, horizon: f64) -> Result<Self> {
        Self::from_arc(Arc::new(model), horizon)
    }

    pub fn from_arc(model: Arc<dyn HamiltonianModel>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if model.dim() == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self {
            model,
            horizon,
            fd_step: DEFAULT_FD_STEP_FRACTION * horizon,
            hermiticity_tol: DEFAULT_HERMITICITY_TOL,
        })
    }

    pub fn with_fd_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0) || step >= self.horizon {
            return Err(Error::InvalidParameter(format!(
                "finite-difference step {step} must lie in (0, T)"
            )));
        }
        self.fd_step = step;
        Ok(self)
    }

    pub fn with_hermiticity_tol(mut self, tol: f64) -> Self {
        self.hermiticity_tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.model.kind()
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn hermiticity_tol(&self) -> f64 {
        self.hermiticity_tol
    }

    pub fn model(&self) -> &Arc<dyn HamiltonianModel> {
        &self.model
    }

    /// Whether [`derivative`](Self::derivative) is exact rather than a
    /// finite difference.
    pub fn has_analytic_derivative(&self) -> bool {
        self.model.derivative_at(0.5 * self.horizon).is_some()
    }

    fn clamp_time(&self, t: f64) -> Result<f64> {
        let slack = DOMAIN_SLACK * self.horizon;
        if !(t >= -slack && t <= self.horizon + slack) {
            return Err(Error::TimeOutOfDomain {
                t,
                horizon: self.horizon,
            });
        }
        Ok(t.clamp(0.0, self.horizon))
    }

    pub fn evaluate(&self, t: f64) -> Result<HermitianMatrix> {
        let t = self.clamp_time(t)?;
        HermitianMatrix::checked_at(self.model.matrix_at(t), self.hermiticity_tol, t)
    }

    /// `dH/dt`, exact when the model provides it and a second-order finite
    /// difference otherwise (one-sided within `fd_step` of an endpoint).
    pub fn derivative(&self, t: f64) -> Result<HermitianMatrix> {
        let t = self.clamp_time(t)?;
        if let Some(d) = self.model.derivative_at(t) {
            return HermitianMatrix::checked_at(d, self.hermiticity_tol, t);
        }
        self.finite_difference_derivative(t)
    }

    pub fn finite_difference_derivative(&self, t: f64) -> Result<HermitianMatrix> {
        let t = self.clamp_time(t)?;
        let h = self.fd_step;
        let at = |s: f64| self.model.matrix_at(s);
        let d = if t - h < 0.0 {
            let mut d = at(t + h).scale_real(4.0);
            d.axpy(C64::new(-3.0, 0.0), &at(t));
            d.axpy(C64::new(-1.0, 0.0), &at(t + 2.0 * h));
            d.scale_real(0.5 / h)
        } else if t + h > self.horizon {
            let mut d = at(t - h).scale_real(-4.0);
            d.axpy(C64::new(3.0, 0.0), &at(t));
            d.axpy(ONE, &at(t - 2.0 * h));
            d.scale_real(0.5 / h)
        } else {
            at(t + h).sub(&at(t - h)).scale_real(0.5 / h)
        };
        // differencing can leave a roundoff-sized anti-Hermitian part
        HermitianMatrix::checked_at(d.hermitian_part(), self.hermiticity_tol, t)
    }

    /// Largest spectral norm over `samples` equally spaced points.
    pub fn max_norm(&self, samples: usize) -> Result<f64> {
        let samples = samples.max(2);
        let mut worst = 0.0f64;
        for k in 0..samples {
            let t = self.horizon * k as f64 / (samples - 1) as f64;
            worst = worst.max(hermitian_spectral_norm(self.evaluate(t)?.matrix()));
        }
        Ok(worst)
    }

    /// `H'(t) = H(t/factor)` on `[0, factor·T]`.
    pub fn time_stretched(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stretch factor must be positive, got {factor}"
            )));
        }
        let stretched = Stretched {
            inner: self.model.clone(),
            factor,
        };
        let mut out = Self::new(stretched, self.horizon * factor)?;
        out.hermiticity_tol = self.hermiticity_tol;
        out.fd_step = self.fd_step * factor;
        Ok(out)
    }
}

struct Stretched {
    inner: Arc<dyn HamiltonianModel>,
    factor: f64,
}

impl HamiltonianModel for Stretched {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn kind(&self) -> HamiltonianKind {
        self.inner.kind()
    }

    fn matrix_at(&self, t: f64) -> CMatrix {
        self.inner.matrix_at(t / self.factor)
    }

    fn derivative_at(&self, t: f64) -> Option<CMatrix> {
        self.inner
            .derivative_at(t / self.factor)
            .map(|d| d.scale_real(1.0 / self.factor))
    }
}

fn sigma_x(scale: f64) -> CMatrix {
    let s = C64::new(scale, 0.0);
    CMatrix::from_rows([[ZERO, s], [s, ZERO]])
}

/// Driven two-level system `H(t) = −ε σ_z/2 − V sin(ω₀t) σ_x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AminScenario {
    pub epsilon: f64,
    pub v: f64,
    pub omega0: f64,
}

impl AminScenario {
    pub fn new(epsilon: f64, v: f64, omega0: f64) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter("epsilon must be finite".into()));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("V must be positive, got {v}")));
        }
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        Ok(Self { epsilon, v, omega0 })
    }

    pub fn over(self, horizon: f64) -> Result<TimeDependentHamiltonian> {
        TimeDependentHamiltonian::new(self, horizon)
    }

    /// Instantaneous gap `Ω(t) = sqrt(ε² + 4V² sin²(ω₀t))`.
    pub fn gap(&self, t: f64) -> f64 {
        let s = (self.omega0 * t).sin();
        (self.epsilon * self.epsilon + 4.0 * self.v * self.v * s * s).sqrt()
    }

    /// Exact eigenvalues, ascending: `(−Ω/2, Ω/2)`.
    pub fn eigenvalues(&self, t: f64) -> [f64; 2] {
        let half = 0.5 * self.gap(t);
        [-half, half]
    }
}

impl HamiltonianModel for AminScenario {
    fn dim(&self) -> usize {
        2
    }

    fn kind(&self) -> HamiltonianKind {
        HamiltonianKind::Amin
    }

    fn matrix_at(&self, t: f64) -> CMatrix {
        let off = -self.v * (self.omega0 * t).sin();
        CMatrix::from_rows([
            [C64::new(-0.5 * self.epsilon, 0.0), C64::new(off, 0.0)],
            [C64::new(off, 0.0), C64::new(0.5 * self.epsilon, 0.0)],
        ])
    }

    fn derivative_at(&self, t: f64) -> Option<CMatrix> {
        Some(sigma_x(-self.v * self.omega0 * (self.omega0 * t).cos()))
    }
}

/// Linear sweep through an avoided crossing centred at `center`:
/// `H(t) = v·(t − center)·σ_z/2 + Δ·σ_x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandauZener {
    pub sweep_rate: f64,
    pub delta: f64,
    pub center: f64,
}

impl LandauZener {
    pub fn new(sweep_rate: f64, delta: f64, center: f64) -> Result<Self> {
        if !sweep_rate.is_finite() || !center.is_finite() {
            return Err(Error::InvalidParameter("sweep parameters must be finite".into()));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gap parameter must be positive, got {delta}"
            )));
        }
        Ok(Self {
            sweep_rate,
            delta,
            center,
        })
    }

    /// Sweep centred on the middle of `[0, horizon]`.
    pub fn centered(sweep_rate: f64, delta: f64, horizon: f64) -> Result<TimeDependentHamiltonian> {
        TimeDependentHamiltonian::new(Self::new(sweep_rate, delta, 0.5 * horizon)?, horizon)
    }
}

impl HamiltonianModel for LandauZener {
    fn dim(&self) -> usize {
        2
    }

    fn kind(&self) -> HamiltonianKind {
        HamiltonianKind::LandauZener
    }

    fn matrix_at(&self, t: f64) -> CMatrix {
        let z = 0.5 * self.sweep_rate * (t - self.center);
        let d = C64::new(self.delta, 0.0);
        CMatrix::from_rows([[C64::new(z, 0.0), d], [d, C64::new(-z, 0.0)]])
    }

    fn derivative_at(&self, _t: f64) -> Option<CMatrix> {
        let z = 0.5 * self.sweep_rate;
        Some(CMatrix::from_real_diagonal(&[z, -z]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantHamiltonian(pub HermitianMatrix);

impl ConstantHamiltonian {
    pub fn over(self, horizon: f64) -> Result<TimeDependentHamiltonian> {
        TimeDependentHamiltonian::new(self, horizon)
    }
}

impl HamiltonianModel for ConstantHamiltonian {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn kind(&self) -> HamiltonianKind {
        HamiltonianKind::Constant
    }

    fn matrix_at(&self, _t: f64) -> CMatrix {
        self.0.matrix().clone()
    }

    fn derivative_at(&self, _t: f64) -> Option<CMatrix> {
        Some(CMatrix::zeros(self.0.dim()))
    }
}

/// Hermitian samples joined by entrywise linear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct CustomSampledHamiltonian {
    times: Vec<f64>,
    matrices: Vec<CMatrix>,
}

impl CustomSampledHamiltonian {
    pub fn new(times: Vec<f64>, matrices: Vec<CMatrix>, tol: f64) -> Result<Self> {
        if times.len() != matrices.len() {
            return Err(Error::ShapeMismatch {
                expected: times.len(),
                found: matrices.len(),
            });
        }
        if times.len() < 2 {
            return Err(Error::InsufficientGrid {
                needed: 2,
                found: times.len(),
            });
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sampled Hamiltonian must start at t = 0, got {}",
                times[0]
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "sample times must be strictly increasing".into(),
            ));
        }
        let dim = matrices[0].dim();
        for (t, m) in times.iter().zip(&matrices) {
            if m.dim() != dim {
                return Err(Error::ShapeMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            HermitianMatrix::checked_at(m.clone(), tol, *t)?;
        }
        Ok(Self { times, matrices })
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("at least two samples")
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn into_hamiltonian(self) -> Result<TimeDependentHamiltonian> {
        let horizon = self.horizon();
        TimeDependentHamiltonian::new(self, horizon)
    }

    fn segment(&self, t: f64) -> usize {
        let last = self.times.len() - 2;
        match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }
}

impl HamiltonianModel for CustomSampledHamiltonian {
    fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    fn kind(&self) -> HamiltonianKind {
        HamiltonianKind::CustomSampled
    }

    fn matrix_at(&self, t: f64) -> CMatrix {
        let k = self.segment(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        let mut m = self.matrices[k].scale_real(1.0 - w);
        m.axpy(C64::new(w, 0.0), &self.matrices[k + 1]);
        m
    }

    fn derivative_at(&self, t: f64) -> Option<CMatrix> {
        let k = self.segment(t);
        let span = self.times[k + 1] - self.times[k];
        Some(self.matrices[k + 1].sub(&self.matrices[k]).scale_real(1.0 / span))
    }
}

type MatrixFn = Box<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// Matrix path given by closures.
pub struct FnHamiltonian {
    dim: usize,
    value: MatrixFn,
    derivative: Option<MatrixFn>,
}

impl FnHamiltonian {
    pub fn new(dim: usize, value: impl Fn(f64) -> CMatrix + Send + Sync + 'static) -> Self {
        Self {
            dim,
            value: Box::new(value),
            derivative: None,
        }
    }

    pub fn with_derivative(
        mut self,
        derivative: impl Fn(f64) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Box::new(derivative));
        self
    }
}

impl HamiltonianModel for FnHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn kind(&self) -> HamiltonianKind {
        HamiltonianKind::Custom
    }

    fn matrix_at(&self, t: f64) -> CMatrix {
        (self.value)(t)
    }

    fn derivative_at(&self, t: f64) -> Option<CMatrix> {
        self.derivative.as_ref().map(|d| d(t))
    }
}

/// Seeded smooth random path used for property checks:
/// `H(t) = D + Σ_j a_j sin(w_j t + φ_j) M_j`.
///
/// `D` is diagonal with adjacent levels at least `min_spacing` apart and each
/// `M_j` is a random Hermitian matrix of unit Frobenius norm, so the gap
/// never closes while `Σ a_j < min_spacing / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSmoothPath {
    diagonal: CMatrix,
    terms: Vec<DriveTerm>,
}

#[derive(Clone, Debug, PartialEq)]
struct DriveTerm {
    amplitude: f64,
    frequency: f64,
    phase: f64,
    shape: CMatrix,
}

impl RandomSmoothPath {
    pub const MIN_SPACING: f64 = 0.5;
    const TERMS: usize = 3;

    /// `coupling` scales the sum of drive amplitudes; it is capped so the
    /// spectrum stays non-degenerate.
    pub fn generate(dim: usize, seed: u64, coupling: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let coupling = coupling.abs().min(0.45 * Self::MIN_SPACING);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut level = rng.gen_range(-1.0..-0.5);
        let mut levels = Vec::with_capacity(dim);
        for _ in 0..dim {
            levels.push(level);
            level += Self::MIN_SPACING + rng.gen_range(0.0..0.7);
        }
        let mut weights: Vec<f64> = (0..Self::TERMS).map(|_| rng.gen_range(0.2..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w *= coupling / total;
        }
        let terms = weights
            .into_iter()
            .map(|amplitude| {
                let frequency = rng.gen_range(0.2..2.0);
                let phase = rng.gen_range(0.0..core::f64::consts::TAU);
                let raw = CMatrix::from_fn(dim, |_, _| {
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
                .hermitian_part();
                let norm = raw.frobenius_norm().max(1e-300);
                DriveTerm {
                    amplitude,
                    frequency,
                    phase,
                    shape: raw.scale_real(1.0 / norm),
                }
            })
            .collect();
        Ok(Self {
            diagonal: CMatrix::from_real_diagonal(&levels),
            terms,
        })
    }

    pub fn over(self, horizon: f64) -> Result<TimeDependentHamiltonian> {
        TimeDependentHamiltonian::new(self, horizon)
    }
}

impl HamiltonianModel for RandomSmoothPath {
    fn dim(&self) -> usize {
        self.diagonal.dim()
    }

    fn kind(&self) -> HamiltonianKind {
        HamiltonianKind::Custom
    }

    fn matrix_at(&self, t: f64) -> CMatrix {
        let mut m = self.diagonal.clone();
        for term in &self.terms {
            let a = term.amplitude * (term.frequency * t + term.phase).sin();
            m.axpy(C64::new(a, 0.0), &term.shape);
        }
        m
    }

    fn derivative_at(&self, t: f64) -> Option<CMatrix> {
        let mut m = CMatrix::zeros(self.dim());
        for term in &self.terms {
            let a = term.amplitude * term.frequency * (term.frequency * t + term.phase).cos();
            m.axpy(C64::new(a, 0.0), &term.shape);
        }
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn amin() -> TimeDependentHamiltonian {
        AminScenario::new(1.0, 0.01, 1.0).unwrap().over(10.0).unwrap()
    }

    #[test]
    fn amin_at_zero_is_diagonal() {
        let h = amin().evaluate(0.0).unwrap();
        let expected = CMatrix::from_real_diagonal(&[-0.5, 0.5]);
        assert!(h.matrix().sub(&expected).max_abs() < 1e-15);
    }

    #[test]
    fn amin_at_quarter_period() {
        let h = amin().evaluate(FRAC_PI_2).unwrap();
        let m = h.matrix();
        assert!((m[(0, 0)].re + 0.5).abs() < 1e-15);
        assert!((m[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!((m[(0, 1)].re + 0.01).abs() < 1e-15);
        assert!((m[(1, 0)].re + 0.01).abs() < 1e-15);
    }

    #[test]
    fn amin_derivative_at_zero() {
        let d = amin().derivative(0.0).unwrap();
        let expected = sigma_x(-0.01);
        assert!(d.matrix().sub(&expected).max_abs() < 1e-15);
    }

    #[test]
    fn constant_path_is_flat() {
        let h0 = HermitianMatrix::from_real_diagonal(&[-0.5, 0.5]);
        let h = ConstantHamiltonian(h0.clone()).over(3.0).unwrap();
        for t in [0.0, 1.0, 3.0] {
            assert_eq!(h.evaluate(t).unwrap(), h0);
            assert_eq!(h.derivative(t).unwrap().matrix().max_abs(), 0.0);
        }
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let h = amin();
        assert!(matches!(
            h.evaluate(10.5),
            Err(Error::TimeOutOfDomain { .. })
        ));
        assert!(matches!(
            h.evaluate(-0.1),
            Err(Error::TimeOutOfDomain { .. })
        ));
        assert!(h.evaluate(10.0 + 1e-12).is_ok());
    }

    #[test]
    fn non_hermitian_sample_is_rejected() {
        let bad = CMatrix::from_rows([[ONE, ONE], [ZERO, ONE]]);
        assert!(matches!(
            HermitianMatrix::new(bad.clone(), 1e-12),
            Err(Error::NonHermitianSample { .. })
        ));
        let err = CustomSampledHamiltonian::new(
            alloc::vec![0.0, 1.0],
            alloc::vec![CMatrix::identity(2), bad],
            1e-12,
        );
        assert!(matches!(err, Err(Error::NonHermitianSample { .. })));
    }

    #[test]
    fn sampled_segment_slope_matches_finite_difference() {
        let a = CMatrix::from_rows([
            [C64::new(-1.0, 0.0), C64::new(0.2, 0.1)],
            [C64::new(0.2, -0.1), C64::new(1.0, 0.0)],
        ]);
        let b = CMatrix::from_rows([
            [C64::new(-0.5, 0.0), C64::new(0.4, -0.3)],
            [C64::new(0.4, 0.3), C64::new(0.8, 0.0)],
        ]);
        let c = CMatrix::from_real_diagonal(&[-2.0, 2.0]);
        let sampled = CustomSampledHamiltonian::new(
            alloc::vec![0.0, 1.0, 3.0],
            alloc::vec![a.clone(), b.clone(), c],
            1e-12,
        )
        .unwrap();
        let h = sampled.into_hamiltonian().unwrap();
        let slope = b.sub(&a);
        for t in [0.2, 0.5, 0.8] {
            let exact = h.derivative(t).unwrap();
            let fd = h.finite_difference_derivative(t).unwrap();
            assert!(exact.matrix().sub(&slope).max_abs() < 1e-12);
            assert!(fd.matrix().sub(&slope).max_abs() < 1e-8);
        }
    }

    #[test]
    fn stretched_path_rescales_time_and_derivative() {
        let h = amin();
        let s = h.time_stretched(2.0).unwrap();
        assert_eq!(s.horizon(), 20.0);
        let a = h.evaluate(1.3).unwrap();
        let b = s.evaluate(2.6).unwrap();
        assert!(a.matrix().sub(b.matrix()).max_abs() < 1e-15);
        let da = h.derivative(1.3).unwrap();
        let db = s.derivative(2.6).unwrap();
        assert!(da.matrix().scale_real(0.5).sub(db.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn random_paths_are_reproducible() {
        let a = RandomSmoothPath::generate(3, 7, 0.1).unwrap();
        let b = RandomSmoothPath::generate(3, 7, 0.1).unwrap();
        assert_eq!(a, b);
        let c = RandomSmoothPath::generate(3, 8, 0.1).unwrap();
        assert_ne!(a, c);
    }
}
