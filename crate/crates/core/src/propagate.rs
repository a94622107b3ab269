//! Schrödinger propagation with the midpoint exponential stepper
//! `U_step = exp(−i·H(t + dt/2)·dt)`.
//!
//! Every step is unitary to roundoff, so norm conservation holds exactly
//! instead of being an accuracy target. The global error is `O(dt²)`.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::TimeDependentHamiltonian;
use crate::linalg::{inner, norm, unitary_step, CMatrix, C64, ZERO};
use crate::quadrature::{simpson_weights, uniform_grid};
use crate::spectral::{SpectralFrame, SpectralTrajectory};

pub const NORM_TOL: f64 = 1e-10;
/// Target `dt·max‖H‖` when no step is given.
pub const DEFAULT_STEP_SCALE: f64 = 0.05;
/// Sample count used to estimate `max‖H‖`.
pub const NORM_SAMPLES: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    /// Accepts `amplitudes` when `|‖ψ‖ − 1| ≤ 1e-10`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !((n - 1.0).abs() <= NORM_TOL) {
            return Err(Error::NonNormalizedInput { norm: n });
        }
        Ok(Self(amplitudes))
    }

    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NonNormalizedInput { norm: n });
        }
        for a in amplitudes.iter_mut() {
            *a /= n;
        }
        Ok(Self(amplitudes))
    }

    pub fn basis(dim: usize, n: usize) -> Self {
        let mut v = alloc::vec![ZERO; dim];
        v[n] = C64::new(1.0, 0.0);
        Self(v)
    }

    /// The `n`-th instantaneous eigenstate of a frame.
    pub fn eigenstate(frame: &SpectralFrame, n: usize) -> Self {
        Self(frame.vector(n))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorOptions {
    /// Requested step. `None` picks `0.05 / max‖H‖`.
    pub dt: Option<f64>,
    /// Repeat the run at `dt/2` and fail if the two disagree.
    pub refinement: bool,
    pub unitarity_tol: f64,
    /// Keep every `record_every`-th step on the output grid.
    pub record_every: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self {
            dt: None,
            refinement: false,
            unitarity_tol: 1e-10,
            record_every: 1,
        }
    }
}

impl PropagatorOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt: Some(dt),
            ..Self::default()
        }
    }

    pub fn refined(mut self, on: bool) -> Self {
        self.refinement = on;
        self
    }
}

/// Step layout derived from the options: `steps` equal steps of length `dt`
/// covering `[0, T]`, so the step divides the horizon exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPlan {
    pub steps: usize,
    pub dt: f64,
    pub record_every: usize,
    /// `max‖H‖` over the sampled domain.
    pub norm_scale: f64,
}

impl StepPlan {
    pub fn new(h: &TimeDependentHamiltonian, opts: &PropagatorOptions) -> Result<Self> {
        let horizon = h.horizon();
        let norm_scale = h.max_norm(NORM_SAMPLES)?;
        let requested = match opts.dt {
            Some(dt) if dt > 0.0 && dt.is_finite() => dt,
            Some(dt) => {
                return Err(Error::InvalidParameter(alloc::format!(
                    "time step must be positive, got {dt}"
                )))
            }
            None if norm_scale > 0.0 => DEFAULT_STEP_SCALE / norm_scale,
            None => horizon,
        };
        let record_every = opts.record_every.max(1);
        let raw = (horizon / requested - 1e-9).ceil().max(1.0) as usize;
        // at least two recorded intervals so the output grid has three nodes
        let steps = round_up(raw.max(2 * record_every), record_every);
        Ok(Self {
            steps,
            dt: horizon / steps as f64,
            record_every,
            norm_scale,
        })
    }

    pub fn halved(&self) -> Self {
        Self {
            steps: 2 * self.steps,
            dt: 0.5 * self.dt,
            record_every: 2 * self.record_every,
            norm_scale: self.norm_scale,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let horizon = self.dt * self.steps as f64;
        uniform_grid(0.0, horizon, self.steps / self.record_every)
    }

    fn step_time(&self, k: usize) -> f64 {
        self.dt * k as f64
    }

    /// Largest final-state disagreement tolerated by the refinement check:
    /// `10·(dt·max‖H‖)²`.
    pub fn refinement_allowance(&self) -> f64 {
        let x = self.dt * self.norm_scale.max(f64::MIN_POSITIVE);
        10.0 * x * x
    }
}

fn round_up(n: usize, m: usize) -> usize {
    n.div_ceil(m) * m
}

fn step_operator(h: &TimeDependentHamiltonian, plan: &StepPlan, k: usize) -> Result<CMatrix> {
    let mid = plan.step_time(k) + 0.5 * plan.dt;
    unitary_step(h.evaluate(mid)?.matrix(), plan.dt)
}

/// Raw state trajectory on the recorded grid.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub grid: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub plan: StepPlan,
    /// Richardson estimate from the refinement run, when one was made.
    pub refinement_estimate: Option<f64>,
}

impl Propagation {
    pub fn final_state(&self) -> &[C64] {
        &self.states[self.states.len() - 1]
    }

    /// `max_k |‖ψ(t_k)‖ − 1|`.
    pub fn norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (norm(s) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn run_states(h: &TimeDependentHamiltonian, psi0: &[C64], plan: &StepPlan) -> Result<Propagation> {
    let mut psi = psi0.to_vec();
    let mut states = Vec::with_capacity(plan.steps / plan.record_every + 1);
    states.push(psi.clone());
    for k in 0..plan.steps {
        psi = step_operator(h, plan, k)?.mul_vec(&psi);
        if (k + 1) % plan.record_every == 0 {
            states.push(psi.clone());
        }
    }
    Ok(Propagation {
        grid: plan.grid(),
        states,
        plan: *plan,
        refinement_estimate: None,
    })
}

/// Integrates `i dψ/dt = H(t) ψ` from `psi0` over `[0, T]`.
pub fn evolve(
    h: &TimeDependentHamiltonian,
    psi0: &StateVector,
    opts: &PropagatorOptions,
) -> Result<Propagation> {
    if psi0.dim() != h.dim() {
        return Err(Error::ShapeMismatch {
            expected: h.dim(),
            found: psi0.dim(),
        });
    }
    StateVector::new(psi0.amplitudes().to_vec())?;
    let plan = StepPlan::new(h, opts)?;
    let mut out = run_states(h, psi0.amplitudes(), &plan)?;
    if opts.refinement {
        let fine = run_states(h, psi0.amplitudes(), &plan.halved())?;
        let diff: Vec<C64> = out
            .final_state()
            .iter()
            .zip(fine.final_state())
            .map(|(a, b)| a - b)
            .collect();
        let estimate = refinement_check(norm(&diff), &plan)?;
        out.refinement_estimate = Some(estimate);
    }
    Ok(out)
}

// Richardson: for a second-order method the coarse error is ≈ 4/3 of the
// coarse–fine difference.
pub(crate) fn refinement_check(difference: f64, plan: &StepPlan) -> Result<f64> {
    let estimate = difference * 4.0 / 3.0;
    let allowed = plan.refinement_allowance();
    if !(estimate <= allowed) {
        return Err(Error::StepTooCoarse { estimate, allowed });
    }
    Ok(estimate)
}

/// Accumulated evolution operators `U(t_k)` on the recorded grid.
pub fn evolution_operator_trajectory(
    h: &TimeDependentHamiltonian,
    plan: &StepPlan,
) -> Result<(Vec<f64>, Vec<CMatrix>)> {
    let mut u = CMatrix::identity(h.dim());
    let mut out = Vec::with_capacity(plan.steps / plan.record_every + 1);
    out.push(u.clone());
    for k in 0..plan.steps {
        u = step_operator(h, plan, k)?.matmul(&u);
        if (k + 1) % plan.record_every == 0 {
            out.push(u.clone());
        }
    }
    Ok((plan.grid(), out))
}

/// `U(T)` with `U(0) = I`.
pub fn evolution_operator(h: &TimeDependentHamiltonian, opts: &PropagatorOptions) -> Result<CMatrix> {
    let plan = StepPlan::new(h, opts)?;
    let coarse = final_operator(h, &plan)?;
    if opts.refinement {
        let fine = final_operator(h, &plan.halved())?;
        // spectral-norm proxy: Frobenius norm over sqrt(dim) columns
        let diff = coarse.sub(&fine).frobenius_norm() / (h.dim() as f64).sqrt();
        refinement_check(diff, &plan)?;
    }
    Ok(coarse)
}

pub(crate) fn final_operator(h: &TimeDependentHamiltonian, plan: &StepPlan) -> Result<CMatrix> {
    let mut u = CMatrix::identity(h.dim());
    for k in 0..plan.steps {
        u = step_operator(h, plan, k)?.matmul(&u);
    }
    Ok(u)
}

/// `a_m(t_k) = ⟨v_m(t_k)|ψ(t_k)⟩` in the trajectory's gauge.
pub fn amplitudes_in_instantaneous_basis(
    prop: &Propagation,
    traj: &SpectralTrajectory,
) -> Result<Vec<Vec<C64>>> {
    if !grids_match(&prop.grid, traj.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(prop
        .states
        .iter()
        .zip(traj.frames())
        .map(|(psi, frame)| frame.eigenvectors.adjoint().mul_vec(psi))
        .collect())
}

pub(crate) fn grids_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()))
        })
}

/// Populations of the instantaneous levels along a run.
#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub grid: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    /// `amplitudes[k][m] = a_m(t_k)`.
    pub amplitudes: Vec<Vec<C64>>,
    /// `populations[k][m] = |a_m(t_k)|²`.
    pub populations: Vec<Vec<f64>>,
    pub tracked_level: usize,
    /// `P_n(T)` for the tracked level.
    pub final_fidelity: f64,
}

impl EvolutionResult {
    pub fn new(prop: Propagation, traj: &SpectralTrajectory, tracked_level: usize) -> Result<Self> {
        if tracked_level >= traj.dim() {
            return Err(Error::InvalidParameter(alloc::format!(
                "tracked level {tracked_level} out of range for dimension {}",
                traj.dim()
            )));
        }
        let amplitudes = amplitudes_in_instantaneous_basis(&prop, traj)?;
        let populations: Vec<Vec<f64>> = amplitudes
            .iter()
            .map(|a| a.iter().map(|x| x.norm_sqr()).collect())
            .collect();
        let final_fidelity = populations[populations.len() - 1][tracked_level].clamp(0.0, 1.0);
        Ok(Self {
            grid: prop.grid,
            states: prop.states,
            amplitudes,
            populations,
            tracked_level,
            final_fidelity,
        })
    }

    pub fn population_series(&self, n: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[n]).collect()
    }

    /// `max_k |Σ_n P_n(t_k) − 1|`.
    pub fn population_sum_drift(&self) -> f64 {
        self.populations
            .iter()
            .map(|p| (p.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `|⟨E_n(T)|ψ(T)⟩|²`.
pub fn fidelity(final_frame: &SpectralFrame, psi: &[C64], n: usize) -> f64 {
    inner(&final_frame.vector(n), psi).norm_sqr()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShortTimeDeparture {
    /// `1 − |⟨ψ₀|ψ(t)⟩|²` from propagation.
    pub p_exact: f64,
    /// `(ΔH̄)²·t²`.
    pub p_predicted: f64,
    /// Energy spread of the time-averaged Hamiltonian in `ψ₀`.
    pub delta_h_bar: f64,
    /// Set when `t·ΔH̄ ≥ 0.1`, where the quadratic law is not expected to
    /// hold.
    pub outside_regime: bool,
}

pub const SHORT_TIME_PANELS: usize = 64;

/// Compares the exact probability of leaving `psi0` by time `t` with the
/// first-order prediction `(ΔH̄)²t²`, `H̄ = (1/t)∫₀ᵗ H`.
pub fn short_time_departure(
    h: &TimeDependentHamiltonian,
    psi0: &StateVector,
    t: f64,
) -> Result<ShortTimeDeparture> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "departure time must be positive, got {t}"
        )));
    }
    if t > h.horizon() * (1.0 + 1e-12) {
        return Err(Error::TimeOutOfDomain {
            t,
            horizon: h.horizon(),
        });
    }
    if psi0.dim() != h.dim() {
        return Err(Error::ShapeMismatch {
            expected: h.dim(),
            found: psi0.dim(),
        });
    }
    let psi0 = StateVector::new(psi0.amplitudes().to_vec())?;
    let phi = psi0.amplitudes();

    let nodes = uniform_grid(0.0, t, SHORT_TIME_PANELS);
    let weights = simpson_weights(&nodes);
    let mut h_bar = CMatrix::zeros(h.dim());
    for (s, w) in nodes.iter().zip(&weights) {
        h_bar.axpy(C64::new(w / t, 0.0), h.evaluate(*s)?.matrix());
    }
    let mean = inner(phi, &h_bar.mul_vec(phi)).re;
    // ‖(H̄ − ⟨H̄⟩)ψ₀‖² avoids cancelling ⟨H̄²⟩ against ⟨H̄⟩²
    let spread: Vec<C64> = h_bar
        .mul_vec(phi)
        .iter()
        .zip(phi)
        .map(|(a, b)| a - b * mean)
        .collect();
    let variance = norm(&spread).powi(2);
    let delta_h_bar = variance.sqrt();

    let steps = SHORT_TIME_PANELS;
    let dt = t / steps as f64;
    let mut psi = phi.to_vec();
    for k in 0..steps {
        let mid = (k as f64 + 0.5) * dt;
        psi = unitary_step(h.evaluate(mid)?.matrix(), dt)?.mul_vec(&psi);
    }
    let overlap = inner(phi, &psi);
    let orthogonal: Vec<C64> = psi.iter().zip(phi).map(|(a, b)| a - b * overlap).collect();
    let p_exact = norm(&orthogonal).powi(2);

    Ok(ShortTimeDeparture {
        p_exact,
        p_predicted: variance * t * t,
        delta_h_bar,
        outside_regime: t * delta_h_bar >= 0.1,
    })
}
