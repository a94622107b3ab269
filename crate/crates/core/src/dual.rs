//! Companion system `H_B(t) = −U_A†(t) H_A(t) U_A(t)`.
//!
//! `U_A` is the numerically accumulated evolution operator of `H_A`. Between
//! step nodes it is advanced by a single midpoint substep, so `H_B` can be
//! evaluated anywhere in `[0, T]`. Its exact derivative is
//! `−U_A† Ḣ_A U_A`, the commutator terms cancelling.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianKind, HamiltonianModel, TimeDependentHamiltonian};
use crate::linalg::{hermitian_eigen, inner, unitary_step, CMatrix, C64, I};
use crate::propagate::{
    evolution_operator, evolution_operator_trajectory, final_operator, refinement_check,
    PropagatorOptions, StepPlan,
};
use crate::quadrature::{simpson, uniform_grid};
use crate::spectral::{frame_from_matrix, parallel_transport, SpectralOptions};

struct DualModel {
    h_a: TimeDependentHamiltonian,
    dt: f64,
    steps: usize,
    u: Arc<Vec<CMatrix>>,
}

impl DualModel {
    fn operator_at(&self, t: f64) -> CMatrix {
        let t = t.clamp(0.0, self.dt * self.steps as f64);
        let k = ((t / self.dt).floor() as usize).min(self.steps);
        let s = t - self.dt * k as f64;
        if s <= 0.0 || k == self.steps {
            return self.u[k].clone();
        }
        let mid = self.h_a.model().matrix_at(self.dt * k as f64 + 0.5 * s);
        match unitary_step(&mid, s) {
            Ok(step) => step.matmul(&self.u[k]),
            Err(_) => CMatrix::from_fn(self.u[k].dim(), |_, _| C64::new(f64::NAN, f64::NAN)),
        }
    }

    fn conjugate(&self, m: &CMatrix, t: f64) -> CMatrix {
        let u = self.operator_at(t);
        u.adjoint_matmul(&m.matmul(&u)).scale_real(-1.0)
    }
}

impl HamiltonianModel for DualModel {
    fn dim(&self) -> usize {
        self.h_a.dim()
    }

    fn kind(&self) -> HamiltonianKind {
        HamiltonianKind::DualDerived
    }

    fn matrix_at(&self, t: f64) -> CMatrix {
        self.conjugate(&self.h_a.model().matrix_at(t), t)
    }

    fn derivative_at(&self, t: f64) -> Option<CMatrix> {
        let d = self.h_a.model().derivative_at(t)?;
        Some(self.conjugate(&d, t))
    }
}

/// `H_A`, its accumulated evolution operator and the derived `H_B`.
#[derive(Clone, Debug)]
pub struct DualSystem {
    pub h_a: TimeDependentHamiltonian,
    pub h_b: TimeDependentHamiltonian,
    /// Step layout of the run that produced `U_A`; `grid()` is the recorded
    /// output grid.
    pub plan: StepPlan,
    /// `pairing[n]` is the level of `B` paired with level `n` of `A`
    /// (ascending order on both sides).
    pub pairing: Vec<usize>,
    model: Arc<DualModel>,
}

impl core::fmt::Debug for DualModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DualModel")
            .field("steps", &self.steps)
            .field("dt", &self.dt)
            .finish()
    }
}

impl DualSystem {
    /// `U_A(t)`, exact at step nodes and one midpoint substep away elsewhere.
    pub fn u_a(&self, t: f64) -> CMatrix {
        self.model.operator_at(t)
    }

    /// `U_A(T)`.
    pub fn u_a_final(&self) -> &CMatrix {
        let u = &self.model.u;
        &u[u.len() - 1]
    }

    /// Recorded output grid.
    pub fn grid(&self) -> Vec<f64> {
        self.plan.grid()
    }
}

/// Propagates `h_a` and wraps the result as the companion Hamiltonian.
///
/// With `opts.refinement` the accumulated operator is compared against a
/// halved-step run first.
pub fn build_dual(h_a: &TimeDependentHamiltonian, opts: &PropagatorOptions) -> Result<DualSystem> {
    let plan = StepPlan::new(h_a, opts)?;
    let fine_plan = StepPlan {
        record_every: 1,
        ..plan
    };
    let (_, u) = evolution_operator_trajectory(h_a, &fine_plan)?;
    if opts.refinement {
        let fine = final_operator(h_a, &fine_plan.halved())?;
        let diff = u[u.len() - 1].sub(&fine).frobenius_norm() / (h_a.dim() as f64).sqrt();
        refinement_check(diff, &plan)?;
    }
    let model = Arc::new(DualModel {
        h_a: h_a.clone(),
        dt: plan.dt,
        steps: plan.steps,
        u: Arc::new(u),
    });
    let h_b = TimeDependentHamiltonian::from_arc(model.clone(), h_a.horizon())?
        .with_fd_step(h_a.fd_step())?
        .with_hermiticity_tol(h_a.hermiticity_tol());
    let dim = h_a.dim();
    Ok(DualSystem {
        h_a: h_a.clone(),
        h_b,
        plan,
        pairing: (0..dim).map(|n| dim - 1 - n).collect(),
        model,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumStateResiduals {
    /// `max |E_A,n + E_B,pair(n)|`.
    pub spectrum: f64,
    /// `max 1 − |⟨E_B,pair(n)| U_A† |E_A,n⟩|`.
    pub states: f64,
}

pub fn verify_spectrum_and_states(dual: &DualSystem, grid: &[f64]) -> Result<SpectrumStateResiduals> {
    let opts = SpectralOptions::default();
    let mut out = SpectrumStateResiduals {
        spectrum: 0.0,
        states: 0.0,
    };
    for &t in grid {
        let fa = frame_from_matrix(dual.h_a.evaluate(t)?.matrix(), t, &opts)?;
        let fb = frame_from_matrix(dual.h_b.evaluate(t)?.matrix(), t, &opts)?;
        let u = dual.u_a(t);
        for (n, &m) in dual.pairing.iter().enumerate() {
            out.spectrum = out
                .spectrum
                .max((fa.eigenvalues[n] + fb.eigenvalues[m]).abs());
            let mapped = u.adjoint().mul_vec(&fa.vector(n));
            let overlap = inner(&fb.vector(m), &mapped).norm();
            out.states = out.states.max((1.0 - overlap).abs());
        }
    }
    Ok(out)
}

/// `‖U_B(T)·U_A(T) − I‖_F`, with `U_B` propagated under `opts`.
pub fn verify_evolution_inverse(dual: &DualSystem, opts: &PropagatorOptions) -> Result<f64> {
    let u_b = evolution_operator(&dual.h_b, opts)?;
    let product = u_b.matmul(dual.u_a_final());
    Ok(product.sub(&CMatrix::identity(dual.h_a.dim())).frobenius_norm())
}

// One-sided fourth-order first-derivative weights at offsets 0..=4.
const FORWARD5: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];

/// `max |⟨E_B,k|Ė_B,n⟩ − (i·E_A,n·δ_nk + ⟨E_A,k|Ė_A,n⟩)|` over the grid.
///
/// `A`'s eigenvectors are parallel-transported to those at each grid time;
/// `B`'s are their images `U_A†|E_A,n⟩`. Both derivatives are one-sided
/// fourth-order differences with step `dt/8`, taken towards the interior of
/// the propagation step so that `U_A` stays smooth across the stencil.
pub fn coupling_relation_check(dual: &DualSystem, grid: &[f64]) -> Result<f64> {
    let opts = SpectralOptions::default();
    let dim = dual.h_a.dim();
    let dt = dual.plan.dt;
    let h = dt / 8.0;
    let mut worst = 0.0f64;
    for &t in grid {
        let offset = t - dt * (t / dt).floor();
        let dir = if offset + 4.0 * h < dt && t + 4.0 * h <= dual.h_a.horizon() {
            1.0
        } else {
            -1.0
        };
        let base = frame_from_matrix(dual.h_a.evaluate(t)?.matrix(), t, &opts)?;
        let mut da = CMatrix::zeros(dim);
        let mut db = CMatrix::zeros(dim);
        let mut b0 = CMatrix::zeros(dim);
        for (j, w) in FORWARD5.iter().enumerate() {
            let tj = t + dir * h * j as f64;
            let mut vecs = if j == 0 {
                base.eigenvectors.clone()
            } else {
                frame_from_matrix(dual.h_a.evaluate(tj)?.matrix(), tj, &opts)?.eigenvectors
            };
            parallel_transport(&base.eigenvectors, &mut vecs);
            let mapped = dual.u_a(tj).adjoint_matmul(&vecs);
            if j == 0 {
                b0 = mapped.clone();
            }
            let scale = dir * w / h;
            da = da.add(&vecs.scale_real(scale));
            db = db.add(&mapped.scale_real(scale));
        }
        let lhs = b0.adjoint_matmul(&db);
        let rhs = base.eigenvectors.adjoint_matmul(&da);
        for k in 0..dim {
            for n in 0..dim {
                let mut r = rhs[(k, n)];
                if k == n {
                    r += I * base.eigenvalues[n];
                }
                worst = worst.max((lhs[(k, n)] - r).norm());
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseResidual {
    /// `∫₀ᵗ (E_n − E_k) dt'`.
    pub value: f64,
    pub nearest_q: i64,
    /// `|value − q·π|`.
    pub residual: f64,
}

/// Accumulated phase difference between levels `n` and `k` up to `t`,
/// measured against the nearest multiple of `π`. Diagnostic only.
pub fn pi_phase_residual(
    h_a: &TimeDependentHamiltonian,
    n: usize,
    k: usize,
    t: f64,
) -> Result<PhaseResidual> {
    let dim = h_a.dim();
    if n >= dim || k >= dim {
        return Err(Error::InvalidParameter(alloc::format!(
            "levels ({n}, {k}) out of range for dimension {dim}"
        )));
    }
    if !(t >= 0.0 && t <= h_a.horizon()) {
        return Err(Error::TimeOutOfDomain {
            t,
            horizon: h_a.horizon(),
        });
    }
    if t == 0.0 {
        return Ok(PhaseResidual {
            value: 0.0,
            nearest_q: 0,
            residual: 0.0,
        });
    }
    let scale = h_a.max_norm(64)?;
    let panels = ((20.0 * t * scale).ceil() as usize).max(256);
    let panels = panels + panels % 2;
    let grid = uniform_grid(0.0, t, panels);
    let gaps: Vec<f64> = grid
        .iter()
        .map(|&s| {
            let (e, _) = hermitian_eigen(h_a.evaluate(s)?.matrix());
            Ok(e[n] - e[k])
        })
        .collect::<Result<_>>()?;
    let value = simpson(&grid, &gaps);
    let q = (value / PI).round();
    Ok(PhaseResidual {
        value,
        nearest_q: q as i64,
        residual: (value - q * PI).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{AminScenario, ConstantHamiltonian, HermitianMatrix};

    fn constant(horizon: f64) -> TimeDependentHamiltonian {
        ConstantHamiltonian(HermitianMatrix::from_real_diagonal(&[-0.5, 0.5]))
            .over(horizon)
            .unwrap()
    }

    #[test]
    fn commuting_case_negates_h() {
        let dual = build_dual(&constant(3.0), &PropagatorOptions::with_dt(0.01)).unwrap();
        for t in [0.0, 0.37, 1.5, 3.0] {
            let hb = dual.h_b.evaluate(t).unwrap();
            let expected = CMatrix::from_real_diagonal(&[0.5, -0.5]);
            let diff = hb.matrix().sub(&expected).max_abs();
            assert!(diff < 1e-12, "{diff}");
        }
        let r = verify_spectrum_and_states(&dual, &dual.grid()).unwrap();
        assert!(r.spectrum < 1e-12 && r.states < 1e-12, "{r:?}");
        let inv = verify_evolution_inverse(&dual, &PropagatorOptions::with_dt(0.01)).unwrap();
        assert!(inv < 1e-10, "{inv}");
        assert_eq!(dual.pairing, [1, 0]);
        assert_eq!(dual.h_b.kind(), HamiltonianKind::DualDerived);
    }

    #[test]
    fn commuting_case_coupling_relation() {
        let dual = build_dual(&constant(3.0), &PropagatorOptions::with_dt(0.01)).unwrap();
        let r = coupling_relation_check(&dual, &dual.grid()).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn amin_dual_residuals() {
        let h = AminScenario::new(1.0, 0.05, 1.0).unwrap().over(10.0).unwrap();
        let opts = PropagatorOptions::with_dt(1e-3);
        let dual = build_dual(&h, &opts).unwrap();
        let grid = dual.grid();
        let r = verify_spectrum_and_states(&dual, &grid).unwrap();
        assert!(r.spectrum < 1e-8 && r.states < 1e-7, "{r:?}");
        let inv = verify_evolution_inverse(&dual, &opts).unwrap();
        assert!(inv < 1e-5, "{inv}");
        let c = coupling_relation_check(&dual, &grid).unwrap();
        assert!(c < 1e-5, "{c}");
        for k in 0..50 {
            let t = 10.0 * (k as f64 + 0.5) / 50.0;
            assert!(dual.h_b.model().matrix_at(t).hermiticity_residual() < 1e-10);
        }
    }

    #[test]
    fn off_node_evaluation_is_consistent() {
        let h = AminScenario::new(1.0, 0.3, 2.0).unwrap().over(2.0).unwrap();
        let dual = build_dual(&h, &PropagatorOptions::with_dt(0.01)).unwrap();
        let fine = build_dual(&h, &PropagatorOptions::with_dt(0.0005)).unwrap();
        let t = 1.2345;
        let diff = dual.u_a(t).sub(&fine.u_a(t)).max_abs();
        assert!(diff < 1e-4, "{diff}");
        assert!(dual.u_a(t).unitarity_residual() < 1e-12);
    }

    #[test]
    fn dual_of_dual_restores_spectrum() {
        let h = AminScenario::new(1.0, 0.2, 0.7).unwrap().over(4.0).unwrap();
        let opts = PropagatorOptions::with_dt(0.01);
        let dual = build_dual(&h, &opts).unwrap();
        let twice = build_dual(&dual.h_b, &opts).unwrap();
        for t in dual.grid() {
            let (ea, _) = hermitian_eigen(h.evaluate(t).unwrap().matrix());
            let (ebb, _) = hermitian_eigen(twice.h_b.evaluate(t).unwrap().matrix());
            for (x, y) in ea.iter().zip(&ebb) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn phase_residual_constant_gap() {
        let h = ConstantHamiltonian(HermitianMatrix::from_real_diagonal(&[0.0, 1.0]))
            .over(4.0)
            .unwrap();
        let r = pi_phase_residual(&h, 1, 0, PI).unwrap();
        assert!((r.value - PI).abs() < 1e-12);
        assert_eq!(r.nearest_q, 1);
        assert!(r.residual < 1e-12);
        let r = pi_phase_residual(&h, 1, 0, 1.0).unwrap();
        assert_eq!(r.nearest_q, 0);
        assert!((r.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_residual_amin() {
        let s = AminScenario::new(1.0, 0.01, 1.0).unwrap();
        let h = s.over(100.0 * PI).unwrap();
        let r = pi_phase_residual(&h, 1, 0, 100.0 * PI).unwrap();
        assert_eq!(r.nearest_q, 100);
        assert!((r.value - 314.19).abs() < 0.01, "{}", r.value);
    }
}
