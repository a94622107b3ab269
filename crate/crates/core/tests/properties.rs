use adiacheck_core::conditions::{
    epsilon_nm, population_lower_bound, sufficient_quantity, traditional_ratio,
};
use adiacheck_core::hamiltonian::{AminScenario, LandauZener, RandomSmoothPath};
use adiacheck_core::propagate::{evolve, EvolutionResult, PropagatorOptions, StateVector};
use adiacheck_core::quadrature::uniform_grid;
use adiacheck_core::spectral::{decompose, frame_at, realign_gauge, SpectralOptions};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn random_paths_are_hermitian(seed in any::<u64>(), dim in 1usize..5, t in 0.0f64..20.0) {
        let h = RandomSmoothPath::generate(dim, seed, 0.2).unwrap().over(20.0).unwrap();
        let m = h.evaluate(t).unwrap();
        prop_assert!(m.matrix().hermiticity_residual() <= 1e-12);
    }

    #[test]
    fn analytic_derivative_matches_finite_difference(seed in any::<u64>()) {
        let h = RandomSmoothPath::generate(3, seed, 0.2).unwrap().over(10.0).unwrap();
        for k in 0..100 {
            let t = 10.0 * (k as f64 + 0.5) / 100.0;
            let exact = h.derivative(t).unwrap();
            let fd = h.finite_difference_derivative(t).unwrap();
            let scale = exact.matrix().max_abs().max(1e-3);
            let err = exact.matrix().sub(fd.matrix()).max_abs() / scale;
            prop_assert!(err <= 1e-6, "t = {t}, relative error {err}");
        }
    }

    #[test]
    fn amin_derivative_matches_finite_difference(
        eps in 0.2f64..2.0, v in 0.01f64..0.5, w in 0.1f64..3.0, t in 0.0f64..10.0,
    ) {
        let h = AminScenario::new(eps, v, w).unwrap().over(10.0).unwrap();
        let exact = h.derivative(t).unwrap();
        let fd = h.finite_difference_derivative(t).unwrap();
        let err = exact.matrix().sub(fd.matrix()).max_abs();
        prop_assert!(err <= 1e-6 * (v * w).max(1e-3));
    }

    #[test]
    fn trajectory_invariants(seed in any::<u64>()) {
        let h = RandomSmoothPath::generate(3, seed, 0.2).unwrap().over(8.0).unwrap();
        let grid = uniform_grid(0.0, 8.0, 400);
        let mut traj = decompose(&h, &grid, &SpectralOptions::default()).unwrap();
        prop_assert!(traj.orthonormality_residual() <= 1e-12);
        prop_assert!(traj.anti_hermiticity_residual() <= 1e-10);
        prop_assert!(traj.gauge_residual() <= 1e-6);
        let before: Vec<_> = traj.frames().iter().map(|f| f.eigenvectors.clone()).collect();
        realign_gauge(traj.frames_mut());
        for (a, f) in before.iter().zip(traj.frames()) {
            prop_assert!(a.sub(&f.eigenvectors).max_abs() <= 1e-12);
        }
        let r = traditional_ratio(&traj);
        for s in &r.series {
            let mirror = r.series.iter().find(|o| o.pair == (s.pair.1, s.pair.0)).unwrap();
            for (x, y) in s.values.iter().zip(&mirror.values) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x));
            }
        }
    }

    #[test]
    fn norm_is_conserved(seed in any::<u64>(), dim in 2usize..5) {
        let h = RandomSmoothPath::generate(dim, seed, 0.2).unwrap().over(10.0).unwrap();
        let psi0 = StateVector::normalized(
            (0..dim).map(|k| adiacheck_core::linalg::C64::new(1.0 + k as f64, 0.5)).collect(),
        ).unwrap();
        let prop = evolve(&h, &psi0, &PropagatorOptions::with_dt(0.02)).unwrap();
        prop_assert!(prop.norm_drift() <= 1e-10);
    }

    #[test]
    fn landau_zener_norm_and_identity(v in 0.5f64..4.0, delta in 0.2f64..1.0) {
        let h = LandauZener::centered(v, delta, 12.0).unwrap();
        let frame0 = frame_at(&h, 0.0, &SpectralOptions::default()).unwrap();
        let prop = evolve(&h, &StateVector::eigenstate(&frame0, 0), &PropagatorOptions::with_dt(2e-3)).unwrap();
        prop_assert!(prop.norm_drift() <= 1e-10);
        let traj = decompose(&h, &prop.grid, &SpectralOptions::default()).unwrap();
        let res = EvolutionResult::new(prop, &traj, 0).unwrap();
        let eps = epsilon_nm(&res, &traj, 0, 1).unwrap();
        prop_assert!((res.final_fidelity - (1.0 - 2.0 * eps)).abs() <= 1e-6);
    }
}

fn run_random(seed: u64, coupling: f64, horizon: f64, dim: usize) -> (f64, f64, f64, f64) {
    let h = RandomSmoothPath::generate(dim, seed, coupling)
        .unwrap()
        .over(horizon)
        .unwrap();
    let frame0 = frame_at(&h, 0.0, &SpectralOptions::default()).unwrap();
    let prop = evolve(
        &h,
        &StateVector::eigenstate(&frame0, 0),
        &PropagatorOptions::with_dt(0.01),
    )
    .unwrap();
    let traj = decompose(&h, &prop.grid, &SpectralOptions::default()).unwrap();
    let res = EvolutionResult::new(prop, &traj, 0).unwrap();
    let bound = population_lower_bound(&traj, 0).unwrap();
    let eps: f64 = (1..dim).map(|m| epsilon_nm(&res, &traj, 0, m).unwrap()).sum();
    (res.final_fidelity, bound.tight, bound.coarse, 1.0 - 2.0 * eps)
}

#[test]
fn population_identity_over_seeds() {
    for seed in 0..20 {
        let (p, _, _, identity) = run_random(seed, 0.15, 6.0, 3);
        assert!((p - identity).abs() <= 1e-6, "seed {seed}: {p} vs {identity}");
    }
}

#[test]
fn bound_chain_over_seeds() {
    for seed in 0..50 {
        let (p, b, bc, _) = run_random(1000 + seed, 0.05, 5.0, 3);
        assert!(p >= b - 1e-6, "seed {seed}: P = {p} < B = {b}");
        assert!(b >= bc - 1e-6, "seed {seed}: B = {b} < B_coarse = {bc}");
    }
}

// Running H(t/2) on [0, 2T] halves every coupling and keeps the gaps, so
// pointwise ratios halve while 2·T·max|χ| is unchanged.
#[test]
fn time_stretch_scales_ratio_not_sufficient_quantity() {
    let h = RandomSmoothPath::generate(3, 7, 0.2).unwrap().over(6.0).unwrap();
    let slow = h.time_stretched(2.0).unwrap();
    let opts = SpectralOptions::default();
    let a = decompose(&h, &uniform_grid(0.0, 6.0, 600), &opts).unwrap();
    let b = decompose(&slow, &uniform_grid(0.0, 12.0, 600), &opts).unwrap();
    let ra = traditional_ratio(&a).max.value;
    let rb = traditional_ratio(&b).max.value;
    assert!((rb / ra - 0.5).abs() <= 1e-9, "{ra} {rb}");
    let sa = sufficient_quantity(&a, 0).unwrap().total;
    let sb = sufficient_quantity(&b, 0).unwrap().total;
    assert!((sb / sa - 1.0).abs() <= 1e-9, "{sa} {sb}");
}
