//! Adiabaticity criteria evaluated on a spectral trajectory and a run.
//!
//! * the pointwise ratio `r_nm(t) = |χ_nm| / |E_m − E_n|`;
//! * the cumulative quantity `S = Σ_{m≠n} 2·T·max|χ_nm|` and the population
//!   bounds `P_n(T) ≥ B ≥ B_coarse = 1 − S`;
//! * energy–time scales `1/|E_m − E_n|` and `π/|mean(E_n − E_m)|`;
//! * the transition integrals `ε_nm` and a resonance diagnostic.
//!
//! Every "much less than one" comparison goes through [`Thresholds`], which
//! are carried into the [`Verdict`].

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::AminScenario;
use crate::linalg::C64;
use crate::propagate::{grids_match, EvolutionResult};
use crate::quadrature::{cumulative_trapezoid, simpson, simpson_weights};
use crate::signal::{analytic_signal, gradient, median, unwrap_phase};
use crate::spectral::SpectralTrajectory;

/// Location of a series maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesMax {
    pub value: f64,
    pub t: f64,
    pub index: usize,
    pub pair: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairSeries {
    pub pair: (usize, usize),
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraditionalRatio {
    /// One series per ordered pair `n ≠ m`, lexicographic order.
    pub series: Vec<PairSeries>,
    pub max: SeriesMax,
}

/// `r_nm(t) = |χ_nm(t)| / |E_m(t) − E_n(t)|` for every ordered pair.
pub fn traditional_ratio(traj: &SpectralTrajectory) -> TraditionalRatio {
    let dim = traj.dim();
    let grid = traj.grid();
    let mut series = Vec::new();
    let mut max = SeriesMax {
        value: 0.0,
        t: grid[0],
        index: 0,
        pair: (0, if dim > 1 { 1 } else { 0 }),
    };
    for n in 0..dim {
        for m in 0..dim {
            if n == m {
                continue;
            }
            let values: Vec<f64> = traj
                .frames()
                .iter()
                .zip(traj.couplings())
                .map(|(f, c)| c[(n, m)].norm() / (f.eigenvalues[m] - f.eigenvalues[n]).abs())
                .collect();
            for (k, v) in values.iter().enumerate() {
                if *v > max.value {
                    max = SeriesMax {
                        value: *v,
                        t: grid[k],
                        index: k,
                        pair: (n, m),
                    };
                }
            }
            series.push(PairSeries {
                pair: (n, m),
                values,
            });
        }
    }
    TraditionalRatio { series, max }
}

fn check_level(traj: &SpectralTrajectory, n: usize) -> Result<()> {
    if n >= traj.dim() {
        return Err(Error::InvalidParameter(alloc::format!(
            "level {n} out of range for dimension {}",
            traj.dim()
        )));
    }
    Ok(())
}

fn max_coupling(traj: &SpectralTrajectory, n: usize, m: usize) -> SeriesMax {
    let grid = traj.grid();
    let mut best = SeriesMax {
        value: 0.0,
        t: grid[0],
        index: 0,
        pair: (n, m),
    };
    for (k, c) in traj.couplings().iter().enumerate() {
        let v = c[(n, m)].norm();
        if v > best.value {
            best = SeriesMax {
                value: v,
                t: grid[k],
                index: k,
                pair: (n, m),
            };
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct SufficientTerm {
    pub m: usize,
    pub max_coupling: SeriesMax,
    /// `2·T·max_t |χ_nm|`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SufficientQuantity {
    pub level: usize,
    pub terms: Vec<SufficientTerm>,
    pub total: f64,
}

pub fn sufficient_quantity(traj: &SpectralTrajectory, n: usize) -> Result<SufficientQuantity> {
    check_level(traj, n)?;
    let horizon = traj.horizon();
    let terms: Vec<SufficientTerm> = (0..traj.dim())
        .filter(|&m| m != n)
        .map(|m| {
            let max_coupling = max_coupling(traj, n, m);
            SufficientTerm {
                m,
                value: 2.0 * horizon * max_coupling.value,
                max_coupling,
            }
        })
        .collect();
    let total = terms.iter().map(|t| t.value).sum();
    Ok(SufficientQuantity {
        level: n,
        terms,
        total,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationBound {
    /// `1 − 2·Σ_{m≠n} ∫|χ_nm| dt`.
    pub tight: f64,
    /// `1 − 2·Σ_{m≠n} T·max|χ_nm|`.
    pub coarse: f64,
}

/// Lower bounds on `P_n(T)` for a run started in level `n`. Both may be
/// negative, in which case they are vacuous.
pub fn population_lower_bound(traj: &SpectralTrajectory, n: usize) -> Result<PopulationBound> {
    check_level(traj, n)?;
    let grid = traj.grid();
    let weights = simpson_weights(grid);
    let horizon = traj.horizon();
    let mut integral = 0.0;
    let mut worst = 0.0;
    for m in (0..traj.dim()).filter(|&m| m != n) {
        integral += traj
            .couplings()
            .iter()
            .zip(&weights)
            .map(|(c, w)| w * c[(n, m)].norm())
            .sum::<f64>();
        worst += horizon * max_coupling(traj, n, m).value;
    }
    Ok(PopulationBound {
        tight: 1.0 - 2.0 * integral,
        coarse: 1.0 - 2.0 * worst,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeetPair {
    pub pair: (usize, usize),
    /// `1 / |E_m(t) − E_n(t)|`.
    pub series: Vec<f64>,
    /// `(1/T)∫(E_n − E_m) dt`.
    pub mean_gap: f64,
    /// `π / |mean gap|`.
    pub least_evolution_time: f64,
    /// Time average of the series.
    pub mean_leet: f64,
    /// `T / mean_leet`: how many such intervals fit in the run.
    pub count: f64,
}

/// Energy–time scales for every unordered pair `n < m`.
pub fn leet(traj: &SpectralTrajectory) -> Result<Vec<LeetPair>> {
    let grid = traj.grid();
    let horizon = traj.horizon();
    let dim = traj.dim();
    let mut out = Vec::new();
    for n in 0..dim {
        for m in (n + 1)..dim {
            let gaps: Vec<f64> = traj
                .frames()
                .iter()
                .map(|f| f.eigenvalues[n] - f.eigenvalues[m])
                .collect();
            if let Some(k) = gaps.iter().position(|g| *g == 0.0) {
                return Err(Error::DegenerateSpectrum {
                    t: grid[k],
                    gap: 0.0,
                    floor: 0.0,
                });
            }
            let series: Vec<f64> = gaps.iter().map(|g| 1.0 / g.abs()).collect();
            let mean_gap = simpson(grid, &gaps) / horizon;
            let mean_leet = simpson(grid, &series) / horizon;
            out.push(LeetPair {
                pair: (n, m),
                series,
                mean_gap,
                least_evolution_time: PI / mean_gap.abs(),
                mean_leet,
                count: horizon / mean_leet,
            });
        }
    }
    Ok(out)
}

/// `ε_nm = ∫₀ᵀ Re(conj(a_n)·a_m·χ_nm) dt`.
///
/// With this ordering `dP_n/dt = −2 Σ_m Re(conj(a_n) a_m χ_nm)`, so
/// `P_n(T) = P_n(0) − 2 Σ_{m≠n} ε_nm` holds exactly for the true dynamics.
pub fn epsilon_nm(
    result: &EvolutionResult,
    traj: &SpectralTrajectory,
    n: usize,
    m: usize,
) -> Result<f64> {
    check_level(traj, n)?;
    check_level(traj, m)?;
    if !grids_match(&result.grid, traj.grid()) {
        return Err(Error::GridMismatch);
    }
    let integrand: Vec<f64> = result
        .amplitudes
        .iter()
        .zip(traj.couplings())
        .map(|(a, c)| (a[n].conj() * a[m] * c[(n, m)]).re)
        .collect();
    Ok(simpson(traj.grid(), &integrand))
}

/// `−2 Σ_m Re(conj(a_n) a_m χ_nm)` at every grid point.
pub fn population_rate(result: &EvolutionResult, traj: &SpectralTrajectory, n: usize) -> Vec<f64> {
    result
        .amplitudes
        .iter()
        .zip(traj.couplings())
        .map(|(a, c)| {
            -2.0 * (0..a.len())
                .map(|m| (a[n].conj() * a[m] * c[(n, m)]).re)
                .sum::<f64>()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResonanceStatus {
    Resonant,
    OffResonant,
    Indeterminate,
}

impl ResonanceStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ResonanceStatus::Resonant => "resonant",
            ResonanceStatus::OffResonant => "off_resonant",
            ResonanceStatus::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resonance {
    pub pair: (usize, usize),
    /// Instantaneous phase rate of `χ_nm(t)`.
    pub omega: Vec<f64>,
    /// `ω_nm(t) = (1/t)∫₀ᵗ (E_n − E_m) dt'` (its limit at `t = 0`).
    pub omega_nm: Vec<f64>,
    /// True when `χ_nm` keeps a fixed phase up to sign, in which case
    /// `omega` is taken from its analytic signal and only rate magnitudes
    /// are compared.
    pub real_coupling: bool,
    pub median_detuning: f64,
    pub status: ResonanceStatus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonanceOptions {
    /// Relative tolerance on the median detuning.
    pub tolerance: f64,
    /// `|χ_nm|` at or below this carries no usable phase.
    pub phase_floor: f64,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self {
            tolerance: 0.1,
            phase_floor: 1e-12,
        }
    }
}

/// Compares the phase rate of `χ_nm` with the accumulated gap rate.
///
/// The transition integrand `conj(a_n) a_m χ_nm` carries the dynamical
/// phase `exp(i∫(E_n − E_m))`, so it stops oscillating when `χ_nm` rotates
/// at `−ω_nm`. A coupling with fixed phase (any real Hamiltonian) contains
/// both rotation senses and is compared by magnitude.
///
/// Assumes a uniform grid for the analytic-signal step.
pub fn resonance_diagnostics(
    traj: &SpectralTrajectory,
    n: usize,
    m: usize,
    opts: &ResonanceOptions,
) -> Result<Resonance> {
    check_level(traj, n)?;
    check_level(traj, m)?;
    if n == m {
        return Err(Error::InvalidParameter("resonance needs two distinct levels".into()));
    }
    let grid = traj.grid();
    let chi = traj.coupling_series(n, m);
    let above = chi.iter().filter(|c| c.norm() > opts.phase_floor).count();
    if 2 * above <= chi.len() {
        return Err(Error::PhaseUndefined { n, m });
    }

    let gaps: Vec<f64> = traj
        .frames()
        .iter()
        .map(|f| f.eigenvalues[n] - f.eigenvalues[m])
        .collect();
    let running = cumulative_trapezoid(grid, &gaps);
    let omega_nm: Vec<f64> = grid
        .iter()
        .zip(&running)
        .enumerate()
        .map(|(k, (t, acc))| {
            let elapsed = t - grid[0];
            if elapsed > 0.0 {
                acc / elapsed
            } else {
                gaps[k]
            }
        })
        .collect();

    let axis = dominant_axis(&chi);
    let spread: f64 = chi.iter().map(|c| (c * axis.conj()).im.abs()).sum::<f64>();
    let scale: f64 = chi.iter().map(|c| c.norm()).sum::<f64>();
    let real_coupling = spread <= 1e-6 * scale;

    let (omega, detuning): (Vec<f64>, Vec<f64>) = if real_coupling {
        let x: Vec<f64> = chi.iter().map(|c| (c * axis.conj()).re).collect();
        let z = analytic_signal(&x);
        let phase = unwrap_phase(&z.iter().map(|c| c.arg()).collect::<Vec<_>>());
        let omega = gradient(grid, &phase);
        let detuning = omega
            .iter()
            .zip(&omega_nm)
            .map(|(w, wn)| w.abs() - wn.abs())
            .collect();
        (omega, detuning)
    } else {
        let phase = unwrap_phase(&chi.iter().map(|c| c.arg()).collect::<Vec<_>>());
        let omega = gradient(grid, &phase);
        let detuning = omega.iter().zip(&omega_nm).map(|(w, wn)| w + wn).collect();
        (omega, detuning)
    };

    let abs_detuning: Vec<f64> = detuning.iter().map(|d: &f64| d.abs()).collect();
    let abs_rate: Vec<f64> = omega_nm.iter().map(|w| w.abs()).collect();
    let median_detuning = median(&abs_detuning);
    let status = if median_detuning <= opts.tolerance * median(&abs_rate) {
        ResonanceStatus::Resonant
    } else {
        ResonanceStatus::OffResonant
    };
    Ok(Resonance {
        pair: (n, m),
        omega,
        omega_nm,
        real_coupling,
        median_detuning,
        status,
    })
}

// Unit phase e^{iθ₀} maximising Σ Re(χ e^{−iθ₀})²; χ² removes the sign.
fn dominant_axis(chi: &[C64]) -> C64 {
    let sum: C64 = chi.iter().map(|c| c * c).sum();
    if sum.norm() == 0.0 {
        return C64::new(1.0, 0.0);
    }
    C64::from_polar(1.0, 0.5 * sum.arg())
}

/// Rotating-wave population of the ground level for the driven two-level
/// scenario near resonance: `(cos(V·t) + 1)/2`.
pub fn amin_analytic_p0(scenario: &AminScenario, t: f64) -> f64 {
    0.5 * ((scenario.v * t).cos() + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// Pass bound for `max r_nm`.
    pub eta_trad: f64,
    /// Pass bound for `S`.
    pub eta_suff: f64,
    /// Allowed `1 − P_n(T)` for a run to count as adiabatic.
    pub eta_fid: f64,
    pub resonance_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eta_trad: 0.1,
            eta_suff: 0.1,
            eta_fid: 0.01,
            resonance_tol: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    CertifiedAdiabatic,
    NecessaryOnlyViolation,
    ConsistentAdiabatic,
    NonAdiabatic,
    Other,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::CertifiedAdiabatic => "certified_adiabatic",
            Classification::NecessaryOnlyViolation => "necessary_only_violation",
            Classification::ConsistentAdiabatic => "consistent_adiabatic",
            Classification::NonAdiabatic => "non_adiabatic",
            Classification::Other => "other",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub traditional_pass: bool,
    pub sufficient_pass: bool,
    pub adiabatic_observed: bool,
    pub classification: Classification,
    pub thresholds: Thresholds,
}

pub fn verdict(
    max_ratio: f64,
    sufficient_total: f64,
    final_population: f64,
    thresholds: &Thresholds,
) -> Verdict {
    let traditional_pass = max_ratio <= thresholds.eta_trad;
    let sufficient_pass = sufficient_total <= thresholds.eta_suff;
    let adiabatic_observed = 1.0 - final_population <= thresholds.eta_fid;
    let classification = if sufficient_pass {
        Classification::CertifiedAdiabatic
    } else if traditional_pass && !adiabatic_observed {
        Classification::NecessaryOnlyViolation
    } else if traditional_pass && adiabatic_observed {
        Classification::ConsistentAdiabatic
    } else if !traditional_pass && !adiabatic_observed {
        Classification::NonAdiabatic
    } else {
        Classification::Other
    };
    Verdict {
        traditional_pass,
        sufficient_pass,
        adiabatic_observed,
        classification,
        thresholds: *thresholds,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonTerm {
    pub m: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceEntry {
    pub pair: (usize, usize),
    pub status: ResonanceStatus,
    /// Absent when the coupling phase is undefined.
    pub detail: Option<Resonance>,
}

/// Every criterion for one run, tracked level `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub tracked_level: usize,
    pub traditional: TraditionalRatio,
    pub sufficient: SufficientQuantity,
    pub bound: PopulationBound,
    pub leet: Vec<LeetPair>,
    pub epsilon: Vec<EpsilonTerm>,
    /// Pairs `(n, m)` for every `m ≠ n`.
    pub resonance: Vec<ResonanceEntry>,
    pub initial_population: f64,
    pub final_population: f64,
    /// `|P_n(T) − (P_n(0) − 2Σε_nm)|`.
    pub identity_residual: f64,
    pub verdict: Verdict,
}

pub fn analyze(
    traj: &SpectralTrajectory,
    result: &EvolutionResult,
    thresholds: &Thresholds,
) -> Result<ConditionReport> {
    let n = result.tracked_level;
    check_level(traj, n)?;
    if !grids_match(&result.grid, traj.grid()) {
        return Err(Error::GridMismatch);
    }
    let traditional = traditional_ratio(traj);
    let sufficient = sufficient_quantity(traj, n)?;
    let bound = population_lower_bound(traj, n)?;
    let leet = leet(traj)?;
    let epsilon: Vec<EpsilonTerm> = (0..traj.dim())
        .filter(|&m| m != n)
        .map(|m| epsilon_nm(result, traj, n, m).map(|value| EpsilonTerm { m, value }))
        .collect::<Result<_>>()?;
    let resonance_opts = ResonanceOptions {
        tolerance: thresholds.resonance_tol,
        ..ResonanceOptions::default()
    };
    let resonance = (0..traj.dim())
        .filter(|&m| m != n)
        .map(|m| match resonance_diagnostics(traj, n, m, &resonance_opts) {
            Ok(r) => Ok(ResonanceEntry {
                pair: (n, m),
                status: r.status,
                detail: Some(r),
            }),
            Err(Error::PhaseUndefined { .. }) => Ok(ResonanceEntry {
                pair: (n, m),
                status: ResonanceStatus::Indeterminate,
                detail: None,
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let initial_population = result.populations[0][n];
    let final_population = result.final_fidelity;
    let eps_sum: f64 = epsilon.iter().map(|e| e.value).sum();
    let identity_residual = (final_population - (initial_population - 2.0 * eps_sum)).abs();
    let verdict = verdict(
        traditional.max.value,
        sufficient.total,
        final_population,
        thresholds,
    );
    Ok(ConditionReport {
        tracked_level: n,
        traditional,
        sufficient,
        bound,
        leet,
        epsilon,
        resonance,
        initial_population,
        final_population,
        identity_residual,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{ConstantHamiltonian, HermitianMatrix, TimeDependentHamiltonian};
    use crate::propagate::{evolve, PropagatorOptions, StateVector};
    use crate::spectral::{decompose, SpectralOptions};

    fn run(h: &TimeDependentHamiltonian, level: usize, dt: f64) -> (SpectralTrajectory, EvolutionResult) {
        let psi0 = StateVector::basis(h.dim(), level);
        let prop = evolve(h, &psi0, &PropagatorOptions::with_dt(dt)).unwrap();
        let traj = decompose(h, &prop.grid, &SpectralOptions::default()).unwrap();
        let res = EvolutionResult::new(prop, &traj, level).unwrap();
        (traj, res)
    }

    fn constant_gap(gap: f64, horizon: f64) -> TimeDependentHamiltonian {
        ConstantHamiltonian(HermitianMatrix::from_real_diagonal(&[0.0, gap]))
            .over(horizon)
            .unwrap()
    }

    #[test]
    fn constant_h_is_trivially_adiabatic() {
        let h = constant_gap(1.0, 5.0);
        let (traj, res) = run(&h, 0, 0.05);
        let report = analyze(&traj, &res, &Thresholds::default()).unwrap();
        assert_eq!(report.traditional.max.value, 0.0);
        assert_eq!(report.sufficient.total, 0.0);
        assert_eq!(report.bound.tight, 1.0);
        assert_eq!(report.bound.coarse, 1.0);
        assert_eq!(report.epsilon[0].value, 0.0);
        assert_eq!(report.resonance[0].status, ResonanceStatus::Indeterminate);
        assert!((report.final_population - 1.0).abs() < 1e-14);
        assert_eq!(
            report.verdict.classification,
            Classification::CertifiedAdiabatic
        );
    }

    #[test]
    fn constant_gap_leet_values() {
        let h = constant_gap(2.0, 3.0);
        let (traj, _) = run(&h, 0, 0.05);
        let l = &leet(&traj).unwrap()[0];
        assert!(l.series.iter().all(|v| (v - 0.5).abs() < 1e-15));
        assert!((l.least_evolution_time - PI / 2.0).abs() < 1e-13);
        assert!((l.count - 6.0).abs() < 1e-12);
    }

    #[test]
    fn resonance_is_undefined_without_coupling() {
        let h = constant_gap(1.0, 2.0);
        let (traj, _) = run(&h, 0, 0.05);
        assert!(matches!(
            resonance_diagnostics(&traj, 0, 1, &ResonanceOptions::default()),
            Err(Error::PhaseUndefined { n: 0, m: 1 })
        ));
    }

    #[test]
    fn analytic_population_values() {
        let s = AminScenario::new(1.0, 0.01, 1.0).unwrap();
        assert_eq!(amin_analytic_p0(&s, 0.0), 1.0);
        assert!(amin_analytic_p0(&s, 100.0 * PI).abs() < 1e-15);
        assert!((amin_analytic_p0(&s, 50.0 * PI) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn verdict_classes() {
        let th = Thresholds::default();
        let c = |r, s, p| verdict(r, s, p, &th).classification;
        assert_eq!(c(0.01, 6.0, 0.0), Classification::NecessaryOnlyViolation);
        assert_eq!(c(0.01, 0.02, 0.99997), Classification::CertifiedAdiabatic);
        assert_eq!(c(0.05, 0.5, 0.999), Classification::ConsistentAdiabatic);
        assert_eq!(c(0.5, 5.0, 0.2), Classification::NonAdiabatic);
        assert_eq!(c(0.5, 5.0, 0.999), Classification::Other);
        assert_eq!(verdict(0.0, 0.0, 1.0, &th).thresholds, th);
    }

    #[test]
    fn ratio_is_symmetric_in_pair_order() {
        let h = AminScenario::new(1.0, 0.05, 0.7).unwrap().over(10.0).unwrap();
        let (traj, _) = run(&h, 0, 0.01);
        let r = traditional_ratio(&traj);
        let a = &r.series.iter().find(|s| s.pair == (0, 1)).unwrap().values;
        let b = &r.series.iter().find(|s| s.pair == (1, 0)).unwrap().values;
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    fn amin_run(omega0: f64, horizon: f64, dt: f64) -> (SpectralTrajectory, EvolutionResult) {
        let h = AminScenario::new(1.0, 0.01, omega0).unwrap().over(horizon).unwrap();
        run(&h, 0, dt)
    }

    #[test]
    fn resonance_flag_follows_driving_frequency() {
        let opts = ResonanceOptions::default();
        let (traj, _) = amin_run(1.0, 100.0, 0.01);
        let r = resonance_diagnostics(&traj, 0, 1, &opts).unwrap();
        assert!(r.real_coupling);
        assert_eq!(r.status, ResonanceStatus::Resonant);
        let (traj, _) = amin_run(0.3, 100.0, 0.01);
        let r = resonance_diagnostics(&traj, 0, 1, &opts).unwrap();
        assert_eq!(r.status, ResonanceStatus::OffResonant);
    }

    #[test]
    fn off_resonant_transition_integral_stays_small() {
        let values: Vec<f64> = [10.0, 50.0, 100.0]
            .iter()
            .map(|&t| {
                let (traj, res) = amin_run(0.3, t, 0.01);
                epsilon_nm(&res, &traj, 0, 1).unwrap().abs()
            })
            .collect();
        for v in &values {
            assert!(*v < 1e-3, "{values:?}");
        }
    }

    #[test]
    fn identity_holds_on_driven_run() {
        let (traj, res) = amin_run(1.0, 50.0, 0.005);
        let report = analyze(&traj, &res, &Thresholds::default()).unwrap();
        assert!(report.identity_residual < 1e-6, "{}", report.identity_residual);
        assert!(report.bound.tight >= report.bound.coarse);
        assert!(report.final_population >= report.bound.tight - 1e-6);
    }
}
