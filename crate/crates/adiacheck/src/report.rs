//! JSON report document and CSV time-series layout.
//!
//! Series are thinned to at most [`MAX_SERIES_POINTS`] samples on a common
//! time axis; the grid index of every reported maximum is always kept.

use std::io::Write;

use adiacheck_core::conditions::{ConditionReport, SeriesMax};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, ThresholdsConfig};
use crate::run::{DualRun, RunOutcome};

pub const MAX_SERIES_POINTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub horizon: f64,
    pub steps: usize,
    pub dt: f64,
    pub record_every: usize,
    pub points: usize,
    /// `max‖H‖` used to scale the default step and the refinement allowance.
    pub norm_scale: f64,
    pub refinement_estimate: Option<f64>,
    pub refinement_allowance: f64,
    /// `|B(2N) − B(N)|` when the bound was recomputed on a doubled grid.
    #[serde(default)]
    pub bound_refinement_shift: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub initial_level: usize,
    pub final_populations: Vec<f64>,
    pub final_fidelity: f64,
    pub norm_drift: f64,
    pub population_sum_drift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxEntry {
    pub value: f64,
    pub t: f64,
    pub pair: [usize; 2],
}

impl From<SeriesMax> for MaxEntry {
    fn from(m: SeriesMax) -> Self {
        Self {
            value: m.value,
            t: m.t,
            pair: [m.pair.0, m.pair.1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficientEntry {
    pub m: usize,
    pub value: f64,
    pub max_coupling: MaxEntry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub tight: f64,
    pub coarse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeetEntry {
    pub pair: [usize; 2],
    pub mean_gap: f64,
    pub least_evolution_time: f64,
    pub mean_leet: f64,
    pub count: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEntry {
    pub m: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceEntry {
    pub pair: [usize; 2],
    pub status: String,
    pub real_coupling: Option<bool>,
    pub median_detuning: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionsSection {
    pub coupling_method: String,
    pub derivative_source: String,
    pub traditional_max: MaxEntry,
    pub sufficient_terms: Vec<SufficientEntry>,
    pub sufficient_total: f64,
    pub population_bound: BoundEntry,
    pub leet: Vec<LeetEntry>,
    pub epsilon: Vec<EpsilonEntry>,
    pub epsilon_sum: f64,
    pub resonance: Vec<ResonanceEntry>,
    /// `|P_n(T) − (P_n(0) − 2Σε)|`.
    pub identity_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictSection {
    pub traditional_pass: bool,
    pub sufficient_pass: bool,
    pub adiabatic_observed: bool,
    pub classification: String,
    pub thresholds: ThresholdsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSection {
    /// `sup_t |P_0(t) − (cos Vt + 1)/2|`.
    pub sup_deviation: f64,
    /// `|ε − ω₀| ≤ 0.1·ε`, where the closed form is expected to apply.
    pub near_resonance: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualResidualEntry {
    pub dt: f64,
    pub spectrum: f64,
    pub states: f64,
    pub evolution_inverse: f64,
    pub coupling_relation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub n: usize,
    pub k: usize,
    pub t: f64,
    pub value: f64,
    pub nearest_q: i64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSection {
    pub pairing: Vec<usize>,
    /// One entry per step size, halving from the configured one.
    pub runs: Vec<DualResidualEntry>,
    pub pi_phase: Option<PhaseEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSeries {
    pub pair: [usize; 2],
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSection {
    pub t: Vec<f64>,
    pub eigenvalues: Vec<Vec<f64>>,
    pub populations: Vec<Vec<f64>>,
    pub ratio: Vec<PairSeries>,
    pub coupling_abs: Vec<PairSeries>,
    pub leet: Vec<PairSeries>,
    pub resonance_omega: Vec<PairSeries>,
    pub resonance_omega_nm: Vec<PairSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: ToolInfo,
    pub command: String,
    pub config: RunConfig,
    pub grid: GridInfo,
    pub evolution: EvolutionSummary,
    pub conditions: ConditionsSection,
    pub verdict: VerdictSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assertions: Vec<AssertionOutcome>,
    pub series: SeriesSection,
}

/// Roughly uniform subset of `0..len` of at most `cap` indices, always
/// containing both ends and every index in `keep`.
pub fn sample_indices(len: usize, cap: usize, keep: &[usize]) -> Vec<usize> {
    if len <= cap {
        return (0..len).collect();
    }
    let budget = cap.saturating_sub(keep.len() + 2).max(1);
    let stride = len.div_ceil(budget);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    idx.push(len - 1);
    idx.extend(keep.iter().copied().filter(|&k| k < len));
    idx.sort_unstable();
    idx.dedup();
    idx
}

fn pick(values: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| values[i]).collect()
}

fn max_indices(report: &ConditionReport) -> Vec<usize> {
    let mut keep = vec![report.traditional.max.index];
    keep.extend(report.sufficient.terms.iter().map(|t| t.max_coupling.index));
    keep
}

fn conditions_section(out: &RunOutcome) -> ConditionsSection {
    let r = &out.report;
    let derivative_source = if out.hamiltonian.has_analytic_derivative() {
        "analytic"
    } else {
        "finite_difference"
    };
    ConditionsSection {
        coupling_method: out.trajectory.coupling_method().as_str().into(),
        derivative_source: derivative_source.into(),
        traditional_max: r.traditional.max.into(),
        sufficient_terms: r
            .sufficient
            .terms
            .iter()
            .map(|t| SufficientEntry {
                m: t.m,
                value: t.value,
                max_coupling: t.max_coupling.into(),
            })
            .collect(),
        sufficient_total: r.sufficient.total,
        population_bound: BoundEntry {
            tight: r.bound.tight,
            coarse: r.bound.coarse,
        },
        leet: r
            .leet
            .iter()
            .map(|l| LeetEntry {
                pair: [l.pair.0, l.pair.1],
                mean_gap: l.mean_gap,
                least_evolution_time: l.least_evolution_time,
                mean_leet: l.mean_leet,
                count: l.count,
            })
            .collect(),
        epsilon: r
            .epsilon
            .iter()
            .map(|e| EpsilonEntry {
                m: e.m,
                value: e.value,
            })
            .collect(),
        epsilon_sum: r.epsilon.iter().map(|e| e.value).sum(),
        resonance: r
            .resonance
            .iter()
            .map(|e| ResonanceEntry {
                pair: [e.pair.0, e.pair.1],
                status: e.status.as_str().into(),
                real_coupling: e.detail.as_ref().map(|d| d.real_coupling),
                median_detuning: e.detail.as_ref().map(|d| d.median_detuning),
            })
            .collect(),
        identity_residual: r.identity_residual,
    }
}

fn series_section(out: &RunOutcome, idx: &[usize]) -> SeriesSection {
    let traj = &out.trajectory;
    let r = &out.report;
    let dim = traj.dim();
    let pairs = |series: &[(usize, usize, Vec<f64>)]| -> Vec<PairSeries> {
        series
            .iter()
            .map(|(n, m, v)| PairSeries {
                pair: [*n, *m],
                values: pick(v, idx),
            })
            .collect()
    };
    let coupling_abs: Vec<(usize, usize, Vec<f64>)> = (0..dim)
        .flat_map(|n| ((n + 1)..dim).map(move |m| (n, m)))
        .map(|(n, m)| {
            let v = traj.coupling_series(n, m).iter().map(|c| c.norm()).collect();
            (n, m, v)
        })
        .collect();
    let ratio: Vec<_> = r
        .traditional
        .series
        .iter()
        .map(|s| (s.pair.0, s.pair.1, s.values.clone()))
        .collect();
    let leet: Vec<_> = r
        .leet
        .iter()
        .map(|l| (l.pair.0, l.pair.1, l.series.clone()))
        .collect();
    let details: Vec<_> = r.resonance.iter().filter_map(|e| e.detail.as_ref()).collect();
    let omega: Vec<_> = details
        .iter()
        .map(|d| (d.pair.0, d.pair.1, d.omega.clone()))
        .collect();
    let omega_nm: Vec<_> = details
        .iter()
        .map(|d| (d.pair.0, d.pair.1, d.omega_nm.clone()))
        .collect();
    SeriesSection {
        t: pick(traj.grid(), idx),
        eigenvalues: (0..dim)
            .map(|n| pick(&traj.eigenvalue_series(n), idx))
            .collect(),
        populations: (0..dim)
            .map(|n| pick(&out.result.population_series(n), idx))
            .collect(),
        ratio: pairs(&ratio),
        coupling_abs: pairs(&coupling_abs),
        leet: pairs(&leet),
        resonance_omega: pairs(&omega),
        resonance_omega_nm: pairs(&omega_nm),
    }
}

pub fn build_report(
    command: &str,
    out: &RunOutcome,
    dual: Option<&DualRun>,
    assertions: Vec<AssertionOutcome>,
) -> ReportDocument {
    let r = &out.report;
    let plan = &out.plan;
    let idx = sample_indices(out.trajectory.len(), MAX_SERIES_POINTS, &max_indices(r));
    let cfg = &out.config;
    ReportDocument {
        tool: ToolInfo::current(),
        command: command.into(),
        config: cfg.clone(),
        grid: GridInfo {
            horizon: cfg.horizon,
            steps: plan.steps,
            dt: plan.dt,
            record_every: plan.record_every,
            points: out.trajectory.len(),
            norm_scale: plan.norm_scale,
            refinement_estimate: out.refinement_estimate,
            refinement_allowance: plan.refinement_allowance(),
            bound_refinement_shift: out.bound_refinement_shift,
        },
        evolution: EvolutionSummary {
            initial_level: out.result.tracked_level,
            final_populations: out.result.populations.last().cloned().unwrap_or_default(),
            final_fidelity: out.result.final_fidelity,
            norm_drift: out.norm_drift,
            population_sum_drift: out.result.population_sum_drift(),
        },
        conditions: conditions_section(out),
        verdict: VerdictSection {
            traditional_pass: r.verdict.traditional_pass,
            sufficient_pass: r.verdict.sufficient_pass,
            adiabatic_observed: r.verdict.adiabatic_observed,
            classification: r.verdict.classification.as_str().into(),
            thresholds: cfg.thresholds,
        },
        oracle: out.oracle.clone(),
        dual: dual.map(|d| d.section.clone()),
        assertions,
        series: series_section(out, &idx),
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Time-series CSV on the report's sample indices. Columns, in order:
/// `t`, `E_n` for every level, `P_n` for every level, `abs_chi_n_m` and
/// `r_n_m` for every pair `n < m`.
pub fn write_timeseries_csv<W: Write>(out: &RunOutcome, w: W) -> csv::Result<()> {
    let traj = &out.trajectory;
    let dim = traj.dim();
    let idx = sample_indices(traj.len(), MAX_SERIES_POINTS, &max_indices(&out.report));
    let pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|n| ((n + 1)..dim).map(move |m| (n, m)))
        .collect();
    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|n| format!("E_{n}")));
    header.extend((0..dim).map(|n| format!("P_{n}")));
    header.extend(pairs.iter().map(|(n, m)| format!("abs_chi_{n}_{m}")));
    header.extend(pairs.iter().map(|(n, m)| format!("r_{n}_{m}")));
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(&header)?;
    for &k in &idx {
        let frame = &traj.frames()[k];
        let chi = &traj.couplings()[k];
        let mut row = vec![fmt_float(traj.grid()[k])];
        row.extend(frame.eigenvalues.iter().map(|e| fmt_float(*e)));
        row.extend(out.result.populations[k].iter().map(|p| fmt_float(*p)));
        row.extend(pairs.iter().map(|&(n, m)| fmt_float(chi[(n, m)].norm())));
        row.extend(pairs.iter().map(|&(n, m)| {
            let gap = (frame.eigenvalues[m] - frame.eigenvalues[n]).abs();
            fmt_float(chi[(n, m)].norm() / gap)
        }));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}
