//! Builds Hamiltonians from scenario configs.

use std::path::Path;

use adiacheck_core::dual::build_dual;
use adiacheck_core::hamiltonian::{
    AminScenario, ConstantHamiltonian, CustomSampledHamiltonian, HermitianMatrix, LandauZener,
    RandomSmoothPath, TimeDependentHamiltonian, DEFAULT_HERMITICITY_TOL,
};
use adiacheck_core::linalg::{CMatrix, C64};
use adiacheck_core::propagate::PropagatorOptions;

use crate::config::{MatrixEntry, ScenarioConfig};
use crate::error::CliError;

/// `dual_of` propagates its inner scenario with `opts` to obtain `U_A`.
pub fn build_hamiltonian(
    scenario: &ScenarioConfig,
    horizon: f64,
    opts: &PropagatorOptions,
) -> Result<TimeDependentHamiltonian, CliError> {
    let h = match scenario {
        ScenarioConfig::Amin { epsilon, v, omega0 } => {
            AminScenario::new(*epsilon, *v, *omega0)?.over(horizon)?
        }
        ScenarioConfig::LandauZener { v, delta } => LandauZener::centered(*v, *delta, horizon)?,
        ScenarioConfig::Constant { matrix } => {
            ConstantHamiltonian(constant_matrix(matrix)?).over(horizon)?
        }
        ScenarioConfig::CustomCsv { path } => {
            let samples = read_custom_csv(path)?;
            if horizon > samples.horizon() {
                return Err(CliError::Config(format!(
                    "horizon {horizon} exceeds the last sample time {} in {}",
                    samples.horizon(),
                    path.display()
                )));
            }
            TimeDependentHamiltonian::new(samples, horizon)?
        }
        ScenarioConfig::DualOf { scenario } => {
            let inner = build_hamiltonian(scenario, horizon, opts)?;
            let inner_opts = PropagatorOptions {
                refinement: false,
                ..*opts
            };
            build_dual(&inner, &inner_opts)?.h_b
        }
        ScenarioConfig::RandomSmooth {
            dim,
            seed,
            coupling,
        } => RandomSmoothPath::generate(*dim, *seed, *coupling)?.over(horizon)?,
    };
    Ok(h)
}

fn constant_matrix(rows: &[Vec<MatrixEntry>]) -> Result<HermitianMatrix, CliError> {
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::Config("constant matrix must be square and non-empty".into()));
    }
    let data = rows
        .iter()
        .flatten()
        .map(|e| {
            let (re, im) = e.parts();
            C64::new(re, im)
        })
        .collect();
    let m = CMatrix::from_row_major(data)?;
    Ok(HermitianMatrix::new(m, DEFAULT_HERMITICITY_TOL)?)
}

/// Reads sampled matrices: a header row, then one row per sample with `t`
/// followed by `dim²` entries in row-major order, each as a `re, im` pair.
pub fn read_custom_csv(path: &Path) -> Result<CustomSampledHamiltonian, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut times = Vec::new();
    let mut matrices = Vec::new();
    let mut dim = None;
    for (line, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let values: Vec<f64> = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| {
                CliError::Config(format!("{} row {}: {e}", path.display(), line + 2))
            })?;
        let d = match dim {
            Some(d) => d,
            None => {
                let d = matrix_dim(values.len()).ok_or_else(|| {
                    CliError::Config(format!(
                        "{}: {} columns is not 1 + 2·dim² for any dim",
                        path.display(),
                        values.len()
                    ))
                })?;
                dim = Some(d);
                d
            }
        };
        if values.len() != 1 + 2 * d * d {
            return Err(CliError::Config(format!(
                "{} row {}: expected {} columns, found {}",
                path.display(),
                line + 2,
                1 + 2 * d * d,
                values.len()
            )));
        }
        times.push(values[0]);
        let data = values[1..]
            .chunks_exact(2)
            .map(|p| C64::new(p[0], p[1]))
            .collect();
        matrices.push(CMatrix::from_row_major(data)?);
    }
    Ok(CustomSampledHamiltonian::new(
        times,
        matrices,
        DEFAULT_HERMITICITY_TOL,
    )?)
}

fn matrix_dim(columns: usize) -> Option<usize> {
    if columns < 3 || !(columns - 1).is_multiple_of(2) {
        return None;
    }
    let sq = (columns - 1) / 2;
    let d = (sq as f64).sqrt().round() as usize;
    (d * d == sq).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn column_count_gives_dimension() {
        assert_eq!(matrix_dim(3), Some(1));
        assert_eq!(matrix_dim(9), Some(2));
        assert_eq!(matrix_dim(19), Some(3));
        assert_eq!(matrix_dim(7), None);
        assert_eq!(matrix_dim(2), None);
    }

    #[test]
    fn reads_two_level_samples() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "t,h00re,h00im,h01re,h01im,h10re,h10im,h11re,h11im").unwrap();
        writeln!(f, "0,-0.5,0,0,0,0,0,0.5,0").unwrap();
        writeln!(f, "1,-0.5,0,0.1,0.2,0.1,-0.2,0.5,0").unwrap();
        let s = read_custom_csv(f.path()).unwrap();
        assert_eq!(s.times(), &[0.0, 1.0]);
        let h = build_hamiltonian(
            &ScenarioConfig::CustomCsv { path: f.path().to_path_buf() },
            1.0,
            &PropagatorOptions::default(),
        )
        .unwrap();
        let m = h.evaluate(0.5).unwrap();
        assert_eq!(m.matrix()[(0, 1)], C64::new(0.05, 0.1));
    }

    #[test]
    fn non_hermitian_samples_are_config_errors() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "t,a,b,c,d,e,f,g,h").unwrap();
        writeln!(f, "0,0,0,1,0,0,0,0,0").unwrap();
        writeln!(f, "1,0,0,1,0,0,0,0,0").unwrap();
        let err = read_custom_csv(f.path()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
