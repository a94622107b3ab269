//! Instantaneous eigendecompositions along a time grid.
//!
//! Frames are diagonalised independently, sorted ascending, then aligned in
//! sequence by discrete parallel transport: every eigenvector is rephased so
//! that its overlap with the same level in the previous frame is real and
//! positive. That is the discrete form of the gauge `⟨E_n|Ė_n⟩ = 0`, and it
//! is the gauge every coupling in this crate is expressed in.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::TimeDependentHamiltonian;
use crate::linalg::{hermitian_eigen, inner, CMatrix, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingMethod {
    /// `χ_nm = ⟨E_n|Ḣ|E_m⟩ / (E_m − E_n)`, zero diagonal.
    HellmannFeynman,
    /// Differences of the gauge-aligned eigenvectors along the grid.
    FiniteDifference,
}

impl CouplingMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingMethod::HellmannFeynman => "hellmann_feynman",
            CouplingMethod::FiniteDifference => "finite_difference",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralOptions {
    /// Eigen-residual bound relative to `‖H‖`.
    pub eig_tol: f64,
    /// Gap floor relative to `‖H‖`.
    pub gap_floor: f64,
    /// Largest allowed per-level eigenvalue jump between frames, as a
    /// fraction of the smaller adjacent-frame gap.
    pub tracking_fraction: f64,
    pub gauge_tol: f64,
    /// `None` picks Hellmann–Feynman when the Hamiltonian has an analytic
    /// derivative and finite differences otherwise.
    pub coupling: Option<CouplingMethod>,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            gap_floor: 1e-8,
            tracking_fraction: 0.5,
            gauge_tol: 1e-6,
            coupling: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFrame {
    pub t: f64,
    pub eigenvalues: Vec<f64>,
    /// Column `n` is the eigenvector of `eigenvalues[n]`.
    pub eigenvectors: CMatrix,
    pub min_gap: f64,
}

impl SpectralFrame {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, n: usize) -> Vec<C64> {
        self.eigenvectors.column(n)
    }

    /// `max_n ‖H v_n − E_n v_n‖`.
    pub fn residual(&self, h: &CMatrix) -> f64 {
        let v = &self.eigenvectors;
        let hv = h.matmul(v);
        let n = self.dim();
        let mut worst = 0.0f64;
        for col in 0..n {
            let e = self.eigenvalues[col];
            let r: f64 = (0..n)
                .map(|row| (hv[(row, col)] - v[(row, col)] * e).norm_sqr())
                .sum();
            worst = worst.max(r.sqrt());
        }
        worst
    }

    fn spectral_scale(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |a, e| a.max(e.abs()))
    }
}

fn min_adjacent_gap(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Diagonalises `H(t)` and checks the eigen-residual and the gap floor.
/// The returned eigenvectors carry an arbitrary but deterministic phase.
pub fn frame_at(
    h: &TimeDependentHamiltonian,
    t: f64,
    opts: &SpectralOptions,
) -> Result<SpectralFrame> {
    let hm = h.evaluate(t)?;
    frame_from_matrix(hm.matrix(), t, opts)
}

pub fn frame_from_matrix(m: &CMatrix, t: f64, opts: &SpectralOptions) -> Result<SpectralFrame> {
    let (eigenvalues, eigenvectors) = hermitian_eigen(m);
    let min_gap = min_adjacent_gap(&eigenvalues);
    let mut frame = SpectralFrame {
        t,
        eigenvalues,
        eigenvectors,
        min_gap,
    };
    let scale = frame.spectral_scale();
    let floor = opts.gap_floor * scale;
    if !(frame.min_gap > floor) {
        return Err(Error::DegenerateSpectrum {
            t,
            gap: frame.min_gap,
            floor,
        });
    }
    let residual = frame.residual(m);
    if residual > opts.eig_tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::EigenResidual { t, residual });
    }
    fix_reference_phase(&mut frame.eigenvectors);
    Ok(frame)
}

// Largest component of every column made real and positive.
fn fix_reference_phase(v: &mut CMatrix) {
    let n = v.dim();
    for col in 0..n {
        let (mut best, mut mag) = (0, -1.0);
        for row in 0..n {
            let m = v[(row, col)].norm();
            if m > mag + 1e-12 {
                best = row;
                mag = m;
            }
        }
        let pivot = v[(best, col)];
        if pivot.norm() == 0.0 {
            continue;
        }
        let phase = pivot.conj() / pivot.norm();
        for row in 0..n {
            v[(row, col)] *= phase;
        }
    }
}

/// Rephases each eigenvector of `next` so its overlap with the same level of
/// `prev` is real and positive. Returns the smallest overlap magnitude.
pub fn parallel_transport(prev: &CMatrix, next: &mut CMatrix) -> f64 {
    let n = prev.dim();
    let mut smallest = f64::INFINITY;
    for col in 0..n {
        let overlap: C64 = (0..n).map(|r| prev[(r, col)].conj() * next[(r, col)]).sum();
        let mag = overlap.norm();
        smallest = smallest.min(mag);
        if mag == 0.0 {
            continue;
        }
        let phase = overlap.conj() / mag;
        for r in 0..n {
            next[(r, col)] *= phase;
        }
    }
    smallest
}

/// Re-runs sequential parallel transport over `frames` in place.
pub fn realign_gauge(frames: &mut [SpectralFrame]) {
    for k in 1..frames.len() {
        let (head, tail) = frames.split_at_mut(k);
        parallel_transport(&head[k - 1].eigenvectors, &mut tail[0].eigenvectors);
    }
}

#[derive(Clone, Debug)]
pub struct SpectralTrajectory {
    grid: Vec<f64>,
    frames: Vec<SpectralFrame>,
    couplings: Vec<CMatrix>,
    coupling_method: CouplingMethod,
}

/// Diagonalises `h` on every grid point and aligns the frames.
///
/// Couplings are produced at every grid point (one-sided differences at the
/// two ends when the finite-difference route is used).
pub fn decompose(
    h: &TimeDependentHamiltonian,
    grid: &[f64],
    opts: &SpectralOptions,
) -> Result<SpectralTrajectory> {
    if grid.len() < 3 {
        return Err(Error::InsufficientGrid {
            needed: 3,
            found: grid.len(),
        });
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "grid must be strictly increasing".into(),
        ));
    }
    let mut frames: Vec<SpectralFrame> = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut frame = frame_at(h, t, opts)?;
        if let Some(prev) = frames.last() {
            check_tracking(prev, &frame, opts)?;
            let overlap = parallel_transport(&prev.eigenvectors, &mut frame.eigenvectors);
            if overlap < 1e-6 {
                let level = (0..frame.dim())
                    .find(|&n| {
                        inner(&prev.vector(n), &frame.vector(n)).norm() < 1e-6
                    })
                    .unwrap_or(0);
                return Err(Error::LevelTrackingLost { t, level });
            }
        }
        frames.push(frame);
    }

    let method = opts.coupling.unwrap_or(if h.has_analytic_derivative() {
        CouplingMethod::HellmannFeynman
    } else {
        CouplingMethod::FiniteDifference
    });
    let mut traj = SpectralTrajectory {
        grid: grid.to_vec(),
        frames,
        couplings: Vec::new(),
        coupling_method: method,
    };
    traj.couplings = match method {
        CouplingMethod::HellmannFeynman => traj
            .frames
            .iter()
            .map(|f| coupling_hellmann_feynman(h, f, opts))
            .collect::<Result<_>>()?,
        CouplingMethod::FiniteDifference => coupling_finite_difference(&traj)?,
    };
    Ok(traj)
}

fn check_tracking(prev: &SpectralFrame, next: &SpectralFrame, opts: &SpectralOptions) -> Result<()> {
    let allowed = opts.tracking_fraction * prev.min_gap.min(next.min_gap);
    for (n, (a, b)) in prev.eigenvalues.iter().zip(&next.eigenvalues).enumerate() {
        if !((b - a).abs() < allowed) {
            return Err(Error::LevelTrackingLost { t: next.t, level: n });
        }
    }
    Ok(())
}

/// `χ_nm = ⟨E_n|Ḣ|E_m⟩ / (E_m − E_n)` for `n ≠ m`, with `χ_nn = 0`.
pub fn coupling_hellmann_feynman(
    h: &TimeDependentHamiltonian,
    frame: &SpectralFrame,
    opts: &SpectralOptions,
) -> Result<CMatrix> {
    let floor = opts.gap_floor * frame.spectral_scale();
    if !(frame.min_gap > floor) {
        return Err(Error::DegenerateSpectrum {
            t: frame.t,
            gap: frame.min_gap,
            floor,
        });
    }
    let hdot = h.derivative(frame.t)?;
    let v = &frame.eigenvectors;
    let projected = v.adjoint_matmul(&hdot.matrix().matmul(v));
    let n = frame.dim();
    Ok(CMatrix::from_fn(n, |a, b| {
        if a == b {
            ZERO
        } else {
            projected[(a, b)] / (frame.eigenvalues[b] - frame.eigenvalues[a])
        }
    }))
}

/// `χ_nm(t_k) ≈ ⟨v_n(t_k)|v̇_m(t_k)⟩` from second-order differences of the
/// aligned eigenvectors (central inside, one-sided at the ends).
pub fn coupling_finite_difference(traj: &SpectralTrajectory) -> Result<Vec<CMatrix>> {
    let frames = &traj.frames;
    let times = &traj.grid;
    let len = frames.len();
    if len < 3 {
        return Err(Error::InsufficientGrid {
            needed: 3,
            found: len,
        });
    }
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let (idx, w) = difference_stencil(times, k);
        let vdot = combine(
            &frames[idx[0]].eigenvectors,
            &frames[idx[1]].eigenvectors,
            &frames[idx[2]].eigenvectors,
            w,
        );
        out.push(frames[k].eigenvectors.adjoint_matmul(&vdot));
    }
    Ok(out)
}

/// Three-point, second-order first-derivative stencil at node `k`.
pub(crate) fn difference_stencil(t: &[f64], k: usize) -> ([usize; 3], [f64; 3]) {
    let last = t.len() - 1;
    if k == 0 {
        let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
        (
            [0, 1, 2],
            [
                -(2.0 * h0 + h1) / (h0 * (h0 + h1)),
                (h0 + h1) / (h0 * h1),
                -h0 / (h1 * (h0 + h1)),
            ],
        )
    } else if k == last {
        let (h0, h1) = (t[last - 1] - t[last - 2], t[last] - t[last - 1]);
        (
            [last - 2, last - 1, last],
            [
                h1 / (h0 * (h0 + h1)),
                -(h0 + h1) / (h0 * h1),
                (2.0 * h1 + h0) / (h1 * (h0 + h1)),
            ],
        )
    } else {
        let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        (
            [k - 1, k, k + 1],
            [
                -h1 / (h0 * (h0 + h1)),
                (h1 - h0) / (h0 * h1),
                h0 / (h1 * (h0 + h1)),
            ],
        )
    }
}

fn combine(a: &CMatrix, b: &CMatrix, c: &CMatrix, w: [f64; 3]) -> CMatrix {
    let mut out = a.scale_real(w[0]);
    out.axpy(C64::new(w[1], 0.0), b);
    out.axpy(C64::new(w[2], 0.0), c);
    out
}

impl SpectralTrajectory {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn frames(&self) -> &[SpectralFrame] {
        &self.frames
    }

    pub fn frames_mut(&mut self) -> &mut [SpectralFrame] {
        &mut self.frames
    }

    pub fn couplings(&self) -> &[CMatrix] {
        &self.couplings
    }

    pub fn coupling_method(&self) -> CouplingMethod {
        self.coupling_method
    }

    pub fn dim(&self) -> usize {
        self.frames[0].dim()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.grid[self.grid.len() - 1] - self.grid[0]
    }

    pub fn eigenvalue_series(&self, n: usize) -> Vec<f64> {
        self.frames.iter().map(|f| f.eigenvalues[n]).collect()
    }

    pub fn coupling_series(&self, n: usize, m: usize) -> Vec<C64> {
        self.couplings.iter().map(|c| c[(n, m)]).collect()
    }

    /// Replaces the stored couplings with the finite-difference route.
    pub fn recompute_finite_difference(&mut self) -> Result<()> {
        self.couplings = coupling_finite_difference(self)?;
        self.coupling_method = CouplingMethod::FiniteDifference;
        Ok(())
    }

    /// `max_k ‖V_k†V_k − I‖_F`.
    pub fn orthonormality_residual(&self) -> f64 {
        self.frames
            .iter()
            .map(|f| f.eigenvectors.unitarity_residual())
            .fold(0.0, f64::max)
    }

    /// Largest `|χ_nm + conj(χ_mn)|` over the grid, normalised by
    /// `max|χ| + 1`.
    pub fn anti_hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for c in &self.couplings {
            scale = scale.max(c.max_abs());
            worst = worst.max(c.add(&c.adjoint()).max_abs());
        }
        worst / (scale + 1.0)
    }

    /// Worst violation of the discrete gauge condition: the largest
    /// `|Im⟨v_n(t_k)|v_n(t_{k+1})⟩|`, or `+∞` if an overlap has non-positive
    /// real part.
    pub fn gauge_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for pair in self.frames.windows(2) {
            for n in 0..pair[0].dim() {
                let o = inner(&pair[0].vector(n), &pair[1].vector(n));
                if !(o.re > 0.0) {
                    return f64::INFINITY;
                }
                worst = worst.max(o.im.abs());
            }
        }
        worst
    }

    /// Smallest gap seen anywhere on the grid.
    pub fn min_gap(&self) -> f64 {
        self.frames.iter().map(|f| f.min_gap).fold(f64::INFINITY, f64::min)
    }
}
