//! Classical (CTRW) and quantum (CTQW) propagation by spectral sums.
//!
//! With `T = -γL` and `H = γL` (ħ = 1):
//!
//! ```text
//! p_{k,j}(t) = Σ_n ⟨k|ψ_n⟩ e^{-γλ_n t} ⟨ψ_n|j⟩
//! α_{k,j}(t) = Σ_n ⟨k|ψ_n⟩ e^{-iγλ_n t} ⟨ψ_n|j⟩,   π_{k,j} = |α_{k,j}|²
//! ```

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spectral::SpectralDecomposition;
use crate::{Error, Result};

/// Default cap on `N² · |times|` for materialized fields.
pub const DEFAULT_ENTRY_CAP: usize = 1 << 28;

/// Tolerance of [`propagator_compose_check`].
pub const COMPOSE_TOLERANCE: f64 = 1e-8;

/// Strictly increasing sample times (units of `1/γ`) plus the rate `γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
    gamma: f64,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>, gamma: f64) -> Result<TimeGrid> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if times.is_empty() {
            return Err(Error::InvalidParameter("time grid is empty".into()));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameter("times must be finite and non-negative".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("times must be strictly increasing".into()));
        }
        Ok(TimeGrid { times, gamma })
    }

    /// `0, step, 2 step, ..., t_max`.
    pub fn uniform(t_max: f64, step: f64, gamma: f64) -> Result<TimeGrid> {
        Self::span(0.0, t_max, step, gamma)
    }

    /// `start, start + step, ...` up to and including `end` (within rounding).
    pub fn span(start: f64, end: f64, step: f64, gamma: f64) -> Result<TimeGrid> {
        if !(step > 0.0) || !(end >= start) || step > (end - start).max(step) {
            return Err(Error::InvalidParameter(format!(
                "invalid grid: start={start} end={end} step={step}"
            )));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        // Dividing by an integral rate keeps decimal steps such as 0.05 exact to print.
        let rate = (1.0 / step).round();
        let offset = |i: usize| {
            if (rate * step - 1.0).abs() < 1e-12 {
                i as f64 / rate
            } else {
                i as f64 * step
            }
        };
        Self::new((0..=count).map(|i| start + offset(i)).collect(), gamma)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("grid is non-empty")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkKind {
    Classical,
    Quantum,
}

/// Complex `N×N` table stored as separate real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Amplitudes {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl Amplitudes {
    pub fn identity(n: usize) -> Amplitudes {
        Amplitudes { re: DMatrix::identity(n, n), im: DMatrix::zeros(n, n) }
    }

    pub fn get(&self, k: usize, j: usize) -> Complex<f64> {
        Complex::new(self.re[(k, j)], self.im[(k, j)])
    }

    pub fn probabilities(&self) -> DMatrix<f64> {
        self.re.component_mul(&self.re) + self.im.component_mul(&self.im)
    }

    pub fn mul(&self, rhs: &Amplitudes) -> Amplitudes {
        Amplitudes {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    pub fn max_abs_diff(&self, other: &Amplitudes) -> f64 {
        let n = self.re.nrows();
        (0..n)
            .flat_map(|k| (0..n).map(move |j| (k, j)))
            .map(|(k, j)| (self.get(k, j) - other.get(k, j)).norm())
            .fold(0.0, f64::max)
    }
}

/// Evaluates the classical and quantum propagators of one spectrum at any
/// time. Holds `V`, `Vᵀ` and the squared eigenvector table `|⟨k|ψ_n⟩|²`.
#[derive(Clone, Debug)]
pub struct Propagator<'a> {
    spec: &'a SpectralDecomposition,
    gamma: f64,
    transposed: DMatrix<f64>,
    weights: DMatrix<f64>,
}

impl<'a> Propagator<'a> {
    pub fn new(spec: &'a SpectralDecomposition, gamma: f64) -> Propagator<'a> {
        let vectors = spec.eigenvectors();
        Propagator {
            spec,
            gamma,
            transposed: vectors.transpose(),
            weights: vectors.component_mul(vectors),
        }
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn node_count(&self) -> usize {
        self.spec.node_count()
    }

    fn phase_sum(&self, coeffs: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.spec.eigenvectors().clone();
        for (n, &lambda) in self.spec.eigenvalues().iter().enumerate() {
            scaled.column_mut(n).scale_mut(coeffs(lambda));
        }
        scaled * &self.transposed
    }

    /// `p(t) = V e^{-γΛt} Vᵀ`.
    pub fn classical(&self, t: f64) -> DMatrix<f64> {
        let rate = self.gamma * t;
        self.phase_sum(|lambda| (-lambda * rate).exp())
    }

    /// `U(t) = V e^{-iγΛt} Vᵀ`.
    pub fn quantum(&self, t: f64) -> Amplitudes {
        let rate = self.gamma * t;
        Amplitudes {
            re: self.phase_sum(|lambda| (lambda * rate).cos()),
            im: self.phase_sum(|lambda| -(lambda * rate).sin()),
        }
    }

    fn column_sum(&self, source: usize, coeffs: impl Fn(f64) -> f64) -> DVector<f64> {
        let projected = DVector::from_iterator(
            self.node_count(),
            self.spec
                .eigenvalues()
                .iter()
                .enumerate()
                .map(|(n, &lambda)| coeffs(lambda) * self.transposed[(n, source)]),
        );
        self.spec.eigenvectors() * projected
    }

    /// Column `p_{·,j}(t)`.
    pub fn classical_column(&self, t: f64, source: usize) -> DVector<f64> {
        let rate = self.gamma * t;
        self.column_sum(source, |lambda| (-lambda * rate).exp())
    }

    /// Column `α_{·,j}(t)` as `(re, im)`.
    pub fn quantum_column(&self, t: f64, source: usize) -> (DVector<f64>, DVector<f64>) {
        let rate = self.gamma * t;
        (
            self.column_sum(source, |lambda| (lambda * rate).cos()),
            self.column_sum(source, |lambda| -(lambda * rate).sin()),
        )
    }

    fn diagonal_sum(&self, coeffs: impl Fn(f64) -> f64) -> DVector<f64> {
        let c = DVector::from_iterator(self.node_count(), self.spec.eigenvalues().iter().map(|&l| coeffs(l)));
        &self.weights * c
    }

    /// Diagonal `p_{k,k}(t) = Σ_n |⟨k|ψ_n⟩|² e^{-γλ_n t}`.
    pub fn classical_diagonal(&self, t: f64) -> DVector<f64> {
        let rate = self.gamma * t;
        self.diagonal_sum(|lambda| (-lambda * rate).exp())
    }

    /// Diagonal amplitudes `α_{k,k}(t) = Σ_n |⟨k|ψ_n⟩|² e^{-iγλ_n t}` as `(re, im)`.
    pub fn quantum_diagonal(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let rate = self.gamma * t;
        (
            self.diagonal_sum(|lambda| (lambda * rate).cos()),
            self.diagonal_sum(|lambda| -(lambda * rate).sin()),
        )
    }
}

/// Anything that yields column-stochastic probability tables on a grid.
///
/// Implemented by the materialized [`TransitionField`] and by the lazy
/// [`SpectralField`], which recomputes each table on demand and therefore
/// has no memory guard.
pub trait ProbabilitySource: Sync {
    fn grid(&self) -> &TimeGrid;
    fn kind(&self) -> WalkKind;
    fn node_count(&self) -> usize;

    /// `N×N` table with entry `(k, j)` the probability `j → k`.
    fn probabilities_at(&self, index: usize) -> DMatrix<f64>;

    fn column_at(&self, index: usize, source: usize) -> DVector<f64> {
        self.probabilities_at(index).column(source).into_owned()
    }
}

#[derive(Clone, Debug)]
enum FieldData {
    Classical(Vec<DMatrix<f64>>),
    Quantum(Vec<Amplitudes>),
}

/// Materialized per-time `N×N` tables. Quantum fields keep only the
/// amplitudes; probabilities are recomputed from them on access.
#[derive(Clone, Debug)]
pub struct TransitionField {
    grid: TimeGrid,
    node_count: usize,
    data: FieldData,
}

fn guard(n: usize, grid: &TimeGrid, cap: usize) -> Result<()> {
    let entries = n.saturating_mul(n).saturating_mul(grid.len());
    if entries > cap {
        return Err(Error::MemoryGuard { entries, cap });
    }
    Ok(())
}

impl TransitionField {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn kind(&self) -> WalkKind {
        match self.data {
            FieldData::Classical(_) => WalkKind::Classical,
            FieldData::Quantum(_) => WalkKind::Quantum,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Amplitude table at grid index `index`; `None` for classical fields.
    pub fn amplitudes_at(&self, index: usize) -> Option<&Amplitudes> {
        match &self.data {
            FieldData::Quantum(a) => Some(&a[index]),
            FieldData::Classical(_) => None,
        }
    }

    /// Largest `|Σ_k P[t][k][j] - 1|` over all sources and times.
    pub fn max_normalization_error(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| column_sum_error(&self.probabilities_at(i)))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn column_sum_error(p: &DMatrix<f64>) -> f64 {
    p.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max)
}

impl ProbabilitySource for TransitionField {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn kind(&self) -> WalkKind {
        TransitionField::kind(self)
    }

    fn node_count(&self) -> usize {
        self.node_count
    }

    fn probabilities_at(&self, index: usize) -> DMatrix<f64> {
        match &self.data {
            FieldData::Classical(p) => p[index].clone(),
            FieldData::Quantum(a) => a[index].probabilities(),
        }
    }
}

/// Lazy field: tables are computed from the spectrum when requested.
#[derive(Clone, Debug)]
pub struct SpectralField<'a> {
    propagator: Propagator<'a>,
    grid: TimeGrid,
    kind: WalkKind,
}

impl<'a> SpectralField<'a> {
    pub fn new(spec: &'a SpectralDecomposition, grid: TimeGrid, kind: WalkKind) -> SpectralField<'a> {
        SpectralField { propagator: Propagator::new(spec, grid.gamma()), grid, kind }
    }

    pub fn propagator(&self) -> &Propagator<'a> {
        &self.propagator
    }
}

impl ProbabilitySource for SpectralField<'_> {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn kind(&self) -> WalkKind {
        self.kind
    }

    fn node_count(&self) -> usize {
        self.propagator.node_count()
    }

    fn probabilities_at(&self, index: usize) -> DMatrix<f64> {
        let t = self.grid.times()[index];
        match self.kind {
            WalkKind::Classical => self.propagator.classical(t),
            WalkKind::Quantum => self.propagator.quantum(t).probabilities(),
        }
    }

    fn column_at(&self, index: usize, source: usize) -> DVector<f64> {
        let t = self.grid.times()[index];
        match self.kind {
            WalkKind::Classical => self.propagator.classical_column(t, source),
            WalkKind::Quantum => {
                let (re, im) = self.propagator.quantum_column(t, source);
                re.component_mul(&re) + im.component_mul(&im)
            }
        }
    }
}

/// Exact CTRW solution `p_{k,j}(t)` on every grid time.
pub fn classical_propagate(spec: &SpectralDecomposition, grid: &TimeGrid) -> Result<TransitionField> {
    classical_propagate_capped(spec, grid, DEFAULT_ENTRY_CAP)
}

pub fn classical_propagate_capped(
    spec: &SpectralDecomposition,
    grid: &TimeGrid,
    cap: usize,
) -> Result<TransitionField> {
    guard(spec.node_count(), grid, cap)?;
    let prop = Propagator::new(spec, grid.gamma());
    let tables = grid.times().par_iter().map(|&t| prop.classical(t)).collect();
    Ok(TransitionField { grid: grid.clone(), node_count: spec.node_count(), data: FieldData::Classical(tables) })
}

/// CTQW amplitudes `α_{k,j}(t)` on every grid time.
pub fn quantum_amplitudes(spec: &SpectralDecomposition, grid: &TimeGrid) -> Result<TransitionField> {
    quantum_amplitudes_capped(spec, grid, DEFAULT_ENTRY_CAP)
}

pub fn quantum_amplitudes_capped(
    spec: &SpectralDecomposition,
    grid: &TimeGrid,
    cap: usize,
) -> Result<TransitionField> {
    guard(spec.node_count(), grid, cap)?;
    let prop = Propagator::new(spec, grid.gamma());
    let tables = grid.times().par_iter().map(|&t| prop.quantum(t)).collect();
    Ok(TransitionField { grid: grid.clone(), node_count: spec.node_count(), data: FieldData::Quantum(tables) })
}

/// `U(t1) U(t2) = U(t1 + t2)` for the unitary group and `P(t1) P(t2) =
/// P(t1 + t2)` for the classical semigroup, both within
/// [`COMPOSE_TOLERANCE`] in max-norm (γ = 1).
pub fn propagator_compose_check(spec: &SpectralDecomposition, t1: f64, t2: f64) -> Result<bool> {
    if !(t1 >= 0.0 && t2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("times must be non-negative, got {t1}, {t2}")));
    }
    let prop = Propagator::new(spec, 1.0);
    let quantum = prop.quantum(t1).mul(&prop.quantum(t2)).max_abs_diff(&prop.quantum(t1 + t2));
    let classical = (prop.classical(t1) * prop.classical(t2) - prop.classical(t1 + t2)).amax();
    Ok(quantum <= COMPOSE_TOLERANCE && classical <= COMPOSE_TOLERANCE)
}
