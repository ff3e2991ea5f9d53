//! Scalar and matrix observables of classical and quantum walks.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ProbabilitySource, Propagator, TimeGrid, WalkKind};
use crate::graph::DistanceMatrix;
use crate::spectral::{DegeneracyClasses, SpectralDecomposition};
use crate::{Error, Result};

/// Crossing searches ignore everything before this time (units of `1/γ`).
pub const CROSSING_SEARCH_START: f64 = 1.0;

/// Default `r_q` averaging window `[T/2, T]` with `T = 100/γ`.
pub const DEFAULT_RQ_WINDOW: (f64, f64) = (50.0, 100.0);

/// Slack used when matching window edges to grid points.
const GRID_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableTag {
    AvgDisplacementSite(usize),
    AvgDisplacementMean,
    AvgEuclideanDisplacementMean,
    ReturnProbClassical,
    ReturnProbQuantum,
    ReturnProbLowerBound,
    RatioClassicalOverQuantum,
}

impl fmt::Display for ObservableTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableTag::AvgDisplacementSite(j) => write!(f, "avg_displacement_site_{j}"),
            ObservableTag::AvgDisplacementMean => f.write_str("avg_displacement_mean"),
            ObservableTag::AvgEuclideanDisplacementMean => f.write_str("avg_euclidean_displacement_mean"),
            ObservableTag::ReturnProbClassical => f.write_str("return_prob_classical"),
            ObservableTag::ReturnProbQuantum => f.write_str("return_prob_quantum"),
            ObservableTag::ReturnProbLowerBound => f.write_str("return_prob_lower_bound"),
            ObservableTag::RatioClassicalOverQuantum => f.write_str("ratio_classical_over_quantum"),
        }
    }
}

/// One real value per grid time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    grid: TimeGrid,
    values: Vec<f64>,
    tag: ObservableTag,
}

impl ObservableSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>, tag: ObservableTag) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a grid of {} times",
                values.len(),
                grid.len()
            )));
        }
        Ok(ObservableSeries { grid, values, tag })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tag(&self) -> ObservableTag {
        self.tag
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times().iter().copied().zip(self.values.iter().copied())
    }

    /// Grid indices with `t0 <= t <= t1`, failing if the grid does not cover
    /// the window.
    fn window_indices(&self, t0: f64, t1: f64) -> Result<Vec<usize>> {
        window_indices(&self.grid, t0, t1)
    }

    /// Trapezoidal time average over `[t0, t1]`.
    pub fn time_average(&self, t0: f64, t1: f64) -> Result<f64> {
        let idx = self.window_indices(t0, t1)?;
        trapezoid_mean(self.times(), &self.values, &idx)
    }
}

fn window_indices(grid: &TimeGrid, t0: f64, t1: f64) -> Result<Vec<usize>> {
    let outside = || Error::WindowOutsideGrid { t0, t1, start: grid.start(), end: grid.end() };
    if !(t1 > t0) || t0 < grid.start() - GRID_SLACK || t1 > grid.end() + GRID_SLACK {
        return Err(outside());
    }
    let idx: Vec<usize> = grid
        .times()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= t0 - GRID_SLACK && t <= t1 + GRID_SLACK)
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 2 {
        return Err(outside());
    }
    Ok(idx)
}

fn trapezoid_mean(times: &[f64], values: &[f64], idx: &[usize]) -> Result<f64> {
    let area: f64 = idx
        .windows(2)
        .map(|w| 0.5 * (values[w[0]] + values[w[1]]) * (times[w[1]] - times[w[0]]))
        .sum();
    let first = idx[0];
    let last = idx[idx.len() - 1];
    Ok(area / (times[last] - times[first]))
}

fn check_dims(source: &impl ProbabilitySource, n: usize) -> Result<()> {
    if source.node_count() != n {
        return Err(Error::DimensionMismatch(format!(
            "field has {} nodes, distance table has {n}",
            source.node_count()
        )));
    }
    Ok(())
}

/// `⟨r_j(t)⟩ = Σ_k ℓ(k, j) P_{k,j}(t)` for a walk started at `j`.
pub fn avg_displacement_from_site(
    source: &impl ProbabilitySource,
    dist: &DistanceMatrix,
    j: usize,
) -> Result<ObservableSeries> {
    check_dims(source, dist.node_count())?;
    if j >= dist.node_count() {
        return Err(Error::InvalidParameter(format!("start node {j} out of range")));
    }
    let lengths = DVector::from_iterator(dist.node_count(), dist.row(j).iter().map(|&d| d as f64));
    let values = (0..source.grid().len())
        .into_par_iter()
        .map(|i| source.column_at(i, j).dot(&lengths))
        .collect();
    ObservableSeries::new(source.grid().clone(), values, ObservableTag::AvgDisplacementSite(j))
}

fn metric_average(source: &impl ProbabilitySource, metric: &DMatrix<f64>, indices: &[usize]) -> Vec<f64> {
    let n = metric.nrows() as f64;
    indices
        .par_iter()
        .map(|&i| metric.component_mul(&source.probabilities_at(i)).sum() / n)
        .collect()
}

/// `(1/N) Σ_j ⟨r_j(t)⟩`.
pub fn site_averaged_displacement(
    source: &impl ProbabilitySource,
    dist: &DistanceMatrix,
) -> Result<ObservableSeries> {
    site_averaged_metric(source, &dist.to_matrix(), ObservableTag::AvgDisplacementMean)
}

/// Site average of `Σ_k d(k, j) P_{k,j}(t)` for an arbitrary symmetric
/// distance table `d` (e.g. lattice Euclidean distances).
pub fn site_averaged_metric(
    source: &impl ProbabilitySource,
    metric: &DMatrix<f64>,
    tag: ObservableTag,
) -> Result<ObservableSeries> {
    check_dims(source, metric.nrows())?;
    let all: Vec<usize> = (0..source.grid().len()).collect();
    ObservableSeries::new(source.grid().clone(), metric_average(source, metric, &all), tag)
}

/// Finite-window estimate of `r_q`: trapezoidal time average of the
/// site-averaged quantum displacement over `window`.
pub fn stationary_quantum_displacement(
    source: &impl ProbabilitySource,
    dist: &DistanceMatrix,
    window: (f64, f64),
) -> Result<f64> {
    check_dims(source, dist.node_count())?;
    if source.kind() != WalkKind::Quantum {
        return Err(Error::InvalidParameter("r_q needs a quantum field".into()));
    }
    let idx = window_indices(source.grid(), window.0, window.1)?;
    let values = metric_average(source, &dist.to_matrix(), &idx);
    let times: Vec<f64> = idx.iter().map(|&i| source.grid().times()[i]).collect();
    let local: Vec<usize> = (0..idx.len()).collect();
    trapezoid_mean(&times, &values, &local)
}

/// `p̄(t) = (1/N) Σ_n e^{-γλ_n t}`.
pub fn return_prob_classical(classes: &DegeneracyClasses, grid: &TimeGrid) -> ObservableSeries {
    let n = classes.total() as f64;
    let values = grid
        .times()
        .iter()
        .map(|&t| classes.iter().map(|(v, m)| m as f64 * (-grid.gamma() * v * t).exp()).sum::<f64>() / n)
        .collect();
    ObservableSeries { grid: grid.clone(), values, tag: ObservableTag::ReturnProbClassical }
}

/// `π̄(t) = (1/N) Σ_k |α_{k,k}(t)|²`.
pub fn return_prob_quantum(spec: &SpectralDecomposition, grid: &TimeGrid) -> ObservableSeries {
    let prop = Propagator::new(spec, grid.gamma());
    let n = spec.node_count() as f64;
    let values = grid
        .times()
        .par_iter()
        .map(|&t| {
            let (re, im) = prop.quantum_diagonal(t);
            (re.norm_squared() + im.norm_squared()) / n
        })
        .collect();
    ObservableSeries { grid: grid.clone(), values, tag: ObservableTag::ReturnProbQuantum }
}

/// `|ᾱ(t)|² = |(1/N) Σ_i m(λ̃_i) e^{-iγλ̃_i t}|²`, needing eigenvalues only.
pub fn return_prob_lower_bound(classes: &DegeneracyClasses, grid: &TimeGrid) -> ObservableSeries {
    let n = classes.total() as f64;
    let values = grid
        .times()
        .iter()
        .map(|&t| {
            let (re, im) = classes.iter().fold((0.0, 0.0), |(re, im), (v, m)| {
                let phase = grid.gamma() * v * t;
                (re + m as f64 * phase.cos(), im - m as f64 * phase.sin())
            });
            (re * re + im * im) / (n * n)
        })
        .collect();
    ObservableSeries { grid: grid.clone(), values, tag: ObservableTag::ReturnProbLowerBound }
}

/// Long-time averages `χ_{k,j} = Σ_classes (P_c)_{k,j}²`, where `P_c` is
/// the spectral projector onto one degeneracy class.
pub fn lta_matrix(spec: &SpectralDecomposition, classes: &DegeneracyClasses) -> Result<DMatrix<f64>> {
    classes.check_matches(spec.eigenvalues())?;
    let n = spec.node_count();
    let vectors = spec.eigenvectors();
    let chi = classes
        .ranges()
        .into_par_iter()
        .map(|range| {
            let block = vectors.columns(range.start, range.len());
            let projector = &block * block.transpose();
            projector.component_mul(&projector)
        })
        .reduce(|| DMatrix::zeros(n, n), |a, b| a + b);
    Ok(chi)
}

/// `χ̄ = (1/N) Σ_j χ_{j,j}`.
pub fn lta_mean(chi: &DMatrix<f64>) -> f64 {
    chi.trace() / chi.nrows() as f64
}

/// `χ̄_lb = (1/N²) Σ_i m(λ̃_i)²`.
pub fn lta_lower_bound(classes: &DegeneracyClasses) -> f64 {
    let n = classes.total() as f64;
    classes.multiplicities().iter().map(|&m| (m * m) as f64).sum::<f64>() / (n * n)
}

/// Closed form of `χ̄_lb` for the generation-`g` DSG:
/// `3^{-2g} [3^g (1 + 3^g/14) + (10/7) 2^g - 3/2]`.
pub fn dsg_lta_lb_closed_form(g: u32) -> Result<f64> {
    if g < 1 {
        return Err(Error::InvalidParameter(format!("DSG generation must be >= 1, got {g}")));
    }
    let n = 3f64.powi(g as i32);
    Ok((n * (1.0 + n / 14.0) + 10.0 / 7.0 * 2f64.powi(g as i32) - 1.5) / (n * n))
}

/// `η = χ̄ / χ̄_lb`.
pub fn eta_ratio(chi_bar: f64, chi_bar_lb: f64) -> Result<f64> {
    if !(chi_bar_lb > 0.0) {
        return Err(Error::InvalidParameter(format!("chi_bar_lb must be positive, got {chi_bar_lb}")));
    }
    Ok(chi_bar / chi_bar_lb)
}

/// Infinite-time average of the site-averaged quantum displacement,
/// `(1/N) Σ_{k,j} ℓ(k, j) χ_{k,j}`.
pub fn lta_displacement(chi: &DMatrix<f64>, dist: &DistanceMatrix) -> Result<f64> {
    if chi.nrows() != dist.node_count() {
        return Err(Error::DimensionMismatch("chi and distance tables differ in size".into()));
    }
    Ok(dist.to_matrix().component_mul(chi).sum() / chi.nrows() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LongTimeAverages {
    pub chi: DMatrix<f64>,
    pub chi_bar: f64,
    pub chi_bar_lb: f64,
    pub eta: f64,
    pub r_q: f64,
    pub r_c: f64,
}

impl LongTimeAverages {
    /// Assemble the summary; `r_q` comes from a windowed estimate
    /// ([`stationary_quantum_displacement`]).
    pub fn compute(
        spec: &SpectralDecomposition,
        classes: &DegeneracyClasses,
        dist: &DistanceMatrix,
        r_q: f64,
    ) -> Result<LongTimeAverages> {
        let chi = lta_matrix(spec, classes)?;
        let chi_bar = lta_mean(&chi);
        let chi_bar_lb = lta_lower_bound(classes);
        Ok(LongTimeAverages {
            eta: eta_ratio(chi_bar, chi_bar_lb)?,
            chi,
            chi_bar,
            chi_bar_lb,
            r_q,
            r_c: crate::graph::mean_pairwise_distance(dist),
        })
    }
}

/// Interior local maxima with `t0 < t <= t1`. A point counts when it
/// exceeds its left neighbour and the next differing value to its right,
/// so a plateau contributes its earliest point only.
pub fn local_maxima(series: &ObservableSeries, window: (f64, f64)) -> Vec<(f64, f64)> {
    let t = series.times();
    let y = series.values();
    let mut maxima = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if !(t[i] > window.0 && t[i] <= window.1 + GRID_SLACK) || !(y[i] > y[i - 1]) {
            continue;
        }
        if let Some(next) = y[i + 1..].iter().find(|&&v| v != y[i]) {
            if *next < y[i] {
                maxima.push((t[i], y[i]));
            }
        }
    }
    maxima
}

/// Least-squares slope of `log(value)` against `log(t)` through the local
/// maxima of `series` in `window = (t0, t1]`.
pub fn envelope_exponent(series: &ObservableSeries, window: (f64, f64)) -> Result<f64> {
    for (t, v) in series.points() {
        if t > window.0 && t <= window.1 + GRID_SLACK && !(v > 0.0) {
            return Err(Error::NonPositive(t));
        }
    }
    let maxima = local_maxima(series, window);
    if maxima.len() < 3 {
        return Err(Error::InsufficientMaxima(maxima.len()));
    }
    let logs: Vec<(f64, f64)> = maxima.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    Ok(least_squares_slope(&logs))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Ordinary least-squares slope of the series against `t` on `[t0, t1]`.
pub fn linear_slope(series: &ObservableSeries, window: (f64, f64)) -> Result<f64> {
    let idx = series.window_indices(window.0, window.1)?;
    let points: Vec<(f64, f64)> = idx.iter().map(|&i| (series.times()[i], series.values()[i])).collect();
    Ok(least_squares_slope(&points))
}

fn same_grid(a: &ObservableSeries, b: &ObservableSeries) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::DimensionMismatch("series live on different grids".into()));
    }
    Ok(())
}

/// Pointwise `classical / quantum`; NaN where the quantum value vanishes.
pub fn ratio_series(classical: &ObservableSeries, quantum: &ObservableSeries) -> Result<ObservableSeries> {
    same_grid(classical, quantum)?;
    let values = classical
        .values
        .iter()
        .zip(&quantum.values)
        .map(|(&c, &q)| if q == 0.0 { f64::NAN } else { c / q })
        .collect();
    ObservableSeries::new(classical.grid.clone(), values, ObservableTag::RatioClassicalOverQuantum)
}

/// First time after [`CROSSING_SEARCH_START`] at which the
/// classical/quantum ratio crosses 1 from below, linearly interpolated
/// between the bracketing grid points.
pub fn crossing_time(classical: &ObservableSeries, quantum: &ObservableSeries) -> Result<f64> {
    let ratio = ratio_series(classical, quantum)?;
    let t = ratio.times();
    let r = ratio.values();
    let start = t.iter().position(|&x| x >= CROSSING_SEARCH_START - GRID_SLACK).unwrap_or(t.len());
    for i in start + 1..t.len() {
        let (a, b) = (r[i - 1], r[i]);
        if a < 1.0 && b >= 1.0 {
            return Ok(t[i - 1] + (1.0 - a) / (b - a) * (t[i] - t[i - 1]));
        }
    }
    Err(Error::NoCrossing { start: t.get(start).copied().unwrap_or(ratio.grid.end()), end: ratio.grid.end() })
}
