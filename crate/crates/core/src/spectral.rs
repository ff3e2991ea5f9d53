//! Laplacian spectra: dense eigendecomposition, the exact iterative DSG
//! spectrum and clustering of numerically degenerate eigenvalues.

use std::ops::Range;

use nalgebra::{DMatrix, DVectorView, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default absolute tolerance for grouping numerically equal eigenvalues.
pub const DEFAULT_DEGENERACY_TOLERANCE: f64 = 1e-8;

/// Largest tolerated asymmetry of an input matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// How far a member eigenvalue may sit from its class representative before
/// a class table is considered inconsistent with a spectrum.
const CLASS_MATCH_TOLERANCE: f64 = 1e-6;

/// Full eigensystem of a real symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Column `n` is `|ψ_n⟩`.
    eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn node_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthogonal matrix whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, n: usize) -> DVectorView<'_, f64> {
        self.eigenvectors.column(n)
    }

    /// `max |⟨ψ_n|ψ_m⟩ - δ_nm|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        let n = self.node_count();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (gram[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    /// `Σ_n λ_n |ψ_n⟩⟨ψ_n|`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (n, &lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(n).scale_mut(lambda);
        }
        scaled * self.eigenvectors.transpose()
    }

    /// Cluster the eigenvalues with the default tolerance.
    pub fn degeneracy_classes(&self) -> DegeneracyClasses {
        cluster_degeneracies(&self.eigenvalues, DEFAULT_DEGENERACY_TOLERANCE)
            .expect("eigenvalues are sorted and the tolerance is positive")
    }
}

/// Diagonalize a real symmetric matrix.
pub fn decompose(matrix: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let n = matrix.nrows();
    let asymmetry = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (matrix[(i, j)] - matrix[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asymmetry > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asymmetry));
    }
    if n == 0 {
        return Ok(SpectralDecomposition { eigenvalues: Vec::new(), eigenvectors: DMatrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 200 * n + 1000)
        .ok_or(Error::NoConvergence(n))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |row, col| eig.eigenvectors[(row, order[col])]);
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// Distinct eigenvalues with multiplicities, strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyClasses {
    values: Vec<f64>,
    multiplicities: Vec<usize>,
    /// Clustering tolerance used; zero for exactly known spectra.
    tolerance: f64,
}

impl DegeneracyClasses {
    pub fn new(values: Vec<f64>, multiplicities: Vec<usize>, tolerance: f64) -> Result<Self> {
        if values.len() != multiplicities.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values vs {} multiplicities",
                values.len(),
                multiplicities.len()
            )));
        }
        if multiplicities.contains(&0) {
            return Err(Error::InvalidParameter("zero multiplicity".into()));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] - w[0] <= tolerance) {
            return Err(Error::InvalidParameter(format!(
                "distinct values {} and {} are not separated by more than {tolerance:e}",
                w[0], w[1]
            )));
        }
        Ok(DegeneracyClasses { values, multiplicities, tolerance })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Number of distinct eigenvalues.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ_i m(λ̃_i)`, the size of the underlying spectrum.
    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.values.iter().copied().zip(self.multiplicities.iter().copied())
    }

    /// The full ascending spectrum, each value repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.iter().flat_map(|(v, m)| std::iter::repeat_n(v, m)).collect()
    }

    /// Index range of each class inside the ascending spectrum.
    pub fn ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.multiplicities
            .iter()
            .map(|&m| {
                let r = start..start + m;
                start += m;
                r
            })
            .collect()
    }

    /// Check that these classes partition `eigenvalues` (ascending) into
    /// contiguous groups sitting on their representatives.
    pub fn check_matches(&self, eigenvalues: &[f64]) -> Result<()> {
        if self.total() != eigenvalues.len() {
            return Err(Error::ClassMismatch(format!(
                "classes cover {} eigenvalues, spectrum has {}",
                self.total(),
                eigenvalues.len()
            )));
        }
        for (range, &value) in self.ranges().into_iter().zip(&self.values) {
            for n in range {
                if (eigenvalues[n] - value).abs() > CLASS_MATCH_TOLERANCE {
                    return Err(Error::ClassMismatch(format!(
                        "eigenvalue #{n} = {} is far from its class value {value}",
                        eigenvalues[n]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Greedy gap clustering: a new class starts whenever two consecutive
/// eigenvalues differ by more than `tolerance`. The representative is the
/// class mean.
pub fn cluster_degeneracies(eigenvalues: &[f64], tolerance: f64) -> Result<DegeneracyClasses> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
    }
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("eigenvalues must be ascending".into()));
    }
    let mut values = Vec::new();
    let mut multiplicities = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > tolerance {
            let class = &eigenvalues[start..i];
            values.push(class.iter().sum::<f64>() / class.len() as f64);
            multiplicities.push(class.len());
            start = i;
        }
    }
    Ok(DegeneracyClasses { values, multiplicities, tolerance })
}

/// Exact Laplacian spectrum of the generation-`g` Dual Sierpinski Gasket.
///
/// Each generation contributes the eigenvalue 0 (simple), 3 with
/// multiplicity `(3^{g-1} + 3)/2` and 5 with multiplicity `(3^{g-1} - 1)/2`;
/// every non-zero eigenvalue `λ` of generation `g - 1` spawns the two
/// children `(5 ± √(25 - 4λ))/2`, each inheriting its multiplicity.
pub fn dsg_spectrum_iterative(g: u32) -> Result<DegeneracyClasses> {
    if g < 1 {
        return Err(Error::InvalidParameter(format!("DSG generation must be >= 1, got {g}")));
    }
    if g > 30 {
        return Err(Error::InvalidParameter(format!("DSG generation {g} overflows the multiplicity table")));
    }
    let mut level: Vec<(f64, usize)> = vec![(0.0, 1), (3.0, 2)];
    for h in 2..=g {
        let base = 3usize.pow(h - 1);
        let mut next = vec![(0.0, 1), (3.0, (base + 3) / 2)];
        if base > 1 {
            next.push((5.0, (base - 1) / 2));
        }
        for &(parent, m) in level.iter().filter(|(v, _)| *v != 0.0) {
            let root = (25.0 - 4.0 * parent).sqrt();
            next.push(((5.0 - root) / 2.0, m));
            next.push(((5.0 + root) / 2.0, m));
        }
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        level = next;
    }
    let (values, multiplicities) = level.into_iter().unzip();
    DegeneracyClasses::new(values, multiplicities, 0.0)
}
