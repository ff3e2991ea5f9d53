//! Infinite-lattice quantum-walk results used as baselines for finite
//! simulations: chain probabilities and displacements, their
//! d-dimensional products, and Euclidean averages.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, bessel_j_sequence, BesselConfig};
use crate::{Error, Result};

/// Largest acceptable `1 - Σ π` for truncated lattice sums.
pub const MASS_DEFICIT_LIMIT: f64 = 1e-8;

/// Cap on the number of coordinate tuples visited by lattice sums.
const MAX_TUPLES: f64 = 1e8;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

fn check_dims(d: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok(())
}

/// Order cut-off `2⌈2t⌉ + 40` for sums over lattice sites.
pub fn default_truncation(t: f64) -> u64 {
    2 * (2.0 * t).ceil() as u64 + 40
}

/// Largest time at which a finite lattice of side `side` still behaves like
/// the infinite one, `side / 8`.
pub fn pre_wrap_limit(side: usize) -> f64 {
    side as f64 / 8.0
}

/// `π_{k,0}(t) = J_k²(2t)` on the infinite chain.
pub fn chain_pi_infinite(k: i64, t: f64, cfg: &BesselConfig) -> Result<f64> {
    check_time(t)?;
    Ok(bessel_j(k, 2.0 * t, cfg)?.powi(2))
}

/// `⟨r(t)⟩ = z [z J_0²(z) + z J_1²(z) - J_0(z) J_1(z)]` with `z = 2t`.
pub fn chain_displacement_exact(t: f64, cfg: &BesselConfig) -> Result<f64> {
    check_time(t)?;
    let z = 2.0 * t;
    let j = bessel_j_sequence(1, z, cfg)?;
    Ok(z * (z * j[0] * j[0] + z * j[1] * j[1] - j[0] * j[1]))
}

/// `4t/π`, the long-time chain asymptote.
pub fn chain_asymptote(t: f64) -> f64 {
    4.0 * t / PI
}

/// `Π_j J_{k_j}²(2t)` on the infinite hypercubic lattice.
pub fn hypercubic_pi_factorized(coords: &[i64], t: f64, cfg: &BesselConfig) -> Result<f64> {
    check_dims(coords.len() as u32)?;
    coords.iter().try_fold(1.0, |acc, &k| Ok(acc * chain_pi_infinite(k, t, cfg)?))
}

/// `d` times the chain displacement.
pub fn hypercubic_displacement(d: u32, t: f64, cfg: &BesselConfig) -> Result<f64> {
    check_dims(d)?;
    Ok(d as f64 * chain_displacement_exact(t, cfg)?)
}

/// `(ℓ/√3, ℓ)`, bracketing the Euclidean distance of lattice points at
/// chemical distance `ℓ` for `d <= 3`.
pub fn euclidean_bounds(chemical: f64, dims: u32) -> Result<(f64, f64)> {
    check_dims(dims)?;
    if dims > 3 {
        return Err(Error::InvalidParameter(format!("the sqrt(3) bound needs d <= 3, got {dims}")));
    }
    if !(chemical >= 0.0) {
        return Err(Error::InvalidParameter(format!("chemical distance must be >= 0, got {chemical}")));
    }
    Ok((chemical / 3f64.sqrt(), chemical))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanAverage {
    pub value: f64,
    /// `1 - Σ Π J²` over the truncated box.
    pub mass_deficit: f64,
}

/// `Σ_{|k_j| <= truncation} ‖k‖ Π_j J_{k_j}²(2t)` on the infinite
/// `d`-dimensional lattice.
pub fn euclidean_displacement_avg(d: u32, t: f64, truncation: u64, cfg: &BesselConfig) -> Result<EuclideanAverage> {
    check_dims(d)?;
    check_time(t)?;
    let width = 2 * truncation as usize + 1;
    if (width as f64).powi(d as i32) > MAX_TUPLES {
        return Err(Error::InvalidParameter(format!("{width}^{d} lattice tuples exceed the summation cap")));
    }
    let j = bessel_j_sequence(truncation, 2.0 * t, cfg)?;
    let probs: Vec<f64> = (0..width).map(|i| j[(i as i64 - truncation as i64).unsigned_abs() as usize].powi(2)).collect();
    let squares: Vec<f64> = (0..width).map(|i| (i as f64 - truncation as f64).powi(2)).collect();

    let mut value = 0.0;
    let mut mass = 0.0;
    let mut index = vec![0usize; d as usize];
    loop {
        let (mut p, mut r2) = (1.0, 0.0);
        for &i in &index {
            p *= probs[i];
            r2 += squares[i];
        }
        value += r2.sqrt() * p;
        mass += p;
        let mut axis = 0;
        loop {
            if axis == index.len() {
                let mass_deficit = 1.0 - mass;
                if mass_deficit > MASS_DEFICIT_LIMIT {
                    return Err(Error::TruncationTooSmall(mass_deficit));
                }
                return Ok(EuclideanAverage { value, mass_deficit });
            }
            index[axis] += 1;
            if index[axis] < width {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

/// One line of the baseline export.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub t: f64,
    pub chain_exact: f64,
    pub asymptote_4t_over_pi: f64,
    pub d_dim_value: f64,
}

pub fn baseline_rows(times: &[f64], d: u32, cfg: &BesselConfig) -> Result<Vec<BaselineRow>> {
    check_dims(d)?;
    times
        .iter()
        .map(|&t| {
            let chain = chain_displacement_exact(t, cfg)?;
            Ok(BaselineRow {
                t,
                chain_exact: chain,
                asymptote_4t_over_pi: chain_asymptote(t),
                d_dim_value: d as f64 * chain,
            })
        })
        .collect()
}
