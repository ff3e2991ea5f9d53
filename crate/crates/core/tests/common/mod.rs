//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};

use ctqw_core::graph::GraphFamily;

/// `exp(a)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = a.iter().map(|v| v.abs()).fold(0.0, f64::max) * a.nrows() as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(squarings);
    let n = a.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `exp(-i h t)` for real symmetric `h`, same scheme in complex arithmetic.
pub fn expm_unitary(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex<f64>> {
    let a: DMatrix<Complex<f64>> = h.map(|v| Complex::new(0.0, -v * t));
    let norm = h.iter().map(|v| v.abs()).fold(0.0, f64::max) * h.nrows() as f64 * t.abs();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a.map(|v| v / 2f64.powi(squarings));
    let n = h.nrows();
    let mut result = DMatrix::<Complex<f64>>::identity(n, n);
    let mut term = result.clone();
    for k in 1..=30 {
        term = (&term * &scaled).map(|v| v / k as f64);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `J_n(z) = (1/2π) ∫_0^{2π} cos(nτ - z sin τ) dτ` by the trapezoid rule.
pub fn bessel_integral(n: i64, z: f64) -> f64 {
    let m = 4096;
    let h = 2.0 * std::f64::consts::PI / m as f64;
    (0..m).map(|i| (n as f64 * i as f64 * h - z * (i as f64 * h).sin()).cos()).sum::<f64>() / m as f64
}

/// Every generated graph with `N <= 300` used by the universal suites.
pub fn universal_families() -> Vec<GraphFamily> {
    let mut out = Vec::new();
    for g in 1..=5 {
        out.push(GraphFamily::DualSierpinski { g });
    }
    for shells in 1..=6 {
        out.push(GraphFamily::CayleyTree { z: 3, shells });
    }
    for shells in 1..=3 {
        out.push(GraphFamily::CayleyTree { z: 4, shells });
    }
    for side in [3, 4, 5, 8, 16] {
        out.push(GraphFamily::HypercubicTorus { d: 2, side });
    }
    out.push(GraphFamily::HypercubicTorus { d: 3, side: 4 });
    for n in [3, 5, 10, 16, 40] {
        out.push(GraphFamily::Ring { n });
        out.push(GraphFamily::Chain { n });
    }
    for n in [2, 4, 9] {
        out.push(GraphFamily::Complete { n });
    }
    out
}
