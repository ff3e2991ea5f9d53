//! Bessel functions of the first kind `J_k(z)` for integer order and real
//! argument `z >= 0`.
//!
//! Small arguments use the ascending power series. Larger arguments use
//! Miller's downward recurrence normalized by `J_0 + 2 Σ_{k≥1} J_{2k} = 1`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Below this argument the power series is used.
pub const SERIES_THRESHOLD: f64 = 5.0;

const RESCALE_ABOVE: f64 = 1e200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselConfig {
    rel_tolerance: f64,
    max_order: u64,
}

impl Default for BesselConfig {
    fn default() -> Self {
        BesselConfig { rel_tolerance: 1e-12, max_order: 100_000 }
    }
}

impl BesselConfig {
    pub fn new(rel_tolerance: f64, max_order: u64) -> Result<Self> {
        if !(rel_tolerance > 0.0 && rel_tolerance <= 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "rel_tolerance must lie in (0, 1e-6], got {rel_tolerance}"
            )));
        }
        Ok(BesselConfig { rel_tolerance, max_order })
    }

    pub fn rel_tolerance(&self) -> f64 {
        self.rel_tolerance
    }

    pub fn max_order(&self) -> u64 {
        self.max_order
    }

    fn check_order(&self, order: u64) -> Result<()> {
        if order > self.max_order {
            return Err(Error::OrderTooLarge { order, max_order: self.max_order });
        }
        Ok(())
    }
}

fn check_argument(z: f64) -> Result<()> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("Bessel argument must be finite and >= 0, got {z}")));
    }
    Ok(())
}

/// `J_k(z)`; negative orders use `J_{-k} = (-1)^k J_k`.
pub fn bessel_j(k: i64, z: f64, cfg: &BesselConfig) -> Result<f64> {
    check_argument(z)?;
    let order = k.unsigned_abs();
    cfg.check_order(order)?;
    let value = if z == 0.0 {
        if order == 0 { 1.0 } else { 0.0 }
    } else if z < SERIES_THRESHOLD {
        series(order, z, cfg.rel_tolerance)
    } else {
        miller(order, z)[order as usize]
    };
    Ok(if k < 0 && order % 2 == 1 { -value } else { value })
}

/// `[J_0(z), J_1(z), ..., J_kmax(z)]`.
pub fn bessel_j_sequence(kmax: u64, z: f64, cfg: &BesselConfig) -> Result<Vec<f64>> {
    check_argument(z)?;
    cfg.check_order(kmax)?;
    if z == 0.0 {
        let mut out = vec![0.0; kmax as usize + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    if z < SERIES_THRESHOLD {
        return Ok((0..=kmax).map(|k| series(k, z, cfg.rel_tolerance)).collect());
    }
    let mut values = miller(kmax, z);
    values.truncate(kmax as usize + 1);
    Ok(values)
}

/// `Σ_m (-1)^m (z/2)^{2m+n} / (m! (m+n)!)`.
fn series(n: u64, z: f64, tol: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = half * half;
    let mut sum = term;
    let mut m = 0u64;
    loop {
        m += 1;
        term *= -q / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() <= 1e-3 * tol * sum.abs() || term == 0.0 {
            return sum;
        }
    }
}

fn start_order(kmax: u64, z: f64) -> u64 {
    let reach = (kmax as f64).max(z);
    let start = (reach + 50.0 + (60.0 * reach).sqrt()).ceil() as u64;
    start + start % 2
}

/// Downward recurrence `J_{k-1} = (2k/z) J_k - J_{k+1}` from a large even
/// start order, returning orders `0..=kmax` (at least).
fn miller(kmax: u64, z: f64) -> Vec<f64> {
    let start = start_order(kmax, z);
    let keep = kmax as usize + 1;
    let mut stored = vec![0.0; keep];
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut norm = if start % 2 == 0 { 2.0 * current } else { 0.0 };
    if (start as usize) < keep {
        stored[start as usize] = current;
    }
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / z * current - above;
        above = current;
        current = below;
        let order = k - 1;
        if (order as usize) < keep {
            stored[order as usize] = current;
        }
        if order % 2 == 0 {
            norm += if order == 0 { current } else { 2.0 * current };
        }
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            above *= s;
            norm *= s;
            for v in stored.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in stored.iter_mut() {
        *v /= norm;
    }
    stored
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `(1/2π) ∫_0^{2π} cos(nτ - z sin τ) dτ`; the trapezoid rule converges
    /// spectrally for this periodic integrand.
    fn integral_oracle(n: i64, z: f64) -> f64 {
        let m = 4096;
        let h = 2.0 * PI / m as f64;
        (0..m).map(|i| (n as f64 * i as f64 * h - z * (i as f64 * h).sin()).cos()).sum::<f64>() / m as f64
    }

    fn cfg() -> BesselConfig {
        BesselConfig::default()
    }

    #[test]
    fn base_cases() {
        assert_eq!(bessel_j(0, 0.0, &cfg()).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0, &cfg()).unwrap(), 0.0);
        assert_eq!(bessel_j(-2, 0.0, &cfg()).unwrap(), 0.0);
        assert!(bessel_j(0, -1.0, &cfg()).is_err());
        assert!(bessel_j(0, f64::NAN, &cfg()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(BesselConfig::new(0.0, 10).is_err());
        assert!(BesselConfig::new(1e-3, 10).is_err());
        let small = BesselConfig::new(1e-12, 10).unwrap();
        assert!(matches!(bessel_j(11, 1.0, &small), Err(Error::OrderTooLarge { order: 11, max_order: 10 })));
        assert!(bessel_j_sequence(11, 1.0, &small).is_err());
    }

    #[test]
    fn matches_integral_representation() {
        for &z in &[0.1, 0.5, 1.0, 2.5, 4.99, 5.0, 7.3, 12.0, 20.0, 40.0, 80.0] {
            for n in [0i64, 1, 2, 3, 5, 8, 13, 21, 40] {
                let value = bessel_j(n, z, &cfg()).unwrap();
                let oracle = integral_oracle(n, z);
                assert!((value - oracle).abs() < 1e-13 * (1.0 + oracle.abs()), "J_{n}({z}) = {value} vs {oracle}");
            }
        }
    }

    #[test]
    fn reference_values() {
        // tabulated values
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6),
            (1, 1.0, 0.440_050_585_744_933_5),
            (0, 10.0, -0.245_935_764_451_348_3),
            (1, 10.0, 0.043_472_746_168_861_44),
            (5, 10.0, -0.234_061_528_186_793_7),
        ];
        for (n, z, expected) in cases {
            let v = bessel_j(n, z, &cfg()).unwrap();
            assert!((v - expected).abs() < 1e-14, "J_{n}({z}) = {v}");
        }
    }

    #[test]
    fn negative_orders() {
        for &z in &[0.7, 9.0] {
            for k in 1..6i64 {
                let pos = bessel_j(k, z, &cfg()).unwrap();
                let neg = bessel_j(-k, z, &cfg()).unwrap();
                assert_eq!(neg, if k % 2 == 1 { -pos } else { pos });
            }
        }
    }

    #[test]
    fn normalization_identity() {
        for &z in &[0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            let kmax = (2.0 * z) as u64 + 40;
            let seq = bessel_j_sequence(kmax, z, &cfg()).unwrap();
            let total = seq[0] * seq[0] + 2.0 * seq[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((total - 1.0).abs() < 1e-10, "z={z}: {total}");
        }
    }

    #[test]
    fn recurrence_residual() {
        for &z in &[0.3, 1.0, 4.0, 6.0, 15.0, 50.0, 300.0] {
            for k in [1i64, 2, 7, 20, 60] {
                let r = bessel_j(k - 1, z, &cfg()).unwrap() + bessel_j(k + 1, z, &cfg()).unwrap()
                    - 2.0 * k as f64 / z * bessel_j(k, z, &cfg()).unwrap();
                assert!(r.abs() <= 1e-10, "k={k} z={z}: {r}");
            }
        }
    }

    #[test]
    fn derivative_identity() {
        let h = 1e-5;
        for &z in &[0.8, 3.0, 5.5, 11.0, 25.0] {
            for k in [0i64, 1, 3, 10] {
                let d = (bessel_j(k, z + h, &cfg()).unwrap() - bessel_j(k, z - h, &cfg()).unwrap()) / (2.0 * h);
                let r = 2.0 * d - bessel_j(k - 1, z, &cfg()).unwrap() + bessel_j(k + 1, z, &cfg()).unwrap();
                assert!(r.abs() <= 1e-8, "k={k} z={z}: {r}");
            }
        }
    }

    #[test]
    fn sequence_matches_single_evaluations() {
        for &z in &[2.0, 30.0] {
            let seq = bessel_j_sequence(70, z, &cfg()).unwrap();
            for (k, v) in seq.iter().enumerate() {
                assert!((v - bessel_j(k as i64, z, &cfg()).unwrap()).abs() < 1e-15);
            }
        }
        assert_eq!(bessel_j_sequence(2, 0.0, &cfg()).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn large_argument_and_high_order() {
        let z = 1000.0;
        let direct = bessel_j(0, z, &cfg()).unwrap();
        assert!((direct - integral_oracle(0, z)).abs() < 1e-12);
        let far = bessel_j(4000, 100.0, &cfg()).unwrap();
        assert_eq!(far, 0.0);
        // deep in the evanescent region the value underflows smoothly
        let tail = bessel_j(120, 50.0, &cfg()).unwrap();
        assert!(tail > 0.0 && tail < 1e-20);
    }
}
