//! Order bounds `measured <= K * nominal` with `K` fitted on one half of a
//! grid and checked on the other.

use crate::error::{Error, Result};

pub const STABILITY_TOL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// Largest `measured / nominal` on the calibration half (even indices).
    pub k_calibration: f64,
    /// The same on the validation half (odd indices).
    pub k_validation: f64,
    /// Points exceeding `(1 + STABILITY_TOL) * k_calibration * nominal`.
    pub exceedances: usize,
}

impl BoundCheck {
    pub fn relative_change(&self) -> f64 {
        (self.k_validation / self.k_calibration - 1.0).abs()
    }

    pub fn stable(&self) -> bool {
        self.relative_change() <= STABILITY_TOL
    }

    pub fn passed(&self) -> bool {
        self.stable() && self.exceedances == 0
    }
}

pub fn calibrated_bound_check(measured: &[f64], nominal: &[f64]) -> Result<BoundCheck> {
    if measured.len() != nominal.len() || measured.len() < 4 {
        return Err(Error::BadInput(format!(
            "need matching grids of at least 4 points, got {} and {}",
            measured.len(),
            nominal.len()
        )));
    }
    if nominal.iter().any(|v| !(*v > 0.0)) || measured.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::BadInput("nominal rates must be positive and measurements non-negative".into()));
    }
    let k_of = |parity: usize| {
        measured
            .iter()
            .zip(nominal)
            .enumerate()
            .filter(|(i, _)| i % 2 == parity)
            .map(|(_, (m, n))| m / n)
            .fold(0.0f64, f64::max)
    };
    let k_calibration = k_of(0);
    let k_validation = k_of(1);
    let limit = (1.0 + STABILITY_TOL) * k_calibration;
    let exceedances = measured.iter().zip(nominal).filter(|(m, n)| **m > limit * **n).count();
    Ok(BoundCheck { k_calibration, k_validation, exceedances })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_data_is_stable() {
        let nominal = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let measured: Vec<f64> = nominal.iter().map(|n| 0.3 * n).collect();
        let b = calibrated_bound_check(&measured, &nominal).unwrap();
        assert!(b.passed());
        assert!((b.k_calibration - 0.3).abs() < 1e-15);
    }

    #[test]
    fn wrong_rate_is_caught() {
        let nominal = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        let measured: Vec<f64> = nominal.iter().map(|n| n * n).collect();
        assert!(!calibrated_bound_check(&measured, &nominal).unwrap().passed());
    }
}
