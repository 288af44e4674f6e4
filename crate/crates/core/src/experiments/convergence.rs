//! Global error of the Euler map against the reference flow.

use super::fit::{scaling_fit, FitResult};
use crate::error::{Error, Result};
use crate::map::{EulerMap, State};
use crate::reference::reference_flow;

pub const REFERENCE_TOL: f64 = 1e-13;

/// Step counts log-spaced over one decade: `h = horizon / n` for `n` in 100..=1000.
pub const DEFAULT_STEPS: [usize; 7] = [100, 147, 215, 316, 464, 681, 1000];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPoint {
    pub h: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub points: Vec<ErrorPoint>,
    pub fit: FitResult,
}

/// Sup-norm error in `(x, y)` after `n` Euler steps of size `horizon / n`.
pub fn euler_error(start: State, lambda: f64, horizon: f64, n: usize, reference: &State) -> Result<f64> {
    if n == 0 {
        return Err(Error::BadInput("need at least one step".into()));
    }
    let h = horizon / n as f64;
    let map = EulerMap::new(lambda, 1.0);
    let mut s = State::new(start.x, start.y, start.eps, h);
    for k in 1..=n {
        s = map.step(s, k)?;
    }
    Ok((s.x - reference.x).abs().max((s.y - reference.y).abs()))
}

/// Errors at fast time `horizon` for each step count, with a log-log fit of error against `h`.
pub fn convergence_study(start: State, lambda: f64, horizon: f64, steps: &[usize]) -> Result<ConvergenceStudy> {
    let reference = reference_flow(start, lambda, horizon, REFERENCE_TOL)?;
    let points = steps
        .iter()
        .map(|&n| Ok(ErrorPoint { h: horizon / n as f64, error: euler_error(start, lambda, horizon, n, &reference)? }))
        .collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = points.iter().map(|p| p.h).collect();
    let es: Vec<f64> = points.iter().map(|p| p.error).collect();
    Ok(ConvergenceStudy { fit: scaling_fit(&hs, &es)?, points })
}

/// Error on the `lambda = 1` diagonal, where both the map and the flow move
/// linearly in time. Dyadic inputs keep every Euler step exact.
pub fn diagonal_error(x0: f64, eps: f64, h: f64, n: usize) -> Result<f64> {
    let start = State::new(x0, x0, eps, h);
    let horizon = h * n as f64;
    let reference = reference_flow(start, 1.0, horizon, REFERENCE_TOL)?;
    euler_error(start, 1.0, horizon, n, &reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order() {
        let start = State::new(-0.8, -0.6, 0.05, 0.0);
        let s = convergence_study(start, 0.5, 1.0, &DEFAULT_STEPS).unwrap();
        assert!((s.fit.slope - 1.0).abs() < 0.1, "{:?}", s.fit);
        let reference = reference_flow(start, 0.5, 1.0, REFERENCE_TOL).unwrap();
        let ratio = s.points[0].error / euler_error(start, 0.5, 1.0, 200, &reference).unwrap();
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn diagonal_is_exact() {
        let e = diagonal_error(-1.0, 1.0 / 16.0, 1.0 / 1024.0, 1024).unwrap();
        assert!(e <= 4.0 * f64::EPSILON, "{e}");
    }
}
