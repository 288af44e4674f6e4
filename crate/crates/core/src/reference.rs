//! Continuous-time reference: `x' = x^2 - y^2 + lambda eps`, `y' = eps`,
//! integrated with Dormand-Prince 5(4) and compensated state accumulation.

use crate::error::{Error, Result};
use crate::map::State;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
// fifth minus fourth order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[inline]
fn field(lambda: f64, eps: f64, u: [f64; 2]) -> [f64; 2] {
    [u[0] * u[0] - u[1] * u[1] + lambda * eps, eps]
}

/// State at fast time `horizon`; `tol` is used as both absolute and relative tolerance.
pub fn reference_flow(s0: State, lambda: f64, horizon: f64, tol: f64) -> Result<State> {
    if !(horizon >= 0.0 && tol > 0.0 && s0.is_finite()) {
        return Err(Error::BadInput(format!("horizon {horizon}, tol {tol}, start {s0:?}")));
    }
    let eps = s0.eps;
    let mut u = [s0.x, s0.y];
    let mut comp = [0.0f64; 2];
    let mut t = 0.0;
    let mut comp_t = 0.0;
    let mut dt = (horizon * 1e-2).max(f64::MIN_POSITIVE);
    let mut k = [[0.0f64; 2]; 7];
    while t < horizon {
        let last = t + dt >= horizon;
        let step = if last { horizon - t } else { dt };
        if step <= 1e-15 * horizon.max(1.0) && !last {
            return Err(Error::StepUnderflow { t });
        }
        k[0] = field(lambda, eps, u);
        for i in 1..7 {
            let mut v = u;
            for (j, kj) in k.iter().enumerate().take(i) {
                v[0] += step * A[i][j] * kj[0];
                v[1] += step * A[i][j] * kj[1];
            }
            k[i] = field(lambda, eps, v);
        }
        let mut inc = [0.0f64; 2];
        let mut err = 0.0f64;
        for d in 0..2 {
            let mut s = 0.0;
            let mut e = 0.0;
            for i in 0..7 {
                s += B[i] * k[i][d];
                e += E[i] * k[i][d];
            }
            inc[d] = step * s;
            let scale = tol + tol * u[d].abs().max((u[d] + inc[d]).abs());
            err = err.max((step * e).abs() / scale);
        }
        if !err.is_finite() {
            dt = step * 0.1;
            if dt <= 1e-15 * horizon.max(1.0) {
                return Err(Error::StepUnderflow { t });
            }
            continue;
        }
        if err <= 1.0 {
            for d in 0..2 {
                let y = inc[d] - comp[d];
                let s = u[d] + y;
                comp[d] = (s - u[d]) - y;
                u[d] = s;
            }
            if last {
                t = horizon;
            } else {
                let y = step - comp_t;
                let s = t + y;
                comp_t = (s - t) - y;
                t = s;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        dt = step * factor;
        if err > 1.0 && dt <= 1e-15 * horizon.max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
    }
    Ok(State::new(u[0], u[1], s0.eps, s0.h))
}
