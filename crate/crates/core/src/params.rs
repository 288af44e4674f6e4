use crate::error::{Error, Result};

/// Problem constants of the discretized transcritical normal form.
///
/// `nu = rho * h` and `gamma = 2|lambda - 1| + |lambda|` are derived on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub lambda: f64,
    pub rho: f64,
    pub delta: f64,
    pub nu: f64,
    pub h: f64,
    pub eps: f64,
    pub gamma: f64,
    pub c: f64,
    /// Exit-window constant for the scaling chart in the exit regime. `None` means calibrate on demand.
    pub omega: Option<f64>,
}

impl Params {
    /// Original-space parameters; `c` defaults to `nu / 2`.
    pub fn new(lambda: f64, rho: f64, delta: f64, eps: f64, h: f64) -> Result<Self> {
        let nu = rho * h;
        let p = Params {
            lambda,
            rho,
            delta,
            nu,
            h,
            eps,
            gamma: gamma(lambda),
            c: 0.5 * nu,
            omega: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters seen from chart K1 entry: `r1 = rho`, `eps1 = delta/4`, `h1 = nu`.
    pub fn from_chart(lambda: f64, rho: f64, delta: f64, nu: f64) -> Result<Self> {
        Self::new(lambda, rho, delta, rho * rho * delta / 4.0, nu / rho)
    }

    pub fn with_c(mut self, c: f64) -> Result<Self> {
        self.c = c;
        self.validate()?;
        Ok(self)
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be positive, got {omega}")));
        }
        self.omega = Some(omega);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        for (name, v) in [
            ("lambda", self.lambda),
            ("rho", self.rho),
            ("delta", self.delta),
            ("h", self.h),
            ("eps", self.eps),
            ("c", self.c),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} is not finite"));
            }
        }
        if self.rho <= 0.0 {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if self.delta <= 0.0 {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        let hr3 = self.h * self.rho.powi(3);
        if !(0.0 < hr3 && hr3 < self.eps) {
            return bad(format!(
                "need 0 < h*rho^3 < eps, got h*rho^3 = {hr3}, eps = {}",
                self.eps
            ));
        }
        if self.nu >= self.delta {
            return bad(format!("need nu = rho*h < delta, got nu = {}", self.nu));
        }
        if self.nu >= 0.125 {
            return bad(format!("need nu < 1/8, got nu = {}", self.nu));
        }
        if (self.lambda * self.delta).abs() > 1.0 {
            return bad(format!("need |lambda*delta| <= 1, got {}", self.lambda * self.delta));
        }
        if !(0.0 < self.c && self.c < self.nu) {
            return bad(format!("need 0 < c < nu, got c = {}", self.c));
        }
        Ok(())
    }

    /// `eps <= rho^2 * delta`, the admissible range for the global statements.
    pub fn within_eps_gate(&self) -> bool {
        self.eps <= self.rho * self.rho * self.delta
    }

    pub fn is_canard(&self) -> bool {
        self.lambda == 1.0
    }

    /// Lower bound on the chart-K1 transition count, `1 / (17 gamma nu delta)`.
    pub fn transition_bound(&self) -> f64 {
        1.0 / (17.0 * self.gamma * self.nu * self.delta)
    }

    /// Chart-K2 radius and step of trajectories entering from the K1 entry section.
    pub fn r2(&self) -> f64 {
        self.eps.sqrt()
    }

    pub fn h2(&self) -> f64 {
        self.h * self.eps.sqrt()
    }

    /// Default iteration cap for original-space passages.
    pub fn default_cap(&self) -> usize {
        (16.0 * self.rho / (self.h * self.eps)).ceil() as usize
    }
}

pub fn gamma(lambda: f64) -> f64 {
    2.0 * (lambda - 1.0).abs() + lambda.abs()
}
