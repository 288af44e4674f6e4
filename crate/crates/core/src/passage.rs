//! Entry/exit sets in the three charts and the chart-level transition maps.

use crate::argmin::{Argmin, DEFAULT_PATIENCE};
use crate::charts::{
    f1, f3, k21, step_k1_at, step_k2_at, step_k3_at, ChartPoint, K1Point, K2Point, K3Point,
};
use crate::error::{Error, Result};
use crate::map::DIVERGENCE_FACTOR;
use crate::params::Params;
use crate::section::{Bound, Interval, SectionSet, Space};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSet {
    pub beta1: f64,
    pub beta1_hat: f64,
    pub beta2: f64,
    pub beta2_hat: f64,
    pub beta2_plus: f64,
    pub beta2_plus_hat: f64,
    pub beta1_plus: f64,
    pub beta1_plus_hat: f64,
}

impl BetaSet {
    pub fn new(lambda: f64, delta: f64) -> Self {
        let between = lambda > 0.0 && lambda < 1.0;
        BetaSet {
            beta1: if between { lambda * delta / 16.0 } else { (2.0 * lambda - 1.0) * delta / 16.0 },
            beta1_hat: (lambda - 1.0).abs() * delta,
            beta2: if between { lambda * delta / 8.0 } else { (2.0 * lambda - 1.0) * delta / 4.0 },
            beta2_hat: (lambda - 1.0).abs() * delta,
            beta2_plus: (lambda + 1.0).abs() * delta / 2.0,
            beta2_plus_hat: (lambda.abs() + 1.0) * delta / 2.0,
            beta1_plus: 3.0 * (lambda + 1.0).abs() * delta / 4.0,
            beta1_plus_hat: 3.0 * (lambda.abs() + 1.0) * delta / 4.0,
        }
    }
}

/// All entry/exit sets of the chart passages for one parameter set.
#[derive(Debug, Clone)]
pub struct Sections {
    pub params: Params,
    pub betas: BetaSet,
    pub omega: f64,
    pub sigma1_minus_in: SectionSet,
    pub sigma1_minus_out: SectionSet,
    pub r1: SectionSet,
    pub sigma1_plus_in: SectionSet,
    pub sigma1_plus_out: SectionSet,
    pub r2: SectionSet,
    pub sigma2_in: SectionSet,
    pub sigma2_a_out: SectionSet,
    pub sigma2_e_out: SectionSet,
    pub sigma3_in: SectionSet,
    pub sigma3_out: SectionSet,
}

impl Sections {
    pub fn all(&self) -> [&SectionSet; 11] {
        [
            &self.sigma1_minus_in,
            &self.sigma1_minus_out,
            &self.r1,
            &self.sigma1_plus_in,
            &self.sigma1_plus_out,
            &self.r2,
            &self.sigma2_in,
            &self.sigma2_a_out,
            &self.sigma2_e_out,
            &self.sigma3_in,
            &self.sigma3_out,
        ]
    }

    /// Slow-coordinate window of the entry set R1.
    pub fn r1_window(&self) -> (f64, f64) {
        let p = [0.0; 4];
        self.r1.bounds[1].bounds(&p)
    }

    pub fn r2_window(&self) -> (f64, f64) {
        let p = [0.0; 4];
        self.r2.bounds[1].bounds(&p)
    }

    /// Entry point of the K1 entry section with slow coordinate `y1`.
    pub fn k1_entry(&self, y1: f64) -> K1Point {
        let p = &self.params;
        K1Point::new(p.rho, y1, p.delta / 4.0, p.nu)
    }

    /// Point of R2 on the trajectory family entering from the K1 entry
    /// section: the K1 image of `x2 = -delta^{-1/2}` at the induced `r2`, `h2`.
    pub fn r2_point(&self, y1: f64) -> Result<K1Point> {
        let p = &self.params;
        let mut q = k21(&K2Point::new(-1.0 / p.delta.sqrt(), 0.0, p.r2(), p.h2()))?;
        q.y1 = y1;
        Ok(q)
    }
}

/// Exit-window constant: default value from the calibration sweep for `lambda = 2`.
pub const DEFAULT_OMEGA: f64 = 0.262;

pub fn build_sections(params: &Params) -> Result<Sections> {
    params.validate()?;
    let omega = match params.omega {
        Some(o) => o,
        None if params.lambda > 1.0 => calibrate_omega(params.lambda, &CALIBRATION_DELTAS)?.omega,
        None => DEFAULT_OMEGA,
    };
    build_sections_with_omega(params, omega)
}

pub fn build_sections_with_omega(params: &Params, omega: f64) -> Result<Sections> {
    params.validate()?;
    let (rho, delta, nu, lambda) = (params.rho, params.delta, params.nu, params.lambda);
    let b = BetaSet::new(lambda, delta);
    let sd = delta.sqrt();
    let isd = 1.0 / sd;
    let free = Interval::free();

    let sigma1_minus_in = SectionSet::new(
        "sigma1_minus_in",
        Space::K1,
        [Interval::point(rho), free, Interval::point(delta / 4.0), Interval::point(nu)],
    );
    let sigma1_minus_out = SectionSet::new(
        "sigma1_minus_out",
        Space::K1,
        [
            Interval::closed(rho / 2.0, rho / 2.0 * (1.0 + nu)),
            free,
            Interval::closed(delta * (1.0 - 2.0 * nu), delta),
            Interval::closed(nu / 2.0, nu / 2.0 * (1.0 + nu)),
        ],
    );
    let r1 = sigma1_minus_in
        .clone()
        .with(1, Interval::closed(-1.0 - b.beta1, -1.0 + b.beta1_hat))
        .renamed("R1");

    let r2lo = sd * rho / 2.0;
    let r2hi = sd * rho;
    let h2lo = sd * nu / 2.0;
    let h2hi = sd * nu;
    let h2_window = Interval::closed(h2lo, h2hi);
    let sigma2_in = SectionSet::new(
        "sigma2_in",
        Space::K2,
        [
            Interval::closed(-1.0 / (delta * (1.0 - 2.0 * nu)).sqrt(), -isd),
            Interval::closed(isd * (-1.0 - b.beta2), isd * (-1.0 + b.beta2_hat)),
            Interval::closed(r2lo, r2hi),
            h2_window,
        ],
    );
    let a_out_x = Interval {
        lo: Bound::Affine { base: -isd, coord: 3, slope: -0.5 },
        hi: Bound::Affine { base: -isd, coord: 3, slope: 0.5 },
        lo_open: false,
        hi_open: false,
    };
    let sigma2_a_out = SectionSet::new(
        "sigma2_a_out",
        Space::K2,
        [
            a_out_x,
            Interval::closed(isd * (1.0 - b.beta2_plus_hat), isd * (1.0 + b.beta2_plus)),
            Interval::closed(r2lo, r2hi),
            h2_window,
        ],
    );
    let e_out_x = Interval {
        lo: Bound::At(isd),
        hi: Bound::Affine { base: isd, coord: 3, slope: lambda + 1.0 / delta },
        lo_open: false,
        hi_open: false,
    };
    let sigma2_e_out = SectionSet::new(
        "sigma2_e_out",
        Space::K2,
        [
            e_out_x,
            Interval { lo: Bound::At(0.0), hi: Bound::At(omega * delta.powf(-1.0 / 6.0)), lo_open: false, hi_open: true },
            Interval::closed(r2lo, r2hi),
            h2_window,
        ],
    );

    // k21-image of the attracting exit box, widened by 10%
    let (xlo, xhi) = (isd - h2hi / 2.0, isd + h2hi / 2.0); // |x2| range
    let widen = |lo: f64, hi: f64| {
        let w = 0.05 * (hi - lo);
        (lo - w, hi + w)
    };
    let (e_lo, e_hi) = widen(1.0 / (xhi * xhi), 1.0 / (xlo * xlo));
    let (r_lo, r_hi) = widen(xlo * r2lo, xhi * r2hi);
    let (hh_lo, hh_hi) = widen(xlo * h2lo, xhi * h2hi);
    let sigma1_plus_in = SectionSet::new(
        "sigma1_plus_in",
        Space::K1,
        [
            Interval::closed(r_lo.max(0.0), r_hi.min(rho)),
            free,
            Interval::closed(e_lo.max(0.0), e_hi.min(2.0 * delta)),
            Interval::closed(hh_lo.max(0.0), hh_hi.min(nu)),
        ],
    );
    let r2 = sigma1_plus_in
        .clone()
        .with(1, Interval::closed(1.0 - b.beta1_plus_hat, 1.0 + b.beta1_plus))
        .renamed("R2");
    let sigma1_plus_out = SectionSet::new(
        "sigma1_plus_out",
        Space::K1,
        [Interval::point(rho), Interval::above(0.0), Interval::point(delta / 4.0), Interval::point(nu)],
    );

    let sigma3_in = SectionSet::new(
        "sigma3_in",
        Space::K3,
        [
            Interval::closed(0.0, rho),
            free,
            Interval::closed(1.0 / (1.0 / delta + 4.0 * nu / delta), delta),
            Interval::closed(0.0, nu),
        ],
    );
    let sigma3_out = SectionSet::new(
        "sigma3_out",
        Space::K3,
        [Interval::point(rho), Interval::above(0.0), Interval::point(delta / 4.0), Interval::point(nu)],
    );

    Ok(Sections {
        params: *params,
        betas: b,
        omega,
        sigma1_minus_in,
        sigma1_minus_out,
        r1,
        sigma1_plus_in,
        sigma1_plus_out,
        r2,
        sigma2_in,
        sigma2_a_out,
        sigma2_e_out,
        sigma3_in,
        sigma3_out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// First entry into the target set.
    Entered,
    /// Closest approach to the target set.
    Closest,
    /// Crossed the target's slab without entering the set.
    Missed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassageReport {
    pub entry: ChartPoint,
    pub exit: ChartPoint,
    pub steps: usize,
    /// Lower bound on `steps` where one is claimed, else NaN.
    pub bound: f64,
    pub outcome: Outcome,
    /// Distance of `exit` to the target set.
    pub distance: f64,
    /// Log of the transverse tangent multiplier accumulated over the passage.
    pub log_contraction: f64,
    pub path: Option<Vec<ChartPoint>>,
}

#[derive(Debug, Clone, Copy)]
pub struct PassageOptions {
    pub cap: Option<usize>,
    pub patience: usize,
    pub record_path: bool,
}

impl Default for PassageOptions {
    fn default() -> Self {
        PassageOptions { cap: None, patience: DEFAULT_PATIENCE, record_path: false }
    }
}

impl PassageOptions {
    pub fn recording() -> Self {
        PassageOptions { record_path: true, ..Default::default() }
    }

    fn cap(&self, p: &Params) -> usize {
        self.cap.unwrap_or_else(|| (64.0 / (p.nu * p.delta)).ceil() as usize)
    }
}

fn breach(step: usize, what: impl Into<String>) -> Error {
    Error::InvariantBreach { step, what: what.into() }
}

/// Entry-chart passage from R1 to the first point in the entry-chart exit set.
pub fn pi_1_minus(p0: &K1Point, s: &Sections, opts: &PassageOptions) -> Result<PassageReport> {
    let p = &s.params;
    if !s.r1.contains(&p0.to_array()) {
        return Err(Error::Domain { coord: "y1", value: p0.y1, reason: "start not in R1" });
    }
    let cap = opts.cap(p);
    let mut path = opts.record_path.then(|| vec![ChartPoint::K1(*p0)]);
    let mut q = *p0;
    let mut logc = 0.0;
    for k in 1..=cap {
        if !(f1(q.y1, q.eps1, p.lambda) > 0.0) {
            return Err(breach(k - 1, format!("F1 = {} not positive", f1(q.y1, q.eps1, p.lambda))));
        }
        logc += (-2.0 * q.h1).ln_1p();
        let n = step_k1_at(&q, p.lambda, k)?;
        if !(n.eps1 > q.eps1 && n.h1 < q.h1 && n.r1 < q.r1) {
            return Err(breach(k, "eps1 increasing, h1 and r1 decreasing"));
        }
        q = n;
        if let Some(v) = path.as_mut() {
            v.push(ChartPoint::K1(q));
        }
        if s.sigma1_minus_out.contains(&q.to_array()) {
            return Ok(PassageReport {
                entry: ChartPoint::K1(*p0),
                exit: ChartPoint::K1(q),
                steps: k,
                bound: p.transition_bound(),
                outcome: Outcome::Entered,
                distance: 0.0,
                log_contraction: logc,
                path,
            });
        }
    }
    Err(Error::CapReached { cap, best: None })
}

/// Entry-chart passage from R2 to the closest approach of the entry-chart exit section.
pub fn pi_1_plus(p0: &K1Point, s: &Sections, opts: &PassageOptions) -> Result<PassageReport> {
    if !s.r2.contains(&p0.to_array()) {
        return Err(Error::Domain { coord: "y1", value: p0.y1, reason: "start not in R2" });
    }
    closest_k1(p0, s, opts)
}

/// `pi_1_plus` without the entry-set check.
pub(crate) fn closest_k1(p0: &K1Point, s: &Sections, opts: &PassageOptions) -> Result<PassageReport> {
    let p = &s.params;
    let cap = opts.cap(p);
    let target = &s.sigma1_plus_out;
    let mut path = opts.record_path.then(|| vec![ChartPoint::K1(*p0)]);
    let mut det = Argmin::new(opts.patience, None);
    let mut q = *p0;
    let mut logc = 0.0;
    let mut best = (q, 0.0);
    let mut armed = false;
    for k in 1..=cap {
        logc += (-2.0 * q.h1).ln_1p();
        q = step_k1_at(&q, p.lambda, k)?;
        if let Some(v) = path.as_mut() {
            v.push(ChartPoint::K1(q));
        }
        // off the graph eps1 can first grow; the approach starts once it falls below entry
        armed |= q.eps1 < p0.eps1;
        if !armed {
            continue;
        }
        let a = q.to_array();
        let hit = det.observe(k, &a, target.distance(&a));
        if det.improved() {
            best = (q, logc);
        }
        if let Some((i, d)) = hit {
            if let Some(v) = path.as_mut() {
                v.truncate(i + 1);
            }
            return Ok(PassageReport {
                entry: ChartPoint::K1(*p0),
                exit: ChartPoint::K1(best.0),
                steps: i,
                bound: f64::NAN,
                outcome: Outcome::Closest,
                distance: d,
                log_contraction: best.1,
                path,
            });
        }
    }
    Err(Error::CapReached { cap, best: det.best() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Attracting,
    Exit,
}

impl Regime {
    pub fn for_lambda(lambda: f64) -> Result<Self> {
        if lambda < 1.0 {
            Ok(Regime::Attracting)
        } else if lambda > 1.0 {
            Ok(Regime::Exit)
        } else {
            Err(Error::WrongRegime("lambda = 1 is the canard case".into()))
        }
    }
}

/// Scaling-chart passage from the scaling-chart entry set to the first entry
/// into the regime's exit set. Crossing the exit slab outside the set ends the
/// passage with `Outcome::Missed`.
pub fn pi_2(p0: &K2Point, s: &Sections, regime: Regime, opts: &PassageOptions) -> Result<PassageReport> {
    let p = &s.params;
    if Regime::for_lambda(p.lambda)? != regime {
        return Err(Error::WrongRegime(format!("regime {regime:?} does not match lambda = {}", p.lambda)));
    }
    if !s.sigma2_in.contains(&p0.to_array()) {
        return Err(Error::Domain { coord: "x2", value: p0.x2, reason: "start not in the scaling-chart entry set" });
    }
    let isd = 1.0 / p.delta.sqrt();
    let bound = DIVERGENCE_FACTOR * p.rho;
    let cap = opts.cap(p);
    let target = match regime {
        Regime::Attracting => &s.sigma2_a_out,
        Regime::Exit => &s.sigma2_e_out,
    };
    let mut path = opts.record_path.then(|| vec![ChartPoint::K2(*p0)]);
    let mut q = *p0;
    let mut logc = 0.0;
    for k in 1..=cap {
        logc += (2.0 * q.h2 * q.x2).ln_1p();
        q = step_k2_at(&q, p.lambda, bound, k)?;
        if let Some(v) = path.as_mut() {
            v.push(ChartPoint::K2(q));
        }
        let a = q.to_array();
        let (entered, slab) = match regime {
            Regime::Attracting => (target.contains(&a), q.y2 > 0.0 && q.x2 <= -isd + q.h2 / 2.0),
            Regime::Exit => (target.contains(&a), q.x2 >= isd),
        };
        if entered || slab {
            return Ok(PassageReport {
                entry: ChartPoint::K2(*p0),
                exit: ChartPoint::K2(q),
                steps: k,
                bound: f64::NAN,
                outcome: if entered { Outcome::Entered } else { Outcome::Missed },
                distance: target.distance(&a),
                log_contraction: logc,
                path,
            });
        }
    }
    Err(Error::CapReached { cap, best: None })
}

/// Exit-chart passage to the closest approach of the exit-chart exit section.
pub fn pi_3(p0: &K3Point, s: &Sections, opts: &PassageOptions) -> Result<PassageReport> {
    let p = &s.params;
    if !s.sigma3_in.contains(&p0.to_array()) {
        return Err(Error::Domain { coord: "eps3", value: p0.eps3, reason: "start not in the exit-chart entry set" });
    }
    let cap = opts.cap(p);
    let target = &s.sigma3_out;
    let mut path = opts.record_path.then(|| vec![ChartPoint::K3(*p0)]);
    let mut det = Argmin::new(opts.patience, None);
    let mut q = *p0;
    let mut logc = 0.0;
    let mut best = (q, 0.0);
    det.observe(0, &q.to_array(), target.distance(&q.to_array()));
    for k in 1..=cap {
        let f = f3(q.y3, q.eps3, p.lambda);
        if !(f > 0.0) {
            return Err(breach(k - 1, format!("F3 = {f} not positive")));
        }
        logc += (2.0 * q.h3).ln_1p();
        let n = step_k3_at(&q, p.lambda, k)?;
        if !(n.eps3 < q.eps3) {
            return Err(breach(k, "eps3 decreasing"));
        }
        q = n;
        if let Some(v) = path.as_mut() {
            v.push(ChartPoint::K3(q));
        }
        let a = q.to_array();
        let hit = det.observe(k, &a, target.distance(&a));
        if det.improved() {
            best = (q, logc);
        }
        if let Some((i, d)) = hit {
            if let Some(v) = path.as_mut() {
                v.truncate(i + 1);
            }
            return Ok(PassageReport {
                entry: ChartPoint::K3(*p0),
                exit: ChartPoint::K3(best.0),
                steps: i,
                bound: f64::NAN,
                outcome: Outcome::Closest,
                distance: d,
                log_contraction: best.1,
                path,
            });
        }
    }
    Err(Error::CapReached { cap, best: det.best() })
}

/// Scaling-chart trajectory without an exit set (used for the canard case).
pub fn run_k2(p0: &K2Point, lambda: f64, n: usize, rho: f64) -> Result<Vec<K2Point>> {
    let bound = DIVERGENCE_FACTOR * rho;
    let mut out = Vec::with_capacity(n + 1);
    out.push(*p0);
    let mut q = *p0;
    for k in 1..=n {
        q = step_k2_at(&q, lambda, bound, k)?;
        out.push(q);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub name: &'static str,
    pub passed: bool,
    pub offending_index: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityVerdict {
    pub clauses: Vec<Clause>,
    pub steps: usize,
}

impl MonotonicityVerdict {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }
}

fn clause(name: &'static str, bad: Option<usize>, detail: String) -> Clause {
    Clause { name, passed: bad.is_none(), offending_index: bad, detail }
}

/// Pointwise diagonal-side checks along a scaling-chart passage.
pub fn measure_monotonicity(p0: &K2Point, s: &Sections) -> Result<MonotonicityVerdict> {
    let p = &s.params;
    let regime = Regime::for_lambda(p.lambda)?;
    let rep = pi_2(p0, s, regime, &PassageOptions::recording())?;
    let path: Vec<K2Point> = rep
        .path
        .unwrap_or_default()
        .into_iter()
        .map(|c| match c {
            ChartPoint::K2(q) => q,
            _ => unreachable!("scaling-chart path"),
        })
        .collect();
    let sd = p.delta.sqrt();
    let h2 = p0.h2;
    let lambda = p.lambda;
    let mut clauses = Vec::new();

    let bad = path.windows(2).position(|w| w[0].x2 < 0.0 && w[0].y2 < 0.0 && !(w[1].x2 > w[0].x2));
    clauses.push(clause("x_increasing_in_third_quadrant", bad.map(|i| i + 1), String::new()));

    // above the diagonal means x <= y
    let above = |q: &K2Point| q.x2 <= q.y2;
    let below = |q: &K2Point| q.y2 <= q.x2;
    if lambda <= 0.0 {
        let bad = path.iter().position(|q| !above(q));
        clauses.push(clause("always_above_diagonal", bad, String::new()));
    } else if lambda < 1.0 {
        let nc = path.iter().position(above);
        match nc {
            None => clauses.push(clause("crosses_diagonal", Some(path.len() - 1), "never crossed".into())),
            Some(nc) => {
                if p0.y2 < p0.x2 {
                    let gap = p0.x2 - p0.y2;
                    let by_gap = (gap / ((1.0 - lambda) * h2)).ceil() as usize;
                    clauses.push(clause(
                        "crossing_within_gap_bound",
                        (nc > by_gap).then_some(nc),
                        format!("crossing {nc}, bound {by_gap}"),
                    ));
                    let n_ineq = (0..)
                        .find(|&n| {
                            let t = n as f64 * h2;
                            t / (t + sd / 8.0) >= lambda
                        })
                        .unwrap_or(0);
                    let n_star = nc.max(n_ineq);
                    let ok = path.get(n_star).map(|q| above(q) && q.y2 < 0.0);
                    clauses.push(clause(
                        "above_diagonal_at_inequality_index",
                        (ok != Some(true)).then_some(n_star),
                        format!("n* = {n_star}"),
                    ));
                }
                let bad = path.iter().skip(nc).position(|q| !above(q)).map(|i| i + nc);
                clauses.push(clause("stays_above_after_crossing", bad, String::new()));
            }
        }
    } else {
        let nc = path.iter().position(below);
        match nc {
            None => clauses.push(clause("crosses_diagonal", Some(path.len() - 1), "never crossed".into())),
            Some(nc) => {
                if p0.x2 < p0.y2 {
                    let gap = p0.y2 - p0.x2;
                    let by_gap = (gap / ((lambda - 1.0) * h2)).ceil() as usize;
                    clauses.push(clause(
                        "crossing_within_gap_bound",
                        (nc > by_gap).then_some(nc),
                        format!("crossing {nc}, bound {by_gap}"),
                    ));
                    let n_ineq = (sd / h2).ceil() as usize;
                    let n_star = nc.max(n_ineq);
                    let ok = path.get(n_star).map(|q| below(q) && q.x2 < 0.0);
                    clauses.push(clause(
                        "below_diagonal_at_inequality_index",
                        (ok != Some(true)).then_some(n_star),
                        format!("n* = {n_star}"),
                    ));
                }
                let bad = path.iter().skip(nc).position(|q| !below(q)).map(|i| i + nc);
                clauses.push(clause("stays_below_after_crossing", bad, String::new()));
            }
        }
    }
    Ok(MonotonicityVerdict { clauses, steps: rep.steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntrySet {
    R1,
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionSweep {
    pub width_in: f64,
    pub width_out: f64,
    /// `width_out / width_in`, `None` when the input width is zero.
    pub ratio: Option<f64>,
    /// Weakest (largest) log transverse multiplier over the samples.
    pub log_rate: f64,
}

/// Push evenly spaced samples of the entry set's slow window through the
/// matching entry-chart passage and measure widths and tangent contraction.
pub fn contraction_sweep(which: EntrySet, s: &Sections, n_samples: usize) -> Result<ContractionSweep> {
    let (lo, hi) = match which {
        EntrySet::R1 => s.r1_window(),
        EntrySet::R2 => s.r2_window(),
    };
    contraction_sweep_on(which, s, &linspace(lo, hi, n_samples)?)
}

pub fn contraction_sweep_on(which: EntrySet, s: &Sections, ys: &[f64]) -> Result<ContractionSweep> {
    if ys.len() < 2 {
        return Err(Error::BadInput("need at least two samples".into()));
    }
    let opts = PassageOptions::default();
    let exits: Vec<Result<(f64, f64)>> = ys
        .par_iter()
        .map(|&y| {
            let rep = match which {
                EntrySet::R1 => pi_1_minus(&s.k1_entry(y), s, &opts)?,
                EntrySet::R2 => pi_1_plus(&s.r2_point(y)?, s, &opts)?,
            };
            Ok((rep.exit.slow(), rep.log_contraction))
        })
        .collect();
    let exits = exits.into_iter().collect::<Result<Vec<_>>>()?;
    let spread = |v: &mut dyn Iterator<Item = f64>| {
        let (mn, mx) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        mx - mn
    };
    let width_in = spread(&mut ys.iter().copied());
    let width_out = spread(&mut exits.iter().map(|e| e.0));
    let log_rate = exits.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(ContractionSweep {
        width_in,
        width_out,
        ratio: (width_in > 0.0).then(|| width_out / width_in),
        log_rate,
    })
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::BadInput("need at least one sample".into())),
        1 => Ok(vec![0.5 * (lo + hi)]),
        _ => Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()),
    }
}

pub const CALIBRATION_DELTAS: [f64; 5] = [0.0125, 0.025, 0.05, 0.1, 0.2];

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaCalibration {
    pub omega: f64,
    /// (delta, max of y2 * delta^{1/6} at the exit slab)
    pub samples: Vec<(f64, f64)>,
}

/// `1.25 x` the largest `y2 * delta^{1/6}` observed where scaling-chart
/// trajectories from the entry set reach `x2 = delta^{-1/2}`.
pub fn calibrate_omega(lambda: f64, deltas: &[f64]) -> Result<OmegaCalibration> {
    if !(lambda > 1.0) {
        return Err(Error::WrongRegime(format!("calibration needs lambda > 1, got {lambda}")));
    }
    let mut samples = Vec::new();
    for &delta in deltas {
        let p = Params::from_chart(lambda, 1.0, delta, delta / 8.0)?;
        let s = build_sections_with_omega(&p, f64::MAX)?;
        let isd = 1.0 / delta.sqrt();
        let a = [0.0; 4];
        let (xlo, xhi) = s.sigma2_in.bounds[0].bounds(&a);
        let (ylo, yhi) = s.sigma2_in.bounds[1].bounds(&a);
        let (hlo, hhi) = s.sigma2_in.bounds[3].bounds(&a);
        let mut worst = 0.0f64;
        for x in linspace(xlo, xhi, 3)? {
            for y in linspace(ylo, yhi, 3)? {
                for h in [hlo, hhi] {
                    let mut q = K2Point::new(x, y, p.r2(), h);
                    let mut k = 0;
                    while q.x2 < isd {
                        k += 1;
                        q = step_k2_at(&q, lambda, f64::MAX, k)?;
                        if k > 100_000_000 {
                            return Err(Error::CapReached { cap: k, best: None });
                        }
                    }
                    worst = worst.max(q.y2 * delta.powf(1.0 / 6.0));
                }
            }
        }
        samples.push((delta, worst));
    }
    let omega = 1.25 * samples.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(OmegaCalibration { omega, samples })
}
