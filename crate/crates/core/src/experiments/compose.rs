//! Global passages assembled from the chart maps, checked against direct
//! iteration of the original map.

use crate::charts::{blow_down, k12, k21, k23, ChartPoint, K1Point};
use crate::error::{Error, Result};
use crate::map::{default_half_width, DeltaKind, EulerMap, State};
use crate::passage::{closest_k1, pi_1_minus, pi_2, pi_3, Outcome, PassageOptions, Regime, Sections};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub name: &'static str,
    pub steps: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composed {
    pub start: State,
    pub legs: Vec<Leg>,
    pub exit: ChartPoint,
    /// Blow-down of `exit`.
    pub exit_state: State,
    pub steps: usize,
    /// The original map iterated `steps` times from `start`.
    pub direct: State,
    /// `|y_exit - y_direct| / |y_direct|`.
    pub y_discrepancy: f64,
}

/// Original-space entry heights that lie both in the entry segment and in R1.
pub fn start_window(s: &Sections) -> (f64, f64) {
    let p = &s.params;
    let w = default_half_width(DeltaKind::In, p);
    let (lo, hi) = s.r1_window();
    let shrink = 1e-12 * p.rho;
    ((p.rho * lo).max(-p.rho - w) + shrink, (p.rho * hi).min(-p.rho + w) - shrink)
}

fn entry(y0: f64, s: &Sections) -> Result<(State, K1Point)> {
    let p = &s.params;
    let eps1 = p.eps / (p.rho * p.rho);
    let h1 = p.h * p.rho;
    if ((eps1 - p.delta / 4.0) / p.delta).abs() > 1e-12 || ((h1 - p.nu) / p.nu).abs() > 1e-12 {
        return Err(Error::InvalidParams("composition needs eps = rho^2 delta/4 and h = nu/rho".into()));
    }
    let start = State::new(-p.rho, y0, p.eps, p.h);
    let q = K1Point::new(p.rho, y0 / p.rho, p.delta / 4.0, p.nu);
    Ok((start, q))
}

fn finish(start: State, legs: Vec<Leg>, exit: ChartPoint, s: &Sections) -> Result<Composed> {
    let steps = legs.iter().map(|l| l.steps).sum();
    let map = EulerMap::from_params(&s.params);
    let mut d = start;
    for k in 1..=steps {
        d = map.step(d, k)?;
    }
    let exit_state = blow_down(&exit)?;
    Ok(Composed {
        start,
        legs,
        exit,
        exit_state,
        steps,
        direct: d,
        y_discrepancy: (exit_state.y - d.y).abs() / d.y.abs(),
    })
}

fn leg(name: &'static str, rep: &crate::passage::PassageReport) -> Leg {
    Leg { name, steps: rep.steps, outcome: rep.outcome }
}

fn k1_of(c: &ChartPoint) -> K1Point {
    match c {
        ChartPoint::K1(q) => *q,
        _ => unreachable!("entry-chart leg"),
    }
}

fn k2_of(c: &ChartPoint) -> crate::charts::K2Point {
    match c {
        ChartPoint::K2(q) => *q,
        _ => unreachable!("scaling-chart leg"),
    }
}

/// Entry chart up, scaling chart across, entry chart back down (lambda < 1).
pub fn compose_pi_a(y0: f64, s: &Sections) -> Result<Composed> {
    if Regime::for_lambda(s.params.lambda)? != Regime::Attracting {
        return Err(Error::WrongRegime(format!("attracting composition needs lambda < 1, got {}", s.params.lambda)));
    }
    let (start, q) = entry(y0, s)?;
    let opts = PassageOptions::default();
    let a = pi_1_minus(&q, s, &opts)?;
    let b = pi_2(&k12(&k1_of(&a.exit))?, s, Regime::Attracting, &opts)?;
    let c = closest_k1(&k21(&k2_of(&b.exit))?, s, &opts)?;
    let exit = c.exit;
    finish(start, vec![leg("entry_up", &a), leg("scaling", &b), leg("entry_down", &c)], exit, s)
}

/// Entry chart up, scaling chart across, exit chart out (lambda > 1).
pub fn compose_pi_e(y0: f64, s: &Sections) -> Result<Composed> {
    if Regime::for_lambda(s.params.lambda)? != Regime::Exit {
        return Err(Error::WrongRegime(format!("exit composition needs lambda > 1, got {}", s.params.lambda)));
    }
    let (start, q) = entry(y0, s)?;
    let opts = PassageOptions::default();
    let a = pi_1_minus(&q, s, &opts)?;
    let b = pi_2(&k12(&k1_of(&a.exit))?, s, Regime::Exit, &opts)?;
    let c = pi_3(&k23(&k2_of(&b.exit))?, s, &opts)?;
    let exit = c.exit;
    finish(start, vec![leg("entry_up", &a), leg("scaling", &b), leg("exit", &c)], exit, s)
}
