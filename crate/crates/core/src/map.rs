//! The Euler map of the transcritical normal form in original coordinates.

use crate::argmin::{Argmin, DEFAULT_PATIENCE};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::section::{Interval, SectionSet, Space};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub eps: f64,
    pub h: f64,
}

impl State {
    pub fn new(x: f64, y: f64, eps: f64, h: f64) -> Self {
        State { x, y, eps, h }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.eps, self.h]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        State::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// `P(x, y, eps, h) = (x + h(x^2 - y^2 + lambda eps), y + eps h, eps, h)` with a divergence guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerMap {
    pub lambda: f64,
    /// |x| or |y| above this aborts the iteration.
    pub bound: f64,
}

pub const DIVERGENCE_FACTOR: f64 = 1e3;

impl EulerMap {
    pub fn new(lambda: f64, rho: f64) -> Self {
        EulerMap { lambda, bound: DIVERGENCE_FACTOR * rho }
    }

    pub fn from_params(p: &Params) -> Self {
        Self::new(p.lambda, p.rho)
    }

    #[inline]
    pub fn apply(&self, s: State) -> State {
        State {
            x: s.x + s.h * (s.x * s.x - s.y * s.y + self.lambda * s.eps),
            y: s.y + s.eps * s.h,
            eps: s.eps,
            h: s.h,
        }
    }

    /// One step; `step` is only used to label a divergence.
    #[inline]
    pub fn step(&self, s: State, step: usize) -> Result<State> {
        let n = self.apply(s);
        if !(n.x.abs() <= self.bound && n.y.abs() <= self.bound) {
            return Err(Error::Divergence { step, x: n.x, y: n.y });
        }
        Ok(n)
    }
}

pub fn euler_step(s: State, p: &Params) -> Result<State> {
    EulerMap::from_params(p).step(s, 0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub start_index: usize,
    pub hit: Option<Hit>,
    /// The requested number of steps exceeded the iteration cap.
    pub cap_reached: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct IterateOptions {
    pub patience: usize,
    pub cap: Option<usize>,
}

impl Default for IterateOptions {
    fn default() -> Self {
        IterateOptions { patience: DEFAULT_PATIENCE, cap: None }
    }
}

/// Arming rule for original-space targets: wait until the (monotone) slow
/// coordinate reaches the target's window.
pub fn arming_for(target: &SectionSet) -> Option<(usize, f64)> {
    if target.space != Space::Original {
        return None;
    }
    let p = [0.0; 4];
    let lo = target.bounds[1].lo.at(&p);
    lo.is_finite().then_some((1, lo))
}

pub fn iterate(
    s0: State,
    p: &Params,
    n: usize,
    stop: Option<&SectionSet>,
    opts: IterateOptions,
) -> Result<Trajectory> {
    let map = EulerMap::from_params(p);
    let cap = opts.cap.unwrap_or_else(|| p.default_cap());
    let steps = n.min(cap);
    let mut states = Vec::with_capacity(steps.min(1 << 20) + 1);
    states.push(s0);
    let mut det = stop.map(|t| Argmin::new(opts.patience, arming_for(t)));
    let mut hit = None;
    if let (Some(t), Some(d)) = (stop, det.as_mut()) {
        if let Some((i, dist)) = d.observe(0, &s0.to_array(), t.distance(&s0.to_array())) {
            hit = Some(Hit { index: i, distance: dist });
        }
    }
    let mut s = s0;
    for k in 0..steps {
        if hit.is_some() {
            break;
        }
        s = map.step(s, k + 1)?;
        states.push(s);
        if let (Some(t), Some(d)) = (stop, det.as_mut()) {
            let a = s.to_array();
            if let Some((i, dist)) = d.observe(k + 1, &a, t.distance(&a)) {
                hit = Some(Hit { index: i, distance: dist });
            }
        }
    }
    if let Some(h) = hit {
        states.truncate(h.index + 1);
    }
    Ok(Trajectory { states, start_index: 0, hit, cap_reached: hit.is_none() && n > cap })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchId {
    SaMinus,
    SaPlus,
    SrMinus,
    SrPlus,
    OffManifold,
    Origin,
}

impl BranchId {
    pub fn label(self) -> &'static str {
        match self {
            BranchId::SaMinus => "S_a_minus",
            BranchId::SaPlus => "S_a_plus",
            BranchId::SrMinus => "S_r_minus",
            BranchId::SrPlus => "S_r_plus",
            BranchId::OffManifold => "off_manifold",
            BranchId::Origin => "origin",
        }
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn default_branch_tol(s: &State) -> f64 {
    1e-12 * s.x.abs().max(s.y.abs()).max(1.0)
}

/// Critical-manifold branch of `s` by sign pattern; `tol = None` uses the default.
pub fn classify_branch(s: &State, tol: Option<f64>) -> BranchId {
    let tol = tol.unwrap_or_else(|| default_branch_tol(s));
    if s.x.abs() <= tol && s.y.abs() <= tol {
        return BranchId::Origin;
    }
    if (s.x.abs() - s.y.abs()).abs() > tol {
        return BranchId::OffManifold;
    }
    match (s.x < 0.0, s.y < 0.0) {
        (true, true) => BranchId::SaMinus,
        (true, false) => BranchId::SaPlus,
        (false, true) => BranchId::SrMinus,
        (false, false) => BranchId::SrPlus,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaKind {
    In,
    AOut,
    EOut,
}

impl DeltaKind {
    pub fn name(self) -> &'static str {
        match self {
            DeltaKind::In => "delta_in",
            DeltaKind::AOut => "delta_a_out",
            DeltaKind::EOut => "delta_e_out",
        }
    }
}

/// Default half-widths: `rho*delta/4` for the entry and attracting exit
/// segments, `rho/2` for the exit segment (it must contain the exit height).
pub fn default_half_width(kind: DeltaKind, p: &Params) -> f64 {
    match kind {
        DeltaKind::In | DeltaKind::AOut => p.rho * p.delta / 4.0,
        DeltaKind::EOut => p.rho / 2.0,
    }
}

pub fn section_delta(kind: DeltaKind, p: &Params, half_width: f64) -> Result<SectionSet> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::BadInput(format!("half_width must be positive, got {half_width}")));
    }
    let (x, yc) = match kind {
        DeltaKind::In => (-p.rho, -p.rho),
        DeltaKind::AOut => (-p.rho, p.rho),
        DeltaKind::EOut => (p.rho, 0.0),
    };
    Ok(SectionSet::new(
        kind.name(),
        Space::Original,
        [
            Interval::point(x),
            Interval::open(yc - half_width, yc + half_width),
            Interval::point(p.eps),
            Interval::point(p.h),
        ],
    ))
}

/// Result of a closest-approach passage in original coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionHit {
    pub state: State,
    pub index: usize,
    pub distance: f64,
    /// `sum ln(1 + 2 h x_n)` over the steps taken: the log of the transverse
    /// (x at fixed y) tangent multiplier toward the slow manifold.
    pub log_contraction: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PiOptions {
    pub patience: usize,
    pub cap: Option<usize>,
    pub in_half_width: Option<f64>,
    pub out_half_width: Option<f64>,
}

impl Default for PiOptions {
    fn default() -> Self {
        PiOptions { patience: DEFAULT_PATIENCE, cap: None, in_half_width: None, out_half_width: None }
    }
}

/// Attracting passage `Delta_in -> Delta_a_out` (lambda < 1).
pub fn pi_a(y0: f64, p: &Params) -> Result<SectionHit> {
    pi_a_with(y0, p, &PiOptions::default())
}

pub fn pi_a_with(y0: f64, p: &Params, opts: &PiOptions) -> Result<SectionHit> {
    if !(p.lambda < 1.0) {
        return Err(Error::WrongRegime(format!("attracting passage needs lambda < 1, got {}", p.lambda)));
    }
    passage(y0, p, DeltaKind::AOut, opts)
}

/// Exit passage `Delta_in -> Delta_e_out` (lambda > 1).
pub fn pi_e(y0: f64, p: &Params) -> Result<SectionHit> {
    pi_e_with(y0, p, &PiOptions::default())
}

pub fn pi_e_with(y0: f64, p: &Params, opts: &PiOptions) -> Result<SectionHit> {
    if !(p.lambda > 1.0) {
        return Err(Error::WrongRegime(format!("exit passage needs lambda > 1, got {}", p.lambda)));
    }
    passage(y0, p, DeltaKind::EOut, opts)
}

fn passage(y0: f64, p: &Params, kind: DeltaKind, opts: &PiOptions) -> Result<SectionHit> {
    let w_in = opts.in_half_width.unwrap_or_else(|| default_half_width(DeltaKind::In, p));
    let w_out = opts.out_half_width.unwrap_or_else(|| default_half_width(kind, p));
    let din = section_delta(DeltaKind::In, p, w_in)?;
    let target = section_delta(kind, p, w_out)?;
    let s0 = State::new(-p.rho, y0, p.eps, p.h);
    if !din.contains(&s0.to_array()) {
        return Err(Error::Domain { coord: "y", value: y0, reason: "start not in the entry segment" });
    }
    let map = EulerMap::from_params(p);
    let cap = opts.cap.unwrap_or_else(|| p.default_cap());
    let mut det = Argmin::new(opts.patience, arming_for(&target));
    let mut s = s0;
    let mut logc = 0.0;
    let mut best = (s0, 0.0);
    let a = s.to_array();
    if let Some((i, d)) = det.observe(0, &a, target.distance(&a)) {
        return Ok(SectionHit { state: s0, index: i, distance: d, log_contraction: 0.0 });
    }
    for k in 1..=cap {
        logc += (2.0 * s.h * s.x).ln_1p();
        s = map.step(s, k)?;
        let a = s.to_array();
        let hit = det.observe(k, &a, target.distance(&a));
        if det.improved() {
            best = (s, logc);
        }
        if let Some((i, d)) = hit {
            return Ok(SectionHit { state: best.0, index: i, distance: d, log_contraction: best.1 });
        }
    }
    Err(Error::CapReached { cap, best: det.best() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64) -> Params {
        Params::new(lambda, 1.0, 0.1, 0.01, 0.001).unwrap()
    }

    #[test]
    fn origin_without_eps_is_fixed() {
        let m = EulerMap::new(0.7, 1.0);
        let s = State::new(0.0, 0.0, 0.0, 0.003);
        assert_eq!(m.apply(s), s);
    }

    #[test]
    fn substitution_example() {
        let s = euler_step(State::new(0.0, 0.0, 0.01, 0.001), &params(2.0)).unwrap();
        assert!((s.x - 2e-5).abs() < 1e-20);
        assert!((s.y - 1e-5).abs() < 1e-20);
        assert_eq!((s.eps, s.h), (0.01, 0.001));
    }

    #[test]
    fn diagonal_is_invariant_for_lambda_one() {
        let m = EulerMap::new(1.0, 1.0);
        let mut s = State::new(0.3, 0.3, 0.01, 0.001);
        for _ in 0..1000 {
            s = m.apply(s);
            assert_eq!(s.x, s.y);
        }
    }

    #[test]
    fn divergence_is_reported_with_step() {
        let p = params(0.5);
        let t = iterate(State::new(10.0, 0.0, 0.01, 0.001), &p, 100_000, None, IterateOptions::default());
        match t {
            Err(Error::Divergence { step, .. }) => assert!(step > 1),
            other => panic!("expected divergence, got {other:?}"),
        }
        let nan = EulerMap::new(0.5, 1.0).step(State::new(f64::NAN, 0.0, 0.01, 0.001), 3);
        assert!(matches!(nan, Err(Error::Divergence { step: 3, .. })));
    }

    #[test]
    fn zero_steps() {
        let p = params(0.5);
        let s0 = State::new(-1.0, -1.0, p.eps, p.h);
        let t = iterate(s0, &p, 0, None, IterateOptions::default()).unwrap();
        assert_eq!(t.states, vec![s0]);
        assert!(t.hit.is_none() && !t.cap_reached);
    }

    #[test]
    fn cap_marker() {
        let p = params(0.5);
        let s0 = State::new(-1.0, -1.0, p.eps, p.h);
        let t = iterate(s0, &p, 50, None, IterateOptions { cap: Some(10), ..Default::default() }).unwrap();
        assert_eq!(t.states.len(), 11);
        assert!(t.cap_reached);
    }

    #[test]
    fn iterate_hit_is_within_one_step_of_the_section() {
        let p = params(0.5);
        let target = section_delta(DeltaKind::AOut, &p, default_half_width(DeltaKind::AOut, &p)).unwrap();
        let s0 = State::new(-1.0, -0.99, p.eps, p.h);
        let t = iterate(s0, &p, usize::MAX, Some(&target), IterateOptions::default()).unwrap();
        let hit = t.hit.expect("hit");
        assert_eq!(t.states.len(), hit.index + 1);
        let s = t.states[hit.index];
        let prev = t.states[hit.index - 1];
        let next = EulerMap::from_params(&p).apply(s);
        let step = (s.x - prev.x).abs().max((next.x - s.x).abs());
        assert!((s.x + 1.0).abs() <= step, "{} vs {}", (s.x + 1.0).abs(), step);
        assert!(target.bounds[1].contains(s.y, &s.to_array()));
    }

    #[test]
    fn branch_labels() {
        let b = |x, y| classify_branch(&State::new(x, y, 0.0, 0.1), None);
        assert_eq!(b(-1.0, -1.0), BranchId::SaMinus);
        assert_eq!(b(-1.0, 1.0), BranchId::SaPlus);
        assert_eq!(b(1.0, -1.0), BranchId::SrMinus);
        assert_eq!(b(1.0, 1.0), BranchId::SrPlus);
        assert_eq!(b(0.0, 0.0), BranchId::Origin);
        assert_eq!(b(0.5, 0.2), BranchId::OffManifold);
    }

    #[test]
    fn delta_sections() {
        let p = Params::new(0.5, 1.0, 0.2, 0.01, 0.001).unwrap();
        let din = section_delta(DeltaKind::In, &p, 0.05).unwrap();
        assert!(din.contains(&[-1.0, -1.0, p.eps, p.h]));
        assert!(din.contains(&[-1.0, -1.049, p.eps, p.h]));
        assert!(!din.contains(&[-1.0, -1.05, p.eps, p.h]));
        let de = section_delta(DeltaKind::EOut, &p, 0.05).unwrap();
        assert!(de.contains(&[1.0, 0.04, p.eps, p.h]));
        assert!(!de.contains(&[1.0, 0.06, p.eps, p.h]));
        assert!(section_delta(DeltaKind::In, &p, 0.0).is_err());
    }

    #[test]
    fn regimes_are_enforced() {
        assert!(matches!(pi_e(-1.0, &params(0.5)), Err(Error::WrongRegime(_))));
        assert!(matches!(pi_a(-1.0, &params(2.0)), Err(Error::WrongRegime(_))));
        assert!(matches!(pi_a(-1.0, &params(1.0)), Err(Error::WrongRegime(_))));
        assert!(matches!(pi_a(-0.5, &params(0.5)), Err(Error::Domain { .. })));
    }

    #[test]
    fn pi_a_lands_near_the_exit_segment() {
        let p = params(0.5);
        let hit = pi_a(-1.0, &p).unwrap();
        assert!(hit.distance <= p.h * p.eps);
        assert!((hit.state.y - 1.0).abs() < p.rho * p.delta / 4.0);
        assert!(hit.log_contraction < -10.0);
        assert_eq!(pi_a(-1.0, &p).unwrap(), hit);
    }

    #[test]
    fn pi_e_exit_height_is_positive_and_small() {
        let p = params(2.0);
        let hit = pi_e(-1.0, &p).unwrap();
        assert!(hit.state.y > 0.0);
        assert!(hit.state.y < p.eps.cbrt());
        assert!((hit.state.x - 1.0).abs() <= hit.distance + 1e-15);
        assert!(hit.distance <= p.h * (p.eps + 1.0));
    }
}
