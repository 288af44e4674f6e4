//! Blow-up charts K1 (entry, x < 0), K2 (scaling) and K3 (exit, x > 0),
//! the chart changes between them and the desingularized one-step maps.

use crate::error::{Error, Result};
use crate::map::{State, DIVERGENCE_FACTOR};
use crate::params::Params;
use crate::section::{Interval, SectionSet, Space};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K1Point {
    pub r1: f64,
    pub y1: f64,
    pub eps1: f64,
    pub h1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K2Point {
    pub x2: f64,
    pub y2: f64,
    pub r2: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K3Point {
    pub r3: f64,
    pub y3: f64,
    pub eps3: f64,
    pub h3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChartId {
    K1,
    K2,
    K3,
}

impl ChartId {
    pub fn space(self) -> Space {
        match self {
            ChartId::K1 => Space::K1,
            ChartId::K2 => Space::K2,
            ChartId::K3 => Space::K3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartPoint {
    K1(K1Point),
    K2(K2Point),
    K3(K3Point),
}

impl K1Point {
    pub fn new(r1: f64, y1: f64, eps1: f64, h1: f64) -> Self {
        K1Point { r1, y1, eps1, h1 }
    }
    pub fn to_array(self) -> [f64; 4] {
        [self.r1, self.y1, self.eps1, self.h1]
    }
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl K2Point {
    pub fn new(x2: f64, y2: f64, r2: f64, h2: f64) -> Self {
        K2Point { x2, y2, r2, h2 }
    }
    pub fn to_array(self) -> [f64; 4] {
        [self.x2, self.y2, self.r2, self.h2]
    }
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl K3Point {
    pub fn new(r3: f64, y3: f64, eps3: f64, h3: f64) -> Self {
        K3Point { r3, y3, eps3, h3 }
    }
    pub fn to_array(self) -> [f64; 4] {
        [self.r3, self.y3, self.eps3, self.h3]
    }
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl ChartPoint {
    pub fn chart(&self) -> ChartId {
        match self {
            ChartPoint::K1(_) => ChartId::K1,
            ChartPoint::K2(_) => ChartId::K2,
            ChartPoint::K3(_) => ChartId::K3,
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        match self {
            ChartPoint::K1(p) => p.to_array(),
            ChartPoint::K2(p) => p.to_array(),
            ChartPoint::K3(p) => p.to_array(),
        }
    }

    pub fn from_array(chart: ChartId, a: [f64; 4]) -> Self {
        match chart {
            ChartId::K1 => ChartPoint::K1(K1Point::from_array(a)),
            ChartId::K2 => ChartPoint::K2(K2Point::from_array(a)),
            ChartId::K3 => ChartPoint::K3(K3Point::from_array(a)),
        }
    }

    /// The slow chart coordinate (y1, y2 or y3).
    pub fn slow(&self) -> f64 {
        self.to_array()[1]
    }
}

fn positive(coord: &'static str, v: f64, reason: &'static str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { coord, value: v, reason })
    }
}

// Near-correctly-rounded helpers: a square root kept as hi + lo, and
// quotients/products against it rounded once.

fn sqrt2(a: f64) -> (f64, f64) {
    let hi = a.sqrt();
    let lo = (-hi).mul_add(hi, a) / (2.0 * hi);
    (hi, lo)
}

fn div2(a: f64, (hi, lo): (f64, f64)) -> f64 {
    let q = a / hi;
    let r = (-q).mul_add(hi, a) - q * lo;
    q + r / hi
}

fn mul2(a: f64, (hi, lo): (f64, f64)) -> f64 {
    a.mul_add(hi, a * lo)
}

/// `1 / x^2` rounded once from a near-exact value.
fn recip_sq(x: f64) -> f64 {
    let p = x * x;
    let e = x.mul_add(x, -p);
    let q = 1.0 / p;
    let r = (-q).mul_add(p, 1.0) - q * e;
    q.mul_add(r, q)
}

pub fn blow_down(cp: &ChartPoint) -> Result<State> {
    match cp {
        ChartPoint::K1(p) => {
            positive("r1", p.r1, "blow-down needs r1 > 0")?;
            Ok(State::new(-p.r1, p.r1 * p.y1, (p.r1 * p.r1) * p.eps1, p.h1 / p.r1))
        }
        ChartPoint::K2(p) => {
            positive("r2", p.r2, "blow-down needs r2 > 0")?;
            Ok(State::new(p.r2 * p.x2, p.r2 * p.y2, p.r2 * p.r2, p.h2 / p.r2))
        }
        ChartPoint::K3(p) => {
            positive("r3", p.r3, "blow-down needs r3 > 0")?;
            Ok(State::new(p.r3, p.r3 * p.y3, (p.r3 * p.r3) * p.eps3, p.h3 / p.r3))
        }
    }
}

pub fn lift_to_k1(s: &State) -> Result<K1Point> {
    positive("x", -s.x, "K1 needs x < 0")?;
    positive("h", s.h, "h must be positive")?;
    let r1 = -s.x;
    Ok(K1Point::new(r1, s.y / r1, s.eps / (r1 * r1), s.h * r1))
}

pub fn lift_to_k2(s: &State) -> Result<K2Point> {
    positive("eps", s.eps, "K2 needs eps > 0")?;
    positive("h", s.h, "h must be positive")?;
    let r = sqrt2(s.eps);
    Ok(K2Point::new(div2(s.x, r), div2(s.y, r), r.0, mul2(s.h, r)))
}

pub fn lift_to_k3(s: &State) -> Result<K3Point> {
    positive("x", s.x, "K3 needs x > 0")?;
    positive("h", s.h, "h must be positive")?;
    let r3 = s.x;
    Ok(K3Point::new(r3, s.y / r3, s.eps / (r3 * r3), s.h * r3))
}

pub fn k12(p: &K1Point) -> Result<K2Point> {
    positive("eps1", p.eps1, "k12 needs eps1 > 0")?;
    let s = sqrt2(p.eps1);
    Ok(K2Point::new(-div2(1.0, s), div2(p.y1, s), mul2(p.r1, s), mul2(p.h1, s)))
}

pub fn k21(p: &K2Point) -> Result<K1Point> {
    positive("x2", -p.x2, "k21 needs x2 < 0")?;
    Ok(K1Point::new(-p.x2 * p.r2, -p.y2 / p.x2, recip_sq(p.x2), -p.x2 * p.h2))
}

pub fn k32(p: &K3Point) -> Result<K2Point> {
    positive("eps3", p.eps3, "k32 needs eps3 > 0")?;
    let s = sqrt2(p.eps3);
    Ok(K2Point::new(div2(1.0, s), div2(p.y3, s), mul2(p.r3, s), mul2(p.h3, s)))
}

pub fn k23(p: &K2Point) -> Result<K3Point> {
    positive("x2", p.x2, "k23 needs x2 > 0")?;
    Ok(K3Point::new(p.x2 * p.r2, p.y2 / p.x2, recip_sq(p.x2), p.x2 * p.h2))
}

#[inline]
pub fn f1(y1: f64, eps1: f64, lambda: f64) -> f64 {
    1.0 - y1 * y1 + lambda * eps1
}

/// The K1 map. `step` labels errors.
#[inline]
pub fn step_k1_at(p: &K1Point, lambda: f64, step: usize) -> Result<K1Point> {
    let q = 1.0 - p.h1 * f1(p.y1, p.eps1, lambda);
    if !(q > 0.0) {
        return Err(Error::Desingularization { step, factor: q });
    }
    Ok(K1Point::new(p.r1 * q, (p.y1 + p.eps1 * p.h1) / q, p.eps1 / (q * q), p.h1 * q))
}

pub fn step_k1(p: &K1Point, params: &Params) -> Result<K1Point> {
    step_k1_at(p, params.lambda, 0)
}

#[inline]
pub fn step_k2_at(p: &K2Point, lambda: f64, bound: f64, step: usize) -> Result<K2Point> {
    let x = p.x2 + p.h2 * (p.x2 * p.x2 - p.y2 * p.y2 + lambda);
    let y = p.y2 + p.h2;
    if !((x * p.r2).abs() <= bound && (y * p.r2).abs() <= bound) {
        return Err(Error::Divergence { step, x: x * p.r2, y: y * p.r2 });
    }
    Ok(K2Point::new(x, y, p.r2, p.h2))
}

pub fn step_k2(p: &K2Point, params: &Params) -> Result<K2Point> {
    step_k2_at(p, params.lambda, DIVERGENCE_FACTOR * params.rho, 0)
}

#[inline]
pub fn f3(y3: f64, eps3: f64, lambda: f64) -> f64 {
    1.0 - y3 * y3 + lambda * eps3
}

#[inline]
pub fn step_k3_at(p: &K3Point, lambda: f64, step: usize) -> Result<K3Point> {
    let q = 1.0 + p.h3 * f3(p.y3, p.eps3, lambda);
    if !(q > 0.0) {
        return Err(Error::Desingularization { step, factor: q });
    }
    Ok(K3Point::new(p.r3 * q, (p.y3 + p.eps3 * p.h3) / q, p.eps3 / (q * q), p.h3 * q))
}

pub fn step_k3(p: &K3Point, params: &Params) -> Result<K3Point> {
    step_k3_at(p, params.lambda, 0)
}

pub fn step_chart(cp: &ChartPoint, params: &Params) -> Result<ChartPoint> {
    Ok(match cp {
        ChartPoint::K1(p) => ChartPoint::K1(step_k1(p, params)?),
        ChartPoint::K2(p) => ChartPoint::K2(step_k2(p, params)?),
        ChartPoint::K3(p) => ChartPoint::K3(step_k3(p, params)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainBox {
    D1,
    D1Hat,
    D2,
    D3,
    D3Hat,
}

/// Working domains of the charts as closed boxes.
pub fn domain(which: DomainBox, p: &Params) -> SectionSet {
    let (rho, delta, nu) = (p.rho, p.delta, p.nu);
    let sd = delta.sqrt();
    let free = Interval::free();
    match which {
        DomainBox::D1 => SectionSet::new(
            "D1",
            Space::K1,
            [Interval::closed(0.0, rho), free, Interval::closed(0.0, 2.0 * delta), Interval::closed(0.0, nu)],
        ),
        DomainBox::D1Hat => SectionSet::new(
            "D1_hat",
            Space::K1,
            [
                Interval::closed(rho / 2.0, rho),
                free,
                Interval::closed(delta / 4.0, delta),
                Interval::closed(nu / 2.0, nu),
            ],
        ),
        DomainBox::D2 => SectionSet::new(
            "D2",
            Space::K2,
            [free, free, Interval::closed(sd * rho / 2.0, sd * rho), Interval::closed(sd * nu / 2.0, sd * nu)],
        ),
        DomainBox::D3 => SectionSet::new(
            "D3",
            Space::K3,
            [Interval::closed(0.0, rho), free, Interval::closed(0.0, delta), Interval::closed(0.0, nu)],
        ),
        DomainBox::D3Hat => SectionSet::new(
            "D3_hat",
            Space::K3,
            [
                Interval::closed(rho / 2.0, rho),
                free,
                Interval::closed(delta / 4.0, delta),
                Interval::closed(nu / 2.0, nu),
            ],
        ),
    }
}

/// Which chart describes `s`: K2 when its scaling-chart image lies in D2,
/// otherwise K1 for x < 0 and K3 for x > 0.
pub fn choose_chart(s: &State, p: &Params) -> Option<ChartId> {
    if s.eps > 0.0 && s.h > 0.0 {
        if let Ok(k2) = lift_to_k2(s) {
            if domain(DomainBox::D2, p).contains(&k2.to_array()) {
                return Some(ChartId::K2);
            }
        }
    }
    if s.x < 0.0 {
        Some(ChartId::K1)
    } else if s.x > 0.0 {
        Some(ChartId::K3)
    } else {
        None
    }
}

/// Per-component relative discrepancy between two original-space states,
/// measured against the magnitude of the terms that make up one Euler step.
pub fn step_discrepancy(a: &State, b: &State, from: &State, lambda: f64) -> f64 {
    let sx = from.x.abs() + from.h * (from.x * from.x + from.y * from.y + (lambda * from.eps).abs());
    let sy = from.y.abs() + from.eps * from.h;
    let parts = [
        (a.x - b.x).abs() / sx,
        (a.y - b.y).abs() / sy,
        (a.eps - b.eps).abs() / from.eps.abs().max(f64::MIN_POSITIVE),
        (a.h - b.h).abs() / from.h.abs(),
    ];
    parts.iter().fold(0.0, |m, &v| if v.is_nan() { f64::INFINITY } else { m.max(v) })
}

/// Distance in units in the last place between two finite doubles of equal sign.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.is_sign_negative() != b.is_sign_negative() {
        return u64::MAX;
    }
    let (ia, ib) = (a.abs().to_bits(), b.abs().to_bits());
    ia.abs_diff(ib)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::EulerMap;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn blow_down_examples() {
        let s = blow_down(&ChartPoint::K2(K2Point::new(0.0, 0.0, 0.1, 0.01))).unwrap();
        assert_eq!(s.x, 0.0);
        assert_eq!(s.y, 0.0);
        assert!(close(s.eps, 0.01, 1e-15) && close(s.h, 0.1, 1e-15));

        let (rho, delta, nu) = (1.0, 0.1, 0.01);
        let s = blow_down(&ChartPoint::K1(K1Point::new(rho, -1.0, delta / 4.0, nu))).unwrap();
        assert_eq!(s, State::new(-rho, -rho, rho * rho * delta / 4.0, nu / rho));

        let s = blow_down(&ChartPoint::K3(K3Point::new(rho, 0.0, delta / 4.0, nu))).unwrap();
        assert_eq!(s, State::new(rho, 0.0, delta / 4.0, nu));

        assert!(matches!(
            blow_down(&ChartPoint::K1(K1Point::new(0.0, 1.0, 1.0, 1.0))),
            Err(Error::Domain { coord: "r1", .. })
        ));
    }

    #[test]
    fn lift_examples() {
        let k2 = lift_to_k2(&State::new(0.0, 0.0, 0.01, 0.1)).unwrap();
        assert_eq!((k2.x2, k2.y2), (0.0, 0.0));
        assert!(close(k2.r2, 0.1, 1e-15) && close(k2.h2, 0.01, 1e-15));
        let k1 = lift_to_k1(&State::new(-1.0, -1.0, 0.0025, 0.001)).unwrap();
        assert_eq!(k1, K1Point::new(1.0, -1.0, 0.0025, 0.001));
        let k3 = lift_to_k3(&State::new(1.0, 0.1, 0.0025, 0.001)).unwrap();
        assert_eq!(k3, K3Point::new(1.0, 0.1, 0.0025, 0.001));
        assert!(matches!(lift_to_k1(&State::new(0.5, 0.0, 0.1, 0.1)), Err(Error::Domain { coord: "x", .. })));
        assert!(matches!(lift_to_k2(&State::new(0.5, 0.0, 0.0, 0.1)), Err(Error::Domain { coord: "eps", .. })));
        assert!(matches!(lift_to_k3(&State::new(0.5, 0.0, 0.1, 0.0)), Err(Error::Domain { coord: "h", .. })));
    }

    #[test]
    fn chart_change_examples() {
        let k2 = k12(&K1Point::new(1.0, -1.0, 0.04, 0.01)).unwrap();
        assert_eq!(k2.x2, -5.0);
        assert_eq!(k2.y2, -5.0);
        assert!(close(k2.r2, 0.2, 1e-16) && close(k2.h2, 0.002, 1e-16));
        let back = k21(&k2).unwrap();
        for (a, b) in back.to_array().iter().zip(K1Point::new(1.0, -1.0, 0.04, 0.01).to_array()) {
            assert!(ulp_distance(*a, b) <= 2);
        }
        let k3 = k23(&K2Point::new(5.0, 1.0, 0.2, 0.002)).unwrap();
        assert!(close(k3.eps3, 0.04, 1e-16) && close(k3.y3, 0.2, 1e-16));
        assert!(close(k3.r3, 1.0, 1e-16) && close(k3.h3, 0.01, 1e-16));
        assert!(k21(&K2Point::new(1.0, 0.0, 0.1, 0.1)).is_err());
        assert!(k23(&K2Point::new(-1.0, 0.0, 0.1, 0.1)).is_err());
        assert!(k12(&K1Point::new(1.0, 0.0, 0.0, 0.1)).is_err());
        assert!(k32(&K3Point::new(1.0, 0.0, -1.0, 0.1)).is_err());
    }

    #[test]
    fn k1_step_examples() {
        let p = Params::from_chart(0.5, 1.0, 0.1, 0.01).unwrap();
        let fixed = K1Point::new(0.7, -1.0, 0.0, 0.01);
        assert_eq!(step_k1(&fixed, &p).unwrap(), fixed);
        let w = step_k1(&K1Point::new(0.7, 0.0, 0.0, 0.01), &p).unwrap();
        assert_eq!(w, K1Point::new(0.7 * 0.99, 0.0, 0.0, 0.01 * 0.99));
        assert!(matches!(
            step_k1(&K1Point::new(0.7, 0.0, 0.0, 2.0), &p),
            Err(Error::Desingularization { .. })
        ));
    }

    #[test]
    fn k2_step_examples() {
        let p = Params::from_chart(1.0, 1.0, 0.1, 0.01).unwrap();
        let q = step_k2(&K2Point::new(0.3, 0.3, 0.1, 0.01), &p).unwrap();
        assert_eq!(q.x2, 0.3 + 0.01);
        assert_eq!(q.x2, q.y2);
        let p2 = Params::from_chart(-0.5, 1.0, 0.1, 0.01).unwrap();
        let s = -(0.1f64.sqrt()).recip();
        let q = step_k2(&K2Point::new(s, s, 0.1, 0.01), &p2).unwrap();
        assert_eq!(q.x2, s + 0.01 * -0.5);
        assert_eq!((q.r2, q.h2), (0.1, 0.01));
    }

    #[test]
    fn k3_step_examples() {
        let p = Params::from_chart(2.0, 1.0, 0.1, 0.01).unwrap();
        let fixed = K3Point::new(0.4, -1.0, 0.0, 0.01);
        assert_eq!(step_k3(&fixed, &p).unwrap(), fixed);
        let w = step_k3(&K3Point::new(0.4, 0.0, 0.0, 0.01), &p).unwrap();
        assert_eq!((w.r3, w.y3, w.eps3), (0.4 * 1.01, 0.0, 0.0));
    }

    #[test]
    fn conjugacy_spot_check() {
        let p = Params::from_chart(0.5, 1.0, 0.1, 0.01).unwrap();
        let m = EulerMap::new(p.lambda, p.rho);
        for cp in [
            ChartPoint::K1(K1Point::new(0.8, -0.9, 0.05, 0.008)),
            ChartPoint::K2(K2Point::new(-2.0, 1.5, 0.2, 0.002)),
            ChartPoint::K3(K3Point::new(0.6, 0.1, 0.03, 0.004)),
        ] {
            let s = blow_down(&cp).unwrap();
            let a = blow_down(&step_chart(&cp, &p).unwrap()).unwrap();
            let b = m.apply(s);
            assert!(step_discrepancy(&a, &b, &s, p.lambda) < 1e-14);
        }
    }

    #[test]
    fn chart_choice() {
        let p = Params::from_chart(0.5, 1.0, 0.1, 0.01).unwrap();
        let entry = blow_down(&ChartPoint::K1(K1Point::new(1.0, -1.0, 0.025, 0.01))).unwrap();
        assert_eq!(choose_chart(&entry, &p), Some(ChartId::K2));
        assert_eq!(choose_chart(&State::new(-1.0, 0.0, 1e-6, 0.01), &p), Some(ChartId::K1));
        assert_eq!(choose_chart(&State::new(1.0, 0.0, 1e-6, 0.01), &p), Some(ChartId::K3));
        assert_eq!(choose_chart(&State::new(0.0, 0.0, 0.0, 0.01), &p), None);
    }

    #[test]
    fn ulps() {
        assert_eq!(ulp_distance(1.0, 1.0 + f64::EPSILON), 1);
        assert_eq!(ulp_distance(-2.0, -2.0), 0);
        assert_eq!(ulp_distance(1.0, -1.0), u64::MAX);
    }
}
