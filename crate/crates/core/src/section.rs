//! Axis-aligned entry/exit regions with membership and distance predicates.

use std::fmt;

/// Coordinate system a point or set lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Original,
    K1,
    K2,
    K3,
}

impl Space {
    pub fn coord_names(self) -> [&'static str; 4] {
        match self {
            Space::Original => ["x", "y", "eps", "h"],
            Space::K1 => ["r1", "y1", "eps1", "h1"],
            Space::K2 => ["x2", "y2", "r2", "h2"],
            Space::K3 => ["r3", "y3", "eps3", "h3"],
        }
    }

    /// Index of the slow coordinate.
    pub fn slow_index(self) -> usize {
        1
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Space::Original => "original",
            Space::K1 => "K1",
            Space::K2 => "K2",
            Space::K3 => "K3",
        };
        f.write_str(s)
    }
}

pub const MEMBERSHIP_TOL: f64 = 1e-14;

/// One end of an interval. `Affine` lets a window depend on another coordinate
/// of the same point (the K2 exit windows move with h2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    At(f64),
    Affine { base: f64, coord: usize, slope: f64 },
    Inf,
    NegInf,
}

impl Bound {
    pub fn at(&self, p: &[f64; 4]) -> f64 {
        match *self {
            Bound::At(v) => v,
            Bound::Affine { base, coord, slope } => base + slope * p[coord],
            Bound::Inf => f64::INFINITY,
            Bound::NegInf => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo: Bound::At(lo), hi: Bound::At(hi), lo_open: false, hi_open: false }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo: Bound::At(lo), hi: Bound::At(hi), lo_open: true, hi_open: true }
    }

    pub fn point(v: f64) -> Self {
        Self::closed(v, v)
    }

    pub fn free() -> Self {
        Interval { lo: Bound::NegInf, hi: Bound::Inf, lo_open: true, hi_open: true }
    }

    pub fn above(lo: f64) -> Self {
        Interval { lo: Bound::At(lo), hi: Bound::Inf, lo_open: true, hi_open: true }
    }

    pub fn bounds(&self, p: &[f64; 4]) -> (f64, f64) {
        (self.lo.at(p), self.hi.at(p))
    }

    pub fn contains(&self, v: f64, p: &[f64; 4]) -> bool {
        let (lo, hi) = self.bounds(p);
        let tol = |b: f64| MEMBERSHIP_TOL * b.abs().max(1.0);
        let lo_ok = if self.lo_open { v > lo } else { v >= lo - tol(lo) };
        let hi_ok = if self.hi_open { v < hi } else { v <= hi + tol(hi) };
        lo_ok && hi_ok
    }

    /// Distance from `v` to the closure of the interval.
    pub fn gap(&self, v: f64, p: &[f64; 4]) -> f64 {
        let (lo, hi) = self.bounds(p);
        if v < lo {
            lo - v
        } else if v > hi {
            v - hi
        } else {
            0.0
        }
    }

    pub fn width(&self, p: &[f64; 4]) -> f64 {
        let (lo, hi) = self.bounds(p);
        hi - lo
    }
}

/// A named region in one coordinate system, one interval per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionSet {
    pub name: &'static str,
    pub space: Space,
    pub bounds: [Interval; 4],
}

impl SectionSet {
    pub fn new(name: &'static str, space: Space, bounds: [Interval; 4]) -> Self {
        SectionSet { name, space, bounds }
    }

    pub fn contains(&self, p: &[f64; 4]) -> bool {
        self.bounds.iter().zip(p).all(|(iv, &v)| iv.contains(v, p))
    }

    pub fn distance(&self, p: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for (iv, &v) in self.bounds.iter().zip(p) {
            let g = iv.gap(v, p);
            s += g * g;
        }
        s.sqrt()
    }

    /// Coordinates violating their interval, as (name, value) pairs.
    pub fn violations(&self, p: &[f64; 4]) -> Vec<(&'static str, f64)> {
        let names = self.space.coord_names();
        (0..4)
            .filter(|&i| !self.bounds[i].contains(p[i], p))
            .map(|i| (names[i], p[i]))
            .collect()
    }

    /// Replace one coordinate's interval.
    pub fn with(mut self, coord: usize, iv: Interval) -> Self {
        self.bounds[coord] = iv;
        self
    }

    pub fn renamed(mut self, name: &'static str) -> Self {
        self.name = name;
        self
    }
}

impl fmt::Display for SectionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.name, self.space)?;
        let names = self.space.coord_names();
        for (n, iv) in names.iter().zip(&self.bounds) {
            let show = |b: &Bound| match b {
                Bound::At(v) => format!("{v}"),
                Bound::Affine { base, coord, slope } => {
                    format!("{base}{slope:+}*{}", names[*coord])
                }
                Bound::Inf => "inf".into(),
                Bound::NegInf => "-inf".into(),
            };
            if iv.lo == Bound::NegInf && iv.hi == Bound::Inf {
                continue;
            }
            let l = if iv.lo_open { '(' } else { '[' };
            let r = if iv.hi_open { ')' } else { ']' };
            write!(f, " {n}{l}{}, {}{r}", show(&iv.lo), show(&iv.hi))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment() -> SectionSet {
        SectionSet::new(
            "seg",
            Space::Original,
            [
                Interval::point(-1.0),
                Interval::open(-1.05, -0.95),
                Interval::point(0.01),
                Interval::point(0.001),
            ],
        )
    }

    #[test]
    fn membership_and_distance() {
        let s = segment();
        assert!(s.contains(&[-1.0, -1.0, 0.01, 0.001]));
        assert!(!s.contains(&[-1.0, -0.95, 0.01, 0.001]));
        assert!(s.contains(&[-1.0 + 1e-15, -1.0, 0.01, 0.001]));
        assert!(!s.contains(&[-1.0 + 1e-12, -1.0, 0.01, 0.001]));
        let d = s.distance(&[-0.7, -0.9, 0.01, 0.001]);
        assert!((d - (0.09f64 + 0.0025).sqrt()).abs() < 1e-15);
        assert_eq!(s.distance(&[-1.0, -1.01, 0.01, 0.001]), 0.0);
    }

    #[test]
    fn affine_bounds_follow_the_point() {
        let iv = Interval {
            lo: Bound::Affine { base: 2.0, coord: 3, slope: -0.5 },
            hi: Bound::Affine { base: 2.0, coord: 3, slope: 0.5 },
            lo_open: false,
            hi_open: false,
        };
        let s = SectionSet::new("w", Space::K2, [iv, Interval::free(), Interval::free(), Interval::free()]);
        assert!(s.contains(&[2.04, 0.0, 0.1, 0.1]));
        assert!(!s.contains(&[2.06, 0.0, 0.1, 0.1]));
        assert!(s.contains(&[2.06, 0.0, 0.1, 0.2]));
        assert_eq!(s.violations(&[2.06, 0.0, 0.1, 0.1]), vec![("x2", 2.06)]);
    }
}
