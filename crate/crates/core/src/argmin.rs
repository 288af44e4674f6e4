/// Closest-approach detector for a scalar distance observed along a trajectory.
///
/// Once armed, the first strict minimum followed by `patience` non-improving
/// observations is reported. Ties keep the earlier index.
#[derive(Debug, Clone)]
pub struct Argmin {
    patience: usize,
    arm: Option<(usize, f64)>,
    armed: bool,
    best: Option<(usize, f64)>,
    since_best: usize,
}

pub const DEFAULT_PATIENCE: usize = 8;

impl Argmin {
    /// `arm = Some((coord, threshold))` keeps the detector idle until `p[coord] >= threshold`.
    pub fn new(patience: usize, arm: Option<(usize, f64)>) -> Self {
        Argmin { patience: patience.max(1), arm, armed: arm.is_none(), best: None, since_best: 0 }
    }

    pub fn observe(&mut self, index: usize, p: &[f64; 4], dist: f64) -> Option<(usize, f64)> {
        if !self.armed {
            match self.arm {
                Some((c, thr)) if p[c] >= thr => self.armed = true,
                _ => return None,
            }
        }
        match self.best {
            Some((_, d)) if dist >= d => {
                self.since_best += 1;
                if self.since_best >= self.patience {
                    return self.best;
                }
            }
            _ => {
                self.best = Some((index, dist));
                self.since_best = 0;
            }
        }
        None
    }

    /// Did the last observation set a new minimum?
    pub fn improved(&self) -> bool {
        self.best.is_some() && self.since_best == 0
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.best
    }
}
