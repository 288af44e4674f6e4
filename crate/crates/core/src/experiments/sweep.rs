//! One-parameter sweeps of the global passage.

use super::fit::{linear_fit, scaling_fit, FitResult};
use crate::error::{Error, Result};
use crate::map::{default_half_width, pi_a, pi_e, DeltaKind, SectionHit};
use crate::params::Params;
use crate::passage::linspace;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Eps,
    H,
    Delta,
    Nu,
    Lambda,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Eps => "eps",
            SweepAxis::H => "h",
            SweepAxis::Delta => "delta",
            SweepAxis::Nu => "nu",
            SweepAxis::Lambda => "lambda",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "eps" => SweepAxis::Eps,
            "h" => SweepAxis::H,
            "delta" => SweepAxis::Delta,
            "nu" => SweepAxis::Nu,
            "lambda" => SweepAxis::Lambda,
            _ => return Err(Error::BadInput(format!("unknown sweep axis {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: Params,
    /// Entry heights per grid point, spread over the entry segment.
    pub samples: usize,
    /// On the `eps` axis, tie the step to `h = ratio * eps`.
    pub h_over_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub params: Option<Params>,
    pub width_in: Option<f64>,
    pub width_out: Option<f64>,
    /// Largest `|y|` on the exit section (exit regime only).
    pub exit_height: Option<f64>,
    pub steps: Option<usize>,
    pub distance: Option<f64>,
    pub log_rate: Option<f64>,
    /// Why the row has no data, if it has none.
    pub flag: Option<String>,
}

impl SweepRow {
    fn flagged(value: f64, params: Option<Params>, why: String) -> Self {
        SweepRow {
            value,
            params,
            width_in: None,
            width_out: None,
            exit_height: None,
            steps: None,
            distance: None,
            log_rate: None,
            flag: Some(why),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFit {
    pub name: &'static str,
    pub fit: FitResult,
    /// Fitted on log-log axes.
    pub log: bool,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<SweepFit>,
}

fn params_at(spec: &SweepSpec, v: f64) -> Result<Params> {
    let b = &spec.base;
    let p = match spec.axis {
        SweepAxis::Eps => Params::new(b.lambda, b.rho, b.delta, v, spec.h_over_eps.map_or(b.h, |k| k * v)),
        SweepAxis::H => Params::new(b.lambda, b.rho, b.delta, b.eps, v),
        SweepAxis::Delta => Params::new(b.lambda, b.rho, v, b.eps, b.h),
        SweepAxis::Nu => Params::new(b.lambda, b.rho, b.delta, b.eps, v / b.rho),
        SweepAxis::Lambda => Params::new(v, b.rho, b.delta, b.eps, b.h),
    }?;
    Ok(p)
}

fn run_point(spec: &SweepSpec, v: f64) -> SweepRow {
    let p = match params_at(spec, v) {
        Ok(p) => p,
        Err(e) => return SweepRow::flagged(v, None, e.to_string()),
    };
    if p.is_canard() {
        return SweepRow::flagged(v, Some(p), "canard".into());
    }
    let w = default_half_width(DeltaKind::In, &p);
    let ys = match linspace(-p.rho - 0.95 * w, -p.rho + 0.95 * w, spec.samples) {
        Ok(ys) => ys,
        Err(e) => return SweepRow::flagged(v, Some(p), e.to_string()),
    };
    let hits: Result<Vec<SectionHit>> =
        ys.iter().map(|&y| if p.lambda < 1.0 { pi_a(y, &p) } else { pi_e(y, &p) }).collect();
    let hits = match hits {
        Ok(h) => h,
        Err(e) => return SweepRow::flagged(v, Some(p), e.to_string()),
    };
    let out: Vec<f64> = hits.iter().map(|h| h.state.y).collect();
    let lo = out.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SweepRow {
        value: v,
        params: Some(p),
        width_in: Some(ys[ys.len() - 1] - ys[0]),
        width_out: Some(hi - lo),
        exit_height: (p.lambda > 1.0).then(|| lo.abs().max(hi.abs())),
        steps: hits.iter().map(|h| h.index).max(),
        distance: Some(hits.iter().map(|h| h.distance).fold(0.0, f64::max)),
        log_rate: Some(hits.iter().map(|h| h.log_contraction).fold(f64::NEG_INFINITY, f64::max)),
        flag: None,
    }
}

fn fits(spec: &SweepSpec, rows: &[SweepRow]) -> Vec<SweepFit> {
    let good: Vec<(&SweepRow, Params)> =
        rows.iter().filter_map(|r| r.params.filter(|_| r.flag.is_none()).map(|p| (r, p))).collect();
    let mut out = Vec::new();
    let mut push = |name, log: bool, pairs: Vec<(f64, f64)>| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let f = if log { scaling_fit(&xs, &ys) } else { linear_fit(&xs, &ys) };
        if let Ok(fit) = f {
            out.push(SweepFit { name, fit, log, xs, ys });
        }
    };
    if spec.axis == SweepAxis::Eps && spec.base.lambda > 1.0 {
        push("exit_height_vs_eps", true, good.iter().filter_map(|(r, p)| r.exit_height.map(|k| (p.eps, k))).collect());
    }
    if matches!(spec.axis, SweepAxis::Delta | SweepAxis::Nu) {
        push("log_rate_vs_inv_nu_delta", false, good.iter().filter_map(|(r, p)| r.log_rate.map(|l| (1.0 / (p.nu * p.delta), l))).collect());
    }
    if matches!(spec.axis, SweepAxis::Eps | SweepAxis::H) {
        push("distance_vs_eps_h", true, good.iter().filter_map(|(r, p)| r.distance.map(|d| (p.eps * p.h, d))).collect());
    }
    out
}

/// Runs the passage at every grid value. Invalid or failing grid points are
/// kept as flagged rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.values.is_empty() {
        return Err(Error::BadInput("empty sweep grid".into()));
    }
    if spec.samples < 2 {
        return Err(Error::BadInput(format!("need at least 2 samples per point, got {}", spec.samples)));
    }
    let rows: Vec<SweepRow> = spec.values.par_iter().map(|&v| run_point(spec, v)).collect();
    let fits = fits(spec, &rows);
    Ok(SweepResult { spec: spec.clone(), rows, fits })
}

/// `n` log-spaced values on `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::BadInput(format!("log grid needs 0 < lo <= hi, got [{lo}, {hi}]")));
    }
    Ok(linspace(lo.ln(), hi.ln(), n)?.into_iter().map(f64::exp).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(lambda: f64) -> Params {
        Params::new(lambda, 1.0, 0.1, 0.01, 0.001).unwrap()
    }

    #[test]
    fn empty_grid_is_rejected() {
        let spec = SweepSpec { axis: SweepAxis::Eps, values: vec![], base: base(0.5), samples: 3, h_over_eps: None };
        assert!(matches!(run_sweep(&spec), Err(Error::BadInput(_))));
    }

    #[test]
    fn exit_height_grows_with_eps() {
        let spec = SweepSpec {
            axis: SweepAxis::Eps,
            values: logspace(1e-3, 1e-2, 4).unwrap(),
            base: base(2.0),
            samples: 3,
            h_over_eps: Some(0.1),
        };
        let r = run_sweep(&spec).unwrap();
        assert!(r.rows.iter().all(|r| r.flag.is_none()), "{:?}", r.rows);
        let f = r.fits.iter().find(|f| f.name == "exit_height_vs_eps").unwrap();
        assert!(f.fit.slope > 0.25 && f.fit.slope < 0.5, "{:?}", f.fit);
    }

    #[test]
    fn invalid_points_and_canard_are_flagged() {
        let spec = SweepSpec { axis: SweepAxis::Lambda, values: vec![0.5, 1.0, 20.0], base: base(0.5), samples: 3, h_over_eps: None };
        let r = run_sweep(&spec).unwrap();
        assert!(r.rows[0].flag.is_none());
        assert_eq!(r.rows[1].flag.as_deref(), Some("canard"));
        assert!(r.rows[2].flag.as_deref().unwrap().contains("lambda*delta"));
        assert!("delta".parse::<SweepAxis>().is_ok() && "x".parse::<SweepAxis>().is_err());
    }
}
