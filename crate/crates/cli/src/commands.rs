//! The four subcommands. Each writes its files under the configured output
//! directory and returns the process exit code.

use crate::config::{Format, RunConfig};
use crate::output::{num, opt, plot_svg, report_csv, report_text, write_file, Table};
use crate::CliError;
use std::path::PathBuf;
use transcrit::charts::{
    blow_down, domain, step_discrepancy, step_k1_at, step_k2_at, step_k3_at, ChartId, ChartPoint, DomainBox,
};
use transcrit::experiments::claims::{run_claim_suite, Status};
use transcrit::experiments::sweep::run_sweep;
use transcrit::map::{classify_branch, EulerMap, State, DIVERGENCE_FACTOR};
use transcrit::Error;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CLAIM_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub files: Vec<PathBuf>,
    /// Human-readable summary for stdout.
    pub summary: String,
}

impl Outcome {
    fn pass(files: Vec<PathBuf>, summary: String) -> Self {
        Outcome { code: EXIT_PASS, files, summary }
    }
}

/// Original-map orbit from `(x0, y0)`: rows `0..=n`, or up to the step where
/// the iterate leaves the normal-form region, flagged `divergence`.
pub fn simulate(cfg: &RunConfig, x0: f64, y0: f64, n: usize) -> Result<Outcome, CliError> {
    let p = cfg.params()?;
    let map = EulerMap::from_params(&p);
    let mut t = Table::new(&["step", "x", "y", "eps", "h", "branch", "flag"]);
    let row = |t: &mut Table, k: usize, s: &State, flag: &str| {
        t.row([k.to_string(), num(s.x), num(s.y), num(s.eps), num(s.h), classify_branch(s, None).label().into(), flag.into()]);
    };
    let mut s = State::new(x0, y0, p.eps, p.h);
    row(&mut t, 0, &s, "");
    let mut summary = format!("{} steps", n);
    for k in 1..=n {
        match map.step(s, k) {
            Ok(next) => {
                s = next;
                row(&mut t, k, &s, "");
            }
            Err(Error::Divergence { step, x, y }) => {
                row(&mut t, step, &State::new(x, y, p.eps, p.h), "divergence");
                summary = format!("diverged at step {step}");
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let path = t.write(&cfg.out.join("trajectory.csv"))?;
    Ok(Outcome::pass(vec![path], summary))
}

fn chart_box(id: ChartId) -> DomainBox {
    match id {
        ChartId::K1 => DomainBox::D1,
        ChartId::K2 => DomainBox::D2,
        ChartId::K3 => DomainBox::D3,
    }
}

/// Chart orbit from `point` with the conjugacy residual of every step and,
/// in the entry and exit charts, the conserved product `eps r h`.
pub fn chart(cfg: &RunConfig, id: ChartId, point: [f64; 4], n: usize) -> Result<Outcome, CliError> {
    let p = cfg.params()?;
    let dom = domain(chart_box(id), &p);
    if let Some((coord, value)) = dom.violations(&point).into_iter().next() {
        return Err(Error::Domain { coord, value, reason: "violates the working box" }.into());
    }
    let names = id.space().coord_names();
    let with_product = id != ChartId::K2;
    let mut header = vec!["step"];
    header.extend(names);
    if with_product {
        header.push("product");
    }
    header.extend(["conj_residual", "flag"]);
    let mut t = Table::new(&header);
    let row = |t: &mut Table, k: usize, q: &ChartPoint, res: f64, flag: &str| {
        let a = q.to_array();
        let mut f = vec![k.to_string()];
        f.extend(a.iter().map(|v| num(*v)));
        if with_product {
            f.push(num(a[0] * a[2] * a[3]));
        }
        f.extend([num(res), flag.to_string()]);
        t.row(f);
    };
    let map = EulerMap::from_params(&p);
    let bound = DIVERGENCE_FACTOR * p.rho;
    let mut q = ChartPoint::from_array(id, point);
    row(&mut t, 0, &q, 0.0, "");
    let mut worst = 0.0f64;
    let mut summary = String::new();
    for k in 1..=n {
        let next = match q {
            ChartPoint::K1(x) => step_k1_at(&x, p.lambda, k).map(ChartPoint::K1),
            ChartPoint::K2(x) => step_k2_at(&x, p.lambda, bound, k).map(ChartPoint::K2),
            ChartPoint::K3(x) => step_k3_at(&x, p.lambda, k).map(ChartPoint::K3),
        };
        let next = match next {
            Ok(v) => v,
            Err(e) => {
                row(&mut t, k, &q, f64::NAN, &e.to_string());
                summary = format!("stopped at step {k}: {e}; ");
                break;
            }
        };
        let from = blow_down(&q)?;
        let res = step_discrepancy(&blow_down(&next)?, &map.apply(from), &from, p.lambda);
        worst = worst.max(res);
        q = next;
        row(&mut t, k, &q, res, "");
    }
    let path = t.write(&cfg.out.join(format!("chart_{}.csv", format!("{id:?}").to_lowercase())))?;
    Ok(Outcome::pass(vec![path], format!("{summary}max conjugacy residual {worst:e}")))
}

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.sweep()?;
    let res = run_sweep(&spec)?;
    let mut t = Table::new(&[
        "value", "lambda", "rho", "delta", "eps", "h", "nu", "width_in", "width_out", "exit_height", "steps", "distance",
        "log_rate", "flag",
    ]);
    for r in &res.rows {
        let p = |f: fn(&transcrit::Params) -> f64| opt(r.params.as_ref().map(|p| num(f(p))));
        t.row([
            num(r.value),
            p(|p| p.lambda),
            p(|p| p.rho),
            p(|p| p.delta),
            p(|p| p.eps),
            p(|p| p.h),
            p(|p| p.nu),
            opt(r.width_in.map(num)),
            opt(r.width_out.map(num)),
            opt(r.exit_height.map(num)),
            opt(r.steps),
            opt(r.distance.map(num)),
            opt(r.log_rate.map(num)),
            opt(r.flag.clone()),
        ]);
    }
    let mut files = vec![t.write(&cfg.out.join("sweep.csv"))?];
    let mut ft = Table::new(&["fit", "slope", "intercept", "r_squared", "n_points", "log_log"]);
    let mut summary = format!("{} grid points on {}\n", res.rows.len(), spec.axis);
    for f in &res.fits {
        ft.row([
            f.name.to_string(),
            num(f.fit.slope),
            num(f.fit.intercept),
            num(f.fit.r_squared),
            f.fit.n_points.to_string(),
            f.log.to_string(),
        ]);
        summary.push_str(&format!("{}: slope {:.6}, r^2 {:.6}\n", f.name, f.fit.slope, f.fit.r_squared));
        if f.name == "exit_height_vs_eps" {
            let [lo, hi] = cfg.exit_band;
            let inside = (lo..=hi).contains(&f.fit.slope);
            summary.push_str(&format!("  exponent band [{lo}, {hi}]: {}\n", if inside { "inside" } else { "outside" }));
        }
        if cfg.format == Format::Svg {
            let (xl, yl) = f.name.split_once("_vs_").unwrap_or((f.name, "x"));
            let svg = plot_svg(f.name, yl, xl, &f.xs, &f.ys, &f.fit, f.log);
            files.push(write_file(&cfg.out.join(format!("sweep_{}.svg", f.name)), svg.as_bytes())?);
        }
    }
    files.insert(1, ft.write(&cfg.out.join("sweep_fits.csv"))?);
    Ok(Outcome::pass(files, summary))
}

/// Runs the claim suite and writes `report.csv` and `report.txt`. Exit code 1
/// when any row fails.
pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rows = run_claim_suite(&cfg.suite())?;
    let text = report_text(&rows);
    let files = vec![
        write_file(&cfg.out.join("report.csv"), &report_csv(&rows))?,
        write_file(&cfg.out.join("report.txt"), text.as_bytes())?,
    ];
    let code = if rows.iter().any(|r| r.status == Status::Fail) { EXIT_CLAIM_FAILURE } else { EXIT_PASS };
    Ok(Outcome { code, files, summary: text })
}
