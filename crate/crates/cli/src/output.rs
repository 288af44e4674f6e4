//! CSV, text-table and SVG emission. Numbers use the shortest decimal that
//! parses back to the same binary64.

use crate::CliError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use transcrit::experiments::claims::ClaimRow;
use transcrit::experiments::fit::FitResult;

pub const SCHEMA_VERSION: u32 = 1;

pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// A CSV file in memory, starting with the `schema_version` row.
pub struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record(["schema_version", &SCHEMA_VERSION.to_string()]).expect("in-memory write");
        w.write_record(header).expect("in-memory write");
        Table { w }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.w.into_inner().expect("in-memory flush")
    }

    pub fn write(self, path: &Path) -> Result<PathBuf, CliError> {
        write_file(path, &self.into_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<PathBuf, CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.into(), source })?;
    Ok(path.into())
}

pub const REPORT_HEADER: [&str; 6] = ["claim", "scope", "status", "measured", "threshold", "detail"];

pub fn report_csv(rows: &[ClaimRow]) -> Vec<u8> {
    let mut t = Table::new(&REPORT_HEADER);
    for r in rows {
        t.row([r.claim, &r.scope, r.status.label(), &num(r.measured), &r.threshold, &r.detail]);
    }
    t.into_bytes()
}

pub fn report_text(rows: &[ClaimRow]) -> String {
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.status.label().to_string(),
                r.claim.to_string(),
                r.scope.clone(),
                if r.measured.is_nan() { "-".into() } else { format!("{:.6e}", r.measured) },
                r.threshold.clone(),
                r.detail.clone(),
            ]
        })
        .collect();
    let head = ["status", "claim", "scope", "measured", "threshold", "detail"];
    let mut width = head.map(str::len);
    for c in &cells {
        for (w, s) in width.iter_mut().zip(c) {
            *w = (*w).max(s.chars().count());
        }
    }
    let line = |c: &[&str]| {
        let mut s = String::new();
        for (i, x) in c.iter().enumerate() {
            if i + 1 == c.len() {
                s.push_str(x);
            } else {
                let _ = write!(s, "{:<w$}  ", x, w = width[i]);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&head);
    out.push_str(&line(&width.map(|w| "-".repeat(w)).iter().map(String::as_str).collect::<Vec<_>>()));
    for c in &cells {
        out.push_str(&line(&c.iter().map(String::as_str).collect::<Vec<_>>()));
    }
    let fails = rows.iter().filter(|r| !r.passed()).count();
    let _ = writeln!(out, "\n{} rows, {} failed", rows.len(), fails);
    out
}

/// Static scatter of `(x, y)` with the fitted line. `log` plots both axes on
/// log10 scales and reads the fit as `log y = intercept + slope log x`.
pub fn plot_svg(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64], fit: &FitResult, log: bool) -> String {
    let (w, h, m) = (640.0, 480.0, 64.0);
    let tx = |v: f64| if log { v.log10() } else { v };
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(&x, &y)| (tx(x), tx(y))).filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    let span = |v: Vec<f64>| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
        (lo - pad, hi + pad)
    };
    let line_y = |x: f64| fit.intercept + fit.slope * x;
    let (x0, x1) = span(pts.iter().map(|p| p.0).collect());
    let (y0, y1) = span(pts.iter().map(|p| p.1).chain([line_y(x0), line_y(x1)]).collect());
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let axis = |s: &str| if log { format!("log10 {s}") } else { s.to_string() };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * m, h - 2.0 * m);
    let _ = writeln!(s, r#"<text x="{}" y="32" text-anchor="middle" font-size="16">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, w / 2.0, h - 20.0, escape(&axis(xlabel)));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(&axis(ylabel))
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="{anchor}" font-size="11">{:.3}</text>"#, sx(v), h - m + 16.0, v);
    }
    for v in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="11">{:.3}</text>"#, m - 4.0, sy(v) + 4.0, v);
    }
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="1.5"/>"#,
        sx(x0),
        sy(line_y(x0)),
        sx(x1),
        sy(line_y(x1))
    );
    for (x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(*x), sy(*y));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12">slope {:.4}, r^2 {:.5}</text>"#,
        m + 8.0,
        m + 18.0,
        fit.slope,
        fit.r_squared
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -0.0, 1e-300, 2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn schema_row_first_and_quoting() {
        let mut t = Table::new(&["a", "b"]);
        t.row(["1", "x, y"]);
        let s = String::from_utf8(t.into_bytes()).unwrap();
        assert_eq!(s, "schema_version,1\na,b\n1,\"x, y\"\n");
    }

    #[test]
    fn svg_has_points_and_line() {
        let f = FitResult { slope: 1.0, intercept: 0.0, r_squared: 1.0, n_points: 3 };
        let s = plot_svg("t", "x", "y", &[1.0, 10.0, 100.0], &[1.0, 10.0, 100.0], &f, true);
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(s.contains("<line") && s.ends_with("</svg>\n"));
    }
}
