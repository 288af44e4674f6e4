//! Slow-manifold graphs in the entry and exit charts.

use crate::charts::{step_k1_at, step_k3_at, K1Point, K3Point};
use crate::error::{Error, Result};
use crate::params::Params;
use nalgebra::Matrix4;

/// First-order graph `y1 = order0 + order1 * eps1`; the dropped tail is
/// `O(eps1^residual_order.0 * h1^residual_order.1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphCoeffs {
    pub order0: f64,
    pub order1: f64,
    pub residual_order: (u32, u32),
}

impl GraphCoeffs {
    pub fn minus(lambda: f64) -> Self {
        GraphCoeffs { order0: -1.0, order1: (1.0 - lambda) / 2.0, residual_order: (2, 1) }
    }

    pub fn plus(lambda: f64) -> Self {
        GraphCoeffs { order0: 1.0, order1: (1.0 + lambda) / 2.0, residual_order: (2, 1) }
    }

    pub fn eval(&self, eps1: f64) -> f64 {
        self.order0 + self.order1 * eps1
    }
}

pub fn l_minus(eps1: f64, _h1: f64, lambda: f64) -> f64 {
    GraphCoeffs::minus(lambda).eval(eps1)
}

pub fn l_plus(eps1: f64, _h1: f64, lambda: f64) -> f64 {
    GraphCoeffs::plus(lambda).eval(eps1)
}

/// `l(eps1~, h1~) - (l + eps1 h1) / (1 - h1 F1(l, eps1))` for one K1 step taken on the graph.
pub fn invariance_residual_k1(graph: &GraphCoeffs, eps1: f64, h1: f64, params: &Params) -> Result<f64> {
    let y = graph.eval(eps1);
    let next = step_k1_at(&K1Point::new(1.0, y, eps1, h1), params.lambda, 0)?;
    Ok(graph.eval(next.eps1) - next.y1)
}

/// Reduced map on `(y, eps, h)`; the radius never feeds back in K1 or K3.
pub type Reduced = fn(f64, f64, f64, f64) -> Result<(f64, f64, f64)>;

fn reduced_k1(y: f64, e: f64, h: f64, lambda: f64) -> Result<(f64, f64, f64)> {
    let n = step_k1_at(&K1Point::new(1.0, y, e, h), lambda, 0)?;
    Ok((n.y1, n.eps1, n.h1))
}

fn reduced_k3(y: f64, e: f64, h: f64, lambda: f64) -> Result<(f64, f64, f64)> {
    let n = step_k3_at(&K3Point::new(1.0, y, e, h), lambda, 0)?;
    Ok((n.y3, n.eps3, n.h3))
}

/// An invariant graph `y = l(eps, h)` built by forward orbits.
///
/// Along every orbit `eps * h^2` is conserved, so each value of that product
/// is one curve in the `(eps, h)` plane. On a curve, an initial function is
/// laid out on the fundamental domain between the seam `eps_s` and its image,
/// and the graph elsewhere is the forward transport of that segment.
#[derive(Debug, Clone, Copy)]
pub struct OrbitGraph<S> {
    step: Reduced,
    lambda: f64,
    seed: S,
    budget: usize,
}

const BISECTION_ITERS: usize = 200;

impl<S: Fn(f64, f64) -> f64> OrbitGraph<S> {
    pub fn new(step: Reduced, lambda: f64, seed: S, budget: usize) -> Self {
        OrbitGraph { step, lambda, seed, budget }
    }

    fn seg(&self, eps: f64, kappa: f64, seam: f64, seam_img: (f64, f64), corr: f64) -> f64 {
        let h = (kappa / eps).sqrt();
        let t = (eps - seam) / (seam_img.0 - seam);
        (self.seed)(eps, h) + t * (seam_img.1 - corr)
    }

    /// Graph value at `(eps, h)` using the seam at `seam_eps`.
    pub fn eval(&self, eps: f64, h: f64, seam_eps: f64) -> Result<f64> {
        if eps == 0.0 {
            return Ok((self.seed)(0.0, h));
        }
        let kappa = eps * h * h;
        let hs = (kappa / seam_eps).sqrt();
        let y0 = (self.seed)(seam_eps, hs);
        let (y1, e1, h1) = (self.step)(y0, seam_eps, hs, self.lambda)?;
        let corr = (self.seed)(e1, h1);
        let up = e1 > seam_eps;
        let init = |e: f64| self.seg(e, kappa, seam_eps, (e1, y1), corr);
        let ahead = |a: f64, b: f64| if up { a >= b } else { a <= b };
        if !ahead(eps, seam_eps) {
            return Err(Error::BadInput(format!("eps {eps} lies behind the seam {seam_eps}")));
        }
        if !ahead(eps, e1) {
            return Ok(init(eps));
        }
        // orbit of the seam point: find n with eps between eps_n and eps_{n+1}
        let mut n = 1;
        let (mut e_n, mut y_n, mut h_n) = (e1, y1, h1);
        loop {
            let (yy, ee, hh) = (self.step)(y_n, e_n, h_n, self.lambda)?;
            if !ahead(eps, ee) {
                break;
            }
            (y_n, e_n, h_n) = (yy, ee, hh);
            n += 1;
            if n > self.budget {
                return Err(Error::NoConvergence(format!("no fundamental domain within {} steps", self.budget)));
            }
        }
        let orbit = |e0: f64| -> Result<(f64, f64)> {
            let (mut y, mut e, mut hh) = (init(e0), e0, (kappa / e0).sqrt());
            for _ in 0..n {
                (y, e, hh) = (self.step)(y, e, hh, self.lambda)?;
            }
            Ok((e, y))
        };
        // bisect the start in the fundamental domain so that the n-th iterate lands on eps
        let (mut a, mut b) = (seam_eps, e1);
        let (mut best_e, mut best_y) = (e_n, y_n);
        for _ in 0..BISECTION_ITERS {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            let (e, y) = orbit(m)?;
            if (e - eps).abs() < (best_e - eps).abs() {
                (best_e, best_y) = (e, y);
            }
            if e == eps {
                break;
            }
            if ahead(eps, e) {
                a = m;
            } else {
                b = m;
            }
        }
        let rel = (best_e - eps).abs() / eps;
        if rel > 1e-12 {
            return Err(Error::NoConvergence(format!("landing mismatch {rel:e} at eps {eps}")));
        }
        Ok(best_y)
    }
}

/// Refined entry-chart graph near the attracting branch below the diagonal,
/// transported from a seam at `eps1 / 4` where the first-order graph is
/// accurate to `O(eps1^2)`.
pub fn refine_l_minus(eps1: f64, h1: f64, lambda: f64) -> Result<f64> {
    let g = GraphCoeffs::minus(lambda);
    OrbitGraph::new(reduced_k1, lambda, |e, _| g.eval(e), 10_000_000).eval(eps1, h1, eps1 / 4.0)
}

/// Same for the attracting branch above the diagonal, where `eps1` decreases.
pub fn refine_l_plus(eps1: f64, h1: f64, lambda: f64) -> Result<f64> {
    let g = GraphCoeffs::plus(lambda);
    OrbitGraph::new(reduced_k1, lambda, |e, _| g.eval(e), 10_000_000).eval(eps1, h1, eps1 * 4.0)
}

/// One node of a tabulated exit-chart graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphRow {
    pub eps: f64,
    pub h: f64,
    pub y: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct L3Table {
    pub rows: Vec<GraphRow>,
    pub ceiling: f64,
}

impl L3Table {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.residual.abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,h,y,residual\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.eps, r.h, r.y, r.residual));
        }
        s
    }
}

pub const L3_RESIDUAL_TOL: f64 = 1e-10;

/// Exit-chart graph evaluator. The seam sits at the ceiling `eps_max` with the
/// initial function `eps3 * h3`, which keeps the transported graph positive.
pub struct L3Solver {
    lambda: f64,
    ceiling: f64,
    budget: usize,
}

impl L3Solver {
    pub fn new(params: &Params, ceiling: f64) -> Self {
        L3Solver { lambda: params.lambda, ceiling, budget: 10_000_000 }
    }

    pub fn eval(&self, eps3: f64, h3: f64) -> Result<f64> {
        if eps3 == 0.0 {
            return Ok(0.0);
        }
        let g = OrbitGraph::new(reduced_k3, self.lambda, |e: f64, h: f64| e * h, self.budget);
        g.eval(eps3, h3, self.ceiling)
    }

    /// `l3(eps~, h~) - (l3 + eps3 h3) / (1 + h3 F3(l3, eps3))`.
    pub fn residual(&self, eps3: f64, h3: f64) -> Result<f64> {
        let y = self.eval(eps3, h3)?;
        let (y1, e1, h1) = reduced_k3(y, eps3, h3, self.lambda)?;
        Ok(self.eval(e1, h1)? - y1)
    }
}

/// Tabulate the exit-chart graph on `eps3_grid` at fixed `h3`; the ceiling is the grid maximum.
pub fn solve_l3(eps3_grid: &[f64], h3: f64, params: &Params) -> Result<L3Table> {
    if eps3_grid.is_empty() {
        return Err(Error::BadInput("empty grid".into()));
    }
    if eps3_grid.iter().any(|&e| !(0.0..=params.delta).contains(&e)) || !(h3 > 0.0 && h3 <= params.nu) {
        return Err(Error::Domain { coord: "eps3", value: eps3_grid[0], reason: "grid must lie in D3" });
    }
    let ceiling = eps3_grid.iter().cloned().fold(0.0, f64::max);
    let solver = L3Solver::new(params, ceiling);
    let mut rows = Vec::with_capacity(eps3_grid.len());
    for &e in eps3_grid {
        let y = solver.eval(e, h3)?;
        let residual = solver.residual(e, h3)?;
        if residual.abs() > L3_RESIDUAL_TOL {
            return Err(Error::NoConvergence(format!("residual {residual:e} at eps3 = {e}")));
        }
        rows.push(GraphRow { eps: e, h: h3, y, residual });
    }
    Ok(L3Table { rows, ceiling })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenData {
    pub name: &'static str,
    pub location: [f64; 4],
    pub eigenvalues: Vec<(f64, &'static str)>,
}

/// v_a^-, v_a^+ and w_in of the entry chart at step `h1`.
pub fn fixed_points_k1(h1: f64) -> Vec<EigenData> {
    let mut out = Vec::new();
    for (name, y) in [("v_a1_minus", -1.0), ("v_a1_plus", 1.0)] {
        out.push(EigenData {
            name,
            location: [0.0, y, 0.0, h1],
            eigenvalues: vec![(1.0 - 2.0 * h1, "y1"), (1.0, "r1"), (1.0, "eps1"), (1.0, "h1")],
        });
    }
    out.push(EigenData {
        name: "w_in",
        location: [0.0, 0.0, 0.0, h1],
        eigenvalues: vec![
            (1.0 - 2.0 * h1, "h1"),
            (1.0 - h1, "r1"),
            (1.0 / (1.0 - h1), "y1"),
            ((1.0 - h1).powi(-2), "eps1"),
        ],
    });
    out
}

/// v_r^-, v_r^+ and w_out of the exit chart at step `h3`.
pub fn fixed_points_k3(h3: f64) -> Vec<EigenData> {
    let mut out = Vec::new();
    for (name, y) in [("v_r3_minus", -1.0), ("v_r3_plus", 1.0)] {
        out.push(EigenData {
            name,
            location: [0.0, y, 0.0, h3],
            eigenvalues: vec![(1.0 + 2.0 * h3, "y3"), (1.0, "r3"), (1.0, "eps3"), (1.0, "h3")],
        });
    }
    out.push(EigenData {
        name: "w_out",
        location: [0.0, 0.0, 0.0, h3],
        eigenvalues: vec![
            ((1.0 + h3).powi(-2), "eps3"),
            (1.0 / (1.0 + h3), "y3"),
            (1.0 + h3, "r3"),
            (1.0 + 2.0 * h3, "h3"),
        ],
    });
    out
}

pub const FD_STEP: f64 = 1e-6;

/// Central-difference Jacobian of a four-dimensional map.
pub fn fd_jacobian<F: Fn([f64; 4]) -> Result<[f64; 4]>>(f: F, at: [f64; 4], step: f64) -> Result<Matrix4<f64>> {
    let mut j = Matrix4::zeros();
    for c in 0..4 {
        let mut a = at;
        let mut b = at;
        a[c] += step;
        b[c] -= step;
        let (fa, fb) = (f(a)?, f(b)?);
        for r in 0..4 {
            j[(r, c)] = (fa[r] - fb[r]) / (2.0 * step);
        }
    }
    Ok(j)
}

/// Coefficients `c1..c4` of `det(t I - J) = t^4 + c1 t^3 + c2 t^2 + c3 t + c4` (Faddeev-LeVerrier).
pub fn char_poly(j: &Matrix4<f64>) -> [f64; 4] {
    let id = Matrix4::<f64>::identity();
    let mut m = Matrix4::<f64>::zeros();
    let mut c = [0.0; 5];
    c[0] = 1.0;
    for k in 1..=4 {
        m = j * m + id * c[k - 1];
        c[k] = -(j * m).trace() / k as f64;
    }
    [c[1], c[2], c[3], c[4]]
}

/// Same coefficients from a list of roots.
pub fn poly_from_roots(roots: &[f64]) -> [f64; 4] {
    let mut c = vec![1.0];
    for &r in roots {
        let mut n = vec![0.0; c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            n[i] += ci;
            n[i + 1] -= r * ci;
        }
        c = n;
    }
    [c[1], c[2], c[3], c[4]]
}

/// Jacobian of the entry- or exit-chart map at `at` by central differences.
pub fn chart_jacobian_k1(at: [f64; 4], lambda: f64) -> Result<Matrix4<f64>> {
    fd_jacobian(|a| Ok(step_k1_at(&K1Point::from_array(a), lambda, 0)?.to_array()), at, FD_STEP)
}

pub fn chart_jacobian_k3(at: [f64; 4], lambda: f64) -> Result<Matrix4<f64>> {
    fd_jacobian(|a| Ok(step_k3_at(&K3Point::from_array(a), lambda, 0)?.to_array()), at, FD_STEP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_values() {
        assert_eq!(l_minus(0.0, 0.01, 0.3), -1.0);
        assert_eq!(l_minus(0.37, 0.01, 1.0), -1.0);
        assert!((l_minus(0.1, 0.01, 0.0) + 0.95).abs() < 1e-16);
        assert_eq!(l_plus(0.0, 0.01, 0.3), 1.0);
        assert_eq!(l_plus(0.37, 0.01, -1.0), 1.0);
        assert!((l_plus(0.1, 0.01, 1.0) - 1.1).abs() < 1e-16);
    }

    #[test]
    fn residual_vanishes_at_zero_eps() {
        let p = Params::from_chart(0.5, 1.0, 0.1, 0.01).unwrap();
        for g in [GraphCoeffs::minus(0.5), GraphCoeffs::plus(0.5)] {
            assert_eq!(invariance_residual_k1(&g, 0.0, 0.01, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn residual_halving() {
        let p = Params::from_chart(0.5, 1.0, 0.1, 0.01).unwrap();
        let g = GraphCoeffs::minus(0.5);
        let mut e = 0.1;
        let mut prev = invariance_residual_k1(&g, e, 0.01, &p).unwrap().abs();
        for _ in 0..4 {
            e /= 2.0;
            let r = invariance_residual_k1(&g, e, 0.01, &p).unwrap().abs();
            let ratio = prev / r;
            assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
            prev = r;
        }
    }

    #[test]
    fn eigenvalue_lists() {
        let w = &fixed_points_k1(0.1)[2];
        let ev: Vec<f64> = w.eigenvalues.iter().map(|e| e.0).collect();
        let want = [0.8, 0.9, 1.0 / 0.9, 1.0 / 0.81];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        for d in fixed_points_k1(0.0).iter().chain(&fixed_points_k3(0.0)) {
            assert!(d.eigenvalues.iter().all(|e| e.0 == 1.0));
        }
        let w = &fixed_points_k3(0.1)[2];
        let l: Vec<f64> = w.eigenvalues.iter().map(|e| e.0).collect();
        assert!((l[0] - 1.1f64.powi(-2)).abs() < 1e-15 && (l[3] - 1.2).abs() < 1e-15);
        assert!((l[0] * l[2] - l[1]).abs() < 1e-15);
    }

    #[test]
    fn char_poly_matches_roots_for_triangular() {
        let j = Matrix4::new(2.0, 1.0, 0.0, 3.0, 0.0, -1.0, 4.0, 0.0, 0.0, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 3.0);
        let a = char_poly(&j);
        let b = poly_from_roots(&[2.0, -1.0, 0.5, 3.0]);
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn stability_thresholds() {
        for i in 1..200 {
            let h = i as f64 * 0.01;
            assert_eq!((1.0 - 2.0 * h).abs() < 1.0, h < 1.0, "h1 = {h}");
            assert!(1.0 + 2.0 * h > 1.0);
        }
    }
}
