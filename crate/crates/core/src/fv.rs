//! First-order finite-volume solver for 2D isentropic Euler (`p = K rho^gamma`)
//! used to benchmark against the exact family.
//!
//! Rusanov fluxes dimension by dimension, forward Euler in time, one ring of
//! ghost cells filled from the exact solution (or copied outward for
//! transmissive runs).

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residual::{FamilyField, FlowField, ScaleSource};
use crate::solution::SolutionParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// Ghost cells hold the exact solution at the current time.
    ExactDirichlet,
    /// Zero-gradient extrapolation.
    Transmissive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvConfig {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub nx: usize,
    pub ny: usize,
    pub cfl: f64,
    pub rho_floor: f64,
    pub t0: f64,
    pub t_end: f64,
    pub boundary: BoundaryMode,
}

impl Default for FvConfig {
    fn default() -> Self {
        FvConfig {
            x_lo: -1.5,
            x_hi: 1.5,
            y_lo: -1.5,
            y_hi: 1.5,
            nx: 64,
            ny: 64,
            cfl: 0.4,
            rho_floor: 1e-12,
            t0: 0.0,
            t_end: 0.2,
            boundary: BoundaryMode::ExactDirichlet,
        }
    }
}

impl FvConfig {
    pub fn with_resolution(self, n: usize) -> Self {
        FvConfig {
            nx: n,
            ny: n,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("CFL {} outside (0, 1)", self.cfl));
        }
        if self.nx < 16 || self.ny < 16 {
            return bad(format!("resolution {}x{} below 16", self.nx, self.ny));
        }
        if !(self.x_hi > self.x_lo && self.y_hi > self.y_lo) {
            return bad("box extents must be ordered".into());
        }
        if !(self.rho_floor > 0.0) {
            return bad("density floor must be positive".into());
        }
        if !(self.t_end >= self.t0) {
            return bad(format!("t_end ({}) before t0 ({})", self.t_end, self.t0));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_hi - self.y_lo) / self.ny as f64
    }
}

/// `gamma`-law gas constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gas {
    pub gamma: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl Gas {
    pub fn of(params: &SolutionParams) -> Self {
        Gas {
            gamma: params.gamma(),
            k: params.k(),
        }
    }

    fn pressure(&self, rho: f64) -> f64 {
        self.k * rho.powf(self.gamma)
    }

    fn sound_speed(&self, rho: f64) -> f64 {
        (self.gamma * self.k * rho.powf(self.gamma - 1.0)).sqrt()
    }
}

/// Cell averages `(rho, rho u1, rho u2)` including one ghost ring.
/// Storage is row-major in `y`: index `(j + 1) * (nx + 2) + (i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservativeField {
    pub nx: usize,
    pub ny: usize,
    pub x_lo: f64,
    pub y_lo: f64,
    pub dx: f64,
    pub dy: f64,
    pub t: f64,
    cells: Vec<[f64; 3]>,
    /// Number of cell updates clipped to the density floor.
    pub floor_events: usize,
}

impl ConservativeField {
    fn blank(cfg: &FvConfig) -> Self {
        ConservativeField {
            nx: cfg.nx,
            ny: cfg.ny,
            x_lo: cfg.x_lo,
            y_lo: cfg.y_lo,
            dx: cfg.dx(),
            dy: cfg.dy(),
            t: cfg.t0,
            cells: vec![[0.0; 3]; (cfg.nx + 2) * (cfg.ny + 2)],
            floor_events: 0,
        }
    }

    fn idx(&self, i: isize, j: isize) -> usize {
        ((j + 1) as usize) * (self.nx + 2) + (i + 1) as usize
    }

    /// Cell `(i, j)`, with `-1` and `n` addressing ghosts.
    pub fn get(&self, i: isize, j: isize) -> [f64; 3] {
        self.cells[self.idx(i, j)]
    }

    pub fn center(&self, i: isize, j: isize) -> (f64, f64) {
        (
            self.x_lo + (i as f64 + 0.5) * self.dx,
            self.y_lo + (j as f64 + 0.5) * self.dy,
        )
    }

    /// Interior cells in storage order.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize, [f64; 3])> + '_ {
        (0..self.ny)
            .flat_map(move |j| (0..self.nx).map(move |i| (i, j, self.get(i as isize, j as isize))))
    }

    pub fn total_mass(&self) -> f64 {
        self.interior().map(|(_, _, q)| q[0]).sum::<f64>() * self.dx * self.dy
    }

    fn ghost_indices(&self) -> Vec<(isize, isize)> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let mut g = Vec::with_capacity(2 * (self.nx + self.ny) + 4);
        for i in -1..=nx {
            g.push((i, -1));
            g.push((i, ny));
        }
        for j in 0..ny {
            g.push((-1, j));
            g.push((nx, j));
        }
        g
    }

    fn fill_exact(&mut self, exact: &dyn FlowField<2>, cells: &[(isize, isize)]) -> Result<()> {
        for &(i, j) in cells {
            let (x, y) = self.center(i, j);
            let s = exact.sample(self.t, &[x, y])?;
            let k = self.idx(i, j);
            self.cells[k] = [s.rho, s.rho * s.u[0], s.rho * s.u[1]];
        }
        Ok(())
    }

    fn fill_transmissive(&mut self) {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        for (i, j) in self.ghost_indices() {
            let src = self.get(i.clamp(0, nx - 1), j.clamp(0, ny - 1));
            let k = self.idx(i, j);
            self.cells[k] = src;
        }
    }

    fn refresh_ghosts(
        &mut self,
        mode: BoundaryMode,
        exact: Option<&dyn FlowField<2>>,
    ) -> Result<()> {
        match (mode, exact) {
            (BoundaryMode::ExactDirichlet, Some(f)) => {
                let g = self.ghost_indices();
                self.fill_exact(f, &g)
            }
            (BoundaryMode::ExactDirichlet, None) => Err(Error::InvalidConfig(
                "exact-Dirichlet boundary needs an exact solution".into(),
            )),
            (BoundaryMode::Transmissive, _) => {
                self.fill_transmissive();
                Ok(())
            }
        }
    }

    /// Per-cell CSV dump: `x,y,rho,m1,m2`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "rho", "m1", "m2"])?;
        for (i, j, q) in self.interior() {
            let (x, y) = self.center(i as isize, j as isize);
            w.write_record(&[
                x.to_string(),
                y.to_string(),
                q[0].to_string(),
                q[1].to_string(),
                q[2].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_box_support<S: ScaleSource>(
    params: &SolutionParams,
    scales: &S,
    cfg: &FvConfig,
) -> Result<()> {
    let Some(s_star) = params.support_s() else {
        return Ok(());
    };
    let s_allowed = 0.9 * s_star;
    // ghost centres lie half a cell outside the box
    let (gx, gy) = (0.5 * cfg.dx(), 0.5 * cfg.dy());
    let r_far =
        (cfg.x_lo.abs().max(cfg.x_hi.abs()) + gx).hypot(cfg.y_lo.abs().max(cfg.y_hi.abs()) + gy);
    let mut s_max = 0.0f64;
    for t in [cfg.t0, cfg.t_end] {
        let a = scales.scale_at(t)?.a;
        s_max = s_max.max((r_far / a).powi(2));
    }
    if s_max > s_allowed {
        return Err(Error::BoxOutsideSupport { s_max, s_allowed });
    }
    Ok(())
}

/// Cell-centre samples of the exact solution at `cfg.t0`, ghosts included.
pub fn init_from_exact<S: ScaleSource>(
    params: &SolutionParams,
    scales: &S,
    cfg: &FvConfig,
) -> Result<ConservativeField> {
    cfg.validate()?;
    check_box_support(params, scales, cfg)?;
    let mut field = ConservativeField::blank(cfg);
    let all: Vec<(isize, isize)> = (-1..=cfg.ny as isize)
        .flat_map(|j| (-1..=cfg.nx as isize).map(move |i| (i, j)))
        .collect();
    field.fill_exact(&FamilyField { params, scales }, &all)?;
    Ok(field)
}

/// Primitive initial data `(x, y) -> (rho, u1, u2)` with transmissive ghosts.
pub fn init_from_fn<F: Fn(f64, f64) -> (f64, f64, f64)>(
    cfg: &FvConfig,
    f: F,
) -> Result<ConservativeField> {
    cfg.validate()?;
    let mut field = ConservativeField::blank(cfg);
    for j in 0..cfg.ny as isize {
        for i in 0..cfg.nx as isize {
            let (x, y) = field.center(i, j);
            let (rho, u1, u2) = f(x, y);
            let k = field.idx(i, j);
            field.cells[k] = [rho, rho * u1, rho * u2];
        }
    }
    field.fill_transmissive();
    Ok(field)
}

/// Physical flux along axis `dir` (0 = x, 1 = y) and the local wave speed.
#[inline]
fn flux(q: &[f64; 3], dir: usize, gas: &Gas) -> ([f64; 3], f64) {
    let rho = q[0];
    let (u, v) = (q[1] / rho, q[2] / rho);
    let p = gas.pressure(rho);
    let c = gas.sound_speed(rho);
    if dir == 0 {
        ([q[1], q[1] * u + p, q[1] * v], u.abs() + c)
    } else {
        ([q[2], q[2] * u, q[2] * v + p], v.abs() + c)
    }
}

#[inline]
fn rusanov(l: &[f64; 3], r: &[f64; 3], dir: usize, gas: &Gas) -> [f64; 3] {
    let (fl, sl) = flux(l, dir, gas);
    let (fr, sr) = flux(r, dir, gas);
    let s = sl.max(sr);
    [0, 1, 2].map(|k| 0.5 * (fl[k] + fr[k]) - 0.5 * s * (r[k] - l[k]))
}

/// Advance one forward-Euler step (never past `cfg.t_end`). Returns the step
/// size used.
pub fn step(
    field: &mut ConservativeField,
    cfg: &FvConfig,
    gas: &Gas,
    exact: Option<&dyn FlowField<2>>,
) -> Result<f64> {
    let (nx, ny) = (field.nx, field.ny);
    let smax = field
        .interior()
        .map(|(_, _, q)| {
            let c = gas.sound_speed(q[0]);
            (q[1] / q[0]).abs().max((q[2] / q[0]).abs()) + c
        })
        .fold(0.0f64, f64::max);
    let remaining = cfg.t_end - field.t;
    let mut dt = if smax > 0.0 {
        cfg.cfl * field.dx.min(field.dy) / smax
    } else {
        remaining
    };
    if dt >= remaining {
        dt = remaining;
    }
    if !(dt > 0.0) {
        return Ok(0.0);
    }
    let (lx, ly) = (dt / field.dx, dt / field.dy);
    let src: &ConservativeField = field;

    let rows: Vec<(Vec<[f64; 3]>, usize)> = (0..ny as isize)
        .into_par_iter()
        .map(|j| {
            let mut row = Vec::with_capacity(nx);
            let mut floored = 0;
            let xf: Vec<[f64; 3]> = (-1..nx as isize)
                .map(|i| rusanov(&src.get(i, j), &src.get(i + 1, j), 0, gas))
                .collect();
            for i in 0..nx as isize {
                let q = src.get(i, j);
                let fs = rusanov(&src.get(i, j - 1), &q, 1, gas);
                let fn_ = rusanov(&q, &src.get(i, j + 1), 1, gas);
                let (fw, fe) = (&xf[i as usize], &xf[i as usize + 1]);
                let mut out =
                    [0, 1, 2].map(|k| q[k] - lx * (fe[k] - fw[k]) - ly * (fn_[k] - fs[k]));
                if out[0] < cfg.rho_floor {
                    out[0] = cfg.rho_floor;
                    floored += 1;
                }
                row.push(out);
            }
            (row, floored)
        })
        .collect();

    let new_t = if dt == remaining {
        cfg.t_end
    } else {
        field.t + dt
    };
    for (j, (row, floored)) in rows.into_iter().enumerate() {
        for (i, q) in row.into_iter().enumerate() {
            if q.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { i, j, t: new_t });
            }
            let k = field.idx(i as isize, j as isize);
            field.cells[k] = q;
        }
        field.floor_events += floored;
    }
    field.t = new_t;
    field.refresh_ghosts(cfg.boundary, exact)?;
    Ok(dt)
}

/// Step until `cfg.t_end`; returns the number of steps.
pub fn run(
    field: &mut ConservativeField,
    cfg: &FvConfig,
    gas: &Gas,
    exact: Option<&dyn FlowField<2>>,
) -> Result<usize> {
    let mut n = 0;
    while field.t < cfg.t_end {
        if step(field, cfg, gas, exact)? == 0.0 {
            break;
        }
        n += 1;
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub resolution: usize,
    pub l1_rho: f64,
    pub linf_rho: f64,
    pub l1_mom: f64,
    pub linf_mom: f64,
    pub steps: usize,
    pub floor_events: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub from: usize,
    pub to: usize,
    pub l1_rho: f64,
    pub linf_rho: f64,
    pub l1_mom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub config: FvConfig,
    pub rows: Vec<ErrorRow>,
    /// Observed orders between consecutive resolutions.
    pub orders: Vec<OrderRow>,
}

impl ErrorReport {
    /// Columns `resolution,L1_rho,Linf_rho,L1_mom,Linf_mom,order_L1_rho`;
    /// the order cell is empty on the first row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "resolution",
            "L1_rho",
            "Linf_rho",
            "L1_mom",
            "Linf_mom",
            "order_L1_rho",
        ])?;
        for (k, r) in self.rows.iter().enumerate() {
            let order = if k == 0 {
                String::new()
            } else {
                self.orders[k - 1].l1_rho.to_string()
            };
            w.write_record(&[
                r.resolution.to_string(),
                r.l1_rho.to_string(),
                r.linf_rho.to_string(),
                r.l1_mom.to_string(),
                r.linf_mom.to_string(),
                order,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Errors of `field` against the exact solution at `field.t`.
fn compare(field: &ConservativeField, exact: &dyn FlowField<2>) -> Result<(f64, f64, f64, f64)> {
    let area = field.dx * field.dy;
    let (mut l1r, mut lir, mut l1m, mut lim) = (0.0, 0.0f64, 0.0, 0.0f64);
    for (i, j, q) in field.interior() {
        let (x, y) = field.center(i as isize, j as isize);
        let s = exact.sample(field.t, &[x, y])?;
        let dr = (q[0] - s.rho).abs();
        let dm = (q[1] - s.rho * s.u[0]).hypot(q[2] - s.rho * s.u[1]);
        l1r += dr * area;
        l1m += dm * area;
        lir = lir.max(dr);
        lim = lim.max(dm);
    }
    Ok((l1r, lir, l1m, lim))
}

/// Run every resolution from `cfg.t0` to `cfg.t_end` with exact-Dirichlet
/// ghosts and tabulate errors and observed orders.
pub fn run_and_compare<S: ScaleSource>(
    params: &SolutionParams,
    scales: &S,
    cfg: &FvConfig,
    resolutions: &[usize],
) -> Result<ErrorReport> {
    if resolutions.len() < 2 {
        return Err(Error::InvalidConfig("need at least two resolutions".into()));
    }
    let gas = Gas::of(params);
    let exact = FamilyField { params, scales };
    let mut rows = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let c = FvConfig {
            boundary: BoundaryMode::ExactDirichlet,
            ..cfg.with_resolution(n)
        };
        let mut field = init_from_exact(params, scales, &c)?;
        let steps = run(&mut field, &c, &gas, Some(&exact))?;
        let (l1_rho, linf_rho, l1_mom, linf_mom) = compare(&field, &exact)?;
        rows.push(ErrorRow {
            resolution: n,
            l1_rho,
            linf_rho,
            l1_mom,
            linf_mom,
            steps,
            floor_events: field.floor_events,
        });
    }
    let order = |a: f64, b: f64, na: usize, nb: usize| {
        if a == 0.0 && b == 0.0 {
            0.0
        } else {
            (a / b).ln() / (nb as f64 / na as f64).ln()
        }
    };
    let orders = rows
        .windows(2)
        .map(|w| OrderRow {
            from: w[0].resolution,
            to: w[1].resolution,
            l1_rho: order(w[0].l1_rho, w[1].l1_rho, w[0].resolution, w[1].resolution),
            linf_rho: order(
                w[0].linf_rho,
                w[1].linf_rho,
                w[0].resolution,
                w[1].resolution,
            ),
            l1_mom: order(w[0].l1_mom, w[1].l1_mom, w[0].resolution, w[1].resolution),
        })
        .collect();
    Ok(ErrorReport {
        config: *cfg,
        rows,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emden::{integrate, IntegrationConfig, Trajectory};
    use crate::numerics::gauss_integrate;
    use crate::solution::{eval_flow, zhang_zheng_embedding, zhang_zheng_field, QueryPoint};

    fn generic() -> (SolutionParams, Trajectory) {
        let p = SolutionParams::new(1.4, 1.0, 0.7, 0.9, 1.0, 1.0, 0.3).unwrap();
        let tr = integrate(&p, &IntegrationConfig::until(1.0)).unwrap();
        (p, tr)
    }

    #[test]
    fn initial_mass_matches_quadrature() {
        let (p, tr) = generic();
        let cfg = FvConfig::default();
        let field = init_from_exact(&p, &tr, &cfg).unwrap();
        let st = tr.state_at(0.0).unwrap();
        let rho = |x: f64, y: f64| eval_flow(&p, &st, &QueryPoint::new(x, y)).unwrap().rho;
        let exact = gauss_integrate(
            |y| gauss_integrate(|x| rho(x, y), -1.5, 1.5, 96),
            -1.5,
            1.5,
            96,
        );
        let err = (field.total_mass() - exact).abs();
        // midpoint rule: O(dx^2)
        assert!(err < 0.5 * cfg.dx().powi(2) * exact, "{err}");
        assert!(err > 0.0);
    }

    #[test]
    fn static_state_is_preserved() {
        let p = SolutionParams::new(1.4, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let tr = integrate(&p, &IntegrationConfig::until(1.0)).unwrap();
        let cfg = FvConfig {
            nx: 32,
            ny: 32,
            ..Default::default()
        };
        let mut field = init_from_exact(&p, &tr, &cfg).unwrap();
        let first = field.get(0, 0);
        assert!(field.interior().all(|(_, _, q)| q == first));
        let before = field.clone();
        run(
            &mut field,
            &cfg,
            &Gas::of(&p),
            Some(&FamilyField {
                params: &p,
                scales: &tr,
            }),
        )
        .unwrap();
        for ((_, _, a), (_, _, b)) in field.interior().zip(before.interior()) {
            assert!((0..3).all(|k| (a[k] - b[k]).abs() <= 1e-15));
        }
    }

    #[test]
    fn closed_form_box_matches_closed_form_samples() {
        let zz = zhang_zheng_embedding(1.0).unwrap();
        let cfg = FvConfig {
            x_lo: -0.6,
            x_hi: 0.6,
            y_lo: -0.6,
            y_hi: 0.6,
            nx: 16,
            ny: 16,
            t0: 1.0,
            t_end: 1.0,
            ..Default::default()
        };
        let field = init_from_exact(&zz.params, &zz, &cfg).unwrap();
        for (i, j, q) in field.interior() {
            let (x, y) = field.center(i as isize, j as isize);
            let s = zhang_zheng_field(1.0, &QueryPoint::new(x, y), 1.0).unwrap();
            assert!((q[0] - s.rho).abs() <= 1e-15);
            // embedding chirality: second velocity component flips sign
            assert!((q[1] - s.rho * s.u1).abs() <= 1e-15 && (q[2] + s.rho * s.u2).abs() <= 1e-15);
        }
    }

    #[test]
    fn box_outside_support_is_rejected() {
        let (p, tr) = generic();
        let cfg = FvConfig {
            x_lo: -3.0,
            x_hi: 3.0,
            ..Default::default()
        };
        assert!(matches!(
            init_from_exact(&p, &tr, &cfg),
            Err(Error::BoxOutsideSupport { .. })
        ));
    }

    #[test]
    fn single_step_error_is_first_order() {
        let (p, tr) = generic();
        let exact = FamilyField {
            params: &p,
            scales: &tr,
        };
        let dev = |n: usize| {
            let cfg = FvConfig::default().with_resolution(n);
            let mut f = init_from_exact(&p, &tr, &cfg).unwrap();
            // fixed physical time so both resolutions are compared at the same t
            let c = FvConfig { t_end: 2e-3, ..cfg };
            run(&mut f, &c, &Gas::of(&p), Some(&exact)).unwrap();
            compare(&f, &exact).unwrap().1
        };
        let (a, b) = (dev(32), dev(64));
        assert!((1.4..=2.8).contains(&(a / b)), "{a} {b}");
    }

    #[test]
    fn zero_horizon_has_zero_error() {
        let (p, tr) = generic();
        let cfg = FvConfig {
            t_end: 0.0,
            ..Default::default()
        };
        let r = run_and_compare(&p, &tr, &cfg, &[16, 32]).unwrap();
        for row in &r.rows {
            assert_eq!(
                (
                    row.l1_rho,
                    row.linf_rho,
                    row.l1_mom,
                    row.linf_mom,
                    row.steps
                ),
                (0.0, 0.0, 0.0, 0.0, 0)
            );
        }
    }

    #[test]
    fn sod_tube_stays_positive_and_monotone() {
        let gas = Gas { gamma: 1.4, k: 1.0 };
        let cfg = FvConfig {
            x_lo: 0.0,
            x_hi: 1.0,
            y_lo: 0.0,
            y_hi: 0.0625,
            nx: 256,
            ny: 16,
            t_end: 0.1,
            boundary: BoundaryMode::Transmissive,
            ..Default::default()
        };
        let mut f =
            init_from_fn(&cfg, |x, _| (if x < 0.5 { 1.0 } else { 0.125 }, 0.0, 0.0)).unwrap();
        run(&mut f, &cfg, &gas, None).unwrap();
        let row: Vec<f64> = (0..cfg.nx as isize).map(|i| f.get(i, 8)[0]).collect();
        assert!(row.iter().all(|r| *r > 0.0));
        assert!(
            row.windows(2).all(|w| w[1] <= w[0] + 1e-12),
            "density not monotone"
        );
        assert_eq!(f.floor_events, 0);
        // y-uniform data stays y-uniform
        assert!((0..cfg.ny as isize).all(|j| f.get(100, j) == f.get(100, 0)));
    }

    #[test]
    fn invalid_configs() {
        assert!(FvConfig {
            cfl: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(FvConfig {
            nx: 8,
            ..Default::default()
        }
        .validate()
        .is_err());
        let (p, tr) = generic();
        assert!(run_and_compare(&p, &tr, &FvConfig::default(), &[32]).is_err());
    }
}
