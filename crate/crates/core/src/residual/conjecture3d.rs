//! Anisotropic, drifting 3D generalization of the family:
//!
//! ```text
//! rho = f(s) / (a_1 a_2 a_3),       s = sum_k ((x_k - d_k) / a_k)^2
//! u_i = (adot_i / a_i) (x_i - d_i) + ddot_i
//! f(s) = max(alpha - xi (gamma-1)/(2 K gamma) s, 0)^(1/(gamma-1))
//! a_i'' = xi / (a_i (a_1 a_2 a_3)^(gamma-1)),   d_i = d_i0 + d_i1 t
//! ```
//!
//! Multiplying the scale equations by `adot_i` and summing gives the first
//! integral `sum adot_i^2 / 2 + xi / ((gamma-1) (a_1 a_2 a_3)^(gamma-1))`.
//! The family carries no swirl term.

use serde::{Deserialize, Serialize};

use super::convergence::{residual_convergence, ConvergenceReport};
use super::grid::TIME_STEP_RATIO;
use super::{
    residual_report, sum_sorted, EquationStats, FlowField, Order, ResidualReport, Sample, Steps,
};
use crate::emden::IntegrationConfig;
use crate::error::{Error, ParamViolation, Result};
use crate::numerics::{d1_fourth, d1_second};
use crate::ode::{self, OdeSolution, OdeSystem, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conjecture3DParams {
    pub gamma: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// Separation constant of the 3D scale equations (not a rotation rate).
    pub xi3: f64,
    pub alpha3: f64,
    pub a0: [f64; 3],
    pub a1: [f64; 3],
    /// Drift `d_i(t) = d0_i + d1_i t`.
    pub d0: [f64; 3],
    pub d1: [f64; 3],
}

fn prod_sorted(mut v: [f64; 3]) -> f64 {
    v.sort_by(f64::total_cmp);
    v[0] * v[1] * v[2]
}

impl Conjecture3DParams {
    pub fn isotropic(gamma: f64, k: f64, xi3: f64, alpha3: f64, a0: f64, a1: f64) -> Self {
        Conjecture3DParams {
            gamma,
            k,
            xi3,
            alpha3,
            a0: [a0; 3],
            a1: [a1; 3],
            d0: [0.0; 3],
            d1: [0.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let all = [self.gamma, self.k, self.xi3, self.alpha3]
            .into_iter()
            .chain(self.a0)
            .chain(self.a1)
            .chain(self.d0)
            .chain(self.d1);
        if all.clone().any(|v| !v.is_finite()) {
            bad.push(ParamViolation::NonFinite);
        }
        if !(self.gamma > 1.0) {
            bad.push(ParamViolation::NonPositiveGammaMargin);
        }
        if !(self.k > 0.0) {
            bad.push(ParamViolation::NonPositiveK);
        }
        if self.a0.iter().any(|a| !(*a > 0.0)) {
            bad.push(ParamViolation::NonPositiveA0);
        }
        if !(self.alpha3 >= 0.0) {
            bad.push(ParamViolation::NegativeAlpha);
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(bad))
        }
    }

    /// Relabel axes: axis `i` of the result is axis `perm[i]` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let p = |v: [f64; 3]| [v[perm[0]], v[perm[1]], v[perm[2]]];
        Conjecture3DParams {
            a0: p(self.a0),
            a1: p(self.a1),
            d0: p(self.d0),
            d1: p(self.d1),
            ..*self
        }
    }

    pub fn profile_slope(&self) -> f64 {
        self.xi3 * (self.gamma - 1.0) / (2.0 * self.k * self.gamma)
    }

    pub fn support_s(&self) -> Option<f64> {
        let c = self.profile_slope();
        (c > 0.0).then(|| self.alpha3 / c)
    }

    pub fn profile(&self, s: f64) -> f64 {
        let base = (self.alpha3 - self.profile_slope() * s).max(0.0);
        if base == 0.0 {
            0.0
        } else {
            base.powf(1.0 / (self.gamma - 1.0))
        }
    }

    pub fn drift(&self, t: f64) -> [f64; 3] {
        [0, 1, 2].map(|i| self.d0[i] + self.d1[i] * t)
    }

    pub fn first_integral(&self, a: &[f64; 3], adot: &[f64; 3]) -> f64 {
        let mut kin = adot.map(|v| 0.5 * v * v);
        sum_sorted(&mut kin)
            + self.xi3 / ((self.gamma - 1.0) * prod_sorted(*a).powf(self.gamma - 1.0))
    }
}

struct ScaleSystem3 {
    xi: f64,
    gamma: f64,
    collapse_epsilon: f64,
}

impl OdeSystem<6> for ScaleSystem3 {
    fn rhs(&self, _t: f64, y: &[f64; 6]) -> [f64; 6] {
        let a = [y[0], y[1], y[2]];
        if a.iter().any(|v| !(*v > 0.0)) {
            return [f64::NAN; 6];
        }
        let pg = prod_sorted(a).powf(self.gamma - 1.0);
        [
            y[3],
            y[4],
            y[5],
            self.xi / (a[0] * pg),
            self.xi / (a[1] * pg),
            self.xi / (a[2] * pg),
        ]
    }

    fn step_limit(&self, y: &[f64; 6]) -> f64 {
        (0..3)
            .filter(|&i| y[3 + i] < 0.0)
            .map(|i| 0.1 * y[i] / -y[3 + i])
            .fold(f64::INFINITY, f64::min)
    }

    fn terminal(&self, y: &[f64; 6]) -> f64 {
        y[0].min(y[1]).min(y[2]) - self.collapse_epsilon
    }

    fn time_to_singularity(&self, y: &[f64; 6]) -> Option<f64> {
        (0..3)
            .filter(|&i| y[3 + i] < 0.0)
            .map(|i| y[i] / -y[3 + i])
            .reduce(f64::min)
    }
}

/// The three coupled scales with dense output.
#[derive(Debug, Clone)]
pub struct ScaleTrajectory3d {
    params: Conjecture3DParams,
    solution: OdeSolution<6>,
}

impl ScaleTrajectory3d {
    pub fn params(&self) -> &Conjecture3DParams {
        &self.params
    }

    pub fn t_start(&self) -> f64 {
        self.solution.t_first()
    }

    pub fn t_end(&self) -> f64 {
        self.solution.t_last()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, [f64; 3], [f64; 3])> + '_ {
        self.solution
            .times
            .iter()
            .zip(&self.solution.states)
            .map(|(&t, y)| (t, [y[0], y[1], y[2]], [y[3], y[4], y[5]]))
    }

    /// `(a, adot)` at time `t`, by dense output.
    pub fn state_at(&self, t: f64) -> Result<([f64; 3], [f64; 3])> {
        let y = self.solution.eval(t).ok_or(Error::TrajectoryTooShort {
            t_lo: self.t_start(),
            t_hi: self.t_end(),
            need_lo: t,
            need_hi: t,
        })?;
        Ok(([y[0], y[1], y[2]], [y[3], y[4], y[5]]))
    }

    /// Worst relative change of the first integral over the nodes.
    pub fn energy_drift(&self) -> f64 {
        let mut it = self
            .nodes()
            .map(|(_, a, ad)| self.params.first_integral(&a, &ad));
        let Some(e0) = it.next() else { return 0.0 };
        it.map(|e| (e - e0).abs() / e0.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

pub fn integrate_scales_3d(
    c3: &Conjecture3DParams,
    cfg: &IntegrationConfig,
) -> Result<ScaleTrajectory3d> {
    c3.validate()?;
    cfg.validate()?;
    let sys = ScaleSystem3 {
        xi: c3.xi3,
        gamma: c3.gamma,
        collapse_epsilon: cfg.collapse_epsilon,
    };
    let y0 = [c3.a0[0], c3.a0[1], c3.a0[2], c3.a1[0], c3.a1[1], c3.a1[2]];
    let solution = ode::solve(&sys, cfg.t0, y0, cfg.t_end, &cfg.solver_options());
    match &solution.termination {
        Termination::ReachedEnd => Ok(ScaleTrajectory3d {
            params: *c3,
            solution,
        }),
        Termination::Event { .. } | Termination::Singular { .. } => {
            let y = solution.last_state();
            Err(Error::CollapsedState {
                a: y[0].min(y[1]).min(y[2]),
            })
        }
        Termination::StepFailure { t, reason } => {
            let y = solution.last_state();
            Err(Error::StepFailure {
                t: *t,
                a: y[0].min(y[1]).min(y[2]),
                adot: f64::NAN,
                reason: reason.clone(),
            })
        }
    }
}

/// The 3D candidate field driven by integrated scales.
pub struct Conjecture3dField<'a> {
    pub params: &'a Conjecture3DParams,
    pub scales: &'a ScaleTrajectory3d,
}

impl FlowField<3> for Conjecture3dField<'_> {
    fn sample(&self, t: f64, x: &[f64; 3]) -> Result<Sample<3>> {
        let (a, adot) = self.scales.state_at(t)?;
        let d = self.params.drift(t);
        let rel = [0, 1, 2].map(|i| x[i] - d[i]);
        let mut z2 = [0, 1, 2].map(|i| (rel[i] / a[i]).powi(2));
        let rho = self.params.profile(sum_sorted(&mut z2)) / prod_sorted(a);
        Ok(Sample {
            rho,
            u: [0, 1, 2].map(|i| adot[i] / a[i] * rel[i] + self.params.d1[i]),
            p: self.params.k * rho.powf(self.params.gamma),
        })
    }
}

/// Sampling plan in similarity coordinates `x_i = d_i + a_i z_i`: a cubic
/// lattice in `z`, clipped to a ball. Permuting axes maps the point set onto
/// itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3Spec {
    /// Lattice points per axis.
    pub n: usize,
    /// Ball radius in `z`; defaults to `0.85 sqrt(margin s*)`, or 1 for
    /// unbounded support.
    pub z_radius: Option<f64>,
    pub h: f64,
    pub h_t: f64,
    pub support_margin: f64,
    pub space_order: Order,
    pub time_order: Order,
}

impl Default for Grid3Spec {
    fn default() -> Self {
        Grid3Spec {
            n: 11,
            z_radius: None,
            h: 1e-3,
            h_t: 2.5e-4,
            support_margin: 0.9,
            space_order: Order::Fourth,
            time_order: Order::Second,
        }
    }
}

impl Grid3Spec {
    pub fn with_h(self, h: f64) -> Self {
        Grid3Spec {
            h,
            h_t: TIME_STEP_RATIO * h,
            ..self
        }
    }

    pub fn steps(&self) -> Steps {
        Steps {
            h: self.h,
            h_t: self.h_t,
            space: self.space_order,
            time: self.time_order,
        }
    }

    fn radius(&self, c3: &Conjecture3DParams) -> f64 {
        self.z_radius.unwrap_or_else(|| match c3.support_s() {
            Some(s) => 0.85 * (self.support_margin * s).sqrt(),
            None => 1.0,
        })
    }

    fn z_lattice(&self, radius: f64) -> Vec<[f64; 3]> {
        let n = self.n.max(2);
        let c = |k: usize| radius * (2.0 * k as f64 / (n - 1) as f64 - 1.0);
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let z = [c(i), c(j), c(k)];
                    if z.iter().map(|v| v * v).sum::<f64>() <= radius * radius * (1.0 + 1e-12) {
                        pts.push(z);
                    }
                }
            }
        }
        pts
    }

    /// Physical sample points at time `t`; checks the support margin over
    /// the whole space-time stencil.
    pub fn points(
        &self,
        c3: &Conjecture3DParams,
        scales: &ScaleTrajectory3d,
        t: f64,
    ) -> Result<Vec<[f64; 3]>> {
        self.steps().validate()?;
        if self.n < 2 || !(self.support_margin > 0.0 && self.support_margin <= 1.0) {
            return Err(Error::InvalidGrid(
                "3D grid needs n >= 2 and a margin in (0, 1]".into(),
            ));
        }
        let radius = self.radius(c3);
        let (a, _) = scales.state_at(t)?;
        let d = c3.drift(t);
        if let Some(s_star) = c3.support_s() {
            let s_allowed = self.support_margin * s_star;
            let steps = self.steps();
            let mut s_max = 0.0f64;
            for dt in [-steps.time_reach(), 0.0, steps.time_reach()] {
                let (at, _) = scales.state_at(t + dt)?;
                let dd = c3.drift(t + dt);
                // triangle inequality in the similarity metric at t + dt
                let stretch = (0..3).map(|i| a[i] / at[i]).fold(0.0, f64::max);
                let shift = (0..3)
                    .map(|i| (((d[i] - dd[i]).abs() + steps.space_reach()) / at[i]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let s = (stretch * radius + shift).powi(2);
                s_max = s_max.max(s);
            }
            if s_max > s_allowed {
                return Err(Error::GridTouchesSupportBoundary { s_max, s_allowed });
            }
        }
        Ok(self
            .z_lattice(radius)
            .into_iter()
            .map(|z| [0, 1, 2].map(|i| d[i] + a[i] * z[i]))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail {
        equation: String,
        location: Vec<f64>,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjecture3dReport {
    pub params: Conjecture3DParams,
    pub tolerance: f64,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub residual: ResidualReport,
    /// Observed orders over an `h` ladder, when one was run.
    pub convergence: Option<ConvergenceReport>,
}

/// Residuals of the N = 3 system and a PASS/FAIL verdict at `tolerance`.
pub fn euler_residual_3d(
    c3: &Conjecture3DParams,
    scales: &ScaleTrajectory3d,
    t: f64,
    grid: &Grid3Spec,
    tolerance: f64,
) -> Result<Conjecture3dReport> {
    let points = grid.points(c3, scales, t)?;
    let mut residual = residual_report(
        &Conjecture3dField { params: c3, scales },
        t,
        &points,
        &grid.steps(),
    )?;
    residual
        .notes
        .push("family as displayed: no swirl term in the 3D velocity".into());
    let worst = residual
        .equations
        .iter()
        .max_by(|a, b| a.max_normalized.total_cmp(&b.max_normalized))
        .expect("four equations");
    let verdict = if worst.max_normalized <= tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail {
            equation: worst.equation.clone(),
            location: worst.worst_point.clone(),
            value: worst.max_normalized,
        }
    };
    Ok(Conjecture3dReport {
        params: *c3,
        tolerance,
        verdict,
        residual,
        convergence: None,
    })
}

/// Observed order of the 3D residual over a ladder of space steps, each with
/// `h_t = h / 4`.
pub fn conjecture3d_residual_ladder(
    c3: &Conjecture3DParams,
    scales: &ScaleTrajectory3d,
    t: f64,
    grid: &Grid3Spec,
    ladder: &[f64],
) -> Result<ConvergenceReport> {
    residual_convergence(ladder, |h| {
        euler_residual_3d(c3, scales, t, &grid.with_h(h), f64::INFINITY).map(|r| r.residual)
    })
}

/// Spherically symmetric residuals for the isotropic, drift-free case:
///
/// ```text
/// rho_t + (rho v)_r + 2 rho v / r = 0
/// rho (v_t + v v_r) + p_r = 0
/// ```
///
/// Independent of the Cartesian engine; used to cross-check it.
pub fn radial_residual_3d(
    c3: &Conjecture3DParams,
    scales: &ScaleTrajectory3d,
    t: f64,
    radii: &[f64],
    h: f64,
    h_t: f64,
) -> Result<ResidualReport> {
    let iso = c3.a0.iter().all(|v| *v == c3.a0[0]) && c3.a1.iter().all(|v| *v == c3.a1[0]);
    let still = c3.d0.iter().chain(&c3.d1).all(|v| *v == 0.0);
    if !(iso && still) {
        return Err(Error::InvalidConfig(
            "radial path needs isotropic scales and zero drift".into(),
        ));
    }
    if radii.iter().any(|r| !(*r > 2.0 * h)) {
        return Err(Error::InvalidGrid(
            "radial samples must lie beyond the stencil reach".into(),
        ));
    }
    // (rho, v, p) at (t, r)
    let sample = |t: f64, r: f64| -> Result<[f64; 3]> {
        let (a, adot) = scales.state_at(t)?;
        let rho = c3.profile((r / a[0]).powi(2)) / a[0].powi(3);
        Ok([rho, adot[0] / a[0] * r, c3.k * rho.powf(c3.gamma)])
    };
    let mut res = [Vec::new(), Vec::new()];
    let mut scale = [0.0f64; 2];
    for &r in radii {
        let c = sample(t, r)?;
        let (tm, tp) = (sample(t - h_t, r)?, sample(t + h_t, r)?);
        let rho_t = d1_second(tm[0], tp[0], h_t);
        let v_t = d1_second(tm[1], tp[1], h_t);
        let s = [
            sample(t, r - 2.0 * h)?,
            sample(t, r - h)?,
            sample(t, r + h)?,
            sample(t, r + 2.0 * h)?,
        ];
        let dr =
            |f: &dyn Fn(&[f64; 3]) -> f64| d1_fourth(f(&s[0]), f(&s[1]), f(&s[2]), f(&s[3]), h);
        let flux_r = dr(&|q| q[0] * q[1]);
        let v_r = dr(&|q| q[1]);
        let p_r = dr(&|q| q[2]);
        let mass = [rho_t, flux_r, 2.0 * c[0] * c[1] / r];
        let mom = [c[0] * v_t, c[0] * c[1] * v_r, p_r];
        for (k, terms) in [mass.to_vec(), mom.to_vec()].into_iter().enumerate() {
            scale[k] = terms.iter().fold(scale[k], |m, v| m.max(v.abs()));
            let mut terms = terms;
            res[k].push(sum_sorted(&mut terms));
        }
    }
    let equations = ["mass", "momentum-r"]
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let (worst, max_abs) =
                res[k]
                    .iter()
                    .enumerate()
                    .fold((0, 0.0f64), |(wi, wm), (i, v)| {
                        if v.abs() > wm {
                            (i, v.abs())
                        } else {
                            (wi, wm)
                        }
                    });
            let mean_abs = res[k].iter().map(|v| v.abs()).sum::<f64>() / res[k].len().max(1) as f64;
            let norm = |v: f64| if scale[k] > 0.0 { v / scale[k] } else { v };
            EquationStats {
                equation: name.to_string(),
                max_abs,
                mean_abs,
                scale: scale[k],
                max_normalized: norm(max_abs),
                mean_normalized: norm(mean_abs),
                worst_point: radii.get(worst).map(|r| vec![*r]).unwrap_or_default(),
            }
        })
        .collect();
    Ok(ResidualReport {
        t,
        h,
        h_t,
        points: radii.len(),
        equations,
        notes: vec!["radial reduction".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso() -> Conjecture3DParams {
        Conjecture3DParams::isotropic(1.4, 1.0, 1.0, 1.0, 1.0, 0.0)
    }

    fn aniso() -> Conjecture3DParams {
        Conjecture3DParams {
            gamma: 1.4,
            k: 1.0,
            xi3: 1.0,
            alpha3: 1.0,
            a0: [1.0, 1.2, 0.8],
            a1: [0.0; 3],
            d0: [0.0; 3],
            d1: [0.1, 0.0, -0.05],
        }
    }

    #[test]
    fn isotropic_axes_stay_equal() {
        let tr = integrate_scales_3d(&iso(), &IntegrationConfig::until(3.0)).unwrap();
        for (_, a, ad) in tr.nodes() {
            assert!((a[0] - a[1]).abs() <= 1e-10 && (a[1] - a[2]).abs() <= 1e-10);
            assert!((ad[0] - ad[2]).abs() <= 1e-10);
        }
    }

    #[test]
    fn isotropic_matches_scalar_reduction() {
        struct Scalar(f64);
        impl OdeSystem<2> for Scalar {
            fn rhs(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
                [y[1], 1.0 / y[0].powf(3.0 * self.0 - 2.0)]
            }
        }
        let g = 5.0 / 3.0;
        let c3 = Conjecture3DParams::isotropic(g, 1.0, 1.0, 1.0, 1.0, 0.0);
        let tr = integrate_scales_3d(&c3, &IntegrationConfig::until(2.0)).unwrap();
        let opts = ode::SolverOptions {
            rtol: 1e-12,
            atol: 1e-12,
            ..Default::default()
        };
        let sc = ode::solve(&Scalar(g), 0.0, [1.0, 0.0], 2.0, &opts);
        for t in [0.3, 1.0, 1.7, 2.0] {
            let (a, _) = tr.state_at(t).unwrap();
            let b = sc.eval(t).unwrap()[0];
            assert!((a[0] - b).abs() <= 1e-8, "t = {t}: {} vs {b}", a[0]);
        }
    }

    #[test]
    fn zero_forcing_is_linear_motion() {
        let c3 = Conjecture3DParams {
            xi3: 0.0,
            a1: [0.5, -0.1, 0.0],
            ..aniso()
        };
        let tr = integrate_scales_3d(&c3, &IntegrationConfig::until(2.0)).unwrap();
        for (t, a, ad) in tr.nodes() {
            for i in 0..3 {
                assert!((a[i] - (c3.a0[i] + c3.a1[i] * t)).abs() <= 1e-14, "{t}");
                assert_eq!(ad[i], c3.a1[i]);
            }
        }
    }

    #[test]
    fn first_integral_is_conserved() {
        let tr = integrate_scales_3d(&aniso(), &IntegrationConfig::until(5.0)).unwrap();
        assert!(tr.energy_drift() < 1e-9, "{}", tr.energy_drift());
    }

    #[test]
    fn isotropic_and_drift_cases_pass() {
        let tr = integrate_scales_3d(&iso(), &IntegrationConfig::until(1.0)).unwrap();
        let r = euler_residual_3d(&iso(), &tr, 0.5, &Grid3Spec::default(), 1e-6).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.residual);

        let drift = Conjecture3DParams {
            xi3: 0.0,
            d1: [0.3, -0.2, 0.1],
            ..iso()
        };
        let tr = integrate_scales_3d(&drift, &IntegrationConfig::until(1.0)).unwrap();
        let r = euler_residual_3d(&drift, &tr, 0.5, &Grid3Spec::default(), 1e-8).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.residual);
        assert!(r.residual.max_normalized() <= 1e-8);
    }

    #[test]
    fn radial_path_agrees() {
        let tr = integrate_scales_3d(&iso(), &IntegrationConfig::until(1.0)).unwrap();
        let radii: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
        let r = radial_residual_3d(&iso(), &tr, 0.5, &radii, 1e-3, 2.5e-4).unwrap();
        assert!(r.max_normalized() <= 1e-6, "{r:?}");
        // both paths sample the same density
        let f = Conjecture3dField {
            params: &iso(),
            scales: &tr,
        };
        let (a, _) = tr.state_at(0.5).unwrap();
        let rho = f.sample(0.5, &[0.7, 0.0, 0.0]).unwrap().rho;
        assert!((rho - iso().profile((0.7 / a[0]).powi(2)) / a[0].powi(3)).abs() <= 1e-15);
        assert!(radial_residual_3d(&aniso(), &tr, 0.5, &radii, 1e-3, 1e-3).is_err());
    }

    #[test]
    fn anisotropic_case_is_decided() {
        let c3 = aniso();
        let tr = integrate_scales_3d(&c3, &IntegrationConfig::until(1.0)).unwrap();
        let r = euler_residual_3d(&c3, &tr, 0.5, &Grid3Spec::default(), 1e-6).unwrap();
        assert_eq!(r.residual.equations.len(), 4);
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.residual);
    }

    #[test]
    fn permuting_axes_permutes_residuals() {
        let c3 = Conjecture3DParams {
            a1: [0.2, -0.1, 0.05],
            ..aniso()
        };
        let perm = [2, 0, 1];
        let cp = c3.permuted(perm);
        let grid = Grid3Spec {
            n: 7,
            ..Default::default()
        };
        let tr = integrate_scales_3d(&c3, &IntegrationConfig::until(1.0)).unwrap();
        let tp = integrate_scales_3d(&cp, &IntegrationConfig::until(1.0)).unwrap();
        let r = euler_residual_3d(&c3, &tr, 0.5, &grid, 1e-6)
            .unwrap()
            .residual;
        let rp = euler_residual_3d(&cp, &tp, 0.5, &grid, 1e-6)
            .unwrap()
            .residual;
        assert!((r.equations[0].max_normalized - rp.equations[0].max_normalized).abs() <= 1e-13);
        for (i, &j) in perm.iter().enumerate() {
            let (orig, moved) = (&r.equations[1 + j], &rp.equations[1 + i]);
            assert!((orig.max_normalized - moved.max_normalized).abs() <= 1e-13);
            assert!((orig.mean_normalized - moved.mean_normalized).abs() <= 1e-13);
        }
    }

    #[test]
    fn support_margin_is_enforced() {
        let tr = integrate_scales_3d(&iso(), &IntegrationConfig::until(1.0)).unwrap();
        let g = Grid3Spec {
            z_radius: Some(3.0),
            ..Default::default()
        };
        assert!(matches!(
            euler_residual_3d(&iso(), &tr, 0.5, &g, 1e-6),
            Err(Error::GridTouchesSupportBoundary { .. })
        ));
    }
}
