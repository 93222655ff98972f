//! Finite-difference residuals of the isentropic Euler equations
//!
//! ```text
//! rho_t + div(rho u) = 0
//! rho (u_t + (u . grad) u) + grad p = 0
//! ```
//!
//! evaluated on candidate exact solutions. Each equation is normalized by the
//! largest magnitude of its individual terms over the grid, so an exact
//! solution shows pure truncation error and a wrong one plateaus at O(1).

mod conjecture3d;
mod convergence;
mod euler2d;
mod grid;
mod swirl;
mod viscous;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{d1_fourth, d1_second};

pub use conjecture3d::{
    conjecture3d_residual_ladder, euler_residual_3d, integrate_scales_3d, radial_residual_3d,
    Conjecture3DParams, Conjecture3dField, Conjecture3dReport, Grid3Spec, ScaleTrajectory3d,
    Verdict,
};
pub use convergence::{residual_convergence, ConvergenceReport, ObservedOrder};
pub use euler2d::{
    euler_residual_2d, zz_direct_residual, FamilyField, PerturbedDensity, ScaleSource, ZzField,
    ZzForm,
};
pub use grid::{GridSpec, Order, Region, Steps, TIME_STEP_RATIO};
pub use swirl::{
    mass_residual_generic_g, polynomial_g, random_poly_coeffs, GenericRotationField, POLY_TERMS,
};
pub use viscous::{navier_stokes_residual_2d, ns_viscous_term, VISCOUS_STEP};

/// Point value of a flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const D: usize> {
    pub rho: f64,
    pub u: [f64; D],
    pub p: f64,
}

/// Time derivative of density and velocity at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate<const D: usize> {
    pub rho: f64,
    pub u: [f64; D],
}

/// A candidate solution that can be sampled anywhere near the grid.
pub trait FlowField<const D: usize>: Sync {
    fn sample(&self, t: f64, x: &[f64; D]) -> Result<Sample<D>>;

    /// Analytic time derivative, when available. Otherwise the engine
    /// differences `sample` in time.
    fn rate(&self, _t: f64, _x: &[f64; D]) -> Option<Result<Rate<D>>> {
        None
    }
}

/// Order-independent sum: ascending by value.
pub(crate) fn sum_sorted(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationStats {
    pub equation: String,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Largest individual term magnitude on the grid.
    pub scale: f64,
    pub max_normalized: f64,
    pub mean_normalized: f64,
    pub worst_point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub t: f64,
    pub h: f64,
    pub h_t: f64,
    pub points: usize,
    pub equations: Vec<EquationStats>,
    pub notes: Vec<String>,
}

impl ResidualReport {
    /// Worst normalized residual over all equations.
    pub fn max_normalized(&self) -> f64 {
        self.equations
            .iter()
            .map(|e| e.max_normalized)
            .fold(0.0, f64::max)
    }

    pub fn equation(&self, name: &str) -> Option<&EquationStats> {
        self.equations.iter().find(|e| e.equation == name)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// One row per equation.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "equation",
            "max_abs",
            "mean_abs",
            "scale",
            "max_normalized",
            "mean_normalized",
        ])?;
        for e in &self.equations {
            w.write_record(&[
                e.equation.clone(),
                e.max_abs.to_string(),
                e.mean_abs.to_string(),
                e.scale.to_string(),
                e.max_normalized.to_string(),
                e.mean_normalized.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn central<F: Fn(f64) -> Result<Vec<f64>>>(f: F, step: f64, order: Order) -> Result<Vec<f64>> {
    Ok(match order {
        Order::Second => {
            let (m1, p1) = (f(-step)?, f(step)?);
            m1.iter()
                .zip(&p1)
                .map(|(a, b)| d1_second(*a, *b, step))
                .collect()
        }
        Order::Fourth => {
            let (m2, m1, p1, p2) = (f(-2.0 * step)?, f(-step)?, f(step)?, f(2.0 * step)?);
            (0..m1.len())
                .map(|k| d1_fourth(m2[k], m1[k], p1[k], p2[k], step))
                .collect()
        }
    })
}

/// Flattened `[rho, u.., p, rho u..]` used for differencing.
fn pack<const D: usize>(s: &Sample<D>) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * D + 2);
    v.push(s.rho);
    v.extend_from_slice(&s.u);
    v.push(s.p);
    v.extend(s.u.iter().map(|u| s.rho * u));
    v
}

/// Per-point residuals and term scales: `D + 1` equations.
struct PointResult {
    residual: Vec<f64>,
    scale: Vec<f64>,
}

/// Extra momentum term `-visc(x)` added to each momentum equation (for
/// viscous checks).
pub(crate) type MomentumExtra<'a, const D: usize> =
    &'a (dyn Fn(&[f64; D]) -> Result<[f64; D]> + Sync);

fn point_residual<const D: usize, F: FlowField<D>>(
    field: &F,
    t: f64,
    x: &[f64; D],
    steps: &Steps,
    extra: Option<MomentumExtra<'_, D>>,
) -> Result<PointResult> {
    let c = field.sample(t, x)?;
    let rate = match field.rate(t, x) {
        Some(r) => r?,
        None => {
            let d = central(
                |dt| field.sample(t + dt, x).map(|s| pack(&s)),
                steps.h_t,
                steps.time,
            )?;
            let mut u = [0.0; D];
            u.copy_from_slice(&d[1..=D]);
            Rate { rho: d[0], u }
        }
    };
    // grads[j] = d/dx_j of pack()
    let mut grads = Vec::with_capacity(D);
    for j in 0..D {
        grads.push(central(
            |dx| {
                let mut y = *x;
                y[j] += dx;
                field.sample(t, &y).map(|s| pack(&s))
            },
            steps.h,
            steps.space,
        )?);
    }
    let visc = match extra {
        Some(f) => Some(f(x)?),
        None => None,
    };

    let mut residual = Vec::with_capacity(D + 1);
    let mut scale = Vec::with_capacity(D + 1);

    let mut terms: Vec<f64> = std::iter::once(rate.rho)
        .chain((0..D).map(|j| grads[j][D + 2 + j]))
        .collect();
    scale.push(terms.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    residual.push(sum_sorted(&mut terms));

    for i in 0..D {
        let mut terms = Vec::with_capacity(D + 3);
        terms.push(c.rho * rate.u[i]);
        for (j, g) in grads.iter().enumerate() {
            terms.push(c.rho * c.u[j] * g[1 + i]);
        }
        terms.push(grads[i][D + 1]);
        if let Some(v) = visc {
            terms.push(-v[i]);
        }
        scale.push(terms.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        residual.push(sum_sorted(&mut terms));
    }
    Ok(PointResult { residual, scale })
}

/// Evaluate all `D + 1` residuals over `points`. Parallel over points; the
/// reduction runs in point order, so the result is bitwise reproducible.
pub fn residual_report<const D: usize, F: FlowField<D>>(
    field: &F,
    t: f64,
    points: &[[f64; D]],
    steps: &Steps,
) -> Result<ResidualReport> {
    residual_report_with(field, t, points, steps, None)
}

pub(crate) fn residual_report_with<const D: usize, F: FlowField<D>>(
    field: &F,
    t: f64,
    points: &[[f64; D]],
    steps: &Steps,
    extra: Option<MomentumExtra<'_, D>>,
) -> Result<ResidualReport> {
    steps.validate()?;
    let results: Vec<PointResult> = points
        .par_iter()
        .map(|x| point_residual(field, t, x, steps, extra))
        .collect::<Result<_>>()?;

    let mut names = vec!["mass".to_string()];
    names.extend((0..D).map(|i| format!("momentum-{}", AXES[i])));
    let n = results.len().max(1) as f64;
    let equations = names
        .into_iter()
        .enumerate()
        .map(|(k, equation)| {
            let mut max_abs = 0.0f64;
            let mut sum = 0.0;
            let mut scale = 0.0f64;
            let mut worst = 0;
            for (p, r) in results.iter().enumerate() {
                let v = r.residual[k].abs();
                if v > max_abs {
                    max_abs = v;
                    worst = p;
                }
                sum += v;
                scale = scale.max(r.scale[k]);
            }
            let mean_abs = sum / n;
            let norm = |v: f64| if scale > 0.0 { v / scale } else { v };
            EquationStats {
                equation,
                max_abs,
                mean_abs,
                scale,
                max_normalized: norm(max_abs),
                mean_normalized: norm(mean_abs),
                worst_point: points.get(worst).map(|p| p.to_vec()).unwrap_or_default(),
            }
        })
        .collect();

    Ok(ResidualReport {
        t,
        h: steps.h,
        h_t: steps.h_t,
        points: points.len(),
        equations,
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pressureless density wave: rho = 2 + sin(x - t/2), u = (1/2, 0).
    struct Translation;

    impl FlowField<2> for Translation {
        fn sample(&self, t: f64, x: &[f64; 2]) -> Result<Sample<2>> {
            Ok(Sample {
                rho: 2.0 + (x[0] - 0.5 * t).sin(),
                u: [0.5, 0.0],
                p: 0.0,
            })
        }
    }

    #[test]
    fn translation_has_vanishing_residual() {
        let steps = Steps {
            h: 1e-3,
            h_t: 1e-3,
            space: Order::Fourth,
            time: Order::Fourth,
        };
        let pts: Vec<[f64; 2]> = (0..10).map(|i| [0.1 * i as f64, 0.3]).collect();
        let r = residual_report(&Translation, 0.4, &pts, &steps).unwrap();
        assert_eq!(r.equations.len(), 3);
        assert!(r.max_normalized() < 1e-10, "{r:?}");
    }

    #[test]
    fn report_is_reproducible_and_exports() {
        let steps = Steps {
            h: 1e-2,
            h_t: 1e-2,
            space: Order::Second,
            time: Order::Second,
        };
        let pts: Vec<[f64; 2]> = (0..50).map(|i| [0.02 * i as f64, -0.1]).collect();
        let a = residual_report(&Translation, 0.0, &pts, &steps).unwrap();
        let b = residual_report(&Translation, 0.0, &pts, &steps).unwrap();
        assert_eq!(a, b);
        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("equation,max_abs"));
        assert_eq!(text.lines().count(), 4);
        let mut json = Vec::new();
        a.write_json(&mut json).unwrap();
        let back: ResidualReport = serde_json::from_slice(&json).unwrap();
        assert_eq!(back, a);
    }
}
