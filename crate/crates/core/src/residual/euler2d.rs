use serde::{Deserialize, Serialize};

use super::{residual_report, FlowField, GridSpec, Rate, ResidualReport, Sample};
use crate::emden::Trajectory;
use crate::error::{Error, Result};
use crate::solution::{
    eval_flow, zhang_zheng_field, zhang_zheng_field_reflected, FlowSample, QueryPoint, ScaleState,
    SolutionParams, ZhangZhengEmbedding,
};

/// Anything that yields the similarity scale at a given time.
pub trait ScaleSource: Sync {
    fn scale_at(&self, t: f64) -> Result<ScaleState>;
}

impl ScaleSource for Trajectory {
    fn scale_at(&self, t: f64) -> Result<ScaleState> {
        self.state_at(t).ok_or(Error::TrajectoryTooShort {
            t_lo: self.t_start(),
            t_hi: self.t_end(),
            need_lo: t,
            need_hi: t,
        })
    }
}

impl ScaleSource for ZhangZhengEmbedding {
    fn scale_at(&self, t: f64) -> Result<ScaleState> {
        self.state_at(t)
    }
}

fn to_sample(f: FlowSample) -> Sample<2> {
    Sample {
        rho: f.rho,
        u: [f.u1, f.u2],
        p: f.p,
    }
}

/// A family member driven by a scale curve.
pub struct FamilyField<'a, S: ScaleSource> {
    pub params: &'a SolutionParams,
    pub scales: &'a S,
}

impl<S: ScaleSource> FlowField<2> for FamilyField<'_, S> {
    fn sample(&self, t: f64, x: &[f64; 2]) -> Result<Sample<2>> {
        let st = self.scales.scale_at(t)?;
        eval_flow(self.params, &st, &QueryPoint::new(x[0], x[1])).map(to_sample)
    }
}

/// Wraps a field and multiplies its density by a constant factor. Pressure
/// and velocity are left alone, so momentum balance breaks.
pub struct PerturbedDensity<F> {
    pub inner: F,
    pub factor: f64,
}

impl<const D: usize, F: FlowField<D>> FlowField<D> for PerturbedDensity<F> {
    fn sample(&self, t: f64, x: &[f64; D]) -> Result<Sample<D>> {
        self.inner.sample(t, x).map(|s| Sample {
            rho: s.rho * self.factor,
            ..s
        })
    }

    fn rate(&self, t: f64, x: &[f64; D]) -> Option<Result<Rate<D>>> {
        self.inner.rate(t, x).map(|r| {
            r.map(|r| Rate {
                rho: r.rho * self.factor,
                ..r
            })
        })
    }
}

fn check_support(params: &SolutionParams, states: &[ScaleState], grid: &GridSpec) -> Result<()> {
    let Some(s_star) = params.support_s() else {
        return Ok(());
    };
    let s_allowed = grid.support_margin * s_star;
    let r = grid.r_reach();
    let s_max = states
        .iter()
        .map(|st| (r / st.a).powi(2))
        .fold(0.0, f64::max);
    if s_max > s_allowed {
        return Err(Error::GridTouchesSupportBoundary { s_max, s_allowed });
    }
    Ok(())
}

/// Residuals of a family member at time `t`.
pub fn euler_residual_2d<S: ScaleSource>(
    params: &SolutionParams,
    scales: &S,
    t: f64,
    grid: &GridSpec,
) -> Result<ResidualReport> {
    grid.validate()?;
    let reach = grid.steps().time_reach();
    let states = [
        scales.scale_at(t - reach)?,
        scales.scale_at(t)?,
        scales.scale_at(t + reach)?,
    ];
    check_support(params, &states, grid)?;
    residual_report(
        &FamilyField { params, scales },
        t,
        &grid.points(),
        &grid.steps(),
    )
}

/// Which version of the Zhang-Zheng formulas to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZzForm {
    /// Exactly as printed: `u1 = (x+y)/(2t)`, `u2 = (x-y)/(2t)`.
    Printed,
    /// Mirror image `y -> -y`, the exact solution.
    Reflected,
}

/// The closed-form `gamma = 2` field, with analytic time derivatives.
pub struct ZzField {
    pub k: f64,
    pub form: ZzForm,
}

impl FlowField<2> for ZzField {
    fn sample(&self, t: f64, x: &[f64; 2]) -> Result<Sample<2>> {
        let q = QueryPoint::new(x[0], x[1]);
        match self.form {
            ZzForm::Printed => zhang_zheng_field(t, &q, self.k),
            ZzForm::Reflected => zhang_zheng_field_reflected(t, &q, self.k),
        }
        .map(to_sample)
    }

    fn rate(&self, t: f64, x: &[f64; 2]) -> Option<Result<Rate<2>>> {
        // rho ~ 1/t^2 and u ~ 1/t at fixed x
        Some(self.sample(t, x).map(|s| Rate {
            rho: -2.0 * s.rho / t,
            u: [-s.u[0] / t, -s.u[1] / t],
        }))
    }
}

/// Residuals of the closed-form field, independent of the family code path.
pub fn zz_direct_residual(t: f64, k: f64, grid: &GridSpec, form: ZzForm) -> Result<ResidualReport> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    grid.validate()?;
    let reach = grid.steps().space_reach();
    if grid.r_min() < reach {
        return Err(Error::InvalidGrid(format!(
            "sample radius {} closer to the origin than the stencil reach {reach}",
            grid.r_min()
        )));
    }
    let mut report = residual_report(&ZzField { k, form }, t, &grid.points(), &grid.steps())?;
    if form == ZzForm::Printed {
        report.notes.push(
            "printed velocity: divergence-free, while rho_t = -2 rho / t, so mass balance fails"
                .into(),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emden::{integrate, IntegrationConfig};
    use crate::residual::{Order, Region};

    fn generic() -> SolutionParams {
        SolutionParams::new(1.4, 1.0, 0.7, 0.9, 1.0, 1.0, 0.3).unwrap()
    }

    fn traj(p: &SolutionParams) -> Trajectory {
        integrate(p, &IntegrationConfig::until(1.0)).unwrap()
    }

    #[test]
    fn generic_member_is_exact_to_truncation() {
        let p = generic();
        let tr = traj(&p);
        let g = GridSpec::annulus(0.1, 1.5);
        let r = euler_residual_2d(&p, &tr, 0.5, &g).unwrap();
        assert!(r.max_normalized() <= 1e-6, "{}", r.max_normalized());
        let r2 = euler_residual_2d(&p, &tr, 0.5, &g.with_h(5e-4)).unwrap();
        let ratio = r.max_normalized() / r2.max_normalized();
        assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn static_state_has_zero_residual() {
        let p = SolutionParams::new(1.4, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let tr = traj(&p);
        let r = euler_residual_2d(&p, &tr, 0.5, &GridSpec::annulus(0.0, 1.0)).unwrap();
        assert_eq!(r.max_normalized(), 0.0);
    }

    #[test]
    fn support_margin_is_enforced() {
        let p = generic();
        let tr = traj(&p);
        let e = euler_residual_2d(&p, &tr, 0.5, &GridSpec::annulus(0.1, 5.0)).unwrap_err();
        assert!(matches!(e, Error::GridTouchesSupportBoundary { .. }));
    }

    #[test]
    fn trajectory_span_is_enforced() {
        let p = generic();
        let tr = traj(&p);
        let e = euler_residual_2d(&p, &tr, 0.0, &GridSpec::annulus(0.1, 1.0)).unwrap_err();
        assert!(matches!(e, Error::TrajectoryTooShort { .. }));
    }

    #[test]
    fn embedding_is_exact() {
        let zz = crate::solution::zhang_zheng_embedding(1.0).unwrap();
        let r = euler_residual_2d(&zz.params, &zz, 1.0, &GridSpec::annulus(0.1, 2.0)).unwrap();
        assert!(r.max_normalized() <= 1e-6, "{}", r.max_normalized());
    }

    #[test]
    fn closed_form_field_residuals() {
        let g = GridSpec::annulus(0.1, 2.0);
        for t in [1.0, 2.0] {
            let r = zz_direct_residual(t, 1.0, &g, ZzForm::Reflected).unwrap();
            assert!(
                r.max_normalized() <= 1e-7,
                "t = {t}: {}",
                r.max_normalized()
            );
        }
        let printed = zz_direct_residual(1.0, 1.0, &g, ZzForm::Printed).unwrap();
        assert!(printed.equation("mass").unwrap().max_normalized > 0.1);
        assert!(matches!(
            zz_direct_residual(0.0, 1.0, &g, ZzForm::Reflected),
            Err(Error::NonPositiveTime { .. })
        ));
    }

    #[test]
    fn second_order_stencil_quarters_on_halving() {
        let g = GridSpec {
            space_order: Order::Second,
            ..GridSpec::annulus(0.1, 2.0)
        };
        let a = zz_direct_residual(1.0, 1.0, &g, ZzForm::Reflected)
            .unwrap()
            .max_normalized();
        let b = zz_direct_residual(1.0, 1.0, &g.with_h(5e-4), ZzForm::Reflected)
            .unwrap()
            .max_normalized();
        assert!((3.5..=4.5).contains(&(a / b)), "{}", a / b);
    }

    #[test]
    fn closed_form_rejects_origin() {
        let g = GridSpec {
            region: Region::Box {
                x_lo: -1.0,
                x_hi: 1.0,
                y_lo: -1.0,
                y_hi: 1.0,
                nx: 5,
                ny: 5,
            },
            ..Default::default()
        };
        assert!(matches!(
            zz_direct_residual(1.0, 1.0, &g, ZzForm::Reflected),
            Err(Error::InvalidGrid(_))
        ));
    }
}
