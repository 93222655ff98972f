use super::euler2d::{FamilyField, ScaleSource};
use super::{residual_report_with, GridSpec, ResidualReport};
use crate::error::Result;
use crate::solution::{eval_flow, QueryPoint, ScaleState, SolutionParams};

/// Default Laplacian step. The stencil is exact on affine fields for any
/// step, and the rounding noise falls like `1 / h^2`, so the step is large.
pub const VISCOUS_STEP: f64 = 0.25;

/// `mu * Laplacian(u)` by the 5-point stencil with step `h`.
///
/// The family velocity is affine in `(x, y)`, so the exact value is zero and
/// the stencil only sees rounding, of size `eps |u| / h^2`.
pub fn ns_viscous_term(
    params: &SolutionParams,
    state: &ScaleState,
    q: &QueryPoint,
    mu: f64,
    h: f64,
) -> Result<[f64; 2]> {
    let u = |dx: f64, dy: f64| {
        eval_flow(params, state, &QueryPoint::new(q.x + dx, q.y + dy)).map(|f| [f.u1, f.u2])
    };
    let c = u(0.0, 0.0)?;
    let n = [u(h, 0.0)?, u(-h, 0.0)?, u(0.0, h)?, u(0.0, -h)?];
    // differences first: second differences of an affine field cancel exactly
    let lap = |k: usize| {
        (((n[0][k] - c[k]) + (n[1][k] - c[k])) + ((n[2][k] - c[k]) + (n[3][k] - c[k]))) / (h * h)
    };
    Ok([mu * lap(0), mu * lap(1)])
}

/// Euler residuals with the viscous term `mu * Laplacian(u)` moved into each
/// momentum balance.
pub fn navier_stokes_residual_2d<S: ScaleSource>(
    params: &SolutionParams,
    scales: &S,
    t: f64,
    grid: &GridSpec,
    mu: f64,
    visc_h: f64,
) -> Result<ResidualReport> {
    grid.validate()?;
    let state = scales.scale_at(t)?;
    let visc =
        |x: &[f64; 2]| ns_viscous_term(params, &state, &QueryPoint::new(x[0], x[1]), mu, visc_h);
    let mut report = residual_report_with(
        &FamilyField { params, scales },
        t,
        &grid.points(),
        &grid.steps(),
        Some(&visc),
    )?;
    report
        .notes
        .push(format!("viscous term mu = {mu}, Laplacian step {visc_h}"));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emden::{integrate, IntegrationConfig};
    use crate::residual::euler_residual_2d;

    #[test]
    fn laplacian_sanity_on_quadratic_field() {
        // the stencil itself: u = (x^2, 0) has Laplacian (2, 0)
        let f = |x: f64, _y: f64| x * x;
        let (x, y, h) = (0.3, -0.7, 1e-3);
        let lap = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
        assert!((lap - 2.0).abs() < 1e-6);
    }

    #[test]
    fn family_viscous_term_is_rounding_only_and_linear_in_mu() {
        let p = SolutionParams::new(1.4, 1.0, 0.7, 0.9, 1.0, 1.0, 0.3).unwrap();
        let st = ScaleState::new(0.0, 1.3, 0.4);
        let q = QueryPoint::new(0.4, -0.9);
        let h = 1e-2;
        let v1 = ns_viscous_term(&p, &st, &q, 1.0, h).unwrap();
        let v37 = ns_viscous_term(&p, &st, &q, 3.7, h).unwrap();
        let floor = 1e-10 * ((st.adot / st.a).abs() + (p.xi() / (st.a * st.a)).abs()) / h;
        assert!(v1[0].hypot(v1[1]) <= floor, "{v1:?}");
        assert_eq!(v37, [3.7 * v1[0], 3.7 * v1[1]]);
    }

    #[test]
    fn euler_and_navier_stokes_agree() {
        let p = SolutionParams::new(1.4, 1.0, 0.7, 0.9, 1.0, 1.0, 0.3).unwrap();
        let tr = integrate(&p, &IntegrationConfig::until(1.0)).unwrap();
        let g = GridSpec::annulus(0.1, 1.5);
        let e = euler_residual_2d(&p, &tr, 0.5, &g).unwrap();
        for mu in [0.0, 1.0, 3.7, 10.0] {
            let ns = navier_stokes_residual_2d(&p, &tr, 0.5, &g, mu, 1e-2).unwrap();
            for (a, b) in e.equations.iter().zip(&ns.equations) {
                assert!(
                    (a.max_normalized - b.max_normalized).abs() <= 1e-10,
                    "mu = {mu}: {} vs {}",
                    a.max_normalized,
                    b.max_normalized
                );
            }
        }
    }
}
