//! Long-time behaviour of the scale equation: global existence, time-periodic
//! breathing, steady states and finite-time collapse.
//!
//! The decision tree runs on the conserved energy
//! `E = adot^2/2 + F_pot(a)` and the shape of `F_pot` for each `gamma` range.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::emden::{
    self, initial_energy, potential_unchecked, EnergySplit, IntegrationConfig, TerminalEvent,
};
use crate::error::{Error, Result};
use crate::numerics::{brent, gauss_integrate};
use crate::solution::SolutionParams;

pub use crate::emden::potential;

/// Case label of the classification tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2aI")]
    TwoAI,
    #[serde(rename = "2aII")]
    TwoAII,
    #[serde(rename = "2b-blowup")]
    TwoBBlowup,
    #[serde(rename = "2b-global")]
    TwoBGlobal,
    #[serde(rename = "3a")]
    ThreeA,
    #[serde(rename = "3bI-global")]
    ThreeBIGlobal,
    #[serde(rename = "3bI-blowup")]
    ThreeBIBlowup,
    #[serde(rename = "3bII-global")]
    ThreeBIIGlobal,
    #[serde(rename = "3bII-blowup")]
    ThreeBIIBlowup,
}

impl Branch {
    pub const ALL: [Branch; 10] = [
        Branch::One,
        Branch::TwoAI,
        Branch::TwoAII,
        Branch::TwoBBlowup,
        Branch::TwoBGlobal,
        Branch::ThreeA,
        Branch::ThreeBIGlobal,
        Branch::ThreeBIBlowup,
        Branch::ThreeBIIGlobal,
        Branch::ThreeBIIBlowup,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Branch::One => "1",
            Branch::TwoAI => "2aI",
            Branch::TwoAII => "2aII",
            Branch::TwoBBlowup => "2b-blowup",
            Branch::TwoBGlobal => "2b-global",
            Branch::ThreeA => "3a",
            Branch::ThreeBIGlobal => "3bI-global",
            Branch::ThreeBIBlowup => "3bI-blowup",
            Branch::ThreeBIIGlobal => "3bII-global",
            Branch::ThreeBIIBlowup => "3bII-blowup",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RegimeKind {
    Global,
    TimePeriodic {
        period: f64,
    },
    Steady {
        a_eq: f64,
    },
    /// Blowup time `t_star` inside `[t_lo, t_hi]`, measured from the initial data.
    FiniteTimeBlowup {
        t_star: f64,
        t_lo: f64,
        t_hi: f64,
    },
}

impl RegimeKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeKind::Global => "Global",
            RegimeKind::TimePeriodic { .. } => "TimePeriodic",
            RegimeKind::Steady { .. } => "Steady",
            RegimeKind::FiniteTimeBlowup { .. } => "FiniteTimeBlowup",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub a_max: Option<f64>,
    pub f_pot_at_a_max: Option<f64>,
    pub blowup_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub energy: EnergySplit,
    pub critical: CriticalData,
    /// Minimum of `F_pot` for `1 < gamma < 2` with `lambda < 0`.
    pub a_eq: Option<f64>,
    pub turning_points: Option<(f64, f64)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    #[serde(flatten)]
    pub kind: RegimeKind,
    pub branch: Branch,
    pub certificate: Certificate,
}

/// Critical scale of the `gamma > 2`, `lambda < 0` potential hump.
pub fn a_max_critical(params: &SolutionParams) -> Result<CriticalData> {
    let (g, lam, xi) = (params.gamma(), params.lambda(), params.xi());
    if !(g > 2.0 && lam < 0.0 && xi != 0.0) {
        return Err(Error::UndefinedCritical);
    }
    let a_max = (-lam / (xi * xi)).powf(1.0 / (2.0 * g - 4.0));
    Ok(CriticalData {
        a_max: Some(a_max),
        f_pot_at_a_max: Some(potential_unchecked(a_max, params)),
        blowup_threshold: None,
    })
}

/// Scales outside `[SCALE_FLOOR, 1 / SCALE_FLOOR]` are not resolved: `F_pot`
/// overflows soon beyond them.
pub const SCALE_FLOOR: f64 = 1e-150;

fn resolvable(a: f64) -> bool {
    (SCALE_FLOOR..=1.0 / SCALE_FLOOR).contains(&a)
}

/// Stationary point of `F_pot`, where the two forces cancel. Exists when
/// `gamma != 2`, `lambda < 0`, `xi != 0`; may under- or overflow as
/// `gamma -> 2`.
fn stationary_scale(params: &SolutionParams) -> Option<f64> {
    let (g, lam, xi) = (params.gamma(), params.lambda(), params.xi());
    (g != 2.0 && lam < 0.0 && xi != 0.0).then(|| (-lam / (xi * xi)).powf(1.0 / (2.0 * g - 4.0)))
}

fn is_equilibrium(params: &SolutionParams) -> bool {
    if params.a1() != 0.0 {
        return false;
    }
    let a = params.a0();
    let xi2 = params.xi() * params.xi();
    let push = xi2 / (a * a * a);
    let pull = params.lambda() / a.powf(2.0 * params.gamma() - 1.0);
    (push + pull).abs() <= 1e-12 * (push.abs() + pull.abs())
}

/// Roots `a_min <= a0 <= a_max` of `F_pot(a) = E(0)` for a bound orbit.
///
/// Fails with `NoBracket` when `a_min < SCALE_FLOOR`, which happens for
/// `gamma` close to 2 where the well sits at astronomically small scales.
pub fn turning_points(params: &SolutionParams) -> Result<(f64, f64)> {
    match bound_roots(params)? {
        (Some(a_min), a_max) => Ok((a_min, a_max)),
        (None, _) => Err(Error::NoBracket(format!(
            "lower turning point lies below {SCALE_FLOOR:e}"
        ))),
    }
}

/// Turning points, with `None` for a lower root below `SCALE_FLOOR`.
fn bound_roots(params: &SolutionParams) -> Result<(Option<f64>, f64)> {
    let g = params.gamma();
    let a0 = params.a0();
    let e0 = initial_energy(params).e;
    if !(g > 1.0 && g < 2.0) || !(e0 < 0.0) {
        return Err(Error::NoBracket(format!(
            "bound orbits need 1 < gamma < 2 and E(0) < 0 (gamma = {g}, E = {e0})"
        )));
    }
    if is_equilibrium(params) {
        return Ok((Some(a0), a0));
    }
    let a_eq = stationary_scale(params)
        .ok_or_else(|| Error::NoBracket("potential has no minimum".into()))?;
    if !resolvable(a0) || !(a_eq <= 1.0 / SCALE_FLOOR) {
        return Err(Error::NoBracket(format!(
            "scales a0 = {a0}, a_eq = {a_eq} are not resolvable"
        )));
    }
    let gap = |a: f64| potential_unchecked(a, params) - e0;
    // F_pot increases on [a_eq, inf), so below the floor the anchor is the floor
    let anchor = a_eq.max(SCALE_FLOOR);
    let g_anchor = gap(anchor);
    if g_anchor >= 0.0 {
        if a_eq >= SCALE_FLOOR {
            return Ok((Some(a_eq), a_eq));
        }
        return Err(Error::NoBracket(
            "orbit does not reach the resolvable range".into(),
        ));
    }
    let mut hi = anchor.max(a0);
    for _ in 0..400 {
        if gap(hi) > 0.0 {
            break;
        }
        hi *= 2.0;
    }
    if !(gap(hi) > 0.0) {
        return Err(Error::NoBracket(
            "could not bracket the upper turning point".into(),
        ));
    }
    let a_max =
        brent(gap, anchor, hi, 1e-13, 500).ok_or_else(|| Error::NoBracket("upper root".into()))?;
    let mut lo = anchor.min(a0);
    while !(gap(lo) > 0.0) && lo > SCALE_FLOOR {
        lo = (0.5 * lo).max(SCALE_FLOOR);
    }
    let a_min = if gap(lo) > 0.0 {
        Some(
            brent(gap, lo, anchor, 1e-13, 500)
                .ok_or_else(|| Error::NoBracket("lower root".into()))?
                .min(a0),
        )
    } else {
        None
    };
    Ok((a_min, a_max.max(a0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodResult {
    pub period: f64,
    /// Quadrature error plus, when truncated, a bound on the dropped piece.
    pub error_estimate: f64,
    /// `SCALE_FLOOR` when the true lower turning point lies below it.
    pub a_min: f64,
    pub a_max: f64,
    pub nodes: usize,
    /// The integral starts at `SCALE_FLOOR` rather than at a turning point.
    pub truncated: bool,
}

/// Period `T = 2 int_{a_min}^{a_max} da / sqrt(2 (E - F_pot(a)))` of a bound
/// orbit, with `a = a_min + (a_max - a_min) sin^2(theta)` removing the
/// endpoint singularities. Gauss-Legendre with node doubling.
///
/// A lower turning point below `SCALE_FLOOR` is replaced by the floor. There
/// `E - F_pot ~ |lambda| a^(2 - 2 gamma)`, so the dropped piece is of order
/// `SCALE_FLOOR^gamma`.
pub fn period_quadrature(params: &SolutionParams) -> Result<PeriodResult> {
    let (lower, a_max) = bound_roots(params)?;
    let truncated = lower.is_none();
    let a_min = lower.unwrap_or(SCALE_FLOOR);
    if a_max - a_min <= 1e-12 * a_max {
        return Err(Error::DegenerateOrbit { a: params.a0() });
    }
    let width = a_max - a_min;
    // Energy taken as the chord through (a_min, F(a_min)) and (a_max, F(a_max)):
    // it differs from E(0) only by the root-finding error, and makes the gap
    // vanish exactly at both ends, which the substitution relies on. A
    // truncated orbit uses the constant F(a_max) instead.
    let (f_lo, f_hi) = (
        potential_unchecked(a_min, params),
        potential_unchecked(a_max, params),
    );
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        // measure from the nearer turning point so the drop keeps its digits;
        // the floor is no root, and F_pot there is huge, so go direct
        let gap = if s < c && truncated {
            f_hi - potential_unchecked(a_min + width * s * s, params)
        } else if s < c {
            potential_drop(a_min, width * s * s, params) + (f_hi - f_lo) * s * s
        } else if truncated {
            potential_drop(a_max, -width * c * c, params)
        } else {
            potential_drop(a_max, -width * c * c, params) + (f_lo - f_hi) * c * c
        }
        .max(0.0);
        if gap == 0.0 {
            return 0.0;
        }
        2.0 * width * s * c / (2.0 * gap).sqrt()
    };
    // dropped piece estimated as the floor width over the speed at the floor
    let dropped = if truncated {
        2.0 * SCALE_FLOOR / (2.0 * (f_hi - f_lo)).sqrt()
    } else {
        0.0
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut n = 32;
    let mut prev = 2.0 * gauss_integrate(integrand, 0.0, half_pi, n);
    loop {
        n *= 2;
        let cur = 2.0 * gauss_integrate(integrand, 0.0, half_pi, n);
        let err = (cur - prev).abs();
        if err <= 1e-11 * cur.abs().max(1.0) || n >= 8192 {
            return Ok(PeriodResult {
                period: cur,
                error_estimate: err + dropped,
                a_min,
                a_max,
                nodes: n,
                truncated,
            });
        }
        prev = cur;
    }
}

/// `F_pot(b) - F_pot(b + d)` without cancellation for small `d`.
fn potential_drop(b: f64, d: f64, params: &SolutionParams) -> f64 {
    let xi2 = params.xi() * params.xi();
    let m = 2.0 * params.gamma() - 2.0;
    let swirl = 0.5 * xi2 * d * (2.0 * b + d) / (b * b * (b + d) * (b + d));
    let pressure = -params.lambda() / m * b.powf(-m) * (-m * (d / b).ln_1p()).exp_m1();
    swirl + pressure
}

fn closed_form_blowup(t_star: f64) -> RegimeKind {
    RegimeKind::FiniteTimeBlowup {
        t_star,
        t_lo: t_star,
        t_hi: t_star,
    }
}

/// Locate a collapse by integration, doubling the horizon until it occurs.
fn integrated_blowup(params: &SolutionParams) -> Result<RegimeKind> {
    let mut horizon = 16.0;
    while horizon <= 1e8 {
        let traj = emden::integrate(params, &IntegrationConfig::until(horizon))?;
        if let TerminalEvent::Collapsed { t_star, error_bar } = traj.event() {
            return Ok(RegimeKind::FiniteTimeBlowup {
                t_star,
                t_lo: t_star,
                t_hi: t_star + error_bar,
            });
        }
        horizon *= 8.0;
    }
    Ok(RegimeKind::FiniteTimeBlowup {
        t_star: f64::INFINITY,
        t_lo: horizon,
        t_hi: f64::INFINITY,
    })
}

pub fn classify(params: &SolutionParams) -> Result<Regime> {
    let (g, xi, lam, a0, a1) = (
        params.gamma(),
        params.xi(),
        params.lambda(),
        params.a0(),
        params.a1(),
    );
    if xi == 0.0 {
        return Err(Error::ZeroRotation);
    }
    let energy = initial_energy(params);
    let e0 = energy.e;
    let xi2 = xi * xi;
    let mut cert = Certificate {
        energy,
        critical: CriticalData::default(),
        a_eq: None,
        turning_points: None,
        notes: Vec::new(),
    };

    let (kind, branch) = if g < 2.0 {
        cert.a_eq = stationary_scale(params).filter(|a| resolvable(*a));
        if cert.a_eq.is_none() && lam < 0.0 {
            cert.notes.push(format!(
                "potential minimum lies outside [{SCALE_FLOOR:e}, {:e}]",
                1.0 / SCALE_FLOOR
            ));
        }
        if e0 < 0.0 {
            if is_equilibrium(params) {
                cert.turning_points = Some((a0, a0));
                (RegimeKind::Steady { a_eq: a0 }, Branch::One)
            } else {
                let pr = period_quadrature(params)?;
                if pr.truncated {
                    cert.notes.push(format!("lower turning point lies below {SCALE_FLOOR:e}; period integral truncated there"));
                } else {
                    cert.turning_points = Some((pr.a_min, pr.a_max));
                }
                (RegimeKind::TimePeriodic { period: pr.period }, Branch::One)
            }
        } else {
            (RegimeKind::Global, Branch::One)
        }
    } else if g == 2.0 {
        let net = xi2 + lam;
        if net > 0.0 || (net == 0.0 && a1 >= 0.0) {
            let kind = if net == 0.0 && a1 == 0.0 {
                RegimeKind::Steady { a_eq: a0 }
            } else {
                RegimeKind::Global
            };
            (kind, Branch::TwoAI)
        } else if net == 0.0 {
            // a(t) = a0 + a1 t vanishes at -a0/a1
            cert.notes.push(format!(
                "collapse at -a0/a1 = {}, where the linear scale vanishes; -a1/a0 = {} would be a typo",
                -a0 / a1,
                -a1 / a0
            ));
            (closed_form_blowup(-a0 / a1), Branch::TwoAII)
        } else {
            let threshold = (-lam - xi2).sqrt() / a0;
            cert.critical.blowup_threshold = Some(threshold);
            if a1 < threshold {
                let t_star = emden::gamma2_collapse_time(params)?
                    .expect("scale quadratic has a positive root below the threshold");
                (closed_form_blowup(t_star), Branch::TwoBBlowup)
            } else {
                (RegimeKind::Global, Branch::TwoBGlobal)
            }
        }
    } else if lam >= 0.0 {
        (RegimeKind::Global, Branch::ThreeA)
    } else {
        let crit = a_max_critical(params)?;
        cert.critical = crit;
        let a_max = crit.a_max.expect("defined for gamma > 2, lambda < 0");
        let f_top = crit.f_pot_at_a_max.expect("defined with a_max");
        let steady = is_equilibrium(params);
        if a0 >= a_max {
            if e0 <= f_top || a1 >= 0.0 {
                let kind = if steady {
                    RegimeKind::Steady { a_eq: a0 }
                } else {
                    RegimeKind::Global
                };
                (kind, Branch::ThreeBIGlobal)
            } else {
                (integrated_blowup(params)?, Branch::ThreeBIBlowup)
            }
        } else if e0 >= f_top && a1 > 0.0 {
            (RegimeKind::Global, Branch::ThreeBIIGlobal)
        } else if steady {
            // unreachable for a0 < a_max; kept for completeness
            (RegimeKind::Steady { a_eq: a0 }, Branch::ThreeBIIGlobal)
        } else {
            (integrated_blowup(params)?, Branch::ThreeBIIBlowup)
        }
    };

    Ok(Regime {
        kind,
        branch,
        certificate: cert,
    })
}

/// First return time of the orbit to its starting point, found by
/// integration and bisection on dense output (Poincare section through the
/// initial data).
pub fn integrated_return_time(params: &SolutionParams, horizon: f64) -> Result<Option<f64>> {
    let traj = emden::integrate(params, &IntegrationConfig::until(horizon))?;
    let (a0, a1) = (params.a0(), params.a1());
    let (_, acc0) = emden::emden_rhs(&crate::solution::ScaleState::new(0.0, a0, a1), params)?;
    // section function g and the sign it must move towards when crossing
    let section = |st: &crate::solution::ScaleState| if a1 == 0.0 { st.adot } else { st.a - a0 };
    let dir = if a1 == 0.0 {
        acc0.signum()
    } else {
        a1.signum()
    };
    if dir == 0.0 {
        return Ok(None);
    }
    let nodes = traj.nodes();
    for w in nodes.windows(2).skip(1) {
        let (g0, g1) = (section(&w[0].state), section(&w[1].state));
        if dir * g0 < 0.0 && dir * g1 >= 0.0 {
            let (mut lo, mut hi) = (w[0].state.t, w[1].state.t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let st = traj.state_at(mid).expect("inside span");
                if dir * section(&st) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub branch: Branch,
    pub classified: String,
    pub observed: String,
    pub horizon: f64,
    /// Largest deviation seen by the check (state mismatch, time offset, ...).
    pub deviation: f64,
}

/// Cross-check a classification against direct integration.
pub fn certify(
    params: &SolutionParams,
    regime: &Regime,
    horizon: f64,
) -> Result<CertificationReport> {
    let mismatch = |observed: String| Error::CertificationMismatch {
        classified: format!("{} [{}]", regime.kind.name(), regime.branch),
        observed,
    };
    let report = |observed: String, horizon: f64, deviation: f64| CertificationReport {
        branch: regime.branch,
        classified: regime.kind.name().to_string(),
        observed,
        horizon,
        deviation,
    };
    match regime.kind {
        RegimeKind::Global => {
            let traj = emden::integrate(params, &IntegrationConfig::until(horizon))?;
            match traj.event() {
                TerminalEvent::ReachedEnd => Ok(report(
                    format!("no collapse up to t = {horizon}"),
                    horizon,
                    0.0,
                )),
                TerminalEvent::Collapsed { t_star, .. } => {
                    Err(mismatch(format!("collapse at t = {t_star}")))
                }
            }
        }
        RegimeKind::Steady { a_eq } => {
            let traj = emden::integrate(params, &IntegrationConfig::until(horizon))?;
            let dev = traj
                .nodes()
                .iter()
                .map(|n| (n.state.a - a_eq).abs())
                .fold(0.0, f64::max);
            if traj.event() == TerminalEvent::ReachedEnd && dev <= 1e-9 {
                Ok(report(format!("stays at a = {a_eq}"), horizon, dev))
            } else {
                Err(mismatch(format!("left the equilibrium by {dev}")))
            }
        }
        RegimeKind::TimePeriodic { period } => {
            let traj = emden::integrate(params, &IntegrationConfig::until(period * 1.01))?;
            let st = traj
                .state_at(period)
                .ok_or_else(|| mismatch("collapsed before one period".into()))?;
            let dev = (st.a - params.a0())
                .abs()
                .max((st.adot - params.a1()).abs());
            if dev <= 1e-6 {
                Ok(report(
                    format!("returns to initial data after T = {period}"),
                    period,
                    dev,
                ))
            } else {
                Err(mismatch(format!("state after T differs by {dev}")))
            }
        }
        RegimeKind::FiniteTimeBlowup { t_lo, t_hi, .. } => {
            let horizon = if t_hi.is_finite() {
                t_hi * 1.5 + 1.0
            } else {
                horizon
            };
            let traj = emden::integrate(params, &IntegrationConfig::until(horizon))?;
            match traj.event() {
                TerminalEvent::Collapsed { t_star, .. } => {
                    let tol = 1e-6 * t_hi.max(1.0);
                    let dev = if t_star < t_lo {
                        t_lo - t_star
                    } else {
                        (t_star - t_hi).max(0.0)
                    };
                    if dev <= tol {
                        Ok(report(format!("collapse at t = {t_star}"), horizon, dev))
                    } else {
                        Err(mismatch(format!(
                            "collapse at t = {t_star}, outside [{t_lo}, {t_hi}]"
                        )))
                    }
                }
                TerminalEvent::ReachedEnd => {
                    Err(mismatch(format!("no collapse up to t = {horizon}")))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(gamma: f64, xi: f64, lambda: f64, a0: f64, a1: f64) -> SolutionParams {
        SolutionParams::new(gamma, 1.0, xi, lambda, 1.0, a0, a1).unwrap()
    }

    #[test]
    fn fixture_classifications() {
        let r = classify(&p(1.5, 1.0, -2.0, 1.0, 0.0)).unwrap();
        assert_eq!(r.branch, Branch::One);
        assert!(matches!(r.kind, RegimeKind::TimePeriodic { .. }));
        assert_eq!(r.certificate.energy.e, -1.5);

        let r = classify(&p(2.0, 1.0, -2.0, 1.0, 0.0)).unwrap();
        assert_eq!(r.branch, Branch::TwoBBlowup);
        assert!(matches!(r.kind, RegimeKind::FiniteTimeBlowup { t_star, .. } if t_star == 1.0));

        let r = classify(&p(3.0, 1.0, -1.0, 2.0, 0.0)).unwrap();
        assert_eq!(r.branch, Branch::ThreeBIGlobal);
        assert_eq!(r.kind, RegimeKind::Global);
        assert_eq!(r.certificate.critical.a_max, Some(1.0));
        assert_eq!(r.certificate.critical.f_pot_at_a_max, Some(0.25));
        assert!((r.certificate.energy.e - (0.125 - 1.0 / 64.0)).abs() < 1e-15);

        let r = classify(&p(2.0, 1.0, -1.0, 1.0, -0.5)).unwrap();
        assert_eq!(r.branch, Branch::TwoAII);
        assert!(matches!(r.kind, RegimeKind::FiniteTimeBlowup { t_star, .. } if t_star == 2.0));
        assert!(r.certificate.notes[0].contains("-a1/a0"));
    }

    #[test]
    fn zero_rotation_is_rejected() {
        assert!(matches!(
            classify(&p(1.5, 0.0, -2.0, 1.0, 0.0)),
            Err(Error::ZeroRotation)
        ));
    }

    #[test]
    fn potential_examples() {
        assert_eq!(potential(1.0, &p(3.0, 1.0, -1.0, 1.0, 0.0)).unwrap(), 0.25);
        for a in [0.3, 1.0, 7.0] {
            assert!(potential(a, &p(2.0, 1.0, -1.0, 1.0, 0.0)).unwrap().abs() < 1e-15);
        }
        assert_eq!(potential(1.0, &p(1.5, 1.0, -2.0, 1.0, 0.0)).unwrap(), -1.5);
        assert!(potential(0.0, &p(1.5, 1.0, -2.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn critical_scale_examples() {
        assert_eq!(
            a_max_critical(&p(3.0, 1.0, -1.0, 1.0, 0.0)).unwrap().a_max,
            Some(1.0)
        );
        assert_eq!(
            a_max_critical(&p(3.0, 2.0, -4.0, 1.0, 0.0)).unwrap().a_max,
            Some(1.0)
        );
        assert_eq!(
            a_max_critical(&p(4.0, 1.0, -1.0, 1.0, 0.0)).unwrap().a_max,
            Some(1.0)
        );
        assert!(matches!(
            a_max_critical(&p(1.5, 1.0, -1.0, 1.0, 0.0)),
            Err(Error::UndefinedCritical)
        ));
        // strict local maximum
        let params = p(3.5, 0.8, -1.7, 1.0, 0.0);
        let c = a_max_critical(&params).unwrap();
        let (am, top) = (c.a_max.unwrap(), c.f_pot_at_a_max.unwrap());
        assert!(potential(am * (1.0 - 1e-3), &params).unwrap() < top);
        assert!(potential(am * (1.0 + 1e-3), &params).unwrap() < top);
    }

    #[test]
    fn turning_point_examples() {
        assert_eq!(
            turning_points(&p(1.5, 1.0, -2.0, 0.5, 0.0)).unwrap(),
            (0.5, 0.5)
        );
        let (lo, hi) = turning_points(&p(1.5, 1.0, -2.0, 1.0, 0.0)).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-13 && hi == 1.0, "{lo} {hi}");
        let (lo2, hi2) = turning_points(&p(1.5, 1.0, -2.0, 1.0 / 3.0, 0.0)).unwrap();
        assert!((lo2 - 1.0 / 3.0).abs() < 1e-13 && (hi2 - 1.0).abs() < 1e-13);
        assert!(matches!(
            turning_points(&p(1.5, 1.0, 2.0, 1.0, 0.0)),
            Err(Error::NoBracket(_))
        ));
    }

    #[test]
    fn period_matches_closed_form() {
        // for gamma = 3/2 the orbit integral is elementary: T = 4 pi / (3 sqrt 3)
        let pr = period_quadrature(&p(1.5, 1.0, -2.0, 1.0, 0.0)).unwrap();
        let exact = 4.0 * std::f64::consts::PI / (3.0 * 3f64.sqrt());
        assert!((pr.period - exact).abs() < 1e-9, "{} vs {exact}", pr.period);
        assert!(pr.error_estimate < 1e-9);
    }

    #[test]
    fn degenerate_orbit_errors() {
        assert!(matches!(
            period_quadrature(&p(1.5, 1.0, -2.0, 0.5, 0.0)),
            Err(Error::DegenerateOrbit { .. })
        ));
        let r = classify(&p(1.5, 1.0, -2.0, 0.5, 0.0)).unwrap();
        assert_eq!(r.kind, RegimeKind::Steady { a_eq: 0.5 });
    }

    #[test]
    fn near_gamma_two_the_lower_turning_point_is_truncated() {
        let q = SolutionParams::new(
            1.9993344517797293,
            0.1,
            0.05,
            -2.4712650831559757,
            0.0,
            0.1,
            0.0,
        )
        .unwrap();
        assert!(matches!(turning_points(&q), Err(Error::NoBracket(_))));
        let pr = period_quadrature(&q).unwrap();
        assert!(pr.truncated && pr.a_min == SCALE_FLOOR && pr.a_max == 0.1);
        assert!(
            pr.period.is_finite() && pr.period > 0.0 && pr.error_estimate < 1e-9 * pr.period,
            "{pr:?}"
        );
        let r = classify(&q).unwrap();
        assert_eq!(r.branch, Branch::One);
        assert!(matches!(r.kind, RegimeKind::TimePeriodic { .. }));
        assert_eq!(r.certificate.turning_points, None);
        // the collapse toward the floor and back takes the computed period
        let cfg = IntegrationConfig::until(pr.period * 0.5);
        let st = emden::integrate(&q, &cfg)
            .unwrap()
            .state_at(pr.period * 0.5)
            .unwrap();
        assert!(st.a < 1e-3, "{}", st.a);
    }

    #[test]
    fn potential_drop_matches_the_direct_difference() {
        let params = p(1.5, 1.0, -2.0, 1.0, 0.0);
        for (b, d) in [(0.4, 0.1), (1.0, -0.3), (0.7, 1e-9)] {
            let direct = potential_unchecked(b, &params) - potential_unchecked(b + d, &params);
            assert!(
                (potential_drop(b, d, &params) - direct).abs() <= 1e-14,
                "{b} {d}"
            );
        }
    }

    #[test]
    fn small_oscillation_limit() {
        // F_pot''(1/2) = 3 xi^2 / a^4 + lambda (2 gamma - 1) / a^(2 gamma) = 48 - 32 = 16
        let pr = period_quadrature(&p(1.5, 1.0, -2.0, 0.5 * (1.0 + 1e-3), 0.0)).unwrap();
        let harmonic = 2.0 * std::f64::consts::PI / 4.0;
        assert!(
            ((pr.period - harmonic) / harmonic).abs() < 1e-3,
            "{}",
            pr.period
        );
    }

    #[test]
    fn boundary_threshold_is_global() {
        // gamma = 2, xi^2 < -lambda, a1 exactly at the threshold
        let params = p(2.0, 1.0, -5.0, 1.0, 2.0);
        let r = classify(&params).unwrap();
        assert_eq!(r.branch, Branch::TwoBGlobal);
        assert_eq!(r.certificate.critical.blowup_threshold, Some(2.0));
    }

    #[test]
    fn gamma3_blowup_is_bracketed_and_certified() {
        let params = p(3.0, 1.0, -1.0, 2.0, -1.0);
        let r = classify(&params).unwrap();
        assert_eq!(r.branch, Branch::ThreeBIBlowup);
        let RegimeKind::FiniteTimeBlowup { t_lo, t_hi, .. } = r.kind else {
            panic!()
        };
        assert!(t_lo > 0.0 && t_hi >= t_lo && t_hi.is_finite());
        certify(&params, &r, 10.0).unwrap();
    }

    #[test]
    fn certification_reports_mismatch() {
        let params = p(2.0, 1.0, -2.0, 1.0, 0.0);
        let wrong = Regime {
            kind: RegimeKind::Global,
            branch: Branch::TwoBGlobal,
            certificate: classify(&params).unwrap().certificate,
        };
        assert!(matches!(
            certify(&params, &wrong, 5.0),
            Err(Error::CertificationMismatch { .. })
        ));
    }

    #[test]
    fn json_record_has_branch_label() {
        let r = classify(&p(2.0, 1.0, -2.0, 1.0, 0.0)).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["branch"], "2b-blowup");
        assert_eq!(json["kind"], "FiniteTimeBlowup");
        assert_eq!(json["certificate"]["energy"]["E"], -0.5);
    }
}
