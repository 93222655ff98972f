//! The scale equation `a'' = xi^2/a^3 + lambda/a^(2 gamma - 1)`.
//!
//! Integration uses the DOP853 driver in [`crate::ode`] with energy
//! bookkeeping per node, collapse detection and dense output. For
//! `gamma = 2` the equation has the closed form
//! `a^2 = a0^2 + 2 a0 a1 t + 2 E t^2` which serves as an oracle.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, OdeSolution, OdeSystem, SolverOptions, Termination};
use crate::solution::{ScaleState, SolutionParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "F_kin")]
    pub f_kin: f64,
    #[serde(rename = "F_pot")]
    pub f_pot: f64,
}

pub fn emden_rhs(state: &ScaleState, params: &SolutionParams) -> Result<(f64, f64)> {
    state.ensure_valid()?;
    Ok((state.adot, accel(state.a, params)))
}

#[inline]
fn accel(a: f64, params: &SolutionParams) -> f64 {
    // common factor 1/a^3: exact cancellation when gamma = 2 and xi^2 = -lambda
    let xi2 = params.xi() * params.xi();
    (xi2 + params.lambda() * a.powf(4.0 - 2.0 * params.gamma())) / (a * a * a)
}

/// Effective potential `xi^2/(2a^2) + lambda/((2gamma-2) a^(2gamma-2))`.
pub fn potential(a: f64, params: &SolutionParams) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::CollapsedState { a });
    }
    Ok(potential_unchecked(a, params))
}

#[inline]
pub(crate) fn potential_unchecked(a: f64, params: &SolutionParams) -> f64 {
    let g = params.gamma();
    let xi2 = params.xi() * params.xi();
    xi2 / (2.0 * a * a) + params.lambda() / ((2.0 * g - 2.0) * a.powf(2.0 * g - 2.0))
}

pub fn energy(state: &ScaleState, params: &SolutionParams) -> Result<EnergySplit> {
    state.ensure_valid()?;
    let f_kin = 0.5 * state.adot * state.adot;
    let f_pot = potential_unchecked(state.a, params);
    Ok(EnergySplit {
        e: f_kin + f_pot,
        f_kin,
        f_pot,
    })
}

/// Energy at the initial data `(a0, a1)`.
pub fn initial_energy(params: &SolutionParams) -> EnergySplit {
    energy(&ScaleState::new(0.0, params.a0(), params.a1()), params).expect("a0 > 0 by validation")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Unbounded when absent (`null` in JSON).
    #[serde(with = "unbounded", default = "unbounded::infinity")]
    pub max_step: f64,
    pub collapse_epsilon: f64,
    pub t_end: f64,
    /// Time at which `(a0, a1)` are prescribed.
    #[serde(default)]
    pub t0: f64,
}

mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn infinity() -> f64 {
        f64::INFINITY
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
            collapse_epsilon: 1e-8,
            t_end: 1.0,
            t0: 0.0,
        }
    }
}

impl IntegrationConfig {
    pub fn until(t_end: f64) -> Self {
        Self {
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !(self.collapse_epsilon > 0.0) {
            return Err(Error::InvalidConfig(
                "collapse_epsilon must be positive".into(),
            ));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidConfig("max_step must be positive".into()));
        }
        if !(self.t_end > self.t0) {
            return Err(Error::InvalidConfig(format!(
                "t_end ({}) must exceed t0 ({})",
                self.t_end, self.t0
            )));
        }
        Ok(())
    }

    pub(crate) fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            rtol: self.rel_tol,
            atol: self.abs_tol,
            h_max: self.max_step,
            event_rtol: self.rel_tol,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TerminalEvent {
    ReachedEnd,
    /// `a` fell to the collapse threshold (or the step size underflowed while
    /// `a` was running into zero). The blowup time lies in
    /// `[t_star, t_star + error_bar]`, up to the localization tolerance.
    Collapsed {
        t_star: f64,
        error_bar: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryNode {
    pub state: ScaleState,
    pub energy: EnergySplit,
    /// `|E - E(t0)| / max(1, |E(t0)|)`
    pub drift: f64,
}

struct EmdenSystem<'a> {
    params: &'a SolutionParams,
    collapse_epsilon: f64,
}

impl OdeSystem<2> for EmdenSystem<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
        if !(y[0] > 0.0) {
            return [f64::NAN; 2];
        }
        [y[1], accel(y[0], self.params)]
    }

    fn step_limit(&self, y: &[f64; 2]) -> f64 {
        if y[1] < 0.0 {
            0.1 * y[0] / -y[1]
        } else {
            f64::INFINITY
        }
    }

    fn terminal(&self, y: &[f64; 2]) -> f64 {
        y[0] - self.collapse_epsilon
    }

    fn time_to_singularity(&self, y: &[f64; 2]) -> Option<f64> {
        (y[1] < 0.0).then(|| y[0] / -y[1])
    }
}

/// An integrated scale curve. Immutable once built.
#[derive(Debug, Clone)]
pub struct Trajectory {
    params: SolutionParams,
    solution: OdeSolution<2>,
    nodes: Vec<TrajectoryNode>,
    event: TerminalEvent,
}

impl Trajectory {
    pub fn params(&self) -> &SolutionParams {
        &self.params
    }

    pub fn nodes(&self) -> &[TrajectoryNode] {
        &self.nodes
    }

    pub fn event(&self) -> TerminalEvent {
        self.event
    }

    pub fn t_start(&self) -> f64 {
        self.solution.t_first()
    }

    pub fn t_end(&self) -> f64 {
        self.solution.t_last()
    }

    pub fn last(&self) -> &TrajectoryNode {
        self.nodes.last().expect("non-empty trajectory")
    }

    pub fn steps(&self) -> (usize, usize) {
        (self.solution.accepted, self.solution.rejected)
    }

    /// Dense evaluation of `(a, adot)`; `None` outside the covered span.
    pub fn state_at(&self, t: f64) -> Option<ScaleState> {
        self.solution
            .eval(t)
            .map(|y| ScaleState::new(t, y[0], y[1]))
    }

    pub fn require_span(&self, lo: f64, hi: f64) -> Result<()> {
        if lo >= self.t_start() && hi <= self.t_end() {
            Ok(())
        } else {
            Err(Error::TrajectoryTooShort {
                t_lo: self.t_start(),
                t_hi: self.t_end(),
                need_lo: lo,
                need_hi: hi,
            })
        }
    }

    /// `n + 1` equally spaced dense samples over the covered span.
    pub fn sample_uniform(&self, n: usize) -> Vec<TrajectoryNode> {
        let (lo, hi) = (self.t_start(), self.t_end());
        let e0 = self.nodes[0].energy.e;
        (0..=n)
            .filter_map(|i| {
                let t = if i == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / n as f64
                };
                let st = self.state_at(t)?;
                let en = energy(&st, &self.params).ok()?;
                Some(TrajectoryNode {
                    state: st,
                    energy: en,
                    drift: (en.e - e0).abs() / e0.abs().max(1.0),
                })
            })
            .collect()
    }

    /// CSV with columns `t,a,adot,E,F_kin,F_pot`.
    pub fn write_csv<W: Write>(nodes: &[TrajectoryNode], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "a", "adot", "E", "F_kin", "F_pot"])?;
        for n in nodes {
            w.write_record(&[
                n.state.t.to_string(),
                n.state.a.to_string(),
                n.state.adot.to_string(),
                n.energy.e.to_string(),
                n.energy.f_kin.to_string(),
                n.energy.f_pot.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn integrate(params: &SolutionParams, cfg: &IntegrationConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let sys = EmdenSystem {
        params,
        collapse_epsilon: cfg.collapse_epsilon,
    };
    let solution = ode::solve(
        &sys,
        cfg.t0,
        [params.a0(), params.a1()],
        cfg.t_end,
        &cfg.solver_options(),
    );

    let event = match &solution.termination {
        Termination::ReachedEnd => TerminalEvent::ReachedEnd,
        Termination::Event { t, last_step, .. } => TerminalEvent::Collapsed {
            t_star: *t,
            error_bar: *last_step,
        },
        Termination::Singular { t, error_bar } => TerminalEvent::Collapsed {
            t_star: *t,
            error_bar: *error_bar,
        },
        Termination::StepFailure { t, reason } => {
            let y = solution.last_state();
            return Err(Error::StepFailure {
                t: *t,
                a: y[0],
                adot: y[1],
                reason: reason.clone(),
            });
        }
    };

    let e0 = initial_energy(params).e;
    let scale = e0.abs().max(1.0);
    let nodes = solution
        .times
        .iter()
        .zip(&solution.states)
        .map(|(&t, y)| {
            let state = ScaleState::new(t, y[0], y[1]);
            // a node sitting on a collapse threshold is still a > 0
            let en = energy(&state, params).unwrap_or(EnergySplit {
                e: f64::NAN,
                f_kin: f64::NAN,
                f_pot: f64::NAN,
            });
            TrajectoryNode {
                state,
                energy: en,
                drift: (en.e - e0).abs() / scale,
            }
        })
        .collect();

    Ok(Trajectory {
        params: *params,
        solution,
        nodes,
        event,
    })
}

/// Worst relative energy drift over the trajectory nodes.
pub fn energy_drift(traj: &Trajectory) -> f64 {
    traj.nodes().iter().map(|n| n.drift).fold(0.0, f64::max)
}

/// Smallest positive root of `A t^2 + B t + C` (with `C > 0`), if any.
fn first_positive_root(qa: f64, qb: f64, qc: f64) -> Option<f64> {
    if qa == 0.0 {
        return (qb < 0.0).then(|| -qc / qb);
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (qb + disc.sqrt().copysign(if qb == 0.0 { 1.0 } else { qb }));
    let mut roots = [q / qa, if q != 0.0 { qc / q } else { f64::NAN }];
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Greater));
    roots.into_iter().find(|r| r.is_finite() && *r > 0.0)
}

fn require_gamma_two(params: &SolutionParams) -> Result<()> {
    if params.gamma() == 2.0 {
        Ok(())
    } else {
        Err(Error::NotGammaTwo {
            gamma: params.gamma(),
        })
    }
}

/// Coefficients `(A, B, C)` of `a^2(t) = A t^2 + B t + C` for `gamma = 2`.
pub fn gamma2_quadratic(params: &SolutionParams) -> Result<(f64, f64, f64)> {
    require_gamma_two(params)?;
    let e0 = initial_energy(params).e;
    Ok((
        2.0 * e0,
        2.0 * params.a0() * params.a1(),
        params.a0() * params.a0(),
    ))
}

/// Time (measured from the initial data) at which the `gamma = 2` scale
/// reaches zero, or `None` if it stays positive forever.
pub fn gamma2_collapse_time(params: &SolutionParams) -> Result<Option<f64>> {
    let (qa, qb, qc) = gamma2_quadratic(params)?;
    Ok(first_positive_root(qa, qb, qc))
}

/// Exact `gamma = 2` scale state at elapsed time `t >= 0` from `(a0, a1)`.
pub fn closed_form_gamma2(params: &SolutionParams, t: f64) -> Result<ScaleState> {
    let (qa, qb, qc) = gamma2_quadratic(params)?;
    if let Some(root) = first_positive_root(qa, qb, qc) {
        if root <= t {
            return Err(Error::CollapsedAtOrBefore { root, t });
        }
    }
    let a2 = (qa * t + qb) * t + qc;
    let a = a2.sqrt();
    let adot = (params.a0() * params.a1() + qa * t) / a;
    Ok(ScaleState::new(t, a, adot))
}
