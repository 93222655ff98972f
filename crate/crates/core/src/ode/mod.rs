//! Explicit adaptive Runge-Kutta integration (DOP853) with dense output and
//! terminal-event localization.
//!
//! The solver is generic over a fixed state dimension `N`. Every accepted step
//! stores its continuous extension, so the solution can be evaluated at any
//! time inside the covered span without re-integration.

mod tableau;

use tableau::*;

/// Right-hand side of `y' = f(t, y)` plus optional hooks used by the driver.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];

    /// Largest admissible step when leaving `y`.
    fn step_limit(&self, _y: &[f64; N]) -> f64 {
        f64::INFINITY
    }

    /// Integration stops where this quantity falls to zero or below.
    fn terminal(&self, _y: &[f64; N]) -> f64 {
        1.0
    }

    /// Estimated time left before the solution runs into a singularity, if it
    /// is heading into one. Used to classify a step-size underflow.
    fn time_to_singularity(&self, _y: &[f64; N]) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Relative accuracy of the terminal-event bisection.
    pub event_rtol: f64,
    /// A step underflow counts as reaching the singularity when the estimated
    /// remaining time is below `singular_window * max(1, |t|)`.
    pub singular_window: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
            event_rtol: 1e-10,
            singular_window: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ReachedEnd,
    /// The terminal function crossed zero at `t` (bisection bracket half-width
    /// `error_bar`; `last_step` is the size of the step that crossed).
    Event {
        t: f64,
        error_bar: f64,
        last_step: f64,
    },
    /// Step size underflowed while the state was running into a singularity.
    Singular {
        t: f64,
        error_bar: f64,
    },
    StepFailure {
        t: f64,
        reason: String,
    },
}

/// One accepted step's continuous extension.
#[derive(Debug, Clone)]
pub struct DenseSegment<const N: usize> {
    t0: f64,
    h: f64,
    cont: [[f64; N]; 8],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.cont;
        let mut out = [0.0; N];
        for i in 0..N {
            let conpar = c[4][i] + (c[5][i] + (c[6][i] + c[7][i] * s) * s1) * s;
            out[i] = c[0][i] + (c[1][i] + (c[2][i] + (c[3][i] + conpar * s1) * s) * s1) * s;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    segments: Vec<DenseSegment<N>>,
    pub termination: Termination,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl<const N: usize> OdeSolution<N> {
    pub fn t_first(&self) -> f64 {
        self.times[0]
    }

    pub fn t_last(&self) -> f64 {
        *self.times.last().expect("solution has at least one node")
    }

    pub fn last_state(&self) -> [f64; N] {
        *self.states.last().expect("solution has at least one node")
    }

    pub fn segments(&self) -> &[DenseSegment<N>] {
        &self.segments
    }

    /// Dense evaluation; node times reproduce the stored node exactly.
    /// Returns `None` outside the covered span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        let (lo, hi) = (self.t_first(), self.t_last());
        if !(t >= lo && t <= hi) {
            return None;
        }
        // index of the last node with time <= t
        let idx = self.times.partition_point(|&ti| ti <= t) - 1;
        if self.times[idx] == t {
            return Some(self.states[idx]);
        }
        Some(self.segments[idx].eval(t))
    }
}

#[inline]
/// Sum in ascending order, so the result does not depend on component order.
fn sum_sorted<const N: usize>(mut v: [f64; N]) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn initial_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    opts: &SolverOptions,
    h_cap: f64,
) -> f64 {
    let mut dnf = [0.0; N];
    let mut dny = [0.0; N];
    for i in 0..N {
        let sk = opts.atol + opts.rtol * y0[i].abs();
        dnf[i] = (f0[i] / sk).powi(2);
        dny[i] = (y0[i] / sk).powi(2);
    }
    let (dnf, dny) = (sum_sorted(dnf), sum_sorted(dny));
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_cap);
    let y1 = combo(y0, h, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + h, &y1);
    let mut der2 = [0.0; N];
    for i in 0..N {
        let sk = opts.atol + opts.rtol * y0[i].abs();
        der2[i] = ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = sum_sorted(der2).sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 || !der12.is_finite() {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / 8.0)
    };
    (100.0 * h).min(h1).min(h_cap)
}

/// Integrate `sys` from `(t0, y0)` to `t_end` (> t0).
pub fn solve<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &SolverOptions,
) -> OdeSolution<N> {
    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const FACC1: f64 = 1.0 / 0.333;
    const FACC2: f64 = 1.0 / 6.0;
    let expo1 = 1.0 / 8.0 - BETA * 0.2;

    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y0],
        segments: Vec::new(),
        termination: Termination::ReachedEnd,
        accepted: 0,
        rejected: 0,
        evaluations: 0,
    };
    if t_end <= t0 {
        return sol;
    }
    if sys.terminal(&y0) <= 0.0 {
        sol.termination = Termination::Event {
            t: t0,
            error_bar: 0.0,
            last_step: 0.0,
        };
        return sol;
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y);
    sol.evaluations += 1;
    let span = t_end - t0;
    let h_cap = opts.h_max.min(span);
    let mut h = initial_step(sys, t, &y, &k1, opts, h_cap.min(sys.step_limit(&y)));
    sol.evaluations += 1;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        if t >= t_end {
            break;
        }
        if steps >= opts.max_steps {
            sol.termination = Termination::StepFailure {
                t,
                reason: format!("maximum number of steps ({}) reached", opts.max_steps),
            };
            break;
        }
        steps += 1;

        h = h.min(h_cap).min(sys.step_limit(&y));
        let remaining = t_end - t;
        let mut hits_end = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            hits_end = true;
        }
        if !(h > 16.0 * f64::EPSILON * t.abs().max(1e-300)) || !h.is_finite() {
            sol.termination = match sys.time_to_singularity(&y) {
                Some(rem) if rem <= opts.singular_window * t.abs().max(1.0) => {
                    Termination::Singular {
                        t,
                        error_bar: rem.max(h.abs()),
                    }
                }
                _ => Termination::StepFailure {
                    t,
                    reason: format!("step size underflow (h = {h:e})"),
                },
            };
            break;
        }

        let k2 = sys.rhs(t + C2 * h, &combo(&y, h, &[(A21, &k1)]));
        let k3 = sys.rhs(t + C3 * h, &combo(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = sys.rhs(t + C4 * h, &combo(&y, h, &[(A41, &k1), (A43, &k3)]));
        let k5 = sys.rhs(
            t + C5 * h,
            &combo(&y, h, &[(A51, &k1), (A53, &k3), (A54, &k4)]),
        );
        let k6 = sys.rhs(
            t + C6 * h,
            &combo(&y, h, &[(A61, &k1), (A64, &k4), (A65, &k5)]),
        );
        let k7 = sys.rhs(
            t + C7 * h,
            &combo(&y, h, &[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)]),
        );
        let k8 = sys.rhs(
            t + C8 * h,
            &combo(
                &y,
                h,
                &[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)],
            ),
        );
        let k9 = sys.rhs(
            t + C9 * h,
            &combo(
                &y,
                h,
                &[
                    (A91, &k1),
                    (A94, &k4),
                    (A95, &k5),
                    (A96, &k6),
                    (A97, &k7),
                    (A98, &k8),
                ],
            ),
        );
        let k10 = sys.rhs(
            t + C10 * h,
            &combo(
                &y,
                h,
                &[
                    (A101, &k1),
                    (A104, &k4),
                    (A105, &k5),
                    (A106, &k6),
                    (A107, &k7),
                    (A108, &k8),
                    (A109, &k9),
                ],
            ),
        );
        let k11 = sys.rhs(
            t + C11 * h,
            &combo(
                &y,
                h,
                &[
                    (A111, &k1),
                    (A114, &k4),
                    (A115, &k5),
                    (A116, &k6),
                    (A117, &k7),
                    (A118, &k8),
                    (A119, &k9),
                    (A1110, &k10),
                ],
            ),
        );
        let t_new = if hits_end { t_end } else { t + h };
        let y12 = combo(
            &y,
            h,
            &[
                (A121, &k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
        );
        let k12 = sys.rhs(t_new, &y12);
        sol.evaluations += 11;

        let mut incr = [0.0; N];
        let mut y_new = y;
        let mut err = [0.0; N];
        let mut err2 = [0.0; N];
        for i in 0..N {
            incr[i] = B1 * k1[i]
                + B6 * k6[i]
                + B7 * k7[i]
                + B8 * k8[i]
                + B9 * k9[i]
                + B10 * k10[i]
                + B11 * k11[i]
                + B12 * k12[i];
            y_new[i] = y[i] + h * incr[i];
            let sk = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let e2 = incr[i] - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
            err2[i] = (e2 / sk).powi(2);
            let e = ER1 * k1[i]
                + ER6 * k6[i]
                + ER7 * k7[i]
                + ER8 * k8[i]
                + ER9 * k9[i]
                + ER10 * k10[i]
                + ER11 * k11[i]
                + ER12 * k12[i];
            err[i] = (e / sk).powi(2);
        }
        let (err, err2) = (sum_sorted(err), sum_sorted(err2));
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h * err * (1.0 / (deno * N as f64)).sqrt();

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            sol.rejected += 1;
            last_rejected = true;
            h *= 0.25;
            continue;
        }

        let fac11 = err.powf(expo1);
        let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
        let mut h_new = h / fac;

        if err <= 1.0 {
            facold = err.max(1e-4);
            let k13 = sys.rhs(t_new, &y_new);
            sol.evaluations += 1;
            if k13.iter().any(|v| !v.is_finite()) {
                sol.rejected += 1;
                last_rejected = true;
                h *= 0.25;
                continue;
            }
            sol.accepted += 1;

            let mut cont = [[0.0; N]; 8];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k13[i] - bspl;
                cont[4][i] = D41 * k1[i]
                    + D46 * k6[i]
                    + D47 * k7[i]
                    + D48 * k8[i]
                    + D49 * k9[i]
                    + D410 * k10[i]
                    + D411 * k11[i]
                    + D412 * k12[i];
                cont[5][i] = D51 * k1[i]
                    + D56 * k6[i]
                    + D57 * k7[i]
                    + D58 * k8[i]
                    + D59 * k9[i]
                    + D510 * k10[i]
                    + D511 * k11[i]
                    + D512 * k12[i];
                cont[6][i] = D61 * k1[i]
                    + D66 * k6[i]
                    + D67 * k7[i]
                    + D68 * k8[i]
                    + D69 * k9[i]
                    + D610 * k10[i]
                    + D611 * k11[i]
                    + D612 * k12[i];
                cont[7][i] = D71 * k1[i]
                    + D76 * k6[i]
                    + D77 * k7[i]
                    + D78 * k8[i]
                    + D79 * k9[i]
                    + D710 * k10[i]
                    + D711 * k11[i]
                    + D712 * k12[i];
            }
            let k14 = sys.rhs(
                t + C14 * h,
                &combo(
                    &y,
                    h,
                    &[
                        (A141, &k1),
                        (A147, &k7),
                        (A148, &k8),
                        (A149, &k9),
                        (A1410, &k10),
                        (A1411, &k11),
                        (A1412, &k12),
                        (A1413, &k13),
                    ],
                ),
            );
            let k15 = sys.rhs(
                t + C15 * h,
                &combo(
                    &y,
                    h,
                    &[
                        (A151, &k1),
                        (A156, &k6),
                        (A157, &k7),
                        (A158, &k8),
                        (A1511, &k11),
                        (A1512, &k12),
                        (A1513, &k13),
                        (A1514, &k14),
                    ],
                ),
            );
            let k16 = sys.rhs(
                t + C16 * h,
                &combo(
                    &y,
                    h,
                    &[
                        (A161, &k1),
                        (A166, &k6),
                        (A167, &k7),
                        (A168, &k8),
                        (A169, &k9),
                        (A1613, &k13),
                        (A1614, &k14),
                        (A1615, &k15),
                    ],
                ),
            );
            sol.evaluations += 3;
            for i in 0..N {
                cont[4][i] = h
                    * (cont[4][i] + D413 * k13[i] + D414 * k14[i] + D415 * k15[i] + D416 * k16[i]);
                cont[5][i] = h
                    * (cont[5][i] + D513 * k13[i] + D514 * k14[i] + D515 * k15[i] + D516 * k16[i]);
                cont[6][i] = h
                    * (cont[6][i] + D613 * k13[i] + D614 * k14[i] + D615 * k15[i] + D616 * k16[i]);
                cont[7][i] = h
                    * (cont[7][i] + D713 * k13[i] + D714 * k14[i] + D715 * k15[i] + D716 * k16[i]);
            }
            let seg = DenseSegment { t0: t, h, cont };

            if sys.terminal(&y_new) <= 0.0 {
                // bisection on the continuous extension
                let (mut lo, mut hi) = (t, t_new);
                let tol = opts.event_rtol * t_new.abs().max(1e-300);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if sys.terminal(&seg.eval(mid)) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_event = 0.5 * (lo + hi);
                let y_event = seg.eval(t_event);
                sol.segments.push(seg);
                sol.times.push(t_event);
                sol.states.push(y_event);
                sol.termination = Termination::Event {
                    t: t_event,
                    error_bar: 0.5 * (hi - lo),
                    last_step: h,
                };
                return sol;
            }

            sol.segments.push(seg);
            sol.times.push(t_new);
            sol.states.push(y_new);
            t = t_new;
            y = y_new;
            k1 = k13;
            if last_rejected {
                h_new = h_new.min(h);
                last_rejected = false;
            }
            h = h_new;
        } else {
            sol.rejected += 1;
            last_rejected = true;
            h /= FACC1.min(fac11 / SAFE);
        }
    }
    sol
}
