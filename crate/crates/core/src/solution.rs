//! Exact vortical self-similar flows of the 2D isentropic Euler equations.
//!
//! A family member is fixed by [`SolutionParams`]; at any instant the flow is
//! determined by the similarity scale `a(t)` and its rate, carried in a
//! [`ScaleState`]:
//!
//! ```text
//! rho = max((-lambda (gamma-1) / (2 K gamma) s + alpha)^(1/(gamma-1)), 0) / a^2,  s = (x^2+y^2)/a^2
//! u   = (adot/a) (x, y) + (xi/a^2) (-y, x)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParamViolation, Result};

/// Unvalidated parameter record, as read from flags or config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub gamma: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub xi: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub a0: f64,
    pub a1: f64,
}

/// One validated member of the exact family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SolutionParams {
    gamma: f64,
    k: f64,
    xi: f64,
    lambda: f64,
    alpha: f64,
    a0: f64,
    a1: f64,
}

impl TryFrom<RawParams> for SolutionParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        validate_params(raw)
    }
}

impl From<SolutionParams> for RawParams {
    fn from(p: SolutionParams) -> Self {
        p.raw()
    }
}

/// Check every constraint and report all violations at once.
pub fn validate_params(raw: RawParams) -> Result<SolutionParams> {
    let RawParams {
        gamma,
        k,
        xi,
        lambda,
        alpha,
        a0,
        a1,
    } = raw;
    let mut bad = Vec::new();
    if [gamma, k, xi, lambda, alpha, a0, a1]
        .iter()
        .any(|v| !v.is_finite())
    {
        bad.push(ParamViolation::NonFinite);
    }
    if !(gamma > 1.0) {
        bad.push(ParamViolation::NonPositiveGammaMargin);
    }
    if !(k > 0.0) {
        bad.push(ParamViolation::NonPositiveK);
    }
    if !(a0 > 0.0) {
        bad.push(ParamViolation::NonPositiveA0);
    }
    if !(alpha >= 0.0) {
        bad.push(ParamViolation::NegativeAlpha);
    }
    if bad.is_empty() {
        Ok(SolutionParams {
            gamma,
            k,
            xi,
            lambda,
            alpha,
            a0,
            a1,
        })
    } else {
        Err(Error::InvalidParams(bad))
    }
}

impl SolutionParams {
    pub fn new(
        gamma: f64,
        k: f64,
        xi: f64,
        lambda: f64,
        alpha: f64,
        a0: f64,
        a1: f64,
    ) -> Result<Self> {
        validate_params(RawParams {
            gamma,
            k,
            xi,
            lambda,
            alpha,
            a0,
            a1,
        })
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            gamma: self.gamma,
            k: self.k,
            xi: self.xi,
            lambda: self.lambda,
            alpha: self.alpha,
            a0: self.a0,
            a1: self.a1,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn a0(&self) -> f64 {
        self.a0
    }
    pub fn a1(&self) -> f64 {
        self.a1
    }

    /// Same member with different initial data for the scale equation.
    pub fn with_initial(&self, a0: f64, a1: f64) -> Result<Self> {
        validate_params(RawParams {
            a0,
            a1,
            ..self.raw()
        })
    }

    /// Slope of the profile base: `base(s) = alpha - slope * s`.
    pub fn profile_slope(&self) -> f64 {
        self.lambda * (self.gamma - 1.0) / (2.0 * self.k * self.gamma)
    }

    /// Similarity coordinate where the profile base reaches zero, if finite.
    pub fn support_s(&self) -> Option<f64> {
        let slope = self.profile_slope();
        (slope > 0.0).then(|| self.alpha / slope)
    }
}

/// Similarity scale and its rate at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleState {
    pub t: f64,
    pub a: f64,
    pub adot: f64,
}

impl ScaleState {
    pub fn new(t: f64, a: f64, adot: f64) -> Self {
        Self { t, a, adot }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        if self.a > 0.0 && self.a.is_finite() {
            Ok(())
        } else {
            Err(Error::CollapsedState { a: self.a })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryPoint {
    pub x: f64,
    pub y: f64,
}

impl QueryPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn s(&self, state: &ScaleState) -> f64 {
        (self.x * self.x + self.y * self.y) / (state.a * state.a)
    }
}

/// Density, velocity and pressure at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub rho: f64,
    pub u1: f64,
    pub u2: f64,
    pub p: f64,
}

impl FlowSample {
    pub fn speed(&self) -> f64 {
        self.u1.hypot(self.u2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileEval {
    pub s: f64,
    pub f: f64,
}

/// Exact density profile in the similarity coordinate. The base is clamped at
/// zero before the fractional power is taken.
pub fn profile_f(s: f64, params: &SolutionParams) -> ProfileEval {
    let base = (params.alpha - params.profile_slope() * s).max(0.0);
    let f = if base == 0.0 {
        0.0
    } else {
        base.powf(1.0 / (params.gamma - 1.0))
    };
    ProfileEval { s, f }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SupportRadius {
    Finite(f64),
    Infinite,
}

impl SupportRadius {
    pub fn finite(self) -> Option<f64> {
        match self {
            SupportRadius::Finite(r) => Some(r),
            SupportRadius::Infinite => None,
        }
    }
}

/// Radius beyond which the density vanishes at the given instant.
pub fn support_radius(params: &SolutionParams, state: &ScaleState) -> SupportRadius {
    match params.support_s() {
        Some(s_star) => SupportRadius::Finite(state.a * s_star.sqrt()),
        None if params.alpha > 0.0 => SupportRadius::Infinite,
        // alpha == 0 with a non-increasing base: vacuum everywhere
        None if params.profile_slope() == 0.0 => SupportRadius::Finite(0.0),
        None => SupportRadius::Infinite,
    }
}

pub fn eval_flow(
    params: &SolutionParams,
    state: &ScaleState,
    q: &QueryPoint,
) -> Result<FlowSample> {
    state.ensure_valid()?;
    let a = state.a;
    let a2 = a * a;
    let f = profile_f(q.s(state), params).f;
    let rho = f / a2;
    let radial = state.adot / a;
    let swirl = params.xi / a2;
    Ok(FlowSample {
        rho,
        u1: radial * q.x - swirl * q.y,
        u2: swirl * q.x + radial * q.y,
        p: params.k * rho.powf(params.gamma),
    })
}

/// The printed Zhang-Zheng field for `gamma = 2`:
/// `rho = r^2/(8 K t^2)`, `u1 = (x+y)/(2t)`, `u2 = (x-y)/(2t)`.
///
/// Evaluated exactly as printed. This literal form does not satisfy the mass
/// equation; [`zhang_zheng_field_reflected`] is the variant that does.
pub fn zhang_zheng_field(t: f64, q: &QueryPoint, k: f64) -> Result<FlowSample> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime { t });
    }
    let r2 = q.x * q.x + q.y * q.y;
    let rho = r2 / (8.0 * k * t * t);
    Ok(FlowSample {
        rho,
        u1: (q.x + q.y) / (2.0 * t),
        u2: (q.x - q.y) / (2.0 * t),
        p: k * rho * rho,
    })
}

/// The Zhang-Zheng formulas with `y -> -y` substituted:
/// `u1 = (x-y)/(2t)`, `u2 = (x+y)/(2t)`. This is an exact solution.
pub fn zhang_zheng_field_reflected(t: f64, q: &QueryPoint, k: f64) -> Result<FlowSample> {
    zhang_zheng_field(t, &QueryPoint::new(q.x, -q.y), k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chirality {
    /// Embedded and printed fields agree component by component.
    Same,
    /// They agree after `y -> -y`: the printed field equals the embedded one
    /// with the second velocity component negated.
    ReflectedY,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZhangZhengEmbedding {
    pub params: SolutionParams,
    /// Scale state at Zhang-Zheng time `t = 1`, where `a = sqrt(t)`.
    pub state: ScaleState,
    pub chirality: Chirality,
}

/// Zhang-Zheng as a family member: `gamma = 2`, `lambda = -1/2`, `alpha = 0`,
/// `xi = -1/2` and `a(t) = sqrt(t)`, anchored at `t = 1`.
pub fn zhang_zheng_embedding(k: f64) -> Result<ZhangZhengEmbedding> {
    let params = SolutionParams::new(2.0, k, -0.5, -0.5, 0.0, 1.0, 0.5)?;
    Ok(ZhangZhengEmbedding {
        params,
        state: ScaleState::new(1.0, 1.0, 0.5),
        chirality: Chirality::ReflectedY,
    })
}

impl ZhangZhengEmbedding {
    /// Exact scale state at Zhang-Zheng time `t > 0`.
    pub fn state_at(&self, t: f64) -> Result<ScaleState> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime { t });
        }
        let a = t.sqrt();
        Ok(ScaleState::new(t, a, 0.5 / a))
    }
}

#[cfg(test)]
// oracle literals keep all the digits they were computed with
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn generic() -> SolutionParams {
        SolutionParams::new(1.4, 1.0, 0.7, 0.9, 1.0, 1.0, 0.3).unwrap()
    }

    #[test]
    fn validation_accepts_fixture_sets() {
        assert!(SolutionParams::new(2.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0).is_ok());
        assert!(SolutionParams::new(1.4, 1.0, 0.7, 0.9, 1.0, 1.0, 0.3).is_ok());
    }

    #[test]
    fn validation_lists_every_violation() {
        let err = SolutionParams::new(1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0).unwrap_err();
        match err {
            Error::InvalidParams(v) => assert_eq!(
                v,
                vec![
                    ParamViolation::NonPositiveGammaMargin,
                    ParamViolation::NonPositiveK,
                    ParamViolation::NonPositiveA0,
                    ParamViolation::NegativeAlpha
                ]
            ),
            other => panic!("{other:?}"),
        }
        let err = SolutionParams::new(1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0).unwrap_err();
        assert!(
            matches!(err, Error::InvalidParams(ref v) if v == &[ParamViolation::NonPositiveGammaMargin])
        );
        assert!(SolutionParams::new(f64::NAN, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn serde_roundtrip_validates() {
        let p = generic();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"K\":1.0"));
        let back: SolutionParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        let bad = json.replace("\"gamma\":1.4", "\"gamma\":0.5");
        assert!(serde_json::from_str::<SolutionParams>(&bad).is_err());
    }

    #[test]
    fn profile_at_origin_is_alpha_power() {
        let p = SolutionParams::new(1.4, 1.0, 0.7, 0.9, 2.0, 1.0, 0.0).unwrap();
        assert!((profile_f(0.0, &p).f / 2f64.powf(2.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn profile_zhang_zheng_value() {
        let p = SolutionParams::new(2.0, 1.0, -0.5, -0.5, 0.0, 1.0, 0.5).unwrap();
        assert!((profile_f(8.0, &p).f - 1.0).abs() < 1e-15);
    }

    #[test]
    fn profile_vanishes_at_support_boundary() {
        let p = generic();
        let s_star = 2.0 * 1.0 * 1.4 * 1.0 / (0.9 * 0.4);
        assert!((p.support_s().unwrap() - s_star).abs() < 1e-14);
        assert_eq!(profile_f(s_star * (1.0 + 1e-12), &p).f, 0.0);
        // the linear base changes sign across s_star
        let base = |s: f64| 1.0 - p.profile_slope() * s;
        let (mut lo, mut hi) = (0.0, 20.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if base(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((lo - s_star).abs() < 1e-12);
        // continuity across the boundary
        let left = profile_f(s_star * (1.0 - 1e-9), &p).f;
        assert!(left < 1e-10, "{left}");
    }

    #[test]
    fn support_radius_cases() {
        let p = generic();
        let r = support_radius(&p, &ScaleState::new(0.0, 1.0, 0.0))
            .finite()
            .unwrap();
        // sqrt(2 * 1.4 / 0.36), reference value from 40-digit arithmetic
        assert!((r - 2.788866755113585159927).abs() < 1e-14);
        assert_eq!(profile_f(r * r, &p).f, 0.0);

        let neg = SolutionParams::new(1.4, 1.0, 0.7, -2.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(
            support_radius(&neg, &ScaleState::new(0.0, 1.0, 0.0)),
            SupportRadius::Infinite
        );

        let vac = SolutionParams::new(1.4, 1.0, 0.7, 0.9, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(
            support_radius(&vac, &ScaleState::new(0.0, 1.0, 0.0)),
            SupportRadius::Finite(0.0)
        );
    }

    #[test]
    fn flow_at_origin() {
        let p = generic();
        let st = ScaleState::new(0.2, 1.3, 0.4);
        let f = eval_flow(&p, &st, &QueryPoint::new(0.0, 0.0)).unwrap();
        assert_eq!((f.u1, f.u2), (0.0, 0.0));
        assert!((f.rho - 1.0 / (1.3 * 1.3)).abs() < 1e-15);
    }

    #[test]
    fn flow_matches_extended_precision_reference() {
        // Reference from an independent 40-digit evaluation of the closed forms.
        let p = generic();
        let st = ScaleState::new(0.5, 1.2, 0.35);
        let f = eval_flow(&p, &st, &QueryPoint::new(0.3, -0.4)).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(f.rho, 0.6563383020100058786957574) < 1e-14);
        assert!(rel(f.u1, 0.2819444444444444444444444) < 1e-14);
        assert!(rel(f.u2, 0.02916666666666666666666667) < 1e-14);
        assert!(rel(f.p, 0.5545987020392492495489747) < 1e-14);
    }

    #[test]
    fn collapsed_state_rejected() {
        let p = generic();
        let err = eval_flow(
            &p,
            &ScaleState::new(0.0, 0.0, 0.0),
            &QueryPoint::new(1.0, 0.0),
        );
        assert!(matches!(err, Err(Error::CollapsedState { .. })));
    }

    #[test]
    fn zhang_zheng_literal_values() {
        let f = zhang_zheng_field(1.0, &QueryPoint::new(2.0, 0.0), 1.0).unwrap();
        assert_eq!((f.rho, f.u1, f.u2), (0.5, 1.0, 1.0));
        let f = zhang_zheng_field(1.0, &QueryPoint::new(0.0, 0.0), 1.0).unwrap();
        assert_eq!((f.rho, f.u1, f.u2), (0.0, 0.0, 0.0));
        let f = zhang_zheng_field(2.0, &QueryPoint::new(0.0, 2.0), 1.0).unwrap();
        assert_eq!((f.rho, f.u1, f.u2), (0.125, 0.5, -0.5));
        assert!(matches!(
            zhang_zheng_field(0.0, &QueryPoint::new(1.0, 0.0), 1.0),
            Err(Error::NonPositiveTime { .. })
        ));
    }

    #[test]
    fn embedding_density_and_chirality() {
        let emb = zhang_zheng_embedding(1.0).unwrap();
        let q = QueryPoint::new(2.0, 0.0);
        let f = eval_flow(&emb.params, &emb.state, &q).unwrap();
        assert!((f.rho - 0.5).abs() < 1e-15);
        assert_eq!(emb.chirality, Chirality::ReflectedY);
        let q = QueryPoint::new(0.7, -1.1);
        let e = eval_flow(&emb.params, &emb.state, &q).unwrap();
        let z = zhang_zheng_field(1.0, &q, 1.0).unwrap();
        assert!((e.u1 - z.u1).abs() < 1e-15);
        assert!((e.u2 + z.u2).abs() < 1e-15);
        assert!((e.speed() - z.speed()).abs() < 1e-15);
    }

    #[test]
    fn embedding_scale_law() {
        let emb = zhang_zheng_embedding(1.0).unwrap();
        for d in [0.5, 1.0] {
            let st = emb.state_at(1.0 + d).unwrap();
            assert!((st.a * st.a - (1.0 + d)).abs() < 1e-14);
        }
    }

    #[test]
    fn velocity_decomposition() {
        let p = generic();
        let st = ScaleState::new(0.3, 1.1, -0.2);
        let q = QueryPoint::new(0.9, 0.4);
        let f = eval_flow(&p, &st, &q).unwrap();
        let r = q.r();
        let radial = (f.u1 * q.x + f.u2 * q.y) / r;
        let tangential = (-f.u1 * q.y + f.u2 * q.x) / r;
        assert!((radial - st.adot / st.a * r).abs() < 1e-13);
        assert!((tangential - p.xi() / (st.a * st.a) * r).abs() < 1e-13);
    }
}
