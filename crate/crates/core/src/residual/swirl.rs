use rand::Rng;

use super::{residual_report, EquationStats, FlowField, GridSpec, Sample};
use crate::error::{Error, Result};

/// Monomials `t^i r^j` with `i + j <= 4`.
pub const POLY_TERMS: usize = 15;

type Scalar2 = dyn Fn(f64, f64) -> f64 + Send + Sync;
type Scalar1 = dyn Fn(f64) -> f64 + Send + Sync;
type Scale = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// Radial density with an arbitrary swirl:
///
/// ```text
/// rho = f(r/a) / a^2,   u = (adot/a) (x, y) + (G(t, r)/r) (-y, x)
/// ```
///
/// The radial factor is fixed to `adot r / a`. Mass balance holds for every
/// `G`, because the swirl is tangent to the level sets of `rho`.
pub struct GenericRotationField {
    pub g: Box<Scalar2>,
    pub f: Box<Scalar1>,
    /// `t -> (a, adot)`
    pub a: Box<Scale>,
}

impl GenericRotationField {
    fn sample_swirl(&self, t: f64, x: &[f64; 2], with_swirl: bool) -> Result<Sample<2>> {
        let (a, adot) = (self.a)(t);
        let r = x[0].hypot(x[1]);
        if !(a > 0.0) || r == 0.0 {
            return Err(Error::InvalidGrid(format!(
                "swirl field undefined at r = {r}, a = {a}"
            )));
        }
        let swirl = if with_swirl { (self.g)(t, r) / r } else { 0.0 };
        let radial = adot / a;
        Ok(Sample {
            rho: (self.f)(r / a) / (a * a),
            u: [radial * x[0] - swirl * x[1], radial * x[1] + swirl * x[0]],
            p: 0.0,
        })
    }
}

impl FlowField<2> for GenericRotationField {
    fn sample(&self, t: f64, x: &[f64; 2]) -> Result<Sample<2>> {
        self.sample_swirl(t, x, true)
    }
}

/// The same density and radial velocity with `G = 0`.
struct SwirlFree<'a>(&'a GenericRotationField);

impl FlowField<2> for SwirlFree<'_> {
    fn sample(&self, t: f64, x: &[f64; 2]) -> Result<Sample<2>> {
        self.0.sample_swirl(t, x, false)
    }
}

impl GenericRotationField {
    /// Gaussian profile `f(z) = exp(-z^2)` on `a(t) = 1 + t` with swirl `g`.
    pub fn gaussian(g: Box<Scalar2>) -> Self {
        GenericRotationField {
            g,
            f: Box::new(|z| (-z * z).exp()),
            a: Box::new(|t| (1.0 + t, 1.0)),
        }
    }
}

/// `G(t, r) = sum c_k t^i r^j` over the monomials with `i + j <= 4`, in
/// graded order `1, t, r, t^2, t r, r^2, ...`.
pub fn polynomial_g(coeffs: [f64; POLY_TERMS]) -> Box<Scalar2> {
    Box::new(move |t, r| {
        let mut k = 0;
        let mut sum = 0.0;
        for deg in 0..=4 {
            for j in 0..=deg {
                sum += coeffs[k] * t.powi(deg - j) * r.powi(j);
                k += 1;
            }
        }
        sum
    })
}

/// Coefficients uniform in `[-1, 1]`.
pub fn random_poly_coeffs<R: Rng>(rng: &mut R) -> [f64; POLY_TERMS] {
    std::array::from_fn(|_| rng.gen_range(-1.0..=1.0))
}

/// Mass-equation statistics for a swirl field on the grid.
///
/// Normalized by the term scale of the swirl-free field (`G = 0`), so that
/// results for different `G` share one yardstick; the swirl flux terms would
/// otherwise inflate the scale by a `G`-dependent factor.
pub fn mass_residual_generic_g(
    field: &GenericRotationField,
    t: f64,
    grid: &GridSpec,
) -> Result<EquationStats> {
    grid.validate()?;
    if grid.r_min() <= grid.steps().space_reach() {
        return Err(Error::InvalidGrid(
            "swirl field needs samples away from the origin".into(),
        ));
    }
    let points = grid.points();
    let mass = |r: super::ResidualReport| {
        r.equations
            .into_iter()
            .next()
            .expect("mass equation is always reported")
    };
    let stats = mass(residual_report(field, t, &points, &grid.steps())?);
    let scale = mass(residual_report(
        &SwirlFree(field),
        t,
        &points,
        &grid.steps(),
    )?)
    .scale;
    let norm = |v: f64| if scale > 0.0 { v / scale } else { v };
    Ok(EquationStats {
        scale,
        max_normalized: norm(stats.max_abs),
        mean_normalized: norm(stats.mean_abs),
        ..stats
    })
}
