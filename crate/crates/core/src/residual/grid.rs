use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy order of a central finite-difference stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Second,
    Fourth,
}

impl Order {
    /// Stencil half-width in units of the step.
    pub fn reach(self) -> f64 {
        match self {
            Order::Second => 1.0,
            Order::Fourth => 2.0,
        }
    }
}

/// Finite-difference steps shared by every residual evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Steps {
    pub h: f64,
    pub h_t: f64,
    pub space: Order,
    pub time: Order,
}

impl Steps {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite() && self.h_t > 0.0 && self.h_t.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "steps must be positive (h = {}, h_t = {})",
                self.h, self.h_t
            )));
        }
        Ok(())
    }

    /// Spatial reach of the stencil around a sample point.
    pub fn space_reach(&self) -> f64 {
        self.space.reach() * self.h
    }

    pub fn time_reach(&self) -> f64 {
        self.time.reach() * self.h_t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Region {
    Annulus {
        r_lo: f64,
        r_hi: f64,
        n_r: usize,
        n_theta: usize,
    },
    Box {
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
        nx: usize,
        ny: usize,
    },
}

/// Default `h_t / h`. The time stencil is second order while the space
/// stencil is fourth order, so the time error dominates.
pub const TIME_STEP_RATIO: f64 = 0.25;

/// Sampling plan for 2D residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub region: Region,
    pub h: f64,
    pub h_t: f64,
    /// Sample only where `s <= support_margin * s_boundary` (finite support).
    pub support_margin: f64,
    pub space_order: Order,
    pub time_order: Order,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            region: Region::Annulus {
                r_lo: 0.1,
                r_hi: 2.0,
                n_r: 24,
                n_theta: 32,
            },
            h: 1e-3,
            h_t: 2.5e-4,
            support_margin: 0.9,
            space_order: Order::Fourth,
            time_order: Order::Second,
        }
    }
}

impl GridSpec {
    pub fn annulus(r_lo: f64, r_hi: f64) -> Self {
        GridSpec {
            region: Region::Annulus {
                r_lo,
                r_hi,
                n_r: 24,
                n_theta: 32,
            },
            ..Default::default()
        }
    }

    /// Same region with space step `h` and time step `h_t = h / 4`.
    pub fn with_h(self, h: f64) -> Self {
        GridSpec {
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

    pub fn validate(&self) -> Result<()> {
        self.steps().validate()?;
        if !(self.support_margin > 0.0 && self.support_margin <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "support margin {} outside (0, 1]",
                self.support_margin
            )));
        }
        match self.region {
            Region::Annulus {
                r_lo,
                r_hi,
                n_r,
                n_theta,
            } => {
                if !(r_lo >= 0.0 && r_hi >= r_lo && n_r >= 1 && n_theta >= 1) {
                    return Err(Error::InvalidGrid(
                        "annulus needs 0 <= r_lo <= r_hi and positive counts".into(),
                    ));
                }
            }
            Region::Box {
                x_lo,
                x_hi,
                y_lo,
                y_hi,
                nx,
                ny,
            } => {
                if !(x_hi >= x_lo && y_hi >= y_lo && nx >= 1 && ny >= 1) {
                    return Err(Error::InvalidGrid(
                        "box needs ordered extents and positive counts".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        let lin = |lo: f64, hi: f64, n: usize, i: usize| {
            if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        match self.region {
            Region::Annulus {
                r_lo,
                r_hi,
                n_r,
                n_theta,
            } => {
                let mut pts = Vec::with_capacity(n_r * n_theta);
                for i in 0..n_r {
                    let r = lin(r_lo, r_hi, n_r, i);
                    for j in 0..n_theta {
                        let th = std::f64::consts::TAU * j as f64 / n_theta as f64;
                        pts.push([r * th.cos(), r * th.sin()]);
                    }
                }
                pts
            }
            Region::Box {
                x_lo,
                x_hi,
                y_lo,
                y_hi,
                nx,
                ny,
            } => {
                let mut pts = Vec::with_capacity(nx * ny);
                for i in 0..nx {
                    for j in 0..ny {
                        pts.push([lin(x_lo, x_hi, nx, i), lin(y_lo, y_hi, ny, j)]);
                    }
                }
                pts
            }
        }
    }

    /// Largest radius touched by any stencil.
    pub fn r_reach(&self) -> f64 {
        let r_far = match self.region {
            Region::Annulus { r_hi, .. } => r_hi,
            Region::Box {
                x_lo,
                x_hi,
                y_lo,
                y_hi,
                ..
            } => x_lo.abs().max(x_hi.abs()).hypot(y_lo.abs().max(y_hi.abs())),
        };
        r_far + self.steps().space_reach()
    }

    /// Smallest radius of any sample point.
    pub fn r_min(&self) -> f64 {
        self.points()
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(f64::INFINITY, f64::min)
    }
}
