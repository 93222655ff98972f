//! Named parameter sets for reproducible runs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::residual::Conjecture3DParams;
use crate::solution::SolutionParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// `(gamma, K, xi, lambda, alpha, a0, a1)`
    pub values: [f64; 7],
    /// Time at which `(a0, a1)` hold.
    pub t0: f64,
}

impl Preset {
    pub fn params(&self) -> SolutionParams {
        let [g, k, xi, lam, alpha, a0, a1] = self.values;
        SolutionParams::new(g, k, xi, lam, alpha, a0, a1).expect("presets are valid")
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "zhang-zheng",
        description:
            "gamma = 2 closed-form field as a family member, a(t) = sqrt(t), anchored at t = 1",
        values: [2.0, 1.0, -0.5, -0.5, 0.0, 1.0, 0.5],
        t0: 1.0,
    },
    Preset {
        name: "periodic-demo",
        description: "bound breathing orbit, gamma = 3/2, turning points 1/3 and 1",
        values: [1.5, 1.0, 1.0, -2.0, 1.0, 1.0, 0.0],
        t0: 0.0,
    },
    Preset {
        name: "blowup-demo",
        description: "gamma = 2 collapse at t* = 1, a^2 = 1 - t^2",
        values: [2.0, 1.0, 1.0, -2.0, 1.0, 1.0, 0.0],
        t0: 0.0,
    },
    Preset {
        name: "gamma3-critical",
        description: "gamma = 3 start beyond the potential hump a_Max = 1, global",
        values: [3.0, 1.0, 1.0, -1.0, 1.0, 2.0, 0.0],
        t0: 0.0,
    },
    Preset {
        name: "gamma2-linear",
        description: "gamma = 2 with xi^2 + lambda = 0 and a1 < 0: a = 1 - t/2 vanishes at t = 2",
        values: [2.0, 1.0, 1.0, -1.0, 1.0, 1.0, -0.5],
        t0: 0.0,
    },
    Preset {
        name: "gamma2-expanding",
        description: "gamma = 2, lambda = 0: a = sqrt(1 + t^2)",
        values: [2.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0],
        t0: 0.0,
    },
    Preset {
        name: "generic",
        description: "smooth expanding member with compact support, gamma = 1.4",
        values: [1.4, 1.0, 0.7, 0.9, 1.0, 1.0, 0.3],
        t0: 0.0,
    },
    Preset {
        name: "equilibrium",
        description: "steady state at the potential minimum, gamma = 3/2",
        values: [1.5, 1.0, 1.0, -2.0, 1.0, 0.5, 0.0],
        t0: 0.0,
    },
];

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// Names accepted by [`conjecture3d_case`].
pub const CONJECTURE3D_CASES: [&str; 3] = ["isotropic", "drift", "anisotropic"];

/// Standard 3D test cases: the isotropic reduction, a pure drift on top of
/// it, and unequal axes with drift.
pub fn conjecture3d_case(name: &str) -> Result<Conjecture3DParams> {
    let iso = Conjecture3DParams::isotropic(1.4, 1.0, 1.0, 1.0, 1.0, 0.0);
    match name {
        "isotropic" => Ok(iso),
        "drift" => Ok(Conjecture3DParams {
            xi3: 0.0,
            d1: [0.3, -0.2, 0.1],
            ..iso
        }),
        "anisotropic" => Ok(Conjecture3DParams {
            a0: [1.0, 1.2, 0.8],
            d1: [0.1, 0.0, -0.05],
            ..iso
        }),
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}
