use serde::{Deserialize, Serialize};

use super::ResidualReport;
use crate::error::{Error, Result};
use crate::numerics::loglog_slope;

/// Residuals at or below this are rounding noise; no order is fitted.
const MACHINE_ZERO: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "order")]
pub enum ObservedOrder {
    Observed(f64),
    NotApplicable,
}

impl ObservedOrder {
    pub fn value(self) -> Option<f64> {
        match self {
            ObservedOrder::Observed(v) => Some(v),
            ObservedOrder::NotApplicable => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub ladder: Vec<f64>,
    /// Worst normalized residual at each rung.
    pub residuals: Vec<f64>,
    /// Order fitted to the worst normalized residual.
    pub overall: ObservedOrder,
    /// `(equation, order)` per equation.
    pub per_equation: Vec<(String, ObservedOrder)>,
}

fn fit(h: &[f64], e: &[f64]) -> ObservedOrder {
    if e.iter().any(|v| !(*v > MACHINE_ZERO)) {
        ObservedOrder::NotApplicable
    } else {
        ObservedOrder::Observed(loglog_slope(h, e))
    }
}

/// Least-squares slope of `log(residual)` against `log(h)` over a strictly
/// decreasing ladder of at least three steps.
pub fn residual_convergence<F>(ladder: &[f64], op: F) -> Result<ConvergenceReport>
where
    F: Fn(f64) -> Result<ResidualReport>,
{
    if ladder.len() < 3 {
        return Err(Error::LadderTooShort(ladder.len()));
    }
    if ladder.windows(2).any(|w| !(w[1] < w[0])) || ladder.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidGrid(
            "h ladder must be positive and strictly decreasing".into(),
        ));
    }
    let reports = ladder.iter().map(|&h| op(h)).collect::<Result<Vec<_>>>()?;
    let residuals: Vec<f64> = reports.iter().map(|r| r.max_normalized()).collect();
    let per_equation = reports[0]
        .equations
        .iter()
        .enumerate()
        .map(|(k, eq)| {
            let e: Vec<f64> = reports
                .iter()
                .map(|r| r.equations[k].max_normalized)
                .collect();
            (eq.equation.clone(), fit(ladder, &e))
        })
        .collect();
    Ok(ConvergenceReport {
        ladder: ladder.to_vec(),
        overall: fit(ladder, &residuals),
        residuals,
        per_equation,
    })
}
