//! Limits of the decreasing towers `H̄_k` and `Ē_k` as `k → ∞`.

use serde::{Deserialize, Serialize};

use super::{estimate_limits, LimsupEstimate, WindowSchedule};
use crate::error::{Error, Result};
use crate::funcspace::{conjugate_w, BoundedFunction, Conjugation, DomainTag};
use crate::operators::{iterate, OperatorKind};
use crate::quadrature::QuadratureConfig;
use crate::special::contraction_coefficient;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TowerKind {
    /// Iterated Cesàro averages on the multiplicative side.
    Holder,
    /// Iterated exponential averages on the additive side.
    Exponential,
}

impl TowerKind {
    pub fn domain(self) -> DomainTag {
        match self {
            TowerKind::Holder => DomainTag::Multiplicative,
            TowerKind::Exponential => DomainTag::Additive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerLimit {
    pub value: f64,
    pub k_used: u32,
    pub stabilized: bool,
    /// The tower values for `k = 1, 2, ...` that were computed.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerReport {
    pub kind: TowerKind,
    pub upper: TowerLimit,
    pub lower: TowerLimit,
    pub estimates: Vec<LimsupEstimate>,
}

/// First `k` at which the tower may stop: consecutive values within `tol`,
/// or the a-priori distance `c_k · bound` between consecutive kernels is.
fn stop_index(seq: &[f64], tol: f64, bound: f64) -> Option<usize> {
    (1..seq.len()).find(|&k| {
        (seq[k - 1] - seq[k]).abs() <= tol || contraction_coefficient(k as u32) * bound <= tol
    })
}

/// Aitken Δ² on the last three terms of a decreasing sequence, kept between
/// `-bound` and the last term. Falls back to the last term when the
/// differences do not shrink geometrically.
fn extrapolate_decreasing(seq: &[f64], bound: f64) -> f64 {
    let n = seq.len();
    let last = seq[n - 1];
    if n < 3 {
        return last;
    }
    let d1 = seq[n - 2] - seq[n - 3];
    let d2 = last - seq[n - 2];
    if d1 == 0.0 || d2 == 0.0 {
        return last;
    }
    let r = d2 / d1;
    if !(r > 0.0 && r < 0.95) {
        return last;
    }
    (last + d2 * r / (1.0 - r)).clamp(-bound, last)
}

fn limit_of(seq: &[f64], tol: f64, bound: f64, decreasing: bool) -> TowerLimit {
    let sign = if decreasing { 1.0 } else { -1.0 };
    let signed: Vec<f64> = seq.iter().map(|v| sign * v).collect();
    let (used, k_used, stabilized) = match stop_index(seq, tol, bound) {
        Some(k) => (&signed[..=k], k, true),
        None => (&signed[..], seq.len(), false),
    };
    TowerLimit {
        value: sign * extrapolate_decreasing(used, bound),
        k_used: k_used as u32,
        stabilized,
        trace: seq.to_vec(),
    }
}

fn tower_base(
    f: &BoundedFunction,
    kind: TowerKind,
    tol: f64,
    k_max: u32,
) -> Result<BoundedFunction> {
    f.require(kind.domain(), "tower_limits")?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", tol, "must be positive"));
    }
    if k_max == 0 {
        return Err(Error::param("k_max", 0.0, "must be at least 1"));
    }
    match kind {
        TowerKind::Holder => conjugate_w(f, Conjugation::ToAdditive),
        TowerKind::Exponential => Ok(f.clone()),
    }
}

/// Computes `k ↦ limsup (S^k g)` and `liminf` for `g = f` (exponential) or
/// `g = W f` (Hölder) until both sides stop or `k_max` is reached.
pub fn tower_limits(
    f: &BoundedFunction,
    kind: TowerKind,
    tol: f64,
    k_max: u32,
    ws: &WindowSchedule,
    quad: &QuadratureConfig,
) -> Result<TowerReport> {
    let g = tower_base(f, kind, tol, k_max)?;
    let bound = f.bound();
    let mut estimates = Vec::new();
    let (mut ups, mut los) = (Vec::new(), Vec::new());
    for k in 1..=k_max {
        let est = estimate_limits(&iterate(&g, OperatorKind::ExpAvg, k, quad)?, ws)?;
        ups.push(est.upper);
        los.push(est.lower);
        estimates.push(est);
        if stop_index(&ups, tol, bound).is_some() && stop_index(&los, tol, bound).is_some() {
            break;
        }
    }
    Ok(tower_report(kind, estimates, tol, bound))
}

/// Every level `k = 1..=k_max` of the tower, then the same limits as
/// [`tower_limits`] (which only depend on the levels up to the stop).
pub fn full_tower(
    f: &BoundedFunction,
    kind: TowerKind,
    tol: f64,
    k_max: u32,
    ws: &WindowSchedule,
    quad: &QuadratureConfig,
) -> Result<TowerReport> {
    let g = tower_base(f, kind, tol, k_max)?;
    let estimates = (1..=k_max)
        .map(|k| estimate_limits(&iterate(&g, OperatorKind::ExpAvg, k, quad)?, ws))
        .collect::<Result<Vec<_>>>()?;
    Ok(tower_report(kind, estimates, tol, f.bound()))
}

fn tower_report(
    kind: TowerKind,
    estimates: Vec<LimsupEstimate>,
    tol: f64,
    bound: f64,
) -> TowerReport {
    let ups: Vec<f64> = estimates.iter().map(|e| e.upper).collect();
    let los: Vec<f64> = estimates.iter().map(|e| e.lower).collect();
    let (u, l) = (
        limit_of(&ups, tol, bound, true),
        limit_of(&los, tol, bound, false),
    );
    TowerReport {
        kind,
        upper: u,
        lower: l,
        estimates,
    }
}

pub fn upper_tower_limit(
    f: &BoundedFunction,
    kind: TowerKind,
    tol: f64,
    k_max: u32,
    ws: &WindowSchedule,
    quad: &QuadratureConfig,
) -> Result<TowerLimit> {
    Ok(tower_limits(f, kind, tol, k_max, ws, quad)?.upper)
}
