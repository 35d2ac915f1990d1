//! One entry point for every upper/lower functional.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::double::{l1_limits, m1_limits, DoubleLimit, L1Mode};
use super::tower::{tower_limits, TowerKind, TowerLimit};
use super::{estimate_limits, LimsupEstimate, ThetaSchedule, WindowSchedule};
use crate::error::{Error, Result};
use crate::funcspace::{conjugate_w, BoundedFunction, Conjugation, DomainTag};
use crate::operators::{iterate, OperatorKind};
use crate::quadrature::QuadratureConfig;

/// The limit functionals, each the upper half of a summability method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Functional {
    /// `limsup U f`.
    Cesaro,
    /// `limsup U^k f`.
    Holder(u32),
    /// `lim_k limsup U^k f`.
    HolderLimit,
    /// Logarithmic double limit.
    LogCesaro,
    /// `limsup S f`.
    Exp,
    /// `limsup S^n f`.
    ExpIter(u32),
    /// `lim_n limsup S^n f`.
    ExpLimit,
    /// Almost-convergence double limit.
    AlmostConv,
}

impl Functional {
    pub fn domain(self) -> DomainTag {
        match self {
            Functional::Cesaro
            | Functional::Holder(_)
            | Functional::HolderLimit
            | Functional::LogCesaro => DomainTag::Multiplicative,
            _ => DomainTag::Additive,
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Functional::Holder(0) | Functional::ExpIter(0) => {
                Err(Error::param("k", 0.0, "iteration order must be at least 1"))
            }
            _ => Ok(()),
        }
    }

    /// Iteration order for the single-limit functionals.
    fn order(self) -> Option<u32> {
        match self {
            Functional::Cesaro | Functional::Exp => Some(1),
            Functional::Holder(k) | Functional::ExpIter(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Cesaro => f.write_str("M"),
            Functional::Holder(k) => write!(f, "H{k}"),
            Functional::HolderLimit => f.write_str("Hinf"),
            Functional::LogCesaro => f.write_str("L1"),
            Functional::Exp => f.write_str("R"),
            Functional::ExpIter(n) => write!(f, "E{n}"),
            Functional::ExpLimit => f.write_str("Einf"),
            Functional::AlmostConv => f.write_str("M1"),
        }
    }
}

/// Every numerical knob of the functional estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub quadrature: QuadratureConfig,
    pub windows: WindowSchedule,
    pub thetas: ThetaSchedule,
    pub l1_mode: L1Mode,
    /// Stop tolerance for the `k → ∞` towers.
    pub tower_tol: f64,
    pub tower_k_max: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            quadrature: QuadratureConfig::default(),
            windows: WindowSchedule::default(),
            thetas: ThetaSchedule::default(),
            l1_mode: L1Mode::Direct,
            tower_tol: 0.02,
            tower_k_max: 12,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        self.windows.validate()?;
        self.thetas.validate()?;
        if !(self.tower_tol > 0.0 && self.tower_tol.is_finite()) {
            return Err(Error::param(
                "tower_tol",
                self.tower_tol,
                "must be positive",
            ));
        }
        if self.tower_k_max == 0 {
            return Err(Error::param("tower_k_max", 0.0, "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalEstimate {
    pub functional: Functional,
    pub upper: f64,
    pub lower: f64,
    pub upper_stabilized: bool,
    pub lower_stabilized: bool,
    pub detail: String,
}

/// Upper and lower limits of `U^k f` (through `S^k W f`) or `S^k f`.
pub fn single_limits(
    f: &BoundedFunction,
    functional: Functional,
    ws: &WindowSchedule,
    quad: &QuadratureConfig,
) -> Result<LimsupEstimate> {
    functional.validate()?;
    let k = functional
        .order()
        .ok_or_else(|| Error::Unsupported(format!("{functional} is not a single limit")))?;
    f.require(functional.domain(), "single_limits")?;
    let g = match functional.domain() {
        DomainTag::Multiplicative => conjugate_w(f, Conjugation::ToAdditive)?,
        DomainTag::Additive => f.clone(),
    };
    estimate_limits(&iterate(&g, OperatorKind::ExpAvg, k, quad)?, ws)
}

pub fn upper_single(
    f: &BoundedFunction,
    functional: Functional,
    ws: &WindowSchedule,
    quad: &QuadratureConfig,
) -> Result<f64> {
    Ok(single_limits(f, functional, ws, quad)?.upper)
}

fn from_double(functional: Functional, (u, l): (DoubleLimit, DoubleLimit)) -> FunctionalEstimate {
    FunctionalEstimate {
        functional,
        upper: u.value,
        lower: l.value,
        upper_stabilized: u.stabilized,
        lower_stabilized: l.stabilized,
        detail: format!(
            "window {} / {}; certified [{}, {}]",
            u.window_used, l.window_used, l.certified_bound, u.certified_bound
        ),
    }
}

fn from_tower(functional: Functional, u: TowerLimit, l: TowerLimit) -> FunctionalEstimate {
    FunctionalEstimate {
        functional,
        upper: u.value,
        lower: l.value,
        upper_stabilized: u.stabilized,
        lower_stabilized: l.stabilized,
        detail: format!("k {} / {}", u.k_used, l.k_used),
    }
}

/// Upper and lower value of `functional` on `f`.
pub fn evaluate_functional(
    f: &BoundedFunction,
    functional: Functional,
    cfg: &AnalysisConfig,
) -> Result<FunctionalEstimate> {
    cfg.validate()?;
    functional.validate()?;
    f.require(functional.domain(), "evaluate_functional")?;
    let (ws, quad) = (&cfg.windows, &cfg.quadrature);
    Ok(match functional {
        Functional::AlmostConv => from_double(functional, m1_limits(f, &cfg.thetas, ws, quad)?),
        Functional::LogCesaro => from_double(
            functional,
            l1_limits(f, &cfg.thetas, ws, cfg.l1_mode, quad)?,
        ),
        Functional::HolderLimit | Functional::ExpLimit => {
            let kind = if functional == Functional::HolderLimit {
                TowerKind::Holder
            } else {
                TowerKind::Exponential
            };
            let r = tower_limits(f, kind, cfg.tower_tol, cfg.tower_k_max, ws, quad)?;
            from_tower(functional, r.upper, r.lower)
        }
        single => {
            let e = single_limits(f, single, ws, quad)?;
            FunctionalEstimate {
                functional,
                upper: e.upper,
                lower: e.lower,
                upper_stabilized: e.converged,
                lower_stabilized: e.converged,
                detail: format!("window spread {}", e.stabilization_delta),
            }
        }
    })
}

pub fn upper_functional(
    f: &BoundedFunction,
    functional: Functional,
    cfg: &AnalysisConfig,
) -> Result<f64> {
    Ok(evaluate_functional(f, functional, cfg)?.upper)
}

/// `-upper(-f)`.
pub fn lower_dual(
    f: &BoundedFunction,
    functional: Functional,
    cfg: &AnalysisConfig,
) -> Result<f64> {
    Ok(-upper_functional(&f.negate()?, functional, cfg)?)
}
