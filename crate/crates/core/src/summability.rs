//! Summability verdicts and tower reports.
//!
//! A method sums `f` to `α` when its upper and lower functionals agree at
//! `α`. Numerically the two estimates are compared against a tolerance band:
//! within `2·tol` they agree, beyond `4·tol` (with both sides stabilized) the
//! method diverges, and the band in between is reported as inconclusive.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    evaluate_functional, full_tower, l1_limits, m1_limits, AnalysisConfig, Functional,
    FunctionalEstimate, TowerKind,
};
use crate::error::{Error, Result};
use crate::funcspace::{BoundedFunction, DomainTag};
use crate::report::{csv_table, fmt12, round12, to_json};

/// A summability method, named by its upper functional.
pub type MethodId = Functional;

/// Parses a method name: `cesaro`, `holder:k`, `holder-inf`, `log-cesaro`,
/// `exp`, `exp:n`, `exp-inf`, `almost`, or the short names `M`, `Hk`,
/// `Hinf`, `L1`, `R`, `En`, `Einf`, `M1`.
pub fn parse_method(name: &str) -> Result<MethodId> {
    let unknown = || Error::UnknownMethod(name.to_string());
    let order = |s: &str| -> Result<u32> {
        match s.parse::<u32>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(unknown()),
        }
    };
    Ok(match name {
        "cesaro" | "M" => Functional::Cesaro,
        "holder-inf" | "Hinf" => Functional::HolderLimit,
        "log-cesaro" | "L1" => Functional::LogCesaro,
        "exp" | "R" => Functional::Exp,
        "exp-inf" | "Einf" => Functional::ExpLimit,
        "almost" | "M1" => Functional::AlmostConv,
        _ => {
            if let Some(k) = name
                .strip_prefix("holder:")
                .or_else(|| name.strip_prefix('H'))
            {
                Functional::Holder(order(k)?)
            } else if let Some(n) = name.strip_prefix("exp:").or_else(|| name.strip_prefix('E')) {
                Functional::ExpIter(order(n)?)
            } else {
                return Err(unknown());
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VerdictStatus {
    Converges { value: f64 },
    Diverges { lower: f64, upper: f64 },
    Inconclusive,
}

impl VerdictStatus {
    pub fn name(&self) -> &'static str {
        match self {
            VerdictStatus::Converges { .. } => "converges",
            VerdictStatus::Diverges { .. } => "diverges",
            VerdictStatus::Inconclusive => "inconclusive",
        }
    }
}

/// The tolerance-band rule; depends on nothing but its arguments.
pub fn classify(
    upper: f64,
    lower: f64,
    tol: f64,
    upper_stabilized: bool,
    lower_stabilized: bool,
) -> VerdictStatus {
    let width = upper - lower;
    if width <= 2.0 * tol {
        VerdictStatus::Converges {
            value: 0.5 * (upper + lower),
        }
    } else if width > 4.0 * tol && upper_stabilized && lower_stabilized {
        VerdictStatus::Diverges { lower, upper }
    } else {
        VerdictStatus::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanVerdict {
    pub method: MethodId,
    pub status: VerdictStatus,
    pub upper: f64,
    pub lower: f64,
    pub tol: f64,
    pub upper_stabilized: bool,
    pub lower_stabilized: bool,
    pub diagnostics: String,
}

impl MeanVerdict {
    fn from_estimate(e: FunctionalEstimate, tol: f64) -> MeanVerdict {
        MeanVerdict {
            method: e.functional,
            status: classify(
                e.upper,
                e.lower,
                tol,
                e.upper_stabilized,
                e.lower_stabilized,
            ),
            upper: e.upper,
            lower: e.lower,
            tol,
            upper_stabilized: e.upper_stabilized,
            lower_stabilized: e.lower_stabilized,
            diagnostics: e.detail,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self.status {
            VerdictStatus::Converges { value } => Some(value),
            _ => None,
        }
    }

    pub fn gap(&self) -> Option<(f64, f64)> {
        match self.status {
            VerdictStatus::Diverges { lower, upper } => Some((lower, upper)),
            _ => None,
        }
    }

    fn row(&self, function: &str) -> VerdictRow {
        VerdictRow {
            function: function.to_string(),
            method: self.method.to_string(),
            status: self.status.name(),
            value: self.value().map(round12),
            gap_lo: self.gap().map(|g| round12(g.0)),
            gap_hi: self.gap().map(|g| round12(g.1)),
            upper: round12(self.upper),
            lower: round12(self.lower),
            tol: self.tol,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::param("tol", tol, "must be positive"))
    }
}

/// Upper and lower functional of `method` on `f`, classified at `tol`.
/// Towers stop at the same `tol`.
pub fn verdict(
    f: &BoundedFunction,
    method: MethodId,
    tol: f64,
    cfg: &AnalysisConfig,
) -> Result<MeanVerdict> {
    check_tol(tol)?;
    let cfg = AnalysisConfig {
        tower_tol: tol,
        ..*cfg
    };
    Ok(MeanVerdict::from_estimate(
        evaluate_functional(f, method, &cfg)?,
        tol,
    ))
}

/// One recorded comparison. Inequalities `lhs ≤ rhs` have
/// `slack = rhs − lhs`; equalities have `slack = −|lhs − rhs|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: String, lhs: f64, rhs: f64, tol: f64) -> Check {
        Check::with_slack(name, lhs, rhs, rhs - lhs, tol)
    }

    fn equal(name: String, lhs: f64, rhs: f64, tol: f64) -> Check {
        Check::with_slack(name, lhs, rhs, -(lhs - rhs).abs(), tol)
    }

    fn with_slack(name: String, lhs: f64, rhs: f64, slack: f64, tol: f64) -> Check {
        Check {
            name,
            lhs,
            rhs,
            slack,
            tol,
            pass: slack >= -tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TowerPoint {
    pub k: u32,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub function: String,
    pub domain: DomainTag,
    pub tol: f64,
    pub verdicts: Vec<MeanVerdict>,
    pub checks: Vec<Check>,
    pub tower: Vec<TowerPoint>,
}

impl ChainReport {
    pub fn verdict(&self, method: MethodId) -> Option<&MeanVerdict> {
        self.verdicts.iter().find(|v| v.method == method)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Verdicts up the tower of `f`'s domain (H1..H_kmax, Hinf, L1 or
/// E1..E_kmax, Einf, M1) with monotonicity, consistency and limit checks.
/// Failed checks are recorded, never raised.
pub fn chain_report(
    f: &BoundedFunction,
    k_max: u32,
    tol: f64,
    cfg: &AnalysisConfig,
) -> Result<ChainReport> {
    check_tol(tol)?;
    if k_max < 2 {
        return Err(Error::param(
            "k_max",
            f64::from(k_max),
            "a chain needs at least two levels",
        ));
    }
    cfg.validate()?;
    let (kind, level, limit, double): (TowerKind, fn(u32) -> MethodId, MethodId, MethodId) =
        match f.domain() {
            DomainTag::Multiplicative => (
                TowerKind::Holder,
                Functional::Holder,
                Functional::HolderLimit,
                Functional::LogCesaro,
            ),
            DomainTag::Additive => (
                TowerKind::Exponential,
                Functional::ExpIter,
                Functional::ExpLimit,
                Functional::AlmostConv,
            ),
        };
    let tower = full_tower(f, kind, tol, k_max, &cfg.windows, &cfg.quadrature)?;

    let mut verdicts: Vec<MeanVerdict> = tower
        .estimates
        .iter()
        .zip(1..)
        .map(|(e, k)| {
            MeanVerdict::from_estimate(
                FunctionalEstimate {
                    functional: level(k),
                    upper: e.upper,
                    lower: e.lower,
                    upper_stabilized: e.converged,
                    lower_stabilized: e.converged,
                    detail: format!("window spread {}", e.stabilization_delta),
                },
                tol,
            )
        })
        .collect();
    verdicts.push(MeanVerdict::from_estimate(
        FunctionalEstimate {
            functional: limit,
            upper: tower.upper.value,
            lower: tower.lower.value,
            upper_stabilized: tower.upper.stabilized,
            lower_stabilized: tower.lower.stabilized,
            detail: format!("k {} / {}", tower.upper.k_used, tower.lower.k_used),
        },
        tol,
    ));
    let (du, dl) = match f.domain() {
        DomainTag::Multiplicative => {
            l1_limits(f, &cfg.thetas, &cfg.windows, cfg.l1_mode, &cfg.quadrature)?
        }
        DomainTag::Additive => m1_limits(f, &cfg.thetas, &cfg.windows, &cfg.quadrature)?,
    };
    verdicts.push(MeanVerdict::from_estimate(
        FunctionalEstimate {
            functional: double,
            upper: du.value,
            lower: dl.value,
            upper_stabilized: du.stabilized,
            lower_stabilized: dl.stabilized,
            detail: format!("window {} / {}", du.window_used, dl.window_used),
        },
        tol,
    ));

    let mut checks = Vec::new();
    let n = k_max as usize;
    for i in 0..n - 1 {
        let (a, b) = (&verdicts[i], &verdicts[i + 1]);
        checks.push(Check::at_most(
            format!("upper {} <= upper {}", b.method, a.method),
            b.upper,
            a.upper,
            tol,
        ));
        checks.push(Check::at_most(
            format!("lower {} <= lower {}", a.method, b.method),
            a.lower,
            b.lower,
            tol,
        ));
        if let Some(alpha) = a.value() {
            // Width beyond the convergence band counts against the check.
            let excess = (b.upper - b.lower - 2.0 * tol).max(0.0);
            let mid = 0.5 * (b.upper + b.lower);
            checks.push(Check::with_slack(
                format!(
                    "{} sums to {} => {} sums to the same",
                    a.method,
                    fmt12(alpha),
                    b.method
                ),
                alpha,
                mid,
                tol - (alpha - mid).abs() - excess,
                tol,
            ));
        }
    }
    let (lim, dbl) = (&verdicts[n], &verdicts[n + 1]);
    checks.push(Check::equal(
        format!("upper {} = upper {}", lim.method, dbl.method),
        lim.upper,
        dbl.upper,
        1.5 * tol,
    ));
    checks.push(Check::equal(
        format!("lower {} = lower {}", lim.method, dbl.method),
        lim.lower,
        dbl.lower,
        1.5 * tol,
    ));
    checks.push(Check::at_most(
        format!("upper {} <= upper {}", dbl.method, verdicts[0].method),
        dbl.upper,
        verdicts[0].upper,
        tol,
    ));
    checks.push(Check::at_most(
        format!("lower {} <= lower {}", verdicts[0].method, dbl.method),
        verdicts[0].lower,
        dbl.lower,
        tol,
    ));

    let tower_points = tower
        .estimates
        .iter()
        .zip(1..)
        .map(|(e, k)| TowerPoint {
            k,
            upper: e.upper,
            lower: e.lower,
        })
        .collect();
    Ok(ChainReport {
        function: f.label().to_string(),
        domain: f.domain(),
        tol,
        verdicts,
        checks,
        tower: tower_points,
    })
}

#[derive(Serialize)]
struct VerdictRow {
    function: String,
    method: String,
    status: &'static str,
    value: Option<f64>,
    gap_lo: Option<f64>,
    gap_hi: Option<f64>,
    upper: f64,
    lower: f64,
    tol: f64,
}

impl VerdictRow {
    fn csv(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt12).unwrap_or_default();
        vec![
            self.function.clone(),
            self.method.clone(),
            self.status.to_string(),
            opt(self.value),
            opt(self.gap_lo),
            opt(self.gap_hi),
            fmt12(self.upper),
            fmt12(self.lower),
            fmt12(self.tol),
        ]
    }
}

const VERDICT_HEADER: [&str; 9] = [
    "function", "method", "status", "value", "gap_lo", "gap_hi", "upper", "lower", "tol",
];

#[derive(Serialize)]
struct CheckRow<'a> {
    name: &'a str,
    lhs: f64,
    rhs: f64,
    slack: f64,
    tol: f64,
    pass: bool,
}

impl<'a> From<&'a Check> for CheckRow<'a> {
    fn from(c: &'a Check) -> Self {
        CheckRow {
            name: &c.name,
            lhs: round12(c.lhs),
            rhs: round12(c.rhs),
            slack: round12(c.slack),
            tol: c.tol,
            pass: c.pass,
        }
    }
}

/// JSON object with the verdict fields and an empty `checks` list.
pub fn verdict_json(function: &str, v: &MeanVerdict) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        row: VerdictRow,
        checks: Vec<CheckRow<'a>>,
    }
    to_json(&Out {
        row: v.row(function),
        checks: Vec::new(),
    })
}

pub fn verdict_csv(function: &str, v: &MeanVerdict) -> String {
    csv_table(&VERDICT_HEADER, &[v.row(function).csv()])
}

pub fn verdict_text(function: &str, v: &MeanVerdict) -> String {
    let mut out = format!("{function} under {}: {}", v.method, v.status.name());
    match v.status {
        VerdictStatus::Converges { value } => {
            let _ = write!(out, " to {}", fmt12(value));
        }
        VerdictStatus::Diverges { lower, upper } => {
            let _ = write!(out, " with gap [{}, {}]", fmt12(lower), fmt12(upper));
        }
        VerdictStatus::Inconclusive => {}
    }
    let _ = writeln!(
        out,
        "\n  upper {}  lower {}  tol {}",
        fmt12(v.upper),
        fmt12(v.lower),
        fmt12(v.tol)
    );
    out
}

impl ChainReport {
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            function: &'a str,
            verdicts: Vec<VerdictRow>,
            checks: Vec<CheckRow<'a>>,
            tower: Vec<TowerPoint>,
        }
        to_json(&Out {
            function: &self.function,
            verdicts: self
                .verdicts
                .iter()
                .map(|v| v.row(&self.function))
                .collect(),
            checks: self.checks.iter().map(CheckRow::from).collect(),
            tower: self
                .tower
                .iter()
                .map(|p| TowerPoint {
                    k: p.k,
                    upper: round12(p.upper),
                    lower: round12(p.lower),
                })
                .collect(),
        })
    }

    /// One row per method.
    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .verdicts
            .iter()
            .map(|v| v.row(&self.function).csv())
            .collect();
        csv_table(&VERDICT_HEADER, &rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            out.push_str(&verdict_text(&self.function, v));
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "[{}] {}: lhs {} rhs {} slack {}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                fmt12(c.lhs),
                fmt12(c.rhs),
                fmt12(c.slack)
            );
        }
        out
    }

    /// `k,upper,lower` rows for plotting the tower.
    pub fn tower_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .tower
            .iter()
            .map(|p| vec![p.k.to_string(), fmt12(p.upper), fmt12(p.lower)])
            .collect();
        csv_table(&["k", "upper", "lower"], &rows)
    }
}
