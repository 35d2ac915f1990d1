//! Limits at infinity and the sublinear functionals built on them.
//!
//! Every `limsup_{x→∞}` is realized the same way: sample the function on
//! geometrically growing windows `[x_0 ρ^j, x_0 ρ^{j+1})`, refine the best
//! sample of each window by golden-section search, and take the max over the
//! tail half of the windows. Window extrema are independent and computed in
//! parallel; the reduction does not depend on scheduling.

mod double;
mod functional;
mod tower;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::BoundedFunction;

pub use double::{l1_limits, lower_m1, m1_limits, upper_l1, upper_m1, DoubleLimit, L1Mode};
pub use functional::{
    evaluate_functional, lower_dual, single_limits, upper_functional, upper_single, AnalysisConfig,
    Functional, FunctionalEstimate,
};
pub use tower::{full_tower, tower_limits, upper_tower_limit, TowerKind, TowerLimit, TowerReport};

/// Golden-section steps spent refining the best sample of a window.
const REFINE_STEPS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSchedule {
    pub x_start: f64,
    /// Ratio `ρ` between consecutive window ends.
    pub growth: f64,
    pub window_count: usize,
    pub samples_per_window: usize,
    /// Spread allowed among the last three window extrema.
    pub stabilization_tol: f64,
}

impl Default for WindowSchedule {
    fn default() -> Self {
        WindowSchedule {
            x_start: 10.0,
            growth: 1.5,
            window_count: 24,
            samples_per_window: 512,
            stabilization_tol: 1e-3,
        }
    }
}

impl WindowSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_start > 0.0 && self.x_start.is_finite()) {
            return Err(Error::param("x_start", self.x_start, "must be positive"));
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return Err(Error::param("growth", self.growth, "must exceed 1"));
        }
        if self.window_count < 2 {
            return Err(Error::param(
                "window_count",
                self.window_count as f64,
                "need at least two windows",
            ));
        }
        if self.samples_per_window < 2 {
            return Err(Error::param(
                "samples_per_window",
                self.samples_per_window as f64,
                "need at least two samples",
            ));
        }
        if !(self.stabilization_tol > 0.0 && self.stabilization_tol.is_finite()) {
            return Err(Error::param(
                "stabilization_tol",
                self.stabilization_tol,
                "must be positive",
            ));
        }
        Ok(())
    }

    /// `[x_0 ρ^j, x_0 ρ^{j+1})`.
    pub fn window(&self, j: usize) -> (f64, f64) {
        let a = self.x_start * self.growth.powi(j as i32);
        (a, a * self.growth)
    }

    /// Right end of the last window.
    pub fn end(&self) -> f64 {
        self.x_start * self.growth.powi(self.window_count as i32)
    }

    /// First window of the tail half used for the limit.
    pub fn tail_start(&self) -> usize {
        self.window_count / 2
    }

    /// Same windows and sampling, with the growth stretched or compressed so
    /// the last window ends at `end`.
    pub(crate) fn spanning(&self, end: f64) -> WindowSchedule {
        let growth = (end / self.x_start).powf(1.0 / self.window_count as f64);
        WindowSchedule { growth, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSchedule {
    pub theta_start: f64,
    pub growth: f64,
    pub max_steps: usize,
    pub stabilization_tol: f64,
}

impl Default for ThetaSchedule {
    fn default() -> Self {
        ThetaSchedule {
            theta_start: 1.0,
            growth: 2.0,
            max_steps: 16,
            stabilization_tol: 1e-3,
        }
    }
}

impl ThetaSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_start > 0.0 && self.theta_start.is_finite()) {
            return Err(Error::param(
                "theta_start",
                self.theta_start,
                "must be positive",
            ));
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return Err(Error::param("theta_growth", self.growth, "must exceed 1"));
        }
        if self.max_steps < 2 {
            return Err(Error::param(
                "max_steps",
                self.max_steps as f64,
                "need at least two steps",
            ));
        }
        if !(self.stabilization_tol > 0.0 && self.stabilization_tol.is_finite()) {
            return Err(Error::param(
                "theta_stabilization_tol",
                self.stabilization_tol,
                "must be positive",
            ));
        }
        Ok(())
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.theta_start * self.growth.powi(j as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimsupEstimate {
    pub upper: f64,
    pub lower: f64,
    pub window_sups: Vec<f64>,
    pub window_infs: Vec<f64>,
    pub converged: bool,
    pub stabilization_delta: f64,
}

/// Something sampled along the windows. `snap` may move a sample to a nearby
/// point that is cheaper to evaluate when samples are `spacing` apart; the
/// extrema are always taken over values actually computed.
pub(crate) trait Probe: Sync {
    fn value(&self, x: f64) -> Result<f64>;

    fn snap(&self, x: f64, _spacing: f64) -> f64 {
        x
    }
}

struct Plain<'a>(&'a BoundedFunction);

impl Probe for Plain<'_> {
    fn value(&self, x: f64) -> Result<f64> {
        self.0.evaluate(x)
    }
}

/// Upper and lower limits of `g` at infinity.
pub fn estimate_limits(g: &BoundedFunction, schedule: &WindowSchedule) -> Result<LimsupEstimate> {
    schedule.validate()?;
    if schedule.x_start < g.domain().lower_end() {
        return Err(Error::param(
            "x_start",
            schedule.x_start,
            "must lie in the function's domain",
        ));
    }
    estimate_probe(&Plain(g), schedule)
}

pub(crate) fn estimate_probe<P: Probe>(probe: &P, ws: &WindowSchedule) -> Result<LimsupEstimate> {
    let rows = (0..ws.window_count)
        .into_par_iter()
        .map(|j| window_extrema(probe, ws, j))
        .collect::<Result<Vec<_>>>()?;
    let (window_sups, window_infs): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let tail = ws.tail_start();
    let upper = window_sups[tail..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = window_infs[tail..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let stabilization_delta = spread_of_last(&window_sups, 3).max(spread_of_last(&window_infs, 3));
    Ok(LimsupEstimate {
        upper,
        lower,
        window_sups,
        window_infs,
        converged: stabilization_delta <= ws.stabilization_tol,
        stabilization_delta,
    })
}

fn spread_of_last(v: &[f64], n: usize) -> f64 {
    let tail = &v[v.len().saturating_sub(n)..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

fn window_extrema<P: Probe>(probe: &P, ws: &WindowSchedule, j: usize) -> Result<(f64, f64)> {
    let (a, b) = ws.window(j);
    let n = ws.samples_per_window;
    let step = (b - a) / n as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| probe.snap(a + step * i as f64, step))
        .collect();
    let vals = xs
        .iter()
        .map(|&x| probe.value(x))
        .collect::<Result<Vec<f64>>>()?;
    let sup = refine(probe, &xs, &vals, a, b, 1.0)?;
    let inf = -refine(probe, &xs, &vals, a, b, -1.0)?;
    Ok((sup, inf))
}

/// Max of `sign * value` near the best sample, by golden-section search
/// between its neighbors. Never below the best sample itself.
fn refine<P: Probe>(probe: &P, xs: &[f64], vals: &[f64], a: f64, b: f64, sign: f64) -> Result<f64> {
    let mut best_i = 0;
    for i in 1..vals.len() {
        if sign * vals[i] > sign * vals[best_i] {
            best_i = i;
        }
    }
    let mut best = sign * vals[best_i];
    let mut lo = if best_i > 0 { xs[best_i - 1] } else { a };
    let mut hi = if best_i + 1 < xs.len() {
        xs[best_i + 1]
    } else {
        b
    };
    if !(hi > lo) {
        return Ok(best);
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let h = |x: f64| -> Result<f64> { Ok(sign * probe.value(x)?) };
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (h(c)?, h(d)?);
    for _ in 0..REFINE_STEPS {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = h(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = h(d)?;
        }
        best = best.max(fc).max(fd);
    }
    Ok(best.max(fc).max(fd))
}
