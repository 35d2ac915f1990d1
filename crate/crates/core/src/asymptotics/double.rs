//! The double limits `lim_θ limsup_x` behind the almost-convergence and
//! logarithmic functionals.
//!
//! Window means are differences of a tabulated antiderivative on a uniform
//! grid, so one window mean costs two table lookups plus at most two short
//! quadratures. When samples are coarser than the grid they are snapped to
//! grid nodes and cost nothing beyond the table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{estimate_probe, Probe, ThetaSchedule, WindowSchedule};
use crate::error::{Error, Result};
use crate::funcspace::{conjugate_w, BoundedFunction, Conjugation, DomainTag, Smoothness};
use crate::operators::integrate_function;
use crate::quadrature::{integrate, NeumaierSum, QuadratureConfig};

/// Largest `log θ` the direct logarithmic mean goes to, and the largest
/// `log x` it may touch; `e^700` is still a finite double.
const DIRECT_LOG_WINDOW_CAP: f64 = 256.0;
const LOG_HORIZON: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum L1Mode {
    /// Logarithmic means `(1/log θ) ∫_x^{θx} f(t) dt/t` computed in `t`.
    Direct,
    /// The almost-convergence functional of `W f`.
    ViaW,
}

/// One side of a double limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleLimit {
    pub value: f64,
    /// The outer sequence stayed within tolerance from `window_used` to the
    /// end of the schedule and the inner limits there converged.
    pub stabilized: bool,
    /// Window length at which `value` was taken (`θ` for M̄₁, `log θ` for L̄₁).
    pub window_used: f64,
    /// Min over windows of an upper limit (max for a lower one). The
    /// normalized window limsup is subadditive in the window length, so this
    /// bounds the limit from the correct side.
    pub certified_bound: f64,
    /// `(window, inner limit)` per step.
    pub trace: Vec<(f64, f64)>,
}

impl DoubleLimit {
    fn from_steps(steps: &[(f64, f64, bool)], tol: f64, upper: bool) -> DoubleLimit {
        let trace: Vec<(f64, f64)> = steps.iter().map(|&(w, v, _)| (w, v)).collect();
        let certified_bound = if upper {
            trace.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
        } else {
            trace.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        };
        let (j, stabilized) = match first_settled(steps, tol) {
            Some(j) => (j, steps[j].2),
            None => (steps.len() - 1, false),
        };
        DoubleLimit {
            value: steps[j].1,
            stabilized,
            window_used: steps[j].0,
            certified_bound,
            trace,
        }
    }
}

/// First step `j >= 2` from which every later value, and the two before
/// it, lie within `tol` of each other. Runs that agree only by coincidence
/// and drift later are not accepted.
fn first_settled(steps: &[(f64, f64, bool)], tol: f64) -> Option<usize> {
    (2..steps.len()).find(|&j| {
        let run = &steps[j - 2..];
        let hi = run.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let lo = run.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        hi - lo <= tol
    })
}

/// Prefix integrals `F(j h) = Σ_{i<j} segment(i h, (i+1) h)`, extended on demand.
struct UniformTable<S> {
    step: f64,
    segment: S,
    prefix: Vec<f64>,
    acc: NeumaierSum,
}

impl<S> UniformTable<S>
where
    S: Fn(f64, f64) -> Result<f64> + Sync,
{
    fn new(step: f64, segment: S) -> Self {
        UniformTable {
            step,
            segment,
            prefix: vec![0.0],
            acc: NeumaierSum::default(),
        }
    }

    fn extend_to(&mut self, x: f64) -> Result<()> {
        let need = (x / self.step).ceil() as usize + 2;
        let have = self.prefix.len();
        if have >= need {
            return Ok(());
        }
        let step = self.step;
        let seg = &self.segment;
        let pieces = ((have - 1)..(need - 1))
            .into_par_iter()
            .map(|i| seg(i as f64 * step, (i + 1) as f64 * step))
            .collect::<Result<Vec<f64>>>()?;
        for p in pieces {
            self.acc.add(p);
            self.prefix.push(self.acc.value());
        }
        Ok(())
    }

    fn at(&self, x: f64) -> Result<f64> {
        let j = (x / self.step).floor().max(0.0) as usize;
        let node = j as f64 * self.step;
        let base = *self
            .prefix
            .get(j)
            .ok_or_else(|| Error::param("x", x, "beyond the tabulated range"))?;
        if x > node {
            Ok(base + (self.segment)(node, x)?)
        } else {
            Ok(base)
        }
    }
}

struct WindowMean<'a, S> {
    table: &'a UniformTable<S>,
    width: f64,
}

impl<S> Probe for WindowMean<'_, S>
where
    S: Fn(f64, f64) -> Result<f64> + Sync,
{
    fn value(&self, x: f64) -> Result<f64> {
        Ok((self.table.at(x + self.width)? - self.table.at(x)?) / self.width)
    }

    fn snap(&self, x: f64, spacing: f64) -> f64 {
        let h = self.table.step;
        let ratio = self.width / h;
        if spacing >= h && ratio == ratio.round() {
            (x / h).round() * h
        } else {
            x
        }
    }
}

/// Grid spacing of at most 1 that divides the first window length.
fn table_step(theta_start: f64) -> f64 {
    if theta_start <= 1.0 {
        theta_start
    } else {
        theta_start / theta_start.ceil()
    }
}

fn run<S>(
    table: &mut UniformTable<S>,
    windows: &[f64],
    ws: &WindowSchedule,
    tol: f64,
) -> Result<(DoubleLimit, DoubleLimit)>
where
    S: Fn(f64, f64) -> Result<f64> + Sync,
{
    let mut ups = Vec::new();
    let mut los = Vec::new();
    for &w in windows {
        table.extend_to(ws.end() + w)?;
        let est = estimate_probe(&WindowMean { table, width: w }, ws)?;
        ups.push((w, est.upper, est.converged));
        los.push((w, est.lower, est.converged));
    }
    Ok((
        DoubleLimit::from_steps(&ups, tol, true),
        DoubleLimit::from_steps(&los, tol, false),
    ))
}

/// Upper and lower almost-convergence limits
/// `lim_θ limsup_x (1/θ) ∫_x^{x+θ} f` and the matching `liminf`.
pub fn m1_limits(
    f: &BoundedFunction,
    thetas: &ThetaSchedule,
    ws: &WindowSchedule,
    quad: &QuadratureConfig,
) -> Result<(DoubleLimit, DoubleLimit)> {
    f.require(DomainTag::Additive, "upper_m1")?;
    thetas.validate()?;
    ws.validate()?;
    quad.validate()?;
    let (g, q) = (f.clone(), *quad);
    let mut table = UniformTable::new(table_step(thetas.theta_start), move |a, b| {
        integrate_function(&g, a, b, &q)
    });
    let windows: Vec<f64> = (0..thetas.max_steps).map(|j| thetas.theta(j)).collect();
    run(&mut table, &windows, ws, thetas.stabilization_tol)
}

pub fn upper_m1(
    f: &BoundedFunction,
    thetas: &ThetaSchedule,
    ws: &WindowSchedule,
    quad: &QuadratureConfig,
) -> Result<DoubleLimit> {
    Ok(m1_limits(f, thetas, ws, quad)?.0)
}

pub fn lower_m1(
    f: &BoundedFunction,
    thetas: &ThetaSchedule,
    ws: &WindowSchedule,
    quad: &QuadratureConfig,
) -> Result<DoubleLimit> {
    Ok(m1_limits(f, thetas, ws, quad)?.1)
}

/// `∫_lo^hi f(t) dt / t`, exact on piecewise-constant functions.
fn log_measure_integral(
    f: &BoundedFunction,
    lo: f64,
    hi: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let breaks = f.breaks_in(lo, hi);
    if f.hint() == Smoothness::PiecewiseConstant {
        let mut acc = NeumaierSum::default();
        let mut a = lo;
        for b in breaks
            .into_iter()
            .filter(|&b| b > lo && b < hi)
            .chain(std::iter::once(hi))
        {
            acc.add(f.evaluate(0.5 * (a + b))? * (b.ln() - a.ln()));
            a = b;
        }
        Ok(acc.value())
    } else {
        Ok(integrate(|t| Ok(f.evaluate(t)? / t), lo, hi, &breaks, quad)?.value)
    }
}

/// Upper and lower logarithmic limits
/// `lim_θ limsup_x (1/log θ) ∫_x^{θx} f(t) dt/t` and the matching `liminf`.
///
/// The outer parameter is `λ = log θ`, run through the θ schedule. The
/// direct mode works in log coordinates `y = log x` for the windows but
/// integrates in `t`; it stops at `λ = 256` and squeezes the windows below
/// `log x = 700 - 256` so that `θx` stays finite.
pub fn l1_limits(
    f: &BoundedFunction,
    thetas: &ThetaSchedule,
    ws: &WindowSchedule,
    mode: L1Mode,
    quad: &QuadratureConfig,
) -> Result<(DoubleLimit, DoubleLimit)> {
    f.require(DomainTag::Multiplicative, "upper_l1")?;
    if mode == L1Mode::ViaW {
        return m1_limits(&conjugate_w(f, Conjugation::ToAdditive)?, thetas, ws, quad);
    }
    thetas.validate()?;
    ws.validate()?;
    quad.validate()?;
    let windows: Vec<f64> = (0..thetas.max_steps)
        .map(|j| thetas.theta(j))
        .take_while(|&l| l <= DIRECT_LOG_WINDOW_CAP)
        .collect();
    let largest = *windows.last().ok_or_else(|| {
        Error::param(
            "theta_start",
            thetas.theta_start,
            "exceeds the direct-mode window cap of 256",
        )
    })?;
    let end = LOG_HORIZON - largest;
    if ws.x_start >= end {
        return Err(Error::param(
            "x_start",
            ws.x_start,
            "leaves no room below the log horizon",
        ));
    }
    let ys = ws.spanning(end);
    let (g, q) = (f.clone(), *quad);
    let mut table = UniformTable::new(table_step(thetas.theta_start), move |a: f64, b: f64| {
        log_measure_integral(&g, a.exp(), b.exp(), &q)
    });
    run(&mut table, &windows, &ys, thetas.stabilization_tol)
}

pub fn upper_l1(
    f: &BoundedFunction,
    thetas: &ThetaSchedule,
    ws: &WindowSchedule,
    mode: L1Mode,
    quad: &QuadratureConfig,
) -> Result<DoubleLimit> {
    Ok(l1_limits(f, thetas, ws, mode, quad)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::lookup;

    fn get(label: &str) -> BoundedFunction {
        lookup(label, None).unwrap().function
    }

    fn defaults() -> (ThetaSchedule, WindowSchedule, QuadratureConfig) {
        (
            ThetaSchedule::default(),
            WindowSchedule::default(),
            QuadratureConfig::default(),
        )
    }

    #[test]
    fn m1_of_constant() {
        let (t, w, q) = defaults();
        let c = lookup("const:-0.75", Some(DomainTag::Additive))
            .unwrap()
            .function;
        let (u, l) = m1_limits(&c, &t, &w, &q).unwrap();
        assert!((u.value + 0.75).abs() < 1e-9 && (l.value + 0.75).abs() < 1e-9);
        assert!(u.stabilized && l.stabilized);
    }

    #[test]
    fn m1_of_sin_vanishes() {
        let (t, w, q) = defaults();
        let (u, l) = m1_limits(&get("sin"), &t, &w, &q).unwrap();
        assert!(u.value.abs() < 0.01, "{u:?}");
        assert!(l.value.abs() < 0.01, "{l:?}");
        assert!(u.certified_bound <= u.trace[0].1);
        // Window sups of sin follow 2|sin(θ/2)|/θ.
        for &(theta, v) in u.trace.iter().take(4) {
            let oracle = 2.0 * (theta / 2.0).sin().abs() / theta;
            assert!((v - oracle).abs() < 1e-4, "theta={theta}: {v} vs {oracle}");
        }
    }

    #[test]
    fn m1_of_log_periodic_indicator() {
        let (t, w, q) = defaults();
        let (u, l) = m1_limits(&get("dyadic-indicator-log"), &t, &w, &q).unwrap();
        assert!((u.value - 0.5).abs() < 0.01, "{u:?}");
        assert!((l.value - 0.5).abs() < 0.01, "{l:?}");
    }

    #[test]
    fn l1_examples_both_modes() {
        let (t, w, q) = defaults();
        for mode in [L1Mode::Direct, L1Mode::ViaW] {
            let c = lookup("const:3", Some(DomainTag::Multiplicative))
                .unwrap()
                .function;
            assert!((upper_l1(&c, &t, &w, mode, &q).unwrap().value - 3.0).abs() < 1e-9);
            assert!(
                upper_l1(&get("sinlog"), &t, &w, mode, &q)
                    .unwrap()
                    .value
                    .abs()
                    < 0.01
            );
            let (u, l) = l1_limits(&get("dyadic-indicator"), &t, &w, mode, &q).unwrap();
            assert!((u.value - 0.5).abs() < 0.01, "{mode:?} {u:?}");
            assert!((l.value - 0.5).abs() < 0.01, "{mode:?} {l:?}");
        }
    }

    #[test]
    fn domain_is_enforced() {
        let (t, w, q) = defaults();
        assert!(upper_m1(&get("sinlog"), &t, &w, &q).is_err());
        assert!(upper_l1(&get("sin"), &t, &w, L1Mode::Direct, &q).is_err());
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let f = get("sin");
        let q = QuadratureConfig::default();
        let mut t = UniformTable::new(0.5, |a, b| integrate_function(&f, a, b, &q));
        t.extend_to(100.0).unwrap();
        for &x in &[0.0f64, 0.5, 3.3, 99.9] {
            assert!((t.at(x).unwrap() - (1.0 - x.cos())).abs() < 1e-10);
        }
        assert!(t.at(1e6).is_err());
    }
}
