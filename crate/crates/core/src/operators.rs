//! Averaging operators on bounded functions.
//!
//! * `U_θ`: window average `(1/θ) ∫_x^{x+θ} f`,
//! * `S`: exponential average `e^{-x} ∫_0^x f(t) e^t dt`,
//! * `U`: Cesàro average `(1/x) ∫_1^x f`,
//!
//! plus their iterates. `S` is evaluated by its exact one-step recursion on
//! a memoized node table; the literal form overflows long before the
//! interesting range of `x`. `S^n` for `n >= 2` is a single convolution
//! against the gamma kernel `h^n(t) = e^{-t} t^{n-1}/(n-1)!`, which is the
//! half-line version of `S^n f = f * h^n` (same induction on `n`, with the
//! integrals cut at `t = x`).

use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{
    conjugate_w, BoundedFunction, BreakFn, Conjugation, DomainTag, Evaluator, Smoothness,
};
use crate::quadrature::{integrate, integrate_piecewise_constant, NeumaierSum, QuadratureConfig};
use crate::special::{
    kernel_tail_cut, kernel_value, ln_factorial, lower_incomplete_gamma, KERNEL_TAIL_MASS,
};

pub use crate::special::gamma_kernel_eval;

/// Log-spacing of the Cesàro prefix table nodes `e^{jδ}`.
const CESARO_LOG_STEP: f64 = 0.25;
/// Node spacing of the recursive exponential-average table.
const EXP_TABLE_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorKind {
    WindowAvg(f64),
    ExpAvg,
    CesaroAvg,
}

impl OperatorKind {
    pub fn domain(self) -> DomainTag {
        match self {
            OperatorKind::WindowAvg(_) | OperatorKind::ExpAvg => DomainTag::Additive,
            OperatorKind::CesaroAvg => DomainTag::Multiplicative,
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::WindowAvg(t) => write!(f, "U_{t}"),
            OperatorKind::ExpAvg => f.write_str("S"),
            OperatorKind::CesaroAvg => f.write_str("U"),
        }
    }
}

/// Gamma kernel `h^n` with its truncation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaKernel {
    order: u32,
    tail_cut: f64,
    ln_norm: f64,
}

impl GammaKernel {
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("n", 0.0, "kernel order must be at least 1"));
        }
        Ok(GammaKernel {
            order,
            tail_cut: kernel_tail_cut(order, KERNEL_TAIL_MASS)?,
            ln_norm: ln_factorial(order - 1),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `T_n` with `∫_{T_n}^∞ h^n <= 1e-12`.
    pub fn tail_cut(&self) -> f64 {
        self.tail_cut
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        kernel_value(self.order, self.ln_norm, t)
    }

    /// Closed-form mass on `[0, x]`, the regularized lower incomplete gamma.
    pub fn mass_up_to(&self, x: f64) -> f64 {
        lower_incomplete_gamma(self.order, x)
    }

    /// Quadrature of the kernel over `[0, T_n]`.
    pub fn numerical_mass(&self, quad: &QuadratureConfig) -> Result<f64> {
        Ok(integrate(|t| Ok(self.eval(t)), 0.0, self.tail_cut, &[], quad)?.value)
    }
}

/// `∫_a^b f` in the function's own coordinate, exact for piecewise constants.
pub(crate) fn integrate_function(
    f: &BoundedFunction,
    a: f64,
    b: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let breaks = f.breaks_in(lo, hi);
    if f.hint() == Smoothness::PiecewiseConstant {
        integrate_piecewise_constant(|x| f.evaluate(x), a, b, &breaks)
    } else {
        Ok(integrate(|x| f.evaluate(x), a, b, &breaks, quad)?.value)
    }
}

/// `∫_0^{min(x, T_n)} f(x - t) h^n(t) dt`.
fn convolve(
    f: &BoundedFunction,
    kernel: &GammaKernel,
    x: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let upper = x.min(kernel.tail_cut);
    if upper <= 0.0 {
        return Ok(0.0);
    }
    let breaks: Vec<f64> = f
        .breaks_in(x - upper, x)
        .into_iter()
        .map(|b| x - b)
        .collect();
    let r = integrate(
        |t| Ok(f.evaluate((x - t).max(0.0))? * kernel.eval(t)),
        0.0,
        upper,
        &breaks,
        quad,
    )?;
    Ok(r.value)
}

fn smoothed_hint(h: Smoothness) -> Smoothness {
    match h {
        Smoothness::Smooth => Smoothness::Smooth,
        _ => Smoothness::Unknown,
    }
}

fn same_breaks(f: &BoundedFunction) -> Option<BreakFn> {
    f.direct().breaks.as_ref().map(|_| -> BreakFn {
        let f = f.clone();
        Arc::new(move |a, b| f.breaks_in(a, b))
    })
}

/// `(U_θ f)(x) = (1/θ) ∫_x^{x+θ} f(t) dt`.
pub fn window_average(
    f: &BoundedFunction,
    theta: f64,
    quad: &QuadratureConfig,
) -> Result<BoundedFunction> {
    f.require(DomainTag::Additive, "window_average")?;
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::param(
            "theta",
            theta,
            "window length must be positive",
        ));
    }
    quad.validate()?;
    let (g, q) = (f.clone(), *quad);
    let eval = Arc::new(move |x: f64| Ok(integrate_function(&g, x, x + theta, &q)? / theta));
    let breaks = f.direct().breaks.as_ref().map(|_| -> BreakFn {
        let f = f.clone();
        Arc::new(move |a, b| {
            let mut v = f.breaks_in(a, b);
            v.extend(
                f.breaks_in(a + theta, b + theta)
                    .into_iter()
                    .map(|c| c - theta),
            );
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
    });
    Ok(BoundedFunction::from_parts(
        format!("U_{theta}({})", f.label()),
        DomainTag::Additive,
        f.bound(),
        smoothed_hint(f.hint()),
        Evaluator::new(eval, breaks),
        None,
    ))
}

/// `S^n f` via one convolution `∫_0^{min(x,T_n)} f(x-t) h^n(t) dt`.
/// For `n = 1` this is an independent route to [`exp_average`].
pub fn exp_average_via_kernel(
    f: &BoundedFunction,
    n: u32,
    quad: &QuadratureConfig,
) -> Result<BoundedFunction> {
    f.require(DomainTag::Additive, "exp_average_via_kernel")?;
    let out = kernel_operator(f, GammaKernel::new(n)?, quad)?;
    Ok(out.relabel(format!("S^{n}({})", f.label())))
}

fn kernel_operator(
    f: &BoundedFunction,
    kernel: GammaKernel,
    quad: &QuadratureConfig,
) -> Result<BoundedFunction> {
    quad.validate()?;
    let (g, q) = (f.clone(), *quad);
    let eval = Arc::new(move |x: f64| convolve(&g, &kernel, x, &q));
    Ok(BoundedFunction::from_parts(
        "",
        DomainTag::Additive,
        f.bound(),
        smoothed_hint(f.hint()),
        Evaluator::new(eval, same_breaks(f)),
        None,
    ))
}

/// Lazily extended prefix sums `C_j = Σ_{i<j} segment(node(i), node(i+1))`.
/// Entries depend only on `j`, never on the order of requests.
struct PrefixTable {
    node: Box<dyn Fn(usize) -> f64 + Send + Sync>,
    segment: Box<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>,
    state: Mutex<(Vec<f64>, NeumaierSum)>,
}

impl PrefixTable {
    fn new(
        node: impl Fn(usize) -> f64 + Send + Sync + 'static,
        segment: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        PrefixTable {
            node: Box::new(node),
            segment: Box::new(segment),
            state: Mutex::new((vec![0.0], NeumaierSum::default())),
        }
    }

    fn prefix(&self, j: usize) -> Result<f64> {
        let mut guard = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let (values, acc) = &mut *guard;
        while values.len() <= j {
            let i = values.len() - 1;
            acc.add((self.segment)((self.node)(i), (self.node)(i + 1))?);
            values.push(acc.value());
        }
        Ok(values[j])
    }
}

/// `(U f)(x) = (1/x) ∫_1^x f(t) dt`, with `(U f)(1) = f(1)`.
///
/// Evaluated in `x` through a memoized prefix table over the nodes
/// `e^{jδ}`; in log coordinates (where `x` itself would overflow) the value
/// is `S` applied to the log form of `f`.
pub fn cesaro_average(f: &BoundedFunction, quad: &QuadratureConfig) -> Result<BoundedFunction> {
    f.require(DomainTag::Multiplicative, "cesaro_average")?;
    quad.validate()?;
    let q = *quad;
    let table = {
        let g = f.clone();
        Arc::new(PrefixTable::new(
            |j| (j as f64 * CESARO_LOG_STEP).exp(),
            move |a, b| integrate_function(&g, a, b, &q),
        ))
    };
    let g = f.clone();
    let eval = Arc::new(move |x: f64| {
        if x == 1.0 {
            return g.evaluate(1.0);
        }
        let j = (x.ln() / CESARO_LOG_STEP).floor().max(0.0) as usize;
        let node = (j as f64 * CESARO_LOG_STEP).exp();
        let total = table.prefix(j)? + integrate_function(&g, node, x, &q)?;
        Ok(total / x)
    });
    let log_image = exp_average(&conjugate_w(f, Conjugation::ToAdditive)?, quad)?;
    Ok(BoundedFunction::from_parts(
        format!("U({})", f.label()),
        DomainTag::Multiplicative,
        f.bound(),
        smoothed_hint(f.hint()),
        Evaluator::new(eval, same_breaks(f)),
        Some(log_image.direct().clone()),
    ))
}

/// `(S f)(x) = e^{-x} ∫_0^x f(t) e^t dt`, by the exact one-step recursion
/// on nodes `x_j = j h`:
/// `Sf(x_{j+1}) = e^{-h} Sf(x_j) + ∫_{x_j}^{x_{j+1}} f(t) e^{-(x_{j+1}-t)} dt`.
///
/// Node values are memoized, so an evaluation costs one short quadrature.
/// Errors in earlier nodes are damped by `e^{-h}` per step.
pub fn exp_average(f: &BoundedFunction, quad: &QuadratureConfig) -> Result<BoundedFunction> {
    f.require(DomainTag::Additive, "exp_average")?;
    quad.validate()?;
    let q = *quad;
    let g = f.clone();
    let local = move |a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let breaks = g.breaks_in(a, b);
        Ok(integrate(|t| Ok(g.evaluate(t)? * (t - b).exp()), a, b, &breaks, &q)?.value)
    };
    let decay = (-EXP_TABLE_STEP).exp();
    let nodes: Mutex<Vec<f64>> = Mutex::new(vec![0.0]);
    let eval = Arc::new(move |x: f64| {
        let j = (x / EXP_TABLE_STEP).floor().max(0.0) as usize;
        let vj = {
            let mut v = nodes.lock().unwrap_or_else(|e| e.into_inner());
            while v.len() <= j {
                let i = v.len() - 1;
                let (a, b) = (i as f64 * EXP_TABLE_STEP, (i + 1) as f64 * EXP_TABLE_STEP);
                let next = decay * v[i] + local(a, b)?;
                v.push(next);
            }
            v[j]
        };
        let xj = j as f64 * EXP_TABLE_STEP;
        Ok((xj - x).exp() * vj + local(xj, x)?)
    });
    Ok(BoundedFunction::from_parts(
        format!("S({})", f.label()),
        DomainTag::Additive,
        f.bound(),
        smoothed_hint(f.hint()),
        Evaluator::new(eval, same_breaks(f)),
        None,
    ))
}

fn apply_once(
    f: &BoundedFunction,
    kind: OperatorKind,
    quad: &QuadratureConfig,
) -> Result<BoundedFunction> {
    match kind {
        OperatorKind::WindowAvg(theta) => window_average(f, theta, quad),
        OperatorKind::ExpAvg => exp_average(f, quad),
        OperatorKind::CesaroAvg => cesaro_average(f, quad),
    }
}

/// `k`-fold application of `kind`. `S^k` for `k >= 2` uses the gamma kernel.
pub fn iterate(
    f: &BoundedFunction,
    kind: OperatorKind,
    k: u32,
    quad: &QuadratureConfig,
) -> Result<BoundedFunction> {
    f.require(kind.domain(), "iterate")?;
    match (kind, k) {
        (_, 0) => Ok(f.clone()),
        (OperatorKind::ExpAvg, 1) => exp_average(f, quad),
        (OperatorKind::ExpAvg, k) => exp_average_via_kernel(f, k, quad),
        (kind, k) => (0..k).try_fold(f.clone(), |g, _| apply_once(&g, kind, quad)),
    }
}

/// `k`-fold application by nesting single-step operators; the reference
/// route for checking the kernel form of [`iterate`].
pub fn iterate_nested(
    f: &BoundedFunction,
    kind: OperatorKind,
    k: u32,
    quad: &QuadratureConfig,
) -> Result<BoundedFunction> {
    f.require(kind.domain(), "iterate_nested")?;
    (0..k).try_fold(f.clone(), |g, _| apply_once(&g, kind, quad))
}

/// Parses `window:θ`, `exp`, `cesaro` or `kernel:n` into an operator and
/// an iteration count (`kernel:n` is `S^n`).
pub fn parse_operator(text: &str) -> Result<(OperatorKind, u32)> {
    let unknown = || Error::UnknownOperator(text.to_string());
    match text {
        "exp" => Ok((OperatorKind::ExpAvg, 1)),
        "cesaro" => Ok((OperatorKind::CesaroAvg, 1)),
        _ => {
            if let Some(t) = text.strip_prefix("window:") {
                let theta: f64 = t.parse().map_err(|_| unknown())?;
                if !(theta > 0.0 && theta.is_finite()) {
                    return Err(unknown());
                }
                Ok((OperatorKind::WindowAvg(theta), 1))
            } else if let Some(n) = text.strip_prefix("kernel:") {
                match n.parse::<u32>() {
                    Ok(n) if n >= 1 => Ok((OperatorKind::ExpAvg, n)),
                    _ => Err(unknown()),
                }
            } else {
                Err(unknown())
            }
        }
    }
}

/// `(x, (op f)(x))` at `points` equally spaced `x` from `from` to `to`.
pub fn eval_trace(
    f: &BoundedFunction,
    kind: OperatorKind,
    k: u32,
    from: f64,
    to: f64,
    points: usize,
    quad: &QuadratureConfig,
) -> Result<Vec<(f64, f64)>> {
    let g = iterate(f, kind, k, quad)?;
    grid(from, to, points)?
        .into_iter()
        .map(|x| Ok((x, g.evaluate(x)?)))
        .collect()
}

/// `points` equally spaced values from `from` to `to`, both included.
pub fn grid(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(Error::param(
            "from/to",
            if from.is_finite() { to } else { from },
            "must be finite",
        ));
    }
    match points {
        0 => Err(Error::param("points", 0.0, "need at least one point")),
        1 => Ok(vec![from]),
        n => {
            let step = (to - from) / (n - 1) as f64;
            Ok((0..n)
                .map(|i| {
                    if i + 1 == n {
                        to
                    } else {
                        from + step * i as f64
                    }
                })
                .collect())
        }
    }
}

/// Residual of the reconstruction `f(x) = S(f + f')(x) + f(0) e^{-x}`.
pub fn lipschitz_decompose_check(
    f: &BoundedFunction,
    x: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    f.require(DomainTag::Additive, "lipschitz_decompose_check")?;
    let df = f
        .derivative()
        .ok_or_else(|| Error::MissingDerivative(f.label().to_string()))?;
    let xi = f.add(df)?;
    let s = exp_average(&xi, quad)?;
    Ok(f.evaluate(x)? - (s.evaluate(x)? + f.evaluate(0.0)? * (-x).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::lookup;
    use crate::funcspace::make_function;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn unit_indicator() -> BoundedFunction {
        make_function(
            "1[0,1]",
            DomainTag::Additive,
            |x| if x < 1.0 { 1.0 } else { 0.0 },
            1.0,
            Smoothness::PiecewiseConstant,
        )
        .unwrap()
        .with_breaks(|a, b| {
            if a < 1.0 && 1.0 < b {
                vec![1.0]
            } else {
                vec![]
            }
        })
    }

    fn sin() -> BoundedFunction {
        lookup("sin", None).unwrap().function
    }

    #[test]
    fn window_average_examples() {
        let c = lookup("const:3", Some(DomainTag::Additive))
            .unwrap()
            .function;
        for theta in [0.5, 2.0, 17.0] {
            let u = window_average(&c, theta, &q()).unwrap();
            assert!((u.evaluate(4.2).unwrap() - 3.0).abs() < 1e-13);
        }
        let theta = 1.7;
        let u = window_average(&sin(), theta, &q()).unwrap();
        for &x in &[0.0f64, 1.0, 9.5, 123.0] {
            let oracle = (x.cos() - (x + theta).cos()) / theta;
            assert!((u.evaluate(x).unwrap() - oracle).abs() < 1e-8);
        }
        let u = window_average(&unit_indicator(), 1.0, &q()).unwrap();
        for &x in &[0.0f64, 0.25, 0.9, 1.0, 3.0] {
            let oracle = if x < 1.0 { 1.0 - x } else { 0.0 };
            assert!((u.evaluate(x).unwrap() - oracle).abs() < 1e-8, "x={x}");
        }
        assert!(window_average(&sin(), 0.0, &q()).is_err());
        assert!(window_average(&sin(), -1.0, &q()).is_err());
    }

    #[test]
    fn exp_average_examples() {
        let one = lookup("const:1", Some(DomainTag::Additive))
            .unwrap()
            .function;
        let s1 = exp_average(&one, &q()).unwrap();
        let ss = exp_average(&sin(), &q()).unwrap();
        let si = exp_average(&unit_indicator(), &q()).unwrap();
        for &x in &[0.0f64, 0.5, 3.0, 20.0, 40.0, 1e4] {
            assert!((s1.evaluate(x).unwrap() - (1.0 - (-x).exp())).abs() < 1e-9);
            let oracle = (x.sin() - x.cos()) / 2.0 + (-x).exp() / 2.0;
            assert!((ss.evaluate(x).unwrap() - oracle).abs() < 1e-8, "x={x}");
            if x > 1.0 {
                let oracle = (std::f64::consts::E - 1.0) * (-x).exp();
                assert!((si.evaluate(x).unwrap() - oracle).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn cesaro_average_examples() {
        let one = lookup("const:1", Some(DomainTag::Multiplicative))
            .unwrap()
            .function;
        let sinlog = lookup("sinlog", None).unwrap().function;
        let u1 = cesaro_average(&one, &q()).unwrap();
        let us = cesaro_average(&sinlog, &q()).unwrap();
        for &x in &[1.001f64, 2.0, 33.0, 1e3, 1e8] {
            assert!((u1.evaluate(x).unwrap() - (1.0 - 1.0 / x)).abs() < 1e-9);
            let l = x.ln();
            let oracle = (l.sin() - l.cos()) / 2.0 + 1.0 / (2.0 * x);
            assert!((us.evaluate(x).unwrap() - oracle).abs() < 1e-8, "x={x}");
        }
        assert_eq!(us.evaluate(1.0).unwrap(), sinlog.evaluate(1.0).unwrap());
        assert_eq!(u1.evaluate(1.0).unwrap(), 1.0);
    }

    #[test]
    fn kernel_form_matches_single_and_nested_average() {
        let s = sin();
        let k1 = exp_average_via_kernel(&s, 1, &q()).unwrap();
        let e1 = exp_average(&s, &q()).unwrap();
        let k2 = exp_average_via_kernel(&s, 2, &q()).unwrap();
        let nested = exp_average(&e1, &q()).unwrap();
        for i in 0..15 {
            let x = 0.37 + 3.1 * f64::from(i);
            assert!((k1.evaluate(x).unwrap() - e1.evaluate(x).unwrap()).abs() < 1e-9);
            assert!((k2.evaluate(x).unwrap() - nested.evaluate(x).unwrap()).abs() < 1e-6);
        }
        let one = lookup("const:1", Some(DomainTag::Additive))
            .unwrap()
            .function;
        for n in 1..=6 {
            let v = exp_average_via_kernel(&one, n, &q())
                .unwrap()
                .evaluate(80.0)
                .unwrap();
            assert!((v - 1.0).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn recursive_table_agrees_with_convolution() {
        let s = sin();
        let a = exp_average(&s, &q()).unwrap();
        let b = exp_average_via_kernel(&s, 1, &q()).unwrap();
        for i in 0..40 {
            let x = 0.13 * f64::from(i * i);
            assert!(
                (a.evaluate(x).unwrap() - b.evaluate(x).unwrap()).abs() < 1e-9,
                "x={x}"
            );
        }
    }

    #[test]
    fn iterate_zero_is_identity() {
        let s = sin();
        for kind in [OperatorKind::ExpAvg, OperatorKind::WindowAvg(2.0)] {
            let g = iterate(&s, kind, 0, &q()).unwrap();
            assert_eq!(g.evaluate(1.234).unwrap(), s.evaluate(1.234).unwrap());
        }
        assert!(iterate(&s, OperatorKind::CesaroAvg, 1, &q()).is_err());
    }

    #[test]
    fn kernel_eval_examples() {
        assert_eq!(gamma_kernel_eval(5, -1.0).unwrap(), 0.0);
        assert_eq!(gamma_kernel_eval(1, 0.0).unwrap(), 1.0);
        assert!((gamma_kernel_eval(3, 2.0).unwrap() - 0.270_670_566_473_225_4).abs() < 1e-12);
        assert!(gamma_kernel_eval(0, 2.0).is_err());
    }

    #[test]
    fn lipschitz_reconstruction() {
        let c = lookup("const:2", Some(DomainTag::Additive))
            .unwrap()
            .function;
        assert!(lipschitz_decompose_check(&c, 3.0, &q()).unwrap().abs() < 1e-9);
        assert!(lipschitz_decompose_check(&sin(), 10.0, &q()).unwrap().abs() < 1e-8);
        let d = make_function(
            "-e^{-x}",
            DomainTag::Additive,
            |x: f64| -(-x).exp(),
            1.0,
            Smoothness::Smooth,
        )
        .unwrap();
        let e = make_function(
            "e^{-x}",
            DomainTag::Additive,
            |x: f64| (-x).exp(),
            1.0,
            Smoothness::Smooth,
        )
        .unwrap()
        .with_derivative(d)
        .unwrap();
        assert!(lipschitz_decompose_check(&e, 5.0, &q()).unwrap().abs() < 1e-8);
        let bare = make_function(
            "bare",
            DomainTag::Additive,
            f64::sin,
            1.0,
            Smoothness::Smooth,
        )
        .unwrap();
        assert!(matches!(
            lipschitz_decompose_check(&bare, 1.0, &q()),
            Err(Error::MissingDerivative(_))
        ));
    }

    #[test]
    fn operator_specs() {
        assert_eq!(
            parse_operator("window:2.5").unwrap(),
            (OperatorKind::WindowAvg(2.5), 1)
        );
        assert_eq!(parse_operator("exp").unwrap(), (OperatorKind::ExpAvg, 1));
        assert_eq!(
            parse_operator("cesaro").unwrap(),
            (OperatorKind::CesaroAvg, 1)
        );
        assert_eq!(
            parse_operator("kernel:3").unwrap(),
            (OperatorKind::ExpAvg, 3)
        );
        for bad in ["window:0", "window:x", "kernel:0", "kernel:", "shift", ""] {
            assert!(
                matches!(parse_operator(bad), Err(Error::UnknownOperator(_))),
                "{bad}"
            );
        }
        assert_eq!(grid(0.0, 50.0, 11).unwrap()[10], 50.0);
        assert_eq!(grid(0.0, 50.0, 11).unwrap()[3], 15.0);
        assert!(grid(0.0, 1.0, 0).is_err());
        let tr = eval_trace(&sin(), OperatorKind::ExpAvg, 3, 0.0, 50.0, 11, &q()).unwrap();
        assert_eq!(tr.len(), 11);
        assert!(tr.iter().all(|p| p.1.abs() <= 1.0));
    }

    #[test]
    fn cesaro_table_is_order_independent() {
        let f = lookup("dyadic-indicator", None).unwrap().function;
        let a = cesaro_average(&f, &q()).unwrap();
        let b = cesaro_average(&f, &q()).unwrap();
        let xs = [1.5, 900.0, 17.0, 4.0, 64.5];
        let va: Vec<f64> = xs.iter().map(|&x| a.evaluate(x).unwrap()).collect();
        let vb: Vec<f64> = xs.iter().rev().map(|&x| b.evaluate(x).unwrap()).collect();
        for (u, v) in va.iter().zip(vb.iter().rev()) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn kernel_mass_is_normalized() {
        for n in [1, 2, 7, 64] {
            let k = GammaKernel::new(n).unwrap();
            assert!((k.numerical_mass(&q()).unwrap() - 1.0).abs() < 1e-10);
            assert!(k.mass_up_to(k.tail_cut()) >= 1.0 - 1e-12);
        }
    }
}
