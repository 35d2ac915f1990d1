//! Bounded functions on a half-line and the elementary actions on them.
//!
//! A [`BoundedFunction`] is a pure evaluator plus metadata: its domain
//! ([0, ∞) or [1, ∞)), a declared sup bound, a smoothness hint, and
//! optionally a list of breakpoints (jumps or kinks), a derivative, and for
//! the multiplicative domain an evaluator in logarithmic coordinates
//! `y ↦ f(e^y)` that stays usable where `e^y` overflows.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) type EvalFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;
pub(crate) type BreakFn = Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;

/// Breakpoints strictly inside `(a, b)`, supplied by the caller.
pub type BreakList = Box<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainTag {
    /// `[0, ∞)`, acted on by translations.
    Additive,
    /// `[1, ∞)`, acted on by dilations.
    Multiplicative,
}

impl DomainTag {
    pub fn lower_end(self) -> f64 {
        match self {
            DomainTag::Additive => 0.0,
            DomainTag::Multiplicative => 1.0,
        }
    }

    pub fn contains(self, x: f64) -> bool {
        x >= self.lower_end()
    }

    pub fn other(self) -> DomainTag {
        match self {
            DomainTag::Additive => DomainTag::Multiplicative,
            DomainTag::Multiplicative => DomainTag::Additive,
        }
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainTag::Additive => "additive",
            DomainTag::Multiplicative => "multiplicative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    Smooth,
    PiecewiseConstant,
    Unknown,
}

impl Smoothness {
    fn combine(self, other: Smoothness) -> Smoothness {
        match (self, other) {
            (Smoothness::Smooth, Smoothness::Smooth) => Smoothness::Smooth,
            (Smoothness::PiecewiseConstant, Smoothness::PiecewiseConstant) => {
                Smoothness::PiecewiseConstant
            }
            _ => Smoothness::Unknown,
        }
    }
}

/// An evaluator together with its (possibly absent) breakpoint oracle.
#[derive(Clone)]
pub(crate) struct Evaluator {
    pub(crate) eval: EvalFn,
    pub(crate) breaks: Option<BreakFn>,
}

impl Evaluator {
    pub(crate) fn new(eval: EvalFn, breaks: Option<BreakFn>) -> Self {
        Evaluator { eval, breaks }
    }

    fn breaks_in(&self, a: f64, b: f64) -> Vec<f64> {
        match &self.breaks {
            Some(br) if a < b => br(a, b),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone)]
pub struct BoundedFunction {
    label: Arc<str>,
    domain: DomainTag,
    bound: f64,
    hint: Smoothness,
    direct: Evaluator,
    log_form: Option<Evaluator>,
    derivative: Option<Arc<BoundedFunction>>,
    /// Set on the image of an exponential conjugation: the function it came
    /// from, so that conjugating back returns the original exactly.
    w_source: Option<Arc<BoundedFunction>>,
}

impl fmt::Debug for BoundedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundedFunction")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("bound", &self.bound)
            .field("hint", &self.hint)
            .field("has_breaks", &self.direct.breaks.is_some())
            .field("has_log_form", &self.log_form.is_some())
            .field("has_derivative", &self.derivative.is_some())
            .finish()
    }
}

fn check_bound(bound: f64) -> Result<()> {
    if bound >= 0.0 && bound.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidBound(bound))
    }
}

/// Wraps a plain real map as a pure evaluator.
pub fn make_function<F>(
    label: impl Into<String>,
    domain: DomainTag,
    evaluator: F,
    bound: f64,
    hint: Smoothness,
) -> Result<BoundedFunction>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    BoundedFunction::new(label, domain, evaluator, bound, hint)
}

impl BoundedFunction {
    pub fn new<F>(
        label: impl Into<String>,
        domain: DomainTag,
        evaluator: F,
        bound: f64,
        hint: Smoothness,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fallible(label, domain, move |x| Ok(evaluator(x)), bound, hint)
    }

    pub(crate) fn from_fallible<F>(
        label: impl Into<String>,
        domain: DomainTag,
        evaluator: F,
        bound: f64,
        hint: Smoothness,
    ) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        check_bound(bound)?;
        Ok(BoundedFunction {
            label: Arc::from(label.into()),
            domain,
            bound,
            hint,
            direct: Evaluator::new(Arc::new(evaluator), None),
            log_form: None,
            derivative: None,
            w_source: None,
        })
    }

    pub(crate) fn from_parts(
        label: impl Into<String>,
        domain: DomainTag,
        bound: f64,
        hint: Smoothness,
        direct: Evaluator,
        log_form: Option<Evaluator>,
    ) -> Self {
        debug_assert!(check_bound(bound).is_ok());
        BoundedFunction {
            label: Arc::from(label.into()),
            domain,
            bound,
            hint,
            direct,
            log_form: if domain == DomainTag::Multiplicative {
                log_form
            } else {
                None
            },
            derivative: None,
            w_source: None,
        }
    }

    /// Attach the locations of jumps or kinks: `breaks(a, b)` lists those in `(a, b)`.
    pub fn with_breaks<B>(mut self, breaks: B) -> Self
    where
        B: Fn(f64, f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.direct.breaks = Some(Arc::new(breaks));
        self
    }

    /// Attach `y ↦ f(e^y)` (and its breakpoints in `y`) for a multiplicative function.
    pub fn with_log_form<F>(mut self, eval: F, breaks: Option<BreakList>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.require(DomainTag::Multiplicative, "with_log_form")?;
        self.log_form = Some(Evaluator::new(
            Arc::new(move |y| Ok(eval(y))),
            breaks.map(|b| -> BreakFn { Arc::from(b) }),
        ));
        Ok(self)
    }

    pub fn with_derivative(mut self, derivative: BoundedFunction) -> Result<Self> {
        if derivative.domain != self.domain {
            return Err(Error::DomainMismatch {
                op: "with_derivative",
                label: derivative.label().to_string(),
                expected: self.domain,
                found: derivative.domain,
            });
        }
        self.derivative = Some(Arc::new(derivative));
        Ok(self)
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = Arc::from(label.into());
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn hint(&self) -> Smoothness {
        self.hint
    }

    pub fn derivative(&self) -> Option<&BoundedFunction> {
        self.derivative.as_deref()
    }

    pub fn has_log_form(&self) -> bool {
        self.log_form.is_some()
    }

    pub(crate) fn require(&self, domain: DomainTag, op: &'static str) -> Result<()> {
        if self.domain == domain {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                op,
                label: self.label.to_string(),
                expected: domain,
                found: self.domain,
            })
        }
    }

    /// Value at `x`; `x` must lie in the domain.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain {
                label: self.label.to_string(),
                domain: self.domain,
                x,
            });
        }
        (self.direct.eval)(x)
    }

    /// Value at `e^y` for a multiplicative function, `y >= 0`.
    pub fn evaluate_log(&self, y: f64) -> Result<f64> {
        self.require(DomainTag::Multiplicative, "evaluate_log")?;
        if y < 0.0 {
            return Err(Error::OutOfDomain {
                label: self.label.to_string(),
                domain: DomainTag::Additive,
                x: y,
            });
        }
        match &self.log_form {
            Some(lf) => (lf.eval)(y),
            None => (self.direct.eval)(y.exp()),
        }
    }

    /// Breakpoints strictly inside `(a, b)`, in the function's own coordinate.
    pub fn breaks_in(&self, a: f64, b: f64) -> Vec<f64> {
        self.direct.breaks_in(a, b)
    }

    /// Breakpoints of `y ↦ f(e^y)` strictly inside `(a, b)`.
    pub fn log_breaks_in(&self, a: f64, b: f64) -> Vec<f64> {
        match &self.log_form {
            Some(lf) => lf.breaks_in(a, b),
            None if b < 709.0 => self
                .breaks_in(a.exp(), b.exp())
                .into_iter()
                .map(f64::ln)
                .collect(),
            None => Vec::new(),
        }
    }

    pub(crate) fn direct(&self) -> &Evaluator {
        &self.direct
    }

    pub(crate) fn log_evaluator(&self) -> Evaluator {
        match &self.log_form {
            Some(lf) => lf.clone(),
            None => {
                let eval = self.direct.eval.clone();
                let this = self.clone();
                Evaluator::new(
                    Arc::new(move |y: f64| eval(y.exp())),
                    self.direct
                        .breaks
                        .as_ref()
                        .map(|_| -> BreakFn { Arc::new(move |a, b| this.log_breaks_in(a, b)) }),
                )
            }
        }
    }

    /// `a·self + b·other` on a shared domain.
    pub fn linear_combination(
        &self,
        a: f64,
        other: &BoundedFunction,
        b: f64,
    ) -> Result<BoundedFunction> {
        other.require(self.domain, "linear_combination")?;
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::param(
                "coefficient",
                if a.is_finite() { b } else { a },
                "must be finite",
            ));
        }
        let label = format!(
            "{}*{} + {}*{}",
            fmt_coef(a),
            self.label,
            fmt_coef(b),
            other.label
        );
        let direct = combine_evaluators(&self.direct, a, &other.direct, b);
        let log_form = match (
            self.domain,
            self.log_form.is_some() || other.log_form.is_some(),
        ) {
            (DomainTag::Multiplicative, true) => Some(combine_evaluators(
                &self.log_evaluator(),
                a,
                &other.log_evaluator(),
                b,
            )),
            _ => None,
        };
        let mut out = BoundedFunction::from_parts(
            label,
            self.domain,
            a.abs() * self.bound + b.abs() * other.bound,
            self.hint.combine(other.hint),
            direct,
            log_form,
        );
        if let (Some(da), Some(db)) = (&self.derivative, &other.derivative) {
            out.derivative = Some(Arc::new(da.linear_combination(a, db, b)?));
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Result<BoundedFunction> {
        if !c.is_finite() {
            return Err(Error::param("c", c, "must be finite"));
        }
        let mul = |e: &Evaluator| {
            let f = e.eval.clone();
            Evaluator::new(Arc::new(move |x| Ok(c * f(x)?)), e.breaks.clone())
        };
        let mut out = BoundedFunction::from_parts(
            format!("{}*{}", fmt_coef(c), self.label),
            self.domain,
            c.abs() * self.bound,
            self.hint,
            mul(&self.direct),
            self.log_form.as_ref().map(mul),
        );
        if let Some(d) = &self.derivative {
            out.derivative = Some(Arc::new(d.scale(c)?));
        }
        Ok(out)
    }

    pub fn negate(&self) -> Result<BoundedFunction> {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &BoundedFunction) -> Result<BoundedFunction> {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &BoundedFunction) -> Result<BoundedFunction> {
        self.linear_combination(1.0, other, -1.0)
    }
}

fn fmt_coef(c: f64) -> String {
    format!("{c}")
}

fn combine_evaluators(fa: &Evaluator, a: f64, fb: &Evaluator, b: f64) -> Evaluator {
    let (ea, eb) = (fa.eval.clone(), fb.eval.clone());
    let eval: EvalFn = Arc::new(move |x| Ok(a * ea(x)? + b * eb(x)?));
    let breaks: Option<BreakFn> = match (&fa.breaks, &fb.breaks) {
        (None, None) => None,
        (ba, bb) => {
            let (ba, bb) = (ba.clone(), bb.clone());
            Some(Arc::new(move |lo, hi| {
                let mut v = ba.as_ref().map(|f| f(lo, hi)).unwrap_or_default();
                if let Some(f) = &bb {
                    v.extend(f(lo, hi));
                }
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }))
        }
    };
    Evaluator::new(eval, breaks)
}

/// Translation `x ↦ f(x + s)` on the additive domain.
pub fn shift(f: &BoundedFunction, s: f64) -> Result<BoundedFunction> {
    f.require(DomainTag::Additive, "shift")?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::param("s", s, "shift must be nonnegative"));
    }
    let shift_eval = |e: &Evaluator| {
        let g = e.eval.clone();
        Evaluator::new(
            Arc::new(move |x| g(x + s)),
            e.breaks.clone().map(|br| -> BreakFn {
                Arc::new(move |a, b| br(a + s, b + s).into_iter().map(|p| p - s).collect())
            }),
        )
    };
    let mut out = BoundedFunction::from_parts(
        format!("shift({}, {s})", f.label),
        DomainTag::Additive,
        f.bound,
        f.hint,
        shift_eval(&f.direct),
        None,
    );
    if let Some(d) = &f.derivative {
        out.derivative = Some(Arc::new(shift(d, s)?));
    }
    Ok(out)
}

/// Dilation `x ↦ f(r x)` on the multiplicative domain.
pub fn dilate(f: &BoundedFunction, r: f64) -> Result<BoundedFunction> {
    f.require(DomainTag::Multiplicative, "dilate")?;
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::param("r", r, "dilation factor must be at least 1"));
    }
    let g = f.direct.eval.clone();
    let direct = Evaluator::new(
        Arc::new(move |x| g(r * x)),
        f.direct.breaks.clone().map(|br| -> BreakFn {
            Arc::new(move |a, b| br(r * a, r * b).into_iter().map(|p| p / r).collect())
        }),
    );
    let ln_r = r.ln();
    let log_form = f.log_form.as_ref().map(|lf| {
        let g = lf.eval.clone();
        Evaluator::new(
            Arc::new(move |y| g(y + ln_r)),
            lf.breaks.clone().map(|br| -> BreakFn {
                Arc::new(move |a, b| {
                    br(a + ln_r, b + ln_r)
                        .into_iter()
                        .map(|p| p - ln_r)
                        .collect()
                })
            }),
        )
    });
    Ok(BoundedFunction::from_parts(
        format!("dilate({}, {r})", f.label),
        DomainTag::Multiplicative,
        f.bound,
        f.hint,
        direct,
        log_form,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conjugation {
    /// `(W f)(y) = f(e^y)`: multiplicative → additive.
    ToAdditive,
    /// `(W⁻¹ g)(x) = g(log x)`: additive → multiplicative.
    ToMultiplicative,
}

/// Exponential change of variables between the two half-lines.
pub fn conjugate_w(f: &BoundedFunction, direction: Conjugation) -> Result<BoundedFunction> {
    match direction {
        Conjugation::ToAdditive => {
            f.require(DomainTag::Multiplicative, "conjugate_w(ToAdditive)")?;
            if let Some(src) = &f.w_source {
                if src.domain == DomainTag::Additive {
                    return Ok((**src).clone());
                }
            }
            let mut out = BoundedFunction::from_parts(
                format!("W({})", f.label),
                DomainTag::Additive,
                f.bound,
                f.hint,
                f.log_evaluator(),
                None,
            );
            out.w_source = Some(Arc::new(f.clone()));
            Ok(out)
        }
        Conjugation::ToMultiplicative => {
            f.require(DomainTag::Additive, "conjugate_w(ToMultiplicative)")?;
            if let Some(src) = &f.w_source {
                if src.domain == DomainTag::Multiplicative {
                    return Ok((**src).clone());
                }
            }
            let g = f.direct.eval.clone();
            let direct = Evaluator::new(
                Arc::new(move |x: f64| g(x.ln())),
                f.direct.breaks.clone().map(|br| -> BreakFn {
                    Arc::new(move |a: f64, b: f64| {
                        br(a.ln(), b.ln()).into_iter().map(f64::exp).collect()
                    })
                }),
            );
            let mut out = BoundedFunction::from_parts(
                format!("Winv({})", f.label),
                DomainTag::Multiplicative,
                f.bound,
                f.hint,
                direct,
                Some(f.direct.clone()),
            );
            if let Some(d) = &f.derivative {
                // d/dx g(log x) = g'(log x) / x, bounded by sup|g'| on x >= 1.
                let dg = conjugate_w(d, Conjugation::ToMultiplicative)?;
                let eval = dg.direct.eval.clone();
                let deriv = BoundedFunction::from_parts(
                    format!("d/dx {}", out.label),
                    DomainTag::Multiplicative,
                    d.bound,
                    d.hint,
                    Evaluator::new(
                        Arc::new(move |x| Ok(eval(x)? / x)),
                        dg.direct.breaks.clone(),
                    ),
                    None,
                );
                out.derivative = Some(Arc::new(deriv));
            }
            out.w_source = Some(Arc::new(f.clone()));
            Ok(out)
        }
    }
}

/// Max of `|f|` over a uniform grid of `samples` points from the domain's
/// lower end to `x_max`. A sample above the declared bound is an error.
pub fn sup_norm_estimate(f: &BoundedFunction, x_max: f64, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(Error::param(
            "samples",
            samples as f64,
            "need at least two samples",
        ));
    }
    let lo = f.domain.lower_end();
    if !(x_max > lo && x_max.is_finite()) {
        return Err(Error::param(
            "x_max",
            x_max,
            "must exceed the domain's lower end",
        ));
    }
    let step = (x_max - lo) / (samples - 1) as f64;
    let mut best = 0.0f64;
    for i in 0..samples {
        let x = if i + 1 == samples {
            x_max
        } else {
            lo + step * i as f64
        };
        let v = f.evaluate(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                label: f.label.to_string(),
                x,
            });
        }
        if v.abs() > f.bound * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::BoundViolated {
                label: f.label.to_string(),
                x,
                value: v,
                bound: f.bound,
            });
        }
        best = best.max(v.abs());
    }
    Ok(best)
}
