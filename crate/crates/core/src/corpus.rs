//! The analytic test corpus: closed-form bounded functions with known
//! limit-functional values.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::{
    conjugate_w, make_function, BoundedFunction, Conjugation, DomainTag, Smoothness,
};

const LN_4: f64 = 2.0 * LN_2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnownValue {
    pub value: f64,
    pub oracle_note: String,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub function: BoundedFunction,
    /// Keyed by functional name, e.g. `upper_M`, `lower_L1`, `upper_H3`.
    pub known_values: BTreeMap<String, KnownValue>,
    pub oracle_note: String,
}

impl CorpusEntry {
    fn new(function: BoundedFunction, note: &str) -> Self {
        CorpusEntry {
            function,
            known_values: BTreeMap::new(),
            oracle_note: note.to_string(),
        }
    }

    fn with_known(mut self, name: impl Into<String>, value: f64, note: &str) -> Self {
        self.known_values.insert(
            name.into(),
            KnownValue {
                value,
                oracle_note: note.to_string(),
            },
        );
        self
    }

    pub fn label(&self) -> &str {
        self.function.label()
    }

    pub fn domain(&self) -> DomainTag {
        self.function.domain()
    }

    pub fn known(&self, name: &str) -> Option<f64> {
        self.known_values.get(name).map(|k| k.value)
    }
}

/// Every corpus entry, additive domain first.
pub fn corpus() -> Vec<CorpusEntry> {
    vec![
        constant(1.0, DomainTag::Additive),
        sin_entry(),
        decay_entry(),
        dyadic_log_entry(),
        constant(1.0, DomainTag::Multiplicative),
        sinlog_entry(),
        dyadic_entry(),
        recip_entry(),
    ]
}

/// Entries for one domain.
pub fn corpus_for(domain: DomainTag) -> Vec<CorpusEntry> {
    corpus()
        .into_iter()
        .filter(|e| e.domain() == domain)
        .collect()
}

/// Exact, case-sensitive label lookup. `const:<c>` accepts any finite real.
/// Labels present on both domains resolve to `domain` when given, otherwise
/// to the first match (additive).
pub fn lookup(label: &str, domain: Option<DomainTag>) -> Result<CorpusEntry> {
    if let Some(rest) = label.strip_prefix("const:") {
        let c: f64 = rest
            .parse()
            .ok()
            .filter(|c: &f64| c.is_finite())
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        return Ok(constant(c, domain.unwrap_or(DomainTag::Additive)));
    }
    let matches: Vec<CorpusEntry> = corpus()
        .into_iter()
        .filter(|e| e.label() == label)
        .collect();
    if matches.is_empty() {
        return Err(Error::UnknownLabel(label.to_string()));
    }
    if let Some(d) = domain {
        if let Some(e) = matches.iter().find(|e| e.domain() == d) {
            return Ok(e.clone());
        }
        let e = &matches[0];
        return Err(Error::DomainMismatch {
            op: "lookup",
            label: label.to_string(),
            expected: d,
            found: e.domain(),
        });
    }
    Ok(matches.into_iter().next().expect("non-empty"))
}

/// Domains on which `label` exists.
pub fn domains_of(label: &str) -> Vec<DomainTag> {
    if label
        .strip_prefix("const:")
        .and_then(|r| r.parse::<f64>().ok())
        .is_some()
    {
        return vec![DomainTag::Additive, DomainTag::Multiplicative];
    }
    corpus()
        .into_iter()
        .filter(|e| e.label() == label)
        .map(|e| e.domain())
        .collect()
}

fn fmt_const(c: f64) -> String {
    format!("const:{c}")
}

fn constant(c: f64, domain: DomainTag) -> CorpusEntry {
    let label = fmt_const(c);
    let zero = make_function(
        format!("d/dx {label}"),
        domain,
        |_| 0.0,
        0.0,
        Smoothness::Smooth,
    )
    .expect("valid");
    let mut f = make_function(label, domain, move |_| c, c.abs(), Smoothness::Smooth)
        .expect("finite constant")
        .with_derivative(zero)
        .expect("same domain");
    if domain == DomainTag::Multiplicative {
        f = f.with_log_form(move |_| c, None).expect("multiplicative");
    }
    let note = "constant function; every averaging operator here fixes constants in the limit";
    let names: &[&str] = match domain {
        DomainTag::Additive => &["M1", "R", "E2", "E3", "Einf"],
        DomainTag::Multiplicative => &["M", "H2", "H3", "L1", "Hinf"],
    };
    let mut e = CorpusEntry::new(f, note);
    for n in names {
        e = e
            .with_known(format!("upper_{n}"), c, note)
            .with_known(format!("lower_{n}"), c, note);
    }
    e
}

fn sin_entry() -> CorpusEntry {
    let cos = make_function(
        "cos",
        DomainTag::Additive,
        f64::cos,
        1.0,
        Smoothness::Smooth,
    )
    .expect("valid");
    let f = make_function(
        "sin",
        DomainTag::Additive,
        f64::sin,
        1.0,
        Smoothness::Smooth,
    )
    .expect("valid")
    .with_derivative(cos)
    .expect("same domain");
    let window = "window means of sin are bounded by 2/theta";
    let eigen = "S^k e^{ix} = e^{ix}/(1+i)^k + decaying terms, amplitude 2^{-k/2}";
    let mut e = CorpusEntry::new(f, "sin x; e^{ix} is an approximate eigenfunction of S")
        .with_known("upper_M1", 0.0, window)
        .with_known("lower_M1", 0.0, window)
        .with_known("upper_Einf", 0.0, eigen)
        .with_known("lower_Einf", 0.0, eigen);
    for k in 1..=6 {
        let amp = 2f64.powf(-f64::from(k) / 2.0);
        let name = if k == 1 {
            "R".to_string()
        } else {
            format!("E{k}")
        };
        e = e
            .with_known(format!("upper_{name}"), amp, eigen)
            .with_known(format!("lower_{name}"), -amp, eigen);
    }
    e
}

fn decay_entry() -> CorpusEntry {
    let d = make_function(
        "d/dx decay",
        DomainTag::Additive,
        |x| -1.0 / ((1.0 + x) * (1.0 + x)),
        1.0,
        Smoothness::Smooth,
    )
    .expect("valid");
    let f = make_function(
        "decay",
        DomainTag::Additive,
        |x| 1.0 / (1.0 + x),
        1.0,
        Smoothness::Smooth,
    )
    .expect("valid")
    .with_derivative(d)
    .expect("same domain");
    let note = "1/(1+x) -> 0, so every regular method gives 0";
    let mut e = CorpusEntry::new(f, note);
    for n in ["M1", "R", "E2", "Einf"] {
        e = e.with_known(format!("upper_{n}"), 0.0, note).with_known(
            format!("lower_{n}"),
            0.0,
            note,
        );
    }
    e
}

fn sinlog_entry() -> CorpusEntry {
    let d = make_function(
        "d/dx sinlog",
        DomainTag::Multiplicative,
        |x: f64| x.ln().cos() / x,
        1.0,
        Smoothness::Smooth,
    )
    .expect("valid")
    .with_log_form(|y: f64| y.cos() * (-y).exp(), None)
    .expect("multiplicative");
    let f = make_function(
        "sinlog",
        DomainTag::Multiplicative,
        |x: f64| x.ln().sin(),
        1.0,
        Smoothness::Smooth,
    )
    .expect("valid")
    .with_log_form(f64::sin, None)
    .expect("multiplicative")
    .with_derivative(d)
    .expect("same domain");
    let eigen = "U^k x^i = x^i/(1+i)^k + O(log^k x / x), amplitude 2^{-k/2}";
    let log = "substituting u = log t leaves a bounded sine integral divided by log theta";
    let mut e = CorpusEntry::new(
        f,
        "sin(log x) = Im x^i; x^i is an approximate eigenfunction of U",
    )
    .with_known("upper_L1", 0.0, log)
    .with_known("lower_L1", 0.0, log)
    .with_known("upper_Hinf", 0.0, eigen)
    .with_known("lower_Hinf", 0.0, eigen);
    for k in 1..=6 {
        let amp = 2f64.powf(-f64::from(k) / 2.0);
        let name = if k == 1 {
            "M".to_string()
        } else {
            format!("H{k}")
        };
        e = e
            .with_known(format!("upper_{name}"), amp, eigen)
            .with_known(format!("lower_{name}"), -amp, eigen);
    }
    debug_assert!((e.known("upper_M").unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
    e
}

/// Index `k` with `4^k <= x < 4^{k+1}`, exact at powers of four.
fn dyadic_level(x: f64) -> i32 {
    let mut k = (x.ln() / LN_4).floor() as i32;
    while 4f64.powi(k) > x {
        k -= 1;
    }
    while 4f64.powi(k + 1) <= x {
        k += 1;
    }
    k
}

fn dyadic_direct(x: f64) -> f64 {
    let k = dyadic_level(x);
    if x < 2.0 * 4f64.powi(k) {
        1.0
    } else {
        0.0
    }
}

fn dyadic_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(b > a) || b <= 1.0 {
        return out;
    }
    let mut k = dyadic_level(a.max(1.0));
    loop {
        let p = 4f64.powi(k);
        if p >= b || !p.is_finite() {
            break;
        }
        for q in [p, 2.0 * p] {
            if q > a && q < b {
                out.push(q);
            }
        }
        k += 1;
    }
    out
}

fn dyadic_log(y: f64) -> f64 {
    let r = y - LN_4 * (y / LN_4).floor();
    if r < LN_2 {
        1.0
    } else {
        0.0
    }
}

fn dyadic_log_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(b > a) {
        return out;
    }
    let mut k = (a / LN_4).floor().max(0.0);
    loop {
        let base = k * LN_4;
        if base >= b {
            break;
        }
        for q in [base, base + LN_2] {
            if q > a && q < b {
                out.push(q);
            }
        }
        k += 1.0;
    }
    out
}

fn dyadic_function() -> BoundedFunction {
    make_function(
        "dyadic-indicator",
        DomainTag::Multiplicative,
        dyadic_direct,
        1.0,
        Smoothness::PiecewiseConstant,
    )
    .expect("valid")
    .with_breaks(dyadic_breaks)
    .with_log_form(dyadic_log, Some(Box::new(dyadic_log_breaks)))
    .expect("multiplicative")
}

fn dyadic_entry() -> CorpusEntry {
    let density = "running average of the indicator of [4^k, 2*4^k): geometric sums give 2/3 at x = 2*4^K and 1/3 at x = 4^{K+1}";
    let logp = "its log image is log4-periodic with density 1/2";
    CorpusEntry::new(
        dyadic_function(),
        "indicator of the union of [4^k, 2*4^k), k >= 0",
    )
    .with_known("upper_M", 2.0 / 3.0, density)
    .with_known("lower_M", 1.0 / 3.0, density)
    .with_known("upper_L1", 0.5, logp)
    .with_known("lower_L1", 0.5, logp)
    .with_known("upper_Hinf", 0.5, logp)
    .with_known("lower_Hinf", 0.5, logp)
}

fn dyadic_log_entry() -> CorpusEntry {
    let f = conjugate_w(&dyadic_function(), Conjugation::ToAdditive)
        .expect("multiplicative source")
        .relabel("dyadic-indicator-log");
    let density =
        "the set is log4-periodic with density 1/2, so long window means tend to 1/2 uniformly";
    let steady = "periodic steady state of S: (1 - 1/2)/(1 - 1/4) = 2/3 at the end of each on-interval, 1/3 at the end of each off-interval";
    CorpusEntry::new(
        f,
        "indicator of the union of [k log 4, k log 4 + log 2), the log image of dyadic-indicator",
    )
    .with_known("upper_M1", 0.5, density)
    .with_known("lower_M1", 0.5, density)
    .with_known("upper_Einf", 0.5, density)
    .with_known("lower_Einf", 0.5, density)
    .with_known("upper_R", 2.0 / 3.0, steady)
    .with_known("lower_R", 1.0 / 3.0, steady)
}

fn recip_entry() -> CorpusEntry {
    let d = make_function(
        "d/dx recip",
        DomainTag::Multiplicative,
        |x| -1.0 / (x * x),
        1.0,
        Smoothness::Smooth,
    )
    .expect("valid")
    .with_log_form(|y: f64| -(-2.0 * y).exp(), None)
    .expect("multiplicative");
    let f = make_function(
        "recip",
        DomainTag::Multiplicative,
        |x| 1.0 / x,
        1.0,
        Smoothness::Smooth,
    )
    .expect("valid")
    .with_log_form(|y: f64| (-y).exp(), None)
    .expect("multiplicative")
    .with_derivative(d)
    .expect("same domain");
    let note = "1/x -> 0; U(1/x) = log(x)/x -> 0";
    let mut e = CorpusEntry::new(f, note);
    for n in ["M", "H2", "L1", "Hinf"] {
        e = e.with_known(format!("upper_{n}"), 0.0, note).with_known(
            format!("lower_{n}"),
            0.0,
            note,
        );
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_examples() {
        let d = lookup("dyadic-indicator", None).unwrap();
        assert_eq!(d.function.evaluate(5.0).unwrap(), 1.0);
        assert_eq!(d.function.evaluate(8.0).unwrap(), 0.0);
        assert_eq!(d.function.evaluate(4.0).unwrap(), 1.0);
        assert_eq!(d.function.evaluate(3.999).unwrap(), 0.0);
        assert_eq!(d.function.evaluate(1.0).unwrap(), 1.0);
        assert_eq!(d.known("upper_M"), Some(2.0 / 3.0));
        assert_eq!(lookup("sinlog", None).unwrap().function.bound(), 1.0);
        assert!(matches!(lookup("Sin", None), Err(Error::UnknownLabel(_))));
        assert!(matches!(
            lookup("const:abc", None),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn const_labels_resolve_on_both_domains() {
        let a = lookup("const:2.5", Some(DomainTag::Additive)).unwrap();
        let m = lookup("const:2.5", Some(DomainTag::Multiplicative)).unwrap();
        assert_eq!(a.domain(), DomainTag::Additive);
        assert_eq!(m.domain(), DomainTag::Multiplicative);
        assert_eq!(m.function.evaluate(9.0).unwrap(), 2.5);
        assert_eq!(m.function.bound(), 2.5);
        assert_eq!(domains_of("const:1").len(), 2);
        assert!(matches!(
            lookup("sinlog", Some(DomainTag::Additive)),
            Err(Error::DomainMismatch { .. })
        ));
    }

    #[test]
    fn required_labels_present() {
        let labels: Vec<(String, DomainTag)> = corpus()
            .iter()
            .map(|e| (e.label().to_string(), e.domain()))
            .collect();
        for (l, d) in [
            ("const:1", DomainTag::Additive),
            ("const:1", DomainTag::Multiplicative),
            ("sin", DomainTag::Additive),
            ("decay", DomainTag::Additive),
            ("sinlog", DomainTag::Multiplicative),
            ("dyadic-indicator", DomainTag::Multiplicative),
            ("dyadic-indicator-log", DomainTag::Additive),
        ] {
            assert!(labels.contains(&(l.to_string(), d)), "missing {l}");
        }
    }

    #[test]
    fn every_known_value_has_a_note() {
        for e in corpus() {
            assert!(!e.oracle_note.is_empty());
            for (k, v) in &e.known_values {
                assert!(!v.oracle_note.is_empty(), "{} {k}", e.label());
            }
        }
    }

    #[test]
    fn dyadic_log_image_membership() {
        let g = lookup("dyadic-indicator-log", None).unwrap().function;
        // shift by log 2 lands at the start of an off-interval
        let shifted = crate::funcspace::shift(&g, LN_2).unwrap();
        assert_eq!(shifted.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(g.evaluate(LN_4 + 0.1).unwrap(), 1.0);
        assert_eq!(g.evaluate(LN_4 + LN_2 + 0.1).unwrap(), 0.0);
        assert_eq!(g.evaluate(1e5).unwrap(), dyadic_log(1e5));
    }

    #[test]
    fn dyadic_breakpoints() {
        assert_eq!(dyadic_breaks(1.0, 40.0), vec![2.0, 4.0, 8.0, 16.0, 32.0]);
        assert_eq!(dyadic_breaks(4.0, 8.0), Vec::<f64>::new());
        let lb = dyadic_log_breaks(0.0, 3.0);
        assert_eq!(lb.len(), 4);
        assert!((lb[1] - LN_4).abs() < 1e-15);
    }

    #[test]
    fn declared_bounds_hold_on_grids() {
        for e in corpus() {
            let f = &e.function;
            let s = crate::funcspace::sup_norm_estimate(f, 500.0, 5000).unwrap();
            assert!(s <= f.bound());
        }
    }
}
