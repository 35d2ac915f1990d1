//! Deterministic globally adaptive Gauss–Kronrod quadrature.
//!
//! The driver follows the classic QUADPACK `qag` strategy: the interval with
//! the largest error estimate is bisected until the summed estimate falls under
//! `max(abs_tol, rel_tol * |I|)`. Node placement depends only on the integrand
//! values, the interval and the config, so results are bit-reproducible.
//!
//! Known discontinuities (breakpoints) are passed in explicitly; the initial
//! partition is cut at each of them so that no Kronrod panel straddles a jump.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-order nested rule used on each panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadRule {
    /// 7-point Gauss / 15-point Kronrod.
    GaussKronrod15,
    /// 10-point Gauss / 21-point Kronrod.
    GaussKronrod21,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub rule: QuadRule,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 1 << 15,
            rule: QuadRule::GaussKronrod21,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::param("abs_tol", self.abs_tol, "must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::param("rel_tol", self.rel_tol, "must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::param(
                "max_subdivisions",
                0.0,
                "must be at least one",
            ));
        }
        Ok(())
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

struct RuleTable {
    xgk: &'static [f64],
    wgk: &'static [f64],
    /// Gauss weights for the odd-indexed Kronrod abscissae.
    wg: &'static [f64],
    /// Gauss weight of the centre node, when the Gauss rule has one.
    wg_center: f64,
}

const GK15: RuleTable = RuleTable {
    xgk: &[
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ],
    wgk: &[
        0.022_935_322_010_529_225,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_18,
        0.140_653_259_715_525_92,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_83,
    ],
    wg: &[
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
    ],
    wg_center: 0.417_959_183_673_469_4,
};

const GK21: RuleTable = RuleTable {
    xgk: &[
        0.995_657_163_025_808_1,
        0.973_906_528_517_171_7,
        0.930_157_491_355_708_2,
        0.865_063_366_688_984_5,
        0.780_817_726_586_416_9,
        0.679_409_568_299_024_4,
        0.562_757_134_668_604_7,
        0.433_395_394_129_247_2,
        0.294_392_862_701_460_2,
        0.148_874_338_981_631_2,
        0.0,
    ],
    wgk: &[
        0.011_694_638_867_371_874,
        0.032_558_162_307_964_73,
        0.054_755_896_574_351_995,
        0.075_039_674_810_919_95,
        0.093_125_454_583_697_6,
        0.109_387_158_802_297_64,
        0.123_491_976_262_065_85,
        0.134_709_217_311_473_33,
        0.142_775_938_577_060_08,
        0.147_739_104_901_338_5,
        0.149_445_554_002_916_9,
    ],
    wg: &[
        0.066_671_344_308_688_14,
        0.149_451_349_150_580_6,
        0.219_086_362_515_982_04,
        0.269_266_719_309_996_35,
        0.295_524_224_714_752_9,
    ],
    wg_center: 0.0,
};

impl QuadRule {
    fn table(self) -> &'static RuleTable {
        match self {
            QuadRule::GaussKronrod15 => &GK15,
            QuadRule::GaussKronrod21 => &GK21,
        }
    }

    pub fn points(self) -> usize {
        2 * self.table().xgk.len() - 1
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One Gauss–Kronrod panel: returns `(integral, error estimate)`.
pub fn gauss_kronrod<F>(f: &mut F, a: f64, b: f64, rule: QuadRule) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let t = rule.table();
    let n = t.xgk.len();
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let f_center = f(center)?;
    let mut res_k = f_center * t.wgk[n - 1];
    let mut res_g = f_center * t.wg_center;
    let mut res_abs = res_k.abs();

    let mut fv1 = [0.0f64; 10];
    let mut fv2 = [0.0f64; 10];
    for j in 0..n - 1 {
        let dx = half * t.xgk[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        res_k += t.wgk[j] * sum;
        res_abs += t.wgk[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += t.wg[j / 2] * sum;
        }
    }

    let mean = res_k * 0.5;
    let mut res_asc = t.wgk[n - 1] * (f_center - mean).abs();
    for j in 0..n - 1 {
        res_asc += t.wgk[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let result = res_k * half;
    let err = rescale_error(
        (res_k - res_g) * half,
        res_abs * abs_half,
        res_asc * abs_half,
    );
    Ok((result, err))
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

#[derive(PartialEq)]
struct Ranked {
    err: f64,
    idx: usize,
}

impl Eq for Ranked {}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sorted, deduplicated breakpoints strictly inside `(lo, hi)`.
pub(crate) fn interior_points(lo: f64, hi: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > lo && *p < hi)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Adaptive integral of `f` over `[a, b]`, cutting the initial partition at
/// `breaks`. Orientation is respected: `a > b` yields the negated integral.
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_err: 0.0,
            evaluations: 0,
            subdivisions: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, breaks, cfg)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }

    let per_panel = cfg.rule.points();
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(a);
    edges.extend(interior_points(a, b, breaks));
    edges.push(b);

    let mut panels: Vec<Panel> = Vec::with_capacity(edges.len() * 4);
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    let mut total_val = 0.0;
    let mut total_err = 0.0;
    for w in edges.windows(2) {
        let (value, err) = gauss_kronrod(&mut f, w[0], w[1], cfg.rule)?;
        evaluations += per_panel;
        total_val += value;
        total_err += err;
        heap.push(Ranked {
            err,
            idx: panels.len(),
        });
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }

    let mut subdivisions = 0usize;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total_val.abs());
        if total_err <= tol {
            // Running sums drift; confirm against an exact recomputation.
            let (v, e) = exact_totals(&panels);
            total_val = v;
            total_err = e;
            if total_err <= cfg.abs_tol.max(cfg.rel_tol * total_val.abs()) {
                return Ok(Integral {
                    value: total_val,
                    abs_err: total_err,
                    evaluations,
                    subdivisions,
                });
            }
        }
        let Some(top) = heap.pop() else {
            return Err(non_convergence(a, b, &panels, cfg, subdivisions));
        };
        if subdivisions >= cfg.max_subdivisions {
            return Err(non_convergence(a, b, &panels, cfg, subdivisions));
        }
        let p = panels[top.idx];
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel is at floating-point resolution; leave it out of the heap.
            continue;
        }
        let (v1, e1) = gauss_kronrod(&mut f, p.a, mid, cfg.rule)?;
        let (v2, e2) = gauss_kronrod(&mut f, mid, p.b, cfg.rule)?;
        evaluations += 2 * per_panel;
        subdivisions += 1;
        total_val += v1 + v2 - p.value;
        total_err += e1 + e2 - p.err;
        panels[top.idx] = Panel {
            a: p.a,
            b: mid,
            value: v1,
            err: e1,
        };
        heap.push(Ranked {
            err: e1,
            idx: top.idx,
        });
        heap.push(Ranked {
            err: e2,
            idx: panels.len(),
        });
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            err: e2,
        });
    }
}

fn exact_totals(panels: &[Panel]) -> (f64, f64) {
    let mut v = NeumaierSum::default();
    let mut e = NeumaierSum::default();
    for p in panels {
        v.add(p.value);
        e.add(p.err);
    }
    (v.value(), e.value())
}

fn non_convergence(
    a: f64,
    b: f64,
    panels: &[Panel],
    cfg: &QuadratureConfig,
    subdivisions: usize,
) -> Error {
    let (v, e) = exact_totals(panels);
    Error::QuadratureNonConvergence {
        a,
        b,
        abs_err: e,
        tol: cfg.abs_tol.max(cfg.rel_tol * v.abs()),
        subdivisions,
    }
}

/// Exact integral of a piecewise-constant function: one midpoint evaluation
/// per piece between consecutive breakpoints.
pub fn integrate_piecewise_constant<F>(mut f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_piecewise_constant(f, b, a, breaks).map(|v| -v);
    }
    let mut acc = NeumaierSum::default();
    let mut lo = a;
    for hi in interior_points(a, b, breaks)
        .into_iter()
        .chain(std::iter::once(b))
    {
        acc.add(f(0.5 * (lo + hi))? * (hi - lo));
        lo = hi;
    }
    Ok(acc.value())
}
