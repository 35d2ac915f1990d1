//! Numerical laboratory for averaging operators, invariant-mean functionals
//! and summability methods on bounded functions of a half-line.
//!
//! The additive side works on `[0, ∞)` with translations, the window
//! average `U_θ` and the exponential average `S`; the multiplicative side
//! works on `[1, ∞)` with dilations and the Cesàro average `U`. The
//! exponential change of variables `W f = f ∘ exp` intertwines the two.

// `!(a > b)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod corpus;
pub mod error;
pub mod funcspace;
pub mod operators;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod summability;

pub use asymptotics::{
    estimate_limits, evaluate_functional, lower_dual, upper_functional, upper_single,
    upper_tower_limit, AnalysisConfig, DoubleLimit, Functional, FunctionalEstimate, L1Mode,
    LimsupEstimate, ThetaSchedule, TowerKind, TowerLimit, WindowSchedule,
};
pub use corpus::{corpus, domains_of, lookup, CorpusEntry, KnownValue};
pub use error::{Error, Result};
pub use funcspace::{
    conjugate_w, dilate, make_function, shift, sup_norm_estimate, BoundedFunction, Conjugation,
    DomainTag, Smoothness,
};
pub use operators::{
    cesaro_average, eval_trace, exp_average, exp_average_via_kernel, gamma_kernel_eval, grid,
    iterate, iterate_nested, lipschitz_decompose_check, parse_operator, window_average,
    GammaKernel, OperatorKind,
};
pub use quadrature::{QuadRule, QuadratureConfig};
pub use report::{
    corpus_csv, corpus_json, corpus_text, export_plot_data, fmt12, round12, trace_csv, trace_json,
    trace_text, PlotData,
};
pub use summability::{
    chain_report, classify, parse_method, verdict, verdict_csv, verdict_json, verdict_text,
    ChainReport, Check, MeanVerdict, MethodId, VerdictStatus,
};
