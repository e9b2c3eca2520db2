//! Discount functions under stochastic real interest rates.
//!
//! The crate is organised bottom-up:
//!
//! * [`models`]: Ornstein-Uhlenbeck, Feller and log-normal short-rate processes
//!   and their single-step transitions.
//! * [`analytics`]: closed-form OU results (exact `ln D(t)`, long-run rate,
//!   regime classification, negative-rate probabilities).
//! * [`montecarlo`]: path-simulation estimator of `D(t) = E[exp(-∫r)]` for any
//!   model, used as the independent check on the closed forms.
//! * [`pipeline`]: nominal-rate and CPI ingestion and real-rate construction.
//! * [`estimator`]: OU parameter fitting from an observed real-rate series.
//! * `report` (feature `cli`): the command-line front end and its file formats.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod estimator;
pub mod models;
pub mod montecarlo;
pub mod pipeline;
#[cfg(feature = "cli")]
pub mod report;
pub mod special;

pub use analytics::{NondimParams, Regime, RegimeLabel};
pub use error::{Error, Result};
pub use estimator::{AutocorrFit, EstimationReport};
pub use models::{FellerParams, LognormalParams, ModelKind, OuParams, ValidatedModel};
pub use montecarlo::{CurveSource, DiscountCurve, McConfig};
pub use pipeline::{RateSeries, RawSeries, SeriesKind};
