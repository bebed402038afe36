//! Evaluation functionals for streaming probabilistic prediction: RMSE,
//! energy score, dB-scaled MSE, per-lead-time error curves, and three exact
//! 2-Wasserstein estimators (1-D sorted coupling, small-n optimal assignment,
//! Gaussian closed form).

pub mod basic;
pub mod error;
pub mod report;
pub mod wasserstein;

pub use basic::{energy_score, lead_time_curve, log_mse_db, rmse, spearman};
pub use error::{MetricsError, Result};
pub use report::{EvalReport, MetricSummary};
pub use wasserstein::{min_cost_assignment, w2_1d, w2_exact_small, w2_gaussian, ASSIGNMENT_CAP};
