//! Executable verification of the one-step sampling error analysis: exact
//! pushforwards and Wasserstein gaps on Gaussian chains, brute-force discrete
//! couplings, and law-of-total-variance decompositions.

pub mod discrete;
pub mod error;
pub mod gaussian;
pub mod lotv;
pub mod prop1;
pub mod report;

pub use discrete::{one_step_pushforward, w2_sq_discrete_1d, Discrete1, DiscreteJoint};
pub use error::{Result, TheoryError};
pub use gaussian::GaussianChain;
pub use lotv::{lotv_check, lotv_exact_discrete, lotv_exact_gaussian, LotvReport};
pub use prop1::{prop1_empirical_check, prop1_gaussian_report, Prop1Closed, Prop1Empirical};
pub use report::{run_suite, SuiteConfig, TheoryCase};
