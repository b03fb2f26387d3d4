//! Penalized least-squares model selection for Gaussian random-design linear
//! regression with unknown noise variance and unknown covariate covariance,
//! together with Lasso baselines and a Monte-Carlo harness.

pub mod baselines;
pub mod cli;
pub mod collections;
pub mod error;
pub mod experiments;
pub mod penalties;
pub mod regression;
pub mod selector;
pub mod stochastic;

pub use collections::{recommended_complete_dmax, ModelCollection};
pub use error::{Error, Result};
pub use penalties::PenaltySpec;
pub use regression::{
    closed_form_risk, empirical_loss, fit_least_squares, population_loss, project_theta, DataSet, FitResult,
    GroundTruth, Model,
};
pub use selector::{criterion, select, select_many, SelectionResult};
pub use stochastic::SeedSpec;
