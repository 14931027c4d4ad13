//! Risk-averse bandits for piecewise-stationary Bernoulli environments.
//!
//! * [`risk`]: CVaR and mean-variance on the loss scale, empirical and exact.
//! * [`cpd`]: restarted Bayesian online change-point detection and a GLR
//!   detector for binary streams.
//! * [`env`]: switching-bandit instances, reward coupling and ρ-regret.
//! * [`policies`]: Risk-LCB and its restarted, discounted, sliding-window and
//!   oracle variants.
//! * [`theory`]: numeric values of the regret and detection-delay bounds.
//! * [`harness`]: config-driven experiments with CSV and SVG outputs.

pub mod cpd;
pub mod env;
pub mod error;
pub mod harness;
pub mod policies;
pub mod risk;
pub mod theory;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/risk.md")]
    mod risk {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/policies.md")]
    mod policies {}
    #[doc = include_str!("../../../book/src/environments.md")]
    mod environments {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
}
