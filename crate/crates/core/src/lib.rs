//! Energy-efficient relay placement for underwater acoustic links.
//!
//! The pipeline runs from the physical channel ([`acoustics`]) through
//! per-distance link budgets ([`linkbudget`]) to power-law fits
//! ([`fitmodels`]), closed-form relay planning ([`planner`]) and brute-force
//! checks on the exact channel ([`oracle`]).

pub mod acoustics;
pub mod cli;
pub mod error;
pub mod fitmodels;
pub mod linkbudget;
pub(crate) mod numeric;
pub mod oracle;
pub mod output;
pub mod planner;

pub use acoustics::Environment;
pub use error::{Error, Result};
pub use fitmodels::{FitModel, GoFReport, PolySurface};
pub use linkbudget::{FrequencyBand, FrequencySearch, HopBudget, LinkBudget};
pub use oracle::{ExactModel, OracleResult};
pub use planner::{CaseLabel, DeploymentPlan, EnergyDelayReport, LinkSpec};
