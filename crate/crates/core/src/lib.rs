//! Analytic models, slicing optimizer and event simulator for HAP-assisted
//! map and popular-content delivery to vehicles.

pub mod domain;
pub mod error;
pub mod foci;
pub mod mana;
pub mod numerics;
pub mod optimizer;
pub mod presets;
pub mod queueing;
pub mod scenario;
pub mod sim;
pub mod units;

pub use domain::{
    FociAllocation, FociConfig, GeometricRoute, ManaAllocation, ManaConfig, MobilityProfile,
    Popularity, ResourceBudget, RouteDistribution, SlicingSolution,
};
pub use error::{Error, Result};
pub use optimizer::{Demand, GridSpec, Scheme, SchemeResult};
pub use scenario::{Scenario, ScenarioFile};
