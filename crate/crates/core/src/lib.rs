//! Exact hitting-time analytics for the N-urn Ehrenfest chain.

pub mod cases;
pub mod engine;
pub mod error;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod quadrature;
pub mod sim;
pub mod special;

pub use engine::{HittingEngine, HittingQuery, HittingSummary};
pub use error::Error;
pub use model::{ModelParams, SetDescriptor, State};
pub use numeric::{Rational, SeriesJet};
pub use oracle::EnumeratedChain;
pub use sim::{SimConfig, SimMode, SimSummary};
