//! Linear quenches of the normal-phase quantum Rabi model under quenched
//! disorder.
//!
//! * [`dynamics`]: Bogoliubov equations for a linear coupling ramp and the
//!   residual energy at its end.
//! * [`disorder`]: time and end-point disorder, realizations, and quenched
//!   averages.
//! * [`analytics`]: adiabatic-perturbation and Kibble-Zurek closed forms.
//! * [`scaling`]: power-law fits and the exponent tables.
//! * [`reference`]: an independent fine-step propagator used as an oracle.

pub mod analytics;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod quadrature;
pub mod reference;
pub mod scaling;

pub use disorder::{AveragingScheme, DisorderChannel, DisorderModel, EnsembleResult};
pub use dynamics::{BogoliubovState, IntegratorConfig, PhysicalParams, QuenchSpec, StepMode};
pub use error::{Error, Result};
pub use scaling::{ScalingFit, TableId, TableSpec};
