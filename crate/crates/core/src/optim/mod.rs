//! Coordinate descent drivers: RCD with fresh gradients, RCDlin with one
//! anchored gradient per epoch, the RGD baseline and column-wise TSD.

mod config;
mod grid;
mod objective;
mod run;
mod scheme;
mod select;
mod trace;

pub use config::{Algorithm, OptimizerConfig, Selection, StepSchedule, TraceLevel};
pub use grid::{default_grid, grid_search, GridPoint, GridResult};
pub use objective::{LinearObjective, Objective, QuadraticObjective};
pub use run::{flop_audit, run, run_rcd, run_rcdlin, run_rgd, run_scheme, RunOutput, MAX_HALVINGS};
pub use scheme::{CoordinateScheme, LorentzProduct, ManifoldCoordinates, SymplecticBlockScheme, TsdScheme};
pub use select::{strict_pair_pos, PlannedStep, Selector};
pub use trace::{traces_bit_eq, IterationRecord, RunStats};
