//! Parameter sweeps over the coupling plane, written as CSV.
//!
//! A [`RunConfig`] is read from JSON, amended by flags, validated into a
//! [`Plan`] and evaluated by [`run`] into a [`Table`] plus a [`Summary`].

pub mod config;
pub mod run;
pub mod table;

pub use config::{AxisRange, Diagnostic, Mode, Plan, RunConfig, Severity};
pub use run::{run, Outcome, Status, Summary, SweepRow};
pub use table::{Cell, Table};
