//! Balanced panels: storage, CSV I/O and the transforms the estimators use.
//!
//! Values are stored as `n x T` matrices indexed by individual and period.
//! Periods are 0-based internally; period index `p` is the model
//! `t = p + 1`.

mod dataset;
mod diff;
mod io;
mod project;

pub use dataset::{Control, PanelDataset};
pub use diff::{first_difference, DiffPanel};
pub use io::{load_panel, read_panel, save_panel, write_panel, ColumnSchema};
pub use project::project_out_controls;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-numeric value `{value}` in column `{column}` at data row {row}")]
    NonNumericValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("duplicate cell for id `{id}` at time {time}")]
    DuplicateCell { id: String, time: i64 },
    #[error("unbalanced panel: id `{id}` has no observation at time {time}")]
    UnbalancedPanel { id: String, time: i64 },
    #[error("periods must be contiguous integers; found a gap after {after}")]
    NonContiguousTimes { after: i64 },
    #[error("need at least {need} periods, panel has {got}")]
    TooFewPeriods { need: usize, got: usize },
    #[error("panel has no observations")]
    Empty,
    #[error("no control columns to project out")]
    NoControls,
    #[error("control block is rank deficient: {0}")]
    RankDeficientControls(String),
    #[error("inconsistent dimensions: {0}")]
    Shape(String),
}
