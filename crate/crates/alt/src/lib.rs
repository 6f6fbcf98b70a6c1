//! Competing selection rules for the dynamic panel: the Andrews-Lu model and
//! moment selection criteria built on two-step efficient GMM J statistics,
//! and a downward sequence of J-tests.

mod j;
mod mmsc;

pub use j::{downward_j_test, downward_select, gmm_j, j_statistic, DownwardJ, JResult};
pub use mmsc::{mmsc, mmsc_select, MmscFlavor};

use gfic_dpanel::DpanelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AltError {
    #[error(transparent)]
    Dpanel(#[from] DpanelError),
    #[error("singular second-step weight for `{label}`: {detail}")]
    SingularWeight { label: String, detail: String },
    #[error("invalid sample size {n} for {flavor}: need n >= {need}")]
    InvalidSampleSize {
        n: usize,
        flavor: MmscFlavor,
        need: usize,
    },
    #[error("no candidates given")]
    EmptyCandidates,
}
