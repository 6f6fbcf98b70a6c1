use gfic_alt::AltError;
use gfic_dpanel::DpanelError;
use gfic_inference::InferenceError;
use gfic_mc::McError;
use gfic_panel::PanelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("`replicate cigarettes` needs the cigarette panel: pass --data <csv> (the data is not bundled)")]
    MissingDataset,
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::MissingDataset => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<PanelError> for CliError {
    fn from(e: PanelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DpanelError> for CliError {
    fn from(e: DpanelError) -> Self {
        match e {
            DpanelError::Panel(p) => p.into(),
            DpanelError::InvalidCandidate(_) => CliError::Config(e.to_string()),
            DpanelError::TooFewPeriods { .. } => CliError::Data(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<AltError> for CliError {
    fn from(e: AltError) -> Self {
        match e {
            AltError::Dpanel(d) => d.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::InvalidAlpha(_) | InferenceError::TooFewDraws { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::InvalidDesign(_) | McError::UnknownDesign(_) => {
                CliError::Config(e.to_string())
            }
            McError::Io(_) | McError::Csv(_) | McError::Json(_) => CliError::Data(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
