use std::fmt::Display;
use std::path::Path;

use tap_core::analytics::AnalyticsError;
use tap_core::dynamics::DynamicsError;
use tap_core::export::ExportError;
use tap_core::graph::GraphError;
use tap_core::similarity::SimilarityError;
use tap_core::synth::SynthError;
use tap_core::tilt::TiltError;

/// Exit 2 for `Usage`, exit 1 for `Data`.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data { kind: &'static str, message: String },
}

impl CliError {
    pub fn data(kind: &'static str, message: impl Display) -> Self {
        CliError::Data { kind, message: message.to_string() }
    }

    pub fn io(path: &Path, err: impl Display) -> Self {
        CliError::data("io", format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data { .. } => 1,
        }
    }

    /// `error<TAB>kind=..<TAB>message=..` on one line.
    pub fn line(&self) -> String {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.as_str()),
            CliError::Data { kind, message } => (*kind, message.as_str()),
        };
        let message: String = message.chars().map(|c| if c == '\t' || c == '\n' { ' ' } else { c }).collect();
        format!("error\tkind={kind}\tmessage={message}")
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

impl From<TiltError> for CliError {
    fn from(e: TiltError) -> Self {
        CliError::data("document", e)
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::data("graph", e)
    }
}

impl From<SimilarityError> for CliError {
    fn from(e: SimilarityError) -> Self {
        CliError::data("linkage", e)
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        CliError::data("analytics", e)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::data("synth", e)
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        CliError::data("dynamics", e)
    }
}

impl From<ExportError> for CliError {
    fn from(e: ExportError) -> Self {
        CliError::data("export", e)
    }
}
