use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use peskin_core::PeskinError;
use thiserror::Error;

/// Process exit statuses. The numbering is stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Status {
    Ok = 0,
    VerificationFailed = 1,
    Usage = 2,
    Config = 3,
    Io = 4,
    Geometry = 10,
    TensionDomain = 11,
    StepRejected = 12,
    InsufficientDecay = 13,
    IllConditioned = 14,
}

impl Status {
    pub const ALL: [Status; 10] = [
        Status::Ok,
        Status::VerificationFailed,
        Status::Usage,
        Status::Config,
        Status::Io,
        Status::Geometry,
        Status::TensionDomain,
        Status::StepRejected,
        Status::InsufficientDecay,
        Status::IllConditioned,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn describe(self) -> &'static str {
        match self {
            Status::Ok => "success",
            Status::VerificationFailed => "a verification report did not pass",
            Status::Usage => "bad command line",
            Status::Config => "unreadable or invalid configuration",
            Status::Io => "filesystem error",
            Status::Geometry => "curve too close to self-intersection",
            Status::TensionDomain => "stretch outside the law's interval or law violates positivity",
            Status::StepRejected => "blow-up guard rejected a step",
            Status::InsufficientDecay => "trajectory too short to fit a decay rate",
            Status::IllConditioned => "ill-conditioned mode-pair eigenvectors",
        }
    }
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s.code())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Model(#[from] PeskinError),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn status(&self) -> Status {
        match self {
            CliError::Config(_) => Status::Config,
            CliError::Io { .. } => Status::Io,
            CliError::Verification(_) => Status::VerificationFailed,
            CliError::Model(e) => model_status(e),
        }
    }
}

pub fn model_status(e: &PeskinError) -> Status {
    match e {
        PeskinError::Geometry { .. } => Status::Geometry,
        PeskinError::TensionDomain(_) => Status::TensionDomain,
        PeskinError::StepRejected { .. } => Status::StepRejected,
        PeskinError::InsufficientDecay { .. } => Status::InsufficientDecay,
        PeskinError::IllConditioned(_) => Status::IllConditioned,
        PeskinError::InvalidInput(_) => Status::Config,
    }
}

/// The exit-code table as printed by `peskin exit-codes`.
pub fn table() -> String {
    Status::ALL
        .iter()
        .map(|s| format!("{:>3}  {}\n", s.code(), s.describe()))
        .collect()
}
