use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("numerical halt: {0}")]
    Halt(String),

    /// The step was refused before anything blew up.
    #[error("numerical halt: {0}")]
    Refused(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Solver(axicyl::Error),
}

impl From<axicyl::Error> for CliError {
    fn from(e: axicyl::Error) -> Self {
        use axicyl::Error as E;
        match e {
            E::InvalidGrid(_) | E::InvalidParameter(_) | E::SupportOutsideDomain(_) | E::BadWindow { .. } => {
                CliError::Config(e.to_string())
            }
            E::BlowUp { .. } | E::PicardDivergence { .. } => CliError::Halt(e.to_string()),
            E::CflViolation { .. } => CliError::Refused(e.to_string()),
            E::Io(io) => CliError::Io(io),
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Halt(_) | CliError::Refused(_) => 3,
            CliError::Io(_) => 4,
            CliError::Solver(_) => 1,
        }
    }

    /// Manifest status for a run that ended with this error.
    pub fn status(&self) -> &'static str {
        match self {
            CliError::Halt(_) => "halted_blowup",
            _ => "failed",
        }
    }
}
