use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(rabi_quench::Error),
    /// One or more checks of `verify` failed.
    #[error("{0} invariant check(s) failed")]
    Verification(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) | CliError::Verification(_) => 2,
        }
    }
}

impl From<rabi_quench::Error> for CliError {
    fn from(e: rabi_quench::Error) -> Self {
        use rabi_quench::Error as E;
        match e {
            E::InvalidSpec(_)
            | E::InvalidCoupling(_)
            | E::InvalidConfig(_)
            | E::InvalidDispersion(_)
            | E::InvalidModel(_)
            | E::InvalidScheme(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
