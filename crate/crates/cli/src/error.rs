use std::fmt;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Usage = 1,
    Data = 2,
    Numerical = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: ExitCode::Usage, message: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self { code: ExitCode::Data, message: msg.into() }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Self { code: ExitCode::Numerical, message: msg.into() }
    }

    pub fn context(self, what: &str) -> Self {
        Self { message: format!("{what}: {}", self.message), ..self }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<mapvol::Error> for CliError {
    fn from(e: mapvol::Error) -> Self {
        use mapvol::Error as E;
        let code = match &e {
            E::Io(_) | E::Csv(_) | E::Data(_) => ExitCode::Data,
            E::InvalidArgument(_) => ExitCode::Usage,
            E::Constraint(_)
            | E::InvalidState { .. }
            | E::Optimizer(_)
            | E::SingularHessian(_)
            | E::Precondition(_) => ExitCode::Numerical,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::data(format!("json error: {e}"))
    }
}
