use std::fmt;
use std::process::ExitCode;

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    /// Reading or writing a file failed.
    Io = 1,
    /// Input could not be parsed or is otherwise invalid.
    Input = 2,
    /// Inputs are individually valid but inconsistent with each other.
    Contract = 3,
}

impl From<Exit> for ExitCode {
    fn from(exit: Exit) -> Self {
        ExitCode::from(exit as u8)
    }
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(exit: Exit, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            exit,
            error: error.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub trait OrExit<T> {
    fn or_exit(self, exit: Exit) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, exit: Exit) -> CmdResult<T> {
        self.map_err(|e| Failure::new(exit, e))
    }
}

pub fn fail<T>(exit: Exit, message: impl fmt::Display) -> CmdResult<T> {
    Err(Failure::new(exit, anyhow::anyhow!("{message}")))
}
