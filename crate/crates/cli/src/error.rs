use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config, descriptor or parameter.
    #[error("{0}")]
    Validation(String),
    /// An operator outside the unit ball, a non-unitary conjugation operand
    /// or a member that is not bounded below.
    #[error("numeric contract violated: {0}")]
    Contract(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Contract(_) => 3,
        }
    }
}

impl From<uec_core::Error> for CliError {
    fn from(e: uec_core::Error) -> Self {
        use uec_core::Error as E;
        match e {
            E::OutsideUnitBall { .. } | E::NotUnitary { .. } | E::NotBoundedBelow { .. } => {
                CliError::Contract(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}
