use std::fmt;
use std::process::ExitCode;

use fracwave_core::Error as CoreError;

/// Result of a subcommand, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Pass,
    AssertionFailure,
    Usage,
    NonConvergence,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::AssertionFailure => 1,
            Outcome::Usage => 2,
            Outcome::NonConvergence => 3,
        }
    }

    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::AssertionFailure
        }
    }

    /// The more severe of the two.
    pub fn and(self, other: Outcome) -> Outcome {
        self.max(other)
    }
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> Self {
        ExitCode::from(o.code())
    }
}

#[derive(Debug)]
pub enum HarnessError {
    /// Bad flags, configuration or inputs.
    Usage(String),
    /// A checked property or data assumption does not hold.
    Assertion(String),
    /// A numerical method failed to converge.
    NonConvergence(String),
    Io(std::io::Error),
}

impl HarnessError {
    pub fn outcome(&self) -> Outcome {
        match self {
            HarnessError::Usage(_) | HarnessError::Io(_) => Outcome::Usage,
            HarnessError::Assertion(_) => Outcome::AssertionFailure,
            HarnessError::NonConvergence(_) => Outcome::NonConvergence,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Usage(m) => write!(f, "usage: {m}"),
            HarnessError::Assertion(m) => write!(f, "assertion failed: {m}"),
            HarnessError::NonConvergence(m) => write!(f, "did not converge: {m}"),
            HarnessError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e)
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(std::io::Error::other(e))
    }
}

impl From<CoreError> for HarnessError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Assumption(_) => HarnessError::Assertion(e.to_string()),
            CoreError::Quadrature { .. } => HarnessError::NonConvergence(e.to_string()),
            _ => HarnessError::Usage(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_and_severity() {
        assert_eq!(Outcome::Pass.and(Outcome::AssertionFailure), Outcome::AssertionFailure);
        assert_eq!(Outcome::NonConvergence.and(Outcome::Usage), Outcome::NonConvergence);
        assert_eq!(
            [Outcome::Pass, Outcome::AssertionFailure, Outcome::Usage, Outcome::NonConvergence].map(Outcome::code),
            [0, 1, 2, 3]
        );
    }

    #[test]
    fn core_errors_map_to_exit_classes() {
        let a: HarnessError = CoreError::Assumption("x".into()).into();
        assert_eq!(a.outcome(), Outcome::AssertionFailure);
        let q: HarnessError = CoreError::Quadrature { radius: 1.0, detail: "d".into() }.into();
        assert_eq!(q.outcome(), Outcome::NonConvergence);
        let d: HarnessError = CoreError::Domain("p".into()).into();
        assert_eq!(d.outcome(), Outcome::Usage);
    }
}
