use std::fmt;

use ga3ph_core::Error as CoreError;

use crate::text::ParseError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Anything not covered below (I/O on output files, internal failures).
    pub const FAILURE: i32 = 1;
    /// Bad arguments, configuration, netlist or model text.
    pub const PARSE: i32 = 2;
    pub const ALGEBRAIC_LOOP: i32 = 3;
    /// Inadmissible Q, unstable plant, or a design that fails its check.
    pub const REJECTED: i32 = 4;
    pub const DIVERGED: i32 = 5;
    pub const IMPROPER: i32 = 6;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    pub fn new(code: i32, msg: impl Into<String>) -> Self {
        CliError {
            code,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl std::error::Error for CliError {}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::new(exit::PARSE, e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::InvalidNetlist(_)
            | CoreError::Singular { .. }
            | CoreError::InvalidParameter(_)
            | CoreError::BadPrewarp { .. } => exit::PARSE,
            CoreError::AlgebraicLoop | CoreError::ZeroDivisor { .. } => exit::ALGEBRAIC_LOOP,
            CoreError::PlantNotStable { .. }
            | CoreError::QNotAdmissible { .. }
            | CoreError::DegeneratePlant
            | CoreError::NotSymmetric { .. } => exit::REJECTED,
            CoreError::Diverged { .. } => exit::DIVERGED,
            CoreError::NotRealizable { .. } => exit::IMPROPER,
            CoreError::NoRoots | CoreError::ZeroPolynomial | CoreError::DivByZero => exit::FAILURE,
        };
        CliError::new(code, e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_codes() {
        for (e, code) in [
            (CoreError::AlgebraicLoop, exit::ALGEBRAIC_LOOP),
            (CoreError::DegeneratePlant, exit::REJECTED),
            (CoreError::InvalidParameter(String::from("x")), exit::PARSE),
            (CoreError::NoRoots, exit::FAILURE),
        ] {
            assert_eq!(CliError::from(e).code, code);
        }
        assert_eq!(CliError::from(ParseError::new("x")).code, exit::PARSE);
    }
}
