use std::fmt;
use std::path::Path;

use mwforge_core::atom::AtomError;
use mwforge_core::compiler::CompileError;
use mwforge_core::dds::DdsError;
use mwforge_core::noise::NoiseError;
use mwforge_core::rf::RfError;

pub const PARSE: u8 = 1;
pub const SEMANTIC: u8 = 2;
pub const CAPACITY: u8 = 3;
pub const NUMERIC: u8 = 4;
pub const IO: u8 = 5;

/// Error carrying its process exit code. The message is prefixed with the
/// module that raised it.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(IO, format!("io: {}: {err}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        let code = match &e {
            CompileError::Syntax(_) => PARSE,
            CompileError::Semantic(_) => SEMANTIC,
            CompileError::ProfileOverflow { .. } | CompileError::Capacity { .. } => CAPACITY,
        };
        Self::new(code, format!("compiler: {e}"))
    }
}

impl From<DdsError> for Failure {
    fn from(e: DdsError) -> Self {
        let code = match &e {
            DdsError::UnvalidatedSchedule(_) => SEMANTIC,
            DdsError::CapacityExceeded { .. } => CAPACITY,
            DdsError::MalformedTable(_) => PARSE,
            _ => NUMERIC,
        };
        Self::new(code, format!("dds: {e}"))
    }
}

impl From<RfError> for Failure {
    fn from(e: RfError) -> Self {
        let code = match &e {
            RfError::InsufficientLength { .. } => NUMERIC,
            RfError::InvalidConfig(_) => SEMANTIC,
        };
        Self::new(code, format!("rf: {e}"))
    }
}

impl From<NoiseError> for Failure {
    fn from(e: NoiseError) -> Self {
        use NoiseError::*;
        let code = match &e {
            EmptyTable | TooFewPoints | NonMonotonicFrequency { .. } | MalformedTable(_) => PARSE,
            InvalidConfig(_) | KindMismatch => SEMANTIC,
            RangeOutsideTable { .. }
            | InvalidBand { .. }
            | InvalidFactor(_)
            | DisjointRanges
            | NyquistViolation { .. } => NUMERIC,
            Io(_) => IO,
        };
        Self::new(code, format!("noise: {e}"))
    }
}

impl From<AtomError> for Failure {
    fn from(e: AtomError) -> Self {
        let code = match &e {
            AtomError::InvalidDrive(_) => SEMANTIC,
            AtomError::StepTooLarge { .. } | AtomError::UndefinedMixingAngle { .. } => NUMERIC,
        };
        Self::new(code, format!("atom: {e}"))
    }
}
