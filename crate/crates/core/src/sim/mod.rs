//! Circuit and machine-code layers: the lx16 processor model.

mod core;
pub mod event;
pub mod isa;
pub mod regs;

use std::fmt;
use std::path::Path;

use thiserror::Error;

pub use self::core::{
    Direction, Endpoint, PortBinding, ProcessorCore, RunOutcome, CYCLEC_BREAK_BIT, PMEM_SIZE, WORD_SIZE,
    YMEM_SIZE,
};
pub use event::{EventKind, Severity, TargetEvent};

use crate::eval::fixed::Personality;

/// Registered processor models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Integer personality.
    Lx16i,
    /// Fractional (Q15) personality.
    Lx16f,
}

impl Model {
    pub const ALL: [Model; 2] = [Model::Lx16i, Model::Lx16f];

    pub fn name(self) -> &'static str {
        match self {
            Model::Lx16i => "lx16i",
            Model::Lx16f => "lx16f",
        }
    }

    pub fn lookup(name: &str) -> Option<Model> {
        Model::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn personality(self) -> Personality {
        match self {
            Model::Lx16i => Personality::Integer,
            Model::Lx16f => Personality::Fractional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Sim,
    Emu,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sim => "sim",
            Mode::Emu => "emu",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "sim" => Some(Mode::Sim),
            "emu" => Some(Mode::Emu),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunState {
    Stopped,
    Runnable,
    Halted,
}

impl RunState {
    pub fn name(self) -> &'static str {
        match self {
            RunState::Stopped => "stopped",
            RunState::Runnable => "runnable",
            RunState::Halted => "halted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Pmem,
    Ymem,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Pmem => "pmem",
            Space::Ymem => "ymem",
        }
    }

    pub fn parse(s: &str) -> Option<Space> {
        match s {
            "pmem" => Some(Space::Pmem),
            "ymem" => Some(Space::Ymem),
            _ => None,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    Exec,
    Read,
    Write,
}

impl Access {
    pub fn name(self) -> &'static str {
        match self {
            Access::Exec => "exec",
            Access::Read => "read",
            Access::Write => "write",
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown model \"{0}\"")]
    UnknownModel(String),
    #[error("unknown register \"{0}\"")]
    UnknownRegister(String),
    #[error("register \"{0}\" is hidden")]
    HiddenRegister(String),
    #[error("duplicate register \"{0}\"")]
    DuplicateRegister(String),
    #[error("register width {0} out of range")]
    BadWidth(u32),
    #[error("address out of range: {space} {addr}")]
    AddressOutOfRange { space: Space, addr: usize },
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{0} is not word addressable")]
    NotWordAddressable(Space),
    #[error("processor {0} is halted")]
    Halted(String),
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("\"{0}\" is not a port register")]
    NotAPort(String),
    #[error("data breakpoints take read or write access")]
    BadAccess,
    #[error("unknown reflection kind \"{0}\"")]
    UnknownReflection(String),
    #[error("bad port data \"{0}\"")]
    BadPortData(String),
    #[error("cannot open {path}: {source}")]
    File { path: String, source: std::io::Error },
}

impl SimError {
    pub(crate) fn file(path: &Path, source: std::io::Error) -> Self {
        SimError::File { path: path.display().to_string(), source }
    }
}
