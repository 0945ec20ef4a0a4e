use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Breakpoint,
    DataBreakpoint,
    Exception,
    Syscall,
    Halt,
    PortOutput,
    PortInputRequest,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Breakpoint => "breakpoint",
            EventKind::DataBreakpoint => "data_breakpoint",
            EventKind::Exception => "exception",
            EventKind::Syscall => "syscall",
            EventKind::Halt => "halt",
            EventKind::PortOutput => "port_output",
            EventKind::PortInputRequest => "port_input_request",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Note,
    Warning,
    Error,
    Fatal,
}

impl Severity {
    pub fn name(self) -> &'static str {
        match self {
            Severity::Note => "note",
            Severity::Warning => "warning",
            Severity::Error => "error",
            Severity::Fatal => "fatal",
        }
    }

    pub fn parse(s: &str) -> Option<Severity> {
        match s {
            "note" => Some(Severity::Note),
            "warning" => Some(Severity::Warning),
            "error" => Some(Severity::Error),
            "fatal" => Some(Severity::Fatal),
            _ => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exception number raised for target breaks the debugger did not register.
pub const UNHANDLED_BP: i64 = 5067;
/// Hardware handle reported when the cycle counter rolls over with the break armed.
pub const CYCCNT_EXPIRED: u64 = 2415919104;
/// Raised when execution reaches an empty program-memory slot.
pub const ILLEGAL_INSTRUCTION: i64 = 5001;
/// Raised when a file-backed input port runs out of lines.
pub const PORT_EOF: i64 = 5002;

/// A stop cause flowing from a core to the kernel and on to callbacks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetEvent {
    pub kind: EventKind,
    pub processor: String,
    /// Breakpoint id, hardware handle, syscall immediate or port register index.
    pub handle: u64,
    pub errnum: i64,
    pub severity: Severity,
    pub errstr: String,
    pub cycle_stamp: u32,
    pub payload: Vec<u64>,
}

impl TargetEvent {
    pub(crate) fn new(kind: EventKind, processor: &str, handle: u64, cycle_stamp: u32) -> Self {
        TargetEvent {
            kind,
            processor: processor.to_string(),
            handle,
            errnum: 0,
            severity: Severity::Note,
            errstr: String::new(),
            cycle_stamp,
            payload: Vec::new(),
        }
    }

    pub(crate) fn exception(
        processor: &str,
        errnum: i64,
        severity: Severity,
        errstr: String,
        cycle_stamp: u32,
    ) -> Self {
        TargetEvent {
            errnum,
            severity,
            errstr,
            ..TargetEvent::new(EventKind::Exception, processor, 0, cycle_stamp)
        }
    }

    pub(crate) fn with_payload(mut self, payload: Vec<u64>) -> Self {
        self.payload = payload;
        self
    }
}

impl fmt::Display for TargetEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} cycle={}", self.kind.name(), self.processor, self.cycle_stamp)?;
        match self.kind {
            EventKind::Exception => {
                write!(f, " errnum={} severity={} errstr={:?}", self.errnum, self.severity, self.errstr)
            }
            _ => {
                write!(f, " handle={}", self.handle)?;
                for p in &self.payload {
                    write!(f, " {p}")?;
                }
                Ok(())
            }
        }
    }
}
