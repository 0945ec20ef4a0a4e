//! The debugger kernel: connected cores, breakpoint registrations, the
//! current-processor stack, and the command and callback paths.

mod commands;
mod exec;

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;

use indexmap::IndexMap;
use serde_json::Value as Json;

use crate::eval::Targets;
use crate::lang::{CmdResult, Flow, Interp, Output};
use crate::sim::{Access, ProcessorCore};

pub use exec::StopInfo;

/// Cycle budget of one background slice.
pub const SLICE_CYCLES: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Pmem(u32),
    Ymem(u32),
    Cycle(u64),
}

impl Location {
    pub fn describe(&self) -> String {
        match self {
            Location::Pmem(a) => format!("pmem:{a}"),
            Location::Ymem(a) => format!("ymem:{a}"),
            Location::Cycle(c) => format!("cycle:{c}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Registration {
    pub id: u64,
    pub core: String,
    pub location: Location,
    pub access: Access,
    pub callback: String,
    pub enabled: bool,
}

/// One active callback dispatch.
#[derive(Debug)]
pub(crate) struct CallbackCtx {
    pub core: String,
    pub resumed: bool,
}

#[derive(Default)]
pub struct Kernel {
    pub cores: IndexMap<String, ProcessorCore>,
    current: Vec<String>,
    default_core: Option<String>,
    bps: IndexMap<u64, Registration>,
    next_bp: u64,
    excepts: HashMap<i64, String>,
    syscalls: HashMap<u64, String>,
    background: Vec<String>,
    ctx: Vec<CallbackCtx>,
    stops: HashMap<String, StopInfo>,
    log: Vec<String>,
    log_file: Option<File>,
    /// Event messages for service subscribers; only collected when enabled.
    notices: Vec<Json>,
    pub collect_notices: bool,
}

impl Targets for Kernel {
    fn core(&self, instance: &str) -> Option<&ProcessorCore> {
        self.cores.get(instance)
    }

    fn core_mut(&mut self, instance: &str) -> Option<&mut ProcessorCore> {
        self.cores.get_mut(instance)
    }

    fn running(&self, instance: &str) -> bool {
        self.background.iter().any(|b| b == instance)
    }
}

impl Kernel {
    pub fn new() -> Self {
        Kernel { next_bp: 1, ..Default::default() }
    }

    /// The current processor: innermost instance prefix, else the default.
    pub fn current(&self) -> Option<&str> {
        self.current.last().or(self.default_core.as_ref()).map(String::as_str)
    }

    pub(crate) fn current_or_err(&self) -> Result<String, Flow> {
        self.current().map(str::to_string).ok_or_else(|| Flow::error("no current processor"))
    }

    pub(crate) fn core_ref(&self, inst: &str) -> Result<&ProcessorCore, Flow> {
        self.cores.get(inst).ok_or_else(|| Flow::Error(format!("unknown instance \"{inst}\"")))
    }

    pub(crate) fn core_mut_checked(&mut self, inst: &str) -> Result<&mut ProcessorCore, Flow> {
        if self.running(inst) {
            return Err(Flow::error("processor running"));
        }
        self.cores.get_mut(inst).ok_or_else(|| Flow::Error(format!("unknown instance \"{inst}\"")))
    }

    pub fn registrations(&self) -> impl Iterator<Item = &Registration> {
        self.bps.values()
    }

    pub fn is_background(&self, inst: &str) -> bool {
        self.running(inst)
    }

    pub fn background_count(&self) -> usize {
        self.background.len()
    }

    pub fn last_stop(&self, inst: &str) -> Option<&StopInfo> {
        self.stops.get(inst)
    }

    /// Appends a line to the kernel event log (and the `--log` file, if any).
    pub fn log_line(&mut self, line: String) {
        if let Some(f) = self.log_file.as_mut() {
            let _ = writeln!(f, "{line}");
        }
        self.log.push(line);
    }

    pub fn event_log(&self) -> &[String] {
        &self.log
    }

    pub fn clear_event_log(&mut self) {
        self.log.clear();
    }

    pub fn set_log_file(&mut self, file: File) {
        self.log_file = Some(file);
    }

    pub fn take_notices(&mut self) -> Vec<Json> {
        std::mem::take(&mut self.notices)
    }
}

/// Queues an event message, first flushing captured output so ordering holds.
pub(crate) fn notify(i: &mut Interp<Kernel>, msg: Json) {
    if !i.host.collect_notices {
        return;
    }
    flush_output(i);
    i.host.notices.push(msg);
}

/// Moves captured interpreter output into an `output` event.
pub fn flush_output(i: &mut Interp<Kernel>) {
    if !i.host.collect_notices {
        return;
    }
    let text = i.take_output();
    if !text.is_empty() {
        i.host.notices.push(serde_json::json!({"event": "output", "text": text}));
    }
}

/// Builds an interpreter with every debugger primitive registered.
pub fn new_interp() -> Interp<Kernel> {
    let mut i = Interp::new(Kernel::new());
    commands::register(&mut i);
    i.set_unknown(commands::unknown);
    i
}

/// Builds an interpreter that captures stdout for the caller to drain.
pub fn new_capturing_interp() -> Interp<Kernel> {
    let mut i = new_interp();
    i.out = Output::Capture(String::new());
    i
}

/// Runs one round of background slices; returns true if any core is still in the background.
pub fn tick(i: &mut Interp<Kernel>) -> Result<bool, Flow> {
    exec::tick_background(i)?;
    Ok(!i.host.background.is_empty())
}

pub(crate) fn ok_empty() -> CmdResult {
    Ok(String::new())
}

#[cfg(test)]
mod tests;
