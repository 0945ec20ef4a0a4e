//! Running cores and dispatching their events to callbacks.

use serde_json::json;

use super::{notify, CallbackCtx, Kernel, Location, SLICE_CYCLES};
use crate::lang::{parse_int, split_list, Flow, Interp};
use crate::sim::{Direction, Endpoint, EventKind, RunOutcome, RunState, Severity, TargetEvent};

/// Why a core stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopInfo {
    pub instance: String,
    pub pc: u32,
    /// `breakpoint`, `data_breakpoint`, `cycle_breakpoint`, `exception`, `syscall`,
    /// `halt`, `step`, `interrupted` or `port`.
    pub reason: String,
    pub bp: Option<u64>,
    pub detail: String,
}

impl StopInfo {
    pub fn render(&self) -> String {
        let mut s = format!("stopped {} pc={} {}", self.instance, self.pc, self.reason);
        if let Some(bp) = self.bp {
            s.push_str(&format!(" {bp}"));
        }
        if !self.detail.is_empty() {
            s.push(' ');
            s.push_str(&self.detail);
        }
        s
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum RunMode {
    Resume,
    Steps(u64),
}

struct Break {
    reason: String,
    bp: Option<u64>,
    detail: String,
}

impl Break {
    fn new(reason: &str, bp: Option<u64>, detail: impl Into<String>) -> Self {
        Break { reason: reason.to_string(), bp, detail: detail.into() }
    }
}

fn log_slice(k: &mut Kernel, inst: &str, out: &RunOutcome) {
    k.log_line(format!("slice {inst} executed={} cycles={}", out.executed, out.cycles));
}

/// Runs `inst` on the command path until it stops; returns the stop text.
pub(crate) fn run_foreground(i: &mut Interp<Kernel>, inst: &str, mode: RunMode) -> Result<String, Flow> {
    let k = &mut i.host;
    match k.core_ref(inst)?.run_state() {
        RunState::Halted => return Err(Flow::Error(format!("processor {inst} halted"))),
        _ if k.is_background(inst) => return Err(Flow::error("processor running")),
        _ => {}
    }
    k.cores[inst].set_run_state(RunState::Runnable);
    if mode == RunMode::Resume {
        k.log_line(format!("resume {inst}"));
    }
    let mut remaining = match mode {
        RunMode::Steps(n) => n,
        RunMode::Resume => 0,
    };
    loop {
        let core = &mut i.host.cores[inst];
        let out = match mode {
            RunMode::Resume => core.run_slice(SLICE_CYCLES),
            RunMode::Steps(_) => core.step(remaining),
        }
        .map_err(|e| Flow::Error(e.to_string()))?;
        if mode == RunMode::Resume {
            log_slice(&mut i.host, inst, &out);
        }
        remaining = remaining.saturating_sub(out.executed);
        if !out.events.is_empty() {
            if let Some(b) = dispatch(i, inst, out.events)? {
                return Ok(finish_stop(i, inst, b));
            }
            if i.host.cores[inst].run_state() == RunState::Halted {
                return Ok(finish_stop(i, inst, Break::new("halt", None, "")));
            }
        }
        match mode {
            RunMode::Steps(_) if remaining == 0 => {
                let core = &mut i.host.cores[inst];
                core.set_run_state(RunState::Stopped);
                let info = StopInfo {
                    instance: inst.to_string(),
                    pc: core.pc(),
                    reason: "step".into(),
                    bp: None,
                    detail: String::new(),
                };
                let text = info.render();
                i.host.stops.insert(inst.to_string(), info);
                return Ok(text);
            }
            RunMode::Resume => tick_background(i)?,
            _ => {}
        }
    }
}

/// Records a stop, logs it and emits the `stopped` event.
fn finish_stop(i: &mut Interp<Kernel>, inst: &str, b: Break) -> String {
    let core = &mut i.host.cores[inst];
    if core.run_state() != RunState::Halted {
        core.set_run_state(RunState::Stopped);
    }
    let info = StopInfo { instance: inst.to_string(), pc: core.pc(), reason: b.reason, bp: b.bp, detail: b.detail };
    let text = info.render();
    i.host.log_line(text.clone());
    let mut msg = json!({"event": "stopped", "processor": inst, "reason": info.reason, "pc": info.pc});
    if let Some(bp) = info.bp {
        msg["bp"] = json!(bp);
    }
    if !info.detail.is_empty() {
        msg["detail"] = json!(info.detail);
    }
    i.host.stops.insert(inst.to_string(), info);
    notify(i, msg);
    text
}

/// One round-robin slice for each background core.
pub(crate) fn tick_background(i: &mut Interp<Kernel>) -> Result<(), Flow> {
    let names = i.host.background.clone();
    for inst in names {
        if !i.host.background.contains(&inst) {
            continue;
        }
        let out = i.host.cores[&inst].run_slice(SLICE_CYCLES).map_err(|e| Flow::Error(e.to_string()))?;
        log_slice(&mut i.host, &inst, &out);
        if out.events.is_empty() {
            continue;
        }
        let stop = dispatch(i, &inst, out.events)?;
        let halted = i.host.cores[&inst].run_state() == RunState::Halted;
        if let Some(b) = stop.or_else(|| halted.then(|| Break::new("halt", None, ""))) {
            i.host.background.retain(|b| b != &inst);
            finish_stop(i, &inst, b);
        }
    }
    Ok(())
}

/// Stops a background core at the next instruction boundary.
pub(crate) fn interrupt(i: &mut Interp<Kernel>, inst: &str) {
    if i.host.background.iter().any(|b| b == inst) {
        i.host.background.retain(|b| b != inst);
        finish_stop(i, inst, Break::new("interrupted", None, ""));
    }
}

/// Runs a callback on the callback path. Returns whether it scheduled resume.
fn run_callback(
    i: &mut Interp<Kernel>,
    inst: &str,
    callback: &str,
    args: &[String],
    fields: &[(&str, String)],
) -> Result<Result<bool, String>, Flow> {
    let words = split_list(callback).unwrap_or_else(|_| vec![callback.to_string()]);
    i.host.ctx.push(CallbackCtx { core: inst.to_string(), resumed: false });
    i.host.current.push(inst.to_string());
    let r = if words.len() == 1 {
        let mut call = words;
        call.extend(args.iter().cloned());
        i.invoke_global(&call)
    } else {
        // multi-command callbacks see their parameters in the global `event` array
        let _ = i.unset_var_global("event");
        for (k, v) in fields {
            let _ = i.set_var_global(&format!("event({k})"), v);
        }
        i.eval_global(callback)
    };
    i.host.current.pop();
    let resumed = i.host.ctx.pop().is_some_and(|c| c.resumed);
    match r {
        Ok(_) | Err(Flow::Return(_)) => Ok(Ok(resumed)),
        Err(Flow::Exit(c)) => Err(Flow::Exit(c)),
        Err(e) => {
            let msg = e.message();
            i.host.log_line(format!("callback-error {inst} {msg}"));
            notify(i, json!({"event": "callback_error", "processor": inst, "error": msg}));
            eprintln!("callback error ({inst}): {msg}");
            Ok(Err(msg))
        }
    }
}

fn cb_detail(r: &Result<bool, String>) -> String {
    match r {
        Err(m) => format!("(callback error: {m})"),
        Ok(_) => String::new(),
    }
}

/// Dispatches every event of one stop in raise order. `None` means continue.
fn dispatch(i: &mut Interp<Kernel>, inst: &str, events: Vec<TargetEvent>) -> Result<Option<Break>, Flow> {
    let mut stop: Option<Break> = None;
    for ev in events {
        let outcome = dispatch_one(i, inst, &ev)?;
        if let (Some(b), None) = (outcome, &stop) {
            stop = Some(b);
        }
    }
    Ok(stop)
}

fn dispatch_one(i: &mut Interp<Kernel>, inst: &str, ev: &TargetEvent) -> Result<Option<Break>, Flow> {
    match ev.kind {
        EventKind::Breakpoint | EventKind::DataBreakpoint => {
            let Some(reg) = i.host.bps.get(&ev.handle).cloned() else {
                return Ok(Some(Break::new(ev.kind.name(), Some(ev.handle), "")));
            };
            let reason = match (&reg.location, ev.kind) {
                (Location::Cycle(_), _) => "cycle_breakpoint",
                (_, EventKind::DataBreakpoint) => "data_breakpoint",
                _ => "breakpoint",
            };
            if matches!(reg.location, Location::Cycle(_)) {
                i.host.bps.shift_remove(&reg.id);
            }
            if reg.callback.is_empty() {
                return Ok(Some(Break::new(reason, Some(reg.id), "")));
            }
            let mut args = vec![reg.id.to_string(), inst.to_string()];
            let mut fields = vec![("id", reg.id.to_string()), ("processor", inst.to_string()), ("kind", reason.to_string())];
            if ev.kind == EventKind::DataBreakpoint {
                let (addr, value) = (ev.payload[0].to_string(), ev.payload[1].to_string());
                args.extend([addr.clone(), value.clone()]);
                fields.extend([("addr", addr), ("value", value)]);
            }
            let r = run_callback(i, inst, &reg.callback, &args, &fields)?;
            Ok((r != Ok(true)).then(|| Break::new(reason, Some(reg.id), cb_detail(&r))))
        }
        EventKind::Exception => {
            let sev = ev.severity;
            let line = format!("exception {inst} {} {} {}", sev.name(), ev.errnum, ev.errstr);
            i.host.log_line(line);
            notify(
                i,
                json!({"event": "exception", "processor": inst, "errnum": ev.errnum,
                       "severity": sev.name(), "errstr": ev.errstr}),
            );
            let detail = format!("{} {}: {}", ev.errnum, sev.name(), ev.errstr);
            let cb = i.host.excepts.get(&ev.errnum).cloned();
            let resumed = match cb {
                Some(cb) => {
                    let args = [ev.errnum.to_string(), sev.name().to_string(), ev.errstr.clone()];
                    let fields = [
                        ("errnum", args[0].clone()),
                        ("severity", args[1].clone()),
                        ("errstr", args[2].clone()),
                        ("processor", inst.to_string()),
                        ("kind", "exception".to_string()),
                    ];
                    let r = run_callback(i, inst, &cb, &args, &fields)?;
                    if let Err(m) = &r {
                        return Ok(Some(Break::new("exception", None, format!("{detail} (callback error: {m})"))));
                    }
                    r == Ok(true)
                }
                None => {
                    eprintln!("{inst}: {} {}: {}", sev.name(), ev.errnum, ev.errstr);
                    sev <= Severity::Warning
                }
            };
            Ok((!resumed || sev == Severity::Fatal).then(|| Break::new("exception", None, detail)))
        }
        EventKind::Syscall => {
            let code = ev.payload.first().copied().unwrap_or(0);
            let Some(cb) = i.host.syscalls.get(&code).cloned() else {
                return Ok(Some(Break::new("syscall", None, code.to_string())));
            };
            let fields = [("code", code.to_string()), ("processor", inst.to_string()), ("kind", "syscall".into())];
            let r = run_callback(i, inst, &cb, &[], &fields)?;
            Ok((r != Ok(true)).then(|| Break::new("syscall", None, format!("{code} {}", cb_detail(&r)).trim().to_string())))
        }
        EventKind::Halt => Ok(Some(Break::new("halt", None, ""))),
        EventKind::PortOutput => {
            let port = port_name(i, inst, ev.handle);
            let Some(Endpoint::Procedure(p)) = binding(i, inst, &port, Direction::Sink) else {
                return Ok(Some(Break::new("port", None, port)));
            };
            let value = ev.payload.first().copied().unwrap_or(0).to_string();
            let args = [inst.to_string(), port.clone(), value];
            let r = run_callback(i, inst, &p, &args, &[])?;
            Ok(r.err().map(|m| Break::new("port", None, format!("{port} (callback error: {m})"))))
        }
        EventKind::PortInputRequest => {
            let port = port_name(i, inst, ev.handle);
            let Some(Endpoint::Procedure(p)) = binding(i, inst, &port, Direction::Source) else {
                return Ok(Some(Break::new("port", None, port)));
            };
            let words = vec![p.clone(), inst.to_string(), port.clone()];
            i.host.ctx.push(CallbackCtx { core: inst.to_string(), resumed: false });
            i.host.current.push(inst.to_string());
            let r = i.invoke_global(&words);
            i.host.current.pop();
            i.host.ctx.pop();
            let value = match r {
                Ok(v) | Err(Flow::Return(v)) => v,
                Err(Flow::Exit(c)) => return Err(Flow::Exit(c)),
                Err(e) => return Ok(Some(Break::new("port", None, format!("{port} (callback error: {})", e.message())))),
            };
            let Some(v) = parse_int(&value) else {
                let m = format!("{port} (bad input value \"{value}\")");
                return Ok(Some(Break::new("port", None, m)));
            };
            i.host.cores[inst].supply_input(&port, v as u64).map_err(|e| Flow::Error(e.to_string()))?;
            Ok(None)
        }
    }
}

fn port_name(i: &Interp<Kernel>, inst: &str, id: u64) -> String {
    i.host.cores[inst].registers().get(id as usize).map(|r| r.name.clone()).unwrap_or_default()
}

fn binding(i: &Interp<Kernel>, inst: &str, port: &str, dir: Direction) -> Option<Endpoint> {
    i.host.cores[inst].binding(port, dir).map(|b| b.endpoint.clone())
}
