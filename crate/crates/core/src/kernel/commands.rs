//! Debugger primitives registered into the interpreter.

use std::path::Path;

use super::exec::{interrupt, run_foreground, tick_background, RunMode};
use super::{ok_empty, Kernel, Location, Registration};
use crate::eval::ce::{ce_eval, CFormat};
use crate::eval::fxpr::fxpr_eval;
use crate::eval::{read_string, EvalError};
use crate::image::SymbolKind;
use crate::lang::{join_list, parse_int, split_list, wrong_args, CmdFn, CmdResult, Flow, Interp};
use crate::sim::{Access, Direction, Endpoint, Mode, Model, ProcessorCore, RunState, Severity, Space};

type I = Interp<Kernel>;

pub(super) fn register(i: &mut I) {
    let table: [(&str, CmdFn<Kernel>); 34] = [
        ("processor", processor),
        ("configure", configure),
        ("?", query_reflect),
        ("fxpr", fxpr),
        ("ce", ce),
        ("readstring", readstring),
        ("readlong", readlong),
        ("load", load),
        ("reset", reset),
        ("stop", stop),
        ("at", at),
        ("except", except),
        ("clear", clear),
        ("query", query),
        ("enable", |i, a| toggle(i, a, true)),
        ("disable", |i, a| toggle(i, a, false)),
        ("resume", resume),
        ("wait", wait),
        ("halt", halt),
        ("stepi", stepi),
        ("srcfn", |i, a| redirect(i, a, Direction::Source, true)),
        ("sinkfn", |i, a| redirect(i, a, Direction::Sink, true)),
        ("srcfile", |i, a| redirect(i, a, Direction::Source, false)),
        ("sinkfile", |i, a| redirect(i, a, Direction::Sink, false)),
        ("logsigs", logsigs),
        ("pseudoreg", pseudoreg),
        ("syscall", syscall),
        ("send_to_stdout", send_to_stdout),
        ("mem", mem),
        ("addr2line", addr2line),
        ("line2addr", line2addr),
        ("eventlog", eventlog),
        ("raise", raise),
        ("symbols", symbols),
    ];
    for (name, f) in table {
        i.register(name, f);
    }
}

fn err(e: impl std::fmt::Display) -> Flow {
    Flow::Error(e.to_string())
}

fn int_arg(s: &str) -> Result<i64, Flow> {
    parse_int(s).ok_or_else(|| Flow::Error(format!("expected integer but got \"{s}\"")))
}

fn current(i: &I) -> Result<String, Flow> {
    i.host.current_or_err()
}

/// `INSTANCE command ...`: runs the tail with INSTANCE as the current processor.
fn instance_dispatch(i: &mut I, a: &[String]) -> CmdResult {
    if a.len() < 2 {
        return Err(wrong_args(&format!("{} command ?arg ...?", a[0])));
    }
    i.host.current.push(a[0].clone());
    let r = i.invoke(&a[1..]);
    i.host.current.pop();
    r
}

/// Unknown commands are tried as fxpr expressions on the current processor.
pub(super) fn unknown(i: &mut I, words: &[String]) -> CmdResult {
    let unknown = || Flow::Error(format!("unknown command \"{}\"", words[0]));
    let Some(inst) = i.host.current().map(str::to_string) else { return Err(unknown()) };
    match fxpr_eval(&mut i.host, &inst, &words.join(" ")) {
        Ok(v) => Ok(v),
        Err(EvalError::Syntax(_)) => Err(unknown()),
        Err(EvalError::UnknownOperand(op)) if words.len() == 1 && op == words[0] => Err(unknown()),
        Err(e) => Err(err(e)),
    }
}

fn processor(i: &mut I, a: &[String]) -> CmdResult {
    let sub = a.get(1).map(String::as_str).unwrap_or("");
    match (sub, &a[a.len().min(2)..]) {
        ("new", [model, name, rest @ ..]) => {
            let mode = match rest {
                [] => Mode::Sim,
                [m] => Mode::parse(m).ok_or_else(|| Flow::Error(format!("bad mode \"{m}\": should be sim or emu")))?,
                _ => return Err(wrong_args("processor new model name ?sim|emu?")),
            };
            if i.host.cores.contains_key(name.as_str()) {
                return Err(Flow::Error(format!("instance \"{name}\" already exists")));
            }
            if i.has_command(name) {
                return Err(Flow::Error(format!("\"{name}\" is already a command name")));
            }
            let core = ProcessorCore::create(model, name, mode).map_err(err)?;
            i.host.cores.insert(name.clone(), core);
            i.host.default_core = Some(name.clone());
            i.register(name, instance_dispatch);
            Ok(name.clone())
        }
        ("name", []) => current(i),
        ("list", []) => Ok(join_list(&i.host.cores.keys().cloned().collect::<Vec<_>>())),
        ("models", []) => Ok(Model::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(" ")),
        ("mode" | "state", rest) if rest.len() <= 1 => {
            let inst = match rest.first() {
                Some(n) => n.clone(),
                None => current(i)?,
            };
            if i.host.is_background(&inst) {
                return Ok(if sub == "mode" { i.host.cores[&inst].mode().name() } else { "running" }.to_string());
            }
            let core = i.host.core_ref(&inst)?;
            Ok(if sub == "mode" { core.mode().name() } else { core.run_state().name() }.to_string())
        }
        ("disconnect", [name]) => {
            if i.host.cores.shift_remove(name.as_str()).is_none() {
                return Err(Flow::Error(format!("unknown instance \"{name}\"")));
            }
            i.unregister(name);
            let k = &mut i.host;
            k.bps.retain(|_, r| &r.core != name);
            k.background.retain(|b| b != name);
            k.stops.remove(name.as_str());
            if k.default_core.as_ref() == Some(name) {
                k.default_core = k.cores.keys().last().cloned();
            }
            // numbering restarts once the session is empty
            if k.cores.is_empty() {
                k.next_bp = 1;
            }
            ok_empty()
        }
        _ => Err(wrong_args("processor new|name|list|models|mode|state|disconnect ?arg ...?")),
    }
}

fn configure(i: &mut I, a: &[String]) -> CmdResult {
    let [_, opt, value] = a else { return Err(wrong_args("configure -hiddenregisters on|off")) };
    if opt != "-hiddenregisters" {
        return Err(Flow::Error(format!("unknown option \"{opt}\"")));
    }
    let on = match value.as_str() {
        "on" | "1" | "true" => true,
        "off" | "0" | "false" => false,
        _ => return Err(Flow::Error(format!("bad value \"{value}\": should be on or off"))),
    };
    let inst = current(i)?;
    i.host.cores.get_mut(&inst).expect("current exists").set_hidden_visible(on);
    ok_empty()
}

fn query_reflect(i: &mut I, a: &[String]) -> CmdResult {
    let [_, kind] = a else { return Err(wrong_args("? R|M|P|B|W|S")) };
    let inst = current(i)?;
    let core = i.host.core_ref(&inst)?;
    let reflected = |k: &str| core.reflect(k).map_err(err);
    match kind.as_str() {
        "R" => Ok(join_list(&reflected("registers")?)),
        "M" => Ok(join_list(&reflected("memory")?)),
        "P" => Ok(reflected("pcname")?.join(" ")),
        "B" => Ok(reflected("byteorder")?.join(" ")),
        "W" => Ok(reflected("wordsize")?.join(" ")),
        "S" => Ok(symbol_tuples(core, None)),
        _ => Err(Flow::Error(format!("unknown query kind \"{kind}\""))),
    }
}

fn symbol_tuples(core: &ProcessorCore, kind: Option<SymbolKind>) -> String {
    let tuples: Vec<String> = core
        .list_symbols(kind)
        .iter()
        .map(|s| join_list(&[s.name.clone(), s.kind.name().to_string(), s.address.to_string()]))
        .collect();
    join_list(&tuples)
}

fn symbols(i: &mut I, a: &[String]) -> CmdResult {
    let kind = match a.get(1) {
        Some(k) => Some(SymbolKind::parse(k).ok_or_else(|| Flow::Error(format!("unknown symbol kind \"{k}\"")))?),
        None => None,
    };
    let inst = current(i)?;
    Ok(symbol_tuples(i.host.core_ref(&inst)?, kind))
}

fn fxpr(i: &mut I, a: &[String]) -> CmdResult {
    if a.len() < 2 {
        return Err(wrong_args("fxpr expression"));
    }
    let inst = current(i)?;
    fxpr_eval(&mut i.host, &inst, &a[1..].join(" ")).map_err(err)
}

fn ce(i: &mut I, a: &[String]) -> CmdResult {
    let mut words = &a[1..];
    let mut fmt = CFormat::Decimal;
    if let Some(last) = words.last().filter(|w| w.starts_with('%') && words.len() > 1) {
        fmt = CFormat::parse(last).map_err(err)?;
        words = &words[..words.len() - 1];
    }
    if words.is_empty() {
        return Err(wrong_args("ce expression ?%d|%x|%s?"));
    }
    let inst = current(i)?;
    ce_eval(&mut i.host, &inst, &words.join(" "), fmt).map_err(err)
}

/// Parses a `{space addr}` locator given as one list or two words.
fn locator(a: &[String], usage: &str) -> Result<usize, Flow> {
    let words = match a {
        [_, one] => split_list(one).map_err(Flow::Error)?,
        [_, s, addr] => vec![s.clone(), addr.clone()],
        _ => return Err(wrong_args(usage)),
    };
    let [space, addr] = words.as_slice() else { return Err(Flow::Error(format!("bad locator \"{}\"", words.join(" ")))) };
    match Space::parse(space) {
        Some(Space::Ymem) => {}
        Some(Space::Pmem) => return Err(Flow::error("pmem is not word addressable")),
        None => return Err(Flow::Error(format!("bad locator space \"{space}\""))),
    }
    let addr = int_arg(addr)?;
    usize::try_from(addr)
        .ok()
        .filter(|a| *a < crate::sim::YMEM_SIZE)
        .ok_or_else(|| Flow::Error(format!("address out of range: ymem {addr}")))
}

fn readstring(i: &mut I, a: &[String]) -> CmdResult {
    let addr = locator(a, "readstring {ymem addr}")?;
    let inst = current(i)?;
    read_string(i.host.core_ref(&inst)?, addr as i64).map_err(err)
}

fn readlong(i: &mut I, a: &[String]) -> CmdResult {
    let addr = locator(a, "readlong {ymem addr}")?;
    let inst = current(i)?;
    let words = i.host.core_ref(&inst)?.ymem_read(addr, 2).map_err(err)?;
    Ok(((words[1] as u32) << 16 | words[0] as u32).to_string())
}

fn load(i: &mut I, a: &[String]) -> CmdResult {
    let [_, path] = a else { return Err(wrong_args("load file")) };
    let inst = current(i)?;
    let core = i.host.core_mut_checked(&inst)?;
    let image = core.load_image_file(Path::new(path)).map_err(err)?;
    Ok(image.name.clone())
}

fn reset(i: &mut I, a: &[String]) -> CmdResult {
    if a.len() != 1 {
        return Err(wrong_args("reset"));
    }
    let inst = current(i)?;
    i.host.core_mut_checked(&inst)?.reset();
    i.host.stops.remove(&inst);
    ok_empty()
}

/// Resolves a `stop` location on `core`.
fn resolve_location(core: &ProcessorCore, words: &[String], access: Option<Access>) -> Result<Location, Flow> {
    let loc = match words {
        [kw, func] if kw == "in" => {
            let image = core.image().ok_or_else(|| Flow::error("no program image loaded"))?;
            let f = image.function(func).ok_or_else(|| Flow::Error(format!("unknown function \"{func}\"")))?;
            Location::Pmem(f.entry)
        }
        [spec] => {
            if let Some(v) = parse_int(spec) {
                let addr = u32::try_from(v).map_err(|_| Flow::Error(format!("bad address \"{spec}\"")))?;
                if access.is_some() {
                    Location::Ymem(addr)
                } else {
                    Location::Pmem(addr)
                }
            } else if let Some((file, line)) = spec.rsplit_once(':').filter(|(_, l)| l.parse::<u32>().is_ok()) {
                Location::Pmem(core.line_to_addr(file, line.parse().unwrap()).map_err(err)?)
            } else {
                let sym = core.resolve(spec).map_err(err)?;
                let addr = u32::try_from(sym.address).map_err(|_| Flow::Error(format!("bad address for \"{spec}\"")))?;
                match sym.space() {
                    Space::Pmem => Location::Pmem(addr),
                    Space::Ymem => Location::Ymem(addr),
                }
            }
        }
        _ => return Err(wrong_args("stop location ?-read|-write? ?callback?")),
    };
    match (&loc, access) {
        (Location::Pmem(_), Some(_)) => Err(Flow::error("-read/-write need a data location")),
        (Location::Ymem(_), None) => Err(Flow::error("data location needs -read or -write")),
        _ => Ok(loc),
    }
}

fn install(core: &mut ProcessorCore, reg: &Registration) -> Result<(), Flow> {
    match reg.location {
        Location::Pmem(a) => core.set_exec_breakpoint(a, reg.id),
        Location::Ymem(a) => core.set_data_breakpoint(a, reg.access, reg.id),
        Location::Cycle(c) => {
            core.set_cycle_breakpoint(c, reg.id);
            Ok(())
        }
    }
    .map_err(err)
}

fn add_registration(i: &mut I, inst: &str, location: Location, access: Access, callback: String) -> CmdResult {
    let k = &mut i.host;
    let reg = Registration { id: k.next_bp, core: inst.to_string(), location, access, callback, enabled: true };
    install(k.cores.get_mut(inst).expect("checked"), &reg)?;
    k.next_bp += 1;
    let id = reg.id;
    k.bps.insert(id, reg);
    Ok(id.to_string())
}

fn stop(i: &mut I, a: &[String]) -> CmdResult {
    let usage = || wrong_args("stop location ?-read|-write? ?callback?");
    let loc_len = match a.get(1).map(String::as_str) {
        Some("in") => 2,
        Some(_) => 1,
        None => return Err(usage()),
    };
    let loc_words = a.get(1..1 + loc_len).ok_or_else(usage)?;
    let mut rest = &a[1 + loc_len..];
    let access = match rest.first().map(String::as_str) {
        Some("-read") => Some(Access::Read),
        Some("-write") => Some(Access::Write),
        _ => None,
    };
    if access.is_some() {
        rest = &rest[1..];
    }
    let callback = match rest {
        [] => String::new(),
        [cb] => cb.clone(),
        _ => return Err(usage()),
    };
    let inst = current(i)?;
    let location = resolve_location(i.host.core_ref(&inst)?, loc_words, access)?;
    add_registration(i, &inst, location, access.unwrap_or(Access::Exec), callback)
}

fn at(i: &mut I, a: &[String]) -> CmdResult {
    let (cycle, callback) = match a {
        [_, c] => (c, String::new()),
        [_, c, cb] => (c, cb.clone()),
        _ => return Err(wrong_args("at cycle ?callback?")),
    };
    let inst = current(i)?;
    let core = i.host.core_ref(&inst)?;
    if core.mode() == Mode::Emu {
        return Err(Flow::error("cycle breakpoints not integrated in emu mode"));
    }
    let cycle = int_arg(cycle)?;
    if cycle < core.cycles() as i64 {
        return Err(Flow::Error(format!("cycle {cycle} is in the past (now {})", core.cycles())));
    }
    add_registration(i, &inst, Location::Cycle(cycle as u64), Access::Exec, callback)
}

fn except(i: &mut I, a: &[String]) -> CmdResult {
    match a {
        [_, n] => Ok(i.host.excepts.get(&int_arg(n)?).cloned().unwrap_or_default()),
        [_, n, cb] => {
            let n = int_arg(n)?;
            if cb.is_empty() {
                i.host.excepts.remove(&n);
            } else {
                i.host.excepts.insert(n, cb.clone());
            }
            ok_empty()
        }
        _ => Err(wrong_args("except errnum ?callback?")),
    }
}

fn bp_id(k: &Kernel, s: &str) -> Result<u64, Flow> {
    let id = int_arg(s)? as u64;
    if k.bps.contains_key(&id) {
        Ok(id)
    } else {
        Err(Flow::Error(format!("unknown breakpoint {s}")))
    }
}

fn clear(i: &mut I, a: &[String]) -> CmdResult {
    let [_, id] = a else { return Err(wrong_args("clear id")) };
    let id = bp_id(&i.host, id)?;
    let reg = i.host.bps.shift_remove(&id).expect("checked");
    if let Some(core) = i.host.cores.get_mut(&reg.core) {
        core.clear_breakpoint(id);
    }
    ok_empty()
}

fn tuple(r: &Registration) -> String {
    join_list(&[
        r.id.to_string(),
        r.core.clone(),
        r.location.describe(),
        r.access.name().to_string(),
        (r.enabled as u8).to_string(),
    ])
}

fn query(i: &mut I, a: &[String]) -> CmdResult {
    match a {
        [_] => Ok(join_list(&i.host.bps.values().map(tuple).collect::<Vec<_>>())),
        [_, id] => {
            let id = bp_id(&i.host, id)?;
            Ok(tuple(&i.host.bps[&id]))
        }
        _ => Err(wrong_args("query ?id?")),
    }
}

fn toggle(i: &mut I, a: &[String], on: bool) -> CmdResult {
    let [_, id] = a else { return Err(wrong_args(if on { "enable id" } else { "disable id" })) };
    let id = bp_id(&i.host, id)?;
    let k = &mut i.host;
    let reg = k.bps[&id].clone();
    if reg.enabled == on {
        return ok_empty();
    }
    if let Some(core) = k.cores.get_mut(&reg.core) {
        if on {
            install(core, &reg)?;
        } else {
            core.clear_breakpoint(id);
        }
    }
    k.bps[&id].enabled = on;
    ok_empty()
}

fn resume(i: &mut I, a: &[String]) -> CmdResult {
    let background = match a {
        [_] => false,
        [_, amp] if amp == "&" => true,
        _ => return Err(wrong_args("resume ?&?")),
    };
    let inst = current(i)?;
    i.host.core_ref(&inst)?;
    if let Some(ctx) = i.host.ctx.last_mut() {
        if ctx.core != inst {
            return Err(Flow::Error(format!(
                "a callback may only resume its triggering processor \"{}\"",
                ctx.core
            )));
        }
        ctx.resumed = true;
        return ok_empty();
    }
    if background {
        let k = &mut i.host;
        if k.is_background(&inst) {
            return Err(Flow::error("processor running"));
        }
        if k.cores[&inst].run_state() == RunState::Halted {
            return Err(Flow::Error(format!("processor {inst} halted")));
        }
        k.cores[&inst].set_run_state(RunState::Runnable);
        k.background.push(inst.clone());
        k.stops.remove(&inst);
        k.log_line(format!("resume& {inst}"));
        return ok_empty();
    }
    run_foreground(i, &inst, RunMode::Resume)
}

fn wait(i: &mut I, a: &[String]) -> CmdResult {
    let mut names = Vec::new();
    for w in &a[1..] {
        names.extend(split_list(w).map_err(Flow::Error)?);
    }
    for n in &names {
        i.host.core_ref(n)?;
    }
    while names.iter().any(|n| i.host.is_background(n)) {
        tick_background(i)?;
    }
    let mut out = Vec::new();
    for n in names {
        let reason = match (i.host.stops.get(&n), i.host.cores[&n].run_state()) {
            (Some(s), _) => s.reason.clone(),
            (None, RunState::Halted) => "halt".into(),
            (None, _) => "stopped".into(),
        };
        out.push(n);
        out.push(reason);
    }
    Ok(join_list(&out))
}

fn halt(i: &mut I, a: &[String]) -> CmdResult {
    if a.len() != 1 {
        return Err(wrong_args("halt"));
    }
    let inst = current(i)?;
    i.host.core_ref(&inst)?;
    interrupt(i, &inst);
    ok_empty()
}

fn stepi(i: &mut I, a: &[String]) -> CmdResult {
    let n = match a {
        [_] => 1,
        [_, n] => int_arg(n)?,
        _ => return Err(wrong_args("stepi ?count?")),
    };
    if n < 1 {
        return Err(Flow::Error(format!("step count must be positive, got {n}")));
    }
    let inst = current(i)?;
    run_foreground(i, &inst, RunMode::Steps(n as u64))
}

fn redirect(i: &mut I, a: &[String], dir: Direction, procedure: bool) -> CmdResult {
    let [cmd, port, target] = a else {
        return Err(wrong_args(&format!("{} port {}", a[0], if procedure { "procedure" } else { "file" })));
    };
    let endpoint = match (target.is_empty(), procedure) {
        (true, _) => Endpoint::None,
        (false, true) => Endpoint::Procedure(target.clone()),
        (false, false) => Endpoint::File(target.into()),
    };
    let inst = current(i)?;
    i.host.core_mut_checked(&inst)?.bind_port(port, dir, endpoint).map_err(|e| Flow::Error(format!("{cmd}: {e}")))?;
    ok_empty()
}

fn logsigs(i: &mut I, a: &[String]) -> CmdResult {
    let inst = current(i)?;
    let core = i.host.core_mut_checked(&inst)?;
    match a {
        [_, off] if off == "off" => {
            core.stop_logging();
            ok_empty()
        }
        [_, file, regs @ ..] if !regs.is_empty() => {
            let mut names = Vec::new();
            for r in regs {
                names.extend(split_list(r).map_err(Flow::Error)?);
            }
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            core.log_signals(&refs, Path::new(file)).map_err(err)?;
            ok_empty()
        }
        _ => Err(wrong_args("logsigs file register ?register ...? | logsigs off")),
    }
}

fn pseudoreg(i: &mut I, a: &[String]) -> CmdResult {
    let (name, width) = match a {
        [_, n] => (n, 32),
        [_, n, w] => (n, int_arg(w)?),
        _ => return Err(wrong_args("pseudoreg name ?width?")),
    };
    let width = u32::try_from(width).map_err(|_| Flow::Error(format!("bad width {width}")))?;
    let inst = current(i)?;
    i.host.core_mut_checked(&inst)?.add_pseudo_register(name, width).map_err(err)?;
    Ok(name.clone())
}

fn syscall(i: &mut I, a: &[String]) -> CmdResult {
    match a {
        [_, code] => Ok(i.host.syscalls.get(&(int_arg(code)? as u64)).cloned().unwrap_or_default()),
        [_, code, cb] => {
            let code = int_arg(code)? as u64;
            if cb.is_empty() {
                i.host.syscalls.remove(&code);
            } else {
                i.host.syscalls.insert(code, cb.clone());
            }
            ok_empty()
        }
        _ => Err(wrong_args("syscall code ?callback?")),
    }
}

fn send_to_stdout(i: &mut I, a: &[String]) -> CmdResult {
    let [_, text] = a else { return Err(wrong_args("send_to_stdout text")) };
    i.write_stdout(text);
    ok_empty()
}

fn mem(i: &mut I, a: &[String]) -> CmdResult {
    let usage = || wrong_args("mem ymem addr ?count? | mem ymem addr = value ?value ...?");
    let (space, addr) = match a {
        [_, s, addr, ..] => (s, int_arg(addr)?),
        _ => return Err(usage()),
    };
    let space = Space::parse(space).ok_or_else(|| Flow::Error(format!("bad space \"{space}\"")))?;
    let addr = usize::try_from(addr).map_err(|_| Flow::Error(format!("address out of range: {} {addr}", space.name())))?;
    let inst = current(i)?;
    let render = |w: Vec<u64>| join_list(&w.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    let (count, values) = match &a[3..] {
        [] => (1, None),
        [n] => (int_arg(n)?.max(0) as usize, None),
        [eq, values @ ..] if eq == "=" && !values.is_empty() => {
            let vals = values.iter().map(|v| int_arg(v).map(|x| x as u64)).collect::<Result<Vec<_>, _>>()?;
            (vals.len(), Some(vals))
        }
        _ => return Err(usage()),
    };
    let core = match values {
        Some(_) => i.host.core_mut_checked(&inst)?,
        None => i.host.cores.get_mut(&inst).expect("current exists"),
    };
    Ok(render(core.mem_access(space, addr, count, values.as_deref()).map_err(err)?))
}

fn addr2line(i: &mut I, a: &[String]) -> CmdResult {
    let [_, addr] = a else { return Err(wrong_args("addr2line addr")) };
    let addr = int_arg(addr)?;
    let inst = current(i)?;
    let (file, line) = i.host.core_ref(&inst)?.addr_to_line(addr as u32).map_err(err)?;
    Ok(format!("{file}:{line}"))
}

fn line2addr(i: &mut I, a: &[String]) -> CmdResult {
    let (file, line) = match a {
        [_, spec] => spec.rsplit_once(':').map(|(f, l)| (f.to_string(), l.to_string())).ok_or_else(|| wrong_args("line2addr file:line"))?,
        [_, f, l] => (f.clone(), l.clone()),
        _ => return Err(wrong_args("line2addr file:line")),
    };
    let line = int_arg(&line)?;
    let inst = current(i)?;
    Ok(i.host.core_ref(&inst)?.line_to_addr(&file, line as u32).map_err(err)?.to_string())
}

fn eventlog(i: &mut I, a: &[String]) -> CmdResult {
    match a {
        [_] => Ok(i.host.event_log().join("\n")),
        [_, c] if c == "clear" => {
            i.host.clear_event_log();
            ok_empty()
        }
        _ => Err(wrong_args("eventlog ?clear?")),
    }
}

fn raise(i: &mut I, a: &[String]) -> CmdResult {
    let (n, sev, text) = match a {
        [_, n, s] => (n, s, String::new()),
        [_, n, s, t] => (n, s, t.clone()),
        _ => return Err(wrong_args("raise errnum note|warning|error|fatal ?errstr?")),
    };
    let n = int_arg(n)?;
    let sev = Severity::parse(sev).ok_or_else(|| Flow::Error(format!("bad severity \"{sev}\"")))?;
    let inst = current(i)?;
    i.host.core_mut_checked(&inst)?.inject_exception(n, sev, &text);
    ok_empty()
}
