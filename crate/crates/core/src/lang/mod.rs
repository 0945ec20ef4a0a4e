//! A small Tcl-style command language.
//!
//! `Interp<H>` carries a host value `H`; native commands receive the whole
//! interpreter and reach their host state through `interp.host`.

mod builtins;
pub mod expr;
pub mod list;
mod parse;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::rc::Rc;

use indexmap::IndexMap;

use parse::{Part, Script, Word};

pub use expr::{parse_int, truthy, ExprVal};
pub use list::{glob_match, join_list, quote_element, split_list};

/// Non-local outcome of a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flow {
    Error(String),
    Return(String),
    Break,
    Continue,
    Exit(i32),
}

impl Flow {
    pub fn error(msg: impl Into<String>) -> Self {
        Flow::Error(msg.into())
    }

    pub fn message(&self) -> String {
        match self {
            Flow::Error(m) | Flow::Return(m) => m.clone(),
            Flow::Break => "invoked \"break\" outside of a loop".into(),
            Flow::Continue => "invoked \"continue\" outside of a loop".into(),
            Flow::Exit(c) => format!("exit {c}"),
        }
    }
}

pub type CmdResult = Result<String, Flow>;
pub type CmdFn<H> = fn(&mut Interp<H>, &[String]) -> CmdResult;

/// False when `text` ends inside an open brace, bracket or quote.
pub fn is_complete(text: &str) -> bool {
    !matches!(parse::parse_script(text), Err(e) if e.starts_with("missing"))
}

pub fn wrong_args(usage: &str) -> Flow {
    Flow::Error(format!("wrong # args: should be \"{usage}\""))
}

struct Proc {
    params: Vec<(String, Option<String>)>,
    body: String,
}

enum Command<H> {
    Native(CmdFn<H>),
    Proc(Rc<Proc>),
}

impl<H> Clone for Command<H> {
    fn clone(&self) -> Self {
        match self {
            Command::Native(f) => Command::Native(*f),
            Command::Proc(p) => Command::Proc(p.clone()),
        }
    }
}

enum Var {
    Scalar(String),
    Array(IndexMap<String, String>),
    /// Alias of a global variable, created by `global`.
    Global(String),
}

enum Channel {
    Read(BufReader<File>),
    Write(BufWriter<File>),
}

/// Where `puts` to stdout goes.
pub enum Output {
    Stdout,
    Capture(String),
}

const MAX_DEPTH: usize = 200;
const CACHE_LIMIT: usize = 4096;

pub struct Interp<H> {
    pub host: H,
    pub out: Output,
    commands: IndexMap<String, Command<H>>,
    frames: Vec<HashMap<String, Var>>,
    unknown: Option<CmdFn<H>>,
    scripts: HashMap<String, Rc<Script>>,
    exprs: HashMap<String, Rc<expr::Node>>,
    channels: HashMap<String, Channel>,
    next_channel: usize,
    depth: usize,
}

fn split_var(name: &str) -> (&str, Option<&str>) {
    match name.find('(') {
        Some(i) if name.ends_with(')') => (&name[..i], Some(&name[i + 1..name.len() - 1])),
        _ => (name, None),
    }
}

impl<H> Interp<H> {
    pub fn new(host: H) -> Self {
        let mut interp = Interp {
            host,
            out: Output::Stdout,
            commands: IndexMap::new(),
            frames: vec![HashMap::new()],
            unknown: None,
            scripts: HashMap::new(),
            exprs: HashMap::new(),
            channels: HashMap::new(),
            next_channel: 1,
            depth: 0,
        };
        builtins::register_all(&mut interp);
        interp
    }

    pub fn register(&mut self, name: &str, f: CmdFn<H>) {
        self.commands.insert(name.to_string(), Command::Native(f));
    }

    pub fn unregister(&mut self, name: &str) -> bool {
        self.commands.shift_remove(name).is_some()
    }

    pub fn has_command(&self, name: &str) -> bool {
        self.commands.contains_key(name)
    }

    pub fn command_names(&self) -> Vec<String> {
        self.commands.keys().cloned().collect()
    }

    pub fn is_proc(&self, name: &str) -> bool {
        matches!(self.commands.get(name), Some(Command::Proc(_)))
    }

    /// Installs the handler for command names that are not registered.
    pub fn set_unknown(&mut self, f: CmdFn<H>) {
        self.unknown = Some(f);
    }

    pub fn define_proc(&mut self, name: &str, params: &str, body: &str) -> Result<(), Flow> {
        let mut parsed = Vec::new();
        for p in split_list(params).map_err(Flow::Error)? {
            let parts = split_list(&p).map_err(Flow::Error)?;
            match parts.as_slice() {
                [n] => parsed.push((n.clone(), None)),
                [n, d] => parsed.push((n.clone(), Some(d.clone()))),
                _ => return Err(Flow::error(format!("bad parameter \"{p}\""))),
            }
        }
        self.commands.insert(name.to_string(), Command::Proc(Rc::new(Proc { params: parsed, body: body.to_string() })));
        Ok(())
    }

    fn parsed(&mut self, text: &str) -> Result<Rc<Script>, Flow> {
        if let Some(s) = self.scripts.get(text) {
            return Ok(s.clone());
        }
        let script = Rc::new(parse::parse_script(text).map_err(Flow::Error)?);
        if self.scripts.len() >= CACHE_LIMIT {
            self.scripts.clear();
        }
        self.scripts.insert(text.to_string(), script.clone());
        Ok(script)
    }

    /// Evaluates a script in the current frame.
    pub fn eval(&mut self, text: &str) -> CmdResult {
        let script = self.parsed(text)?;
        self.eval_script(&script)
    }

    /// Evaluates a script at global scope, whatever procedure is active.
    pub fn eval_global(&mut self, text: &str) -> CmdResult {
        self.with_global(|i| i.eval(text))
    }

    /// Invokes a pre-split command at global scope.
    pub fn invoke_global(&mut self, words: &[String]) -> CmdResult {
        self.with_global(|i| i.invoke(words))
    }

    /// Runs `f` with only the global frame active.
    pub fn with_global<R>(&mut self, f: impl FnOnce(&mut Self) -> R) -> R {
        let saved = self.frames.split_off(1);
        let r = f(self);
        self.frames.truncate(1);
        self.frames.extend(saved);
        r
    }

    pub fn set_var_global(&mut self, name: &str, value: &str) -> CmdResult {
        self.with_global(|i| i.set_var(name, value))
    }

    pub fn get_var_global(&mut self, name: &str) -> CmdResult {
        self.with_global(|i| i.get_var(name))
    }

    pub fn unset_var_global(&mut self, name: &str) -> Result<(), Flow> {
        self.with_global(|i| i.unset_var(name))
    }

    /// Top-level evaluation: `return` yields its value, stray loop control is an error.
    pub fn run(&mut self, text: &str) -> CmdResult {
        match self.eval(text) {
            Err(Flow::Return(v)) => Ok(v),
            Err(f @ (Flow::Break | Flow::Continue)) => Err(Flow::Error(f.message())),
            other => other,
        }
    }

    pub fn expr(&mut self, text: &str) -> Result<ExprVal, Flow> {
        let node = match self.exprs.get(text) {
            Some(n) => n.clone(),
            None => {
                let n = Rc::new(expr::parse_expr(text).map_err(Flow::Error)?);
                if self.exprs.len() >= CACHE_LIMIT {
                    self.exprs.clear();
                }
                self.exprs.insert(text.to_string(), n.clone());
                n
            }
        };
        self.eval_node(&node)
    }

    pub fn expr_bool(&mut self, text: &str) -> Result<bool, Flow> {
        let v = self.expr(text)?;
        truthy(&v.render())
    }

    pub(crate) fn eval_script(&mut self, script: &Script) -> CmdResult {
        let mut result = String::new();
        for cmd in &script.cmds {
            let mut words = Vec::with_capacity(cmd.len());
            for w in cmd {
                words.push(self.subst_word(w)?);
            }
            result = self.invoke(&words)?;
        }
        Ok(result)
    }

    fn subst_word(&mut self, w: &Word) -> CmdResult {
        match w {
            Word::Literal(s) => Ok(s.clone()),
            Word::Parts(p) => self.subst_parts(p),
        }
    }

    pub(crate) fn subst_parts(&mut self, parts: &[Part]) -> CmdResult {
        let mut out = String::new();
        for p in parts {
            match p {
                Part::Lit(s) => out.push_str(s),
                Part::Var(name, None) => out.push_str(&self.get_var(name)?),
                Part::Var(name, Some(idx)) => {
                    let key = self.subst_parts(idx)?;
                    out.push_str(&self.get_var(&format!("{name}({key})"))?);
                }
                Part::Cmd(script) => out.push_str(&self.eval_script(script)?),
            }
        }
        Ok(out)
    }

    /// Performs `$` and `[]` substitution on a string.
    pub fn subst(&mut self, text: &str) -> CmdResult {
        let mut p = parse::Parser::new(text);
        let parts = p.all_parts().map_err(Flow::Error)?;
        self.subst_parts(&parts)
    }

    pub fn invoke(&mut self, words: &[String]) -> CmdResult {
        let Some(name) = words.first() else { return Ok(String::new()) };
        if self.depth >= MAX_DEPTH {
            return Err(Flow::error("too many nested evaluations (infinite loop?)"));
        }
        self.depth += 1;
        let r = match self.commands.get(name.as_str()).cloned() {
            Some(Command::Native(f)) => f(self, words),
            Some(Command::Proc(p)) => self.call_proc(name, &p, &words[1..]),
            None => match self.unknown {
                Some(f) => f(self, words),
                None => Err(Flow::Error(format!("invalid command name \"{name}\""))),
            },
        };
        self.depth -= 1;
        r
    }

    fn call_proc(&mut self, name: &str, p: &Proc, args: &[String]) -> CmdResult {
        let usage = || {
            let mut u = name.to_string();
            for (n, d) in &p.params {
                match d {
                    _ if n == "args" => u.push_str(" ?arg ...?"),
                    Some(_) => u.push_str(&format!(" ?{n}?")),
                    None => u.push_str(&format!(" {n}")),
                }
            }
            wrong_args(&u)
        };
        let mut frame = HashMap::new();
        let mut i = 0;
        for (k, (n, d)) in p.params.iter().enumerate() {
            if n == "args" && k == p.params.len() - 1 {
                frame.insert(n.clone(), Var::Scalar(join_list(&args[i.min(args.len())..])));
                i = args.len();
                continue;
            }
            let v = match (args.get(i), d) {
                (Some(a), _) => a.clone(),
                (None, Some(d)) => d.clone(),
                (None, None) => return Err(usage()),
            };
            frame.insert(n.clone(), Var::Scalar(v));
            i += 1;
        }
        if i < args.len() {
            return Err(usage());
        }
        let body = self.parsed(&p.body)?;
        self.frames.push(frame);
        let r = self.eval_script(&body);
        self.frames.pop();
        match r {
            Err(Flow::Return(v)) => Ok(v),
            Err(f @ (Flow::Break | Flow::Continue)) => Err(Flow::Error(f.message())),
            other => other,
        }
    }

    fn locate(&self, base: &str) -> (usize, String) {
        if let Some(g) = base.strip_prefix("::") {
            return (0, g.to_string());
        }
        let top = self.frames.len() - 1;
        match self.frames[top].get(base) {
            Some(Var::Global(g)) => (0, g.clone()),
            _ => (top, base.to_string()),
        }
    }

    pub fn get_var(&self, name: &str) -> CmdResult {
        let (base, key) = split_var(name);
        let (f, b) = self.locate(base);
        match (self.frames[f].get(&b), key) {
            (Some(Var::Scalar(v)), None) => Ok(v.clone()),
            (Some(Var::Array(a)), Some(k)) => {
                a.get(k).cloned().ok_or_else(|| Flow::Error(format!("can't read \"{name}\": no such element in array")))
            }
            (Some(Var::Array(_)), None) => Err(Flow::Error(format!("can't read \"{name}\": variable is array"))),
            (Some(Var::Scalar(_)), Some(_)) => Err(Flow::Error(format!("can't read \"{name}\": variable isn't array"))),
            _ => Err(Flow::Error(format!("can't read \"{name}\": no such variable"))),
        }
    }

    pub fn set_var(&mut self, name: &str, value: &str) -> CmdResult {
        let (base, key) = split_var(name);
        let (f, b) = self.locate(base);
        let frame = &mut self.frames[f];
        match key {
            None => match frame.get_mut(&b) {
                Some(Var::Array(_)) => return Err(Flow::Error(format!("can't set \"{name}\": variable is array"))),
                Some(Var::Scalar(v)) => *v = value.to_string(),
                _ => {
                    frame.insert(b, Var::Scalar(value.to_string()));
                }
            },
            Some(k) => match frame.entry(b).or_insert_with(|| Var::Array(IndexMap::new())) {
                Var::Array(a) => {
                    a.insert(k.to_string(), value.to_string());
                }
                _ => return Err(Flow::Error(format!("can't set \"{name}\": variable isn't array"))),
            },
        }
        Ok(value.to_string())
    }

    /// Creates `name` as an empty array unless it already is one.
    pub fn make_array(&mut self, name: &str) -> Result<(), Flow> {
        let (f, b) = self.locate(name);
        match self.frames[f].entry(b).or_insert_with(|| Var::Array(IndexMap::new())) {
            Var::Array(_) => Ok(()),
            _ => Err(Flow::Error(format!("can't array set \"{name}\": variable isn't array"))),
        }
    }

    pub fn var_exists(&self, name: &str) -> bool {
        self.get_var(name).is_ok()
    }

    pub fn unset_var(&mut self, name: &str) -> Result<(), Flow> {
        let (base, key) = split_var(name);
        let (f, b) = self.locate(base);
        let missing = || Flow::Error(format!("can't unset \"{name}\": no such variable"));
        match key {
            None => {
                self.frames[f].remove(&b).ok_or_else(missing)?;
                let top = self.frames.len() - 1;
                if f != top {
                    self.frames[top].remove(base);
                }
            }
            Some(k) => match self.frames[f].get_mut(&b) {
                Some(Var::Array(a)) => {
                    a.shift_remove(k).ok_or_else(missing)?;
                }
                _ => return Err(missing()),
            },
        }
        Ok(())
    }

    /// Keys of an array variable, in insertion order.
    pub fn array_names(&self, name: &str) -> Option<Vec<String>> {
        let (f, b) = self.locate(name);
        match self.frames[f].get(&b) {
            Some(Var::Array(a)) => Some(a.keys().cloned().collect()),
            _ => None,
        }
    }

    pub fn link_global(&mut self, name: &str) {
        let top = self.frames.len() - 1;
        if top > 0 {
            self.frames[top].insert(name.to_string(), Var::Global(name.to_string()));
        }
    }

    pub fn level(&self) -> usize {
        self.frames.len() - 1
    }

    /// Writes to the stdout channel.
    pub fn write_stdout(&mut self, text: &str) {
        match &mut self.out {
            Output::Stdout => {
                let mut so = std::io::stdout().lock();
                let _ = so.write_all(text.as_bytes());
                let _ = so.flush();
            }
            Output::Capture(buf) => buf.push_str(text),
        }
    }

    /// Drains captured output; empty when writing straight to stdout.
    pub fn take_output(&mut self) -> String {
        match &mut self.out {
            Output::Capture(buf) => std::mem::take(buf),
            Output::Stdout => String::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(script: &str) -> String {
        let mut i = Interp::new(());
        i.out = Output::Capture(String::new());
        match i.run(script) {
            Ok(v) => format!("{}{}", i.take_output(), v),
            Err(e) => format!("{}ERR {}", i.take_output(), e.message()),
        }
    }

    #[test]
    fn variables_and_arrays() {
        assert_eq!(run("set a 3; set b $a$a"), "33");
        assert_eq!(run("set n(p1) p2; set k p1; set n($k)"), "p2");
        assert_eq!(run("set x"), "ERR can't read \"x\": no such variable");
        assert_eq!(run("set a 1; unset a; info exists a"), "0");
        assert_eq!(run("set a(1) x; set a 2"), "ERR can't set \"a\": variable is array");
    }

    #[test]
    fn procs_defaults_args_and_globals() {
        assert_eq!(run("proc f {a {b 10}} {expr {$a + $b}}; list [f 1] [f 1 2]"), "11 3");
        assert_eq!(run("proc f {a args} {llength $args}; f 1 2 3"), "2");
        assert_eq!(run("proc f {a} {}; f"), "ERR wrong # args: should be \"f a\"");
        assert_eq!(run("set g 1; proc f {} {global g; incr g}; f; set g"), "2");
        assert_eq!(run("set g 1; proc f {} {set ::g 4; set ::h($::g) x}; f; list $g [array names h]"), "4 4");
        assert_eq!(run("proc f {} {return 7; error x}; f"), "7");
        assert_eq!(run("proc f {} {f}; f"), "ERR too many nested evaluations (infinite loop?)");
    }

    #[test]
    fn eval_global_sees_globals_only() {
        let mut i = Interp::new(());
        i.set_var("g", "global").unwrap();
        i.define_proc("probe", "", "set g local; set g").unwrap();
        assert_eq!(i.run("probe").unwrap(), "local");
        assert_eq!(i.eval_global("set g").unwrap(), "global");
    }

    #[test]
    fn unknown_hook() {
        fn hook(_: &mut Interp<()>, w: &[String]) -> CmdResult {
            Ok(format!("hooked {}", w.join(",")))
        }
        let mut i = Interp::new(());
        assert!(i.run("frob 1").is_err());
        i.set_unknown(hook);
        assert_eq!(i.run("frob 1").unwrap(), "hooked frob,1");
    }
}
