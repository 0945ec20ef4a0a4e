//! Built-in commands.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};

use regex::RegexBuilder;

use super::list::{glob_match, join_list, split_list};
use super::{parse_int, wrong_args, Channel, CmdResult, Flow, Interp};

pub(super) fn register_all<H>(i: &mut Interp<H>) {
    let table: [(&str, super::CmdFn<H>); 41] = [
        ("set", set),
        ("unset", unset),
        ("incr", incr),
        ("append", append),
        ("lappend", lappend),
        ("global", global),
        ("proc", proc_),
        ("return", return_),
        ("if", if_),
        ("while", while_),
        ("for", for_),
        ("foreach", foreach),
        ("break", |_, _| Err(Flow::Break)),
        ("continue", |_, _| Err(Flow::Continue)),
        ("expr", expr),
        ("eval", eval),
        ("catch", catch),
        ("error", error),
        ("exit", exit),
        ("list", |_, a| Ok(join_list(&a[1..]))),
        ("llength", llength),
        ("lindex", lindex),
        ("lrange", lrange),
        ("join", join),
        ("concat", concat),
        ("split", split),
        ("string", string),
        ("format", format),
        ("regexp", regexp),
        ("info", info),
        ("array", array),
        ("puts", puts),
        ("open", open),
        ("close", close),
        ("gets", gets),
        ("source", source),
        ("subst", subst),
        ("lsearch", lsearch),
        ("lsort", lsort),
        ("uplevel", uplevel),
        ("rename", rename),
    ];
    for (name, f) in table {
        i.register(name, f);
    }
}

fn int_arg(s: &str) -> Result<i64, Flow> {
    parse_int(s).ok_or_else(|| Flow::Error(format!("expected integer but got \"{s}\"")))
}

fn list_arg(s: &str) -> Result<Vec<String>, Flow> {
    split_list(s).map_err(Flow::Error)
}

/// Resolves `end`, `end-N` or an integer against a list length.
fn index_arg(s: &str, len: usize) -> Result<i64, Flow> {
    let end = len as i64 - 1;
    if s == "end" {
        return Ok(end);
    }
    if let Some(off) = s.strip_prefix("end-") {
        return Ok(end - int_arg(off)?);
    }
    int_arg(s)
}

fn set<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    match a {
        [_, n] => i.get_var(n),
        [_, n, v] => i.set_var(n, v),
        _ => Err(wrong_args("set varName ?newValue?")),
    }
}

fn unset<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    for n in &a[1..] {
        i.unset_var(n)?;
    }
    Ok(String::new())
}

fn incr<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let (name, by) = match a {
        [_, n] => (n, 1),
        [_, n, b] => (n, int_arg(b)?),
        _ => return Err(wrong_args("incr varName ?increment?")),
    };
    let cur = if i.var_exists(name) { int_arg(&i.get_var(name)?)? } else { 0 };
    i.set_var(name, &cur.wrapping_add(by).to_string())
}

fn append<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let Some(name) = a.get(1) else { return Err(wrong_args("append varName ?value ...?")) };
    let mut cur = if i.var_exists(name) { i.get_var(name)? } else { String::new() };
    for v in &a[2..] {
        cur.push_str(v);
    }
    i.set_var(name, &cur)
}

fn lappend<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let Some(name) = a.get(1) else { return Err(wrong_args("lappend varName ?value ...?")) };
    let mut items = if i.var_exists(name) { list_arg(&i.get_var(name)?)? } else { Vec::new() };
    items.extend(a[2..].iter().cloned());
    i.set_var(name, &join_list(&items))
}

fn global<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    for n in &a[1..] {
        i.link_global(n);
    }
    Ok(String::new())
}

fn proc_<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, name, params, body] = a else { return Err(wrong_args("proc name args body")) };
    i.define_proc(name, params, body)?;
    Ok(String::new())
}

fn return_<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    Err(Flow::Return(a.get(1).cloned().unwrap_or_default()))
}

fn if_<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let mut k = 1;
    loop {
        let cond = a.get(k).ok_or_else(|| wrong_args("if expr ?then? body ?elseif ...? ?else body?"))?;
        k += 1;
        if a.get(k).map(String::as_str) == Some("then") {
            k += 1;
        }
        let body = a.get(k).ok_or_else(|| Flow::error(format!("no script following \"{cond}\" argument")))?;
        k += 1;
        if i.expr_bool(cond)? {
            return i.eval(body);
        }
        match a.get(k).map(String::as_str) {
            None => return Ok(String::new()),
            Some("elseif") => k += 1,
            Some("else") => {
                let body = a.get(k + 1).ok_or_else(|| Flow::error("no script following \"else\" argument"))?;
                return i.eval(body);
            }
            Some(_) => return i.eval(&a[k]),
        }
    }
}

/// Runs one loop body; `Ok(false)` means break.
fn loop_body<H>(i: &mut Interp<H>, body: &str) -> Result<bool, Flow> {
    match i.eval(body) {
        Ok(_) | Err(Flow::Continue) => Ok(true),
        Err(Flow::Break) => Ok(false),
        Err(e) => Err(e),
    }
}

fn while_<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, cond, body] = a else { return Err(wrong_args("while test command")) };
    while i.expr_bool(cond)? {
        if !loop_body(i, body)? {
            break;
        }
    }
    Ok(String::new())
}

fn for_<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, start, cond, next, body] = a else { return Err(wrong_args("for start test next command")) };
    i.eval(start)?;
    while i.expr_bool(cond)? {
        if !loop_body(i, body)? {
            break;
        }
        i.eval(next)?;
    }
    Ok(String::new())
}

fn foreach<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    if a.len() < 4 || a.len() % 2 != 0 {
        return Err(wrong_args("foreach varList list ?varList list ...? command"));
    }
    let body = &a[a.len() - 1];
    let mut pairs = Vec::new();
    for p in a[1..a.len() - 1].chunks(2) {
        let vars = list_arg(&p[0])?;
        if vars.is_empty() {
            return Err(Flow::error("foreach varlist is empty"));
        }
        pairs.push((vars, list_arg(&p[1])?));
    }
    let rounds = pairs.iter().map(|(v, l)| l.len().div_ceil(v.len())).max().unwrap_or(0);
    for n in 0..rounds {
        for (vars, items) in &pairs {
            for (k, v) in vars.iter().enumerate() {
                i.set_var(v, items.get(n * vars.len() + k).map(String::as_str).unwrap_or(""))?;
            }
        }
        if !loop_body(i, body)? {
            break;
        }
    }
    Ok(String::new())
}

fn expr<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    if a.len() < 2 {
        return Err(wrong_args("expr arg ?arg ...?"));
    }
    Ok(i.expr(&a[1..].join(" "))?.render())
}

fn eval<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    if a.len() < 2 {
        return Err(wrong_args("eval arg ?arg ...?"));
    }
    i.eval(&a[1..].join(" "))
}

fn uplevel<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    // only the global form is supported: `uplevel #0 script`
    match a {
        [_, lvl, rest @ ..] if lvl == "#0" && !rest.is_empty() => i.eval_global(&rest.join(" ")),
        _ => Err(wrong_args("uplevel #0 arg ?arg ...?")),
    }
}

fn catch<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let (script, var) = match a {
        [_, s] => (s, None),
        [_, s, v] => (s, Some(v)),
        _ => return Err(wrong_args("catch script ?resultVarName?")),
    };
    let (code, value) = match i.eval(script) {
        Ok(v) => (0, v),
        Err(Flow::Error(m)) => (1, m),
        Err(Flow::Return(v)) => (2, v),
        Err(Flow::Break) => (3, String::new()),
        Err(Flow::Continue) => (4, String::new()),
        Err(e @ Flow::Exit(_)) => return Err(e),
    };
    if let Some(v) = var {
        i.set_var(v, &value)?;
    }
    Ok(code.to_string())
}

fn error<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    match a {
        [_, m, ..] => Err(Flow::Error(m.clone())),
        _ => Err(wrong_args("error message")),
    }
}

fn exit<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let code = a.get(1).map(|s| int_arg(s)).transpose()?.unwrap_or(0);
    Err(Flow::Exit(code as i32))
}

fn llength<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, l] = a else { return Err(wrong_args("llength list")) };
    Ok(list_arg(l)?.len().to_string())
}

fn lindex<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, l, idx] = a else { return Err(wrong_args("lindex list index")) };
    let items = list_arg(l)?;
    let k = index_arg(idx, items.len())?;
    Ok(usize::try_from(k).ok().and_then(|k| items.get(k).cloned()).unwrap_or_default())
}

fn lrange<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, l, first, last] = a else { return Err(wrong_args("lrange list first last")) };
    let items = list_arg(l)?;
    let lo = index_arg(first, items.len())?.max(0) as usize;
    let hi = index_arg(last, items.len())?.min(items.len() as i64 - 1);
    if hi < lo as i64 {
        return Ok(String::new());
    }
    Ok(join_list(&items[lo..=hi as usize]))
}

fn lsearch<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let (exact, l, pat) = match a {
        [_, l, p] => (false, l, p),
        [_, opt, l, p] if opt == "-exact" => (true, l, p),
        _ => return Err(wrong_args("lsearch ?-exact? list pattern")),
    };
    let pos = list_arg(l)?.iter().position(|e| if exact { e == pat } else { glob_match(pat, e) });
    Ok(pos.map(|p| p as i64).unwrap_or(-1).to_string())
}

fn lsort<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let (integer, l) = match a {
        [_, l] => (false, l),
        [_, opt, l] if opt == "-integer" => (true, l),
        _ => return Err(wrong_args("lsort ?-integer? list")),
    };
    let mut items = list_arg(l)?;
    if integer {
        let mut keyed = items.into_iter().map(|s| Ok((int_arg(&s)?, s))).collect::<Result<Vec<_>, Flow>>()?;
        keyed.sort_by_key(|(k, _)| *k);
        items = keyed.into_iter().map(|(_, s)| s).collect();
    } else {
        items.sort();
    }
    Ok(join_list(&items))
}

fn join<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let (l, sep) = match a {
        [_, l] => (l, " "),
        [_, l, s] => (l, s.as_str()),
        _ => return Err(wrong_args("join list ?joinString?")),
    };
    Ok(list_arg(l)?.join(sep))
}

fn concat<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    Ok(a[1..].iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect::<Vec<_>>().join(" "))
}

fn split<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let (s, chars) = match a {
        [_, s] => (s, " \t\n\r"),
        [_, s, c] => (s, c.as_str()),
        _ => return Err(wrong_args("split string ?splitChars?")),
    };
    let parts: Vec<String> = if chars.is_empty() {
        s.chars().map(String::from).collect()
    } else {
        s.split(|c| chars.contains(c)).map(String::from).collect()
    };
    Ok(join_list(&parts))
}

fn string<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let sub = a.get(1).map(String::as_str).unwrap_or("");
    let args = a.get(2..).unwrap_or(&[]);
    let bool_s = |b: bool| (b as i32).to_string();
    match (sub, args) {
        ("length", [s]) => Ok(s.chars().count().to_string()),
        ("equal", [x, y]) => Ok(bool_s(x == y)),
        ("equal", [opt, x, y]) if opt == "-nocase" => Ok(bool_s(x.to_lowercase() == y.to_lowercase())),
        ("compare", [x, y]) => Ok((x.cmp(y) as i32).to_string()),
        ("trim", [s]) => Ok(s.trim().to_string()),
        ("trimleft", [s]) => Ok(s.trim_start().to_string()),
        ("trimright", [s]) => Ok(s.trim_end().to_string()),
        ("trim", [s, c]) => Ok(s.trim_matches(|ch| c.contains(ch)).to_string()),
        ("trimleft", [s, c]) => Ok(s.trim_start_matches(|ch| c.contains(ch)).to_string()),
        ("trimright", [s, c]) => Ok(s.trim_end_matches(|ch| c.contains(ch)).to_string()),
        ("toupper", [s]) => Ok(s.to_uppercase()),
        ("tolower", [s]) => Ok(s.to_lowercase()),
        ("first", [needle, s]) => Ok(s.find(needle.as_str()).map(|p| s[..p].chars().count() as i64).unwrap_or(-1).to_string()),
        ("match", [p, s]) => Ok(bool_s(glob_match(p, s))),
        ("map", [pairs, s]) => {
            let pairs = split_list(pairs).map_err(Flow::Error)?;
            if pairs.len() % 2 != 0 {
                return Err(Flow::error("char map list unbalanced"));
            }
            let mut out = String::new();
            let mut rest = s.as_str();
            'scan: while !rest.is_empty() {
                for kv in pairs.chunks(2) {
                    if !kv[0].is_empty() && rest.starts_with(kv[0].as_str()) {
                        out.push_str(&kv[1]);
                        rest = &rest[kv[0].len()..];
                        continue 'scan;
                    }
                }
                let c = rest.chars().next().unwrap();
                out.push(c);
                rest = &rest[c.len_utf8()..];
            }
            Ok(out)
        }
        ("repeat", [s, n]) => Ok(s.repeat(int_arg(n)?.max(0) as usize)),
        ("index", [s, k]) => {
            let chars: Vec<char> = s.chars().collect();
            let k = index_arg(k, chars.len())?;
            Ok(usize::try_from(k).ok().and_then(|k| chars.get(k)).map(|c| c.to_string()).unwrap_or_default())
        }
        ("range", [s, lo, hi]) => {
            let chars: Vec<char> = s.chars().collect();
            let lo = index_arg(lo, chars.len())?.max(0) as usize;
            let hi = index_arg(hi, chars.len())?.min(chars.len() as i64 - 1);
            if hi < lo as i64 {
                return Ok(String::new());
            }
            Ok(chars[lo..=hi as usize].iter().collect())
        }
        ("is", [class, s]) if class == "integer" => Ok(bool_s(parse_int(s).is_some())),
        _ => Err(Flow::Error(format!("bad option \"{sub}\" or arguments for string"))),
    }
}

/// `format` with `%d %i %u %x %X %o %c %s %%`, flags `-0+ ` and width/precision.
pub(crate) fn format_str(fmt: &str, args: &[String]) -> CmdResult {
    let mut out = String::new();
    let mut it = fmt.chars().peekable();
    let mut next = args.iter();
    while let Some(c) = it.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        if it.peek() == Some(&'%') {
            it.next();
            out.push('%');
            continue;
        }
        let (mut left, mut zero, mut plus, mut space) = (false, false, false, false);
        while let Some(&f) = it.peek() {
            match f {
                '-' => left = true,
                '0' => zero = true,
                '+' => plus = true,
                ' ' => space = true,
                _ => break,
            }
            it.next();
        }
        let mut width = 0usize;
        while let Some(d) = it.peek().and_then(|c| c.to_digit(10)) {
            width = width * 10 + d as usize;
            it.next();
        }
        let mut prec: Option<usize> = None;
        if it.peek() == Some(&'.') {
            it.next();
            let mut p = 0;
            while let Some(d) = it.peek().and_then(|c| c.to_digit(10)) {
                p = p * 10 + d as usize;
                it.next();
            }
            prec = Some(p);
        }
        while matches!(it.peek(), Some('l') | Some('h')) {
            it.next();
        }
        let conv = it.next().ok_or_else(|| Flow::error("format string ended in middle of field specifier"))?;
        let arg = next.next().ok_or_else(|| Flow::error("not enough arguments for all format specifiers"))?;
        let (sign, body) = match conv {
            'd' | 'i' => {
                let v = int_arg(arg)?;
                let mut digits = v.unsigned_abs().to_string();
                if let Some(p) = prec {
                    while digits.len() < p {
                        digits.insert(0, '0');
                    }
                }
                let sign = if v < 0 {
                    "-"
                } else if plus {
                    "+"
                } else if space {
                    " "
                } else {
                    ""
                };
                (sign, digits)
            }
            'u' => ("", (int_arg(arg)? as u64).to_string()),
            'x' => ("", format!("{:x}", int_arg(arg)?)),
            'X' => ("", format!("{:X}", int_arg(arg)?)),
            'o' => ("", format!("{:o}", int_arg(arg)?)),
            'c' => ("", char::from_u32(int_arg(arg)? as u32).map(String::from).unwrap_or_default()),
            's' => {
                let s: String = match prec {
                    Some(p) => arg.chars().take(p).collect(),
                    None => arg.clone(),
                };
                zero = false;
                ("", s)
            }
            other => return Err(Flow::Error(format!("bad field specifier \"{other}\""))),
        };
        let len = sign.len() + body.chars().count();
        let pad = width.saturating_sub(len);
        if left {
            out.push_str(sign);
            out.push_str(&body);
            out.push_str(&" ".repeat(pad));
        } else if zero {
            out.push_str(sign);
            out.push_str(&"0".repeat(pad));
            out.push_str(&body);
        } else {
            out.push_str(&" ".repeat(pad));
            out.push_str(sign);
            out.push_str(&body);
        }
    }
    Ok(out)
}

fn format<H>(_: &mut Interp<H>, a: &[String]) -> CmdResult {
    let Some(fmt) = a.get(1) else { return Err(wrong_args("format formatString ?arg ...?")) };
    format_str(fmt, &a[2..])
}

fn regexp<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let mut k = 1;
    let mut nocase = false;
    while let Some(opt) = a.get(k).filter(|s| s.starts_with('-')) {
        match opt.as_str() {
            "-nocase" => nocase = true,
            "--" => {
                k += 1;
                break;
            }
            _ => return Err(Flow::Error(format!("bad option \"{opt}\""))),
        }
        k += 1;
    }
    let (Some(pat), Some(text)) = (a.get(k), a.get(k + 1)) else {
        return Err(wrong_args("regexp ?-nocase? exp string ?matchVar? ?subMatchVar ...?"));
    };
    let re = RegexBuilder::new(pat)
        .case_insensitive(nocase)
        .build()
        .map_err(|e| Flow::Error(format!("couldn't compile regular expression pattern: {e}")))?;
    let Some(caps) = re.captures(text) else { return Ok("0".into()) };
    for (g, var) in a[k + 2..].iter().enumerate() {
        let m = caps.get(g).map(|m| m.as_str()).unwrap_or("");
        i.set_var(var, m)?;
    }
    Ok("1".into())
}

fn info<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    match (a.get(1).map(String::as_str), a.get(2)) {
        (Some("exists"), Some(v)) => Ok((i.var_exists(v) as i32).to_string()),
        (Some(sub @ ("commands" | "procs")), pat) => {
            let names: Vec<String> = i
                .command_names()
                .into_iter()
                .filter(|n| sub == "commands" || i.is_proc(n))
                .filter(|n| pat.is_none_or(|p| glob_match(p, n)))
                .collect();
            Ok(join_list(&names))
        }
        (Some("level"), None) => Ok(i.level().to_string()),
        _ => Err(wrong_args("info commands|procs ?pattern? | info exists varName | info level")),
    }
}

fn array<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    match (a.get(1).map(String::as_str), a.get(2), a.get(3)) {
        (Some("exists"), Some(n), None) => Ok((i.array_names(n).is_some() as i32).to_string()),
        (Some("names"), Some(n), None) => Ok(join_list(&i.array_names(n).unwrap_or_default())),
        (Some("size"), Some(n), None) => Ok(i.array_names(n).map(|v| v.len()).unwrap_or(0).to_string()),
        (Some("get"), Some(n), None) => {
            let mut out = Vec::new();
            for k in i.array_names(n).unwrap_or_default() {
                let v = i.get_var(&format!("{n}({k})"))?;
                out.push(k);
                out.push(v);
            }
            Ok(join_list(&out))
        }
        (Some("set"), Some(n), Some(l)) => {
            let items = list_arg(l)?;
            if items.len() % 2 != 0 {
                return Err(Flow::error("list must have an even number of elements"));
            }
            i.make_array(n)?;
            for kv in items.chunks(2) {
                i.set_var(&format!("{n}({})", kv[0]), &kv[1])?;
            }
            Ok(String::new())
        }
        _ => Err(wrong_args("array exists|get|names|set|size arrayName ?list?")),
    }
}

fn puts<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let mut args = &a[1..];
    let newline = match args.first() {
        Some(f) if f == "-nonewline" && args.len() > 1 => {
            args = &args[1..];
            false
        }
        _ => true,
    };
    let (chan, text) = match args {
        [t] => ("stdout", t),
        [c, t] => (c.as_str(), t),
        _ => return Err(wrong_args("puts ?-nonewline? ?channelId? string")),
    };
    let mut text = text.clone();
    if newline {
        text.push('\n');
    }
    match chan {
        "stdout" => i.write_stdout(&text),
        "stderr" => eprint!("{text}"),
        _ => match i.channels.get_mut(chan) {
            Some(Channel::Write(w)) => w.write_all(text.as_bytes()).map_err(|e| Flow::Error(e.to_string()))?,
            Some(Channel::Read(_)) => return Err(Flow::Error(format!("channel \"{chan}\" wasn't opened for writing"))),
            None => return Err(Flow::Error(format!("can not find channel named \"{chan}\""))),
        },
    }
    Ok(String::new())
}

fn open<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let (path, mode) = match a {
        [_, p] => (p, "r"),
        [_, p, m] => (p, m.as_str()),
        _ => return Err(wrong_args("open fileName ?access?")),
    };
    let err = |e: std::io::Error| Flow::Error(format!("couldn't open \"{path}\": {e}"));
    let chan = match mode {
        "r" => Channel::Read(BufReader::new(File::open(path).map_err(err)?)),
        "w" => Channel::Write(BufWriter::new(File::create(path).map_err(err)?)),
        "a" => Channel::Write(BufWriter::new(OpenOptions::new().append(true).create(true).open(path).map_err(err)?)),
        _ => return Err(Flow::Error(format!("illegal access mode \"{mode}\""))),
    };
    let id = format!("file{}", i.next_channel);
    i.next_channel += 1;
    i.channels.insert(id.clone(), chan);
    Ok(id)
}

fn close<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, chan] = a else { return Err(wrong_args("close channelId")) };
    match i.channels.remove(chan.as_str()) {
        Some(Channel::Write(mut w)) => w.flush().map_err(|e| Flow::Error(e.to_string()))?,
        Some(Channel::Read(_)) => {}
        None => return Err(Flow::Error(format!("can not find channel named \"{chan}\""))),
    }
    Ok(String::new())
}

fn gets<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let (chan, var) = match a {
        [_, c] => (c, None),
        [_, c, v] => (c, Some(v)),
        _ => return Err(wrong_args("gets channelId ?varName?")),
    };
    let mut line = String::new();
    let n = match i.channels.get_mut(chan.as_str()) {
        Some(Channel::Read(r)) => r.read_line(&mut line).map_err(|e| Flow::Error(e.to_string()))?,
        Some(Channel::Write(_)) => return Err(Flow::Error(format!("channel \"{chan}\" wasn't opened for reading"))),
        None if chan == "stdin" => std::io::stdin().read_line(&mut line).map_err(|e| Flow::Error(e.to_string()))?,
        None => return Err(Flow::Error(format!("can not find channel named \"{chan}\""))),
    };
    let trimmed = line.strip_suffix('\n').unwrap_or(&line);
    let trimmed = trimmed.strip_suffix('\r').unwrap_or(trimmed).to_string();
    match var {
        Some(v) => {
            i.set_var(v, &trimmed)?;
            Ok(if n == 0 { "-1".into() } else { trimmed.chars().count().to_string() })
        }
        None => Ok(trimmed),
    }
}

fn source<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, path] = a else { return Err(wrong_args("source fileName")) };
    let text = std::fs::read_to_string(path).map_err(|e| Flow::Error(format!("couldn't read file \"{path}\": {e}")))?;
    match i.eval(&text) {
        Err(Flow::Return(v)) => Ok(v),
        other => other,
    }
}

fn subst<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, s] = a else { return Err(wrong_args("subst string")) };
    i.subst(s)
}

fn rename<H>(i: &mut Interp<H>, a: &[String]) -> CmdResult {
    let [_, old, new] = a else { return Err(wrong_args("rename oldName newName")) };
    let Some(cmd) = i.commands.shift_remove(old.as_str()) else {
        return Err(Flow::Error(format!("can't rename \"{old}\": command doesn't exist")));
    };
    if !new.is_empty() {
        i.commands.insert(new.clone(), cmd);
    }
    Ok(String::new())
}

#[cfg(test)]
mod tests {
    use super::super::Output;
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
    fn control_flow() {
        assert_eq!(run("set s 0; for {set k 0} {$k < 10} {incr k} {if {$k == 5} break; incr s $k}; set s"), "10");
        assert_eq!(run("set s {}; foreach {a b} {1 2 3 4} {lappend s $b$a}; set s"), "21 43");
        assert_eq!(run("set s {}; foreach a {1 2 3} b {x y} {lappend s $a$b}; set s"), "1x 2y 3");
        assert_eq!(run("foreach a {1} b {2}"), "ERR wrong # args: should be \"foreach varList list ?varList list ...? command\"");
        assert_eq!(run("set k 0; while 1 {incr k; if {$k < 3} continue; break}; set k"), "3");
        assert_eq!(run("if 0 {set r a} elseif {1} {set r b} else {set r c}"), "b");
        assert_eq!(run("if {0} then {set r a} else {set r c}"), "c");
        assert_eq!(run("if {0} {set r a}"), "");
        assert_eq!(run("break"), "ERR invoked \"break\" outside of a loop");
    }

    #[test]
    fn catch_and_error() {
        assert_eq!(run("list [catch {error boom} m] $m"), "1 boom");
        assert_eq!(run("list [catch {set ok 1} m] $m"), "0 1");
        assert_eq!(run("catch {exit 3}"), "ERR exit 3");
    }

    #[test]
    fn lists_and_strings() {
        assert_eq!(run("lindex {a {b c} d} 1"), "b c");
        assert_eq!(run("lindex {a b c} end"), "c");
        assert_eq!(run("lrange {a b c d} 1 end-1"), "b c");
        assert_eq!(run("llength [split a,b,,c ,]"), "4");
        assert_eq!(run("join {1 2 3} +"), "1+2+3");
        assert_eq!(run("string trim {  x  }"), "x");
        assert_eq!(run("string equal ab ab"), "1");
        assert_eq!(run("string length héllo"), "5");
        assert_eq!(run("lsort -integer {10 9 100}"), "9 10 100");
        assert_eq!(run("lsearch {p1 p2} p2"), "1");
        assert_eq!(run("set x ab; append x cd ef"), "abcdef");
    }

    #[test]
    fn format_conversions() {
        assert_eq!(run("format %d.%03d 12 7"), "12.007");
        assert_eq!(run("format {%5d|%-5d|%05d} 42 42 -42"), "   42|42   |-0042");
        assert_eq!(run("format {%x %X %s %c %%} 255 255 str 65"), "ff FF str A %");
        assert_eq!(run("format %.2s abc"), "ab");
        assert_eq!(run("format %d"), "ERR not enough arguments for all format specifiers");
        assert_eq!(run("format %d abc"), "ERR expected integer but got \"abc\"");
    }

    #[test]
    fn regexp_captures() {
        let r = run("regexp {^.*handle ([0-9]+) *$} {unhandled breakpoint handle 2415919104} m v; list $m $v");
        assert_eq!(r, "{unhandled breakpoint handle 2415919104} 2415919104");
        assert_eq!(run("regexp -nocase {^AB} abc"), "1");
        assert_eq!(run("regexp {x} abc"), "0");
    }

    #[test]
    fn info_and_puts() {
        assert_eq!(run("proc zz {} {}; info procs z*"), "zz");
        assert_eq!(run("info commands nosuch"), "");
        assert_eq!(run("puts -nonewline a; puts b"), "ab\n");
        assert_eq!(run("array set"), "ERR wrong # args: should be \"array exists|get|names|set|size arrayName ?list?\"");
        assert_eq!(run("set a(x) 1; set a(y) 2; array names a"), "x y");
        assert_eq!(run("array set a {}; list [array exists a] [array size a]"), "1 0");
        assert_eq!(run("array set a {k 1 j {2 3}}; array get a"), "k 1 j {2 3}");
        assert_eq!(run("array set a {k}"), "ERR list must have an even number of elements");
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.txt");
        let p = p.to_str().unwrap();
        let script = format!(
            "set f [open {p} w]; puts $f one; puts $f two; close $f
             set f [open {p}]; set out {{}}
             while {{[gets $f line] >= 0}} {{lappend out $line}}
             close $f; set out"
        );
        assert_eq!(run(&script), "one two");
        assert!(run("open /nonexistent/x").starts_with("ERR couldn't open"));
    }
}
