//! Console, script and socket front ends over one kernel interpreter.
//!
//! The socket speaks newline-delimited JSON. A connection whose first bytes
//! are `GET ` is upgraded to a WebSocket and carries the same messages as
//! text frames.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::kernel::{self, Kernel};
use crate::lang::{is_complete, join_list, Flow, Interp};

pub const PROMPT: &str = "luxdbg: ";

/// Outcome of one command string, shared by every front end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reply {
    Value(String),
    Error(String),
    Exit(i32),
}

pub fn evaluate(i: &mut Interp<Kernel>, cmd: &str) -> Reply {
    match i.eval(cmd) {
        Ok(v) | Err(Flow::Return(v)) => Reply::Value(v),
        Err(Flow::Exit(c)) => Reply::Exit(c),
        Err(e) => Reply::Error(e.message()),
    }
}

/// Prints output and background stops gathered since the last call.
fn drain_console(i: &mut Interp<Kernel>, out: &mut dyn Write) -> io::Result<()> {
    kernel::flush_output(i);
    for n in i.host.take_notices() {
        match n["event"].as_str() {
            Some("output") => write!(out, "{}", n["text"].as_str().unwrap_or(""))?,
            Some("stopped") => writeln!(out, "{}", stop_text(&n))?,
            _ => {}
        }
    }
    out.flush()
}

fn stop_text(n: &Json) -> String {
    let mut s = format!(
        "stopped {} pc={} {}",
        n["processor"].as_str().unwrap_or(""),
        n["pc"],
        n["reason"].as_str().unwrap_or("")
    );
    if let Some(bp) = n.get("bp") {
        s.push_str(&format!(" {bp}"));
    }
    if let Some(d) = n.get("detail").and_then(Json::as_str) {
        s.push(' ');
        s.push_str(d);
    }
    s
}

/// Interactive loop. Reads from `input` on a helper thread so background
/// cores keep running while the console is idle. Returns the exit code.
pub fn repl<R>(i: &mut Interp<Kernel>, input: R, out: &mut dyn Write, prompt: bool) -> i32
where
    R: BufRead + Send + 'static,
{
    i.host.collect_notices = true;
    let (tx, rx) = mpsc::channel::<Option<String>>();
    thread::spawn(move || {
        for line in input.lines() {
            let Ok(line) = line else { break };
            if tx.send(Some(line)).is_err() {
                return;
            }
        }
        let _ = tx.send(None);
    });
    let mut pending = String::new();
    let mut failures = 0;
    let show_prompt = |out: &mut dyn Write, pending: &str| {
        if prompt {
            let _ = write!(out, "{}", if pending.is_empty() { PROMPT } else { "> " });
            let _ = out.flush();
        }
    };
    show_prompt(out, &pending);
    loop {
        let line = if i.host.background_count() > 0 {
            match rx.try_recv() {
                Ok(l) => l,
                Err(mpsc::TryRecvError::Empty) => {
                    if let Err(e) = kernel::tick(i) {
                        let _ = writeln!(out, "Error: {}", e.message());
                    }
                    let _ = drain_console(i, out);
                    continue;
                }
                Err(mpsc::TryRecvError::Disconnected) => None,
            }
        } else {
            rx.recv().unwrap_or(None)
        };
        let Some(line) = line else { break };
        pending.push_str(&line);
        pending.push('\n');
        if !is_complete(&pending) {
            show_prompt(out, &pending);
            continue;
        }
        let cmd = std::mem::take(&mut pending);
        let reply = evaluate(i, &cmd);
        let _ = drain_console(i, out);
        match reply {
            Reply::Value(v) if v.is_empty() => {}
            Reply::Value(v) => {
                let _ = writeln!(out, "{v}");
            }
            Reply::Error(m) => {
                failures += 1;
                let _ = writeln!(out, "Error: {m}");
            }
            Reply::Exit(c) => return c,
        }
        show_prompt(out, &pending);
    }
    if prompt {
        let _ = writeln!(out);
    }
    // batch runs report command failures through the exit code
    if !prompt && failures > 0 {
        1
    } else {
        0
    }
}

/// Runs a script file with `argv`, `argc` and `argv0` set.
/// Exit code: 0 clean, 1 uncaught error, 2 missing file, or the script's `exit` code.
pub fn run_script(i: &mut Interp<Kernel>, path: &Path, args: &[String]) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("luxdbg: cannot read {}: {e}", path.display());
            return 2;
        }
    };
    let _ = i.set_var_global("argv0", &path.display().to_string());
    let _ = i.set_var_global("argv", &join_list(args));
    let _ = i.set_var_global("argc", &args.len().to_string());
    let reply = evaluate(i, &text);
    let out = i.take_output();
    if !out.is_empty() {
        print!("{out}");
    }
    let _ = io::stdout().flush();
    match reply {
        Reply::Value(_) => 0,
        Reply::Exit(c) => c,
        Reply::Error(m) => {
            eprintln!("Error: {m}");
            1
        }
    }
}

#[derive(Deserialize)]
struct Request {
    #[serde(default)]
    id: Json,
    op: String,
    cmd: Option<String>,
    events: Option<bool>,
}

enum Inbound {
    Open(u64, mpsc::Sender<String>),
    Line(u64, String),
    Closed(u64),
}

struct Session {
    tx: mpsc::Sender<String>,
    subscribed: bool,
}

/// Binds `127.0.0.1:port` and serves until a `shutdown` request.
pub fn serve(i: &mut Interp<Kernel>, port: u16) -> io::Result<()> {
    let listener = TcpListener::bind(("127.0.0.1", port))?;
    eprintln!("luxdbg: listening on {}", listener.local_addr()?);
    serve_on(i, listener)
}

/// Serves on an already-bound listener. All evaluation happens on the calling
/// thread, one request at a time in arrival order.
pub fn serve_on(i: &mut Interp<Kernel>, listener: TcpListener) -> io::Result<()> {
    i.host.collect_notices = true;
    if matches!(i.out, crate::lang::Output::Stdout) {
        i.out = crate::lang::Output::Capture(String::new());
    }
    let stop = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel::<Inbound>();
    listener.set_nonblocking(true)?;
    let acceptor = {
        let stop = stop.clone();
        thread::spawn(move || accept_loop(listener, tx, stop))
    };
    let mut sessions: BTreeMap<u64, Session> = BTreeMap::new();
    loop {
        let msg = if i.host.background_count() > 0 {
            match rx.try_recv() {
                Ok(m) => Some(m),
                Err(mpsc::TryRecvError::Empty) => None,
                Err(mpsc::TryRecvError::Disconnected) => break,
            }
        } else {
            match rx.recv_timeout(Duration::from_millis(100)) {
                Ok(m) => Some(m),
                Err(mpsc::RecvTimeoutError::Timeout) => continue,
                Err(mpsc::RecvTimeoutError::Disconnected) => break,
            }
        };
        match msg {
            None => {
                if let Err(e) = kernel::tick(i) {
                    broadcast(&sessions, &json!({"event": "error", "error": e.message()}));
                }
                publish(i, &sessions);
            }
            Some(Inbound::Open(id, tx)) => {
                sessions.insert(id, Session { tx, subscribed: true });
            }
            Some(Inbound::Closed(id)) => {
                sessions.remove(&id);
            }
            Some(Inbound::Line(id, line)) => {
                if line.trim().is_empty() {
                    continue;
                }
                let (reply, shutdown) = handle(i, &mut sessions, id, &line);
                publish(i, &sessions);
                if let Some(s) = sessions.get(&id) {
                    let _ = s.tx.send(reply.to_string());
                }
                if shutdown {
                    break;
                }
            }
        }
    }
    stop.store(true, Ordering::SeqCst);
    drop(sessions);
    let _ = acceptor.join();
    Ok(())
}

fn handle(i: &mut Interp<Kernel>, sessions: &mut BTreeMap<u64, Session>, sid: u64, line: &str) -> (Json, bool) {
    let Ok(req) = serde_json::from_str::<Request>(line) else {
        return (json!({"id": null, "ok": false, "error": "parse"}), false);
    };
    let id = req.id;
    match req.op.as_str() {
        "eval" => {
            let Some(cmd) = req.cmd else {
                return (json!({"id": id, "ok": false, "error": "missing cmd"}), false);
            };
            match evaluate(i, &cmd) {
                Reply::Value(v) => (json!({"id": id, "ok": true, "result": v}), false),
                Reply::Error(m) => (json!({"id": id, "ok": false, "error": m}), false),
                Reply::Exit(c) => (json!({"id": id, "ok": true, "result": format!("exit {c}")}), true),
            }
        }
        "subscribe" => {
            let on = req.events.unwrap_or(true);
            if let Some(s) = sessions.get_mut(&sid) {
                s.subscribed = on;
            }
            (json!({"id": id, "ok": true, "result": if on { "1" } else { "0" }}), false)
        }
        "shutdown" => (json!({"id": id, "ok": true, "result": ""}), true),
        other => (json!({"id": id, "ok": false, "error": format!("unknown op \"{other}\"")}), false),
    }
}

fn publish(i: &mut Interp<Kernel>, sessions: &BTreeMap<u64, Session>) {
    kernel::flush_output(i);
    for n in i.host.take_notices() {
        broadcast(sessions, &n);
    }
}

fn broadcast(sessions: &BTreeMap<u64, Session>, msg: &Json) {
    let text = msg.to_string();
    for s in sessions.values().filter(|s| s.subscribed) {
        let _ = s.tx.send(text.clone());
    }
}

fn accept_loop(listener: TcpListener, tx: mpsc::Sender<Inbound>, stop: Arc<AtomicBool>) {
    let mut next = 0u64;
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                next += 1;
                let _ = stream.set_nonblocking(false);
                let (out_tx, out_rx) = mpsc::channel();
                if tx.send(Inbound::Open(next, out_tx)).is_err() {
                    return;
                }
                let (tx, id, stop) = (tx.clone(), next, stop.clone());
                thread::spawn(move || {
                    let _ = connection(stream, id, &tx, out_rx, &stop);
                    let _ = tx.send(Inbound::Closed(id));
                });
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(10)),
            Err(_) => thread::sleep(Duration::from_millis(10)),
        }
    }
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut)
}

fn connection(
    stream: TcpStream,
    id: u64,
    tx: &mpsc::Sender<Inbound>,
    out_rx: mpsc::Receiver<String>,
    stop: &AtomicBool,
) -> io::Result<()> {
    let mut head = [0u8; 4];
    let n = loop {
        let n = stream.peek(&mut head)?;
        if n == 0 || n == 4 || !b"GET ".starts_with(&head[..n]) {
            break n;
        }
        thread::sleep(Duration::from_millis(5));
    };
    if n == 4 && &head == b"GET " {
        return websocket(stream, id, tx, out_rx, stop);
    }
    let mut writer = stream.try_clone()?;
    thread::spawn(move || {
        for msg in out_rx {
            if writeln!(writer, "{msg}").and_then(|_| writer.flush()).is_err() {
                break;
            }
        }
        let _ = writer.shutdown(std::net::Shutdown::Both);
    });
    for line in BufReader::new(stream).lines() {
        if tx.send(Inbound::Line(id, line?)).is_err() {
            break;
        }
    }
    Ok(())
}

fn websocket(
    stream: TcpStream,
    id: u64,
    tx: &mpsc::Sender<Inbound>,
    out_rx: mpsc::Receiver<String>,
    stop: &AtomicBool,
) -> io::Result<()> {
    use tungstenite::{Error as WsError, Message};
    let mut ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
    ws.get_mut().set_read_timeout(Some(Duration::from_millis(20)))?;
    loop {
        loop {
            match out_rx.try_recv() {
                Ok(msg) => {
                    if ws.send(Message::Text(msg)).is_err() {
                        return Ok(());
                    }
                }
                Err(mpsc::TryRecvError::Empty) => break,
                Err(mpsc::TryRecvError::Disconnected) => {
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    return Ok(());
                }
            }
        }
        if stop.load(Ordering::SeqCst) {
            let _ = ws.close(None);
            return Ok(());
        }
        match ws.read() {
            Ok(Message::Text(t)) => {
                for line in t.lines() {
                    if tx.send(Inbound::Line(id, line.to_string())).is_err() {
                        return Ok(());
                    }
                }
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(WsError::Io(e)) if is_timeout(&e) => {}
            Err(WsError::ConnectionClosed | WsError::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(io::Error::other(e.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn console(script: &str, prompt: bool) -> (i32, String) {
        let mut i = crate::capturing_session();
        let mut out = Vec::new();
        let code = repl(&mut i, Cursor::new(script.to_string()), &mut out, prompt);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn repl_prints_values_and_errors() {
        let (code, out) = console("set x 4\nputs hi\nnosuch\nexpr {$x * 2}\n", false);
        assert_eq!(code, 1);
        assert_eq!(out, "4\nhi\nError: unknown command \"nosuch\"\n8\n");
    }

    #[test]
    fn repl_joins_continuation_lines() {
        let (code, out) = console("proc f {} {\n  return 7\n}\nf\n", true);
        assert_eq!(code, 0);
        assert!(out.starts_with(PROMPT), "{out}");
        assert!(out.contains("> "), "{out}");
        assert!(out.contains("7\n"), "{out}");
    }

    #[test]
    fn repl_exit_code() {
        assert_eq!(console("exit 3\nputs never\n", false), (3, String::new()));
    }

    #[test]
    fn script_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let run = |body: &str, args: &[&str]| {
            let path = dir.path().join("s.lx");
            std::fs::write(&path, body).unwrap();
            let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            let mut i = crate::capturing_session();
            let code = run_script(&mut i, &path, &args);
            (code, i.get_var_global("seen").unwrap_or_default())
        };
        assert_eq!(run("set seen [list $argc $argv]", &["a", "b c"]), (0, "2 {a {b c}}".into()));
        assert_eq!(run("error boom", &[]).0, 1);
        assert_eq!(run("exit 4", &[]).0, 4);
        let mut i = crate::capturing_session();
        assert_eq!(run_script(&mut i, &dir.path().join("missing.lx"), &[]), 2);
    }

    #[test]
    fn request_handling() {
        let mut i = crate::capturing_session();
        let mut sessions = BTreeMap::new();
        let (tx, rx) = mpsc::channel();
        sessions.insert(1, Session { tx, subscribed: true });
        let (r, _) = handle(&mut i, &mut sessions, 1, "{nope");
        assert_eq!(r, json!({"id": null, "ok": false, "error": "parse"}));
        let (r, _) = handle(&mut i, &mut sessions, 1, r#"{"id":5,"op":"eval","cmd":"expr 1+2"}"#);
        assert_eq!(r, json!({"id": 5, "ok": true, "result": "3"}));
        let (r, _) = handle(&mut i, &mut sessions, 1, r#"{"id":"a","op":"subscribe","events":false}"#);
        assert_eq!(r["result"], "0");
        assert!(!sessions[&1].subscribed);
        let (r, _) = handle(&mut i, &mut sessions, 1, r#"{"id":6,"op":"fly"}"#);
        assert_eq!(r["error"], "unknown op \"fly\"");
        let (_, stop) = handle(&mut i, &mut sessions, 1, r#"{"id":7,"op":"shutdown"}"#);
        assert!(stop);
        assert!(rx.try_recv().is_err());
    }
}
