use super::*;
use serde_json::json;

/// Builds an image from one instruction per line (`OP a, b`), numbered from 0.
fn image_json(name: &str, asm: &str, symbols: Json, functions: Json) -> String {
    let pmem: Vec<Json> = asm
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(n, l)| {
            let (op, rest) = l.split_once(' ').unwrap_or((l, ""));
            let args: Vec<&str> = rest.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
            json!({"addr": n, "op": op, "args": args})
        })
        .collect();
    json!({"name": name, "pmem": pmem, "symbols": symbols, "functions": functions}).to_string()
}

const COUNTER: &str = "
    LDI r0, 0
    LDI r1, 50
    LDI r2, 1
    CALL 8
    ADD r0, r2
    CMP r0, r1
    BNE 3
    HALT
    ST count, r0
    RET
";

fn counter_interp(dir: &tempfile::TempDir) -> Interp<Kernel> {
    let path = dir.path().join("counter.img.json");
    let img = image_json(
        "counter",
        COUNTER,
        json!([{"name": "count", "kind": "global_var", "address": 100}]),
        json!([{"name": "setCount", "entry": 8, "exits": [9], "file": "counter.c", "lines": [3, 5]}]),
    );
    std::fs::write(&path, img).unwrap();
    let mut i = new_capturing_interp();
    i.eval("processor new lx16i p1").unwrap();
    i.eval(&format!("load {{{}}}", path.display())).unwrap();
    i
}

fn run(i: &mut Interp<Kernel>, s: &str) -> String {
    i.eval(s).unwrap_or_else(|e| panic!("{s}: {}", e.message()))
}

#[test]
fn callback_resumes_every_hit() {
    let dir = tempfile::tempdir().unwrap();
    let mut i = counter_interp(&dir);
    run(&mut i, "set n 0; proc hit {id inst} { global n; incr n; resume }");
    assert_eq!(run(&mut i, "stop in setCount hit"), "1");
    let stop = run(&mut i, "resume");
    assert!(stop.ends_with("halt"), "{stop}");
    assert_eq!(run(&mut i, "set n"), "50");
    assert_eq!(run(&mut i, "readstring {ymem 200}"), "");
    assert_eq!(run(&mut i, "fxpr *count"), "49");
}

#[test]
fn conditional_break_via_register_command() {
    let dir = tempfile::tempdir().unwrap();
    let mut i = counter_interp(&dir);
    run(&mut i, "proc cond {id inst} { if {[r0] != 42} { resume } }");
    run(&mut i, "stop in setCount cond");
    assert_eq!(run(&mut i, "resume"), "stopped p1 pc=8 breakpoint 1");
    assert_eq!(run(&mut i, "r0"), "42");
    assert_eq!(run(&mut i, "query"), "{1 p1 pmem:8 exec 1}");
    run(&mut i, "disable 1");
    assert!(run(&mut i, "resume").ends_with("halt"));
}

#[test]
fn resume_in_callback_is_scoped_to_triggering_core() {
    let dir = tempfile::tempdir().unwrap();
    let mut i = counter_interp(&dir);
    run(&mut i, "processor new lx16i p2");
    run(&mut i, "p1 stop in setCount {p2 resume}");
    let stop = run(&mut i, "p1 resume");
    assert!(stop.contains("callback error") && stop.contains("triggering processor"), "{stop}");
    assert!(i.host.event_log().iter().any(|l| l.starts_with("callback-error p1")));
}

#[test]
fn instance_prefix_is_dynamically_scoped() {
    let mut i = new_capturing_interp();
    run(&mut i, "processor new lx16i p1; processor new lx16i p2");
    assert_eq!(run(&mut i, "processor name"), "p2");
    run(&mut i, "proc who {} { processor name }");
    assert_eq!(run(&mut i, "p1 who"), "p1");
    run(&mut i, "p1 r3 = 9");
    assert_eq!(run(&mut i, "fxpr p1::r3 + 1"), "10");
    assert_eq!(run(&mut i, "r3"), "0");
    assert!(i.eval("p1").is_err());
}

#[test]
fn unknown_words_fall_back_to_fxpr() {
    let mut i = new_capturing_interp();
    assert_eq!(i.eval("frob").unwrap_err().message(), "unknown command \"frob\"");
    run(&mut i, "processor new lx16i p1");
    assert_eq!(i.eval("frob").unwrap_err().message(), "unknown command \"frob\"");
    assert_eq!(i.eval("frob 1 2").unwrap_err().message(), "unknown command \"frob\"");
    assert_eq!(run(&mut i, "sp"), "65535");
    assert_eq!(run(&mut i, "r1 = 0x12 @rh"), "0x12");
}

#[test]
fn reflection_queries() {
    let mut i = new_capturing_interp();
    run(&mut i, "processor new lx16i p1");
    let regs = split_list_t(&run(&mut i, "? R"));
    assert!(regs.iter().any(|r| r.starts_with("sp ")), "{regs:?}");
    assert!(!regs.iter().any(|r| r.starts_with("cycles ")));
    run(&mut i, "configure -hiddenregisters on");
    assert!(split_list_t(&run(&mut i, "? R")).iter().any(|r| r.starts_with("cycles ")));
    assert!(i.eval("? Q").unwrap_err().message().contains("unknown query kind"));
}

fn split_list_t(s: &str) -> Vec<String> {
    crate::lang::split_list(s).unwrap()
}

#[test]
fn unregistered_exceptions_follow_severity() {
    let mut i = new_capturing_interp();
    run(&mut i, "processor new lx16i p1");
    // an empty pmem slot is a fatal illegal instruction
    let stop = run(&mut i, "resume");
    assert!(stop.contains("exception") && stop.contains("5001 fatal"), "{stop}");
    assert!(i.eval("resume").unwrap_err().message().contains("halted"));

    let dir = tempfile::tempdir().unwrap();
    let mut i = counter_interp(&dir);
    run(&mut i, "raise 7001 note {just saying}");
    assert!(run(&mut i, "resume").ends_with("halt"));
    run(&mut i, "reset; raise 7002 error {bad}");
    assert_eq!(run(&mut i, "resume"), "stopped p1 pc=0 exception 7002 error: bad");
    run(&mut i, "set seen {}; proc ex {n s t} { global seen; lappend seen $n $s $t; resume }; except 7003 ex");
    run(&mut i, "reset; raise 7003 error oops");
    assert!(run(&mut i, "resume").ends_with("halt"));
    assert_eq!(run(&mut i, "set seen"), "7003 error oops");
}

#[test]
fn background_cores_join() {
    let dir = tempfile::tempdir().unwrap();
    let mut i = counter_interp(&dir);
    let path = dir.path().join("counter.img.json");
    run(&mut i, "processor new lx16i p2");
    run(&mut i, &format!("p2 load {{{}}}", path.display()));
    run(&mut i, "p1 resume &; p2 resume &");
    assert!(i.eval("p1 reset").unwrap_err().message().contains("running"));
    assert_eq!(run(&mut i, "wait p1 p2"), "p1 halt p2 halt");
    assert_eq!(run(&mut i, "p1 fxpr *count"), "49");
    assert_eq!(run(&mut i, "p2 fxpr *count"), "49");
}

#[test]
fn stepi_and_cycle_breakpoints() {
    let dir = tempfile::tempdir().unwrap();
    let mut i = counter_interp(&dir);
    assert_eq!(run(&mut i, "stepi 3"), "stopped p1 pc=3 step");
    assert!(i.eval("stepi 0").is_err());
    assert_eq!(run(&mut i, "at 10"), "1");
    assert_eq!(run(&mut i, "resume"), "stopped p1 pc=8 cycle_breakpoint 1");
    assert_eq!(run(&mut i, "query"), "");
    assert!(i.eval("at 2").unwrap_err().message().contains("past"));
}

#[test]
fn data_breakpoints_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let mut i = counter_interp(&dir);
    assert!(i.eval("stop count").is_err());
    assert!(i.eval("stop in setCount -write").is_err());
    run(&mut i, "set log {}; proc w {id inst addr value} { global log; lappend log $value; if {$value < 3} resume }");
    run(&mut i, "stop count -write w");
    assert_eq!(run(&mut i, "resume"), "stopped p1 pc=9 data_breakpoint 1");
    assert_eq!(run(&mut i, "set log"), "0 1 2 3");
    run(&mut i, "clear 1");
    assert!(i.eval("clear 1").is_err());
}

#[test]
fn port_procedures() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("echo.img.json");
    let asm = "IN r0, pio0\nOUT pio1, r0\nCMP r0, r1\nBNE 0\nHALT";
    std::fs::write(&path, image_json("echo", asm, json!([]), json!([]))).unwrap();
    let mut i = new_capturing_interp();
    run(&mut i, "processor new lx16i p1");
    run(&mut i, &format!("load {{{}}}", path.display()));
    run(&mut i, "set q {5 6 0}; set got {}");
    run(&mut i, "proc src {inst port} { global q; set v [lindex $q 0]; set q [lrange $q 1 end]; return $v }");
    run(&mut i, "proc sink {inst port v} { global got; lappend got $v }");
    run(&mut i, "srcfn pio0 src; sinkfn pio1 sink");
    assert!(run(&mut i, "resume").ends_with("halt"));
    assert_eq!(run(&mut i, "set got"), "5 6 0");
}

#[test]
fn syscalls_and_notices() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.img.json");
    std::fs::write(&path, image_json("sys", "LDI i, 3\nICALL 0\nHALT", json!([]), json!([]))).unwrap();
    let mut i = new_capturing_interp();
    i.host.collect_notices = true;
    run(&mut i, "processor new lx16i p1");
    run(&mut i, &format!("load {{{}}}", path.display()));
    run(&mut i, "syscall 3 {send_to_stdout \"i=[i]\\n\"; resume}");
    assert!(run(&mut i, "resume").ends_with("halt"));
    let notices = i.host.take_notices();
    assert_eq!(notices[0], json!({"event": "output", "text": "i=3\n"}));
    assert_eq!(notices[1]["event"], "stopped");
    assert_eq!(notices[1]["reason"], "halt");
}
