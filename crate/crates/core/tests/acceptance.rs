//! Acceptance criteria 1 to 12, one PASS/FAIL line each.
//! Run with `cargo test --test acceptance`.

mod common;

use std::process::Command;

use common::{cycles, q15_oracle, rows, run, session, Trace};
use luxdbg::eval::fixed::{personality_arith, BinOp, Personality, Value};
use proptest::prelude::Rng;
use proptest::test_runner::{RngAlgorithm, TestRng};
use regex::Regex;

type Outcome = Result<(), String>;

fn check(cond: bool, what: impl Into<String>) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn eq(got: &str, want: &str, what: &str) -> Outcome {
    check(got == want, format!("{what}: got {got:?}, want {want:?}"))
}

fn c1_counted_and_conditional() -> Outcome {
    let mut i = session();
    run(&mut i, "require count; processor new lx16i p1; p1 load images/counter.img.json")?;
    run(&mut i, "stop in targetFunc setCount")?;
    let stop = run(&mut i, "resume")?;
    check(stop.ends_with(" halt"), format!("first run: {stop}"))?;
    eq(&run(&mut i, "set setCounter")?, "50", "setCounter")?;

    run(&mut i, "reset; resetCount")?;
    run(
        &mut i,
        "proc setCount args { global setCounter; incr setCounter; if {$setCounter < 42} resume }",
    )?;
    let stop = run(&mut i, "resume")?;
    check(stop.contains("breakpoint"), format!("conditional run: {stop}"))?;
    eq(&run(&mut i, "set setCounter")?, "42", "setCounter at stop")?;
    eq(&run(&mut i, "pc @rd")?, &run(&mut i, "fxpr targetFunc @rd")?, "pc at function entry")
}

fn c2_sampling() -> Outcome {
    let mut i = session();
    run(&mut i, "require count; processor new lx16i p1; p1 load images/counter.img.json")?;
    run(&mut i, "stop in targetFunc setCount; countSample 10; eventlog clear")?;
    while run(&mut i, "processor state")? != "halted" {
        run(&mut i, "resume")?;
    }
    let log = run(&mut i, "eventlog")?;
    let stops: Vec<&str> = log.lines().filter(|l| l.starts_with("stopped")).collect();
    let want = [
        "stopped p1 pc=8 breakpoint 1",
        "stopped p1 pc=8 breakpoint 1",
        "stopped p1 pc=8 breakpoint 1",
        "stopped p1 pc=8 breakpoint 1",
        "stopped p1 pc=8 breakpoint 1",
        "stopped p1 pc=7 halt",
    ];
    check(stops == want, format!("stops {stops:?}"))?;
    let counts = rows(&mut session(), "sampling")?;
    let counts: Vec<&str> = counts.iter().filter_map(|r| r.rsplit(' ').next()).collect();
    check(counts == ["10", "20", "30", "40", "50", "50"], format!("counts at stops {counts:?}"))
}

fn c3_reflection() -> Outcome {
    let mut i = session();
    run(&mut i, "processor new lx16i p1")?;
    let tuple = Regex::new(r"^\{[A-Za-z_][A-Za-z0-9_]* -?[0-9]+ [su] [0-9]+\}$").unwrap();
    let off = run(&mut i, "? R")?;
    let want_off = "{pc 0 u 20} {sp 65535 u 16} {i 0 u 16} {a0 0 s 32} {a1 0 s 32} \
        {r0 0 u 16} {r1 0 u 16} {r2 0 u 16} {r3 0 u 16} {r4 0 u 16} {r5 0 u 16} {r6 0 u 16} {r7 0 u 16} \
        {flag 0 u 1} {pio0 0 u 16} {pio1 0 u 16}";
    eq(&off, want_off, "? R hidden off")?;
    for t in luxdbg::lang::split_list(&off)? {
        check(tuple.is_match(&format!("{{{t}}}")), format!("tuple {t:?}"))?;
    }
    run(&mut i, "configure -hiddenregisters on")?;
    let on = run(&mut i, "? R")?;
    eq(&on, &format!("{want_off} {{cycles 0 u 32}} {{cyclec 0 u 8}}"), "? R hidden on")
}

fn c4_cross_processor() -> Outcome {
    let mut i = session();
    run(&mut i, "processor new lx16i p1; processor new lx16i p2; p1 r3 = 5")?;
    let before = run(&mut i, "p1 ? R")?;
    run(&mut i, "p2 fxpr r0 = [p1 r3] * 2")?;
    eq(&run(&mut i, "p2 r0")?, "10", "p2.r0")?;
    eq(&run(&mut i, "p1 ? R")?, &before, "p1 registers")
}

fn c5_fixed_point() -> Outcome {
    let mul = |a: i16, b: i16| {
        let v = personality_arith(BinOp::Mul, Value::int(a as i64), Value::int(b as i64), Personality::Fractional);
        v.unwrap().magnitude as i16
    };
    let mut mismatches = 0;
    // every pair of 6-bit values placed in the top bits of the word
    for x in -32i16..32 {
        for y in -32i16..32 {
            let (a, b) = (x << 10, y << 10);
            mismatches += (mul(a, b) != q15_oracle(a, b)) as u32;
        }
    }
    let mut rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    for _ in 0..100_000 {
        let (a, b) = (rng.next_u32() as u16 as i16, rng.next_u32() as u16 as i16);
        mismatches += (mul(a, b) != q15_oracle(a, b)) as u32;
    }
    check(mismatches == 0, format!("{mismatches} mismatches"))?;
    eq(&format!("{:#x}", mul(0x4000, 0x4000)), "0x2000", "0x4000*0x4000")?;
    eq(&format!("{:#x}", mul(i16::MIN, i16::MIN)), "0x7fff", "0x8000*0x8000")?;

    // the same products through the MUL instruction of a fractional core
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("mul.img.json");
    let img = r#"{"name":"mul","pmem":[{"addr":0,"op":"MUL","args":["r0","r1"]},{"addr":1,"op":"HALT"}]}"#;
    std::fs::write(&path, img).map_err(|e| e.to_string())?;
    let mut i = session();
    run(&mut i, &format!("processor new lx16f f; f load {{{}}}", path.display()))?;
    for (a, b, want) in [("0x4000", "0x4000", "0x2000"), ("0x8000", "0x8000", "0x7fff")] {
        run(&mut i, &format!("f reset; f r0 = {a}; f r1 = {b}; f resume"))?;
        eq(&run(&mut i, "f r0 @rh")?, want, &format!("lx16f MUL {a} {b}"))?;
    }
    Ok(())
}

fn c6_printf() -> Outcome {
    let got = rows(&mut session(), "printf")?;
    let want = [
        "printf stopped t pc=5 halt output x=5 a0 3",
        "printf diff {a0 3/0}",
    ];
    check(got[..2] == want, format!("{:?}", &got[..2]))?;

    // straight to the console stream
    let mut i = session();
    run(&mut i, "require printf; installPrintf; processor new lx16i t; t load images/printf.img.json")?;
    run(&mut i, "t resume")?;
    eq(&i.take_output(), "x=5", "stdout")?;
    eq(&run(&mut i, "t a0")?, "3", "a0")
}

fn c7_cycle_slices() -> Outcome {
    let errstr = Regex::new(r"^.*handle ([0-9]+) *$").unwrap();
    let mut i = session();
    run(&mut i, "require mailbox")?;
    for (img, first) in [("spin", 100), ("mulpad", 101), ("mulfirst", 100)] {
        let trace = Trace::load(&format!("images/{img}.img.json"));
        run(&mut i, &format!("processor new lx16i {img} emu; {img} load images/{img}.img.json"))?;
        let mut pc = 0;
        for (n, slice) in [100u64, 100, 7].into_iter().enumerate() {
            let before = cycles(&mut i, img);
            let stop = run(&mut i, &format!("{img} runProcessorForCycles {slice}"))?;
            let executed = cycles(&mut i, img) - before;
            let (want, next_pc) = trace.run(pc, slice);
            pc = next_pc;
            check(executed == want, format!("{img} slice {n}: executed {executed}, oracle {want}"))?;
            eq(&run(&mut i, &format!("{img} pc @rd"))?, &pc.to_string(), &format!("{img} pc"))?;
            let detail = stop.split_once("error: ").map(|s| s.1).unwrap_or("");
            let handle = errstr.captures(detail).map(|c| c[1].to_string());
            check(stop.contains("exception 5067"), format!("{img}: {stop}"))?;
            eq(handle.as_deref().unwrap_or(""), "2415919104", "captured handle")?;
            if n == 0 {
                check(executed == first, format!("{img}: first slice {executed}"))?;
            }
        }
    }
    Ok(())
}

fn c8_mailbox() -> Outcome {
    let a = rows(&mut session(), "mailbox_demo")?;
    let b = rows(&mut session(), "mailbox_demo")?;
    check(a == b, "metrics differ between runs")?;
    let want = [
        "mode sim stride 10 rounds 2410 transfers 200",
        "processor sent recv words errors cycles words/cycle",
        "p1 100 100 1594 0 24100 0.0661",
        "p2 100 100 1594 0 24100 0.0661",
        "conservation 1",
    ];
    check(a == want, format!("{a:?}"))?;
    let guard = rows(&mut session(), "mailbox_guard")?;
    check(guard.len() == 16, format!("{} guard cases", guard.len()))?;
    for g in &guard {
        let f: Vec<&str> = g.split(' ').collect();
        let all = f[..4].iter().all(|v| *v == "1");
        let moved = f[5] == "1";
        check(all == moved, format!("guard row {g}"))?;
        if moved {
            eq(&f[6..].join(" "), "0 3 11 12 13", "transfer contents")?;
        }
    }
    Ok(())
}

fn c9_schedulers() -> Outcome {
    let mut i = session();
    run(&mut i, "require sched")?;
    for p in ["p1", "p2", "p3"] {
        run(&mut i, &format!("processor new lx16i {p}; {p} load images/task.img.json; {p} stop tick"))?;
    }
    run(&mut i, "eventlog clear; scheduler {p1 p2 p3} 5")?;
    let log = run(&mut i, "eventlog")?;
    let order: Vec<&str> = log.lines().filter(|l| l.starts_with("stopped")).map(|l| &l[8..10]).collect();
    let want: Vec<&str> = (0..5).flat_map(|_| ["p1", "p2", "p3"]).collect();
    check(order == want, format!("stop order {order:?}"))?;

    let mut i = session();
    run(&mut i, "require sched")?;
    for p in ["s1", "s2", "s3"] {
        run(&mut i, &format!("processor new lx16i {p}; {p} load images/stage.img.json; {p} stop output -write output_callback"))?;
    }
    run(&mut i, "array set neighbor {s1 s2 s2 s3 s3 {}}; s1 *inport = 7")?;
    run(&mut i, "eventScheduler s1")?;
    let got: Vec<String> = ["s1", "s2", "s3"]
        .iter()
        .map(|p| run(&mut i, &format!("{p} *output @rd")))
        .collect::<Result<_, _>>()?;
    check(got == ["8", "9", "10"], format!("outputs {got:?}"))
}

fn c10_fork_join() -> Outcome {
    let once = || -> Result<(String, String), String> {
        let mut i = session();
        for (p, limit) in [("p1", 1500), ("p2", 700)] {
            run(&mut i, &format!("processor new lx16i {p}; {p} load images/worker.img.json; {p} *limit = {limit}"))?;
        }
        run(&mut i, "eventlog clear")?;
        let r = run(&mut i, "p1 resume &; p2 resume &; wait {p1 p2}")?;
        for p in ["p1", "p2"] {
            check(!i.host.is_background(p), format!("{p} still running"))?;
        }
        eq(&run(&mut i, "p1 r0")?, "1500", "p1 result")?;
        eq(&run(&mut i, "p2 r0")?, "700", "p2 result")?;
        Ok((r, run(&mut i, "eventlog")?))
    };
    let (r, log) = once()?;
    eq(&r, "p1 halt p2 halt", "wait")?;
    let slices: Vec<&str> = log.lines().filter(|l| l.starts_with("slice ")).map(|l| &l[6..8]).collect();
    // p1 runs again after p2 has had a slice
    let interleaved = slices.windows(3).any(|w| w == ["p1", "p2", "p1"]);
    check(interleaved, format!("no alternation in {slices:?}"))?;
    check(once()?.1 == log, "event logs differ between runs")
}

fn c11_exception_defaults() -> Outcome {
    let mut i = session();
    run(&mut i, "processor new lx16i p1; p1 load images/counter.img.json")?;
    run(&mut i, "raise 7001 note {synthetic note}")?;
    let s = run(&mut i, "resume")?;
    check(s.ends_with(" halt"), format!("note: {s}"))?;
    let log = run(&mut i, "eventlog")?;
    check(log.contains("exception p1 note 7001 synthetic note"), "note not logged")?;
    run(&mut i, "reset; raise 7003 error {synthetic error}")?;
    eq(&run(&mut i, "resume")?, "stopped p1 pc=0 exception 7003 error: synthetic error", "error")?;
    run(&mut i, "reset; proc tryResume {n s t} { resume }; except 7004 tryResume")?;
    run(&mut i, "raise 7004 fatal {synthetic fatal}")?;
    eq(&run(&mut i, "resume")?, "stopped p1 pc=0 exception 7004 fatal: synthetic fatal", "fatal")
}

fn c12_regression_harness() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_luxdbg");
    let out = Command::new(bin).args(["--script", "tests/run_all.lx"]).output().map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    check(out.status.code() == Some(0), format!("clean run exit {:?}: {text}", out.status.code()))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for e in std::fs::read_dir("golden").map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        std::fs::copy(e.path(), dir.path().join(e.file_name())).map_err(|e| e.to_string())?;
    }
    let bad = dir.path().join("crossfxpr.txt");
    let golden = std::fs::read_to_string(&bad).map_err(|e| e.to_string())?;
    std::fs::write(&bad, golden.replacen("p2.r0 10", "p2.r0 11", 1)).map_err(|e| e.to_string())?;
    let out = Command::new(bin)
        .args(["--script", "tests/run_all.lx", "-golden"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    check(out.status.code() == Some(1), format!("injected mismatch exit {:?}", out.status.code()))?;
    check(text.contains("FAIL crossfxpr") && text.contains("failed: crossfxpr"), format!("output: {text}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1 counted and conditional breakpoints", c1_counted_and_conditional),
        ("2 sampling every tenth call", c2_sampling),
        ("3 register reflection format", c3_reflection),
        ("4 cross-processor fxpr", c4_cross_processor),
        ("5 Q15 multiply oracle", c5_fixed_point),
        ("6 semi-hosted printf", c6_printf),
        ("7 cycle time slices", c7_cycle_slices),
        ("8 mailbox demo", c8_mailbox),
        ("9 schedulers", c9_schedulers),
        ("10 fork-join", c10_fork_join),
        ("11 exception defaults", c11_exception_defaults),
        ("12 regression harness", c12_regression_harness),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(()) => println!("PASS {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
