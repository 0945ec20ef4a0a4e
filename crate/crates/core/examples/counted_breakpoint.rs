//! Counted and conditional breakpoints driven by a callback procedure.
//!
//! ```text
//! cargo run --example counted_breakpoint
//! ```

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut i = luxdbg::session();
    sh(&mut i, "require count");
    sh(&mut i, "processor new lx16i p1; p1 load images/counter.img.json");

    // every call bumps the counter and resumes
    sh(&mut i, "stop in targetFunc setCount");
    println!("{}", sh(&mut i, "resume"));
    println!("targetFunc ran {} times", sh(&mut i, "set setCounter"));

    // now stop on the 42nd call instead
    sh(&mut i, "reset; resetCount; countBelow 42");
    println!("{}", sh(&mut i, "resume"));
    println!("setCounter={} pc={} at {}", sh(&mut i, "set setCounter"), sh(&mut i, "pc"), sh(&mut i, "addr2line [pc]"));
}
