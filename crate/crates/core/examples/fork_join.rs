//! Background cores run in interleaved slices until `wait` joins them.

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut i = luxdbg::session();
    for (p, limit) in [("p1", 1500), ("p2", 700)] {
        sh(&mut i, &format!("processor new lx16i {p}; {p} load images/worker.img.json; {p} *limit = {limit}"));
    }
    sh(&mut i, "p1 resume &; p2 resume &");
    println!("states: {} {}", sh(&mut i, "processor state p1"), sh(&mut i, "processor state p2"));
    println!("wait: {}", sh(&mut i, "wait {p1 p2}"));
    println!("{}", sh(&mut i, "eventlog"));
}
