//! Round-robin breakpoint scheduling and an output-driven pipeline.

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut i = luxdbg::session();
    sh(&mut i, "require sched");
    for p in ["p1", "p2", "p3"] {
        sh(&mut i, &format!("processor new lx16i {p}; {p} load images/task.img.json; {p} stop tick"));
    }
    sh(&mut i, "scheduler {p1 p2 p3} 3");
    for l in sh(&mut i, "eventlog").lines().filter(|l| l.starts_with("stopped")) {
        println!("{l}");
    }

    sh(&mut i, "foreach p {p1 p2 p3} { processor disconnect $p }");
    for p in ["s1", "s2", "s3"] {
        sh(&mut i, &format!("processor new lx16i {p}; {p} load images/stage.img.json"));
        sh(&mut i, &format!("{p} stop output -write output_callback"));
    }
    sh(&mut i, "array set neighbor {s1 s2 s2 s3 s3 {}}");
    sh(&mut i, "s1 *inport = 7; eventScheduler s1");
    for p in ["s1", "s2", "s3"] {
        println!("{p}: {} -> {}", sh(&mut i, &format!("{p} *inport @rd")), sh(&mut i, &format!("{p} *output @rd")));
    }
}
