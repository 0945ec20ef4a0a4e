//! Default handling per severity, and a callback that silences one exception.

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut i = luxdbg::session();
    sh(&mut i, "processor new lx16i p1; p1 load images/counter.img.json");
    for sev in ["note", "warning", "error", "fatal"] {
        sh(&mut i, &format!("reset; raise 7000 {sev} {{synthetic {sev}}}"));
        println!("{sev:>8}: {}", sh(&mut i, "resume"));
    }
    sh(&mut i, "proc quiet {n s t} { resume }; except 7100 quiet");
    sh(&mut i, "reset; raise 7100 error {not interesting}");
    println!("  silenced: {}", sh(&mut i, "resume"));
}
