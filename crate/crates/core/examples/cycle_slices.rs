//! Emu-mode time slices built from the hidden cycle registers.
//!
//! A 2-cycle MUL that straddles the slice boundary makes the slice one cycle long.

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut i = luxdbg::session();
    sh(&mut i, "require mailbox");
    for img in ["spin", "mulpad", "mulfirst"] {
        sh(&mut i, &format!("processor new lx16i {img} emu; {img} load images/{img}.img.json"));
        for n in [100, 100, 7] {
            sh(&mut i, &format!("{img} runProcessorForCycles {n}"));
            sh(&mut i, &format!("{img} configure -hiddenregisters on"));
            println!("{img:>8} +{n:<3} cycles={:<4} pc={}", sh(&mut i, &format!("{img} cycles")), sh(&mut i, &format!("{img} pc")));
            sh(&mut i, &format!("{img} configure -hiddenregisters off"));
        }
    }
}
