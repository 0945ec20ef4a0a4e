//! Target printf calls trap to the debugger, which formats and prints them.

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut i = luxdbg::session();
    sh(&mut i, "require printf; installPrintf");
    sh(&mut i, "processor new lx16i t; t load images/printf_multi.img.json");
    let stop = sh(&mut i, "t resume");
    print!("{}", i.take_output());
    println!("{stop}; printf returned {} characters", sh(&mut i, "t r6"));
}
