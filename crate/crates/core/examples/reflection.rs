//! Asking a processor what it has: registers, memories, symbols, models.

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut i = luxdbg::session();
    sh(&mut i, "processor new lx16f dsp; load images/mailbox.img.json");
    println!("models:    {}", sh(&mut i, "processor models"));
    println!("registers: {}", sh(&mut i, "? R"));
    sh(&mut i, "configure -hiddenregisters on");
    println!("+ hidden:  {}", sh(&mut i, "? R"));
    println!("memories:  {}", sh(&mut i, "? M"));
    println!("symbols:   {}", sh(&mut i, "lrange [? S] 0 4"));

    // the library turns reflection into a register dump
    sh(&mut i, "require log");
    sh(&mut i, "logRegisters");
    print!("{}", i.take_output());
}
