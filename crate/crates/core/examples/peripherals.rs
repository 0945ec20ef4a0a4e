//! Memory-mapped and port IO bound to script procedures.

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut i = luxdbg::session();

    // a write watch on uart_tx acts as the transmit register
    sh(&mut i, "processor new lx16i u; u load images/uart.img.json");
    sh(&mut i, "proc tx {id inst addr value} { send_to_stdout [format %c $value]; resume }");
    sh(&mut i, "u stop uart_tx -write tx");
    print!("uart: ");
    sh(&mut i, "u resume");

    // pio0 feeds from a list, pio1 drains to one
    sh(&mut i, "processor new lx16i e; e load images/echo.img.json");
    sh(&mut i, "set q {4 5 6 0}; set got {}");
    sh(&mut i, "proc src {inst port} { global q; set v [lindex $q 0]; set q [lrange $q 1 end]; return $v }");
    sh(&mut i, "proc sink {inst port v} { global got; lappend got $v }");
    sh(&mut i, "e srcfn pio0 src; e sinkfn pio1 sink; e resume");
    println!("echo: {}", sh(&mut i, "set got"));
}
