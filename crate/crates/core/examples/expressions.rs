//! fxpr at machine level and ce at source level, across two processors.

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut i = luxdbg::session();
    sh(&mut i, "processor new lx16i p1; processor new lx16i p2");
    sh(&mut i, "p1 load images/mailbox.img.json; p2 load images/mailbox.img.json");
    sh(&mut i, "p1 r3 = 5");
    sh(&mut i, "p2 fxpr r0 = [p1 r3] * 2");
    println!("p2 r0 = {}", sh(&mut i, "p2 r0"));
    println!("p1::r3 + p2 r0 = {}", sh(&mut i, "p2 fxpr p1::r3 + r0"));

    sh(&mut i, "p1 fxpr sendBuffer(0) = 0x11");
    sh(&mut i, "p1 fxpr sendBuffer(1) = 0x22");
    sh(&mut i, "p2 fxpr recvBuffer(0) = p1::sendBuffer(0:1)");
    println!("copied vector: {}", sh(&mut i, "p2 fxpr recvBuffer(0:1) @rh"));
    println!("ce nmsgs * 2 = {}", sh(&mut i, "p1 ce nmsgs * 2"));
}
