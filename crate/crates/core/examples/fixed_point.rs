//! Integer and Q15 fractional personalities of the same expression.

use luxdbg::eval::fixed::q15_mul;
use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    let mut i = luxdbg::session();
    sh(&mut i, "processor new lx16i int; processor new lx16f frac");
    for e in ["0x4000 * 0x4000", "0x8000 * 0x8000", "0x7fffffff + 1", "-0x80000000 - 1"] {
        println!(
            "{e:>18}  lx16i {:>12}  lx16f {:>12}",
            sh(&mut i, &format!("int fxpr {e} @rh")),
            sh(&mut i, &format!("frac fxpr {e} @rh"))
        );
    }
    // half of a half is a quarter
    println!("q15_mul(0.5, 0.5) = {:#06x}", q15_mul(0x4000, 0x4000));
}
