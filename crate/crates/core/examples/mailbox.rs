//! Two cores swap 100 messages each way through debugger-polled mailboxes.
//!
//! ```text
//! cargo run --example mailbox -- hw 25
//! ```

use luxdbg::kernel::Kernel;
use luxdbg::lang::{join_list, Interp};

fn sh(i: &mut Interp<Kernel>, cmd: &str) -> String {
    i.eval(cmd).unwrap_or_else(|e| panic!("{cmd}: {}", e.message()))
}

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut i = luxdbg::session();
    i.set_var_global("argv", &join_list(&args)).unwrap();
    sh(&mut i, "source tests/mailbox_demo.lx");
    print!("{}", i.take_output());
}
