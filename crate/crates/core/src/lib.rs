pub mod eval;
pub mod image;
pub mod kernel;
pub mod lang;
pub mod library;
pub mod service;
pub mod sim;

use kernel::Kernel;
use lang::Interp;

/// A kernel interpreter with the shipped script library available through `require`.
pub fn session() -> Interp<Kernel> {
    let mut i = kernel::new_interp();
    library::install(&mut i);
    i
}

/// Like [`session`], but stdout is captured for the caller to drain.
pub fn capturing_session() -> Interp<Kernel> {
    let mut i = kernel::new_capturing_interp();
    library::install(&mut i);
    i
}
