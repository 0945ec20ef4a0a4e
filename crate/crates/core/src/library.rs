//! Shipped extension-language scripts, embedded so they load from any directory.

use crate::kernel::Kernel;
use crate::lang::{wrong_args, CmdResult, Flow, Interp};

pub const SCRIPTS: [(&str, &str); 5] = [
    ("count", include_str!("../lib/count.lx")),
    ("log", include_str!("../lib/log.lx")),
    ("sched", include_str!("../lib/sched.lx")),
    ("printf", include_str!("../lib/printf.lx")),
    ("mailbox", include_str!("../lib/mailbox.lx")),
];

pub fn script(name: &str) -> Option<&'static str> {
    SCRIPTS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Registers `require NAME ?NAME ...?`, which evaluates library scripts at global scope.
pub fn install(i: &mut Interp<Kernel>) {
    i.register("require", require);
}

fn require(i: &mut Interp<Kernel>, a: &[String]) -> CmdResult {
    if a.len() < 2 {
        return Err(wrong_args("require name ?name ...?"));
    }
    for name in &a[1..] {
        let text = script(name).ok_or_else(|| {
            let known: Vec<&str> = SCRIPTS.iter().map(|(n, _)| *n).collect();
            Flow::Error(format!("unknown library \"{name}\": should be one of {}", known.join(", ")))
        })?;
        i.eval_global(text)
            .map_err(|e| Flow::Error(format!("{} (in library \"{name}\")", e.message())))?;
    }
    Ok(String::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::new_capturing_interp;

    fn session() -> Interp<Kernel> {
        let mut i = new_capturing_interp();
        install(&mut i);
        i
    }

    #[test]
    fn every_library_loads() {
        let mut i = session();
        for (name, _) in SCRIPTS {
            i.eval(&format!("require {name}")).unwrap_or_else(|e| panic!("{name}: {}", e.message()));
        }
        assert!(i.is_proc("pollMailbox") && i.is_proc("handle_printf") && i.is_proc("setCount"));
        assert!(i.eval("require nope").is_err());
    }

    #[test]
    fn log_registers_lists_every_visible_register() {
        let mut i = session();
        i.eval("require log; processor new lx16i p1; p1 logRegisters").unwrap();
        let out = i.take_output();
        assert_eq!(out.lines().next(), Some("reg: pc width 20"));
        assert!(!out.contains("cycles"));
        i.eval("configure -hiddenregisters on; logRegisters").unwrap();
        assert!(i.take_output().contains("reg: cycles width 32"));
    }
}
