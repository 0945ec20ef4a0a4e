use std::fmt;

/// Signedness tag shown in register reflection tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Signed,
    Unsigned,
}

impl Sign {
    pub fn tag(self) -> &'static str {
        match self {
            Sign::Signed => "s",
            Sign::Unsigned => "u",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegKind {
    Core,
    Port,
    /// Excluded from reflection and evaluators until hidden registers are made visible.
    Hidden,
    /// Debugger-side state only; no instruction reads or writes it.
    Pseudo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterDescriptor {
    pub name: String,
    pub width: u32,
    pub sign: Sign,
    pub kind: RegKind,
    pub reset_value: u64,
}

impl RegisterDescriptor {
    pub fn new(name: &str, width: u32, sign: Sign, kind: RegKind, reset_value: u64) -> Self {
        assert!((1..=64).contains(&width), "register width out of range");
        let desc = RegisterDescriptor { name: name.to_string(), width, sign, kind, reset_value };
        assert_eq!(desc.mask(reset_value), reset_value, "reset value does not fit {name}");
        desc
    }

    pub fn mask(&self, value: u64) -> u64 {
        if self.width == 64 {
            value
        } else {
            value & ((1u64 << self.width) - 1)
        }
    }

    /// Interprets a stored (masked) value according to the register's sign.
    pub fn interpret(&self, raw: u64) -> i64 {
        match self.sign {
            Sign::Unsigned => raw as i64,
            Sign::Signed => sign_extend(raw, self.width),
        }
    }
}

pub fn sign_extend(raw: u64, width: u32) -> i64 {
    if width >= 64 {
        return raw as i64;
    }
    let shift = 64 - width;
    ((raw << shift) as i64) >> shift
}

impl fmt::Display for RegisterDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.name, self.sign.tag(), self.width)
    }
}

/// The lx16 register file in declaration order.
pub(crate) fn lx16_registers() -> Vec<RegisterDescriptor> {
    use RegKind::*;
    use Sign::*;
    let mut regs = vec![
        RegisterDescriptor::new("pc", 20, Unsigned, Core, 0),
        RegisterDescriptor::new("sp", 16, Unsigned, Core, 0xFFFF),
        RegisterDescriptor::new("i", 16, Unsigned, Core, 0),
        RegisterDescriptor::new("a0", 32, Signed, Core, 0),
        RegisterDescriptor::new("a1", 32, Signed, Core, 0),
    ];
    for n in 0..8 {
        regs.push(RegisterDescriptor::new(&format!("r{n}"), 16, Unsigned, Core, 0));
    }
    regs.push(RegisterDescriptor::new("flag", 1, Unsigned, Core, 0));
    regs.push(RegisterDescriptor::new("pio0", 16, Unsigned, Port, 0));
    regs.push(RegisterDescriptor::new("pio1", 16, Unsigned, Port, 0));
    regs.push(RegisterDescriptor::new("cycles", 32, Unsigned, Hidden, 0));
    regs.push(RegisterDescriptor::new("cyclec", 8, Unsigned, Hidden, 0));
    regs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_extension() {
        assert_eq!(sign_extend(0xFFFF_FFFF, 32), -1);
        assert_eq!(sign_extend(0x7FFF, 16), 0x7FFF);
        assert_eq!(sign_extend(0x8000, 16), -0x8000);
    }

    #[test]
    fn table_has_unique_names() {
        let regs = lx16_registers();
        let mut names: Vec<_> = regs.iter().map(|r| r.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), regs.len());
    }
}
