//! The lx16 toy instruction set.
//!
//! Program memory holds decoded [`Instruction`] records rather than encoded
//! bits. Every instruction costs one cycle except `MUL`, which costs two.

use std::fmt;
use std::str::FromStr;

use super::regs::lx16_registers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mnemonic {
    Ldi,
    Ld,
    St,
    Mov,
    Add,
    Sub,
    And,
    Or,
    Xor,
    Mul,
    Cmp,
    Beq,
    Bne,
    Blt,
    Jmp,
    Call,
    Ret,
    Push,
    Pop,
    Tas,
    In,
    Out,
    Icall,
    Halt,
    Nop,
}

/// What an operand slot of a mnemonic accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// A general register (not `pc`, not a port).
    Reg,
    /// A port register.
    Port,
    /// An immediate value; symbols resolve to their address.
    Imm,
    /// A program-memory address or code label.
    Target,
    /// A data-memory address, data symbol, or `(rX)` indirection.
    Mem,
}

impl Mnemonic {
    pub const ALL: [Mnemonic; 25] = [
        Mnemonic::Ldi,
        Mnemonic::Ld,
        Mnemonic::St,
        Mnemonic::Mov,
        Mnemonic::Add,
        Mnemonic::Sub,
        Mnemonic::And,
        Mnemonic::Or,
        Mnemonic::Xor,
        Mnemonic::Mul,
        Mnemonic::Cmp,
        Mnemonic::Beq,
        Mnemonic::Bne,
        Mnemonic::Blt,
        Mnemonic::Jmp,
        Mnemonic::Call,
        Mnemonic::Ret,
        Mnemonic::Push,
        Mnemonic::Pop,
        Mnemonic::Tas,
        Mnemonic::In,
        Mnemonic::Out,
        Mnemonic::Icall,
        Mnemonic::Halt,
        Mnemonic::Nop,
    ];

    pub fn name(self) -> &'static str {
        use Mnemonic::*;
        match self {
            Ldi => "LDI",
            Ld => "LD",
            St => "ST",
            Mov => "MOV",
            Add => "ADD",
            Sub => "SUB",
            And => "AND",
            Or => "OR",
            Xor => "XOR",
            Mul => "MUL",
            Cmp => "CMP",
            Beq => "BEQ",
            Bne => "BNE",
            Blt => "BLT",
            Jmp => "JMP",
            Call => "CALL",
            Ret => "RET",
            Push => "PUSH",
            Pop => "POP",
            Tas => "TAS",
            In => "IN",
            Out => "OUT",
            Icall => "ICALL",
            Halt => "HALT",
            Nop => "NOP",
        }
    }

    pub fn signature(self) -> &'static [Shape] {
        use Mnemonic::*;
        use Shape::*;
        match self {
            Ldi => &[Reg, Imm],
            Ld => &[Reg, Mem],
            St => &[Mem, Reg],
            Mov | Add | Sub | And | Or | Xor | Mul | Cmp => &[Reg, Reg],
            Beq | Bne | Jmp | Call => &[Target],
            Blt => &[Reg, Reg, Target],
            Push | Pop => &[Reg],
            Tas => &[Mem],
            In => &[Reg, Port],
            Out => &[Port, Reg],
            Icall => &[Imm],
            Ret | Halt | Nop => &[],
        }
    }

    pub fn cycle_cost(self) -> u32 {
        match self {
            Mnemonic::Mul => 2,
            _ => 1,
        }
    }
}

impl FromStr for Mnemonic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        Mnemonic::ALL
            .iter()
            .copied()
            .find(|m| m.name() == upper)
            .ok_or_else(|| format!("unknown mnemonic \"{s}\""))
    }
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Index into the lx16 register file.
pub type RegId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    Reg(RegId),
    Imm(i64),
    /// Absolute address, in pmem for branch targets and ymem for data accesses.
    Addr(u32),
    Indirect(RegId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub mnemonic: Mnemonic,
    pub operands: Vec<Operand>,
}

impl Instruction {
    /// Builds an instruction, checking operand arity and shapes.
    pub fn new(mnemonic: Mnemonic, operands: Vec<Operand>) -> Result<Self, String> {
        let sig = mnemonic.signature();
        if sig.len() != operands.len() {
            return Err(format!(
                "{mnemonic} takes {} operand(s), got {}",
                sig.len(),
                operands.len()
            ));
        }
        for (shape, op) in sig.iter().zip(&operands) {
            let ok = match (shape, op) {
                (Shape::Reg, Operand::Reg(r)) => is_general(*r),
                (Shape::Port, Operand::Reg(r)) => is_port(*r),
                (Shape::Imm, Operand::Imm(_)) => true,
                (Shape::Target, Operand::Addr(_)) => true,
                (Shape::Mem, Operand::Addr(_)) => true,
                (Shape::Mem, Operand::Indirect(r)) => is_general(*r),
                _ => false,
            };
            if !ok {
                return Err(format!("{mnemonic}: bad operand {}", OperandDisplay(op)));
            }
        }
        Ok(Instruction { mnemonic, operands })
    }

    pub fn cycle_cost(&self) -> u32 {
        self.mnemonic.cycle_cost()
    }

    pub fn nop() -> Self {
        Instruction { mnemonic: Mnemonic::Nop, operands: Vec::new() }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mnemonic)?;
        for (i, op) in self.operands.iter().enumerate() {
            let sep = if i == 0 { " " } else { "," };
            write!(f, "{sep}{}", OperandDisplay(op))?;
        }
        Ok(())
    }
}

struct OperandDisplay<'a>(&'a Operand);

impl fmt::Display for OperandDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Operand::Reg(r) => f.write_str(reg_name(*r)),
            Operand::Imm(v) => write!(f, "{v}"),
            Operand::Addr(a) => write!(f, "0x{a:x}"),
            Operand::Indirect(r) => write!(f, "({})", reg_name(*r)),
        }
    }
}

thread_local! {
    static NAMES: Vec<(String, super::regs::RegKind)> =
        lx16_registers().into_iter().map(|r| (r.name, r.kind)).collect();
}

/// Looks up an ISA register by name.
pub fn reg_id(name: &str) -> Option<RegId> {
    NAMES.with(|n| n.iter().position(|(r, _)| r == name))
}

pub fn reg_name(id: RegId) -> &'static str {
    const TABLE: [&str; 17] = [
        "pc", "sp", "i", "a0", "a1", "r0", "r1", "r2", "r3", "r4", "r5", "r6", "r7", "flag",
        "pio0", "pio1", "cycles",
    ];
    TABLE.get(id).copied().unwrap_or("cyclec")
}

fn is_general(id: RegId) -> bool {
    NAMES.with(|n| {
        n.get(id)
            .is_some_and(|(name, kind)| *kind == super::regs::RegKind::Core && name != "pc")
    })
}

fn is_port(id: RegId) -> bool {
    NAMES.with(|n| n.get(id).is_some_and(|(_, kind)| *kind == super::regs::RegKind::Port))
}

pub(crate) const PC: RegId = 0;
pub(crate) const SP: RegId = 1;
pub(crate) const I: RegId = 2;
pub(crate) const FLAG: RegId = 13;
pub(crate) const CYCLES: RegId = 16;
pub(crate) const CYCLEC: RegId = 17;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_register_ids_match_table() {
        assert_eq!(reg_id("pc"), Some(PC));
        assert_eq!(reg_id("sp"), Some(SP));
        assert_eq!(reg_id("i"), Some(I));
        assert_eq!(reg_id("flag"), Some(FLAG));
        assert_eq!(reg_id("cycles"), Some(CYCLES));
        assert_eq!(reg_id("cyclec"), Some(CYCLEC));
        for id in 0..=CYCLEC {
            assert_eq!(reg_id(reg_name(id)), Some(id));
        }
    }

    #[test]
    fn arity_and_shape_checks() {
        let r0 = reg_id("r0").unwrap();
        let pio1 = reg_id("pio1").unwrap();
        assert!(Instruction::new(Mnemonic::Add, vec![Operand::Reg(r0)]).is_err());
        assert!(Instruction::new(Mnemonic::In, vec![Operand::Reg(r0), Operand::Reg(r0)]).is_err());
        assert!(Instruction::new(Mnemonic::In, vec![Operand::Reg(r0), Operand::Reg(pio1)]).is_ok());
        assert!(Instruction::new(Mnemonic::Mov, vec![Operand::Reg(PC), Operand::Reg(r0)]).is_err());
        let ins = Instruction::new(Mnemonic::Ld, vec![Operand::Reg(r0), Operand::Indirect(SP)]).unwrap();
        assert_eq!(ins.to_string(), "LD r0,(sp)");
    }

    #[test]
    fn only_mul_costs_two() {
        for m in Mnemonic::ALL {
            assert_eq!(m.cycle_cost(), if m == Mnemonic::Mul { 2 } else { 1 });
        }
    }
}
