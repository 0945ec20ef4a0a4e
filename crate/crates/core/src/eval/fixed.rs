//! Personality arithmetic shared by the fxpr evaluator and the `MUL`/`ADD`/`SUB`
//! instructions.
//!
//! Integer personality wraps every arithmetic result to 32-bit two's
//! complement. Fractional personality multiplies in Q15 (truncating toward
//! zero, saturating to 16 bits) and saturates addition and subtraction at the
//! 32-bit accumulator bounds.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Personality {
    Integer,
    Fractional,
}

impl Personality {
    pub fn name(self) -> &'static str {
        match self {
            Personality::Integer => "integer",
            Personality::Fractional => "fractional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Radix {
    #[default]
    Decimal,
    Hex,
    Binary,
}

/// An fxpr operand or result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Value {
    pub magnitude: i64,
    pub width: u32,
    pub radix: Radix,
}

impl Value {
    pub fn new(magnitude: i64, width: u32) -> Self {
        Value { magnitude, width, radix: Radix::Decimal }
    }

    pub fn int(magnitude: i64) -> Self {
        Value::new(magnitude, 32)
    }

    pub fn render(&self, radix: Radix) -> String {
        render(self.magnitude, radix)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(self.radix))
    }
}

/// Renders a magnitude; negative values keep their sign in every radix so the
/// text re-evaluates to the same number.
pub fn render(v: i64, radix: Radix) -> String {
    let (neg, mag) = (v < 0, v.unsigned_abs());
    let body = match radix {
        Radix::Decimal => return v.to_string(),
        Radix::Hex => format!("0x{mag:x}"),
        Radix::Binary => format!("0b{mag:b}"),
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    BitOr,
    BitAnd,
    BitXor,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LogAnd,
    LogOr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
    BitNot,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivideByZero,
}

fn wrap32(v: i64) -> i64 {
    v as i32 as i64
}

fn sat32(v: i128) -> i64 {
    v.clamp(i32::MIN as i128, i32::MAX as i128) as i64
}

/// Q15 multiply: `clamp(trunc(a * b / 2^15), -2^15, 2^15 - 1)`.
pub fn q15_mul(a: i16, b: i16) -> i16 {
    let product = a as i32 * b as i32;
    (product / (1 << 15)).clamp(i16::MIN as i32, i16::MAX as i32) as i16
}

fn low16(v: i64) -> i16 {
    v as u16 as i16
}

pub fn personality_arith(
    op: BinOp,
    a: Value,
    b: Value,
    personality: Personality,
) -> Result<Value, ArithError> {
    let (x, y) = (a.magnitude, b.magnitude);
    let flag = |c: bool| Ok(Value::int(c as i64));
    let v = match op {
        BinOp::Eq => return flag(x == y),
        BinOp::Ne => return flag(x != y),
        BinOp::Lt => return flag(x < y),
        BinOp::Le => return flag(x <= y),
        BinOp::Gt => return flag(x > y),
        BinOp::Ge => return flag(x >= y),
        BinOp::LogAnd => return flag(x != 0 && y != 0),
        BinOp::LogOr => return flag(x != 0 || y != 0),
        BinOp::Mul if personality == Personality::Fractional => {
            return Ok(Value::new(q15_mul(low16(x), low16(y)) as i64, 16));
        }
        BinOp::Add if personality == Personality::Fractional => sat32(x as i128 + y as i128),
        BinOp::Sub if personality == Personality::Fractional => sat32(x as i128 - y as i128),
        BinOp::Add => wrap32(x.wrapping_add(y)),
        BinOp::Sub => wrap32(x.wrapping_sub(y)),
        BinOp::Mul => wrap32(x.wrapping_mul(y)),
        BinOp::Div => {
            if y == 0 {
                return Err(ArithError::DivideByZero);
            }
            wrap32(x.wrapping_div(y))
        }
        BinOp::Rem => {
            if y == 0 {
                return Err(ArithError::DivideByZero);
            }
            wrap32(x.wrapping_rem(y))
        }
        BinOp::BitOr => wrap32(x | y),
        BinOp::BitAnd => wrap32(x & y),
        BinOp::BitXor => wrap32(x ^ y),
        BinOp::Shl => wrap32(x.wrapping_shl((y & 63) as u32)),
        BinOp::Shr => wrap32(((x as u64) >> (y & 63)) as i64),
    };
    Ok(Value::int(v))
}

pub fn personality_unary(op: UnOp, a: Value, personality: Personality) -> Value {
    let x = a.magnitude;
    let v = match op {
        UnOp::Not => (x == 0) as i64,
        UnOp::BitNot => wrap32(!x),
        UnOp::Neg if personality == Personality::Fractional => sat32(-(x as i128)),
        UnOp::Neg => wrap32(x.wrapping_neg()),
    };
    Value::int(v)
}
