//! Expression evaluators: `fxpr` over registers, memory and labels, and `ce`
//! over procedural debug symbols.

pub mod ce;
pub mod fixed;
pub mod fxpr;

use indexmap::IndexMap;
use thiserror::Error;

use crate::image::ImageError;
use crate::sim::{ProcessorCore, SimError};
use fixed::{ArithError, Radix};

/// Access to the connected processors during evaluation.
pub trait Targets {
    fn core(&self, instance: &str) -> Option<&ProcessorCore>;
    fn core_mut(&mut self, instance: &str) -> Option<&mut ProcessorCore>;
    /// True while a core executes in the background; such cores are read-only.
    fn running(&self, _instance: &str) -> bool {
        false
    }
}

impl Targets for IndexMap<String, ProcessorCore> {
    fn core(&self, instance: &str) -> Option<&ProcessorCore> {
        self.get(instance)
    }

    fn core_mut(&mut self, instance: &str) -> Option<&mut ProcessorCore> {
        self.get_mut(instance)
    }
}

impl Targets for ProcessorCore {
    fn core(&self, instance: &str) -> Option<&ProcessorCore> {
        (self.instance() == instance).then_some(self)
    }

    fn core_mut(&mut self, instance: &str) -> Option<&mut ProcessorCore> {
        (self.instance() == instance).then_some(self)
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown operand \"{0}\"")]
    UnknownOperand(String),
    #[error("unknown identifier \"{0}\"")]
    UnknownIdentifier(String),
    #[error("unknown instance \"{0}\"")]
    UnknownInstance(String),
    #[error("slice length mismatch: {lhs} vs {rhs}")]
    LengthMismatch { lhs: usize, rhs: usize },
    #[error("processor running")]
    Running,
    #[error("\"{0}\" is not assignable")]
    NotAssignable(String),
    #[error("type misuse: {0}")]
    TypeMisuse(String),
    #[error("index {index} out of range for \"{name}\"")]
    IndexOutOfRange { name: String, index: i64 },
    #[error("address out of range: ymem {0}")]
    Address(i64),
    #[error("vector used as a scalar")]
    VectorOperand,
    #[error("unterminated string at ymem {0}")]
    Unterminated(i64),
    #[error("unknown format \"{0}\"")]
    Format(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Num(i64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Colon,
    ColonColon,
    Radix(Radix),
}

const OPS: [&str; 21] = [
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+", "-", "*", "/", "%", "|", "&", "^", "!", "~", "<",
    ">", "=",
];

pub(crate) fn lex(text: &str) -> Result<Vec<Tok>, EvalError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let lit = &text[start..i];
            out.push(Tok::Num(parse_literal(lit).ok_or_else(|| EvalError::Syntax(format!("bad number \"{lit}\"")))?));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(Tok::Ident(text[start..i].to_string()));
            continue;
        }
        if c == b'@' {
            let radix = match text.get(i..i + 3) {
                Some("@rd") => Radix::Decimal,
                Some("@rh") => Radix::Hex,
                Some("@rb") => Radix::Binary,
                _ => return Err(EvalError::Syntax("bad radix directive".into())),
            };
            out.push(Tok::Radix(radix));
            i += 3;
            continue;
        }
        let tok = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBrack),
            b']' => Some(Tok::RBrack),
            b':' if b.get(i + 1) == Some(&b':') => {
                i += 1;
                Some(Tok::ColonColon)
            }
            b':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(t) = tok {
            out.push(t);
            i += 1;
            continue;
        }
        let op = OPS
            .iter()
            .find(|op| text[i..].starts_with(*op))
            .ok_or_else(|| EvalError::Syntax(format!("unexpected character '{}'", &text[i..].chars().next().unwrap())))?;
        out.push(Tok::Op(op));
        i += op.len();
    }
    Ok(out)
}

/// Parses a decimal, `0x` or `0b` literal.
pub fn parse_literal(s: &str) -> Option<i64> {
    if let Some(h) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        i64::from_str_radix(h, 16).ok()
    } else if let Some(bits) = s.strip_prefix("0b").or_else(|| s.strip_prefix("0B")) {
        i64::from_str_radix(bits, 2).ok()
    } else {
        s.parse().ok()
    }
}

/// Reads a NUL-terminated, one-character-per-word string from ymem.
pub fn read_string(core: &ProcessorCore, addr: i64) -> Result<String, EvalError> {
    let start = usize::try_from(addr).map_err(|_| EvalError::Address(addr))?;
    if start >= crate::sim::YMEM_SIZE {
        return Err(EvalError::Address(addr));
    }
    let mut s = String::new();
    for a in start..crate::sim::YMEM_SIZE {
        let w = core.ymem_read(a, 1)?[0];
        if w == 0 {
            return Ok(s);
        }
        s.push(char::from_u32(w as u32).unwrap_or('?'));
    }
    Err(EvalError::Unterminated(addr))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_fxpr_forms() {
        let toks = lex("p1::sendBuffer(0:*sendCount-1) @rh").unwrap();
        assert_eq!(toks[0], Tok::Ident("p1".into()));
        assert_eq!(toks[1], Tok::ColonColon);
        assert_eq!(toks[5], Tok::Colon);
        assert_eq!(toks.last(), Some(&Tok::Radix(Radix::Hex)));
        assert_eq!(lex("a0=-1").unwrap().len(), 4);
        assert_eq!(lex("0x1f 0b101 12").unwrap(), [Tok::Num(31), Tok::Num(5), Tok::Num(12)]);
        assert!(lex("0xzz").is_err());
        assert!(lex("a $ b").is_err());
    }
}
