//! A reduced C expression evaluator over procedural debug symbols.
//!
//! Identifiers name ymem storage: globals at their absolute address, locals
//! at `sp + offset` while in scope. `int16` reads are sign-extended, `int32`
//! takes its low word first, `ptr` is an unsigned word, and arrays decay to
//! their address.

use super::fixed::{personality_arith, personality_unary, BinOp, Personality, UnOp, Value};
use super::{lex, read_string, EvalError, Targets, Tok};
use crate::image::{ImageError, SymbolKind, TypeTag};
use crate::sim::regs::sign_extend;
use crate::sim::{ProcessorCore, YMEM_SIZE};

#[derive(Debug, Clone, PartialEq, Eq)]
enum CExpr {
    Num(i64),
    Ident(String),
    Deref(Box<CExpr>),
    Index(Box<CExpr>, Box<CExpr>),
    Unary(UnOp, Box<CExpr>),
    Binary(BinOp, Box<CExpr>, Box<CExpr>),
    Assign(Box<CExpr>, Box<CExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CType {
    Int,
    Int32,
    Ptr,
    Array(u32),
}

impl From<TypeTag> for CType {
    fn from(t: TypeTag) -> Self {
        match t {
            TypeTag::Int16 => CType::Int,
            TypeTag::Int32 => CType::Int32,
            TypeTag::Ptr => CType::Ptr,
            TypeTag::Array(n) => CType::Array(n),
        }
    }
}

/// Output format for `ce` results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CFormat {
    #[default]
    Decimal,
    Hex,
    Str,
}

impl CFormat {
    pub fn parse(s: &str) -> Result<CFormat, EvalError> {
        match s {
            "%d" => Ok(CFormat::Decimal),
            "%x" => Ok(CFormat::Hex),
            "%s" => Ok(CFormat::Str),
            other => Err(EvalError::Format(other.to_string())),
        }
    }
}

const UNARY_BP: u8 = 11;

fn binary_op(tok: &Tok) -> Option<(BinOp, u8)> {
    let Tok::Op(op) = tok else { return None };
    Some(match *op {
        "||" => (BinOp::LogOr, 1),
        "&&" => (BinOp::LogAnd, 2),
        "==" => (BinOp::Eq, 6),
        "!=" => (BinOp::Ne, 6),
        "<" => (BinOp::Lt, 7),
        "<=" => (BinOp::Le, 7),
        ">" => (BinOp::Gt, 7),
        ">=" => (BinOp::Ge, 7),
        "+" => (BinOp::Add, 9),
        "-" => (BinOp::Sub, 9),
        "*" => (BinOp::Mul, 10),
        "/" => (BinOp::Div, 10),
        "%" => (BinOp::Rem, 10),
        _ => return None,
    })
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), EvalError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(EvalError::Syntax(format!("expected {want:?}, found {other:?}"))),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<CExpr, EvalError> {
        let mut lhs = self.postfix()?;
        while let Some(tok) = self.toks.get(self.pos) {
            if *tok == Tok::Op("=") && min_bp == 0 {
                self.pos += 1;
                let rhs = self.expr(0)?;
                return Ok(CExpr::Assign(Box::new(lhs), Box::new(rhs)));
            }
            let Some((op, bp)) = binary_op(tok) else { break };
            if bp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(bp + 1)?;
            lhs = CExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> Result<CExpr, EvalError> {
        let mut e = self.primary()?;
        while self.toks.get(self.pos) == Some(&Tok::LBrack) {
            self.pos += 1;
            let idx = self.expr(0)?;
            self.expect(Tok::RBrack)?;
            e = CExpr::Index(Box::new(e), Box::new(idx));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<CExpr, EvalError> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(CExpr::Num(n)),
            Some(Tok::Ident(name)) if name == "NULL" => Ok(CExpr::Num(0)),
            Some(Tok::Ident(name)) => Ok(CExpr::Ident(name)),
            Some(Tok::LParen) => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Op(op)) => {
                let inner = self.expr(UNARY_BP)?;
                match op {
                    "-" => Ok(CExpr::Unary(UnOp::Neg, Box::new(inner))),
                    "!" => Ok(CExpr::Unary(UnOp::Not, Box::new(inner))),
                    "*" => Ok(CExpr::Deref(Box::new(inner))),
                    other => Err(EvalError::Syntax(format!("unexpected operator \"{other}\""))),
                }
            }
            other => Err(EvalError::Syntax(format!("unexpected {other:?}"))),
        }
    }
}

fn parse(text: &str) -> Result<CExpr, EvalError> {
    let toks = lex(text)?;
    if toks.iter().any(|t| matches!(t, Tok::Radix(_) | Tok::Colon | Tok::ColonColon)) {
        return Err(EvalError::Syntax("not a C expression".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr(0)?;
    if p.pos != p.toks.len() {
        return Err(EvalError::Syntax(format!("unexpected {:?}", p.toks[p.pos])));
    }
    Ok(e)
}

/// Evaluates a C expression on processor `current`, rendering it with `format`.
pub fn ce_eval<T: Targets + ?Sized>(
    targets: &mut T,
    current: &str,
    text: &str,
    format: CFormat,
) -> Result<String, EvalError> {
    let expr = parse(text)?;
    if targets.core(current).is_none() {
        return Err(EvalError::UnknownInstance(current.to_string()));
    }
    let running = targets.running(current);
    let core = targets.core_mut(current).unwrap();
    let mut ev = CEval { core, running };
    let (v, _) = ev.rvalue(&expr)?;
    Ok(match format {
        CFormat::Decimal => v.to_string(),
        CFormat::Hex => format!("{:x}", v as i32 as u32),
        CFormat::Str => read_string(ev.core, v)?,
    })
}

struct CEval<'a> {
    core: &'a mut ProcessorCore,
    running: bool,
}

impl CEval<'_> {
    fn word(&self, addr: i64) -> Result<u16, EvalError> {
        if !(0..YMEM_SIZE as i64).contains(&addr) {
            return Err(EvalError::Address(addr));
        }
        Ok(self.core.ymem_read(addr as usize, 1)?[0])
    }

    /// Storage location and type of an lvalue.
    fn place(&mut self, e: &CExpr) -> Result<(i64, CType), EvalError> {
        match e {
            CExpr::Ident(name) => {
                let sym = self.core.resolve(name).map_err(|err| match err {
                    ImageError::UnknownSymbol(n) => EvalError::UnknownIdentifier(n),
                    ImageError::NoImage => EvalError::UnknownIdentifier(name.clone()),
                    other => other.into(),
                })?;
                if matches!(sym.kind, SymbolKind::Label | SymbolKind::Function) {
                    return Err(EvalError::TypeMisuse(format!("\"{name}\" is not a variable")));
                }
                Ok((sym.address, sym.type_tag.into()))
            }
            CExpr::Deref(inner) => {
                let (p, ty) = self.rvalue(inner)?;
                if ty != CType::Ptr {
                    return Err(EvalError::TypeMisuse("dereference of a non-pointer".into()));
                }
                Ok((p, CType::Int))
            }
            CExpr::Index(base, idx) => {
                let (addr, ty) = self.place(base)?;
                let CType::Array(len) = ty else {
                    return Err(EvalError::TypeMisuse("indexing a non-array".into()));
                };
                let (i, _) = self.rvalue(idx)?;
                if !(0..len as i64).contains(&i) {
                    return Err(EvalError::IndexOutOfRange { name: "array".into(), index: i });
                }
                Ok((addr + i, CType::Int))
            }
            _ => Err(EvalError::NotAssignable("expression".into())),
        }
    }

    fn load(&self, addr: i64, ty: CType) -> Result<i64, EvalError> {
        Ok(match ty {
            CType::Int => sign_extend(self.word(addr)? as u64, 16),
            CType::Ptr => self.word(addr)? as i64,
            CType::Int32 => {
                let lo = self.word(addr)? as u64;
                let hi = self.word(addr + 1)? as u64;
                sign_extend(hi << 16 | lo, 32)
            }
            CType::Array(_) => addr,
        })
    }

    fn rvalue(&mut self, e: &CExpr) -> Result<(i64, CType), EvalError> {
        match e {
            CExpr::Num(n) => Ok((*n, CType::Int)),
            CExpr::Ident(_) | CExpr::Deref(_) | CExpr::Index(..) => {
                let (addr, ty) = self.place(e)?;
                Ok((self.load(addr, ty)?, ty))
            }
            CExpr::Unary(op, inner) => {
                let (v, _) = self.rvalue(inner)?;
                Ok((personality_unary(*op, Value::int(v), Personality::Integer).magnitude, CType::Int))
            }
            CExpr::Binary(op, a, b) => {
                let (x, _) = self.rvalue(a)?;
                match op {
                    BinOp::LogAnd if x == 0 => return Ok((0, CType::Int)),
                    BinOp::LogOr if x != 0 => return Ok((1, CType::Int)),
                    _ => {}
                }
                let (y, _) = self.rvalue(b)?;
                let v = personality_arith(*op, Value::int(x), Value::int(y), Personality::Integer)?;
                Ok((v.magnitude, CType::Int))
            }
            CExpr::Assign(lhs, rhs) => {
                let (v, _) = self.rvalue(rhs)?;
                let (addr, ty) = self.place(lhs)?;
                if self.running {
                    return Err(EvalError::Running);
                }
                let words: Vec<u64> = match ty {
                    CType::Int | CType::Ptr => vec![v as u64 & 0xFFFF],
                    CType::Int32 => vec![v as u64 & 0xFFFF, (v as u64 >> 16) & 0xFFFF],
                    CType::Array(_) => return Err(EvalError::NotAssignable("array".into())),
                };
                if !(0..=(YMEM_SIZE - words.len()) as i64).contains(&addr) {
                    return Err(EvalError::Address(addr));
                }
                self.core.ymem_write(addr as usize, &words)?;
                Ok((self.load(addr, ty)?, ty))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::fxpr::fxpr_eval;
    use crate::image::ProgramImage;
    use crate::sim::Mode;

    const IMG: &str = r#"{
      "name": "c",
      "pmem": [{"addr": 0, "op": "NOP"}, {"addr": 1, "op": "NOP"}, {"addr": 2, "op": "RET"}],
      "ymem": [{"addr": 52, "value": 9}, {"addr": 60, "string": "ok"}, {"addr": 70, "value": 60}],
      "symbols": [
        {"name": "head_of_list", "kind": "global_var", "address": 40, "type": "ptr"},
        {"name": "output", "kind": "global_var", "address": 41},
        {"name": "big", "kind": "global_var", "address": 42, "type": "int32"},
        {"name": "a", "kind": "global_var", "address": 50, "type": "int16[4]"},
        {"name": "msg", "kind": "global_var", "address": 70, "type": "ptr"}
      ],
      "functions": [{"name": "f", "entry": 1, "exits": [2], "file": "f.c", "lines": [5, 9],
                     "locals": [{"name": "n", "kind": "local_var", "offset": 2}]}],
      "lines": [{"addr": 0, "file": "f.c", "line": 1}, {"addr": 1, "file": "f.c", "line": 5}]
    }"#;

    fn core() -> ProcessorCore {
        let mut c = ProcessorCore::create("lx16i", "p1", Mode::Sim).unwrap();
        c.load_image(ProgramImage::from_json(IMG).unwrap());
        c
    }

    fn ce(c: &mut ProcessorCore, text: &str) -> String {
        ce_eval(c, "p1", text, CFormat::Decimal).unwrap_or_else(|e| panic!("{text}: {e}"))
    }

    #[test]
    fn globals_null_and_indexing() {
        let mut c = core();
        assert_eq!(ce(&mut c, "head_of_list != NULL"), "0");
        assert_eq!(ce(&mut c, "output = 7"), "7");
        assert_eq!(ce(&mut c, "output"), "7");
        assert_eq!(ce(&mut c, "a[2]"), "9");
        assert_eq!(ce(&mut c, "a[1] = a[2] * 2 + 1"), "19");
        assert_eq!(ce(&mut c, "big = 131073"), "131073");
        assert_eq!(c.ymem_read(42, 2).unwrap(), [1, 2]);
        assert_eq!(ce_eval(&mut c, "p1", "output - 8", CFormat::Hex).unwrap(), "ffffffff");
        assert_eq!(ce_eval(&mut c, "p1", "msg", CFormat::Str).unwrap(), "ok");
        assert_eq!(ce(&mut c, "*msg"), "111");
    }

    #[test]
    fn errors() {
        let mut c = core();
        assert!(matches!(ce_eval(&mut c, "p1", "nosuch", CFormat::Decimal), Err(EvalError::UnknownIdentifier(_))));
        assert!(matches!(ce_eval(&mut c, "p1", "output[1]", CFormat::Decimal), Err(EvalError::TypeMisuse(_))));
        assert!(matches!(ce_eval(&mut c, "p1", "*output", CFormat::Decimal), Err(EvalError::TypeMisuse(_))));
        assert!(matches!(ce_eval(&mut c, "p1", "n", CFormat::Decimal), Err(EvalError::Image(_))));
        assert!(matches!(ce_eval(&mut c, "p1", "output +", CFormat::Decimal), Err(EvalError::Syntax(_))));
        assert!(CFormat::parse("%q").is_err());
    }

    #[test]
    fn locals_use_stack_offsets() {
        let mut c = core();
        c.write_instruction(0, None).unwrap();
        c.reg_write("pc", 1).unwrap();
        c.reg_write("sp", 0x100).unwrap();
        c.ymem_write(0x102, &[0xFFFE]).unwrap();
        assert_eq!(ce(&mut c, "n"), "-2");
    }

    #[test]
    fn agrees_with_fxpr_on_int16_globals() {
        let mut c = core();
        for v in [0u64, 1, 0x7FFF, 0x8000, 0xFFFF] {
            c.ymem_write(41, &[v]).unwrap();
            let a = ce(&mut c, "output");
            let b = fxpr_eval(&mut c, "p1", "*output").unwrap();
            assert_eq!(a, b);
        }
    }
}
