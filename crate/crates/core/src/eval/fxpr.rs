//! The machine/assembly-level expression evaluator.
//!
//! Operands are registers, assembly symbols and ymem words. A bare symbol
//! evaluates to its address; `*X` reads the ymem word at `X`. `name(i)` is an
//! array element, `name(lo:hi)` an inclusive vector slice, and `inst::X`
//! evaluates the primary `X` against another processor. A trailing `@rd`,
//! `@rh` or `@rb` selects the output radix. The grammar is in
//! `docs/fxpr.grammar`.

use super::fixed::{personality_arith, personality_unary, render, BinOp, Radix, UnOp, Value};
use super::{lex, EvalError, Targets, Tok};
use crate::image::{ImageError, Symbol, TypeTag};
use crate::sim::regs::sign_extend;
use crate::sim::{ProcessorCore, SimError, Space, YMEM_SIZE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(i64),
    Name(String),
    Deref(Box<Expr>),
    Index(String, Box<Expr>),
    Slice(String, Box<Expr>, Box<Expr>),
    Qualified(String, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Assign(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub expr: Expr,
    pub radix: Radix,
}

/// Result of evaluating an expression: one value or a vector of raw words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Val {
    Scalar(Value),
    Vector(Vec<u16>),
}

impl Val {
    pub fn render(&self, radix: Radix) -> String {
        match self {
            Val::Scalar(v) => render(v.magnitude, radix),
            Val::Vector(words) => words
                .iter()
                .map(|w| render(sign_extend(*w as u64, 16), radix))
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

const UNARY_BP: u8 = 11;

fn binary_op(tok: &Tok) -> Option<(BinOp, u8)> {
    let Tok::Op(op) = tok else { return None };
    Some(match *op {
        "||" => (BinOp::LogOr, 1),
        "&&" => (BinOp::LogAnd, 2),
        "|" => (BinOp::BitOr, 3),
        "^" => (BinOp::BitXor, 4),
        "&" => (BinOp::BitAnd, 5),
        "==" => (BinOp::Eq, 6),
        "!=" => (BinOp::Ne, 6),
        "<" => (BinOp::Lt, 7),
        "<=" => (BinOp::Le, 7),
        ">" => (BinOp::Gt, 7),
        ">=" => (BinOp::Ge, 7),
        "<<" => (BinOp::Shl, 8),
        ">>" => (BinOp::Shr, 8),
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
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), EvalError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(EvalError::Syntax(format!("expected {want:?}, found {t:?}"))),
            None => Err(EvalError::Syntax(format!("expected {want:?} at end of expression"))),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, EvalError> {
        let mut lhs = self.prefix()?;
        loop {
            let Some(tok) = self.peek() else { break };
            if *tok == Tok::Op("=") {
                if min_bp > 0 {
                    break;
                }
                self.pos += 1;
                let rhs = self.expr(0)?;
                return Ok(Expr::Assign(Box::new(lhs), Box::new(rhs)));
            }
            let Some((op, bp)) = binary_op(tok) else { break };
            if bp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(bp + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, EvalError> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(Expr::Num(n)),
            Some(Tok::Ident(name)) => match self.peek() {
                Some(Tok::ColonColon) => {
                    self.pos += 1;
                    let inner = self.prefix()?;
                    Ok(Expr::Qualified(name, Box::new(inner)))
                }
                Some(Tok::LParen) => {
                    self.pos += 1;
                    let first = self.expr(0)?;
                    if self.peek() == Some(&Tok::Colon) {
                        self.pos += 1;
                        let hi = self.expr(0)?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Slice(name, Box::new(first), Box::new(hi)))
                    } else {
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Index(name, Box::new(first)))
                    }
                }
                _ => Ok(Expr::Name(name)),
            },
            Some(Tok::LParen) => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Op(op)) => {
                let inner = |p: &mut Parser| p.expr(UNARY_BP).map(Box::new);
                match op {
                    "-" => Ok(Expr::Unary(UnOp::Neg, inner(self)?)),
                    "!" => Ok(Expr::Unary(UnOp::Not, inner(self)?)),
                    "~" => Ok(Expr::Unary(UnOp::BitNot, inner(self)?)),
                    "*" => Ok(Expr::Deref(inner(self)?)),
                    "+" => self.expr(UNARY_BP),
                    other => Err(EvalError::Syntax(format!("unexpected operator \"{other}\""))),
                }
            }
            Some(t) => Err(EvalError::Syntax(format!("unexpected {t:?}"))),
            None => Err(EvalError::Syntax("unexpected end of expression".into())),
        }
    }
}

/// Parses an fxpr expression with its optional trailing radix directive.
pub fn parse(text: &str) -> Result<Parsed, EvalError> {
    let mut toks = lex(text)?;
    let radix = match toks.last() {
        Some(Tok::Radix(r)) => {
            let r = *r;
            toks.pop();
            r
        }
        _ => Radix::Decimal,
    };
    if toks.iter().any(|t| matches!(t, Tok::Radix(_))) {
        return Err(EvalError::Syntax("radix directive must be trailing".into()));
    }
    if toks.iter().any(|t| matches!(t, Tok::LBrack | Tok::RBrack)) {
        return Err(EvalError::Syntax("unexpected bracket".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let expr = p.expr(0)?;
    if let Some(t) = p.peek() {
        return Err(EvalError::Syntax(format!("unexpected {t:?}")));
    }
    Ok(Parsed { expr, radix })
}

/// Evaluates `text` against processor `current` and renders the result.
pub fn fxpr_eval<T: Targets + ?Sized>(targets: &mut T, current: &str, text: &str) -> Result<String, EvalError> {
    let parsed = parse(text)?;
    let v = evaluate(targets, current, &parsed.expr)?;
    Ok(v.render(parsed.radix))
}

pub fn evaluate<T: Targets + ?Sized>(targets: &mut T, current: &str, expr: &Expr) -> Result<Val, EvalError> {
    Evaluator { t: targets }.eval(current, expr)
}

struct Evaluator<'a, T: Targets + ?Sized> {
    t: &'a mut T,
}

fn lookup_symbol(core: &ProcessorCore, name: &str) -> Result<Option<Symbol>, EvalError> {
    match core.resolve(name) {
        Ok(s) => Ok(Some(s)),
        Err(ImageError::UnknownSymbol(_)) | Err(ImageError::NoImage) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn visible_register(core: &ProcessorCore, name: &str) -> Result<bool, EvalError> {
    match core.descriptor(name) {
        Ok(_) => Ok(true),
        Err(SimError::UnknownRegister(_)) | Err(SimError::HiddenRegister(_)) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

fn check_ymem(addr: i64) -> Result<usize, EvalError> {
    if (0..YMEM_SIZE as i64).contains(&addr) {
        Ok(addr as usize)
    } else {
        Err(EvalError::Address(addr))
    }
}

impl<T: Targets + ?Sized> Evaluator<'_, T> {
    fn core(&self, inst: &str) -> Result<&ProcessorCore, EvalError> {
        self.t.core(inst).ok_or_else(|| EvalError::UnknownInstance(inst.to_string()))
    }

    fn core_mut(&mut self, inst: &str) -> Result<&mut ProcessorCore, EvalError> {
        if self.t.core(inst).is_none() {
            return Err(EvalError::UnknownInstance(inst.to_string()));
        }
        if self.t.running(inst) {
            return Err(EvalError::Running);
        }
        Ok(self.t.core_mut(inst).unwrap())
    }

    fn scalar(&mut self, inst: &str, e: &Expr) -> Result<Value, EvalError> {
        match self.eval(inst, e)? {
            Val::Scalar(v) => Ok(v),
            Val::Vector(_) => Err(EvalError::VectorOperand),
        }
    }

    fn read_word(&self, inst: &str, addr: i64) -> Result<Value, EvalError> {
        let a = check_ymem(addr)?;
        let w = self.core(inst)?.ymem_read(a, 1)?[0];
        Ok(Value::new(sign_extend(w as u64, 16), 16))
    }

    /// Address of `name(index)` after checking it is an in-range ymem array element.
    fn element(&self, inst: &str, name: &str, index: i64) -> Result<(Symbol, i64), EvalError> {
        let core = self.core(inst)?;
        let sym = lookup_symbol(core, name)?.ok_or_else(|| EvalError::UnknownOperand(name.to_string()))?;
        if sym.space() != Space::Ymem {
            return Err(EvalError::TypeMisuse(format!("\"{name}\" is not in data memory")));
        }
        let TypeTag::Array(len) = sym.type_tag else {
            return Err(EvalError::TypeMisuse(format!("\"{name}\" is not an array")));
        };
        if !(0..len as i64).contains(&index) {
            return Err(EvalError::IndexOutOfRange { name: name.to_string(), index });
        }
        let addr = sym.address + index;
        Ok((sym, addr))
    }

    fn slice_bounds(&mut self, inst: &str, name: &str, lo: &Expr, hi: &Expr) -> Result<(i64, usize), EvalError> {
        let lo = self.scalar(inst, lo)?.magnitude;
        let hi = self.scalar(inst, hi)?.magnitude;
        if hi < lo {
            return Err(EvalError::IndexOutOfRange { name: name.to_string(), index: hi });
        }
        let (_, start) = self.element(inst, name, lo)?;
        self.element(inst, name, hi)?;
        Ok((start, (hi - lo + 1) as usize))
    }

    fn eval(&mut self, inst: &str, e: &Expr) -> Result<Val, EvalError> {
        let scalar = |v: Value| Ok(Val::Scalar(v));
        match e {
            Expr::Num(n) => scalar(Value::int(*n)),
            Expr::Name(name) => {
                let core = self.core(inst)?;
                if visible_register(core, name)? {
                    let width = core.descriptor(name)?.width;
                    return scalar(Value::new(core.reg_value(name)?, width));
                }
                match lookup_symbol(core, name)? {
                    Some(sym) => scalar(Value::int(sym.address)),
                    None => Err(EvalError::UnknownOperand(name.clone())),
                }
            }
            Expr::Deref(inner) => {
                let addr = self.scalar(inst, inner)?.magnitude;
                scalar(self.read_word(inst, addr)?)
            }
            Expr::Index(name, idx) => {
                let i = self.scalar(inst, idx)?.magnitude;
                let (_, addr) = self.element(inst, name, i)?;
                scalar(self.read_word(inst, addr)?)
            }
            Expr::Slice(name, lo, hi) => {
                let (start, n) = self.slice_bounds(inst, name, lo, hi)?;
                Ok(Val::Vector(self.core(inst)?.ymem_read(start as usize, n)?))
            }
            Expr::Qualified(other, inner) => self.eval(other, inner),
            Expr::Unary(op, inner) => {
                let v = self.scalar(inst, inner)?;
                let p = self.core(inst)?.personality();
                scalar(personality_unary(*op, v, p))
            }
            Expr::Binary(op, a, b) => {
                let x = self.scalar(inst, a)?;
                let short = match op {
                    BinOp::LogAnd if x.magnitude == 0 => Some(0),
                    BinOp::LogOr if x.magnitude != 0 => Some(1),
                    _ => None,
                };
                if let Some(v) = short {
                    return scalar(Value::int(v));
                }
                let y = self.scalar(inst, b)?;
                let p = self.core(inst)?.personality();
                scalar(personality_arith(*op, x, y, p)?)
            }
            Expr::Assign(lhs, rhs) => {
                let v = self.eval(inst, rhs)?;
                self.assign(inst, lhs, v)
            }
        }
    }

    fn store_words(&mut self, inst: &str, addr: i64, words: &[u16]) -> Result<Val, EvalError> {
        let start = check_ymem(addr)?;
        check_ymem(addr + words.len() as i64 - 1)?;
        let vals: Vec<u64> = words.iter().map(|w| *w as u64).collect();
        let core = self.core_mut(inst)?;
        core.ymem_write(start, &vals)?;
        let back = core.ymem_read(start, words.len())?;
        if back.len() == 1 {
            return Ok(Val::Scalar(Value::new(sign_extend(back[0] as u64, 16), 16)));
        }
        Ok(Val::Vector(back))
    }

    fn assign(&mut self, inst: &str, lhs: &Expr, v: Val) -> Result<Val, EvalError> {
        let words = |v: &Val| match v {
            Val::Scalar(s) => vec![s.magnitude as u16],
            Val::Vector(w) => w.clone(),
        };
        match lhs {
            Expr::Qualified(other, inner) => self.assign(other, inner, v),
            Expr::Name(name) => {
                let core = self.core(inst)?;
                if visible_register(core, name)? {
                    let Val::Scalar(s) = v else { return Err(EvalError::VectorOperand) };
                    let core = self.core_mut(inst)?;
                    core.reg_write(name, s.magnitude as u64)?;
                    let width = core.descriptor(name)?.width;
                    return Ok(Val::Scalar(Value::new(core.reg_value(name)?, width)));
                }
                match lookup_symbol(core, name)? {
                    Some(_) => Err(EvalError::NotAssignable(name.clone())),
                    None => Err(EvalError::UnknownOperand(name.clone())),
                }
            }
            Expr::Deref(inner) => {
                let addr = self.scalar(inst, inner)?.magnitude;
                self.store_words(inst, addr, &words(&v))
            }
            Expr::Index(name, idx) => {
                let i = self.scalar(inst, idx)?.magnitude;
                let w = words(&v);
                let (_, addr) = self.element(inst, name, i)?;
                // a vector stored at an element fills consecutive elements
                self.element(inst, name, i + w.len() as i64 - 1)?;
                self.store_words(inst, addr, &w)
            }
            Expr::Slice(name, lo, hi) => {
                let (start, n) = self.slice_bounds(inst, name, lo, hi)?;
                let w = words(&v);
                if w.len() != n || matches!(v, Val::Scalar(_)) && n != 1 {
                    return Err(EvalError::LengthMismatch { lhs: n, rhs: w.len() });
                }
                self.store_words(inst, start, &w).map(|r| match r {
                    Val::Scalar(s) => Val::Vector(vec![s.magnitude as u16]),
                    other => other,
                })
            }
            _ => Err(EvalError::NotAssignable("expression".into())),
        }
    }
}
