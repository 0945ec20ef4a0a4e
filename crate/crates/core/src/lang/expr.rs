//! `expr`: C-like integer expressions with string comparison.

use std::rc::Rc;

use super::parse::{Parser, Part, Script};
use super::{Flow, Interp};
use crate::eval::parse_literal;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprVal {
    Int(i64),
    Str(String),
}

impl ExprVal {
    pub fn render(&self) -> String {
        match self {
            ExprVal::Int(v) => v.to_string(),
            ExprVal::Str(s) => s.clone(),
        }
    }

    fn int(&self) -> Option<i64> {
        match self {
            ExprVal::Int(v) => Some(*v),
            ExprVal::Str(s) => parse_int(s),
        }
    }
}

/// Parses an integer with an optional sign, in decimal, `0x` or `0b`.
pub fn parse_int(s: &str) -> Option<i64> {
    let t = s.trim();
    let (neg, body) = match t.as_bytes().first()? {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    if body.is_empty() || !body.as_bytes()[0].is_ascii_digit() {
        return None;
    }
    let v = parse_literal(body)?;
    Some(if neg { v.wrapping_neg() } else { v })
}

pub fn truthy(s: &str) -> Result<bool, Flow> {
    if let Some(v) = parse_int(s) {
        return Ok(v != 0);
    }
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(Flow::error(format!("expected boolean value but got \"{s}\""))),
    }
}

#[derive(Debug)]
pub(crate) enum Node {
    Lit(ExprVal),
    Subst(Vec<Part>),
    Cmd(Rc<Script>),
    Unary(&'static str, Box<Node>),
    Binary(&'static str, Box<Node>, Box<Node>),
    Ternary(Box<Node>, Box<Node>, Box<Node>),
}

const BINOPS: [(&str, u8); 20] = [
    ("||", 1),
    ("&&", 2),
    ("|", 3),
    ("^", 4),
    ("&", 5),
    ("==", 6),
    ("!=", 6),
    ("eq", 6),
    ("ne", 6),
    ("<=", 7),
    (">=", 7),
    ("<<", 8),
    (">>", 8),
    ("<", 7),
    (">", 7),
    ("+", 9),
    ("-", 9),
    ("*", 10),
    ("/", 10),
    ("%", 10),
];

struct ExprParser<'a> {
    text: &'a str,
    pos: usize,
}

type PResult<T> = Result<T, String>;

impl<'a> ExprParser<'a> {
    fn ws(&mut self) {
        let b = self.text.as_bytes();
        while self.pos < b.len() && b[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn ternary(&mut self) -> PResult<Node> {
        let cond = self.binary(1)?;
        self.ws();
        if self.rest().starts_with('?') {
            self.pos += 1;
            let a = self.ternary()?;
            self.ws();
            if !self.rest().starts_with(':') {
                return Err("missing \":\" in ternary".into());
            }
            self.pos += 1;
            let b = self.ternary()?;
            return Ok(Node::Ternary(Box::new(cond), Box::new(a), Box::new(b)));
        }
        Ok(cond)
    }

    fn peek_binop(&mut self) -> Option<(&'static str, u8)> {
        self.ws();
        let rest = self.rest();
        BINOPS.iter().copied().find(|(op, _)| {
            if !rest.starts_with(op) {
                return false;
            }
            // `eq`/`ne` must stand alone; `&`/`|` must not be the first half of `&&`/`||`
            let next = rest.as_bytes().get(op.len()).copied();
            match *op {
                "eq" | "ne" => !next.is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_'),
                "&" => next != Some(b'&'),
                "|" => next != Some(b'|'),
                _ => true,
            }
        })
    }

    fn binary(&mut self, min: u8) -> PResult<Node> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.peek_binop() {
            if prec < min {
                break;
            }
            self.pos += op.len();
            let rhs = self.binary(prec + 1)?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Node> {
        self.ws();
        for op in ["-", "+", "!", "~"] {
            if self.rest().starts_with(op) {
                self.pos += 1;
                return Ok(Node::Unary(op, Box::new(self.unary()?)));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Node> {
        self.ws();
        let b = self.text.as_bytes();
        let Some(&c) = b.get(self.pos) else {
            return Err("premature end of expression".into());
        };
        match c {
            b'(' => {
                self.pos += 1;
                let e = self.ternary()?;
                self.ws();
                if !self.rest().starts_with(')') {
                    return Err("unbalanced parentheses".into());
                }
                self.pos += 1;
                Ok(e)
            }
            b'$' | b'[' | b'"' | b'{' => {
                let mut p = Parser::new_at(self.text, self.pos);
                let node = match c {
                    b'$' => match p.variable()? {
                        Some(part) => Node::Subst(vec![part]),
                        None => return Err("invalid character \"$\"".into()),
                    },
                    b'[' => {
                        p.advance(1);
                        Node::Cmd(Rc::new(p.script(Some(b']'))?))
                    }
                    b'"' => {
                        p.advance(1);
                        let parts = p.quoted_parts()?;
                        p.advance(1);
                        Node::Subst(parts)
                    }
                    _ => Node::Lit(ExprVal::Str(p.braced()?)),
                };
                self.pos = p.pos();
                Ok(node)
            }
            c if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < b.len() && (b[self.pos].is_ascii_alphanumeric() || b[self.pos] == b'_') {
                    self.pos += 1;
                }
                let lit = &self.text[start..self.pos];
                parse_literal(lit)
                    .map(|v| Node::Lit(ExprVal::Int(v)))
                    .ok_or_else(|| format!("invalid number \"{lit}\""))
            }
            c if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < b.len() && b[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                match &self.text[start..self.pos] {
                    "true" | "yes" | "on" => Ok(Node::Lit(ExprVal::Int(1))),
                    "false" | "no" | "off" => Ok(Node::Lit(ExprVal::Int(0))),
                    w => Err(format!("invalid bareword \"{w}\"")),
                }
            }
            _ => Err(format!("unexpected character \"{}\"", self.rest().chars().next().unwrap())),
        }
    }
}

pub(crate) fn parse_expr(text: &str) -> PResult<Node> {
    let mut p = ExprParser { text, pos: 0 };
    let node = p.ternary()?;
    p.ws();
    if p.pos < text.len() {
        return Err(format!("syntax error in expression \"{text}\""));
    }
    Ok(node)
}

fn need_int(v: &ExprVal) -> Result<i64, Flow> {
    v.int().ok_or_else(|| Flow::error(format!("expected integer but got \"{}\"", v.render())))
}

impl<H> Interp<H> {
    pub(crate) fn eval_node(&mut self, node: &Node) -> Result<ExprVal, Flow> {
        Ok(match node {
            Node::Lit(v) => v.clone(),
            Node::Subst(parts) => {
                let s = self.subst_parts(parts)?;
                match parse_int(&s) {
                    Some(v) => ExprVal::Int(v),
                    None => ExprVal::Str(s),
                }
            }
            Node::Cmd(script) => {
                let s = self.eval_script(script)?;
                match parse_int(&s) {
                    Some(v) => ExprVal::Int(v),
                    None => ExprVal::Str(s),
                }
            }
            Node::Unary(op, e) => {
                let v = self.eval_node(e)?;
                match *op {
                    "!" => ExprVal::Int(!truthy(&v.render())? as i64),
                    "-" => ExprVal::Int(need_int(&v)?.wrapping_neg()),
                    "~" => ExprVal::Int(!need_int(&v)?),
                    _ => ExprVal::Int(need_int(&v)?),
                }
            }
            Node::Ternary(c, a, b) => {
                let c = self.eval_node(c)?;
                if truthy(&c.render())? {
                    self.eval_node(a)?
                } else {
                    self.eval_node(b)?
                }
            }
            Node::Binary(op, a, b) => {
                let lhs = self.eval_node(a)?;
                match *op {
                    "&&" => {
                        let r = truthy(&lhs.render())? && truthy(&self.eval_node(b)?.render())?;
                        return Ok(ExprVal::Int(r as i64));
                    }
                    "||" => {
                        let r = truthy(&lhs.render())? || truthy(&self.eval_node(b)?.render())?;
                        return Ok(ExprVal::Int(r as i64));
                    }
                    _ => {}
                }
                let rhs = self.eval_node(b)?;
                binary(op, &lhs, &rhs)?
            }
        })
    }
}

fn binary(op: &str, lhs: &ExprVal, rhs: &ExprVal) -> Result<ExprVal, Flow> {
    let cmp = |ord: std::cmp::Ordering| -> bool {
        use std::cmp::Ordering::*;
        match op {
            "<" => ord == Less,
            "<=" => ord != Greater,
            ">" => ord == Greater,
            ">=" => ord != Less,
            "==" | "eq" => ord == Equal,
            _ => ord != Equal,
        }
    };
    if matches!(op, "eq" | "ne") {
        return Ok(ExprVal::Int(cmp(lhs.render().cmp(&rhs.render())) as i64));
    }
    if matches!(op, "<" | "<=" | ">" | ">=" | "==" | "!=") {
        let ord = match (lhs.int(), rhs.int()) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => lhs.render().cmp(&rhs.render()),
        };
        return Ok(ExprVal::Int(cmp(ord) as i64));
    }
    let a = need_int(lhs)?;
    let b = need_int(rhs)?;
    Ok(ExprVal::Int(match op {
        "+" => a.wrapping_add(b),
        "-" => a.wrapping_sub(b),
        "*" => a.wrapping_mul(b),
        "/" | "%" if b == 0 => return Err(Flow::error("divide by zero")),
        "/" => a.wrapping_div(b),
        "%" => a.wrapping_rem(b),
        "<<" | ">>" if !(0..64).contains(&b) => return Err(Flow::error("shift amount out of range")),
        "<<" => a << b,
        ">>" => a >> b,
        "&" => a & b,
        "|" => a | b,
        "^" => a ^ b,
        _ => return Err(Flow::error(format!("unknown operator \"{op}\""))),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(text: &str) -> String {
        let mut i = Interp::new(());
        i.set_var("x", "5").unwrap();
        i.set_var("s", "").unwrap();
        i.expr(text).map(|v| v.render()).unwrap_or_else(|e| format!("ERR {}", e.message()))
    }

    #[test]
    fn c_precedence_and_truncation() {
        assert_eq!(ev("1 + 2 * 3"), "7");
        assert_eq!(ev("(1 + 2) * 3"), "9");
        assert_eq!(ev("-7 / 2"), "-3");
        assert_eq!(ev("-7 % 2"), "-1");
        assert_eq!(ev("1 | 2 ^ 3 & 4"), "3");
        assert_eq!(ev("1 << 4 >> 2"), "4");
        assert_eq!(ev("$x > 3 && $x < 10"), "1");
        assert_eq!(ev("!$x"), "0");
        assert_eq!(ev("$x ? 10 : 20"), "10");
        assert_eq!(ev("0x10 + 0b11"), "19");
    }

    #[test]
    fn strings_and_short_circuit() {
        assert_eq!(ev("$s == \"\""), "1");
        assert_eq!(ev("\"abc\" < \"abd\""), "1");
        assert_eq!(ev("{p1} eq \"p1\""), "1");
        assert_eq!(ev("0 && [nosuch]"), "0");
        assert_eq!(ev("1 || [nosuch]"), "1");
        assert_eq!(ev("[set x] * 2"), "10");
        assert!(ev("1 / 0").starts_with("ERR divide by zero"));
        assert!(ev("\"a\" + 1").starts_with("ERR expected integer"));
        assert!(ev("1 +").starts_with("ERR"));
    }
}
