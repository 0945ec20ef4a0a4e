//! Script parsing into commands, words and substitution parts.

use std::rc::Rc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Part {
    Lit(String),
    /// `$name` or `$name(index)`; the index carries its own substitutions.
    Var(String, Option<Vec<Part>>),
    Cmd(Rc<Script>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Word {
    Literal(String),
    Parts(Vec<Part>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct Script {
    pub cmds: Vec<Vec<Word>>,
}

pub(crate) struct Parser<'a> {
    s: &'a [u8],
    text: &'a str,
    pos: usize,
}

type PResult<T> = Result<T, String>;

fn is_space(c: u8) -> bool {
    c == b' ' || c == b'\t' || c == b'\r'
}

impl<'a> Parser<'a> {
    pub fn new(text: &'a str) -> Self {
        Parser { s: text.as_bytes(), text, pos: 0 }
    }

    pub fn new_at(text: &'a str, pos: usize) -> Self {
        Parser { s: text.as_bytes(), text, pos }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn advance(&mut self, n: usize) {
        self.pos += n;
    }

    /// Parts up to end of input, for `subst`.
    pub fn all_parts(&mut self) -> PResult<Vec<Part>> {
        self.parts(|p| p.peek().is_none(), false)
    }

    /// Parts of a double-quoted word; stops before the closing quote.
    pub fn quoted_parts(&mut self) -> PResult<Vec<Part>> {
        self.parts(|p| p.peek() == Some(b'"'), true)
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn at_continuation(&self) -> bool {
        self.peek() == Some(b'\\') && self.s.get(self.pos + 1) == Some(&b'\n')
    }

    fn skip_space(&mut self) {
        loop {
            match self.peek() {
                Some(c) if is_space(c) => self.pos += 1,
                _ if self.at_continuation() => {
                    self.pos += 2;
                    while self.peek().is_some_and(is_space) {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            if c == b'\\' {
                self.pos += 2;
                continue;
            }
            if c == b'\n' {
                break;
            }
            self.pos += 1;
        }
    }

    /// Parses commands until end of input or `term` (for command substitution).
    pub fn script(&mut self, term: Option<u8>) -> PResult<Script> {
        let mut script = Script::default();
        loop {
            // command boundary: skip blank separators and comments
            loop {
                self.skip_space();
                match self.peek() {
                    Some(b'\n') | Some(b';') => self.pos += 1,
                    Some(b'#') => self.skip_comment(),
                    _ => break,
                }
            }
            match self.peek() {
                None if term.is_none() => return Ok(script),
                None => return Err("missing close-bracket".into()),
                Some(c) if Some(c) == term => {
                    self.pos += 1;
                    return Ok(script);
                }
                _ => {}
            }
            let cmd = self.command(term)?;
            if !cmd.is_empty() {
                script.cmds.push(cmd);
            }
        }
    }

    fn command(&mut self, term: Option<u8>) -> PResult<Vec<Word>> {
        let mut words = Vec::new();
        loop {
            self.skip_space();
            match self.peek() {
                None => return Ok(words),
                Some(b'\n') | Some(b';') => {
                    self.pos += 1;
                    return Ok(words);
                }
                Some(c) if Some(c) == term => return Ok(words),
                // a lone '#' word comments out the rest of the line
                Some(b'#') if !words.is_empty() && self.lone_hash() => {
                    self.skip_comment();
                    return Ok(words);
                }
                _ => words.push(self.word(term)?),
            }
        }
    }

    fn lone_hash(&self) -> bool {
        matches!(self.text.as_bytes().get(self.pos + 1), None | Some(b' ' | b'\t' | b'\n' | b'\r'))
    }

    fn word(&mut self, term: Option<u8>) -> PResult<Word> {
        match self.peek() {
            Some(b'{') => {
                let w = self.braced()?;
                self.expect_word_end(term, "close-brace")?;
                Ok(Word::Literal(w))
            }
            Some(b'"') => {
                self.pos += 1;
                let parts = self.parts(|p| p.peek() == Some(b'"'), true)?;
                if self.peek() != Some(b'"') {
                    return Err("missing \"".into());
                }
                self.pos += 1;
                self.expect_word_end(term, "close-quote")?;
                Ok(simplify(parts))
            }
            _ => {
                let parts = self.parts(
                    |p| match p.peek() {
                        None => true,
                        Some(c) => is_space(c) || c == b'\n' || c == b';' || Some(c) == term || p.at_continuation(),
                    },
                    false,
                )?;
                Ok(simplify(parts))
            }
        }
    }

    fn expect_word_end(&self, term: Option<u8>, what: &str) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) if is_space(c) || c == b'\n' || c == b';' || Some(c) == term => Ok(()),
            _ if self.at_continuation() => Ok(()),
            _ => Err(format!("extra characters after {what}")),
        }
    }

    /// Reads a brace-quoted word, returning its contents without substitution.
    pub fn braced(&mut self) -> PResult<String> {
        debug_assert_eq!(self.peek(), Some(b'{'));
        self.pos += 1;
        let start = self.pos;
        let mut depth = 1;
        let mut out = String::new();
        let mut seg = start;
        while let Some(c) = self.peek() {
            match c {
                b'\\' if self.s.get(self.pos + 1) == Some(&b'\n') => {
                    out.push_str(&self.text[seg..self.pos]);
                    self.pos += 2;
                    while self.peek().is_some_and(is_space) {
                        self.pos += 1;
                    }
                    out.push(' ');
                    seg = self.pos;
                    continue;
                }
                b'\\' => self.pos += 1,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        out.push_str(&self.text[seg..self.pos]);
                        self.pos += 1;
                        return Ok(out);
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        Err("missing close-brace".into())
    }

    fn parts(&mut self, stop: impl Fn(&Parser) -> bool, quoted: bool) -> PResult<Vec<Part>> {
        let mut parts = Vec::new();
        let mut lit = String::new();
        loop {
            if stop(self) {
                break;
            }
            let Some(c) = self.peek() else {
                if quoted {
                    return Err("missing \"".into());
                }
                break;
            };
            match c {
                b'\\' => lit.push_str(&self.backslash()),
                b'[' => {
                    self.pos += 1;
                    flush(&mut lit, &mut parts);
                    let sub = self.script(Some(b']'))?;
                    parts.push(Part::Cmd(Rc::new(sub)));
                }
                b'$' => match self.variable()? {
                    Some(p) => {
                        flush(&mut lit, &mut parts);
                        parts.push(p);
                    }
                    None => lit.push('$'),
                },
                _ => {
                    let ch = self.text[self.pos..].chars().next().unwrap();
                    lit.push(ch);
                    self.pos += ch.len_utf8();
                }
            }
        }
        flush(&mut lit, &mut parts);
        Ok(parts)
    }

    fn backslash(&mut self) -> String {
        self.pos += 1;
        let Some(c) = self.peek() else { return "\\".into() };
        self.pos += 1;
        match c {
            b'n' => "\n".into(),
            b't' => "\t".into(),
            b'r' => "\r".into(),
            b'\n' => {
                while self.peek().is_some_and(is_space) {
                    self.pos += 1;
                }
                " ".into()
            }
            _ => {
                self.pos -= 1;
                let ch = self.text[self.pos..].chars().next().unwrap();
                self.pos += ch.len_utf8();
                ch.to_string()
            }
        }
    }

    pub fn variable(&mut self) -> PResult<Option<Part>> {
        self.pos += 1;
        if self.peek() == Some(b'{') {
            let start = self.pos + 1;
            let end = self.text[start..].find('}').ok_or("missing close-brace for variable name")?;
            self.pos = start + end + 1;
            return Ok(Some(Part::Var(self.text[start..start + end].to_string(), None)));
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else if c == b':' && self.s.get(self.pos + 1) == Some(&b':') {
                self.pos += 2;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Ok(None);
        }
        let name = self.text[start..self.pos].to_string();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let idx = self.parts(|p| p.peek() == Some(b')'), true).map_err(|_| "missing )".to_string())?;
            self.pos += 1;
            return Ok(Some(Part::Var(name, Some(idx))));
        }
        Ok(Some(Part::Var(name, None)))
    }
}

fn flush(lit: &mut String, parts: &mut Vec<Part>) {
    if !lit.is_empty() {
        parts.push(Part::Lit(std::mem::take(lit)));
    }
}

fn simplify(parts: Vec<Part>) -> Word {
    match parts.as_slice() {
        [] => Word::Literal(String::new()),
        [Part::Lit(s)] => Word::Literal(s.clone()),
        _ => Word::Parts(parts),
    }
}

pub(crate) fn parse_script(text: &str) -> PResult<Script> {
    Parser::new(text).script(None)
}
