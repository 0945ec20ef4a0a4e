//! Loadable program images: instructions, data initialisation, symbols and the
//! address/line map.
//!
//! Images are JSON documents (see `docs/image.schema.json`). Instruction
//! arguments are register names, integers, `(rX)` indirections or symbol
//! names, optionally with a `+N`/`-N` offset; symbols are resolved at load.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::sim::isa::{reg_id, Instruction, Mnemonic, Operand, Shape};
use crate::sim::{ProcessorCore, Space, PMEM_SIZE, YMEM_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Label,
    Data,
    Function,
    GlobalVar,
    LocalVar,
}

impl SymbolKind {
    pub fn name(self) -> &'static str {
        match self {
            SymbolKind::Label => "label",
            SymbolKind::Data => "data",
            SymbolKind::Function => "function",
            SymbolKind::GlobalVar => "global_var",
            SymbolKind::LocalVar => "local_var",
        }
    }

    pub fn parse(s: &str) -> Option<SymbolKind> {
        [
            SymbolKind::Label,
            SymbolKind::Data,
            SymbolKind::Function,
            SymbolKind::GlobalVar,
            SymbolKind::LocalVar,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    pub fn space(self) -> Space {
        match self {
            SymbolKind::Label | SymbolKind::Function => Space::Pmem,
            _ => Space::Ymem,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeTag {
    Int16,
    Int32,
    Ptr,
    Array(u32),
}

impl TypeTag {
    pub fn parse(s: &str) -> Option<TypeTag> {
        match s {
            "int16" => Some(TypeTag::Int16),
            "int32" => Some(TypeTag::Int32),
            "ptr" => Some(TypeTag::Ptr),
            _ => {
                let n = s.strip_prefix("int16[")?.strip_suffix(']')?.parse::<u32>().ok()?;
                (n >= 1).then_some(TypeTag::Array(n))
            }
        }
    }

    /// Storage size in words.
    pub fn words(self) -> u32 {
        match self {
            TypeTag::Int16 | TypeTag::Ptr => 1,
            TypeTag::Int32 => 2,
            TypeTag::Array(n) => n,
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTag::Int16 => f.write_str("int16"),
            TypeTag::Int32 => f.write_str("int32"),
            TypeTag::Ptr => f.write_str("ptr"),
            TypeTag::Array(n) => write!(f, "int16[{n}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    /// Word index in the symbol's space; for locals, a signed offset from sp
    /// until resolved.
    pub address: i64,
    pub type_tag: TypeTag,
}

impl Symbol {
    pub fn space(&self) -> Space {
        self.kind.space()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionInfo {
    pub name: String,
    pub entry: u32,
    pub exits: Vec<u32>,
    pub file: String,
    pub line_range: (u32, u32),
    pub locals: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineEntry {
    pub addr: u32,
    pub file: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramImage {
    pub name: String,
    pub pmem_records: Vec<(u32, Instruction)>,
    pub ymem_init: Vec<(u32, u16)>,
    pub symbols: Vec<Symbol>,
    pub functions: Vec<FunctionInfo>,
    pub line_map: Vec<LineEntry>,
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line} column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("address out of range: {space} {addr}")]
    AddressOutOfRange { space: Space, addr: i64 },
    #[error("duplicate symbol \"{0}\"")]
    DuplicateSymbol(String),
    #[error("unknown symbol \"{0}\"")]
    UnknownSymbol(String),
    #[error("local \"{0}\" not in scope")]
    NotInScope(String),
    #[error("pmem {addr}: {msg}")]
    BadInstruction { addr: u32, msg: String },
    #[error("bad symbol entry \"{0}\": {1}")]
    BadSymbol(String, String),
    #[error("no image loaded")]
    NoImage,
    #[error("no line mapping for {0}")]
    NoMapping(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImage {
    name: String,
    #[serde(default)]
    pmem: Vec<RawInsn>,
    #[serde(default)]
    ymem: Vec<RawData>,
    #[serde(default)]
    symbols: Vec<RawSymbol>,
    #[serde(default)]
    functions: Vec<RawFunction>,
    #[serde(default)]
    lines: Vec<RawLine>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInsn {
    addr: u32,
    op: String,
    #[serde(default)]
    args: Vec<serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    addr: u32,
    value: Option<i64>,
    values: Option<Vec<i64>>,
    string: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymbol {
    name: String,
    kind: String,
    address: Option<i64>,
    offset: Option<i64>,
    #[serde(rename = "type")]
    type_tag: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    name: String,
    entry: u32,
    #[serde(default)]
    exits: Vec<u32>,
    #[serde(default)]
    file: String,
    #[serde(default)]
    lines: Option<(u32, u32)>,
    #[serde(default)]
    locals: Vec<RawSymbol>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    addr: u32,
    file: String,
    line: u32,
}

fn symbol_from_raw(raw: &RawSymbol, local: bool) -> Result<Symbol, ImageError> {
    let bad = |msg: &str| ImageError::BadSymbol(raw.name.clone(), msg.to_string());
    let kind = if local {
        SymbolKind::LocalVar
    } else {
        SymbolKind::parse(&raw.kind).ok_or_else(|| bad("unknown kind"))?
    };
    if !local && kind == SymbolKind::LocalVar {
        return Err(bad("locals belong to a function"));
    }
    let address = match (local, raw.address, raw.offset) {
        (true, _, Some(off)) => off,
        (false, Some(a), _) => a,
        _ => return Err(bad(if local { "missing offset" } else { "missing address" })),
    };
    let type_tag = match &raw.type_tag {
        Some(t) => TypeTag::parse(t).ok_or_else(|| bad("unknown type"))?,
        None => TypeTag::Int16,
    };
    if !local {
        check_addr(kind.space(), address)?;
        if kind.space() == Space::Ymem {
            check_addr(Space::Ymem, address + type_tag.words() as i64 - 1)?;
        }
    }
    Ok(Symbol { name: raw.name.clone(), kind, address, type_tag })
}

fn check_addr(space: Space, addr: i64) -> Result<(), ImageError> {
    let size = match space {
        Space::Pmem => PMEM_SIZE,
        Space::Ymem => YMEM_SIZE,
    } as i64;
    if (0..size).contains(&addr) {
        Ok(())
    } else {
        Err(ImageError::AddressOutOfRange { space, addr })
    }
}

fn parse_int(s: &str) -> Option<i64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let v = if let Some(h) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i64::from_str_radix(h, 16).ok()?
    } else if let Some(b) = body.strip_prefix("0b") {
        i64::from_str_radix(b, 2).ok()?
    } else {
        body.parse::<i64>().ok()?
    };
    Some(if neg { -v } else { v })
}

impl ProgramImage {
    pub fn from_file(path: &Path) -> Result<Self, ImageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ImageError::Io { path: path.display().to_string(), source: e })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ImageError> {
        let raw: RawImage = serde_json::from_str(text).map_err(|e| ImageError::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        Self::build(raw)
    }

    fn build(raw: RawImage) -> Result<Self, ImageError> {
        let mut symbols: Vec<Symbol> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for rs in &raw.symbols {
            let sym = symbol_from_raw(rs, false)?;
            if seen.insert(sym.name.clone(), symbols.len()).is_some() {
                return Err(ImageError::DuplicateSymbol(sym.name));
            }
            symbols.push(sym);
        }

        let mut functions = Vec::new();
        for rf in &raw.functions {
            check_addr(Space::Pmem, rf.entry as i64)?;
            for e in &rf.exits {
                check_addr(Space::Pmem, *e as i64)?;
            }
            match seen.get(&rf.name) {
                Some(&i) if symbols[i].kind == SymbolKind::Function && symbols[i].address == rf.entry as i64 => {}
                Some(_) => return Err(ImageError::DuplicateSymbol(rf.name.clone())),
                None => {
                    seen.insert(rf.name.clone(), symbols.len());
                    symbols.push(Symbol {
                        name: rf.name.clone(),
                        kind: SymbolKind::Function,
                        address: rf.entry as i64,
                        type_tag: TypeTag::Int16,
                    });
                }
            }
            let mut locals: Vec<Symbol> = Vec::new();
            for rl in &rf.locals {
                let l = symbol_from_raw(rl, true)?;
                if locals.iter().any(|x| x.name == l.name) {
                    return Err(ImageError::DuplicateSymbol(l.name));
                }
                locals.push(l);
            }
            functions.push(FunctionInfo {
                name: rf.name.clone(),
                entry: rf.entry,
                exits: rf.exits.clone(),
                file: rf.file.clone(),
                line_range: rf.lines.unwrap_or((0, 0)),
                locals,
            });
        }

        let mut pmem_records = Vec::new();
        for ri in &raw.pmem {
            check_addr(Space::Pmem, ri.addr as i64)?;
            let ins = decode(ri, &symbols, &seen)?;
            pmem_records.push((ri.addr, ins));
        }

        let mut ymem_init = Vec::new();
        for rd in &raw.ymem {
            let words: Vec<i64> = match (&rd.value, &rd.values, &rd.string) {
                (Some(v), None, None) => vec![*v],
                (None, Some(vs), None) => vs.clone(),
                (None, None, Some(s)) => s.chars().map(|c| c as i64).chain(std::iter::once(0)).collect(),
                _ => {
                    return Err(ImageError::Parse {
                        line: 0,
                        column: 0,
                        msg: format!("ymem {}: exactly one of value, values, string", rd.addr),
                    })
                }
            };
            for (i, w) in words.iter().enumerate() {
                let a = rd.addr as i64 + i as i64;
                check_addr(Space::Ymem, a)?;
                ymem_init.push((a as u32, *w as u16));
            }
        }

        let mut line_map: Vec<LineEntry> = raw
            .lines
            .into_iter()
            .map(|l| LineEntry { addr: l.addr, file: l.file, line: l.line })
            .collect();
        for l in &line_map {
            check_addr(Space::Pmem, l.addr as i64)?;
        }
        line_map.sort_by_key(|l| l.addr);

        Ok(ProgramImage { name: raw.name, pmem_records, ymem_init, symbols, functions, line_map })
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.symbols.iter().find(|s| s.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionInfo> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Nearest line-map entry at or below `addr`.
    pub fn addr_to_line(&self, addr: u32) -> Result<&LineEntry, ImageError> {
        let idx = self.line_map.partition_point(|l| l.addr <= addr);
        if idx == 0 {
            return Err(ImageError::NoMapping(format!("address {addr}")));
        }
        Ok(&self.line_map[idx - 1])
    }

    /// First pmem address mapped to `file:line`.
    pub fn line_to_addr(&self, file: &str, line: u32) -> Result<u32, ImageError> {
        self.line_map
            .iter()
            .find(|l| l.file == file && l.line == line)
            .map(|l| l.addr)
            .ok_or_else(|| ImageError::NoMapping(format!("{file}:{line}")))
    }

    /// Globals in declaration order, then each function's locals.
    pub fn list_symbols(&self, kind: Option<SymbolKind>) -> Vec<Symbol> {
        self.symbols
            .iter()
            .chain(self.functions.iter().flat_map(|f| f.locals.iter()))
            .filter(|s| kind.is_none_or(|k| s.kind == k))
            .cloned()
            .collect()
    }

    fn function_at(&self, pc: u32) -> Option<&FunctionInfo> {
        let line = self.addr_to_line(pc).ok()?;
        self.functions
            .iter()
            .find(|f| f.file == line.file && (f.line_range.0..=f.line_range.1).contains(&line.line))
    }
}

fn decode(ri: &RawInsn, symbols: &[Symbol], index: &HashMap<String, usize>) -> Result<Instruction, ImageError> {
    let bad = |msg: String| ImageError::BadInstruction { addr: ri.addr, msg };
    let mnemonic: Mnemonic = ri.op.parse().map_err(bad)?;
    let sig = mnemonic.signature();
    if sig.len() != ri.args.len() {
        return Err(bad(format!("{mnemonic} takes {} operand(s), got {}", sig.len(), ri.args.len())));
    }
    let mut ops = Vec::new();
    for (shape, arg) in sig.iter().zip(&ri.args) {
        let text = match arg {
            serde_json::Value::String(s) => s.trim().to_string(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(bad(format!("bad operand {other}"))),
        };
        let op = match shape {
            Shape::Reg | Shape::Port => {
                Operand::Reg(reg_id(&text).ok_or_else(|| bad(format!("unknown register \"{text}\"")))?)
            }
            Shape::Mem if text.starts_with('(') => {
                let inner = text.trim_start_matches('(').trim_end_matches(')');
                Operand::Indirect(reg_id(inner).ok_or_else(|| bad(format!("unknown register \"{inner}\"")))?)
            }
            Shape::Imm => Operand::Imm(value_of(&text, symbols, index).map_err(bad)?),
            Shape::Target | Shape::Mem => {
                let v = value_of(&text, symbols, index).map_err(bad)?;
                let space = if *shape == Shape::Target { Space::Pmem } else { Space::Ymem };
                check_addr(space, v)?;
                Operand::Addr(v as u32)
            }
        };
        ops.push(op);
    }
    Instruction::new(mnemonic, ops).map_err(bad)
}

/// Integer literal, symbol, or `symbol+N` / `symbol-N`.
fn value_of(text: &str, symbols: &[Symbol], index: &HashMap<String, usize>) -> Result<i64, String> {
    if let Some(v) = parse_int(text) {
        return Ok(v);
    }
    let split = text.char_indices().skip(1).find(|(_, c)| *c == '+' || *c == '-').map(|(i, _)| i);
    let (name, offset) = match split {
        Some(i) => {
            let off = parse_int(&text[i..]).ok_or_else(|| format!("bad operand \"{text}\""))?;
            (&text[..i], off)
        }
        None => (text, 0),
    };
    let sym = index.get(name).map(|&i| &symbols[i]).ok_or_else(|| format!("unknown symbol \"{name}\""))?;
    Ok(sym.address + offset)
}

impl ProcessorCore {
    /// Loads an image, replacing memory contents and any attached image.
    /// Registers are untouched except pc, which moves to `start` if defined.
    pub fn load_image(&mut self, image: ProgramImage) {
        self.clear_memory();
        for (addr, ins) in &image.pmem_records {
            self.write_instruction(*addr as usize, Some(ins.clone())).expect("validated at build");
        }
        for (addr, w) in &image.ymem_init {
            self.ymem_write(*addr as usize, &[*w as u64]).expect("validated at build");
        }
        let pc = image.symbol("start").map(|s| s.address as u32).unwrap_or(0);
        self.set_pc(pc);
        self.image = Some(image);
    }

    pub fn load_image_file(&mut self, path: &Path) -> Result<&ProgramImage, ImageError> {
        let image = ProgramImage::from_file(path)?;
        self.load_image(image);
        Ok(self.image.as_ref().unwrap())
    }

    fn loaded(&self) -> Result<&ProgramImage, ImageError> {
        self.image().ok_or(ImageError::NoImage)
    }

    /// Resolves a symbol; locals resolve to `sp + offset` and only while pc
    /// lies inside the owning function's line range.
    pub fn resolve(&self, name: &str) -> Result<Symbol, ImageError> {
        let image = self.loaded()?;
        if let Some(s) = image.symbol(name) {
            return Ok(s.clone());
        }
        let owner = image.functions.iter().find(|f| f.locals.iter().any(|l| l.name == name));
        let Some(owner) = owner else {
            return Err(ImageError::UnknownSymbol(name.to_string()));
        };
        match image.function_at(self.pc()) {
            Some(f) if f.name == owner.name => {
                let local = f.locals.iter().find(|l| l.name == name).unwrap();
                let sp = self.reg_read("sp").expect("sp always exists") as i64;
                Ok(Symbol { address: sp + local.address, ..local.clone() })
            }
            _ => Err(ImageError::NotInScope(name.to_string())),
        }
    }

    pub fn addr_to_line(&self, addr: u32) -> Result<(String, u32), ImageError> {
        let l = self.loaded()?.addr_to_line(addr)?;
        Ok((l.file.clone(), l.line))
    }

    pub fn line_to_addr(&self, file: &str, line: u32) -> Result<u32, ImageError> {
        self.loaded()?.line_to_addr(file, line)
    }

    pub fn list_symbols(&self, kind: Option<SymbolKind>) -> Vec<Symbol> {
        self.image().map(|i| i.list_symbols(kind)).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Mode;

    const DEMO: &str = r#"{
      "name": "demo",
      "pmem": [
        {"addr": 0, "op": "LDI", "args": ["r0", "endlocation"]},
        {"addr": 1, "op": "LD", "args": ["r1", "counter"]},
        {"addr": 2, "op": "ST", "args": ["(r0)", "r1"]},
        {"addr": 3, "op": "CALL", "args": ["work"]},
        {"addr": 4, "op": "HALT"},
        {"addr": 5, "op": "NOP"},
        {"addr": 6, "op": "RET"}
      ],
      "ymem": [{"addr": 100, "value": 7}, {"addr": 200, "string": "ok"}],
      "symbols": [
        {"name": "start", "kind": "label", "address": 0},
        {"name": "endlocation", "kind": "label", "address": 4},
        {"name": "counter", "kind": "data", "address": 100},
        {"name": "sendLock", "kind": "data", "address": 101},
        {"name": "buf", "kind": "global_var", "address": 120, "type": "int16[4]"}
      ],
      "functions": [
        {"name": "work", "entry": 5, "exits": [6], "file": "main.c", "lines": [20, 22],
         "locals": [{"name": "tmp", "kind": "local_var", "offset": 1}]}
      ],
      "lines": [
        {"addr": 9, "file": "main.c", "line": 30},
        {"addr": 0, "file": "main.c", "line": 10},
        {"addr": 5, "file": "main.c", "line": 20},
        {"addr": 6, "file": "main.c", "line": 21}
      ]
    }"#;

    fn loaded() -> ProcessorCore {
        let mut core = ProcessorCore::create("lx16i", "p1", Mode::Sim).unwrap();
        core.load_image(ProgramImage::from_json(DEMO).unwrap());
        core
    }

    #[test]
    fn load_populates_memory_and_symbols() {
        let core = loaded();
        assert_eq!(core.ymem_read(100, 1).unwrap(), [7]);
        assert_eq!(core.ymem_read(200, 3).unwrap(), [b'o' as u16, b'k' as u16, 0]);
        assert_eq!(core.resolve("endlocation").unwrap().address, 4);
        assert_eq!(core.resolve("sendLock").unwrap().kind, SymbolKind::Data);
        assert_eq!(core.instruction_at(0).unwrap().unwrap().to_string(), "LDI r0,4");
        assert_eq!(core.instruction_at(2).unwrap().unwrap().to_string(), "ST (r0),r1");
        assert!(matches!(core.resolve("nosuch"), Err(ImageError::UnknownSymbol(_))));
    }

    #[test]
    fn duplicate_symbols_rejected() {
        let text = DEMO.replace("\"sendLock\"", "\"counter\"");
        assert!(matches!(ProgramImage::from_json(&text), Err(ImageError::DuplicateSymbol(_))));
        let text = DEMO.replace("\"endlocation\", \"kind\": \"label\"", "\"work\", \"kind\": \"label\"");
        assert!(matches!(ProgramImage::from_json(&text), Err(ImageError::DuplicateSymbol(_))));
    }

    #[test]
    fn parse_errors_report_position() {
        let err = ProgramImage::from_json("{\n  \"name\": 3\n}").unwrap_err();
        match err {
            ImageError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
        let text = DEMO.replace("\"addr\": 100, \"value\"", "\"addr\": 70000, \"value\"");
        assert!(matches!(ProgramImage::from_json(&text), Err(ImageError::AddressOutOfRange { .. })));
    }

    #[test]
    fn line_map_floor_and_reverse() {
        let core = loaded();
        assert_eq!(core.addr_to_line(5).unwrap(), ("main.c".to_string(), 20));
        assert_eq!(core.addr_to_line(7).unwrap(), ("main.c".to_string(), 21));
        assert_eq!(core.line_to_addr("main.c", 21).unwrap(), 6);
        assert!(core.line_to_addr("main.c", 999).is_err());
    }

    #[test]
    fn locals_resolve_only_in_scope() {
        let mut core = loaded();
        assert!(matches!(core.resolve("tmp"), Err(ImageError::NotInScope(_))));
        core.set_pc(5);
        core.reg_write("sp", 0x8000).unwrap();
        let tmp = core.resolve("tmp").unwrap();
        assert_eq!((tmp.kind, tmp.address), (SymbolKind::LocalVar, 0x8001));
    }

    #[test]
    fn listing_in_declaration_order() {
        let core = loaded();
        let names: Vec<String> = core.list_symbols(None).into_iter().map(|s| s.name).collect();
        assert_eq!(names, ["start", "endlocation", "counter", "sendLock", "buf", "work", "tmp"]);
        let funcs = core.list_symbols(Some(SymbolKind::Function));
        assert_eq!(funcs.len(), 1);
        let empty = ProcessorCore::create("lx16i", "p2", Mode::Sim).unwrap();
        assert!(empty.list_symbols(None).is_empty());
    }

    #[test]
    fn loading_keeps_registers_except_pc() {
        let mut core = ProcessorCore::create("lx16i", "p1", Mode::Sim).unwrap();
        core.reg_write("r3", 9).unwrap();
        core.load_image(ProgramImage::from_json(DEMO).unwrap());
        assert_eq!(core.reg_read("r3").unwrap(), 9);
        assert_eq!(core.pc(), 0);
    }
}
