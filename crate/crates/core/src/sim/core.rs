use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::event::{
    EventKind, Severity, TargetEvent, CYCCNT_EXPIRED, ILLEGAL_INSTRUCTION, PORT_EOF, UNHANDLED_BP,
};
use super::isa::{self, Instruction, Mnemonic, Operand, RegId};
use super::regs::{lx16_registers, RegKind, RegisterDescriptor, Sign};
use super::{Access, Mode, Model, RunState, SimError, Space};
use crate::eval::fixed::{personality_arith, BinOp, Personality, Value};
use crate::image::ProgramImage;

pub const PMEM_SIZE: usize = 0x4000;
pub const YMEM_SIZE: usize = 0x10000;
pub const WORD_SIZE: u32 = 16;

/// Bit in `cyclec` that arms the cycle-rollover break.
pub const CYCLEC_BREAK_BIT: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Source,
    Sink,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    None,
    File(PathBuf),
    Procedure(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortBinding {
    pub port: String,
    pub direction: Direction,
    pub endpoint: Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct DataWatch {
    addr: u16,
    access: Access,
    handle: u64,
}

struct SignalLog {
    regs: Vec<RegId>,
    sink: File,
}

/// Result of a bounded run: how much executed and which events stopped it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOutcome {
    pub executed: u64,
    pub cycles: u64,
    pub events: Vec<TargetEvent>,
}

#[derive(Clone, Copy)]
enum Limit {
    Steps(u64),
    Cycles(u64),
}

/// One simulated lx16 target.
pub struct ProcessorCore {
    model: Model,
    instance: String,
    mode: Mode,
    regs: Vec<RegisterDescriptor>,
    values: Vec<u64>,
    pmem: Vec<Option<Instruction>>,
    ymem: Vec<u16>,
    run_state: RunState,
    hidden_visible: bool,
    bindings: Vec<PortBinding>,
    file_sources: HashMap<RegId, VecDeque<u16>>,
    sink_files: HashMap<RegId, File>,
    pending_input: HashMap<RegId, u16>,
    exec_bps: BTreeMap<u32, Vec<u64>>,
    data_bps: Vec<DataWatch>,
    cycle_bps: Vec<(u64, u64)>,
    suppress_bp_at: Option<u32>,
    siglog: Option<SignalLog>,
    injected: Vec<TargetEvent>,
    pub(crate) image: Option<ProgramImage>,
}

impl std::fmt::Debug for ProcessorCore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProcessorCore")
            .field("model", &self.model)
            .field("instance", &self.instance)
            .field("mode", &self.mode)
            .field("run_state", &self.run_state)
            .finish_non_exhaustive()
    }
}

impl ProcessorCore {
    pub fn create(model: &str, instance: &str, mode: Mode) -> Result<Self, SimError> {
        let model = Model::lookup(model).ok_or_else(|| SimError::UnknownModel(model.to_string()))?;
        let regs = lx16_registers();
        let values = regs.iter().map(|r| r.reset_value).collect();
        Ok(ProcessorCore {
            model,
            instance: instance.to_string(),
            mode,
            regs,
            values,
            pmem: vec![None; PMEM_SIZE],
            ymem: vec![0; YMEM_SIZE],
            run_state: RunState::Stopped,
            hidden_visible: false,
            bindings: Vec::new(),
            file_sources: HashMap::new(),
            sink_files: HashMap::new(),
            pending_input: HashMap::new(),
            exec_bps: BTreeMap::new(),
            data_bps: Vec::new(),
            cycle_bps: Vec::new(),
            suppress_bp_at: None,
            siglog: None,
            injected: Vec::new(),
            image: None,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn instance(&self) -> &str {
        &self.instance
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn personality(&self) -> Personality {
        self.model.personality()
    }

    pub fn run_state(&self) -> RunState {
        self.run_state
    }

    pub fn set_run_state(&mut self, state: RunState) {
        self.run_state = state;
    }

    pub fn hidden_visible(&self) -> bool {
        self.hidden_visible
    }

    pub fn set_hidden_visible(&mut self, on: bool) {
        self.hidden_visible = on;
    }

    pub fn image(&self) -> Option<&ProgramImage> {
        self.image.as_ref()
    }

    pub fn pc(&self) -> u32 {
        self.values[isa::PC] as u32
    }

    pub fn cycles(&self) -> u32 {
        self.values[isa::CYCLES] as u32
    }

    pub fn registers(&self) -> &[RegisterDescriptor] {
        &self.regs
    }

    /// Visible registers in declaration order.
    pub fn visible_registers(&self) -> impl Iterator<Item = &RegisterDescriptor> {
        self.regs.iter().filter(|r| r.kind != RegKind::Hidden || self.hidden_visible)
    }

    fn lookup(&self, name: &str) -> Result<RegId, SimError> {
        let id = self
            .regs
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| SimError::UnknownRegister(name.to_string()))?;
        if self.regs[id].kind == RegKind::Hidden && !self.hidden_visible {
            return Err(SimError::HiddenRegister(name.to_string()));
        }
        Ok(id)
    }

    pub fn descriptor(&self, name: &str) -> Result<&RegisterDescriptor, SimError> {
        self.lookup(name).map(|id| &self.regs[id])
    }

    /// Reads the masked raw value of a register.
    pub fn reg_read(&self, name: &str) -> Result<u64, SimError> {
        self.lookup(name).map(|id| self.values[id])
    }

    /// Reads a register interpreted according to its sign.
    pub fn reg_value(&self, name: &str) -> Result<i64, SimError> {
        let id = self.lookup(name)?;
        Ok(self.regs[id].interpret(self.values[id]))
    }

    /// Stores `value` modulo 2^width and returns the stored value.
    pub fn reg_write(&mut self, name: &str, value: u64) -> Result<u64, SimError> {
        let id = self.lookup(name)?;
        let stored = self.regs[id].mask(value);
        let old = self.values[id];
        self.values[id] = stored;
        if old != stored {
            self.log_change(id, self.cycles());
        }
        Ok(stored)
    }

    pub fn add_pseudo_register(&mut self, name: &str, width: u32) -> Result<&RegisterDescriptor, SimError> {
        if self.regs.iter().any(|r| r.name == name) {
            return Err(SimError::DuplicateRegister(name.to_string()));
        }
        if !(1..=64).contains(&width) {
            return Err(SimError::BadWidth(width));
        }
        self.regs.push(RegisterDescriptor::new(name, width, Sign::Unsigned, RegKind::Pseudo, 0));
        self.values.push(0);
        Ok(self.regs.last().unwrap())
    }

    /// Reflection query; each entry is one space-separated tuple.
    pub fn reflect(&self, kind: &str) -> Result<Vec<String>, SimError> {
        Ok(match kind {
            "registers" => self
                .visible_registers()
                .map(|r| {
                    let id = self.regs.iter().position(|x| x.name == r.name).unwrap();
                    format!("{} {} {} {}", r.name, r.interpret(self.values[id]), r.sign.tag(), r.width)
                })
                .collect(),
            "memory" => vec![format!("pmem {PMEM_SIZE} insn"), format!("ymem {YMEM_SIZE} {WORD_SIZE}")],
            "pcname" => vec!["pc".to_string()],
            "byteorder" => vec!["little".to_string()],
            "wordsize" => vec![WORD_SIZE.to_string()],
            "models" => Model::ALL.iter().map(|m| m.name().to_string()).collect(),
            other => return Err(SimError::UnknownReflection(other.to_string())),
        })
    }

    fn space_size(space: Space) -> usize {
        match space {
            Space::Pmem => PMEM_SIZE,
            Space::Ymem => YMEM_SIZE,
        }
    }

    fn check_range(space: Space, addr: usize, count: usize) -> Result<(), SimError> {
        if count == 0 || addr.checked_add(count).is_none_or(|end| end > Self::space_size(space)) {
            return Err(SimError::AddressOutOfRange { space, addr });
        }
        Ok(())
    }

    pub fn ymem_read(&self, addr: usize, count: usize) -> Result<Vec<u16>, SimError> {
        Self::check_range(Space::Ymem, addr, count)?;
        Ok(self.ymem[addr..addr + count].to_vec())
    }

    /// Writes words element-wise in ascending address order, masking each to 16 bits.
    pub fn ymem_write(&mut self, addr: usize, values: &[u64]) -> Result<Vec<u16>, SimError> {
        if values.is_empty() {
            return Err(SimError::LengthMismatch { expected: 1, got: 0 });
        }
        Self::check_range(Space::Ymem, addr, values.len())?;
        let words: Vec<u16> = values.iter().map(|v| *v as u16).collect();
        self.ymem[addr..addr + words.len()].copy_from_slice(&words);
        Ok(words)
    }

    /// Generic memory access: reads when `values` is `None`, writes otherwise.
    pub fn mem_access(
        &mut self,
        space: Space,
        addr: usize,
        count: usize,
        values: Option<&[u64]>,
    ) -> Result<Vec<u64>, SimError> {
        match (space, values) {
            (Space::Ymem, None) => Ok(self.ymem_read(addr, count)?.into_iter().map(u64::from).collect()),
            (Space::Ymem, Some(vals)) => {
                if vals.len() != count {
                    return Err(SimError::LengthMismatch { expected: count, got: vals.len() });
                }
                Ok(self.ymem_write(addr, vals)?.into_iter().map(u64::from).collect())
            }
            (Space::Pmem, _) => Err(SimError::NotWordAddressable(space)),
        }
    }

    pub fn instruction_at(&self, addr: usize) -> Result<Option<&Instruction>, SimError> {
        Self::check_range(Space::Pmem, addr, 1)?;
        Ok(self.pmem[addr].as_ref())
    }

    pub fn write_instruction(&mut self, addr: usize, ins: Option<Instruction>) -> Result<(), SimError> {
        Self::check_range(Space::Pmem, addr, 1)?;
        self.pmem[addr] = ins;
        Ok(())
    }

    pub(crate) fn clear_memory(&mut self) {
        self.pmem.iter_mut().for_each(|s| *s = None);
        self.ymem.iter_mut().for_each(|w| *w = 0);
    }

    pub(crate) fn set_pc(&mut self, pc: u32) {
        self.values[isa::PC] = pc as u64 & 0xF_FFFF;
    }

    /// Restores every register to its reset value; memory, breakpoints and
    /// pseudo-register definitions survive.
    pub fn reset(&mut self) {
        for (v, r) in self.values.iter_mut().zip(&self.regs) {
            *v = r.reset_value;
        }
        self.run_state = RunState::Stopped;
        self.suppress_bp_at = None;
        self.pending_input.clear();
    }

    pub fn bind_port(&mut self, port: &str, direction: Direction, endpoint: Endpoint) -> Result<(), SimError> {
        let id = self.lookup(port)?;
        if self.regs[id].kind != RegKind::Port {
            return Err(SimError::NotAPort(port.to_string()));
        }
        match (&endpoint, direction) {
            (Endpoint::File(path), Direction::Source) => {
                let queue = read_port_file(path)?;
                self.file_sources.insert(id, queue);
            }
            (Endpoint::File(path), Direction::Sink) => {
                let file = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| SimError::file(path, e))?;
                self.sink_files.insert(id, file);
            }
            (_, Direction::Source) => {
                self.file_sources.remove(&id);
            }
            (_, Direction::Sink) => {
                self.sink_files.remove(&id);
            }
        }
        self.bindings.retain(|b| !(b.port == port && b.direction == direction));
        if endpoint != Endpoint::None {
            self.bindings.push(PortBinding { port: port.to_string(), direction, endpoint });
        }
        Ok(())
    }

    pub fn binding(&self, port: &str, direction: Direction) -> Option<&PortBinding> {
        self.bindings.iter().find(|b| b.port == port && b.direction == direction)
    }

    pub fn port_bindings(&self) -> &[PortBinding] {
        &self.bindings
    }

    /// Hands a value to a pending `IN` on a procedure-bound source port.
    pub fn supply_input(&mut self, port: &str, value: u64) -> Result<(), SimError> {
        let id = self.lookup(port)?;
        if self.regs[id].kind != RegKind::Port {
            return Err(SimError::NotAPort(port.to_string()));
        }
        self.pending_input.insert(id, value as u16);
        Ok(())
    }

    /// Starts a transition log of `names` into `path` as `cycle,instance,name,value` lines.
    pub fn log_signals(&mut self, names: &[&str], path: &Path) -> Result<(), SimError> {
        let regs = names.iter().map(|n| self.lookup(n)).collect::<Result<Vec<_>, _>>()?;
        let mut regs = regs;
        regs.sort_unstable();
        regs.dedup();
        let sink = File::create(path).map_err(|e| SimError::file(path, e))?;
        self.siglog = Some(SignalLog { regs, sink });
        Ok(())
    }

    pub fn stop_logging(&mut self) {
        self.siglog = None;
    }

    fn log_change(&mut self, id: RegId, cycle: u32) {
        let Some(log) = self.siglog.as_mut() else { return };
        if !log.regs.contains(&id) {
            return;
        }
        let r = &self.regs[id];
        let line = format!("{cycle},{},{},{}\n", self.instance, r.name, r.interpret(self.values[id]));
        // A failing log sink must not perturb execution.
        let _ = log.sink.write_all(line.as_bytes());
    }

    pub fn set_exec_breakpoint(&mut self, addr: u32, handle: u64) -> Result<(), SimError> {
        Self::check_range(Space::Pmem, addr as usize, 1)?;
        self.exec_bps.entry(addr).or_default().push(handle);
        Ok(())
    }

    pub fn set_data_breakpoint(&mut self, addr: u32, access: Access, handle: u64) -> Result<(), SimError> {
        Self::check_range(Space::Ymem, addr as usize, 1)?;
        if access == Access::Exec {
            return Err(SimError::BadAccess);
        }
        self.data_bps.push(DataWatch { addr: addr as u16, access, handle });
        Ok(())
    }

    pub fn set_cycle_breakpoint(&mut self, cycle: u64, handle: u64) {
        self.cycle_bps.push((cycle, handle));
    }

    /// Removes every hardware breakpoint carrying `handle`.
    pub fn clear_breakpoint(&mut self, handle: u64) {
        for list in self.exec_bps.values_mut() {
            list.retain(|h| *h != handle);
        }
        self.exec_bps.retain(|_, l| !l.is_empty());
        self.data_bps.retain(|w| w.handle != handle);
        self.cycle_bps.retain(|(_, h)| *h != handle);
    }

    /// Executes up to `n` instructions, stopping early on an event.
    pub fn step(&mut self, n: u64) -> Result<RunOutcome, SimError> {
        if n < 1 {
            return Err(SimError::ZeroSteps);
        }
        self.run(Limit::Steps(n))
    }

    /// Executes until an event fires or `budget` cycles have been consumed.
    pub fn run_slice(&mut self, budget: u64) -> Result<RunOutcome, SimError> {
        self.run(Limit::Cycles(budget))
    }

    fn run(&mut self, limit: Limit) -> Result<RunOutcome, SimError> {
        if self.run_state == RunState::Halted {
            return Err(SimError::Halted(self.instance.clone()));
        }
        let mut out = RunOutcome::default();
        loop {
            let done = match limit {
                Limit::Steps(n) => out.executed >= n,
                Limit::Cycles(b) => out.cycles >= b,
            };
            if done {
                break;
            }
            let pre = self.prefetch_events();
            if !pre.is_empty() {
                out.events = pre;
                break;
            }
            let (cost, events) = self.execute_current();
            out.executed += 1;
            out.cycles += cost as u64;
            if !events.is_empty() {
                out.events = events;
                break;
            }
        }
        Ok(out)
    }

    /// Queues a synthetic exception, raised before the next instruction.
    pub fn inject_exception(&mut self, errnum: i64, severity: Severity, errstr: &str) {
        let ev = TargetEvent::exception(&self.instance, errnum, severity, errstr.to_string(), self.cycles());
        self.injected.push(ev);
    }

    fn prefetch_events(&mut self) -> Vec<TargetEvent> {
        let cycles = self.cycles();
        let pc = self.pc();

        if !self.injected.is_empty() {
            return std::mem::take(&mut self.injected);
        }

        if let Some(pos) = self
            .cycle_bps
            .iter()
            .enumerate()
            .filter(|(_, (c, _))| *c <= cycles as u64)
            .min_by_key(|(_, (c, h))| (*c, *h))
            .map(|(i, _)| i)
        {
            let (_, handle) = self.cycle_bps.remove(pos);
            return vec![TargetEvent::new(EventKind::Breakpoint, &self.instance, handle, cycles)];
        }

        if self.suppress_bp_at != Some(pc) {
            if let Some(handles) = self.exec_bps.get(&pc) {
                let events = handles
                    .iter()
                    .map(|h| TargetEvent::new(EventKind::Breakpoint, &self.instance, *h, cycles))
                    .collect();
                self.suppress_bp_at = Some(pc);
                return events;
            }
        }

        let ins = match self.pmem.get(pc as usize) {
            Some(Some(ins)) => ins,
            _ => {
                self.run_state = RunState::Halted;
                return vec![TargetEvent::exception(
                    &self.instance,
                    ILLEGAL_INSTRUCTION,
                    Severity::Fatal,
                    format!("illegal instruction at pmem {pc}"),
                    cycles,
                )];
            }
        };

        if let (Mnemonic::In, Some(Operand::Reg(port))) = (ins.mnemonic, ins.operands.get(1).copied()) {
            let name = &self.regs[port].name;
            let wants_proc = self
                .binding(name, Direction::Source)
                .is_some_and(|b| matches!(b.endpoint, Endpoint::Procedure(_)));
            if wants_proc && !self.pending_input.contains_key(&port) {
                return vec![TargetEvent::new(EventKind::PortInputRequest, &self.instance, port as u64, cycles)];
            }
        }
        Vec::new()
    }

    fn reg(&self, id: RegId) -> u64 {
        self.values[id]
    }

    fn set_reg(&mut self, id: RegId, value: u64) {
        self.values[id] = self.regs[id].mask(value);
    }

    fn signed(&self, id: RegId) -> i64 {
        self.regs[id].interpret(self.values[id])
    }

    fn effective_addr(&self, op: Operand) -> u16 {
        match op {
            Operand::Addr(a) => a as u16,
            Operand::Indirect(r) => self.reg(r) as u16,
            _ => unreachable!("validated at decode"),
        }
    }

    fn data_read(&mut self, addr: u16, events: &mut Vec<TargetEvent>) -> u16 {
        let value = self.ymem[addr as usize];
        self.watch(addr, Access::Read, value, events);
        value
    }

    fn data_write(&mut self, addr: u16, value: u16, events: &mut Vec<TargetEvent>) {
        self.ymem[addr as usize] = value;
        self.watch(addr, Access::Write, value, events);
    }

    fn watch(&self, addr: u16, access: Access, value: u16, events: &mut Vec<TargetEvent>) {
        for w in self.data_bps.iter().filter(|w| w.addr == addr && w.access == access) {
            // cycle stamp is patched once the instruction's cost is charged
            events.push(
                TargetEvent::new(EventKind::DataBreakpoint, &self.instance, w.handle, 0)
                    .with_payload(vec![addr as u64, value as u64]),
            );
        }
    }

    fn push(&mut self, value: u16, events: &mut Vec<TargetEvent>) {
        let sp = (self.reg(isa::SP) as u16).wrapping_sub(1);
        self.set_reg(isa::SP, sp as u64);
        self.data_write(sp, value, events);
    }

    fn pop(&mut self, events: &mut Vec<TargetEvent>) -> u16 {
        let sp = self.reg(isa::SP) as u16;
        let value = self.data_read(sp, events);
        self.set_reg(isa::SP, sp.wrapping_add(1) as u64);
        value
    }

    fn arith(&self, op: BinOp, a: RegId, b: RegId) -> u64 {
        let x = Value::new(self.signed(a), self.regs[a].width);
        let y = Value::new(self.signed(b), self.regs[b].width);
        // only Div/Rem can fail and the ISA has neither
        personality_arith(op, x, y, self.personality()).map(|v| v.magnitude as u64).unwrap_or(0)
    }

    /// Executes the instruction at pc. Returns its cycle cost and the events it raised.
    fn execute_current(&mut self) -> (u32, Vec<TargetEvent>) {
        let pc = self.pc();
        let ins = self.pmem[pc as usize].clone().expect("checked by prefetch");
        let start_cycles = self.cycles();
        let logged: Vec<(RegId, u64)> = match &self.siglog {
            Some(log) => log.regs.iter().map(|id| (*id, self.values[*id])).collect(),
            None => Vec::new(),
        };
        let mut events = Vec::new();
        let mut next_pc = pc + 1;
        let ops = &ins.operands;
        let reg_of = |op: &Operand| match op {
            Operand::Reg(r) => *r,
            _ => unreachable!("validated at decode"),
        };
        let target_of = |op: &Operand| match op {
            Operand::Addr(a) => *a,
            _ => unreachable!("validated at decode"),
        };

        match ins.mnemonic {
            Mnemonic::Ldi => {
                let Operand::Imm(v) = ops[1] else { unreachable!() };
                self.set_reg(reg_of(&ops[0]), v as u64);
            }
            Mnemonic::Ld => {
                let addr = self.effective_addr(ops[1]);
                let v = self.data_read(addr, &mut events);
                self.set_reg(reg_of(&ops[0]), v as u64);
            }
            Mnemonic::St => {
                let addr = self.effective_addr(ops[0]);
                let v = self.reg(reg_of(&ops[1])) as u16;
                self.data_write(addr, v, &mut events);
            }
            Mnemonic::Mov => {
                let v = self.reg(reg_of(&ops[1]));
                self.set_reg(reg_of(&ops[0]), v);
            }
            Mnemonic::Add | Mnemonic::Sub | Mnemonic::Mul => {
                let op = match ins.mnemonic {
                    Mnemonic::Add => BinOp::Add,
                    Mnemonic::Sub => BinOp::Sub,
                    _ => BinOp::Mul,
                };
                let (d, s) = (reg_of(&ops[0]), reg_of(&ops[1]));
                let v = self.arith(op, d, s);
                self.set_reg(d, v);
            }
            Mnemonic::And | Mnemonic::Or | Mnemonic::Xor => {
                let (d, s) = (reg_of(&ops[0]), reg_of(&ops[1]));
                let (x, y) = (self.reg(d), self.reg(s));
                let v = match ins.mnemonic {
                    Mnemonic::And => x & y,
                    Mnemonic::Or => x | y,
                    _ => x ^ y,
                };
                self.set_reg(d, v);
            }
            Mnemonic::Cmp => {
                let eq = self.reg(reg_of(&ops[0])) == self.reg(reg_of(&ops[1]));
                self.set_reg(isa::FLAG, eq as u64);
            }
            Mnemonic::Beq => {
                if self.reg(isa::FLAG) == 1 {
                    next_pc = target_of(&ops[0]);
                }
            }
            Mnemonic::Bne => {
                if self.reg(isa::FLAG) == 0 {
                    next_pc = target_of(&ops[0]);
                }
            }
            Mnemonic::Blt => {
                if self.signed(reg_of(&ops[0])) < self.signed(reg_of(&ops[1])) {
                    next_pc = target_of(&ops[2]);
                }
            }
            Mnemonic::Jmp => next_pc = target_of(&ops[0]),
            Mnemonic::Call => {
                self.push((pc + 1) as u16, &mut events);
                next_pc = target_of(&ops[0]);
            }
            Mnemonic::Ret => next_pc = self.pop(&mut events) as u32,
            Mnemonic::Push => {
                let v = self.reg(reg_of(&ops[0])) as u16;
                self.push(v, &mut events);
            }
            Mnemonic::Pop => {
                let v = self.pop(&mut events);
                self.set_reg(reg_of(&ops[0]), v as u64);
            }
            Mnemonic::Tas => {
                let addr = self.effective_addr(ops[0]);
                let v = self.data_read(addr, &mut events);
                if v != 0 {
                    self.data_write(addr, 0, &mut events);
                    self.set_reg(isa::FLAG, 1);
                } else {
                    self.set_reg(isa::FLAG, 0);
                }
            }
            Mnemonic::In => {
                let (dst, port) = (reg_of(&ops[0]), reg_of(&ops[1]));
                let name = self.regs[port].name.clone();
                let value = match self.binding(&name, Direction::Source).map(|b| &b.endpoint) {
                    Some(Endpoint::Procedure(_)) => {
                        let v = self.pending_input.remove(&port).expect("supplied before execution");
                        self.set_reg(port, v as u64);
                        v as u64
                    }
                    Some(Endpoint::File(_)) => {
                        let next = self.file_sources.get_mut(&port).and_then(|q| q.pop_front());
                        let v = match next {
                            Some(v) => v,
                            None => {
                                events.push(TargetEvent::exception(
                                    &self.instance,
                                    PORT_EOF,
                                    Severity::Note,
                                    format!("end of input on port {name}"),
                                    0,
                                ));
                                0
                            }
                        };
                        self.set_reg(port, v as u64);
                        v as u64
                    }
                    _ => self.reg(port),
                };
                self.set_reg(dst, value);
            }
            Mnemonic::Out => {
                let (port, src) = (reg_of(&ops[0]), reg_of(&ops[1]));
                let value = self.reg(src);
                self.set_reg(port, value);
                let name = self.regs[port].name.clone();
                match self.binding(&name, Direction::Sink).map(|b| b.endpoint.clone()) {
                    Some(Endpoint::Procedure(_)) => events.push(
                        TargetEvent::new(EventKind::PortOutput, &self.instance, port as u64, 0)
                            .with_payload(vec![self.reg(port)]),
                    ),
                    Some(Endpoint::File(_)) => {
                        if let Some(f) = self.sink_files.get_mut(&port) {
                            let _ = writeln!(f, "{}", value & 0xFFFF);
                        }
                    }
                    _ => {}
                }
            }
            Mnemonic::Icall => {
                let Operand::Imm(code) = ops[0] else { unreachable!() };
                events.push(
                    TargetEvent::new(EventKind::Syscall, &self.instance, code as u64, 0)
                        .with_payload(vec![self.reg(isa::I)]),
                );
            }
            Mnemonic::Halt => {
                next_pc = pc;
                self.run_state = RunState::Halted;
                events.push(TargetEvent::new(EventKind::Halt, &self.instance, 0, 0));
            }
            Mnemonic::Nop => {}
        }

        let cost = ins.cycle_cost();
        let total = start_cycles as u64 + cost as u64;
        self.values[isa::CYCLES] = total & 0xFFFF_FFFF;
        let now = self.cycles();
        for ev in events.iter_mut() {
            ev.cycle_stamp = now;
        }
        if total > u32::MAX as u64 && self.values[isa::CYCLEC] & CYCLEC_BREAK_BIT != 0 {
            events.push(TargetEvent::exception(
                &self.instance,
                UNHANDLED_BP,
                Severity::Error,
                format!("unhandled breakpoint handle {CYCCNT_EXPIRED}"),
                now,
            ));
        }
        self.set_reg(isa::PC, next_pc as u64);
        self.suppress_bp_at = None;

        for (id, before) in logged {
            if self.values[id] != before {
                self.log_change(id, start_cycles);
            }
        }
        (cost, events)
    }
}

fn read_port_file(path: &Path) -> Result<VecDeque<u16>, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::file(path, e))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| parse_word(l).ok_or_else(|| SimError::BadPortData(l.to_string())))
        .collect()
}

fn parse_word(s: &str) -> Option<u16> {
    let v = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).ok()?
    } else {
        s.parse::<i64>().ok()?
    };
    Some(v as u16)
}
