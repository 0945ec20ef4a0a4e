//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use luxdbg::kernel::Kernel;
use luxdbg::lang::Interp;
use serde_json::Value as Json;

pub fn session() -> Interp<Kernel> {
    luxdbg::capturing_session()
}

pub fn run(i: &mut Interp<Kernel>, cmd: &str) -> Result<String, String> {
    i.eval(cmd).map_err(|e| format!("{cmd}: {}", e.message()))
}

/// Sources a shipped test script with `row` collecting its lines.
pub fn rows(i: &mut Interp<Kernel>, script: &str) -> Result<Vec<String>, String> {
    run(i, "set rows {}; proc row args { global rows; lappend rows [join $args { }] }")?;
    run(i, &format!("source tests/{script}.lx"))?;
    let all = run(i, "set rows")?;
    luxdbg::lang::split_list(&all)
}

/// Straight-line program with unconditional jumps, read back from an image file.
pub struct Trace {
    ops: HashMap<u32, (String, Vec<String>)>,
    labels: HashMap<String, u32>,
}

impl Trace {
    pub fn load(path: &str) -> Trace {
        let img: Json = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        let mut ops = HashMap::new();
        for p in img["pmem"].as_array().unwrap() {
            let args = p["args"].as_array().map(|a| a.iter().map(|s| s.as_str().unwrap().to_string()).collect());
            ops.insert(p["addr"].as_u64().unwrap() as u32, (p["op"].as_str().unwrap().to_string(), args.unwrap_or_default()));
        }
        let mut labels = HashMap::new();
        for s in img["symbols"].as_array().unwrap() {
            labels.insert(s["name"].as_str().unwrap().to_string(), s["address"].as_u64().unwrap() as u32);
        }
        Trace { ops, labels }
    }

    /// Runs whole instructions from `pc` until at least `budget` cycles have elapsed.
    /// Returns (cycles executed, final pc).
    pub fn run(&self, mut pc: u32, budget: u64) -> (u64, u32) {
        let mut used = 0;
        while used < budget {
            let (op, args) = &self.ops[&pc];
            used += if op == "MUL" { 2 } else { 1 };
            pc = match op.as_str() {
                "JMP" => self.labels.get(&args[0]).copied().unwrap_or_else(|| args[0].parse().unwrap()),
                _ => pc + 1,
            };
        }
        (used, pc)
    }
}

/// `cycles` on an instance, read with hidden registers briefly exposed.
pub fn cycles(i: &mut Interp<Kernel>, p: &str) -> u64 {
    run(i, &format!("{p} configure -hiddenregisters on")).unwrap();
    let c = run(i, &format!("{p} cycles")).unwrap();
    run(i, &format!("{p} configure -hiddenregisters off")).unwrap();
    c.parse().unwrap()
}

/// Exact Q15 product: the rational a*b/2^15 truncated toward zero, clamped to 16 bits.
pub fn q15_oracle(a: i16, b: i16) -> i16 {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    let q = BigRational::new(BigInt::from(a) * BigInt::from(b), BigInt::from(1 << 15)).trunc().to_integer();
    let q = q.max(BigInt::from(i16::MIN)).min(BigInt::from(i16::MAX));
    i16::try_from(q).unwrap()
}
