use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use fireball::terms::{Term, VarId};

pub const SCHEMA_VERSION: u32 = 1;

/// Display names for variables. Free variables of the input keep their
/// names; in golden mode every other variable is renamed, per root, in order
/// of first appearance: `x`, `x'`, `x''`, `x'''`, `x4`, …
pub struct Namer {
    golden: bool,
    free: HashSet<VarId>,
    taken: HashSet<String>,
    assigned: RefCell<HashMap<VarId, String>>,
    next: RefCell<HashMap<String, u32>>,
}

impl Namer {
    pub fn new(t0: &Term, golden: bool) -> Namer {
        let free = t0.free_vars();
        let taken = free.iter().map(|v| v.name().to_string()).collect();
        Namer {
            golden,
            free,
            taken,
            assigned: RefCell::new(HashMap::new()),
            next: RefCell::new(HashMap::new()),
        }
    }

    pub fn name(&self, v: &VarId) -> String {
        if !self.golden || self.free.contains(v) {
            return v.name().to_string();
        }
        if let Some(n) = self.assigned.borrow().get(v) {
            return n.clone();
        }
        let mut next = self.next.borrow_mut();
        let k = next.entry(v.root().to_string()).or_insert(0);
        let name = loop {
            let candidate = match *k {
                0..=3 => format!("{}{}", v.root(), "'".repeat(*k as usize)),
                k => format!("{}{k}", v.root()),
            };
            *k += 1;
            if !self.taken.contains(&candidate) {
                break candidate;
            }
        };
        self.assigned.borrow_mut().insert(v.clone(), name.clone());
        name
    }
}

/// Left-aligned columns separated by two spaces, trailing blanks trimmed.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut out = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(c);
            out.extend(std::iter::repeat_n(' ', w - c.chars().count()));
        }
        out.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("records are UTF-8")
}

pub fn json(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n"
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}
