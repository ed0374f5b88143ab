use super::{DumpEntry, Env, Item, Stack, State, Transition};
use crate::terms::{print_with, Lambda, Term, VarId};

fn own_name(v: &VarId) -> String {
    v.name().to_string()
}

/// How to print the pieces of a state.
#[derive(Clone, Copy)]
pub struct Renderer<'a> {
    pub lambda: Lambda,
    pub namer: &'a dyn Fn(&VarId) -> String,
}

impl Default for Renderer<'_> {
    fn default() -> Self {
        Renderer {
            lambda: Lambda::Greek,
            namer: &own_name,
        }
    }
}

impl Renderer<'_> {
    pub fn term(&self, t: &Term) -> String {
        print_with(t, self.lambda, self.namer)
    }

    fn var(&self, v: &VarId) -> String {
        (self.namer)(v)
    }
}

/// `⟨λx.u,ε⟩` or `⟨x,π⟩`, a nonempty inner stack in parentheses.
pub fn render_item(item: &Item, r: &Renderer) -> String {
    match item {
        Item::Abs(c) => format!("⟨{},ε⟩", r.term(c)),
        Item::Var(x, args) => format!("⟨{},{}⟩", r.var(x), nested_stack(args, r)),
    }
}

fn nested_stack(s: &Stack, r: &Renderer) -> String {
    if s.is_empty() {
        "ε".into()
    } else {
        format!("({})", render_stack(s, r))
    }
}

/// Items separated by `:`, head first; `ε` when empty.
pub fn render_stack(s: &Stack, r: &Renderer) -> String {
    if s.is_empty() {
        return "ε".into();
    }
    s.iter().map(|i| render_item(i, r)).collect::<Vec<_>>().join(":")
}

fn render_entry(e: &DumpEntry, r: &Renderer) -> String {
    format!("({},{})", r.term(&e.code), render_stack(&e.stack, r))
}

/// Entries separated by `:`, the innermost (most recent) last.
pub fn render_dump(s: &State, r: &Renderer) -> String {
    if s.dump.is_empty() {
        return "ε".into();
    }
    let mut entries: Vec<String> = s.dump.iter().map(|e| render_entry(e, r)).collect();
    entries.reverse();
    entries.join(":")
}

/// Bindings separated by `:`, the newest first.
pub fn render_env(env: &Env, r: &Renderer) -> String {
    if env.is_empty() {
        return "ε".into();
    }
    env.iter()
        .map(|(x, i)| format!("[{}←{}]", r.var(x), render_item(i, r)))
        .collect::<Vec<_>>()
        .join(":")
}

/// One line of a trace table.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct TraceRow {
    pub dump: String,
    pub code: String,
    pub stack: String,
    pub env: String,
    pub transition: Option<String>,
}

pub fn render_row(s: &State, transition: Option<Transition>, r: &Renderer) -> TraceRow {
    TraceRow {
        dump: render_dump(s, r),
        code: r.term(&s.code),
        stack: render_stack(&s.stack, r),
        env: render_env(&s.env, r),
        transition: transition.map(|t| t.symbol().to_string()),
    }
}

impl TraceRow {
    /// Rows as an aligned table with a header line.
    pub fn table(rows: &[TraceRow]) -> String {
        let header = ["Dump", "Code", "Stack", "Global Env", "Transition"];
        let cells: Vec<[&str; 5]> = rows
            .iter()
            .map(|r| {
                [
                    r.dump.as_str(),
                    r.code.as_str(),
                    r.stack.as_str(),
                    r.env.as_str(),
                    r.transition.as_deref().unwrap_or(""),
                ]
            })
            .collect();
        let mut widths = header.map(|h| h.chars().count());
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |row: &[&str; 5]| {
            let mut out = String::new();
            for (i, (c, w)) in row.iter().zip(widths).enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                out.push_str(c);
                if i + 1 < row.len() {
                    out.extend(std::iter::repeat_n(' ', w - c.chars().count()));
                }
            }
            out.trim_end().to_string() + "\n"
        };
        let mut out = line(&header);
        for row in &cells {
            out.push_str(&line(row));
        }
        out
    }
}
