//! Named λ-terms with globally unique variable identifiers.
//!
//! Terms are immutable and reference counted, so sub-terms are shared freely
//! (the size-exploding families rely on this: `γ_{n+1} = γ_n γ_n` is built in
//! linear space). Every node caches its size, which lets decoding refuse to
//! materialise a term before it walks it.

mod names;
mod subst;
mod syntax;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub use names::{Names, VarId};
pub(crate) use subst::copy_code;
pub use subst::{fresh_rename, is_well_named, rename_free, subst_meta, substitute};
pub use syntax::{parse, parse_closed, print, print_with, Lambda, ParseError};

#[derive(Clone)]
pub struct Term(Arc<Node>);

struct Node {
    kind: TermKind,
    size: u64,
}

#[derive(Clone, PartialEq, Eq)]
pub enum TermKind {
    Var(VarId),
    Abs(VarId, Term),
    App(Term, Term),
}

/// Position of a term in the fireball grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum FireballClass {
    Abstraction,
    Inert,
    NotFireball,
}

impl FireballClass {
    pub fn is_fireball(self) -> bool {
        self != FireballClass::NotFireball
    }
}

impl Term {
    pub fn var(v: VarId) -> Term {
        Term(Arc::new(Node {
            kind: TermKind::Var(v),
            size: 1,
        }))
    }

    pub fn abs(binder: VarId, body: Term) -> Term {
        let size = body.size().saturating_add(1);
        Term(Arc::new(Node {
            kind: TermKind::Abs(binder, body),
            size,
        }))
    }

    pub fn app(left: Term, right: Term) -> Term {
        let size = left.size().saturating_add(right.size()).saturating_add(1);
        Term(Arc::new(Node {
            kind: TermKind::App(left, right),
            size,
        }))
    }

    /// Left-nested application `head a1 … an`.
    pub fn apply(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    /// Number of constructors: `|x| = 1`, `|λx.t| = 1 + |t|`, `|t u| = 1 + |t| + |u|`.
    /// Saturates at `u64::MAX` for shared terms whose tree is astronomically large.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn as_var(&self) -> Option<&VarId> {
        match self.kind() {
            TermKind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_abs(&self) -> bool {
        matches!(self.kind(), TermKind::Abs(..))
    }

    /// Free variable occurrences not under an abstraction.
    pub fn free_size(&self) -> u64 {
        match self.kind() {
            TermKind::Var(_) => 1,
            TermKind::Abs(..) => 0,
            TermKind::App(l, r) => l.free_size() + r.free_size(),
        }
    }

    pub fn classify(&self) -> FireballClass {
        match self.kind() {
            TermKind::Abs(..) => FireballClass::Abstraction,
            TermKind::Var(_) => FireballClass::Inert,
            TermKind::App(..) => {
                // x f1 … fn: walk the left spine, every argument must be a fireball.
                let mut cur = self;
                while let TermKind::App(l, r) = cur.kind() {
                    if !r.classify().is_fireball() {
                        return FireballClass::NotFireball;
                    }
                    cur = l;
                }
                match cur.kind() {
                    TermKind::Var(_) => FireballClass::Inert,
                    _ => FireballClass::NotFireball,
                }
            }
        }
    }

    pub fn is_fireball(&self) -> bool {
        self.classify().is_fireball()
    }

    pub fn is_inert(&self) -> bool {
        self.classify() == FireballClass::Inert
    }

    pub fn free_vars(&self) -> HashSet<VarId> {
        fn go(t: &Term, bound: &mut Vec<VarId>, out: &mut HashSet<VarId>) {
            match t.kind() {
                TermKind::Var(v) => {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
                TermKind::Abs(x, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                TermKind::App(l, r) => {
                    go(l, bound, out);
                    go(r, bound, out);
                }
            }
        }
        let mut out = HashSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable identifier appearing in the term, as occurrence or binder.
    pub fn all_vars(&self) -> HashSet<VarId> {
        let mut out = HashSet::new();
        self.for_each_var(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    pub(crate) fn for_each_var(&self, f: &mut impl FnMut(&VarId)) {
        match self.kind() {
            TermKind::Var(v) => f(v),
            TermKind::Abs(x, b) => {
                f(x);
                b.for_each_var(f);
            }
            TermKind::App(l, r) => {
                l.for_each_var(f);
                r.for_each_var(f);
            }
        }
    }

    /// All sub-terms, the term itself included, in pre-order.
    pub fn subterms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        let mut todo = vec![self.clone()];
        while let Some(t) = todo.pop() {
            match t.kind() {
                TermKind::Var(_) => {}
                TermKind::Abs(_, b) => todo.push(b.clone()),
                TermKind::App(l, r) => {
                    todo.push(r.clone());
                    todo.push(l.clone());
                }
            }
            out.push(t);
        }
        out
    }
}

/// α-equivalence. Free variables are compared by identity.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go(
        a: &Term,
        b: &Term,
        depth: usize,
        la: &mut HashMap<VarId, usize>,
        lb: &mut HashMap<VarId, usize>,
    ) -> bool {
        if a.size() != b.size() {
            return false;
        }
        match (a.kind(), b.kind()) {
            (TermKind::Var(x), TermKind::Var(y)) => match (la.get(x), lb.get(y)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            },
            (TermKind::Abs(x, t), TermKind::Abs(y, u)) => {
                let px = la.insert(x.clone(), depth);
                let py = lb.insert(y.clone(), depth);
                let ok = go(t, u, depth + 1, la, lb);
                restore(la, x, px);
                restore(lb, y, py);
                ok
            }
            (TermKind::App(l1, r1), TermKind::App(l2, r2)) => {
                go(l1, l2, depth, la, lb) && go(r1, r2, depth, la, lb)
            }
            _ => false,
        }
    }
    if a.ptr_eq(b) {
        return true;
    }
    go(a, b, 0, &mut HashMap::new(), &mut HashMap::new())
}

fn restore(map: &mut HashMap<VarId, usize>, key: &VarId, prev: Option<usize>) {
    match prev {
        Some(p) => {
            map.insert(key.clone(), p);
        }
        None => {
            map.remove(key);
        }
    }
}

/// Canonical text for a term up to α: binders become de Bruijn levels, free
/// variables keep their identifier. Two terms have equal keys iff `alpha_eq`.
pub fn alpha_key(t: &Term) -> String {
    fn go(t: &Term, depth: usize, levels: &mut HashMap<VarId, usize>, out: &mut String) {
        use std::fmt::Write;
        match t.kind() {
            TermKind::Var(v) => match levels.get(v) {
                Some(l) => write!(out, "#{l}").unwrap(),
                None => write!(out, "${}", v.id()).unwrap(),
            },
            TermKind::Abs(x, b) => {
                out.push('\\');
                let prev = levels.insert(x.clone(), depth);
                go(b, depth + 1, levels, out);
                restore(levels, x, prev);
            }
            TermKind::App(l, r) => {
                out.push('(');
                go(l, depth, levels, out);
                out.push(' ');
                go(r, depth, levels, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(t, 0, &mut HashMap::new(), &mut out);
    out
}

/// Equality after replacing every variable and binder by one placeholder.
pub fn skeleton_equal(a: &Term, b: &Term) -> bool {
    if a.ptr_eq(b) {
        return true;
    }
    if a.size() != b.size() {
        return false;
    }
    match (a.kind(), b.kind()) {
        (TermKind::Var(_), TermKind::Var(_)) => true,
        (TermKind::Abs(_, t), TermKind::Abs(_, u)) => skeleton_equal(t, u),
        (TermKind::App(l1, r1), TermKind::App(l2, r2)) => {
            skeleton_equal(l1, l2) && skeleton_equal(r1, r2)
        }
        _ => false,
    }
}

/// Hash compatible with `skeleton_equal`. Compositional: the hash of a node
/// depends only on its constructor and the hashes of its children.
pub fn skeleton_hash(t: &Term) -> u64 {
    match t.kind() {
        TermKind::Var(_) => skeleton_mix(0, 0, 0),
        TermKind::Abs(_, b) => skeleton_mix(1, skeleton_hash(b), 0),
        TermKind::App(l, r) => skeleton_mix(2, skeleton_hash(l), skeleton_hash(r)),
    }
}

pub(crate) fn skeleton_mix(tag: u8, a: u64, b: u64) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    (tag, a, b).hash(&mut h);
    h.finish()
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.ptr_eq(other) || (self.size() == other.size() && self.kind() == other.kind())
    }
}

impl Eq for Term {}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({})", print(self))
    }
}

/// A term under the well-named discipline: binders are pairwise distinct and a
/// binder `x` of `λx.u` occurs only inside `u`. Codes are never identified up
/// to α; the machines manipulate them literally.
#[derive(Clone, PartialEq, Eq)]
pub struct Code(Term);

impl Code {
    /// Wraps a term the caller knows to be well-named (a sub-code of a code,
    /// or the output of a renaming pass).
    pub(crate) fn trusted(t: Term) -> Code {
        debug_assert!(is_well_named(&t), "not well-named: {t}");
        Code(t)
    }

    /// Checks the well-naming predicate.
    pub fn new(t: Term) -> Option<Code> {
        is_well_named(&t).then_some(Code(t))
    }

    pub fn term(&self) -> &Term {
        &self.0
    }

    pub fn into_term(self) -> Term {
        self.0
    }

    pub fn view(&self) -> CodeView {
        match self.0.kind() {
            TermKind::Var(v) => CodeView::Var(v.clone()),
            TermKind::Abs(x, b) => CodeView::Abs(x.clone(), Code(b.clone())),
            TermKind::App(l, r) => CodeView::App(Code(l.clone()), Code(r.clone())),
        }
    }
}

/// One-level destructuring of a code into sub-codes.
pub enum CodeView {
    Var(VarId),
    Abs(VarId, Code),
    App(Code, Code),
}

impl std::ops::Deref for Code {
    type Target = Term;
    fn deref(&self) -> &Term {
        &self.0
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Code({})", print(&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(names: &mut Names, s: &str) -> Term {
        parse(names, s).unwrap()
    }

    #[test]
    fn sizes() {
        let mut n = Names::new();
        assert_eq!(p(&mut n, "x").size(), 1);
        assert_eq!(p(&mut n, "\\x.x x").size(), 4);
        assert_eq!(p(&mut n, "(\\z.z (y z)) \\x.x").size(), 9);
    }

    #[test]
    fn free_sizes() {
        let mut n = Names::new();
        assert_eq!(p(&mut n, "x y").free_size(), 2);
        assert_eq!(p(&mut n, "\\y.x y").free_size(), 0);
        assert_eq!(p(&mut n, "(\\x.x) y z").free_size(), 2);
    }

    #[test]
    fn classification() {
        let mut n = Names::new();
        assert_eq!(p(&mut n, "\\x.y").classify(), FireballClass::Abstraction);
        assert_eq!(
            p(&mut n, "(z (\\x.x)) (z z) (\\y.z y)").classify(),
            FireballClass::Inert
        );
        assert_eq!(p(&mut n, "(\\x.x) y").classify(), FireballClass::NotFireball);
        assert_eq!(p(&mut n, "x").classify(), FireballClass::Inert);
        assert_eq!(p(&mut n, "y (\\x.x)").classify(), FireballClass::Inert);
        assert_eq!(p(&mut n, "y ((\\x.x) y)").classify(), FireballClass::NotFireball);
    }

    #[test]
    fn alpha_and_skeleton() {
        let mut n = Names::new();
        let a = p(&mut n, "\\x.x");
        let b = p(&mut n, "\\y.y");
        let c = p(&mut n, "\\x.x x");
        assert!(alpha_eq(&a, &b));
        assert_eq!(alpha_key(&a), alpha_key(&b));
        assert!(skeleton_equal(&a, &b));
        assert!(!skeleton_equal(&a, &c));
        assert_eq!(skeleton_hash(&a), skeleton_hash(&b));
        // free variables are compared by identity
        let f = p(&mut n, "\\x.y");
        let g = p(&mut n, "\\x.z");
        assert!(!alpha_eq(&f, &g));
        assert!(skeleton_equal(&f, &g));
        // shadowing
        let s1 = p(&mut n, "\\x.\\x.x");
        let s2 = p(&mut n, "\\a.\\b.b");
        let s3 = p(&mut n, "\\a.\\b.a");
        assert!(alpha_eq(&s1, &s2));
        assert!(!alpha_eq(&s1, &s3));
    }

    #[test]
    fn subterms_preorder() {
        let mut n = Names::new();
        let t = p(&mut n, "(\\z.z) y");
        let subs: Vec<String> = t.subterms().iter().map(print).collect();
        assert_eq!(subs, vec!["(\\z.z) y", "\\z.z", "z", "y"]);
    }
}
