use std::collections::HashSet;

use super::{Code, Names, Term, TermKind, VarId};

/// Simultaneous capture-avoiding substitution.
///
/// Every free occurrence of a variable `v` for which `lookup(v)` is `Some(u)`
/// is replaced by `u`. A binder for which `avoid` holds (it would capture a
/// free variable of some substituted term) is renamed to a fresh copy.
/// Untouched sub-terms are shared with the input.
pub fn substitute(
    names: &mut Names,
    t: &Term,
    lookup: &mut dyn FnMut(&VarId) -> Option<Term>,
    avoid: &dyn Fn(&VarId) -> bool,
) -> Term {
    let mut s = Subst {
        names,
        lookup,
        avoid,
        local: Vec::new(),
    };
    s.go(t).unwrap_or_else(|| t.clone())
}

struct Subst<'a, 'b> {
    names: &'a mut Names,
    lookup: &'b mut dyn FnMut(&VarId) -> Option<Term>,
    avoid: &'b dyn Fn(&VarId) -> bool,
    // binders in scope: shadowed names map to themselves, renamed ones to the copy
    local: Vec<(VarId, VarId)>,
}

impl Subst<'_, '_> {
    fn go(&mut self, t: &Term) -> Option<Term> {
        match t.kind() {
            TermKind::Var(v) => match self.local.iter().rev().find(|(b, _)| b == v) {
                Some((_, to)) if to == v => None,
                Some((_, to)) => Some(Term::var(to.clone())),
                None => (self.lookup)(v),
            },
            TermKind::Abs(x, body) => {
                if (self.avoid)(x) {
                    let fresh = self.names.copy_of(x);
                    self.local.push((x.clone(), fresh.clone()));
                    let body2 = self.go(body).unwrap_or_else(|| body.clone());
                    self.local.pop();
                    Some(Term::abs(fresh, body2))
                } else {
                    self.local.push((x.clone(), x.clone()));
                    let body2 = self.go(body);
                    self.local.pop();
                    body2.map(|b| Term::abs(x.clone(), b))
                }
            }
            TermKind::App(l, r) => {
                let l2 = self.go(l);
                let r2 = self.go(r);
                if l2.is_none() && r2.is_none() {
                    return None;
                }
                Some(Term::app(
                    l2.unwrap_or_else(|| l.clone()),
                    r2.unwrap_or_else(|| r.clone()),
                ))
            }
        }
    }
}

/// `t{x←u}`.
pub fn subst_meta(names: &mut Names, t: &Term, x: &VarId, u: &Term) -> Term {
    let fv = u.free_vars();
    substitute(
        names,
        t,
        &mut |v| (v == x).then(|| u.clone()),
        &|b| fv.contains(b),
    )
}

/// An α-equivalent well-named code whose binders are all fresh identifiers.
/// Display names are kept; free variables are untouched.
pub fn fresh_rename(names: &mut Names, t: &Term) -> Code {
    Code::trusted(rename_binders(names, t, &mut |n, x| n.fresh_like(x)))
}

/// Like [`fresh_rename`] but the new binders are displayed as primed copies.
pub(crate) fn copy_code(names: &mut Names, t: &Term) -> Code {
    Code::trusted(rename_binders(names, t, &mut |n, x| n.copy_of(x)))
}

fn rename_binders(
    names: &mut Names,
    t: &Term,
    fresh: &mut dyn FnMut(&mut Names, &VarId) -> VarId,
) -> Term {
    fn go(
        names: &mut Names,
        t: &Term,
        fresh: &mut dyn FnMut(&mut Names, &VarId) -> VarId,
        scope: &mut Vec<(VarId, VarId)>,
    ) -> Term {
        match t.kind() {
            TermKind::Var(v) => match scope.iter().rev().find(|(b, _)| b == v) {
                Some((_, to)) => Term::var(to.clone()),
                None => t.clone(),
            },
            TermKind::Abs(x, body) => {
                let x2 = fresh(names, x);
                scope.push((x.clone(), x2.clone()));
                let body2 = go(names, body, fresh, scope);
                scope.pop();
                Term::abs(x2, body2)
            }
            TermKind::App(l, r) => {
                let l2 = go(names, l, fresh, scope);
                let r2 = go(names, r, fresh, scope);
                Term::app(l2, r2)
            }
        }
    }
    go(names, t, fresh, &mut Vec::new())
}

/// Textual replacement of the free occurrences of `x` by `y`; binders are
/// left alone.
///
/// Panics if `y` is a binder of `t`: the replacement would be captured, which
/// only happens if the freshness discipline of the machines is broken.
pub fn rename_free(t: &Term, x: &VarId, y: &VarId) -> Term {
    fn go(t: &Term, x: &VarId, y: &VarId) -> Option<Term> {
        match t.kind() {
            TermKind::Var(v) => (v == x).then(|| Term::var(y.clone())),
            TermKind::Abs(b, body) => {
                assert!(b != y, "renaming {x:?} to {y:?} would be captured");
                if b == x {
                    return None;
                }
                go(body, x, y).map(|body| Term::abs(b.clone(), body))
            }
            TermKind::App(l, r) => {
                let l2 = go(l, x, y);
                let r2 = go(r, x, y);
                if l2.is_none() && r2.is_none() {
                    return None;
                }
                Some(Term::app(
                    l2.unwrap_or_else(|| l.clone()),
                    r2.unwrap_or_else(|| r.clone()),
                ))
            }
        }
    }
    go(t, x, y).unwrap_or_else(|| t.clone())
}

/// Binders pairwise distinct, and each binder occurs only inside its body.
pub fn is_well_named(t: &Term) -> bool {
    let mut binders = HashSet::new();
    let mut distinct = true;
    t.for_each_binder(&mut |x| distinct &= binders.insert(x.clone()));
    distinct && scoped_occurrences(t, &binders, &mut Vec::new())
}

fn scoped_occurrences(t: &Term, binders: &HashSet<VarId>, enclosing: &mut Vec<VarId>) -> bool {
    match t.kind() {
        TermKind::Var(v) => !binders.contains(v) || enclosing.contains(v),
        TermKind::Abs(x, body) => {
            enclosing.push(x.clone());
            let ok = scoped_occurrences(body, binders, enclosing);
            enclosing.pop();
            ok
        }
        TermKind::App(l, r) => {
            scoped_occurrences(l, binders, enclosing) && scoped_occurrences(r, binders, enclosing)
        }
    }
}

impl Term {
    pub(crate) fn for_each_binder(&self, f: &mut impl FnMut(&VarId)) {
        match self.kind() {
            TermKind::Var(_) => {}
            TermKind::Abs(x, b) => {
                f(x);
                b.for_each_binder(f);
            }
            TermKind::App(l, r) => {
                l.for_each_binder(f);
                r.for_each_binder(f);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{alpha_eq, parse, print};

    #[test]
    fn substitution_can_create_a_redex() {
        let mut n = Names::new();
        let t = parse(&mut n, "x y").unwrap();
        let id = parse(&mut n, "\\z.z").unwrap();
        let x = n.free("x");
        let r = subst_meta(&mut n, &t, &x, &id);
        assert!(alpha_eq(&r, &parse(&mut n, "(\\z.z) y").unwrap()));
    }

    #[test]
    fn variable_is_replaced() {
        let mut n = Names::new();
        let t = parse(&mut n, "x").unwrap();
        let u = parse(&mut n, "a \\w.w").unwrap();
        let x = n.free("x");
        assert_eq!(subst_meta(&mut n, &t, &x, &u), u);
    }

    #[test]
    fn binder_is_renamed_to_avoid_capture() {
        let mut n = Names::new();
        let t = parse(&mut n, "\\y.x").unwrap();
        let y_free = n.free("y");
        let x = n.free("x");
        let r = subst_meta(&mut n, &t, &x, &Term::var(y_free.clone()));
        let TermKind::Abs(b, body) = r.kind() else { panic!() };
        assert_ne!(b, &y_free);
        assert_eq!(body.as_var(), Some(&y_free));
        assert!(r.free_vars().contains(&y_free));
        assert_eq!(print(&r), "\\y'.y");
    }

    #[test]
    fn shadowed_occurrences_are_untouched() {
        let mut n = Names::new();
        let t = parse(&mut n, "\\x.x").unwrap();
        let x = n.free("x");
        let u = parse(&mut n, "q").unwrap();
        let r = subst_meta(&mut n, &t, &x, &u);
        assert!(r.ptr_eq(&t));
    }

    #[test]
    fn fresh_rename_yields_well_named_codes() {
        let mut n = Names::new();
        let t = parse(&mut n, "\\x.\\x.x").unwrap();
        assert!(!is_well_named(&Term::app(t.clone(), t.clone())));
        let c = fresh_rename(&mut n, &t);
        assert!(is_well_named(&c));
        assert!(alpha_eq(&c, &t));
        let TermKind::Abs(x1, inner) = c.kind() else { panic!() };
        let TermKind::Abs(x2, _) = inner.kind() else { panic!() };
        assert_ne!(x1, x2);

        let y = parse(&mut n, "y").unwrap();
        assert_eq!(fresh_rename(&mut n, &y).term(), &y);

        let d = parse(&mut n, "\\x.x x").unwrap();
        let cd = fresh_rename(&mut n, &d);
        assert!(alpha_eq(&cd, &d));
        assert_ne!(cd.term(), &d);
    }

    #[test]
    fn rename_free_is_textual() {
        let mut n = Names::new();
        let t = parse(&mut n, "x x").unwrap();
        let (x, y) = (n.free("x"), n.free("y"));
        assert_eq!(print(&rename_free(&t, &x, &y)), "y y");
        let u = parse(&mut n, "\\w.x w").unwrap();
        assert_eq!(print(&rename_free(&u, &x, &y)), "\\w.y w");
    }

    #[test]
    #[should_panic(expected = "would be captured")]
    fn rename_free_refuses_capture() {
        let mut n = Names::new();
        let w = n.binder("w");
        let x = n.free("x");
        let t = Term::abs(w.clone(), Term::app(Term::var(x.clone()), Term::var(w.clone())));
        rename_free(&t, &x, &w);
    }
}
