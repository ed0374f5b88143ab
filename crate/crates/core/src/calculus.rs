//! Reference semantics: the right-to-left strategy, exhaustive one-step
//! reduction for tiny terms, and the size-exploding term families.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::terms::{alpha_key, subst_meta, FireballClass, Names, Term, TermKind, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum StepKind {
    /// The argument of the fired redex is an abstraction.
    BetaLambda,
    /// The argument of the fired redex is an inert term.
    BetaInert,
}

impl StepKind {
    fn of_argument(arg: &Term) -> StepKind {
        if arg.is_abs() {
            StepKind::BetaLambda
        } else {
            StepKind::BetaInert
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("term of size {size} is too large for exhaustive reduction (cap {cap})")]
    TooLarge { size: u64, cap: u64 },
    #[error("reduction graph exceeds {cap} nodes")]
    GraphTooLarge { cap: usize },
    #[error("`{0}` is not an inert term")]
    NotInert(String),
}

/// The unique right-to-left reduct of `t`, or `None` iff `t` is a fireball.
pub fn rtl_step(names: &mut Names, t: &Term) -> Option<(Term, StepKind)> {
    step_or_class(names, t).ok()
}

// Ok: the reduct. Err: `t` is normal, with its class.
fn step_or_class(names: &mut Names, t: &Term) -> Result<(Term, StepKind), FireballClass> {
    match t.kind() {
        TermKind::Var(_) => Err(FireballClass::Inert),
        TermKind::Abs(..) => Err(FireballClass::Abstraction),
        TermKind::App(l, r) => {
            if let Ok((r2, kind)) = step_or_class(names, r) {
                return Ok((Term::app(l.clone(), r2), kind));
            }
            if let TermKind::Abs(x, body) = l.kind() {
                return Ok((subst_meta(names, body, x, r), StepKind::of_argument(r)));
            }
            let (l2, kind) = step_or_class(names, l)?;
            Ok((Term::app(l2, r.clone()), kind))
        }
    }
}

/// A right-to-left derivation, possibly cut short by fuel.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub start: Term,
    pub steps: Vec<(Term, StepKind)>,
    pub exhausted: bool,
}

impl Derivation {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The last term reached.
    pub fn result(&self) -> &Term {
        self.steps.last().map_or(&self.start, |(t, _)| t)
    }

    pub fn count(&self, kind: StepKind) -> usize {
        self.steps.iter().filter(|(_, k)| *k == kind).count()
    }
}

pub fn evaluate_rtl(names: &mut Names, t: &Term, fuel: u64) -> Derivation {
    let mut steps = Vec::new();
    let mut cur = t.clone();
    let mut exhausted = false;
    while let Some((next, kind)) = rtl_step(names, &cur) {
        if steps.len() as u64 == fuel {
            exhausted = true;
            break;
        }
        steps.push((next.clone(), kind));
        cur = next;
    }
    Derivation {
        start: t.clone(),
        steps,
        exhausted,
    }
}

/// Largest term [`all_one_steps`] accepts.
pub const ONE_STEP_SIZE_CAP: u64 = 64;

/// Every reduct of `t` under weak evaluation contexts `E ::= ⟨·⟩ | tE | Et`,
/// deduplicated up to α.
pub fn all_one_steps(names: &mut Names, t: &Term) -> Result<Vec<(Term, StepKind)>, CalculusError> {
    if t.size() > ONE_STEP_SIZE_CAP {
        return Err(CalculusError::TooLarge {
            size: t.size(),
            cap: ONE_STEP_SIZE_CAP,
        });
    }
    let mut out = Vec::new();
    collect_steps(names, t, &mut |u, k| out.push((u, k)));
    let mut seen = HashSet::new();
    out.retain(|(u, k)| seen.insert((alpha_key(u), *k)));
    Ok(out)
}

fn collect_steps(names: &mut Names, t: &Term, emit: &mut dyn FnMut(Term, StepKind)) {
    let TermKind::App(l, r) = t.kind() else {
        return;
    };
    if let TermKind::Abs(x, body) = l.kind() {
        if r.is_fireball() {
            emit(subst_meta(names, body, x, r), StepKind::of_argument(r));
        }
    }
    collect_steps(names, l, &mut |l2, k| emit(Term::app(l2, r.clone()), k));
    collect_steps(names, r, &mut |r2, k| emit(Term::app(l.clone(), r2), k));
}

/// The shape of the whole →βf reduction graph of a term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationProfile {
    /// `(βλ steps, βi steps)` of every maximal finite derivation.
    pub normalizing: BTreeSet<(u32, u32)>,
    /// Some derivation is infinite.
    pub diverges: bool,
    /// Distinct terms (up to α) reachable.
    pub nodes: usize,
}

impl DerivationProfile {
    /// Either every derivation reaches a normal form with the same counts, or
    /// none does.
    pub fn is_uniform(&self) -> bool {
        if self.diverges {
            self.normalizing.is_empty()
        } else {
            self.normalizing.len() == 1
        }
    }
}

/// Explores every →βf derivation from `t`, up to `node_cap` distinct terms.
pub fn derivation_profile(
    names: &mut Names,
    t: &Term,
    node_cap: usize,
) -> Result<DerivationProfile, CalculusError> {
    enum Mark {
        Open,
        Done(BTreeSet<(u32, u32)>, bool),
    }
    struct Search<'a> {
        names: &'a mut Names,
        marks: HashMap<String, Mark>,
        cap: usize,
    }
    impl Search<'_> {
        fn visit(
            &mut self,
            t: &Term,
            depth: usize,
        ) -> Result<(BTreeSet<(u32, u32)>, bool), CalculusError> {
            let key = alpha_key(t);
            match self.marks.get(&key) {
                Some(Mark::Open) => return Ok((BTreeSet::new(), true)),
                Some(Mark::Done(set, div)) => return Ok((set.clone(), *div)),
                None => {}
            }
            if self.marks.len() >= self.cap || depth >= self.cap.min(2000) {
                return Err(CalculusError::GraphTooLarge { cap: self.cap });
            }
            self.marks.insert(key.clone(), Mark::Open);
            let succ = all_one_steps(self.names, t)?;
            let mut set = BTreeSet::new();
            let mut diverges = false;
            if succ.is_empty() {
                set.insert((0, 0));
            }
            for (u, kind) in succ {
                let (sub, div) = self.visit(&u, depth + 1)?;
                diverges |= div;
                set.extend(sub.into_iter().map(|(l, i)| match kind {
                    StepKind::BetaLambda => (l + 1, i),
                    StepKind::BetaInert => (l, i + 1),
                }));
            }
            self.marks
                .insert(key, Mark::Done(set.clone(), diverges));
            Ok((set, diverges))
        }
    }
    let mut search = Search {
        names,
        marks: HashMap::new(),
        cap: node_cap,
    };
    let (normalizing, diverges) = search.visit(t, 0)?;
    Ok(DerivationProfile {
        normalizing,
        diverges,
        nodes: search.marks.len(),
    })
}

/// Whether `t →βf u` iff `t{x←i} →βf u{x←i}` holds for every one-step
/// reduct, compared as sets up to α.
pub fn check_inert_substitution(
    names: &mut Names,
    t: &Term,
    x: &VarId,
    i: &Term,
) -> Result<bool, CalculusError> {
    if !i.is_inert() {
        return Err(CalculusError::NotInert(i.to_string()));
    }
    let before: BTreeSet<String> = all_one_steps(names, t)?
        .iter()
        .map(|(u, _)| alpha_key(&subst_meta(names, u, x, i)))
        .collect();
    let substituted = subst_meta(names, t, x, i);
    let after: BTreeSet<String> = all_one_steps(names, &substituted)?
        .iter()
        .map(|(u, _)| alpha_key(u))
        .collect();
    Ok(before == after)
}

/// The term families that exhibit size explosion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `t_0 = y`, `t_{n+1} = (λx.x x) t_n`.
    T,
    /// `γ_0 = y`, `γ_{n+1} = γ_n γ_n`, the normal form of `t_n`.
    Gamma,
    /// `u_n = r_n r_n` with `r_n = λx.y x … x` (`n` arguments).
    U,
    /// `s_n I`, which reduces in `n` steps to `r_n`.
    SApplied,
    /// `r_0 = I`, `r_{n+1} = λy.y r_n r_n`.
    R,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::T, Family::Gamma, Family::U, Family::SApplied, Family::R];

    pub fn name(self) -> &'static str {
        match self {
            Family::T => "t",
            Family::Gamma => "gamma",
            Family::U => "u",
            Family::SApplied => "s_applied",
            Family::R => "r",
        }
    }

    pub fn build(self, names: &mut Names, n: u32) -> Term {
        match self {
            Family::T => gen_t(names, n),
            Family::Gamma => gen_gamma(names, n),
            Family::U => gen_u(names, n),
            Family::SApplied => gen_s_applied(names, n),
            Family::R => gen_r(names, n),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Family, String> {
        match s.to_ascii_lowercase().as_str() {
            "t" => Ok(Family::T),
            "gamma" | "g" => Ok(Family::Gamma),
            "u" => Ok(Family::U),
            "s" | "s_applied" | "s-applied" => Ok(Family::SApplied),
            "r" => Ok(Family::R),
            _ => Err(format!("unknown family `{s}` (expected t, gamma, u, s_applied or r)")),
        }
    }
}

fn var(v: &VarId) -> Term {
    Term::var(v.clone())
}

fn identity(names: &mut Names, name: &str) -> Term {
    let x = names.binder(name);
    Term::abs(x.clone(), var(&x))
}

pub fn gen_t(names: &mut Names, n: u32) -> Term {
    let mut t = var(&names.free("y"));
    for _ in 0..n {
        let x = names.binder("x");
        let delta = Term::abs(x.clone(), Term::app(var(&x), var(&x)));
        t = Term::app(delta, t);
    }
    t
}

/// Built with sharing, so it takes linear space even though its size is
/// exponential.
pub fn gen_gamma(names: &mut Names, n: u32) -> Term {
    let mut g = var(&names.free("y"));
    for _ in 0..n {
        g = Term::app(g.clone(), g);
    }
    g
}

fn gen_r_linear(names: &mut Names, n: u32) -> Term {
    let y = names.free("y");
    let x = names.binder("x");
    let body = Term::apply(var(&y), (0..n).map(|_| var(&x)));
    Term::abs(x, body)
}

pub fn gen_u(names: &mut Names, n: u32) -> Term {
    let r = gen_r_linear(names, n);
    let r2 = gen_r_linear(names, n);
    Term::app(r, r2)
}

/// `λx.λy.y x x` for `n = 1`, `λx.s_{n-1} (λy.y x x)` above.
pub fn gen_s(names: &mut Names, n: u32) -> Term {
    assert!(n >= 1, "s_n is defined for n >= 1");
    let yxx = |names: &mut Names, x: &VarId| {
        let y = names.binder("y");
        Term::abs(y.clone(), Term::apply(var(&y), [var(x), var(x)]))
    };
    let x = names.binder("x");
    let mut s = Term::abs(x.clone(), yxx(names, &x));
    for _ in 1..n {
        let x = names.binder("x");
        let arg = yxx(names, &x);
        s = Term::abs(x, Term::app(s, arg));
    }
    s
}

pub fn gen_s_applied(names: &mut Names, n: u32) -> Term {
    let s = gen_s(names, n);
    Term::app(s, identity(names, "z"))
}

/// Built with sharing, like [`gen_gamma`].
pub fn gen_r(names: &mut Names, n: u32) -> Term {
    let mut r = identity(names, "x");
    for _ in 0..n {
        let y = names.binder("y");
        r = Term::abs(y.clone(), Term::apply(var(&y), [r.clone(), r]));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{alpha_eq, parse, print};

    fn p(n: &mut Names, s: &str) -> Term {
        parse(n, s).unwrap()
    }

    #[test]
    fn running_example_steps() {
        let mut n = Names::new();
        let t = p(&mut n, "(\\z.z (y z)) \\x.x");
        let (u, k) = rtl_step(&mut n, &t).unwrap();
        assert_eq!(k, StepKind::BetaLambda);
        assert!(alpha_eq(&u, &p(&mut n, "(\\x.x) (y \\x.x)")));
        let v = p(&mut n, "y \\x.x");
        assert!(rtl_step(&mut n, &v).is_none());
    }

    #[test]
    fn inert_step() {
        let mut n = Names::new();
        let t = p(&mut n, "(\\x.x x) y");
        let (u, k) = rtl_step(&mut n, &t).unwrap();
        assert_eq!(k, StepKind::BetaInert);
        assert_eq!(print(&u), "y y");
    }

    #[test]
    fn right_argument_first() {
        let mut n = Names::new();
        let t = p(&mut n, "((\\a.a) b) ((\\c.c) d)");
        let (u, _) = rtl_step(&mut n, &t).unwrap();
        assert_eq!(print(&u), "(\\a.a) b d");
    }

    #[test]
    fn evaluation_with_fuel() {
        let mut n = Names::new();
        let t = p(&mut n, "(\\z.z (y z)) \\x.x");
        let d = evaluate_rtl(&mut n, &t, 100);
        assert_eq!(d.len(), 2);
        assert!(!d.exhausted);
        // the second redex, (λx.x) (y λx.x), has an inert argument
        assert_eq!(d.count(StepKind::BetaLambda), 1);
        assert_eq!(d.count(StepKind::BetaInert), 1);
        assert_eq!(print(d.result()), "y \\x.x");

        let omega = p(&mut n, "(\\x.x x) \\x.x x");
        let d = evaluate_rtl(&mut n, &omega, 50);
        assert!(d.exhausted);
        assert_eq!(d.len(), 50);

        let t3 = gen_t(&mut n, 3);
        let d = evaluate_rtl(&mut n, &t3, 100);
        assert_eq!(d.len(), 3);
        assert_eq!(d.count(StepKind::BetaInert), 3);
        assert!(alpha_eq(d.result(), &gen_gamma(&mut n, 3)));
    }

    #[test]
    fn one_step_enumeration() {
        let mut n = Names::new();
        let t = p(&mut n, "((\\x.x) y) ((\\x.x) y)");
        assert_eq!(all_one_steps(&mut n, &t).unwrap().len(), 2);
        let t = p(&mut n, "\\x.(\\y.y) x");
        assert!(all_one_steps(&mut n, &t).unwrap().is_empty());
        let t = p(&mut n, "(\\z.z (y z)) \\x.x");
        let all = all_one_steps(&mut n, &t).unwrap();
        let (u, k) = rtl_step(&mut n, &t).unwrap();
        assert_eq!(all.len(), 1);
        assert!(alpha_eq(&all[0].0, &u));
        assert_eq!(all[0].1, k);
        let big = gen_u(&mut n, 40);
        assert!(matches!(all_one_steps(&mut n, &big), Err(CalculusError::TooLarge { .. })));
    }

    #[test]
    fn profiles() {
        let mut n = Names::new();
        let t = p(&mut n, "((\\x.x) y) ((\\x.x) y)");
        let prof = derivation_profile(&mut n, &t, 1000).unwrap();
        assert!(prof.is_uniform());
        assert_eq!(prof.normalizing, BTreeSet::from([(0, 2)]));
        let omega = p(&mut n, "(\\x.x x) \\x.x x");
        let prof = derivation_profile(&mut n, &omega, 1000).unwrap();
        assert!(prof.diverges && prof.is_uniform());
    }

    #[test]
    fn inert_substitution() {
        let mut n = Names::new();
        let x = n.free("x");
        let t = p(&mut n, "(\\z.z) x");
        let i = p(&mut n, "y y");
        assert!(check_inert_substitution(&mut n, &t, &x, &i).unwrap());
        let t = p(&mut n, "x y");
        let i = p(&mut n, "y z");
        assert!(check_inert_substitution(&mut n, &t, &x, &i).unwrap());
        let id = p(&mut n, "\\z.z");
        assert!(matches!(
            check_inert_substitution(&mut n, &t, &x, &id),
            Err(CalculusError::NotInert(_))
        ));
    }

    #[test]
    fn families() {
        let mut n = Names::new();
        assert_eq!(print(&gen_t(&mut n, 1)), "(\\x.x x) y");
        assert_eq!(print(&gen_gamma(&mut n, 2)), "y y (y y)");
        assert_eq!(print(&gen_u(&mut n, 1)), "(\\x.y x) \\x.y x");
        assert_eq!(print(&gen_u(&mut n, 3)), "(\\x.y x x x) \\x.y x x x");
        assert_eq!(print(&gen_s_applied(&mut n, 1)), "(\\x.\\y.y x x) \\z.z");
        assert_eq!(
            print(&gen_s_applied(&mut n, 2)),
            "(\\x.(\\x'.\\y.y x' x') \\y.y x x) \\z.z"
        );
        assert_eq!(print(&gen_r(&mut n, 1)), "\\y.y (\\x.x) \\x.x");
        for k in 1..=10 {
            assert!(gen_gamma(&mut n, k).size() >= 1 << k);
            assert!(gen_r(&mut n, k).size() >= 1 << k);
        }
    }

    #[test]
    fn family_names_parse() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("w".parse::<Family>().is_err());
    }
}
