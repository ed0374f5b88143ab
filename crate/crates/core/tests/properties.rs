use std::collections::HashSet;

use fireball::calculus::{all_one_steps, rtl_step};
use fireball::corpus::TermGen;
use fireball::machine::{compile, decode_item, decode_state, Env, Item, Machine, MachineKind};
use fireball::naive::code_of_item;
use fireball::terms::{alpha_eq, fresh_rename, is_well_named, parse, print, subst_meta, Names, Term, VarId};
use proptest::prelude::*;

fn random_term(names: &mut Names, seed: u64, max_size: u64) -> Term {
    TermGen::new(names, seed, &["a", "b", "c"]).term(names, max_size)
}

fn seeds(max_size: u64) -> impl Strategy<Value = (u64, u64)> {
    (any::<u64>(), 1..=max_size)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_is_alpha_identity((seed, max) in seeds(50)) {
        let mut names = Names::new();
        let t = random_term(&mut names, seed, max);
        let text = print(&t);
        let back = parse(&mut names, &text).unwrap();
        prop_assert!(alpha_eq(&t, &back), "{text} reparsed as {back}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn substitution_never_captures((seed, max) in seeds(30), (useed, umax) in seeds(12)) {
        let mut names = Names::new();
        let t = random_term(&mut names, seed, max);
        let u = random_term(&mut names, useed, umax);
        let x = names.free("a");
        let r = subst_meta(&mut names, &t, &x, &u);
        let mut expected: HashSet<VarId> = t.free_vars();
        let occurs = expected.remove(&x);
        if occurs {
            expected.extend(u.free_vars());
        }
        prop_assert_eq!(r.free_vars(), expected);
        if !occurs {
            prop_assert!(alpha_eq(&r, &t));
        }
    }

    #[test]
    fn fresh_renaming_is_well_named_and_alpha_equal((seed, max) in seeds(40)) {
        let mut names = Names::new();
        let t = random_term(&mut names, seed, max);
        let c = fresh_rename(&mut names, &t);
        prop_assert!(is_well_named(c.term()));
        prop_assert!(alpha_eq(c.term(), &t));
    }

    #[test]
    fn rtl_is_stuck_exactly_on_fireballs((seed, max) in seeds(30)) {
        let mut names = Names::new();
        let t = random_term(&mut names, seed, max);
        prop_assert_eq!(rtl_step(&mut names, &t).is_none(), t.is_fireball());
    }

    #[test]
    fn rtl_step_is_a_calculus_step((seed, max) in seeds(20)) {
        let mut names = Names::new();
        let t = random_term(&mut names, seed, max);
        if let Some((u, kind)) = rtl_step(&mut names, &t) {
            let all = all_one_steps(&mut names, &t).unwrap();
            prop_assert!(all.iter().any(|(v, k)| *k == kind && alpha_eq(v, &u)));
        } else {
            prop_assert!(all_one_steps(&mut names, &t).unwrap().is_empty());
        }
    }

    #[test]
    fn env_lookup_agrees_with_a_linear_scan(ops in prop::collection::vec((0usize..8, any::<bool>()), 0..40)) {
        let mut names = Names::new();
        let vars: Vec<VarId> = (0..8).map(|i| names.binder(&format!("v{i}"))).collect();
        let y = names.free("y");
        let id = parse(&mut names, "\\z.z").unwrap();
        let id = fresh_rename(&mut names, &id);
        let mut env = Env::new();
        let mut model: Vec<(VarId, bool)> = Vec::new();
        for (i, abs) in ops {
            let item = if abs { Item::Abs(id.clone()) } else { Item::var(y.clone()) };
            let fresh = !model.iter().any(|(v, _)| *v == vars[i]);
            prop_assert_eq!(env.bind(vars[i].clone(), item), fresh);
            if fresh {
                model.push((vars[i].clone(), abs));
            }
        }
        prop_assert_eq!(env.len(), model.len());
        for v in &vars {
            let scanned = env.iter().find(|(w, _)| *w == v).map(|(_, i)| matches!(i, Item::Abs(_)));
            let expected = model.iter().find(|(w, _)| w == v).map(|(_, a)| *a);
            prop_assert_eq!(env.lookup(v).map(|i| matches!(i, Item::Abs(_))), expected);
            prop_assert_eq!(scanned, expected);
        }
    }

    #[test]
    fn compilation_decodes_to_the_input((seed, max) in seeds(40)) {
        let mut names = Names::new();
        let t = random_term(&mut names, seed, max);
        let s = compile(&mut names, &t);
        prop_assert!(alpha_eq(&decode_state(&s, 1 << 16).unwrap(), &t));
    }

    #[test]
    fn read_back_agrees_with_decoding((seed, max) in seeds(25)) {
        let mut names = Names::new();
        let t = random_term(&mut names, seed, max);
        let mut m = Machine::new(MachineKind::Easy, Names::new(), &t);
        let mut scratch = Names::new();
        for _ in 0..200 {
            for item in m.state().stack.iter() {
                let code = code_of_item(&mut scratch, item);
                prop_assert!(is_well_named(code.term()));
                prop_assert!(alpha_eq(code.term(), &decode_item(item)));
            }
            if m.step().is_none() {
                break;
            }
        }
    }
}
