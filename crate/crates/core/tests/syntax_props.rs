use std::sync::Arc;

use proptest::prelude::*;

use flatmu::bitset::BitSet;
use flatmu::closure::{coherent, is_atom};
use flatmu::network::Context;
use flatmu::oracle::naive_eval;
use flatmu::semantics::{eval, eval_mask, for_each_model, valid_in, KripkeModel};
use flatmu::syntax::{guardify, parse, ConnectiveTable, Dir, FixpointConnective, Formula};

fn table() -> ConnectiveTable {
    let mut t = ConnectiveTable::new();
    t.define("r", 1, "q1 | <F>x").unwrap();
    t.define("c2", 1, "[B]x | q1").unwrap();
    t.define("u", 2, "q2 | (q1 & <F>x)").unwrap();
    t
}

fn conn(t: &ConnectiveTable, name: &str) -> Arc<FixpointConnective> {
    t.get(name).unwrap().clone()
}

fn formula() -> impl Strategy<Value = Formula> {
    let t = table();
    let (r, c2, u) = (conn(&t, "r"), conn(&t, "c2"), conn(&t, "u"));
    let leaf = prop_oneof![
        Just(Formula::var("p")),
        Just(Formula::var("q")),
        Just(Formula::Bottom),
        Just(Formula::top()),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let (r, c2, u) = (r.clone(), c2.clone(), u.clone());
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            inner.clone().prop_map(|a| Formula::dia(Dir::F, a)),
            inner.clone().prop_map(|a| Formula::dia(Dir::B, a)),
            inner.clone().prop_map(|a| Formula::boxed(Dir::F, a)),
            inner.clone().prop_map(move |a| Formula::sharp(r.clone(), vec![a])),
            inner.clone().prop_map(move |a| Formula::sharp(c2.clone(), vec![a])),
            (inner.clone(), inner).prop_map(move |(a, b)| Formula::sharp(u.clone(), vec![a, b])),
        ]
    })
}

fn model() -> impl Strategy<Value = KripkeModel> {
    (1usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n * n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(e, p, q)| {
                let edges = (0..n * n).filter(|&i| e[i]).map(|i| (i / n, i % n));
                let val = |v: &[bool]| (0..n).filter(|&i| v[i]).collect::<Vec<_>>();
                KripkeModel::new(n, edges, [("p".to_string(), val(&p)), ("q".to_string(), val(&q))]).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printing_round_trips(f in formula()) {
        let t = table();
        let back = parse(&f.to_string(), &t).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn kleene_matches_prefixpoint_intersection(f in formula(), m in model()) {
        prop_assert_eq!(eval_mask(&f, &m) as u32, naive_eval(&f, &m));
    }

    #[test]
    fn nabla_laws(f in formula(), g in formula(), m in model()) {
        for dir in [Dir::F, Dir::B] {
            let dia = Formula::dia(dir, f.clone());
            prop_assert_eq!(eval(&dia, &m), eval(&Formula::nabla(dir, vec![f.clone(), Formula::top()]), &m));
            let bx = Formula::boxed(dir, f.clone());
            let cover = Formula::or(Formula::nabla(dir, vec![]), Formula::nabla(dir, vec![f.clone()]));
            prop_assert_eq!(eval(&bx, &m), eval(&cover, &m));
            // order and repetition of the parts do not matter
            let ab = Formula::nabla(dir, vec![f.clone(), g.clone()]);
            let ba = Formula::nabla(dir, vec![g.clone(), f.clone(), g.clone()]);
            prop_assert_eq!(eval(&ab, &m), eval(&ba, &m));
        }
    }

    #[test]
    fn true_sets_are_atoms(f in formula(), m in model()) {
        let ctx = Context::new(&f).unwrap();
        let sets: Vec<BitSet> = {
            let truth: Vec<BitSet> = ctx.sigma.formulas().iter().map(|g| eval(g, &m)).collect();
            (0..m.states())
                .map(|s| BitSet::from_indices(ctx.sigma.len(), (0..ctx.sigma.len()).filter(|&i| truth[i].contains(s))))
                .collect()
        };
        for a in &sets {
            prop_assert!(is_atom(a, &ctx.sigma));
        }
        for (s, t) in m.edges() {
            prop_assert!(coherent(&sets[s], &sets[t], &ctx.sigma));
        }
    }
}

fn body() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::var("x")),
        Just(Formula::var("q1")),
        Just(Formula::neg(Formula::var("q1"))),
    ];
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            inner.clone().prop_map(|a| Formula::and(Formula::var("q1"), a)),
            inner.clone().prop_map(|a| Formula::dia(Dir::F, a)),
            inner.prop_map(|a| Formula::boxed(Dir::F, a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn guardification_is_sound(b in body()) {
        let Ok(chi) = FixpointConnective::new("g", 1, b) else { return Ok(()) };
        prop_assume!(chi.class().is_disjunctive());
        let res = guardify(&chi).unwrap();
        prop_assert!(res.gamma2.is_guarded());
        prop_assert!(res.gamma2.class().is_disjunctive());
        let mut bad = None;
        for_each_model(2, &["q1", "x"], |m| {
            if !valid_in(&res.equivalence, m) {
                bad = Some(m.to_json());
            }
            bad.is_none()
        });
        prop_assert!(bad.is_none(), "{} fails on {:?}", res.equivalence, bad);
    }
}
