use proptest::prelude::*;

use flatmu::construct::{build, repair_all, root_atoms, truth_failures, Budget, Verdict};
use flatmu::network::{compute_timeouts, find_defects, is_subnetwork, Context, Network, NetworkDoc, NodeId};
use flatmu::syntax::{parse, ConnectiveTable, Dir, Formula};

fn table() -> ConnectiveTable {
    let mut t = ConnectiveTable::new();
    t.define("r", 1, "q1 | <F>x").unwrap();
    t.define("rb", 1, "q1 | <B>x").unwrap();
    t.define("c1", 1, "[F]x | q1").unwrap();
    t
}

fn check_report(ctx: &Context, a: &flatmu::closure::Atom, budget: Budget) -> Verdict {
    let report = build(ctx, a, budget);
    let net = &report.net;
    assert!(net.len() <= budget.max_nodes.max(1) + 64, "far over the node budget");
    assert!(net.is_anticonfluent());
    assert_eq!(net.validate(ctx), vec![]);
    assert_eq!(net.label(0), a);
    let (members, everywhere) = report.verdict.checked_members(ctx);
    let at: Vec<NodeId> = if everywhere { net.nodes().collect() } else { vec![0] };
    assert_eq!(truth_failures(net, ctx, &at, &members), vec![], "{}", report.to_json());
    report.verdict
}

#[test]
fn one_repair_round_clears_the_input_nodes() {
    let t = table();
    for text in ["#r(p) & ~p", "#rb(q) & <F>T", "#c1(p) & <B>p", "<F><B>p & [F]q"] {
        let phi = parse(text, &t).unwrap();
        let ctx = Context::new(&phi).unwrap();
        for a in root_atoms(&ctx, &phi, 4) {
            let net = Network::singleton(0, a);
            let Ok(out) = repair_all(&ctx, &net, Budget::unlimited()) else {
                continue;
            };
            assert!(is_subnetwork(&net, &out), "{text}");
            assert!(out.is_anticonfluent());
            assert_eq!(out.validate(&ctx), vec![]);
            assert!(out.is_saturated(Dir::F, 0) && out.is_saturated(Dir::B, 0));
            let timeouts = compute_timeouts(&out, &ctx);
            assert_eq!(timeouts.unfinished().filter(|&(u, _)| u == 0).count(), 0, "{text}");
        }
    }
}

#[test]
fn verdicts_are_backed_by_truth() {
    let t = table();
    let budget = Budget {
        max_nodes: 120,
        ..Budget::default()
    };
    for text in ["#r(p) & p", "#r(p) & ~p", "#c1(p)", "#rb(q) & ~q", "<F>p & <B>~p"] {
        let phi = parse(text, &t).unwrap();
        let ctx = Context::new(&phi).unwrap();
        for a in root_atoms(&ctx, &phi, 6) {
            check_report(&ctx, &a, budget);
        }
    }
}

#[test]
fn reports_round_trip_through_json() {
    let t = table();
    let phi = parse("#r(p) & ~p & <B>q", &t).unwrap();
    let ctx = Context::new(&phi).unwrap();
    let a = root_atoms(&ctx, &phi, 1).pop().unwrap();
    let budget = Budget {
        max_nodes: 80,
        ..Budget::default()
    };
    let report = build(&ctx, &a, budget);
    assert_eq!(report.to_json(), build(&ctx, &a, budget).to_json());
    let doc = NetworkDoc::from_json(&report.network.to_json()).unwrap();
    let (ctx2, net) = doc.load().unwrap();
    assert_eq!(net, report.net);
    assert_eq!(ctx2.sigma.formulas(), ctx.sigma.formulas());
    assert_eq!(find_defects(&net, &ctx2).len(), report.residual.len());
}

fn sharp_free() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just(Formula::var("p")), Just(Formula::var("q"))];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            inner.clone().prop_map(|a| Formula::dia(Dir::F, a)),
            inner.clone().prop_map(|a| Formula::dia(Dir::B, a)),
            inner.prop_map(|a| Formula::boxed(Dir::F, a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sharp_free_builds_are_truthful(f in sharp_free()) {
        let ctx = Context::new(&f).unwrap();
        let budget = Budget { max_nodes: 150, ..Budget::default() };
        for a in root_atoms(&ctx, &f, 2) {
            check_report(&ctx, &a, budget);
        }
    }
}
