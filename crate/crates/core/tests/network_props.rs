use std::collections::BTreeSet;

use proptest::prelude::*;

use flatmu::bitset::BitSet;
use flatmu::closure::{atoms, least_atom, Atom};
use flatmu::network::{amalgamate, compute_timeouts, union, Context, Network, NodeId};
use flatmu::oracle;
use flatmu::syntax::{parse, ConnectiveTable, Dir};

fn context() -> Context {
    let mut t = ConnectiveTable::new();
    t.define("r", 1, "q1 | <F>x").unwrap();
    t.define("c1", 1, "[F]x | q1").unwrap();
    t.define("rb", 1, "q1 | <B>x").unwrap();
    Context::new(&parse("#r(p) | #c1(q) | #rb(~p)", &t).unwrap()).unwrap()
}

/// Shape of a random network: for node `i > 0` a parent among `0..i` and an
/// edge direction, plus saturation marks and label choices. The underlying
/// undirected graph is a forest, so the result is anticonfluent.
#[derive(Clone, Debug)]
struct Shape {
    parents: Vec<(u32, bool)>,
    sat: Vec<(bool, bool)>,
    labels: Vec<usize>,
    extra: Vec<(u32, u32)>,
}

fn shape(max: usize) -> impl Strategy<Value = Shape> {
    (1..=max).prop_flat_map(|n| {
        (
            prop::collection::vec((any::<u32>(), any::<bool>()), n),
            prop::collection::vec((any::<bool>(), any::<bool>()), n),
            prop::collection::vec(any::<usize>(), n),
            prop::collection::vec((any::<u32>(), any::<u32>()), 0..3),
        )
            .prop_map(|(parents, sat, labels, extra)| Shape {
                parents,
                sat,
                labels,
                extra,
            })
    })
}

impl Shape {
    fn forest(&self, labels: &[Atom]) -> Network {
        let n = self.sat.len();
        let mut net = Network::new();
        for i in 0..n {
            net.add_node(i, labels[self.labels[i] % labels.len()].clone());
        }
        for i in 1..n {
            let (p, down) = self.parents[i];
            let p = p as usize % i;
            if down {
                net.add_edge(p, i);
            } else {
                net.add_edge(i, p);
            }
        }
        for (i, &(f, b)) in self.sat.iter().enumerate() {
            if f {
                net.mark_saturated(Dir::F, i);
            }
            if b {
                net.mark_saturated(Dir::B, i);
            }
        }
        net
    }

    /// The forest plus arbitrary extra edges, possibly cyclic or confluent.
    fn graph(&self, labels: &[Atom]) -> Network {
        let mut net = self.forest(labels);
        let n = self.sat.len() as u32;
        for &(a, b) in &self.extra {
            net.add_edge((a % n) as usize, (b % n) as usize);
        }
        net
    }
}

fn plain_labels() -> Vec<Atom> {
    (0..4)
        .map(|i| BitSet::from_indices(2, (0..2).filter(|b| i >> b & 1 == 1)))
        .collect()
}

fn subset(net: &Network, mask: u32) -> BTreeSet<NodeId> {
    net.nodes().filter(|&u| mask >> (u % 32) & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn anticonfluence_matches_path_counting(s in shape(9)) {
        let labels = plain_labels();
        let forest = s.forest(&labels);
        prop_assert!(forest.is_anticonfluent());
        prop_assert!(oracle::naive_is_anticonfluent(&forest));
        let g = s.graph(&labels);
        prop_assert_eq!(g.is_anticonfluent(), oracle::naive_is_anticonfluent(&g));
    }

    #[test]
    fn generation_and_restriction_match(s in shape(10), mask in any::<u32>()) {
        let net = s.forest(&plain_labels());
        let x = subset(&net, mask);
        prop_assert_eq!(net.upgen(x.iter().copied()), oracle::naive_generated(&net, &x, Dir::F));
        prop_assert_eq!(net.downgen(x.iter().copied()), oracle::naive_generated(&net, &x, Dir::B));
        prop_assert_eq!(net.restrict(&x), oracle::naive_restrict(&net, &x));
        let r = net.restrict(&x);
        prop_assert!(r.is_anticonfluent());
    }

    #[test]
    fn union_matches(s in shape(10), a in any::<u32>(), b in any::<u32>()) {
        let net = s.forest(&plain_labels());
        let parts = [net.restrict(&subset(&net, a)), net.restrict(&subset(&net, b))];
        prop_assert_eq!(union(&parts).ok(), oracle::naive_union(&parts));
        let all = [net.restrict(&subset(&net, a)), net.clone()];
        prop_assert_eq!(union(&all).unwrap(), net);
    }

    #[test]
    fn timeouts_match_the_clauses(s in shape(7)) {
        let ctx = context();
        let net = s.forest(&atoms(&ctx.sigma));
        let cap = (net.len() * ctx.table.len() + 1) as u32;
        for ((u, d), k) in compute_timeouts(&net, &ctx).iter() {
            prop_assert_eq!(k, oracle::naive_timeout(&net, &ctx, u, d, cap), "deferral {} at {}", d, u);
        }
    }

    #[test]
    fn extensions_keep_finished_deferrals(s in shape(7), grow in prop::collection::vec((any::<u32>(), any::<usize>(), any::<bool>()), 0..5)) {
        let ctx = context();
        let all = atoms(&ctx.sigma);
        let net = s.forest(&all);
        let mut ext = net.clone();
        let mut fresh = 100;
        for (at, label, mark) in grow {
            let u = at as usize % net.len();
            if !ext.is_saturated(Dir::F, u) {
                ext.add_node(fresh, all[label % all.len()].clone());
                ext.add_edge(u, fresh);
                fresh += 1;
            }
            if mark {
                ext.mark_saturated(Dir::F, u);
            }
        }
        prop_assert!(oracle::naive_is_subnetwork(&net, &ext));
        let after = compute_timeouts(&ext, &ctx);
        for ((u, d), k) in compute_timeouts(&net, &ctx).iter() {
            let Some(k) = k else { continue };
            prop_assert!(oracle::naive_finished_in(&ext, &ctx, u, d, k));
            prop_assert!(after.finished(u, d).is_some_and(|k2| k2 <= k));
        }
    }

    #[test]
    fn amalgamation_postconditions(s in shape(8), hang in prop::collection::vec((any::<u32>(), any::<usize>()), 0..4), forward in any::<bool>()) {
        let dir = if forward { Dir::F } else { Dir::B };
        let labels = plain_labels();
        let base = s.forest(&labels);
        let mut attach: Vec<(NodeId, BTreeSet<NodeId>)> = Vec::new();
        for u in base.nodes() {
            let g = oracle::naive_generated(&base, &[u].into(), dir);
            if attach.len() < 2 && attach.iter().all(|(_, h)| h.is_disjoint(&g)) {
                attach.push((u, g));
            }
        }
        let mut fresh = 100;
        let mut pairs = Vec::new();
        for (u, g) in &attach {
            let mut ext = base.clone();
            for &(at, label) in &hang {
                let g: Vec<NodeId> = g.iter().copied().filter(|&w| !base.is_saturated(dir, w)).collect();
                if g.is_empty() {
                    break;
                }
                let w = g[at as usize % g.len()];
                ext.add_node(fresh, labels[label % labels.len()].clone());
                match dir {
                    Dir::F => ext.add_edge(w, fresh),
                    Dir::B => ext.add_edge(fresh, w),
                }
                fresh += 1;
            }
            pairs.push((*u, ext));
        }
        let out = amalgamate(&base, &pairs, dir).unwrap();
        prop_assert!(oracle::naive_is_anticonfluent(&out));
        for (_, m) in &pairs {
            prop_assert!(oracle::naive_is_subnetwork(m, &out));
        }
        let us: BTreeSet<NodeId> = attach.iter().map(|(u, _)| *u).collect();
        prop_assert!(oracle::naive_same_outside(&base, &out, &us, dir));
    }
}

/// A least timeout can drop in an extension: saturating an unsaturated
/// neighbour opens a shorter way through the nested cover. The triple stays
/// finished in the old number of steps.
#[test]
fn least_timeout_can_drop() {
    let mut t = ConnectiveTable::new();
    t.define("k", 1, "q1 | <F>x | <F><F>x").unwrap();
    let ctx = Context::new(&parse("#k(p)", &t).unwrap()).unwrap();
    let sigma = &ctx.sigma;
    let host = &ctx.table.hosts[0];
    let idx = |s: &str| sigma.index_of(&parse(s, &t).unwrap()).unwrap();
    let n = sigma.len();
    let far = least_atom(
        sigma,
        &BitSet::from_indices(n, [idx("#k(p)"), idx("<F>#k(p)"), idx("<F><F>#k(p)"), idx("~p")]),
        &BitSet::from_indices(n, [host.bottom]),
    )
    .unwrap();
    let near = least_atom(
        sigma,
        &BitSet::from_indices(n, [idx("#k(p)"), idx("p")]),
        &BitSet::new(n),
    )
    .unwrap();

    // 0 -> 1 -> 2 -> 3 with p only at 3; 4 is a leaf below 0, not yet in S_F
    let mut net = Network::new();
    for u in 0..5 {
        net.add_node(u, if u == 3 { near.clone() } else { far.clone() });
    }
    for (u, v) in [(0, 1), (1, 2), (2, 3), (0, 4)] {
        net.add_edge(u, v);
    }
    for u in 0..4 {
        net.mark_saturated(Dir::F, u);
    }
    let mut ext = net.clone();
    ext.add_node(5, near);
    ext.add_edge(4, 5);
    ext.mark_saturated(Dir::F, 4);
    ext.mark_saturated(Dir::F, 5);
    assert!(oracle::naive_is_subnetwork(&net, &ext));

    let root = host.deferral_of[host.tree.root()].unwrap();
    let before = compute_timeouts(&net, &ctx).finished(0, root);
    let after = compute_timeouts(&ext, &ctx).finished(0, root);
    assert_eq!(before, Some(1));
    assert_eq!(after, Some(0));
    assert!(oracle::naive_finished_in(&ext, &ctx, 0, root, 1));
}
