use std::ops::ControlFlow;

use super::{ClosureSet, Shape};
use crate::bitset::BitSet;
use crate::syntax::Dir;

/// Hintikka subset of a closure set, as a bitset over closure indices.
pub type Atom = BitSet;

/// Checks the local atom conditions: no `⊥`, disjunctions decided by their
/// disjuncts, exactly one of `φ` and `∼φ`, and `♯χθ⃗` together with its
/// unfolding.
pub fn is_atom(a: &BitSet, sigma: &ClosureSet) -> bool {
    if a.capacity() != sigma.len() {
        return false;
    }
    for i in 0..sigma.len() {
        let has = a.contains(i);
        if has == a.contains(sigma.complement(i)) {
            return false;
        }
        match sigma.shape(i) {
            Shape::Bottom if has => return false,
            Shape::Or(l, r) if has != (a.contains(l) || a.contains(r)) => return false,
            Shape::Sharp { unfold, .. } if has != a.contains(unfold) => return false,
            _ => {}
        }
    }
    true
}

/// Calls `f` on every atom over `sigma` in lexicographic order.
///
/// Closure members are ordered so that subformulas come first; the search
/// branches only on variables, diamonds and fixpoint formulas and derives the
/// rest. A fixpoint formula and its unfolding are forced equal as soon as the
/// later of the two is reached.
pub fn for_each_atom<F>(sigma: &ClosureSet, mut f: F)
where
    F: FnMut(&Atom) -> ControlFlow<()>,
{
    let n = sigma.len();
    // links[i]: earlier indices whose value must equal index i
    let links = sharp_links(sigma);
    let mut cur = BitSet::new(n);
    let _ = search(sigma, &links, None, 0, &mut cur, &mut f);
}

fn sharp_links(sigma: &ClosureSet) -> Vec<Vec<usize>> {
    let n = sigma.len();
    let mut links: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        if let Shape::Sharp { unfold, .. } = sigma.shape(i) {
            let (lo, hi) = if unfold < i { (unfold, i) } else { (i, unfold) };
            if lo != hi {
                links[hi].push(lo);
            }
        }
    }
    links
}

/// Calls `f` on every atom containing all of `must` and none of `forbid`,
/// in lexicographic order.
pub fn for_each_atom_within<F>(sigma: &ClosureSet, must: &BitSet, forbid: &BitSet, mut f: F)
where
    F: FnMut(&Atom) -> ControlFlow<()>,
{
    let links = sharp_links(sigma);
    let mut cur = BitSet::new(sigma.len());
    let _ = search(sigma, &links, Some((must, forbid)), 0, &mut cur, &mut f);
}

/// Least atom (in lexicographic order) containing every member of `must`
/// and no member of `forbid`.
pub fn least_atom(sigma: &ClosureSet, must: &BitSet, forbid: &BitSet) -> Option<Atom> {
    let mut found = None;
    for_each_atom_within(sigma, must, forbid, |a| {
        found = Some(a.clone());
        ControlFlow::Break(())
    });
    found
}

fn search<F>(
    sigma: &ClosureSet,
    links: &[Vec<usize>],
    cons: Option<(&BitSet, &BitSet)>,
    i: usize,
    cur: &mut BitSet,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&Atom) -> ControlFlow<()>,
{
    if i == sigma.len() {
        return f(cur);
    }
    let forced = links[i].first().map(|&j| cur.contains(j));
    if links[i].iter().any(|&j| Some(cur.contains(j)) != forced) {
        return ControlFlow::Continue(());
    }
    let derived = match sigma.shape(i) {
        Shape::Bottom => Some(false),
        Shape::Neg(a) => Some(!cur.contains(a)),
        Shape::Or(a, b) => Some(cur.contains(a) || cur.contains(b)),
        Shape::Var | Shape::Dia(..) | Shape::Sharp { .. } => None,
    };
    let choices: &[bool] = match (derived, forced) {
        (Some(d), Some(fv)) if d != fv => return ControlFlow::Continue(()),
        (Some(d), _) | (None, Some(d)) => {
            if d {
                &[true]
            } else {
                &[false]
            }
        }
        (None, None) => &[false, true],
    };
    for &v in choices {
        if let Some((must, forbid)) = cons {
            if (must.contains(i) && !v) || (forbid.contains(i) && v) {
                continue;
            }
        }
        cur.set(i, v);
        search(sigma, links, cons, i + 1, cur, f)?;
    }
    cur.remove(i);
    ControlFlow::Continue(())
}

/// All atoms over `sigma`, in lexicographic order.
pub fn atoms(sigma: &ClosureSet) -> Vec<Atom> {
    let mut out = Vec::new();
    for_each_atom(sigma, |a| {
        out.push(a.clone());
        ControlFlow::Continue(())
    });
    out
}

/// Whether an edge from an `a`-labelled node to a `b`-labelled node respects
/// both boxes: every `◇Fψ ∈ Σ` with `ψ ∈ b` is in `a`, and every `◇Bψ ∈ Σ`
/// with `ψ ∈ a` is in `b`. Over atoms this is the same as `□Fφ ∈ a ⇒ φ ∈ b`
/// and `□Bφ ∈ b ⇒ φ ∈ a`.
pub fn coherent(a: &Atom, b: &Atom, sigma: &ClosureSet) -> bool {
    sigma.diamonds(Dir::F).all(|(d, psi)| !b.contains(psi) || a.contains(d))
        && sigma.diamonds(Dir::B).all(|(d, psi)| !a.contains(psi) || b.contains(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::fl_closure;
    use crate::syntax::{parse, ConnectiveTable, Formula};

    #[test]
    fn variable_atoms() {
        let t = ConnectiveTable::new();
        let s = fl_closure(&parse("p", &t).unwrap());
        let p = s.index_of(&Formula::var("p")).unwrap();
        let np = s.index_of(&parse("~p", &t).unwrap()).unwrap();
        let all = atoms(&s);
        // p, <F>T, <B>T free
        assert_eq!(all.len(), 8);
        for a in &all {
            assert!(a.contains(p) != a.contains(np));
            assert!(!a.contains(s.index_of(&Formula::Bottom).unwrap()));
            assert!(is_atom(a, &s));
        }
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(!is_atom(&BitSet::new(s.len()), &s));
        assert!(!is_atom(&BitSet::from_indices(s.len(), [p]), &s));
        assert!(!is_atom(&BitSet::from_indices(s.len(), [p, np]), &s));
    }

    #[test]
    fn box_bottom_blocks_successors() {
        let t = ConnectiveTable::new();
        let s = fl_closure(&parse("<F>p", &t).unwrap());
        let bb = s.box_bottom(Dir::F);
        let all = atoms(&s);
        for a in all.iter().filter(|a| a.contains(bb)) {
            assert!(all.iter().all(|b| !coherent(a, b, &s)));
        }
    }

    #[test]
    fn fixpoint_members_follow_unfolding() {
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        let s = fl_closure(&parse("#r(p)", &t).unwrap());
        let h = s.index_of(&parse("#r(p)", &t).unwrap()).unwrap();
        let u = s.index_of(&parse("p | <F>#r(p)", &t).unwrap()).unwrap();
        for a in atoms(&s) {
            assert_eq!(a.contains(h), a.contains(u));
        }
    }

    #[test]
    fn least_atom_matches_filter() {
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        let s = fl_closure(&parse("#r(p) & <B>~p", &t).unwrap());
        let all = atoms(&s);
        let n = s.len();
        for (m, f) in [(vec![0usize], vec![]), (vec![3, 5], vec![1]), (vec![2], vec![4, 6])] {
            let must = BitSet::from_indices(n, m);
            let forbid = BitSet::from_indices(n, f);
            let expect = all
                .iter()
                .find(|a| must.is_subset(a) && !a.intersects(&forbid))
                .cloned();
            assert_eq!(least_atom(&s, &must, &forbid), expect);
        }
    }
}
