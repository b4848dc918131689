use std::collections::BTreeSet;

use super::{
    eqdown_set, equp_set, is_down_cofinal, is_subnetwork, is_up_cofinal, union, Network, NetworkError, NodeId,
};
use crate::syntax::Dir;

fn pre(bullet: usize, detail: String) -> NetworkError {
    NetworkError::Precondition { bullet, detail }
}

/// Joins extensions `N_i` of `n`, each changing `n` only above (for `F`) or
/// below (for `B`) its attachment node `u_i`.
///
/// Forward preconditions, numbered as reported: (0) all networks are
/// anticonfluent, (1) `N ⊑ N_i`, (2) the sets `upgen(N_i, u_i)` are pairwise
/// disjoint, (3) `N ≡↑_{u_i} N_i`, (4) `N` is downward cofinal in `N_i`.
/// The backward variant swaps the generation direction and cofinality. The
/// result is the union, after checking that it is anticonfluent, extends
/// every `N_i`, keeps the cofinality of `N` and agrees with `N` away from the
/// attachment nodes.
pub fn amalgamate(n: &Network, pairs: &[(NodeId, Network)], dir: Dir) -> Result<Network, NetworkError> {
    let gen = |m: &Network, u: NodeId| m.generated([u], dir);
    let same_outside = |a: &Network, b: &Network, u: &BTreeSet<NodeId>| match dir {
        Dir::F => equp_set(a, b, u),
        Dir::B => eqdown_set(a, b, u),
    };
    let cofinal = |a: &Network, b: &Network| match dir {
        Dir::F => is_down_cofinal(a, b),
        Dir::B => is_up_cofinal(a, b),
    };
    if !n.is_anticonfluent() {
        return Err(pre(0, "the base network is not anticonfluent".into()));
    }
    for (i, (u, m)) in pairs.iter().enumerate() {
        if !n.contains(*u) {
            return Err(pre(0, format!("attachment node {u} is not in the base network")));
        }
        if !m.is_anticonfluent() {
            return Err(pre(0, format!("extension {i} is not anticonfluent")));
        }
        if !is_subnetwork(n, m) {
            return Err(pre(1, format!("extension {i} does not extend the base network")));
        }
    }
    for i in 0..pairs.len() {
        let gi = gen(&pairs[i].1, pairs[i].0);
        for j in i + 1..pairs.len() {
            if !gi.is_disjoint(&gen(&pairs[j].1, pairs[j].0)) {
                return Err(pre(2, format!("generated sets of extensions {i} and {j} overlap")));
            }
        }
    }
    for (i, (u, m)) in pairs.iter().enumerate() {
        if !same_outside(n, m, &BTreeSet::from([*u])) {
            return Err(pre(
                3,
                format!("extension {i} changes the base network away from node {u}"),
            ));
        }
        if !cofinal(n, m) {
            return Err(pre(4, format!("extension {i} breaks cofinality of the base network")));
        }
    }
    if pairs.is_empty() {
        return Ok(n.clone());
    }
    let parts: Vec<Network> = pairs.iter().map(|(_, m)| m.clone()).collect();
    let out = union(&parts)?;
    let post = |m: &str| Err(NetworkError::Postcondition(m.to_string()));
    if !out.is_anticonfluent() {
        return post("the union is not anticonfluent");
    }
    if !parts.iter().all(|m| is_subnetwork(m, &out)) {
        return post("some extension is not a subnetwork of the union");
    }
    if !cofinal(n, &out) {
        return post("the base network is not cofinal in the union");
    }
    let attach: BTreeSet<NodeId> = pairs.iter().map(|(u, _)| *u).collect();
    if !same_outside(n, &out, &attach) {
        return post("the union changes the base network away from the attachment nodes");
    }
    Ok(out)
}
