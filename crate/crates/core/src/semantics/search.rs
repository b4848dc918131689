//! Enumeration of small Kripke models and brute-force satisfiability.

use std::sync::{Arc, Mutex, OnceLock};

use super::eval::eval_mask;
use super::model::KripkeModel;
use super::SemanticsError;
use crate::syntax::Formula;

/// Largest state count `brute_force_sat` accepts.
pub const MAX_SEARCH_STATES: usize = 5;

fn permute(code: u64, n: usize, perm: &[usize]) -> u64 {
    let mut out = 0;
    for i in 0..n {
        for j in 0..n {
            if code >> (i * n + j) & 1 == 1 {
                out |= 1 << (perm[i] * n + perm[j]);
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap(n, &mut cur, &mut out);
    out
}

fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k {
        heap(k - 1, a, out);
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
}

/// Per-state `(out-degree, in-degree, loop)` signature; every isomorphism
/// class has a member whose signatures are sorted.
fn signature_sorted(code: u64, n: usize) -> bool {
    let sig = |i: usize| {
        let out = (0..n).filter(|&j| code >> (i * n + j) & 1 == 1).count();
        let inn = (0..n).filter(|&j| code >> (j * n + i) & 1 == 1).count();
        (out, inn, code >> (i * n + i) & 1)
    };
    (1..n).all(|i| sig(i - 1) <= sig(i))
}

fn compute_frames(n: usize) -> Vec<u64> {
    let total = 1u64 << (n * n);
    if n <= 4 {
        // exact: keep the least code of every isomorphism class
        let perms = permutations(n);
        (0..total)
            .filter(|&c| perms.iter().all(|p| permute(c, n, p) >= c))
            .collect()
    } else {
        (0..total).filter(|&c| signature_sorted(c, n)).collect()
    }
}

/// Adjacency codes of frames on `n` states, at least one per isomorphism
/// class (exactly one for `n <= 4`), ascending.
pub fn frames(n: usize) -> Arc<Vec<u64>> {
    static CACHE: OnceLock<Mutex<Vec<Option<Arc<Vec<u64>>>>>> = OnceLock::new();
    assert!(
        (1..=MAX_SEARCH_STATES).contains(&n),
        "frame enumeration supports 1..={MAX_SEARCH_STATES} states"
    );
    let cache = CACHE.get_or_init(|| Mutex::new(vec![None; MAX_SEARCH_STATES + 1]));
    if let Some(f) = cache.lock().unwrap()[n].clone() {
        return f;
    }
    let f = Arc::new(compute_frames(n));
    cache.lock().unwrap()[n] = Some(f.clone());
    f
}

/// Calls `f` on every model with `1..=max_states` states over `props`, up to
/// isomorphism of frames, in (size, frame code, valuation code) order.
/// Stops early when `f` returns `false`.
pub fn for_each_model(max_states: usize, props: &[&str], mut f: impl FnMut(&KripkeModel) -> bool) {
    for n in 1..=max_states {
        for &code in frames(n).iter() {
            let vbits = n * props.len();
            for v in 0..(1u64 << vbits) {
                let vars: Vec<(&str, u64)> = props
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (*p, v >> (k * n) & ((1 << n) - 1)))
                    .collect();
                let m = KripkeModel::from_codes(n, code, &vars);
                if !f(&m) {
                    return;
                }
            }
        }
    }
}

/// Searches all models up to `max_states` over the variables of `phi` and
/// returns the first pointed model satisfying it, in the enumeration order of
/// [`for_each_model`] and then by state.
pub fn brute_force_sat(phi: &Formula, max_states: usize) -> Result<Option<(KripkeModel, usize)>, SemanticsError> {
    if max_states > MAX_SEARCH_STATES {
        return Err(SemanticsError::TooLarge(max_states));
    }
    let vars = phi.vars();
    let props: Vec<&str> = vars.iter().map(String::as_str).collect();
    let mut found = None;
    for_each_model(max_states, &props, |m| {
        let t = eval_mask(phi, m);
        if t != 0 {
            found = Some((m.clone(), t.trailing_zeros() as usize));
            false
        } else {
            true
        }
    });
    Ok(found)
}
