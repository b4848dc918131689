use super::model::KripkeModel;
use crate::bitset::BitSet;
use crate::syntax::{Dir, FixpointConnective, Formula, RECURSION_VAR};

/// Variables bound while evaluating a connective body.
enum Scope<'a, T> {
    Top,
    Body { x: &'a T, params: &'a [T] },
}

fn param_index(v: &str) -> Option<usize> {
    v.strip_prefix('q')?.parse::<usize>().ok().filter(|&i| i >= 1)
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        !0
    } else {
        (1u64 << n) - 1
    }
}

fn mask_to_bits(n: usize, m: u64) -> BitSet {
    BitSet::from_indices(n, (0..n).filter(|i| m >> i & 1 == 1))
}

fn pre_image(masks: &[u64], z: u64) -> u64 {
    let mut out = 0;
    for (s, &m) in masks.iter().enumerate() {
        if m & z != 0 {
            out |= 1 << s;
        }
    }
    out
}

fn eval_mask_in(f: &Formula, m: &KripkeModel, scope: &Scope<'_, u64>) -> u64 {
    let n = m.states();
    match f {
        Formula::Bottom => 0,
        Formula::Var(v) => match scope {
            Scope::Top => m.value_mask(v),
            Scope::Body { x, params } => {
                if v == RECURSION_VAR {
                    **x
                } else {
                    param_index(v).and_then(|i| params.get(i - 1)).copied().unwrap_or(0)
                }
            }
        },
        Formula::Neg(a) => full_mask(n) & !eval_mask_in(a, m, scope),
        Formula::Or(a, b) => eval_mask_in(a, m, scope) | eval_mask_in(b, m, scope),
        Formula::DiaF(a) => pre_image(m.succ_masks(), eval_mask_in(a, m, scope)),
        Formula::DiaB(a) => pre_image(m.pred_masks(), eval_mask_in(a, m, scope)),
        Formula::Sharp(chi, args) => {
            let params: Vec<u64> = args.iter().map(|a| eval_mask_in(a, m, scope)).collect();
            lfp_mask(chi, m, &params)
        }
    }
}

fn lfp_mask(chi: &FixpointConnective, m: &KripkeModel, params: &[u64]) -> u64 {
    let mut z = 0u64;
    loop {
        let next = eval_mask_in(chi.body(), m, &Scope::Body { x: &z, params });
        if next == z {
            return z;
        }
        z = next;
    }
}

fn eval_bits_in(f: &Formula, m: &KripkeModel, scope: &Scope<'_, BitSet>) -> BitSet {
    let n = m.states();
    match f {
        Formula::Bottom => BitSet::new(n),
        Formula::Var(v) => match scope {
            Scope::Top => m.value(v),
            Scope::Body { x, params } => {
                if v == RECURSION_VAR {
                    (*x).clone()
                } else {
                    param_index(v)
                        .and_then(|i| params.get(i - 1))
                        .cloned()
                        .unwrap_or_else(|| BitSet::new(n))
                }
            }
        },
        Formula::Neg(a) => eval_bits_in(a, m, scope).complement(),
        Formula::Or(a, b) => eval_bits_in(a, m, scope).union(&eval_bits_in(b, m, scope)),
        Formula::DiaF(a) | Formula::DiaB(a) => {
            let z = eval_bits_in(a, m, scope);
            let forward = matches!(f, Formula::DiaF(_));
            BitSet::from_indices(
                n,
                (0..n).filter(|&s| {
                    let nb = if forward { m.successors(s) } else { m.predecessors(s) };
                    nb.intersects(&z)
                }),
            )
        }
        Formula::Sharp(chi, args) => {
            let params: Vec<BitSet> = args.iter().map(|a| eval_bits_in(a, m, scope)).collect();
            let mut z = BitSet::new(n);
            loop {
                let next = eval_bits_in(chi.body(), m, &Scope::Body { x: &z, params: &params });
                if next == z {
                    return z;
                }
                z = next;
            }
        }
    }
}

/// Truth set `⟦φ⟧`. Fixpoints are computed by Kleene iteration from `∅`.
pub fn eval(f: &Formula, m: &KripkeModel) -> BitSet {
    if m.states() <= 64 {
        mask_to_bits(m.states(), eval_mask(f, m))
    } else {
        eval_bits_in(f, m, &Scope::Top)
    }
}

/// Truth set as a bit mask. Only for models with at most 64 states.
pub fn eval_mask(f: &Formula, m: &KripkeModel) -> u64 {
    assert!(m.states() <= 64, "mask evaluation needs at most 64 states");
    eval_mask_in(f, m, &Scope::Top)
}

pub fn holds(f: &Formula, m: &KripkeModel, s: usize) -> bool {
    eval(f, m).contains(s)
}

/// Whether `φ` holds at every state.
pub fn valid_in(f: &Formula, m: &KripkeModel) -> bool {
    if m.states() <= 64 {
        eval_mask(f, m) == full_mask(m.states())
    } else {
        eval(f, m).count() == m.states()
    }
}

/// Evaluates a connective body with `x` and the parameters bound to the given
/// sets.
pub fn eval_body(chi: &FixpointConnective, m: &KripkeModel, x: &BitSet, params: &[BitSet]) -> BitSet {
    eval_bits_in(chi.body(), m, &Scope::Body { x, params })
}

/// Decides `w ⊨ ∇Ψ` through full relations: every neighbour satisfies some
/// member of `Ψ` and every member holds at some neighbour.
pub fn eval_nabla_via_relation(psi: &[Formula], dir: Dir, m: &KripkeModel, w: usize) -> bool {
    let neighbours = match dir {
        Dir::F => m.successors(w),
        Dir::B => m.predecessors(w),
    };
    let sets: Vec<BitSet> = psi.iter().map(|f| eval(f, m)).collect();
    let covered = neighbours.iter().all(|v| sets.iter().any(|s| s.contains(v)));
    let realised = sets.iter().all(|s| s.intersects(neighbours));
    covered && realised
}

/// `χ^k(⊥, θ⃗)`: `χ^0 = χ(⊥, θ⃗)` and `χ^{k+1} = χ(χ^k, θ⃗)`.
pub fn approximant(chi: &FixpointConnective, k: usize, args: &[Formula]) -> Formula {
    let mut f = chi.apply(&Formula::Bottom, args);
    for _ in 0..k {
        f = chi.apply(&f, args);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, ConnectiveTable};

    fn table() -> ConnectiveTable {
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        t
    }

    #[test]
    fn reachability_on_chain() {
        let t = table();
        let m = KripkeModel::new(2, [(0, 1)], [("p".to_string(), vec![1])]).unwrap();
        assert_eq!(eval(&parse("#r(p)", &t).unwrap(), &m).to_vec(), vec![0, 1]);
        assert!(eval(&Formula::Bottom, &m).is_empty());
    }

    #[test]
    fn large_model_path_agrees() {
        let t = table();
        let n = 70;
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let m = KripkeModel::new(n, edges, [("p".to_string(), vec![n - 1])]).unwrap();
        let f = parse("#r(p)", &t).unwrap();
        assert_eq!(eval(&f, &m).count(), n);
        let g = parse("<B><B>T & ~p", &t).unwrap();
        assert_eq!(eval(&g, &m).count(), n - 3);
    }

    #[test]
    fn nabla_relation_examples() {
        let m = KripkeModel::new(2, [(0, 1)], []).unwrap();
        assert!(eval_nabla_via_relation(&[], Dir::F, &m, 1));
        assert!(eval_nabla_via_relation(&[Formula::top()], Dir::F, &m, 0));
        assert!(!eval_nabla_via_relation(&[], Dir::F, &m, 0));
    }

    #[test]
    fn approximant_shape() {
        let t = table();
        let r = t.get("r").unwrap();
        let p = Formula::var("p");
        assert_eq!(approximant(r, 0, &[p.clone()]), parse("p | <F>_|_", &t).unwrap());
        assert_eq!(approximant(r, 1, &[p]), parse("p | <F>(p | <F>_|_)", &t).unwrap());
    }
}
