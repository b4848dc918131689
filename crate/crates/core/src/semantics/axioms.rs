use crate::syntax::{Dir, Formula};

/// Instances of the axiom schemata over formulas from `pool`:
/// `¬◇F⊥`, `¬◇B⊥`, additivity of both diamonds for every ordered pair,
/// `φ → □F◇Bφ` and `φ → □B◇Fφ`, and the prefixpoint axiom for every
/// connective occurring in the pool with every argument tuple from the pool.
pub fn axiom_instances(pool: &[Formula]) -> Vec<Formula> {
    let mut out = vec![
        Formula::neg(Formula::dia_f(Formula::Bottom)),
        Formula::neg(Formula::dia_b(Formula::Bottom)),
    ];
    for dir in [Dir::F, Dir::B] {
        for a in pool {
            for b in pool {
                out.push(Formula::iff(
                    Formula::dia(dir, Formula::or(a.clone(), b.clone())),
                    Formula::or(Formula::dia(dir, a.clone()), Formula::dia(dir, b.clone())),
                ));
            }
        }
    }
    for a in pool {
        out.push(Formula::implies(a.clone(), Formula::box_f(Formula::dia_b(a.clone()))));
        out.push(Formula::implies(a.clone(), Formula::box_b(Formula::dia_f(a.clone()))));
    }
    let mut conns = std::collections::BTreeMap::new();
    for f in pool {
        conns.extend(f.connectives());
    }
    for chi in conns.values() {
        for args in tuples(pool, chi.arity()) {
            let sharp = Formula::Sharp(chi.clone(), args.clone());
            out.push(Formula::implies(chi.apply(&sharp, &args), sharp));
        }
    }
    out
}

fn tuples(pool: &[Formula], k: usize) -> Vec<Vec<Formula>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                pool.iter().map(move |f| {
                    let mut t = t.clone();
                    t.push(f.clone());
                    t
                })
            })
            .collect();
    }
    out
}
