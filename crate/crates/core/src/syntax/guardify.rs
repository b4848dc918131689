use std::collections::BTreeMap;
use std::sync::Arc;

use super::connective::FixpointConnective;
use super::disjunctive::{DisjTree, NodeKind};
use super::formula::{Formula, RECURSION_VAR};
use super::SyntaxError;

/// `χ ≡ (x ∧ γ1) ∨ γ2` with `x` guarded in `γ1` and `γ2`.
#[derive(Clone, Debug)]
pub struct GuardificationResult {
    pub gamma1: Formula,
    pub gamma2: Arc<FixpointConnective>,
    /// `χ(x, q⃗) ↔ (x ∧ γ1) ∨ γ2(x, q⃗)`.
    pub equivalence: Formula,
}

fn split(t: &DisjTree, i: usize) -> (Formula, Formula) {
    let node = t.node(i);
    if !t.has_unguarded_x(i) {
        return (Formula::Bottom, node.formula.clone());
    }
    match &node.kind {
        NodeKind::X => (Formula::top(), Formula::Bottom),
        NodeKind::And(theta, rest) => {
            let th = t.node(*theta).formula.clone();
            let (c, g) = split(t, *rest);
            (Formula::and(th.clone(), c), Formula::and(th, g))
        }
        NodeKind::Or(a, b) => {
            let (c1, g1) = split(t, *a);
            let (c2, g2) = split(t, *b);
            (Formula::or(c1, c2), Formula::or(g1, g2))
        }
        NodeKind::Free | NodeKind::Nabla(..) => unreachable!("no unguarded x"),
    }
}

/// Splits a disjunctive connective into its unguarded part `γ1` and a guarded
/// connective `γ2`, named `<name>_g`.
pub fn guardify(chi: &FixpointConnective) -> Result<GuardificationResult, SyntaxError> {
    if !chi.class().is_disjunctive() {
        return Err(SyntaxError::NotDisjunctive(chi.name().to_string()));
    }
    let tree = DisjTree::build(chi.body()).map_err(|_| SyntaxError::NotDisjunctive(chi.name().to_string()))?;
    let (gamma1, g) = split(&tree, tree.root());
    let gamma2 = Arc::new(FixpointConnective::new(
        format!("{}_g", chi.name()),
        chi.arity(),
        g.clone(),
    )?);
    let x = Formula::var(RECURSION_VAR);
    let equivalence = Formula::iff(chi.body().clone(), Formula::or(Formula::and(x, gamma1.clone()), g));
    Ok(GuardificationResult {
        gamma1,
        gamma2,
        equivalence,
    })
}

/// Replaces every connective by its image under `map`, keeping everything
/// else in place.
pub fn translate_guarded(
    phi: &Formula,
    map: &BTreeMap<String, Arc<FixpointConnective>>,
) -> Result<Formula, SyntaxError> {
    Ok(match phi {
        Formula::Bottom | Formula::Var(_) => phi.clone(),
        Formula::Neg(a) => Formula::neg(translate_guarded(a, map)?),
        Formula::Or(a, b) => Formula::or(translate_guarded(a, map)?, translate_guarded(b, map)?),
        Formula::DiaF(a) => Formula::dia_f(translate_guarded(a, map)?),
        Formula::DiaB(a) => Formula::dia_b(translate_guarded(a, map)?),
        Formula::Sharp(c, args) => {
            let target = map
                .get(c.name())
                .ok_or_else(|| SyntaxError::MissingTranslation(c.name().to_string()))?;
            let args = args
                .iter()
                .map(|a| translate_guarded(a, map))
                .collect::<Result<Vec<_>, _>>()?;
            Formula::Sharp(target.clone(), args)
        }
    })
}
