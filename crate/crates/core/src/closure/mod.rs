//! Fischer-Ladner closure, Hintikka atoms over it, and deferrals.

mod atoms;
mod deferral;

use std::collections::{HashMap, HashSet};
use std::fmt;

pub use atoms::{atoms, coherent, for_each_atom, for_each_atom_within, is_atom, least_atom, Atom};
pub use deferral::{deferral_table, Deferral, DeferralTable, Host, Judge};

use crate::syntax::{Dir, Formula};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClosureError {
    #[error("connective `{0}` is not disjunctive, so its deferrals are undefined")]
    NotDisjunctive(String),
    #[error("formula {0} does not decompose into closure members")]
    Uncompilable(String),
}

/// Top-level shape of a closure member, with children as closure indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Bottom,
    Var,
    Neg(usize),
    Or(usize, usize),
    Dia(Dir, usize),
    /// `♯χθ⃗` with the indices of `χ(♯χθ⃗, θ⃗)` and `χ(⊥, θ⃗)`.
    Sharp {
        unfold: usize,
        bottom: usize,
    },
}

/// A finite Fischer-Ladner closed set. Members are ordered by size, then
/// structurally, so every subformula precedes the formulas containing it.
#[derive(Clone)]
pub struct ClosureSet {
    origin: Formula,
    formulas: Vec<Formula>,
    index: HashMap<Formula, usize>,
    shapes: Vec<Shape>,
    complement: Vec<usize>,
    box_bot: [usize; 2],
}

fn dir_slot(d: Dir) -> usize {
    match d {
        Dir::F => 0,
        Dir::B => 1,
    }
}

/// Smallest Fischer-Ladner closed set containing `phi`, `□F⊥` and `□B⊥`.
pub fn fl_closure(phi: &Formula) -> ClosureSet {
    let box_f = Formula::box_f(Formula::Bottom);
    let box_b = Formula::box_b(Formula::Bottom);
    let mut seen: HashSet<Formula> = HashSet::new();
    let mut work = vec![phi.clone(), box_f.clone(), box_b.clone()];
    while let Some(f) = work.pop() {
        if seen.contains(&f) {
            continue;
        }
        for c in f.children() {
            work.push(c.clone());
        }
        if !matches!(f, Formula::Neg(_)) {
            work.push(Formula::neg(f.clone()));
        }
        if let Formula::Sharp(chi, args) = &f {
            work.push(chi.apply(&f, args));
            work.push(chi.apply(&Formula::Bottom, args));
        }
        seen.insert(f);
    }
    let mut formulas: Vec<Formula> = seen.into_iter().collect();
    formulas.sort();
    formulas.sort_by_cached_key(|f| f.size());
    ClosureSet::from_sorted(phi.clone(), formulas, &box_f, &box_b)
}

impl ClosureSet {
    fn from_sorted(origin: Formula, formulas: Vec<Formula>, box_f: &Formula, box_b: &Formula) -> Self {
        let index: HashMap<Formula, usize> = formulas.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        let ix = |f: &Formula| index[f];
        let shapes = formulas
            .iter()
            .map(|f| match f {
                Formula::Bottom => Shape::Bottom,
                Formula::Var(_) => Shape::Var,
                Formula::Neg(a) => Shape::Neg(ix(a)),
                Formula::Or(a, b) => Shape::Or(ix(a), ix(b)),
                Formula::DiaF(a) => Shape::Dia(Dir::F, ix(a)),
                Formula::DiaB(a) => Shape::Dia(Dir::B, ix(a)),
                Formula::Sharp(chi, args) => Shape::Sharp {
                    unfold: ix(&chi.apply(f, args)),
                    bottom: ix(&chi.apply(&Formula::Bottom, args)),
                },
            })
            .collect();
        let complement = formulas.iter().map(|f| ix(&f.complement())).collect();
        let box_bot = [ix(box_f), ix(box_b)];
        ClosureSet {
            origin,
            formulas,
            index,
            shapes,
            complement,
            box_bot,
        }
    }

    pub fn origin(&self) -> &Formula {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn formula(&self, i: usize) -> &Formula {
        &self.formulas[i]
    }

    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.index.contains_key(f)
    }

    pub fn shape(&self, i: usize) -> Shape {
        self.shapes[i]
    }

    /// Index of `∼φ`.
    pub fn complement(&self, i: usize) -> usize {
        self.complement[i]
    }

    /// Index of `□⊥` in the given direction.
    pub fn box_bottom(&self, d: Dir) -> usize {
        self.box_bot[dir_slot(d)]
    }

    /// Indices of members `◇ψ` in direction `d`, paired with the index of `ψ`.
    pub fn diamonds(&self, d: Dir) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.shapes.iter().enumerate().filter_map(move |(i, s)| match s {
            Shape::Dia(e, a) if *e == d => Some((i, *a)),
            _ => None,
        })
    }

    /// Sharp-free members of modal depth at most `depth`.
    pub fn bounded_members(&self, depth: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.formulas[i].is_sharp_free() && self.formulas[i].modal_depth() <= depth)
            .collect()
    }
}

impl fmt::Debug for ClosureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.formulas.iter().enumerate().map(|(i, g)| (i, g.to_string())))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, ConnectiveTable};

    fn closure(s: &str, t: &ConnectiveTable) -> ClosureSet {
        fl_closure(&parse(s, t).unwrap())
    }

    #[test]
    fn closure_of_variable() {
        let t = ConnectiveTable::new();
        let s = closure("p", &t);
        for f in [
            "p", "~p", "[F]_|_", "[B]_|_", "<F>T", "<B>T", "T", "_|_", "~<F>T", "~<B>T",
        ] {
            assert!(s.contains(&parse(f, &t).unwrap()), "{f}");
        }
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn closure_of_bottom() {
        let t = ConnectiveTable::new();
        let s = closure("_|_", &t);
        assert!(s.contains(&Formula::Bottom));
        assert!(s.contains(&Formula::top()));
    }

    #[test]
    fn unfoldings_present() {
        let mut t = ConnectiveTable::new();
        t.define("c1", 1, "[F]x | q1").unwrap();
        let s = closure("#c1(q)", &t);
        assert!(s.contains(&parse("[F]#c1(q) | q", &t).unwrap()));
        assert!(s.contains(&parse("[F]_|_ | q", &t).unwrap()));
    }

    #[test]
    fn subformulas_precede() {
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        let s = closure("<B>#r(p & ~q) | [F]p", &t);
        for i in 0..s.len() {
            match s.shape(i) {
                Shape::Neg(a) | Shape::Dia(_, a) => assert!(a < i),
                Shape::Or(a, b) => assert!(a < i && b < i),
                _ => {}
            }
        }
    }
}
