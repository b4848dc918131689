//! Reading connective bodies through the disjunctive grammar
//! `φ ::= ⊥ | ⊤ | x | θ ∧ φ | φ ∨ φ | ∇Γ` (θ free of `x`).
//!
//! Bodies are stored in primitive form, so the grammar structure has to be
//! recovered: `◇φ` is read as `∇{φ, ⊤}`, `□φ` as `∇∅ ∨ ∇{φ}`, and an
//! expanded cover `◇a1 ∧ … ∧ ◇an ∧ □(a1 ∨ … ∨ an)` is folded back into
//! `∇{a1..an}`. Only subtrees containing `x` are rewritten.

use std::collections::HashMap;

use super::connective::DisjClass;
use super::formula::{Dir, Formula, RECURSION_VAR};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    X,
    /// Formula without `x`.
    Free,
    Or(usize, usize),
    /// `θ ∧ ψ`; the first child is the `x`-free conjunct.
    And(usize, usize),
    Nabla(Dir, Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// What the node denotes, as a primitive formula over `x, q⃗`.
    pub formula: Formula,
    /// An equivalent formula whose instances decompose into members of a
    /// closure set by boolean structure alone. Differs from `formula` only for
    /// covers introduced by reading a box.
    pub judge: Formula,
    pub has_x: bool,
}

/// A connective body in disjunctive normal reading. Nodes are stored in
/// preorder; `root` is always 0.
#[derive(Clone, Debug)]
pub struct DisjTree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotDisjunctive(pub String);

fn x_in(f: &Formula) -> bool {
    f.contains_var(RECURSION_VAR)
}

fn signed(f: &Formula, pos: bool) -> Formula {
    if pos {
        f.clone()
    } else {
        Formula::neg(f.clone())
    }
}

fn as_dia(f: &Formula) -> Option<(Dir, &Formula)> {
    match f {
        Formula::DiaF(a) => Some((Dir::F, a)),
        Formula::DiaB(a) => Some((Dir::B, a)),
        _ => None,
    }
}

/// Flattens a conjunction read under polarity `pos` into signed items. An
/// item `(f, false)` stands for `¬f`; items are never negations.
fn conjuncts(f: &Formula, pos: bool, out: &mut Vec<(Formula, bool)>) {
    match f {
        Formula::Neg(g) => conjuncts(g, !pos, out),
        Formula::Or(a, b) if !pos => {
            conjuncts(a, false, out);
            conjuncts(b, false, out);
        }
        other => out.push((other.clone(), pos)),
    }
}

struct Builder {
    nodes: Vec<Node>,
}

impl Builder {
    fn push(&mut self, kind: NodeKind, formula: Formula, judge: Formula, has_x: bool) -> usize {
        self.nodes.push(Node {
            kind,
            formula,
            judge,
            has_x,
        });
        self.nodes.len() - 1
    }

    fn free(&mut self, f: Formula) -> usize {
        self.push(NodeKind::Free, f.clone(), f, false)
    }

    fn conv(&mut self, f: &Formula, pos: bool) -> Result<usize, NotDisjunctive> {
        if !x_in(f) {
            return Ok(self.free(signed(f, pos)));
        }
        match f {
            Formula::Var(_) => {
                if !pos {
                    return Err(NotDisjunctive("negative occurrence of x".into()));
                }
                Ok(self.push(NodeKind::X, f.clone(), f.clone(), true))
            }
            Formula::Neg(g) => self.conv(g, !pos),
            Formula::Or(a, b) if pos => {
                let id = self.push(NodeKind::X, f.clone(), f.clone(), true);
                let l = self.conv(a, true)?;
                let r = self.conv(b, true)?;
                self.nodes[id].kind = NodeKind::Or(l, r);
                Ok(id)
            }
            Formula::Or(..) => self.conj(f, pos),
            Formula::DiaF(g) | Formula::DiaB(g) => {
                let dir = if matches!(f, Formula::DiaF(_)) { Dir::F } else { Dir::B };
                if pos {
                    // ◇g read as ∇{g, ⊤}
                    let id = self.push(NodeKind::X, f.clone(), f.clone(), true);
                    let a = self.conv(g, true)?;
                    let t = self.free(Formula::top());
                    self.nodes[id].kind = NodeKind::Nabla(dir, vec![a, t]);
                    Ok(id)
                } else {
                    // ¬◇g = □¬g read as ∇∅ ∨ ∇{¬g}
                    let me = Formula::neg(f.clone());
                    let id = self.push(NodeKind::X, me.clone(), me.clone(), true);
                    let empty = Formula::nabla(dir, vec![]);
                    let e = self.push(NodeKind::Nabla(dir, vec![]), empty.clone(), empty.clone(), false);
                    let single = Formula::nabla(dir, vec![g.complement()]);
                    let judge = Formula::and(me.clone(), Formula::neg(empty));
                    let s = self.push(NodeKind::X, single, judge, true);
                    let part = self.conv(g, false)?;
                    self.nodes[s].kind = NodeKind::Nabla(dir, vec![part]);
                    self.nodes[id].kind = NodeKind::Or(e, s);
                    Ok(id)
                }
            }
            Formula::Bottom | Formula::Sharp(..) => Err(NotDisjunctive("unexpected fixpoint in body".into())),
        }
    }

    /// Conjunction case: at most one element may contain `x`, where a folded
    /// cover counts as one element.
    fn conj(&mut self, f: &Formula, pos: bool) -> Result<usize, NotDisjunctive> {
        let mut items = Vec::new();
        conjuncts(f, pos, &mut items);
        let n = items.len();
        // cover patterns: index of box item -> start index of its diamonds
        let mut cover_start: Vec<Option<usize>> = vec![None; n];
        let mut consumed = vec![false; n];
        for j in 0..n {
            let (ref item, p) = items[j];
            if p {
                continue;
            }
            let Some((dir, inner)) = as_dia(item) else { continue };
            let Formula::Neg(disj) = inner else { continue };
            if !x_in(disj) {
                continue;
            }
            let mut k = j;
            let mut found = None;
            while k > 0 {
                let (ref prev, pp) = items[k - 1];
                if !pp || consumed[k - 1] {
                    break;
                }
                match as_dia(prev) {
                    Some((d, _)) if d == dir => {}
                    _ => break,
                }
                k -= 1;
                let parts: Vec<Formula> = items[k..j].iter().map(|(g, _)| as_dia(g).unwrap().1.clone()).collect();
                if Formula::disj(parts) == **disj {
                    found = Some(k);
                }
            }
            if let Some(k) = found {
                cover_start[j] = Some(k);
                for c in consumed.iter_mut().take(j + 1).skip(k) {
                    *c = true;
                }
            }
        }

        let mut theta = Vec::new();
        let mut trees: Vec<Element> = Vec::new();
        for j in 0..n {
            if let Some(k) = cover_start[j] {
                trees.push(Element::Cover(k, j));
            } else if consumed[j] {
                continue;
            } else if x_in(&items[j].0) {
                trees.push(Element::Item(j));
            } else {
                theta.push(signed(&items[j].0, items[j].1));
            }
        }
        if trees.len() != 1 {
            return Err(NotDisjunctive(format!(
                "conjunction with {} conjuncts containing x",
                trees.len()
            )));
        }
        let me = signed(f, pos);
        let and_id = if theta.is_empty() {
            None
        } else {
            let id = self.push(NodeKind::X, me.clone(), me, true);
            let t = self.free(Formula::conj(theta));
            Some((id, t))
        };
        let tree = match trees[0] {
            Element::Item(j) => {
                let (g, p) = items[j].clone();
                self.conv(&g, p)?
            }
            Element::Cover(k, j) => {
                let dir = as_dia(&items[j].0).unwrap().0;
                let src = Formula::conj(items[k..=j].iter().map(|(g, p)| signed(g, *p)));
                let id = self.push(NodeKind::X, src.clone(), src, true);
                let mut parts = Vec::new();
                for (g, _) in &items[k..j] {
                    let a = as_dia(g).unwrap().1.clone();
                    parts.push(self.conv(&a, true)?);
                }
                self.nodes[id].kind = NodeKind::Nabla(dir, parts);
                id
            }
        };
        Ok(match and_id {
            Some((id, t)) => {
                self.nodes[id].kind = NodeKind::And(t, tree);
                id
            }
            None => tree,
        })
    }
}

enum Element {
    Item(usize),
    Cover(usize, usize),
}

impl DisjTree {
    /// Reads a body through the disjunctive grammar, without yet checking that
    /// all covers around `x` share a direction.
    pub fn build(body: &Formula) -> Result<DisjTree, NotDisjunctive> {
        let mut b = Builder { nodes: Vec::new() };
        b.conv(body, true)?;
        Ok(DisjTree { nodes: b.nodes })
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    /// Direction of the covers containing `x`; a body without such covers is
    /// reported as forward.
    pub fn class(&self) -> DisjClass {
        let mut dir = None;
        for n in &self.nodes {
            if let NodeKind::Nabla(d, _) = n.kind {
                if n.has_x {
                    match dir {
                        None => dir = Some(d),
                        Some(e) if e != d => return DisjClass::None,
                        _ => {}
                    }
                }
            }
        }
        match dir.unwrap_or(Dir::F) {
            Dir::F => DisjClass::Forward,
            Dir::B => DisjClass::Backward,
        }
    }

    /// Children in order.
    pub fn children(&self, i: usize) -> Vec<usize> {
        match &self.nodes[i].kind {
            NodeKind::X | NodeKind::Free => vec![],
            NodeKind::Or(a, b) | NodeKind::And(a, b) => vec![*a, *b],
            NodeKind::Nabla(_, parts) => parts.clone(),
        }
    }

    /// Structural class of every node: equal classes mean equal subtrees.
    /// Deferrals are formulas, so repeated subtrees are one deferral.
    pub fn canonical_ids(&self) -> Vec<usize> {
        let mut out = vec![0; self.nodes.len()];
        let mut seen: HashMap<(u8, Option<Dir>, &Formula, &Formula, Vec<usize>), usize> = HashMap::new();
        for i in (0..self.nodes.len()).rev() {
            let n = &self.nodes[i];
            let (tag, dir) = match &n.kind {
                NodeKind::X => (0, None),
                NodeKind::Free => (1, None),
                NodeKind::Or(..) => (2, None),
                NodeKind::And(..) => (3, None),
                NodeKind::Nabla(d, _) => (4, Some(*d)),
            };
            let kids = self.children(i).iter().map(|&c| out[c]).collect();
            let next = seen.len();
            out[i] = *seen.entry((tag, dir, &n.formula, &n.judge, kids)).or_insert(next);
        }
        out
    }

    /// Whether `x` occurs in node `i` outside every cover.
    pub fn has_unguarded_x(&self, i: usize) -> bool {
        match &self.nodes[i].kind {
            NodeKind::X => true,
            NodeKind::Free | NodeKind::Nabla(..) => false,
            NodeKind::Or(a, b) | NodeKind::And(a, b) => self.has_unguarded_x(*a) || self.has_unguarded_x(*b),
        }
    }
}

/// Classification used when building a connective.
pub fn classify_body(body: &Formula) -> DisjClass {
    match DisjTree::build(body) {
        Ok(t) => t.class(),
        Err(_) => DisjClass::None,
    }
}
