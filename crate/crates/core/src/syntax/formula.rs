use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::connective::FixpointConnective;

/// Name of the recursion variable inside connective bodies.
pub const RECURSION_VAR: &str = "x";

/// Name of the `i`-th parameter variable (1-based) inside connective bodies.
pub fn param_var(i: usize) -> String {
    format!("q{i}")
}

/// Direction of a modality: forward along the relation or backward along its
/// converse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Dir {
    F,
    B,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::F => Dir::B,
            Dir::B => Dir::F,
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::F => "F",
            Dir::B => "B",
        })
    }
}

/// Formula in primitive form. Derived connectives only exist in the concrete
/// syntax and are expanded by the parser.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Formula {
    Bottom,
    Var(String),
    Neg(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    DiaF(Box<Formula>),
    DiaB(Box<Formula>),
    Sharp(Arc<FixpointConnective>, Vec<Formula>),
}

use Formula::*;

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Var(name.into())
    }

    pub fn top() -> Formula {
        Neg(Box::new(Bottom))
    }

    pub fn neg(f: Formula) -> Formula {
        Neg(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Or(Box::new(a), Box::new(b))
    }

    /// `a ∧ b` as `¬(¬a ∨ ¬b)`.
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::neg(Formula::or(Formula::neg(a), Formula::neg(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::neg(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    pub fn dia(dir: Dir, f: Formula) -> Formula {
        match dir {
            Dir::F => DiaF(Box::new(f)),
            Dir::B => DiaB(Box::new(f)),
        }
    }

    /// `□φ` as `¬◇¬φ`.
    pub fn boxed(dir: Dir, f: Formula) -> Formula {
        Formula::neg(Formula::dia(dir, Formula::neg(f)))
    }

    pub fn dia_f(f: Formula) -> Formula {
        Formula::dia(Dir::F, f)
    }

    pub fn dia_b(f: Formula) -> Formula {
        Formula::dia(Dir::B, f)
    }

    pub fn box_f(f: Formula) -> Formula {
        Formula::boxed(Dir::F, f)
    }

    pub fn box_b(f: Formula) -> Formula {
        Formula::boxed(Dir::B, f)
    }

    /// Left-nested disjunction; the empty disjunction is `⊥`.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Bottom)
    }

    /// Left-nested conjunction; the empty conjunction is `⊤`.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or_else(Formula::top)
    }

    /// Cover modality `∇{φ1..φn} = ◇φ1 ∧ … ∧ ◇φn ∧ □(φ1 ∨ … ∨ φn)`.
    /// The empty cover is `□⊥`.
    pub fn nabla(dir: Dir, parts: Vec<Formula>) -> Formula {
        let boxed = Formula::boxed(dir, Formula::disj(parts.iter().cloned()));
        let mut conjuncts: Vec<Formula> = parts.into_iter().map(|p| Formula::dia(dir, p)).collect();
        conjuncts.push(boxed);
        Formula::conj(conjuncts)
    }

    pub fn sharp(conn: Arc<FixpointConnective>, args: Vec<Formula>) -> Formula {
        Sharp(conn, args)
    }

    /// `∼φ`: strips one leading negation, otherwise adds one.
    pub fn complement(&self) -> Formula {
        match self {
            Neg(inner) => (**inner).clone(),
            other => Formula::neg(other.clone()),
        }
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Neg(b) if **b == Bottom)
    }

    /// Matches `¬(¬a ∨ ¬b)` and returns `(a, b)`.
    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        if let Neg(inner) = self {
            if let Or(l, r) = &**inner {
                if let (Neg(a), Neg(b)) = (&**l, &**r) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Matches `¬◇¬a` and returns the direction and `a`.
    pub fn as_box(&self) -> Option<(Dir, &Formula)> {
        if let Neg(inner) = self {
            match &**inner {
                DiaF(b) => {
                    if let Neg(a) = &**b {
                        return Some((Dir::F, a));
                    }
                }
                DiaB(b) => {
                    if let Neg(a) = &**b {
                        return Some((Dir::B, a));
                    }
                }
                _ => {}
            }
        }
        None
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Bottom | Var(_) => vec![],
            Neg(a) | DiaF(a) | DiaB(a) => vec![a],
            Or(a, b) => vec![a, b],
            Sharp(_, args) => args.iter().collect(),
        }
    }

    /// Number of primitive constructor nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Maximal nesting of modal operators. Fixpoint formulas count as
    /// unbounded-depth and are reported as `usize::MAX`.
    pub fn modal_depth(&self) -> usize {
        match self {
            Bottom | Var(_) => 0,
            Neg(a) => a.modal_depth(),
            Or(a, b) => a.modal_depth().max(b.modal_depth()),
            DiaF(a) | DiaB(a) => a.modal_depth().saturating_add(1),
            Sharp(..) => usize::MAX,
        }
    }

    /// Maximal nesting of `♯` operators.
    pub fn fixpoint_depth(&self) -> usize {
        match self {
            Sharp(_, args) => 1 + args.iter().map(|a| a.fixpoint_depth()).max().unwrap_or(0),
            other => other.children().iter().map(|c| c.fixpoint_depth()).max().unwrap_or(0),
        }
    }

    pub fn is_sharp_free(&self) -> bool {
        self.fixpoint_depth() == 0
    }

    /// Free propositional variables, sorted.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Var(v) = self {
            out.insert(v.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Var(v) => v == name,
            other => other.children().iter().any(|c| c.contains_var(name)),
        }
    }

    /// Connectives used anywhere in the formula, by name.
    pub fn connectives(&self) -> BTreeMap<String, Arc<FixpointConnective>> {
        let mut out = BTreeMap::new();
        self.collect_connectives(&mut out);
        out
    }

    fn collect_connectives(&self, out: &mut BTreeMap<String, Arc<FixpointConnective>>) {
        if let Sharp(c, _) = self {
            out.entry(c.name().to_string()).or_insert_with(|| c.clone());
        }
        for c in self.children() {
            c.collect_connectives(out);
        }
    }

    /// Simultaneous substitution of variables. There are no binders in the
    /// object language, so substitution is a plain homomorphism.
    pub fn substitute(&self, map: &BTreeMap<String, Formula>) -> Formula {
        match self {
            Bottom => Bottom,
            Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Neg(a) => Formula::neg(a.substitute(map)),
            Or(a, b) => Formula::or(a.substitute(map), b.substitute(map)),
            DiaF(a) => Formula::dia_f(a.substitute(map)),
            DiaB(a) => Formula::dia_b(a.substitute(map)),
            Sharp(c, args) => Sharp(c.clone(), args.iter().map(|a| a.substitute(map)).collect()),
        }
    }

    /// Every occurrence of `v` sits under an even number of negations.
    pub fn is_positive_in(&self, v: &str) -> bool {
        fn go(f: &Formula, v: &str, negated: bool) -> bool {
            match f {
                Bottom => true,
                Var(w) => w != v || !negated,
                Neg(a) => go(a, v, !negated),
                Or(a, b) => go(a, v, negated) && go(b, v, negated),
                DiaF(a) | DiaB(a) => go(a, v, negated),
                Sharp(_, args) => args.iter().all(|a| go(a, v, negated)),
            }
        }
        go(self, v, false)
    }

    /// Every occurrence of `v` has a modal ancestor.
    pub fn is_guarded_in(&self, v: &str) -> bool {
        match self {
            Var(w) => w != v,
            DiaF(_) | DiaB(_) => true,
            other => other.children().iter().all(|c| c.is_guarded_in(v)),
        }
    }
}

impl From<&str> for Formula {
    fn from(v: &str) -> Formula {
        Formula::var(v)
    }
}

/// Prints the concrete syntax, folding `⊤`, `∧` and `□` back into their
/// abbreviations. The output parses back to the same primitive formula.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, 0, f)
    }
}

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNARY: u8 = 3;

fn write_prec(phi: &Formula, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let (prec, body): (u8, Box<dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result + '_>) = if phi.is_top() {
        (PREC_UNARY, Box::new(|f| f.write_str("T")))
    } else if let Some((dir, a)) = phi.as_box() {
        (
            PREC_UNARY,
            Box::new(move |f| {
                write!(f, "[{dir}]")?;
                write_prec(a, PREC_UNARY, f)
            }),
        )
    } else if let Some((a, b)) = phi.as_and() {
        (
            PREC_AND,
            Box::new(move |f| {
                write_prec(a, PREC_AND, f)?;
                f.write_str(" & ")?;
                write_prec(b, PREC_AND + 1, f)
            }),
        )
    } else {
        match phi {
            Bottom => (PREC_UNARY, Box::new(|f| f.write_str("_|_"))),
            Var(v) => (PREC_UNARY, Box::new(move |f| f.write_str(v))),
            Neg(a) => (
                PREC_UNARY,
                Box::new(move |f| {
                    f.write_str("~")?;
                    write_prec(a, PREC_UNARY, f)
                }),
            ),
            Or(a, b) => (
                PREC_OR,
                Box::new(move |f| {
                    write_prec(a, PREC_OR, f)?;
                    f.write_str(" | ")?;
                    write_prec(b, PREC_OR + 1, f)
                }),
            ),
            DiaF(a) | DiaB(a) => {
                let d = if matches!(phi, DiaF(_)) { "F" } else { "B" };
                (
                    PREC_UNARY,
                    Box::new(move |f| {
                        write!(f, "<{d}>")?;
                        write_prec(a, PREC_UNARY, f)
                    }),
                )
            }
            Sharp(c, args) => (
                PREC_UNARY,
                Box::new(move |f| {
                    write!(f, "#{}", c.name())?;
                    if !args.is_empty() {
                        f.write_str("(")?;
                        for (i, a) in args.iter().enumerate() {
                            if i > 0 {
                                f.write_str(", ")?;
                            }
                            write_prec(a, 0, f)?;
                        }
                        f.write_str(")")?;
                    }
                    Ok(())
                }),
            ),
        }
    };
    if prec < ctx {
        f.write_str("(")?;
        body(f)?;
        f.write_str(")")
    } else {
        body(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positivity() {
        let x = || Formula::var("x");
        assert!(Formula::neg(Formula::neg(x())).is_positive_in("x"));
        assert!(!Formula::or(Formula::neg(x()), Formula::var("q")).is_positive_in("x"));
        assert!(Formula::dia_f(Formula::neg(Formula::neg(x()))).is_positive_in("x"));
        assert!(Formula::box_f(x()).is_positive_in("x"));
    }

    #[test]
    fn empty_nabla_is_box_bottom() {
        assert_eq!(Formula::nabla(Dir::F, vec![]), Formula::box_f(Formula::Bottom));
        assert_eq!(Formula::nabla(Dir::B, vec![]), Formula::box_b(Formula::Bottom));
    }

    #[test]
    fn display_folds_abbreviations() {
        let p = Formula::var("p");
        let q = Formula::var("q");
        assert_eq!(Formula::and(p.clone(), q.clone()).to_string(), "p & q");
        assert_eq!(Formula::box_f(p.clone()).to_string(), "[F]p");
        assert_eq!(
            Formula::or(p.clone(), Formula::or(q.clone(), p.clone())).to_string(),
            "p | (q | p)"
        );
        assert_eq!(Formula::top().to_string(), "T");
    }

    #[test]
    fn guardedness_on_formulas() {
        let x = Formula::var("x");
        assert!(Formula::or(Formula::var("q1"), Formula::dia_f(x.clone())).is_guarded_in("x"));
        assert!(!Formula::or(x.clone(), Formula::dia_f(x)).is_guarded_in("x"));
    }
}
