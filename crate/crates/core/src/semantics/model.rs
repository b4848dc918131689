use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SemanticsError;
use crate::bitset::BitSet;

/// Finite Kripke model `(W, R, V)` with `W = {0..n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    n: usize,
    succ: Vec<BitSet>,
    pred: Vec<BitSet>,
    /// Bit masks of `succ`/`pred`, filled when `n <= 64`.
    succ_mask: Vec<u64>,
    pred_mask: Vec<u64>,
    valuation: BTreeMap<String, BitSet>,
    value_mask: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    states: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    valuation: BTreeMap<String, Vec<usize>>,
}

impl KripkeModel {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        valuation: impl IntoIterator<Item = (String, Vec<usize>)>,
    ) -> Result<Self, SemanticsError> {
        if n == 0 {
            return Err(SemanticsError::Model("a model needs at least one state".into()));
        }
        let mut succ = vec![BitSet::new(n); n];
        let mut pred = vec![BitSet::new(n); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(SemanticsError::Model(format!("edge ({a}, {b}) out of range")));
            }
            succ[a].insert(b);
            pred[b].insert(a);
        }
        let mut val = BTreeMap::new();
        for (p, states) in valuation {
            if let Some(&s) = states.iter().find(|&&s| s >= n) {
                return Err(SemanticsError::Model(format!("state {s} in V({p}) out of range")));
            }
            val.insert(p, BitSet::from_indices(n, states));
        }
        Ok(Self::assemble(n, succ, pred, val))
    }

    fn assemble(n: usize, succ: Vec<BitSet>, pred: Vec<BitSet>, valuation: BTreeMap<String, BitSet>) -> Self {
        let mask = |v: &[BitSet]| -> Vec<u64> {
            if n <= 64 {
                v.iter().map(|s| s.iter().fold(0u64, |m, i| m | 1 << i)).collect()
            } else {
                Vec::new()
            }
        };
        let value_mask = if n <= 64 {
            valuation
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().fold(0u64, |m, i| m | 1 << i)))
                .collect()
        } else {
            BTreeMap::new()
        };
        KripkeModel {
            n,
            value_mask,
            succ_mask: mask(&succ),
            pred_mask: mask(&pred),
            succ,
            pred,
            valuation,
        }
    }

    /// Model from an adjacency bit code (bit `i*n + j` is the edge `i → j`)
    /// and per-variable state masks. Requires `n <= 8`.
    pub fn from_codes(n: usize, edge_code: u64, vars: &[(&str, u64)]) -> Self {
        let mut succ = vec![BitSet::new(n); n];
        let mut pred = vec![BitSet::new(n); n];
        for i in 0..n {
            for j in 0..n {
                if edge_code >> (i * n + j) & 1 == 1 {
                    succ[i].insert(j);
                    pred[j].insert(i);
                }
            }
        }
        let valuation = vars
            .iter()
            .map(|(p, m)| {
                (
                    p.to_string(),
                    BitSet::from_indices(n, (0..n).filter(|i| m >> i & 1 == 1)),
                )
            })
            .collect();
        Self::assemble(n, succ, pred, valuation)
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn successors(&self, s: usize) -> &BitSet {
        &self.succ[s]
    }

    pub fn predecessors(&self, s: usize) -> &BitSet {
        &self.pred[s]
    }

    pub(crate) fn succ_masks(&self) -> &[u64] {
        &self.succ_mask
    }

    pub(crate) fn pred_masks(&self) -> &[u64] {
        &self.pred_mask
    }

    pub(crate) fn value_mask(&self, p: &str) -> u64 {
        self.value_mask.get(p).copied().unwrap_or(0)
    }

    /// `V(p)`, empty for unmentioned variables.
    pub fn value(&self, p: &str) -> BitSet {
        self.valuation.get(p).cloned().unwrap_or_else(|| BitSet::new(self.n))
    }

    pub fn value_ref(&self, p: &str) -> Option<&BitSet> {
        self.valuation.get(p)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| self.succ[i].iter().map(move |j| (i, j)))
            .collect()
    }

    pub fn valuation(&self) -> &BTreeMap<String, BitSet> {
        &self.valuation
    }

    pub fn to_json(&self) -> String {
        let m = ModelJson {
            states: self.n,
            edges: self.edges().into_iter().map(|(a, b)| [a, b]).collect(),
            valuation: self.valuation.iter().map(|(k, v)| (k.clone(), v.to_vec())).collect(),
        };
        serde_json::to_string(&m).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SemanticsError> {
        let m: ModelJson = serde_json::from_str(text).map_err(|e| SemanticsError::Model(e.to_string()))?;
        KripkeModel::new(m.states, m.edges.into_iter().map(|[a, b]| (a, b)), m.valuation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let m = KripkeModel::new(2, [(0, 1)], [("p".to_string(), vec![1])]).unwrap();
        let text = m.to_json();
        assert_eq!(text, r#"{"states":2,"edges":[[0,1]],"valuation":{"p":[1]}}"#);
        assert_eq!(KripkeModel::from_json(&text).unwrap(), m);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(KripkeModel::new(0, [], []).is_err());
        assert!(KripkeModel::new(2, [(0, 2)], []).is_err());
        assert!(KripkeModel::from_json(r#"{"states":1,"edges":[],"valuation":{"p":[3]}}"#).is_err());
    }

    #[test]
    fn codes() {
        let m = KripkeModel::from_codes(2, 0b0010, &[("p", 0b10)]);
        assert_eq!(m.edges(), vec![(0, 1)]);
        assert_eq!(m.value("p").to_vec(), vec![1]);
    }
}
