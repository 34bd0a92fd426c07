use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{ElementId, Structure};

/// A map between element ids, meant to be an embedding of one structure
/// into another. It is only a witness until [`Embedding::check`] accepts it
/// against a concrete source and target.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding {
    pub map: BTreeMap<ElementId, ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingViolation {
    NotTotal(ElementId),
    UnknownTarget(ElementId),
    NotInjective(ElementId),
    SortMismatch(ElementId),
    OrderMismatch(ElementId, ElementId),
    TupleNotPreserved(String, Vec<ElementId>),
    TupleNotReflected(String, Vec<ElementId>),
    SignatureMismatch,
}

impl fmt::Display for EmbeddingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use EmbeddingViolation::*;
        match self {
            NotTotal(e) => write!(f, "element {e} has no image"),
            UnknownTarget(e) => write!(f, "element {e} is mapped outside the target"),
            NotInjective(e) => write!(f, "image of {e} is shared"),
            SortMismatch(e) => write!(f, "element {e} changes sort"),
            OrderMismatch(a, b) => write!(f, "order between {a} and {b} not preserved"),
            TupleNotPreserved(r, t) => write!(f, "{r}{t:?} not preserved"),
            TupleNotReflected(r, t) => write!(f, "{r}{t:?} in the target has no preimage"),
            SignatureMismatch => write!(f, "source and target signatures differ"),
        }
    }
}

impl Embedding {
    pub fn new(map: BTreeMap<ElementId, ElementId>) -> Self {
        Embedding { map }
    }

    pub fn identity(s: &Structure) -> Self {
        Embedding {
            map: s.ids().map(|e| (e, e)).collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (ElementId, ElementId)>) -> Self {
        Embedding {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn apply(&self, e: ElementId) -> Option<ElementId> {
        self.map.get(&e).copied()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    pub fn image(&self) -> BTreeSet<ElementId> {
        self.map.values().copied().collect()
    }

    pub fn inverse(&self) -> Embedding {
        Embedding {
            map: self.map.iter().map(|(&a, &b)| (b, a)).collect(),
        }
    }

    /// `other ∘ self`: first `self`, then `other`. Elements `other` does not map are dropped.
    pub fn then(&self, other: &Embedding) -> Embedding {
        Embedding {
            map: self
                .map
                .iter()
                .filter_map(|(&a, b)| other.map.get(b).map(|&c| (a, c)))
                .collect(),
        }
    }

    /// Verifies the embedding invariant: total, injective, sort- and
    /// order-preserving, and every relation preserved and reflected.
    pub fn check(&self, source: &Structure, target: &Structure) -> Result<(), EmbeddingViolation> {
        if source.signature() != target.signature() {
            return Err(EmbeddingViolation::SignatureMismatch);
        }
        let mut seen = BTreeSet::new();
        for (e, s) in source.elements() {
            let f = self.apply(e).ok_or(EmbeddingViolation::NotTotal(e))?;
            let t = target.sort_of(f).ok_or(EmbeddingViolation::UnknownTarget(e))?;
            if t != s {
                return Err(EmbeddingViolation::SortMismatch(e));
            }
            if !seen.insert(f) {
                return Err(EmbeddingViolation::NotInjective(e));
            }
        }
        if self.map.len() != source.len() {
            let extra = self.map.keys().find(|k| !source.contains(**k)).copied();
            return Err(EmbeddingViolation::NotTotal(extra.unwrap_or_default()));
        }
        let ranks = target.ranks();
        for order in source.orders().values() {
            for w in order.windows(2) {
                if ranks[&self.map[&w[0]]] >= ranks[&self.map[&w[1]]] {
                    return Err(EmbeddingViolation::OrderMismatch(w[0], w[1]));
                }
            }
        }
        let inverse = self.inverse();
        for (r, decl) in source.signature().relations().iter().enumerate() {
            let target_rel = target.relation_tuples(r);
            for t in source.relation_tuples(r) {
                let image: Vec<ElementId> = t.iter().map(|e| self.map[e]).collect();
                if !target_rel.contains(&image) {
                    return Err(EmbeddingViolation::TupleNotPreserved(decl.name.clone(), t.clone()));
                }
            }
            let source_rel = source.relation_tuples(r);
            for t in target_rel {
                if t.iter().all(|e| seen.contains(e)) {
                    let pre: Vec<ElementId> = t.iter().map(|e| inverse.map[e]).collect();
                    if !source_rel.contains(&pre) {
                        return Err(EmbeddingViolation::TupleNotReflected(decl.name.clone(), t.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, source: &Structure, target: &Structure) -> bool {
        self.check(source, target).is_ok()
    }
}
