//! The amalgamation classes chains can be built in.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::combinatorics::subsets;
use crate::error::Result;
use crate::knight::{self, Amalgam};
use crate::limits::Limits;
use crate::merger::projection;
use crate::structure::{isomorphic, search_maps, ElementId, Embedding, MapKind, RelationDecl, Signature, Structure, ANY_SORT};
use crate::verdict::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    #[serde(rename = "k0")]
    K0,
    #[serde(rename = "k1")]
    K1,
    #[serde(rename = "k0-prime")]
    KPrime0,
    #[serde(rename = "projection")]
    Projection,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassTag::K0 => "k0",
            ClassTag::K1 => "k1",
            ClassTag::KPrime0 => "k0-prime",
            ClassTag::Projection => "projection",
        })
    }
}

/// An extension `a ⊆ b` on shared ids, the shape a chain step amalgamates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuestPair {
    pub a: Structure,
    pub b: Structure,
}

const BASE_MARK: &str = "__base";

impl ClassTag {
    pub fn parse(name: &str) -> Option<ClassTag> {
        match name {
            "k0" | "knight" => Some(ClassTag::K0),
            "k1" | "knight-u" => Some(ClassTag::K1),
            "k0-prime" | "knight-q" => Some(ClassTag::KPrime0),
            "projection" => Some(ClassTag::Projection),
            _ => None,
        }
    }

    pub fn signature(self) -> Arc<Signature> {
        match self {
            ClassTag::K0 => knight::knight_signature(),
            ClassTag::K1 => knight::knight_u_signature(),
            ClassTag::KPrime0 => knight::knight_q_signature(),
            ClassTag::Projection => projection::projection_signature(),
        }
    }

    pub fn check(self, s: &Structure) -> Result<Verdict> {
        match self {
            ClassTag::K0 => knight::check_k0(s),
            ClassTag::K1 => knight::check_k1(s),
            ClassTag::KPrime0 => knight::check_relativized(s),
            ClassTag::Projection => projection::check_projection(s, 1),
        }
    }

    pub fn amalgamate(
        self,
        a: &Structure,
        b: &Structure,
        c: &Structure,
        eab: &Embedding,
        eac: &Embedding,
    ) -> Result<Amalgam> {
        match self {
            ClassTag::K0 => knight::disjoint_amalgam_k0(a, b, c, eab, eac),
            ClassTag::K1 => knight::disjoint_amalgam_k1(a, b, c, eab, eac),
            ClassTag::KPrime0 => knight::disjoint_amalgam_kprime0(a, b, c, eab, eac),
            ClassTag::Projection => projection::amalgamate_projection(a, b, c, eab, eac),
        }
    }

    /// `a` sits inside `b` on the same ids and, for the knight classes, `b`
    /// adds at least as many X as Y elements.
    pub fn is_good_pair(self, a: &Structure, b: &Structure) -> Result<bool> {
        match self {
            ClassTag::Projection => Ok(Embedding::identity(a).is_valid(a, b)),
            _ => knight::is_good_pair(a, b),
        }
    }

    /// Every member with at most `max_size` elements, one per isomorphism type.
    pub fn enumerate(self, max_size: usize) -> Vec<Structure> {
        match self {
            ClassTag::K0 => knight::enumerate_k0(max_size),
            ClassTag::K1 => knight::enumerate_k1(max_size),
            ClassTag::KPrime0 => knight::enumerate_kprime0(max_size),
            ClassTag::Projection => projection::enumerate_projection(max_size),
        }
    }

    /// Every good pair `(A, B)` with `A != B` and `|B| <= max_size`, up to
    /// isomorphism of pairs.
    pub fn good_pairs(self, max_size: usize, limits: &Limits) -> Result<Vec<GuestPair>> {
        let mut out: Vec<GuestPair> = Vec::new();
        let mut marked: Vec<Structure> = Vec::new();
        for b in self.enumerate(max_size) {
            let ids: Vec<ElementId> = b.ids().collect();
            for subset in subsets(&ids) {
                if subset.len() == ids.len() {
                    continue;
                }
                let a = b.induced(&subset.iter().copied().collect());
                if !self.check(&a)?.valid || !self.is_good_pair(&a, &b)? {
                    continue;
                }
                let m = mark_pair(&a, &b);
                let mut dup = false;
                for k in &marked {
                    if isomorphic(k, &m, limits)?.is_some() {
                        dup = true;
                        break;
                    }
                }
                if !dup {
                    marked.push(m);
                    out.push(GuestPair { a, b: b.clone() });
                }
            }
        }
        Ok(out)
    }
}

/// `b` with `a`'s elements flagged by an extra unary relation, so that
/// isomorphisms of the result are exactly isomorphisms of pairs.
pub fn mark_pair(a: &Structure, b: &Structure) -> Structure {
    let sig = b.signature();
    let mut rels = sig.relations().to_vec();
    rels.push(RelationDecl::new(BASE_MARK, &[ANY_SORT]));
    let marked = Arc::new(
        Signature::new(sig.sorts().to_vec(), rels, sig.ordered().to_vec()).expect("extra relation name is unused"),
    );
    let mut out = b.expand(marked).expect("supersignature");
    for e in a.ids() {
        out.insert_tuple(BASE_MARK, vec![e]).expect("a inside b");
    }
    out
}

/// Every isomorphism between two pairs: maps `b1 -> b2` carrying `a1` onto `a2`.
pub fn pair_isomorphisms(p1: &GuestPair, p2: &GuestPair, limits: &Limits) -> Result<Vec<Embedding>> {
    let (m1, m2) = (mark_pair(&p1.a, &p1.b), mark_pair(&p2.a, &p2.b));
    let mut out = Vec::new();
    search_maps(&m1, &m2, MapKind::Isomorphism, &Default::default(), limits, |e| {
        out.push(e);
        std::ops::ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Ids of `s` not present in `old`.
pub fn new_ids(old: &Structure, s: &Structure) -> BTreeSet<ElementId> {
    s.ids().filter(|e| !old.contains(*e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k0_pairs_up_to_two() {
        // (0,{x}), (0,{x,x'}), (0,{x,y}), ({x},{x,x'})
        let pairs = ClassTag::K0.good_pairs(2, &Limits::default()).unwrap();
        assert_eq!(pairs.len(), 4);
    }

    #[test]
    fn tags_round_trip() {
        for t in [ClassTag::K0, ClassTag::K1, ClassTag::KPrime0, ClassTag::Projection] {
            assert_eq!(ClassTag::parse(&t.to_string()), Some(t));
            let j = serde_json::to_string(&t).unwrap();
            assert_eq!(serde_json::from_str::<ClassTag>(&j).unwrap(), t);
        }
    }
}
