use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::indiscernibles::predicate_members;
use super::merge::{merge_structures, MergerSpec};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::structure::{ef_game, isomorphic, EfOutcome, ElementId, Player, Structure};
use crate::verdict::Verdict;

/// One side of a merger comparison: a host (usually a chain's final stage), its guest and the glue.
#[derive(Debug, Clone, Copy)]
pub struct MergerSide<'a> {
    pub host: &'a Structure,
    pub guest: &'a Structure,
    pub spec: &'a MergerSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MergerEquivalence {
    pub depth: usize,
    pub hosts: EfOutcome,
    pub mergers: EfOutcome,
}

impl MergerEquivalence {
    pub fn hosts_equivalent(&self) -> bool {
        self.hosts.winner == Player::Duplicator
    }

    pub fn mergers_equivalent(&self) -> bool {
        self.mergers.winner == Player::Duplicator
    }

    /// Equivalent hosts gave equivalent mergers.
    pub fn consistent(&self) -> bool {
        !self.hosts_equivalent() || self.mergers_equivalent()
    }
}

fn q_part(side: &MergerSide<'_>) -> Result<Structure> {
    let set: BTreeSet<ElementId> = match &side.spec.q {
        Some(q) => predicate_members(side.guest, q)?.into_iter().collect(),
        None => side.guest.ids().collect(),
    };
    Ok(side.guest.induced(&set))
}

/// Plays the depth-`depth` game on the two hosts and on the two mergers.
/// The guests must be isomorphic on their Q parts.
pub fn merger_equivalence(left: MergerSide<'_>, right: MergerSide<'_>, depth: usize, limits: &Limits) -> Result<MergerEquivalence> {
    if isomorphic(&q_part(&left)?, &q_part(&right)?, limits)?.is_none() {
        return Err(Error::Invalid("guests are not isomorphic on Q".into()));
    }
    let ml = merge_structures(left.host, left.guest, left.spec)?;
    let mr = merge_structures(right.host, right.guest, right.spec)?;
    let hosts = ef_game(left.host, right.host, depth, limits)?;
    let mergers = ef_game(&ml.structure, &mr.structure, depth, limits)?;
    Ok(MergerEquivalence { depth, hosts, mergers })
}

/// Guests indexed by host elements, each with a designated set of indiscernibles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedGuestFamily {
    /// Sort or unary relation naming the indiscernibles in every guest.
    pub predicate: String,
    pub guests: BTreeMap<ElementId, Structure>,
}

impl TaggedGuestFamily {
    pub fn new(predicate: &str) -> Self {
        TaggedGuestFamily {
            predicate: predicate.to_string(),
            guests: BTreeMap::new(),
        }
    }

    /// Adds `guest` at `index`, shifting its ids above everything already present.
    pub fn push_shifted(&mut self, index: ElementId, guest: &Structure) -> BTreeMap<ElementId, ElementId> {
        let base = self
            .guests
            .values()
            .filter_map(|g| g.max_id())
            .max()
            .map_or(0, |m| m + 1);
        let map: BTreeMap<ElementId, ElementId> = guest.ids().enumerate().map(|(i, e)| (e, base + i as ElementId)).collect();
        self.guests.insert(index, guest.relabel(&map));
        map
    }

    pub fn indiscernibles(&self, index: ElementId) -> Result<Vec<ElementId>> {
        let g = self
            .guests
            .get(&index)
            .ok_or_else(|| Error::Invalid(format!("no guest at {index}")))?;
        predicate_members(g, &self.predicate)
    }

    /// Guest domains are pairwise disjoint.
    pub fn check_disjoint(&self) -> Verdict {
        let mut v = Verdict::ok();
        let mut owner: BTreeMap<ElementId, ElementId> = BTreeMap::new();
        for (&u, g) in &self.guests {
            for e in g.ids() {
                if let Some(&w) = owner.get(&e) {
                    v.push("guest", format!("element {e} belongs to the guests at {w} and {u}"), vec![w, u, e]);
                } else {
                    owner.insert(e, u);
                }
            }
        }
        v
    }
}
