//! Finite evidence for richness and homogeneity of a chain.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::chain::{Chain, Operation};
use crate::class::{new_ids, pair_isomorphisms, GuestPair};
use crate::error::Result;
use crate::limits::{GuardExceeded, Limits};
use crate::structure::{
    all_embeddings, automorphism_extending, find_embedding, search_maps, ElementId, Embedding, MapKind, Structure,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RichnessItem {
    pub pair: usize,
    /// First stage containing the image of the embedding.
    pub stage: usize,
    pub embedding: Embedding,
    /// Least stage at or after `stage` where B embeds over the embedded A.
    pub served_at: Option<usize>,
    /// Ledger steps that amalgamated this pair over this embedding.
    pub services: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RichnessReport {
    pub pair_bound: usize,
    pub pairs: Vec<GuestPair>,
    pub items: Vec<RichnessItem>,
    pub unserved: usize,
}

impl RichnessReport {
    pub fn all_served(&self) -> bool {
        self.unserved == 0
    }

    /// Fewest ledger services over all items, `None` without items.
    pub fn min_services(&self) -> Option<usize> {
        self.items.iter().map(|i| i.services).min()
    }
}

fn guard(count: usize, limits: &Limits) -> Result<()> {
    if count > limits.certificate_items {
        return Err(GuardExceeded {
            what: "certificate items",
            limit: limits.certificate_items as u64,
        }
        .into());
    }
    Ok(())
}

/// For every good pair with `|B| <= pair_bound` and every embedding of its
/// base into a stage, the least later stage realizing `B` over it.
pub fn richness_certificate(chain: &Chain, pair_bound: usize, limits: &Limits) -> Result<RichnessReport> {
    let mut report = RichnessReport {
        pair_bound,
        pairs: Vec::new(),
        items: Vec::new(),
        unserved: 0,
    };
    if pair_bound == 0 {
        return Ok(report);
    }
    report.pairs = chain.class.good_pairs(pair_bound, limits)?;
    // ledger amalgamations matched against each pair up to isomorphism
    let mut matches: Vec<Vec<(Embedding, Vec<Embedding>)>> = vec![Vec::new(); report.pairs.len()];
    for entry in chain.ledger.iter().filter(|e| e.operation == Operation::Amalgamate) {
        let lp = GuestPair {
            a: entry.pair_a.clone(),
            b: entry.pair_b.clone(),
        };
        for (i, p) in report.pairs.iter().enumerate() {
            if lp.b.len() != p.b.len() || lp.a.len() != p.a.len() {
                continue;
            }
            let isos = pair_isomorphisms(&lp, p, limits)?;
            if !isos.is_empty() {
                matches[i].push((entry.parameters.embedding.clone(), isos));
            }
        }
    }
    for (i, p) in report.pairs.iter().enumerate() {
        for (s, stage) in chain.stages.iter().enumerate() {
            let fresh: Option<BTreeSet<ElementId>> = (s > 0).then(|| new_ids(&chain.stages[s - 1], stage));
            for e in all_embeddings(&p.a, stage, &Default::default(), limits)? {
                if let Some(f) = &fresh {
                    if !e.map.values().any(|v| f.contains(v)) {
                        continue;
                    }
                }
                guard(report.items.len() + 1, limits)?;
                let mut served_at = None;
                for (j, later) in chain.stages.iter().enumerate().skip(s) {
                    if find_embedding(&p.b, later, &e.map, limits)?.is_some() {
                        served_at = Some(j);
                        break;
                    }
                }
                let services = matches[i]
                    .iter()
                    .filter(|(le, isos)| {
                        isos.iter()
                            .any(|phi| le.map.iter().all(|(a, v)| e.apply(phi.apply(*a).unwrap()) == Some(*v)))
                    })
                    .count();
                if served_at.is_none() {
                    report.unserved += 1;
                }
                report.items.push(RichnessItem {
                    pair: i,
                    stage: s,
                    embedding: e,
                    served_at,
                    services,
                });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HomogeneityItem {
    pub stage: usize,
    /// Isomorphism between two class-closed substructures of the stage.
    pub map: Embedding,
    /// Stage into which the whole stage embeds extending `map`.
    pub extended_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HomogeneityReport {
    pub part_bound: usize,
    pub strict: bool,
    pub items: Vec<HomogeneityItem>,
    /// Successes per distance between the stage and the stage that extended the map.
    pub by_gap: BTreeMap<usize, usize>,
    pub failures: usize,
}

/// Extends a partial map on stage `stage` to an embedding of that stage into
/// a stage `j >= stage`, least `j` first; in strict mode only automorphisms
/// of the stage itself count.
pub fn extend_partial_map(
    chain: &Chain,
    stage: usize,
    map: &Embedding,
    strict: bool,
    limits: &Limits,
) -> Result<Option<(usize, Embedding)>> {
    let s = &chain.stages[stage];
    if strict {
        return Ok(automorphism_extending(s, &map.map, limits)?.map(|e| (stage, e)));
    }
    for (j, later) in chain.stages.iter().enumerate().skip(stage) {
        if let Some(e) = find_embedding(s, later, &map.map, limits)? {
            return Ok(Some((j, e)));
        }
    }
    Ok(None)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// For every stage, every pair of isomorphic class-closed substructures of
/// size at most `part_bound` (a part paired with itself included) and every
/// isomorphism between them, searches for an extension.
pub fn homogeneity_check(chain: &Chain, part_bound: usize, strict: bool, limits: &Limits) -> Result<HomogeneityReport> {
    let mut report = HomogeneityReport {
        part_bound,
        strict,
        items: Vec::new(),
        by_gap: BTreeMap::new(),
        failures: 0,
    };
    for (i, stage) in chain.stages.iter().enumerate() {
        let ids: Vec<ElementId> = stage.ids().collect();
        let mut parts: Vec<Structure> = Vec::new();
        for k in 1..=part_bound.min(ids.len()) {
            for c in combinations(ids.len(), k) {
                guard(parts.len() + 1, limits)?;
                let sub = stage.induced(&c.iter().map(|&j| ids[j]).collect());
                if chain.class.check(&sub)?.valid {
                    parts.push(sub);
                }
            }
        }
        for p in &parts {
            for q in &parts {
                if p.len() != q.len() {
                    continue;
                }
                let mut maps = Vec::new();
                search_maps(p, q, MapKind::Isomorphism, &Default::default(), limits, |e| {
                    maps.push(e);
                    std::ops::ControlFlow::Continue(())
                })?;
                for map in maps {
                    guard(report.items.len() + 1, limits)?;
                    let found = extend_partial_map(chain, i, &map, strict, limits)?;
                    match &found {
                        Some((j, _)) => *report.by_gap.entry(j - i).or_default() += 1,
                        None => report.failures += 1,
                    }
                    report.items.push(HomogeneityItem {
                        stage: i,
                        map,
                        extended_at: found.map(|(j, _)| j),
                    });
                }
            }
        }
    }
    Ok(report)
}
