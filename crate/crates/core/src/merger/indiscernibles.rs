//! Finite checks of absolute indiscernibility along a chain.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::projection::{fiber_sizes, projection_with_fibers, P};
use crate::class::{ClassTag, GuestPair};
use crate::combinatorics::permutations;
use crate::error::{Error, Result};
use crate::generic::{Chain, Operation, StepParameters};
use crate::limits::Limits;
use crate::structure::{automorphism_extending, find_embedding, ElementId, Embedding, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fate {
    /// Extends to an automorphism of its own stage.
    Automorphism,
    /// Extends to an embedding of the stage into a later one.
    LaterStage,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PermutationOutcome {
    pub stage: usize,
    /// Images of the stage's indiscernibles, listed in ascending id order.
    pub images: Vec<ElementId>,
    pub fate: Fate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extended_at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Embedding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageSummary {
    pub stage: usize,
    pub elements: Vec<ElementId>,
    pub checked: usize,
    pub automorphisms: usize,
    pub later_stage: usize,
    pub failed: usize,
    pub sampled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndiscernibleReport {
    pub predicate: String,
    /// Strict mode accepts automorphisms of the stage only.
    pub strict: bool,
    pub sampled: bool,
    pub sample_seed: Option<u64>,
    pub stages: Vec<StageSummary>,
    pub outcomes: Vec<PermutationOutcome>,
}

impl IndiscernibleReport {
    pub fn all_extended(&self) -> bool {
        self.stages.iter().all(|s| s.failed == 0)
    }

    pub fn stage(&self, i: usize) -> Option<&StageSummary> {
        self.stages.iter().find(|s| s.stage == i)
    }
}

/// Elements of the sort or unary relation `pred`, ascending.
pub fn predicate_members(s: &Structure, pred: &str) -> Result<Vec<ElementId>> {
    let sig = s.signature();
    if sig.sort_index(pred).is_some() {
        return Ok(s.elements_of_sort(pred));
    }
    match sig.relation(pred) {
        Some(r) if !r.graded && r.profile.len() == 1 => {
            Ok(s.tuples(pred).into_iter().flatten().map(|t| t[0]).collect())
        }
        _ => Err(Error::Invalid(format!("`{pred}` is not a sort or unary relation"))),
    }
}

fn permutation_list(n: usize, seed: u64, limits: &Limits) -> (Vec<Vec<usize>>, bool) {
    let base: Vec<usize> = (0..n).collect();
    if n <= limits.exhaustive_permutations {
        return (permutations(&base), false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![base.clone()];
    while out.len() < limits.permutation_samples {
        let mut p = base.clone();
        p.shuffle(&mut rng);
        out.push(p);
    }
    (out, true)
}

/// For every stage and every permutation of `pred` at that stage, looks for
/// an automorphism of the stage extending it and, outside strict mode,
/// for an embedding of the stage into a later stage extending it.
/// Beyond `limits.exhaustive_permutations` elements a seeded sample is used.
pub fn check_absolute_indiscernibles(
    chain: &Chain,
    pred: &str,
    strict: bool,
    seed: u64,
    limits: &Limits,
) -> Result<IndiscernibleReport> {
    let mut report = IndiscernibleReport {
        predicate: pred.to_string(),
        strict,
        sampled: false,
        sample_seed: None,
        stages: Vec::new(),
        outcomes: Vec::new(),
    };
    for (i, stage) in chain.stages.iter().enumerate() {
        let elements = predicate_members(stage, pred)?;
        let (perms, sampled) = permutation_list(elements.len(), seed, limits);
        if sampled {
            report.sampled = true;
            report.sample_seed = Some(seed);
        }
        let mut summary = StageSummary {
            stage: i,
            elements: elements.clone(),
            checked: 0,
            automorphisms: 0,
            later_stage: 0,
            failed: 0,
            sampled,
        };
        for p in perms {
            let pinned: BTreeMap<ElementId, ElementId> =
                elements.iter().zip(&p).map(|(&e, &j)| (e, elements[j])).collect();
            let images: Vec<ElementId> = p.iter().map(|&j| elements[j]).collect();
            let mut outcome = PermutationOutcome {
                stage: i,
                images,
                fate: Fate::Failed,
                extended_at: None,
                witness: None,
            };
            if let Some(w) = automorphism_extending(stage, &pinned, limits)? {
                outcome.fate = Fate::Automorphism;
                outcome.extended_at = Some(i);
                outcome.witness = Some(w);
            } else if !strict {
                for (j, later) in chain.stages.iter().enumerate().skip(i + 1) {
                    if let Some(w) = find_embedding(stage, later, &pinned, limits)? {
                        outcome.fate = Fate::LaterStage;
                        outcome.extended_at = Some(j);
                        outcome.witness = Some(w);
                        break;
                    }
                }
            }
            summary.checked += 1;
            match outcome.fate {
                Fate::Automorphism => summary.automorphisms += 1,
                Fate::LaterStage => summary.later_stage += 1,
                Fate::Failed => summary.failed += 1,
            }
            report.outcomes.push(outcome);
        }
        report.stages.push(summary);
    }
    Ok(report)
}

/// Projection chain that adds one preimage at a time to the smallest fiber
/// (lowest id first) until all fibers are equal. Each step amalgamates the
/// pair (one preimage, two preimages) into the stage.
pub fn fiber_equalizing_chain(start: &Structure) -> Result<Chain> {
    let mut chain = Chain::new(ClassTag::Projection, start.clone())?;
    let pair = GuestPair {
        a: projection_with_fibers(&[1]),
        b: projection_with_fibers(&[2]),
    };
    loop {
        let stage = chain.last();
        let fibers = fiber_sizes(stage);
        let (Some(&lo), Some(&hi)) = (fibers.values().min(), fibers.values().max()) else {
            break;
        };
        if lo == hi {
            break;
        }
        let b = *fibers.iter().find(|(_, &n)| n == lo).unwrap().0;
        let a = stage
            .tuples(P)
            .into_iter()
            .flatten()
            .find(|t| t[1] == b)
            .map(|t| t[0])
            .ok_or_else(|| Error::Invalid(format!("fiber of {b} is empty")))?;
        let parameters = StepParameters {
            embedding: Embedding::from_pairs([(0, b), (1, a)]),
            ..Default::default()
        };
        chain.step(Operation::Amalgamate, pair.clone(), parameters)?;
    }
    Ok(chain)
}
