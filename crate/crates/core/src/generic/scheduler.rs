//! Fair construction of chains approximating the generic model.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::chain::{Chain, Operation, StepParameters};
use crate::class::{new_ids, ClassTag, GuestPair};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::structure::{all_embeddings, Embedding, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScheduleBudget {
    /// Largest guest `B` scheduled.
    pub max_guest_size: usize,
    /// Successor stages to build at most.
    pub steps: usize,
    /// Services per (pair, embedding) entry.
    pub repetitions: usize,
}

impl Default for ScheduleBudget {
    fn default() -> Self {
        ScheduleBudget {
            max_guest_size: 2,
            steps: 20,
            repetitions: 1,
        }
    }
}

struct Entry {
    pair: usize,
    embedding: Embedding,
    served: usize,
}

fn discover(
    pairs: &[GuestPair],
    stage: &Structure,
    prev: Option<&Structure>,
    rng: &mut ChaCha8Rng,
    limits: &Limits,
) -> Result<Vec<Entry>> {
    let fresh = prev.map(|p| new_ids(p, stage));
    let mut batch = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        for e in all_embeddings(&p.a, stage, &Default::default(), limits)? {
            let is_new = match &fresh {
                None => true,
                Some(f) => e.map.values().any(|v| f.contains(v)),
            };
            if is_new {
                batch.push(Entry {
                    pair: i,
                    embedding: e,
                    served: 0,
                });
            }
        }
    }
    batch.shuffle(rng);
    Ok(batch)
}

/// Builds a chain from `seed_structure` by serving a round-robin queue of
/// (good pair, embedding of its base) entries.
///
/// The pairs are every good pair of the class with `|B| <= max_guest_size`
/// up to isomorphism, trivial ones excluded. Each service amalgamates `B`
/// over the embedded copy of `A` and sends the entry to the back of the
/// queue until it has been served `repetitions` times; embeddings that use
/// elements of the new stage join the back of the queue. Each batch of new
/// entries is shuffled by a generator seeded with `seed`, which is the only
/// source of variation between runs.
pub fn build_generic_chain(
    class: ClassTag,
    seed_structure: Structure,
    budget: ScheduleBudget,
    seed: u64,
    limits: &Limits,
) -> Result<Chain> {
    if budget.max_guest_size == 0 || budget.repetitions == 0 {
        return Err(Error::Invalid("maxGuestSize and repetitions must be positive".into()));
    }
    let mut chain = Chain::new(class, seed_structure)?;
    if budget.steps == 0 {
        return Ok(chain);
    }
    let pairs = class.good_pairs(budget.max_guest_size, limits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queue: VecDeque<Entry> = discover(&pairs, chain.last(), None, &mut rng, limits)?.into();
    while chain.len() <= budget.steps {
        let Some(mut entry) = queue.pop_front() else { break };
        let pair = pairs[entry.pair].clone();
        let prev = chain.last().clone();
        chain.step(
            Operation::Amalgamate,
            pair,
            StepParameters {
                embedding: entry.embedding.clone(),
                ..Default::default()
            },
        )?;
        let v = class.check(chain.last())?;
        if !v.valid {
            return Err(Error::NotInClass {
                class: class.to_string(),
                detail: format!("stage {}: {}", chain.len() - 1, v.first_detail()),
            });
        }
        entry.served += 1;
        if entry.served < budget.repetitions {
            queue.push_back(entry);
        }
        queue.extend(discover(&pairs, chain.last(), Some(&prev), &mut rng, limits)?);
    }
    Ok(chain)
}
