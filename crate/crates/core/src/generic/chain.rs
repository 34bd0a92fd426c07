//! Chains of structures with a ledger of the steps that produced them.

use serde::{Deserialize, Serialize};

use super::chain_amalgam::{chain_amalgam_step, extend_top};
use super::end_extension::end_extend_step;
use crate::class::{ClassTag, GuestPair};
use crate::error::{Error, Result};
use crate::structure::{ElementId, Embedding, Structure};
use crate::verdict::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    /// Disjoint amalgam of the stage with `pairB` over `pairA`.
    Amalgamate,
    /// Amalgam through a surrogate point, possibly with new X repair elements.
    ChainAmalgamate,
    /// A new top Y element and one new X.
    ExtendTop,
    /// A new top Y element outside Q, X unchanged.
    EndExtend,
}

impl Operation {
    /// Steps that must come from a good pair.
    pub fn is_amalgamation(self) -> bool {
        matches!(self, Operation::Amalgamate | Operation::ChainAmalgamate | Operation::ExtendTop)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct StepParameters {
    /// `pairA -> ` previous stage.
    pub embedding: Embedding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<ElementId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x_new: Vec<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct LedgerEntry {
    /// Index of the stage this step produced.
    pub stage: usize,
    pub pair_a: Structure,
    pub pair_b: Structure,
    pub operation: Operation,
    pub parameters: StepParameters,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chain {
    pub class: ClassTag,
    pub stages: Vec<Structure>,
    pub ledger: Vec<LedgerEntry>,
}

impl Chain {
    pub fn new(class: ClassTag, seed: Structure) -> Result<Chain> {
        let v = class.check(&seed)?;
        if !v.valid {
            return Err(Error::NotInClass {
                class: class.to_string(),
                detail: format!("seed: {}", v.first_detail()),
            });
        }
        Ok(Chain {
            class,
            stages: vec![seed],
            ledger: Vec::new(),
        })
    }

    pub fn last(&self) -> &Structure {
        self.stages.last().expect("chains are never empty")
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Runs one step on the final stage and records it.
    pub fn step(&mut self, operation: Operation, pair: GuestPair, parameters: StepParameters) -> Result<()> {
        let next = execute(self.class, self.last(), operation, &pair.a, &pair.b, &parameters)?;
        self.push(next, operation, pair, parameters);
        Ok(())
    }

    pub(crate) fn push(&mut self, stage: Structure, operation: Operation, pair: GuestPair, parameters: StepParameters) {
        self.stages.push(stage);
        self.ledger.push(LedgerEntry {
            stage: self.stages.len() - 1,
            pair_a: pair.a,
            pair_b: pair.b,
            operation,
            parameters,
        });
    }

    /// Re-executes every ledger entry from the first stage.
    pub fn replay(&self) -> Result<Chain> {
        let mut out = Chain::new(self.class, self.stages[0].clone())?;
        for entry in &self.ledger {
            if entry.stage != out.stages.len() {
                return Err(Error::Invalid(format!("ledger entry for stage {} out of sequence", entry.stage)));
            }
            let next = execute(
                self.class,
                out.last(),
                entry.operation,
                &entry.pair_a,
                &entry.pair_b,
                &entry.parameters,
            )?;
            out.push(
                next,
                entry.operation,
                GuestPair {
                    a: entry.pair_a.clone(),
                    b: entry.pair_b.clone(),
                },
                entry.parameters.clone(),
            );
        }
        Ok(out)
    }

    /// Checks every stage against the class, every inclusion, the ledger
    /// bookkeeping, good pairs and, by replay, that each stage is what its
    /// ledger entry produces.
    pub fn verify(&self) -> Result<Verdict> {
        let mut v = Verdict::ok();
        for (i, s) in self.stages.iter().enumerate() {
            let c = self.class.check(s)?;
            for viol in c.violations {
                v.push(&viol.axiom, format!("stage {i}: {}", viol.detail), viol.witnesses);
            }
        }
        for i in 1..self.stages.len() {
            let prev = &self.stages[i - 1];
            if let Err(e) = Embedding::identity(prev).check(prev, &self.stages[i]) {
                v.push("inclusion", format!("stage {} is not a substructure of stage {i}: {e}", i - 1), vec![]);
            }
        }
        if self.ledger.len() + 1 != self.stages.len() {
            v.push("ledger", "one ledger entry per successor stage expected", vec![]);
        }
        for entry in &self.ledger {
            if entry.operation.is_amalgamation() && !self.class.is_good_pair(&entry.pair_a, &entry.pair_b)? {
                v.push("good-pair", format!("ledger pair of stage {} is not a good pair", entry.stage), vec![]);
            }
        }
        if v.valid {
            match self.replay() {
                Ok(r) if r.stages == self.stages => {}
                Ok(_) => v.push("replay", "replaying the ledger gives different stages", vec![]),
                Err(e) => v.push("replay", format!("replay failed: {e}"), vec![]),
            }
        }
        Ok(v)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Chain> {
        let chain: Chain = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed chain file: {e}")))?;
        if chain.stages.is_empty() {
            return Err(Error::Invalid("chain file has no stages".into()));
        }
        Ok(chain)
    }
}

/// The stage produced by one ledger entry applied to `stage`.
pub fn execute(
    class: ClassTag,
    stage: &Structure,
    operation: Operation,
    a: &Structure,
    b: &Structure,
    params: &StepParameters,
) -> Result<Structure> {
    match operation {
        Operation::Amalgamate => {
            if !class.is_good_pair(a, b)? {
                return Err(Error::NotGoodPair("B adds more Y than X elements".into()));
            }
            Ok(class
                .amalgamate(a, b, stage, &Embedding::identity(a), &params.embedding)?
                .structure)
        }
        Operation::ChainAmalgamate => {
            if class != ClassTag::K0 {
                return Err(Error::Invalid("chain amalgamation needs a K0 chain".into()));
            }
            let (d, info) = chain_amalgam_step(stage, a, b, &params.embedding)?;
            if params.surrogate.is_some() && info.surrogate != params.surrogate {
                return Err(Error::Invalid("surrogate differs from the ledger".into()));
            }
            Ok(d)
        }
        Operation::ExtendTop => extend_top(stage),
        Operation::EndExtend => end_extend_step(stage),
    }
}
