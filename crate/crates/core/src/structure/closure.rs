use std::collections::BTreeSet;

use super::model::{ElementId, Structure};
use super::StructureError;
use crate::limits::{GuardExceeded, Limits};

/// Smallest substructure containing `seed` that is closed under each named
/// relation read as a function of all but its last argument.
///
/// Relations outside the closure set are restricted by intersection.
pub fn substructure_generated_by(
    s: &Structure,
    seed: &BTreeSet<ElementId>,
    closure_ops: &[&str],
    limits: &Limits,
) -> Result<Structure, StructureError> {
    if let Some(&e) = seed.iter().find(|e| !s.contains(**e)) {
        return Err(StructureError::UnknownElement(e));
    }
    let mut ops = Vec::new();
    for name in closure_ops {
        let r = s
            .signature()
            .relation_index(name)
            .ok_or_else(|| StructureError::UnknownRelation(name.to_string()))?;
        if s.signature().relations()[r].graded {
            return Err(StructureError::BadSignature(format!(
                "graded relation `{name}` cannot act as a function"
            )));
        }
        ops.push(r);
    }
    let mut set = seed.clone();
    loop {
        let mut added = false;
        for &r in &ops {
            for t in s.relation_tuples(r) {
                let (args, value) = t.split_at(t.len() - 1);
                if !set.contains(&value[0]) && args.iter().all(|a| set.contains(a)) {
                    set.insert(value[0]);
                    added = true;
                }
            }
        }
        if set.len() > limits.closure_size {
            return Err(GuardExceeded {
                what: "closure size",
                limit: limits.closure_size as u64,
            }
            .into());
        }
        if !added {
            break;
        }
    }
    Ok(s.induced(&set))
}
