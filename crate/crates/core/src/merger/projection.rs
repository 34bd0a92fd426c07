//! Structures `(A, B, p)` with `p` a projection of A onto B.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::knight::amalgam::{amalgam_core, Amalgam, CoreOptions};
use crate::structure::{ElementId, Embedding, RelationDecl, Signature, Structure};
use crate::verdict::Verdict;

pub const A: &str = "A";
pub const B: &str = "B";
pub const P: &str = "p";

/// Preset `projection`: sorts A and B with `p(a, b)`.
pub fn projection_signature() -> Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| Arc::new(Signature::build(&[A, B], vec![RelationDecl::new(P, &[A, B])], &[])))
        .clone()
}

fn require(s: &Structure) -> Result<()> {
    let sig = s.signature();
    if sig.sort_index(A).is_none()
        || sig.sort_index(B).is_none()
        || !matches!(sig.relation(P), Some(r) if !r.graded && r.profile == [A, B])
    {
        return Err(Error::WrongSignature("sorts A, B and relation p(A,B) required".into()));
    }
    Ok(())
}

/// Preimage counts of every B element, ascending by id.
pub fn fiber_sizes(s: &Structure) -> BTreeMap<ElementId, usize> {
    let mut out: BTreeMap<ElementId, usize> = s.elements_of_sort(B).into_iter().map(|b| (b, 0)).collect();
    for t in s.tuples(P).into_iter().flatten() {
        *out.entry(t[1]).or_default() += 1;
    }
    out
}

/// `p` is a total function from A onto B whose fibers all have at least `min_fiber` elements.
pub fn check_projection(s: &Structure, min_fiber: usize) -> Result<Verdict> {
    require(s)?;
    let mut v = Verdict::ok();
    let mut image: BTreeMap<ElementId, usize> = BTreeMap::new();
    for t in s.tuples(P).into_iter().flatten() {
        *image.entry(t[0]).or_default() += 1;
    }
    for a in s.elements_of_sort(A) {
        match image.get(&a).copied().unwrap_or(0) {
            1 => {}
            0 => v.push("p-total", format!("p undefined at {a}"), vec![a]),
            k => v.push("p-total", format!("p has {k} values at {a}"), vec![a]),
        }
    }
    for (b, n) in fiber_sizes(s) {
        if n == 0 {
            v.push("p-onto", format!("{b} has no preimage"), vec![b]);
        } else if n < min_fiber {
            v.push("p-fiber-floor", format!("fiber of {b} has {n} < {min_fiber} elements"), vec![b]);
        }
    }
    Ok(v)
}

/// Projection structure with the given fiber sizes; B gets ids `0..k`, A follows fiber by fiber.
pub fn projection_with_fibers(fibers: &[usize]) -> Structure {
    let mut s = Structure::new(projection_signature());
    for b in 0..fibers.len() {
        s.add_element(b as ElementId, B).unwrap();
    }
    let mut next = fibers.len() as ElementId;
    for (b, &n) in fibers.iter().enumerate() {
        for _ in 0..n {
            s.add_element(next, A).unwrap();
            s.insert_tuple(P, vec![next, b as ElementId]).unwrap();
            next += 1;
        }
    }
    s
}

/// The finite stage of the projection guest: `b_count` B elements, each with exactly `fiber_floor` preimages.
pub fn build_projection_generic(fiber_floor: usize, b_count: usize) -> Result<Structure> {
    if fiber_floor == 0 {
        return Err(Error::Invalid("fiber floor must be at least 1".into()));
    }
    Ok(projection_with_fibers(&vec![fiber_floor; b_count]))
}

/// Disjoint union of B and C over A.
pub fn amalgamate_projection(
    a: &Structure,
    b: &Structure,
    c: &Structure,
    eab: &Embedding,
    eac: &Embedding,
) -> Result<Amalgam> {
    for (s, which) in [(a, "A"), (b, "B"), (c, "C")] {
        let v = check_projection(s, 1)?;
        if !v.valid {
            return Err(Error::NotInClass {
                class: "projection".into(),
                detail: format!("{which}: {}", v.first_detail()),
            });
        }
    }
    amalgam_core(a, b, c, eab, eac, CoreOptions { knight: false, q: false })
}

/// Every projection structure with at most `max_size` elements, up to isomorphism.
pub fn enumerate_projection(max_size: usize) -> Vec<Structure> {
    fn partitions(total: usize, max_part: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if total == 0 {
            out.push(acc.clone());
            return;
        }
        for p in (1..=max_part.min(total)).rev() {
            acc.push(p);
            partitions(total - p, p, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    for k in 0..=max_size / 2 {
        for a_total in k..=max_size - k {
            if k == 0 && a_total > 0 {
                continue;
            }
            let mut parts = Vec::new();
            partitions(a_total, a_total, &mut Vec::new(), &mut parts);
            for fibers in parts.into_iter().filter(|f| f.len() == k) {
                out.push(projection_with_fibers(&fibers));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        // size <= 4: empty, (1), (2), (3), (1,1)
        let all = enumerate_projection(4);
        assert_eq!(all.len(), 5);
        for s in all {
            assert!(check_projection(&s, 1).unwrap().valid);
        }
    }

    #[test]
    fn generic_has_equal_fibers() {
        let s = build_projection_generic(2, 3).unwrap();
        assert_eq!(s.len(), 9);
        assert!(fiber_sizes(&s).values().all(|&n| n == 2));
        assert!(build_projection_generic(0, 1).is_err());
    }
}
