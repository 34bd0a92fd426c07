//! Meet functions `f: Y x Y -> X` on a linear order X.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::combinatorics::functions;
use crate::error::{Error, Result};
use crate::structure::{ElementId, RelationDecl, Signature, Structure};
use crate::verdict::Verdict;

pub const MEET_X: &str = "X";
pub const MEET_Y: &str = "Y";
pub const MEET_F: &str = "f";

/// Preset `meet`: X ordered, Y plain, `f(a, b, x)` stored once per pair `a < b` (by id).
pub fn meet_signature() -> Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| {
        Arc::new(Signature::build(
            &[MEET_X, MEET_Y],
            vec![RelationDecl::new(MEET_F, &[MEET_Y, MEET_Y, MEET_X])],
            &[MEET_X],
        ))
    })
    .clone()
}

fn require(s: &Structure) -> Result<()> {
    if **s.signature() != *meet_signature() {
        return Err(Error::WrongSignature("the meet preset is required".into()));
    }
    Ok(())
}

/// `f` as a map on pairs `a < b`, with every stored value kept.
fn table(s: &Structure) -> BTreeMap<(ElementId, ElementId), Vec<ElementId>> {
    let mut out: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for t in s.tuples(MEET_F).into_iter().flatten() {
        out.entry((t[0], t[1])).or_default().push(t[2]);
    }
    out
}

/// Y is the list of vectors in the given order; `f(a, b)` is the least
/// coordinate where they differ. X gets ids `0..n`, Y follows.
pub fn meet_from_bit_vectors(x_len: usize, vectors: &[Vec<bool>]) -> Result<Structure> {
    let mut seen = BTreeSet::new();
    for v in vectors {
        if v.len() != x_len {
            return Err(Error::Invalid(format!("vector of length {} over an X of size {x_len}", v.len())));
        }
        if !seen.insert(v) {
            return Err(Error::Invalid(format!("duplicate vector {}", bits(v))));
        }
    }
    let mut s = Structure::new(meet_signature());
    for x in 0..x_len {
        s.add_element(x as ElementId, MEET_X)?;
    }
    let y = |i: usize| (x_len + i) as ElementId;
    for i in 0..vectors.len() {
        s.add_element(y(i), MEET_Y)?;
    }
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let x = (0..x_len).find(|&k| vectors[i][k] != vectors[j][k]).expect("distinct vectors");
            s.insert_tuple(MEET_F, vec![y(i), y(j), x as ElementId])?;
        }
    }
    Ok(s)
}

pub fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Both clauses of the meet law over every triple of distinct Y elements;
/// stops at the first violation.
pub fn check_meet_law(s: &Structure) -> Result<Verdict> {
    require(s)?;
    let mut v = Verdict::ok();
    let ys = s.elements_of_sort(MEET_Y);
    let tab = table(s);
    for (&(a, b), xs) in &tab {
        if a >= b {
            v.push("meet-symmetric", format!("f({a},{b}) stored against the id order"), vec![a, b]);
            return Ok(v);
        }
        if xs.len() > 1 {
            v.push("meet-symmetric", format!("f({a},{b}) has {} values", xs.len()), vec![a, b]);
            return Ok(v);
        }
    }
    for (i, &a) in ys.iter().enumerate() {
        for &b in &ys[i + 1..] {
            if !tab.contains_key(&(a, b)) {
                v.push("meet-symmetric", format!("f({a},{b}) undefined"), vec![a, b]);
                return Ok(v);
            }
        }
    }
    let rank = s.ranks();
    let f = |a: ElementId, b: ElementId| tab[&(a.min(b), a.max(b))][0];
    for &a0 in &ys {
        for &a1 in &ys {
            for &a2 in &ys {
                if a0 == a1 || a0 == a2 || a1 >= a2 {
                    continue;
                }
                let (p, q, r) = (f(a0, a1), f(a0, a2), f(a1, a2));
                if p != q {
                    let m = if rank[&p] < rank[&q] { p } else { q };
                    if r != m {
                        v.push(
                            "meet-min",
                            format!("f({a0},{a1})={p} and f({a0},{a2})={q} differ but f({a1},{a2})={r} is not their minimum"),
                            vec![a0, a1, a2],
                        );
                        return Ok(v);
                    }
                } else if rank[&r] <= rank[&p] {
                    v.push(
                        "meet-greater",
                        format!("f({a0},{a1})=f({a0},{a2})={p} but f({a1},{a2})={r} is not above it"),
                        vec![a0, a1, a2],
                    );
                    return Ok(v);
                }
            }
        }
    }
    Ok(v)
}

/// Vectors realizing a meet structure over X followed by `extra` new top coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetRealization {
    pub extra: usize,
    pub vectors: BTreeMap<ElementId, String>,
}

/// Brute-force search for 0/1 vectors over X (plus up to `max_extra`
/// coordinates above it) whose least differing coordinates reproduce `f`.
pub fn realize_meet(s: &Structure, max_extra: usize) -> Result<Option<MeetRealization>> {
    require(s)?;
    let xs = s.order(MEET_X).unwrap_or(&[]).to_vec();
    let ys = s.elements_of_sort(MEET_Y);
    let tab = table(s);
    let pos: BTreeMap<ElementId, usize> = xs.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    for extra in 0..=max_extra {
        let width = xs.len() + extra;
        if width >= 20 {
            break;
        }
        let mut chosen: Vec<u32> = Vec::new();
        if assign(&ys, &tab, &pos, width, &mut chosen) {
            let vectors = ys
                .iter()
                .zip(&chosen)
                .map(|(&y, &w)| (y, (0..width).map(|k| if w >> k & 1 == 1 { '1' } else { '0' }).collect()))
                .collect();
            return Ok(Some(MeetRealization { extra, vectors }));
        }
    }
    Ok(None)
}

fn assign(
    ys: &[ElementId],
    tab: &BTreeMap<(ElementId, ElementId), Vec<ElementId>>,
    pos: &BTreeMap<ElementId, usize>,
    width: usize,
    chosen: &mut Vec<u32>,
) -> bool {
    let i = chosen.len();
    if i == ys.len() {
        return true;
    }
    for w in 0u32..(1 << width) {
        let fits = chosen.iter().enumerate().all(|(j, &u)| {
            let diff = u ^ w;
            if diff == 0 {
                return false;
            }
            let first = diff.trailing_zeros() as usize;
            match tab.get(&(ys[j].min(ys[i]), ys[j].max(ys[i]))) {
                Some(v) if v.len() == 1 => pos.get(&v[0]) == Some(&first),
                _ => false,
            }
        });
        if fits {
            chosen.push(w);
            if assign(ys, tab, pos, width, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Every meet-preset structure with X of size `x_len` and Y of size `y_len`
/// (all maps from unordered pairs into X), law-abiding or not.
pub fn all_meet_tables(x_len: usize, y_len: usize) -> Vec<Structure> {
    let pairs: Vec<(usize, usize)> = (0..y_len).flat_map(|i| (i + 1..y_len).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for values in functions(pairs.len(), x_len) {
        let mut s = Structure::new(meet_signature());
        for x in 0..x_len {
            s.add_element(x as ElementId, MEET_X).expect("fresh");
        }
        for i in 0..y_len {
            s.add_element((x_len + i) as ElementId, MEET_Y).expect("fresh");
        }
        for (&(i, j), &v) in pairs.iter().zip(&values) {
            s.insert_tuple(MEET_F, vec![(x_len + i) as ElementId, (x_len + j) as ElementId, v as ElementId])
                .expect("valid tuple");
        }
        out.push(s);
    }
    out
}
