use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{G_FAMILY, G_FN, P_REL, Q_REL, U, X, Y};
use crate::combinatorics::factorial;
use crate::error::{Error, Result};
use crate::structure::{ElementId, Embedding, Signature, Structure};
use crate::verdict::Verdict;

pub(crate) fn require_knight(sig: &Signature) -> Result<()> {
    let bad = |m: &str| Err(Error::WrongSignature(m.to_string()));
    let (Some(y), Some(_)) = (sig.sort_index(Y), sig.sort_index(X)) else {
        return bad("sorts X and Y required");
    };
    if !sig.is_ordered(y) {
        return bad("sort Y must be ordered");
    }
    match sig.relation(G_FN) {
        Some(r) if !r.graded && r.profile == [X, Y, Y] => {}
        _ => return bad("relation g(X,Y,Y) required"),
    }
    match sig.relation(G_FAMILY) {
        Some(r) if r.graded && r.profile == [X, Y, Y] => {}
        _ => return bad("graded relation G(X..,Y,Y) required"),
    }
    Ok(())
}

/// Fails unless `s` is over a vocabulary containing the knight symbols.
pub fn require_knight_signature(s: &Structure) -> Result<()> {
    require_knight(s.signature())
}

/// The value table of `g`, keyed by `(x, y)`; several values mean `g` is not functional.
pub(crate) fn g_table(s: &Structure) -> BTreeMap<(ElementId, ElementId), Vec<ElementId>> {
    let mut out: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for t in s.tuples(G_FN).into_iter().flatten() {
        out.entry((t[0], t[1])).or_default().push(t[2]);
    }
    out
}

fn show(set: &BTreeSet<ElementId>) -> String {
    let items: Vec<String> = set.iter().map(|e| e.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Evaluates every K0 axiom on `s`, reporting each failure with witnesses.
pub fn check_k0(s: &Structure) -> Result<Verdict> {
    require_knight(s.signature())?;
    let mut v = Verdict::ok();
    let xs = s.elements_of_sort(X);
    let ys: Vec<ElementId> = s.order(Y).unwrap_or(&[]).to_vec();
    let rank: HashMap<ElementId, usize> = ys.iter().enumerate().map(|(i, &y)| (y, i)).collect();
    let table = g_table(s);

    let mut fibers: BTreeMap<(ElementId, ElementId), BTreeSet<ElementId>> = BTreeMap::new();
    for &x in &xs {
        for &y in &ys {
            match table.get(&(x, y)).map(|v| v.as_slice()) {
                None | Some([]) => v.push("g-total", format!("g({x},{y}) undefined"), vec![x, y]),
                Some([z]) => {
                    if rank[z] > rank[&y] {
                        v.push("g-bound", format!("g({x},{y}) = {z} lies above {y}"), vec![x, y, *z]);
                    }
                    fibers.entry((y, *z)).or_default().insert(x);
                }
                Some(zs) => v.push(
                    "g-functional",
                    format!("g({x},{y}) has {} values", zs.len()),
                    vec![x, y],
                ),
            }
        }
    }
    for &y in &ys {
        for &z in &ys[..=rank[&y]] {
            if !fibers.contains_key(&(y, z)) {
                v.push("g-onto", format!("g(_,{y}) misses {z}"), vec![y, z]);
            }
        }
    }

    let mut named: BTreeMap<(ElementId, ElementId), Vec<&Vec<ElementId>>> = BTreeMap::new();
    for t in s.tuples(G_FAMILY).into_iter().flatten() {
        let n = t.len() - 2;
        let (args, yz) = t.split_at(n);
        let (y, z) = (yz[0], yz[1]);
        let set: BTreeSet<ElementId> = args.iter().copied().collect();
        if set.len() != n {
            v.push("G-distinct", format!("G_{n}{t:?} repeats an argument"), t.clone());
            continue;
        }
        if rank[&z] >= rank[&y] {
            v.push("G-below", format!("G_{n}{t:?} has {z} not below {y}"), t.clone());
            continue;
        }
        let fiber = fibers.get(&(y, z)).cloned().unwrap_or_default();
        if set != fiber {
            v.push(
                "G-fiber",
                format!("G_{n}{t:?} names {} but the fiber of {z} under g(_,{y}) is {}", show(&set), show(&fiber)),
                t.clone(),
            );
            continue;
        }
        named.entry((y, z)).or_default().push(t);
    }
    for (&(y, z), fiber) in &fibers {
        if rank[&z] >= rank[&y] {
            continue;
        }
        let n = fiber.len();
        match named.get(&(y, z)).map_or(0, |l| l.len()) {
            0 => v.push(
                "G-missing",
                format!("fiber {} for ({y},{z}) not named by G_{n}", show(fiber)),
                fiber.iter().copied().chain([y, z]).collect(),
            ),
            k if (k as u128) < factorial(n) => v.push(
                "G-permutation",
                format!("G_{n} for ({y},{z}) holds for only {k} of the {} orderings of {}", factorial(n), show(fiber)),
                fiber.iter().copied().chain([y, z]).collect(),
            ),
            _ => {}
        }
    }
    Ok(v)
}

/// K1: the knight part is in K0 and `P` is a total function from X into U.
pub fn check_k1(s: &Structure) -> Result<Verdict> {
    let sig = s.signature();
    require_knight(sig)?;
    if sig.sort_index(U).is_none() || !matches!(sig.relation(P_REL), Some(r) if !r.graded && r.profile == [X, U]) {
        return Err(Error::WrongSignature("sort U and relation P(X,U) required".into()));
    }
    let mut v = check_k0(s)?;
    let mut image: BTreeMap<ElementId, Vec<ElementId>> = BTreeMap::new();
    for t in s.tuples(P_REL).into_iter().flatten() {
        image.entry(t[0]).or_default().push(t[1]);
    }
    for x in s.elements_of_sort(X) {
        match image.get(&x).map_or(0, |l| l.len()) {
            0 => v.push("P-total", format!("P not total: no value for {x}"), vec![x]),
            1 => {}
            k => v.push("P-total", format!("P not functional: {x} has {k} values"), vec![x]),
        }
    }
    Ok(v)
}

/// K0': the knight reduct is in K0, X is inside Q and Y meets Q in an initial segment.
pub fn check_relativized(s: &Structure) -> Result<Verdict> {
    let sig = s.signature();
    require_knight(sig)?;
    if !matches!(sig.relation(Q_REL), Some(r) if r.profile.len() == 1 && !r.graded) {
        return Err(Error::WrongSignature("unary relation Q required".into()));
    }
    let mut v = check_k0(s)?;
    for x in s.elements_of_sort(X) {
        if !s.holds(Q_REL, &[x]) {
            v.push("Q-contains-X", format!("{x} in X but not in Q"), vec![x]);
        }
    }
    let ys = s.order(Y).unwrap_or(&[]);
    let mut outside: Option<ElementId> = None;
    for &y in ys {
        if s.holds(Q_REL, &[y]) {
            if let Some(o) = outside {
                v.push(
                    "Q-initial",
                    format!("initial segment violated by {o} not in Q below {y} in Q"),
                    vec![o, y],
                );
                break;
            }
        } else if outside.is_none() {
            outside = Some(y);
        }
    }
    Ok(v)
}

/// `a` is a substructure of `b` on the same ids, and `b` adds at least as
/// many X as Y elements. Class membership is checked separately.
pub fn is_good_pair(a: &Structure, b: &Structure) -> Result<bool> {
    require_knight(a.signature())?;
    if !Embedding::identity(a).is_valid(a, b) {
        return Ok(false);
    }
    let new = |sort: &str| b.elements_of_sort(sort).len() - a.elements_of_sort(sort).len();
    Ok(new(X) >= new(Y))
}
