//! Padding and disjoint amalgamation.
//!
//! An amalgam keeps every id of the right factor `C`; elements of `B`
//! outside the image of `A`, padding elements and any other new element get
//! fresh ids above `C`'s maximum, in that order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::check::{check_k0, check_k1, check_relativized, g_table};
use super::{G_FAMILY, G_FN, P_REL, Q_REL, U, X, Y};
use crate::combinatorics::permutations;
use crate::error::{Error, Result};
use crate::structure::{ElementId, Embedding, Structure};
use crate::verdict::Verdict;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Amalgam {
    pub structure: Structure,
    /// `B -> D`.
    pub from_b: Embedding,
    /// `C -> D`, always the identity on `C`'s ids.
    pub from_c: Embedding,
    /// Ids in `D` of the X elements added by padding either side.
    pub padding: Vec<ElementId>,
}

/// Extends `a` by `m` fresh X elements with `g(x,y) = y` for every y.
/// If the signature has `Q`, the new elements are put into it.
pub fn pad_x(a: &Structure, m: usize) -> Structure {
    let mut out = a.clone();
    let ys = a.elements_of_sort(Y);
    let has_q = a.signature().relation_index(Q_REL).is_some();
    let mut next = a.fresh_id();
    for _ in 0..m {
        out.add_element(next, X).expect("fresh id");
        for &y in &ys {
            out.insert_tuple(G_FN, vec![next, y, y]).expect("valid tuple");
        }
        if has_q {
            out.insert_tuple(Q_REL, vec![next]).expect("valid tuple");
        }
        next += 1;
    }
    out
}

/// Recomputes the whole `G` family from the fibers of `g`.
pub fn rebuild_g_family(s: &mut Structure) {
    let old: Vec<Vec<ElementId>> = s.tuples(G_FAMILY).into_iter().flatten().cloned().collect();
    for t in old {
        s.remove_tuple(G_FAMILY, &t);
    }
    let ranks = s.ranks();
    let mut fibers: BTreeMap<(ElementId, ElementId), Vec<ElementId>> = BTreeMap::new();
    for ((x, y), zs) in g_table(s) {
        if let [z] = zs[..] {
            if ranks[&z] < ranks[&y] {
                fibers.entry((y, z)).or_default().push(x);
            }
        }
    }
    for ((y, z), xs) in fibers {
        for mut p in permutations(&xs) {
            p.push(y);
            p.push(z);
            s.insert_tuple(G_FAMILY, p).expect("valid tuple");
        }
    }
}

fn require(class: &str, v: Verdict, which: &str) -> Result<()> {
    if v.valid {
        Ok(())
    } else {
        Err(Error::NotInClass {
            class: class.to_string(),
            detail: format!("{which}: {}", v.first_detail()),
        })
    }
}

pub(crate) fn check_embedding(e: &Embedding, source: &Structure, target: &Structure, name: &str) -> Result<()> {
    e.check(source, target)
        .map_err(|v| Error::BadEmbedding(format!("{name}: {v}")))
}

#[derive(Clone, Copy)]
pub(crate) struct CoreOptions {
    /// Pad to the good-pair inequality and define g across the factors.
    pub knight: bool,
    /// Within an interval, put Q elements first; padding joins Q.
    pub q: bool,
}

/// Disjoint union of `B` and `C` over `A`, with the knight steps when asked.
pub(crate) fn amalgam_core(
    a: &Structure,
    b: &Structure,
    c: &Structure,
    eab: &Embedding,
    eac: &Embedding,
    opts: CoreOptions,
) -> Result<Amalgam> {
    if b.signature() != c.signature() {
        return Err(Error::Structure(crate::structure::StructureError::SignatureMismatch));
    }
    check_embedding(eab, a, b, "A -> B")?;
    check_embedding(eac, a, c, "A -> C")?;
    let back = eab.inverse();
    let mut next = c.fresh_id();
    let mut trans: BTreeMap<ElementId, ElementId> = BTreeMap::new();
    let mut b_new = Vec::new();
    for e in b.ids() {
        let d = match back.apply(e) {
            Some(pre) => eac.apply(pre).expect("total embedding"),
            None => {
                let d = next;
                next += 1;
                b_new.push(d);
                d
            }
        };
        trans.insert(e, d);
    }
    let a_image: BTreeSet<ElementId> = eac.image();

    let count = |s: &Structure, sort: &str| s.elements_of_sort(sort).len() - a.elements_of_sort(sort).len();
    let (mut pad_b, mut pad_c) = (Vec::new(), Vec::new());
    if opts.knight {
        for _ in count(b, X)..count(b, Y).max(count(b, X)) {
            pad_b.push(next);
            next += 1;
        }
        for _ in count(c, X)..count(c, Y).max(count(c, X)) {
            pad_c.push(next);
            next += 1;
        }
    }

    let mut d = c.clone();
    let sig = c.signature().clone();
    for e in b.ids() {
        if !a_image.contains(&trans[&e]) {
            d.add_element(trans[&e], b.sort_name_of(e).unwrap())?;
        }
    }
    for r in 0..sig.relations().len() {
        let name = &sig.relations()[r].name;
        for t in b.relation_tuples(r) {
            d.insert_tuple(name, t.iter().map(|e| trans[e]).collect())?;
        }
    }
    let b_ys: Vec<ElementId> = b.elements_of_sort(Y).iter().map(|e| trans[e]).collect();
    let c_ys = c.elements_of_sort(Y);
    for (pads, ys) in [(&pad_b, &b_ys), (&pad_c, &c_ys)] {
        for &p in pads.iter() {
            d.add_element(p, X)?;
            for &y in ys.iter() {
                d.insert_tuple(G_FN, vec![p, y, y])?;
            }
            if opts.q {
                d.insert_tuple(Q_REL, vec![p])?;
            }
        }
    }

    let in_q = |s: &Structure, e: ElementId| opts.q && s.holds(Q_REL, &[e]);
    for (&sort, c_order) in c.orders() {
        let name = sig.sorts()[sort].clone();
        let b_order = b.order_of(sort).unwrap_or(&[]);
        let base: Vec<ElementId> = c_order.iter().copied().filter(|e| a_image.contains(e)).collect();
        // (interval, not-in-Q, side, position) for every new element
        let mut keyed: Vec<((usize, bool, u8, usize), ElementId)> = Vec::new();
        let mut seen = 0;
        for (i, &e) in b_order.iter().enumerate() {
            let de = trans[&e];
            if a_image.contains(&de) {
                seen += 1;
            } else {
                keyed.push(((seen, !in_q(b, e), 0, i), de));
            }
        }
        seen = 0;
        for (i, &e) in c_order.iter().enumerate() {
            if a_image.contains(&e) {
                seen += 1;
            } else {
                keyed.push(((seen, !in_q(c, e), 1, i), e));
            }
        }
        keyed.sort();
        let mut merged = Vec::with_capacity(keyed.len() + base.len());
        let mut k = keyed.into_iter().peekable();
        for (i, &e) in base.iter().enumerate() {
            while let Some(((iv, ..), x)) = k.peek() {
                if *iv > i {
                    break;
                }
                merged.push(*x);
                k.next();
            }
            merged.push(e);
        }
        merged.extend(k.map(|(_, x)| x));
        d.set_order(&name, merged)?;
    }

    if opts.knight {
        let ranks = d.ranks();
        let new_x = |s: &Structure, map: &dyn Fn(ElementId) -> ElementId, pads: &[ElementId]| {
            let mut v: Vec<ElementId> = s
                .elements_of_sort(X)
                .into_iter()
                .map(map)
                .filter(|e| !a_image.contains(e))
                .chain(pads.iter().copied())
                .collect();
            v.sort_unstable();
            v
        };
        let b_new_x = new_x(b, &|e| trans[&e], &pad_b);
        let c_new_x = new_x(c, &|e| e, &pad_c);
        let mut b_new_y: Vec<ElementId> = b_ys.iter().copied().filter(|e| !a_image.contains(e)).collect();
        let mut c_new_y: Vec<ElementId> = c_ys.iter().copied().filter(|e| !a_image.contains(e)).collect();
        b_new_y.sort_by_key(|e| ranks[e]);
        c_new_y.sort_by_key(|e| ranks[e]);
        for (ys, sources, other_ys) in [(&c_new_y, &b_new_x, &b_new_y), (&b_new_y, &c_new_x, &c_new_y)] {
            for &y in ys.iter() {
                let targets: Vec<ElementId> = other_ys.iter().copied().filter(|z| ranks[z] < ranks[&y]).collect();
                for (i, &x) in sources.iter().enumerate() {
                    let z = targets.get(i).copied().unwrap_or(y);
                    d.insert_tuple(G_FN, vec![x, y, z])?;
                }
            }
        }
        rebuild_g_family(&mut d);
    }

    let mut padding = pad_b;
    padding.extend(pad_c);
    Ok(Amalgam {
        from_b: Embedding::new(trans),
        from_c: Embedding::identity(c),
        structure: d,
        padding,
    })
}

/// Disjoint amalgamation in K0: pad both sides to the good-pair inequality,
/// interleave the new Y elements (B's before C's inside each interval of
/// A), send each new X of one side onto the new Y elements of that side
/// below each new Y of the other side, one source per target and the rest
/// to `y`, and name the new fibers by `G`.
pub fn disjoint_amalgam_k0(
    a: &Structure,
    b: &Structure,
    c: &Structure,
    eab: &Embedding,
    eac: &Embedding,
) -> Result<Amalgam> {
    for (s, which) in [(a, "A"), (b, "B"), (c, "C")] {
        require("K0", check_k0(s)?, which)?;
    }
    amalgam_core(a, b, c, eab, eac, CoreOptions { knight: true, q: false })
}

/// K1 amalgamation: the K0 amalgam of the knight parts, U the union over
/// U^A, and every padded X sent by `P` to one fresh U element.
pub fn disjoint_amalgam_k1(
    a: &Structure,
    b: &Structure,
    c: &Structure,
    eab: &Embedding,
    eac: &Embedding,
) -> Result<Amalgam> {
    for (s, which) in [(a, "A"), (b, "B"), (c, "C")] {
        require("K1", check_k1(s)?, which)?;
    }
    let mut am = amalgam_core(a, b, c, eab, eac, CoreOptions { knight: true, q: false })?;
    if !am.padding.is_empty() {
        let u = am.structure.fresh_id();
        am.structure.add_element(u, U)?;
        for &x in &am.padding {
            am.structure.insert_tuple(P_REL, vec![x, u])?;
        }
    }
    Ok(am)
}

/// K0' amalgamation: as in K0, with Q elements placed first inside each
/// interval so Q keeps cutting an initial segment of Y; padding joins Q.
pub fn disjoint_amalgam_kprime0(
    a: &Structure,
    b: &Structure,
    c: &Structure,
    eab: &Embedding,
    eac: &Embedding,
) -> Result<Amalgam> {
    for (s, which) in [(a, "A"), (b, "B"), (c, "C")] {
        require("K0'", check_relativized(s)?, which)?;
    }
    amalgam_core(a, b, c, eab, eac, CoreOptions { knight: true, q: true })
}

/// Number of X and Y elements, in that order.
pub fn xy_counts(s: &Structure) -> (usize, usize) {
    (s.elements_of_sort(X).len(), s.elements_of_sort(Y).len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knight::knight_signature;

    fn minimal(x: ElementId, y: ElementId) -> Structure {
        let mut s = Structure::new(knight_signature());
        s.add_element(x, X).unwrap();
        s.add_element(y, Y).unwrap();
        s.insert_tuple(G_FN, vec![x, y, y]).unwrap();
        s
    }

    #[test]
    fn two_singletons_over_empty() {
        let a = Structure::new(knight_signature());
        let b = minimal(0, 1);
        let c = minimal(10, 11);
        let e = Embedding::default();
        let am = disjoint_amalgam_k0(&a, &b, &c, &e, &e).unwrap();
        let d = &am.structure;
        assert!(check_k0(d).unwrap().valid);
        let (x, y) = (am.from_b.apply(0).unwrap(), am.from_b.apply(1).unwrap());
        assert_eq!(d.order(Y).unwrap(), &[y, 11]);
        assert!(d.holds(G_FN, &[x, 11, y]));
        assert!(d.holds(G_FN, &[10, y, y]));
        assert!(d.holds(G_FAMILY, &[x, 11, y]));
        assert!(am.padding.is_empty());
    }

    #[test]
    fn padding_keeps_g_family() {
        let s = minimal(0, 1);
        let p = pad_x(&s, 2);
        assert_eq!(xy_counts(&p), (3, 1));
        assert!(check_k0(&p).unwrap().valid);
        assert_eq!(p.tuples(G_FAMILY), s.tuples(G_FAMILY));
    }
}
