//! Amalgamation against the final stage of a chain through a surrogate
//! point `y0` above all of `Y^B`.
//!
//! For `x` new in B and `y` new in C the new Y elements of B below `y` are
//! covered once each, as in the plain amalgam. For `x` new in C and `y` new
//! in B the value is read off `v = g^C(x, y0)`: `y` when `v >= y` or `v` lies
//! in A, and `v` itself otherwise. Points `z` of `C \ A` below `y` whose
//! `y0`-preimages all lie in A (the set `P_y`) then have no preimage under
//! `g(_, y)`; fresh X elements repair that, taking the value `y'` at every
//! `y'` of C.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::chain::{Chain, Operation, StepParameters};
use crate::class::{ClassTag, GuestPair};
use crate::error::{Error, Result};
use crate::knight::amalgam::{amalgam_core, check_embedding, rebuild_g_family, CoreOptions};
use crate::knight::check::g_table;
use crate::knight::{check_k0, is_good_pair, G_FN, X, Y};
use crate::limits::Limits;
use crate::structure::{find_embedding, ElementId, Embedding, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainAmalgamInfo {
    pub surrogate: Option<ElementId>,
    /// `P_y` for every new Y of B (ids in the amalgam), ascending.
    pub p_sets: BTreeMap<ElementId, Vec<ElementId>>,
    pub x_new: Vec<ElementId>,
    /// A new top Y element had to be added first.
    pub top_added: bool,
    pub from_b: Embedding,
}

fn require_k0(s: &Structure, which: &str) -> Result<()> {
    let v = check_k0(s)?;
    if v.valid {
        Ok(())
    } else {
        Err(Error::NotInClass {
            class: "k0".into(),
            detail: format!("{which}: {}", v.first_detail()),
        })
    }
}

/// `c` plus one new X and a new top Y element `y*`. The new X takes value
/// `y` at every old `y`; `g(_, y*)` sends the X elements in id order onto
/// `Y ∪ {y*}` ascending, one each, and the rest to `y*`.
pub fn extend_top(c: &Structure) -> Result<Structure> {
    require_k0(c, "stage")?;
    let xs = c.elements_of_sort(X);
    let ys = c.order(Y).unwrap_or(&[]).to_vec();
    let mut d = c.clone();
    let x_new = d.fresh_id();
    let y_top = x_new + 1;
    d.add_element(x_new, X)?;
    d.add_element(y_top, Y)?;
    for &y in &ys {
        d.insert_tuple(G_FN, vec![x_new, y, y])?;
    }
    let mut sources = xs;
    sources.push(x_new);
    let mut targets = ys;
    targets.push(y_top);
    if sources.len() < targets.len() {
        return Err(Error::InsufficientX {
            have: sources.len(),
            need: targets.len(),
        });
    }
    for (i, &x) in sources.iter().enumerate() {
        d.insert_tuple(G_FN, vec![x, y_top, targets.get(i).copied().unwrap_or(y_top)])?;
    }
    rebuild_g_family(&mut d);
    Ok(d)
}

/// The surrogate: least id among the new Y elements of C lying above
/// every Y element of B in the amalgam order.
fn surrogate(d: &Structure, b_ys: &BTreeSet<ElementId>, c_new: &BTreeSet<ElementId>) -> Option<ElementId> {
    let order = d.order(Y).unwrap_or(&[]);
    let top_b = order.iter().rposition(|y| b_ys.contains(y));
    let above = match top_b {
        Some(i) => &order[i + 1..],
        None => order,
    };
    above.iter().copied().filter(|y| c_new.contains(y)).min()
}

/// One chain amalgamation against `c`, which must already contain a
/// surrogate. Fails with `Invalid` if it does not.
pub fn chain_amalgam_step(
    c: &Structure,
    a: &Structure,
    b: &Structure,
    eac: &Embedding,
) -> Result<(Structure, ChainAmalgamInfo)> {
    require_k0(a, "A")?;
    require_k0(b, "B")?;
    require_k0(c, "stage")?;
    if !is_good_pair(a, b)? {
        return Err(Error::NotGoodPair("B adds more Y than X elements over A".into()));
    }
    check_embedding(eac, a, c, "A -> stage")?;
    let eab = Embedding::identity(a);
    let am = amalgam_core(a, b, c, &eab, eac, CoreOptions { knight: false, q: false })?;
    let mut d = am.structure;
    let tr = |e: ElementId| am.from_b.apply(e).expect("total");
    let a_img: BTreeSet<ElementId> = eac.image();
    let b_ys: BTreeSet<ElementId> = b.elements_of_sort(Y).into_iter().map(tr).collect();
    let c_ys: Vec<ElementId> = c.elements_of_sort(Y);
    let c_new_y: BTreeSet<ElementId> = c_ys.iter().copied().filter(|e| !a_img.contains(e)).collect();
    let ranks = d.ranks();
    let mut b_new_x: Vec<ElementId> = b
        .elements_of_sort(X)
        .into_iter()
        .map(tr)
        .filter(|e| !a_img.contains(e))
        .collect();
    b_new_x.sort_unstable();
    let mut b_new_y: Vec<ElementId> = b_ys.iter().copied().filter(|e| !a_img.contains(e)).collect();
    b_new_y.sort_by_key(|e| ranks[e]);
    let c_new_x: Vec<ElementId> = c.elements_of_sort(X).into_iter().filter(|e| !a_img.contains(e)).collect();

    let mut info = ChainAmalgamInfo {
        from_b: am.from_b.clone(),
        ..Default::default()
    };
    if !b_new_y.is_empty() {
        info.surrogate = surrogate(&d, &b_ys, &c_new_y);
        if info.surrogate.is_none() {
            return Err(Error::Invalid("no surrogate above Y^B in the stage".into()));
        }
    }

    // x new in B, y new in C
    let mut c_new_sorted: Vec<ElementId> = c_new_y.iter().copied().collect();
    c_new_sorted.sort_by_key(|e| ranks[e]);
    for &y in &c_new_sorted {
        let targets: Vec<ElementId> = b_new_y.iter().copied().filter(|z| ranks[z] < ranks[&y]).collect();
        for (i, &x) in b_new_x.iter().enumerate() {
            d.insert_tuple(G_FN, vec![x, y, targets.get(i).copied().unwrap_or(y)])?;
        }
    }

    // x new in C, y new in B, through the surrogate
    if let Some(y0) = info.surrogate {
        let gc = g_table(c);
        let at_y0 = |x: ElementId| gc[&(x, y0)][0];
        for &y in &b_new_y {
            for &x in &c_new_x {
                let v = at_y0(x);
                let z = if ranks[&v] >= ranks[&y] || a_img.contains(&v) { y } else { v };
                d.insert_tuple(G_FN, vec![x, y, z])?;
            }
        }
        let mut preimages: BTreeMap<ElementId, Vec<ElementId>> = BTreeMap::new();
        for x in c.elements_of_sort(X) {
            preimages.entry(at_y0(x)).or_default().push(x);
        }
        for &y in &b_new_y {
            let p: Vec<ElementId> = c_new_sorted
                .iter()
                .copied()
                .filter(|z| ranks[z] < ranks[&y])
                .filter(|z| preimages.get(z).into_iter().flatten().all(|x| a_img.contains(x)))
                .collect();
            info.p_sets.insert(y, p);
        }
        let m = info.p_sets.values().map(|p| p.len()).max().unwrap_or(0);
        let mut next = d.fresh_id();
        for i in 0..m {
            let x = next;
            next += 1;
            d.add_element(x, X)?;
            for &y in &c_ys {
                d.insert_tuple(G_FN, vec![x, y, y])?;
            }
            for (&y, p) in &info.p_sets {
                d.insert_tuple(G_FN, vec![x, y, p.get(i).copied().unwrap_or(y)])?;
            }
            info.x_new.push(x);
        }
    }
    rebuild_g_family(&mut d);
    Ok((d, info))
}

/// Amalgamates `b` over `a` into the final stage of a K0 chain through a
/// surrogate, first growing the chain by a new top Y element when the
/// stage has none above `Y^B`. `embedding` places `a` in the final stage;
/// without it the first embedding found is used.
pub fn chain_amalgamate(
    chain: &Chain,
    a: &Structure,
    b: &Structure,
    embedding: Option<&Embedding>,
    limits: &Limits,
) -> Result<(Chain, ChainAmalgamInfo)> {
    if chain.class != ClassTag::K0 {
        return Err(Error::Invalid("chain amalgamation needs a K0 chain".into()));
    }
    let eac = match embedding {
        Some(e) => e.clone(),
        None => find_embedding(a, chain.last(), &Default::default(), limits)?
            .ok_or_else(|| Error::BadEmbedding("A does not embed in the final stage".into()))?,
    };
    let mut out = chain.clone();
    let mut top_added = false;
    let (d, mut info) = match chain_amalgam_step(out.last(), a, b, &eac) {
        Ok(r) => r,
        Err(Error::Invalid(_)) => {
            let prev = out.last().clone();
            let top = extend_top(&prev)?;
            out.push(
                top.clone(),
                Operation::ExtendTop,
                GuestPair { a: prev.clone(), b: top },
                StepParameters {
                    embedding: Embedding::identity(&prev),
                    ..Default::default()
                },
            );
            top_added = true;
            chain_amalgam_step(out.last(), a, b, &eac)?
        }
        Err(e) => return Err(e),
    };
    info.top_added = top_added;
    out.push(
        d,
        Operation::ChainAmalgamate,
        GuestPair { a: a.clone(), b: b.clone() },
        StepParameters {
            embedding: eac,
            surrogate: info.surrogate,
            x_new: info.x_new.clone(),
        },
    );
    Ok((out, info))
}
