//! End extensions of K0' chains: new Y elements only on top and outside Q,
//! with X held fixed.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::chain::{Chain, Operation, StepParameters};
use crate::class::{ClassTag, GuestPair};
use crate::error::{Error, Result};
use crate::knight::amalgam::{check_embedding, rebuild_g_family};
use crate::knight::check::g_table;
use crate::knight::{check_relativized, require_knight_signature, G_FN, X, Y};
use crate::structure::{ElementId, Embedding, Structure};

/// Adds one Y element above all of Y, outside Q. `g(_, y_new)` sends X in
/// id order onto `Y ∪ {y_new}` ascending, one each, the rest to `y_new`.
pub fn end_extend_step(c: &Structure) -> Result<Structure> {
    let v = check_relativized(c)?;
    if !v.valid {
        return Err(Error::NotInClass {
            class: "k0-prime".into(),
            detail: v.first_detail(),
        });
    }
    let xs = c.elements_of_sort(X);
    let mut targets = c.order(Y).unwrap_or(&[]).to_vec();
    if xs.len() < targets.len() + 1 {
        return Err(Error::InsufficientX {
            have: xs.len(),
            need: targets.len() + 1,
        });
    }
    let mut d = c.clone();
    let y_new = d.fresh_id();
    d.add_element(y_new, Y)?;
    targets.push(y_new);
    for (i, &x) in xs.iter().enumerate() {
        d.insert_tuple(G_FN, vec![x, y_new, targets.get(i).copied().unwrap_or(y_new)])?;
    }
    rebuild_g_family(&mut d);
    let v = check_relativized(&d)?;
    if !v.valid {
        return Err(Error::NotInClass {
            class: "k0-prime".into(),
            detail: v.first_detail(),
        });
    }
    Ok(d)
}

/// Performs `k` end-extension steps on the final stage of a K0' chain.
pub fn end_extend(chain: &Chain, k: usize) -> Result<Chain> {
    if chain.class != ClassTag::KPrime0 {
        return Err(Error::Invalid("end extension needs a k0-prime chain".into()));
    }
    let mut out = chain.clone();
    for _ in 0..k {
        let prev = out.last().clone();
        let next = end_extend_step(&prev)?;
        out.push(
            next.clone(),
            Operation::EndExtend,
            GuestPair { a: prev.clone(), b: next },
            StepParameters {
                embedding: Embedding::identity(&prev),
                ..Default::default()
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionKind {
    /// Every new Y element lies above every old one.
    EndExtension,
    /// New Y elements below old ones, but X grew, so nothing is forced.
    XGrows,
    /// X is fixed and a new Y element lies below an old one.
    NotValid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NecessityWitness {
    /// Old point `y0` whose column must reach the new point.
    pub old_y: ElementId,
    /// New point `y1 < y0`.
    pub new_y: ElementId,
    /// Every x with `g(x, y0) = y1` in the extension; surjectivity needs one, and X is fixed.
    pub preimages: Vec<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecessityVerdict {
    pub kind: ExtensionKind,
    pub witness: Option<NecessityWitness>,
}

/// Decides whether `d`, through `e`, extends `c` only at the top of Y. When
/// X is not enlarged, a new point below an old one is a contradiction: the
/// old column would have to reach it, but every x is old and keeps its old
/// value.
pub fn verify_end_extension_necessity(c: &Structure, d: &Structure, e: &Embedding) -> Result<NecessityVerdict> {
    require_knight_signature(c)?;
    check_embedding(e, c, d, "c -> d")?;
    let image: BTreeSet<ElementId> = e.image();
    let x_fixed = d.elements_of_sort(X).iter().all(|x| image.contains(x));
    let order = d.order(Y).unwrap_or(&[]);
    // highest old point, and the new points under it
    let Some(top_old) = order.iter().rposition(|y| image.contains(y)) else {
        return Ok(NecessityVerdict {
            kind: ExtensionKind::EndExtension,
            witness: None,
        });
    };
    let Some(new_y) = order[..top_old].iter().copied().find(|y| !image.contains(y)) else {
        return Ok(NecessityVerdict {
            kind: ExtensionKind::EndExtension,
            witness: None,
        });
    };
    if !x_fixed {
        return Ok(NecessityVerdict {
            kind: ExtensionKind::XGrows,
            witness: None,
        });
    }
    let old_y = order[top_old];
    let preimages = g_table(d)
        .into_iter()
        .filter(|((_, y), zs)| *y == old_y && zs.contains(&new_y))
        .map(|((x, _), _)| x)
        .collect();
    Ok(NecessityVerdict {
        kind: ExtensionKind::NotValid,
        witness: Some(NecessityWitness {
            old_y,
            new_y,
            preimages,
        }),
    })
}
