//! Gluing a host structure to a guest structure along `U = Q`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{ElementId, Embedding, RelationDecl, Signature, Structure, ANY_SORT};

/// Which host elements form U, which guest elements form Q, and how they are identified.
///
/// `u` and `q` each name a sort or a unary relation. `q = None` takes the
/// whole guest domain, which then has to be one-sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergerSpec {
    pub u: String,
    #[serde(default)]
    pub q: Option<String>,
    /// `[host id, guest id]` pairs; a bijection from U onto Q.
    pub glue: Vec<(ElementId, ElementId)>,
}

/// The merged structure together with where each guest element went.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Merger {
    pub structure: Structure,
    /// Guest id to merged id.
    pub guest_ids: Embedding,
    /// The guest sort holding Q.
    pub q_sort: String,
    /// True when Q is the whole of `q_sort`, which then disappears into the host sort.
    pub q_absorbed: bool,
}

enum Designated {
    Sort(String),
    Relation(String),
    Everything,
}

fn designate(s: &Structure, name: Option<&str>, what: &str) -> Result<Designated> {
    let sig = s.signature();
    let Some(name) = name else {
        return Ok(Designated::Everything);
    };
    if sig.sort_index(name).is_some() {
        return Ok(Designated::Sort(name.to_string()));
    }
    match sig.relation(name) {
        Some(r) if !r.graded && r.profile.len() == 1 => Ok(Designated::Relation(name.to_string())),
        Some(_) => Err(Error::Invalid(format!("{what} `{name}` is not unary"))),
        None => Err(Error::Invalid(format!("{what} `{name}` is neither a sort nor a relation"))),
    }
}

fn members(s: &Structure, d: &Designated) -> BTreeSet<ElementId> {
    match d {
        Designated::Sort(n) => s.elements_of_sort(n).into_iter().collect(),
        Designated::Relation(r) => s.tuples(r).into_iter().flatten().map(|t| t[0]).collect(),
        Designated::Everything => s.ids().collect(),
    }
}

/// The single sort shared by `set`, or `fallback` when the set is empty.
fn common_sort(s: &Structure, set: &BTreeSet<ElementId>, fallback: Option<&str>, what: &str) -> Result<String> {
    let sorts: BTreeSet<&str> = set.iter().map(|&e| s.sort_name_of(e).expect("member")).collect();
    match sorts.len() {
        0 => fallback
            .map(str::to_string)
            .ok_or_else(|| Error::Invalid(format!("{what} is empty and its sort cannot be determined"))),
        1 => Ok(sorts.into_iter().next().unwrap().to_string()),
        _ => Err(Error::Invalid(format!("{what} spans several sorts"))),
    }
}

fn declared_sort(s: &Structure, d: &Designated) -> Option<String> {
    match d {
        Designated::Sort(n) => Some(n.clone()),
        Designated::Relation(r) => {
            let p = &s.signature().relation(r)?.profile[0];
            (p != ANY_SORT).then(|| p.clone())
        }
        Designated::Everything => match s.signature().sorts() {
            [only] => Some(only.clone()),
            _ => None,
        },
    }
}

/// Glues `guest` onto `host`: host ids are kept, Q elements become their
/// glued U partners, the other guest elements get fresh ids in id order.
pub fn merge_structures(host: &Structure, guest: &Structure, spec: &MergerSpec) -> Result<Merger> {
    let u = designate(host, Some(&spec.u), "U")?;
    let q = designate(guest, spec.q.as_deref(), "Q")?;
    if matches!(q, Designated::Everything) && guest.signature().sorts().len() != 1 {
        return Err(Error::Invalid("Q as the whole domain needs a one-sorted guest".into()));
    }
    let u_set = members(host, &u);
    let q_set = members(guest, &q);
    if u_set.len() != q_set.len() {
        return Err(Error::Invalid(format!(
            "cardinality mismatch: |U| = {}, |Q| = {}",
            u_set.len(),
            q_set.len()
        )));
    }
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    for &(h, g) in &spec.glue {
        if !u_set.contains(&h) {
            return Err(Error::Invalid(format!("glue: host element {h} is not in U")));
        }
        if !q_set.contains(&g) {
            return Err(Error::Invalid(format!("glue: guest element {g} is not in Q")));
        }
        if fwd.insert(h, g).is_some() || back.insert(g, h).is_some() {
            return Err(Error::Invalid(format!("glue is not injective at [{h}, {g}]")));
        }
    }
    if fwd.len() != u_set.len() {
        return Err(Error::Invalid("glue does not cover U".into()));
    }

    let host_sort = common_sort(host, &u_set, declared_sort(host, &u).as_deref(), "U")?;
    let q_sort = common_sort(guest, &q_set, declared_sort(guest, &q).as_deref(), "Q")?;
    let gsig = guest.signature();
    if gsig.ordered().iter().any(|o| *o == q_sort) {
        return Err(Error::Invalid(format!("Q lies in the ordered sort `{q_sort}`")));
    }
    let q_absorbed = !matches!(q, Designated::Relation(_));
    let sig = merged_signature(host.signature(), gsig, &host_sort, &q_sort, q_absorbed)?;

    let mut out = host.expand(sig).map_err(Error::from)?;
    let mut guest_ids = BTreeMap::new();
    let mut next = host.fresh_id();
    for (g, s) in guest.elements() {
        if let Some(&h) = back.get(&g) {
            guest_ids.insert(g, h);
        } else {
            let name = &gsig.sorts()[s];
            out.add_element(next, name)?;
            guest_ids.insert(g, next);
            next += 1;
        }
    }
    for decl in gsig.relations() {
        for t in guest.tuples(&decl.name).into_iter().flatten() {
            out.insert_tuple(&decl.name, t.iter().map(|e| guest_ids[e]).collect())?;
        }
    }
    for (&s, order) in guest.orders() {
        let name = &gsig.sorts()[s];
        out.set_order(name, order.iter().map(|e| guest_ids[e]).collect())?;
    }
    Ok(Merger {
        structure: out,
        guest_ids: Embedding::new(guest_ids),
        q_sort,
        q_absorbed,
    })
}

fn merged_signature(
    host: &Signature,
    guest: &Signature,
    host_sort: &str,
    q_sort: &str,
    q_absorbed: bool,
) -> Result<Arc<Signature>> {
    let mut sorts: Vec<String> = host.sorts().to_vec();
    for s in guest.sorts() {
        if q_absorbed && s == q_sort {
            continue;
        }
        if host.sort_index(s).is_some() {
            return Err(Error::Invalid(format!("signature clash on sort `{s}`")));
        }
        sorts.push(s.clone());
    }
    let mut relations: Vec<RelationDecl> = host.relations().to_vec();
    for r in guest.relations() {
        if host.relation(&r.name).is_some() {
            return Err(Error::Invalid(format!("signature clash on relation `{}`", r.name)));
        }
        let mut r = r.clone();
        for p in r.profile.iter_mut() {
            if p == q_sort {
                *p = if q_absorbed { host_sort.to_string() } else { ANY_SORT.to_string() };
            }
        }
        relations.push(r);
    }
    let mut ordered = host.ordered().to_vec();
    ordered.extend(guest.ordered().iter().cloned());
    Ok(Arc::new(Signature::new(sorts, relations, ordered)?))
}

/// The merged structure cut down to the host signature.
pub fn host_restriction(merged: &Structure, host_signature: &Arc<Signature>) -> Result<Structure> {
    Ok(merged.reduct(host_signature.clone())?)
}

/// The merged structure cut down to the guest signature on the glued set
/// plus the guest-only elements, relabelled back to guest ids.
pub fn guest_restriction(m: &Merger, guest_signature: &Arc<Signature>) -> Result<Structure> {
    let merged = &m.structure;
    let mut out = Structure::new(guest_signature.clone());
    let back = m.guest_ids.inverse();
    for (&id, &g) in &back.map {
        let name = merged.sort_name_of(id).ok_or(Error::Invalid(format!("{id} missing from the merger")))?;
        let sort = if guest_signature.sort_index(name).is_some() { name } else { m.q_sort.as_str() };
        out.add_element(g, sort)?;
    }
    for decl in guest_signature.relations() {
        for t in merged.tuples(&decl.name).into_iter().flatten() {
            if let Some(pre) = t.iter().map(|e| back.apply(*e)).collect::<Option<Vec<_>>>() {
                out.insert_tuple(&decl.name, pre)?;
            }
        }
    }
    for s in guest_signature.ordered() {
        if let Some(order) = merged.order(s) {
            let pre = order.iter().filter_map(|e| back.apply(*e)).collect();
            out.set_order(s, pre)?;
        }
    }
    Ok(out)
}
