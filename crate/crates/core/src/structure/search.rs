//! Backtracking search for embeddings, isomorphisms and automorphisms.
//!
//! Source elements are visited in a fixed order (pinned elements first, then
//! greedily by how many tuples tie them to elements already placed, ties by
//! id); candidates are tried in target id order. Every search is therefore
//! deterministic for fixed inputs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::ControlFlow;

use super::embedding::Embedding;
use super::model::{ElementId, Structure};
use super::StructureError;
use crate::limits::{GuardExceeded, Limits};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Injective, substructure semantics.
    Embedding,
    /// Bijective.
    Isomorphism,
}

pub(crate) struct Indexed {
    pub ids: Vec<ElementId>,
    pub pos: HashMap<ElementId, usize>,
    pub sort: Vec<usize>,
    pub rank: Vec<Option<usize>>,
    /// Per element: (relation, tuple index) for every tuple it occurs in.
    pub incident: Vec<Vec<(usize, usize)>>,
    pub tuples: Vec<Vec<Vec<usize>>>,
    pub member: Vec<HashSet<Vec<usize>>>,
    /// Per element: occurrences per (relation, position-in-profile-class).
    pub degree: Vec<Vec<u32>>,
}

impl Indexed {
    pub fn new(s: &Structure) -> Self {
        let ids: Vec<ElementId> = s.ids().collect();
        let pos: HashMap<ElementId, usize> = ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let sort = ids.iter().map(|&e| s.sort_of(e).unwrap()).collect();
        let ranks = s.ranks();
        let rank = ids.iter().map(|e| ranks.get(e).copied()).collect();
        let nrel = s.signature().relations().len();
        let mut incident = vec![Vec::new(); ids.len()];
        let mut tuples = Vec::with_capacity(nrel);
        let mut member = Vec::with_capacity(nrel);
        let mut degree = vec![vec![0u32; nrel * 2]; ids.len()];
        for r in 0..nrel {
            let dense: Vec<Vec<usize>> = s
                .relation_tuples(r)
                .iter()
                .map(|t| t.iter().map(|e| pos[e]).collect())
                .collect();
            for (ti, t) in dense.iter().enumerate() {
                let mut last = usize::MAX;
                let mut sorted = t.clone();
                sorted.sort_unstable();
                for &e in &sorted {
                    if e != last {
                        incident[e].push((r, ti));
                        last = e;
                    }
                }
                for (i, &e) in t.iter().enumerate() {
                    let slot = if i + 1 == t.len() { 1 } else { 0 };
                    degree[e][r * 2 + slot] += 1;
                }
            }
            member.push(dense.iter().cloned().collect());
            tuples.push(dense);
        }
        Indexed {
            ids,
            pos,
            sort,
            rank,
            incident,
            tuples,
            member,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }
}

struct Search<'a> {
    src: &'a Indexed,
    tgt: &'a Indexed,
    kind: MapKind,
    fwd: Vec<Option<usize>>,
    back: Vec<Option<usize>>,
    nodes: u64,
    max_nodes: u64,
}

impl Search<'_> {
    fn consistent(&self, e: usize, f: usize) -> bool {
        let (src, tgt) = (self.src, self.tgt);
        if src.sort[e] != tgt.sort[f] || self.back[f].is_some() {
            return false;
        }
        if self.kind == MapKind::Isomorphism {
            if src.degree[e] != tgt.degree[f] || src.rank[e] != tgt.rank[f] {
                return false;
            }
        }
        if let (Some(re), Some(rf)) = (src.rank[e], tgt.rank[f]) {
            for (e2, m) in self.fwd.iter().enumerate() {
                if let Some(f2) = *m {
                    if src.sort[e2] == src.sort[e] {
                        let (re2, rf2) = (src.rank[e2].unwrap(), tgt.rank[f2].unwrap());
                        if (re < re2) != (rf < rf2) {
                            return false;
                        }
                    }
                }
            }
        }
        let img = |x: usize| if x == e { Some(f) } else { self.fwd[x] };
        for &(r, ti) in &src.incident[e] {
            let t = &src.tuples[r][ti];
            let mapped: Option<Vec<usize>> = t.iter().map(|&x| img(x)).collect();
            if let Some(m) = mapped {
                if !tgt.member[r].contains(&m) {
                    return false;
                }
            }
        }
        let pre = |y: usize| if y == f { Some(e) } else { self.back[y] };
        for &(r, ti) in &tgt.incident[f] {
            let t = &tgt.tuples[r][ti];
            let mapped: Option<Vec<usize>> = t.iter().map(|&y| pre(y)).collect();
            if let Some(m) = mapped {
                if !src.member[r].contains(&m) {
                    return false;
                }
            }
        }
        true
    }

    fn run(
        &mut self,
        order: &[usize],
        depth: usize,
        visit: &mut dyn FnMut(&[Option<usize>]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>, GuardExceeded> {
        if depth == order.len() {
            return Ok(visit(&self.fwd));
        }
        let e = order[depth];
        for f in 0..self.tgt.len() {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Err(GuardExceeded {
                    what: "backtracking nodes",
                    limit: self.max_nodes,
                });
            }
            if !self.consistent(e, f) {
                continue;
            }
            self.fwd[e] = Some(f);
            self.back[f] = Some(e);
            let flow = self.run(order, depth + 1, visit)?;
            self.fwd[e] = None;
            self.back[f] = None;
            if flow.is_break() {
                return Ok(flow);
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

fn visit_order(src: &Indexed, pinned: &[usize]) -> Vec<usize> {
    let n = src.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut weight = vec![0usize; n];
    let place = |e: usize, placed: &mut Vec<bool>, order: &mut Vec<usize>, weight: &mut Vec<usize>| {
        placed[e] = true;
        order.push(e);
        for &(r, ti) in &src.incident[e] {
            for &x in &src.tuples[r][ti] {
                if !placed[x] {
                    weight[x] += 1;
                }
            }
        }
    };
    for &p in pinned {
        if !placed[p] {
            place(p, &mut placed, &mut order, &mut weight);
        }
    }
    while order.len() < n {
        let next = (0..n)
            .filter(|&e| !placed[e])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .unwrap();
        place(next, &mut placed, &mut order, &mut weight);
    }
    order
}

/// Enumerates maps of `source` into `target` of the given kind that extend `pinned`.
///
/// The visitor sees each map as an [`Embedding`] and may stop the search.
pub fn search_maps(
    source: &Structure,
    target: &Structure,
    kind: MapKind,
    pinned: &BTreeMap<ElementId, ElementId>,
    limits: &Limits,
    mut visit: impl FnMut(Embedding) -> ControlFlow<()>,
) -> Result<(), StructureError> {
    if **source.signature() != **target.signature() {
        return Err(StructureError::SignatureMismatch);
    }
    if kind == MapKind::Isomorphism && !same_shape(source, target) {
        return Ok(());
    }
    if source.len() > target.len() {
        return Ok(());
    }
    let src = Indexed::new(source);
    let tgt = Indexed::new(target);
    let mut pinned_dense = Vec::new();
    for (a, b) in pinned {
        match (src.pos.get(a), tgt.pos.get(b)) {
            (Some(&x), Some(&y)) => pinned_dense.push((x, y)),
            _ => return Ok(()),
        }
    }
    let mut search = Search {
        src: &src,
        tgt: &tgt,
        kind,
        fwd: vec![None; src.len()],
        back: vec![None; tgt.len()],
        nodes: 0,
        max_nodes: limits.max_nodes,
    };
    for &(x, y) in &pinned_dense {
        if search.fwd[x].is_some() || !search.consistent(x, y) {
            return Ok(());
        }
        search.fwd[x] = Some(y);
        search.back[y] = Some(x);
    }
    let pinned_src: Vec<usize> = pinned_dense.iter().map(|p| p.0).collect();
    let order: Vec<usize> = visit_order(&src, &pinned_src)
        .into_iter()
        .filter(|e| search.fwd[*e].is_none())
        .collect();
    let mut adapter = |fwd: &[Option<usize>]| {
        let map = fwd
            .iter()
            .enumerate()
            .map(|(i, m)| (src.ids[i], tgt.ids[m.unwrap()]))
            .collect();
        visit(Embedding::new(map))
    };
    let _ = search.run(&order, 0, &mut adapter)?;
    Ok(())
}

fn same_shape(a: &Structure, b: &Structure) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let nsorts = a.signature().sorts().len();
    let count = |s: &Structure| {
        let mut c = vec![0usize; nsorts];
        for (_, k) in s.elements() {
            c[k] += 1;
        }
        c
    };
    if count(a) != count(b) {
        return false;
    }
    (0..a.signature().relations().len())
        .all(|r| a.relation_tuples(r).len() == b.relation_tuples(r).len())
}

/// First embedding of `source` into `target` extending `pinned`, if any.
pub fn find_embedding(
    source: &Structure,
    target: &Structure,
    pinned: &BTreeMap<ElementId, ElementId>,
    limits: &Limits,
) -> Result<Option<Embedding>, StructureError> {
    let mut found = None;
    search_maps(source, target, MapKind::Embedding, pinned, limits, |e| {
        found = Some(e);
        ControlFlow::Break(())
    })?;
    Ok(found)
}

/// Every embedding of `source` into `target` extending `pinned`, sorted.
pub fn all_embeddings(
    source: &Structure,
    target: &Structure,
    pinned: &BTreeMap<ElementId, ElementId>,
    limits: &Limits,
) -> Result<Vec<Embedding>, StructureError> {
    let mut out = Vec::new();
    search_maps(source, target, MapKind::Embedding, pinned, limits, |e| {
        out.push(e);
        ControlFlow::Continue(())
    })?;
    out.sort();
    Ok(out)
}

/// A witnessing isomorphism `a -> b`, or `None`.
pub fn isomorphic(a: &Structure, b: &Structure, limits: &Limits) -> Result<Option<Embedding>, StructureError> {
    isomorphic_extending(a, b, &BTreeMap::new(), limits)
}

pub fn isomorphic_extending(
    a: &Structure,
    b: &Structure,
    pinned: &BTreeMap<ElementId, ElementId>,
    limits: &Limits,
) -> Result<Option<Embedding>, StructureError> {
    if std::ptr::eq(a, b) && pinned.iter().all(|(x, y)| x == y) {
        return Ok(Some(Embedding::identity(a)));
    }
    let mut found = None;
    search_maps(a, b, MapKind::Isomorphism, pinned, limits, |e| {
        found = Some(e);
        ControlFlow::Break(())
    })?;
    Ok(found)
}

/// The complete automorphism group, identity first, the rest in map order.
pub fn automorphisms(a: &Structure, limits: &Limits) -> Result<Vec<Embedding>, StructureError> {
    if a.len() > limits.automorphism_elements {
        return Err(GuardExceeded {
            what: "automorphism search size",
            limit: limits.automorphism_elements as u64,
        }
        .into());
    }
    let mut out = Vec::new();
    search_maps(a, a, MapKind::Isomorphism, &BTreeMap::new(), limits, |e| {
        out.push(e);
        ControlFlow::Continue(())
    })?;
    out.sort_by_key(|e| (!e.is_identity(), e.clone()));
    Ok(out)
}

/// An automorphism of `a` extending `pinned`, without the size cap of [`automorphisms`].
pub fn automorphism_extending(
    a: &Structure,
    pinned: &BTreeMap<ElementId, ElementId>,
    limits: &Limits,
) -> Result<Option<Embedding>, StructureError> {
    let mut found = None;
    search_maps(a, a, MapKind::Isomorphism, pinned, limits, |e| {
        found = Some(e);
        ControlFlow::Break(())
    })?;
    Ok(found)
}
