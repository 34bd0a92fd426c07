//! Trees `X^{<depth}` with a guest structure at every node, whose
//! indiscernibles are the node's immediate successors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{GuardExceeded, Limits};
use crate::merger::projection::{check_projection, fiber_sizes, projection_with_fibers, B, P};
use crate::merger::{predicate_members, TaggedGuestFamily};
use crate::structure::{ElementId, Embedding, Structure};
use crate::verdict::Verdict;

/// A finite sequence of letters; the root is the empty word.
pub type Word = Vec<u32>;

pub fn show_word(w: &[u32]) -> String {
    let mut s = String::from("<");
    for (i, a) in w.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{a}");
    }
    s.push('>');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeNode {
    pub word: Word,
    pub guest: Structure,
    /// Each indiscernible of the guest with the letter of the successor it stands for.
    pub successors: Vec<(ElementId, u32)>,
}

impl TreeNode {
    pub fn letters(&self) -> Vec<u32> {
        self.successors.iter().map(|p| p.1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct TreeModel {
    pub depth: usize,
    pub alphabet: Vec<u32>,
    /// Sort or unary relation naming each guest's indiscernibles.
    pub predicate: String,
    /// Keep only branches constant from this level on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eventually_constant: Option<usize>,
    /// V, ordered by length and then lexicographically.
    pub nodes: Vec<TreeNode>,
    /// F, the branches of length `depth`.
    pub branches: Vec<Word>,
    pub h: Vec<(usize, Word)>,
    pub r: Vec<(Word, Word)>,
    pub e: Vec<(usize, Word, Word)>,
}

impl TreeModel {
    pub fn node(&self, w: &[u32]) -> Option<&TreeNode> {
        self.nodes.iter().find(|n| n.word == w)
    }

    fn node_index(&self) -> BTreeMap<&Word, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (&n.word, i)).collect()
    }

    /// The node guests as a family indexed by node position.
    pub fn guest_family(&self) -> TaggedGuestFamily {
        let mut fam = TaggedGuestFamily::new(&self.predicate);
        for (i, n) in self.nodes.iter().enumerate() {
            fam.guests.insert(i as ElementId, n.guest.clone());
        }
        fam
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trees serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<TreeModel> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("tree file: {e}")))
    }
}

fn by_level(a: &Word, b: &Word) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

fn is_constant_from(w: &[u32], level: usize) -> bool {
    w.get(level).is_none_or(|&c| w[level..].iter().all(|&a| a == c))
}

/// Collects nodes with freshly numbered guests and derives H, R, E at the end.
struct TreeBuilder {
    depth: usize,
    predicate: String,
    nodes: BTreeMap<Word, TreeNode>,
    leaves: BTreeSet<Word>,
    next_id: ElementId,
    limit: usize,
}

impl TreeBuilder {
    fn new(depth: usize, predicate: &str, limits: &Limits) -> Self {
        TreeBuilder {
            depth,
            predicate: predicate.to_string(),
            nodes: BTreeMap::new(),
            leaves: BTreeSet::new(),
            next_id: 0,
            limit: limits.tree_nodes,
        }
    }

    fn grow(&self) -> Result<()> {
        if self.nodes.len() + self.leaves.len() >= self.limit {
            return Err(GuardExceeded {
                what: "tree size",
                limit: self.limit as u64,
            }
            .into());
        }
        Ok(())
    }

    /// Stores `guest` at `word` under fresh ids and returns the renaming.
    fn add_node(&mut self, word: Word, guest: &Structure, successors: &[(ElementId, u32)]) -> Result<Embedding> {
        self.grow()?;
        let shift: BTreeMap<ElementId, ElementId> = guest
            .ids()
            .enumerate()
            .map(|(i, e)| (e, self.next_id + i as ElementId))
            .collect();
        self.next_id += guest.len() as ElementId;
        let successors = successors.iter().map(|&(e, a)| (shift[&e], a)).collect();
        self.nodes.insert(
            word.clone(),
            TreeNode {
                word,
                guest: guest.relabel(&shift),
                successors,
            },
        );
        Ok(Embedding::new(shift))
    }

    fn add_leaf(&mut self, word: Word) -> Result<()> {
        self.grow()?;
        self.leaves.insert(word);
        Ok(())
    }

    fn finish(self, eventually_constant: Option<usize>) -> TreeModel {
        let mut nodes: Vec<TreeNode> = self.nodes.into_values().collect();
        nodes.sort_by(|a, b| by_level(&a.word, &b.word));
        let branches: Vec<Word> = self
            .leaves
            .into_iter()
            .filter(|w| eventually_constant.is_none_or(|c| is_constant_from(w, c)))
            .collect();
        let alphabet: BTreeSet<u32> = nodes.iter().flat_map(|n| n.letters()).collect();
        let h = nodes.iter().map(|n| (n.word.len(), n.word.clone())).collect();
        let mut r = Vec::new();
        for n in &nodes {
            let mut letters = n.letters();
            letters.sort_unstable();
            for a in letters {
                let mut v = n.word.clone();
                v.push(a);
                r.push((n.word.clone(), v));
            }
        }
        r.sort_by(|a, b| by_level(&a.0, &b.0).then_with(|| a.1.cmp(&b.1)));
        let mut e = Vec::new();
        for f in &branches {
            for k in 0..self.depth {
                e.push((k, f.clone(), f[..k].to_vec()));
            }
        }
        TreeModel {
            depth: self.depth,
            alphabet: alphabet.into_iter().collect(),
            predicate: self.predicate,
            eventually_constant,
            nodes,
            branches,
            h,
            r,
            e,
        }
    }
}

/// The full `alphabet_size`-splitting tree of the given depth with a fresh
/// copy of `template` at every node. The template's indiscernibles, in id
/// order, name the letters `0..alphabet_size`.
pub fn build_tree(
    alphabet_size: usize,
    depth: usize,
    template: &Structure,
    predicate: &str,
    eventually_constant: Option<usize>,
    limits: &Limits,
) -> Result<TreeModel> {
    if alphabet_size == 0 || depth == 0 {
        return Err(Error::Invalid("alphabet size and depth must be at least 1".into()));
    }
    let members = predicate_members(template, predicate)?;
    if members.len() != alphabet_size {
        return Err(Error::Invalid(format!(
            "the guest has {} indiscernibles, the alphabet {alphabet_size} letters",
            members.len()
        )));
    }
    let total: f64 = (0..=depth).map(|i| (alphabet_size as f64).powi(i as i32)).sum();
    if total > limits.tree_nodes as f64 {
        return Err(GuardExceeded {
            what: "tree size",
            limit: limits.tree_nodes as u64,
        }
        .into());
    }
    let successors: Vec<(ElementId, u32)> = members.iter().enumerate().map(|(i, &e)| (e, i as u32)).collect();
    let mut b = TreeBuilder::new(depth, predicate, limits);
    let mut level: Vec<Word> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in level {
            b.add_node(w.clone(), template, &successors)?;
            for a in 0..alphabet_size as u32 {
                let mut v = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        level = next;
    }
    for w in level {
        b.add_leaf(w)?;
    }
    Ok(b.finish(eventually_constant))
}

/// Evaluates every tree invariant and collects all violations.
pub fn check_tree(t: &TreeModel) -> Verdict {
    let mut v = Verdict::ok();
    let index = t.node_index();
    let id = |w: &Word| index.get(w).map(|&i| i as ElementId).into_iter().collect::<Vec<_>>();
    let vset: BTreeSet<&Word> = t.nodes.iter().map(|n| &n.word).collect();
    let fset: BTreeSet<&Word> = t.branches.iter().collect();

    if t.depth == 0 {
        v.push("shape", "depth must be at least 1", vec![]);
    }
    if vset.len() != t.nodes.len() {
        v.push("shape", "a node is listed twice", vec![]);
    }
    if fset.len() != t.branches.len() {
        v.push("shape", "a branch is listed twice", vec![]);
    }
    for n in &t.nodes {
        if n.word.len() >= t.depth {
            v.push("shape", format!("node {} is not shorter than the depth", show_word(&n.word)), id(&n.word));
        }
    }
    for f in &t.branches {
        if f.len() != t.depth {
            v.push("shape", format!("branch {} does not have length {}", show_word(f), t.depth), vec![]);
        }
    }

    let roots = t.nodes.iter().filter(|n| n.word.is_empty()).count();
    if roots != 1 {
        v.push("root", format!("level 0 has {roots} nodes"), vec![]);
    }

    let h: BTreeSet<&(usize, Word)> = t.h.iter().collect();
    for (n, w) in &t.h {
        if !vset.contains(w) {
            v.push("H-level", format!("H({n}, {}) names no node", show_word(w)), vec![]);
        } else if w.len() != *n {
            v.push("H-level", format!("H({n}, {}) but the node is at level {}", show_word(w), w.len()), id(w));
        }
    }
    for w in &vset {
        if !h.contains(&(w.len(), (*w).clone())) {
            v.push("H-level", format!("H({}, {}) missing", w.len(), show_word(w)), id(w));
        }
    }

    let r: BTreeSet<&(Word, Word)> = t.r.iter().collect();
    let mut r_out: BTreeMap<&Word, BTreeSet<&Word>> = BTreeMap::new();
    for (a, b) in &t.r {
        let ok = vset.contains(a)
            && b.len() == a.len() + 1
            && b.starts_with(a)
            && (b.len() == t.depth || vset.contains(b));
        if !ok {
            v.push("R-successor", format!("R({}, {}) is not an immediate successor in the tree", show_word(a), show_word(b)), id(a));
        }
        r_out.entry(a).or_default().insert(b);
    }
    for w in vset.iter().chain(fset.iter()) {
        if let Some((_, parent)) = w.split_last() {
            if !r.contains(&(parent.to_vec(), (*w).clone())) {
                v.push("R-successor", format!("R({}, {}) missing", show_word(parent), show_word(w)), id(w));
            }
        }
    }

    for (i, n) in t.nodes.iter().enumerate() {
        let members: BTreeSet<ElementId> = match predicate_members(&n.guest, &t.predicate) {
            Ok(m) => m.into_iter().collect(),
            Err(e) => {
                v.push("guest", format!("guest at {}: {e}", show_word(&n.word)), vec![i as ElementId]);
                continue;
            }
        };
        let named: BTreeSet<ElementId> = n.successors.iter().map(|p| p.0).collect();
        let letters: BTreeSet<u32> = n.successors.iter().map(|p| p.1).collect();
        if named != members || named.len() != n.successors.len() || letters.len() != n.successors.len() {
            v.push(
                "R-indiscernibles",
                format!("at node {} the successor labels are not a bijection on the guest's indiscernibles", show_word(&n.word)),
                vec![i as ElementId],
            );
        }
        let want: BTreeSet<Word> = letters
            .iter()
            .map(|&a| {
                let mut w = n.word.clone();
                w.push(a);
                w
            })
            .collect();
        let have: BTreeSet<Word> = r_out.get(&n.word).into_iter().flatten().map(|w| (*w).clone()).collect();
        if want != have {
            v.push(
                "R-indiscernibles",
                format!(
                    "at node {} R(u,.) has {} elements, the guest {} indiscernibles",
                    show_word(&n.word),
                    have.len(),
                    want.len()
                ),
                vec![i as ElementId],
            );
        }
    }

    let mut want_f: BTreeSet<Word> = BTreeSet::new();
    for n in t.nodes.iter().filter(|n| n.word.len() + 1 == t.depth) {
        for a in n.letters() {
            let mut w = n.word.clone();
            w.push(a);
            if t.eventually_constant.is_none_or(|c| is_constant_from(&w, c)) {
                want_f.insert(w);
            }
        }
    }
    let have_f: BTreeSet<Word> = t.branches.iter().cloned().collect();
    for w in want_f.difference(&have_f) {
        v.push("shape", format!("branch {} missing", show_word(w)), vec![]);
    }
    for w in have_f.difference(&want_f) {
        v.push("shape", format!("branch {} is not a branch of the tree", show_word(w)), vec![]);
    }

    let e: BTreeSet<&(usize, Word, Word)> = t.e.iter().collect();
    for (k, f, w) in &t.e {
        if !fset.contains(f) || *k >= t.depth || f.len() < *k || f[..*k] != w[..] {
            v.push("E-restriction", format!("E({k}, {}, {}) does not restrict the branch", show_word(f), show_word(w)), vec![]);
        }
    }
    for f in &t.branches {
        for k in 0..t.depth.min(f.len()) {
            if !e.contains(&(k, f.clone(), f[..k].to_vec())) {
                v.push("E-restriction", format!("E({k}, {}, {}) missing", show_word(f), show_word(&f[..k])), vec![]);
            }
        }
    }

    v.merge(t.guest_family().check_disjoint());
    v
}

/// A map of words with a guest embedding at every node.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeEmbedding {
    pub words: Vec<(Word, Word)>,
    pub guests: Vec<(Word, Embedding)>,
}

impl TreeEmbedding {
    fn word_map(&self) -> BTreeMap<&Word, &Word> {
        self.words.iter().map(|(a, b)| (a, b)).collect()
    }
}

/// Checks that `emb` maps nodes to nodes and branches to branches
/// injectively, preserves and reflects H, R and E, and restricts at every
/// node to a guest embedding sending successor labels along the word map.
pub fn check_tree_embedding(src: &TreeModel, tgt: &TreeModel, emb: &TreeEmbedding) -> Verdict {
    let mut v = Verdict::ok();
    let map = emb.word_map();
    let inverse: BTreeMap<&Word, &Word> = map.iter().map(|(a, b)| (*b, *a)).collect();
    if inverse.len() != map.len() {
        v.push("shape", "the word map is not injective", vec![]);
    }
    let tv: BTreeSet<&Word> = tgt.nodes.iter().map(|n| &n.word).collect();
    let tf: BTreeSet<&Word> = tgt.branches.iter().collect();
    for n in &src.nodes {
        match map.get(&n.word) {
            Some(w) if tv.contains(w) => {}
            _ => v.push("shape", format!("node {} has no image node", show_word(&n.word)), vec![]),
        }
    }
    for f in &src.branches {
        match map.get(f) {
            Some(w) if tf.contains(w) => {}
            _ => v.push("shape", format!("branch {} has no image branch", show_word(f)), vec![]),
        }
    }
    if !v.valid {
        return v;
    }
    let m = |w: &Word| map.get(w).map(|x| (*x).clone());
    let pre = |w: &Word| inverse.get(w).map(|x| (*x).clone());

    let th: BTreeSet<&(usize, Word)> = tgt.h.iter().collect();
    let sh: BTreeSet<&(usize, Word)> = src.h.iter().collect();
    for (n, w) in &src.h {
        if m(w).is_none_or(|x| !th.contains(&(*n, x))) {
            v.push("H-level", format!("H({n}, {}) not preserved", show_word(w)), vec![]);
        }
    }
    for (n, w) in &tgt.h {
        if let Some(p) = pre(w) {
            if !sh.contains(&(*n, p.clone())) {
                v.push("H-level", format!("H({n}, {}) not reflected", show_word(w)), vec![]);
            }
        }
    }

    let tr: BTreeSet<&(Word, Word)> = tgt.r.iter().collect();
    let sr: BTreeSet<&(Word, Word)> = src.r.iter().collect();
    for (a, b) in &src.r {
        if let (Some(x), Some(y)) = (m(a), m(b)) {
            if !tr.contains(&(x, y)) {
                v.push("R-successor", format!("R({}, {}) not preserved", show_word(a), show_word(b)), vec![]);
            }
        }
    }
    for (a, b) in &tgt.r {
        if let (Some(x), Some(y)) = (pre(a), pre(b)) {
            if !sr.contains(&(x, y)) {
                v.push("R-successor", format!("R({}, {}) not reflected", show_word(a), show_word(b)), vec![]);
            }
        }
    }

    let te: BTreeSet<&(usize, Word, Word)> = tgt.e.iter().collect();
    let se: BTreeSet<&(usize, Word, Word)> = src.e.iter().collect();
    for (k, f, w) in &src.e {
        if let (Some(x), Some(y)) = (m(f), m(w)) {
            if !te.contains(&(*k, x, y)) {
                v.push("E-restriction", format!("E({k}, {}, {}) not preserved", show_word(f), show_word(w)), vec![]);
            }
        }
    }
    for (k, f, w) in &tgt.e {
        if let (Some(x), Some(y)) = (pre(f), pre(w)) {
            if !se.contains(&(*k, x, y)) {
                v.push("E-restriction", format!("E({k}, {}, {}) not reflected", show_word(f), show_word(w)), vec![]);
            }
        }
    }

    let guests: BTreeMap<&Word, &Embedding> = emb.guests.iter().map(|(w, e)| (w, e)).collect();
    for n in &src.nodes {
        let image = m(&n.word).expect("checked above");
        let target = tgt.node(&image).expect("checked above");
        let Some(ge) = guests.get(&n.word) else {
            v.push("guest", format!("no guest embedding at {}", show_word(&n.word)), vec![]);
            continue;
        };
        if let Err(e) = ge.check(&n.guest, &target.guest) {
            v.push("guest", format!("guest map at {}: {e}", show_word(&n.word)), vec![]);
            continue;
        }
        let labels: BTreeMap<ElementId, u32> = target.successors.iter().copied().collect();
        for &(e, a) in &n.successors {
            let mut child = n.word.clone();
            child.push(a);
            let Some(child_img) = m(&child) else { continue };
            let ok = ge
                .apply(e)
                .and_then(|x| labels.get(&x))
                .is_some_and(|&b| child_img == [image.as_slice(), &[b]].concat());
            if !ok {
                v.push(
                    "R-indiscernibles",
                    format!("at {} the guest map does not follow successor {}", show_word(&n.word), show_word(&child)),
                    vec![],
                );
            }
        }
    }
    v
}

/// Joint embedding of guests, as the tree recursion needs it.
pub trait GuestJoiner {
    /// A common extension of `g0` and `g1` together with embeddings of both.
    fn joint(&self, g0: &Structure, g1: &Structure) -> Result<(Structure, Embedding, Embedding)>;
    /// A guest with `size` indiscernibles, for nodes attached from scratch.
    fn fresh(&self, size: usize) -> Result<Structure>;
}

/// Joins projection guests by pairing the i-th B elements of both sides,
/// each fiber as large as the larger of the two, plus `extra` new B
/// elements with one preimage each.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProjectionJoiner {
    pub extra: usize,
}

impl GuestJoiner for ProjectionJoiner {
    fn joint(&self, g0: &Structure, g1: &Structure) -> Result<(Structure, Embedding, Embedding)> {
        for g in [g0, g1] {
            let v = check_projection(g, 1)?;
            if !v.valid {
                return Err(Error::NotInClass {
                    class: "projection".into(),
                    detail: v.first_detail(),
                });
            }
        }
        let f0: Vec<(ElementId, usize)> = fiber_sizes(g0).into_iter().collect();
        let f1: Vec<(ElementId, usize)> = fiber_sizes(g1).into_iter().collect();
        let n = f0.len().max(f1.len());
        let mut sizes: Vec<usize> = (0..n)
            .map(|i| f0.get(i).map_or(0, |p| p.1).max(f1.get(i).map_or(0, |p| p.1)))
            .collect();
        sizes.extend(std::iter::repeat_n(1, self.extra));
        let d = projection_with_fibers(&sizes);
        let d_fibers: Vec<Vec<ElementId>> = {
            let mut fib = vec![Vec::new(); sizes.len()];
            for t in d.tuples(P).into_iter().flatten() {
                fib[t[1] as usize].push(t[0]);
            }
            fib
        };
        let embed = |g: &Structure, fibers: &[(ElementId, usize)]| {
            let mut map = BTreeMap::new();
            for (i, &(b, _)) in fibers.iter().enumerate() {
                map.insert(b, i as ElementId);
                let pre: Vec<ElementId> = g
                    .tuples(P)
                    .into_iter()
                    .flatten()
                    .filter(|t| t[1] == b)
                    .map(|t| t[0])
                    .collect();
                for (a, &target) in pre.iter().zip(&d_fibers[i]) {
                    map.insert(*a, target);
                }
            }
            Embedding::new(map)
        };
        let e0 = embed(g0, &f0);
        let e1 = embed(g1, &f1);
        Ok((d, e0, e1))
    }

    fn fresh(&self, size: usize) -> Result<Structure> {
        Ok(projection_with_fibers(&vec![1; size]))
    }
}

/// The common tree with embeddings of both inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointEmbedding {
    pub tree: TreeModel,
    pub left: TreeEmbedding,
    pub right: TreeEmbedding,
}

struct Joint<'a, J: GuestJoiner + ?Sized> {
    t: [&'a TreeModel; 2],
    idx: [BTreeMap<&'a Word, usize>; 2],
    branches: [BTreeSet<&'a Word>; 2],
    joiner: &'a J,
    fresh_size: usize,
    builder: TreeBuilder,
    out: [TreeEmbedding; 2],
}

impl<J: GuestJoiner + ?Sized> Joint<'_, J> {
    fn node(&self, side: usize, w: &Word) -> &TreeNode {
        &self.t[side].nodes[self.idx[side][w]]
    }

    fn record(&mut self, side: usize, src: &Word, target: &Word, guest: Option<Embedding>) {
        self.out[side].words.push((src.clone(), target.clone()));
        if let Some(g) = guest {
            self.out[side].guests.push((src.clone(), g));
        }
    }

    fn walk(&mut self, w: Word, src: [Option<Word>; 2]) -> Result<()> {
        if w.len() == self.builder.depth {
            self.builder.add_leaf(w.clone())?;
            for (side, s) in src.iter().enumerate() {
                if let Some(s) = s {
                    if self.branches[side].contains(s) {
                        self.record(side, s, &w, None);
                    }
                }
            }
            return Ok(());
        }
        match &src {
            [Some(u0), Some(u1)] => {
                let (n0, n1) = (self.node(0, u0).clone(), self.node(1, u1).clone());
                let (d, e0, e1) = self.joiner.joint(&n0.guest, &n1.guest).map_err(|e| {
                    Error::Invalid(format!("guest joint embedding failed at node {}: {e}", show_word(u0)))
                })?;
                let members = predicate_members(&d, &self.t[0].predicate)?;
                let successors: Vec<(ElementId, u32)> =
                    members.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
                let shift = self.builder.add_node(w.clone(), &d, &successors)?;
                self.record(0, u0, &w, Some(e0.then(&shift)));
                self.record(1, u1, &w, Some(e1.then(&shift)));
                for (i, &m) in members.iter().enumerate() {
                    let child = |n: &TreeNode, e: &Embedding| {
                        n.successors.iter().find(|(x, _)| e.apply(*x) == Some(m)).map(|&(_, a)| {
                            let mut c = n.word.clone();
                            c.push(a);
                            c
                        })
                    };
                    let next = [child(&n0, &e0), child(&n1, &e1)];
                    let mut cw = w.clone();
                    cw.push(i as u32);
                    self.walk(cw, next)?;
                }
            }
            [Some(u), None] | [None, Some(u)] => {
                let side = if src[0].is_some() { 0 } else { 1 };
                let n = self.node(side, u).clone();
                let shift = self.builder.add_node(w.clone(), &n.guest, &n.successors)?;
                self.record(side, u, &w, Some(shift));
                for (_, a) in &n.successors {
                    let mut c = u.clone();
                    c.push(*a);
                    let mut cw = w.clone();
                    cw.push(*a);
                    let mut next = [None, None];
                    next[side] = Some(c);
                    self.walk(cw, next)?;
                }
            }
            [None, None] => {
                let g = self.joiner.fresh(self.fresh_size)?;
                let members = predicate_members(&g, &self.t[0].predicate)?;
                let successors: Vec<(ElementId, u32)> =
                    members.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
                self.builder.add_node(w.clone(), &g, &successors)?;
                for i in 0..members.len() {
                    let mut cw = w.clone();
                    cw.push(i as u32);
                    self.walk(cw, [None, None])?;
                }
            }
        }
        Ok(())
    }
}

/// Joint embedding of two trees of equal depth: roots are identified and
/// their guests jointly embedded; successors reached from one side only
/// carry that side's subtree, successors reached from both recurse, and
/// successors reached from neither get a fresh full subtree whose nodes
/// split as widely as the larger input alphabet.
pub fn tree_joint_embed<J: GuestJoiner + ?Sized>(
    t0: &TreeModel,
    t1: &TreeModel,
    joiner: &J,
    limits: &Limits,
) -> Result<JointEmbedding> {
    if t0.depth != t1.depth {
        return Err(Error::Invalid(format!("depths differ: {} and {}", t0.depth, t1.depth)));
    }
    if t0.predicate != t1.predicate {
        return Err(Error::Invalid("the trees name their indiscernibles differently".into()));
    }
    for t in [t0, t1] {
        let v = check_tree(t);
        if !v.valid {
            return Err(Error::Invalid(format!("input tree: {}", v.first_detail())));
        }
    }
    let mut j = Joint {
        t: [t0, t1],
        idx: [t0.node_index(), t1.node_index()],
        branches: [t0.branches.iter().collect(), t1.branches.iter().collect()],
        joiner,
        fresh_size: t0.alphabet.len().max(t1.alphabet.len()),
        builder: TreeBuilder::new(t0.depth, &t0.predicate, limits),
        out: [TreeEmbedding::default(), TreeEmbedding::default()],
    };
    j.walk(Vec::new(), [Some(Vec::new()), Some(Vec::new())])?;
    let [mut left, mut right] = j.out;
    for e in [&mut left, &mut right] {
        e.words.sort_by(|a, b| by_level(&a.0, &b.0));
        e.guests.sort_by(|a, b| by_level(&a.0, &b.0));
    }
    Ok(JointEmbedding {
        tree: j.builder.finish(None),
        left,
        right,
    })
}

/// Default guest template for trees: `size` B elements with one preimage each.
pub fn projection_template(size: usize) -> Structure {
    projection_with_fibers(&vec![1; size])
}

/// Predicate for projection-guest trees.
pub const PROJECTION_PREDICATE: &str = B;
