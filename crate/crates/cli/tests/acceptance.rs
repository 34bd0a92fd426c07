//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use forge_core::class::ClassTag;
use forge_core::derived::{
    all_meet_tables, build_tree, check_meet_law, check_tree, check_tree_embedding, meet_from_bit_vectors,
    projection_template, realize_meet, tree_joint_embed, ProjectionJoiner, TreeEmbedding, TreeModel, MEET_F, MEET_X,
    MEET_Y,
};
use forge_core::generic::{
    build_generic_chain, chain_amalgamate, end_extend, richness_certificate, verify_end_extension_necessity, Chain,
    ExtensionKind, ScheduleBudget,
};
use forge_core::knight::{
    check_k0, knight_q_signature, knight_signature, G_FAMILY, G_FN, Q_REL, X, Y,
};
use forge_core::merger::{
    build_projection_generic, check_absolute_indiscernibles, fiber_equalizing_chain, guest_restriction,
    host_restriction, merge_structures, merger_equivalence, projection_with_fibers, Fate, MergerSide, MergerSpec,
};
use forge_core::structure::{
    all_embeddings, ef_game, find_embedding, structure_to_json, ElementId, Embedding, Player, Signature, Structure,
};
use forge_core::Limits;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn lim() -> Limits {
    Limits::default()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- oracles

fn perms<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in perms(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

/// Direct evaluation of the K0 axioms, written against the raw tuples.
fn k0_oracle(s: &Structure) -> bool {
    let xs = s.elements_of_sort(X);
    let ys: Vec<ElementId> = s.order(Y).map(|o| o.to_vec()).unwrap_or_default();
    if ys.len() != s.elements_of_sort(Y).len() {
        return false;
    }
    let pos = |e: ElementId| ys.iter().position(|&y| y == e);
    let g: Vec<&Vec<ElementId>> = s.tuples(G_FN).into_iter().flatten().collect();
    let value = |x: ElementId, y: ElementId| -> Vec<ElementId> {
        g.iter().filter(|t| t[0] == x && t[1] == y).map(|t| t[2]).collect()
    };
    // g total, functional, below its argument
    for &x in &xs {
        for &y in &ys {
            let v = value(x, y);
            if v.len() != 1 || pos(v[0]).is_none() || pos(v[0]) > pos(y) {
                return false;
            }
        }
    }
    // onto W_y
    for &y in &ys {
        for &z in &ys[..=pos(y).unwrap()] {
            if !xs.iter().any(|&x| value(x, y) == [z]) {
                return false;
            }
        }
    }
    // G names exactly the fibers below the diagonal, in every order
    let big: BTreeSet<Vec<ElementId>> = s.tuples(G_FAMILY).into_iter().flatten().cloned().collect();
    let mut expected = BTreeSet::new();
    for (j, &y) in ys.iter().enumerate() {
        for &z in &ys[..j] {
            let fiber: Vec<ElementId> = xs.iter().copied().filter(|&x| value(x, y) == [z]).collect();
            for mut p in perms(&fiber) {
                p.push(y);
                p.push(z);
                expected.insert(p);
            }
        }
    }
    big == expected
}

/// `emb` makes `src` an induced substructure of `tgt`.
fn substructure_oracle(src: &Structure, tgt: &Structure, emb: &Embedding) -> bool {
    let ids: BTreeSet<ElementId> = src.ids().collect();
    if emb.map.keys().copied().collect::<BTreeSet<_>>() != ids || emb.image().len() != ids.len() {
        return false;
    }
    if ids.iter().any(|&e| src.sort_name_of(e) != emb.apply(e).and_then(|f| tgt.sort_name_of(f))) {
        return false;
    }
    let back: BTreeMap<ElementId, ElementId> = emb.map.iter().map(|(&a, &b)| (b, a)).collect();
    tgt.induced(&emb.image()).relabel(&back) == *src
}

fn fiber(s: &Structure, y: ElementId, z: ElementId) -> BTreeSet<ElementId> {
    s.tuples(G_FN)
        .into_iter()
        .flatten()
        .filter(|t| t[1] == y && t[2] == z)
        .map(|t| t[0])
        .collect()
}

fn g_at(s: &Structure, x: ElementId, y: ElementId) -> Option<ElementId> {
    s.tuples(G_FN).into_iter().flatten().find(|t| t[0] == x && t[1] == y).map(|t| t[2])
}

// ---------------------------------------------------------------- 1

fn raw_knight(nx: usize, ny: usize, g: &[[ElementId; 3]], big: &[Vec<ElementId>]) -> Structure {
    let mut s = Structure::new(knight_signature());
    for x in 0..nx {
        s.add_element(x as ElementId, X).unwrap();
    }
    for y in 0..ny {
        s.add_element((nx + y) as ElementId, Y).unwrap();
    }
    for t in g {
        s.insert_tuple(G_FN, t.to_vec()).unwrap();
    }
    for t in big {
        s.insert_tuple(G_FAMILY, t.clone()).unwrap();
    }
    s
}

fn criterion_1() -> Outcome {
    let mut total = 0usize;
    let mut members = 0usize;
    let mut mutants = 0usize;
    for nx in 0..=2usize {
        for ny in 0..=2usize {
            let xs: Vec<ElementId> = (0..nx as ElementId).collect();
            let ys: Vec<ElementId> = (nx as ElementId..(nx + ny) as ElementId).collect();
            let mut g_cands: Vec<[ElementId; 3]> = Vec::new();
            for &x in &xs {
                for &y in &ys {
                    for &z in &ys {
                        g_cands.push([x, y, z]);
                    }
                }
            }
            // G tuples of arity 1 and 2 with distinct arguments and z <= y
            let mut big_cands: Vec<Vec<ElementId>> = Vec::new();
            for &y in &ys {
                for &z in ys.iter().filter(|&&z| z <= y) {
                    for &x in &xs {
                        big_cands.push(vec![x, y, z]);
                    }
                    for &x0 in &xs {
                        for &x1 in xs.iter().filter(|&&x1| x1 != x0) {
                            big_cands.push(vec![x0, x1, y, z]);
                        }
                    }
                }
            }
            // X permutations act on candidate indices; Y is rigid
            let swaps: Vec<BTreeMap<ElementId, ElementId>> = perms(&xs)
                .into_iter()
                .map(|p| xs.iter().copied().zip(p).chain(ys.iter().map(|&y| (y, y))).collect())
                .collect();
            let index_of = |cands: &[Vec<ElementId>], t: &[ElementId]| cands.iter().position(|c| c == t).unwrap();
            let g_vecs: Vec<Vec<ElementId>> = g_cands.iter().map(|t| t.to_vec()).collect();
            let moves: Vec<Vec<usize>> = swaps
                .iter()
                .map(|m| {
                    g_vecs
                        .iter()
                        .map(|t| index_of(&g_vecs, &t.iter().map(|e| m[e]).collect::<Vec<_>>()))
                        .chain(big_cands.iter().map(|t| {
                            g_vecs.len() + index_of(&big_cands, &t.iter().map(|e| m[e]).collect::<Vec<_>>())
                        }))
                        .collect()
                })
                .collect();
            let bits = g_cands.len() + big_cands.len();
            for mask in 0u64..(1u64 << bits) {
                let canonical = moves.iter().all(|mv| {
                    let mut image = 0u64;
                    for (i, &j) in mv.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            image |= 1 << j;
                        }
                    }
                    mask <= image
                });
                if !canonical {
                    continue;
                }
                let g: Vec<[ElementId; 3]> =
                    (0..g_cands.len()).filter(|i| mask >> i & 1 == 1).map(|i| g_cands[i]).collect();
                let big: Vec<Vec<ElementId>> = (0..big_cands.len())
                    .filter(|i| mask >> (g_cands.len() + i) & 1 == 1)
                    .map(|i| big_cands[i].clone())
                    .collect();
                let s = raw_knight(nx, ny, &g, &big);
                let want = k0_oracle(&s);
                let got = check_k0(&s).map_err(|e| e.to_string())?.valid;
                ensure(want == got, || format!("disagreement on {}", structure_to_json(&s)))?;
                total += 1;
                if want {
                    members += 1;
                    // members plus one stray G tuple: above the diagonal, repeated or overlong
                    let mut strays: Vec<Vec<ElementId>> = Vec::new();
                    for &y in &ys {
                        for &z in ys.iter().filter(|&&z| z > y) {
                            for &x in &xs {
                                strays.push(vec![x, y, z]);
                            }
                        }
                        for &z in ys.iter().filter(|&&z| z < y) {
                            for &x in &xs {
                                strays.push(vec![x, x, y, z]);
                                strays.push(vec![x, x, x, y, z]);
                            }
                        }
                    }
                    for t in strays {
                        let mut m = big.clone();
                        m.push(t);
                        let s = raw_knight(nx, ny, &g, &m);
                        let want = k0_oracle(&s);
                        let got = check_k0(&s).map_err(|e| e.to_string())?.valid;
                        ensure(want == got, || format!("disagreement on {}", structure_to_json(&s)))?;
                        mutants += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{total} structures up to X-permutation, {members} in K0, {mutants} stray-G variants; all agree"))
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let l = lim();
    let corpus = ClassTag::K0.enumerate(4);
    let mut embs: BTreeMap<(usize, usize), Vec<Embedding>> = BTreeMap::new();
    for (i, a) in corpus.iter().enumerate() {
        for (j, b) in corpus.iter().enumerate() {
            if a.len() <= b.len() {
                let e = all_embeddings(a, b, &BTreeMap::new(), &l).map_err(|e| e.to_string())?;
                if !e.is_empty() {
                    embs.insert((i, j), e);
                }
            }
        }
    }
    let mut instances: Vec<(usize, usize, usize, usize, usize)> = Vec::new();
    for (&(i, j), eb) in &embs {
        for (&(i2, k), ec) in embs.range((i, 0)..(i + 1, 0)) {
            debug_assert_eq!(i, i2);
            for p in 0..eb.len() {
                for q in 0..ec.len() {
                    instances.push((i, j, k, p, q));
                }
            }
        }
    }
    let all = instances.len();
    let seed = 0u64;
    let chosen: Vec<usize> = if all > 500 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = sample(&mut rng, all, 500).into_vec();
        v.sort_unstable();
        v
    } else {
        (0..all).collect()
    };
    for &n in &chosen {
        let (i, j, k, p, q) = instances[n];
        let (a, b, c) = (&corpus[i], &corpus[j], &corpus[k]);
        let (eab, eac) = (&embs[&(i, j)][p], &embs[&(i, k)][q]);
        let am = ClassTag::K0.amalgamate(a, b, c, eab, eac).map_err(|e| format!("instance {n}: {e}"))?;
        let d = &am.structure;
        ensure(k0_oracle(d), || format!("instance {n}: amalgam outside K0"))?;
        ensure(substructure_oracle(b, d, &am.from_b), || format!("instance {n}: B not a substructure"))?;
        ensure(substructure_oracle(c, d, &am.from_c), || format!("instance {n}: C not a substructure"))?;
        let via_b = eab.then(&am.from_b);
        ensure(via_b == eac.then(&am.from_c), || format!("instance {n}: square does not commute"))?;
        let meet: BTreeSet<ElementId> = am.from_b.image().intersection(&am.from_c.image()).copied().collect();
        ensure(meet == via_b.image(), || format!("instance {n}: images meet outside A"))?;
    }
    Ok(format!(
        "{} K0 structures of size <= 4, {all} triples with embeddings, {} checked (sample seed {seed})",
        corpus.len(),
        chosen.len()
    ))
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let l = lim();
    let pairs = ClassTag::K0.good_pairs(4, &l).map_err(|e| e.to_string())?;
    let stages = ClassTag::K0.enumerate(6);
    let (mut plain, mut repaired, mut tops) = (0usize, 0usize, 0usize);
    'outer: for c in &stages {
        for pair in &pairs {
            let embs = all_embeddings(&pair.a, c, &BTreeMap::new(), &l).map_err(|e| e.to_string())?;
            for e in &embs {
                let with_p = |r: usize| r < 10;
                if plain >= 90 && !with_p(repaired) {
                    break 'outer;
                }
                let chain = Chain::new(ClassTag::K0, c.clone()).map_err(|e| e.to_string())?;
                let (out, info) = match chain_amalgamate(&chain, &pair.a, &pair.b, Some(e), &l) {
                    Ok(r) => r,
                    // stages with too few X elements for a new top are not instances
                    Err(forge_core::Error::InsufficientX { .. }) => continue,
                    Err(err) => return Err(format!("chain amalgamation failed: {err}")),
                };
                let has_p = info.p_sets.values().any(|p| !p.is_empty());
                if has_p && repaired >= 10 && plain + repaired >= 100 {
                    continue;
                }
                if !has_p && plain >= 90 {
                    continue;
                }
                let d = out.last();
                ensure(k0_oracle(d), || format!("result outside K0 over {}", structure_to_json(c)))?;
                ensure(substructure_oracle(c, d, &Embedding::identity(c)), || "stage not kept".into())?;
                ensure(substructure_oracle(&pair.b, d, &info.from_b), || "guest not embedded".into())?;
                let ys = c.order(Y).unwrap_or(&[]).to_vec();
                for (j, &y) in ys.iter().enumerate() {
                    for &z in &ys[..j] {
                        ensure(fiber(c, y, z) == fiber(d, y, z), || format!("fiber of ({y},{z}) changed"))?;
                    }
                }
                let xd = d.elements_of_sort(X);
                let yd = d.order(Y).unwrap_or(&[]).to_vec();
                for (j, &y) in yd.iter().enumerate() {
                    let hit: BTreeSet<ElementId> = xd.iter().filter_map(|&x| g_at(d, x, y)).collect();
                    ensure(hit == yd[..=j].iter().copied().collect(), || format!("g(_,{y}) not onto W_{y}"))?;
                }
                if has_p {
                    ensure(!info.x_new.is_empty(), || "nonempty P_y without repair elements".into())?;
                    repaired += 1;
                } else {
                    plain += 1;
                }
                if info.top_added {
                    tops += 1;
                }
                if plain + repaired >= 100 && repaired >= 10 {
                    break 'outer;
                }
            }
        }
    }
    ensure(plain + repaired >= 100 && repaired >= 10, || {
        format!("corpus too small: {plain} plain, {repaired} with nonempty P_y")
    })?;
    Ok(format!(
        "{} instances ({repaired} with nonempty P_y, {tops} needing a new top); all in K0, old fibers unchanged, every column onto",
        plain + repaired
    ))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let l = lim();
    let budget = ScheduleBudget { max_guest_size: 2, steps: 50, repetitions: 1 };
    let empty = Structure::new(knight_signature());
    let a = build_generic_chain(ClassTag::K0, empty.clone(), budget, 1, &l).map_err(|e| e.to_string())?;
    let b = build_generic_chain(ClassTag::K0, empty, budget, 2, &l).map_err(|e| e.to_string())?;
    let (fa, fb) = (a.last(), b.last());
    ensure(k0_oracle(fa) && k0_oracle(fb), || "final stage outside K0".into())?;
    let ef = ef_game(fa, fb, 3, &l).map_err(|e| e.to_string())?;
    ensure(ef.winner == Player::Duplicator, || format!("Spoiler wins: {:?}", ef.spoiler_line))?;
    let ab = find_embedding(fa, fb, &BTreeMap::new(), &l).map_err(|e| e.to_string())?;
    let ba = find_embedding(fb, fa, &BTreeMap::new(), &l).map_err(|e| e.to_string())?;
    let ab = ab.ok_or("seed-1 stage does not embed in the seed-2 stage")?;
    let ba = ba.ok_or("seed-2 stage does not embed in the seed-1 stage")?;
    ensure(substructure_oracle(fa, fb, &ab) && substructure_oracle(fb, fa, &ba), || "bad embedding".into())?;
    let mut served = 0;
    for ch in [&a, &b] {
        let r = richness_certificate(ch, 2, &l).map_err(|e| e.to_string())?;
        ensure(r.all_served(), || format!("{} unserved items", r.unserved))?;
        served += r.items.len();
    }
    Ok(format!(
        "stages of {} and {} elements after 50 steps; depth-3 EF equivalent, mutually embeddable; {served} richness items served",
        fa.len(),
        fb.len()
    ))
}

// ---------------------------------------------------------------- 5

fn relativized_seed(nx: usize) -> Structure {
    let mut s = Structure::new(knight_q_signature());
    for x in 0..nx as ElementId {
        s.add_element(x, X).unwrap();
        s.insert_tuple(Q_REL, vec![x]).unwrap();
    }
    s
}

/// `c` with one new Y element at rank `at` (below an old one) and the given column.
fn insert_below(c: &Structure, at: usize, column: &[ElementId]) -> Structure {
    let mut d = c.clone();
    let y = d.fresh_id();
    d.add_element(y, Y).unwrap();
    let mut order = c.order(Y).unwrap().to_vec();
    order.insert(at, y);
    d.set_order(Y, order).unwrap();
    for (x, &z) in c.elements_of_sort(X).into_iter().zip(column) {
        d.insert_tuple(G_FN, vec![x, y, if z == ElementId::MAX { y } else { z }]).unwrap();
    }
    forge_core::knight::amalgam::rebuild_g_family(&mut d);
    d
}

fn criterion_5() -> Outcome {
    let l = lim();
    let budget = ScheduleBudget { max_guest_size: 2, steps: 8, repetitions: 1 };
    let chain = build_generic_chain(ClassTag::KPrime0, relativized_seed(6), budget, 0, &l).map_err(|e| e.to_string())?;
    let ext = end_extend(&chain, 5).map_err(|e| e.to_string())?;
    ensure(ext.len() == chain.len() + 5, || "expected five new stages".into())?;
    let x0 = chain.last().elements_of_sort(X);
    for w in ext.stages[chain.len() - 1..].windows(2) {
        let (c, d) = (&w[0], &w[1]);
        ensure(d.elements_of_sort(X) == x0, || "X changed".into())?;
        let old = c.order(Y).unwrap_or(&[]);
        let new = d.order(Y).unwrap_or(&[]);
        ensure(new.len() == old.len() + 1 && new[..old.len()] == *old, || "new Y not strictly on top".into())?;
        ensure(!d.holds(Q_REL, &[*new.last().unwrap()]), || "new Y inside Q".into())?;
        ensure(substructure_oracle(c, d, &Embedding::identity(c)), || "stage not kept".into())?;
        ensure(k0_oracle(&d.reduct(knight_signature()).unwrap()), || "stage outside K0".into())?;
    }
    ensure(ext.verify().map_err(|e| e.to_string())?.valid, || "extended chain fails verification".into())?;

    // every insertion below an old point with every column, X fixed
    let mut bases: Vec<Structure> = ClassTag::K0.enumerate(6).into_iter().filter(|s| !s.elements_of_sort(Y).is_empty()).collect();
    bases.push(chain.last().reduct(knight_signature()).unwrap());
    let mut rejected = 0usize;
    for c in &bases {
        let ys = c.order(Y).unwrap().to_vec();
        let nx = c.elements_of_sort(X).len();
        if nx > 6 {
            // the large base only gets the constant columns
            for at in 0..ys.len() {
                for v in ys[..at].iter().copied().chain([ElementId::MAX]) {
                    let d = insert_below(c, at, &vec![v; nx]);
                    rejected += reject(c, &d)?;
                }
            }
            continue;
        }
        for at in 0..ys.len() {
            let values: Vec<ElementId> = ys[..at].iter().copied().chain([ElementId::MAX]).collect();
            let mut col = vec![0usize; nx];
            loop {
                let column: Vec<ElementId> = col.iter().map(|&i| values[i]).collect();
                let d = insert_below(c, at, &column);
                rejected += reject(c, &d)?;
                let mut i = 0;
                while i < nx && col[i] + 1 == values.len() {
                    col[i] = 0;
                    i += 1;
                }
                if i == nx {
                    break;
                }
                col[i] += 1;
            }
        }
    }
    Ok(format!(
        "five end-extension steps on a stage with {} X and {} Y keep X and add Y on top; {rejected} counter-extensions over {} bases all rejected",
        x0.len(),
        chain.last().elements_of_sort(Y).len(),
        bases.len()
    ))
}

fn reject(c: &Structure, d: &Structure) -> Result<usize, String> {
    let v = verify_end_extension_necessity(c, d, &Embedding::identity(c)).map_err(|e| e.to_string())?;
    ensure(v.kind == ExtensionKind::NotValid, || format!("counter-extension accepted: {}", structure_to_json(d)))?;
    let w = v.witness.ok_or("no witness")?;
    ensure(w.preimages.is_empty(), || "an old x reaches the new point".into())?;
    // independently: the old column misses the new point, so d is not in K0
    ensure(fiber(d, w.old_y, w.new_y).is_empty() && !k0_oracle(d), || "counter-extension lies in K0".into())?;
    Ok(1)
}

// ---------------------------------------------------------------- 6

fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let l = lim();
    let mut equal = 0usize;
    for floor in 1..=3usize {
        for count in 0..=4usize {
            let s = build_projection_generic(floor, count).map_err(|e| e.to_string())?;
            let chain = Chain::new(ClassTag::Projection, s).map_err(|e| e.to_string())?;
            let r = check_absolute_indiscernibles(&chain, "B", true, 0, &l).map_err(|e| e.to_string())?;
            let want: usize = (1..=count).product();
            ensure(r.all_extended() && r.stages[0].checked == want, || {
                format!("floor {floor}, {count} B: {:?}", r.stages[0])
            })?;
            equal += want;
        }
    }
    let mut profiles = 0usize;
    for total in 2..=6usize {
        for p in partitions(total, total) {
            if p.len() < 2 || p.iter().all(|&f| f == p[0]) {
                continue;
            }
            profiles += 1;
            let s = projection_with_fibers(&p);
            let stage = Chain::new(ClassTag::Projection, s.clone()).map_err(|e| e.to_string())?;
            let strict = check_absolute_indiscernibles(&stage, "B", true, 0, &l).map_err(|e| e.to_string())?;
            // failures at the stage are exactly the permutations moving a fiber to one of another size
            let bs = s.elements_of_sort("B");
            let size = |b: ElementId| p[bs.iter().position(|&x| x == b).unwrap()];
            let failed: Vec<&Vec<ElementId>> =
                strict.outcomes.iter().filter(|o| o.fate == Fate::Failed).map(|o| &o.images).collect();
            let expected: Vec<Vec<ElementId>> =
                perms(&bs).into_iter().filter(|q| bs.iter().zip(q).any(|(&a, &b)| size(a) != size(b))).collect();
            ensure(!failed.is_empty(), || format!("{p:?}: nothing fails at the stage"))?;
            ensure(failed.len() == expected.len() && expected.iter().all(|q| failed.contains(&q)), || {
                format!("{p:?}: failing permutations differ from the fiber-size oracle")
            })?;
            let chain = fiber_equalizing_chain(&s).map_err(|e| e.to_string())?;
            let loose = check_absolute_indiscernibles(&chain, "B", false, 0, &l).map_err(|e| e.to_string())?;
            for q in &expected {
                let o = loose.outcomes.iter().find(|o| o.stage == 0 && o.images == *q).ok_or("missing outcome")?;
                ensure(o.fate == Fate::LaterStage, || format!("{p:?}: {q:?} not extended in chain mode"))?;
            }
            ensure(loose.all_extended(), || format!("{p:?}: chain mode leaves a permutation"))?;
        }
    }
    Ok(format!(
        "{equal} permutations on equal-fiber stages all automorphisms; {profiles} unequal profiles fail at the stage and pass in chain mode"
    ))
}

// ---------------------------------------------------------------- 7

fn bare(n: usize) -> Structure {
    let mut s = Structure::new(Arc::new(Signature::build(&["S"], vec![], &[])));
    for e in 0..n as ElementId {
        s.add_element(e, "S").unwrap();
    }
    s
}

fn merge_checks(host: &Structure, guest: &Structure, spec: &MergerSpec) -> Result<(), String> {
    let m = merge_structures(host, guest, spec).map_err(|e| e.to_string())?;
    ensure(host_restriction(&m.structure, host.signature()).map_err(|e| e.to_string())? == *host, || {
        "host restriction differs".into()
    })?;
    ensure(guest_restriction(&m, guest.signature()).map_err(|e| e.to_string())? == *guest, || {
        "guest restriction differs".into()
    })?;
    ensure(m.structure.len() == host.len() + guest.len() - spec.glue.len(), || "wrong size".into())?;
    for &(h, g) in &spec.glue {
        ensure(m.guest_ids.apply(g) == Some(h), || format!("glue ({h},{g}) not respected"))?;
    }
    Ok(())
}

fn bijections(left: &[ElementId], right: &[ElementId]) -> Vec<Vec<(ElementId, ElementId)>> {
    if left.len() != right.len() {
        return Vec::new();
    }
    perms(right).into_iter().map(|p| left.iter().copied().zip(p).collect()).collect()
}

fn criterion_7() -> Outcome {
    let l = lim();
    let projections = ClassTag::Projection.enumerate(5);
    let knights = ClassTag::K0.enumerate(5);
    let mut merges = 0usize;
    for h in &projections {
        let u = h.elements_of_sort("B");
        for g in &knights {
            for glue in bijections(&u, &g.elements_of_sort(X)) {
                merge_checks(h, g, &MergerSpec { u: "B".into(), q: Some(X.into()), glue })?;
                merges += 1;
            }
        }
        for n in 0..=5 {
            let g = bare(n);
            for glue in bijections(&u, &g.ids().collect::<Vec<_>>()) {
                merge_checks(h, &g, &MergerSpec { u: "B".into(), q: None, glue })?;
                merges += 1;
            }
        }
    }
    for h in &knights {
        let u = h.elements_of_sort(X);
        for g in &projections {
            for glue in bijections(&u, &g.elements_of_sort("B")) {
                merge_checks(h, g, &MergerSpec { u: X.into(), q: Some("B".into()), glue })?;
                merges += 1;
            }
        }
    }

    let budget = ScheduleBudget { max_guest_size: 2, steps: 12, repetitions: 1 };
    let hosts: Vec<Structure> = [1u64, 2, 3]
        .iter()
        .map(|&seed| {
            build_generic_chain(ClassTag::K0, Structure::new(knight_signature()), budget, seed, &l)
                .map(|c| c.last().clone())
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    let n = hosts[0].elements_of_sort(X).len();
    ensure(hosts.iter().all(|h| h.elements_of_sort(X).len() == n), || "hosts differ in |X|".into())?;
    let guest = projection_with_fibers(&vec![1; n]);
    let specs: Vec<MergerSpec> = hosts
        .iter()
        .map(|h| MergerSpec {
            u: X.into(),
            q: Some("B".into()),
            glue: h.elements_of_sort(X).into_iter().zip(guest.elements_of_sort("B")).collect(),
        })
        .collect();
    let mut games = 0;
    for i in 0..hosts.len() {
        for j in i + 1..hosts.len() {
            let v = merger_equivalence(
                MergerSide { host: &hosts[i], guest: &guest, spec: &specs[i] },
                MergerSide { host: &hosts[j], guest: &guest, spec: &specs[j] },
                3,
                &l,
            )
            .map_err(|e| e.to_string())?;
            ensure(v.hosts_equivalent() && v.mergers_equivalent(), || format!("seeds {i},{j}: not equivalent"))?;
            games += 1;
        }
    }
    Ok(format!("{merges} merges satisfy both restriction identities; {games} seed-varied merger pairs equivalent at depth 3"))
}

// ---------------------------------------------------------------- 8

fn is_prefix(a: &[u32], b: &[u32]) -> bool {
    a.len() <= b.len() && b[..a.len()] == *a
}

/// Word maps keep length and the prefix order both ways.
fn word_map_oracle(src: &TreeModel, emb: &TreeEmbedding) -> bool {
    let words: Vec<&Vec<u32>> = src.nodes.iter().map(|n| &n.word).chain(&src.branches).collect();
    let map: BTreeMap<&Vec<u32>, &Vec<u32>> = emb.words.iter().map(|(a, b)| (a, b)).collect();
    if words.iter().any(|w| !map.contains_key(w)) {
        return false;
    }
    let image: BTreeSet<&Vec<u32>> = map.values().copied().collect();
    if image.len() != map.len() {
        return false;
    }
    words.iter().all(|a| {
        map[a].len() == a.len() && words.iter().all(|b| is_prefix(a, b) == is_prefix(map[a], map[b]))
    })
}

fn criterion_8() -> Outcome {
    let l = lim();
    let mut built = 0;
    for a in 1..=3usize {
        for d in 1..=3usize {
            let t = build_tree(a, d, &projection_template(a), "B", None, &l).map_err(|e| e.to_string())?;
            let f = a.pow(d as u32);
            let v: usize = (0..d).map(|i| a.pow(i as u32)).sum();
            ensure(t.branches.len() == f && t.nodes.len() == v, || {
                format!("a={a}, d={d}: |F|={}, |V|={}", t.branches.len(), t.nodes.len())
            })?;
            ensure(check_tree(&t).valid, || format!("a={a}, d={d}: tree check fails"))?;
            built += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut nodes = 0;
    for _ in 0..20 {
        let d = rng.gen_range(1..=3usize);
        let (a0, a1) = (rng.gen_range(1..=3usize), rng.gen_range(1..=3usize));
        let extra = rng.gen_range(0..=1usize);
        let t0 = build_tree(a0, d, &projection_template(a0), "B", None, &l).map_err(|e| e.to_string())?;
        let t1 = build_tree(a1, d, &projection_template(a1), "B", None, &l).map_err(|e| e.to_string())?;
        let j = tree_joint_embed(&t0, &t1, &ProjectionJoiner { extra }, &l).map_err(|e| e.to_string())?;
        ensure(check_tree(&j.tree).valid, || format!("joint tree of ({a0},{a1},{d}) fails"))?;
        ensure(check_tree_embedding(&t0, &j.tree, &j.left).valid, || "left embedding invalid".into())?;
        ensure(check_tree_embedding(&t1, &j.tree, &j.right).valid, || "right embedding invalid".into())?;
        ensure(word_map_oracle(&t0, &j.left) && word_map_oracle(&t1, &j.right), || "word map oracle".into())?;
        nodes += j.tree.nodes.len();
    }
    Ok(format!("{built} trees match |F| = a^d; 20 random joint embeddings valid ({nodes} nodes in total)"))
}

// ---------------------------------------------------------------- 9

fn table(s: &Structure) -> BTreeMap<(ElementId, ElementId), ElementId> {
    let mut out = BTreeMap::new();
    for t in s.tuples(MEET_F).into_iter().flatten() {
        out.insert((t[0], t[1]), t[2]);
        out.insert((t[1], t[0]), t[2]);
    }
    out
}

/// The meet law read directly: two values at a point differ and the third is their minimum,
/// or they agree and the third lies strictly above.
fn meet_oracle(s: &Structure) -> bool {
    let f = table(s);
    let ys = s.elements_of_sort(MEET_Y);
    let order = s.order(MEET_X).unwrap_or(&[]);
    let rank = |x: ElementId| order.iter().position(|&e| e == x).unwrap();
    for &a in &ys {
        for &b in &ys {
            for &c in &ys {
                if a == b || a == c || b == c {
                    continue;
                }
                let (p, q, r) = (rank(f[&(a, b)]), rank(f[&(a, c)]), rank(f[&(b, c)]));
                let ok = if p != q { r == p.min(q) } else { r > p };
                if !ok {
                    return false;
                }
            }
        }
    }
    true
}

fn criterion_9() -> Outcome {
    let mut built = 0usize;
    for nx in 0..=3usize {
        let all: Vec<Vec<bool>> = (0..1u32 << nx).map(|w| (0..nx).map(|k| w >> k & 1 == 1).collect()).collect();
        for subset in 0u32..(1 << all.len()) {
            let vs: Vec<Vec<bool>> = (0..all.len()).filter(|i| subset >> i & 1 == 1).map(|i| all[i].clone()).collect();
            let s = meet_from_bit_vectors(nx, &vs).map_err(|e| e.to_string())?;
            ensure(check_meet_law(&s).map_err(|e| e.to_string())?.valid, || format!("law fails for {vs:?}"))?;
            let f = table(&s);
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    let k = (0..nx).find(|&k| vs[i][k] != vs[j][k]).unwrap() as ElementId;
                    let (a, b) = ((nx + i) as ElementId, (nx + j) as ElementId);
                    ensure(f[&(a, b)] == k, || "f is not the least differing coordinate".into())?;
                }
            }
            built += 1;
        }
    }
    let (mut tables, mut lawful) = (0usize, 0usize);
    for nx in 1..=3usize {
        for ny in 0..=4usize {
            for s in all_meet_tables(nx, ny) {
                tables += 1;
                let law = check_meet_law(&s).map_err(|e| e.to_string())?.valid;
                ensure(law == meet_oracle(&s), || format!("law checker disagrees on {}", structure_to_json(&s)))?;
                if !law {
                    continue;
                }
                lawful += 1;
                let r = realize_meet(&s, 0).map_err(|e| e.to_string())?.ok_or("lawful table not realized")?;
                let f = table(&s);
                let xs = s.order(MEET_X).unwrap();
                for (&a, va) in &r.vectors {
                    for (&b, vb) in &r.vectors {
                        if a < b {
                            let k = va.chars().zip(vb.chars()).position(|(p, q)| p != q).ok_or("equal vectors")?;
                            ensure(xs[k] == f[&(a, b)], || "realization does not reproduce f".into())?;
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{built} vector sets satisfy the law; {tables} tables classified as the oracle does, all {lawful} lawful ones realized"
    ))
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_forge");
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = |n: &str| data.join(n).to_string_lossy().into_owned();
    let t = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    let runs: Vec<(Vec<String>, Vec<String>)> = vec![
        (vec!["check".into(), "--preset".into(), "knight".into(), d("b0.json")], vec![]),
        (
            vec!["amalgamate".into(), d("empty.json"), d("single_b.json"), d("single_c.json"), "-o".into(), t("amalgam.json")],
            vec![t("amalgam.json")],
        ),
        (
            vec!["generic".into(), "--steps".into(), "15".into(), "--seed".into(), "4".into(), "-o".into(), t("g.json")],
            vec![t("g.json")],
        ),
        (vec!["richness".into(), t("g.json")], vec![]),
        (vec!["homogeneity".into(), t("g.json")], vec![]),
        (vec!["indiscernibles".into(), d("projection_3_1.json"), "--pred".into(), "B".into(), "--equalize".into()], vec![]),
        (vec!["merge".into(), d("merge_spec.json"), "-o".into(), t("merged.json")], vec![t("merged.json")]),
        (vec!["ef".into(), d("b0.json"), t("amalgam.json")], vec![]),
        (
            vec!["generic".into(), "--class".into(), "k0-prime".into(), "--steps".into(), "3".into(), "-o".into(), t("q.json")],
            vec![t("q.json")],
        ),
        (vec!["end-extend".into(), t("q.json"), "-k".into(), "2".into(), "-o".into(), t("qe.json")], vec![t("qe.json")]),
        (
            vec!["chain-amalgamate".into(), t("g.json"), d("b0_xy.json"), d("b0_grow.json"), "-o".into(), t("ca.json")],
            vec![t("ca.json")],
        ),
        (
            vec!["tree".into(), "build".into(), "--alphabet".into(), "2".into(), "--depth".into(), "2".into(), "-o".into(), t("t.json")],
            vec![t("t.json")],
        ),
        (vec!["tree".into(), "check".into(), t("t.json")], vec![]),
        (
            vec!["tree".into(), "jointembed".into(), t("t.json"), t("t.json"), "--extra".into(), "1".into(), "-o".into(), t("j.json")],
            vec![t("j.json")],
        ),
        (
            vec!["meet".into(), "build".into(), "--x-size".into(), "2".into(), "00".into(), "01".into(), "10".into(), "-o".into(), t("m.json")],
            vec![t("m.json")],
        ),
        (vec!["meet".into(), "check".into(), "--realize".into(), t("m.json")], vec![]),
    ];
    let run = |args: &[String], report: &str| -> Result<i32, String> {
        let o = Command::new(exe)
            .args(["--format", "json", "--report", report])
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        Ok(o.status.code().unwrap_or(-1))
    };
    let mut compared = 0usize;
    for (i, (args, outs)) in runs.iter().enumerate() {
        let report = t(&format!("report{i}.json"));
        let mut seen: Vec<Vec<Vec<u8>>> = Vec::new();
        let mut codes = Vec::new();
        for _ in 0..2 {
            codes.push(run(args, &report)?);
            let mut files = vec![std::fs::read(&report).map_err(|e| e.to_string())?];
            for o in outs {
                files.push(std::fs::read(o).map_err(|e| format!("{o}: {e}"))?);
            }
            seen.push(files);
        }
        ensure(codes[0] == 0, || format!("`{}` exited {}", args.join(" "), codes[0]))?;
        ensure(codes[0] == codes[1] && seen[0] == seen[1], || format!("`{}` differs between runs", args.join(" ")))?;
        compared += seen[0].len();
    }
    let mut replays = 0;
    for chain in ["g.json", "q.json", "qe.json", "ca.json"] {
        let code = run(&["replay".into(), t(chain)], &t("replay.json"))?;
        ensure(code == 0, || format!("replay of {chain} exited {code}"))?;
        let text = std::fs::read_to_string(t(chain)).map_err(|e| e.to_string())?;
        let c = Chain::from_json(&text).map_err(|e| e.to_string())?;
        ensure(c.replay().map_err(|e| e.to_string())?.to_json() == text, || format!("{chain} not reproduced"))?;
        replays += 1;
    }
    Ok(format!("{} commands run twice, {compared} files byte-identical; {replays} chain ledgers replayed exactly", runs.len()))
}

// ---------------------------------------------------------------- driver

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("K0 checker agrees with the axiom oracle", criterion_1, 10),
        ("disjoint amalgamation over every small triple", criterion_2, 120),
        ("chain amalgamation corpus", criterion_3, 120),
        ("generic chains of seeds 1 and 2 agree", criterion_4, 300),
        ("end extension and its necessity", criterion_5, 60),
        ("absolute indiscernibles", criterion_6, 60),
        ("merger identities and equivalence", criterion_7, 120),
        ("tree counts and joint embeddings", criterion_8, 60),
        ("meet law and its converse", criterion_9, 120),
        ("determinism and replay", criterion_10, 300),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = result.and_then(|msg| {
            if took > Duration::from_secs(*budget) {
                Err(format!("{msg}; but took longer than {budget}s"))
            } else {
                Ok(msg)
            }
        });
        match result {
            Ok(msg) => println!("PASS criterion {:>2}: {name}: {msg} [{:.2}s]", i + 1, took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {msg} [{:.2}s]", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
