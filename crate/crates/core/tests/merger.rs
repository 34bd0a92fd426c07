use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use forge_core::class::ClassTag;
use forge_core::generic::{build_generic_chain, Chain, ScheduleBudget};
use forge_core::knight::{check_k0, knight_signature, G_FAMILY, G_FN, X, Y};
use forge_core::merger::{
    build_projection_generic, check_absolute_indiscernibles, fiber_equalizing_chain, fiber_sizes,
    guest_restriction, host_restriction, merge_structures, merger_equivalence, projection_with_fibers, Fate,
    MergerSide, MergerSpec, TaggedGuestFamily,
};
use forge_core::structure::{isomorphic, ElementId, Player, Signature, Structure};
use forge_core::{Error, Limits};

fn lim() -> Limits {
    Limits::default()
}

fn b0() -> Structure {
    let mut s = Structure::new(knight_signature());
    for x in [1, 2] {
        s.add_element(x, X).unwrap();
    }
    for y in [3, 4] {
        s.add_element(y, Y).unwrap();
    }
    for t in [[1, 3, 3], [2, 3, 3], [1, 4, 3], [2, 4, 4]] {
        s.insert_tuple(G_FN, t.to_vec()).unwrap();
    }
    s.insert_tuple(G_FAMILY, vec![1, 4, 3]).unwrap();
    s
}

fn bare_set(ids: &[ElementId]) -> Structure {
    let mut s = Structure::new(Arc::new(Signature::build(&["S"], vec![], &[])));
    for &e in ids {
        s.add_element(e, "S").unwrap();
    }
    s
}

fn glue_b_to_x(host: &Structure, guest: &Structure) -> MergerSpec {
    MergerSpec {
        u: "B".into(),
        q: Some(X.into()),
        glue: host.elements_of_sort("B").into_iter().zip(guest.elements_of_sort(X)).collect(),
    }
}

#[test]
fn bare_guest_changes_nothing() {
    let host = projection_with_fibers(&[2, 1]);
    let guest = bare_set(&[10, 11]);
    let spec = MergerSpec {
        u: "B".into(),
        q: None,
        glue: vec![(0, 11), (1, 10)],
    };
    let m = merge_structures(&host, &guest, &spec).unwrap();
    assert_eq!(m.structure.len(), host.len());
    assert_eq!(host_restriction(&m.structure, host.signature()).unwrap(), host);
    assert_eq!(guest_restriction(&m, guest.signature()).unwrap(), guest);
}

#[test]
fn projection_host_with_knight_guest() {
    let host = projection_with_fibers(&[1, 2]);
    let guest = b0();
    let spec = glue_b_to_x(&host, &guest);
    let m = merge_structures(&host, &guest, &spec).unwrap();
    let d = &m.structure;
    assert_eq!(d.len(), host.len() + 2);
    // the intersection of host and guest is the glued set
    let host_ids: BTreeSet<ElementId> = host.ids().collect();
    let guest_img = m.guest_ids.image();
    assert_eq!(host_ids.intersection(&guest_img).copied().collect::<Vec<_>>(), vec![0, 1]);
    assert!(d.holds(G_FN, &[1, m.guest_ids.apply(4).unwrap(), m.guest_ids.apply(4).unwrap()]));
    assert_eq!(host_restriction(d, host.signature()).unwrap(), host);
    assert_eq!(guest_restriction(&m, guest.signature()).unwrap(), guest);
}

#[test]
fn unary_relation_as_q_keeps_the_rest_of_its_sort() {
    let sig = Arc::new(Signature::build(
        &["S"],
        vec![forge_core::structure::RelationDecl::new("Q", &["S"]), forge_core::structure::RelationDecl::new("E", &["S", "S"])],
        &[],
    ));
    let mut guest = Structure::new(sig);
    for e in 0..3 {
        guest.add_element(e, "S").unwrap();
    }
    guest.insert_tuple("Q", vec![0]).unwrap();
    guest.insert_tuple("Q", vec![2]).unwrap();
    guest.insert_tuple("E", vec![0, 1]).unwrap();
    guest.insert_tuple("E", vec![1, 2]).unwrap();
    let host = projection_with_fibers(&[1, 1]);
    let spec = MergerSpec {
        u: "B".into(),
        q: Some("Q".into()),
        glue: vec![(0, 0), (1, 2)],
    };
    let m = merge_structures(&host, &guest, &spec).unwrap();
    assert!(!m.q_absorbed);
    assert_eq!(m.structure.elements_of_sort("S").len(), 1);
    assert_eq!(guest_restriction(&m, guest.signature()).unwrap(), guest);
    assert_eq!(host_restriction(&m.structure, host.signature()).unwrap(), host);
}

#[test]
fn size_mismatch_and_bad_glue_are_refused() {
    let host = projection_with_fibers(&[1, 1, 1]);
    let guest = b0();
    let spec = glue_b_to_x(&host, &guest);
    assert!(matches!(merge_structures(&host, &guest, &spec), Err(Error::Invalid(m)) if m.contains("cardinality")));
    let host = projection_with_fibers(&[1, 1]);
    let spec = MergerSpec {
        u: "B".into(),
        q: Some(X.into()),
        glue: vec![(0, 1), (1, 1)],
    };
    assert!(merge_structures(&host, &guest, &spec).is_err());
    let spec = MergerSpec {
        u: "B".into(),
        q: Some(Y.into()),
        glue: vec![(0, 3), (1, 4)],
    };
    assert!(matches!(merge_structures(&host, &guest, &spec), Err(Error::Invalid(m)) if m.contains("ordered")));
}

#[test]
fn merging_is_functorial_on_isomorphisms() {
    let host = projection_with_fibers(&[1, 2]);
    let guest = b0();
    let spec = glue_b_to_x(&host, &guest);
    let m = merge_structures(&host, &guest, &spec).unwrap();
    // rename both sides and transport the glue
    let hmap: BTreeMap<ElementId, ElementId> = host.ids().map(|e| (e, 100 - e)).collect();
    let gmap: BTreeMap<ElementId, ElementId> = guest.ids().map(|e| (e, 50 + 3 * e)).collect();
    let host2 = host.relabel(&hmap);
    let guest2 = guest.relabel(&gmap);
    let spec2 = MergerSpec {
        u: "B".into(),
        q: Some(X.into()),
        glue: spec.glue.iter().map(|(h, g)| (hmap[h], gmap[g])).collect(),
    };
    let m2 = merge_structures(&host2, &guest2, &spec2).unwrap();
    assert!(isomorphic(&m.structure, &m2.structure, &lim()).unwrap().is_some());
}

#[test]
fn equal_fibers_give_indiscernibles() {
    for (floor, count) in [(2, 2), (1, 3), (1, 0)] {
        let s = build_projection_generic(floor, count).unwrap();
        let chain = Chain::new(ClassTag::Projection, s).unwrap();
        let r = check_absolute_indiscernibles(&chain, "B", true, 0, &lim()).unwrap();
        assert!(r.all_extended());
        assert_eq!(r.stages[0].checked, (1..=count).product::<usize>());
    }
    assert_eq!(build_projection_generic(2, 2).unwrap().len(), 6);
}

#[test]
fn unequal_fibers_need_the_chain() {
    let start = projection_with_fibers(&[3, 1]);
    let chain = fiber_equalizing_chain(&start).unwrap();
    assert_eq!(chain.len(), 3);
    assert_eq!(fiber_sizes(chain.last()).values().copied().collect::<Vec<_>>(), vec![3, 3]);
    assert!(chain.verify().unwrap().valid);

    let strict = check_absolute_indiscernibles(&chain, "B", true, 0, &lim()).unwrap();
    let swap = strict.outcomes.iter().find(|o| o.stage == 0 && o.images == vec![1, 0]).unwrap();
    assert_eq!(swap.fate, Fate::Failed);
    assert!(!strict.all_extended());

    let loose = check_absolute_indiscernibles(&chain, "B", false, 0, &lim()).unwrap();
    let swap = loose.outcomes.iter().find(|o| o.stage == 0 && o.images == vec![1, 0]).unwrap();
    assert_eq!(swap.fate, Fate::LaterStage);
    assert_eq!(swap.extended_at, Some(2));
    // (3,2) is unbalanced but embeds into the last stage swapped
    assert_eq!(loose.stage(1).unwrap().later_stage, 1);
    assert_eq!(strict.stage(1).unwrap().failed, 1);
    assert_eq!(loose.stage(2).unwrap().automorphisms, 2);
}

#[test]
fn large_predicates_are_sampled() {
    let s = build_projection_generic(1, 7).unwrap();
    let chain = Chain::new(ClassTag::Projection, s).unwrap();
    let r = check_absolute_indiscernibles(&chain, "B", true, 5, &lim()).unwrap();
    assert!(r.sampled);
    assert_eq!(r.sample_seed, Some(5));
    assert_eq!(r.stages[0].checked, 720);
    assert!(r.all_extended());
    assert_eq!(r, check_absolute_indiscernibles(&chain, "B", true, 5, &lim()).unwrap());
}

#[test]
fn identical_mergers_are_equivalent() {
    let host = projection_with_fibers(&[1, 2]);
    let guest = b0();
    let spec = glue_b_to_x(&host, &guest);
    let side = MergerSide { host: &host, guest: &guest, spec: &spec };
    for depth in 0..=3 {
        let v = merger_equivalence(side, side, depth, &lim()).unwrap();
        assert!(v.hosts_equivalent() && v.mergers_equivalent());
    }
}

#[test]
fn spoiler_win_is_reported() {
    let mut flat = Structure::new(knight_signature());
    for x in [1, 2] {
        flat.add_element(x, X).unwrap();
    }
    flat.add_element(3, Y).unwrap();
    flat.insert_tuple(G_FN, vec![1, 3, 3]).unwrap();
    flat.insert_tuple(G_FN, vec![2, 3, 3]).unwrap();
    assert!(check_k0(&flat).unwrap().valid);
    let tall = b0();
    let guest = projection_with_fibers(&[1, 1]);
    let spec_for = |h: &Structure| MergerSpec {
        u: X.into(),
        q: Some("B".into()),
        glue: h.elements_of_sort(X).into_iter().zip(guest.elements_of_sort("B")).collect(),
    };
    let (s1, s2) = (spec_for(&flat), spec_for(&tall));
    let left = MergerSide { host: &flat, guest: &guest, spec: &s1 };
    let right = MergerSide { host: &tall, guest: &guest, spec: &s2 };
    let one = merger_equivalence(left, right, 1, &lim()).unwrap();
    assert!(one.hosts_equivalent() && one.mergers_equivalent());
    let two = merger_equivalence(left, right, 2, &lim()).unwrap();
    assert_eq!(two.hosts.winner, Player::Spoiler);
    assert_eq!(two.mergers.winner, Player::Spoiler);
    assert!(!two.mergers.spoiler_line.is_empty());
    assert!(two.consistent());
}

#[test]
fn generic_hosts_merge_equivalently() {
    let budget = ScheduleBudget { max_guest_size: 2, steps: 12, repetitions: 1 };
    let hosts: Vec<Structure> = [1u64, 2]
        .iter()
        .map(|&seed| {
            build_generic_chain(ClassTag::K0, Structure::new(knight_signature()), budget, seed, &lim())
                .unwrap()
                .last()
                .clone()
        })
        .collect();
    let n = hosts[0].elements_of_sort(X).len();
    assert_eq!(n, hosts[1].elements_of_sort(X).len());
    let guest = projection_with_fibers(&vec![1; n]);
    let specs: Vec<MergerSpec> = hosts
        .iter()
        .map(|h| MergerSpec {
            u: X.into(),
            q: Some("B".into()),
            glue: h.elements_of_sort(X).into_iter().zip(guest.elements_of_sort("B")).collect(),
        })
        .collect();
    let v = merger_equivalence(
        MergerSide { host: &hosts[0], guest: &guest, spec: &specs[0] },
        MergerSide { host: &hosts[1], guest: &guest, spec: &specs[1] },
        3,
        &lim(),
    )
    .unwrap();
    assert!(v.hosts_equivalent());
    assert!(v.mergers_equivalent());
}

#[test]
fn tagged_guests_are_disjoint_after_shifting() {
    let mut fam = TaggedGuestFamily::new("B");
    let g = projection_with_fibers(&[1, 1]);
    fam.push_shifted(0, &g);
    fam.push_shifted(1, &g);
    assert!(fam.check_disjoint().valid);
    assert_eq!(fam.indiscernibles(1).unwrap(), vec![4, 5]);
    fam.guests.insert(2, g);
    assert!(!fam.check_disjoint().valid);
}
