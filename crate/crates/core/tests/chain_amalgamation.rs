use std::collections::BTreeSet;

use forge_core::class::ClassTag;
use forge_core::generic::{
    chain_amalgamate, end_extend, verify_end_extension_necessity, Chain, ExtensionKind, Operation,
};
use forge_core::knight::amalgam::xy_counts;
use forge_core::knight::{check_k0, check_relativized, knight_q_signature, knight_signature, pad_x, G_FAMILY, G_FN, Q_REL, X, Y};
use forge_core::structure::{ElementId, Embedding, Structure};
use forge_core::{Error, Limits};

fn knight(xs: &[ElementId], ys: &[ElementId], g: &[[ElementId; 3]]) -> Structure {
    let mut s = Structure::new(knight_signature());
    for &x in xs {
        s.add_element(x, X).unwrap();
    }
    for &y in ys {
        s.add_element(y, Y).unwrap();
    }
    for t in g {
        s.insert_tuple(G_FN, t.to_vec()).unwrap();
    }
    forge_core::knight::amalgam::rebuild_g_family(&mut s);
    s
}

fn b0() -> Structure {
    knight(&[1, 2], &[3, 4], &[[1, 3, 3], [2, 3, 3], [1, 4, 3], [2, 4, 4]])
}

fn onto_columns(s: &Structure) -> bool {
    check_k0(s).unwrap().valid
}

#[test]
fn b0_chain_with_new_top() {
    let chain = Chain::new(ClassTag::K0, b0()).unwrap();
    let a = b0().induced(&BTreeSet::from([1, 3]));
    let b = knight(&[1, 6], &[3, 5], &[[1, 3, 3], [6, 3, 3], [1, 5, 3], [6, 5, 5]]);
    let (out, info) = chain_amalgamate(&chain, &a, &b, None, &Limits::default()).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(info.surrogate, Some(4));
    assert!(info.x_new.is_empty());
    let d = out.last();
    assert!(onto_columns(d));
    assert!(Embedding::identity(&b0()).is_valid(&b0(), d));
    assert!(info.from_b.is_valid(&b, d));
    assert!(out.verify().unwrap().valid);
}

#[test]
fn repair_elements_cover_p_sets() {
    // z=10 < w=11 < y0=12; a=1 sends y0 to z, so z loses its only preimage outside A
    let c = knight(
        &[1, 2, 3],
        &[10, 11, 12],
        &[
            [1, 10, 10], [2, 10, 10], [3, 10, 10],
            [1, 11, 11], [2, 11, 10], [3, 11, 11],
            [1, 12, 10], [2, 12, 11], [3, 12, 12],
        ],
    );
    let a = c.induced(&BTreeSet::from([1, 11]));
    assert!(check_k0(&a).unwrap().valid);
    let b = knight(&[1, 20], &[11, 21], &[[1, 11, 11], [20, 11, 11], [1, 21, 11], [20, 21, 21]]);
    let chain = Chain::new(ClassTag::K0, c.clone()).unwrap();
    let id = Embedding::identity(&a);
    let (out, info) = chain_amalgamate(&chain, &a, &b, Some(&id), &Limits::default()).unwrap();
    assert_eq!(info.surrogate, Some(12));
    let y_b = info.from_b.apply(21).unwrap();
    assert_eq!(info.p_sets[&y_b], vec![10]);
    assert_eq!(info.x_new.len(), 1);
    let d = out.last();
    assert!(d.holds(G_FN, &[info.x_new[0], y_b, 10]));
    assert!(onto_columns(d));
    // old fibers of the stage are untouched
    for t in c.tuples(G_FAMILY).unwrap() {
        assert!(d.holds(G_FAMILY, t));
    }
}

#[test]
fn missing_surrogate_adds_a_top_step() {
    let c = knight(&[1], &[2], &[[1, 2, 2]]);
    let a = c.clone();
    let b = knight(&[1, 5], &[2, 6], &[[1, 2, 2], [5, 2, 2], [1, 6, 2], [5, 6, 6]]);
    let chain = Chain::new(ClassTag::K0, c).unwrap();
    let (out, info) = chain_amalgamate(&chain, &a, &b, None, &Limits::default()).unwrap();
    assert!(info.top_added);
    assert_eq!(out.ledger[0].operation, Operation::ExtendTop);
    assert_eq!(out.ledger[1].operation, Operation::ChainAmalgamate);
    assert!(onto_columns(out.last()));
    assert!(out.verify().unwrap().valid);
}

#[test]
fn identical_pair_adds_an_isomorphic_stage() {
    let chain = Chain::new(ClassTag::K0, b0()).unwrap();
    let a = b0().induced(&BTreeSet::from([1, 3]));
    let (out, _) = chain_amalgamate(&chain, &a, &a, None, &Limits::default()).unwrap();
    assert_eq!(out.last(), &b0());
}

#[test]
fn bad_pair_is_refused() {
    let chain = Chain::new(ClassTag::K0, b0()).unwrap();
    let a = b0().induced(&BTreeSet::from([1, 3]));
    let b = knight(&[1], &[3, 5], &[[1, 3, 3], [1, 5, 5]]);
    assert!(chain_amalgamate(&chain, &a, &b, None, &Limits::default()).is_err());
}

fn relativize(s: &Structure, q: &[ElementId]) -> Structure {
    let mut r = s.expand(knight_q_signature()).unwrap();
    for &e in q {
        r.insert_tuple(Q_REL, vec![e]).unwrap();
    }
    r
}

#[test]
fn end_extension_of_padded_b0() {
    let padded = pad_x(&b0(), 1);
    let ids: Vec<ElementId> = padded.ids().collect();
    let c = relativize(&padded, &ids);
    assert!(check_relativized(&c).unwrap().valid);
    let chain = Chain::new(ClassTag::KPrime0, c.clone()).unwrap();
    let out = end_extend(&chain, 1).unwrap();
    let d = out.last();
    assert_eq!(xy_counts(d), (3, 3));
    let y3 = *d.order(Y).unwrap().last().unwrap();
    assert!(!d.holds(Q_REL, &[y3]));
    assert!(check_relativized(d).unwrap().valid);
    let v = verify_end_extension_necessity(&c, d, &Embedding::identity(&c)).unwrap();
    assert_eq!(v.kind, ExtensionKind::EndExtension);
    assert!(out.verify().unwrap().valid);
    assert_eq!(end_extend(&chain, 0).unwrap(), chain);
}

#[test]
fn end_extension_needs_enough_x() {
    let ids: Vec<ElementId> = b0().ids().collect();
    let chain = Chain::new(ClassTag::KPrime0, relativize(&b0(), &ids)).unwrap();
    assert!(matches!(end_extend(&chain, 1), Err(Error::InsufficientX { have: 2, need: 3 })));
}

#[test]
fn insertion_below_the_top_is_rejected() {
    let c = b0();
    // new y=7 between 3 and 4, X fixed; the new column sends everything to 7
    let mut d = c.clone();
    d.add_element(7, Y).unwrap();
    d.set_order(Y, vec![3, 7, 4]).unwrap();
    d.insert_tuple(G_FN, vec![1, 7, 7]).unwrap();
    d.insert_tuple(G_FN, vec![2, 7, 3]).unwrap();
    forge_core::knight::amalgam::rebuild_g_family(&mut d);
    let v = verify_end_extension_necessity(&c, &d, &Embedding::identity(&c)).unwrap();
    assert_eq!(v.kind, ExtensionKind::NotValid);
    let w = v.witness.unwrap();
    assert_eq!((w.old_y, w.new_y), (4, 7));
    assert!(w.preimages.is_empty());
    assert!(!check_k0(&d).unwrap().valid);
}
