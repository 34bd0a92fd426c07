//! The knight classes: K0 over `{X, Y, <, g, G_n}`, its expansion K1 by a
//! projection `P : X -> U`, and the relativized class K0' with a unary `Q`.

use std::sync::{Arc, OnceLock};

use crate::structure::{RelationDecl, Signature, ANY_SORT};

pub mod amalgam;
pub mod check;
pub mod enumerate;

pub use amalgam::{disjoint_amalgam_k0, disjoint_amalgam_k1, disjoint_amalgam_kprime0, pad_x, Amalgam};
pub use check::{check_k0, check_k1, check_relativized, is_good_pair, require_knight_signature};
pub use enumerate::{enumerate_k0, enumerate_k1, enumerate_kprime0};

pub const X: &str = "X";
pub const Y: &str = "Y";
pub const U: &str = "U";
pub const G_FN: &str = "g";
pub const G_FAMILY: &str = "G";
pub const P_REL: &str = "P";
pub const Q_REL: &str = "Q";

fn knight_relations() -> Vec<RelationDecl> {
    vec![
        RelationDecl::new(G_FN, &[X, Y, Y]),
        RelationDecl::graded(G_FAMILY, &[X, Y, Y]),
    ]
}

/// Preset `knight`: sorts X and Y (ordered), `g(x,y,z)` and the graded `G`.
pub fn knight_signature() -> Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| Arc::new(Signature::build(&[X, Y], knight_relations(), &[Y])))
        .clone()
}

/// Preset `knight-u`: the knight vocabulary plus sort U and `P(x,u)`.
pub fn knight_u_signature() -> Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| {
        let mut rels = knight_relations();
        rels.push(RelationDecl::new(P_REL, &[X, U]));
        Arc::new(Signature::build(&[X, Y, U], rels, &[Y]))
    })
    .clone()
}

/// Preset `knight-q`: the knight vocabulary plus a unary `Q` over both sorts.
pub fn knight_q_signature() -> Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| {
        let mut rels = knight_relations();
        rels.push(RelationDecl::new(Q_REL, &[ANY_SORT]));
        Arc::new(Signature::build(&[X, Y], rels, &[Y]))
    })
    .clone()
}
