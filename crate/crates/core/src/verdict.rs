use serde::{Deserialize, Serialize};

use crate::structure::ElementId;

/// One failed condition, named by a short stable code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: String,
    pub detail: String,
    pub witnesses: Vec<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn ok() -> Self {
        Verdict {
            valid: true,
            violations: Vec::new(),
        }
    }

    pub fn push(&mut self, axiom: &str, detail: impl Into<String>, witnesses: Vec<ElementId>) {
        self.valid = false;
        self.violations.push(Violation {
            axiom: axiom.to_string(),
            detail: detail.into(),
            witnesses,
        });
    }

    pub fn merge(&mut self, other: Verdict) {
        self.valid &= other.valid;
        self.violations.extend(other.violations);
    }

    pub fn first_detail(&self) -> String {
        self.violations
            .first()
            .map(|v| v.detail.clone())
            .unwrap_or_else(|| "no violation".into())
    }
}

/// Human-readable name of an axiom code, for text reports.
pub fn describe_axiom(code: &str) -> &'static str {
    match code {
        "signature" => "structure over the expected vocabulary",
        "xy-disjoint" => "sorts are disjoint",
        "g-total" => "g is total on X x Y",
        "g-functional" => "g is single-valued",
        "g-bound" => "g(x,y) <= y",
        "g-onto" => "g(_,y) maps onto W_y = {z : z <= y}",
        "G-distinct" => "G_n arguments pairwise distinct",
        "G-below" => "G_n(..,y,z) only for z < y",
        "G-fiber" => "G_n(xs,y,z) lists exactly the fiber of z under g(_,y)",
        "G-missing" => "every fiber below y is named by some G_n",
        "G-permutation" => "G_n closed under argument permutation",
        "P-total" => "P is a total function from X into U",
        "P-domain" => "P holds only between X and U",
        "Q-contains-X" => "X is contained in Q",
        "Q-initial" => "Y intersected with Q is an initial segment of Y",
        "p-total" => "p is a total function from A to B",
        "p-onto" => "p maps onto B",
        "p-fiber-floor" => "every fiber of p reaches the minimum size",
        "H-level" => "H(n,v) holds exactly when v has length n",
        "R-successor" => "R(u,v) holds exactly when v extends u by one letter",
        "E-restriction" => "E(k,f,v) holds exactly when f restricted to k is v",
        "root" => "level 0 has exactly one node",
        "R-indiscernibles" => "successors of a node are its guest's indiscernibles",
        "guest" => "node guests are valid and pairwise disjoint",
        "shape" => "tree elements are well formed",
        "meet-symmetric" => "f defined once for each unordered pair",
        "meet-min" => "unequal meets: the third is their minimum",
        "meet-greater" => "equal meets: the third lies strictly above",
        _ => "unnamed condition",
    }
}
