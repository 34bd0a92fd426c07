use std::collections::BTreeSet;

use super::StructureError;

/// Profile entry that matches an element of any sort.
pub const ANY_SORT: &str = "*";

/// A relation symbol together with the sorts of its argument positions.
///
/// A graded relation stands for a whole family `R_1, R_2, ...`: the first
/// profile entry is repeated `n >= 1` times and the remaining entries follow,
/// so a tuple of length `L` belongs to grade `n = L - (profile.len() - 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationDecl {
    pub name: String,
    pub profile: Vec<String>,
    pub graded: bool,
}

impl RelationDecl {
    pub fn new(name: &str, profile: &[&str]) -> Self {
        RelationDecl {
            name: name.to_string(),
            profile: profile.iter().map(|s| s.to_string()).collect(),
            graded: false,
        }
    }

    pub fn graded(name: &str, profile: &[&str]) -> Self {
        RelationDecl {
            graded: true,
            ..RelationDecl::new(name, profile)
        }
    }

    /// Grade of a tuple of the given length, `None` if no grade fits.
    pub fn grade_of(&self, len: usize) -> Option<usize> {
        if !self.graded {
            return (len == self.profile.len()).then_some(0);
        }
        let fixed = self.profile.len() - 1;
        (len > fixed).then(|| len - fixed)
    }

    /// Sort expected at position `i` of a tuple of length `len`.
    pub fn sort_at(&self, i: usize, len: usize) -> &str {
        if !self.graded {
            return &self.profile[i];
        }
        let n = len + 1 - self.profile.len();
        if i < n {
            &self.profile[0]
        } else {
            &self.profile[i - n + 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    sorts: Vec<String>,
    relations: Vec<RelationDecl>,
    ordered: Vec<String>,
}

impl Signature {
    pub fn new(
        sorts: Vec<String>,
        relations: Vec<RelationDecl>,
        ordered: Vec<String>,
    ) -> Result<Self, StructureError> {
        let mut seen = BTreeSet::new();
        for s in &sorts {
            if s == ANY_SORT || !seen.insert(s.as_str()) {
                return Err(StructureError::BadSignature(format!(
                    "duplicate or reserved sort name `{s}`"
                )));
            }
        }
        let mut names = BTreeSet::new();
        for r in &relations {
            if !names.insert(r.name.as_str()) {
                return Err(StructureError::BadSignature(format!(
                    "duplicate relation name `{}`",
                    r.name
                )));
            }
            if r.profile.is_empty() {
                return Err(StructureError::BadSignature(format!(
                    "relation `{}` has an empty profile",
                    r.name
                )));
            }
            if let Some(bad) = r
                .profile
                .iter()
                .find(|p| p.as_str() != ANY_SORT && !seen.contains(p.as_str()))
            {
                return Err(StructureError::BadSignature(format!(
                    "relation `{}` names undeclared sort `{bad}`",
                    r.name
                )));
            }
        }
        let mut ord = BTreeSet::new();
        for o in &ordered {
            if !seen.contains(o.as_str()) || !ord.insert(o.as_str()) {
                return Err(StructureError::BadSignature(format!(
                    "ordered sort `{o}` is undeclared or repeated"
                )));
            }
        }
        Ok(Signature {
            sorts,
            relations,
            ordered,
        })
    }

    /// Convenience constructor for presets and tests; panics on an invalid signature.
    pub fn build(sorts: &[&str], relations: Vec<RelationDecl>, ordered: &[&str]) -> Self {
        Signature::new(
            sorts.iter().map(|s| s.to_string()).collect(),
            relations,
            ordered.iter().map(|s| s.to_string()).collect(),
        )
        .expect("invalid built-in signature")
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.relations
    }

    pub fn ordered(&self) -> &[String] {
        &self.ordered
    }

    pub fn sort_index(&self, name: &str) -> Option<usize> {
        self.sorts.iter().position(|s| s == name)
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDecl> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn is_ordered(&self, sort: usize) -> bool {
        self.ordered.iter().any(|o| *o == self.sorts[sort])
    }

    /// True when every sort and relation of `self` appears identically in `other`.
    pub fn is_subsignature_of(&self, other: &Signature) -> bool {
        self.sorts.iter().all(|s| other.sort_index(s).is_some())
            && self
                .relations
                .iter()
                .all(|r| other.relation(&r.name) == Some(r))
            && self
                .ordered
                .iter()
                .all(|o| other.ordered.iter().any(|p| p == o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_positions() {
        let g = RelationDecl::graded("G", &["X", "Y", "Y"]);
        assert_eq!(g.grade_of(2), None);
        assert_eq!(g.grade_of(3), Some(1));
        assert_eq!(g.grade_of(5), Some(3));
        assert_eq!(g.sort_at(0, 5), "X");
        assert_eq!(g.sort_at(2, 5), "X");
        assert_eq!(g.sort_at(3, 5), "Y");
        assert_eq!(g.sort_at(4, 5), "Y");
    }

    #[test]
    fn rejects_duplicates_and_unknown_sorts() {
        let dup = Signature::new(vec!["X".into(), "X".into()], vec![], vec![]);
        assert!(dup.is_err());
        let unknown = Signature::new(
            vec!["X".into()],
            vec![RelationDecl::new("r", &["Z"])],
            vec![],
        );
        assert!(unknown.is_err());
        let dup_rel = Signature::new(
            vec!["X".into()],
            vec![RelationDecl::new("r", &["X"]), RelationDecl::new("r", &["X"])],
            vec![],
        );
        assert!(dup_rel.is_err());
        let wildcard = Signature::new(
            vec!["X".into()],
            vec![RelationDecl::new("Q", &[ANY_SORT])],
            vec![],
        );
        assert!(wildcard.is_ok());
    }
}
