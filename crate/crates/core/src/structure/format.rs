//! The JSON interchange format.
//!
//! Every relation of the signature appears under `tuples`, empty ones
//! included, and every ordered sort under `order`; maps are keyed by name in
//! sorted order so equal structures always serialize to identical bytes.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::model::{ElementId, Structure};
use super::signature::{RelationDecl, Signature};
use super::StructureError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationFile {
    pub name: String,
    pub profile: Vec<String>,
    #[serde(default)]
    pub graded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureFile {
    pub sorts: Vec<String>,
    pub relations: Vec<RelationFile>,
    #[serde(default)]
    pub ordered: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementFile {
    pub id: ElementId,
    pub sort: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub signature: SignatureFile,
    pub elements: Vec<ElementFile>,
    #[serde(default)]
    pub tuples: BTreeMap<String, Vec<Vec<ElementId>>>,
    #[serde(default)]
    pub order: BTreeMap<String, Vec<ElementId>>,
}

impl SignatureFile {
    pub fn from_signature(sig: &Signature) -> Self {
        SignatureFile {
            sorts: sig.sorts().to_vec(),
            relations: sig
                .relations()
                .iter()
                .map(|r| RelationFile {
                    name: r.name.clone(),
                    profile: r.profile.clone(),
                    graded: r.graded,
                })
                .collect(),
            ordered: sig.ordered().to_vec(),
        }
    }

    pub fn to_signature(&self) -> Result<Signature, StructureError> {
        let relations = self
            .relations
            .iter()
            .map(|r| RelationDecl {
                name: r.name.clone(),
                profile: r.profile.clone(),
                graded: r.graded,
            })
            .collect();
        Signature::new(self.sorts.clone(), relations, self.ordered.clone())
    }
}

impl StructureFile {
    pub fn from_structure(s: &Structure) -> Self {
        let sig = s.signature();
        let tuples = sig
            .relations()
            .iter()
            .enumerate()
            .map(|(r, decl)| (decl.name.clone(), s.relation_tuples(r).iter().cloned().collect()))
            .collect();
        let order = s
            .orders()
            .iter()
            .map(|(&k, o)| (sig.sorts()[k].clone(), o.clone()))
            .collect();
        StructureFile {
            signature: SignatureFile::from_signature(sig),
            elements: s
                .elements()
                .map(|(id, k)| ElementFile {
                    id,
                    sort: sig.sorts()[k].clone(),
                })
                .collect(),
            tuples,
            order,
        }
    }

    /// Decodes against the file's own signature.
    pub fn to_structure(&self) -> Result<Structure, StructureError> {
        self.to_structure_with(Arc::new(self.signature.to_signature()?))
    }

    /// Decodes against `signature`, which must equal the declared one.
    pub fn to_structure_with(&self, signature: Arc<Signature>) -> Result<Structure, StructureError> {
        if self.signature.to_signature()? != *signature {
            return Err(StructureError::SignatureMismatch);
        }
        let mut s = Structure::new(signature.clone());
        for e in &self.elements {
            s.add_element(e.id, &e.sort)?;
        }
        for (name, tuples) in &self.tuples {
            for t in tuples {
                s.insert_tuple(name, t.clone())?;
            }
        }
        for sort in signature.ordered() {
            match self.order.get(sort) {
                Some(ids) => s.set_order(sort, ids.clone())?,
                None if s.elements_of_sort(sort).len() > 1 => {
                    return Err(StructureError::Format(format!("missing order for sort {sort}")));
                }
                None => {}
            }
        }
        if let Some(extra) = self.order.keys().find(|k| !signature.ordered().contains(k)) {
            return Err(StructureError::BadOrder(format!("sort {extra} is not ordered")));
        }
        s.validate()?;
        Ok(s)
    }
}

impl Serialize for Structure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        StructureFile::from_structure(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = StructureFile::deserialize(deserializer)?;
        file.to_structure().map_err(serde::de::Error::custom)
    }
}

pub fn structure_to_json(s: &Structure) -> String {
    let mut out = serde_json::to_string_pretty(&StructureFile::from_structure(s)).expect("serializable");
    out.push('\n');
    out
}

pub fn structure_from_json(text: &str) -> Result<Structure, StructureError> {
    let file: StructureFile = serde_json::from_str(text).map_err(|e| StructureError::Format(e.to_string()))?;
    file.to_structure()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Structure {
        let sig = Arc::new(Signature::build(
            &["X", "Y"],
            vec![RelationDecl::new("g", &["X", "Y", "Y"]), RelationDecl::graded("G", &["X", "Y", "Y"])],
            &["Y"],
        ));
        let mut s = Structure::new(sig);
        s.add_element(4, "X").unwrap();
        s.add_element(9, "Y").unwrap();
        s.add_element(2, "Y").unwrap();
        s.insert_tuple("g", vec![4, 9, 9]).unwrap();
        s
    }

    #[test]
    fn round_trip_keeps_ids_and_order() {
        let s = sample();
        let text = structure_to_json(&s);
        let back = structure_from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.order("Y").unwrap(), &[9, 2]);
        assert_eq!(structure_to_json(&back), text);
        assert!(text.contains("\"G\": []"));
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&structure_to_json(&sample())).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(matches!(structure_from_json(&v.to_string()), Err(StructureError::Format(_))));
    }

    #[test]
    fn dangling_tuple_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&structure_to_json(&sample())).unwrap();
        v["tuples"]["g"] = serde_json::json!([[4, 9, 7]]);
        assert!(structure_from_json(&v.to_string()).is_err());
    }
}
