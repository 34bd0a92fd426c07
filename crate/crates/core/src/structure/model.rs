use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::signature::{Signature, ANY_SORT};
use super::StructureError;

pub type ElementId = u32;
pub type Tuple = Vec<ElementId>;

/// A finite multi-sorted relational structure.
///
/// Elements carry opaque integer ids that are unique across sorts. Every
/// relation is stored as a set of id tuples; functions are relations whose
/// functionality is checked by the class checkers, not here. Each ordered
/// sort keeps its elements as an ascending list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    signature: Arc<Signature>,
    elements: BTreeMap<ElementId, usize>,
    relations: Vec<BTreeSet<Tuple>>,
    orders: BTreeMap<usize, Vec<ElementId>>,
}

impl Structure {
    pub fn new(signature: Arc<Signature>) -> Self {
        let relations = vec![BTreeSet::new(); signature.relations().len()];
        let orders = (0..signature.sorts().len())
            .filter(|&s| signature.is_ordered(s))
            .map(|s| (s, Vec::new()))
            .collect();
        Structure {
            signature,
            elements: BTreeMap::new(),
            relations,
            orders,
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max_id(&self) -> Option<ElementId> {
        self.elements.keys().next_back().copied()
    }

    /// Smallest id strictly above every id in use.
    pub fn fresh_id(&self) -> ElementId {
        self.max_id().map_or(0, |m| m + 1)
    }

    pub fn contains(&self, id: ElementId) -> bool {
        self.elements.contains_key(&id)
    }

    /// Adds an element; for an ordered sort it becomes the new maximum.
    pub fn add_element(&mut self, id: ElementId, sort: &str) -> Result<(), StructureError> {
        let s = self
            .signature
            .sort_index(sort)
            .ok_or_else(|| StructureError::UnknownSort(sort.to_string()))?;
        if self.elements.insert(id, s).is_some() {
            return Err(StructureError::DuplicateElement(id));
        }
        if let Some(order) = self.orders.get_mut(&s) {
            order.push(id);
        }
        Ok(())
    }

    pub fn insert_tuple(&mut self, relation: &str, tuple: Tuple) -> Result<bool, StructureError> {
        let r = self
            .signature
            .relation_index(relation)
            .ok_or_else(|| StructureError::UnknownRelation(relation.to_string()))?;
        self.check_tuple(r, &tuple)?;
        Ok(self.relations[r].insert(tuple))
    }

    pub fn remove_tuple(&mut self, relation: &str, tuple: &[ElementId]) -> bool {
        match self.signature.relation_index(relation) {
            Some(r) => self.relations[r].remove(tuple),
            None => false,
        }
    }

    fn check_tuple(&self, r: usize, tuple: &[ElementId]) -> Result<(), StructureError> {
        let decl = &self.signature.relations()[r];
        if decl.grade_of(tuple.len()).is_none() {
            return Err(StructureError::BadTuple {
                relation: decl.name.clone(),
                tuple: tuple.to_vec(),
                reason: "wrong length".into(),
            });
        }
        for (i, id) in tuple.iter().enumerate() {
            let Some(&s) = self.elements.get(id) else {
                return Err(StructureError::BadTuple {
                    relation: decl.name.clone(),
                    tuple: tuple.to_vec(),
                    reason: format!("unknown element {id}"),
                });
            };
            let want = decl.sort_at(i, tuple.len());
            if want != ANY_SORT && self.signature.sorts()[s] != want {
                return Err(StructureError::BadTuple {
                    relation: decl.name.clone(),
                    tuple: tuple.to_vec(),
                    reason: format!("element {id} is not of sort {want}"),
                });
            }
        }
        Ok(())
    }

    /// Replaces the order of an ordered sort; `ids` must list its elements ascending.
    pub fn set_order(&mut self, sort: &str, ids: Vec<ElementId>) -> Result<(), StructureError> {
        let s = self
            .signature
            .sort_index(sort)
            .ok_or_else(|| StructureError::UnknownSort(sort.to_string()))?;
        if !self.orders.contains_key(&s) {
            return Err(StructureError::BadOrder(format!("sort {sort} is not ordered")));
        }
        let members: BTreeSet<ElementId> = self.elements_of(s).collect();
        let listed: BTreeSet<ElementId> = ids.iter().copied().collect();
        if listed.len() != ids.len() || listed != members {
            return Err(StructureError::BadOrder(format!(
                "order on {sort} must list each of its elements exactly once"
            )));
        }
        self.orders.insert(s, ids);
        Ok(())
    }

    /// Element ids with their sort index, ascending by id.
    pub fn elements(&self) -> impl Iterator<Item = (ElementId, usize)> + '_ {
        self.elements.iter().map(|(&e, &s)| (e, s))
    }

    pub fn ids(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.elements.keys().copied()
    }

    pub fn sort_of(&self, id: ElementId) -> Option<usize> {
        self.elements.get(&id).copied()
    }

    pub fn sort_name_of(&self, id: ElementId) -> Option<&str> {
        self.sort_of(id).map(|s| self.signature.sorts()[s].as_str())
    }

    pub fn elements_of(&self, sort: usize) -> impl Iterator<Item = ElementId> + '_ {
        self.elements
            .iter()
            .filter(move |(_, &s)| s == sort)
            .map(|(&e, _)| e)
    }

    /// Elements of the named sort ascending by id (empty for an unknown sort).
    pub fn elements_of_sort(&self, sort: &str) -> Vec<ElementId> {
        match self.signature.sort_index(sort) {
            Some(s) => self.elements_of(s).collect(),
            None => Vec::new(),
        }
    }

    pub fn tuples(&self, relation: &str) -> Option<&BTreeSet<Tuple>> {
        self.signature
            .relation_index(relation)
            .map(|r| &self.relations[r])
    }

    pub fn relation_tuples(&self, r: usize) -> &BTreeSet<Tuple> {
        &self.relations[r]
    }

    pub fn holds(&self, relation: &str, tuple: &[ElementId]) -> bool {
        self.tuples(relation).is_some_and(|t| t.contains(tuple))
    }

    /// Ascending order of an ordered sort.
    pub fn order(&self, sort: &str) -> Option<&[ElementId]> {
        self.signature
            .sort_index(sort)
            .and_then(|s| self.orders.get(&s))
            .map(|v| v.as_slice())
    }

    pub fn order_of(&self, sort: usize) -> Option<&[ElementId]> {
        self.orders.get(&sort).map(|v| v.as_slice())
    }

    pub fn orders(&self) -> &BTreeMap<usize, Vec<ElementId>> {
        &self.orders
    }

    /// Position of every element of an ordered sort within its order.
    pub fn ranks(&self) -> HashMap<ElementId, usize> {
        let mut out = HashMap::new();
        for order in self.orders.values() {
            for (i, &e) in order.iter().enumerate() {
                out.insert(e, i);
            }
        }
        out
    }

    /// Checks every container invariant. Structures built through the
    /// mutators satisfy them; decoded files are checked here.
    pub fn validate(&self) -> Result<(), StructureError> {
        for r in 0..self.relations.len() {
            for t in &self.relations[r] {
                self.check_tuple(r, t)?;
            }
        }
        for (&s, order) in &self.orders {
            let members: BTreeSet<ElementId> = self.elements_of(s).collect();
            let listed: BTreeSet<ElementId> = order.iter().copied().collect();
            if listed.len() != order.len() || listed != members {
                return Err(StructureError::BadOrder(format!(
                    "order on {} is not a strict total order of its elements",
                    self.signature.sorts()[s]
                )));
            }
        }
        Ok(())
    }

    /// The induced substructure on `subset`: relations and orders restricted by intersection.
    pub fn induced(&self, subset: &BTreeSet<ElementId>) -> Structure {
        let elements = self
            .elements
            .iter()
            .filter(|(e, _)| subset.contains(e))
            .map(|(&e, &s)| (e, s))
            .collect();
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .filter(|t| t.iter().all(|e| subset.contains(e)))
                    .cloned()
                    .collect()
            })
            .collect();
        let orders = self
            .orders
            .iter()
            .map(|(&s, o)| (s, o.iter().copied().filter(|e| subset.contains(e)).collect()))
            .collect();
        Structure {
            signature: self.signature.clone(),
            elements,
            relations,
            orders,
        }
    }

    /// Renames every element through `map`, which must be injective and total.
    pub fn relabel(&self, map: &BTreeMap<ElementId, ElementId>) -> Structure {
        let f = |e: &ElementId| map[e];
        Structure {
            signature: self.signature.clone(),
            elements: self.elements.iter().map(|(e, &s)| (f(e), s)).collect(),
            relations: self
                .relations
                .iter()
                .map(|rel| rel.iter().map(|t| t.iter().map(f).collect()).collect())
                .collect(),
            orders: self
                .orders
                .iter()
                .map(|(&s, o)| (s, o.iter().map(f).collect()))
                .collect(),
        }
    }

    /// Drops every sort and relation not in `target`, which must be a subsignature.
    pub fn reduct(&self, target: Arc<Signature>) -> Result<Structure, StructureError> {
        if !target.is_subsignature_of(&self.signature) {
            return Err(StructureError::SignatureMismatch);
        }
        let mut out = Structure::new(target.clone());
        for (e, s) in self.elements() {
            let name = &self.signature.sorts()[s];
            if target.sort_index(name).is_some() {
                out.add_element(e, name)?;
            }
        }
        for (r, decl) in target.relations().iter().enumerate() {
            let src = self.signature.relation_index(&decl.name).expect("subsignature");
            out.relations[r] = self.relations[src]
                .iter()
                .filter(|t| t.iter().all(|e| out.contains(*e)))
                .cloned()
                .collect();
        }
        for (&s, order) in out.orders.iter_mut() {
            let name = &target.sorts()[s];
            let src = self.signature.sort_index(name).expect("subsignature");
            *order = self.orders[&src].clone();
        }
        Ok(out)
    }

    /// Copies every element, tuple and order into the larger signature `target`.
    pub fn expand(&self, target: Arc<Signature>) -> Result<Structure, StructureError> {
        if !self.signature.is_subsignature_of(&target) {
            return Err(StructureError::SignatureMismatch);
        }
        let mut out = Structure::new(target.clone());
        for (e, s) in self.elements() {
            out.add_element(e, &self.signature.sorts()[s])?;
        }
        for (r, decl) in self.signature.relations().iter().enumerate() {
            let dst = target.relation_index(&decl.name).expect("subsignature");
            out.relations[dst] = self.relations[r].clone();
        }
        for (&s, order) in &self.orders {
            let dst = target.sort_index(&self.signature.sorts()[s]).expect("subsignature");
            out.orders.insert(dst, order.clone());
        }
        Ok(out)
    }

    /// Same structure over an equal signature held in a different `Arc`.
    pub fn with_signature(mut self, signature: Arc<Signature>) -> Result<Structure, StructureError> {
        if *signature != *self.signature {
            return Err(StructureError::SignatureMismatch);
        }
        self.signature = signature;
        Ok(self)
    }
}
