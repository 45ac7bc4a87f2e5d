use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::{InstanceGraph, Relationship};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelatedError {
    #[error("unknown relationship {0:?}")]
    UnknownRelationship(String),
    #[error("unknown object {object:?} in dataset {dataset:?}")]
    UnknownObject { dataset: String, object: String },
}

/// Anything that can answer relationship traversals: the on-disk catalog or
/// an in-memory pair table.
pub trait RelationshipSource {
    fn relationship(&self, name: &str) -> Option<&Relationship>;

    /// Pair table of a relationship, in file order.
    fn pairs(&self, name: &str) -> Option<&[(String, String)]>;

    fn has_object(&self, dataset_id: &str, object_id: &str) -> bool;

    /// Targets paired with `source`, in pair-table order. The default scans
    /// the pair table; implementations may use an index.
    fn targets_of(&self, name: &str, source: &str) -> Vec<String> {
        self.pairs(name)
            .unwrap_or_default()
            .iter()
            .filter(|(s, _)| s == source)
            .map(|(_, t)| t.clone())
            .collect()
    }
}

/// Follows `relationship_name` from `source_object_id`, which must be an
/// object of the relationship's source dataset.
pub fn related_objects<S: RelationshipSource + ?Sized>(
    source: &S,
    relationship_name: &str,
    source_object_id: &str,
) -> Result<Vec<String>, RelatedError> {
    let rel = source
        .relationship(relationship_name)
        .ok_or_else(|| RelatedError::UnknownRelationship(relationship_name.to_owned()))?;
    if !source.has_object(&rel.source_dataset_id, source_object_id) {
        return Err(RelatedError::UnknownObject {
            dataset: rel.source_dataset_id.clone(),
            object: source_object_id.to_owned(),
        });
    }
    Ok(source.targets_of(relationship_name, source_object_id))
}

/// A metadata graph paired with explicit object-id sets and pair tables.
#[derive(Debug, Clone)]
pub struct InMemoryPairs {
    pub graph: InstanceGraph,
    pub object_ids: HashMap<String, HashSet<String>>,
    pub pairs: HashMap<String, Vec<(String, String)>>,
}

impl RelationshipSource for InMemoryPairs {
    fn relationship(&self, name: &str) -> Option<&Relationship> {
        self.graph.relationship(name)
    }

    fn pairs(&self, name: &str) -> Option<&[(String, String)]> {
        self.graph.relationship(name)?;
        Some(self.pairs.get(name).map(Vec::as_slice).unwrap_or_default())
    }

    fn has_object(&self, dataset_id: &str, object_id: &str) -> bool {
        self.object_ids
            .get(dataset_id)
            .is_some_and(|ids| ids.contains(object_id))
            || self
                .graph
                .objects
                .iter()
                .any(|o| o.dataset_id == dataset_id && o.id == object_id)
    }
}
