//! The SimDM instance graph describing a simulation project's outputs.
//!
//! Only the subset needed to publish model grids is modeled: the experiment
//! and its protocol, output datasets with their object types, optional
//! inline data objects, and named relationships between datasets. Bulk data
//! objects live in the catalog; the graph carries `object_count` instead.

mod related;
mod utype;
mod validate;

pub use related::{related_objects, InMemoryPairs, RelatedError, RelationshipSource};
pub use utype::{resolve_utype, NodeKind, UnknownUtype, UtypePath};
pub use validate::{validate_graph, ValidationReport, Violation};

use crate::scalar::{Datatype, Scalar};

/// Vocabulary label of the snapshot object type.
pub const SNAPSHOT_LABEL: &str =
    "http://ivoa.net/rdf/theory/DataObjectTypes/2019-02-27/DataObjectTypes.html#Snapshot";

/// Name of the relationship linking snapshots to the SED models they summarize.
pub const SNAPSHOT_SED_MODEL: &str = "SnapshotSedModel";

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub id: String,
    pub name: String,
    pub description: String,
    pub protocol_id: String,
    pub dataset_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub id: String,
    pub name: String,
    pub description: String,
    pub code_reference: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyDef {
    pub name: String,
    pub datatype: Datatype,
    pub unit: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectType {
    pub id: String,
    pub label: String,
    pub properties: Vec<PropertyDef>,
}

impl ObjectType {
    pub fn property(&self, name: &str) -> Option<&PropertyDef> {
        self.properties.iter().find(|p| p.name == name)
    }

    /// Fragment of the vocabulary label after `#`, if any.
    pub fn label_fragment(&self) -> Option<&str> {
        self.label.split_once('#').map(|(_, frag)| frag)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputDataset {
    pub id: String,
    pub name: String,
    pub object_type_id: String,
    pub object_count: u64,
    pub storage_ref: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyValue {
    pub property_name: String,
    pub value: Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataObject {
    pub id: String,
    pub dataset_id: String,
    pub values: Vec<PropertyValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relationship {
    pub name: String,
    pub source_dataset_id: String,
    pub target_dataset_id: String,
    pub pairs_ref: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceGraph {
    pub experiment: Experiment,
    pub protocols: Vec<Protocol>,
    pub object_types: Vec<ObjectType>,
    pub datasets: Vec<OutputDataset>,
    pub objects: Vec<DataObject>,
    pub relationships: Vec<Relationship>,
}

impl InstanceGraph {
    pub fn dataset(&self, id: &str) -> Option<&OutputDataset> {
        self.datasets.iter().find(|d| d.id == id)
    }

    pub fn object_type(&self, id: &str) -> Option<&ObjectType> {
        self.object_types.iter().find(|t| t.id == id)
    }

    /// The object type of a dataset, when both resolve.
    pub fn dataset_type(&self, dataset_id: &str) -> Option<&ObjectType> {
        self.dataset(dataset_id)
            .and_then(|d| self.object_type(&d.object_type_id))
    }

    pub fn relationship(&self, name: &str) -> Option<&Relationship> {
        self.relationships.iter().find(|r| r.name == name)
    }

    /// Relationships with `dataset_id` on either side, in graph order.
    pub fn relationships_touching<'a>(
        &'a self,
        dataset_id: &'a str,
    ) -> impl Iterator<Item = &'a Relationship> + 'a {
        self.relationships
            .iter()
            .filter(move |r| r.source_dataset_id == dataset_id || r.target_dataset_id == dataset_id)
    }
}
