//! Fixtures shared by unit tests.

use crate::scalar::{Datatype, Scalar};
use crate::simdm::*;

pub(crate) fn snapshot_graph() -> InstanceGraph {
    InstanceGraph {
        experiment: Experiment {
            id: "exp".into(),
            name: "Young clusters in massive clumps".into(),
            description: String::new(),
            protocol_id: "proto".into(),
            dataset_ids: vec!["sed_models".into(), "snapshots".into()],
        },
        protocols: vec![Protocol {
            id: "proto".into(),
            name: "population synthesis".into(),
            description: String::new(),
            code_reference: String::new(),
        }],
        object_types: vec![
            ObjectType {
                id: "sed_type".into(),
                label: "urn:sed".into(),
                properties: vec![PropertyDef {
                    name: "clump_mass".into(),
                    datatype: Datatype::Real,
                    unit: "Msun".into(),
                    description: String::new(),
                }],
            },
            ObjectType {
                id: "snap_type".into(),
                label: SNAPSHOT_LABEL.into(),
                properties: vec![
                    PropertyDef {
                        name: "clump_mass".into(),
                        datatype: Datatype::Real,
                        unit: "Msun".into(),
                        description: "mean clump mass".into(),
                    },
                    PropertyDef {
                        name: "n_models".into(),
                        datatype: Datatype::Integer,
                        unit: String::new(),
                        description: String::new(),
                    },
                ],
            },
        ],
        datasets: vec![
            OutputDataset {
                id: "sed_models".into(),
                name: "SED models".into(),
                object_type_id: "sed_type".into(),
                object_count: 3,
                storage_ref: String::new(),
            },
            OutputDataset {
                id: "snapshots".into(),
                name: "Snapshots".into(),
                object_type_id: "snap_type".into(),
                object_count: 1,
                storage_ref: String::new(),
            },
        ],
        objects: vec![DataObject {
            id: "s1".into(),
            dataset_id: "snapshots".into(),
            values: vec![
                PropertyValue {
                    property_name: "clump_mass".into(),
                    value: Scalar::Real(100.0),
                },
                PropertyValue {
                    property_name: "n_models".into(),
                    value: Scalar::Integer(1),
                },
            ],
        }],
        relationships: vec![Relationship {
            name: SNAPSHOT_SED_MODEL.into(),
            source_dataset_id: "snapshots".into(),
            target_dataset_id: "sed_models".into(),
            pairs_ref: String::new(),
        }],
    }
}
