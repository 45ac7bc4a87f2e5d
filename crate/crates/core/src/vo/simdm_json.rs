//! Canonical JSON form of the instance graph.
//!
//! Member order is fixed by the field order of the node structs below.
//! Output is two-space indented with LF line endings and a trailing newline;
//! reals use the shortest form that parses back to the same bits. Parsing is
//! strict: unknown members, missing members and misplaced utypes are
//! rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Datatype, Scalar};
use crate::simdm::{
    validate_graph, DataObject, Experiment, InstanceGraph, NodeKind, ObjectType, OutputDataset,
    PropertyDef, PropertyValue, Protocol, Relationship, ValidationReport,
};

#[derive(Debug, Error)]
pub enum SimdmJsonError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("invalid graph:\n{0}")]
    InvalidGraph(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub experiment: ExperimentNode,
    pub protocols: Vec<ProtocolNode>,
    pub object_types: Vec<ObjectTypeNode>,
    pub datasets: Vec<DatasetNode>,
    pub relationships: Vec<RelationshipNode>,
    pub objects: Vec<DataObjectNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentNode {
    pub id: String,
    pub name: String,
    pub description: String,
    pub utype: String,
    pub protocol_id: String,
    pub dataset_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolNode {
    pub id: String,
    pub name: String,
    pub description: String,
    pub utype: String,
    pub code_reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectTypeNode {
    pub id: String,
    pub label: String,
    pub utype: String,
    pub properties: Vec<PropertyNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyNode {
    pub name: String,
    pub datatype: String,
    pub unit: String,
    pub description: String,
    pub utype: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetNode {
    pub id: String,
    pub name: String,
    pub utype: String,
    pub object_type_id: String,
    pub object_count: u64,
    pub storage_ref: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationshipNode {
    pub name: String,
    pub utype: String,
    pub source_dataset_id: String,
    pub target_dataset_id: String,
    pub pairs_ref: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataObjectNode {
    pub id: String,
    pub utype: String,
    pub dataset_id: String,
    pub values: Vec<ValueNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueNode {
    pub name: String,
    pub value: serde_json::Value,
    pub utype: String,
}

fn utype(kind: NodeKind) -> String {
    kind.utype().to_owned()
}

impl From<&Experiment> for ExperimentNode {
    fn from(e: &Experiment) -> Self {
        Self {
            id: e.id.clone(),
            name: e.name.clone(),
            description: e.description.clone(),
            utype: utype(NodeKind::Experiment),
            protocol_id: e.protocol_id.clone(),
            dataset_ids: e.dataset_ids.clone(),
        }
    }
}

impl From<&Protocol> for ProtocolNode {
    fn from(p: &Protocol) -> Self {
        Self {
            id: p.id.clone(),
            name: p.name.clone(),
            description: p.description.clone(),
            utype: utype(NodeKind::Protocol),
            code_reference: p.code_reference.clone(),
        }
    }
}

impl From<&PropertyDef> for PropertyNode {
    fn from(p: &PropertyDef) -> Self {
        Self {
            name: p.name.clone(),
            datatype: p.datatype.as_str().to_owned(),
            unit: p.unit.clone(),
            description: p.description.clone(),
            utype: utype(NodeKind::Property),
        }
    }
}

impl From<&ObjectType> for ObjectTypeNode {
    fn from(t: &ObjectType) -> Self {
        Self {
            id: t.id.clone(),
            label: t.label.clone(),
            utype: utype(NodeKind::OutputDataObjectType),
            properties: t.properties.iter().map(PropertyNode::from).collect(),
        }
    }
}

impl From<&OutputDataset> for DatasetNode {
    fn from(d: &OutputDataset) -> Self {
        Self {
            id: d.id.clone(),
            name: d.name.clone(),
            utype: utype(NodeKind::OutputDataset),
            object_type_id: d.object_type_id.clone(),
            object_count: d.object_count,
            storage_ref: d.storage_ref.clone(),
        }
    }
}

impl From<&Relationship> for RelationshipNode {
    fn from(r: &Relationship) -> Self {
        Self {
            name: r.name.clone(),
            utype: utype(NodeKind::Relationship),
            source_dataset_id: r.source_dataset_id.clone(),
            target_dataset_id: r.target_dataset_id.clone(),
            pairs_ref: r.pairs_ref.clone(),
        }
    }
}

impl ValueNode {
    pub fn new(name: &str, value: &Scalar) -> Self {
        Self {
            name: name.to_owned(),
            value: scalar_to_json(value),
            utype: utype(NodeKind::PropertyValue),
        }
    }
}

impl From<&DataObject> for DataObjectNode {
    fn from(o: &DataObject) -> Self {
        Self {
            id: o.id.clone(),
            utype: utype(NodeKind::DataObject),
            dataset_id: o.dataset_id.clone(),
            values: o
                .values
                .iter()
                .map(|v| ValueNode::new(&v.property_name, &v.value))
                .collect(),
        }
    }
}

/// Non-finite reals have no JSON form and become `null`; valid graphs never
/// contain them.
pub(crate) fn scalar_to_json(v: &Scalar) -> serde_json::Value {
    match v {
        Scalar::Real(x) => serde_json::Number::from_f64(*x)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null),
        Scalar::Integer(i) => serde_json::Value::from(*i),
        Scalar::Text(s) => serde_json::Value::String(s.clone()),
    }
}

fn scalar_from_json(v: &serde_json::Value, at: &str) -> Result<Scalar, SimdmJsonError> {
    match v {
        serde_json::Value::String(s) => Ok(Scalar::Text(s.clone())),
        serde_json::Value::Number(n) if n.is_f64() => Ok(Scalar::Real(n.as_f64().unwrap())),
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(Scalar::Integer)
            .ok_or_else(|| SimdmJsonError::SchemaViolation(format!("{at}: integer out of range"))),
        _ => Err(SimdmJsonError::SchemaViolation(format!(
            "{at}: value must be a number or string"
        ))),
    }
}

impl From<&InstanceGraph> for GraphDocument {
    fn from(g: &InstanceGraph) -> Self {
        Self {
            experiment: (&g.experiment).into(),
            protocols: g.protocols.iter().map(Into::into).collect(),
            object_types: g.object_types.iter().map(Into::into).collect(),
            datasets: g.datasets.iter().map(Into::into).collect(),
            relationships: g.relationships.iter().map(Into::into).collect(),
            objects: g.objects.iter().map(Into::into).collect(),
        }
    }
}

/// Two-space indented JSON with a trailing LF.
pub(crate) fn to_canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory JSON serialization");
    out.push(b'\n');
    out
}

pub fn render_simdm(graph: &InstanceGraph) -> Vec<u8> {
    to_canonical_json(&GraphDocument::from(graph))
}

fn expect_utype(found: &str, kind: NodeKind, at: &str) -> Result<(), SimdmJsonError> {
    if found == kind.utype() {
        Ok(())
    } else {
        Err(SimdmJsonError::SchemaViolation(format!(
            "{at}: expected utype {:?}, found {found:?}",
            kind.utype()
        )))
    }
}

impl GraphDocument {
    /// Converts to the domain graph, checking every node's utype.
    pub fn into_graph(self) -> Result<InstanceGraph, SimdmJsonError> {
        let e = self.experiment;
        expect_utype(&e.utype, NodeKind::Experiment, "experiment")?;
        let experiment = Experiment {
            id: e.id,
            name: e.name,
            description: e.description,
            protocol_id: e.protocol_id,
            dataset_ids: e.dataset_ids,
        };

        let mut protocols = Vec::with_capacity(self.protocols.len());
        for p in self.protocols {
            expect_utype(&p.utype, NodeKind::Protocol, &format!("protocol {}", p.id))?;
            protocols.push(Protocol {
                id: p.id,
                name: p.name,
                description: p.description,
                code_reference: p.code_reference,
            });
        }

        let mut object_types = Vec::with_capacity(self.object_types.len());
        for t in self.object_types {
            let at = format!("object type {}", t.id);
            expect_utype(&t.utype, NodeKind::OutputDataObjectType, &at)?;
            let mut properties = Vec::with_capacity(t.properties.len());
            for p in t.properties {
                let at = format!("{at} property {}", p.name);
                expect_utype(&p.utype, NodeKind::Property, &at)?;
                let datatype = Datatype::parse(&p.datatype).ok_or_else(|| {
                    SimdmJsonError::SchemaViolation(format!("{at}: unknown datatype {:?}", p.datatype))
                })?;
                properties.push(PropertyDef {
                    name: p.name,
                    datatype,
                    unit: p.unit,
                    description: p.description,
                });
            }
            object_types.push(ObjectType {
                id: t.id,
                label: t.label,
                properties,
            });
        }

        let mut datasets = Vec::with_capacity(self.datasets.len());
        for d in self.datasets {
            expect_utype(&d.utype, NodeKind::OutputDataset, &format!("dataset {}", d.id))?;
            datasets.push(OutputDataset {
                id: d.id,
                name: d.name,
                object_type_id: d.object_type_id,
                object_count: d.object_count,
                storage_ref: d.storage_ref,
            });
        }

        let mut relationships = Vec::with_capacity(self.relationships.len());
        for r in self.relationships {
            expect_utype(&r.utype, NodeKind::Relationship, &format!("relationship {}", r.name))?;
            relationships.push(Relationship {
                name: r.name,
                source_dataset_id: r.source_dataset_id,
                target_dataset_id: r.target_dataset_id,
                pairs_ref: r.pairs_ref,
            });
        }

        let mut objects = Vec::with_capacity(self.objects.len());
        for o in self.objects {
            let at = format!("object {}", o.id);
            expect_utype(&o.utype, NodeKind::DataObject, &at)?;
            let mut values = Vec::with_capacity(o.values.len());
            for v in o.values {
                let at = format!("{at} value {}", v.name);
                expect_utype(&v.utype, NodeKind::PropertyValue, &at)?;
                values.push(PropertyValue {
                    value: scalar_from_json(&v.value, &at)?,
                    property_name: v.name,
                });
            }
            objects.push(DataObject {
                id: o.id,
                dataset_id: o.dataset_id,
                values,
            });
        }

        Ok(InstanceGraph {
            experiment,
            protocols,
            object_types,
            datasets,
            objects,
            relationships,
        })
    }
}

/// Strict inverse of [`render_simdm`]. The parsed graph must also validate.
pub fn parse_simdm(doc: &[u8]) -> Result<InstanceGraph, SimdmJsonError> {
    let parsed: GraphDocument = serde_json::from_slice(doc).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => SimdmJsonError::SchemaViolation(e.to_string()),
            Category::Io | Category::Syntax | Category::Eof => {
                SimdmJsonError::MalformedDocument(e.to_string())
            }
        }
    })?;
    let graph = parsed.into_graph()?;
    let report = validate_graph(&graph);
    if !report.is_valid() {
        return Err(SimdmJsonError::InvalidGraph(report));
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simdm::{SNAPSHOT_LABEL, SNAPSHOT_SED_MODEL};
    use crate::testutil::snapshot_graph;
    use crate::vo::render_tables;

    #[test]
    fn vocabulary_strings_present() {
        let doc = String::from_utf8(render_simdm(&snapshot_graph())).unwrap();
        assert!(doc.contains("\"utype\": \"SimDM:/resource/experiment/OutputDataset\""));
        assert!(doc.contains(&format!("\"label\": \"{SNAPSHOT_LABEL}\"")));
        assert!(doc.contains(&format!("\"name\": \"{SNAPSHOT_SED_MODEL}\",\n      \"utype\": \"SimDM:/object/Relationship\"")));
        assert!(doc.contains("\"clump_mass\""));
        assert!(doc.ends_with("}\n"));
        assert!(!doc.contains('\r'));
    }

    #[test]
    fn key_order() {
        let doc = String::from_utf8(render_simdm(&snapshot_graph())).unwrap();
        let pos = |k: &str| doc.find(&format!("\"{k}\":")).unwrap();
        assert!(pos("experiment") < pos("protocols"));
        assert!(pos("protocols") < pos("object_types"));
        assert!(pos("object_types") < pos("datasets"));
        assert!(pos("datasets") < pos("relationships"));
        assert!(pos("relationships") < pos("objects"));
        // dataset node: id, name, utype, object_type_id, object_count, storage_ref
        let ds = &doc[doc.find("\"datasets\"").unwrap()..];
        let p = |k: &str| ds.find(&format!("\"{k}\":")).unwrap();
        assert!(p("id") < p("name"));
        assert!(p("name") < p("utype"));
        assert!(p("utype") < p("object_type_id"));
        assert!(p("object_type_id") < p("object_count"));
        assert!(p("object_count") < p("storage_ref"));
    }

    #[test]
    fn roundtrip_fixture() {
        let g = snapshot_graph();
        assert_eq!(parse_simdm(&render_simdm(&g)).unwrap(), g);
    }

    #[test]
    fn wrong_utype_position() {
        let doc = String::from_utf8(render_simdm(&snapshot_graph())).unwrap();
        let bad = doc.replacen(
            "\"utype\": \"SimDM:/resource/experiment/OutputDataset\"",
            "\"utype\": \"SimDM:/object/Property\"",
            1,
        );
        assert!(matches!(
            parse_simdm(bad.as_bytes()),
            Err(SimdmJsonError::SchemaViolation(_))
        ));
    }

    #[test]
    fn truncated_is_malformed() {
        let doc = render_simdm(&snapshot_graph());
        assert!(matches!(
            parse_simdm(&doc[..doc.len() / 2]),
            Err(SimdmJsonError::MalformedDocument(_))
        ));
        assert!(matches!(parse_simdm(b"{"), Err(SimdmJsonError::MalformedDocument(_))));
    }

    #[test]
    fn unknown_and_missing_members() {
        let doc = String::from_utf8(render_simdm(&snapshot_graph())).unwrap();
        let extra = doc.replacen("\"storage_ref\"", "\"extra\": 1,\n      \"storage_ref\"", 1);
        assert!(matches!(parse_simdm(extra.as_bytes()), Err(SimdmJsonError::SchemaViolation(_))));
        let missing = doc.replacen("\"object_count\": 3,", "", 1);
        assert!(matches!(parse_simdm(missing.as_bytes()), Err(SimdmJsonError::SchemaViolation(_))));
    }

    #[test]
    fn invalid_graph_is_reported() {
        let mut g = snapshot_graph();
        g.datasets[0].object_type_id = "ghost".into();
        assert!(matches!(
            parse_simdm(&render_simdm(&g)),
            Err(SimdmJsonError::InvalidGraph(_))
        ));
    }

    #[test]
    fn tables_document() {
        let g = snapshot_graph();
        let doc = String::from_utf8(render_tables(&g)).unwrap();
        assert!(doc.contains(
            "<name>clump_mass</name>\n        <datatype>double</datatype>\n        <unit>Msun</unit>"
        ));
        let xml = roxmltree::Document::parse(&doc).unwrap();
        let tables: Vec<_> = xml
            .descendants()
            .filter(|n| n.has_tag_name("table"))
            .map(|t| t.children().find(|c| c.has_tag_name("name")).unwrap().text().unwrap())
            .collect();
        assert_eq!(tables, ["sed_models", "snapshots"]);
        assert_eq!(render_tables(&g), render_tables(&g.clone()));
    }
}
