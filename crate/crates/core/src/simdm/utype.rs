use std::fmt;

use thiserror::Error;

/// A data-model path such as `SimDM:/resource/experiment/OutputDataset`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UtypePath(String);

impl UtypePath {
    pub const PREFIX: &'static str = "SimDM:/";

    pub fn new(text: impl Into<String>) -> Result<Self, UnknownUtype> {
        let text = text.into();
        if text.len() <= Self::PREFIX.len() || !text.starts_with(Self::PREFIX) {
            return Err(UnknownUtype(text));
        }
        Ok(Self(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UtypePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown utype {0:?}")]
pub struct UnknownUtype(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Experiment,
    Protocol,
    OutputDataset,
    OutputDataObjectType,
    DataObject,
    Property,
    PropertyValue,
    Relationship,
}

impl NodeKind {
    pub const ALL: [NodeKind; 8] = [
        NodeKind::Experiment,
        NodeKind::Protocol,
        NodeKind::OutputDataset,
        NodeKind::OutputDataObjectType,
        NodeKind::DataObject,
        NodeKind::Property,
        NodeKind::PropertyValue,
        NodeKind::Relationship,
    ];

    /// The canonical path string for this node kind.
    pub fn utype(self) -> &'static str {
        match self {
            NodeKind::Experiment => "SimDM:/resource/experiment/Experiment",
            NodeKind::Protocol => "SimDM:/resource/protocol/Protocol",
            NodeKind::OutputDataset => "SimDM:/resource/experiment/OutputDataset",
            NodeKind::OutputDataObjectType => "SimDM:/resource/protocol/OutputDataObjectType",
            NodeKind::DataObject => "SimDM:/resource/experiment/DataObject",
            NodeKind::Property => "SimDM:/object/Property",
            NodeKind::PropertyValue => "SimDM:/resource/experiment/PropertyValue",
            NodeKind::Relationship => "SimDM:/object/Relationship",
        }
    }
}

/// Maps one of the eight known paths to its node kind.
pub fn resolve_utype(path: &str) -> Result<NodeKind, UnknownUtype> {
    NodeKind::ALL
        .into_iter()
        .find(|k| k.utype() == path)
        .ok_or_else(|| UnknownUtype(path.to_owned()))
}
