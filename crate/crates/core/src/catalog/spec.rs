//! The JSON ingest file format.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::error::IngestError;
use super::VectorRole;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSpec {
    pub experiment: ExperimentSpec,
    pub protocol: ProtocolSpec,
    pub datasets: Vec<DatasetSpec>,
    #[serde(default)]
    pub relationships: Vec<RelationshipSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub code_reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub id: String,
    pub name: String,
    /// Defaults to `<id>_type`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_type_id: Option<String>,
    pub object_type_label: String,
    pub scalar_csv: PathBuf,
    pub schema_csv: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_csv: Option<PathBuf>,
    #[serde(default)]
    pub vector_role: VectorRole,
}

impl DatasetSpec {
    pub fn object_type_id(&self) -> String {
        self.object_type_id
            .clone()
            .unwrap_or_else(|| format!("{}_type", self.id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationshipSpec {
    pub name: String,
    pub source_dataset: String,
    pub target_dataset: String,
    pub pairs_csv: PathBuf,
}

/// Names that become path segments on disk and in URLs.
pub(crate) fn is_safe_name(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with('.')
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.'))
}

impl IngestSpec {
    /// Reads a spec file; relative CSV paths resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self, IngestError> {
        let bytes = std::fs::read(path).map_err(|e| IngestError::io(path, e))?;
        let mut spec: IngestSpec = serde_json::from_slice(&bytes)
            .map_err(|e| IngestError::Spec(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        spec.resolve_paths(base);
        Ok(spec)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for d in &mut self.datasets {
            fix(&mut d.scalar_csv);
            fix(&mut d.schema_csv);
            if let Some(v) = &mut d.vector_csv {
                fix(v);
            }
        }
        for r in &mut self.relationships {
            fix(&mut r.pairs_csv);
        }
    }

    /// Structural checks that need no file access.
    pub fn check(&self) -> Result<(), IngestError> {
        let spec_err = |m: String| Err(IngestError::Spec(m));
        if self.datasets.is_empty() {
            return spec_err("at least one dataset is required".into());
        }
        for (i, d) in self.datasets.iter().enumerate() {
            if !is_safe_name(&d.id) {
                return spec_err(format!("dataset id {:?} must be [A-Za-z0-9_.-]+", d.id));
            }
            if self.datasets[..i].iter().any(|o| o.id == d.id) {
                return spec_err(format!("dataset id {:?} listed twice", d.id));
            }
            match (d.vector_role, &d.vector_csv) {
                (VectorRole::None, Some(_)) => {
                    return spec_err(format!("dataset {:?}: vector_csv given with role none", d.id))
                }
                (VectorRole::Sed | VectorRole::Track, None) => {
                    return spec_err(format!("dataset {:?}: vector role needs vector_csv", d.id))
                }
                _ => {}
            }
        }
        for (i, r) in self.relationships.iter().enumerate() {
            if !is_safe_name(&r.name) {
                return spec_err(format!("relationship name {:?} must be [A-Za-z0-9_.-]+", r.name));
            }
            if self.relationships[..i].iter().any(|o| o.name == r.name) {
                return spec_err(format!("relationship {:?} listed twice", r.name));
            }
            for ds in [&r.source_dataset, &r.target_dataset] {
                if !self.datasets.iter().any(|d| &d.id == ds) {
                    return spec_err(format!("relationship {:?}: unknown dataset {ds:?}", r.name));
                }
            }
        }
        Ok(())
    }
}
