use std::fmt::Write as _;

use chrono::{DateTime, SubsecRound, Utc};
use thiserror::Error;

use crate::simdm::InstanceGraph;

pub const AVAILABILITY_ID: &str = "ivo://ivoa.net/std/VOSI#availability";
pub const CAPABILITIES_ID: &str = "ivo://ivoa.net/std/VOSI#capabilities";
pub const TABLES_ID: &str = "ivo://ivoa.net/std/VOSI#tables";
pub const DATA_ACCESS_ID: &str = "ivo://ivoa.net/std/SimDAL#data-access-1.0";

const AVAILABILITY_NS: &str = "http://www.ivoa.net/xml/VOSIAvailability/v1.0";
const CAPABILITIES_NS: &str = "http://www.ivoa.net/xml/VOSICapabilities/v1.0";
const TABLES_NS: &str = "http://www.ivoa.net/xml/VODataService/v1.1";
const XML_DECL: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

/// Path served for each known capability, relative to the base URL.
fn capability_path(id: &str) -> Option<&'static str> {
    match id {
        AVAILABILITY_ID => Some("/availability"),
        CAPABILITIES_ID => Some("/capabilities"),
        TABLES_ID => Some("/tables"),
        DATA_ACCESS_ID => Some("/datasets"),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvailabilityState {
    pub available: bool,
    pub up_since: DateTime<Utc>,
    pub note: String,
}

impl AvailabilityState {
    /// Truncates `up_since` to whole seconds.
    pub fn new(available: bool, up_since: DateTime<Utc>, note: impl Into<String>) -> Self {
        Self {
            available,
            up_since: up_since.trunc_subsecs(0),
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub base_url: String,
    pub service_name: String,
    pub capability_ids: Vec<String>,
    pub contact: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("base URL must not end with '/'")]
    TrailingSlash,
    #[error("at least one capability id is required")]
    NoCapabilities,
    #[error("capability id {0:?} listed twice")]
    DuplicateCapability(String),
}

impl ServiceConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            service_name: "SimDAL data access".to_owned(),
            capability_ids: [AVAILABILITY_ID, CAPABILITIES_ID, TABLES_ID, DATA_ACCESS_ID]
                .map(str::to_owned)
                .to_vec(),
            contact: String::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.base_url.ends_with('/') {
            return Err(ConfigError::TrailingSlash);
        }
        if self.capability_ids.is_empty() {
            return Err(ConfigError::NoCapabilities);
        }
        for (i, id) in self.capability_ids.iter().enumerate() {
            if self.capability_ids[..i].contains(id) {
                return Err(ConfigError::DuplicateCapability(id.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown capability id {0:?}")]
pub struct UnknownCapabilityId(pub String);

pub fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn render_availability(state: &AvailabilityState) -> Vec<u8> {
    let mut out = String::from(XML_DECL);
    let _ = writeln!(out, "<availability xmlns=\"{AVAILABILITY_NS}\">");
    let _ = writeln!(out, "  <available>{}</available>", state.available);
    let _ = writeln!(
        out,
        "  <upSince>{}</upSince>",
        state.up_since.format("%Y-%m-%dT%H:%M:%SZ")
    );
    if !state.note.is_empty() {
        let _ = writeln!(out, "  <note>{}</note>", escape_xml(&state.note));
    }
    out.push_str("</availability>\n");
    out.into_bytes()
}

pub fn render_capabilities(config: &ServiceConfig) -> Result<Vec<u8>, UnknownCapabilityId> {
    let mut out = String::from(XML_DECL);
    let _ = writeln!(out, "<capabilities xmlns=\"{CAPABILITIES_NS}\">");
    for id in &config.capability_ids {
        let path = capability_path(id).ok_or_else(|| UnknownCapabilityId(id.clone()))?;
        let _ = writeln!(out, "  <capability standardID=\"{}\">", escape_xml(id));
        out.push_str("    <interface>\n");
        let _ = writeln!(
            out,
            "      <accessURL use=\"full\">{}{}</accessURL>",
            escape_xml(&config.base_url),
            path
        );
        out.push_str("    </interface>\n");
        out.push_str("  </capability>\n");
    }
    out.push_str("</capabilities>\n");
    Ok(out.into_bytes())
}

/// Tables document: one `table` per dataset, one `column` per property, in
/// graph order. The graph must already be valid.
pub fn render_tables(graph: &InstanceGraph) -> Vec<u8> {
    let mut out = String::from(XML_DECL);
    let _ = writeln!(out, "<tableset xmlns=\"{TABLES_NS}\">");
    out.push_str("  <schema>\n");
    let _ = writeln!(out, "    <name>{}</name>", escape_xml(&graph.experiment.id));
    for ds in &graph.datasets {
        out.push_str("    <table>\n");
        let _ = writeln!(out, "      <name>{}</name>", escape_xml(&ds.id));
        let _ = writeln!(out, "      <title>{}</title>", escape_xml(&ds.name));
        let properties = graph
            .object_type(&ds.object_type_id)
            .map(|t| t.properties.as_slice())
            .unwrap_or_default();
        for p in properties {
            out.push_str("      <column>\n");
            let _ = writeln!(out, "        <name>{}</name>", escape_xml(&p.name));
            let _ = writeln!(out, "        <datatype>{}</datatype>", p.datatype.vo_name());
            let _ = writeln!(out, "        <unit>{}</unit>", escape_xml(&p.unit));
            let _ = writeln!(
                out,
                "        <description>{}</description>",
                escape_xml(&p.description)
            );
            out.push_str("      </column>\n");
        }
        out.push_str("    </table>\n");
    }
    out.push_str("  </schema>\n");
    out.push_str("</tableset>\n");
    out.into_bytes()
}
