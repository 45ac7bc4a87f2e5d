//! Wire documents: VOSI availability, capabilities and tables (XML) and the
//! canonical JSON serialization of the SimDM instance graph.

mod simdm_json;
mod xml;

pub use simdm_json::{
    parse_simdm, render_simdm, DataObjectNode, DatasetNode, ExperimentNode, GraphDocument,
    ObjectTypeNode, PropertyNode, ProtocolNode, RelationshipNode, SimdmJsonError, ValueNode,
};
pub use xml::{
    escape_xml, render_availability, render_capabilities, render_tables, AvailabilityState,
    ConfigError, ServiceConfig, UnknownCapabilityId, CAPABILITIES_ID, DATA_ACCESS_ID,
    AVAILABILITY_ID, TABLES_ID,
};
pub(crate) use simdm_json::to_canonical_json;
