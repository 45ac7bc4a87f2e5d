use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{DataObject, InstanceGraph, ObjectType};
use crate::scalar::{is_identifier, is_reserved_word, Scalar};

/// One broken invariant: the offending node and the rule it violates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Violation {
    pub node_id: String,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.node_id, self.rule)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Violations sorted, for order-insensitive comparison.
    pub fn sorted(&self) -> Vec<Violation> {
        let mut v = self.violations.clone();
        v.sort();
        v
    }

    fn push(&mut self, node_id: &str, rule: &'static str) {
        self.violations.push(Violation {
            node_id: node_id.to_owned(),
            rule,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every referential, typing and containment rule of the graph.
///
/// Each duplicated id is reported once regardless of how often it repeats or
/// where it sits, so the multiset of violations does not depend on the order
/// of the graph's lists.
pub fn validate_graph(graph: &InstanceGraph) -> ValidationReport {
    let mut report = ValidationReport::default();

    let protocol_ids = id_set(graph.protocols.iter().map(|p| p.id.as_str()));
    let type_ids = id_set(graph.object_types.iter().map(|t| t.id.as_str()));
    let dataset_ids = id_set(graph.datasets.iter().map(|d| d.id.as_str()));

    report_duplicates(&mut report, graph.protocols.iter().map(|p| p.id.as_str()), "duplicate-protocol-id");
    report_duplicates(&mut report, graph.object_types.iter().map(|t| t.id.as_str()), "duplicate-object-type-id");
    report_duplicates(&mut report, graph.datasets.iter().map(|d| d.id.as_str()), "duplicate-dataset-id");
    report_duplicates(&mut report, graph.objects.iter().map(|o| o.id.as_str()), "duplicate-object-id");
    report_duplicates(
        &mut report,
        graph.relationships.iter().map(|r| r.name.as_str()),
        "duplicate-relationship-name",
    );

    let exp = &graph.experiment;
    if exp.id.is_empty() {
        report.push(&exp.id, "empty-id");
    }
    if !protocol_ids.contains(exp.protocol_id.as_str()) {
        report.push(&exp.id, "unknown-protocol-ref");
    }
    report_duplicates(&mut report, exp.dataset_ids.iter().map(String::as_str), "duplicate-dataset-ref");
    for ds in &exp.dataset_ids {
        if !dataset_ids.contains(ds.as_str()) {
            report.push(&exp.id, "unknown-dataset-ref");
        }
    }

    for p in &graph.protocols {
        if p.id.is_empty() {
            report.push(&p.id, "empty-id");
        }
    }

    for t in &graph.object_types {
        check_object_type(&mut report, t);
    }

    for d in &graph.datasets {
        if d.id.is_empty() {
            report.push(&d.id, "empty-id");
        }
        if !type_ids.contains(d.object_type_id.as_str()) {
            report.push(&d.id, "unknown-object-type-ref");
        }
    }

    for o in &graph.objects {
        check_object(&mut report, graph, o);
    }

    for r in &graph.relationships {
        if r.name.is_empty() {
            report.push(&r.name, "empty-id");
        }
        if !dataset_ids.contains(r.source_dataset_id.as_str()) {
            report.push(&r.name, "unknown-source-dataset");
        }
        if !dataset_ids.contains(r.target_dataset_id.as_str()) {
            report.push(&r.name, "unknown-target-dataset");
        }
    }

    report
}

fn id_set<'a>(ids: impl Iterator<Item = &'a str>) -> HashSet<&'a str> {
    ids.collect()
}

fn report_duplicates<'a>(
    report: &mut ValidationReport,
    ids: impl Iterator<Item = &'a str>,
    rule: &'static str,
) {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for id in ids {
        *counts.entry(id).or_default() += 1;
    }
    for (id, n) in counts {
        if n > 1 {
            report.push(id, rule);
        }
    }
}

fn check_object_type(report: &mut ValidationReport, t: &ObjectType) {
    if t.id.is_empty() {
        report.push(&t.id, "empty-id");
    }
    if t.label.is_empty() {
        report.push(&t.id, "empty-label");
    } else if t.label_fragment() == Some("") {
        report.push(&t.id, "empty-label-fragment");
    }
    if t.properties.is_empty() {
        report.push(&t.id, "no-properties");
    }
    report_duplicates(report, t.properties.iter().map(|p| p.name.as_str()), "duplicate-property");
    for p in &t.properties {
        if !is_identifier(&p.name) || is_reserved_word(&p.name) {
            report.push(&t.id, "invalid-property-name");
        }
    }
}

fn check_object(report: &mut ValidationReport, graph: &InstanceGraph, o: &DataObject) {
    if o.id.is_empty() {
        report.push(&o.id, "empty-id");
    }
    let Some(dataset) = graph.dataset(&o.dataset_id) else {
        report.push(&o.id, "unknown-dataset-ref");
        return;
    };
    let Some(ty) = graph.object_type(&dataset.object_type_id) else {
        // already reported on the dataset
        return;
    };

    let mut seen: HashMap<&str, usize> = HashMap::new();
    for v in &o.values {
        *seen.entry(v.property_name.as_str()).or_default() += 1;
        match ty.property(&v.property_name) {
            None => report.push(&o.id, "value-without-property-def"),
            Some(def) if def.datatype != v.value.datatype() => {
                report.push(&o.id, "value-type-mismatch")
            }
            Some(_) => {}
        }
        if let Scalar::Real(x) = v.value {
            if !x.is_finite() {
                report.push(&o.id, "non-finite-value");
            }
        }
    }
    for _ in seen.values().filter(|n| **n > 1) {
        report.push(&o.id, "duplicate-property-value");
    }
    // property names are counted once even when the type repeats them
    let declared: HashSet<&str> = ty.properties.iter().map(|p| p.name.as_str()).collect();
    for name in declared {
        if !seen.contains_key(name) {
            report.push(&o.id, "missing-property-value");
        }
    }
}
