use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use super::PartialInstance;
use crate::frontend::{class_builtin, ResolvedMetamodel};
use crate::kernel::{ConcreteInstance, Relation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompletionError {
    #[error("asserted fact `{0}` is missing from the solution")]
    BaseNotContained(String),
}

/// One tuple of a feature relation, by atom names.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkFact {
    pub source: String,
    pub feature: String,
    pub relation: Relation,
    pub target: String,
}

impl LinkFact {
    fn render(&self) -> String {
        let target = match self.target.strip_prefix('"').and_then(|s| s.strip_suffix('"')) {
            Some(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            None => self.target.clone(),
        };
        format!("{}.{} = {}", self.source, self.feature, target)
    }
}

/// A solution split into what was asserted and what was inferred.
#[derive(Clone, Debug)]
pub struct CompletionReport {
    pub base: PartialInstance,
    pub completed: ConcreteInstance,
    /// Every object of the solution with its exact class, in universe order.
    pub objects: Vec<(String, String)>,
    pub links: Vec<LinkFact>,
    /// Tuples of `model` features.
    pub model_facts: Vec<LinkFact>,
    pub inferred_objects: BTreeSet<String>,
    pub inferred_links: BTreeSet<LinkFact>,
    pub inferred_model_facts: BTreeSet<LinkFact>,
}

impl CompletionReport {
    pub fn objects_of(&self, class: &str) -> impl Iterator<Item = &str> + '_ {
        let class = class.to_string();
        self.objects
            .iter()
            .filter(move |(_, c)| *c == class)
            .map(|(o, _)| o.as_str())
    }
}

/// Splits `completed` into the facts of `base` and the inferred remainder.
pub fn diff_completion(
    mm: &ResolvedMetamodel,
    base: &PartialInstance,
    completed: &ConcreteInstance,
) -> Result<CompletionReport, CompletionError> {
    let u = completed.universe();
    let mut objects = Vec::new();
    if let Some(class) = completed.get(&class_builtin()) {
        for t in class.iter() {
            let atom = u.atom(t[1]);
            objects.push((u.atom(t[0]).to_string(), atom.trim_start_matches('@').to_string()));
        }
    }
    let mut keyed = Vec::new();
    for (fi, f) in mm.features.iter().enumerate() {
        let Some(ts) = completed.get(&f.relation) else {
            continue;
        };
        for t in ts.iter() {
            let fact = LinkFact {
                source: u.atom(t[0]).to_string(),
                feature: f.name.clone(),
                relation: f.relation.clone(),
                target: u.atom(t[1]).to_string(),
            };
            keyed.push(((t[0], fi, t[1]), f.model, fact));
        }
    }
    keyed.sort_by_key(|k| k.0);
    let (mut links, mut model_facts) = (Vec::new(), Vec::new());
    for (_, model, fact) in keyed {
        if model {
            model_facts.push(fact);
        } else {
            links.push(fact);
        }
    }
    for o in &base.objects {
        if !objects.iter().any(|(n, c)| *n == o.name && *c == o.class) {
            return Err(CompletionError::BaseNotContained(format!(
                "object {} : {}",
                o.name, o.class
            )));
        }
    }
    let mut asserted = BTreeSet::new();
    for l in &base.links {
        let fact = LinkFact {
            source: l.source.clone(),
            feature: l.feature.clone(),
            relation: l.relation.clone(),
            target: l.target.atom(),
        };
        if !links.contains(&fact) && !model_facts.contains(&fact) {
            return Err(CompletionError::BaseNotContained(l.to_string()));
        }
        asserted.insert(fact);
    }
    let inferred_objects = objects
        .iter()
        .filter(|(o, _)| base.object(o).is_none())
        .map(|(o, _)| o.clone())
        .collect();
    let inferred_links = links.iter().filter(|l| !asserted.contains(*l)).cloned().collect();
    let inferred_model_facts = model_facts.iter().filter(|l| !asserted.contains(*l)).cloned().collect();
    Ok(CompletionReport {
        base: base.clone(),
        completed: completed.clone(),
        objects,
        links,
        model_facts,
        inferred_objects,
        inferred_links,
        inferred_model_facts,
    })
}

/// Renders a report in the `.ais` format, marking inferred parts.
pub fn serialize_instance(report: &CompletionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "instance {} of {} {{", report.base.name, report.base.package);
    for (o, c) in &report.objects {
        let mark = if report.inferred_objects.contains(o) {
            "inferred "
        } else {
            ""
        };
        let _ = writeln!(out, "    {mark}object {o} : {c}");
    }
    for l in &report.links {
        let mark = if report.inferred_links.contains(l) {
            "inferred "
        } else {
            ""
        };
        let _ = writeln!(out, "    {mark}{}", l.render());
    }
    for l in report
        .model_facts
        .iter()
        .filter(|l| !report.inferred_model_facts.contains(*l))
    {
        let _ = writeln!(out, "    {}", l.render());
    }
    if !report.inferred_model_facts.is_empty() {
        out.push_str("    inferred model {\n");
        for l in &report.inferred_model_facts {
            let _ = writeln!(out, "        {}", l.render());
        }
        out.push_str("    }\n");
    }
    out.push_str("}\n");
    out
}
