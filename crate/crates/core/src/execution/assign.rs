//! Exec-id assignment and the eligibility closure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::document::{Import, NodeName, SpanId, Version};
use crate::sessions::{cyclic_nodes, topological_order};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExecId(pub u64);

impl fmt::Display for ExecId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// How an import of a theory resolves in a version.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImportClass {
    Resolved(NodeName),
    Unresolved,
    Missing,
    Cyclic,
}

/// Imports of `node` classified against `version`. `cyclic` holds the nodes
/// on import cycles; importing one of them is never resolved.
pub fn classify_imports(
    version: &Version,
    node: &NodeName,
    cyclic: &BTreeSet<NodeName>,
) -> Vec<(Import, ImportClass)> {
    let Some(n) = version.node(node) else { return Vec::new() };
    n.imports()
        .iter()
        .map(|i| {
            let class = match &i.node {
                None => ImportClass::Unresolved,
                Some(m) if version.node(m).is_none() => ImportClass::Missing,
                Some(m) if cyclic.contains(m) => ImportClass::Cyclic,
                Some(m) => ImportClass::Resolved(m.clone()),
            };
            (i.clone(), class)
        })
        .collect()
}

/// What the first span of a node depends on from its imports.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Foundation {
    Class(ImportClass),
    Last(NodeName, Option<ExecId>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeAssignment {
    pub execs: Vec<(SpanId, ExecId)>,
    foundation: Vec<Foundation>,
}

/// Exec ids of all spans of one version.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    version: crate::document::VersionId,
    nodes: BTreeMap<NodeName, NodeAssignment>,
    /// Nodes so that every node follows its resolved imports.
    order: Vec<NodeName>,
    cyclic: BTreeSet<NodeName>,
}

impl Assignment {
    pub fn version(&self) -> crate::document::VersionId {
        self.version
    }

    pub fn node(&self, name: &NodeName) -> Option<&NodeAssignment> {
        self.nodes.get(name)
    }

    pub fn order(&self) -> &[NodeName] {
        &self.order
    }

    pub fn cyclic(&self) -> &BTreeSet<NodeName> {
        &self.cyclic
    }

    pub fn last(&self, name: &NodeName) -> Option<ExecId> {
        self.nodes.get(name)?.execs.last().map(|(_, e)| *e)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeName, SpanId, ExecId)> {
        self.nodes
            .iter()
            .flat_map(|(n, a)| a.execs.iter().map(move |(s, e)| (n, *s, *e)))
    }

    pub fn exec_ids(&self) -> BTreeSet<ExecId> {
        self.iter().map(|(_, _, e)| e).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.values().map(|a| a.execs.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Assign exec ids to `version`. Within a node the longest prefix of spans
/// whose ids match `prev` position by position keeps its exec ids; every
/// later span gets a fresh one. A node whose imports now resolve
/// differently, or whose imports' final exec ids changed, is assigned
/// afresh entirely.
pub fn assign(version: &Version, prev: &Assignment, fresh: &mut dyn FnMut() -> ExecId) -> Assignment {
    let graph = version.import_graph();
    let cyclic = cyclic_nodes(&graph);
    let acyclic: BTreeMap<NodeName, Vec<NodeName>> = graph
        .iter()
        .map(|(n, deps)| (n.clone(), deps.iter().filter(|d| !cyclic.contains(*d)).cloned().collect()))
        .collect();
    let mut order = topological_order(&acyclic).expect("edges into cycles removed");
    order.extend(version.node_names().filter(|n| !n.is_theory()).cloned());
    order.sort_by_key(|n| n.is_theory());

    let mut nodes: BTreeMap<NodeName, NodeAssignment> = BTreeMap::new();
    for name in &order {
        let node = &version.node(name).expect("ordered nodes exist");
        let foundation: Vec<Foundation> = classify_imports(version, name, &cyclic)
            .into_iter()
            .map(|(_, c)| match c {
                ImportClass::Resolved(m) => {
                    let last = nodes.get(&m).and_then(|a| a.execs.last()).map(|(_, e)| *e);
                    Foundation::Last(m, last)
                }
                other => Foundation::Class(other),
            })
            .collect();
        let old = prev.nodes.get(name).filter(|o| o.foundation == foundation);
        let old_execs: &[(SpanId, ExecId)] = old.map_or(&[], |o| &o.execs);
        let mut reusing = true;
        let execs = node
            .spans()
            .iter()
            .enumerate()
            .map(|(i, s)| {
                reusing &= old_execs.get(i).is_some_and(|(id, _)| *id == s.id);
                (s.id, if reusing { old_execs[i].1 } else { fresh() })
            })
            .collect();
        nodes.insert(name.clone(), NodeAssignment { execs, foundation });
    }
    Assignment {
        version: version.id(),
        nodes,
        order,
        cyclic,
    }
}

/// Scheduling priority; visible work outranks merely required work.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Priority {
    Required,
    Visible,
}

/// Spans that should be checked: those intersecting the perspective and
/// their in-node predecessors, all spans of required nodes, and all spans
/// of every node transitively imported by a node with eligible spans.
pub fn eligible(version: &Version, assignment: &Assignment) -> BTreeMap<ExecId, Priority> {
    let mut out: BTreeMap<ExecId, Priority> = BTreeMap::new();
    let mut active: Vec<NodeName> = Vec::new();
    for (name, a) in &assignment.nodes {
        let node = version.node(name).expect("assigned nodes exist");
        let p = node.perspective();
        let upto = node.spans().iter().rposition(|s| p.is_visible(&s.range));
        for (i, (_, e)) in a.execs.iter().enumerate() {
            if upto.is_some_and(|u| i <= u) {
                out.insert(*e, Priority::Visible);
            } else if p.required {
                out.insert(*e, Priority::Required);
            }
        }
        if (upto.is_some() || p.required) && !a.execs.is_empty() {
            active.push(name.clone());
        }
    }
    let mut seen: BTreeSet<NodeName> = active.iter().cloned().collect();
    while let Some(n) = active.pop() {
        for (_, c) in classify_imports(version, &n, &assignment.cyclic) {
            let ImportClass::Resolved(m) = c else { continue };
            if let Some(a) = assignment.nodes.get(&m) {
                for (_, e) in &a.execs {
                    out.entry(*e).or_insert(Priority::Required);
                }
            }
            if seen.insert(m.clone()) {
                active.push(m);
            }
        }
    }
    out
}
