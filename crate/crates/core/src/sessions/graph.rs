use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::document::NodeName;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("import cycle: {}", .members.iter().map(|n| n.path()).collect::<Vec<_>>().join(" -> "))]
pub struct CycleError {
    /// The nodes of one cycle, in import order.
    pub members: Vec<NodeName>,
}

/// Order nodes so each follows all of its imports. Ties are broken by name.
/// Imports of nodes outside `graph` are ignored.
pub fn topological_order(
    graph: &BTreeMap<NodeName, Vec<NodeName>>,
) -> Result<Vec<NodeName>, CycleError> {
    let mut pending: BTreeMap<&NodeName, usize> = BTreeMap::new();
    let mut importers: BTreeMap<&NodeName, Vec<&NodeName>> = BTreeMap::new();
    for (node, imports) in graph {
        let deps: BTreeSet<&NodeName> = imports.iter().filter(|i| graph.contains_key(*i)).collect();
        pending.insert(node, deps.len());
        for d in deps {
            importers.entry(d).or_default().push(node);
        }
    }
    let mut ready: BTreeSet<&NodeName> = pending
        .iter()
        .filter(|(_, n)| **n == 0)
        .map(|(k, _)| *k)
        .collect();
    let mut order = Vec::with_capacity(graph.len());
    while let Some(node) = ready.pop_first() {
        order.push(node.clone());
        for imp in importers.get(node).into_iter().flatten() {
            let n = pending.get_mut(imp).expect("known node");
            *n -= 1;
            if *n == 0 {
                ready.insert(imp);
            }
        }
    }
    if order.len() == graph.len() {
        return Ok(order);
    }
    let placed: BTreeSet<&NodeName> = order.iter().collect();
    let start = graph
        .keys()
        .find(|n| !placed.contains(n))
        .expect("unplaced node");
    Err(CycleError {
        members: find_cycle(graph, start, &placed),
    })
}

/// Walk unplaced imports from `start` until a node repeats; every unplaced
/// node has at least one unplaced import, so the walk must revisit.
fn find_cycle(
    graph: &BTreeMap<NodeName, Vec<NodeName>>,
    start: &NodeName,
    placed: &BTreeSet<&NodeName>,
) -> Vec<NodeName> {
    let mut path: Vec<&NodeName> = vec![start];
    let mut seen: BTreeMap<&NodeName, usize> = BTreeMap::from([(start, 0)]);
    let mut current = start;
    loop {
        let next = graph[current]
            .iter()
            .filter(|i| graph.contains_key(*i) && !placed.contains(i))
            .min()
            .expect("unplaced node has an unplaced import");
        if let Some(&at) = seen.get(next) {
            return path[at..].iter().map(|n| (*n).clone()).collect();
        }
        seen.insert(next, path.len());
        path.push(next);
        current = next;
    }
}

/// Nodes lying on some import cycle (members of non-trivial strongly
/// connected components, or self-importing nodes).
pub fn cyclic_nodes(graph: &BTreeMap<NodeName, Vec<NodeName>>) -> BTreeSet<NodeName> {
    let reach = |from: &NodeName| -> BTreeSet<NodeName> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&NodeName> = graph
            .get(from)
            .into_iter()
            .flatten()
            .filter(|n| graph.contains_key(*n))
            .collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n.clone()) {
                stack.extend(graph[n].iter().filter(|m| graph.contains_key(*m)));
            }
        }
        seen
    };
    graph
        .keys()
        .filter(|n| reach(n).contains(*n))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> NodeName {
        NodeName::theory(s).unwrap()
    }

    fn graph(edges: &[(&str, &[&str])]) -> BTreeMap<NodeName, Vec<NodeName>> {
        edges
            .iter()
            .map(|(a, bs)| (n(a), bs.iter().map(|b| n(b)).collect()))
            .collect()
    }

    #[test]
    fn single_node() {
        assert_eq!(topological_order(&graph(&[("A", &[])])).unwrap(), vec![n("A")]);
    }

    #[test]
    fn chain() {
        let g = graph(&[("A", &["B"]), ("B", &["C"]), ("C", &[])]);
        assert_eq!(topological_order(&g).unwrap(), vec![n("C"), n("B"), n("A")]);
    }

    #[test]
    fn two_cycle() {
        let g = graph(&[("A", &["B"]), ("B", &["A"])]);
        let err = topological_order(&g).unwrap_err();
        let members: BTreeSet<NodeName> = err.members.into_iter().collect();
        assert_eq!(members, BTreeSet::from([n("A"), n("B")]));
        assert_eq!(cyclic_nodes(&g), BTreeSet::from([n("A"), n("B")]));
    }

    #[test]
    fn cycle_behind_acyclic_importer() {
        let g = graph(&[("A", &["B"]), ("B", &["C"]), ("C", &["B"]), ("D", &[])]);
        let err = topological_order(&g).unwrap_err();
        let members: BTreeSet<NodeName> = err.members.into_iter().collect();
        assert_eq!(members, BTreeSet::from([n("B"), n("C")]));
        assert_eq!(cyclic_nodes(&g), BTreeSet::from([n("B"), n("C")]));
    }

    #[test]
    fn external_imports_ignored() {
        let g = graph(&[("A", &["Main"])]);
        assert_eq!(topological_order(&g).unwrap(), vec![n("A")]);
    }
}
