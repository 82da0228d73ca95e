use std::collections::BTreeMap;

use proofdoc::document::NodeName;
use proofdoc::sessions::{
    matches_pattern, merge_contexts, topological_order, DatabaseStore, ExportEntry, ExportError, ExportStore,
    MemoryStore,
};
use proofdoc::syntax::{CommandAttrs, KeywordTable};
use proptest::prelude::*;

const POOL: [&str; 8] = ["use", "load", "lift", "show", "have", "+", "==>", "note"];

fn table() -> impl Strategy<Value = KeywordTable> {
    (prop::collection::vec(prop::sample::select(&POOL[..]), 0..5), prop::collection::vec(prop::sample::select(&POOL[..]), 0..5))
        .prop_map(|(cmds, kws)| {
            let mut t = KeywordTable::new();
            for c in cmds {
                let attrs = if c.starts_with('l') { CommandAttrs::load(None) } else { CommandAttrs::default() };
                t.add_command(c, attrs);
            }
            for k in kws {
                t.add_keyword(k);
            }
            t
        })
}

/// Random graphs over `n` nodes; `back` adds edges from lower to higher
/// index, which may close cycles.
fn graph() -> impl Strategy<Value = BTreeMap<NodeName, Vec<NodeName>>> {
    (1usize..9)
        .prop_flat_map(|n| {
            (
                Just(n),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
                prop::collection::vec((0..n, 0..n), 0..(n * 2)),
                prop::collection::vec((0..n, 0..n), 0..2),
                prop::collection::vec(0..n + 3, 0..3),
            )
        })
        .prop_map(|(n, perm, fwd, back, missing)| {
            let name = |i: usize| NodeName::theory(&format!("T{}.thy", perm.get(i).copied().unwrap_or(i))).unwrap();
            let mut g: BTreeMap<NodeName, Vec<NodeName>> = (0..n).map(|i| (name(i), Vec::new())).collect();
            for (a, b) in fwd {
                if a > b {
                    g.get_mut(&name(a)).unwrap().push(name(b));
                }
            }
            for (a, b) in back {
                if a < b {
                    g.get_mut(&name(a)).unwrap().push(name(b));
                }
            }
            // imports of nodes outside the graph are ignored
            for m in missing {
                g.get_mut(&name(0)).unwrap().push(NodeName::theory(&format!("Ext{m}.thy")).unwrap());
            }
            g
        })
}

fn has_cycle(g: &BTreeMap<NodeName, Vec<NodeName>>) -> bool {
    // transitive closure over graph-internal edges
    let names: Vec<&NodeName> = g.keys().collect();
    let idx = |n: &NodeName| names.iter().position(|m| *m == n);
    let k = names.len();
    let mut reach = vec![vec![false; k]; k];
    for (i, n) in names.iter().enumerate() {
        for d in &g[*n] {
            if let Some(j) = idx(d) {
                reach[i][j] = true;
            }
        }
    }
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                if reach[i][m] && reach[m][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..k).any(|i| reach[i][i])
}

fn store_round_trip(store: &dyn ExportStore, payloads: &[(Vec<u8>, bool)]) -> Result<(), TestCaseError> {
    for (i, (p, compress)) in payloads.iter().enumerate() {
        let mut e = ExportEntry::new("S", "T", &format!("dir/e{i}"), p.clone());
        if *compress {
            e = e.compressed();
        }
        store.export_blob(&e).unwrap();
    }
    for (i, (p, compress)) in payloads.iter().enumerate() {
        let got = store.retrieve_export("S", "T", &format!("dir/e{i}")).unwrap();
        prop_assert_eq!(got.len(), 1);
        prop_assert_eq!(&got[0].payload, p);
        prop_assert_eq!(got[0].compressed, *compress);
    }
    prop_assert_eq!(store.retrieve_export("S", "T", "dir/*").unwrap().len(), payloads.len());
    prop_assert_eq!(store.retrieve_qualified("S", "**").unwrap().len(), payloads.len());
    prop_assert_eq!(store.retrieve_export("S", "T", "*").unwrap().len(), 0);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn merged_contexts_are_a_semilattice(a in table(), b in table(), c in table()) {
        let m = |ts: &[&KeywordTable]| merge_contexts(ts.iter().copied()).unwrap();
        prop_assert_eq!(m(&[&a, &b]), m(&[&b, &a]));
        prop_assert_eq!(m(&[&a, &a]), a.clone());
        prop_assert_eq!(m(&[&m(&[&a, &b]), &c]), m(&[&a, &m(&[&b, &c])]));
        prop_assert_eq!(m(&[&a, &b, &c]), m(&[&c, &b, &a]));
        prop_assert_eq!(m(&[]), KeywordTable::new());
    }

    #[test]
    fn topological_order_puts_imports_first(g in graph()) {
        match topological_order(&g) {
            Ok(order) => {
                prop_assert!(!has_cycle(&g));
                let mut sorted = order.clone();
                sorted.sort();
                prop_assert_eq!(sorted, g.keys().cloned().collect::<Vec<_>>());
                let pos = |n: &NodeName| order.iter().position(|m| m == n);
                for (n, deps) in &g {
                    for d in deps.iter().filter(|d| g.contains_key(*d)) {
                        prop_assert!(pos(d) < pos(n), "{} before {}", d, n);
                    }
                }
            }
            Err(_) => prop_assert!(has_cycle(&g)),
        }
    }

    #[test]
    fn exports_round_trip(payloads in prop::collection::vec((prop::collection::vec(any::<u8>(), 0..600), any::<bool>()), 1..6)) {
        store_round_trip(&MemoryStore::new(), &payloads)?;
        store_round_trip(&DatabaseStore::in_memory().unwrap(), &payloads)?;
    }

    /// `*` never crosses a `/`; `**` matches any run, separators included.
    #[test]
    fn wildcard_segments(segs in prop::collection::vec("[a-c]{1,3}", 1..4), tail in "[a-c]{1,3}") {
        let name = segs.join("/");
        let star_pattern = vec!["*"; segs.len()].join("/");
        prop_assert!(matches_pattern(&star_pattern, &name));
        prop_assert_eq!(matches_pattern("*", &name), segs.len() == 1);
        prop_assert!(matches_pattern("**", &name));
        let deeper = format!("{}/{}", name, tail);
        let (any_depth, one_level) = (format!("{}/**", segs[0]), format!("{}/*", segs[0]));
        prop_assert!(matches_pattern(&any_depth, &deeper));
        prop_assert_eq!(matches_pattern(&one_level, &deeper), segs.len() == 1);
    }
}

#[test]
fn empty_payloads_and_duplicates() {
    for store in [Box::new(MemoryStore::new()) as Box<dyn ExportStore>, Box::new(DatabaseStore::in_memory().unwrap())] {
        store.export_blob(&ExportEntry::new("S", "T", "empty", Vec::new())).unwrap();
        store.export_blob(&ExportEntry::new("S", "T", "emptyz", Vec::new()).compressed()).unwrap();
        let got = store.retrieve_export("S", "T", "empty*").unwrap();
        assert_eq!(got.len(), 2);
        assert!(got.iter().all(|e| e.payload.is_empty()));
        let again = store.export_blob(&ExportEntry::new("S", "T", "empty", b"x".to_vec()));
        assert!(matches!(again, Err(ExportError::Duplicate { .. })), "{again:?}");
        assert!(store.retrieve_export("S", "T", "empty").unwrap()[0].payload.is_empty());
    }
}

#[test]
fn database_file_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exports.db");
    let big = b"abc".repeat(4000);
    {
        let db = DatabaseStore::open(&path).unwrap();
        db.export_blob(&ExportEntry::new("S", "A", "doc/big", big.clone()).compressed()).unwrap();
    }
    let db = DatabaseStore::open(&path).unwrap();
    assert_eq!(db.list("S").unwrap(), ["A/doc/big"]);
    assert_eq!(db.retrieve_qualified("S", "A/**").unwrap()[0].payload, big);
}
