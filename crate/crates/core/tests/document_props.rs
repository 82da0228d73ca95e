use proofdoc::document::{diff, transpose, Change, DocumentConfig, DocumentState, Edit, NodeName, SpanId};
use proptest::prelude::*;

fn thy() -> NodeName {
    NodeName::theory("A.thy").unwrap()
}

fn lemmas() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec((0u32..50, 0u32..50).prop_map(|(a, b)| format!("lemma {a} = {b}\n")), 1..12)
}

fn document(ls: &[String]) -> String {
    format!("theory A begin\n{}", ls.concat())
}

fn spans(st: &DocumentState) -> Vec<(SpanId, String)> {
    st.latest()
        .node(&thy())
        .unwrap()
        .spans()
        .iter()
        .map(|s| (s.id, s.source.to_string()))
        .collect()
}

fn char_slice(s: &str, from: usize, len: usize) -> String {
    s.chars().skip(from).take(len).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn insert_then_remove_restores_text(ls in lemmas(), at in any::<prop::sample::Index>(), ins in "[a-z0-9 =\n]{1,8}") {
        let mut st = DocumentState::new(DocumentConfig::default());
        let text = document(&ls);
        st.apply_edits(&[(thy(), Edit::insert(0, text.clone()))]).unwrap();
        let o = at.index(text.chars().count() + 1);
        st.apply_edits(&[(thy(), Edit::insert(o, ins.clone()))]).unwrap();
        let v = st.apply_edits(&[(thy(), Edit::remove(o, ins))]).unwrap();
        prop_assert_eq!(v.node(&thy()).unwrap().text(), text.as_str());
    }

    #[test]
    fn remove_then_insert_restores_text(ls in lemmas(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let mut st = DocumentState::new(DocumentConfig::default());
        let text = document(&ls);
        let n = text.chars().count();
        st.apply_edits(&[(thy(), Edit::insert(0, text.clone()))]).unwrap();
        let o = a.index(n + 1);
        let len = b.index(n - o + 1);
        let cut = char_slice(&text, o, len);
        st.apply_edits(&[(thy(), Edit::remove(o, cut.clone()))]).unwrap();
        let v = st.apply_edits(&[(thy(), Edit::insert(o, cut))]).unwrap();
        prop_assert_eq!(v.node(&thy()).unwrap().text(), text.as_str());
    }

    #[test]
    fn mismatched_remove_is_rejected(ls in lemmas()) {
        let mut st = DocumentState::new(DocumentConfig::default());
        let text = document(&ls);
        st.apply_edits(&[(thy(), Edit::insert(0, text))]).unwrap();
        prop_assert!(st.apply_edits(&[(thy(), Edit::remove(0, "lemma"))]).is_err());
    }

    /// Span ids persist exactly on the common prefix and suffix of the span
    /// source lists; everything between is fresh.
    #[test]
    fn span_ids_follow_prefix_and_suffix(ls in lemmas(), k in any::<prop::sample::Index>(), d in 0u32..10) {
        let mut st = DocumentState::new(DocumentConfig::default());
        let text = document(&ls);
        st.apply_edits(&[(thy(), Edit::insert(0, text))]).unwrap();
        let before = spans(&st);
        // edit inside one lemma: prepend a digit to its first numeral
        let target = 1 + k.index(ls.len());
        let offset: usize = before[..target].iter().map(|(_, s)| s.chars().count()).sum::<usize>() + "lemma ".len();
        st.apply_edits(&[(thy(), Edit::insert(offset, d.to_string()))]).unwrap();
        let after = spans(&st);

        let prefix = before.iter().zip(&after).take_while(|(a, b)| a.1 == b.1).count();
        let max_suffix = before.len().min(after.len()) - prefix;
        let suffix = before.iter().rev().zip(after.iter().rev()).take(max_suffix).take_while(|(a, b)| a.1 == b.1).count();
        prop_assert_eq!(before.len(), after.len());
        prop_assert_eq!(prefix, target);
        prop_assert_eq!(suffix, after.len() - target - 1);
        let old_ids: Vec<SpanId> = before.iter().map(|p| p.0).collect();
        for (i, (id, _)) in after.iter().enumerate() {
            if i < prefix || i >= after.len() - suffix {
                prop_assert_eq!(*id, before[i].0);
            } else {
                prop_assert!(!old_ids.contains(id));
            }
        }
    }

    #[test]
    fn transposition_is_monotone(changes in changes(), o1 in 0usize..120, o2 in 0usize..120) {
        let (lo, hi) = (o1.min(o2), o1.max(o2));
        if let (Some(a), Some(b)) = (transpose(&changes, lo), transpose(&changes, hi)) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn version_ids_strictly_increase(edits in prop::collection::vec(("[a-z ]{1,4}", any::<prop::sample::Index>()), 1..30)) {
        let mut st = DocumentState::new(DocumentConfig::default());
        let mut last = st.latest().id();
        let mut len = 0usize;
        for (t, at) in edits {
            let v = st.apply_edits(&[(thy(), Edit::insert(at.index(len + 1), t.clone()))]).unwrap();
            prop_assert!(v.id() > last);
            last = v.id();
            len += t.chars().count();
        }
    }

    /// Offsets outside the edited region map to the same character.
    #[test]
    fn diff_changes_preserve_characters(old in "[ab]{0,20}", new in "[ab]{0,20}") {
        let ch = diff(&old, &new);
        let (a, b): (Vec<char>, Vec<char>) = (old.chars().collect(), new.chars().collect());
        for (o, c) in a.iter().enumerate() {
            if let Some(m) = transpose(&ch, o) {
                if transpose(&ch, o + 1) == Some(m + 1) {
                    prop_assert_eq!(b[m], *c);
                }
            }
        }
    }
}

fn changes() -> impl Strategy<Value = Vec<Change>> {
    prop::collection::vec(
        (any::<bool>(), 0usize..100, 1usize..10).prop_map(|(ins, offset, len)| {
            if ins {
                Change::Insert { offset, len }
            } else {
                Change::Remove { offset, len }
            }
        }),
        0..8,
    )
}

#[test]
fn stale_version_id_is_rejected_and_resend_is_idempotent() {
    let mut st = DocumentState::new(DocumentConfig::default());
    let batch = [(thy(), Edit::insert(0, "theory A begin\n"))];
    let v = st.apply_edits_as(proofdoc::document::VersionId(5), &batch).unwrap();
    let again = st.apply_edits_as(proofdoc::document::VersionId(5), &batch).unwrap();
    assert_eq!(v.id(), again.id());
    assert_eq!(st.version_ids().count(), 2);
    assert!(st.apply_edits_as(proofdoc::document::VersionId(4), &batch).is_err());
}
