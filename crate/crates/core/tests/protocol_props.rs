mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::net::Shutdown;
use std::os::unix::net::UnixStream;
use std::time::Duration;

use proofdoc::checker::Output;
use proofdoc::document::{Edit, NodeName, Perspective, SpanId, VersionId};
use proofdoc::execution::{Engine, ExecId, Status};
use proofdoc::markup::Element;
use proofdoc::message::{Message, Phase, Severity};
use proofdoc::protocol::{encode, serve_connection, yxml, Client, ClientMessage, Incoming, ServerMessage};
use proofdoc::text::TextRange;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const WAIT: Duration = Duration::from_secs(10);

fn node_name() -> impl Strategy<Value = NodeName> {
    prop_oneof![
        "[A-Z][a-z]{0,5}".prop_map(|s| NodeName::theory(&format!("{s}.thy")).unwrap()),
        "[a-z]{1,5}/[a-z]{1,5}".prop_map(|s| NodeName::auxiliary(&format!("{s}.ftl")).unwrap()),
    ]
}

/// Text without the two reserved payload bytes.
fn text() -> impl Strategy<Value = String> {
    "[^\u{5}\u{6}]{0,30}"
}

fn edit() -> impl Strategy<Value = Edit> {
    prop_oneof![
        (0usize..500, text()).prop_map(|(o, t)| Edit::insert(o, t)),
        (0usize..500, text()).prop_map(|(o, t)| Edit::remove(o, t)),
        text().prop_map(Edit::SetNode),
        (prop::collection::vec((0usize..5, 1usize..5), 0..4), any::<bool>()).prop_map(|(gaps, req)| {
            let mut at = 0;
            let ranges = gaps
                .into_iter()
                .map(|(gap, len)| {
                    let r = TextRange::new(at + gap, at + gap + len);
                    at = r.end + 1;
                    r
                })
                .collect();
            Edit::Perspective(Perspective::new(ranges, req))
        }),
    ]
}

fn client_message() -> impl Strategy<Value = ClientMessage> {
    prop_oneof![
        Just(ClientMessage::SessionStart),
        (prop::option::of(1u64..1000), prop::collection::vec((node_name(), edit()), 0..5))
            .prop_map(|(v, edits)| ClientMessage::NodeEdits { version: v.map(VersionId), edits }),
        (node_name(), text()).prop_map(|(node, content)| ClientMessage::BlobUpdate { node, content }),
        ("[a-z0-9]{1,6}", text()).prop_map(|(id, result)| ClientMessage::DialogResult { id, result }),
    ]
}

fn status() -> impl Strategy<Value = Status> {
    prop::sample::select(vec![Status::Unprocessed, Status::Running, Status::Finished, Status::Failed, Status::Cancelled])
}

fn output() -> impl Strategy<Value = Output> {
    let range = (0usize..100, 0usize..20).prop_map(|(s, l)| TextRange::new(s, s + l));
    prop_oneof![
        (range.clone(), prop::sample::select(vec![Severity::Status, Severity::Writeln, Severity::Warning, Severity::Error]), any::<bool>(), "[^\u{5}\u{6}]{1,30}")
            .prop_map(|(r, sev, syn, body)| Output::Message(Message::new(sev, if syn { Phase::Syntax } else { Phase::Semantics }, r, body))),
        (range, "[a-z_]{1,8}", prop::collection::vec(("[a-z]{1,4}", "[^\u{5}\u{6}=]{0,8}"), 0..3)).prop_map(|(r, name, props)| {
            let mut e = Element::new(name);
            for (k, v) in props {
                e.set(k, v);
            }
            Output::Markup(r, e)
        }),
    ]
}

fn server_message() -> impl Strategy<Value = ServerMessage> {
    prop_oneof![
        (0u32..5).prop_map(|protocol| ServerMessage::SessionReady { protocol }),
        (1u64..100, prop::collection::vec((node_name(), 1u64..100, 1u64..100), 0..5)).prop_map(|(v, execs)| ServerMessage::Assigned {
            version: VersionId(v),
            execs: execs.into_iter().map(|(n, s, e)| (n, SpanId(s), ExecId(e))).collect(),
        }),
        (1u64..100, node_name(), 1u64..100, output()).prop_map(|(e, node, v, output)| ServerMessage::Report {
            exec: ExecId(e),
            node,
            version: VersionId(v),
            output,
        }),
        (1u64..100, status()).prop_map(|(e, status)| ServerMessage::Status { exec: ExecId(e), status }),
        prop::collection::vec(1u64..100, 0..5).prop_map(|v| ServerMessage::RemovedVersions(v.into_iter().map(VersionId).collect())),
        text().prop_map(ServerMessage::Error),
    ]
}

fn tree() -> impl Strategy<Value = yxml::Tree> {
    let leaf = "[^\u{5}\u{6}]{1,8}".prop_map(yxml::Tree::text);
    leaf.prop_recursive(4, 30, 4, |inner| {
        ("[a-z]{1,5}", prop::collection::vec(("[a-z]{1,3}", "[^\u{5}\u{6}]{0,5}"), 0..3), prop::collection::vec(inner, 0..4)).prop_map(
            |(name, props, body)| {
                let mut e = Element::new(name);
                for (k, v) in props {
                    e.set(k, v);
                }
                yxml::Tree::elem(e, body)
            },
        )
    })
}

/// Adjacent text leaves merge on the wire; compare in that normal form.
fn normal(trees: Vec<yxml::Tree>) -> Vec<yxml::Tree> {
    let mut out: Vec<yxml::Tree> = Vec::new();
    for t in trees {
        match t {
            yxml::Tree::Text(s) => match out.last_mut() {
                Some(yxml::Tree::Text(prev)) => prev.push_str(&s),
                _ => out.push(yxml::Tree::Text(s)),
            },
            yxml::Tree::Elem(e, body) => out.push(yxml::Tree::Elem(e, normal(body))),
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn codec_matches_reference_under_chunking(seed in any::<u64>(), count in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msgs: Vec<Vec<Vec<u8>>> = (0..count).map(|_| common::random_message(&mut rng)).collect();
        let mut stream = Vec::new();
        for m in &msgs {
            let refs: Vec<&[u8]> = m.iter().map(Vec::as_slice).collect();
            let ours = encode(&refs);
            prop_assert_eq!(&ours, &common::reference_encode(m));
            stream.extend(ours);
        }
        let decoded = common::reference_decode(&stream);
        prop_assert_eq!(decoded.as_ref(), Some(&msgs));
        prop_assert_eq!(common::decode_chunked(&stream, &mut rng).unwrap(), msgs);
    }

    #[test]
    fn client_messages_survive_the_wire(m in client_message()) {
        let chunks = m.to_chunks().unwrap();
        prop_assert_eq!(chunks[0].as_slice(), m.name().as_bytes());
        prop_assert_eq!(ClientMessage::from_chunks(&chunks).unwrap(), m);
    }

    #[test]
    fn server_messages_survive_the_wire(m in server_message()) {
        let chunks = m.to_chunks().unwrap();
        prop_assert_eq!(chunks[0].as_slice(), m.name().as_bytes());
        prop_assert_eq!(ServerMessage::from_chunks(&chunks).unwrap(), m);
    }

    #[test]
    fn yxml_round_trip(ts in prop::collection::vec(tree(), 0..4)) {
        let s = yxml::to_string(&ts).unwrap();
        prop_assert_eq!(yxml::parse(&s).unwrap(), normal(ts));
    }
}

#[test]
fn reserved_bytes_are_refused_in_payload_text() {
    let m = ServerMessage::Report {
        exec: ExecId(1),
        node: NodeName::theory("A.thy").unwrap(),
        version: VersionId(1),
        output: Output::Message(Message::new(Severity::Error, Phase::Syntax, TextRange::new(0, 1), "a\u{5}b")),
    };
    assert!(m.to_chunks().is_err());
}

/// A server on one end of a socket pair, a client on the other.
fn with_session(test: impl FnOnce(&mut Client)) {
    let engine = common::engine(2);
    let (server_end, client_end) = UnixStream::pair().unwrap();
    let closer = client_end.try_clone().unwrap();
    std::thread::scope(|s| {
        let e: &Engine = &engine;
        let srv = s.spawn(move || serve_connection(e, server_end.try_clone().unwrap(), server_end));
        let mut client = Client::new(client_end.try_clone().unwrap(), client_end);
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| test(&mut client)));
        // the server only returns once it sees end of input
        closer.shutdown(Shutdown::Write).unwrap();
        let served = srv.join().unwrap();
        if let Err(p) = outcome {
            std::panic::resume_unwind(p);
        }
        served.unwrap();
    });
}

fn start(client: &mut Client) {
    client.send(&ClientMessage::SessionStart).unwrap();
    let got = client.until(WAIT, |m| matches!(m, ServerMessage::SessionReady { .. })).unwrap();
    assert_eq!(got.len(), 1);
}

#[test]
fn empty_edit_batch_is_answered_with_empty_assignment() {
    with_session(|c| {
        start(c);
        c.send(&ClientMessage::NodeEdits { version: None, edits: vec![] }).unwrap();
        let got = c.until(WAIT, |m| matches!(m, ServerMessage::Assigned { .. })).unwrap();
        assert!(matches!(got.last(), Some(ServerMessage::Assigned { execs, .. }) if execs.is_empty()));
    });
}

#[test]
fn two_command_document_finishes_both_units() {
    with_session(|c| {
        start(c);
        let a = NodeName::theory("A.thy").unwrap();
        let text = "theory A begin\nlemma 1 + 1 = 2\n";
        c.send(&ClientMessage::NodeEdits {
            version: Some(VersionId(7)),
            edits: vec![
                (a.clone(), Edit::insert(0, text)),
                (a.clone(), Edit::Perspective(Perspective::full(text.chars().count(), true))),
            ],
        })
        .unwrap();
        let mut execs = Vec::new();
        let mut finished = std::collections::BTreeSet::new();
        c.until(WAIT, |m| {
            match m {
                ServerMessage::Assigned { version, execs: e } => {
                    assert_eq!(*version, VersionId(7));
                    execs = e.iter().map(|x| x.2).collect();
                }
                ServerMessage::Status { exec, status: Status::Finished } => {
                    finished.insert(*exec);
                }
                _ => {}
            }
            execs.len() == 2 && execs.iter().all(|e| finished.contains(e))
        })
        .expect("both units finish");
        assert_eq!(execs.len(), 2);
    });
}

#[test]
fn unknown_message_gets_error_and_session_continues() {
    with_session(|c| {
        start(c);
        c.send_raw(&[b"nope".to_vec()]).unwrap();
        let got = c.until(WAIT, |m| matches!(m, ServerMessage::Error(_))).unwrap();
        assert!(matches!(got.last(), Some(ServerMessage::Error(t)) if t.contains("nope")));
        c.send(&ClientMessage::NodeEdits { version: None, edits: vec![] }).unwrap();
        assert!(c.until(WAIT, |m| matches!(m, ServerMessage::Assigned { .. })).is_some());
    });
}

/// Over the wire, each exec id's statuses follow the legal order and every
/// id of the final assignment ends terminal.
#[test]
fn statuses_are_ordered_and_live() {
    with_session(|c| {
        start(c);
        let a = NodeName::theory("A.thy").unwrap();
        let f = NodeName::auxiliary("p.ftl").unwrap();
        let mut edits = vec![
            (a.clone(), Edit::insert(0, "theory A begin\n")),
            (a.clone(), Edit::Perspective(Perspective::new(vec![], true))),
            (f.clone(), Edit::insert(0, "Axiom. 1 = 1.\n")),
            (f.clone(), Edit::Perspective(Perspective::new(vec![], true))),
        ];
        let mut len = "theory A begin\n".len();
        for i in 0..15 {
            c.send(&ClientMessage::NodeEdits { version: None, edits: std::mem::take(&mut edits) }).unwrap();
            let line = format!("lemma {i} = {i}\n");
            edits.push((a.clone(), Edit::insert(len, line.clone())));
            len += line.len();
        }
        let mut seen: BTreeMap<ExecId, Vec<Status>> = BTreeMap::new();
        let mut last: Vec<ExecId> = Vec::new();
        let mut assignments = 0;
        // one assignment answers each batch; the final one must settle
        let done = |seen: &BTreeMap<ExecId, Vec<Status>>, last: &[ExecId], assignments: usize| {
            assignments == 15 && last.iter().all(|e| seen.get(e).and_then(|s| s.last()).is_some_and(|s| s.is_terminal()))
        };
        while !done(&seen, &last, assignments) {
            match c.recv(WAIT).expect("liveness: terminal status for every assigned id") {
                Incoming::Message(ServerMessage::Assigned { execs, .. }) => {
                    assignments += 1;
                    last = execs.iter().map(|x| x.2).collect();
                }
                Incoming::Message(ServerMessage::Status { exec, status }) => seen.entry(exec).or_default().push(status),
                Incoming::Message(_) => {}
                Incoming::Invalid(e) => panic!("{e}"),
            }
        }
        for (id, s) in &seen {
            let legal = matches!(
                s.as_slice(),
                [Status::Running] | [Status::Running, Status::Finished | Status::Failed | Status::Cancelled] | [Status::Cancelled]
            );
            assert!(legal, "{id}: {s:?}");
        }
        assert_eq!(last.len(), 16);
    });
}

#[test]
fn garbage_header_is_fatal() {
    let engine = common::engine(1);
    let (server_end, mut client_end) = UnixStream::pair().unwrap();
    client_end.write_all(b"12;x\n").unwrap();
    client_end.shutdown(Shutdown::Write).unwrap();
    let r = serve_connection(&engine, server_end.try_clone().unwrap(), server_end);
    assert!(r.is_err());
}
