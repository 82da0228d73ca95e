//! Randomized incremental-checking trials shared by the property suite and
//! the acceptance gate.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::time::Duration;

use proofdoc::document::{Edit, NodeName, Perspective};
use proofdoc::execution::{Engine, EngineConfig, Status};
use proofdoc::pretty::Doc;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SNIPPETS: [&str; 14] = [
    "definition x = 2\n",
    "definition y = x * 3\n",
    "lemma x + 1 = 3\n",
    "lemma 2 * 3 = 7\n",
    "lemma y = 6\n",
    "lemma z = 1\n",
    "text \\<open>note\\<close>\n",
    "export_text \\<open>out\\<close>\n",
    "lemma (1 + 2 = 3\n",
    "1",
    " ",
    "\n",
    "=",
    "definition",
];

const FTL: [&str; 5] = [
    "Proposition. 1 + 1 = 2.\n\n",
    "Proposition. 2 * 2 = 5.\n\n",
    "Definition. n = 4.\n\n",
    "Axiom. 3 = 3.\n\n",
    "Proposition. = .\n\n",
];

/// Per-span outcome: source, status, and sorted messages and markup.
pub type Outcome = Vec<(String, String, Status, Vec<String>, Vec<String>)>;

pub fn engine(workers: usize) -> Engine {
    Engine::new(EngineConfig {
        workers,
        ..EngineConfig::default()
    })
}

/// Everything the engine currently reports, span by span.
pub fn outcome(e: &Engine) -> Outcome {
    e.results()
        .into_iter()
        .map(|(node, span, status, r)| {
            let (mut msgs, mut markup) = (Vec::new(), Vec::new());
            if let Some(r) = r {
                msgs = r.report.messages.iter().map(|m| format!("{:?}", m)).collect();
                markup = r.report.markup.iter().map(|(r, e)| format!("{r} {e:?}")).collect();
            }
            msgs.sort();
            markup.sort();
            (node.to_string(), span.source.to_string(), status, msgs, markup)
        })
        .collect()
}

pub struct Trial {
    pub batches: usize,
    pub spans: usize,
}

fn count_spans(e: &Engine) -> usize {
    e.latest().nodes().map(|n| n.spans().len()).sum()
}

/// One trial: random documents edited in random batches, some applied
/// while earlier checks are still running; the final state must equal a
/// fresh engine given only the final texts.
pub fn trial(seed: u64, max_spans: usize, max_batches: usize) -> Result<Trial, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = NodeName::theory("A.thy").unwrap();
    let b = NodeName::theory("B.thy").unwrap();
    let f = NodeName::auxiliary("C.ftl").unwrap();
    let mut texts: BTreeMap<NodeName, String> = BTreeMap::new();
    texts.insert(b.clone(), "theory B begin\ndefinition x = 2\n".to_owned());
    texts.insert(a.clone(), "theory A imports B begin\nlemma x = 2\n".to_owned());
    texts.insert(f.clone(), FTL[0].to_owned());

    let inc = engine(2);
    let mut first: Vec<(NodeName, Edit)> = Vec::new();
    for (n, t) in &texts {
        first.push((n.clone(), Edit::insert(0, t.clone())));
        first.push((n.clone(), Edit::Perspective(Perspective::new(Vec::new(), true))));
    }
    inc.apply_edits(&first).map_err(|e| e.to_string())?;

    let batches = rng.gen_range(1..=max_batches);
    for _ in 0..batches {
        let mut batch = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let node = [&a, &b, &f][rng.gen_range(0..3)].clone();
            let text = texts.get_mut(&node).unwrap();
            let len = text.chars().count();
            let grow = count_spans(&inc) < max_spans;
            if (grow && rng.gen_bool(0.6)) || len == 0 {
                let piece = if node.is_theory() {
                    SNIPPETS[rng.gen_range(0..SNIPPETS.len())]
                } else {
                    FTL[rng.gen_range(0..FTL.len())]
                };
                let at = rng.gen_range(0..=len);
                let mut chars: Vec<char> = text.chars().collect();
                chars.splice(at..at, piece.chars());
                *text = chars.into_iter().collect();
                batch.push((node, Edit::insert(at, piece)));
            } else {
                let at = rng.gen_range(0..len);
                let n = rng.gen_range(1..=(len - at).min(12));
                let mut chars: Vec<char> = text.chars().collect();
                let removed: String = chars.drain(at..at + n).collect();
                *text = chars.into_iter().collect();
                batch.push((node, Edit::remove(at, removed)));
            }
        }
        inc.apply_edits(&batch).map_err(|e| e.to_string())?;
        match rng.gen_range(0..4) {
            0 => {
                inc.await_quiescence(Duration::from_secs(10));
            }
            1 => std::thread::sleep(Duration::from_micros(rng.gen_range(0..2000))),
            _ => {}
        }
    }
    if !inc.await_quiescence(Duration::from_secs(20)) {
        return Err(format!("seed {seed}: incremental engine never went quiet"));
    }
    let spans = count_spans(&inc);

    let fresh = engine(2);
    let mut all = Vec::new();
    for (n, t) in &texts {
        all.push((n.clone(), Edit::insert(0, t.clone())));
        all.push((n.clone(), Edit::Perspective(Perspective::new(Vec::new(), true))));
    }
    fresh.apply_edits(&all).map_err(|e| e.to_string())?;
    if !fresh.await_quiescence(Duration::from_secs(20)) {
        return Err(format!("seed {seed}: fresh engine never went quiet"));
    }
    for (n, t) in &texts {
        let got = inc.latest().node(n).map(|x| x.text().to_owned());
        if got.as_deref() != Some(t.as_str()) {
            return Err(format!("seed {seed}: text of {n} diverged"));
        }
    }
    let (x, y) = (outcome(&inc), outcome(&fresh));
    if x != y {
        let diff = x.iter().zip(&y).find(|(p, q)| p != q);
        return Err(format!("seed {seed}: incremental result differs from scratch: {diff:?} (lengths {} vs {})", x.len(), y.len()));
    }
    for (n, _) in &texts {
        if inc.messages(n) != fresh.messages(n) {
            return Err(format!("seed {seed}: messages of {n} differ"));
        }
    }
    let assigned = inc.assignment().exec_ids();
    for (id, status, holds) in inc.live_units() {
        if !assigned.contains(&id) && (holds || status == Status::Running) {
            return Err(format!("seed {seed}: stale {id} is {status} holding results={holds}"));
        }
    }
    Ok(Trial { batches, spans })
}

/// Framing written out by hand from the wire description: decimal chunk
/// lengths, comma separated, newline, then the raw chunks.
pub fn reference_encode(chunks: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, c) in chunks.iter().enumerate() {
        if i > 0 {
            out.push(b',');
        }
        out.extend(c.len().to_string().bytes());
    }
    out.push(b'\n');
    for c in chunks {
        out.extend(c);
    }
    out
}

/// Split a complete stream back into messages.
pub fn reference_decode(mut stream: &[u8]) -> Option<Vec<Vec<Vec<u8>>>> {
    let mut out = Vec::new();
    while !stream.is_empty() {
        let nl = stream.iter().position(|&b| b == b'\n')?;
        let header = std::str::from_utf8(&stream[..nl]).ok()?;
        stream = &stream[nl + 1..];
        let mut msg = Vec::new();
        for field in header.split(',') {
            let n: usize = field.parse().ok()?;
            if stream.len() < n {
                return None;
            }
            msg.push(stream[..n].to_vec());
            stream = &stream[n..];
        }
        out.push(msg);
    }
    Some(out)
}

/// Random messages of one to five chunks, biased towards bytes that look
/// like framing.
pub fn random_message(rng: &mut impl Rng) -> Vec<Vec<u8>> {
    let chunks = rng.gen_range(1..=5);
    (0..chunks)
        .map(|_| {
            let len = match rng.gen_range(0..10) {
                0 => 0,
                1 => rng.gen_range(200..3000),
                _ => rng.gen_range(1..40),
            };
            (0..len)
                .map(|_| match rng.gen_range(0..4) {
                    0 => {
                        let framing = b"\n,0123456789\x05\x06";
                        framing[rng.gen_range(0..framing.len())]
                    }
                    _ => rng.gen(),
                })
                .collect()
        })
        .collect()
}

/// Decode `stream` fed in random pieces.
pub fn decode_chunked(
    stream: &[u8],
    rng: &mut impl Rng,
) -> Result<Vec<Vec<Vec<u8>>>, proofdoc::protocol::CodecError> {
    let mut d = proofdoc::protocol::Decoder::new();
    let mut out = Vec::new();
    let mut at = 0;
    while at < stream.len() {
        let n = match rng.gen_range(0..4) {
            0 => 1,
            1 => rng.gen_range(1..8),
            _ => rng.gen_range(1..600),
        }
        .min(stream.len() - at);
        d.feed(&stream[at..at + n]);
        at += n;
        while let Some(m) = d.next_message()? {
            out.push(m);
        }
    }
    Ok(out)
}

/// Trees whose strings carry no whitespace and whose breaks have at least
/// one blank, so blanks in the output mark exactly the unbroken breaks and
/// the indentation.
pub fn tree(min_spaces: usize) -> impl Strategy<Value = Doc> {
    let leaf = prop_oneof![
        3 => "[a-z(),=]{1,7}".prop_map(Doc::text),
        2 => (min_spaces..3usize, 0..4usize).prop_map(|(s, i)| Doc::brk(s, i)),
    ];
    leaf.prop_recursive(5, 60, 6, |inner| {
        (0..4usize, any::<bool>(), prop::collection::vec(inner, 0..6)).prop_map(|(indent, c, body)| {
            if c {
                Doc::consistent(indent, body)
            } else {
                Doc::block(indent, body)
            }
        })
    })
}
