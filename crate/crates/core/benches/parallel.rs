use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use proofdoc::checker::{discard, Cancel, CheckInput, Checker, ForthelChecker, ResultCache};
use proofdoc::document::NodeName;
use proofdoc::parallel::Mode;
use proofdoc::syntax::{tokenize_all, KeywordTable};

const MODES: [Mode; 2] = [Mode::Sequential, Mode::Parallel];

/// Theories with nested cartouches, strings and comments, 1 to 4 KiB each.
fn corpus(files: usize) -> Vec<String> {
    (0..files)
        .map(|i| {
            let mut s = format!("theory T{i} begin\n");
            for j in 0..(20 + i % 60) {
                s.push_str(&format!(
                    "lemma \"x{j} = {j}\"\ntext \\<open>a \\<open>b {j}\\<close> c\\<close>\n(* note (* {i} *) *)\n"
                ));
            }
            s.push_str("end\n");
            s
        })
        .collect()
}

fn bench_tokenize(c: &mut Criterion) {
    let texts = corpus(200);
    let kw = KeywordTable::bootstrap();
    let bytes: usize = texts.iter().map(String::len).sum();
    let mut g = c.benchmark_group("tokenize_all");
    g.throughput(Throughput::Bytes(bytes as u64));
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| tokenize_all(mode, &texts, &kw))
        });
    }
    g.finish();
}

fn bench_blocks(c: &mut Criterion) {
    let node = NodeName::auxiliary("bench.ftl").unwrap();
    let mut g = c.benchmark_group("forthel_blocks");
    for blocks in [16usize, 256] {
        let text: String = (0..blocks)
            .map(|i| format!("Proposition. {i} * {i} + {} = {}.\n\n", i + 1, i * i + i + 1))
            .collect();
        g.throughput(Throughput::Elements(blocks as u64));
        for mode in MODES {
            // cache off: every run evaluates every block
            let checker = ForthelChecker::new(Duration::ZERO).with_cache(ResultCache::disabled()).with_mode(mode);
            let input = CheckInput {
                node: &node,
                content: &text,
                header: None,
            };
            g.bench_with_input(BenchmarkId::new(format!("{mode:?}"), blocks), &blocks, |b, _| {
                b.iter(|| checker.check(&input, &Cancel::new(), &discard))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, bench_tokenize, bench_blocks);
criterion_main!(benches);
