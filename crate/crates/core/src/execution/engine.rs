//! The live engine: document state, exec units, a worker pool, and a
//! watchdog enforcing the cancellation deadline.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::{Duration, Instant};

use super::assign::{assign, classify_imports, eligible, Assignment, ExecId, ImportClass, Priority};
use crate::checker::theory::{Context, ImportContext, TheoryChecker};
use crate::checker::{run_guarded, Cancel, CheckInput, Outcome, Output, Registry, Report};
use crate::document::{
    CommandSpan, DocumentConfig, DocumentState, Edit, EditError, LookupError, Node, NodeName, SpanId,
    SpanKind, Version, VersionId,
};
use crate::markup::{Layer, MarkupTree, Snapshot};
use crate::message::{Message, Phase, Severity};
use crate::text::TextRange;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Unprocessed,
    Running,
    Finished,
    Failed,
    Cancelled,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Unprocessed => "unprocessed",
            Status::Running => "running",
            Status::Finished => "finished",
            Status::Failed => "failed",
            Status::Cancelled => "cancelled",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        [
            Status::Unprocessed,
            Status::Running,
            Status::Finished,
            Status::Failed,
            Status::Cancelled,
        ]
        .into_iter()
        .find(|x| x.as_str() == s)
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Status::Finished | Status::Failed | Status::Cancelled)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Notifications for front-ends, in the order they happened.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Assigned {
        version: VersionId,
        execs: Vec<(NodeName, SpanId, ExecId)>,
    },
    /// Output of a running unit, in offsets of `version`'s node text.
    Report {
        exec: ExecId,
        node: NodeName,
        version: VersionId,
        output: Output,
    },
    Status {
        exec: ExecId,
        status: Status,
    },
    RemovedVersions(Vec<VersionId>),
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub workers: usize,
    pub registry: Registry,
    pub document: DocumentConfig,
    /// How long a cancelled unit may keep running before it is abandoned.
    pub hard_deadline: Duration,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
            registry: Registry::demo(),
            document: DocumentConfig::default(),
            hard_deadline: Duration::from_secs(2),
        }
    }
}

/// Terminal result of one unit. Ranges are relative to the span start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitResult {
    pub report: Report,
    /// Theory context after the span; `None` for auxiliary files.
    pub context: Option<Arc<Context>>,
}

struct Unit {
    node: NodeName,
    span: SpanId,
    /// Exec ids that must finish first.
    deps: Vec<ExecId>,
    status: Status,
    partial: Report,
    result: Option<Arc<UnitResult>>,
    cancel: Cancel,
    cancelled_at: Option<Instant>,
    worker: Option<usize>,
    layer: Option<(Arc<MarkupTree>, Arc<[Message]>)>,
}

/// Output of a superseded unit, shown until the region is checked again.
struct Stale {
    node: NodeName,
    base: VersionId,
    offset: usize,
    len: usize,
    markup: Arc<MarkupTree>,
    messages: Arc<[Message]>,
}

struct State {
    doc: DocumentState,
    assignment: Assignment,
    eligible: BTreeMap<ExecId, Priority>,
    /// Position of each current exec id in checking order.
    rank: HashMap<ExecId, (usize, usize)>,
    units: HashMap<ExecId, Unit>,
    stale: Vec<Stale>,
    next_exec: u64,
    next_worker: usize,
    retired: HashSet<usize>,
    subscribers: Vec<Sender<Event>>,
    shutdown: bool,
}

struct Shared {
    state: Mutex<State>,
    work: Condvar,
    quiet: Condvar,
    theory: TheoryChecker,
    registry: Registry,
    hard_deadline: Duration,
    workers: usize,
}

/// Handle to a running engine; dropping it shuts the engine down.
pub struct Engine {
    shared: Arc<Shared>,
    watchdog: Mutex<Option<thread::JoinHandle<()>>>,
}

impl State {
    fn emit(&mut self, e: Event) {
        self.subscribers.retain(|s| s.send(e.clone()).is_ok());
    }

    fn span_of(&self, node: &NodeName, span: SpanId) -> Option<(Arc<Node>, CommandSpan)> {
        let v = self.doc.latest();
        let n = v.node(node)?.clone();
        let s = n.span(span)?.clone();
        Some((n, s))
    }

    fn is_current(&self, id: ExecId) -> bool {
        self.rank.contains_key(&id)
    }

    fn deps_done(&self, u: &Unit) -> bool {
        u.deps.iter().all(|d| {
            self.units
                .get(d)
                .is_some_and(|x| matches!(x.status, Status::Finished | Status::Failed))
        })
    }

    /// Best startable unit: eligible, unprocessed, dependencies done.
    fn next_ready(&self) -> Option<ExecId> {
        self.eligible
            .iter()
            .filter(|(id, _)| {
                self.units
                    .get(id)
                    .is_some_and(|u| u.status == Status::Unprocessed && self.deps_done(u))
            })
            .max_by_key(|(id, p)| (**p, std::cmp::Reverse(self.rank[id])))
            .map(|(id, _)| *id)
    }

    fn is_quiet(&self) -> bool {
        !self.units.values().any(|u| u.status == Status::Running)
            && !self
                .eligible
                .keys()
                .any(|id| self.units.get(id).is_some_and(|u| u.status == Status::Unprocessed))
    }

    /// Drop stale layers of `node` overlapping `range` (current offsets),
    /// and any whose base version is gone.
    fn prune_stale(&mut self, node: &NodeName, range: Option<TextRange>) {
        let latest = self.doc.latest().id();
        let doc = &self.doc;
        self.stale.retain(|s| {
            let Ok(pending) = doc.changes_between(s.base, latest, &s.node) else {
                return false;
            };
            let Some(now) = crate::document::transpose_range(&pending, TextRange::new(s.offset, s.offset + s.len))
            else {
                return false;
            };
            !(s.node == *node && range.is_some_and(|r| r.intersects(&now)))
        });
    }

    /// Record a unit's end. `context` is what successors build on.
    fn finish(&mut self, id: ExecId, outcome: Outcome, context: Option<Arc<Context>>) {
        let current = self.is_current(id);
        let Some(u) = self.units.get_mut(&id) else { return };
        if u.status.is_terminal() {
            return;
        }
        let obsolete = !current || u.cancel.is_cancelled();
        let (status, result) = match outcome {
            _ if obsolete => (Status::Cancelled, None),
            Outcome::Finished(report) => (Status::Finished, Some(report)),
            Outcome::Failed(report) => (Status::Failed, Some(report)),
            Outcome::Cancelled => {
                let mut r = Report::default();
                r.messages.push(Message::new(
                    Severity::Error,
                    Phase::Semantics,
                    TextRange::empty(0),
                    "checker gave up without being cancelled",
                ));
                (Status::Failed, Some(r))
            }
        };
        u.status = status;
        u.worker = None;
        u.layer = None;
        let node = u.node.clone();
        let span = u.span;
        match result {
            Some(report) => {
                u.partial = Report::default();
                u.result = Some(Arc::new(UnitResult { report, context }));
            }
            None => {
                self.units.remove(&id);
            }
        }
        self.emit(Event::Status { exec: id, status });
        if status != Status::Cancelled {
            let range = self.span_of(&node, span).map(|(_, s)| s.range);
            self.prune_stale(&node, range);
        }
    }
}

enum Job {
    Prelude {
        node: Arc<Node>,
        span: CommandSpan,
        imports: Vec<(crate::document::Import, ImportContext)>,
    },
    Command {
        node: Arc<Node>,
        span: CommandSpan,
        before: Arc<Context>,
    },
    Auxiliary {
        node: Arc<Node>,
        span: CommandSpan,
    },
}

impl Shared {
    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Claim the next unit and collect its inputs.
    fn claim(&self, me: usize) -> Option<(ExecId, Job, Cancel)> {
        let mut st = self.lock();
        loop {
            if st.shutdown || st.retired.contains(&me) {
                return None;
            }
            if let Some(id) = st.next_ready() {
                let job = self.job(&st, id);
                let u = st.units.get_mut(&id).expect("ready unit exists");
                u.status = Status::Running;
                u.worker = Some(me);
                let cancel = u.cancel.clone();
                st.emit(Event::Status {
                    exec: id,
                    status: Status::Running,
                });
                return Some((id, job, cancel));
            }
            st = self.work.wait(st).unwrap_or_else(|e| e.into_inner());
        }
    }

    fn job(&self, st: &State, id: ExecId) -> Job {
        let u = &st.units[&id];
        let (node, span) = st.span_of(&u.node, u.span).expect("current unit has a span");
        if !node.is_theory() {
            return Job::Auxiliary { node, span };
        }
        let v = st.doc.latest();
        let ctx_of = |e: ExecId| st.units.get(&e).and_then(|x| x.result.as_ref()).and_then(|r| r.context.clone());
        if span.kind == SpanKind::Prelude {
            let imports = classify_imports(&v, node.name(), st.assignment.cyclic())
                .into_iter()
                .map(|(imp, class)| {
                    let c = match class {
                        ImportClass::Unresolved => ImportContext::Unresolved,
                        ImportClass::Missing => ImportContext::Missing,
                        ImportClass::Cyclic => ImportContext::Cyclic,
                        ImportClass::Resolved(m) => match st.assignment.last(&m) {
                            None => ImportContext::Ready(Arc::new(Context {
                                theory: m.stem().to_owned(),
                                ..Context::default()
                            })),
                            Some(e) => ctx_of(e).map_or(ImportContext::Unavailable, ImportContext::Ready),
                        },
                    };
                    (imp, c)
                })
                .collect();
            return Job::Prelude { node, span, imports };
        }
        let before = st
            .assignment
            .node(node.name())
            .and_then(|a| {
                let i = a.execs.iter().position(|(_, e)| *e == id)?;
                i.checked_sub(1).map(|p| a.execs[p].1)
            })
            .and_then(ctx_of)
            .unwrap_or_else(|| Arc::new(Context::headerless(&node)));
        Job::Command { node, span, before }
    }

    fn run(self: &Arc<Self>, id: ExecId, job: Job, cancel: &Cancel) -> (Outcome, Option<Arc<Context>>) {
        let me = self.clone();
        let sink = move |o: Output| me.stream(id, o);
        let theory = |f: &dyn Fn() -> Option<(Report, Arc<Context>)>| {
            let ctx = std::cell::RefCell::new(None);
            let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| match f() {
                Some((r, c)) => {
                    *ctx.borrow_mut() = Some(c);
                    Outcome::Finished(r)
                }
                None => Outcome::Cancelled,
            }));
            match outcome {
                Ok(o) => (o, ctx.into_inner()),
                Err(_) => {
                    let mut r = Report::default();
                    r.messages.push(Message::error(TextRange::empty(0), "checker crashed"));
                    (Outcome::Failed(r), None)
                }
            }
        };
        match job {
            Job::Auxiliary { node, span } => {
                let Some((format, checker)) = self.registry.for_node(node.name()) else {
                    return (Outcome::Finished(Report::default()), None);
                };
                let header = (format.template)(node.name());
                let input = CheckInput {
                    node: node.name(),
                    content: &span.source,
                    header: Some(&header),
                };
                (run_guarded(checker.as_ref(), &input, cancel, &sink), None)
            }
            Job::Prelude { node, span, imports } => {
                let (o, c) = theory(&|| self.theory.check_prelude(&node, &span, &imports, cancel, &sink));
                (o, c.or_else(|| Some(Arc::new(Context::headerless(&node)))))
            }
            Job::Command { node, span, before } => {
                let (o, c) = theory(&|| self.theory.check_command(&node, &span, &before, cancel, &sink));
                (o, c.or(Some(before)))
            }
        }
    }

    /// Streamed output of a running unit.
    fn stream(&self, id: ExecId, output: Output) {
        let mut st = self.lock();
        if !st.is_current(id) {
            return;
        }
        let Some(u) = st.units.get_mut(&id) else { return };
        if u.status != Status::Running || u.cancel.is_cancelled() {
            return;
        }
        u.partial.push(output.clone());
        u.layer = None;
        let (node, span) = (u.node.clone(), u.span);
        let Some((_, s)) = st.span_of(&node, span) else { return };
        let output = match output {
            Output::Message(m) => Output::Message(m.shifted(s.range.start)),
            Output::Markup(r, e) => Output::Markup(r.shift(s.range.start), e),
        };
        let version = st.doc.latest().id();
        st.emit(Event::Report {
            exec: id,
            node,
            version,
            output,
        });
    }

    fn worker(self: Arc<Self>, me: usize) {
        while let Some((id, job, cancel)) = self.claim(me) {
            let (outcome, context) = self.run(id, job, &cancel);
            let mut st = self.lock();
            st.finish(id, outcome, context);
            if st.retired.remove(&me) {
                drop(st);
                self.quiet.notify_all();
                self.work.notify_all();
                return;
            }
            drop(st);
            self.quiet.notify_all();
            self.work.notify_all();
        }
    }

    fn spawn_worker(self: &Arc<Self>, st: &mut State) {
        let me = st.next_worker;
        st.next_worker += 1;
        let shared = self.clone();
        thread::Builder::new()
            .name(format!("proofdoc-worker-{me}"))
            .spawn(move || shared.worker(me))
            .expect("spawn worker thread");
    }

    /// Abandon cancelled units past the hard deadline; their workers are
    /// retired and replaced.
    fn watchdog(self: Arc<Self>) {
        loop {
            {
                let mut st = self.lock();
                if st.shutdown {
                    return;
                }
                let now = Instant::now();
                let overdue: Vec<(ExecId, Option<usize>)> = st
                    .units
                    .iter()
                    .filter(|(_, u)| {
                        u.status == Status::Running
                            && u.cancelled_at.is_some_and(|t| now - t >= self.hard_deadline)
                    })
                    .map(|(id, u)| (*id, u.worker))
                    .collect();
                for (id, worker) in overdue {
                    log::warn!("unit {id} ignored cancellation; abandoning it");
                    st.units.remove(&id);
                    st.emit(Event::Status {
                        exec: id,
                        status: Status::Cancelled,
                    });
                    if let Some(w) = worker {
                        st.retired.insert(w);
                        self.spawn_worker(&mut st);
                    }
                }
                drop(st);
                self.quiet.notify_all();
            }
            thread::sleep(Duration::from_millis(10));
        }
    }
}

impl Engine {
    pub fn new(mut config: EngineConfig) -> Engine {
        config.document.formats.extend(config.registry.extensions());
        let workers = config.workers.max(1);
        let shared = Arc::new(Shared {
            state: Mutex::new(State {
                doc: DocumentState::new(config.document),
                assignment: Assignment::default(),
                eligible: BTreeMap::new(),
                rank: HashMap::new(),
                units: HashMap::new(),
                stale: Vec::new(),
                next_exec: 0,
                next_worker: 0,
                retired: HashSet::new(),
                subscribers: Vec::new(),
                shutdown: false,
            }),
            work: Condvar::new(),
            quiet: Condvar::new(),
            theory: TheoryChecker::new(config.registry.clone()),
            registry: config.registry,
            hard_deadline: config.hard_deadline,
            workers,
        });
        {
            let mut st = shared.lock();
            for _ in 0..workers {
                shared.spawn_worker(&mut st);
            }
        }
        let dog = shared.clone();
        let watchdog = thread::Builder::new()
            .name("proofdoc-watchdog".into())
            .spawn(move || dog.watchdog())
            .expect("spawn watchdog thread");
        Engine {
            shared,
            watchdog: Mutex::new(Some(watchdog)),
        }
    }

    pub fn workers(&self) -> usize {
        self.shared.workers
    }

    /// Events from now on.
    pub fn subscribe(&self) -> Receiver<Event> {
        let (tx, rx) = channel();
        self.shared.lock().subscribers.push(tx);
        rx
    }

    pub fn latest(&self) -> Arc<Version> {
        self.shared.lock().doc.latest()
    }

    pub fn assignment(&self) -> Assignment {
        self.shared.lock().assignment.clone()
    }

    pub fn registry(&self) -> &Registry {
        &self.shared.registry
    }

    /// Apply a batch as the next version.
    pub fn apply_edits(&self, edits: &[(NodeName, Edit)]) -> Result<VersionId, EditError> {
        self.update(|doc| doc.apply_edits(edits))
    }

    /// Apply a batch under a client-proposed version id.
    pub fn apply_edits_as(&self, id: VersionId, edits: &[(NodeName, Edit)]) -> Result<VersionId, EditError> {
        self.update(|doc| doc.apply_edits_as(id, edits))
    }

    fn update(
        &self,
        f: impl FnOnce(&mut DocumentState) -> Result<Arc<Version>, EditError>,
    ) -> Result<VersionId, EditError> {
        let mut guard = self.shared.lock();
        let st = &mut *guard;
        let before = st.doc.latest().id();
        let v = f(&mut st.doc)?;
        if v.id() == before {
            return Ok(v.id());
        }
        let prev_version = st.doc.version(before).expect("latest retained");
        let next = &mut st.next_exec;
        let fresh = assign(&v, &st.assignment, &mut || {
            *next += 1;
            ExecId(*next)
        });
        let old = std::mem::replace(&mut st.assignment, fresh);
        let current = st.assignment.exec_ids();

        // Superseded units: keep their output as stale layers; cancel the
        // running ones, drop the rest.
        let now = Instant::now();
        for (node, span, id) in old.iter() {
            if current.contains(&id) {
                continue;
            }
            let Some(u) = st.units.get_mut(&id) else { continue };
            let report = u.result.as_ref().map(|r| r.report.clone()).unwrap_or_else(|| u.partial.clone());
            if let Some(s) = prev_version.node(node).and_then(|n| n.span(span)) {
                if !report.messages.is_empty() || !report.markup.is_empty() {
                    let (markup, messages) = layer_of(&report, s.range.len());
                    st.stale.push(Stale {
                        node: node.clone(),
                        base: before,
                        offset: s.range.start,
                        len: s.range.len(),
                        markup,
                        messages,
                    });
                }
            }
            match u.status {
                Status::Running => {
                    u.cancel.cancel();
                    u.cancelled_at.get_or_insert(now);
                }
                Status::Unprocessed => {
                    st.units.remove(&id);
                    st.emit(Event::Status {
                        exec: id,
                        status: Status::Cancelled,
                    });
                }
                _ => {
                    st.units.remove(&id);
                }
            }
        }

        let mut rank = HashMap::new();
        for (i, name) in st.assignment.order().iter().enumerate() {
            let a = st.assignment.node(name).expect("ordered");
            let imports: Vec<ExecId> = classify_imports(&v, name, st.assignment.cyclic())
                .into_iter()
                .filter_map(|(_, c)| match c {
                    ImportClass::Resolved(m) => st.assignment.last(&m),
                    _ => None,
                })
                .collect();
            for (j, (span, id)) in a.execs.iter().enumerate() {
                rank.insert(*id, (i, j));
                if st.units.contains_key(id) {
                    continue;
                }
                let deps = if j == 0 { imports.clone() } else { vec![a.execs[j - 1].1] };
                st.units.insert(
                    *id,
                    Unit {
                        node: name.clone(),
                        span: *span,
                        deps,
                        status: Status::Unprocessed,
                        partial: Report::default(),
                        result: None,
                        cancel: Cancel::new(),
                        cancelled_at: None,
                        worker: None,
                        layer: None,
                    },
                );
            }
        }
        st.rank = rank;
        st.eligible = eligible(&v, &st.assignment);
        let execs = st.assignment.iter().map(|(n, s, e)| (n.clone(), s, e)).collect();
        st.emit(Event::Assigned {
            version: v.id(),
            execs,
        });
        let removed = st.doc.prune();
        if !removed.is_empty() {
            st.emit(Event::RemovedVersions(removed));
        }
        let latest_node_names: Vec<NodeName> = v.node_names().cloned().collect();
        st.stale.retain(|s| latest_node_names.contains(&s.node));
        for n in &latest_node_names {
            st.prune_stale(n, None);
        }
        // Stale output over regions whose current units already finished.
        let done: Vec<(NodeName, TextRange)> = st
            .assignment
            .iter()
            .filter(|(_, _, e)| st.units.get(e).is_some_and(|u| u.result.is_some()))
            .filter_map(|(n, s, _)| Some((n.clone(), v.node(n)?.span(s)?.range)))
            .collect();
        for (n, r) in done {
            st.prune_stale(&n, Some(r));
        }
        drop(guard);
        self.shared.work.notify_all();
        self.shared.quiet.notify_all();
        Ok(v.id())
    }

    /// Wait until nothing eligible is unprocessed or running; `false` on
    /// timeout.
    pub fn await_quiescence(&self, timeout: Duration) -> bool {
        let until = Instant::now() + timeout;
        let mut st = self.shared.lock();
        loop {
            if st.is_quiet() {
                return true;
            }
            let now = Instant::now();
            if now >= until {
                return false;
            }
            st = self
                .shared
                .quiet
                .wait_timeout(st, (until - now).min(Duration::from_millis(50)))
                .unwrap_or_else(|e| e.into_inner())
                .0;
        }
    }

    pub fn is_quiet(&self) -> bool {
        self.shared.lock().is_quiet()
    }

    /// Markup and messages of `node` in the latest version, without waiting
    /// for any checking.
    pub fn snapshot(&self, node: &NodeName) -> Result<Snapshot, LookupError> {
        let mut st = self.shared.lock();
        let v = st.doc.latest();
        let n = v.node(node).ok_or_else(|| LookupError::UnknownNode(node.clone()))?.clone();
        let mut layers = Vec::new();
        let execs: Vec<(SpanId, ExecId)> = st.assignment.node(node).map(|a| a.execs.clone()).unwrap_or_default();
        for (span, id) in execs {
            let Some(s) = n.span(span) else { continue };
            let Some(u) = st.units.get_mut(&id) else { continue };
            if u.layer.is_none() {
                let report = u.result.as_ref().map_or(&u.partial, |r| &r.report);
                if report.messages.is_empty() && report.markup.is_empty() {
                    continue;
                }
                u.layer = Some(layer_of(report, s.range.len()));
            }
            let (markup, messages) = u.layer.clone().expect("built above");
            layers.push(Layer {
                base: v.id(),
                offset: s.range.start,
                markup,
                messages,
                pending: Arc::from(Vec::new()),
            });
        }
        for s in st.stale.iter().filter(|s| s.node == *node) {
            let Ok(pending) = st.doc.changes_between(s.base, v.id(), node) else { continue };
            layers.push(Layer {
                base: s.base,
                offset: s.offset,
                markup: s.markup.clone(),
                messages: s.messages.clone(),
                pending: Arc::from(pending),
            });
        }
        Ok(Snapshot::new(v.id(), node.clone(), n.text_arc(), layers))
    }

    pub fn status(&self, id: ExecId) -> Option<Status> {
        self.shared.lock().units.get(&id).map(|u| u.status)
    }

    /// Terminal results of the latest assignment, in checking order.
    pub fn results(&self) -> Vec<(NodeName, CommandSpan, Status, Option<Arc<UnitResult>>)> {
        let st = self.shared.lock();
        let v = st.doc.latest();
        let mut out = Vec::new();
        for name in st.assignment.order() {
            let Some(n) = v.node(name) else { continue };
            for (span, id) in &st.assignment.node(name).expect("ordered").execs {
                let Some(s) = n.span(*span) else { continue };
                let u = st.units.get(id);
                out.push((
                    name.clone(),
                    s.clone(),
                    u.map_or(Status::Cancelled, |u| u.status),
                    u.and_then(|u| u.result.clone()),
                ));
            }
        }
        out
    }

    /// Messages of `node` in current offsets, by position.
    pub fn messages(&self, node: &NodeName) -> Vec<Message> {
        let mut out: Vec<Message> = self
            .results()
            .into_iter()
            .filter(|(n, ..)| n == node)
            .flat_map(|(_, s, _, r)| {
                r.map(|r| r.report.messages.iter().map(|m| m.shifted(s.range.start)).collect::<Vec<_>>())
                    .unwrap_or_default()
            })
            .collect();
        out.sort_by_key(|m| (m.range.start, m.range.end));
        out
    }

    /// Exports of finished theory spans as (theory, name, payload).
    pub fn exports(&self) -> Vec<(String, String, Vec<u8>)> {
        let mut out = Vec::new();
        for (_, _, _, r) in self.results() {
            let Some(r) = r else { continue };
            let theory = r.context.as_ref().map(|c| c.theory.clone()).unwrap_or_default();
            for (name, bytes) in &r.report.exports {
                out.push((theory.clone(), name.clone(), bytes.clone()));
            }
        }
        out
    }

    /// Exec ids holding results or still running.
    pub fn live_units(&self) -> Vec<(ExecId, Status, bool)> {
        let st = self.shared.lock();
        let mut v: Vec<_> = st
            .units
            .iter()
            .map(|(id, u)| (*id, u.status, u.result.is_some() || !u.partial.messages.is_empty()))
            .collect();
        v.sort_by_key(|x| x.0);
        v
    }

    /// Cancel everything and stop the workers. Workers stuck in a checker
    /// are left behind.
    pub fn shutdown(&self) {
        {
            let mut st = self.shared.lock();
            if st.shutdown {
                return;
            }
            st.shutdown = true;
            for u in st.units.values() {
                u.cancel.cancel();
            }
        }
        self.shared.work.notify_all();
        self.shared.quiet.notify_all();
        let dog = self.watchdog.lock().unwrap_or_else(|e| e.into_inner()).take();
        if let Some(w) = dog {
            let _ = w.join();
        }
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn layer_of(report: &Report, len: usize) -> (Arc<MarkupTree>, Arc<[Message]>) {
    let mut tree = MarkupTree::new(len);
    for (r, e) in &report.markup {
        if let Err(err) = tree.add(*r, e.clone()) {
            log::warn!("markup rejected: {err}");
        }
    }
    (Arc::new(tree), Arc::from(report.messages.clone()))
}
