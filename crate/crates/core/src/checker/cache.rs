//! Digest-keyed result cache with coalescing of concurrent computations.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use super::Cancel;
use crate::syntax::Digest;

enum Slot<V> {
    Ready { value: V, used: u64 },
    Pending,
}

struct State<V> {
    slots: HashMap<Digest, Slot<V>>,
    clock: u64,
}

/// Results survive until the process ends, or until evicted under a cap
/// (least recently used first).
pub struct ResultCache<V> {
    state: Mutex<State<V>>,
    changed: Condvar,
    cap: Option<usize>,
    evaluations: AtomicU64,
    hits: AtomicU64,
    enabled: bool,
}

impl<V: Clone> ResultCache<V> {
    pub fn new(cap: Option<usize>) -> Self {
        ResultCache {
            state: Mutex::new(State {
                slots: HashMap::new(),
                clock: 0,
            }),
            changed: Condvar::new(),
            cap,
            evaluations: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            enabled: true,
        }
    }

    /// A cache that never stores anything; every lookup evaluates.
    pub fn disabled() -> Self {
        ResultCache {
            enabled: false,
            ..ResultCache::new(None)
        }
    }

    /// Number of computations actually run.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::SeqCst)
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn len(&self) -> usize {
        let st = self.state.lock().unwrap();
        st.slots
            .values()
            .filter(|s| matches!(s, Slot::Ready { .. }))
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, key: &Digest) -> bool {
        matches!(
            self.state.lock().unwrap().slots.get(key),
            Some(Slot::Ready { .. })
        )
    }

    /// Cached value for `key`, or the result of `compute`. Concurrent callers
    /// for one key wait for a single computation. `compute` returning `None`
    /// (interrupted) caches nothing and lets a waiter try again. Waiting
    /// gives up with `None` once `cancel` fires.
    pub fn get_or_compute(
        &self,
        key: Digest,
        cancel: &Cancel,
        compute: impl FnOnce() -> Option<V>,
    ) -> Option<V> {
        if !self.enabled {
            self.evaluations.fetch_add(1, Ordering::SeqCst);
            return compute();
        }
        let mut st = self.state.lock().unwrap();
        loop {
            st.clock += 1;
            let now = st.clock;
            match st.slots.get_mut(&key) {
                Some(Slot::Ready { value, used }) => {
                    *used = now;
                    self.hits.fetch_add(1, Ordering::SeqCst);
                    return Some(value.clone());
                }
                Some(Slot::Pending) => {
                    if cancel.is_cancelled() {
                        return None;
                    }
                    st = self
                        .changed
                        .wait_timeout(st, Duration::from_millis(20))
                        .unwrap()
                        .0;
                }
                None => break,
            }
        }
        st.slots.insert(key, Slot::Pending);
        drop(st);

        self.evaluations.fetch_add(1, Ordering::SeqCst);
        let guard = PendingGuard { cache: self, key };
        let result = compute();
        std::mem::forget(guard);

        let mut st = self.state.lock().unwrap();
        match &result {
            Some(v) => {
                st.clock += 1;
                let used = st.clock;
                st.slots.insert(
                    key,
                    Slot::Ready {
                        value: v.clone(),
                        used,
                    },
                );
                self.evict(&mut st);
            }
            None => {
                st.slots.remove(&key);
            }
        }
        drop(st);
        self.changed.notify_all();
        result
    }

    fn evict(&self, st: &mut State<V>) {
        let Some(cap) = self.cap else { return };
        loop {
            let ready: Vec<(Digest, u64)> = st
                .slots
                .iter()
                .filter_map(|(k, s)| match s {
                    Slot::Ready { used, .. } => Some((*k, *used)),
                    Slot::Pending => None,
                })
                .collect();
            if ready.len() <= cap {
                return;
            }
            let (oldest, _) = ready.into_iter().min_by_key(|(_, u)| *u).unwrap();
            st.slots.remove(&oldest);
        }
    }
}

/// Clears a pending slot if the computation unwinds.
struct PendingGuard<'a, V: Clone> {
    cache: &'a ResultCache<V>,
    key: Digest,
}

impl<V: Clone> Drop for PendingGuard<'_, V> {
    fn drop(&mut self) {
        if let Ok(mut st) = self.cache.state.lock() {
            st.slots.remove(&self.key);
        }
        self.cache.changed.notify_all();
    }
}
