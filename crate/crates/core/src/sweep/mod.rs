//! Depth-first sweep of the projective plane from the base line.
//!
//! Every root is a base-line tuple from the partition table. A node branches
//! on the next event: either the next frame pseudoline or the next working
//! k-crossing, with every admissible kernel assignment. Complete nodes are
//! closed and, when closure succeeds, emitted with their event history.
//!
//! For parallel runs the tree is cut at a fixed history length into tasks;
//! tasks are searched independently and their outputs are released in task
//! order, so the emitted stream does not depend on the worker count.

mod event;
mod state;
mod successors;

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::SweepError;
use crate::incidence::{Configuration, ConfigurationRecord};
use crate::partitions::{PartitionTable, SegmentTuple};

pub use event::{Event, LineId};
pub use state::{LineCounters, Reject, SweepParams, SweepState, MAX_K, MAX_WORKING};
pub use successors::{successors_frame, successors_working};

/// Sweeps the base line with tuple `lambda`.
pub fn initial_state(n: usize, k: usize, lambda: SegmentTuple) -> Result<SweepState, SweepError> {
    SweepState::initial(n, k, lambda)
}

/// All admissible successors: frame sweeps first, then working k-crossings.
pub fn children(state: &SweepState) -> Vec<SweepState> {
    let mut out = successors_frame(state);
    out.extend(successors_working(state));
    out
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    /// History length at which the tree is cut into tasks.
    pub split_depth: usize,
    /// Merge search nodes with identical state keys.
    pub dedup: bool,
    /// Shared node and emission counters, for progress reporting.
    pub counters: Arc<SearchCounters>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { jobs: 1, split_depth: 3, dedup: true, counters: Arc::default() }
    }
}

#[derive(Debug, Default)]
pub struct SearchCounters {
    pub nodes: AtomicU64,
    pub emitted: AtomicU64,
    pub tasks_done: AtomicU64,
}

impl SearchCounters {
    pub fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }

    pub fn emitted(&self) -> u64 {
        self.emitted.load(Ordering::Relaxed)
    }

    pub fn tasks_done(&self) -> u64 {
        self.tasks_done.load(Ordering::Relaxed)
    }
}

/// An accepted closure: the canonical configuration and the history that
/// produced it (ending with the closing event).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepOutput {
    pub config: Configuration,
    pub history: Vec<Event>,
}

/// JSONL form of a [`SweepOutput`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(flatten)]
    pub config: ConfigurationRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<Event>>,
}

impl SweepOutput {
    pub fn to_record(&self) -> SweepRecord {
        SweepRecord { config: self.config.to_record(), history: Some(self.history.clone()) }
    }
}

/// Result of searching one task subtree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskResult {
    pub outputs: Vec<SweepRecord>,
    pub nodes: u64,
}

/// Replays `history` (starting with the base-line event, optionally ending
/// with the closing event) through the transition function.
pub fn replay(n: usize, k: usize, history: &[Event]) -> Result<SweepState, SweepError> {
    let fail = |index: usize, reason: String| SweepError::Replay { index, reason };
    let Some(Event::BaseInit { lambda }) = history.first() else {
        return Err(fail(0, "history must start with the base-line event".into()));
    };
    let mut state = SweepState::initial(n, k, lambda.clone())?;
    for (index, event) in history.iter().enumerate().skip(1) {
        if let Event::Close { .. } = event {
            if index + 1 != history.len() {
                return Err(fail(index, "closing event before the end".into()));
            }
            break;
        }
        let (kind, slots) = state.slots_for(event).map_err(|r| fail(index, r.to_string()))?;
        state = state.apply(kind, &slots).map_err(|r| fail(index, r.to_string()))?;
    }
    Ok(state)
}

/// Every intermediate node of a replay, starting with the base line.
pub fn replay_trace(n: usize, k: usize, history: &[Event]) -> Result<Vec<SweepState>, SweepError> {
    let end = match history.last() {
        Some(Event::Close { .. }) => history.len() - 1,
        _ => history.len(),
    };
    (1..=end).map(|len| replay(n, k, &history[..len])).collect()
}

/// Replays a full history and closes it; the closing event, if present, must
/// agree with the recomputed one.
pub fn replay_closed(n: usize, k: usize, history: &[Event]) -> Result<SweepOutput, SweepError> {
    let state = replay(n, k, history)?;
    let (config, replayed) = state.close()?;
    if let Some(last @ Event::Close { .. }) = history.last() {
        if replayed.last() != Some(last) {
            return Err(SweepError::Replay { index: history.len() - 1, reason: "closing counts differ".into() });
        }
    }
    Ok(SweepOutput { config: config.canonical(), history: replayed })
}

/// Cuts the search tree into tasks: every node whose history reaches
/// `split_depth`, plus complete nodes above it, in depth-first order.
pub fn plan_tasks(n: usize, k: usize, split_depth: usize, dedup: bool) -> Result<Vec<SweepState>, SweepError> {
    let table = PartitionTable::new(n, k)?;
    let mut tasks = Vec::new();
    let mut seen = HashSet::new();
    for lambda in table.tuples() {
        let root = SweepState::initial(n, k, lambda.clone())?;
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if node.history_len() >= split_depth || node.is_complete() {
                if !dedup || seen.insert(node.state_key()) {
                    tasks.push(node);
                }
                continue;
            }
            let mut kids = children(&node);
            kids.reverse();
            stack.extend(kids);
        }
    }
    Ok(tasks)
}

/// Exhaustive depth-first search below `root`.
pub fn search_task(root: SweepState, dedup: bool, counters: &SearchCounters) -> TaskResult {
    let mut result = TaskResult::default();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        result.nodes += 1;
        counters.nodes.fetch_add(1, Ordering::Relaxed);
        if node.is_complete() {
            if let Ok((config, history)) = node.close() {
                counters.emitted.fetch_add(1, Ordering::Relaxed);
                let out = SweepOutput { config: config.canonical(), history };
                result.outputs.push(out.to_record());
            }
            continue;
        }
        let mut kids = children(&node);
        if dedup {
            kids.retain(|kid| seen.insert(kid.state_key()));
        }
        kids.reverse();
        stack.extend(kids);
    }
    counters.tasks_done.fetch_add(1, Ordering::Relaxed);
    result
}

/// Searches the listed tasks on `jobs` workers, handing each result to
/// `sink` in ascending task order.
pub fn run_tasks(
    tasks: &[SweepState],
    todo: &[usize],
    options: &SweepOptions,
    mut sink: impl FnMut(usize, TaskResult),
) {
    let jobs = if options.jobs == 0 { rayon::current_num_threads() } else { options.jobs };
    if jobs <= 1 {
        for &i in todo {
            sink(i, search_task(tasks[i].clone(), options.dedup, &options.counters));
        }
        return;
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("worker pool");
    let (tx, rx) = mpsc::channel();
    pool.in_place_scope_fifo(|scope| {
        for (slot, &i) in todo.iter().enumerate() {
            let tx = tx.clone();
            let root = tasks[i].clone();
            let counters = &options.counters;
            let dedup = options.dedup;
            scope.spawn_fifo(move |_| {
                let _ = tx.send((slot, search_task(root, dedup, counters)));
            });
        }
        drop(tx);
        // Release results in order as the prefix completes.
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (slot, result) in rx {
            pending.insert(slot, result);
            while let Some(result) = pending.remove(&next) {
                sink(todo[next], result);
                next += 1;
            }
        }
    });
}

/// Streams every accepted closure for `(n, k)` in deterministic order.
pub fn enumerate_sweep(
    n: usize,
    k: usize,
    options: &SweepOptions,
    mut sink: impl FnMut(SweepRecord),
) -> Result<(), SweepError> {
    let tasks = plan_tasks(n, k, options.split_depth, options.dedup)?;
    let todo: Vec<usize> = (0..tasks.len()).collect();
    run_tasks(&tasks, &todo, options, |_, result| result.outputs.into_iter().for_each(&mut sink));
    Ok(())
}

/// Collects [`enumerate_sweep`] into memory.
pub fn enumerate_all(n: usize, k: usize, options: &SweepOptions) -> Result<Vec<SweepOutput>, SweepError> {
    let mut out = Vec::new();
    let mut err = None;
    enumerate_sweep(n, k, options, |record| {
        match Configuration::from_record(&record.config) {
            Ok(config) => out.push(SweepOutput { config, history: record.history.unwrap_or_default() }),
            Err(e) => err = Some(SweepError::InfeasibleClosure(e.to_string())),
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Resumable state of a run: the task frontier as event histories and the
/// results of the tasks already searched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub k: usize,
    pub split_depth: usize,
    pub dedup: bool,
    pub tasks: Vec<Vec<Event>>,
    pub done: BTreeMap<usize, TaskResult>,
}

impl Checkpoint {
    pub fn new(n: usize, k: usize, split_depth: usize, dedup: bool, tasks: &[SweepState]) -> Self {
        Checkpoint { n, k, split_depth, dedup, tasks: tasks.iter().map(SweepState::history).collect(), done: BTreeMap::new() }
    }

    /// Rebuilds the task roots by replaying their histories.
    pub fn task_states(&self) -> Result<Vec<SweepState>, SweepError> {
        self.tasks.iter().map(|h| replay(self.n, self.k, h)).collect()
    }

    pub fn todo(&self) -> Vec<usize> {
        (0..self.tasks.len()).filter(|i| !self.done.contains_key(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(n: usize, k: usize) -> (usize, u64) {
        let opts = SweepOptions::default();
        let out = enumerate_all(n, k, &opts).unwrap();
        (out.len(), opts.counters.nodes())
    }

    #[test]
    fn initial_layout_9_3() {
        let s = initial_state(9, 3, SegmentTuple(vec![1, 1, 0])).unwrap();
        assert_eq!(s.order().len(), 6);
        let c = s.counters();
        assert_eq!((c[0].frame_2, c[0].cur_segment), (1, 1));
        assert_eq!((c[1].frame_k, c[1].cur_segment), (1, 0));
        assert!(s.is_crossed(1, 2) && s.is_crossed(4, 5) && !s.is_crossed(2, 4));
        assert_eq!((c[3].frame_2, c[3].cur_segment), (1, 1));
    }

    #[test]
    fn initial_layout_17_4() {
        let s = initial_state(17, 4, SegmentTuple(vec![4, 0, 0, 0])).unwrap();
        assert_eq!(s.order().len(), 13);
        assert!(s.counters()[..4].iter().all(|c| c.frame_2 == 1));
        assert!(s.counters()[4..].iter().all(|c| c.frame_k == 1));
    }

    #[test]
    fn non_maximal_lambda_rejected() {
        assert!(matches!(
            initial_state(9, 3, SegmentTuple(vec![0, 1, 1])),
            Err(SweepError::LambdaNotMaximal(_))
        ));
    }

    #[test]
    fn fano_and_mobius_kantor_have_no_sweep() {
        assert_eq!(count(7, 3).0, 0);
        assert_eq!(count(8, 3).0, 0);
    }

    #[test]
    fn outputs_are_valid_and_replay() {
        let out = enumerate_all(9, 3, &SweepOptions::default()).unwrap();
        assert!(!out.is_empty());
        for o in &out {
            assert!(o.config.verify().is_valid());
            let again = replay_closed(9, 3, &o.history).unwrap();
            assert_eq!(again.config, o.config);
            assert_eq!(again.history, o.history);
        }
    }

    #[test]
    fn history_round_trips_through_json() {
        let out = enumerate_all(9, 3, &SweepOptions::default()).unwrap();
        let record = out[0].to_record();
        let text = serde_json::to_string(&record).unwrap();
        let back: SweepRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn replay_rejects_double_crossing() {
        let out = enumerate_all(9, 3, &SweepOptions::default()).unwrap();
        let mut history = out[0].history.clone();
        // Repeating an event makes its pairs cross twice.
        let i = history.iter().position(|e| matches!(e, Event::WorkingK { .. } | Event::FrameSweep { .. })).unwrap();
        history.insert(i + 1, history[i].clone());
        assert!(replay_closed(9, 3, &history).is_err());
    }
}
