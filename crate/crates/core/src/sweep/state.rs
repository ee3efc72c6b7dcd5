//! Search nodes of the sweep and the single transition function that applies
//! an event to a node.

use std::fmt;
use std::sync::Arc;

use crate::error::SweepError;
use crate::incidence::{two_crossings_per_line, Configuration};
use crate::partitions::{PartitionTable, SegmentTuple};

use super::event::{collect_history, push_history, Event, HistoryNode, LineId};

/// Largest supported regularity degree.
pub const MAX_K: usize = 8;
/// Largest supported number of working pseudolines (bitmask width).
pub const MAX_WORKING: usize = 64;

const NO_FRAME: u8 = u8::MAX;

/// Immutable per-root data shared by every node below one base-line choice.
#[derive(Debug)]
pub struct SweepParams {
    pub n: usize,
    pub k: usize,
    /// Number of working pseudolines, `n - k`.
    pub m: usize,
    /// 2-crossings per pseudoline, `n - 1 - k(k-1)`; also the number of working k-crossings.
    pub n2: usize,
    pub lambda: SegmentTuple,
    /// Leftmost base-line segment, an upper bound for every segment.
    pub longest: usize,
    pub lambda_rank: usize,
    pub table: PartitionTable,
    /// Cap on the total number of working 2-crossings, `(n-2k) n2 / 2`.
    pub max_work2_total: usize,
    /// Sweep-line order just above the base line: the base layout with every
    /// base-line k-crossing group reversed. The closing order is its reverse.
    pub order_before_base: Vec<LineId>,
    /// Lines meeting at each base-line k-crossing.
    pub base_groups: Vec<Vec<LineId>>,
}

/// Per working pseudoline budget counters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LineCounters {
    pub frame_k: u8,
    pub work_k: u8,
    pub frame_2: u8,
    pub work_2: u8,
    pub cur_segment: u8,
    /// The line crosses the base line at a 2-crossing, so its first closed
    /// segment is the head of the wrap-around segment.
    pub head_open: bool,
    closed: [u8; MAX_K],
    closed_len: u8,
}

impl LineCounters {
    fn singleton() -> Self {
        LineCounters {
            frame_k: 0,
            work_k: 0,
            frame_2: 1,
            work_2: 0,
            cur_segment: 1,
            head_open: true,
            closed: [0; MAX_K],
            closed_len: 0,
        }
    }

    fn grouped() -> Self {
        LineCounters {
            frame_k: 1,
            work_k: 0,
            frame_2: 0,
            work_2: 0,
            cur_segment: 0,
            head_open: false,
            closed: [0; MAX_K],
            closed_len: 0,
        }
    }

    /// Completed segment lengths in sweep order (the first one is partial when
    /// `head_open`).
    pub fn closed_segments(&self) -> &[u8] {
        &self.closed[..self.closed_len as usize]
    }

    pub fn points(&self) -> usize {
        (self.frame_k + self.work_k) as usize
    }

    fn close_segment(&mut self) {
        self.closed[self.closed_len as usize] = self.cur_segment;
        self.closed_len += 1;
        self.cur_segment = 0;
    }

    /// Full cyclic segment distribution once every point is swept and the
    /// `tail` 2-crossings after the last point are known.
    pub fn distribution(&self, tail: usize) -> Vec<usize> {
        let closed = self.closed_segments();
        if self.head_open {
            let mut d = Vec::with_capacity(closed.len());
            d.push(closed[0] as usize + self.cur_segment as usize + tail);
            d.extend(closed[1..].iter().map(|&c| c as usize));
            d
        } else {
            let mut d: Vec<usize> = closed.iter().map(|&c| c as usize).collect();
            d.push(self.cur_segment as usize + tail);
            d
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct PointRec {
    /// Frame line index through the point, or `NO_FRAME` for working points.
    frame: u8,
    mask: u64,
}

/// A live node of the sweep: the sub-configuration above the current sweep line.
#[derive(Clone)]
pub struct SweepState {
    pub(crate) params: Arc<SweepParams>,
    pub(crate) order: Vec<LineId>,
    pub(crate) crossed: Vec<u64>,
    pub(crate) counters: Vec<LineCounters>,
    pub(crate) frames_done: u8,
    pub(crate) work_k_done: u8,
    pub(crate) work_2_total: u16,
    /// Gap distributions of the frame lines swept after the base line.
    pub(crate) frame_gaps: Vec<Vec<u8>>,
    pub(crate) points: Vec<PointRec>,
    pub(crate) history: Option<Arc<HistoryNode>>,
}

impl fmt::Debug for SweepState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SweepState")
            .field("order", &self.order)
            .field("frames_done", &self.frames_done)
            .field("work_k_done", &self.work_k_done)
            .field("work_2_total", &self.work_2_total)
            .field("counters", &self.counters)
            .finish()
    }
}

/// Why a transition was refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reject {
    Malformed(&'static str),
    AlreadyCrossed,
    KCrossingCapacity,
    TwoCrossingCapacity,
    SegmentTooLong,
    Canonicity,
    WorkingBudget,
    Unreachable,
    Closure(&'static str),
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reject::Malformed(why) => write!(f, "malformed event: {why}"),
            Reject::AlreadyCrossed => f.write_str("a pair of pseudolines would cross twice"),
            Reject::KCrossingCapacity => f.write_str("a pseudoline cannot accept another k-crossing"),
            Reject::TwoCrossingCapacity => f.write_str("a pseudoline cannot accept more 2-crossings"),
            Reject::SegmentTooLong => f.write_str("a segment exceeds the leftmost base-line segment"),
            Reject::Canonicity => f.write_str("a segment distribution precedes the base line"),
            Reject::WorkingBudget => f.write_str("working 2-crossing budget exceeded"),
            Reject::Unreachable => f.write_str("a pseudoline can no longer reach k points"),
            Reject::Closure(why) => write!(f, "closure infeasible: {why}"),
        }
    }
}

/// Shape of an event as a sequence of slots on the post-event sweep line:
/// even slots are gaps (lines keep their relative order), odd slots are
/// meeting points (lines reverse their order).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Working,
    Frame,
}

impl EventKind {
    pub(crate) fn meet_slots(self, k: usize) -> usize {
        match self {
            EventKind::Working => 1,
            EventKind::Frame => k - 1,
        }
    }

    pub(crate) fn meet_size(self, k: usize) -> usize {
        match self {
            EventKind::Working => k,
            EventKind::Frame => k - 1,
        }
    }
}

impl SweepParams {
    pub fn new(n: usize, k: usize, lambda: SegmentTuple) -> Result<Self, SweepError> {
        let n2 = two_crossings_per_line(n, k).ok_or(SweepError::BadParameters { n, k })?;
        if !(3..=MAX_K).contains(&k) || n < 2 * k || n - k > MAX_WORKING {
            return Err(SweepError::BadParameters { n, k });
        }
        let table = PartitionTable::new(n, k)?;
        if lambda.len() != k || lambda.total() != n2 || !lambda.is_maximal() {
            return Err(SweepError::LambdaNotMaximal(lambda.0.clone()));
        }
        let lambda_rank = table.rank(&lambda.0)?;
        let m = n - k;
        let mut order_before_base = Vec::with_capacity(m);
        let mut base_groups = Vec::with_capacity(k - 1);
        let mut next: LineId = 0;
        for (i, &run) in lambda.0.iter().enumerate() {
            if i > 0 {
                let group: Vec<LineId> = (next..next + (k - 1) as LineId).collect();
                order_before_base.extend(group.iter().rev());
                base_groups.push(group);
                next += (k - 1) as LineId;
            }
            for _ in 0..run {
                order_before_base.push(next);
                next += 1;
            }
        }
        debug_assert_eq!(next as usize, m);
        Ok(SweepParams {
            n,
            k,
            m,
            n2,
            longest: lambda.0[0],
            lambda_rank,
            lambda,
            table,
            max_work2_total: (n - 2 * k) * n2 / 2,
            order_before_base,
            base_groups,
        })
    }

    fn rank_ok(&self, distribution: &[usize]) -> bool {
        match self.table.rank(distribution) {
            Ok(r) => r >= self.lambda_rank,
            Err(_) => false,
        }
    }
}

impl SweepState {
    /// Sweeps the base line: singleton lines for each base-line segment, a
    /// group of k-1 mutually crossed lines at each base-line k-crossing.
    pub fn initial(n: usize, k: usize, lambda: SegmentTuple) -> Result<Self, SweepError> {
        let params = Arc::new(SweepParams::new(n, k, lambda.clone())?);
        let m = params.m;
        let mut counters = Vec::with_capacity(m);
        let mut crossed = vec![0u64; m];
        let mut points = Vec::new();
        for (i, &run) in lambda.0.iter().enumerate() {
            if i > 0 {
                let start = counters.len();
                let mut mask = 0u64;
                for id in start..start + k - 1 {
                    counters.push(LineCounters::grouped());
                    mask |= 1 << id;
                }
                for (id, row) in crossed.iter_mut().enumerate().skip(start).take(k - 1) {
                    *row = mask & !(1 << id);
                }
                points.push(PointRec { frame: 0, mask });
            }
            for _ in 0..run {
                counters.push(LineCounters::singleton());
            }
        }
        let order = (0..m as LineId).collect();
        let history = push_history(&None, Event::BaseInit { lambda });
        Ok(SweepState {
            params,
            order,
            crossed,
            counters,
            frames_done: 1,
            work_k_done: 0,
            work_2_total: 0,
            frame_gaps: Vec::new(),
            points,
            history,
        })
    }

    pub fn params(&self) -> &SweepParams {
        &self.params
    }

    pub fn order(&self) -> &[LineId] {
        &self.order
    }

    pub fn counters(&self) -> &[LineCounters] {
        &self.counters
    }

    pub fn frames_done(&self) -> usize {
        self.frames_done as usize
    }

    pub fn work_k_done(&self) -> usize {
        self.work_k_done as usize
    }

    pub fn work_2_total(&self) -> usize {
        self.work_2_total as usize
    }

    pub fn lambda(&self) -> &SegmentTuple {
        &self.params.lambda
    }

    pub fn is_crossed(&self, a: LineId, b: LineId) -> bool {
        self.crossed[a as usize] >> b & 1 == 1
    }

    pub fn history(&self) -> Vec<Event> {
        collect_history(&self.history)
    }

    pub fn history_len(&self) -> usize {
        self.history.as_ref().map_or(0, |h| h.len)
    }

    pub fn can_sweep_working(&self) -> bool {
        (self.work_k_done as usize) < self.params.n2
    }

    pub fn can_sweep_frame(&self) -> bool {
        (self.frames_done as usize) < self.params.k
    }

    pub fn is_complete(&self) -> bool {
        !self.can_sweep_working() && !self.can_sweep_frame()
    }

    fn uncrossed_count(&self, line: usize) -> usize {
        let all = if self.params.m == 64 { u64::MAX } else { (1u64 << self.params.m) - 1 };
        (all & !self.crossed[line] & !(1 << line)).count_ones() as usize
    }

    /// Applies an event given as one slot per sweep-line position.
    pub(crate) fn apply(&self, kind: EventKind, slots: &[u8]) -> Result<SweepState, Reject> {
        let p = &*self.params;
        let k = p.k;
        let m = p.m;
        if slots.len() != m {
            return Err(Reject::Malformed("slot count"));
        }
        match kind {
            EventKind::Working if !self.can_sweep_working() => {
                return Err(Reject::Malformed("all working k-crossings swept"))
            }
            EventKind::Frame if !self.can_sweep_frame() => {
                return Err(Reject::Malformed("all frame pseudolines swept"))
            }
            _ => {}
        }
        let meets = kind.meet_slots(k);
        let meet_size = kind.meet_size(k);
        let last = (2 * meets) as u8;
        let mut sizes = vec![0usize; 2 * meets + 1];
        for &s in slots {
            if s > last {
                return Err(Reject::Malformed("slot out of range"));
            }
            sizes[s as usize] += 1;
        }
        if (0..meets).any(|g| sizes[2 * g + 1] != meet_size) {
            return Err(Reject::Malformed("wrong number of lines at a meeting point"));
        }
        let first_meet = slots.iter().position(|s| s % 2 == 1).unwrap();
        let last_meet = slots.iter().rposition(|s| s % 2 == 1).unwrap();
        if slots[..first_meet].iter().any(|&s| s != 0) || slots[last_meet + 1..].iter().any(|&s| s != last) {
            return Err(Reject::Malformed("line outside the kernel moved"));
        }

        let mut next = self.clone();
        let mut forced = vec![0u8; m];
        for i in 0..m {
            let a = self.order[i] as usize;
            for j in i + 1..m {
                let b = self.order[j] as usize;
                let (sa, sb) = (slots[i], slots[j]);
                let meet = sa == sb && sa % 2 == 1;
                if meet || sa > sb {
                    if next.crossed[a] >> b & 1 == 1 {
                        return Err(Reject::AlreadyCrossed);
                    }
                    next.crossed[a] |= 1 << b;
                    next.crossed[b] |= 1 << a;
                    if !meet {
                        forced[a] += 1;
                        forced[b] += 1;
                    }
                }
            }
        }

        let mut order = Vec::with_capacity(m);
        for s in 0..=last {
            let start = order.len();
            order.extend((0..m).filter(|&i| slots[i] == s).map(|i| self.order[i]));
            if s % 2 == 1 {
                order[start..].reverse();
            }
        }
        next.order = order;

        let forced_total: usize = forced.iter().map(|&f| f as usize).sum::<usize>() / 2;
        let total = self.work_2_total as usize + forced_total;
        if total > p.max_work2_total {
            return Err(Reject::WorkingBudget);
        }
        next.work_2_total = total as u16;

        for (i, &s) in slots.iter().enumerate() {
            let line = self.order[i] as usize;
            let c = &mut next.counters[line];
            let f = forced[line];
            c.work_2 += f;
            c.cur_segment += f;
            if s % 2 == 1 {
                match kind {
                    EventKind::Working => c.work_k += 1,
                    EventKind::Frame => c.frame_k += 1,
                }
                if c.cur_segment as usize > p.longest {
                    return Err(Reject::SegmentTooLong);
                }
                if c.points() > k {
                    return Err(Reject::KCrossingCapacity);
                }
                c.close_segment();
            } else if kind == EventKind::Frame {
                c.frame_2 += 1;
                c.cur_segment += 1;
            }
            if c.cur_segment as usize > p.longest {
                return Err(Reject::SegmentTooLong);
            }
            if (c.work_k + c.work_2) as usize > p.n2 || (c.frame_2 + c.work_2) as usize > p.n2 {
                return Err(Reject::TwoCrossingCapacity);
            }
        }

        match kind {
            EventKind::Working => {
                let mask = slots
                    .iter()
                    .zip(&self.order)
                    .filter(|(s, _)| **s == 1)
                    .fold(0u64, |acc, (_, &l)| acc | 1 << l);
                next.points.push(PointRec { frame: NO_FRAME, mask });
                next.work_k_done += 1;
            }
            EventKind::Frame => {
                let frame = self.frames_done;
                let gaps: Vec<u8> = (0..=meets).map(|g| sizes[2 * g] as u8).collect();
                let dist: Vec<usize> = gaps.iter().map(|&g| g as usize).collect();
                if dist.iter().any(|&g| g > p.longest) {
                    return Err(Reject::SegmentTooLong);
                }
                if !p.rank_ok(&dist) {
                    return Err(Reject::Canonicity);
                }
                for g in 0..meets {
                    let mask = slots
                        .iter()
                        .zip(&self.order)
                        .filter(|(s, _)| **s as usize == 2 * g + 1)
                        .fold(0u64, |acc, (_, &l)| acc | 1 << l);
                    next.points.push(PointRec { frame, mask });
                }
                next.frame_gaps.push(gaps);
                next.frames_done += 1;
            }
        }

        next.check_lines()?;
        next.history = push_history(&self.history, next.event_from_slots(self, kind, slots));
        Ok(next)
    }

    /// Feasibility checks on every line after a transition.
    fn check_lines(&self) -> Result<(), Reject> {
        let p = &*self.params;
        let frames_left = p.k - self.frames_done as usize;
        let working_left = p.n2 - self.work_k_done as usize;
        let remaining = frames_left + working_left;
        // Incidences that must come from working (resp. frame) points.
        let mut working_demand = 0;
        let mut frame_demand = 0;
        for (line, c) in self.counters.iter().enumerate() {
            let need = p.k - c.points();
            if need > remaining {
                return Err(Reject::Unreachable);
            }
            working_demand += need.saturating_sub(frames_left);
            frame_demand += need.saturating_sub(working_left);
            if need == 0 {
                // Every further crossing of this line is a 2-crossing on its
                // tail: the working lines not yet crossed and the frame lines
                // not yet swept.
                let uncrossed = self.uncrossed_count(line);
                let tail = uncrossed + frames_left;
                if c.work_2 as usize + uncrossed + c.work_k as usize != p.n2 {
                    return Err(Reject::TwoCrossingCapacity);
                }
                let dist = c.distribution(tail);
                if dist.iter().any(|&d| d > p.longest) {
                    return Err(Reject::SegmentTooLong);
                }
                if !p.rank_ok(&dist) {
                    return Err(Reject::Canonicity);
                }
            }
        }
        if working_demand > p.k * working_left || frame_demand > (p.k - 1) * (p.k - 1) * frames_left {
            return Err(Reject::Unreachable);
        }
        Ok(())
    }

    fn event_from_slots(&self, before: &SweepState, kind: EventKind, slots: &[u8]) -> Event {
        let first = slots.iter().position(|s| s % 2 == 1).unwrap();
        let last = slots.iter().rposition(|s| s % 2 == 1).unwrap();
        let pick = |want: u8| -> Vec<LineId> {
            (first..=last).filter(|&i| slots[i] == want).map(|i| before.order[i]).collect()
        };
        match kind {
            EventKind::Working => Event::WorkingK { chosen: pick(1), left: pick(0), right: pick(2) },
            EventKind::Frame => {
                let meets = kind.meet_slots(self.params.k) as u8;
                Event::FrameSweep {
                    groups: (0..meets).map(|g| pick(2 * g + 1)).collect(),
                    gaps: (0..=meets).map(|g| pick(2 * g)).collect(),
                }
            }
        }
    }

    /// Translates a recorded event back into slots for the current order.
    pub(crate) fn slots_for(&self, event: &Event) -> Result<(EventKind, Vec<u8>), Reject> {
        let m = self.params.m;
        let k = self.params.k;
        let mut slot_of = vec![u8::MAX; m];
        let mut assign = |lines: &[LineId], s: u8| -> Result<(), Reject> {
            for &l in lines {
                let l = l as usize;
                if l >= m || slot_of[l] != u8::MAX {
                    return Err(Reject::Malformed("line listed twice or out of range"));
                }
                slot_of[l] = s;
            }
            Ok(())
        };
        let kind = match event {
            Event::WorkingK { chosen, left, right } => {
                assign(chosen, 1)?;
                assign(left, 0)?;
                assign(right, 2)?;
                EventKind::Working
            }
            Event::FrameSweep { groups, gaps } => {
                if groups.len() != k - 1 || gaps.len() != k {
                    return Err(Reject::Malformed("frame sweep shape"));
                }
                for (g, lines) in groups.iter().enumerate() {
                    assign(lines, (2 * g + 1) as u8)?;
                }
                for (g, lines) in gaps.iter().enumerate() {
                    assign(lines, (2 * g) as u8)?;
                }
                EventKind::Frame
            }
            _ => return Err(Reject::Malformed("not a sweep event")),
        };
        let last = (2 * kind.meet_slots(k)) as u8;
        let positions: Vec<usize> =
            (0..m).filter(|&i| {
                let s = slot_of[self.order[i] as usize];
                s != u8::MAX && s % 2 == 1
            }).collect();
        let (Some(&first), Some(&end)) = (positions.first(), positions.last()) else {
            return Err(Reject::Malformed("no meeting lines"));
        };
        let mut slots = vec![0u8; m];
        for (i, slot) in slots.iter_mut().enumerate() {
            let s = slot_of[self.order[i] as usize];
            *slot = if i < first {
                if s != u8::MAX {
                    return Err(Reject::Malformed("listed line outside the kernel"));
                }
                0
            } else if i > end {
                if s != u8::MAX {
                    return Err(Reject::Malformed("listed line outside the kernel"));
                }
                last
            } else if s == u8::MAX {
                return Err(Reject::Malformed("kernel line without a direction"));
            } else {
                s
            };
        }
        Ok((kind, slots))
    }

    /// Completes the sweep of the last frame region and assembles the
    /// configuration, applying the final canonicity filter.
    pub fn close(&self) -> Result<(Configuration, Vec<Event>), SweepError> {
        self.close_inner().map_err(|r| match r {
            Reject::Canonicity => SweepError::CanonicityReject,
            other => SweepError::InfeasibleClosure(other.to_string()),
        })
    }

    pub(crate) fn close_inner(&self) -> Result<(Configuration, Vec<Event>), Reject> {
        let p = &*self.params;
        if !self.is_complete() {
            return Err(Reject::Closure("events remain to be swept"));
        }
        let m = p.m;
        // Closing 2-crossings must be exactly the inversions towards the
        // antipodal order.
        let target: Vec<LineId> = p.order_before_base.iter().rev().copied().collect();
        let mut target_pos = vec![0usize; m];
        for (i, &l) in target.iter().enumerate() {
            target_pos[l as usize] = i;
        }
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (self.order[i], self.order[j]);
                let inverted = target_pos[a as usize] > target_pos[b as usize];
                if inverted == self.is_crossed(a, b) {
                    return Err(Reject::Closure("uncrossed pairs differ from closing inversions"));
                }
            }
        }
        let mut closing = Vec::with_capacity(m);
        let mut distributions = Vec::with_capacity(p.n);
        for (line, c) in self.counters.iter().enumerate() {
            let u = self.uncrossed_count(line);
            if c.points() != p.k {
                return Err(Reject::Closure("line without k points"));
            }
            if c.work_2 as usize + u + c.work_k as usize != p.n2 || c.frame_2 as usize + c.work_2 as usize + u != p.n2 {
                return Err(Reject::Closure("2-crossing count mismatch"));
            }
            let dist = c.distribution(u);
            if dist.iter().any(|&d| d > p.longest) {
                return Err(Reject::SegmentTooLong);
            }
            closing.push(u as u8);
            distributions.push(dist);
        }
        for gaps in &self.frame_gaps {
            distributions.push(gaps.iter().map(|&g| g as usize).collect());
        }
        if distributions.iter().any(|d| !p.rank_ok(d)) {
            return Err(Reject::Canonicity);
        }
        let config = self.assemble()?;
        let mut history = self.history();
        history.push(Event::Close { closing });
        Ok((config, history))
    }

    /// Points: the base point, then recorded points in sweep order. Lines:
    /// working lines `0..m`, then frame lines `m..n` (base line first).
    fn assemble(&self) -> Result<Configuration, Reject> {
        let p = &*self.params;
        let m = p.m;
        let mut lines: Vec<Vec<usize>> = vec![Vec::with_capacity(p.k); p.n];
        for f in 0..p.k {
            lines[m + f].push(0);
        }
        for (idx, point) in self.points.iter().enumerate() {
            let id = idx + 1;
            if point.frame != NO_FRAME {
                lines[m + point.frame as usize].push(id);
            }
            for (l, line) in lines.iter_mut().enumerate().take(m) {
                if point.mask >> l & 1 == 1 {
                    line.push(id);
                }
            }
        }
        if self.points.len() + 1 != p.n {
            return Err(Reject::Closure("wrong number of points"));
        }
        Configuration::new(p.n, p.k, lines).map_err(|_| Reject::Closure("assembled structure is not a configuration"))
    }

    /// Exact key of everything that determines the future of this node and
    /// the configurations it can produce.
    pub(crate) fn state_key(&self) -> Vec<u8> {
        let m = self.params.m;
        let mut key = Vec::with_capacity(m * 12 + self.points.len() * 9 + 8);
        key.push(self.frames_done);
        key.push(self.work_k_done);
        key.extend_from_slice(&self.order);
        let mut bits = 0u8;
        let mut nbits = 0;
        for a in 0..m {
            for b in a + 1..m {
                bits = bits << 1 | (self.crossed[a] >> b & 1) as u8;
                nbits += 1;
                if nbits == 8 {
                    key.push(bits);
                    bits = 0;
                    nbits = 0;
                }
            }
        }
        key.push(bits);
        for c in &self.counters {
            key.extend_from_slice(&[c.frame_k, c.work_k, c.frame_2, c.work_2, c.cur_segment]);
            key.extend_from_slice(c.closed_segments());
        }
        for g in &self.frame_gaps {
            key.extend_from_slice(g);
        }
        let mut points = self.points.clone();
        points.sort_unstable();
        for pt in points {
            key.push(pt.frame);
            key.extend_from_slice(&pt.mask.to_le_bytes()[..m.div_ceil(8)]);
        }
        key
    }
}
