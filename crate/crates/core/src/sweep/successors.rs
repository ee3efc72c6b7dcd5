//! Enumeration of admissible events from a search node.
//!
//! Lines are assigned slots left to right in their current sweep-line order.
//! A pair whose slots invert its order is forced to cross at a working
//! 2-crossing; lines sharing an odd slot meet at a k-crossing. Budgets are
//! checked incrementally so whole sub-assignments are cut early; every
//! complete assignment is then re-validated by [`SweepState::apply`].

use super::state::{EventKind, SweepState};

/// Successor nodes after sweeping one working k-crossing.
pub fn successors_working(state: &SweepState) -> Vec<SweepState> {
    if !state.can_sweep_working() {
        return Vec::new();
    }
    successors(state, EventKind::Working)
}

/// Successor nodes after sweeping the next frame pseudoline.
pub fn successors_frame(state: &SweepState) -> Vec<SweepState> {
    if !state.can_sweep_frame() {
        return Vec::new();
    }
    successors(state, EventKind::Frame)
}

pub(crate) fn successors(state: &SweepState, kind: EventKind) -> Vec<SweepState> {
    let mut out = Vec::new();
    for_each_assignment(state, kind, |slots| {
        if let Ok(next) = state.apply(kind, slots) {
            out.push(next);
        }
    });
    out
}

/// Calls `visit` with every slot assignment that passes the incremental
/// budget checks.
pub(crate) fn for_each_assignment(state: &SweepState, kind: EventKind, mut visit: impl FnMut(&[u8])) {
    let p = state.params();
    let k = p.k;
    let m = p.m;
    let meets = kind.meet_slots(k);
    let remaining_frames = k - state.frames_done();
    let remaining_working = p.n2 - state.work_k_done();
    let after = match kind {
        EventKind::Working => remaining_frames + remaining_working - 1,
        EventKind::Frame => remaining_frames - 1 + remaining_working,
    };
    let mut gen = Generator {
        state,
        kind,
        k,
        longest: p.longest as u8,
        n2: p.n2 as u8,
        after,
        meet_size: kind.meet_size(k),
        total_meet: meets * kind.meet_size(k),
        last: (2 * meets) as u8,
        slots: vec![0; m],
        slot_of: vec![0; m],
        slot_mask: vec![0; 2 * meets + 1],
        slot_count: vec![0; 2 * meets + 1],
        forced: vec![0; m],
        meet_assigned: 0,
    };
    gen.recurse(0, &mut visit);
}

struct Generator<'a> {
    state: &'a SweepState,
    kind: EventKind,
    k: usize,
    longest: u8,
    n2: u8,
    /// Events left after this one.
    after: usize,
    meet_size: usize,
    total_meet: usize,
    last: u8,
    slots: Vec<u8>,
    slot_of: Vec<u8>,
    slot_mask: Vec<u64>,
    slot_count: Vec<usize>,
    forced: Vec<u8>,
    meet_assigned: usize,
}

impl Generator<'_> {
    fn recurse(&mut self, pos: usize, visit: &mut impl FnMut(&[u8])) {
        let m = self.slots.len();
        if pos == m {
            if self.meet_assigned == self.total_meet {
                visit(&self.slots);
            }
            return;
        }
        let remaining_meet = self.total_meet - self.meet_assigned;
        if m - pos < remaining_meet {
            return;
        }
        if self.meet_assigned == self.total_meet {
            self.try_slot(pos, self.last, visit);
            return;
        }
        for s in 0..=self.last {
            let meet = s % 2 == 1;
            if meet {
                if self.slot_count[s as usize] == self.meet_size {
                    continue;
                }
            } else if self.meet_assigned == 0 && s != 0 || m - pos == remaining_meet {
                // Before the kernel only the untouched slot; no room for gaps
                // when every remaining line must meet.
                continue;
            }
            self.try_slot(pos, s, visit);
        }
    }

    fn fits(&self, line: usize, f2: u8, slot: u8) -> bool {
        let c = &self.state.counters()[line];
        let w2 = c.work_2 + f2;
        let meet = slot % 2 == 1;
        let frame_gap = !meet && self.kind == EventKind::Frame;
        let extra_seg = u8::from(frame_gap);
        let extra_wk = u8::from(meet && self.kind == EventKind::Working);
        if c.cur_segment + f2 + extra_seg > self.longest {
            return false;
        }
        if w2 + c.work_k + extra_wk > self.n2 || c.frame_2 + u8::from(frame_gap) + w2 > self.n2 {
            return false;
        }
        if meet && c.points() + 1 > self.k {
            return false;
        }
        let need = self.k - c.points() - usize::from(meet);
        need <= self.after
    }

    fn try_slot(&mut self, pos: usize, s: u8, visit: &mut impl FnMut(&[u8])) {
        let line = self.state.order()[pos] as usize;
        let crossed = self.state.crossed[line];
        let mut above = 0u64;
        for t in s as usize + 1..self.slot_mask.len() {
            above |= self.slot_mask[t];
        }
        if above & crossed != 0 {
            return;
        }
        let meet = s % 2 == 1;
        if meet && self.slot_mask[s as usize] & crossed != 0 {
            return;
        }
        if !meet && self.kind == EventKind::Frame && self.slot_count[s as usize] + 1 > self.longest as usize {
            return;
        }
        let f2 = above.count_ones() as u8;
        if !self.fits(line, f2, s) {
            return;
        }
        let mut bits = above;
        let mut ok = true;
        while bits != 0 {
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if !self.fits(x, self.forced[x] + 1, self.slot_of[x]) {
                ok = false;
                break;
            }
        }
        if !ok {
            return;
        }
        let mut bits = above;
        while bits != 0 {
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            self.forced[x] += 1;
        }
        self.forced[line] = f2;
        self.slots[pos] = s;
        self.slot_of[line] = s;
        self.slot_mask[s as usize] |= 1 << line;
        self.slot_count[s as usize] += 1;
        if meet {
            self.meet_assigned += 1;
        }

        self.recurse(pos + 1, visit);

        if meet {
            self.meet_assigned -= 1;
        }
        self.slot_count[s as usize] -= 1;
        self.slot_mask[s as usize] &= !(1 << line);
        self.forced[line] = 0;
        let mut bits = above;
        while bits != 0 {
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            self.forced[x] -= 1;
        }
    }
}
