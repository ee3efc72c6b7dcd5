//! Slow reference implementations used to cross-check the fast engines.
//!
//! Nothing here shares code with `sweep` or `reduce`: enumeration is plain
//! lexicographic backtracking over line sets, isomorphism is exhaustive search
//! over point bijections, and sweep histories are replayed on an explicit
//! wire simulator.

use std::collections::HashSet;

use num::{BigInt, BigRational, Zero};
use crate::error::OracleError;
use crate::incidence::{two_crossings_per_line, Configuration};
use crate::partitions::{dihedral_max, PartitionTable};
use crate::sweep::Event;

/// Parameter ranges the exhaustive enumerator accepts.
pub fn oracle_supports(n: usize, k: usize) -> bool {
    match k {
        3 => n <= 10,
        4 => n <= 14,
        _ => false,
    }
}

/// One configuration per isomorphism class of combinatorial `(n_k)`s.
pub fn enumerate_combinatorial(n: usize, k: usize) -> Result<Vec<Configuration>, OracleError> {
    if !oracle_supports(n, k) {
        return Err(OracleError::BudgetExceeded { n, k });
    }
    if n < k * (k - 1) + 1 {
        return Ok(Vec::new());
    }
    // Point 0 lies on {0, 1..k}, {0, k..2k-1}, ...: every structure has a
    // relabeling of this shape.
    let mut lines: Vec<Vec<usize>> = (0..k).map(|i| {
        let mut l = vec![0];
        l.extend(1 + i * (k - 1)..1 + (i + 1) * (k - 1));
        l
    }).collect();
    let mut degree = vec![0usize; n];
    let mut collinear = vec![vec![false; n]; n];
    for line in &lines {
        add_line(line, &mut degree, &mut collinear, true);
    }
    let mut reps: Vec<Configuration> = Vec::new();
    let mut search = OracleSearch { n, k, degree, collinear, reps: &mut reps };
    search.extend(&mut lines);
    Ok(reps)
}

fn add_line(line: &[usize], degree: &mut [usize], collinear: &mut [Vec<bool>], on: bool) {
    for &p in line {
        if on {
            degree[p] += 1;
        } else {
            degree[p] -= 1;
        }
        for &q in line {
            if p != q {
                collinear[p][q] = on;
            }
        }
    }
}

struct OracleSearch<'a> {
    n: usize,
    k: usize,
    degree: Vec<usize>,
    collinear: Vec<Vec<bool>>,
    reps: &'a mut Vec<Configuration>,
}

impl OracleSearch<'_> {
    fn extend(&mut self, lines: &mut Vec<Vec<usize>>) {
        let Some(p) = (0..self.n).find(|&p| self.degree[p] < self.k) else {
            if let Ok(c) = Configuration::new(self.n, self.k, lines.clone()) {
                if c.verify().is_valid() && !self.reps.iter().any(|r| exhaustive_isomorphism(r, &c).is_some()) {
                    self.reps.push(c);
                }
            }
            return;
        };
        let mut line = vec![p];
        let last = lines.last().cloned();
        self.choose(lines, &mut line, p + 1, last.as_deref());
    }

    fn choose(&mut self, lines: &mut Vec<Vec<usize>>, line: &mut Vec<usize>, from: usize, last: Option<&[usize]>) {
        if line.len() == self.k {
            // Lines with the same smallest point appear in lexicographic order.
            if let Some(prev) = last {
                if prev[0] == line[0] && prev >= line.as_slice() {
                    return;
                }
            }
            add_line(line, &mut self.degree, &mut self.collinear, true);
            lines.push(line.clone());
            self.extend(lines);
            lines.pop();
            add_line(line, &mut self.degree, &mut self.collinear, false);
            return;
        }
        for q in from..self.n {
            if self.degree[q] >= self.k || line.iter().any(|&x| self.collinear[x][q]) {
                continue;
            }
            line.push(q);
            self.choose(lines, line, q + 1, last);
            line.pop();
        }
    }
}

fn line_masks(c: &Configuration) -> Vec<u128> {
    c.lines().iter().map(|l| l.iter().fold(0u128, |m, &p| m | 1 << p)).collect()
}

/// Exhaustive search for a point bijection carrying the lines of `a` onto
/// the lines of `b`. Returns `map[p]`, the image of point `p`.
pub fn exhaustive_isomorphism(a: &Configuration, b: &Configuration) -> Option<Vec<usize>> {
    let mut first = None;
    point_bijections(a, b, &mut |map| {
        first = Some(map.to_vec());
        true
    });
    first
}

/// Number of point bijections of `c` onto itself preserving lines.
pub fn exhaustive_automorphism_count(c: &Configuration) -> u64 {
    let mut count = 0;
    point_bijections(c, c, &mut |_| {
        count += 1;
        false
    });
    count
}

fn point_bijections(a: &Configuration, b: &Configuration, visit: &mut impl FnMut(&[usize]) -> bool) {
    if a.n() != b.n() || a.k() != b.k() || a.n() > 128 {
        return;
    }
    let n = a.n();
    let targets: HashSet<u128> = line_masks(b).into_iter().collect();
    // Lines of `a` grouped by their largest point: checked once that point is mapped.
    let mut closing: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for line in a.lines() {
        closing[*line.iter().max().unwrap()].push(line.clone());
    }
    let col_a = collinearity(a);
    let col_b = collinearity(b);
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        p: usize,
        n: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        col_a: &[Vec<bool>],
        col_b: &[Vec<bool>],
        closing: &[Vec<Vec<usize>>],
        targets: &HashSet<u128>,
        visit: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if p == n {
            return visit(map);
        }
        for q in 0..n {
            if used[q] || (0..p).any(|x| col_a[p][x] != col_b[q][map[x]]) {
                continue;
            }
            map[p] = q;
            let ok = closing[p].iter().all(|line| targets.contains(&line.iter().fold(0u128, |m, &x| m | 1 << map[x])));
            if ok {
                used[q] = true;
                let stop = rec(p + 1, n, map, used, col_a, col_b, closing, targets, visit);
                used[q] = false;
                if stop {
                    return true;
                }
            }
            map[p] = usize::MAX;
        }
        false
    }
    rec(0, n, &mut map, &mut used, &col_a, &col_b, &closing, &targets, visit);
}

fn collinearity(c: &Configuration) -> Vec<Vec<bool>> {
    let mut col = vec![vec![false; c.n()]; c.n()];
    for line in c.lines() {
        for &p in line {
            for &q in line {
                if p != q {
                    col[p][q] = true;
                }
            }
        }
    }
    col
}

/// Homogeneous coordinates over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homogeneous(pub [BigRational; 3]);

pub type RationalPoint = Homogeneous;
pub type RationalLine = Homogeneous;

impl Homogeneous {
    pub fn from_ints(x: i64, y: i64, z: i64) -> Self {
        Homogeneous([x, y, z].map(|v| BigRational::from_integer(BigInt::from(v))))
    }

    /// Parses three rationals written as `a` or `a/b`.
    pub fn parse<S: AsRef<str>>(coords: &[S]) -> Option<Self> {
        if coords.len() != 3 {
            return None;
        }
        let mut out: [BigRational; 3] = Default::default();
        for (slot, text) in out.iter_mut().zip(coords) {
            *slot = text.as_ref().trim().parse().ok()?;
        }
        Some(Homogeneous(out))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &Homogeneous) -> BigRational {
        let [a, b, c] = &self.0;
        let [x, y, z] = &other.0;
        a * x + b * y + c * z
    }

    /// Cross product: the line through two points, or the meet of two lines.
    pub fn cross(&self, other: &Homogeneous) -> Homogeneous {
        let [a, b, c] = &self.0;
        let [x, y, z] = &other.0;
        Homogeneous([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    pub fn scale(&self, s: &BigRational) -> Homogeneous {
        Homogeneous(self.0.clone().map(|v| v * s))
    }

    /// Same projective point (or line) as `other`.
    pub fn same_as(&self, other: &Homogeneous) -> bool {
        self.cross(other).is_zero()
    }
}

/// True iff point `i` lies on line `j` exactly when `c` says so, and all
/// points and all lines are pairwise distinct.
pub fn verify_realization(
    points: &[RationalPoint],
    lines: &[RationalLine],
    c: &Configuration,
) -> Result<bool, OracleError> {
    let n = c.n();
    for found in [points.len(), lines.len()] {
        if found != n {
            return Err(OracleError::VectorCount { expected: n, found });
        }
    }
    if let Some(i) = points.iter().chain(lines).position(Homogeneous::is_zero) {
        return Err(OracleError::ZeroVector(i));
    }
    let incidence = c.incidence_matrix();
    for (j, line) in lines.iter().enumerate() {
        for (i, point) in points.iter().enumerate() {
            if point.dot(line).is_zero() != incidence[j][i] {
                return Ok(false);
            }
        }
    }
    for set in [points, lines] {
        for i in 0..n {
            for j in i + 1..n {
                if set[i].same_as(&set[j]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Replays a sweep history on an explicit wire model and returns the
/// configuration it describes.
pub fn naive_sweep_check(history: &[Event], n: usize, k: usize) -> Result<Configuration, OracleError> {
    let mut sim = Wires::new(n, k, history.first())?;
    for (index, event) in history.iter().enumerate().skip(1) {
        let fail = |reason: String| OracleError::ReplayMismatch { index, reason };
        match event {
            Event::BaseInit { .. } => return Err(fail("second base-line event".into())),
            Event::WorkingK { chosen, left, right } => {
                if chosen.len() != k {
                    return Err(fail(format!("{} lines at a working point", chosen.len())));
                }
                let slots = [(ids(left), false), (ids(chosen), true), (ids(right), false)];
                sim.event(&slots, false).map_err(fail)?;
            }
            Event::FrameSweep { groups, gaps } => {
                if groups.len() != k - 1 || gaps.len() != k || groups.iter().any(|g| g.len() != k - 1) {
                    return Err(fail("frame sweep shape".into()));
                }
                let mut slots = Vec::new();
                for (j, gap) in gaps.iter().enumerate() {
                    slots.push((ids(gap), false));
                    if j < groups.len() {
                        slots.push((ids(&groups[j]), true));
                    }
                }
                sim.event(&slots, true).map_err(fail)?;
            }
            Event::Close { closing } => {
                if index + 1 != history.len() {
                    return Err(fail("closing event before the end".into()));
                }
                return sim.close(closing).map_err(fail);
            }
        }
    }
    Err(OracleError::ReplayMismatch { index: history.len(), reason: "history has no closing event".into() })
}

fn ids(v: &[u8]) -> Vec<usize> {
    v.iter().map(|&x| x as usize).collect()
}

struct Wire {
    points: usize,
    frame_2: usize,
    work_2: usize,
    work_k: usize,
    /// Segment lengths; the last one is still open.
    segments: Vec<usize>,
    /// The first segment continues the wrap-around segment.
    wraps: bool,
}

struct Wires {
    n: usize,
    k: usize,
    m: usize,
    n2: usize,
    longest: usize,
    lambda: Vec<usize>,
    table: PartitionTable,
    order: Vec<usize>,
    above_base: Vec<usize>,
    crossed: Vec<Vec<bool>>,
    wires: Vec<Wire>,
    /// Lines through each point after the base point; frame lines are `m + f`.
    points: Vec<Vec<usize>>,
    frame_gaps: Vec<Vec<usize>>,
    frames: usize,
    work_points: usize,
    work_2_total: usize,
}

impl Wires {
    fn new(n: usize, k: usize, first: Option<&Event>) -> Result<Self, OracleError> {
        let fail = |reason: &str| OracleError::ReplayMismatch { index: 0, reason: reason.into() };
        let Some(Event::BaseInit { lambda }) = first else {
            return Err(fail("history must start with the base line"));
        };
        let lambda = lambda.0.clone();
        let n2 = two_crossings_per_line(n, k).ok_or_else(|| fail("no working k-crossings"))?;
        if lambda.len() != k || lambda.iter().sum::<usize>() != n2 || dihedral_max(&lambda).0 != lambda {
            return Err(fail("base-line tuple is not a table entry"));
        }
        let m = n - k;
        let mut wires = Vec::with_capacity(m);
        let mut above_base = Vec::with_capacity(m);
        let mut points = Vec::new();
        let mut crossed = vec![vec![false; m]; m];
        for (i, &run) in lambda.iter().enumerate() {
            if i > 0 {
                let group: Vec<usize> = (wires.len()..wires.len() + k - 1).collect();
                for &a in &group {
                    for &b in &group {
                        crossed[a][b] = a != b;
                    }
                    wires.push(Wire { points: 1, frame_2: 0, work_2: 0, work_k: 0, segments: vec![0], wraps: false });
                }
                above_base.extend(group.iter().rev());
                let mut through = group;
                through.push(m);
                points.push(through);
            }
            for _ in 0..run {
                above_base.push(wires.len());
                wires.push(Wire { points: 0, frame_2: 1, work_2: 0, work_k: 0, segments: vec![1], wraps: true });
            }
        }
        Ok(Wires {
            n,
            k,
            m,
            n2,
            longest: lambda[0],
            table: PartitionTable::new(n, k).map_err(|e| fail(&e.to_string()))?,
            lambda,
            order: (0..m).collect(),
            above_base,
            crossed,
            wires,
            points,
            frame_gaps: Vec::new(),
            frames: 1,
            work_points: 0,
            work_2_total: 0,
        })
    }

    /// `slots` lists the kernel lines left to right on the new sweep line,
    /// flagged when they meet at a point (and so reverse).
    fn event(&mut self, slots: &[(Vec<usize>, bool)], frame: bool) -> Result<(), String> {
        let m = self.m;
        let meets: Vec<&Vec<usize>> = slots.iter().filter(|s| s.1).map(|s| &s.0).collect();
        if frame && self.frames >= self.k {
            return Err("more than k frame pseudolines".into());
        }
        if !frame && self.work_points >= self.n2 {
            return Err("more working points than available".into());
        }
        let mut listed = vec![false; m];
        for &l in slots.iter().flat_map(|s| &s.0) {
            if l >= m || listed[l] {
                return Err(format!("line {l} listed twice or out of range"));
            }
            listed[l] = true;
        }
        let pos: Vec<usize> = {
            let mut pos = vec![0; m];
            for (i, &l) in self.order.iter().enumerate() {
                pos[l] = i;
            }
            pos
        };
        let meeting: Vec<usize> = meets.iter().flat_map(|g| g.iter()).copied().collect();
        let lo = meeting.iter().map(|&l| pos[l]).min().unwrap();
        let hi = meeting.iter().map(|&l| pos[l]).max().unwrap();
        if (lo..=hi).any(|i| !listed[self.order[i]]) || (0..m).any(|l| listed[l] && !(lo..=hi).contains(&pos[l])) {
            return Err("listed lines are not exactly the kernel".into());
        }
        let mut new_order: Vec<usize> = self.order[..lo].to_vec();
        let mut gap_sizes = Vec::new();
        for (slot, meet) in slots {
            let mut lines = slot.clone();
            lines.sort_by_key(|&l| pos[l]);
            if *meet {
                lines.reverse();
            } else {
                gap_sizes.push(lines.len());
            }
            new_order.extend(lines);
        }
        new_order.extend(&self.order[hi + 1..]);
        let mut new_pos = vec![0; m];
        for (i, &l) in new_order.iter().enumerate() {
            new_pos[l] = i;
        }
        let same_meet = |a: usize, b: usize| meets.iter().any(|g| g.contains(&a) && g.contains(&b));
        for a in 0..m {
            for b in 0..m {
                if pos[a] < pos[b] && new_pos[a] > new_pos[b] {
                    if self.crossed[a][b] {
                        return Err(format!("lines {a} and {b} cross twice"));
                    }
                    self.crossed[a][b] = true;
                    self.crossed[b][a] = true;
                    if !same_meet(a, b) {
                        for l in [a, b] {
                            self.wires[l].work_2 += 1;
                            *self.wires[l].segments.last_mut().unwrap() += 1;
                        }
                        self.work_2_total += 1;
                    }
                }
            }
        }
        for group in meets {
            let mut through = (*group).clone();
            if frame {
                through.push(m + self.frames);
            }
            self.points.push(through);
        }
        for l in 0..m {
            let w = &mut self.wires[l];
            if meeting.contains(&l) {
                w.points += 1;
                if !frame {
                    w.work_k += 1;
                }
                w.segments.push(0);
            } else if frame {
                w.frame_2 += 1;
                *w.segments.last_mut().unwrap() += 1;
            }
        }
        if frame {
            // Lines outside the kernel cross the frame line in the outer gaps.
            let last = gap_sizes.len() - 1;
            gap_sizes[0] += lo;
            gap_sizes[last] += m - 1 - hi;
            self.frame_gaps.push(gap_sizes);
            self.frames += 1;
        } else {
            self.work_points += 1;
        }
        self.order = new_order;
        self.check_budgets()
    }

    fn check_budgets(&self) -> Result<(), String> {
        for (l, w) in self.wires.iter().enumerate() {
            if w.points > self.k {
                return Err(format!("line {l} has more than k points"));
            }
            if w.work_k + w.work_2 > self.n2 || w.frame_2 + w.work_2 > self.n2 {
                return Err(format!("line {l} exceeds its 2-crossing budget"));
            }
            if w.segments.iter().any(|&s| s > self.longest) {
                return Err(format!("line {l} has a segment longer than the base line allows"));
            }
        }
        if self.work_2_total > (self.n - 2 * self.k) * self.n2 / 2 {
            return Err("working 2-crossing total exceeded".into());
        }
        Ok(())
    }

    fn close(mut self, closing: &[u8]) -> Result<Configuration, String> {
        let m = self.m;
        if self.frames != self.k || self.work_points != self.n2 {
            return Err("closing before every frame line and working point is swept".into());
        }
        if closing.len() != m {
            return Err("closing counts have the wrong length".into());
        }
        // Back at the base line from below: the order must become the reverse
        // of the order just above it.
        let mut target = vec![0; m];
        for (i, &l) in self.above_base.iter().rev().enumerate() {
            target[l] = i;
        }
        let mut closing_count = vec![0usize; m];
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (self.order[i], self.order[j]);
                let inverted = target[a] > target[b];
                if inverted == self.crossed[a][b] {
                    return Err(format!("pair {a},{b} cannot cross exactly once"));
                }
                if inverted {
                    closing_count[a] += 1;
                    closing_count[b] += 1;
                }
            }
        }
        let rank = self.table.rank(&self.lambda).map_err(|e| e.to_string())?;
        let mut distributions = self.frame_gaps.clone();
        for (l, w) in self.wires.iter_mut().enumerate() {
            if closing_count[l] != closing[l] as usize {
                return Err(format!("line {l} closes with {} crossings, history says {}", closing_count[l], closing[l]));
            }
            w.work_2 += closing_count[l];
            *w.segments.last_mut().unwrap() += closing_count[l];
            if w.points != self.k || w.frame_2 + w.work_2 != self.n2 {
                return Err(format!("line {l} does not have k points and the right 2-crossings"));
            }
            let mut dist = w.segments.clone();
            let tail = dist.pop().unwrap();
            if w.wraps {
                dist[0] += tail;
            } else {
                dist.push(tail);
            }
            distributions.push(dist);
        }
        for d in &distributions {
            if d.iter().any(|&s| s > self.longest) {
                return Err("segment longer than the base line allows".into());
            }
            match self.table.rank(d) {
                Ok(r) if r >= rank => {}
                _ => return Err(format!("distribution {d:?} precedes the base line")),
            }
        }
        let mut lines = vec![Vec::new(); self.n];
        for f in 0..self.k {
            lines[m + f].push(0);
        }
        for (i, through) in self.points.iter().enumerate() {
            for &l in through {
                lines[l].push(i + 1);
            }
        }
        Configuration::new(self.n, self.k, lines).map_err(|e| e.to_string())
    }
}
