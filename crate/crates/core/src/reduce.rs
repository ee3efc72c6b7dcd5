//! Reduction modulo combinatorial equivalence.
//!
//! Points are colored by their clique vectors in the collinearity graph and
//! lines by their coclique vectors (cliques of the dual). Colors are then
//! refined by the multiset of neighbor colors in the incidence graph until the
//! number of cells stops growing. Configurations are bucketed by the colors
//! of all levels; inside a bucket, isomorphism is decided by backtracking over
//! line images restricted to equal cells.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ReduceError;
use crate::incidence::{Configuration, ConfigurationRecord};

/// Clique counts of one element: entry `i` counts the `(i + 3)`-cliques
/// containing it.
pub type CliqueVector = Vec<u64>;

/// Per-point clique vectors of the collinearity graph, indexed by point.
/// Vectors run from 3-cliques up to the largest clique present.
pub fn clique_distribution(c: &Configuration) -> Vec<CliqueVector> {
    let n = c.n();
    assert!(n <= 128, "clique counting supports at most 128 points");
    let mut adj = vec![0u128; n];
    for line in c.lines() {
        for &p in line {
            for &q in line {
                if p != q {
                    adj[p] |= 1 << q;
                }
            }
        }
    }
    let mut counts: Vec<CliqueVector> = vec![Vec::new(); n];
    let mut clique = Vec::with_capacity(n);
    for p in 0..n {
        clique.push(p);
        extend_cliques(&adj, &mut clique, adj[p] & higher(p), &mut counts);
        clique.pop();
    }
    let width = counts.iter().map(Vec::len).max().unwrap_or(0);
    for v in &mut counts {
        v.resize(width, 0);
    }
    counts
}

/// Per-line coclique vectors: the clique distribution of the dual.
pub fn coclique_distribution(c: &Configuration) -> Vec<CliqueVector> {
    clique_distribution(&c.dualize())
}

fn higher(p: usize) -> u128 {
    if p >= 127 {
        0
    } else {
        !0u128 << (p + 1)
    }
}

fn extend_cliques(adj: &[u128], clique: &mut Vec<usize>, mut candidates: u128, counts: &mut [CliqueVector]) {
    while candidates != 0 {
        let q = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        clique.push(q);
        let j = clique.len();
        if j >= 3 {
            for &x in clique.iter() {
                let v = &mut counts[x];
                if v.len() < j - 2 {
                    v.resize(j - 2, 0);
                }
                v[j - 3] += 1;
            }
        }
        extend_cliques(adj, clique, candidates & adj[q], counts);
        clique.pop();
    }
}

/// Multiset form of a distribution: the vectors in sorted order.
pub fn as_multiset(mut vectors: Vec<CliqueVector>) -> Vec<CliqueVector> {
    vectors.sort();
    vectors
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Signature {
    Point(CliqueVector),
    Line(CliqueVector),
    Derived(u32, Vec<u32>),
}

/// Assigns small integer colors to signatures. Colors are comparable across
/// every configuration processed with the same interner.
#[derive(Debug, Default)]
pub struct Interner {
    ids: HashMap<Signature, u32>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    fn id(&mut self, sig: Signature) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(sig).or_insert(next)
    }
}

/// Colors of one refinement level: points `0..n`, then lines `n..2n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Level {
    pub colors: Vec<u32>,
}

impl Level {
    /// Number of cells of the partition of points and lines.
    pub fn cells(&self) -> usize {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    /// `(color, count)` pairs in color order.
    pub fn histogram(&self) -> Vec<(u32, u32)> {
        let mut h: BTreeMap<u32, u32> = BTreeMap::new();
        for &c in &self.colors {
            *h.entry(c).or_default() += 1;
        }
        h.into_iter().collect()
    }

    /// True when every cell of `self` lies inside one cell of `coarser`.
    pub fn refines(&self, coarser: &Level) -> bool {
        let mut image: HashMap<u32, u32> = HashMap::new();
        self.colors
            .iter()
            .zip(&coarser.colors)
            .all(|(&fine, &coarse)| *image.entry(fine).or_insert(coarse) == coarse)
    }
}

/// Level 0: clique vectors on points, coclique vectors on lines.
pub fn base_level(c: &Configuration, interner: &mut Interner) -> Level {
    let mut colors = Vec::with_capacity(2 * c.n());
    for v in clique_distribution(c) {
        colors.push(interner.id(Signature::Point(v)));
    }
    for v in coclique_distribution(c) {
        colors.push(interner.id(Signature::Line(v)));
    }
    Level { colors }
}

/// One derivative step: each point takes the multiset of the previous colors
/// of its lines, each line the multiset of the previous colors of its points.
/// The previous color is kept, so the new partition refines the old one.
pub fn derive(c: &Configuration, prev: &Level, interner: &mut Interner) -> Level {
    let n = c.n();
    let mut point_nbrs: Vec<Vec<u32>> = vec![Vec::with_capacity(c.k()); n];
    let mut line_nbrs: Vec<Vec<u32>> = vec![Vec::with_capacity(c.k()); n];
    for (l, line) in c.lines().iter().enumerate() {
        for &p in line {
            point_nbrs[p].push(prev.colors[n + l]);
            line_nbrs[l].push(prev.colors[p]);
        }
    }
    let mut colors = Vec::with_capacity(2 * n);
    for (i, mut nbrs) in point_nbrs.into_iter().chain(line_nbrs).enumerate() {
        nbrs.sort_unstable();
        colors.push(interner.id(Signature::Derived(prev.colors[i], nbrs)));
    }
    Level { colors }
}

/// All refinement levels up to stabilization (the last level is stable).
pub fn refinement_levels(c: &Configuration, interner: &mut Interner) -> Vec<Level> {
    let mut levels = vec![base_level(c, interner)];
    loop {
        let prev = levels.last().unwrap();
        let next = derive(c, prev, interner);
        if next.cells() == prev.cells() {
            return levels;
        }
        levels.push(next);
    }
}

/// Bucketing key: the color histogram of every refinement level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InvariantKey(pub Vec<Vec<(u32, u32)>>);

impl InvariantKey {
    pub fn from_levels(levels: &[Level]) -> Self {
        InvariantKey(levels.iter().map(Level::histogram).collect())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn prefix(&self, levels: usize) -> InvariantKey {
        InvariantKey(self.0[..levels.min(self.0.len())].to_vec())
    }
}

pub fn invariant_key(c: &Configuration, interner: &mut Interner) -> InvariantKey {
    InvariantKey::from_levels(&refinement_levels(c, interner))
}

/// Point and line bijections: `points[p]` and `lines[l]` are the images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Isomorphism {
    pub points: Vec<usize>,
    pub lines: Vec<usize>,
}

impl Isomorphism {
    /// True when the maps carry `from` exactly onto `to`.
    pub fn check(&self, from: &Configuration, to: &Configuration) -> bool {
        let mut seen_p = vec![false; from.n()];
        let mut seen_l = vec![false; from.n()];
        for (&p, &l) in self.points.iter().zip(&self.lines) {
            if p >= from.n() || l >= from.n() || seen_p[p] || seen_l[l] {
                return false;
            }
            seen_p[p] = true;
            seen_l[l] = true;
        }
        from.relabel(&self.points, &self.lines).lines() == to.lines()
    }
}

struct Incidence {
    n: usize,
    lines: Vec<Vec<usize>>,
    /// `meet[a * n + b]`: common point of lines a and b.
    meet: Vec<u16>,
}

const NONE: u16 = u16::MAX;

impl Incidence {
    fn new(c: &Configuration) -> Self {
        let n = c.n();
        let mut meet = vec![NONE; n * n];
        for (p, through) in c.point_lines().iter().enumerate() {
            for &a in through {
                for &b in through {
                    if a != b {
                        meet[a * n + b] = p as u16;
                    }
                }
            }
        }
        Incidence { n, lines: c.lines().to_vec(), meet }
    }
}

struct Search<'a> {
    a: &'a Incidence,
    b: &'a Incidence,
    colors_a: &'a [u32],
    colors_b: &'a [u32],
    order: Vec<usize>,
    line_map: Vec<usize>,
    line_used: Vec<bool>,
    point_map: Vec<u16>,
    point_inv: Vec<u16>,
    count_all: bool,
    found: u64,
    witness: Option<Isomorphism>,
}

impl Search<'_> {
    fn new<'a>(
        a: &'a Incidence,
        b: &'a Incidence,
        colors_a: &'a [u32],
        colors_b: &'a [u32],
        count_all: bool,
    ) -> Search<'a> {
        let n = a.n;
        let mut cell_size: HashMap<u32, usize> = HashMap::new();
        for &c in &colors_a[n..] {
            *cell_size.entry(c).or_default() += 1;
        }
        // Most constrained first: lines meeting many placed lines, then small cells.
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        let mut meets_placed = vec![0usize; n];
        for _ in 0..n {
            let next = (0..n)
                .filter(|&l| !placed[l])
                .min_by_key(|&l| (std::cmp::Reverse(meets_placed[l]), cell_size[&colors_a[n + l]], l))
                .unwrap();
            placed[next] = true;
            order.push(next);
            for (l, count) in meets_placed.iter_mut().enumerate() {
                if a.meet[next * n + l] != NONE {
                    *count += 1;
                }
            }
        }
        Search {
            a,
            b,
            colors_a,
            colors_b,
            order,
            line_map: vec![usize::MAX; n],
            line_used: vec![false; n],
            point_map: vec![NONE; n],
            point_inv: vec![NONE; n],
            count_all,
            found: 0,
            witness: None,
        }
    }

    /// Returns true to stop the search.
    fn run(&mut self, depth: usize) -> bool {
        let n = self.a.n;
        if depth == n {
            self.found += 1;
            if self.witness.is_none() {
                self.witness = Some(Isomorphism {
                    points: self.point_map.iter().map(|&p| p as usize).collect(),
                    lines: self.line_map.clone(),
                });
            }
            return !self.count_all;
        }
        let l = self.order[depth];
        let want = self.colors_a[n + l];
        let mut trail: Vec<usize> = Vec::with_capacity(self.a.lines[l].len());
        for l2 in 0..n {
            if self.line_used[l2] || self.colors_b[n + l2] != want {
                continue;
            }
            let mut ok = true;
            for &m in &self.order[..depth] {
                let m2 = self.line_map[m];
                let pa = self.a.meet[l * n + m];
                let pb = self.b.meet[l2 * n + m2];
                if (pa == NONE) != (pb == NONE) {
                    ok = false;
                    break;
                }
                if pa == NONE {
                    continue;
                }
                let (pa, pb) = (pa as usize, pb as usize);
                let mapped = self.point_map[pa];
                if mapped == NONE {
                    if self.point_inv[pb] != NONE || self.colors_a[pa] != self.colors_b[pb] {
                        ok = false;
                        break;
                    }
                    self.point_map[pa] = pb as u16;
                    self.point_inv[pb] = pa as u16;
                    trail.push(pa);
                } else if mapped as usize != pb {
                    ok = false;
                    break;
                }
            }
            if ok {
                self.line_map[l] = l2;
                self.line_used[l2] = true;
                let stop = self.run(depth + 1);
                self.line_used[l2] = false;
                self.line_map[l] = usize::MAX;
                if stop {
                    return true;
                }
            }
            for pa in trail.drain(..) {
                let pb = self.point_map[pa] as usize;
                self.point_map[pa] = NONE;
                self.point_inv[pb] = NONE;
            }
        }
        false
    }
}

fn same_shape(c1: &Configuration, c2: &Configuration) -> bool {
    c1.n() == c2.n() && c1.k() == c2.k()
}

/// Isomorphism search between configurations whose stable colors were
/// computed with one shared interner.
fn isomorphism_with(
    c1: &Configuration,
    c2: &Configuration,
    colors1: &[u32],
    colors2: &[u32],
) -> Option<Isomorphism> {
    let (a, b) = (Incidence::new(c1), Incidence::new(c2));
    let mut search = Search::new(&a, &b, colors1, colors2, false);
    search.run(0);
    search.witness
}

/// Point and line bijections carrying `c1` onto `c2`, if any.
pub fn are_isomorphic(c1: &Configuration, c2: &Configuration) -> Option<Isomorphism> {
    if !same_shape(c1, c2) {
        return None;
    }
    let mut interner = Interner::new();
    let l1 = refinement_levels(c1, &mut interner);
    let l2 = refinement_levels(c2, &mut interner);
    if InvariantKey::from_levels(&l1) != InvariantKey::from_levels(&l2) {
        return None;
    }
    let witness = isomorphism_with(c1, c2, &l1.last().unwrap().colors, &l2.last().unwrap().colors)?;
    debug_assert!(witness.check(c1, c2));
    Some(witness)
}

/// Number of incidence-preserving point/line bijection pairs of `c`.
pub fn automorphism_count(c: &Configuration) -> u64 {
    let mut interner = Interner::new();
    let levels = refinement_levels(c, &mut interner);
    let colors = &levels.last().unwrap().colors;
    let a = Incidence::new(c);
    let mut search = Search::new(&a, &a, colors, colors, true);
    search.run(0);
    search.found
}

/// A duality of `c`: an isomorphism from `c` onto its dual, if any.
pub fn self_duality(c: &Configuration) -> Option<Isomorphism> {
    are_isomorphic(c, &c.dualize())
}

pub fn is_self_dual(c: &Configuration) -> bool {
    self_duality(c).is_some()
}

/// One combinatorial equivalence class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceClass {
    /// Member with the smallest canonical serialization.
    pub representative: Configuration,
    pub members: usize,
    pub self_dual: bool,
}

/// JSONL form of an [`EquivalenceClass`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    #[serde(flatten)]
    pub config: ConfigurationRecord,
    pub members: usize,
    pub self_dual: bool,
}

impl EquivalenceClass {
    pub fn to_record(&self) -> ClassRecord {
        ClassRecord { config: self.representative.to_record(), members: self.members, self_dual: self.self_dual }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub buckets: usize,
    pub largest_bucket: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceReport {
    pub inputs: usize,
    /// Inputs left after collapsing identical canonical serializations.
    pub distinct: usize,
    pub levels: Vec<LevelStats>,
    pub buckets: usize,
    pub isomorphism_tests: usize,
    pub classes: usize,
    pub self_dual: usize,
}

/// Classes and statistics of a reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub classes: Vec<EquivalenceClass>,
    pub report: ReduceReport,
}

/// Reduces configurations modulo combinatorial equivalence.
pub fn reduce_all<I>(configs: I) -> Result<Reduction, ReduceError>
where
    I: IntoIterator<Item = Configuration>,
{
    reduce_with_jobs(configs, 1)
}

/// [`reduce_all`] with bucket-level parallelism on `jobs` workers (0: all cores).
pub fn reduce_with_jobs<I>(configs: I, jobs: usize) -> Result<Reduction, ReduceError>
where
    I: IntoIterator<Item = Configuration>,
{
    let mut inputs = 0;
    let mut shape: Option<(usize, usize)> = None;
    // Exact pre-pass: identical canonical forms collapse before any search.
    let mut distinct: BTreeMap<Configuration, usize> = BTreeMap::new();
    for c in configs {
        inputs += 1;
        match shape {
            None => shape = Some((c.n(), c.k())),
            Some((n, k)) if (n, k) != (c.n(), c.k()) => {
                return Err(ReduceError::MixedParameters { n, k, found_n: c.n(), found_k: c.k() })
            }
            _ => {}
        }
        *distinct.entry(c.canonical()).or_default() += 1;
    }

    let mut interner = Interner::new();
    let mut buckets: BTreeMap<InvariantKey, Vec<(Configuration, usize, Vec<u32>)>> = BTreeMap::new();
    for (c, count) in distinct.iter() {
        let levels = refinement_levels(c, &mut interner);
        let key = InvariantKey::from_levels(&levels);
        let colors = levels.last().expect("at least one level").colors.clone();
        buckets.entry(key).or_default().push((c.clone(), *count, colors));
    }

    let depth = buckets.keys().map(InvariantKey::depth).max().unwrap_or(0);
    let mut levels = Vec::with_capacity(depth);
    for level in 0..depth {
        let mut sizes: BTreeMap<InvariantKey, usize> = BTreeMap::new();
        for (key, members) in &buckets {
            *sizes.entry(key.prefix(level + 1)).or_default() += members.len();
        }
        levels.push(LevelStats {
            level,
            buckets: sizes.len(),
            largest_bucket: sizes.values().copied().max().unwrap_or(0),
        });
    }

    let bucket_list: Vec<_> = buckets.into_values().collect();
    let work = || -> Vec<(Vec<EquivalenceClass>, usize)> { bucket_list.par_iter().map(|b| classify(b)).collect() };
    let results = if jobs == 1 {
        bucket_list.iter().map(|b| classify(b)).collect()
    } else {
        let jobs = if jobs == 0 { rayon::current_num_threads() } else { jobs };
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("worker pool").install(work)
    };

    let mut classes = Vec::new();
    let mut tests = 0;
    for (found, t) in results {
        classes.extend(found);
        tests += t;
    }
    classes.sort_by(|a, b| a.representative.cmp(&b.representative));
    let report = ReduceReport {
        inputs,
        distinct: distinct.len(),
        levels,
        buckets: bucket_list.len(),
        isomorphism_tests: tests,
        classes: classes.len(),
        self_dual: classes.iter().filter(|c| c.self_dual).count(),
    };
    Ok(Reduction { classes, report })
}

/// Pairwise merging inside one bucket; members arrive in canonical order, so
/// the first member of each class is its representative.
fn classify(bucket: &[(Configuration, usize, Vec<u32>)]) -> (Vec<EquivalenceClass>, usize) {
    let mut pivots: Vec<usize> = Vec::new();
    let mut members: Vec<usize> = Vec::new();
    let mut tests = 0;
    for (i, (c, count, colors)) in bucket.iter().enumerate() {
        let mut merged = false;
        for (class, &p) in pivots.iter().enumerate() {
            tests += 1;
            let (pc, _, pcolors) = &bucket[p];
            if isomorphism_with(c, pc, colors, pcolors).is_some() {
                members[class] += count;
                merged = true;
                break;
            }
        }
        if !merged {
            pivots.push(i);
            members.push(*count);
        }
    }
    let classes = pivots
        .iter()
        .zip(members)
        .map(|(&p, members)| {
            let representative = bucket[p].0.clone();
            let self_dual = is_self_dual(&representative);
            EquivalenceClass { representative, members, self_dual }
        })
        .collect();
    (classes, tests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fano_cliques() {
        let g = clique_distribution(&fixtures::fano());
        // Every pair is collinear: the graph is K7.
        assert!(g.iter().all(|v| v[0] == 15));
        assert_eq!(g[0].len(), 5);
        let total3: u64 = g.iter().map(|v| v[0]).sum::<u64>() / 3;
        assert_eq!(total3, 35);
        assert!(coclique_distribution(&fixtures::fano()).iter().all(|v| v[0] == 15));
    }

    #[test]
    fn coclique_is_dual_clique() {
        for c in [fixtures::pappus(), fixtures::config_17_4(), fixtures::second_18_4()] {
            assert_eq!(coclique_distribution(&c), clique_distribution(&c.dualize()));
        }
    }

    #[test]
    fn fano_automorphisms() {
        assert_eq!(automorphism_count(&fixtures::fano()), 168);
        assert!(is_self_dual(&fixtures::fano()));
    }

    #[test]
    fn fano_refinement_constant() {
        let mut interner = Interner::new();
        for level in refinement_levels(&fixtures::fano(), &mut interner) {
            assert_eq!(level.cells(), 2);
        }
    }

    #[test]
    fn discrete_level_is_fixed() {
        let c = fixtures::second_18_4();
        let mut interner = Interner::new();
        let levels = refinement_levels(&c, &mut interner);
        let last = levels.last().unwrap();
        let next = derive(&c, last, &mut interner);
        assert_eq!(next.cells(), last.cells());
        assert!(next.refines(last) && last.refines(&next));
    }

    #[test]
    fn figure_tables() {
        assert_eq!(automorphism_count(&fixtures::first_18_4()), 24);
        assert_eq!(automorphism_count(&fixtures::second_18_4()), 2);
        assert!(is_self_dual(&fixtures::first_18_4()));
        assert!(is_self_dual(&fixtures::second_18_4()));
        assert!(is_self_dual(&fixtures::config_17_4()));
    }

    #[test]
    fn non_isomorphic_pairs() {
        assert!(are_isomorphic(&fixtures::first_18_4(), &fixtures::second_18_4()).is_none());
        assert!(are_isomorphic(&fixtures::fano(), &fixtures::mobius_kantor()).is_none());
    }

    #[test]
    fn mixed_parameters_rejected() {
        let err = reduce_all([fixtures::fano(), fixtures::pappus()]).unwrap_err();
        assert!(matches!(err, ReduceError::MixedParameters { .. }));
    }

    #[test]
    fn identical_inputs_collapse() {
        let r = reduce_all(vec![fixtures::pappus(); 3]).unwrap();
        assert_eq!(r.report.distinct, 1);
        assert_eq!(r.report.isomorphism_tests, 0);
        assert_eq!(r.classes.len(), 1);
        assert_eq!(r.classes[0].members, 3);
    }
}
