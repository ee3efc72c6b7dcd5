//! Combinatorial point-line configurations.
//!
//! A [`Configuration`] is `n` points and `n` lines where every line carries `k`
//! points, every point lies on `k` lines, two lines share at most one point and
//! the point-line incidence graph is connected. Points and lines are plain
//! indices in `0..n`; string labels only exist at the ingestion boundary.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::IncidenceError;

/// A violated configuration invariant, as reported by [`Configuration::verify`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    LineCount { expected: usize, found: usize },
    LineSize { line: usize, size: usize },
    PointOutOfRange { line: usize, point: usize },
    DuplicatePointInLine { line: usize, point: usize },
    Regularity { point: usize, degree: usize },
    SharedPair { first: usize, second: usize },
    Disconnected,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LineCount { expected, found } => {
                write!(f, "expected {expected} lines, found {found}")
            }
            Violation::LineSize { line, size } => write!(f, "line {line} has {size} points"),
            Violation::PointOutOfRange { line, point } => {
                write!(f, "line {line} references point {point} out of range")
            }
            Violation::DuplicatePointInLine { line, point } => {
                write!(f, "line {line} lists point {point} twice")
            }
            Violation::Regularity { point, degree } => {
                write!(f, "point {point} lies on {degree} lines")
            }
            Violation::SharedPair { first, second } => {
                write!(f, "lines {first} and {second} share more than one point")
            }
            Violation::Disconnected => write!(f, "incidence graph is disconnected"),
        }
    }
}

/// Outcome of [`Configuration::verify`]: invariant violations plus the derived
/// 2-crossing counts of a simple topological realization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    pub k: usize,
    pub violations: Vec<Violation>,
    /// 2-crossings on every pseudoline, `n - 1 - k(k-1)`; `None` when negative.
    pub two_crossings_per_line: Option<usize>,
    /// Total 2-crossings, `n (n - 1 - k(k-1)) / 2`.
    pub two_crossings_total: Option<usize>,
}

impl VerifyReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-line 2-crossing count `n - 1 - k(k-1)` of a simple topological (n_k).
pub fn two_crossings_per_line(n: usize, k: usize) -> Option<usize> {
    (n + k).checked_sub(1 + k * k)
}

/// A validated (n_k) configuration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    n: usize,
    k: usize,
    lines: Vec<Vec<usize>>,
}

/// Serialized JSONL form: `{"n":..,"k":..,"lines":[[..],..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationRecord {
    pub n: usize,
    pub k: usize,
    pub lines: Vec<Vec<usize>>,
}

impl Configuration {
    /// Builds a configuration from index lists, sorting each line and checking
    /// every invariant.
    pub fn new(n: usize, k: usize, lines: Vec<Vec<usize>>) -> Result<Self, IncidenceError> {
        let mut lines = lines;
        for line in &mut lines {
            line.sort_unstable();
        }
        let violations = check(n, k, &lines);
        if let Some(v) = violations.into_iter().next() {
            return Err(IncidenceError::from(v));
        }
        Ok(Configuration { n, k, lines })
    }

    /// Ingests rows of labels; labels become indices in first-appearance order.
    pub fn from_line_table<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self, IncidenceError> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut lines = Vec::with_capacity(n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(IncidenceError::RowLength { row: r, expected: k, found: row.len() });
            }
            let mut line = Vec::with_capacity(k);
            for label in row {
                let next = index.len();
                let id = *index.entry(label.as_ref()).or_insert(next);
                if line.contains(&id) {
                    return Err(IncidenceError::DuplicatePointInLine { line: r, point: id });
                }
                line.push(id);
            }
            lines.push(line);
        }
        if index.len() != n {
            return Err(IncidenceError::PointCount { lines: n, points: index.len() });
        }
        Configuration::new(n, k, lines)
    }

    /// Parses the plain-text table format: one line per row, whitespace
    /// separated labels. Blank lines and `#` comments are skipped.
    pub fn parse_table(text: &str) -> Result<Self, IncidenceError> {
        let rows: Vec<Vec<&str>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split_whitespace().collect())
            .collect();
        Configuration::from_line_table(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lines(&self) -> &[Vec<usize>] {
        &self.lines
    }

    /// Lines through each point, in ascending line order.
    pub fn point_lines(&self) -> Vec<Vec<usize>> {
        let mut through = vec![Vec::with_capacity(self.k); self.n];
        for (l, line) in self.lines.iter().enumerate() {
            for &p in line {
                through[p].push(l);
            }
        }
        through
    }

    /// Point-line incidence matrix, `m[line][point]`.
    pub fn incidence_matrix(&self) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; self.n]; self.n];
        for (l, line) in self.lines.iter().enumerate() {
            for &p in line {
                m[l][p] = true;
            }
        }
        m
    }

    /// Point `i` of the dual is line `i` of `self`; line `j` of the dual is the
    /// set of lines through point `j`.
    pub fn dualize(&self) -> Configuration {
        Configuration { n: self.n, k: self.k, lines: self.point_lines() }
    }

    /// Applies a point relabeling `points[old] = new` and a line permutation
    /// `lines[old] = new`.
    pub fn relabel(&self, points: &[usize], lines: &[usize]) -> Configuration {
        let mut out = vec![Vec::new(); self.n];
        for (l, line) in self.lines.iter().enumerate() {
            let mut mapped: Vec<usize> = line.iter().map(|&p| points[p]).collect();
            mapped.sort_unstable();
            out[lines[l]] = mapped;
        }
        Configuration { n: self.n, k: self.k, lines: out }
    }

    /// Checks every invariant and reports derived crossing counts.
    pub fn verify(&self) -> VerifyReport {
        verify_lines(self.n, self.k, &self.lines)
    }

    /// Normal form used for serialization: lines sorted by their sorted point
    /// lists, points renumbered by first appearance in that order, repeated
    /// until the labeling is stable.
    pub fn canonical(&self) -> Configuration {
        let mut lines = self.lines.clone();
        for line in &mut lines {
            line.sort_unstable();
        }
        lines.sort();
        for _ in 0..=4 * self.n {
            let mut label = vec![usize::MAX; self.n];
            let mut next = 0;
            for line in &lines {
                for &p in line {
                    if label[p] == usize::MAX {
                        label[p] = next;
                        next += 1;
                    }
                }
            }
            let mut relabeled: Vec<Vec<usize>> = lines
                .iter()
                .map(|line| {
                    let mut l: Vec<usize> = line.iter().map(|&p| label[p]).collect();
                    l.sort_unstable();
                    l
                })
                .collect();
            relabeled.sort();
            if relabeled == lines {
                break;
            }
            lines = relabeled;
        }
        Configuration { n: self.n, k: self.k, lines }
    }

    pub fn to_record(&self) -> ConfigurationRecord {
        let c = self.canonical();
        ConfigurationRecord { n: c.n, k: c.k, lines: c.lines }
    }

    pub fn from_record(record: &ConfigurationRecord) -> Result<Self, IncidenceError> {
        Configuration::new(record.n, record.k, record.lines.clone())
    }

    /// Canonical JSONL line (no trailing newline).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("record serializes")
    }

    /// Renders the table format with labels `P0, P1, ...`.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            let row: Vec<String> = line.iter().map(|p| format!("P{p}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// Verifies raw line lists without constructing a [`Configuration`].
pub fn verify_lines(n: usize, k: usize, lines: &[Vec<usize>]) -> VerifyReport {
    let per_line = two_crossings_per_line(n, k);
    VerifyReport {
        n,
        k,
        violations: check(n, k, lines),
        two_crossings_per_line: per_line,
        two_crossings_total: per_line.map(|m| n * m / 2),
    }
}

fn check(n: usize, k: usize, lines: &[Vec<usize>]) -> Vec<Violation> {
    let mut out = Vec::new();
    if lines.len() != n {
        out.push(Violation::LineCount { expected: n, found: lines.len() });
    }
    let mut degree = vec![0usize; n];
    let mut sane = vec![true; lines.len()];
    for (l, line) in lines.iter().enumerate() {
        if line.len() != k {
            out.push(Violation::LineSize { line: l, size: line.len() });
        }
        let mut seen = Vec::with_capacity(line.len());
        for &p in line {
            if p >= n {
                out.push(Violation::PointOutOfRange { line: l, point: p });
                sane[l] = false;
                continue;
            }
            if seen.contains(&p) {
                out.push(Violation::DuplicatePointInLine { line: l, point: p });
                sane[l] = false;
                continue;
            }
            seen.push(p);
            degree[p] += 1;
        }
    }
    for (p, &d) in degree.iter().enumerate() {
        if d != k {
            out.push(Violation::Regularity { point: p, degree: d });
        }
    }
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            let shared = lines[a].iter().filter(|p| lines[b].contains(p)).count();
            if shared > 1 {
                out.push(Violation::SharedPair { first: a, second: b });
            }
        }
    }
    if n > 0 && !connected(n, lines, &sane) {
        out.push(Violation::Disconnected);
    }
    out
}

fn connected(n: usize, lines: &[Vec<usize>], sane: &[bool]) -> bool {
    // Union-find over points joined through lines; every point must be on a line.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut covered = vec![false; n];
    for (line, ok) in lines.iter().zip(sane) {
        if !ok || line.is_empty() {
            continue;
        }
        let root = find(&mut parent, line[0]);
        for &p in line {
            covered[p] = true;
            let r = find(&mut parent, p);
            parent[r] = root;
        }
    }
    if covered.iter().any(|c| !c) {
        return false;
    }
    let root = find(&mut parent, 0);
    (0..n).all(|p| find(&mut parent, p) == root)
}
