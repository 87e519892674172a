//! Seeded Brownian-excursion simulation and the associated tree
//! pseudo-metric, feeding the tree extractor.
//!
//! The sampler draws a Gaussian random-walk bridge and applies the cyclic
//! shift at its minimum, giving a nonnegative path vanishing at both ends.
//! For grid times `s ≤ t` the quantity
//! `e(s) + e(t) − 2·min{e(r): s ≤ r ≤ t}` is the tree pseudo-metric of the
//! path; marked grid times span a finite subtree which [`contour_tree`]
//! extracts exactly (grid values are converted to rationals, so tree
//! distances reproduce the formula with zero tolerance).

use crate::exact::{rational_from_f64, Rational};
use crate::tree::{FiniteMetricTree, TreeError, VertexId};
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExcursionError {
    #[error("invalid excursion: {0}")]
    InvalidExcursion(String),
    #[error("index {0} outside grid 0..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("need at least {0} marks")]
    TooFewMarks(usize),
    #[error("ties kept producing degenerate marks after {0} attempts")]
    PersistentTies(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// A discretized excursion: values at grid times `i/n`, `i = 0..=n`, with
/// `e(0) = e(1) = 0` and `e ≥ 0`, not identically zero.
#[derive(Clone, Debug)]
pub struct ExcursionPath {
    pub values: Vec<f64>,
}

impl ExcursionPath {
    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    /// Validates the excursion invariants.
    pub fn new(values: Vec<f64>) -> Result<Self, ExcursionError> {
        if values.len() < 3 {
            return Err(ExcursionError::InvalidExcursion("grid too small".into()));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(ExcursionError::InvalidExcursion(
                "endpoints must vanish".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ExcursionError::InvalidExcursion("negative value".into()));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(ExcursionError::InvalidExcursion("identically zero".into()));
        }
        Ok(ExcursionPath { values })
    }

    pub fn to_csv(&self) -> String {
        let n = self.grid_size();
        let mut out = String::from("t,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{}/{n},{v:.17e}\n", i));
        }
        out
    }
}

/// Gaussian random-walk bridge with the cyclic shift at its minimum:
/// deterministic for a given seed, nonnegative, vanishing at the ends, with
/// increments scaled by `n^{-1/2}`.
pub fn sample_excursion(n: usize, seed: u64) -> Result<ExcursionPath, ExcursionError> {
    assert!(n >= 2, "grid size must be at least 2");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    loop {
        let mut walk = Vec::with_capacity(n + 1);
        walk.push(0.0f64);
        let mut acc = 0.0;
        for _ in 0..n {
            let g: f64 = rng.sample(StandardNormal);
            acc += g * scale;
            walk.push(acc);
        }
        let last = walk[n];
        // bridge: remove the linear drift
        for (i, w) in walk.iter_mut().enumerate() {
            *w -= last * (i as f64) / (n as f64);
        }
        walk[n] = 0.0;
        // cyclic shift at the first minimum
        let mut argmin = 0;
        for i in 1..n {
            if walk[i] < walk[argmin] {
                argmin = i;
            }
        }
        let min = walk[argmin];
        let mut values = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let idx = (argmin + i) % n;
            values.push(walk[idx] - min);
        }
        values[0] = 0.0;
        values[n] = 0.0;
        if let Ok(e) = ExcursionPath::new(values) {
            return Ok(e);
        }
    }
}

/// The tree pseudo-metric of the path on grid indices, exactly (values are
/// converted to rationals before combining).
pub fn contour_distance(
    e: &ExcursionPath,
    s: usize,
    t: usize,
) -> Result<Rational, ExcursionError> {
    let n = e.grid_size();
    if s > n || t > n {
        return Err(ExcursionError::IndexOutOfRange(s.max(t), n));
    }
    let (lo, hi) = (s.min(t), s.max(t));
    let min = e.values[lo..=hi]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let r = |x: f64| rational_from_f64(x).expect("finite grid value");
    Ok(r(e.values[s]) + r(e.values[t]) - r(min) - r(min))
}

/// Outcome of [`contour_tree`]: the spanned tree, the vertex holding each
/// mark, tie events (exact value collisions at distinct grid points, which
/// would raise valences or identify distinct marks), and the count of marks
/// that came out as interior vertices (a mark that is the running minimum
/// up to a neighbor; ordinary at grid resolution, not a tie).
pub struct ContourTree {
    pub tree: FiniteMetricTree,
    pub mark_vertices: Vec<VertexId>,
    pub ties: Vec<String>,
    pub interior_marks: usize,
}

struct RangeMin {
    value: f64,
    first: usize,
    last: usize,
    count: usize,
}

fn range_min(values: &[f64], lo: usize, hi: usize) -> RangeMin {
    let mut m = RangeMin {
        value: f64::INFINITY,
        first: lo,
        last: lo,
        count: 0,
    };
    for (i, &v) in values[lo..=hi].iter().enumerate() {
        let idx = lo + i;
        if v < m.value {
            m = RangeMin {
                value: v,
                first: idx,
                last: idx,
                count: 1,
            };
        } else if v == m.value {
            m.last = idx;
            m.count += 1;
        }
    }
    m
}

/// Builds the subtree of the contour tree spanned by the marked grid times,
/// with exact rational edge lengths. Marks must be strictly increasing.
pub fn contour_tree(e: &ExcursionPath, marks: &[usize]) -> Result<ContourTree, ExcursionError> {
    let n = e.grid_size();
    if marks.len() < 2 {
        return Err(ExcursionError::TooFewMarks(2));
    }
    if marks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExcursionError::InvalidExcursion(
            "marks must be strictly increasing".into(),
        ));
    }
    if *marks.last().unwrap() > n {
        return Err(ExcursionError::IndexOutOfRange(*marks.last().unwrap(), n));
    }
    let exact = |x: f64| rational_from_f64(x).expect("finite grid value");

    let mut heights: Vec<Rational> = Vec::new();
    let mut edges: Vec<(VertexId, VertexId, Rational)> = Vec::new();
    let mut ties: Vec<String> = Vec::new();
    let mut interior_marks = 0usize;
    let mut is_mark: Vec<bool> = Vec::new();
    let mut mark_vertices: Vec<VertexId> = Vec::new();
    // stack of vertices on the ancestral path of the last mark, heights
    // strictly increasing bottom to top
    let mut stack: Vec<VertexId> = Vec::new();

    let new_vertex = |h: Rational, heights: &mut Vec<Rational>, is_mark: &mut Vec<bool>| {
        heights.push(h);
        is_mark.push(false);
        (heights.len() - 1) as VertexId
    };

    let first = new_vertex(exact(e.values[marks[0]]), &mut heights, &mut is_mark);
    is_mark[first as usize] = true;
    mark_vertices.push(first);
    stack.push(first);

    for w in marks.windows(2) {
        let (prev, cur) = (w[0], w[1]);
        let rm = range_min(&e.values, prev, cur);
        let h = exact(rm.value);
        // pop everything strictly above the split, wiring up the chain
        let mut last_popped: Option<VertexId> = None;
        while let Some(&top) = stack.last() {
            if heights[top as usize] > h {
                stack.pop();
                if let Some(lp) = last_popped {
                    let len = heights[lp as usize].clone() - heights[top as usize].clone();
                    debug_assert!(!len.is_zero());
                    edges.push((lp, top, len));
                }
                last_popped = Some(top);
            } else {
                break;
            }
        }
        // the branch vertex at the split height
        let branch = match stack.last() {
            Some(&top) if heights[top as usize] == h => {
                // legitimate only when the minimum sits exactly at the
                // previous mark, which then acts as an ancestor
                if is_mark[top as usize] && rm.count == 1 && rm.first == prev {
                    interior_marks += 1;
                } else {
                    ties.push(format!(
                        "exact value collision at split {prev}..{cur} (min {} attained {} times)",
                        rm.value, rm.count
                    ));
                }
                top
            }
            _ => {
                let b = new_vertex(h.clone(), &mut heights, &mut is_mark);
                stack.push(b);
                b
            }
        };
        if let Some(lp) = last_popped {
            let len = heights[lp as usize].clone() - heights[branch as usize].clone();
            debug_assert!(!len.is_zero());
            edges.push((lp, branch, len));
        }
        // the new mark
        let hv = exact(e.values[cur]);
        if hv == heights[branch as usize] {
            // legitimate only when the minimum sits exactly at the new mark
            if rm.count == 1 && rm.last == cur {
                interior_marks += 1;
            } else {
                ties.push(format!(
                    "mark at grid {cur} collides exactly with the split minimum"
                ));
            }
            if is_mark[branch as usize] {
                ties.push(format!(
                    "marks identified: grid {cur} at zero tree distance from an earlier mark"
                ));
            }
            is_mark[branch as usize] = true;
            mark_vertices.push(branch);
        } else {
            let leaf = new_vertex(hv, &mut heights, &mut is_mark);
            is_mark[leaf as usize] = true;
            mark_vertices.push(leaf);
            stack.push(leaf);
        }
    }
    // drain the stack down to the root
    while stack.len() >= 2 {
        let top = stack.pop().unwrap();
        let below = *stack.last().unwrap();
        let len = heights[top as usize].clone() - heights[below as usize].clone();
        debug_assert!(!len.is_zero());
        edges.push((top, below, len));
    }

    let tree = FiniteMetricTree::new(heights.len(), edges, vec![])?;
    // an exact collision shows up as a valence above 3; log it explicitly
    for v in 0..tree.vertex_count() as u32 {
        if tree.degree(v) > 3 {
            ties.push(format!("vertex {v} has valence {}", tree.degree(v)));
        }
    }
    Ok(ContourTree {
        tree,
        mark_vertices,
        ties,
        interior_marks,
    })
}

/// Histogram of vertex valences.
pub fn valence_histogram(tree: &FiniteMetricTree) -> std::collections::BTreeMap<usize, usize> {
    let mut hist = std::collections::BTreeMap::new();
    for v in 0..tree.vertex_count() as u32 {
        *hist.entry(tree.degree(v)).or_insert(0) += 1;
    }
    hist
}

/// Outcome of the excursion-to-tree pipeline.
pub struct CrtSample {
    pub excursion: ExcursionPath,
    pub tree: FiniteMetricTree,
    pub mark_vertices: Vec<VertexId>,
    pub histogram: std::collections::BTreeMap<usize, usize>,
    /// Number of mark draws discarded because of exact ties.
    pub resampled: usize,
}

/// Samples an excursion, draws `k` marks uniformly without replacement on
/// the interior grid, and extracts the spanned tree. Exact ties (which would
/// merge marks into interior vertices or raise valences) trigger a mark
/// resample rather than a silent merge.
pub fn crt_tree(n: usize, k: usize, seed: u64) -> Result<CrtSample, ExcursionError> {
    assert!(n >= 2, "grid size must be at least 2");
    if k < 2 {
        return Err(ExcursionError::TooFewMarks(2));
    }
    let excursion = sample_excursion(n, seed)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6d61726b73);
    let mut attempts = 0;
    loop {
        attempts += 1;
        if attempts > 64 {
            return Err(ExcursionError::PersistentTies(64));
        }
        let mut marks = sample_indices(&mut rng, n, k);
        marks.sort_unstable();
        let ct = contour_tree(&excursion, &marks)?;
        if !ct.ties.is_empty() {
            continue;
        }
        let histogram = valence_histogram(&ct.tree);
        return Ok(CrtSample {
            excursion,
            tree: ct.tree,
            mark_vertices: ct.mark_vertices,
            histogram,
            resampled: attempts - 1,
        });
    }
}

fn sample_indices(rng: &mut ChaCha20Rng, n: usize, k: usize) -> Vec<usize> {
    // uniform without replacement on the interior grid 1..n
    let mut chosen = std::collections::HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let i = rng.gen_range(1..n);
        if chosen.insert(i) {
            out.push(i);
        }
    }
    out
}
