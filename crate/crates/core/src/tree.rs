//! Finite combinatorial metric trees: weighted tree graphs with exact edge
//! lengths, standing in for abstract metric trees at desk scale.
//!
//! Lengths are exact rationals throughout; trees built from floating-point
//! contour data convert the floats exactly, so all derived quantities
//! (distances, diameters, branch heights) compare without tolerance.

use crate::exact::{parse_rational, rational_from_f64, Point, Rational};
use crate::ifs::Segment;
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub type VertexId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {0} is not a branch point")]
    NotABranchPoint(VertexId),
    #[error("no admissible branch point")]
    NoBranchPoint,
    #[error("segments do not form a tree: {0}")]
    NotATree(String),
    #[error("invalid excursion: {0}")]
    InvalidExcursion(String),
    #[error("median arguments must be three distinct vertices")]
    DegenerateInput,
    #[error("non-positive edge length")]
    NonPositiveLength,
    #[error("bad tree file: {0}")]
    Format(String),
}

/// A finite metric tree: vertices (optionally placed in the plane) and
/// positive-length edges, with an adjacency index. Immutable once built.
#[derive(Clone, Debug)]
pub struct FiniteMetricTree {
    positions: Vec<Option<Point>>,
    edges: Vec<(VertexId, VertexId, Rational)>,
    adj: Vec<Vec<(VertexId, u32)>>, // (neighbor, edge index)
}

/// One branch of a vertex: the component of `T ∖ {root}` containing one
/// neighbor, together with the root (which is a leaf of the branch).
#[derive(Clone, Debug)]
pub struct Branch {
    pub root: VertexId,
    pub via: VertexId,
    /// All branch vertices including the root, sorted.
    pub vertices: Vec<VertexId>,
}

impl FiniteMetricTree {
    pub fn new(
        n_vertices: usize,
        edges: Vec<(VertexId, VertexId, Rational)>,
        positions: Vec<Option<Point>>,
    ) -> Result<Self, TreeError> {
        if edges.iter().any(|(_, _, l)| !l.is_positive()) {
            return Err(TreeError::NonPositiveLength);
        }
        if edges.len() + 1 != n_vertices {
            return Err(TreeError::NotATree(format!(
                "{} vertices, {} edges",
                n_vertices,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n_vertices];
        for (i, (a, b, _)) in edges.iter().enumerate() {
            if *a as usize >= n_vertices || *b as usize >= n_vertices {
                return Err(TreeError::UnknownVertex((*a).max(*b)));
            }
            adj[*a as usize].push((*b, i as u32));
            adj[*b as usize].push((*a, i as u32));
        }
        let mut positions = positions;
        positions.resize(n_vertices, None);
        let t = FiniteMetricTree {
            positions,
            edges,
            adj,
        };
        // connectivity (acyclicity follows from the edge count)
        if n_vertices > 0 {
            let mut seen = vec![false; n_vertices];
            let mut stack = vec![0u32];
            seen[0] = true;
            let mut count = 1;
            while let Some(v) = stack.pop() {
                for &(w, _) in &t.adj[v as usize] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        count += 1;
                        stack.push(w);
                    }
                }
            }
            if count != n_vertices {
                return Err(TreeError::NotATree("disconnected".into()));
            }
        }
        Ok(t)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId, Rational)] {
        &self.edges
    }

    pub fn position(&self, v: VertexId) -> Option<&Point> {
        self.positions.get(v as usize).and_then(|p| p.as_ref())
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v as usize].iter().map(|&(w, _)| w)
    }

    pub fn edge_len(&self, a: VertexId, b: VertexId) -> Option<&Rational> {
        self.adj[a as usize]
            .iter()
            .find(|&&(w, _)| w == b)
            .map(|&(_, e)| &self.edges[e as usize].2)
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), TreeError> {
        if (v as usize) < self.adj.len() {
            Ok(())
        } else {
            Err(TreeError::UnknownVertex(v))
        }
    }

    /// Number of components of `T ∖ {v}`, i.e. the graph degree.
    pub fn valence(&self, v: VertexId) -> Result<usize, TreeError> {
        self.check_vertex(v)?;
        Ok(self.adj[v as usize].len())
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    pub fn leaves(&self) -> Vec<VertexId> {
        (0..self.adj.len() as u32).filter(|&v| self.degree(v) == 1).collect()
    }

    pub fn branch_points(&self) -> Vec<VertexId> {
        (0..self.adj.len() as u32).filter(|&v| self.degree(v) >= 3).collect()
    }

    /// The branches at `p`: one per neighbor; they cover the tree and
    /// pairwise intersect exactly in `{p}`.
    pub fn branches_at(&self, p: VertexId) -> Result<Vec<Branch>, TreeError> {
        self.check_vertex(p)?;
        let mut out = Vec::with_capacity(self.degree(p));
        for &(nb, _) in &self.adj[p as usize] {
            let mut vertices = vec![p];
            let mut stack = vec![nb];
            let mut seen = HashMap::new();
            seen.insert(nb, ());
            while let Some(v) = stack.pop() {
                vertices.push(v);
                for &(w, _) in &self.adj[v as usize] {
                    if w != p && !seen.contains_key(&w) {
                        seen.insert(w, ());
                        stack.push(w);
                    }
                }
            }
            vertices.sort_unstable();
            out.push(Branch {
                root: p,
                via: nb,
                vertices,
            });
        }
        Ok(out)
    }

    /// Exact diameter of the subtree induced by a vertex set (must be
    /// connected), by double sweep.
    pub fn induced_diameter(&self, vertices: &[VertexId]) -> Rational {
        if vertices.len() <= 1 {
            return Rational::zero();
        }
        let inset: std::collections::HashSet<VertexId> = vertices.iter().copied().collect();
        let far = |start: VertexId| -> (VertexId, Rational) {
            let mut best = (start, Rational::zero());
            let mut stack = vec![(start, Rational::zero())];
            let mut seen = std::collections::HashSet::new();
            seen.insert(start);
            while let Some((v, d)) = stack.pop() {
                if d > best.1 {
                    best = (v, d.clone());
                }
                for &(w, e) in &self.adj[v as usize] {
                    if inset.contains(&w) && seen.insert(w) {
                        stack.push((w, d.clone() + self.edges[e as usize].2.clone()));
                    }
                }
            }
            best
        };
        let (u, _) = far(vertices[0]);
        far(u).1
    }

    /// Diameter of a branch (includes the root).
    pub fn branch_diameter(&self, b: &Branch) -> Rational {
        self.induced_diameter(&b.vertices)
    }

    /// Height of a branch point: the diameter of its third largest branch.
    pub fn height(&self, p: VertexId) -> Result<Rational, TreeError> {
        if self.valence(p)? < 3 {
            return Err(TreeError::NotABranchPoint(p));
        }
        let mut diams: Vec<Rational> = self
            .branches_at(p)?
            .iter()
            .map(|b| self.branch_diameter(b))
            .collect();
        diams.sort_by(|a, b| b.cmp(a));
        Ok(diams[2].clone())
    }

    /// Heights of all branch points at once, via a rerooted tree DP.
    /// `None` for vertices of valence < 3.
    pub fn all_heights(&self) -> Vec<Option<Rational>> {
        let n = self.adj.len();
        if n == 0 {
            return Vec::new();
        }
        // Iterative DFS order from vertex 0.
        let mut parent: Vec<Option<(VertexId, u32)>> = vec![None; n];
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![0u32];
        let mut seen = vec![false; n];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            for &(w, e) in &self.adj[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    parent[w as usize] = Some((v, e));
                    stack.push(w);
                }
            }
        }
        // down[v] = (height into v's subtree measured from v,
        //            diameter of v's subtree)
        let zero = Rational::zero();
        let mut down_h: Vec<Rational> = vec![zero.clone(); n];
        let mut down_d: Vec<Rational> = vec![zero.clone(); n];
        for &v in order.iter().rev() {
            let mut best_h = zero.clone();
            let mut second_h = zero.clone();
            let mut best_d = zero.clone();
            for &(w, e) in &self.adj[v as usize] {
                if parent[w as usize].map(|(p, _)| p) != Some(v) {
                    continue;
                }
                let hw = down_h[w as usize].clone() + self.edges[e as usize].2.clone();
                if hw > best_h {
                    second_h = std::mem::replace(&mut best_h, hw);
                } else if hw > second_h {
                    second_h = hw;
                }
                if down_d[w as usize] > best_d {
                    best_d = down_d[w as usize].clone();
                }
            }
            down_h[v as usize] = best_h.clone();
            down_d[v as usize] = best_d.max(best_h + second_h);
        }
        // up[v] = (height from v into the complement of v's subtree,
        //          diameter of that complement), including the edge to parent
        let mut up_h: Vec<Rational> = vec![zero.clone(); n];
        let mut up_d: Vec<Rational> = vec![zero.clone(); n];
        for &v in order.iter() {
            // Directional values at v: for each neighbor w, the height/diam of
            // the component away from v through w.
            // Collect (height via w, diam via w) for all neighbors.
            let vals: Vec<(VertexId, Rational, Rational)> = self.adj[v as usize]
                .iter()
                .map(|&(w, e)| {
                    let len = self.edges[e as usize].2.clone();
                    if parent[v as usize].map(|(p, _)| p) == Some(w) {
                        (w, up_h[v as usize].clone(), up_d[v as usize].clone())
                    } else {
                        (w, down_h[w as usize].clone() + len, down_d[w as usize].clone())
                    }
                })
                .collect();
            // top-2 heights and top-1 diameter with provenance, to exclude
            // one neighbor in O(1)
            let mut h1: Option<(usize, Rational)> = None;
            let mut h2: Option<(usize, Rational)> = None;
            let mut d1: Option<(usize, Rational)> = None;
            let mut d2: Option<(usize, Rational)> = None;
            for (i, (_, h, d)) in vals.iter().enumerate() {
                if h1.as_ref().is_none_or(|(_, v)| h > v) {
                    h2 = h1.take();
                    h1 = Some((i, h.clone()));
                } else if h2.as_ref().is_none_or(|(_, v)| h > v) {
                    h2 = Some((i, h.clone()));
                }
                if d1.as_ref().is_none_or(|(_, v)| d > v) {
                    d2 = d1.take();
                    d1 = Some((i, d.clone()));
                } else if d2.as_ref().is_none_or(|(_, v)| d > v) {
                    d2 = Some((i, d.clone()));
                }
            }
            // need top-3 heights for the through-path diameter excluding one
            let mut hs: Vec<(usize, Rational)> =
                vals.iter().enumerate().map(|(i, (_, h, _))| (i, h.clone())).collect();
            hs.sort_by(|a, b| b.1.cmp(&a.1));
            for (i, (w, _, _)) in vals.iter().enumerate() {
                if parent[*w as usize].map(|(p, _)| p) != Some(v) {
                    continue;
                }
                let e = self.adj[v as usize]
                    .iter()
                    .find(|&&(x, _)| x == *w)
                    .map(|&(_, e)| e)
                    .unwrap();
                let len = self.edges[e as usize].2.clone();
                // height away from w at v, excluding direction w
                let best_h_excl = hs
                    .iter()
                    .find(|(j, _)| *j != i)
                    .map(|(_, h)| h.clone())
                    .unwrap_or_else(|| zero.clone());
                up_h[*w as usize] = best_h_excl.clone() + len;
                // diameter of complement of w's subtree: either a diameter
                // within one other direction, or a path through v combining
                // the two best heights excluding w
                let best_d_excl = match (&d1, &d2) {
                    (Some((j, dv)), _) if *j != i => dv.clone(),
                    (Some(_), Some((_, dv2))) => dv2.clone(),
                    _ => zero.clone(),
                };
                let mut top: Vec<Rational> = hs
                    .iter()
                    .filter(|(j, _)| *j != i)
                    .take(2)
                    .map(|(_, h)| h.clone())
                    .collect();
                while top.len() < 2 {
                    top.push(zero.clone());
                }
                let through = top[0].clone() + top[1].clone();
                up_d[*w as usize] = best_d_excl.max(through);
            }
        }
        // Branch diameters at p, per neighbor: component diameter vs
        // eccentricity of p inside the branch.
        (0..n as u32)
            .map(|p| {
                if self.degree(p) < 3 {
                    return None;
                }
                let mut diams: Vec<Rational> = self.adj[p as usize]
                    .iter()
                    .map(|&(w, e)| {
                        let len = self.edges[e as usize].2.clone();
                        let (h, d) = if parent[p as usize].map(|(q, _)| q) == Some(w) {
                            (up_h[p as usize].clone(), up_d[p as usize].clone())
                        } else {
                            (down_h[w as usize].clone() + len, down_d[w as usize].clone())
                        };
                        d.max(h)
                    })
                    .collect();
                diams.sort_by(|a, b| b.cmp(a));
                Some(diams[2].clone())
            })
            .collect()
    }

    /// The branch point of maximal height among those `allowed`, with a
    /// deterministic tie-break (height descending, then vertex id ascending).
    pub fn max_height_branch_point(
        &self,
        allowed: impl Fn(VertexId) -> bool,
    ) -> Result<VertexId, TreeError> {
        let heights = self.all_heights();
        self.max_height_branch_point_with(&heights, allowed)
    }

    /// Same, reusing a precomputed height table.
    pub fn max_height_branch_point_with(
        &self,
        heights: &[Option<Rational>],
        allowed: impl Fn(VertexId) -> bool,
    ) -> Result<VertexId, TreeError> {
        let mut best: Option<(Rational, VertexId)> = None;
        for v in 0..self.adj.len() as u32 {
            if let Some(h) = &heights[v as usize] {
                if !allowed(v) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((bh, bv)) => h > bh || (h == bh && v < *bv),
                };
                if better {
                    best = Some((h.clone(), v));
                }
            }
        }
        best.map(|(_, v)| v).ok_or(TreeError::NoBranchPoint)
    }

    /// The unique simple path between two vertices.
    pub fn path(&self, a: VertexId, b: VertexId) -> Result<Vec<VertexId>, TreeError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Ok(vec![a]);
        }
        let mut parent: Vec<Option<VertexId>> = vec![None; self.adj.len()];
        let mut stack = vec![a];
        parent[a as usize] = Some(a);
        'outer: while let Some(v) = stack.pop() {
            for &(w, _) in &self.adj[v as usize] {
                if parent[w as usize].is_none() {
                    parent[w as usize] = Some(v);
                    if w == b {
                        break 'outer;
                    }
                    stack.push(w);
                }
            }
        }
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[cur as usize].ok_or(TreeError::UnknownVertex(b))?;
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }

    /// Exact length of the unique path between two vertices.
    pub fn tree_distance(&self, a: VertexId, b: VertexId) -> Result<Rational, TreeError> {
        let path = self.path(a, b)?;
        Ok(path
            .windows(2)
            .map(|p| self.edge_len(p[0], p[1]).expect("path edge").clone())
            .sum())
    }

    /// The unique vertex lying on all three pairwise paths. For three
    /// distinct leaves this is a branch point distinct from all of them.
    pub fn median(&self, p1: VertexId, p2: VertexId, p3: VertexId) -> Result<VertexId, TreeError> {
        if p1 == p2 || p2 == p3 || p1 == p3 {
            return Err(TreeError::DegenerateInput);
        }
        let p12 = self.path(p1, p2)?;
        let p23: std::collections::HashSet<VertexId> = self.path(p2, p3)?.into_iter().collect();
        p12.into_iter()
            .find(|v| p23.contains(v))
            .ok_or(TreeError::NoBranchPoint)
    }

    /// Contracts every valence-2 vertex, summing edge lengths. Returns the
    /// smoothed tree and the map old-vertex → new-vertex (None for removed).
    pub fn smoothed(&self) -> (FiniteMetricTree, Vec<Option<VertexId>>) {
        let n = self.adj.len();
        let keep: Vec<bool> = (0..n).map(|v| self.adj[v].len() != 2).collect();
        let mut remap: Vec<Option<VertexId>> = vec![None; n];
        let mut positions = Vec::new();
        for v in 0..n {
            if keep[v] {
                remap[v] = Some(positions.len() as VertexId);
                positions.push(self.positions[v].clone());
            }
        }
        let mut edges = Vec::new();
        let mut visited_edges = vec![false; self.edges.len()];
        for v in 0..n as u32 {
            if !keep[v as usize] {
                continue;
            }
            for &(w, e0) in &self.adj[v as usize] {
                if visited_edges[e0 as usize] {
                    continue;
                }
                // walk through valence-2 vertices
                let mut len = self.edges[e0 as usize].2.clone();
                let mut prev = v;
                let mut cur = w;
                let mut last_edge = e0;
                visited_edges[e0 as usize] = true;
                while !keep[cur as usize] {
                    let &(nxt, e) = self.adj[cur as usize]
                        .iter()
                        .find(|&&(x, e)| !(x == prev && e == last_edge))
                        .expect("valence-2 vertex has another side");
                    len += self.edges[e as usize].2.clone();
                    visited_edges[e as usize] = true;
                    prev = cur;
                    cur = nxt;
                    last_edge = e;
                }
                edges.push((remap[v as usize].unwrap(), remap[cur as usize].unwrap(), len));
            }
        }
        let t = FiniteMetricTree::new(positions.len(), edges, positions)
            .expect("smoothing preserves the tree property");
        (t, remap)
    }
}

/// Builds a tree from a segment soup, identifying endpoints by exact
/// coordinate equality. Edge lengths are the Euclidean segment lengths
/// (exact whenever the squared length is a perfect rational square, as for
/// all axis-parallel inputs).
pub fn from_segments(segments: &[Segment]) -> Result<FiniteMetricTree, TreeError> {
    let mut index: HashMap<Point, VertexId> = HashMap::new();
    let mut positions: Vec<Option<Point>> = Vec::new();
    let mut id_of = |p: &Point, positions: &mut Vec<Option<Point>>| -> VertexId {
        if let Some(&id) = index.get(p) {
            return id;
        }
        let id = positions.len() as VertexId;
        index.insert(p.clone(), id);
        positions.push(Some(p.clone()));
        id
    };
    let mut edges = Vec::with_capacity(segments.len());
    for s in segments {
        let a = id_of(&s.a, &mut positions);
        let b = id_of(&s.b, &mut positions);
        if a == b {
            return Err(TreeError::NotATree("degenerate segment".into()));
        }
        edges.push((a, b, exact_length(s)));
    }
    FiniteMetricTree::new(positions.len(), edges, positions)
}

fn exact_length(s: &Segment) -> Rational {
    let d = s.b.clone() - s.a.clone();
    if d.x.is_zero() {
        return d.y.abs();
    }
    if d.y.is_zero() {
        return d.x.abs();
    }
    let sq = d.norm_sqr();
    rational_sqrt(&sq).unwrap_or_else(|| {
        // fall back to the exactly-converted floating approximation
        rational_from_f64(crate::exact::rational_to_f64(&sq).sqrt()).expect("finite length")
    })
}

fn rational_sqrt(x: &Rational) -> Option<Rational> {
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Serializable tree interchange form.
#[derive(Serialize, Deserialize)]
pub struct TreeFile {
    pub vertices: Vec<TreeFileVertex>,
    pub edges: Vec<TreeFileEdge>,
}

#[derive(Serialize, Deserialize)]
pub struct TreeFileVertex {
    pub id: VertexId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos: Option<[String; 2]>,
}

#[derive(Serialize, Deserialize)]
pub struct TreeFileEdge {
    pub a: VertexId,
    pub b: VertexId,
    pub len: String,
}

impl FiniteMetricTree {
    pub fn to_file(&self) -> TreeFile {
        TreeFile {
            vertices: (0..self.adj.len() as u32)
                .map(|v| TreeFileVertex {
                    id: v,
                    pos: self.positions[v as usize]
                        .as_ref()
                        .map(|p| [p.x.to_string(), p.y.to_string()]),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|(a, b, l)| TreeFileEdge {
                    a: *a,
                    b: *b,
                    len: l.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_file(f: &TreeFile) -> Result<Self, TreeError> {
        let n = f.vertices.len();
        let mut positions = vec![None; n];
        for v in &f.vertices {
            if v.id as usize >= n {
                return Err(TreeError::Format(format!("vertex id {} out of range", v.id)));
            }
            if let Some([x, y]) = &v.pos {
                let x = parse_rational(x).ok_or_else(|| TreeError::Format(format!("bad x {x}")))?;
                let y = parse_rational(y).ok_or_else(|| TreeError::Format(format!("bad y {y}")))?;
                positions[v.id as usize] = Some(Point::new(x, y));
            }
        }
        let edges = f
            .edges
            .iter()
            .map(|e| {
                parse_rational(&e.len)
                    .map(|l| (e.a, e.b, l))
                    .ok_or_else(|| TreeError::Format(format!("bad length {}", e.len)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        FiniteMetricTree::new(n, edges, positions)
    }
}
