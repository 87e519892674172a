//! Recursive subdivision of an m-valent metric tree into labeled tiles with
//! signed marked leaves, and machine-checkable certificates of the result.
//!
//! A tile is a subtree labeled by a finite word. Subdivision cuts a tile at
//! an interior branch point of maximal height: the cut point is marked `+`
//! in child 1 and `−` in every other child; a `−` marked leaf of the parent
//! passes to child 1, a `+` one to child 2, both keeping their signs. A tile
//! with one marked leaf is cut at the best interior branch point; a tile
//! with two marked leaves is cut on the open arc between them. Labels not
//! forced by marked leaves are assigned deterministically (branch diameter
//! descending, then smallest contained vertex id), and the rule id is
//! recorded in the certificate.
//!
//! The analytic reference decomposition of the attractor needs no search:
//! tile corners, signs and cut points all come from closed formulas.

use crate::exact::{parse_rational, pow2, rational_to_f64, Point, Rational};
use crate::ifs::{tile_corners, word_map, IfsError};
use crate::tree::{FiniteMetricTree, TreeError, VertexId};
use crate::words::{FiniteWord, Letter};
use num::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("vertex {0} has valence {1}, expected {2} (smooth the tree first?)")]
    NotMValent(VertexId, usize, u8),
    #[error("tree has no branch point")]
    NoBranchPoint,
    #[error("vertex {0} is not a leaf")]
    NotALeaf(VertexId),
    #[error("alphabet size {0} not supported here")]
    WrongAlphabet(u8),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Ifs(#[from] IfsError),
}

/// Identifier of the deterministic free-label rule baked into this build.
pub const TIE_RULE: &str = "free-labels:diam-desc,min-vertex-id-asc;ties:vertex-id-asc";

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Minus => "-",
            Sign::Plus => "+",
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s {
            "-" => Some(Sign::Minus),
            "+" => Some(Sign::Plus),
            _ => None,
        }
    }
}

/// A marked leaf of a tile: a vertex together with its sign in that tile.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SignedLeaf {
    pub vertex: VertexId,
    pub sign: Sign,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TileKind {
    Root,
    LeafTile,
    ArcTile,
    /// No admissible interior branch point was available; excluded from
    /// deeper matching rather than faked.
    Terminal,
}

impl TileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TileKind::Root => "root",
            TileKind::LeafTile => "leaf",
            TileKind::ArcTile => "arc",
            TileKind::Terminal => "terminal",
        }
    }
}

/// One tile of a tree-backed decomposition.
#[derive(Clone, Debug)]
pub struct TileNode {
    pub label: FiniteWord,
    pub level: usize,
    /// Sorted vertex set of the subtree.
    pub vertices: Vec<VertexId>,
    pub marked: Vec<SignedLeaf>,
    pub chosen: Option<VertexId>,
    pub kind: TileKind,
    pub children: Vec<usize>,
}

/// Stop rule for the subdivision.
#[derive(Clone, Debug)]
pub struct StopRule {
    pub max_depth: usize,
    pub min_diameter: Option<Rational>,
}

impl StopRule {
    pub fn depth(max_depth: usize) -> Self {
        StopRule {
            max_depth,
            min_diameter: None,
        }
    }

    /// The default rule: depth 8, or tile diameter below `diam(T)/1000`.
    pub fn default_for(tree: &FiniteMetricTree) -> Self {
        let all: Vec<VertexId> = (0..tree.vertex_count() as u32).collect();
        let diam = tree.induced_diameter(&all);
        StopRule {
            max_depth: 8,
            min_diameter: Some(diam / crate::exact::int(1000)),
        }
    }
}

/// A full decomposition of a finite metric tree.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub m: u8,
    pub tiles: Vec<TileNode>,
    pub root: usize,
    /// Deepest level reached.
    pub depth: usize,
    pub normalized: bool,
    diameters: Vec<Rational>,
}

impl Decomposition {
    pub fn tiles_at_level(&self, level: usize) -> impl Iterator<Item = &TileNode> {
        self.tiles.iter().filter(move |t| t.level == level)
    }

    pub fn tile_by_label(&self, label: &FiniteWord) -> Option<&TileNode> {
        self.tiles.iter().find(|t| &t.label == label)
    }

    pub fn diameter(&self, idx: usize) -> &Rational {
        &self.diameters[idx]
    }
}

struct Builder<'a> {
    tree: &'a FiniteMetricTree,
    heights: Vec<Option<Rational>>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl<'a> Builder<'a> {
    fn new(tree: &'a FiniteMetricTree) -> Self {
        Builder {
            tree,
            heights: tree.all_heights(),
            stamp: vec![0; tree.vertex_count()],
            epoch: 0,
        }
    }

    fn stamp_tile(&mut self, vertices: &[VertexId]) -> u32 {
        self.epoch += 1;
        for &v in vertices {
            self.stamp[v as usize] = self.epoch;
        }
        self.epoch
    }

    fn in_tile(&self, v: VertexId, epoch: u32) -> bool {
        self.stamp[v as usize] == epoch
    }

    /// Branches of `c` within the stamped tile: one sorted vertex set per
    /// neighbor of `c` (all of which lie in the tile since `c` is interior).
    fn tile_branches(&self, c: VertexId, epoch: u32) -> Vec<Vec<VertexId>> {
        let nbs: Vec<VertexId> = self.tree.neighbors(c).collect();
        let mut out = Vec::with_capacity(nbs.len());
        for nb in nbs {
            debug_assert!(self.in_tile(nb, epoch));
            let mut comp = vec![c, nb];
            let mut stack = vec![nb];
            let mut seen = std::collections::HashSet::new();
            seen.insert(nb);
            while let Some(v) = stack.pop() {
                for w in self.tree.neighbors(v) {
                    if w != c && self.in_tile(w, epoch) && seen.insert(w) {
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Path between two tile vertices, restricted to the stamped tile.
    fn tile_path(&self, a: VertexId, b: VertexId, epoch: u32) -> Vec<VertexId> {
        let mut parent: HashMap<VertexId, VertexId> = HashMap::new();
        parent.insert(a, a);
        let mut stack = vec![a];
        'outer: while let Some(v) = stack.pop() {
            for w in self.tree.neighbors(v) {
                if self.in_tile(w, epoch) && !parent.contains_key(&w) {
                    parent.insert(w, v);
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
            cur = parent[&cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    fn best_candidate(&self, candidates: impl Iterator<Item = VertexId>) -> Option<VertexId> {
        let mut best: Option<(&Rational, VertexId)> = None;
        for v in candidates {
            if let Some(h) = &self.heights[v as usize] {
                let better = match &best {
                    None => true,
                    Some((bh, bv)) => h > bh || (h == *bh && v < *bv),
                };
                if better {
                    best = Some((h, v));
                }
            }
        }
        best.map(|(_, v)| v)
    }
}

fn kind_for_marks(level: usize, marks: &[SignedLeaf]) -> TileKind {
    if level == 0 {
        TileKind::Root
    } else if marks.len() <= 1 {
        TileKind::LeafTile
    } else {
        TileKind::ArcTile
    }
}

/// Runs the subdivision. Every branch point of the tree must have valence
/// exactly `m`; trees with subdivision vertices should be smoothed first.
pub fn decompose(
    tree: &FiniteMetricTree,
    m: u8,
    stop: &StopRule,
) -> Result<Decomposition, DecomposeError> {
    decompose_inner(tree, m, stop, None)
}

/// The 3-leaf normalized variant: the root cut is the median of the three
/// distinguished leaves, which are injected as extra signed marks
/// (`p₁⁻`, `p₂⁺`, `p₃⁺`) so the correspondence pins them.
pub fn decompose_normalized(
    tree: &FiniteMetricTree,
    leaves: [VertexId; 3],
    stop: &StopRule,
) -> Result<Decomposition, DecomposeError> {
    for &p in &leaves {
        if tree.valence(p)? != 1 {
            return Err(DecomposeError::NotALeaf(p));
        }
    }
    decompose_inner(tree, 3, stop, Some(leaves))
}

fn decompose_inner(
    tree: &FiniteMetricTree,
    m: u8,
    stop: &StopRule,
    normalized: Option<[VertexId; 3]>,
) -> Result<Decomposition, DecomposeError> {
    if m < 3 {
        return Err(DecomposeError::WrongAlphabet(m));
    }
    if (0..tree.vertex_count() as u32).all(|v| tree.degree(v) < 3) {
        return Err(DecomposeError::NoBranchPoint);
    }
    for v in 0..tree.vertex_count() as u32 {
        let d = tree.degree(v);
        if d != 1 && d != m as usize {
            return Err(DecomposeError::NotMValent(v, d, m));
        }
    }
    let b = Builder::new(tree);
    let mut b = b;
    let all: Vec<VertexId> = (0..tree.vertex_count() as u32).collect();
    let root_diam = tree.induced_diameter(&all);
    let mut tiles = vec![TileNode {
        label: FiniteWord::empty(),
        level: 0,
        vertices: all,
        marked: Vec::new(),
        chosen: None,
        kind: TileKind::Root,
        children: Vec::new(),
    }];
    let mut diameters = vec![root_diam];
    let mut queue = vec![0usize];
    let mut depth = 0usize;

    while let Some(idx) = queue.pop() {
        let level = tiles[idx].level;
        depth = depth.max(level);
        if level >= stop.max_depth {
            continue;
        }
        if let Some(thr) = &stop.min_diameter {
            if level > 0 && &diameters[idx] < thr {
                continue;
            }
        }
        let epoch = b.stamp_tile(&tiles[idx].vertices);
        let marked = tiles[idx].marked.clone();

        // Choose the cut point.
        let chosen = if level == 0 {
            if let Some(leaves) = normalized {
                Some(tree.median(leaves[0], leaves[1], leaves[2])?)
            } else {
                b.best_candidate(tiles[idx].vertices.iter().copied())
            }
        } else {
            match marked.len() {
                1 => b.best_candidate(
                    tiles[idx]
                        .vertices
                        .iter()
                        .copied()
                        .filter(|&v| v != marked[0].vertex),
                ),
                2 => {
                    let path = b.tile_path(marked[0].vertex, marked[1].vertex, epoch);
                    b.best_candidate(path[1..path.len() - 1].iter().copied())
                }
                n => unreachable!("tile with {n} marked leaves"),
            }
        };
        let Some(c) = chosen else {
            tiles[idx].kind = TileKind::Terminal;
            continue;
        };

        // Partition into branches and assign labels.
        let branches = b.tile_branches(c, epoch);
        debug_assert_eq!(branches.len(), m as usize);
        let locate = |p: VertexId| -> usize {
            branches
                .iter()
                .position(|br| br.binary_search(&p).is_ok())
                .expect("marked leaf lies in some branch")
        };
        let mut label_of: Vec<Option<u8>> = vec![None; branches.len()];
        let mut passed: Vec<Vec<SignedLeaf>> = vec![Vec::new(); branches.len()];
        if level == 0 {
            if let Some(leaves) = normalized {
                for (i, &p) in leaves.iter().enumerate() {
                    let bi = locate(p);
                    label_of[bi] = Some(i as u8 + 1);
                    let sign = if i == 0 { Sign::Minus } else { Sign::Plus };
                    passed[bi].push(SignedLeaf { vertex: p, sign });
                }
            }
        } else {
            for sl in &marked {
                let bi = locate(sl.vertex);
                let forced = match sl.sign {
                    Sign::Minus => 1,
                    Sign::Plus => 2,
                };
                label_of[bi] = Some(forced);
                passed[bi].push(*sl);
            }
        }
        // Free labels: branch diameter descending, then smallest non-cut
        // vertex id ascending.
        let branch_diams: Vec<Rational> =
            branches.iter().map(|br| tree.induced_diameter(br)).collect();
        let mut free: Vec<usize> =
            (0..branches.len()).filter(|&i| label_of[i].is_none()).collect();
        let mut free_labels: Vec<u8> = (1..=m)
            .filter(|k| !label_of.iter().flatten().any(|l| l == k))
            .collect();
        free.sort_by(|&i, &j| {
            branch_diams[j]
                .cmp(&branch_diams[i])
                .then_with(|| min_excluding(&branches[i], c).cmp(&min_excluding(&branches[j], c)))
        });
        free_labels.sort_unstable();
        for (bi, lab) in free.into_iter().zip(free_labels) {
            label_of[bi] = Some(lab);
        }

        // Create children.
        let mut child_indices = vec![0usize; branches.len()];
        for (bi, branch) in branches.iter().enumerate() {
            let lab = label_of[bi].unwrap();
            let mut marks = passed[bi].clone();
            marks.push(SignedLeaf {
                vertex: c,
                sign: if lab == 1 { Sign::Plus } else { Sign::Minus },
            });
            marks.sort_by_key(|sl| sl.vertex);
            let mut label = tiles[idx].label.clone();
            label.push(Letter(lab));
            let kind = kind_for_marks(level + 1, &marks);
            tiles.push(TileNode {
                label,
                level: level + 1,
                vertices: branch.clone(),
                marked: marks,
                chosen: None,
                kind,
                children: Vec::new(),
            });
            diameters.push(branch_diams[bi].clone());
            child_indices[lab as usize - 1] = tiles.len() - 1;
        }
        for &ci in &child_indices {
            queue.push(ci);
        }
        tiles[idx].chosen = Some(c);
        tiles[idx].children = child_indices;
        depth = depth.max(level + 1);
    }

    Ok(Decomposition {
        m,
        tiles,
        root: 0,
        depth,
        normalized: normalized.is_some(),
        diameters,
    })
}

fn min_excluding(sorted: &[VertexId], skip: VertexId) -> VertexId {
    if sorted[0] == skip {
        sorted[1]
    } else {
        sorted[0]
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

pub const CERT_SCHEMA: &str = "csst-cert/1";

#[derive(Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub tool: String,
    pub source: String,
    pub alphabet: u8,
    pub depth: usize,
    pub tie_rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diam_threshold: Option<String>,
    pub tiles: Vec<CertTile>,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct CertTile {
    pub level: usize,
    pub label: String,
    pub kind: String,
    pub marked: Vec<CertLeaf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chosen_point: Option<CertVertex>,
    pub diameter: String,
    pub diameter_approx: f64,
    pub intersections: Vec<CertIntersection>,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct CertVertex {
    pub vertex: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos: Option<[String; 2]>,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct CertLeaf {
    pub vertex: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos: Option<[String; 2]>,
    pub sign: String,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct CertIntersection {
    pub other_label: String,
    pub vertex: String,
    pub my_sign: String,
    pub other_sign: String,
}

impl Certificate {
    pub fn tile(&self, label: &str) -> Option<&CertTile> {
        self.tiles.iter().find(|t| t.label == label)
    }

    pub fn levels(&self) -> BTreeMap<usize, Vec<&CertTile>> {
        let mut map: BTreeMap<usize, Vec<&CertTile>> = BTreeMap::new();
        for t in &self.tiles {
            map.entry(t.level).or_default().push(t);
        }
        map
    }
}

/// Fills the per-level intersection records from shared marked-vertex keys.
fn fill_intersections(tiles: &mut [CertTile]) {
    let mut by_level: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, t) in tiles.iter().enumerate() {
        by_level.entry(t.level).or_default().push(i);
    }
    let mut records: Vec<(usize, CertIntersection)> = Vec::new();
    for (_, idxs) in by_level {
        let mut by_key: HashMap<String, Vec<(usize, String)>> = HashMap::new();
        for &i in &idxs {
            for leaf in &tiles[i].marked {
                by_key
                    .entry(leaf.vertex.clone())
                    .or_default()
                    .push((i, leaf.sign.clone()));
            }
        }
        for (key, holders) in by_key {
            for a in 0..holders.len() {
                for b in 0..holders.len() {
                    if a == b {
                        continue;
                    }
                    let (ia, sa) = &holders[a];
                    let (ib, sb) = &holders[b];
                    records.push((
                        *ia,
                        CertIntersection {
                            other_label: tiles[*ib].label.clone(),
                            vertex: key.clone(),
                            my_sign: sa.clone(),
                            other_sign: sb.clone(),
                        },
                    ));
                }
            }
        }
    }
    for (i, rec) in records {
        tiles[i].intersections.push(rec);
    }
    for t in tiles.iter_mut() {
        t.intersections
            .sort_by(|a, b| a.other_label.cmp(&b.other_label).then(a.vertex.cmp(&b.vertex)));
    }
}

impl Decomposition {
    /// Serializable certificate of this decomposition. Vertex keys are
    /// `v{id}`; exact positions are attached when the tree has them.
    pub fn certificate(&self, tree: &FiniteMetricTree, tree_hash: Option<String>) -> Certificate {
        let key = |v: VertexId| format!("v{v}");
        let pos =
            |v: VertexId| tree.position(v).map(|p| [p.x.to_string(), p.y.to_string()]);
        let mut tiles: Vec<CertTile> = self
            .tiles
            .iter()
            .enumerate()
            .map(|(i, t)| CertTile {
                level: t.level,
                label: t.label.to_string(),
                kind: t.kind.as_str().to_string(),
                marked: t
                    .marked
                    .iter()
                    .map(|sl| CertLeaf {
                        vertex: key(sl.vertex),
                        pos: pos(sl.vertex),
                        sign: sl.sign.as_str().to_string(),
                    })
                    .collect(),
                chosen_point: t.chosen.map(|c| CertVertex {
                    vertex: key(c),
                    pos: pos(c),
                }),
                diameter: self.diameters[i].to_string(),
                diameter_approx: rational_to_f64(&self.diameters[i]),
                intersections: Vec::new(),
            })
            .collect();
        tiles.sort_by(|a, b| a.level.cmp(&b.level).then(a.label.cmp(&b.label)));
        fill_intersections(&mut tiles);
        Certificate {
            schema: CERT_SCHEMA.into(),
            tool: crate::TOOL_VERSION.into(),
            source: if self.normalized {
                "decompose-normalized".into()
            } else {
                "decompose".into()
            },
            alphabet: self.m,
            depth: self.depth,
            tie_rule: TIE_RULE.into(),
            tree_hash,
            diam_threshold: None,
            tiles,
        }
    }
}

/// The analytic reference decomposition of the attractor to the given depth,
/// as a certificate. Cut points are the tile junctions, marked leaves are
/// the tile boundary corners with sign `+` at the image of the right base
/// leaf and `−` at the image of the left one; diameters are `2^{1-level}`.
pub fn reference_certificate(depth: usize) -> Result<Certificate, DecomposeError> {
    let mut tiles = Vec::new();
    for level in 0..=depth {
        for u in FiniteWord::all_of_length(level, 3) {
            let corners = tile_corners(&u)?;
            let mut marked = Vec::new();
            if let Some(p) = &corners.minus_corner {
                marked.push(CertLeaf {
                    vertex: p.canonical_string(),
                    pos: Some([p.x.to_string(), p.y.to_string()]),
                    sign: "-".into(),
                });
            }
            if let Some(p) = &corners.plus_corner {
                marked.push(CertLeaf {
                    vertex: p.canonical_string(),
                    pos: Some([p.x.to_string(), p.y.to_string()]),
                    sign: "+".into(),
                });
            }
            let kind = if level == 0 {
                TileKind::Root
            } else if marked.len() == 1 {
                TileKind::LeafTile
            } else {
                TileKind::ArcTile
            };
            let diam = pow2(1 - level as i64);
            tiles.push(CertTile {
                level,
                label: u.to_string(),
                kind: kind.as_str().into(),
                marked,
                chosen_point: (level < depth).then(|| {
                    let c = corners.center.clone();
                    CertVertex {
                        vertex: c.canonical_string(),
                        pos: Some([c.x.to_string(), c.y.to_string()]),
                    }
                }),
                diameter: diam.to_string(),
                diameter_approx: rational_to_f64(&diam),
                intersections: Vec::new(),
            });
        }
    }
    fill_intersections(&mut tiles);
    Ok(Certificate {
        schema: CERT_SCHEMA.into(),
        tool: crate::TOOL_VERSION.into(),
        source: "analytic-reference".into(),
        alphabet: 3,
        depth,
        tie_rule: TIE_RULE.into(),
        tree_hash: None,
        diam_threshold: None,
        tiles,
    })
}

/// Independent diameter of an analytic tile: the max pairwise distance over
/// the mapped hull vertices, cross-checked against the image of the base
/// segment. Exact; the verification suite uses this rather than trusting
/// the `2^{1-n}` formula.
pub fn analytic_tile_diameter_sqr(u: &FiniteWord) -> Result<Rational, DecomposeError> {
    let f = word_map(u)?;
    let hull = crate::ifs::base_hull();
    let poly = crate::ifs::HullPolygon {
        vertices: hull.vertices.iter().map(|v| f.apply(v)).collect(),
    };
    let d_hull = poly.diameter_sqr();
    let seg = f
        .apply(&Point::from_ints(-1, 0))
        .dist_sqr(&f.apply(&Point::from_ints(1, 0)));
    debug_assert!(seg <= d_hull);
    Ok(d_hull)
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    pub per_level_max_diameter: Vec<String>,
    pub strictly_decreasing: bool,
}

impl VerifyReport {
    fn push(&mut self, name: &str, violations: Vec<String>) {
        if !violations.is_empty() {
            self.pass = false;
        }
        self.checks.push(CheckResult {
            name: name.into(),
            pass: violations.is_empty(),
            details: violations,
        });
    }
}

/// Structural verification of a certificate: sign discipline, mark passing,
/// singleton intersections, cut-point distinctness, diameter monotonicity.
pub fn verify_certificate(cert: &Certificate) -> VerifyReport {
    let mut report = VerifyReport {
        pass: true,
        checks: Vec::new(),
        per_level_max_diameter: Vec::new(),
        strictly_decreasing: true,
    };
    let by_label: HashMap<&str, &CertTile> =
        cert.tiles.iter().map(|t| (t.label.as_str(), t)).collect();
    let levels = cert.levels();

    // label tree completeness: children exist for every tile with a
    // recorded cut point, parents exist for everyone, terminals have none.
    let mut v = Vec::new();
    for t in &cert.tiles {
        if !t.label.is_empty() {
            let parent = &t.label[..t.label.len() - 1];
            if !by_label.contains_key(parent) {
                v.push(format!("tile {} has no parent tile", t.label));
            }
        }
        if t.chosen_point.is_some() {
            for k in 1..=cert.alphabet {
                let child = format!("{}{}", t.label, k);
                if !by_label.contains_key(child.as_str()) {
                    v.push(format!("tile {} was cut but child {child} is missing", t.label));
                }
            }
        }
        if t.kind == "terminal" && by_label.contains_key(format!("{}1", t.label).as_str()) {
            v.push(format!("terminal tile {} has children", t.label));
        }
    }
    report.push("label-tree", v);

    // sign discipline per tile
    let mut v = Vec::new();
    for t in &cert.tiles {
        if t.marked.len() > 2 {
            v.push(format!("tile {} has {} marked leaves", t.label, t.marked.len()));
        }
        if t.marked.len() == 2 && t.marked[0].sign == t.marked[1].sign {
            v.push(format!("tile {} has two marked leaves of equal sign", t.label));
        }
        for leaf in &t.marked {
            if Sign::parse(&leaf.sign).is_none() {
                v.push(format!("tile {} has malformed sign {:?}", t.label, leaf.sign));
            }
        }
    }
    report.push("sign-discipline", v);

    // mark passing along the label tree
    let mut v = Vec::new();
    for t in &cert.tiles {
        let Some(chosen) = &t.chosen_point else { continue };
        for k in 1..=cert.alphabet {
            let child_label = format!("{}{}", t.label, k);
            let Some(child) = by_label.get(child_label.as_str()) else { continue };
            // the cut point is marked + in child 1, − elsewhere
            let cut_sign = if k == 1 { "+" } else { "-" };
            match child.marked.iter().find(|l| l.vertex == chosen.vertex) {
                None => v.push(format!("child {child_label} misses the cut point")),
                Some(l) if l.sign != cut_sign => v.push(format!(
                    "child {child_label} marks the cut point {} not {}",
                    l.sign, cut_sign
                )),
                _ => {}
            }
            // every child mark is either the cut point or an inherited one
            for l in &child.marked {
                if l.vertex != chosen.vertex
                    && !t.marked.iter().any(|pl| pl.vertex == l.vertex && pl.sign == l.sign)
                {
                    v.push(format!(
                        "child {child_label} marks {} which the parent does not explain",
                        l.vertex
                    ));
                }
            }
        }
        // parent marks pass to the sign-determined child
        for pl in &t.marked {
            let target = if pl.sign == "-" { 1 } else { 2 };
            let child_label = format!("{}{}", t.label, target);
            if let Some(child) = by_label.get(child_label.as_str()) {
                if !child.marked.iter().any(|l| l.vertex == pl.vertex && l.sign == pl.sign) {
                    v.push(format!(
                        "mark {}{} of tile {} did not pass to child {child_label}",
                        pl.vertex, pl.sign, t.label
                    ));
                }
            }
        }
    }
    report.push("mark-passing", v);

    // same-level intersections: recompute from marked keys, compare with the
    // stored records, enforce singletons.
    let mut v = Vec::new();
    for (level, tiles) in &levels {
        let mut shared: HashMap<(usize, usize), Vec<String>> = HashMap::new();
        let mut by_key: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, t) in tiles.iter().enumerate() {
            for l in &t.marked {
                by_key.entry(&l.vertex).or_default().push(i);
            }
        }
        for (key, holders) in &by_key {
            for a in 0..holders.len() {
                for b in a + 1..holders.len() {
                    if holders[a] == holders[b] {
                        v.push(format!(
                            "tile {} marks {} twice (level {level})",
                            tiles[holders[a]].label, key
                        ));
                        continue;
                    }
                    shared
                        .entry((holders[a].min(holders[b]), holders[a].max(holders[b])))
                        .or_default()
                        .push(key.to_string());
                }
            }
        }
        for ((a, b), keys) in &shared {
            if keys.len() > 1 {
                v.push(format!(
                    "tiles {} and {} share {} marked points (level {level})",
                    tiles[*a].label,
                    tiles[*b].label,
                    keys.len()
                ));
            }
        }
        for (i, t) in tiles.iter().enumerate() {
            for rec in &t.intersections {
                let Some(j) = tiles.iter().position(|o| o.label == rec.other_label) else {
                    v.push(format!("tile {} records unknown tile {}", t.label, rec.other_label));
                    continue;
                };
                let pair = (i.min(j), i.max(j));
                if !shared
                    .get(&pair)
                    .is_some_and(|keys| keys.contains(&rec.vertex))
                {
                    v.push(format!(
                        "tile {} records intersection with {} at {} not backed by marks",
                        t.label, rec.other_label, rec.vertex
                    ));
                    continue;
                }
                let my = t.marked.iter().find(|l| l.vertex == rec.vertex);
                let other = tiles[j].marked.iter().find(|l| l.vertex == rec.vertex);
                if my.map(|l| l.sign.as_str()) != Some(rec.my_sign.as_str())
                    || other.map(|l| l.sign.as_str()) != Some(rec.other_sign.as_str())
                {
                    v.push(format!(
                        "tile {} intersection record with {} has inconsistent signs",
                        t.label, rec.other_label
                    ));
                }
            }
            for (&(a, b), keys) in &shared {
                if a == i || b == i {
                    let other = if a == i { b } else { a };
                    for key in keys {
                        if !t
                            .intersections
                            .iter()
                            .any(|r| r.other_label == tiles[other].label && r.vertex == *key)
                        {
                            v.push(format!(
                                "tile {} misses intersection record with {}",
                                t.label, tiles[other].label
                            ));
                        }
                    }
                }
            }
        }
    }
    report.push("intersections", v);

    // global distinctness of cut points
    let mut v = Vec::new();
    let mut seen: HashMap<&str, &str> = HashMap::new();
    for t in &cert.tiles {
        if let Some(c) = &t.chosen_point {
            if let Some(prev) = seen.insert(&c.vertex, &t.label) {
                v.push(format!(
                    "cut point {} reused by tiles {} and {}",
                    c.vertex, prev, t.label
                ));
            }
        }
    }
    report.push("cut-point-distinctness", v);

    // diameters: per-level maxima, monotone
    let mut v = Vec::new();
    let mut max_seq: Vec<Rational> = Vec::new();
    for tiles in levels.values() {
        let mut mx = Rational::zero();
        for t in tiles {
            match parse_rational(&t.diameter) {
                Some(d) => {
                    if d > mx {
                        mx = d;
                    }
                }
                None => v.push(format!("tile {} has malformed diameter", t.label)),
            }
        }
        max_seq.push(mx);
    }
    for w in max_seq.windows(2) {
        if w[1] > w[0] {
            v.push("per-level max diameter increased".into());
        }
    }
    report.strictly_decreasing = max_seq.windows(2).all(|w| w[1] < w[0]);
    report.per_level_max_diameter = max_seq.iter().map(|d| d.to_string()).collect();
    report.push("diameters", v);

    report
}

/// Deep verification of a tree-backed decomposition against the tree itself:
/// exact set-level union, child partition, singleton marked intersections,
/// leaf/branch-point status of marks, and cut-point distinctness.
pub fn verify_decomposition(d: &Decomposition, tree: &FiniteMetricTree) -> VerifyReport {
    let mut report = VerifyReport {
        pass: true,
        checks: Vec::new(),
        per_level_max_diameter: Vec::new(),
        strictly_decreasing: true,
    };

    // effective cover at each level (tiles of the level plus shallower
    // terminal or unexpanded tiles) covers every vertex; children partition
    // their parent exactly.
    let mut v = Vec::new();
    for level in 0..=d.depth {
        let mut covered = vec![false; tree.vertex_count()];
        for t in &d.tiles {
            let in_cover =
                t.level == level || (t.level < level && t.children.is_empty());
            if in_cover {
                for &x in &t.vertices {
                    covered[x as usize] = true;
                }
            }
        }
        if let Some(miss) = covered.iter().position(|c| !c) {
            v.push(format!("vertex {miss} not covered at level {level}"));
        }
    }
    for t in &d.tiles {
        if t.children.is_empty() {
            continue;
        }
        let mut union: Vec<VertexId> = t
            .children
            .iter()
            .flat_map(|&ci| d.tiles[ci].vertices.iter().copied())
            .collect();
        union.sort_unstable();
        let c = t.chosen.expect("cut tile has a chosen point");
        let dup = union.iter().filter(|&&x| x == c).count();
        if dup != d.m as usize {
            v.push(format!("cut point multiplicity {dup} in children of {}", t.label));
        }
        union.dedup();
        if union != t.vertices {
            v.push(format!("children of {} do not partition it", t.label));
        }
    }
    report.push("union", v);

    // same-level pairwise intersections are single marked-in-both points
    let mut v = Vec::new();
    for level in 1..=d.depth {
        let tiles: Vec<&TileNode> = d.tiles_at_level(level).collect();
        let mut owner: HashMap<VertexId, Vec<usize>> = HashMap::new();
        for (i, t) in tiles.iter().enumerate() {
            for &x in &t.vertices {
                owner.entry(x).or_default().push(i);
            }
        }
        let mut pair_counts: HashMap<(usize, usize), usize> = HashMap::new();
        for (x, holders) in &owner {
            if holders.len() < 2 {
                continue;
            }
            for &i in holders {
                if !tiles[i].marked.iter().any(|sl| sl.vertex == *x) {
                    v.push(format!(
                        "vertex {x} shared but unmarked in tile {} (level {level})",
                        tiles[i].label
                    ));
                }
            }
            for a in 0..holders.len() {
                for b in a + 1..holders.len() {
                    *pair_counts.entry((holders[a], holders[b])).or_default() += 1;
                }
            }
        }
        for ((a, b), n) in pair_counts {
            if n > 1 {
                v.push(format!(
                    "tiles {} and {} share {n} vertices (level {level})",
                    tiles[a].label, tiles[b].label
                ));
            }
        }
    }
    report.push("intersections", v);

    // marked leaves are leaves of their tile; in the plain procedure they
    // are also branch points of the ambient tree
    let mut v = Vec::new();
    for t in &d.tiles {
        for sl in &t.marked {
            let deg_in_tile = tree
                .neighbors(sl.vertex)
                .filter(|w| t.vertices.binary_search(w).is_ok())
                .count();
            if deg_in_tile != 1 {
                v.push(format!(
                    "mark {} of tile {} has tile degree {deg_in_tile}",
                    sl.vertex, t.label
                ));
            }
            if !d.normalized && tree.degree(sl.vertex) < 3 {
                v.push(format!(
                    "mark {} of tile {} is not an ambient branch point",
                    sl.vertex, t.label
                ));
            }
        }
        if let Some(c) = t.chosen {
            if t.marked.iter().any(|sl| sl.vertex == c) {
                v.push(format!("cut point of {} is one of its marks", t.label));
            }
        }
    }
    report.push("marks", v);

    // distinct cut points
    let mut v = Vec::new();
    let mut seen: HashMap<VertexId, &FiniteWord> = HashMap::new();
    for t in &d.tiles {
        if let Some(c) = t.chosen {
            if let Some(prev) = seen.insert(c, &t.label) {
                v.push(format!("cut point {c} reused by {prev} and {}", t.label));
            }
        }
    }
    report.push("cut-point-distinctness", v);

    // diameters
    let mut max_seq: Vec<Rational> = Vec::new();
    for level in 0..=d.depth {
        let mut mx = Rational::zero();
        for (i, t) in d.tiles.iter().enumerate() {
            if t.level == level && d.diameters[i] > mx {
                mx = d.diameters[i].clone();
            }
        }
        max_seq.push(mx);
    }
    report.strictly_decreasing = max_seq.windows(2).all(|w| w[1] < w[0]);
    report.per_level_max_diameter = max_seq.iter().map(|x| x.to_string()).collect();
    let mut v = Vec::new();
    for w in max_seq.windows(2) {
        if w[1] > w[0] {
            v.push("per-level max diameter increased".into());
        }
    }
    report.push("diameters", v);

    report
}
