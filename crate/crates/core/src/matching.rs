//! Verifies that two decompositions have the same combinatorics and builds
//! the induced finite-depth correspondence.
//!
//! Two certificates match to depth `n` when their label trees agree level by
//! level (inclusion pattern) and, for every same-level pair of labels, the
//! tiles intersect on one side exactly when they intersect on the other,
//! with the shared marked leaf carrying the same signs in both. A matching
//! pair of decompositions pins a pointwise correspondence on cut points and
//! marked leaves, with a per-level modulus table bounding how far apart
//! images can drift inside a tile.

use crate::decompose::{Certificate, CertTile, Decomposition};
use crate::exact::{parse_rational, Rational};
use crate::tree::VertexId;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("decomposition does not reach depth {0}: tile {1} is terminal at level {2}")]
    DepthUnavailable(usize, String, usize),
    #[error("alphabet sizes differ: {0} vs {1}")]
    AlphabetMismatch(u8, u8),
    #[error("matching failed with {0} violations")]
    MatchFailed(usize),
    #[error("point outside the matched domain: {0}")]
    OutOfDomain(String),
    #[error("unknown label {0}")]
    UnknownLabel(String),
}

/// One discrepancy between the two sides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub level: usize,
    pub labels: (String, String),
    pub kind: String,
}

/// Result of the combinatorial comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchReport {
    pub depth: usize,
    /// Label-tree (inclusion-pattern) discrepancies.
    pub iff1_violations: Vec<Violation>,
    /// Intersection-pattern and sign discrepancies.
    pub iff2_violations: Vec<Violation>,
    /// Number of label pairs compared across all levels.
    pub compared: usize,
    /// Labels excluded because a terminal tile cuts their lineage off on
    /// one side; the comparison runs on the common label tree.
    pub pruned: usize,
    pub pass: bool,
}

fn tiles_to_depth(
    cert: &Certificate,
    depth: usize,
) -> Result<BTreeMap<usize, BTreeMap<&str, &CertTile>>, MatchError> {
    let mut out: BTreeMap<usize, BTreeMap<&str, &CertTile>> = BTreeMap::new();
    let mut max_level = 0;
    for t in &cert.tiles {
        max_level = max_level.max(t.level);
        if t.level <= depth {
            out.entry(t.level).or_default().insert(&t.label, t);
        }
    }
    if max_level < depth {
        // terminal tiles cut every lineage off before the requested depth
        let blocker = cert
            .tiles
            .iter()
            .filter(|t| t.kind == "terminal")
            .min_by_key(|t| t.level)
            .map(|t| (t.label.clone(), t.level))
            .unwrap_or((format!("<max level {max_level}>"), max_level));
        return Err(MatchError::DepthUnavailable(depth, blocker.0, blocker.1));
    }
    Ok(out)
}

/// Is the absence of `label` in this certificate explained by a terminal
/// ancestor (or an ancestor missing for the same reason)?
fn prunable(levels: &BTreeMap<usize, BTreeMap<&str, &CertTile>>, label: &str) -> bool {
    let mut anc = label;
    while !anc.is_empty() {
        anc = &anc[..anc.len() - 1];
        if let Some(t) = levels.get(&anc.len()).and_then(|m| m.get(anc)) {
            return t.kind == "terminal" || t.chosen_point.is_none();
        }
    }
    false
}

/// Shared vertex key with its sign in each of the two tiles of a pair.
type SharedLeafRecords = Vec<(String, String, String)>;

/// Shared-marked-leaf pattern of one level: for each unordered label pair
/// with nonempty intersection, the shared vertex key and its two signs.
/// Only `live` labels participate.
fn intersection_pattern<'a>(
    tiles: &BTreeMap<&'a str, &'a CertTile>,
    live: &std::collections::HashSet<&str>,
) -> HashMap<(&'a str, &'a str), SharedLeafRecords> {
    let mut by_key: HashMap<&str, Vec<(&'a str, &str)>> = HashMap::new();
    for (label, t) in tiles {
        if !live.contains(label) {
            continue;
        }
        for l in &t.marked {
            by_key.entry(&l.vertex).or_default().push((label, &l.sign));
        }
    }
    let mut out: HashMap<(&str, &str), SharedLeafRecords> = HashMap::new();
    for (key, holders) in by_key {
        for a in 0..holders.len() {
            for b in a + 1..holders.len() {
                let ((la, sa), (lb, sb)) = (holders[a], holders[b]);
                let (pair, signs) = if la <= lb {
                    ((la, lb), (sa.to_string(), sb.to_string()))
                } else {
                    ((lb, la), (sb.to_string(), sa.to_string()))
                };
                out.entry(pair)
                    .or_default()
                    .push((key.to_string(), signs.0, signs.1));
            }
        }
    }
    out
}

/// Checks the two matching conditions between certificates down to `depth`.
///
/// Labels whose lineage is cut off by a terminal tile on either side are
/// pruned from the comparison (and counted); every surviving same-level
/// label pair must intersect on one side exactly when it does on the other,
/// with equal signs at the shared marked leaf.
pub fn check_matching(
    a: &Certificate,
    b: &Certificate,
    depth: usize,
) -> Result<MatchReport, MatchError> {
    if a.alphabet != b.alphabet {
        return Err(MatchError::AlphabetMismatch(a.alphabet, b.alphabet));
    }
    let la = tiles_to_depth(a, depth)?;
    let lb = tiles_to_depth(b, depth)?;
    let mut iff1 = Vec::new();
    let mut iff2 = Vec::new();
    let mut pruned = 0usize;
    let mut compared = 0usize;
    let empty = BTreeMap::new();
    for level in 0..=depth {
        let ta = la.get(&level).unwrap_or(&empty);
        let tb = lb.get(&level).unwrap_or(&empty);
        // the common label tree; asymmetric absences are violations unless a
        // terminal ancestor explains them
        let mut live: std::collections::HashSet<&str> = std::collections::HashSet::new();
        for label in ta.keys() {
            if tb.contains_key(label) {
                live.insert(label);
            } else if prunable(&lb, label) {
                pruned += 1;
            } else {
                iff1.push(Violation {
                    level,
                    labels: (label.to_string(), String::new()),
                    kind: "label missing on right side".into(),
                });
            }
        }
        for label in tb.keys() {
            if !ta.contains_key(label) {
                if prunable(&la, label) {
                    pruned += 1;
                } else {
                    iff1.push(Violation {
                        level,
                        labels: (String::new(), label.to_string()),
                        kind: "label missing on left side".into(),
                    });
                }
            }
        }
        // intersection patterns agree, with matching signs on both sides
        let pa = intersection_pattern(ta, &live);
        let pb = intersection_pattern(tb, &live);
        compared += live.len();
        for (pair, recs_a) in &pa {
            match pb.get(pair) {
                None => iff2.push(Violation {
                    level,
                    labels: (pair.0.to_string(), pair.1.to_string()),
                    kind: "tiles intersect on the left only".into(),
                }),
                Some(recs_b) => {
                    if recs_a.len() != 1 || recs_b.len() != 1 {
                        iff2.push(Violation {
                            level,
                            labels: (pair.0.to_string(), pair.1.to_string()),
                            kind: format!(
                                "non-singleton intersection ({} vs {})",
                                recs_a.len(),
                                recs_b.len()
                            ),
                        });
                        continue;
                    }
                    let (_, sa1, sa2) = &recs_a[0];
                    let (_, sb1, sb2) = &recs_b[0];
                    if sa1 != sb1 || sa2 != sb2 {
                        iff2.push(Violation {
                            level,
                            labels: (pair.0.to_string(), pair.1.to_string()),
                            kind: format!("sign mismatch: ({sa1},{sa2}) vs ({sb1},{sb2})"),
                        });
                    }
                }
            }
        }
        for pair in pb.keys() {
            if !pa.contains_key(pair) {
                iff2.push(Violation {
                    level,
                    labels: (pair.0.to_string(), pair.1.to_string()),
                    kind: "tiles intersect on the right only".into(),
                });
            }
        }
    }
    let pass = iff1.is_empty() && iff2.is_empty();
    Ok(MatchReport {
        depth,
        iff1_violations: iff1,
        iff2_violations: iff2,
        compared,
        pruned,
        pass,
    })
}

/// A vertex key with its optional exact position, one side of a pair.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SidePoint {
    pub vertex: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos: Option<[String; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointPair {
    pub label: String,
    pub t: SidePoint,
    pub s: SidePoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkedPair {
    pub label: String,
    pub sign: String,
    pub t: SidePoint,
    pub s: SidePoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulusRow {
    pub level: usize,
    pub t_max_diameter: String,
    pub s_max_diameter: String,
    pub t_max_diameter_approx: f64,
    pub s_max_diameter_approx: f64,
}

/// The discrete correspondence induced by a matching pair of
/// decompositions: cut-point pairs and marked-leaf pairs per label, plus the
/// per-level modulus table. Finite-depth data only; the modulus table is the
/// continuity budget (two points in one level-n tile map within twice the
/// level-n max diameter of the other side).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Correspondence {
    pub effective_depth: usize,
    pub pairs: Vec<PointPair>,
    pub marked_pairs: Vec<MarkedPair>,
    pub modulus: Vec<ModulusRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf_chains: Option<Vec<LeafChain>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafChain {
    pub t_leaf: String,
    pub s_leaf: String,
    pub labels: Vec<String>,
}

/// Builds the correspondence after a successful match.
pub fn build_correspondence(
    a: &Certificate,
    b: &Certificate,
    depth: usize,
) -> Result<Correspondence, MatchError> {
    let report = check_matching(a, b, depth)?;
    if !report.pass {
        return Err(MatchError::MatchFailed(
            report.iff1_violations.len() + report.iff2_violations.len(),
        ));
    }
    let la = tiles_to_depth(a, depth)?;
    let lb = tiles_to_depth(b, depth)?;
    let mut pairs = Vec::new();
    let mut marked_pairs = Vec::new();
    let mut modulus = Vec::new();
    let empty = BTreeMap::new();
    for level in 0..=depth {
        let ta = la.get(&level).unwrap_or(&empty);
        let tb = lb.get(&level).unwrap_or(&empty);
        let mut t_max = Rational::from_integer(0.into());
        let mut s_max = t_max.clone();
        for (label, at) in ta {
            let Some(bt) = tb.get(label) else { continue };
            if let Some(d) = parse_rational(&at.diameter) {
                if d > t_max {
                    t_max = d;
                }
            }
            if let Some(d) = parse_rational(&bt.diameter) {
                if d > s_max {
                    s_max = d;
                }
            }
            if let (Some(ca), Some(cb)) = (&at.chosen_point, &bt.chosen_point) {
                if level < depth {
                    pairs.push(PointPair {
                        label: label.to_string(),
                        t: SidePoint {
                            vertex: ca.vertex.clone(),
                            pos: ca.pos.clone(),
                        },
                        s: SidePoint {
                            vertex: cb.vertex.clone(),
                            pos: cb.pos.clone(),
                        },
                    });
                }
            }
            // marked leaves pair by sign (at most one of each per tile)
            for sign in ["-", "+"] {
                let ma = at.marked.iter().find(|l| l.sign == sign);
                let mb = bt.marked.iter().find(|l| l.sign == sign);
                match (ma, mb) {
                    (Some(x), Some(y)) => marked_pairs.push(MarkedPair {
                        label: label.to_string(),
                        sign: sign.into(),
                        t: SidePoint {
                            vertex: x.vertex.clone(),
                            pos: x.pos.clone(),
                        },
                        s: SidePoint {
                            vertex: y.vertex.clone(),
                            pos: y.pos.clone(),
                        },
                    }),
                    (None, None) => {}
                    _ => {
                        return Err(MatchError::MatchFailed(1));
                    }
                }
            }
        }
        modulus.push(ModulusRow {
            level,
            t_max_diameter: t_max.to_string(),
            s_max_diameter: s_max.to_string(),
            t_max_diameter_approx: crate::exact::rational_to_f64(&t_max),
            s_max_diameter_approx: crate::exact::rational_to_f64(&s_max),
        });
    }
    Ok(Correspondence {
        effective_depth: depth,
        pairs,
        marked_pairs,
        modulus,
        leaf_chains: None,
    })
}

impl Correspondence {
    pub fn pair_for(&self, label: &str) -> Option<&PointPair> {
        self.pairs.iter().find(|p| p.label == label)
    }

    /// Maps a vertex of the left tree through the correspondence: descends
    /// the left decomposition's tile chain at the vertex and returns the
    /// deepest matched tile's right-side representative (its cut point, or
    /// its marked leaf when the chain ends at the query).
    ///
    /// The error of this representative is bounded by the right-side modulus
    /// at the effective depth.
    pub fn map_point(
        &self,
        d_t: &Decomposition,
        x: VertexId,
    ) -> Result<SidePoint, MatchError> {
        let mut idx = d_t.root;
        let deepest_label;
        loop {
            let tile = &d_t.tiles[idx];
            if tile.level >= self.effective_depth || tile.children.is_empty() {
                if tile.level < self.effective_depth {
                    return Err(MatchError::OutOfDomain(format!(
                        "vertex {x} ends in unmatched tile {} at level {}",
                        tile.label, tile.level
                    )));
                }
                deepest_label = tile.label.to_string();
                break;
            }
            if Some(x) == tile.chosen {
                deepest_label = tile.label.to_string();
                break;
            }
            let next = tile
                .children
                .iter()
                .copied()
                .find(|&ci| d_t.tiles[ci].vertices.binary_search(&x).is_ok());
            match next {
                Some(ci) => idx = ci,
                None => {
                    return Err(MatchError::OutOfDomain(format!(
                        "vertex {x} not in any child of {}",
                        tile.label
                    )))
                }
            }
        }
        // If the chain stopped at a cut point, its pair is exact.
        if let Some(p) = self.pair_for(&deepest_label) {
            let tile = d_t
                .tiles
                .iter()
                .find(|t| t.label.to_string() == deepest_label)
                .ok_or_else(|| MatchError::UnknownLabel(deepest_label.clone()))?;
            if tile.chosen == Some(x) {
                return Ok(p.s.clone());
            }
        }
        // If the query is a marked leaf of the final tile, return the
        // matched marked leaf (well-defined across the tiles sharing it).
        let tile = d_t
            .tiles
            .iter()
            .find(|t| t.label.to_string() == deepest_label)
            .ok_or_else(|| MatchError::UnknownLabel(deepest_label.clone()))?;
        if let Some(sl) = tile.marked.iter().find(|sl| sl.vertex == x) {
            if let Some(mp) = self
                .marked_pairs
                .iter()
                .find(|mp| mp.label == deepest_label && mp.sign == sl.sign.as_str())
            {
                return Ok(mp.s.clone());
            }
        }
        // Otherwise any representative of the matched tile works up to the
        // modulus; use the cut point of the deepest matched ancestor, or the
        // marked leaf of the final tile.
        if let Some(p) = self.pair_for(&deepest_label) {
            return Ok(p.s.clone());
        }
        self.marked_pairs
            .iter()
            .find(|mp| mp.label == deepest_label)
            .map(|mp| mp.s.clone())
            .ok_or_else(|| MatchError::OutOfDomain(format!("no representative for {deepest_label}")))
    }
}

/// Runs the normalized 3-leaf pipeline: decomposes both trees with the
/// distinguished leaves, matches, and records the three leaf chains.
pub fn match_normalized(
    tree_a: &crate::tree::FiniteMetricTree,
    leaves_a: [VertexId; 3],
    tree_b: &crate::tree::FiniteMetricTree,
    leaves_b: [VertexId; 3],
    depth: usize,
) -> Result<(Correspondence, Decomposition, Decomposition), Box<dyn std::error::Error>> {
    let stop = crate::decompose::StopRule::depth(depth);
    let da = crate::decompose::decompose_normalized(tree_a, leaves_a, &stop)?;
    let db = crate::decompose::decompose_normalized(tree_b, leaves_b, &stop)?;
    let ca = da.certificate(tree_a, None);
    let cb = db.certificate(tree_b, None);
    let mut corr = build_correspondence(&ca, &cb, depth)?;
    let chain_of = |d: &Decomposition, leaf: VertexId| -> Vec<String> {
        let mut labels = Vec::new();
        let mut idx = d.root;
        loop {
            let tile = &d.tiles[idx];
            if !tile.label.is_empty() {
                labels.push(tile.label.to_string());
            }
            let next = tile
                .children
                .iter()
                .copied()
                .find(|&ci| d.tiles[ci].vertices.binary_search(&leaf).is_ok());
            match next {
                Some(ci) => idx = ci,
                None => break,
            }
        }
        labels
    };
    // The distinguished leaves ride fixed label chains: the minus leaf down
    // the 1-children, the second down the 2-children, the third into tile 3
    // and then down the 2-children.
    let expected_label = |leaf: usize, level: usize| -> String {
        match leaf {
            0 => "1".repeat(level),
            1 => "2".repeat(level),
            _ => format!("3{}", "2".repeat(level - 1)),
        }
    };
    let mut chains = Vec::new();
    for i in 0..3 {
        let ta = chain_of(&da, leaves_a[i]);
        let tb = chain_of(&db, leaves_b[i]);
        for chain in [&ta, &tb] {
            for (k, label) in chain.iter().enumerate() {
                if *label != expected_label(i, k + 1) {
                    return Err(Box::new(MatchError::MatchFailed(1)));
                }
            }
        }
        let common = ta.len().min(tb.len());
        chains.push(LeafChain {
            t_leaf: format!("v{}", leaves_a[i]),
            s_leaf: format!("v{}", leaves_b[i]),
            labels: ta[..common].to_vec(),
        });
    }
    corr.leaf_chains = Some(chains);
    Ok((corr, da, db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{decompose, reference_certificate, StopRule};
    use crate::exact::{int, Point};
    use crate::ifs::jn_segments;
    use crate::tree::{from_segments, FiniteMetricTree};

    fn j_tree(n: usize) -> FiniteMetricTree {
        from_segments(&jn_segments(n)).unwrap()
    }

    fn find_pos(t: &FiniteMetricTree, p: Point) -> VertexId {
        (0..t.vertex_count() as u32)
            .find(|&v| t.position(v) == Some(&p))
            .unwrap()
    }

    #[test]
    fn self_match_passes() {
        let cert = reference_certificate(3).unwrap();
        let report = check_matching(&cert, &cert, 3).unwrap();
        assert!(report.pass);
        assert!(report.iff1_violations.is_empty());
        assert!(report.iff2_violations.is_empty());
    }

    #[test]
    fn j_tree_matches_reference() {
        let tree = j_tree(7);
        let d = decompose(&tree, 3, &StopRule::depth(3)).unwrap();
        let cert = d.certificate(&tree, None);
        let reference = reference_certificate(3).unwrap();
        let report = check_matching(&reference, &cert, 3).unwrap();
        assert!(report.pass, "{:?} {:?}", report.iff1_violations, report.iff2_violations);
        // symmetric
        let report = check_matching(&cert, &reference, 3).unwrap();
        assert!(report.pass);
        // correspondence is the identity on junction positions
        let corr = build_correspondence(&reference, &cert, 3).unwrap();
        for p in &corr.pairs {
            assert_eq!(p.t.pos, p.s.pos, "label {}", p.label);
        }
    }

    #[test]
    fn flipped_sign_is_detected() {
        let tree = j_tree(6);
        let d = decompose(&tree, 3, &StopRule::depth(2)).unwrap();
        let mut cert = d.certificate(&tree, None);
        let reference = reference_certificate(2).unwrap();
        assert!(check_matching(&reference, &cert, 2).unwrap().pass);
        // flip one marked sign on a level-2 tile
        let idx = cert
            .tiles
            .iter()
            .position(|t| t.level == 2 && !t.marked.is_empty())
            .unwrap();
        let old = cert.tiles[idx].marked[0].sign.clone();
        cert.tiles[idx].marked[0].sign = if old == "-" { "+".into() } else { "-".into() };
        let report = check_matching(&reference, &cert, 2).unwrap();
        assert!(!report.pass);
        assert!(report.iff2_violations.iter().any(|v| v.kind.contains("sign")));
        assert!(matches!(
            build_correspondence(&reference, &cert, 2),
            Err(MatchError::MatchFailed(_))
        ));
    }

    #[test]
    fn depth_unavailable_on_terminal() {
        // 3-star decomposition terminates at level 1
        let star = FiniteMetricTree::new(
            4,
            vec![(0, 1, int(3)), (0, 2, int(2)), (0, 3, int(1))],
            vec![],
        )
        .unwrap();
        let d = decompose(&star, 3, &StopRule::depth(4)).unwrap();
        let cert = d.certificate(&star, None);
        let reference = reference_certificate(4).unwrap();
        assert!(matches!(
            check_matching(&reference, &cert, 3),
            Err(MatchError::DepthUnavailable(3, _, 1))
        ));
    }

    #[test]
    fn map_point_examples() {
        let tree = j_tree(7);
        let d = decompose(&tree, 3, &StopRule::depth(3)).unwrap();
        let cert = d.certificate(&tree, None);
        let reference = reference_certificate(3).unwrap();
        let corr = build_correspondence(&cert, &reference, 3).unwrap();
        // a cut point maps to its recorded pair exactly
        let center = find_pos(&tree, Point::zero());
        let img = corr.map_point(&d, center).unwrap();
        assert_eq!(img.vertex, Point::zero().canonical_string());
        let sub = find_pos(&tree, Point::new(int(0), crate::exact::ratio(1, 2)));
        let img = corr.map_point(&d, sub).unwrap();
        assert_eq!(
            img.vertex,
            Point::new(int(0), crate::exact::ratio(1, 2)).canonical_string()
        );
        // a generic vertex maps into the right tile up to the modulus
        let leaf = find_pos(&tree, Point::from_ints(-1, 0));
        let img = corr.map_point(&d, leaf).unwrap();
        assert!(img.pos.is_some());
    }

    #[test]
    fn map_point_out_of_domain_in_terminal() {
        let star = FiniteMetricTree::new(
            4,
            vec![(0, 1, int(3)), (0, 2, int(2)), (0, 3, int(1))],
            vec![],
        )
        .unwrap();
        let d = decompose(&star, 3, &StopRule::depth(4)).unwrap();
        let cert = d.certificate(&star, None);
        let corr = build_correspondence(&cert, &cert, 1).unwrap();
        // depth 1 matched; leaves inside level-1 tiles are fine
        assert!(corr.map_point(&d, 1).is_ok());
        // but matching to depth 2 is unavailable: terminal at level 1
        assert!(matches!(
            build_correspondence(&cert, &cert, 2),
            Err(MatchError::DepthUnavailable(2, _, 1))
        ));
    }

    #[test]
    fn correspondence_respects_inclusion_and_modulus() {
        let tree = j_tree(7);
        let d = decompose(&tree, 3, &StopRule::depth(3)).unwrap();
        let cert = d.certificate(&tree, None);
        let reference = reference_certificate(3).unwrap();
        let corr = build_correspondence(&cert, &reference, 3).unwrap();
        // inclusion: the pair point of an extended label lies in the parent
        // tile on the tree side
        for p in &corr.pairs {
            if p.label.is_empty() {
                continue;
            }
            let parent = &p.label[..p.label.len() - 1];
            let parent_tile = d
                .tiles
                .iter()
                .find(|t| t.label.to_string() == parent)
                .unwrap();
            let v: VertexId = p.t.vertex[1..].parse().unwrap();
            assert!(parent_tile.vertices.binary_search(&v).is_ok());
        }
        // modulus soundness: two vertices of one level-3 tile map within
        // twice the reference-side level-3 max diameter
        let s_mod = corr.modulus[3].s_max_diameter_approx;
        let tile = d.tiles_at_level(3).next().unwrap();
        let mut images = Vec::new();
        for &x in tile.vertices.iter().take(12) {
            let img = corr.map_point(&d, x).unwrap();
            let pos = img.pos.unwrap();
            let px: f64 = crate::exact::rational_to_f64(
                &crate::exact::parse_rational(&pos[0]).unwrap(),
            );
            let py: f64 = crate::exact::rational_to_f64(
                &crate::exact::parse_rational(&pos[1]).unwrap(),
            );
            images.push((px, py));
        }
        for a in &images {
            for b in &images {
                let dist = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                assert!(dist <= 2.0 * s_mod + 1e-12, "{dist} vs {s_mod}");
            }
        }
    }

    #[test]
    fn normalized_chains() {
        let ta = j_tree(6);
        let tb = j_tree(5);
        let la = [
            find_pos(&ta, Point::from_ints(-1, 0)),
            find_pos(&ta, Point::from_ints(1, 0)),
            find_pos(&ta, Point::from_ints(0, 1)),
        ];
        // a different leaf triple on the other side
        let lb = [
            find_pos(&tb, Point::from_ints(0, 1)),
            find_pos(&tb, Point::from_ints(-1, 0)),
            find_pos(&tb, Point::from_ints(1, 0)),
        ];
        let (corr, _da, _db) = match_normalized(&ta, la, &tb, lb, 2).unwrap();
        let chains = corr.leaf_chains.unwrap();
        assert_eq!(chains[0].labels, vec!["1", "11"]);
        assert_eq!(chains[1].labels, vec!["2", "22"]);
        assert_eq!(chains[2].labels, vec!["3", "32"]);
    }

    #[test]
    fn alphabet_mismatch() {
        let star4 = FiniteMetricTree::new(
            5,
            vec![(0, 1, int(1)), (0, 2, int(1)), (0, 3, int(1)), (0, 4, int(1))],
            vec![],
        )
        .unwrap();
        let d4 = decompose(&star4, 4, &StopRule::depth(1)).unwrap();
        let c4 = d4.certificate(&star4, None);
        let c3 = reference_certificate(1).unwrap();
        assert!(matches!(
            check_matching(&c3, &c4, 1),
            Err(MatchError::AlphabetMismatch(3, 4))
        ));
    }
}
