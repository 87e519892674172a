//! The three generator similarities, exact composition and fixed points, the
//! coding map from addresses to plane points, tile boundary corners with
//! signs, and the segment/polygon approximants of the attractor.

use crate::exact::{pow2, ratio, Point, Rational};
use crate::words::{FiniteWord, Letter, PeriodicWord};
use num::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IfsError {
    #[error("letter {0} outside 1..=3")]
    BadLetter(u8),
    #[error("map is not a strict contraction")]
    NotContracting,
    #[error("base point lies outside the invariant hull")]
    PointOutsideHull,
}

/// An orientation-aware contracting similarity of the plane:
/// `z ↦ a·z + b` or, when `conjugating`, `z ↦ a·z̄ + b`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PlanarSimilarity {
    pub conjugating: bool,
    pub a: Point,
    pub b: Point,
}

impl PlanarSimilarity {
    pub fn identity() -> Self {
        PlanarSimilarity {
            conjugating: false,
            a: Point::from_ints(1, 0),
            b: Point::zero(),
        }
    }

    pub fn apply(&self, z: &Point) -> Point {
        let w = if self.conjugating { z.conj() } else { z.clone() };
        self.a.mul_c(&w) + self.b.clone()
    }

    /// `self ∘ other`: conjugating flags xor, multipliers multiply.
    pub fn compose(&self, other: &PlanarSimilarity) -> PlanarSimilarity {
        let (oa, ob) = if self.conjugating {
            (other.a.conj(), other.b.conj())
        } else {
            (other.a.clone(), other.b.clone())
        };
        PlanarSimilarity {
            conjugating: self.conjugating ^ other.conjugating,
            a: self.a.mul_c(&oa),
            b: self.a.mul_c(&ob) + self.b.clone(),
        }
    }

    /// Squared contraction factor `|a|²`.
    pub fn factor_sqr(&self) -> Rational {
        self.a.norm_sqr()
    }

    /// The unique fixed point of a strict contraction, exactly.
    pub fn fixed_point(&self) -> Result<Point, IfsError> {
        if self.factor_sqr() >= Rational::one() {
            return Err(IfsError::NotContracting);
        }
        if !self.conjugating {
            // z (1 - a) = b
            let one_minus_a = Point::from_ints(1, 0) - self.a.clone();
            let den = one_minus_a.norm_sqr();
            let z = self.b.mul_c(&one_minus_a.conj());
            Ok(Point::new(z.x / den.clone(), z.y / den))
        } else {
            // x = p x + q y + br ;  y = q x - p y + bi
            let (p, q) = (self.a.x.clone(), self.a.y.clone());
            let det = Rational::one() - self.a.norm_sqr();
            let x = (Rational::one() + &p) * &self.b.x + q.clone() * &self.b.y;
            let y = q * &self.b.x + (Rational::one() - p) * &self.b.y;
            Ok(Point::new(x / det.clone(), y / det))
        }
    }
}

/// Generator map for a letter: `1 ↦ z/2 − 1/2`, `2 ↦ z̄/2 + 1/2`,
/// `3 ↦ i·z̄/2 + i/2`.
pub fn generator(k: Letter) -> Result<PlanarSimilarity, IfsError> {
    let half = ratio(1, 2);
    match k.value() {
        1 => Ok(PlanarSimilarity {
            conjugating: false,
            a: Point::real(half.clone()),
            b: Point::real(-half),
        }),
        2 => Ok(PlanarSimilarity {
            conjugating: true,
            a: Point::real(half.clone()),
            b: Point::real(half),
        }),
        3 => Ok(PlanarSimilarity {
            conjugating: true,
            a: Point::new(Rational::zero(), half.clone()),
            b: Point::new(Rational::zero(), half),
        }),
        v => Err(IfsError::BadLetter(v)),
    }
}

/// Left-to-right composition of generators for a finite word; the empty word
/// gives the identity.
pub fn word_map(u: &FiniteWord) -> Result<PlanarSimilarity, IfsError> {
    let mut f = PlanarSimilarity::identity();
    for &l in u.letters() {
        f = f.compose(&generator(l)?);
    }
    Ok(f)
}

/// Exact evaluation of the coding map on an eventually periodic address:
/// the preperiod map applied to the fixed point of the period map.
pub fn address_point(w: &PeriodicWord) -> Result<Point, IfsError> {
    let head = word_map(w.preperiod())?;
    let cycle = word_map(w.period())?;
    Ok(head.apply(&cycle.fixed_point()?))
}

/// Iterative approximation `f_{w₁…wₙ}(z₀)`; its distance to the exact value
/// is at most `2^{-n} · diam(hull)`. Serves as an independent oracle for
/// [`address_point`].
pub fn address_point_iter(
    letters: impl Iterator<Item = Letter>,
    n: usize,
    z0: &Point,
) -> Result<Point, IfsError> {
    let prefix: Vec<Letter> = letters.take(n).collect();
    let mut z = z0.clone();
    for &l in prefix.iter().rev() {
        z = generator(l)?.apply(&z);
    }
    Ok(z)
}

/// Signed boundary corners of the tile labeled `u`, plus its junction point.
///
/// The boundary of a tile is contained in the images of the two base leaves;
/// which of them actually lie on the boundary follows a per-letter recursion
/// on the last letter of the label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileCorners {
    /// Image of the left base leaf, present iff it is a boundary point; sign −.
    pub minus_corner: Option<Point>,
    /// Image of the right base leaf, present iff it is a boundary point; sign +.
    pub plus_corner: Option<Point>,
    /// Image of the junction, `f_u(0)`.
    pub center: Point,
}

pub fn tile_corners(u: &FiniteWord) -> Result<TileCorners, IfsError> {
    let mut has_minus = false;
    let mut has_plus = false;
    for &l in u.letters() {
        match l.value() {
            1 => has_plus = true,
            2 => has_minus = true,
            3 => {
                has_minus = true;
                has_plus = false;
            }
            v => return Err(IfsError::BadLetter(v)),
        }
    }
    let f = word_map(u)?;
    Ok(TileCorners {
        minus_corner: has_minus.then(|| f.apply(&Point::from_ints(-1, 0))),
        plus_corner: has_plus.then(|| f.apply(&Point::from_ints(1, 0))),
        center: f.apply(&Point::zero()),
    })
}

/// A straight segment with exact endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length_sqr(&self) -> Rational {
        self.a.dist_sqr(&self.b)
    }
}

/// A convex polygon with exact vertices (orientation either way).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullPolygon {
    pub vertices: Vec<Point>,
}

impl HullPolygon {
    /// Closed containment test for a convex polygon.
    pub fn contains(&self, p: &Point) -> bool {
        let n = self.vertices.len();
        let mut sign = 0i8;
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            let cross = (b.x.clone() - &a.x) * (p.y.clone() - &a.y)
                - (b.y.clone() - &a.y) * (p.x.clone() - &a.x);
            if cross.is_zero() {
                continue;
            }
            let s = if cross.is_positive() { 1 } else { -1 };
            if sign == 0 {
                sign = s;
            } else if sign != s {
                return false;
            }
        }
        true
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        let mut sign = 0i8;
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            let c = &self.vertices[(i + 2) % n];
            let cross = (b.x.clone() - &a.x) * (c.y.clone() - &b.y)
                - (b.y.clone() - &a.y) * (c.x.clone() - &b.x);
            if cross.is_zero() {
                continue;
            }
            let s = if cross.is_positive() { 1 } else { -1 };
            if sign == 0 {
                sign = s;
            } else if sign != s {
                return false;
            }
        }
        true
    }

    /// Exact squared diameter (max over vertex pairs; for convex polygons the
    /// diameter is attained at vertices).
    pub fn diameter_sqr(&self) -> Rational {
        let mut best = Rational::zero();
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                let d = self.vertices[i].dist_sqr(&self.vertices[j]);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }
}

/// The invariant hull: convex hull of `1`, `i`, `−1`, `1/2 − i/2`.
///
/// The quadrilateral is listed counterclockwise. (A hull with the fourth
/// vertex reflected to the upper half-plane is *not* invariant: the second
/// generator maps the vertical base edge below the real axis. The invariance
/// test in this module gates the choice.)
pub fn base_hull() -> HullPolygon {
    HullPolygon {
        vertices: vec![
            Point::from_ints(-1, 0),
            Point::new(ratio(1, 2), ratio(-1, 2)),
            Point::from_ints(1, 0),
            Point::from_ints(0, 1),
        ],
    }
}

/// Base segment `[-1, 1]`.
pub fn base_segment() -> Segment {
    Segment::new(Point::from_ints(-1, 0), Point::from_ints(1, 0))
}

fn for_each_word_map(n: usize, mut visit: impl FnMut(&PlanarSimilarity)) {
    // Depth-first in lexicographic word order, composing along the path.
    fn rec(f: &PlanarSimilarity, depth: usize, visit: &mut impl FnMut(&PlanarSimilarity)) {
        if depth == 0 {
            visit(f);
            return;
        }
        for k in 1..=3u8 {
            let g = f.compose(&generator(Letter(k)).unwrap());
            rec(&g, depth - 1, visit);
        }
    }
    rec(&PlanarSimilarity::identity(), n, &mut visit);
}

/// The `3^n` segments of the depth-`n` segment approximant, in lexicographic
/// word order. Each has length `2^{1-n}` and the interiors are pairwise
/// disjoint.
pub fn jn_segments(n: usize) -> Vec<Segment> {
    let base = base_segment();
    let mut out = Vec::with_capacity(3usize.pow(n as u32));
    for_each_word_map(n, |f| {
        out.push(Segment::new(f.apply(&base.a), f.apply(&base.b)));
    });
    out
}

/// The `3^n` quadrilaterals of the depth-`n` hull approximant, in
/// lexicographic word order.
pub fn kn_hulls(n: usize) -> Vec<HullPolygon> {
    let h = base_hull();
    let mut out = Vec::with_capacity(3usize.pow(n as u32));
    for_each_word_map(n, |f| {
        out.push(HullPolygon {
            vertices: h.vertices.iter().map(|v| f.apply(v)).collect(),
        });
    });
    out
}

/// All depth-`n` images of a base point inside the hull, in lexicographic
/// word order; a point cloud within Hausdorff distance `2^{1-n}` of the
/// attractor.
pub fn sample_cloud(n: usize, z0: &Point) -> Result<Vec<Point>, IfsError> {
    if !base_hull().contains(z0) {
        return Err(IfsError::PointOutsideHull);
    }
    let mut out = Vec::with_capacity(3usize.pow(n as u32));
    for_each_word_map(n, |f| out.push(f.apply(z0)));
    Ok(out)
}

/// Euclidean distance from a point to a convex polygon (0 if inside).
pub fn point_polygon_distance(p: &Point, poly: &HullPolygon) -> f64 {
    if poly.contains(p) {
        return 0.0;
    }
    let (px, py) = p.to_f64();
    let mut best = f64::INFINITY;
    let n = poly.vertices.len();
    for i in 0..n {
        let (ax, ay) = poly.vertices[i].to_f64();
        let (bx, by) = poly.vertices[(i + 1) % n].to_f64();
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
        };
        let (cx, cy) = (ax + t * dx, ay + t * dy);
        best = best.min(((px - cx).powi(2) + (py - cy).powi(2)).sqrt());
    }
    best
}

/// Do two segments share more than finitely many points or cross in their
/// interiors? Exact test; used by the approximant disjointness checks.
pub fn segments_interiors_intersect(s: &Segment, t: &Segment) -> bool {
    let d1 = s.b.clone() - s.a.clone();
    let d2 = t.b.clone() - t.a.clone();
    let cross = |u: &Point, v: &Point| u.x.clone() * &v.y - u.y.clone() * &v.x;
    let denom = cross(&d1, &d2);
    let diff = t.a.clone() - s.a.clone();
    if denom.is_zero() {
        // Parallel. Collinear overlap iff diff is also parallel and the
        // parameter ranges overlap with positive length.
        if !cross(&diff, &d1).is_zero() {
            return false;
        }
        let len2 = d1.norm_sqr();
        if len2.is_zero() {
            return false;
        }
        let dot = |u: &Point, v: &Point| u.x.clone() * &v.x + u.y.clone() * &v.y;
        let t0 = dot(&diff, &d1) / len2.clone();
        let t1 = &t0 + dot(&d2, &d1) / len2;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        lo < Rational::one() && hi > Rational::zero()
    } else {
        // Proper crossing iff both parameters are strictly interior.
        let s_param = cross(&diff, &d2) / denom.clone();
        let t_param = cross(&diff, &d1) / denom;
        s_param > Rational::zero()
            && s_param < Rational::one()
            && t_param > Rational::zero()
            && t_param < Rational::one()
    }
}

/// `2^{1-n}` as a rational, the diameter of a depth-`n` tile.
pub fn tile_diameter(n: usize) -> Rational {
    pow2(1 - n as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rational_to_f64};
    use crate::words::PeriodicWord;

    fn word(vals: &[u8]) -> FiniteWord {
        FiniteWord::from_values(vals, 3).unwrap()
    }

    fn pw(pre: &[u8], per: &[u8]) -> PeriodicWord {
        PeriodicWord::from_values(pre, per, 3).unwrap()
    }

    #[test]
    fn generator_coefficients() {
        let f1 = generator(Letter(1)).unwrap();
        assert!(!f1.conjugating);
        assert_eq!(f1.a, Point::real(ratio(1, 2)));
        assert_eq!(f1.b, Point::real(ratio(-1, 2)));
        let f2 = generator(Letter(2)).unwrap();
        assert!(f2.conjugating);
        assert_eq!(f2.a, Point::real(ratio(1, 2)));
        assert_eq!(f2.b, Point::real(ratio(1, 2)));
        let f3 = generator(Letter(3)).unwrap();
        assert!(f3.conjugating);
        assert_eq!(f3.a, Point::new(int(0), ratio(1, 2)));
        assert_eq!(f3.b, Point::new(int(0), ratio(1, 2)));
        assert_eq!(generator(Letter(4)).unwrap_err(), IfsError::BadLetter(4));
    }

    #[test]
    fn compose_two_conjugating_maps() {
        let f2 = generator(Letter(2)).unwrap();
        let f3 = generator(Letter(3)).unwrap();
        let g = f2.compose(&f3);
        assert!(!g.conjugating);
        assert_eq!(g.a, Point::new(int(0), ratio(-1, 4)));
        assert_eq!(g.b, Point::new(ratio(1, 2), ratio(-1, 4)));
        // identity is neutral
        let id = PlanarSimilarity::identity();
        let f1 = generator(Letter(1)).unwrap();
        assert_eq!(id.compose(&f1), f1);
        assert_eq!(f1.compose(&id), f1);
        // f_{31}(0) = i/4
        let f31 = word_map(&word(&[3, 1])).unwrap();
        assert_eq!(f31.apply(&Point::zero()), Point::new(int(0), ratio(1, 4)));
    }

    #[test]
    fn compose_agrees_with_apply() {
        let z = Point::new(ratio(3, 7), ratio(-2, 5));
        for u in FiniteWord::all_of_length(4, 3) {
            let f = word_map(&u).unwrap();
            let mut w = z.clone();
            for &l in u.letters().iter().rev() {
                w = generator(l).unwrap().apply(&w);
            }
            assert_eq!(f.apply(&z), w, "word {u}");
            assert_eq!(f.factor_sqr(), pow2(-2 * u.len() as i64));
        }
    }

    #[test]
    fn fixed_points() {
        assert_eq!(
            generator(Letter(1)).unwrap().fixed_point().unwrap(),
            Point::from_ints(-1, 0)
        );
        assert_eq!(
            generator(Letter(2)).unwrap().fixed_point().unwrap(),
            Point::from_ints(1, 0)
        );
        assert_eq!(
            generator(Letter(3)).unwrap().fixed_point().unwrap(),
            Point::new(ratio(1, 3), ratio(2, 3))
        );
        assert_eq!(
            PlanarSimilarity::identity().fixed_point().unwrap_err(),
            IfsError::NotContracting
        );
    }

    #[test]
    fn word_map_examples() {
        assert_eq!(word_map(&word(&[])).unwrap(), PlanarSimilarity::identity());
        // one 3 then n-1 ones, applied to 0, gives i/2^n
        for n in 1..=8usize {
            let mut vals = vec![3u8];
            vals.extend(std::iter::repeat_n(1, n - 1));
            let f = word_map(&word(&vals)).unwrap();
            assert_eq!(f.apply(&Point::zero()), Point::new(int(0), pow2(-(n as i64))));
        }
        let f12 = word_map(&word(&[1, 2])).unwrap();
        assert_eq!(f12.apply(&Point::from_ints(-1, 0)), Point::real(ratio(-1, 2)));
    }

    #[test]
    fn address_point_examples() {
        assert_eq!(address_point(&pw(&[], &[1])).unwrap(), Point::from_ints(-1, 0));
        assert_eq!(address_point(&pw(&[], &[2])).unwrap(), Point::from_ints(1, 0));
        assert_eq!(address_point(&pw(&[1], &[2])).unwrap(), Point::zero());
        assert_eq!(address_point(&pw(&[2], &[1])).unwrap(), Point::zero());
        assert_eq!(address_point(&pw(&[3], &[1])).unwrap(), Point::zero());
        assert_eq!(address_point(&pw(&[3], &[2])).unwrap(), Point::from_ints(0, 1));
        assert_eq!(
            address_point(&pw(&[], &[3])).unwrap(),
            Point::new(ratio(1, 3), ratio(2, 3))
        );
    }

    #[test]
    fn iterative_oracle_converges() {
        let z0 = Point::zero();
        assert_eq!(
            address_point_iter((0..).map(|i| pw(&[], &[2]).letter_at(i)), 0, &z0).unwrap(),
            z0
        );
        for (pre, per) in [
            (vec![], vec![2u8]),
            (vec![1u8], vec![2]),
            (vec![3, 1, 2], vec![1, 3]),
            (vec![], vec![1, 2, 3]),
        ] {
            let w = pw(&pre, &per);
            let exact = address_point(&w).unwrap();
            for n in [5usize, 20, 40] {
                let it = address_point_iter((0..).map(|i| w.letter_at(i)), n, &z0).unwrap();
                let err2 = exact.dist_sqr(&it);
                let bound2 = pow2(2 * (1 - n as i64));
                assert!(err2 <= bound2, "word {w} depth {n}");
            }
        }
        // distinct base point
        let it = address_point_iter((0..).map(|i| pw(&[], &[1]).letter_at(i)), 10, &Point::from_ints(1, 0))
            .unwrap();
        let err2 = it.dist_sqr(&Point::from_ints(-1, 0));
        assert!(err2 <= pow2(2 * (1 - 10i64)));
    }

    #[test]
    fn tile_corner_examples() {
        let c = tile_corners(&word(&[])).unwrap();
        assert!(c.minus_corner.is_none() && c.plus_corner.is_none());
        assert_eq!(c.center, Point::zero());

        let c = tile_corners(&word(&[1])).unwrap();
        assert!(c.minus_corner.is_none());
        assert_eq!(c.plus_corner.unwrap(), Point::zero());

        let c = tile_corners(&word(&[3, 3])).unwrap();
        assert!(c.plus_corner.is_none());
        assert_eq!(c.minus_corner.unwrap(), Point::new(int(0), ratio(1, 2)));
        assert_eq!(c.center, Point::new(ratio(1, 4), ratio(1, 2)));
    }

    #[test]
    fn jn_examples() {
        let j0 = jn_segments(0);
        assert_eq!(j0, vec![base_segment()]);
        let j1 = jn_segments(1);
        assert_eq!(j1.len(), 3);
        assert_eq!(j1[0], Segment::new(Point::from_ints(-1, 0), Point::zero()));
        assert_eq!(j1[1], Segment::new(Point::zero(), Point::from_ints(1, 0)));
        assert_eq!(j1[2], Segment::new(Point::zero(), Point::from_ints(0, 1)));
        let j2 = jn_segments(2);
        assert_eq!(j2.len(), 9);
        for s in &j2 {
            assert_eq!(s.length_sqr(), ratio(1, 4));
        }
    }

    #[test]
    fn jn_interiors_disjoint_small() {
        for n in 0..=4usize {
            let segs = jn_segments(n);
            for i in 0..segs.len() {
                for j in i + 1..segs.len() {
                    assert!(
                        !segments_interiors_intersect(&segs[i], &segs[j]),
                        "n={n} segments {i},{j}"
                    );
                }
            }
        }
    }

    #[test]
    fn jn_nested() {
        // each segment splits into two halves that reappear at the next depth
        for n in 0..=3usize {
            let jn = jn_segments(n);
            let next: std::collections::BTreeSet<(Point, Point)> = jn_segments(n + 1)
                .into_iter()
                .flat_map(|s| [(s.a.clone(), s.b.clone()), (s.b, s.a)])
                .collect();
            for s in &jn {
                let mid = Point::new(
                    (s.a.x.clone() + s.b.x.clone()) / int(2),
                    (s.a.y.clone() + s.b.y.clone()) / int(2),
                );
                assert!(next.contains(&(s.a.clone(), mid.clone())), "n={n}");
                assert!(next.contains(&(mid, s.b.clone())), "n={n}");
            }
        }
    }

    #[test]
    fn kn_examples() {
        let k0 = kn_hulls(0);
        assert_eq!(k0, vec![base_hull()]);
        let k1 = kn_hulls(1);
        assert_eq!(k1.len(), 3);
        for h in &k1 {
            assert!(h.is_convex());
            // pairwise intersections are exactly the junction
            assert!(h.contains(&Point::zero()));
        }
        let k2 = kn_hulls(2);
        assert_eq!(k2.len(), 9);
        // each K_2 polygon sits inside its parent K_1 polygon
        for (i, h) in k2.iter().enumerate() {
            let parent = &k1[i / 3];
            for v in &h.vertices {
                assert!(parent.contains(v));
            }
        }
    }

    #[test]
    fn hull_invariance() {
        let h = base_hull();
        for k in 1..=3u8 {
            let f = generator(Letter(k)).unwrap();
            for v in &h.vertices {
                assert!(h.contains(&f.apply(v)), "f_{k} vertex {v}");
            }
        }
    }

    #[test]
    fn level_one_hulls_meet_only_at_junction() {
        // H_k ∩ H_l = {0}: every vertex of H_k other than 0 lies strictly
        // outside H_l, and no edges cross.
        let k1 = kn_hulls(1);
        for a in 0..3 {
            for b in 0..3 {
                if a == b {
                    continue;
                }
                for v in &k1[a].vertices {
                    if *v == Point::zero() {
                        continue;
                    }
                    assert!(!k1[b].contains(v), "H{} vertex {v} inside H{}", a + 1, b + 1);
                }
                let edges = |h: &HullPolygon| -> Vec<Segment> {
                    (0..h.vertices.len())
                        .map(|i| {
                            Segment::new(
                                h.vertices[i].clone(),
                                h.vertices[(i + 1) % h.vertices.len()].clone(),
                            )
                        })
                        .collect()
                };
                for ea in edges(&k1[a]) {
                    for eb in edges(&k1[b]) {
                        assert!(!segments_interiors_intersect(&ea, &eb));
                    }
                }
            }
        }
    }

    #[test]
    fn cloud_examples() {
        assert_eq!(sample_cloud(0, &Point::zero()).unwrap(), vec![Point::zero()]);
        let c1 = sample_cloud(1, &Point::zero()).unwrap();
        assert_eq!(
            c1,
            vec![
                Point::real(ratio(-1, 2)),
                Point::real(ratio(1, 2)),
                Point::new(int(0), ratio(1, 2)),
            ]
        );
        let n = 6;
        let cn = sample_cloud(n, &Point::zero()).unwrap();
        assert_eq!(cn.len(), 3usize.pow(n as u32));
        let hull = base_hull();
        assert!(cn.iter().all(|p| hull.contains(p)));
        assert!(cn.contains(&Point::new(int(0), pow2(-(n as i64)))));
        assert_eq!(
            sample_cloud(1, &Point::from_ints(5, 5)).unwrap_err(),
            IfsError::PointOutsideHull
        );
    }

    #[test]
    fn attractor_equation_on_clouds() {
        let n = 5;
        let cn: std::collections::BTreeSet<Point> =
            sample_cloud(n, &Point::zero()).unwrap().into_iter().collect();
        let mut next = std::collections::BTreeSet::new();
        for k in 1..=3u8 {
            let f = generator(Letter(k)).unwrap();
            for p in &cn {
                next.insert(f.apply(p));
            }
        }
        let cn1: std::collections::BTreeSet<Point> =
            sample_cloud(n + 1, &Point::zero()).unwrap().into_iter().collect();
        assert_eq!(next, cn1);
    }

    #[test]
    fn self_similarity_of_addresses() {
        // address(u·w) = f_u(address(w)) on a sample of words
        let tails = [pw(&[], &[2]), pw(&[1, 3], &[2, 1]), pw(&[], &[1, 2, 3])];
        for u in FiniteWord::all_of_length(3, 3) {
            let f = word_map(&u).unwrap();
            for t in &tails {
                let glued = t.with_prefix(&u);
                assert_eq!(address_point(&glued).unwrap(), f.apply(&address_point(t).unwrap()));
            }
        }
    }

    #[test]
    fn equivalence_matches_exact_coincidence() {
        // small enumeration: preperiods up to length 3, periods of length 1
        let mut words = Vec::new();
        for pre in FiniteWord::all_of_length(3, 3) {
            for p in 1..=3u8 {
                words.push(PeriodicWord::new(pre.clone(), FiniteWord::from_values(&[p], 3).unwrap()).unwrap());
            }
        }
        for v in &words {
            for w in &words {
                let eq = crate::words::equivalent(v, w).unwrap();
                let same = address_point(v).unwrap() == address_point(w).unwrap();
                assert_eq!(eq, same, "{v} vs {w}");
            }
        }
    }

    #[test]
    fn branch_point_addresses_are_triples() {
        // the points with 3-element address classes are exactly the f_u(0)
        for u in FiniteWord::all_of_length(2, 3) {
            let triple = crate::words::junction_triple(&u);
            let pts: Vec<Point> = triple.iter().map(|w| address_point(w).unwrap()).collect();
            let center = word_map(&u).unwrap().apply(&Point::zero());
            assert!(pts.iter().all(|p| *p == center));
        }
    }

    #[test]
    fn hull_distance_from_left_leaf() {
        // nearest point of the two right-hand level-1 hulls to -1 lies on the
        // left edge of the upper hull, at distance sqrt(9/10)
        let k1 = kn_hulls(1);
        let p = Point::from_ints(-1, 0);
        let d2 = point_polygon_distance(&p, &k1[1]).min(point_polygon_distance(&p, &k1[2]));
        assert!((d2 - (0.9f64).sqrt()).abs() < 1e-12);
        assert!(d2 > 0.0);
        let _ = rational_to_f64(&int(1));
    }

    #[test]
    fn tile_clouds_meet_only_at_junction() {
        // sample points of distinct level-1 tiles share only the junction
        let n = 6;
        let cloud = sample_cloud(n, &Point::zero()).unwrap();
        let block = cloud.len() / 3;
        for a in 0..3 {
            for b in a + 1..3 {
                let sa: std::collections::BTreeSet<&Point> =
                    cloud[a * block..(a + 1) * block].iter().collect();
                let shared: Vec<&Point> = cloud[b * block..(b + 1) * block]
                    .iter()
                    .filter(|p| sa.contains(p))
                    .collect();
                assert!(
                    shared.iter().all(|p| **p == Point::zero()),
                    "tiles {a},{b} share {shared:?}"
                );
            }
        }
    }
}
