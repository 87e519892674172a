//! Exact arc-length (geodesic) metric on the attractor, evaluated on
//! eventually periodic addresses.
//!
//! Distances to the three anchor points (left leaf `−1`, right leaf `1`,
//! junction `0`) satisfy first-letter recurrences; on a periodic tail the
//! recurrence closes into a small affine fixed-point equation over the
//! rationals, so every distance comes out exact. The distance between two
//! arbitrary addresses reduces to the anchors after splitting at the
//! divergence point of a maximizing representative pair.

use crate::exact::{pow2, rational_to_f64, Point, Rational};
use crate::ifs::{
    address_point, generator, kn_hulls, point_polygon_distance, word_map, IfsError,
    PlanarSimilarity,
};
use crate::words::{common_prefix_split, equivalent, FiniteWord, Letter, PeriodicWord, WordError};
use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeodesicError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Ifs(#[from] IfsError),
}

/// Exact non-negative arc length.
pub type ExactLength = Rational;

/// Which anchor a partial arc is currently headed for.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Anchor {
    /// distance to the left leaf `−1`
    Minus,
    /// distance to the right leaf `1`
    Plus,
    /// distance to the junction `0` (initial state only)
    Center,
}

/// One recurrence step: unit contribution and successor state.
fn step(state: Anchor, letter: Letter) -> (u8, Anchor) {
    match (state, letter.value()) {
        (Anchor::Minus, 1) => (0, Anchor::Minus),
        (Anchor::Minus, _) => (1, Anchor::Minus),
        (Anchor::Plus, 2) => (0, Anchor::Plus),
        (Anchor::Plus, 1) => (1, Anchor::Plus),
        (Anchor::Plus, _) => (1, Anchor::Minus),
        (Anchor::Center, 1) => (0, Anchor::Plus),
        (Anchor::Center, _) => (0, Anchor::Minus),
    }
}

/// Value of the pure-periodic word in the given state, by closing the affine
/// loop over one period.
fn periodic_value(per: &FiniteWord, state: Anchor) -> Rational {
    let mut mult = Rational::one();
    let mut add = Rational::zero();
    let mut s = state;
    for &l in per.letters() {
        let (c, next) = step(s, l);
        if c == 1 {
            add += &mult;
        }
        mult /= pow2(1);
        s = next;
    }
    if s == state {
        add / (Rational::one() - mult)
    } else {
        add + mult * periodic_value(per, s)
    }
}

fn anchor_distance(w: &PeriodicWord, state: Anchor) -> Rational {
    let mut mult = Rational::one();
    let mut add = Rational::zero();
    let mut s = state;
    for &l in w.preperiod().letters() {
        let (c, next) = step(s, l);
        if c == 1 {
            add += &mult;
        }
        mult /= pow2(1);
        s = next;
    }
    add + mult * periodic_value(w.period(), s)
}

/// Arc length from the left leaf `−1` to the addressed point:
/// `Σ 2^{-n} · [wₙ₊₁ ≠ 1]`, exactly.
pub fn dist_to_minus_one(w: &PeriodicWord) -> ExactLength {
    anchor_distance(w, Anchor::Minus)
}

/// Arc length from the right leaf `1` to the addressed point.
pub fn dist_to_plus_one(w: &PeriodicWord) -> ExactLength {
    anchor_distance(w, Anchor::Plus)
}

/// Arc length from the junction `0` to the addressed point.
pub fn dist_to_center(w: &PeriodicWord) -> ExactLength {
    anchor_distance(w, Anchor::Center)
}

/// Exact geodesic distance between two addressed points.
///
/// Zero for equivalent addresses; otherwise split off the longest common
/// prefix over representative pairs and route through the junction of the
/// common tile.
pub fn geodesic_distance(a: &PeriodicWord, b: &PeriodicWord) -> Result<ExactLength, GeodesicError> {
    if equivalent(a, b)? {
        return Ok(Rational::zero());
    }
    let (u, ta, tb) = common_prefix_split(a, b)?;
    Ok(pow2(-(u.len() as i64)) * (dist_to_center(&ta) + dist_to_center(&tb)))
}

/// A polyline lying on the arc between two addressed points, with the exact
/// length of the unexpanded tail. Polyline length plus tail equals the
/// geodesic distance exactly.
#[derive(Clone, Debug)]
pub struct ArcPolyline {
    pub vertices: Vec<Point>,
    pub exact_tail_bound: ExactLength,
}

impl ArcPolyline {
    pub fn polyline_length(&self) -> Rational {
        self.vertices
            .windows(2)
            .map(|p| {
                // segments are axis-parallel images of base edges
                let d = p[1].clone() - p[0].clone();
                if d.x.is_zero() {
                    d.y.abs()
                } else {
                    d.x.abs()
                }
            })
            .sum()
    }
}

/// Emits the half-arc from the anchor of `state` to the point addressed by
/// `w`, inside the tile mapped by `outer`, until the remaining Euclidean
/// bound drops below `eps`. Returns the exact remaining length.
///
/// On a zero-contribution step the anchor point is exactly unchanged, so
/// vertices appear only when a unit of (scaled) length is laid down.
fn emit_half_arc(
    outer: &PlanarSimilarity,
    w: &PeriodicWord,
    state: Anchor,
    eps: &Rational,
    out: &mut Vec<Point>,
    reverse: bool,
) -> Result<Rational, GeodesicError> {
    let minus = Point::from_ints(-1, 0);
    let plus = Point::from_ints(1, 0);
    let mut f = outer.clone();
    let mut w = w.clone();
    let mut s = state;
    let mut depth: i64 = 0;
    let mut segs: Vec<Point> = Vec::new();
    let anchor_of = |f: &PlanarSimilarity, s: Anchor| match s {
        Anchor::Minus => f.apply(&minus),
        Anchor::Plus => f.apply(&plus),
        Anchor::Center => f.apply(&Point::zero()),
    };
    segs.push(anchor_of(&f, s));
    let scale = outer_scale(outer);
    // A tail naming a base-segment endpoint closes the arc exactly: the
    // remainder from the current anchor to the point is straight.
    let base_target = |w: &PeriodicWord| -> Option<Point> {
        if !w.preperiod().is_empty() || w.period().len() != 1 {
            return None;
        }
        match w.period().letters()[0].value() {
            1 => Some(minus.clone()),
            2 => Some(plus.clone()),
            _ => None,
        }
    };
    let mut closed = false;
    // Expand until the whole remaining tile fits under eps, closing exactly
    // as soon as the tail names a base-segment endpoint.
    loop {
        if let Some(t) = base_target(&w) {
            let p = f.apply(&t);
            if segs.last() != Some(&p) {
                segs.push(p);
            }
            closed = true;
            break;
        }
        if pow2(1 - depth) * scale.clone() <= *eps {
            break;
        }
        let l = w.letter_at(0);
        let (c, next) = step(s, l);
        w = w.shift();
        f = f.compose(&generator(l)?);
        depth += 1;
        s = next;
        if c == 1 {
            segs.push(anchor_of(&f, s));
        }
    }
    let remaining = if closed {
        Rational::zero()
    } else {
        pow2(-depth)
            * match s {
                Anchor::Minus => dist_to_minus_one(&w),
                Anchor::Plus => dist_to_plus_one(&w),
                Anchor::Center => dist_to_center(&w),
            }
    };
    if reverse {
        segs.reverse();
    }
    out.extend(segs);
    Ok(remaining * scale)
}

/// `|a|` for generator compositions, recovered exactly from `|a|² = 4^{-n}`.
fn outer_scale(outer: &PlanarSimilarity) -> Rational {
    sqrt_pow2(outer.factor_sqr())
}

fn sqrt_pow2(x: Rational) -> Rational {
    // x = 4^{-n} exactly for word maps
    let mut n = 0i64;
    let mut v = x;
    let quarter = pow2(-2);
    while v < Rational::one() {
        v /= quarter.clone();
        n += 1;
    }
    debug_assert!(v.is_one(), "scale is not a power of four");
    pow2(-n)
}

/// Explicit arc between two addressed points: a polyline on the true arc
/// whose Hausdorff distance to the arc is at most `eps`, together with the
/// exact tail length so that polyline + tail = geodesic distance.
pub fn arc_polyline(
    a: &PeriodicWord,
    b: &PeriodicWord,
    eps: &Rational,
) -> Result<ArcPolyline, GeodesicError> {
    assert!(eps.is_positive(), "eps must be positive");
    if equivalent(a, b)? {
        return Ok(ArcPolyline {
            vertices: vec![address_point(a)?],
            exact_tail_bound: Rational::zero(),
        });
    }
    let (u, ta, tb) = common_prefix_split(a, b)?;
    let f = word_map(&u)?;
    let mut vertices = Vec::new();
    // a-side, walked from the point inward to the junction, so emit reversed
    let tail_a = emit_half_arc(&f, &ta, Anchor::Center, eps, &mut vertices, true)?;
    // junction sits between the halves
    vertices.push(f.apply(&Point::zero()));
    let tail_b = emit_half_arc(&f, &tb, Anchor::Center, eps, &mut vertices, false)?;
    // drop exact duplicates introduced at the junction
    vertices.dedup();
    Ok(ArcPolyline {
        vertices,
        exact_tail_bound: tail_a + tail_b,
    })
}

/// Result of the random quasi-convexity scan.
#[derive(Clone, Debug)]
pub struct QuasiconvexityScan {
    pub max_ratio: f64,
    pub witness: (PeriodicWord, PeriodicWord),
    pub samples: usize,
}

fn random_word(rng: &mut ChaCha8Rng) -> PeriodicWord {
    let pre_len = rng.gen_range(0..=12usize);
    let per_len = rng.gen_range(1..=6usize);
    let pre: Vec<u8> = (0..pre_len).map(|_| rng.gen_range(1..=3u8)).collect();
    let per: Vec<u8> = (0..per_len).map(|_| rng.gen_range(1..=3u8)).collect();
    PeriodicWord::from_values(&pre, &per, 3).expect("letters in range")
}

/// Draws seeded random address pairs and reports the largest observed ratio
/// of geodesic to Euclidean distance: a lower bound for the quasi-convexity
/// constant, never the constant itself.
pub fn quasiconvexity_scan(sample_count: usize, seed: u64) -> QuasiconvexityScan {
    assert!(sample_count >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = QuasiconvexityScan {
        max_ratio: 0.0,
        witness: (random_word(&mut rng), random_word(&mut rng)),
        samples: sample_count,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    while done < sample_count {
        let a = random_word(&mut rng);
        let b = random_word(&mut rng);
        if equivalent(&a, &b).unwrap() {
            continue;
        }
        done += 1;
        let rho = geodesic_distance(&a, &b).unwrap();
        let dz = (address_point(&a).unwrap() - address_point(&b).unwrap()).norm_f64();
        let ratio = rational_to_f64(&rho) / dz;
        if ratio > best.max_ratio {
            best.max_ratio = ratio;
            best.witness = (a, b);
        }
    }
    best
}

/// Derived upper bound for the quasi-convexity constant, as an estimate:
/// `(2/c₀)/c₁` with `c₀` the distance from the left leaf to the two
/// right-hand level-1 hulls and `c₁` the minimal normalized separation of
/// distinct level-1 hulls, evaluated on a `2^{-10}`-step boundary
/// discretization.
pub fn quasiconvexity_bound() -> f64 {
    let hulls = kn_hulls(1);
    let p = Point::from_ints(-1, 0);
    let c0 = point_polygon_distance(&p, &hulls[1]).min(point_polygon_distance(&p, &hulls[2]));
    let step = 2f64.powi(-10);
    let boundary = |h: &crate::ifs::HullPolygon| -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        let n = h.vertices.len();
        for i in 0..n {
            let (ax, ay) = h.vertices[i].to_f64();
            let (bx, by) = h.vertices[(i + 1) % n].to_f64();
            let len = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
            let steps = (len / step).ceil() as usize;
            for t in 0..steps {
                let s = t as f64 / steps as f64;
                pts.push((ax + s * (bx - ax), ay + s * (by - ay)));
            }
        }
        pts.retain(|&(x, y)| x != 0.0 || y != 0.0);
        pts
    };
    let bs: Vec<Vec<(f64, f64)>> = hulls.iter().map(boundary).collect();
    let mut c1 = f64::INFINITY;
    for k in 0..3 {
        for l in k + 1..3 {
            for &(x1, y1) in &bs[k] {
                let n1 = (x1 * x1 + y1 * y1).sqrt();
                for &(x2, y2) in &bs[l] {
                    let n2 = (x2 * x2 + y2 * y2).sqrt();
                    let d = ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt();
                    let r = d / (n1 + n2);
                    if r < c1 {
                        c1 = r;
                    }
                }
            }
        }
    }
    (2.0 / c0) / c1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn pw(pre: &[u8], per: &[u8]) -> PeriodicWord {
        PeriodicWord::from_values(pre, per, 3).unwrap()
    }

    /// Independent truncated-series oracle for the distance to the left
    /// leaf: `Σ_{n<N} 2^{-n} [w_{n+1} ≠ 1]`, with remainder at most `2^{1-N}`.
    fn series_dist_minus(w: &PeriodicWord, terms: usize) -> Rational {
        let mut s = Rational::zero();
        for n in 0..terms {
            if w.letter_at(n).value() != 1 {
                s += pow2(-(n as i64));
            }
        }
        s
    }

    #[test]
    fn dist_minus_examples() {
        assert_eq!(dist_to_minus_one(&pw(&[], &[1])), int(0));
        assert_eq!(dist_to_minus_one(&pw(&[], &[2])), int(2));
        assert_eq!(dist_to_minus_one(&pw(&[1], &[2])), int(1));
        // alternating tail: the fixed-point equation D = (D/2 + 1)/2 gives 2/3,
        // matching the truncated series oracle
        let d = dist_to_minus_one(&pw(&[], &[1, 2]));
        assert_eq!(d, ratio(2, 3));
        let s = series_dist_minus(&pw(&[], &[1, 2]), 64);
        assert!((d.clone() - s).abs() <= pow2(1 - 64));
    }

    #[test]
    fn series_oracle_on_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let w = random_word(&mut rng);
            let exact = dist_to_minus_one(&w);
            for terms in [8usize, 20, 50] {
                let s = series_dist_minus(&w, terms);
                assert!(s <= exact);
                assert!((exact.clone() - s).abs() <= pow2(1 - terms as i64), "{w}");
            }
        }
    }

    #[test]
    fn dist_plus_examples() {
        assert_eq!(dist_to_plus_one(&pw(&[], &[2])), int(0));
        assert_eq!(dist_to_plus_one(&pw(&[], &[1])), int(2));
        assert_eq!(dist_to_plus_one(&pw(&[3], &[2])), int(2));
    }

    #[test]
    fn dist_center_examples() {
        assert_eq!(dist_to_center(&pw(&[1], &[2])), int(0));
        assert_eq!(dist_to_center(&pw(&[], &[1])), int(1));
        assert_eq!(dist_to_center(&pw(&[], &[3])), int(1));
        assert_eq!(dist_to_minus_one(&pw(&[], &[3])), int(2));
    }

    #[test]
    fn representative_invariance_of_anchor_distances() {
        // all three addresses of a junction give the same anchor distances
        for u in crate::words::FiniteWord::all_of_length(2, 3) {
            let reps = crate::words::junction_triple(&u);
            let dm: Vec<Rational> = reps.iter().map(dist_to_minus_one).collect();
            let dp: Vec<Rational> = reps.iter().map(dist_to_plus_one).collect();
            let dc: Vec<Rational> = reps.iter().map(dist_to_center).collect();
            assert!(dm.windows(2).all(|w| w[0] == w[1]), "{u}");
            assert!(dp.windows(2).all(|w| w[0] == w[1]), "{u}");
            assert!(dc.windows(2).all(|w| w[0] == w[1]), "{u}");
        }
    }

    #[test]
    fn rho_examples() {
        assert_eq!(geodesic_distance(&pw(&[], &[1]), &pw(&[], &[2])).unwrap(), int(2));
        let w = pw(&[3, 1], &[2, 3]);
        assert_eq!(geodesic_distance(&w, &w).unwrap(), int(0));
        assert_eq!(geodesic_distance(&pw(&[3], &[2]), &pw(&[], &[2])).unwrap(), int(2));
        // junction of the deep tile against the pure-3 address
        assert_eq!(
            geodesic_distance(&pw(&[], &[3]), &pw(&[3, 1], &[2])).unwrap(),
            ratio(1, 2)
        );
    }

    #[test]
    fn rho_identical_across_maximizing_pairs() {
        use crate::words::common_prefix_len;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let a = random_word(&mut rng);
            let b = random_word(&mut rng);
            if equivalent(&a, &b).unwrap() {
                continue;
            }
            let ra = a.representatives().unwrap();
            let rb = b.representatives().unwrap();
            let best = ra
                .iter()
                .flat_map(|v| rb.iter().map(move |w| common_prefix_len(v, w).unwrap()))
                .max()
                .unwrap();
            let mut values = Vec::new();
            for v in &ra {
                for w in &rb {
                    let n = common_prefix_len(v, w).unwrap();
                    if n == best {
                        let d = pow2(-(n as i64))
                            * (dist_to_center(&v.drop_prefix(n))
                                + dist_to_center(&w.drop_prefix(n)));
                        values.push(d);
                    }
                }
            }
            assert!(values.windows(2).all(|p| p[0] == p[1]), "{a} vs {b}");
            assert_eq!(values[0], geodesic_distance(&a, &b).unwrap());
        }
    }

    #[test]
    fn rho_symmetry_and_scaling() {
        let words = [
            pw(&[], &[1]),
            pw(&[], &[2]),
            pw(&[2, 1], &[3]),
            pw(&[], &[1, 2]),
            pw(&[3], &[1, 3]),
        ];
        for a in &words {
            for b in &words {
                let d1 = geodesic_distance(a, b).unwrap();
                let d2 = geodesic_distance(b, a).unwrap();
                assert_eq!(d1, d2);
                // scaling under a common prefix
                for u in crate::words::FiniteWord::all_of_length(2, 3) {
                    let ua = a.with_prefix(&u);
                    let ub = b.with_prefix(&u);
                    assert_eq!(
                        geodesic_distance(&ua, &ub).unwrap(),
                        pow2(-2) * d1.clone()
                    );
                }
            }
        }
    }

    #[test]
    fn rho_equals_anchor_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let w = random_word(&mut rng);
            assert_eq!(geodesic_distance(&pw(&[], &[1]), &w).unwrap(), dist_to_minus_one(&w));
            assert_eq!(geodesic_distance(&pw(&[], &[2]), &w).unwrap(), dist_to_plus_one(&w));
            assert_eq!(geodesic_distance(&pw(&[1], &[2]), &w).unwrap(), dist_to_center(&w));
        }
    }

    #[test]
    fn rho_four_point_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let ws: Vec<PeriodicWord> = (0..4).map(|_| random_word(&mut rng)).collect();
            let d = |i: usize, j: usize| geodesic_distance(&ws[i], &ws[j]).unwrap();
            let mut sums = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
            sums.sort();
            assert_eq!(sums[1], sums[2]);
        }
    }

    #[test]
    fn bi_lipschitz_sandwich() {
        let bound = quasiconvexity_bound();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let a = random_word(&mut rng);
            let b = random_word(&mut rng);
            if equivalent(&a, &b).unwrap() {
                continue;
            }
            let rho = rational_to_f64(&geodesic_distance(&a, &b).unwrap());
            let dz = (address_point(&a).unwrap() - address_point(&b).unwrap()).norm_f64();
            assert!(dz <= rho * (1.0 + 1e-12));
            assert!(rho <= bound * dz * (1.0 + 1e-9), "rho={rho} dz={dz} bound={bound}");
        }
    }

    #[test]
    fn arc_examples() {
        let eps = ratio(1, 1 << 20);
        // [-1, 0] is a single exact segment
        let arc = arc_polyline(&pw(&[], &[1]), &pw(&[1], &[2]), &eps).unwrap();
        assert_eq!(arc.exact_tail_bound, int(0));
        assert_eq!(arc.vertices.first().unwrap(), &Point::from_ints(-1, 0));
        assert_eq!(arc.vertices.last().unwrap(), &Point::zero());
        assert_eq!(arc.polyline_length(), int(1));

        // -1 to i passes through the junction with total length 2
        let arc = arc_polyline(&pw(&[], &[1]), &pw(&[3], &[2]), &eps).unwrap();
        assert!(arc.vertices.contains(&Point::zero()));
        assert_eq!(
            arc.polyline_length() + arc.exact_tail_bound.clone(),
            geodesic_distance(&pw(&[], &[1]), &pw(&[3], &[2])).unwrap()
        );

        // generic pair: exact length decomposition and small tail
        let a = pw(&[2, 1], &[3, 1]);
        let b = pw(&[], &[1, 2]);
        let arc = arc_polyline(&a, &b, &eps).unwrap();
        assert_eq!(
            arc.polyline_length() + arc.exact_tail_bound.clone(),
            geodesic_distance(&a, &b).unwrap()
        );
        assert!(arc.exact_tail_bound <= ratio(1, 1 << 18));
    }

    #[test]
    fn arc_tail_bound_decays_with_depth() {
        // stopping at Euclidean scale eps = 2^{1-n} leaves tail at most 2^{1-n}
        let a = pw(&[], &[1, 2, 3]);
        let b = pw(&[], &[3]);
        for n in [4i64, 8, 12] {
            let eps = pow2(1 - n);
            let arc = arc_polyline(&a, &b, &eps).unwrap();
            assert!(arc.exact_tail_bound <= pow2(2 - n));
        }
    }

    #[test]
    fn scan_and_bound() {
        let scan = quasiconvexity_scan(500, 42);
        assert!(scan.max_ratio >= 1.0);
        let bound = quasiconvexity_bound();
        assert!(bound > scan.max_ratio);
        // determinism
        let scan2 = quasiconvexity_scan(500, 42);
        assert_eq!(scan.max_ratio, scan2.max_ratio);
        // the i-to-1 pair realizes ratio sqrt(2)
        let rho = geodesic_distance(&pw(&[3], &[2]), &pw(&[], &[2])).unwrap();
        let dz = (address_point(&pw(&[3], &[2])).unwrap() - address_point(&pw(&[], &[2])).unwrap())
            .norm_f64();
        let r = rational_to_f64(&rho) / dz;
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn bound_constants_positive() {
        let hulls = kn_hulls(1);
        let p = Point::from_ints(-1, 0);
        let c0 = point_polygon_distance(&p, &hulls[1]).min(point_polygon_distance(&p, &hulls[2]));
        assert!(c0 > 0.0);
        assert!((c0 - (0.9f64).sqrt()).abs() < 1e-12);
        let bound = quasiconvexity_bound();
        assert!(bound.is_finite() && bound > 0.0);
    }
}
