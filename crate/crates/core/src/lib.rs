//! Exact-arithmetic toolkit for a self-similar planar dendrite and its relatives.
//!
//! The attractor of the three contractions
//! `z ↦ z/2 − 1/2`, `z ↦ z̄/2 + 1/2`, `z ↦ i·z̄/2 + i/2`
//! is a trivalent metric tree with dense branch points. This crate builds it
//! at desk scale with exact rational arithmetic:
//!
//! - [`words`]: symbolic addresses (finite and eventually periodic words over
//!   `{1,2,3}`) and the equivalence relation identifying addresses of the same
//!   point;
//! - [`ifs`]: the generator maps, exact composition and fixed points, the
//!   coding map from addresses to plane points, tiles with signed boundary
//!   corners, and the polygonal/segment approximants;
//! - [`geodesic`]: the intrinsic (arc-length) metric evaluated exactly on
//!   eventually periodic addresses, explicit arcs, and quasi-convexity bounds;
//! - [`tree`]: finite combinatorial metric trees: valences, branches, branch
//!   heights, medians, ingestion from segment soups and from excursion contour
//!   functions;
//! - [`decompose`]: recursive subdivision of a trivalent metric tree into
//!   labeled tiles with signed marked leaves, plus machine-checkable
//!   certificates;
//! - [`matching`]: verification that two decompositions have the same
//!   combinatorics and construction of the induced finite-depth
//!   correspondence;
//! - [`excursion`]: seeded Brownian-excursion simulation and the associated
//!   tree pseudo-metric, feeding the tree extractor.
//!
//! All core computations are exact; floating point appears only in summary
//! statistics, rendering, and explicitly approximate bounds.

pub mod decompose;
pub mod exact;
pub mod excursion;
pub mod geodesic;
pub mod ifs;
pub mod matching;
pub mod tree;
pub mod words;

pub use exact::{Point, Rational};
pub use ifs::{HullPolygon, PlanarSimilarity, Segment};
pub use tree::{Branch, FiniteMetricTree, VertexId};
pub use words::{FiniteWord, Letter, PeriodicWord};

/// Version string stamped into certificates and CLI output.
pub const TOOL_VERSION: &str = concat!("csst ", env!("CARGO_PKG_VERSION"));
