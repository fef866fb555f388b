//! Lie groupoids as explicit structural data.
//!
//! A [`LieGroupoid`] bundles the arrow and unit manifolds with jet-capable
//! structural maps (source, target, unit inclusion, inverse, partial
//! multiplication) and deterministic samplers. Optional capabilities carry
//! the extra structure some constructions need: a smooth frame of the
//! source-fiber tangent spaces along the units (from which Lie algebroids
//! are derived), an exponential, and source-fiber integration charts for
//! convolution.
//!
//! Conventions: an arrow `g` is drawn from its source `d(g)` to its target
//! `r(g)`, and `g · h` is defined when `d(g) = r(h)`, with
//! `d(gh) = d(h)` and `r(gh) = r(g)`.

pub mod basic;
pub mod morphism;
pub mod pullback;
pub mod reduction;
pub mod semidirect;
pub mod suite;

use std::sync::Arc;

use crate::geometry::manifold::{CoordinateManifold, Point};
use crate::geometry::map::SmoothMap;
use crate::geometry::sample::{rng_for, sample_one};
use crate::jet::{self, Jet};
use crate::{Error, Result};

pub use basic::{group_bundle, pair_groupoid, product_groupoid, space_groupoid, GroupModel};
pub use morphism::{morphism_suite, GroupoidMorphism};
pub use pullback::{pullback_groupoid, slice_projection, FiberedProjection};
pub use reduction::{reduction, SubsetSpec};
pub use semidirect::{semidirect_product, ActionFn, ScalingAction};
pub use suite::{axiom_suite, LawResult, SuiteConfig, SuiteReport};

/// Tolerance for the composability condition `d(g) = r(h)`.
pub const COMPOSABLE_TOL: f64 = 1e-9;

/// Jet-polymorphic partial multiplication `(g, h) -> g · h`.
pub type MulFn =
    Arc<dyn Fn((usize, &[Jet]), (usize, &[Jet])) -> Result<(usize, Vec<Jet>)> + Send + Sync>;

/// Deterministic unit sampler `(seed, index) -> unit point`.
pub type UnitSamplerFn = Arc<dyn Fn(u64, u64) -> Result<Point> + Send + Sync>;

/// Deterministic source-fiber sampler `(unit, seed, index) -> arrow` with
/// `d(arrow) = unit`.
pub type FiberSamplerFn = Arc<dyn Fn(&Point, u64, u64) -> Result<Point> + Send + Sync>;

/// Frame of the source-fiber tangent spaces along the units: maps a unit
/// point (as jets) to the arrow block of its unit arrow and one tangent
/// vector per frame generator, in embedded arrow coordinates.
pub type FrameFn =
    Arc<dyn Fn(usize, &[Jet]) -> Result<(usize, Vec<Vec<Jet>>)> + Send + Sync>;

/// Exponential: `(unit, frame coefficients) -> arrow` with source fixed at
/// the unit, value `u(x)` at zero coefficients, and initial velocity equal
/// to the corresponding frame combination.
pub type ExpFn = Arc<dyn Fn((usize, &[Jet]), &[Jet]) -> Result<(usize, Vec<Jet>)> + Send + Sync>;

/// Logarithm: inverse of the exponential on each source fiber, returning
/// the frame coefficients `c` of an arrow, with `exp(d(g), c) = g`.
pub type LogFn = Arc<dyn Fn(usize, &[Jet]) -> Result<Vec<Jet>> + Send + Sync>;

/// A smooth frame of `ker d_*` along the units, with its rank.
#[derive(Clone)]
pub struct UnitFrame {
    pub rank: usize,
    pub eval: FrameFn,
}

/// One integration variable of a source-fiber chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiberVar {
    /// Unbounded Euclidean variable; quadrature truncates to `[-R, R]`.
    Euclidean,
    /// Scale variable with Haar weight `ds/s`, parametrised by `log s`.
    LogScale,
    /// A `p`-sphere of directions, integrated with the round measure.
    Sphere(usize),
}

/// Chart of one source fiber, with the Haar density folded into the
/// parametrisation: integrating `f ∘ embed` over the chart variables with
/// their standard measures integrates `f` over the fiber.
#[derive(Clone)]
pub struct FiberChart {
    pub vars: Vec<FiberVar>,
    pub embed: Arc<dyn Fn(&[f64]) -> Result<Point> + Send + Sync>,
}

/// Source-fiber chart factory, one chart per unit.
pub type FiberChartFn = Arc<dyn Fn(&Point) -> Result<FiberChart> + Send + Sync>;

// Seed streams keeping the independent sampling roles decorrelated.
pub(crate) const STREAM_UNIT: u64 = 0x756e_6974;
pub(crate) const STREAM_FIBER: u64 = 0x6669_6265;
pub(crate) const STREAM_PAIR: u64 = 0x7061_6972;
pub(crate) const STREAM_TRIPLE: u64 = 0x7472_6970;

/// A Lie groupoid presented by structural data on block manifolds.
#[derive(Clone)]
pub struct LieGroupoid {
    pub name: String,
    pub arrows: CoordinateManifold,
    pub units: CoordinateManifold,
    /// Source map `d`.
    pub source: SmoothMap,
    /// Target map `r`.
    pub target: SmoothMap,
    /// Unit inclusion `u: units -> arrows`.
    pub unit: SmoothMap,
    /// Inversion `g -> g⁻¹`.
    pub inverse: SmoothMap,
    /// Partial multiplication, defined when `d(g) = r(h)`.
    pub mul: MulFn,
    pub unit_sampler: UnitSamplerFn,
    pub dfiber_sampler: FiberSamplerFn,
    /// Smooth frame of `ker d_*` along the units, if available.
    pub unit_frame: Option<UnitFrame>,
    /// Exponential chart of the source fibers, if available.
    pub exp: Option<ExpFn>,
    /// Fiberwise inverse of the exponential, if available.
    pub log: Option<LogFn>,
    /// Source-fiber integration charts, if available.
    pub fiber_chart: Option<FiberChartFn>,
}

impl std::fmt::Debug for LieGroupoid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LieGroupoid({})", self.name)
    }
}

/// Unit sampler drawing from the stratified manifold sampler.
pub fn default_unit_sampler(units: &CoordinateManifold) -> UnitSamplerFn {
    let m = units.clone();
    Arc::new(move |seed, index| Ok(sample_one(&m, seed, index)))
}

impl LieGroupoid {
    /// Multiply two arrows given as points.
    pub fn mul_points(&self, g: &Point, h: &Point) -> Result<Point> {
        let (b, out) = (self.mul)(
            (g.block, &jet::constants(&g.coords)),
            (h.block, &jet::constants(&h.coords)),
        )?;
        Ok(Point::new(b, jet::values(&out)))
    }

    /// Rank of the source fibers, when a frame is available.
    pub fn rank(&self) -> Option<usize> {
        self.unit_frame.as_ref().map(|f| f.rank)
    }

    pub fn sample_unit(&self, seed: u64, index: u64) -> Result<Point> {
        (self.unit_sampler)(seed ^ STREAM_UNIT, index)
    }

    /// Sample an arrow: a unit, then a point of its source fiber.
    pub fn sample_arrow(&self, seed: u64, index: u64) -> Result<Point> {
        let x = self.sample_unit(seed, index)?;
        (self.dfiber_sampler)(&x, seed ^ STREAM_FIBER, index)
    }

    /// Sample a composable pair `(g, h)` with `d(g) = r(h)`.
    pub fn sample_composable_pair(&self, seed: u64, index: u64) -> Result<(Point, Point)> {
        let g = self.sample_arrow(seed, index)?;
        let dg = self.source.eval_point(&g)?;
        let k = (self.dfiber_sampler)(&dg, seed ^ STREAM_PAIR, index)?;
        let h = self.inverse.eval_point(&k)?;
        Ok((g, h))
    }

    /// Sample a composable triple `(g, h, k)`.
    pub fn sample_composable_triple(&self, seed: u64, index: u64) -> Result<(Point, Point, Point)> {
        let (g, h) = self.sample_composable_pair(seed, index)?;
        let dh = self.source.eval_point(&h)?;
        let w = (self.dfiber_sampler)(&dh, seed ^ STREAM_TRIPLE, index)?;
        let k = self.inverse.eval_point(&w)?;
        Ok((g, h, k))
    }

    /// Replace the multiplication by one with a small structured defect, for
    /// negative controls: the first output coordinate is shifted by
    /// `eps * h₀²` where `h₀` is the first coordinate of the right factor.
    pub fn with_corrupted_mul(&self, eps: f64) -> LieGroupoid {
        let inner = self.mul.clone();
        let mut out = self.clone();
        out.name = format!("{} (corrupted)", self.name);
        out.mul = Arc::new(move |g, h| {
            let h0 = h.1.first().cloned().unwrap_or_else(Jet::zero);
            let (b, mut prod) = inner(g, h)?;
            if let Some(first) = prod.first_mut() {
                *first = &*first + &(&h0 * &h0) * eps;
            }
            Ok((b, prod))
        });
        out
    }
}

/// Sup-distance between two points of the same block; `None` when the
/// points live in different blocks or have different lengths.
pub fn sup_distance(a: &Point, b: &Point) -> Option<f64> {
    if a.block != b.block || a.coords.len() != b.coords.len() {
        return None;
    }
    Some(
        a.coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
    )
}

/// Composability guard: the value parts of two jet points must agree.
pub(crate) fn jets_match(a: (usize, &[Jet]), b: (usize, &[Jet])) -> Result<()> {
    if a.0 != b.0 || a.1.len() != b.1.len() {
        return Err(Error::NotComposable(format!(
            "endpoint blocks or dimensions differ: ({}, {}) vs ({}, {})",
            a.0,
            a.1.len(),
            b.0,
            b.1.len()
        )));
    }
    let worst = a
        .1
        .iter()
        .zip(b.1)
        .map(|(x, y)| (x.v - y.v).abs())
        .fold(0.0, f64::max);
    if worst > COMPOSABLE_TOL {
        return Err(Error::NotComposable(format!(
            "endpoint values differ by {worst:.3e}"
        )));
    }
    Ok(())
}

/// Rejection sampling helper: retry a sampler until `accept` holds.
pub(crate) fn rejection_sample<F, A>(
    seed: u64,
    index: u64,
    tries: u64,
    sample: F,
    accept: A,
) -> Result<Point>
where
    F: Fn(u64, u64) -> Result<Point>,
    A: Fn(&Point) -> bool,
{
    // Deterministic retry stream derived from (seed, index). Both the seed
    // and the index are redrawn per try: samplers stratify boundary depth
    // by index, and a fixed index would pin the retries to one stratum.
    let mut sub = rng_for(seed, index);
    use rand::Rng;
    for _ in 0..tries {
        let s: u64 = sub.gen();
        let i: u64 = sub.gen();
        let p = sample(s, i)?;
        if accept(&p) {
            return Ok(p);
        }
    }
    Err(Error::Sampling(format!(
        "no accepted sample for index {index} within {tries} tries"
    )))
}
