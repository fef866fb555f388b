//! Lie algebroids: a Lie–Rinehart presentation by frames, anchors and
//! structure functions, the algebroid derived from a Lie groupoid by
//! differentiating its multiplication, and numerical property checks
//! relating the two.

mod checks;
mod constructions;
mod derived;
mod section;
mod structured;

pub use checks::{
    algebroid_suite, bracket_fd_check, compare_algebroids, AlgebroidCheckConfig,
    GeneratorCorrespondence, PropertyReport,
};
pub use constructions::{
    adiabatic_algebroid, direct_product_algebroid, rescale, scaling_halfline_algebroid,
    tangent_algebroid, thick_pullback,
};
pub use derived::{lie_algebroid_of, DerivedAlgebroid};
pub use section::{CoeffFn, ScalarFn, Section};
pub use structured::{AnchorFn, StructureFn, StructuredAlgebroid};

use crate::{CoordinateManifold, Point, Result};
use crate::jet::Jet;

/// Base step of the finite-difference oracles.
pub(crate) const FD_STEP: f64 = 1e-4;

/// One Richardson extrapolation step over a central difference:
/// `(4 D(h/2) - D(h)) / 3` cancels the leading error term.
pub(crate) fn richardson<F>(f: F, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let coarse = f(h)?;
    let fine = f(h / 2.0)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (4.0 * a - b) / 3.0)
        .collect())
}

/// Common interface of the two algebroid representations.
///
/// Values live in a representation space attached to each base point: the
/// coefficient space of the frame for a structured algebroid, the embedded
/// tangent space of the arrow manifold at the unit arrow for a derived one.
/// Sections, brackets and Jacobiators of one algebroid can therefore be
/// compared against each other, while cross-representation comparisons go
/// through [`compare_algebroids`].
pub trait Algebroid: Send + Sync {
    fn label(&self) -> String;
    fn base(&self) -> &CoordinateManifold;
    fn rank(&self) -> usize;

    /// Value of the section at `x` in the representation space.
    fn section_value(&self, s: &Section, x: &Point) -> Result<Vec<f64>>;

    /// `[X, Y]` at `x` in the representation space.
    fn bracket_value(&self, xs: &Section, ys: &Section, x: &Point) -> Result<Vec<f64>>;

    /// `[X, Y]` at `x` computed by the finite-difference oracle instead of
    /// automatic differentiation.
    fn bracket_value_fd(&self, xs: &Section, ys: &Section, x: &Point) -> Result<Vec<f64>>;

    /// `[X, [Y, Z]] + [Y, [Z, X]] + [Z, [X, Y]]` at `x`.
    fn jacobiator_value(
        &self,
        xs: &Section,
        ys: &Section,
        zs: &Section,
        x: &Point,
    ) -> Result<Vec<f64>>;

    /// Anchor of the section as a tangent vector of the base in embedded
    /// coordinates. Output jets carry values and first derivatives in the
    /// incoming directions; second-order entries are not meaningful.
    fn anchor_jets(&self, s: &Section, block: usize, jets: &[Jet]) -> Result<Vec<Jet>>;

    /// `ρ([X, Y])` at `x` in embedded base coordinates.
    fn bracket_anchor_value(&self, xs: &Section, ys: &Section, x: &Point) -> Result<Vec<f64>>;

    /// Anchor value at a plain point.
    fn anchor_value(&self, s: &Section, x: &Point) -> Result<Vec<f64>> {
        let out = self.anchor_jets(s, x.block, &crate::jet::constants(&x.coords))?;
        Ok(crate::jet::values(&out))
    }
}
