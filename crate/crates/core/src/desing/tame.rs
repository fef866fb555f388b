//! Submanifolds with a synthesized tubular neighbourhood: an orthogonal
//! tube projection, a Euclidean radius, and a transverse identification
//! that realizes the ambient tangent algebroid as a thick pullback from
//! the locus.

use crate::algebroid::{
    compare_algebroids, tangent_algebroid, thick_pullback, AlgebroidCheckConfig,
    GeneratorCorrespondence, PropertyReport, StructuredAlgebroid,
};
use crate::geometry::blowup::{blow_up, BlowUpData, SubmanifoldSpec};
use crate::geometry::manifold::{CoordinateManifold, Point};
use crate::geometry::map::SmoothMap;
use crate::geometry::sample::{sample_points, SamplePlan};
use crate::groupoid::pullback::{slice_projection, FiberedProjection};
use crate::groupoid::suite::LawResult;
use crate::jet::{self, Jet};
use crate::{Error, Factor, ModelBlock, Result};

/// A locus `L` inside a single-block ambient manifold `M`, together with
/// the data of its tubular neighbourhood: the tube projection `π`, the
/// radius function, and an algebroid over `L` whose thick pullback along
/// `π` reproduces `TM`.
///
/// The leading `normal` coordinates of the ambient block are the directions
/// transverse to the locus; the remaining coordinates chart the locus
/// itself. `π` drops the normal coordinates, the radius is their Euclidean
/// norm, and the ball bundle `U = {radius < 1}` is the tube's domain of
/// validity for the constructions built on top.
#[derive(Clone)]
pub struct TameSubmanifold {
    pub ambient: CoordinateManifold,
    /// Codimension: number of leading normal coordinates.
    pub normal: usize,
    /// The normal directions are half-lines and the locus is a corner face.
    pub hyperbolic: bool,
    pub locus: CoordinateManifold,
    /// Inclusion `L → M` at zero normal coordinates.
    pub embedding: SmoothMap,
    /// Tube projection `π: M → L` with the normal coordinates as fiber.
    pub tube: FiberedProjection,
    /// Distance to the locus, as a map to `[0, ∞)`.
    pub radius: SmoothMap,
    /// Algebroid `B` over `L` with `TM ≅ π ⤋ B`.
    pub algebroid_over_locus: StructuredAlgebroid,
}

impl std::fmt::Debug for TameSubmanifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TameSubmanifold({} in {})", self.locus.name, self.ambient.name)
    }
}

impl TameSubmanifold {
    /// The slice `{x₁ = … = xₙ = 0} ⊂ ℝ^{n+k}`.
    pub fn linear_slice(normal: usize, tangential: usize) -> Result<Self> {
        Self::build(normal, tangential, false)
    }

    /// The corner face `{x₁ = … = xₙ = 0} ⊂ [0,∞)ⁿ × ℝᵏ`.
    pub fn corner_face(normal: usize, tangential: usize) -> Result<Self> {
        Self::build(normal, tangential, true)
    }

    fn build(normal: usize, tangential: usize, hyperbolic: bool) -> Result<Self> {
        if normal == 0 {
            return Err(Error::Shape("a tame locus needs positive codimension".into()));
        }
        if tangential == 0 {
            return Err(Error::Shape(
                "a tame locus needs at least one tangential coordinate".into(),
            ));
        }
        let ambient = if hyperbolic {
            let mut factors = vec![Factor::Half; normal];
            factors.extend(std::iter::repeat(Factor::Line).take(tangential));
            CoordinateManifold::single(
                format!("[0,∞)^{normal}×R^{tangential}"),
                ModelBlock::new(factors),
            )
        } else {
            CoordinateManifold::euclidean(normal + tangential)
        };
        let locus = CoordinateManifold::euclidean(tangential);

        let embedded = normal + tangential;
        let embedding = SmoothMap::from_fn(locus.clone(), ambient.clone(), move |_, j| {
            let mut out = vec![Jet::zero(); normal];
            out.extend(j.iter().cloned());
            Ok((0, out))
        });
        let tube = slice_projection(&ambient, &locus, (normal..embedded).collect())?;
        let radius = SmoothMap::from_fn(
            ambient.clone(),
            CoordinateManifold::halfline(),
            move |_, j| Ok((0, vec![jet::norm(&j[..normal])])),
        );
        let algebroid_over_locus = tangent_algebroid(&locus)?;

        Ok(TameSubmanifold {
            ambient,
            normal,
            hyperbolic,
            locus,
            embedding,
            tube,
            radius,
            algebroid_over_locus,
        })
    }

    /// The blow-up centre selecting the normal coordinates.
    pub fn center(&self) -> SubmanifoldSpec {
        let idx: Vec<usize> = (0..self.normal).collect();
        if self.hyperbolic {
            SubmanifoldSpec::CornerFace { faces: idx }
        } else {
            SubmanifoldSpec::LinearSlice { zeroed: idx }
        }
    }

    /// Real blow-up of the ambient space along the locus.
    pub fn blow_up(&self) -> Result<BlowUpData> {
        blow_up(&self.ambient, &self.center())
    }

    pub(crate) fn project(&self, p: &Point) -> Point {
        let (cb, idx) = &self.tube.assignment[p.block];
        Point::new(*cb, idx.iter().map(|&i| p.coords[i]).collect())
    }

    /// Verify the tubular-neighbourhood contract on deterministic samples:
    /// the tube retracts the embedding, the radius vanishes on the locus,
    /// and the thick pullback of the locus algebroid along the tube matches
    /// the ambient tangent algebroid in anchors and brackets.
    pub fn tameness_report(&self, cfg: &AlgebroidCheckConfig) -> Result<PropertyReport> {
        let pts = sample_points(&self.locus, &SamplePlan::new(cfg.seed, cfg.points));
        let mut retract = LawResult {
            law: "tube retracts the embedding".into(),
            max_residual: 0.0,
            witness: None,
        };
        let mut vanish = LawResult {
            law: "radius vanishes on the locus".into(),
            max_residual: 0.0,
            witness: None,
        };
        for x in &pts {
            let e = self.embedding.eval_point(x)?;
            let back = self.project(&e);
            let r = back
                .coords
                .iter()
                .zip(&x.coords)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if r > retract.max_residual {
                retract.max_residual = r;
                retract.witness = Some(format!("at {:?}", x));
            }
            let rad = self.radius.eval_point(&e)?.coords[0].abs();
            if rad > vanish.max_residual {
                vanish.max_residual = rad;
                vanish.witness = Some(format!("at {:?}", x));
            }
        }

        let ambient_tangent = tangent_algebroid(&self.ambient)?;
        let identified = thick_pullback(&self.tube, &self.algebroid_over_locus)?;
        let corr = GeneratorCorrespondence::identity(identified.rank);
        let cmp = compare_algebroids(&ambient_tangent, &identified, &corr, cfg)?;

        let mut laws = vec![retract, vanish];
        laws.extend(cmp.laws);
        let ok = laws.iter().all(|l| l.max_residual <= cfg.tol);
        for l in &mut laws {
            if l.max_residual <= cfg.tol {
                l.witness = None;
            }
        }
        Ok(PropertyReport {
            subject: format!("tubular neighbourhood of {} in {}", self.locus.name, self.ambient.name),
            tol: cfg.tol,
            points: cfg.points,
            laws,
            ok,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_slice_has_a_tame_tube() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let cfg = AlgebroidCheckConfig { tol: 1e-7, ..Default::default() };
        let report = l.tameness_report(&cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
        assert_eq!(l.ambient.blocks[0].embedded_dim(), 3);
    }

    #[test]
    fn corner_face_has_a_tame_tube() {
        let l = TameSubmanifold::corner_face(1, 2).unwrap();
        let cfg = AlgebroidCheckConfig { tol: 1e-7, ..Default::default() };
        let report = l.tameness_report(&cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
        assert!(matches!(l.center(), SubmanifoldSpec::CornerFace { .. }));
    }

    #[test]
    fn blow_up_front_face_matches_the_codimension() {
        let l = TameSubmanifold::linear_slice(3, 1).unwrap();
        let bu = l.blow_up().unwrap();
        assert_eq!(bu.total.blocks[0].factors[0], Factor::Sphere(2));
        let hy = TameSubmanifold::corner_face(1, 1).unwrap();
        let bh = hy.blow_up().unwrap();
        assert_eq!(bh.total.blocks[0].factors[0], Factor::ClippedSphere(0));
    }

    #[test]
    fn broken_embedding_is_reported() {
        let mut l = TameSubmanifold::linear_slice(1, 1).unwrap();
        let (locus, ambient) = (l.locus.clone(), l.ambient.clone());
        l.embedding = SmoothMap::from_fn(locus, ambient, |_, j| {
            Ok((0, vec![Jet::c(1.0), j[0].clone()]))
        });
        let cfg = AlgebroidCheckConfig { tol: 1e-7, ..Default::default() };
        let report = l.tameness_report(&cfg).unwrap();
        assert!(!report.ok);
        let bad = &report.laws[1];
        assert!(bad.max_residual > 0.5, "radius law should flag the offset embedding");
    }
}
