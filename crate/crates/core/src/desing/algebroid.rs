//! The comparison algebroid of a desingularization, stated without
//! reference to the groupoid: over the blown-up base, the thick pullback
//! along the radial fibration of a rescaled product algebroid on
//! `[0, ∞) × ℒ`. Its generators match the frame carried by the glued
//! groupoid, which turns the structural comparison into a numerical check.

use std::sync::Arc;

use rayon::prelude::*;

use crate::algebroid::{
    compare_algebroids, direct_product_algebroid, lie_algebroid_of, rescale, tangent_algebroid,
    thick_pullback, Algebroid, AlgebroidCheckConfig, GeneratorCorrespondence, PropertyReport,
    ScalarFn, Section, StructuredAlgebroid,
};
use crate::desing::desingularize::{desingularize, desingularize_ni, front_rotations};
use crate::desing::tame::TameSubmanifold;
use crate::geometry::manifold::{CoordinateManifold, Point};
use crate::geometry::sample::{sample_points, SamplePlan};
use crate::groupoid::{slice_projection, FiberedProjection, LieGroupoid};
use crate::jet::{self, Jet};
use crate::{Error, Factor, Result};

/// The radial fibration of the blown-up base over `[0, ∞) × ℒ`, together
/// with the codimension and locus dimension.
fn radial_fibration(l: &TameSubmanifold) -> Result<(FiberedProjection, usize, usize)> {
    let bu = l.blow_up()?;
    let n = l.normal;
    let k = l.locus.blocks[0].embedded_dim();
    let codomain = CoordinateManifold::product(
        format!("[0,inf)x{}", l.locus.name),
        &CoordinateManifold::halfline(),
        &l.locus,
    );
    let p = slice_projection(&bu.total, &codomain, (n..n + 1 + k).collect())?;
    Ok((p, n, k))
}

/// The radial gauge: the half-line coordinate of the base of the product
/// algebroid, which pulls back to the boundary distance ρ.
fn radial_gauge() -> ScalarFn {
    Arc::new(|_b, j: &[Jet]| Ok(j[0].clone()))
}

/// The comparison algebroid of the desingularization: every generator of
/// `T([0, ∞)) × Tℒ` is rescaled by ρ before the thick pullback, so the
/// frame reads `(rotations, ρ ∂_ρ, ρ ∂_ℓ)`.
pub fn desing_algebroid(l: &TameSubmanifold) -> Result<StructuredAlgebroid> {
    let (p, _n, _k) = radial_fibration(l)?;
    let half = tangent_algebroid(&CoordinateManifold::halfline())?;
    let locus = tangent_algebroid(&l.locus)?;
    let product = direct_product_algebroid(&half, &locus);
    thick_pullback(&p, &rescale(&product, radial_gauge(), "ρ"))
}

/// The anisotropic comparison algebroid: only the radial generator is
/// rescaled, so the frame reads `(rotations, ρ ∂_ρ, ∂_ℓ)`.
pub fn desing_algebroid_ni(l: &TameSubmanifold) -> Result<StructuredAlgebroid> {
    let (p, _n, _k) = radial_fibration(l)?;
    let half = tangent_algebroid(&CoordinateManifold::halfline())?;
    let locus = tangent_algebroid(&l.locus)?;
    let product = direct_product_algebroid(&rescale(&half, radial_gauge(), "ρ"), &locus);
    thick_pullback(&p, &product)
}

/// The sign correspondence between the comparison frame and the frame
/// differentiated out of the glued groupoid: the radial generator flips
/// orientation, everything else matches identically.
pub fn desing_correspondence(l: &TameSubmanifold) -> Result<GeneratorCorrespondence> {
    let n = l.normal;
    let k = l.locus.blocks[0].embedded_dim();
    let front = if l.hyperbolic { Factor::ClippedSphere(n - 1) } else { Factor::Sphere(n - 1) };
    let rots = front_rotations(front).ok_or_else(|| {
        Error::Unsupported(format!(
            "no canonical frame over the front face of codimension {n} corner loci"
        ))
    })?;
    let mut weights = vec![1.0; rots.len()];
    weights.push(-1.0);
    weights.extend(std::iter::repeat(1.0).take(k));
    Ok(GeneratorCorrespondence::diagonal(&weights))
}

/// Desingularize `g` along `l` and compare the algebroid differentiated
/// from the glued groupoid with the directly constructed comparison
/// algebroid, generator by generator.
pub fn check_desing_algebroid_iso(
    g: &LieGroupoid,
    l: &TameSubmanifold,
    cfg: &AlgebroidCheckConfig,
) -> Result<PropertyReport> {
    let d = desingularize(g, l)?;
    let target = lie_algebroid_of(&d.groupoid)?;
    let source = desing_algebroid(l)?;
    let corr = desing_correspondence(l)?;
    compare_algebroids(&target, &source, &corr, cfg)
}

/// The anisotropic variant of [`check_desing_algebroid_iso`].
pub fn check_desing_algebroid_iso_ni(
    g: &LieGroupoid,
    l: &TameSubmanifold,
    cfg: &AlgebroidCheckConfig,
) -> Result<PropertyReport> {
    let d = desingularize_ni(g, l)?;
    let target = lie_algebroid_of(&d.groupoid)?;
    let source = desing_algebroid_ni(l)?;
    let corr = desing_correspondence(l)?;
    compare_algebroids(&target, &source, &corr, cfg)
}

/// Commutator of two anchor fields by central differences.
fn anchor_commutator_fd(
    a: &StructuredAlgebroid,
    i: usize,
    j: usize,
    x: &Point,
) -> Result<Vec<f64>> {
    let at = |coords: &[f64], gen: usize| -> Result<Vec<f64>> {
        let rho = (a.anchor)(x.block, &jet::constants(coords))?;
        Ok(rho[gen].iter().map(|t| t.v).collect())
    };
    let vi = at(&x.coords, i)?;
    let vj = at(&x.coords, j)?;
    let derivative = |field: usize, dir: &[f64]| -> Result<Vec<f64>> {
        crate::algebroid::richardson(
            |h| {
                let shift = |sign: f64| -> Result<Vec<f64>> {
                    let coords: Vec<f64> = x
                        .coords
                        .iter()
                        .zip(dir)
                        .map(|(c, d)| c + sign * h * d)
                        .collect();
                    at(&coords, field)
                };
                let (plus, minus) = (shift(1.0)?, shift(-1.0)?);
                Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect())
            },
            crate::algebroid::FD_STEP,
        )
    };
    let dj_along_i = derivative(j, &vi)?;
    let di_along_j = derivative(i, &vj)?;
    Ok(dj_along_i.iter().zip(&di_along_j).map(|(a, b)| a - b).collect())
}

/// Check that the anchor of each generator bracket equals the commutator
/// of the anchor fields, the latter computed by finite differences. This
/// ties the structure functions to the geometry they claim to encode.
pub fn bracket_closure_report(
    a: &StructuredAlgebroid,
    cfg: &AlgebroidCheckConfig,
) -> PropertyReport {
    const LAWS: [&str; 1] = ["anchor of a generator bracket is the anchor commutator"];
    let pts = sample_points(&a.base, &SamplePlan::new(cfg.seed, cfg.points));
    let r = a.rank;
    let observations: Vec<Vec<(usize, f64, Option<String>)>> = pts
        .par_iter()
        .map(|x| {
            let mut out = Vec::new();
            for i in 0..r {
                for j in i + 1..r {
                    let res: Result<f64> = (|| {
                        let s = a.bracket_section(
                            &Section::generator(r, i),
                            &Section::generator(r, j),
                        );
                        let lhs = a.anchor_value(&s, x)?;
                        let rhs = anchor_commutator_fd(a, i, j, x)?;
                        Ok(lhs
                            .iter()
                            .zip(&rhs)
                            .fold(0.0_f64, |m, (p, q)| m.max((p - q).abs())))
                    })();
                    match res {
                        Ok(residual) => out.push((
                            0,
                            residual,
                            Some(format!(
                                "generators ({i}, {j}) at {:?}: residual {residual:.3e}",
                                x.coords
                            )),
                        )),
                        Err(e) => out.push((0, f64::INFINITY, Some(format!("error: {e}")))),
                    }
                }
            }
            out
        })
        .collect();
    PropertyReport::assemble(
        format!("{} (bracket closure)", a.name),
        cfg.tol,
        pts.len(),
        &LAWS,
        observations,
    )
}

/// Check that the fully rescaled module sits inside the anisotropic one as
/// an ideal near the front face: the scaled generators are sections of the
/// anisotropic algebroid, and their brackets against arbitrary generators
/// keep vanishing locus coefficients on `ρ = 0`.
pub fn ideal_report(l: &TameSubmanifold, cfg: &AlgebroidCheckConfig) -> Result<PropertyReport> {
    const LAWS: [&str; 2] = [
        "scaled generators agree with their anisotropic images",
        "brackets against the scaled module vanish along the locus directions on the front face",
    ];
    let scaled = desing_algebroid(l)?;
    let ambient = desing_algebroid_ni(l)?;
    let n = l.normal;
    let k = l.locus.blocks[0].embedded_dim();
    let r = ambient.rank;
    let e_slots: Vec<usize> = (r - k..r).collect();

    // Images of the scaled generators inside the anisotropic algebroid:
    // rotations and the radial generator map across unchanged, the locus
    // generators pick up a factor of ρ.
    let gauge: ScalarFn = Arc::new(move |_b, j: &[Jet]| Ok(j[n].clone()));
    let image = |a: usize| -> Section {
        let gen = Section::generator(r, a);
        if e_slots.contains(&a) {
            gen.scaled(gauge.clone())
        } else {
            gen
        }
    };

    let pts = sample_points(&scaled.base, &SamplePlan::new(cfg.seed, cfg.points));
    let observations: Vec<Vec<(usize, f64, Option<String>)>> = pts
        .par_iter()
        .map(|x| {
            let mut out = Vec::new();
            for a in 0..r {
                let res: Result<f64> = (|| {
                    let lhs = scaled.anchor_value(&Section::generator(r, a), x)?;
                    let rhs = ambient.anchor_value(&image(a), x)?;
                    Ok(lhs
                        .iter()
                        .zip(&rhs)
                        .fold(0.0_f64, |m, (p, q)| m.max((p - q).abs())))
                })();
                match res {
                    Ok(residual) => out.push((
                        0,
                        residual,
                        Some(format!("generator {a} at {:?}: residual {residual:.3e}", x.coords)),
                    )),
                    Err(e) => out.push((0, f64::INFINITY, Some(format!("error: {e}")))),
                }
            }

            let mut face = x.clone();
            face.coords[n] = 0.0;
            for a in 0..r {
                for b in 0..r {
                    let res: Result<f64> = (|| {
                        let s = ambient.bracket_section(&image(a), &Section::generator(r, b));
                        let coeffs = ambient.section_value(&s, &face)?;
                        Ok(e_slots
                            .iter()
                            .fold(0.0_f64, |m, &slot| m.max(coeffs[slot].abs())))
                    })();
                    match res {
                        Ok(residual) => out.push((
                            1,
                            residual,
                            Some(format!(
                                "bracket ({a}, {b}) at {:?}: residual {residual:.3e}",
                                face.coords
                            )),
                        )),
                        Err(e) => out.push((1, f64::INFINITY, Some(format!("error: {e}")))),
                    }
                }
            }
            out
        })
        .collect();

    Ok(PropertyReport::assemble(
        format!("scaled module of {} inside the anisotropic one", ambient.name),
        cfg.tol,
        pts.len(),
        &LAWS,
        observations,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::algebroid_suite;
    use crate::groupoid::pair_groupoid;

    fn cfg(points: usize, tol: f64) -> AlgebroidCheckConfig {
        AlgebroidCheckConfig { points, tol, ..Default::default() }
    }

    #[test]
    fn comparison_algebroid_satisfies_the_bracket_laws() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let a = desing_algebroid(&l).unwrap();
        let report = algebroid_suite(&a, &cfg(60, 1e-5));
        assert!(report.ok, "{:#?}", report.laws);
        let ni = desing_algebroid_ni(&l).unwrap();
        let nireport = algebroid_suite(&ni, &cfg(60, 1e-5));
        assert!(nireport.ok, "{:#?}", nireport.laws);
    }

    #[test]
    fn derived_frame_matches_the_comparison_algebroid() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let g = pair_groupoid(&l.ambient);
        let report = check_desing_algebroid_iso(&g, &l, &cfg(60, 1e-5)).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn derived_frame_matches_the_anisotropic_comparison_algebroid() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let g = pair_groupoid(&l.ambient);
        let report = check_desing_algebroid_iso_ni(&g, &l, &cfg(40, 1e-5)).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn corner_comparison_works_at_codimension_one() {
        let l = TameSubmanifold::corner_face(1, 2).unwrap();
        let g = pair_groupoid(&l.ambient);
        let report = check_desing_algebroid_iso(&g, &l, &cfg(40, 1e-5)).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn structure_functions_close_under_the_anchor_commutator() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let a = desing_algebroid(&l).unwrap();
        let report = bracket_closure_report(&a, &cfg(40, 1e-5));
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn scaled_module_is_an_ideal_on_the_front_face() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let report = ideal_report(&l, &cfg(40, 1e-6)).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn hyperbolic_codimension_two_has_no_canonical_correspondence() {
        let l = TameSubmanifold::corner_face(2, 1).unwrap();
        match desing_correspondence(&l) {
            Err(Error::Unsupported(msg)) => assert!(msg.contains("frame"), "{msg}"),
            other => panic!("expected an unsupported-frame rejection, got {other:?}"),
        }
    }
}
