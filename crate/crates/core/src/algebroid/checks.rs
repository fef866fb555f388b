//! Property suites for algebroids: the bracket laws, a finite-difference
//! cross-check of the bracket itself, and comparison of two algebroids
//! through a constant generator correspondence.

use rayon::prelude::*;

use crate::algebroid::section::{ScalarFn, Section};
use crate::algebroid::structured::StructuredAlgebroid;
use crate::algebroid::Algebroid;
use crate::geometry::sample::{rng_for, sample_points, SamplePlan};
use crate::groupoid::suite::LawResult;
use crate::jet::{self, Jet};
use crate::{Point, Result};
use rand::Rng;
use std::sync::Arc;

/// Sampling and tolerance parameters for algebroid property suites.
#[derive(Clone, Copy, Debug)]
pub struct AlgebroidCheckConfig {
    pub seed: u64,
    pub points: usize,
    pub tol: f64,
}

impl Default for AlgebroidCheckConfig {
    fn default() -> Self {
        AlgebroidCheckConfig { seed: 0xa19e, points: 120, tol: 1e-5 }
    }
}

/// Outcome of a pointwise property suite.
#[derive(Clone, Debug)]
pub struct PropertyReport {
    pub subject: String,
    pub tol: f64,
    pub points: usize,
    pub laws: Vec<LawResult>,
    pub ok: bool,
}

impl PropertyReport {
    pub(crate) fn assemble(
        subject: String,
        tol: f64,
        points: usize,
        law_names: &[&str],
        observations: Vec<Vec<(usize, f64, Option<String>)>>,
    ) -> PropertyReport {
        let mut laws: Vec<LawResult> = law_names
            .iter()
            .map(|n| LawResult { law: (*n).to_string(), max_residual: 0.0, witness: None })
            .collect();
        for per_point in observations {
            for (law, residual, witness) in per_point {
                let entry = &mut laws[law];
                if residual > entry.max_residual {
                    entry.max_residual = residual;
                    entry.witness = witness;
                }
            }
        }
        let ok = laws.iter().all(|l| l.max_residual <= tol);
        for l in &mut laws {
            if l.max_residual <= tol {
                l.witness = None;
            }
        }
        PropertyReport { subject, tol, points, laws, ok }
    }
}

/// Largest embedded dimension a random polynomial coefficient reads.
const POLY_DIRS: usize = 12;

/// A random section with degree-two polynomial coefficients, deterministic
/// in the seed. Coefficients only involve the first [`POLY_DIRS`] embedded
/// coordinates, which keeps one table valid for every block.
fn random_section(rank: usize, seed: u64, index: u64) -> Section {
    let mut rng = rng_for(seed, index);
    let c0: Vec<f64> = (0..rank).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lin: Vec<Vec<f64>> = (0..rank)
        .map(|_| (0..POLY_DIRS).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let quad: Vec<Vec<f64>> = (0..rank)
        .map(|_| (0..POLY_DIRS).map(|_| rng.gen_range(-0.5..0.5)).collect())
        .collect();
    Section::new(rank, move |_b, jets| {
        Ok((0..rank)
            .map(|i| {
                let mut acc = Jet::c(c0[i]);
                for (j, t) in jets.iter().enumerate().take(POLY_DIRS) {
                    acc = acc + &(t * lin[i][j]) + &(&(t * t) * quad[i][j]);
                }
                acc
            })
            .collect())
    })
}

/// A random degree-two polynomial scalar with the same determinism contract.
fn random_scalar(seed: u64, index: u64) -> ScalarFn {
    let mut rng = rng_for(seed, index);
    let c0: f64 = rng.gen_range(-1.0..1.0);
    let lin: Vec<f64> = (0..POLY_DIRS).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let quad: Vec<f64> = (0..POLY_DIRS).map(|_| rng.gen_range(-0.5..0.5)).collect();
    Arc::new(move |_b, jets| {
        let mut acc = Jet::c(c0);
        for (j, t) in jets.iter().enumerate().take(POLY_DIRS) {
            acc = acc + &(t * lin[j]) + &(&(t * t) * quad[j]);
        }
        Ok(acc)
    })
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn diff_sup(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Armor for one law at one point: evaluation failure is a law failure with
/// the error as witness, never a harness abort.
fn observe(
    out: &mut Vec<(usize, f64, Option<String>)>,
    law: usize,
    x: &Point,
    r: Result<f64>,
) {
    match r {
        Ok(res) => out.push((
            law,
            res,
            Some(format!("residual {res:.3e} at block {} {:?}", x.block, x.coords)),
        )),
        Err(e) => out.push((
            law,
            f64::INFINITY,
            Some(format!("evaluation failed at block {} {:?}: {e}", x.block, x.coords)),
        )),
    }
}

/// Directional derivative of a scalar along the anchor of a section,
/// evaluated with a first-order jet pass.
fn anchor_derivative(
    a: &dyn Algebroid,
    s: &Section,
    f: &ScalarFn,
    x: &Point,
) -> Result<f64> {
    let rho = a.anchor_value(s, x)?;
    let seeds = jet::seed_dirs(&x.coords, std::slice::from_ref(&rho), false);
    Ok(f(x.block, &seeds)?.d1(0))
}

/// Commutator of the anchor fields of two sections, computed from
/// first-order anchor jets.
fn anchor_commutator(
    a: &dyn Algebroid,
    xs: &Section,
    ys: &Section,
    x: &Point,
) -> Result<Vec<f64>> {
    let rx = a.anchor_value(xs, x)?;
    let ry = a.anchor_value(ys, x)?;
    let along_x = jet::seed_dirs(&x.coords, std::slice::from_ref(&rx), false);
    let along_y = jet::seed_dirs(&x.coords, std::slice::from_ref(&ry), false);
    let dy = a.anchor_jets(ys, x.block, &along_x)?;
    let dx = a.anchor_jets(xs, x.block, &along_y)?;
    Ok(dy.iter().zip(&dx).map(|(u, v)| u.d1(0) - v.d1(0)).collect())
}

/// Verify antisymmetry, the Leibniz rule, the anchor morphism property, and
/// the Jacobi identity on randomly sampled points against random polynomial
/// sections.
pub fn algebroid_suite(a: &dyn Algebroid, cfg: &AlgebroidCheckConfig) -> PropertyReport {
    const LAWS: [&str; 4] =
        ["antisymmetry", "Leibniz rule", "anchor morphism", "Jacobi identity"];
    let rank = a.rank();
    let xs = random_section(rank, cfg.seed, 1);
    let ys = random_section(rank, cfg.seed, 2);
    let zs = random_section(rank, cfg.seed, 3);
    let f = random_scalar(cfg.seed, 4);
    let pts = sample_points(a.base(), &SamplePlan::new(cfg.seed, cfg.points));

    let observations: Vec<Vec<(usize, f64, Option<String>)>> = pts
        .par_iter()
        .map(|x| {
            let mut out = Vec::new();
            observe(&mut out, 0, x, (|| {
                let b1 = a.bracket_value(&xs, &ys, x)?;
                let b2 = a.bracket_value(&ys, &xs, x)?;
                Ok(b1.iter().zip(&b2).fold(0.0_f64, |m, (u, v)| m.max((u + v).abs())))
            })());
            observe(&mut out, 1, x, (|| {
                let fy = ys.scaled(f.clone());
                let lhs = a.bracket_value(&xs, &fy, x)?;
                let b = a.bracket_value(&xs, &ys, x)?;
                let yv = a.section_value(&ys, x)?;
                let fv = f(x.block, &jet::constants(&x.coords))?.v;
                let dfx = anchor_derivative(a, &xs, &f, x)?;
                let rhs: Vec<f64> =
                    b.iter().zip(&yv).map(|(u, w)| fv * u + dfx * w).collect();
                Ok(diff_sup(&lhs, &rhs))
            })());
            observe(&mut out, 2, x, (|| {
                let lhs = a.bracket_anchor_value(&xs, &ys, x)?;
                let rhs = anchor_commutator(a, &xs, &ys, x)?;
                Ok(diff_sup(&lhs, &rhs))
            })());
            observe(&mut out, 3, x, (|| Ok(sup(&a.jacobiator_value(&xs, &ys, &zs, x)?)))());
            out
        })
        .collect();

    PropertyReport::assemble(a.label(), cfg.tol, pts.len(), &LAWS, observations)
}

/// Compare the bracket against its finite-difference evaluation on sampled
/// points; the two routes share no differentiation code.
pub fn bracket_fd_check(a: &dyn Algebroid, cfg: &AlgebroidCheckConfig) -> PropertyReport {
    const LAWS: [&str; 1] = ["bracket matches finite differences"];
    let rank = a.rank();
    let xs = random_section(rank, cfg.seed, 5);
    let ys = random_section(rank, cfg.seed, 6);
    let pts = sample_points(a.base(), &SamplePlan::new(cfg.seed, cfg.points));

    let observations: Vec<Vec<(usize, f64, Option<String>)>> = pts
        .par_iter()
        .map(|x| {
            let mut out = Vec::new();
            observe(&mut out, 0, x, (|| {
                let exact = a.bracket_value(&xs, &ys, x)?;
                let fd = a.bracket_value_fd(&xs, &ys, x)?;
                Ok(diff_sup(&exact, &fd))
            })());
            out
        })
        .collect();

    PropertyReport::assemble(
        format!("{} (finite differences)", a.label()),
        cfg.tol,
        pts.len(),
        &LAWS,
        observations,
    )
}

/// Constant-coefficient identification of the generators of one algebroid
/// with sections of another: generator `i` maps to `Σ_l matrix[i][l] e_l`.
#[derive(Clone, Debug)]
pub struct GeneratorCorrespondence {
    pub matrix: Vec<Vec<f64>>,
}

impl GeneratorCorrespondence {
    pub fn identity(rank: usize) -> Self {
        GeneratorCorrespondence {
            matrix: (0..rank)
                .map(|i| (0..rank).map(|j| f64::from(u8::from(i == j))).collect())
                .collect(),
        }
    }

    /// Diagonal correspondence with the given signs or weights.
    pub fn diagonal(weights: &[f64]) -> Self {
        let rank = weights.len();
        GeneratorCorrespondence {
            matrix: (0..rank)
                .map(|i| (0..rank).map(|j| if i == j { weights[i] } else { 0.0 }).collect())
                .collect(),
        }
    }

    fn row(&self, i: usize) -> Section {
        Section::constant(self.matrix[i].clone())
    }

    /// Image of `Σ_k w_k E_k` under the correspondence.
    fn combine(&self, w: &[f64]) -> Section {
        let cols = self.matrix[0].len();
        let v: Vec<f64> = (0..cols)
            .map(|l| w.iter().zip(&self.matrix).map(|(wk, row)| wk * row[l]).sum())
            .collect();
        Section::constant(v)
    }
}

/// Check that a correspondence of generators intertwines anchors and
/// brackets: the structured algebroid's frame is pushed into the other
/// algebroid and both sides are evaluated there.
pub fn compare_algebroids(
    target: &dyn Algebroid,
    source: &StructuredAlgebroid,
    corr: &GeneratorCorrespondence,
    cfg: &AlgebroidCheckConfig,
) -> Result<PropertyReport> {
    const LAWS: [&str; 2] = ["anchor correspondence", "bracket correspondence"];
    if source.base.blocks != target.base().blocks {
        return Err(crate::Error::Shape(format!(
            "bases of {} and {} differ",
            source.name,
            target.label()
        )));
    }
    if corr.matrix.len() != source.rank
        || corr.matrix.iter().any(|row| row.len() != target.rank())
    {
        return Err(crate::Error::Shape(format!(
            "correspondence shape {}×{} does not map rank {} into rank {}",
            corr.matrix.len(),
            corr.matrix.first().map_or(0, Vec::len),
            source.rank,
            target.rank()
        )));
    }
    let pts = sample_points(&source.base, &SamplePlan::new(cfg.seed, cfg.points));
    let r = source.rank;

    let observations: Vec<Vec<(usize, f64, Option<String>)>> = pts
        .par_iter()
        .map(|x| {
            let mut out = Vec::new();
            for i in 0..r {
                observe(&mut out, 0, x, (|| {
                    let lhs = source.anchor_value(&Section::generator(r, i), x)?;
                    let rhs = target.anchor_value(&corr.row(i), x)?;
                    Ok(diff_sup(&lhs, &rhs))
                })());
            }
            for i in 0..r {
                for j in i + 1..r {
                    observe(&mut out, 1, x, (|| {
                        let lhs = target.bracket_value(&corr.row(i), &corr.row(j), x)?;
                        let c = (source.structure)(x.block, &jet::constants(&x.coords))?;
                        let w: Vec<f64> =
                            (0..r).map(|k| c[(i * r + j) * r + k].v).collect();
                        let rhs = target.section_value(&corr.combine(&w), x)?;
                        Ok(diff_sup(&lhs, &rhs))
                    })());
                }
            }
            out
        })
        .collect();

    Ok(PropertyReport::assemble(
        format!("{} ≅ {}", source.name, target.label()),
        cfg.tol,
        pts.len(),
        &LAWS,
        observations,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::constructions::tangent_algebroid;
    use crate::algebroid::derived::lie_algebroid_of;
    use crate::groupoid::pair_groupoid;
    use crate::CoordinateManifold;

    #[test]
    fn tangent_algebroid_passes_all_laws() {
        let a = tangent_algebroid(&CoordinateManifold::euclidean(2)).unwrap();
        let cfg = AlgebroidCheckConfig { points: 40, ..Default::default() };
        let report = algebroid_suite(&a, &cfg);
        assert!(report.ok, "{report:?}");
        let fd = bracket_fd_check(&a, &cfg);
        assert!(fd.ok, "{fd:?}");
    }

    #[test]
    fn sphere_tangent_algebroid_passes_all_laws() {
        let m = CoordinateManifold::single(
            "S2",
            crate::ModelBlock::new(vec![crate::Factor::Sphere(2)]),
        );
        let a = tangent_algebroid(&m).unwrap();
        let cfg = AlgebroidCheckConfig { points: 40, ..Default::default() };
        let report = algebroid_suite(&a, &cfg);
        assert!(report.ok, "{report:?}");
    }

    #[test]
    fn pair_groupoid_algebroid_matches_tangent_bundle() {
        let m = CoordinateManifold::euclidean(2);
        let derived = lie_algebroid_of(&pair_groupoid(&m)).unwrap();
        let tangent = tangent_algebroid(&m).unwrap();
        let cfg = AlgebroidCheckConfig { points: 30, tol: 1e-9, ..Default::default() };
        let corr = GeneratorCorrespondence::identity(2);
        let report = compare_algebroids(&derived, &tangent, &corr, &cfg).unwrap();
        assert!(report.ok, "{report:?}");
    }

    #[test]
    fn scaled_correspondence_detects_sign_flip() {
        let m = CoordinateManifold::euclidean(1);
        let derived = lie_algebroid_of(&pair_groupoid(&m)).unwrap();
        let tangent = tangent_algebroid(&m).unwrap();
        let cfg = AlgebroidCheckConfig { points: 10, tol: 1e-9, ..Default::default() };
        let corr = GeneratorCorrespondence::diagonal(&[-1.0]);
        let report = compare_algebroids(&derived, &tangent, &corr, &cfg).unwrap();
        assert!(!report.ok, "a flipped anchor must be flagged");
        assert!(report.laws[0].max_residual > 0.1);
    }
}
