//! Corner invariants and the tame-submersion check.

use nalgebra::DMatrix;

use crate::geometry::manifold::{CoordinateManifold, Point};
use crate::geometry::map::SmoothMap;
use crate::geometry::sample::{gauss, rng_for, sample_points, SamplePlan};
use crate::geometry::VANISH_TOL;
use crate::Result;

/// Minimal singular value below which a differential counts as rank
/// deficient.
pub const SUBMERSION_SIGMA_TOL: f64 = 1e-8;

/// Boundary depth of a point: the number of boundary hyperfaces it lies on.
pub fn depth(m: &CoordinateManifold, p: &Point) -> usize {
    m.blocks[p.block]
        .boundary_indices()
        .into_iter()
        .filter(|&i| p.coords[i].abs() <= VANISH_TOL)
        .count()
}

/// Whether the embedded vector `v` lies in the inward-pointing tangent cone
/// at `p`: tangent to the sphere constraints and non-negative along every
/// boundary hyperface through `p`. `tol` is the slack used for both tests.
pub fn inward_cone_membership(m: &CoordinateManifold, p: &Point, v: &[f64], tol: f64) -> bool {
    let block = &m.blocks[p.block];
    let mut w = v.to_vec();
    block.project_tangent(&p.coords, &mut w);
    let scale: f64 = 1.0 + v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tangency_defect: f64 = v
        .iter()
        .zip(&w)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if tangency_defect > tol * scale {
        return false;
    }
    block
        .boundary_indices()
        .into_iter()
        .filter(|&i| p.coords[i].abs() <= VANISH_TOL)
        .all(|i| v[i] >= -tol * scale)
}

/// One reason a tameness check failed, with the offending data.
#[derive(Clone, Debug)]
pub struct TamenessWitness {
    pub point: Point,
    pub vector: Option<Vec<f64>>,
    pub image_vector: Option<Vec<f64>>,
    pub reason: String,
}

/// Outcome of [`check_tame_submersion`].
#[derive(Clone, Debug)]
pub struct TamenessReport {
    pub ok: bool,
    pub points_checked: usize,
    pub vectors_checked: usize,
    pub min_singular_value: f64,
    pub witnesses: Vec<TamenessWitness>,
}

const MAX_WITNESSES: usize = 4;
// Sign-pattern classification margins: inside the inner margin a vector
// counts as inward, beyond the outer margin as outward, in between the
// sample is discarded as indeterminate.
const INNER_MARGIN: f64 = 1e-9;
const OUTER_MARGIN: f64 = 1e-7;

enum ConeClass {
    Inward,
    Outward,
    Indeterminate,
}

fn classify(m: &CoordinateManifold, p: &Point, v: &[f64]) -> ConeClass {
    let block = &m.blocks[p.block];
    let scale: f64 = 1.0 + v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut worst = f64::INFINITY;
    for i in block.boundary_indices() {
        if p.coords[i].abs() <= 1e-9 {
            worst = worst.min(v[i]);
        }
    }
    if worst == f64::INFINITY || worst >= -INNER_MARGIN * scale {
        ConeClass::Inward
    } else if worst < -OUTER_MARGIN * scale {
        ConeClass::Outward
    } else {
        ConeClass::Indeterminate
    }
}

/// Check that `h` is a tame submersion on a deterministic sample of its
/// domain: the differential is surjective, boundary depth is preserved, and
/// a vector is inward if and only if its image is. Candidate vectors are a
/// full sign-pattern fan over the active boundary directions (when there are
/// at most six) plus random tangent vectors. Failures are returned as
/// witnesses rather than errors.
pub fn check_tame_submersion(h: &SmoothMap, plan: &SamplePlan) -> Result<TamenessReport> {
    let mut report = TamenessReport {
        ok: true,
        points_checked: 0,
        vectors_checked: 0,
        min_singular_value: f64::INFINITY,
        witnesses: Vec::new(),
    };
    let fail = |report: &mut TamenessReport, w: TamenessWitness| {
        report.ok = false;
        if report.witnesses.len() < MAX_WITNESSES {
            report.witnesses.push(w);
        }
    };

    for (idx, p) in sample_points(&h.domain, plan).iter().enumerate() {
        report.points_checked += 1;
        let tj = h.tangent_jacobian(p)?;
        let y = Point::new(tj.codomain_block, tj.image.clone());
        let cod_block = &h.codomain.blocks[y.block];

        // Surjectivity of the tangent-restricted differential.
        let cod_basis = cod_block.tangent_basis(&y.coords);
        let reduced = DMatrix::from_fn(cod_basis.len(), tj.matrix.ncols(), |i, j| {
            (0..tj.matrix.nrows()).map(|r| cod_basis[i][r] * tj.matrix[(r, j)]).sum::<f64>()
        });
        let (rrows, rcols) = (reduced.nrows(), reduced.ncols());
        let sigma = reduced
            .svd(false, false)
            .singular_values
            .iter()
            .fold(f64::INFINITY, |a, s| a.min(*s));
        let sigma = if cod_basis.is_empty() { f64::INFINITY } else { sigma };
        if rrows > rcols || sigma < SUBMERSION_SIGMA_TOL {
            report.min_singular_value = report.min_singular_value.min(sigma.max(0.0));
            fail(
                &mut report,
                TamenessWitness {
                    point: p.clone(),
                    vector: None,
                    image_vector: None,
                    reason: format!("differential not surjective (sigma_min = {sigma:.3e})"),
                },
            );
            continue;
        }
        report.min_singular_value = report.min_singular_value.min(sigma);

        // Depth preservation.
        let (dd, dc) = (depth(&h.domain, p), depth(&h.codomain, &y));
        if dd != dc {
            fail(
                &mut report,
                TamenessWitness {
                    point: p.clone(),
                    vector: None,
                    image_vector: None,
                    reason: format!("depth not preserved ({dd} -> {dc})"),
                },
            );
        }

        // Candidate vectors: the sign-pattern fan over active boundary
        // directions, then random tangents.
        let dom_block = &h.domain.blocks[p.block];
        let active: Vec<usize> = dom_block
            .boundary_indices()
            .into_iter()
            .filter(|&i| p.coords[i].abs() <= VANISH_TOL)
            .collect();
        let (_, jac) = h.jacobian(p)?;
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        if active.len() <= 6 {
            let n = 3usize.pow(active.len() as u32);
            for code in 1..n {
                let mut v = vec![0.0; p.coords.len()];
                let mut c = code;
                for &i in &active {
                    v[i] = [0.0, 1.0, -1.0][c % 3];
                    c /= 3;
                }
                candidates.push(v);
            }
        }
        let mut rng = rng_for(plan.seed ^ TANGENT_STREAM, idx as u64);
        let basis = dom_block.tangent_basis(&p.coords);
        for _ in 0..8 {
            let mut v = vec![0.0; p.coords.len()];
            for b in &basis {
                let z = gauss(&mut rng);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += z * bi;
                }
            }
            candidates.push(v);
        }

        for v in candidates {
            let cv = classify(&h.domain, p, &v);
            let mut w: Vec<f64> = (0..jac.nrows())
                .map(|r| (0..jac.ncols()).map(|c| jac[(r, c)] * v[c]).sum())
                .collect();
            cod_block.project_tangent(&y.coords, &mut w);
            let cw = classify(&h.codomain, &y, &w);
            report.vectors_checked += 1;
            match (cv, cw) {
                (ConeClass::Inward, ConeClass::Outward) => fail(
                    &mut report,
                    TamenessWitness {
                        point: p.clone(),
                        vector: Some(v),
                        image_vector: Some(w),
                        reason: "inward vector maps outside the image cone".into(),
                    },
                ),
                (ConeClass::Outward, ConeClass::Inward) => fail(
                    &mut report,
                    TamenessWitness {
                        point: p.clone(),
                        vector: Some(v),
                        image_vector: Some(w),
                        reason: "non-inward vector maps into the image cone".into(),
                    },
                ),
                _ => {}
            }
        }
    }
    Ok(report)
}

// Distinct seed stream for the random tangent candidates.
const TANGENT_STREAM: u64 = 0x7461_6d65_6661_6e00;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Factor, ModelBlock};

    fn half_times_line() -> CoordinateManifold {
        CoordinateManifold::single(
            "HxL",
            ModelBlock::new(vec![Factor::Half, Factor::Line]),
        )
    }

    #[test]
    fn depth_counts_active_faces() {
        let m = CoordinateManifold::single(
            "m",
            ModelBlock::new(vec![Factor::Half, Factor::ClippedSphere(1)]),
        );
        assert_eq!(depth(&m, &Point::flat(vec![0.0, 0.0, 1.0])), 2);
        assert_eq!(depth(&m, &Point::flat(vec![0.3, 0.6, 0.8])), 0);
    }

    #[test]
    fn projection_is_tame() {
        let h = SmoothMap::from_fn(
            half_times_line(),
            CoordinateManifold::halfline(),
            |_, j| Ok((0, vec![j[0].clone()])),
        );
        let report = check_tame_submersion(&h, &SamplePlan::new(3, 60)).unwrap();
        assert!(report.ok, "{:?}", report.witnesses);
        assert!(report.min_singular_value > 0.99);
    }

    #[test]
    fn corner_sum_map_produces_cone_witness() {
        // (x, y) -> x + y on the quadrant: at the corner, (1, -1) is not
        // inward but maps to 0, which is.
        let quadrant = CoordinateManifold::single(
            "H^2",
            ModelBlock::new(vec![Factor::Half, Factor::Half]),
        );
        let h = SmoothMap::from_fn(quadrant, CoordinateManifold::halfline(), |_, j| {
            Ok((0, vec![&j[0] + &j[1]]))
        });
        let report = check_tame_submersion(&h, &SamplePlan::new(3, 80)).unwrap();
        assert!(!report.ok);
        // Among the recorded witnesses there is a sign-mixed vector that the
        // differential pushes into the image cone.
        assert!(report.witnesses.iter().any(|w| {
            w.vector.as_ref().is_some_and(|v| {
                v.iter().any(|&x| x < 0.0) && v.iter().any(|&x| x > 0.0)
            })
        }));
    }
}
