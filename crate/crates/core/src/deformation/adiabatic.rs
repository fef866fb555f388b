//! Adiabatic deformation: the family over `[0, ∞)` that degenerates a
//! groupoid to the translation bundle of its algebroid at `t = 0`.

use std::sync::Arc;

use rand::Rng;

use crate::geometry::factor::{Factor, ModelBlock};
use crate::geometry::manifold::CoordinateManifold;
use crate::geometry::map::SmoothMap;
use crate::geometry::sample::rng_for;
use crate::groupoid::{
    default_unit_sampler, group_bundle, jets_match, product_groupoid, space_groupoid,
    FiberChart, FiberVar, GroupModel, GroupoidMorphism, LieGroupoid, ScalingAction, UnitFrame,
};
use crate::jet::Jet;
use crate::{Error, Point, Result};

// Arrows with t at or below this are treated as lying on the degenerate
// slice. Samplers produce t exactly 0 or bounded away from 0, so the
// branch is never taken marginally.
const ZERO_T: f64 = 1e-12;

/// The deformation `{(x, X, t)} ⇉ M × [0, ∞)` of a groupoid `𝓖 ⇉ M`, in the
/// global chart carried by the exponential of `𝓖`: for `t > 0` the arrow
/// `(x, X, t)` stands for `exp_x(tX)` at time `t`, and at `t = 0` the
/// fibers become the additive fibers of `A(𝓖)`.
#[derive(Clone)]
pub struct AdiabaticGroupoid {
    pub groupoid: LieGroupoid,
    /// The `t = 0` slice model: the translation bundle of rank `rank`.
    pub zero_part: LieGroupoid,
    /// The `t > 0` slice model: the constant family `𝓖 × [0, ∞)`.
    pub positive_part: LieGroupoid,
    /// `(x, X, t) -> (exp_x(tX), t)`, a diffeomorphism over `t > 0` that
    /// collapses each fiber to a unit at `t = 0`.
    pub chart: SmoothMap,
    /// `(g, t) -> (d(g), log(g) / t, t)`; defined for `t > 0` only.
    pub chart_inverse: SmoothMap,
    pub rank: usize,
}

/// Build the adiabatic deformation of `g`. Requires the unit frame,
/// exponential and logarithm capabilities; the exponential must be a
/// global diffeomorphism from each fiber of `A(𝓖)` onto the corresponding
/// source fiber, which holds for the groupoid classes constructed here.
pub fn adiabatic_groupoid(g: &LieGroupoid) -> Result<AdiabaticGroupoid> {
    let frame = g.unit_frame.clone().ok_or_else(|| {
        Error::Capability(format!("{} carries no unit frame", g.name))
    })?;
    let exp = g.exp.clone().ok_or_else(|| {
        Error::Capability(format!("{} carries no exponential", g.name))
    })?;
    let log = g.log.clone().ok_or_else(|| {
        Error::Capability(format!("{} carries no logarithm", g.name))
    })?;
    let rank = frame.rank;

    let halfline = CoordinateManifold::halfline();
    let units = CoordinateManifold::product(
        format!("{}x[0,inf)", g.units.name),
        &g.units,
        &halfline,
    );
    // One arrow block per unit block of g: [x, X, t].
    let ue: Vec<usize> = g.units.blocks.iter().map(|b| b.embedded_dim()).collect();
    let blocks: Vec<ModelBlock> = g
        .units
        .blocks
        .iter()
        .map(|b| {
            b.concat(&ModelBlock::lines(rank))
                .concat(&ModelBlock::new(vec![Factor::Half]))
        })
        .collect();
    let arrows = CoordinateManifold::new(format!("{}_t", g.arrows.name), blocks)?;

    let uec = ue.clone();
    let source = SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
        let e = uec[b];
        let mut out = j[..e].to_vec();
        out.push(j[e + rank].clone());
        Ok((b, out))
    });

    // r(x, X, t) = (r(exp_x(tX)), t): one smooth formula for all t.
    let (gc, ec, uec) = (g.clone(), exp.clone(), ue.clone());
    let target = SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
        let e = uec[b];
        let t = &j[e + rank];
        let c: Vec<Jet> = (0..rank).map(|i| &j[e + i] * t).collect();
        let (ab, gj) = ec((b, &j[..e]), &c)?;
        let (rb, mut rj) = gc.target.eval_jets(ab, &gj)?;
        rj.push(t.clone());
        Ok((rb, rj))
    });

    let uec = ue.clone();
    let unit = SmoothMap::from_fn(units.clone(), arrows.clone(), move |b, j| {
        let e = uec[b];
        let mut out = j[..e].to_vec();
        out.extend(std::iter::repeat_with(Jet::zero).take(rank));
        out.push(j[e].clone());
        Ok((b, out))
    });

    let (gc, ec, lc, uec) = (g.clone(), exp.clone(), log.clone(), ue.clone());
    let inverse = SmoothMap::from_fn(arrows.clone(), arrows.clone(), move |b, j| {
        let e = uec[b];
        let t = &j[e + rank];
        if t.v <= ZERO_T {
            // Fiberwise additive inverse on the degenerate slice.
            let mut out = j[..e].to_vec();
            out.extend((0..rank).map(|i| -&j[e + i]));
            out.push(t.clone());
            return Ok((b, out));
        }
        let c: Vec<Jet> = (0..rank).map(|i| &j[e + i] * t).collect();
        let (ab, gj) = ec((b, &j[..e]), &c)?;
        let (ib, ij) = gc.inverse.eval_jets(ab, &gj)?;
        let cc = lc(ib, &ij)?;
        let (sb, mut out) = gc.source.eval_jets(ib, &ij)?;
        out.extend(cc.iter().map(|ci| ci / t));
        out.push(t.clone());
        Ok((sb, out))
    });

    let (gc, ec, lc, uec) = (g.clone(), exp.clone(), log.clone(), ue.clone());
    let mul = Arc::new(move |gg: (usize, &[Jet]), hh: (usize, &[Jet])| {
        let (b1, j1) = gg;
        let (b2, j2) = hh;
        let (e1, e2) = (uec[b1], uec[b2]);
        let t1 = &j1[e1 + rank];
        let t2 = &j2[e2 + rank];
        // Composability: d(left) = r(right) in M × [0, ∞).
        let mut dleft = j1[..e1].to_vec();
        dleft.push(t1.clone());
        let c2: Vec<Jet> = (0..rank).map(|i| &j2[e2 + i] * t2).collect();
        let (ab2, gj2) = ec((b2, &j2[..e2]), &c2)?;
        let (rb, mut rj) = gc.target.eval_jets(ab2, &gj2)?;
        rj.push(t2.clone());
        jets_match((b1, &dleft), (rb, &rj))?;
        if t2.v <= ZERO_T {
            // Additive fiber composition over the shared base point.
            let mut out = j2[..e2].to_vec();
            out.extend((0..rank).map(|i| &j1[e1 + i] + &j2[e2 + i]));
            out.push(t2.clone());
            return Ok((b2, out));
        }
        let c1: Vec<Jet> = (0..rank).map(|i| &j1[e1 + i] * t1).collect();
        let (ab1, gj1) = ec((b1, &j1[..e1]), &c1)?;
        let (pb, pj) = (gc.mul)((ab1, &gj1), (ab2, &gj2))?;
        let cc = lc(pb, &pj)?;
        let (sb, mut out) = gc.source.eval_jets(pb, &pj)?;
        out.extend(cc.iter().map(|ci| ci / t2));
        out.push(t2.clone());
        Ok((sb, out))
    });

    let uec = ue.clone();
    let dfiber = Arc::new(move |x: &Point, seed: u64, index: u64| {
        let e = uec[x.block];
        let mut rng = rng_for(seed ^ 0xad1a, index);
        let mut coords = x.coords[..e].to_vec();
        coords.extend((0..rank).map(|_| rng.gen_range(-2.0..2.0f64)));
        coords.push(x.coords[e]);
        Ok(Point::new(x.block, coords))
    });

    let uec = ue.clone();
    let unit_frame = UnitFrame {
        rank,
        eval: Arc::new(move |b, _j: &[Jet]| {
            let e = uec[b];
            let total = e + rank + 1;
            let out = (0..rank)
                .map(|i| {
                    let mut v = vec![Jet::zero(); total];
                    v[e + i] = Jet::c(1.0);
                    v
                })
                .collect();
            Ok((b, out))
        }),
    };

    let uec = ue.clone();
    let exp_ad: crate::groupoid::ExpFn = Arc::new(move |x: (usize, &[Jet]), c: &[Jet]| {
        let e = uec[x.0];
        let mut out = x.1[..e].to_vec();
        out.extend(c.iter().cloned());
        out.push(x.1[e].clone());
        Ok((x.0, out))
    });
    let uec = ue.clone();
    let log_ad: crate::groupoid::LogFn = Arc::new(move |b: usize, j: &[Jet]| {
        let e = uec[b];
        Ok(j[e..e + rank].to_vec())
    });

    let uec = ue.clone();
    let fiber_chart: crate::groupoid::FiberChartFn = Arc::new(move |x: &Point| {
        let e = uec[x.block];
        let (block, base) = (x.block, x.coords.clone());
        Ok(FiberChart {
            vars: vec![FiberVar::Euclidean; rank],
            embed: Arc::new(move |c: &[f64]| {
                let mut coords = base[..e].to_vec();
                coords.extend_from_slice(c);
                coords.push(base[e]);
                Ok(Point::new(block, coords))
            }),
        })
    });

    let groupoid = LieGroupoid {
        name: format!("adiabatic({})", g.name),
        arrows: arrows.clone(),
        units: units.clone(),
        source,
        target,
        unit,
        inverse,
        mul,
        unit_sampler: default_unit_sampler(&units),
        dfiber_sampler: dfiber,
        unit_frame: Some(unit_frame),
        exp: Some(exp_ad),
        log: Some(log_ad),
        fiber_chart: Some(fiber_chart),
    };

    let zero_part = group_bundle(&g.units, GroupModel::Translation(rank))?;
    let positive_part = product_groupoid(g, &space_groupoid(&halfline));

    let (ec, uec) = (exp.clone(), ue.clone());
    let chart = SmoothMap::from_fn(
        arrows.clone(),
        positive_part.arrows.clone(),
        move |b, j| {
            let e = uec[b];
            let t = &j[e + rank];
            let c: Vec<Jet> = (0..rank).map(|i| &j[e + i] * t).collect();
            let (ab, mut gj) = ec((b, &j[..e]), &c)?;
            gj.push(t.clone());
            Ok((ab, gj))
        },
    );

    let (gc, lc) = (g.clone(), log.clone());
    let ga = g.arrows.clone();
    let chart_inverse = SmoothMap::from_fn(
        positive_part.arrows.clone(),
        arrows,
        move |ab, j| {
            let wa = ga.blocks[ab].embedded_dim();
            let t = &j[wa];
            if t.v <= ZERO_T {
                return Err(Error::Degeneracy(
                    "the adiabatic chart inverts only over t > 0".into(),
                ));
            }
            let gj = &j[..wa];
            let cc = lc(ab, gj)?;
            let (sb, mut out) = gc.source.eval_jets(ab, gj)?;
            out.extend(cc.iter().map(|ci| ci / t));
            out.push(t.clone());
            Ok((sb, out))
        },
    );

    Ok(AdiabaticGroupoid {
        groupoid,
        zero_part,
        positive_part,
        chart,
        chart_inverse,
        rank,
    })
}

/// The `R₊*` action `γ_s(x, X, t) = (x, sX, s⁻¹ t)` on arrows and
/// `γ_s(x, t) = (x, s⁻¹ t)` on units, by groupoid automorphisms.
pub fn scaling_action(ad: &AdiabaticGroupoid) -> ScalingAction {
    let rank = ad.rank;
    let ue: Vec<usize> = ad
        .groupoid
        .arrows
        .blocks
        .iter()
        .map(|b| b.embedded_dim() - rank - 1)
        .collect();
    let on_arrows = Arc::new(move |s: &Jet, b: usize, j: &[Jet]| {
        let e = ue[b];
        let mut out = j.to_vec();
        for i in 0..rank {
            out[e + i] = &j[e + i] * s;
        }
        out[e + rank] = &j[e + rank] * &s.recip();
        Ok((b, out))
    });
    let on_units = Arc::new(move |s: &Jet, b: usize, j: &[Jet]| {
        let mut out = j.to_vec();
        let last = out.len() - 1;
        out[last] = &j[last] * &s.recip();
        Ok((b, out))
    });
    ScalingAction { on_arrows, on_units }
}

/// The automorphism `γ_s` of the adiabatic groupoid at a fixed scale.
pub fn scaling_morphism(ad: &AdiabaticGroupoid, s: f64) -> GroupoidMorphism {
    let action = scaling_action(ad);
    let arrows = ad.groupoid.arrows.clone();
    let units = ad.groupoid.units.clone();
    let fwd = action.clone();
    let arrow_map = SmoothMap::from_fn(arrows.clone(), arrows.clone(), move |b, j| {
        (fwd.on_arrows)(&Jet::c(s), b, j)
    });
    let fwd = action.clone();
    let unit_map = SmoothMap::from_fn(units.clone(), units.clone(), move |b, j| {
        (fwd.on_units)(&Jet::c(s), b, j)
    });
    let back = action.clone();
    let inverse_arrow_map = SmoothMap::from_fn(arrows.clone(), arrows, move |b, j| {
        (back.on_arrows)(&Jet::c(1.0 / s), b, j)
    });
    GroupoidMorphism {
        name: format!("scale({s}) on {}", ad.groupoid.name),
        dom: ad.groupoid.clone(),
        cod: ad.groupoid.clone(),
        arrow_map,
        unit_map,
        inverse_arrow_map: Some(inverse_arrow_map),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{
        adiabatic_algebroid, compare_algebroids, lie_algebroid_of, tangent_algebroid,
        AlgebroidCheckConfig, GeneratorCorrespondence, StructuredAlgebroid,
    };
    use crate::groupoid::{axiom_suite, morphism_suite, reduction, SubsetSpec, SuiteConfig};
    use crate::jet::seed_dirs;

    fn pair_ad(n: usize) -> AdiabaticGroupoid {
        let g = crate::groupoid::pair_groupoid(&CoordinateManifold::euclidean(n));
        adiabatic_groupoid(&g).unwrap()
    }

    #[test]
    fn adiabatic_of_pair_satisfies_axioms() {
        let ad = pair_ad(2);
        let cfg = SuiteConfig { pairs: 200, triples: 100, ..Default::default() };
        let report = axiom_suite(&ad.groupoid, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
        assert_eq!(ad.rank, 2);
    }

    #[test]
    fn degenerate_slice_composes_additively() {
        let ad = pair_ad(2);
        let a = Point::flat(vec![0.3, -0.2, 1.0, 0.5, 0.0]);
        let b = Point::flat(vec![0.3, -0.2, -0.4, 1.1, 0.0]);
        let p = ad.groupoid.mul_points(&a, &b).unwrap();
        let expected = [0.3, -0.2, 0.6, 1.6, 0.0];
        for (x, y) in p.coords.iter().zip(expected) {
            assert!((x - y).abs() < 1e-14, "{:?}", p);
        }
    }

    #[test]
    fn zero_slice_is_the_translation_bundle_of_the_algebroid() {
        let ad = pair_ad(2);
        let slice = reduction(
            &ad.groupoid,
            &SubsetSpec::OpenPredicate {
                name: "t = 0".into(),
                pred: Arc::new(|p: &Point| *p.coords.last().unwrap() == 0.0),
            },
        );
        let arrow_map = SmoothMap::from_fn(
            slice.arrows.clone(),
            ad.zero_part.arrows.clone(),
            move |b, j| Ok((b, j[..j.len() - 1].to_vec())),
        );
        let unit_map = SmoothMap::from_fn(
            slice.units.clone(),
            ad.zero_part.units.clone(),
            move |b, j| Ok((b, j[..j.len() - 1].to_vec())),
        );
        let back = SmoothMap::from_fn(
            ad.zero_part.arrows.clone(),
            slice.arrows.clone(),
            move |b, j| {
                let mut out = j.to_vec();
                out.push(Jet::zero());
                Ok((b, out))
            },
        );
        let iso = GroupoidMorphism {
            name: "t = 0 slice vs translation bundle".into(),
            dom: slice,
            cod: ad.zero_part.clone(),
            arrow_map,
            unit_map,
            inverse_arrow_map: Some(back),
        };
        let cfg = SuiteConfig { pairs: 150, triples: 0, ..Default::default() };
        let report = morphism_suite(&iso, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn positive_slice_matches_the_constant_family_through_the_chart() {
        let ad = pair_ad(2);
        let slice = reduction(
            &ad.groupoid,
            &SubsetSpec::OpenPredicate {
                name: "t > 0".into(),
                pred: Arc::new(|p: &Point| *p.coords.last().unwrap() > 0.0),
            },
        );
        let unit_map = SmoothMap::from_fn(
            slice.units.clone(),
            ad.positive_part.units.clone(),
            |b, j| Ok((b, j.to_vec())),
        );
        let iso = GroupoidMorphism {
            name: "t > 0 slice vs constant family".into(),
            dom: slice,
            cod: ad.positive_part.clone(),
            arrow_map: ad.chart.clone(),
            unit_map,
            inverse_arrow_map: Some(ad.chart_inverse.clone()),
        };
        let cfg = SuiteConfig { pairs: 150, triples: 0, ..Default::default() };
        let report = morphism_suite(&iso, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn derived_algebroid_is_the_adiabatic_rescaling_of_the_tangent_bundle() {
        let ad = pair_ad(2);
        let derived = lie_algebroid_of(&ad.groupoid).unwrap();
        let model = adiabatic_algebroid(&tangent_algebroid(&CoordinateManifold::euclidean(2)).unwrap());
        let cfg = AlgebroidCheckConfig { points: 80, ..Default::default() };
        let report = compare_algebroids(
            &derived,
            &model,
            &GeneratorCorrespondence::identity(2),
            &cfg,
        )
        .unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn derived_algebroid_of_scaled_bundle_deformation_matches_model() {
        // 𝓖 = R ⋊ R₊* as a bundle over a line; A(𝓖) has [D, e] = -e in the
        // right-invariant convention, and the deformation multiplies the
        // bracket by t.
        let base = CoordinateManifold::euclidean(1);
        let g = crate::groupoid::group_bundle(&base, GroupModel::SemidirectScaling(1)).unwrap();
        let ad = adiabatic_groupoid(&g).unwrap();
        let derived = lie_algebroid_of(&ad.groupoid).unwrap();
        let mut c = vec![0.0; 8];
        c[(1 * 2 + 0) * 2 + 0] = -1.0;
        c[(0 * 2 + 1) * 2 + 0] = 1.0;
        let model = StructuredAlgebroid {
            name: "R rtimes R+*".into(),
            base: base.clone(),
            rank: 2,
            anchor: Arc::new(|_b, _j| Ok(vec![vec![Jet::zero()], vec![Jet::zero()]])),
            structure: Arc::new(move |_b, _j| Ok(c.iter().map(|&v| Jet::c(v)).collect())),
        };
        let cfg = AlgebroidCheckConfig { points: 80, ..Default::default() };
        let report = compare_algebroids(
            &derived,
            &adiabatic_algebroid(&model),
            &GeneratorCorrespondence::identity(2),
            &cfg,
        )
        .unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn scaling_is_an_automorphism_for_each_scale() {
        let ad = pair_ad(2);
        for s in [0.5, 2.0, 10.0] {
            let cfg = SuiteConfig { pairs: 120, triples: 0, ..Default::default() };
            let report = morphism_suite(&scaling_morphism(&ad, s), &cfg).unwrap();
            assert!(report.ok, "s = {s}: {:#?}", report.laws);
        }
    }

    #[test]
    fn chart_linearizes_fiber_directions_at_t_zero() {
        // d/dt exp_x(tX) at t = 0 equals the frame pairing Σ Xᵢ Fᵢ(x).
        let g = crate::groupoid::pair_groupoid(&CoordinateManifold::euclidean(2));
        let ad = adiabatic_groupoid(&g).unwrap();
        let x = [0.7, -0.4];
        let xx = [1.3, 0.8];
        let coords = [x[0], x[1], xx[0], xx[1], 0.0];
        let mut dir = vec![0.0; 5];
        dir[4] = 1.0;
        let jets = seed_dirs(&coords, &[dir], false);
        let (_, out) = ad.chart.eval_jets(0, &jets).unwrap();
        let frame = g.unit_frame.as_ref().unwrap();
        let (_, vecs) = (frame.eval)(0, &crate::jet::constants(&x)).unwrap();
        for (m, o) in out.iter().enumerate().take(out.len() - 1).map(|(m, o)| (m, o.d1(0))) {
            let want: f64 = (0..2).map(|i| xx[i] * vecs[i][m].v).sum();
            assert!((o - want).abs() < 1e-10, "component {m}: {o} vs {want}");
        }
    }
}
