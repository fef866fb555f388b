//! Semidirect product of a groupoid with the dilation group `R₊*`.

use std::sync::Arc;

use rand::Rng;

use crate::geometry::manifold::{CoordinateManifold, Point};
use crate::geometry::map::SmoothMap;
use crate::geometry::sample::rng_for;
use crate::groupoid::{FiberChart, FiberVar, LieGroupoid, UnitFrame};
use crate::jet::{self, Jet};
use crate::{ModelBlock, Result};

/// Action evaluator `(s, point) -> point`, jet-polymorphic in both the
/// scale and the point.
pub type ActionFn = Arc<dyn Fn(&Jet, usize, &[Jet]) -> Result<(usize, Vec<Jet>)> + Send + Sync>;

/// A one-parameter action of `R₊*` by groupoid automorphisms.
#[derive(Clone)]
pub struct ScalingAction {
    pub on_arrows: ActionFn,
    pub on_units: ActionFn,
}

impl ScalingAction {
    /// Apply the unit-space action at a plain point.
    pub fn act_unit(&self, s: f64, x: &Point) -> Result<Point> {
        let (b, j) = (self.on_units)(&Jet::c(s), x.block, &jet::constants(&x.coords))?;
        Ok(Point::new(b, jet::values(&j)))
    }

    /// Apply the arrow-space action at a plain point.
    pub fn act_arrow(&self, s: f64, g: &Point) -> Result<Point> {
        let (b, j) = (self.on_arrows)(&Jet::c(s), g.block, &jet::constants(&g.coords))?;
        Ok(Point::new(b, jet::values(&j)))
    }
}

/// The semidirect product `𝓖 ⋊ R₊*`: arrows `(g, s)` with
/// `d(g, s) = γ_s⁻¹(d(g))`, `r(g, s) = r(g)` and
/// `(g₁, s₁)(g₂, s₂) = (g₁ · γ_{s₁}(g₂), s₁ s₂)`.
pub fn semidirect_product(g: &LieGroupoid, action: &ScalingAction) -> Result<LieGroupoid> {
    let mut blocks = Vec::with_capacity(g.arrows.blocks.len());
    for b in &g.arrows.blocks {
        blocks.push(b.concat(&ModelBlock::lines(1)));
    }
    let arrows = CoordinateManifold::new(format!("{}xR+*", g.arrows.name), blocks)?;
    let units = g.units.clone();

    let scale_of = |j: &[Jet]| j[j.len() - 1].clone();

    let (gc, ac) = (g.clone(), action.clone());
    let source = SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
        let s = scale_of(j);
        let (db, dj) = gc.source.eval_jets(b, &j[..j.len() - 1])?;
        (ac.on_units)(&s.recip(), db, &dj)
    });

    let gc = g.clone();
    let target = SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
        gc.target.eval_jets(b, &j[..j.len() - 1])
    });

    let gc = g.clone();
    let unit = SmoothMap::from_fn(units.clone(), arrows.clone(), move |b, j| {
        let (ub, mut uj) = gc.unit.eval_jets(b, j)?;
        uj.push(Jet::c(1.0));
        Ok((ub, uj))
    });

    let (gc, ac) = (g.clone(), action.clone());
    let inverse = SmoothMap::from_fn(arrows.clone(), arrows.clone(), move |b, j| {
        let s = scale_of(j);
        let (ib, ij) = gc.inverse.eval_jets(b, &j[..j.len() - 1])?;
        let (ab, mut aj) = (ac.on_arrows)(&s.recip(), ib, &ij)?;
        aj.push(s.recip());
        Ok((ab, aj))
    });

    let (gc, ac) = (g.clone(), action.clone());
    let mul = Arc::new(move |gg: (usize, &[Jet]), hh: (usize, &[Jet])| {
        let s1 = scale_of(gg.1);
        let s2 = scale_of(hh.1);
        let (hb, hj) = (ac.on_arrows)(&s1, hh.0, &hh.1[..hh.1.len() - 1])?;
        let (pb, mut pj) = (gc.mul)((gg.0, &gg.1[..gg.1.len() - 1]), (hb, &hj))?;
        pj.push(&s1 * &s2);
        Ok((pb, pj))
    });

    let (gc, ac) = (g.clone(), action.clone());
    let dfiber = Arc::new(move |x: &Point, seed: u64, index: u64| {
        let mut rng = rng_for(seed ^ 0x5d, index);
        let s: f64 = rng.gen_range(-1.5..1.5f64).exp();
        let y = ac.act_unit(s, x)?;
        let mut arrow = (gc.dfiber_sampler)(&y, seed, index)?;
        arrow.coords.push(s);
        Ok(Point::new(arrow.block, arrow.coords))
    });

    let unit_frame = g.unit_frame.as_ref().map(|fr| {
        let eval = fr.eval.clone();
        let (gc, ac) = (g.clone(), action.clone());
        UnitFrame {
            rank: fr.rank + 1,
            eval: Arc::new(move |b, j: &[Jet]| {
                let (ab, gvecs) = eval(b, j)?;
                let mut out: Vec<Vec<Jet>> = gvecs
                    .into_iter()
                    .map(|mut v| {
                        v.push(Jet::zero());
                        v
                    })
                    .collect();
                // Frame vector of the scaling direction: the derivative at
                // s = 1 of s -> u(γ_s(x)), with unit scale velocity. Its
                // dependence on the base point is recovered from mixed
                // second derivatives along an auxiliary seed direction.
                let k = j.iter().map(|x| x.k()).max().unwrap_or(0);
                let mut sg = vec![0.0; k + 1];
                sg[k] = 1.0;
                let s = Jet { v: 1.0, g: sg, h: vec![0.0; (k + 1) * (k + 1)] };
                let (gb, gamma) = (ac.on_units)(&s, b, j)?;
                let (ub2, uj) = gc.unit.eval_jets(gb, &gamma)?;
                debug_assert_eq!(ub2, ab);
                let mut vec_s: Vec<Jet> = uj
                    .iter()
                    .map(|o| Jet {
                        v: o.d1(k),
                        g: (0..k).map(|q| o.d2(q, k)).collect(),
                        h: Vec::new(),
                    })
                    .collect();
                vec_s.push(Jet::c(1.0));
                out.push(vec_s);
                Ok((ab, out))
            }),
        }
    });

    let fiber_chart = g.fiber_chart.as_ref().map(|chart| {
        let chart = chart.clone();
        let ac = action.clone();
        Arc::new(move |x: &Point| {
            let probe = chart(x)?;
            let width: usize = probe
                .vars
                .iter()
                .map(crate::groupoid::basic::var_width)
                .sum();
            let mut vars = probe.vars.clone();
            vars.push(FiberVar::LogScale);
            let (chart, ac, x) = (chart.clone(), ac.clone(), x.clone());
            Ok(FiberChart {
                vars,
                embed: Arc::new(move |c: &[f64]| {
                    let s = c[width].exp();
                    let y = ac.act_unit(s, &x)?;
                    let inner = chart(&y)?;
                    let mut arrow = (inner.embed)(&c[..width])?;
                    arrow.coords.push(s);
                    Ok(arrow)
                }),
            })
        }) as crate::groupoid::FiberChartFn
    });

    Ok(LieGroupoid {
        name: format!("semidirect({})", g.name),
        arrows,
        units,
        source,
        target,
        unit,
        inverse,
        mul,
        unit_sampler: g.unit_sampler.clone(),
        dfiber_sampler: dfiber,
        unit_frame,
        exp: None,
        log: None,
        fiber_chart,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::basic::{group_bundle, GroupModel};
    use crate::groupoid::suite::{axiom_suite, SuiteConfig};

    /// Dilations acting on a translation bundle over a point-like base:
    /// γ_s(x, v) = (x, s v) on arrows, identity on units.
    fn dilation_action(base_dim: usize) -> ScalingAction {
        ScalingAction {
            on_arrows: Arc::new(move |s, b, j| {
                let mut out = j.to_vec();
                for v in out.iter_mut().skip(base_dim) {
                    *v = &*v * s;
                }
                Ok((b, out))
            }),
            on_units: Arc::new(|_, b, j| Ok((b, j.to_vec()))),
        }
    }

    #[test]
    fn translation_bundle_with_dilations_satisfies_axioms() {
        let g = group_bundle(&CoordinateManifold::euclidean(1), GroupModel::Translation(2))
            .unwrap();
        let sd = semidirect_product(&g, &dilation_action(1)).unwrap();
        let cfg = SuiteConfig { pairs: 150, triples: 80, ..Default::default() };
        let report = axiom_suite(&sd, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
        assert_eq!(sd.rank(), Some(3));
    }

    #[test]
    fn semidirect_of_translations_matches_direct_semidirect_model() {
        // (R^k, +) ⋊ R₊* with the dilation action has the same arrow data
        // as the semidirect scaling group bundle; spot-check the group law.
        let g = group_bundle(&CoordinateManifold::euclidean(1), GroupModel::Translation(1))
            .unwrap();
        let sd = semidirect_product(&g, &dilation_action(1)).unwrap();
        let direct =
            group_bundle(&CoordinateManifold::euclidean(1), GroupModel::SemidirectScaling(1))
                .unwrap();
        // Arrows (x; v, s): products must agree.
        let a = Point::flat(vec![0.4, 1.1, 2.0]);
        let b = Point::flat(vec![0.4, -0.3, 0.5]);
        let p1 = sd.mul_points(&a, &b).unwrap();
        let p2 = direct.mul_points(&a, &b).unwrap();
        assert_eq!(p1.block, p2.block);
        for (x, y) in p1.coords.iter().zip(&p2.coords) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
