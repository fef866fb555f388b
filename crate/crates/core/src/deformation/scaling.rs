//! The scaling groupoid over `[0, ∞)`: the action groupoid of `R₊*`
//! dilating the half-line.

use std::sync::Arc;

use rand::Rng;

use crate::geometry::factor::{Factor, ModelBlock};
use crate::geometry::manifold::CoordinateManifold;
use crate::geometry::map::SmoothMap;
use crate::geometry::sample::rng_for;
use crate::groupoid::{
    default_unit_sampler, jets_match, FiberChart, FiberVar, LieGroupoid, UnitFrame,
};
use crate::jet::Jet;
use crate::Point;

/// The groupoid of dilations of `[0, ∞)`: arrows `(t, s)` with `s > 0`,
/// running from `t` to `s⁻¹ t`, with `(t', s₁)(t, s₂) = (t, s₁ s₂)` when
/// `t' = s₂⁻¹ t`. Its orbits are `{0}` and `(0, ∞)`, and its algebroid is
/// spanned by the Euler field `-t ∂_t`.
pub fn scaling_groupoid() -> LieGroupoid {
    let arrows = CoordinateManifold::single(
        "[0,inf)xR+*",
        ModelBlock::new(vec![Factor::Half, Factor::Line]),
    );
    let units = CoordinateManifold::halfline();

    let source = SmoothMap::from_fn(arrows.clone(), units.clone(), |_b, j| {
        Ok((0, vec![j[0].clone()]))
    });
    let target = SmoothMap::from_fn(arrows.clone(), units.clone(), |_b, j| {
        Ok((0, vec![&j[0] * &j[1].recip()]))
    });
    let unit = SmoothMap::from_fn(units.clone(), arrows.clone(), |_b, j| {
        Ok((0, vec![j[0].clone(), Jet::c(1.0)]))
    });
    let inverse = SmoothMap::from_fn(arrows.clone(), arrows.clone(), |_b, j| {
        let sinv = j[1].recip();
        Ok((0, vec![&j[0] * &sinv, sinv]))
    });
    let mul = Arc::new(|gg: (usize, &[Jet]), hh: (usize, &[Jet])| {
        let d_left = [gg.1[0].clone()];
        let r_right = [&hh.1[0] * &hh.1[1].recip()];
        jets_match((gg.0, &d_left), (0, &r_right))?;
        Ok((0, vec![hh.1[0].clone(), &gg.1[1] * &hh.1[1]]))
    });

    let dfiber = Arc::new(|x: &Point, seed: u64, index: u64| {
        let mut rng = rng_for(seed ^ 0x7ca1, index);
        let s: f64 = rng.gen_range(-1.5..1.5f64).exp();
        Ok(Point::new(0, vec![x.coords[0], s]))
    });

    let unit_frame = UnitFrame {
        rank: 1,
        eval: Arc::new(|_b, _j: &[Jet]| Ok((0, vec![vec![Jet::zero(), Jet::c(1.0)]]))),
    };
    let exp: crate::groupoid::ExpFn = Arc::new(|x: (usize, &[Jet]), c: &[Jet]| {
        Ok((0, vec![x.1[0].clone(), c[0].exp()]))
    });
    let log: crate::groupoid::LogFn =
        Arc::new(|_b: usize, j: &[Jet]| Ok(vec![j[1].ln()]));
    let fiber_chart: crate::groupoid::FiberChartFn = Arc::new(|x: &Point| {
        let t = x.coords[0];
        Ok(FiberChart {
            vars: vec![FiberVar::LogScale],
            embed: Arc::new(move |c: &[f64]| Ok(Point::new(0, vec![t, c[0].exp()]))),
        })
    });

    LieGroupoid {
        name: "scaling([0,inf))".into(),
        arrows,
        units: units.clone(),
        source,
        target,
        unit,
        inverse,
        mul,
        unit_sampler: default_unit_sampler(&units),
        dfiber_sampler: dfiber,
        unit_frame: Some(unit_frame),
        exp: Some(exp),
        log: Some(log),
        fiber_chart: Some(fiber_chart),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{
        compare_algebroids, lie_algebroid_of, scaling_halfline_algebroid,
        AlgebroidCheckConfig, GeneratorCorrespondence,
    };
    use crate::groupoid::{axiom_suite, SuiteConfig};

    #[test]
    fn scaling_groupoid_satisfies_axioms() {
        let t = scaling_groupoid();
        let cfg = SuiteConfig { pairs: 200, triples: 100, ..Default::default() };
        let report = axiom_suite(&t, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn orbits_respect_the_origin() {
        let t = scaling_groupoid();
        // Arrows at t = 0 stay at 0; elsewhere the target moves.
        let fixed = t.target.eval_point(&Point::flat(vec![0.0, 3.0])).unwrap();
        assert_eq!(fixed.coords[0], 0.0);
        let moved = t.target.eval_point(&Point::flat(vec![1.2, 3.0])).unwrap();
        assert!((moved.coords[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn algebroid_is_spanned_by_the_euler_field() {
        let derived = lie_algebroid_of(&scaling_groupoid()).unwrap();
        let model = scaling_halfline_algebroid();
        let cfg = AlgebroidCheckConfig { points: 60, ..Default::default() };
        let report = compare_algebroids(
            &derived,
            &model,
            &GeneratorCorrespondence::identity(1),
            &cfg,
        )
        .unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }
}
