//! Restriction of a groupoid to a subset of its unit space.

use std::sync::Arc;

use crate::geometry::manifold::Point;
use crate::groupoid::{rejection_sample, LieGroupoid};

/// An open subset of a unit space, with a membership test the samplers can
/// use for rejection.
#[derive(Clone)]
pub enum SubsetSpec {
    /// Arbitrary open predicate.
    OpenPredicate {
        name: String,
        pred: Arc<dyn Fn(&Point) -> bool + Send + Sync>,
    },
    /// `min < x_i < max` for the listed `(block, embedded index)` pairs;
    /// entries for other blocks are ignored for points of this block.
    CoordInterval {
        entries: Vec<(usize, usize)>,
        min: f64,
        max: f64,
    },
}

impl SubsetSpec {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            SubsetSpec::OpenPredicate { pred, .. } => pred(p),
            SubsetSpec::CoordInterval { entries, min, max } => entries
                .iter()
                .filter(|(b, _)| *b == p.block)
                .all(|(_, i)| p.coords[*i] > *min && p.coords[*i] < *max),
        }
    }

    fn label(&self) -> String {
        match self {
            SubsetSpec::OpenPredicate { name, .. } => name.clone(),
            SubsetSpec::CoordInterval { min, max, .. } => format!("({min}, {max})"),
        }
    }
}

const REJECTION_TRIES: u64 = 400;

/// The reduction `𝓖|_U`: arrows with both endpoints in `U`. Structure maps
/// are unchanged; the samplers restrict to `U` by rejection, so the subset
/// must have positive measure in the unit space for sampling to succeed.
pub fn reduction(g: &LieGroupoid, subset: &SubsetSpec) -> LieGroupoid {
    let mut out = g.clone();
    out.name = format!("{} | {}", g.name, subset.label());

    let inner_units = g.unit_sampler.clone();
    let sub = subset.clone();
    out.unit_sampler = Arc::new(move |seed, index| {
        let inner = inner_units.clone();
        rejection_sample(seed, index, REJECTION_TRIES, |s, i| inner(s, i), |p| sub.contains(p))
    });

    let inner_fiber = g.dfiber_sampler.clone();
    let target = g.target.clone();
    let sub = subset.clone();
    out.dfiber_sampler = Arc::new(move |x: &Point, seed, index| {
        let inner = inner_fiber.clone();
        let target = target.clone();
        let sub2 = sub.clone();
        let x2 = x.clone();
        rejection_sample(
            seed,
            index,
            REJECTION_TRIES,
            move |s, i| inner(&x2, s, i),
            move |arrow| {
                target
                    .eval_point(arrow)
                    .map(|r| sub2.contains(&r))
                    .unwrap_or(false)
            },
        )
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::manifold::CoordinateManifold;
    use crate::groupoid::basic::pair_groupoid;
    use crate::groupoid::suite::{axiom_suite, SuiteConfig};

    #[test]
    fn reduction_to_half_space_keeps_axioms_and_respects_subset() {
        let g = pair_groupoid(&CoordinateManifold::euclidean(1));
        let u = SubsetSpec::CoordInterval {
            entries: vec![(0, 0)],
            min: 0.0,
            max: f64::INFINITY,
        };
        let red = reduction(&g, &u);
        let cfg = SuiteConfig { pairs: 100, triples: 50, ..Default::default() };
        let report = axiom_suite(&red, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
        for i in 0..60 {
            let arrow = red.sample_arrow(9, i).unwrap();
            assert!(arrow.coords[0] > 0.0 && arrow.coords[1] > 0.0);
        }
    }
}
