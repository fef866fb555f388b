//! Edge modification: the deformation groupoid attached to a fibered
//! projection `f: M -> L` and a groupoid `𝓗 ⇉ L`, together with its
//! anisotropic variant and the comparison morphism between them.

use std::sync::Arc;

use crate::deformation::adiabatic::{adiabatic_groupoid, scaling_action};
use crate::deformation::scaling::scaling_groupoid;
use crate::geometry::manifold::CoordinateManifold;
use crate::geometry::map::SmoothMap;
use crate::groupoid::pullback::{decode, encode};
use crate::groupoid::{
    group_bundle, pair_groupoid, product_groupoid, pullback_groupoid, reduction,
    semidirect_product, FiberedProjection, GroupModel, GroupoidMorphism, LieGroupoid,
    SubsetSpec,
};
use crate::jet::Jet;
use crate::{Error, Point, Result};

/// Extend `f: M -> L` to `f × id: M × [0, ∞) -> L × [0, ∞)`.
pub fn lifted_projection(f: &FiberedProjection) -> Result<FiberedProjection> {
    let halfline = CoordinateManifold::halfline();
    let domain = CoordinateManifold::product(
        format!("{}x[0,inf)", f.domain.name),
        &f.domain,
        &halfline,
    );
    let codomain = CoordinateManifold::product(
        format!("{}x[0,inf)", f.codomain.name),
        &f.codomain,
        &halfline,
    );
    let assignment = f
        .assignment
        .iter()
        .enumerate()
        .map(|(b, (cb, idx))| {
            let mut v = idx.clone();
            v.push(f.domain.blocks[b].embedded_dim());
            (*cb, v)
        })
        .collect();
    FiberedProjection::new(domain, codomain, assignment)
}

/// The edge modification `𝓔(M, f, 𝓗)`: the pullback along `f × id` of the
/// scaling semidirect product of the adiabatic deformation of `𝓗`. Its
/// arrows are `(θ₁, (ℓ, X, t, s), θ₂)`; over `t > 0` it is the pullback of
/// the constant family `𝓗 × (0, ∞)`, and at `t = 0` the adiabatic fibers
/// and the scaling direction survive.
pub fn edge_modification(f: &FiberedProjection, h: &LieGroupoid) -> Result<LieGroupoid> {
    let ad = adiabatic_groupoid(h)?;
    let sd = semidirect_product(&ad.groupoid, &scaling_action(&ad))?;
    let f1 = lifted_projection(f)?;
    let mut out = pullback_groupoid(&f1, &sd)?;
    out.name = format!("edge({}, {})", f.domain.name, h.name);
    Ok(out)
}

/// The anisotropic edge modification: the deformation parameter and the
/// scaling are kept as an independent factor instead of twisting the
/// fibers, giving `(f ⤋ 𝓗) × scaling([0, ∞))`.
pub fn edge_modification_ni(f: &FiberedProjection, h: &LieGroupoid) -> Result<LieGroupoid> {
    let pb = pullback_groupoid(f, h)?;
    let mut out = product_groupoid(&pb, &scaling_groupoid());
    out.name = format!("edge_ni({}, {})", f.domain.name, h.name);
    Ok(out)
}

// Slice layout of an edge arrow [θ₁, ℓ, X, t, s, θ₂] within its block.
#[derive(Clone)]
struct EdgeLayout {
    nd: usize,
    na: usize,
    rank: usize,
    w1: Vec<usize>,
    ue: Vec<usize>,
}

struct EdgeParts<'a> {
    i1: usize,
    a: usize,
    i2: usize,
    th1: &'a [Jet],
    ell: &'a [Jet],
    xx: &'a [Jet],
    t: &'a Jet,
    s: &'a Jet,
    th2: &'a [Jet],
}

impl EdgeLayout {
    fn new(f: &FiberedProjection, h: &LieGroupoid, rank: usize) -> EdgeLayout {
        EdgeLayout {
            nd: f.domain.blocks.len(),
            na: h.units.blocks.len(),
            rank,
            w1: (0..f.domain.blocks.len())
                .map(|i| f.fiber_block(i).embedded_dim())
                .collect(),
            ue: h.units.blocks.iter().map(|b| b.embedded_dim()).collect(),
        }
    }

    fn parts<'a>(&self, b: usize, j: &'a [Jet]) -> EdgeParts<'a> {
        let (i1, a, i2) = decode(b, self.na, self.nd);
        let (w1, ea) = (self.w1[i1], self.ue[a]);
        let base = w1 + ea;
        EdgeParts {
            i1,
            a,
            i2,
            th1: &j[..w1],
            ell: &j[w1..base],
            xx: &j[base..base + self.rank],
            t: &j[base + self.rank],
            s: &j[base + self.rank + 1],
            th2: &j[base + self.rank + 2..],
        }
    }
}

fn frame_rank(h: &LieGroupoid) -> Result<usize> {
    h.rank()
        .ok_or_else(|| Error::Capability(format!("{} carries no unit frame", h.name)))
}

/// The comparison morphism from the edge modification onto its anisotropic
/// variant: `(θ₁, (ℓ, X, t, s), θ₂) -> (θ₁, exp_ℓ(tX), θ₂, (st, s))`. Over
/// `t > 0` it is bijective; at `t = 0` every adiabatic fiber collapses onto
/// the units of `𝓗`, so no inverse exists.
pub fn edge_comparison(f: &FiberedProjection, h: &LieGroupoid) -> Result<GroupoidMorphism> {
    let dom = edge_modification(f, h)?;
    let cod = edge_modification_ni(f, h)?;
    let hexp = h.exp.clone().ok_or_else(|| {
        Error::Capability(format!("{} carries no exponential", h.name))
    })?;
    let lay = EdgeLayout::new(f, h, frame_rank(h)?);
    let na_h = h.arrows.blocks.len();
    let nd = lay.nd;
    let arrow_map = SmoothMap::from_fn(dom.arrows.clone(), cod.arrows.clone(), move |b, j| {
        let p = lay.parts(b, j);
        let c: Vec<Jet> = p.xx.iter().map(|x| x * p.t).collect();
        let (ab, gj) = hexp((p.a, p.ell), &c)?;
        let mut out = p.th1.to_vec();
        out.extend(gj);
        out.extend(p.th2.iter().cloned());
        out.push(p.s * p.t);
        out.push(p.s.clone());
        Ok((encode(p.i1, ab, p.i2, na_h, nd), out))
    });
    let unit_map =
        SmoothMap::from_fn(dom.units.clone(), cod.units.clone(), |b, j| Ok((b, j.to_vec())));
    Ok(GroupoidMorphism {
        name: format!("collapse({})", dom.name),
        dom,
        cod,
        arrow_map,
        unit_map,
        inverse_arrow_map: None,
    })
}

fn edge_time_is_zero() -> SubsetSpec {
    SubsetSpec::OpenPredicate {
        name: "t = 0".into(),
        pred: Arc::new(|p: &Point| *p.coords.last().unwrap() == 0.0),
    }
}

fn edge_time_is_positive() -> SubsetSpec {
    SubsetSpec::OpenPredicate {
        name: "t > 0".into(),
        pred: Arc::new(|p: &Point| *p.coords.last().unwrap() > 0.0),
    }
}

/// The `t = 0` slice of the edge modification together with the
/// isomorphism identifying it with the pullback along `f` of the scaled
/// translation bundle `A(𝓗) ⋊ R₊*`.
pub fn edge_zero_model(
    f: &FiberedProjection,
    h: &LieGroupoid,
) -> Result<(LieGroupoid, GroupoidMorphism)> {
    let e = edge_modification(f, h)?;
    let rank = frame_rank(h)?;
    let bundle = group_bundle(&h.units, GroupModel::SemidirectScaling(rank))?;
    let model = pullback_groupoid(f, &bundle)?;
    let slice = reduction(&e, &edge_time_is_zero());

    let lay = EdgeLayout::new(f, h, rank);
    // The bundle has one arrow block per unit block of h, so the pullback
    // block packing coincides on both sides.
    let arrow_map = SmoothMap::from_fn(slice.arrows.clone(), model.arrows.clone(), move |b, j| {
        let p = lay.parts(b, j);
        let mut out = p.th1.to_vec();
        out.extend(p.ell.iter().cloned());
        out.extend(p.xx.iter().cloned());
        out.push(p.s.clone());
        out.extend(p.th2.iter().cloned());
        Ok((b, out))
    });
    let unit_map = SmoothMap::from_fn(slice.units.clone(), model.units.clone(), |b, j| {
        Ok((b, j[..j.len() - 1].to_vec()))
    });
    let lay = EdgeLayout::new(f, h, rank);
    let back = SmoothMap::from_fn(model.arrows.clone(), slice.arrows.clone(), move |b, j| {
        let (i1, a, _) = decode(b, lay.na, lay.nd);
        let cut = lay.w1[i1] + lay.ue[a] + lay.rank;
        let mut out = j[..cut].to_vec();
        out.push(Jet::zero());
        out.extend(j[cut..].iter().cloned());
        Ok((b, out))
    });
    let iso = GroupoidMorphism {
        name: format!("{} at t = 0", e.name),
        dom: slice,
        cod: model.clone(),
        arrow_map,
        unit_map,
        inverse_arrow_map: Some(back),
    };
    Ok((model, iso))
}

/// The `t > 0` slice of the edge modification together with the
/// isomorphism identifying it with `(f ⤋ 𝓗) × pair((0, ∞))`, the pair
/// factor recording the two endpoint times `(t, st)`.
pub fn edge_positive_model(
    f: &FiberedProjection,
    h: &LieGroupoid,
) -> Result<(LieGroupoid, GroupoidMorphism)> {
    let e = edge_modification(f, h)?;
    let rank = frame_rank(h)?;
    let hexp = h.exp.clone().ok_or_else(|| {
        Error::Capability(format!("{} carries no exponential", h.name))
    })?;
    let hlog = h.log.clone().ok_or_else(|| {
        Error::Capability(format!("{} carries no logarithm", h.name))
    })?;
    let pbh = pullback_groupoid(f, h)?;
    let model = product_groupoid(&pbh, &pair_groupoid(&CoordinateManifold::halfline()));
    let slice = reduction(&e, &edge_time_is_positive());

    let lay = EdgeLayout::new(f, h, rank);
    let na_h = h.arrows.blocks.len();
    let nd = lay.nd;
    let arrow_map = SmoothMap::from_fn(slice.arrows.clone(), model.arrows.clone(), move |b, j| {
        let p = lay.parts(b, j);
        let c: Vec<Jet> = p.xx.iter().map(|x| x * p.t).collect();
        let (ab, gj) = hexp((p.a, p.ell), &c)?;
        let mut out = p.th1.to_vec();
        out.extend(gj);
        out.extend(p.th2.iter().cloned());
        out.push(p.t.clone());
        out.push(p.s * p.t);
        Ok((encode(p.i1, ab, p.i2, na_h, nd), out))
    });
    let unit_map = SmoothMap::from_fn(slice.units.clone(), model.units.clone(), |b, j| {
        Ok((b, j.to_vec()))
    });
    let lay = EdgeLayout::new(f, h, rank);
    let (hc, ha) = (h.clone(), h.arrows.clone());
    let back = SmoothMap::from_fn(model.arrows.clone(), slice.arrows.clone(), move |b, j| {
        let (i1, ab, i2) = decode(b, na_h, lay.nd);
        let (w1, wa, w2) = (lay.w1[i1], ha.blocks[ab].embedded_dim(), lay.w1[i2]);
        let tr = &j[w1 + wa + w2];
        let td = &j[w1 + wa + w2 + 1];
        if tr.v <= 0.0 {
            return Err(Error::Degeneracy(
                "the edge chart inverts only over t > 0".into(),
            ));
        }
        let gj = &j[w1..w1 + wa];
        let cc = hlog(ab, gj)?;
        let (sb, sj) = hc.source.eval_jets(ab, gj)?;
        let mut out = j[..w1].to_vec();
        out.extend(sj);
        out.extend(cc.iter().map(|ci| ci / tr));
        out.push(tr.clone());
        out.push(td / tr);
        out.extend(j[w1 + wa..w1 + wa + w2].iter().cloned());
        Ok((encode(i1, sb, i2, lay.na, lay.nd), out))
    });
    let iso = GroupoidMorphism {
        name: format!("{} over t > 0", e.name),
        dom: slice,
        cod: model.clone(),
        arrow_map,
        unit_map,
        inverse_arrow_map: Some(back),
    };
    Ok((model, iso))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::factor::{Factor, ModelBlock};
    use crate::groupoid::{axiom_suite, morphism_suite, slice_projection, SuiteConfig};

    fn line_over_line() -> FiberedProjection {
        slice_projection(
            &CoordinateManifold::euclidean(2),
            &CoordinateManifold::euclidean(1),
            vec![1],
        )
        .unwrap()
    }

    fn circle_bundle_over_line() -> FiberedProjection {
        slice_projection(
            &CoordinateManifold::single(
                "S1xR",
                ModelBlock::new(vec![Factor::Sphere(1), Factor::Line]),
            ),
            &CoordinateManifold::euclidean(1),
            vec![2],
        )
        .unwrap()
    }

    #[test]
    fn edge_modification_satisfies_axioms() {
        let h = pair_groupoid(&CoordinateManifold::euclidean(1));
        let e = edge_modification(&line_over_line(), &h).unwrap();
        let cfg = SuiteConfig { pairs: 150, triples: 80, ..Default::default() };
        let report = axiom_suite(&e, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn edge_modification_with_sphere_fiber_satisfies_axioms() {
        let h = pair_groupoid(&CoordinateManifold::euclidean(1));
        let e = edge_modification(&circle_bundle_over_line(), &h).unwrap();
        let cfg = SuiteConfig { pairs: 120, triples: 60, ..Default::default() };
        let report = axiom_suite(&e, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn anisotropic_edge_modification_satisfies_axioms() {
        let h = pair_groupoid(&CoordinateManifold::euclidean(1));
        let e = edge_modification_ni(&line_over_line(), &h).unwrap();
        let cfg = SuiteConfig { pairs: 150, triples: 80, ..Default::default() };
        let report = axiom_suite(&e, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn comparison_is_a_morphism_and_collapses_the_degenerate_fibers() {
        let h = pair_groupoid(&CoordinateManifold::euclidean(1));
        let psi = edge_comparison(&line_over_line(), &h).unwrap();
        let cfg = SuiteConfig { pairs: 150, triples: 0, ..Default::default() };
        let report = morphism_suite(&psi, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);

        // At t = 0 the image arrow carries the unit of 𝓗 at ℓ.
        let g0 = Point::flat(vec![0.3, 0.5, 1.2, 0.0, 2.0, -0.7]);
        let img = psi.arrow_map.eval_point(&g0).unwrap();
        let expected = [0.3, 0.5, 0.5, -0.7, 0.0, 2.0];
        for (x, y) in img.coords.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15, "{:?}", img);
        }
    }

    #[test]
    fn zero_slice_matches_the_scaled_translation_bundle() {
        let h = pair_groupoid(&CoordinateManifold::euclidean(1));
        let (_, iso) = edge_zero_model(&line_over_line(), &h).unwrap();
        let cfg = SuiteConfig { pairs: 120, triples: 0, ..Default::default() };
        let report = morphism_suite(&iso, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn positive_slice_matches_the_constant_pullback_family() {
        let h = pair_groupoid(&CoordinateManifold::euclidean(1));
        let (_, iso) = edge_positive_model(&line_over_line(), &h).unwrap();
        let cfg = SuiteConfig { pairs: 120, triples: 0, ..Default::default() };
        let report = morphism_suite(&iso, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }
}
