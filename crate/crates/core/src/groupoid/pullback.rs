//! Pullback of a groupoid along a fibered projection of its unit space.

use std::sync::Arc;

use rand::Rng;

use crate::geometry::factor::{Factor, ModelBlock};
use crate::geometry::manifold::{CoordinateManifold, Point};
use crate::geometry::map::SmoothMap;
use crate::geometry::sample::{rng_for, sample_one};
use crate::groupoid::{default_unit_sampler, jets_match, FiberChart, FiberVar, LieGroupoid, UnitFrame};
use crate::jet::Jet;
use crate::{Error, Result};

/// A surjective submersion `f: N -> M` in block normal form: on each block
/// of `N`, the coordinates of `f(n)` are a subset of the coordinates of `n`,
/// taken verbatim. The remaining coordinates parametrise the fiber.
#[derive(Clone, Debug)]
pub struct FiberedProjection {
    pub domain: CoordinateManifold,
    pub codomain: CoordinateManifold,
    /// Per domain block: the codomain block and, for each of its embedded
    /// coordinates, the domain coordinate index it copies.
    pub assignment: Vec<(usize, Vec<usize>)>,
}

impl FiberedProjection {
    pub fn new(
        domain: CoordinateManifold,
        codomain: CoordinateManifold,
        assignment: Vec<(usize, Vec<usize>)>,
    ) -> Result<Self> {
        if assignment.len() != domain.blocks.len() {
            return Err(Error::Shape(format!(
                "assignment covers {} blocks, domain {} has {}",
                assignment.len(),
                domain.name,
                domain.blocks.len()
            )));
        }
        for (b, (cb, idx)) in assignment.iter().enumerate() {
            let cod = codomain
                .blocks
                .get(*cb)
                .ok_or_else(|| Error::Shape(format!("codomain block {cb} out of range")))?;
            if idx.len() != cod.embedded_dim() {
                return Err(Error::Shape(format!(
                    "assignment for block {b} picks {} coordinates, codomain block {cb} embeds in {}",
                    idx.len(),
                    cod.embedded_dim()
                )));
            }
            let block = &domain.blocks[b];
            let e = block.embedded_dim();
            let mut used = vec![false; e];
            for &i in idx {
                if i >= e || used[i] {
                    return Err(Error::Shape(format!(
                        "assignment for block {b} repeats or overflows coordinate {i}"
                    )));
                }
                used[i] = true;
            }
            // Both the image and the complement must consist of whole
            // factors, and the image factors must match the codomain.
            let mut image_factors = Vec::new();
            let mut fiber_factors = Vec::new();
            for (f, o) in block.spans() {
                let inside: Vec<bool> =
                    (o..o + f.embedded_dim()).map(|i| used[i]).collect();
                if inside.iter().all(|&x| x) {
                    image_factors.push(f);
                } else if inside.iter().all(|&x| !x) {
                    fiber_factors.push(f);
                } else {
                    return Err(Error::Shape(format!(
                        "assignment for block {b} splits a factor at offset {o}"
                    )));
                }
            }
            if image_factors != cod.factors {
                return Err(Error::Shape(format!(
                    "image factors of block {b} do not match codomain block {cb}"
                )));
            }
            let _ = fiber_factors;
        }
        Ok(FiberedProjection { domain, codomain, assignment })
    }

    /// Projection as a smooth map.
    pub fn project(&self) -> SmoothMap {
        let assignment = self.assignment.clone();
        SmoothMap::from_fn(self.domain.clone(), self.codomain.clone(), move |b, j| {
            let (cb, idx) = &assignment[b];
            Ok((*cb, idx.iter().map(|&i| j[i].clone()).collect()))
        })
    }

    /// Fiber coordinates of block `b`, in ascending embedded order.
    pub fn complement_indices(&self, b: usize) -> Vec<usize> {
        let e = self.domain.blocks[b].embedded_dim();
        let used: Vec<bool> = {
            let mut u = vec![false; e];
            for &i in &self.assignment[b].1 {
                u[i] = true;
            }
            u
        };
        (0..e).filter(|&i| !used[i]).collect()
    }

    /// The factors spanned by the fiber coordinates of block `b`.
    pub fn fiber_block(&self, b: usize) -> ModelBlock {
        let comp = self.complement_indices(b);
        let factors = self.domain.blocks[b]
            .spans()
            .filter(|(_, o)| comp.contains(o))
            .map(|(f, _)| f)
            .collect();
        ModelBlock::new(factors)
    }

    /// Reassemble a domain point of block `b` from fiber and image parts.
    pub fn assemble_jets(&self, b: usize, fiber: &[Jet], image: &[Jet]) -> Vec<Jet> {
        let e = self.domain.blocks[b].embedded_dim();
        let mut out = vec![Jet::zero(); e];
        for (k, &i) in self.complement_indices(b).iter().enumerate() {
            out[i] = fiber[k].clone();
        }
        for (k, &i) in self.assignment[b].1.iter().enumerate() {
            out[i] = image[k].clone();
        }
        out
    }
}

// Block index packing for pullback arrows: ((i1, a), i2).
pub(crate) fn encode(i1: usize, a: usize, i2: usize, na: usize, nd: usize) -> usize {
    (i1 * na + a) * nd + i2
}
pub(crate) fn decode(b: usize, na: usize, nd: usize) -> (usize, usize, usize) {
    (b / (na * nd), (b / nd) % na, b % nd)
}

/// The pullback groupoid `f ⤋ 𝓖`: arrows `(n₁, g, n₂)` with `f(n₁) = r(g)`
/// and `f(n₂) = d(g)`, stored as fiber coordinates of `n₁`, the arrow `g`,
/// and fiber coordinates of `n₂`.
pub fn pullback_groupoid(f: &FiberedProjection, g: &LieGroupoid) -> Result<LieGroupoid> {
    if f.codomain.blocks != g.units.blocks {
        return Err(Error::Shape(format!(
            "projection codomain {} does not match units of {}",
            f.codomain.name, g.name
        )));
    }
    let nd = f.domain.blocks.len();
    let na = g.arrows.blocks.len();

    let mut blocks = Vec::with_capacity(nd * na * nd);
    for i1 in 0..nd {
        for a in 0..na {
            for i2 in 0..nd {
                blocks.push(
                    f.fiber_block(i1)
                        .concat(&g.arrows.blocks[a])
                        .concat(&f.fiber_block(i2)),
                );
            }
        }
    }
    let arrows = CoordinateManifold::new(format!("pullback({})", g.arrows.name), blocks)?;
    let units = f.domain.clone();

    // Split a pullback arrow into (fiber1, g, fiber2) jet slices.
    let split = {
        let f = f.clone();
        let ga = g.arrows.clone();
        move |b: usize, j: &[Jet]| -> (usize, Vec<Jet>, usize, Vec<Jet>, usize, Vec<Jet>) {
            let (i1, a, i2) = decode(b, na, nd);
            let w1 = f.fiber_block(i1).embedded_dim();
            let wa = ga.blocks[a].embedded_dim();
            (
                i1,
                j[..w1].to_vec(),
                a,
                j[w1..w1 + wa].to_vec(),
                i2,
                j[w1 + wa..].to_vec(),
            )
        }
    };

    let (fc, gc, sp) = (f.clone(), g.clone(), split.clone());
    let source = SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
        let (_, _, a, jg, i2, th2) = sp(b, j);
        let (db, dj) = gc.source.eval_jets(a, &jg)?;
        if fc.assignment[i2].0 != db {
            return Err(Error::Constraint("pullback arrow has inconsistent source block".into()));
        }
        Ok((i2, fc.assemble_jets(i2, &th2, &dj)))
    });
    let (fc, gc, sp) = (f.clone(), g.clone(), split.clone());
    let target = SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
        let (i1, th1, a, jg, _, _) = sp(b, j);
        let (rb, rj) = gc.target.eval_jets(a, &jg)?;
        if fc.assignment[i1].0 != rb {
            return Err(Error::Constraint("pullback arrow has inconsistent target block".into()));
        }
        Ok((i1, fc.assemble_jets(i1, &th1, &rj)))
    });

    let (fc, gc) = (f.clone(), g.clone());
    let unit = SmoothMap::from_fn(units.clone(), arrows.clone(), move |b, j| {
        let comp = fc.complement_indices(b);
        let theta: Vec<Jet> = comp.iter().map(|&i| j[i].clone()).collect();
        let m: Vec<Jet> = fc.assignment[b].1.iter().map(|&i| j[i].clone()).collect();
        let (ub, uj) = gc.unit.eval_jets(fc.assignment[b].0, &m)?;
        let mut coords = theta.clone();
        coords.extend(uj);
        coords.extend(theta);
        Ok((encode(b, ub, b, na, nd), coords))
    });

    let (gc, sp) = (g.clone(), split.clone());
    let inverse = SmoothMap::from_fn(arrows.clone(), arrows.clone(), move |b, j| {
        let (i1, th1, a, jg, i2, th2) = sp(b, j);
        let (ib, ij) = gc.inverse.eval_jets(a, &jg)?;
        let mut coords = th2;
        coords.extend(ij);
        coords.extend(th1);
        Ok((encode(i2, ib, i1, na, nd), coords))
    });

    let (gc, sp) = (g.clone(), split.clone());
    let mul = Arc::new(move |gg: (usize, &[Jet]), hh: (usize, &[Jet])| {
        let (i1, th1, a, jg, i2, th2) = sp(gg.0, gg.1);
        let (h1, phi1, b, jh, h2, phi2) = sp(hh.0, hh.1);
        jets_match((i2, &th2), (h1, &phi1))?;
        let (pb, pj) = (gc.mul)((a, &jg), (b, &jh))?;
        let mut coords = th1;
        coords.extend(pj);
        coords.extend(phi2);
        Ok((encode(i1, pb, h2, na, nd), coords))
    });

    let (fc, gc) = (f.clone(), g.clone());
    let proj = f.project();
    let dfiber = Arc::new(move |n: &Point, seed: u64, index: u64| {
        let fx = proj.eval_point(n)?;
        let arrow = (gc.dfiber_sampler)(&fx, seed, index)?;
        let rg = gc.target.eval_point(&arrow)?;
        // Fiber coordinates of the target side: any block mapping onto the
        // block of r(g).
        let candidates: Vec<usize> = (0..nd)
            .filter(|&i| fc.assignment[i].0 == rg.block)
            .collect();
        if candidates.is_empty() {
            return Err(Error::Sampling(format!(
                "no domain block projects onto codomain block {}",
                rg.block
            )));
        }
        let mut rng = rng_for(seed ^ 0x7468, index);
        let i1 = candidates[rng.gen_range(0..candidates.len())];
        let fiber_m = CoordinateManifold::single("fiber", fc.fiber_block(i1));
        let th1 = sample_one(&fiber_m, seed ^ 0x7431, index);
        let comp = fc.complement_indices(n.block);
        let th2: Vec<f64> = comp.iter().map(|&i| n.coords[i]).collect();
        let mut coords = th1.coords;
        coords.extend(arrow.coords.iter().cloned());
        coords.extend(th2);
        Ok(Point::new(encode(i1, arrow.block, n.block, na, nd), coords))
    });

    // A smooth frame exists when the underlying groupoid has one and the
    // fiber factors are coordinate factors (their tangent frame is global).
    let fiber_is_flat = (0..nd).all(|i| {
        f.fiber_block(i)
            .factors
            .iter()
            .all(|x| matches!(x, Factor::Line | Factor::Half))
    });
    let unit_frame = match (&g.unit_frame, fiber_is_flat) {
        (Some(fr), true) => {
            let fc = f.clone();
            let eval = fr.eval.clone();
            let ga = g.arrows.clone();
            let fiber_dim = f.fiber_block(0).dim();
            Some(UnitFrame {
                rank: fiber_dim + fr.rank,
                eval: Arc::new(move |b, j: &[Jet]| {
                    let comp = fc.complement_indices(b);
                    let m: Vec<Jet> =
                        fc.assignment[b].1.iter().map(|&i| j[i].clone()).collect();
                    let (gab, gvecs) = eval(fc.assignment[b].0, &m)?;
                    let w1 = fc.fiber_block(b).embedded_dim();
                    let wa = ga.blocks[gab].embedded_dim();
                    let total = 2 * w1 + wa;
                    let mut out = Vec::with_capacity(comp.len() + gvecs.len());
                    for t in 0..w1 {
                        let mut v = vec![Jet::zero(); total];
                        v[t] = Jet::c(1.0);
                        out.push(v);
                    }
                    for gv in gvecs {
                        let mut v: Vec<Jet> =
                            std::iter::repeat_with(Jet::zero).take(w1).collect();
                        v.extend(gv);
                        v.extend(std::iter::repeat_with(Jet::zero).take(w1));
                        out.push(v);
                    }
                    Ok((encode(b, gab, b, na, nd), out))
                }),
            })
        }
        _ => None,
    };

    let fiber_chart = match (&g.fiber_chart, nd) {
        (Some(chart), 1) => {
            let ok_vars = f.fiber_block(0).factors.iter().all(|x| {
                matches!(x, Factor::Line | Factor::Sphere(0..=2))
            });
            if ok_vars {
                let fc = f.clone();
                let chart = chart.clone();
                let proj = f.project();
                Some(Arc::new(move |n: &Point| {
                    let fx = proj.eval_point(n)?;
                    let inner = chart(&fx)?;
                    let fiber = fc.fiber_block(0);
                    let mut vars: Vec<FiberVar> = fiber
                        .factors
                        .iter()
                        .map(|x| match x {
                            Factor::Line => FiberVar::Euclidean,
                            Factor::Sphere(p) => FiberVar::Sphere(*p),
                            _ => unreachable!("checked above"),
                        })
                        .collect();
                    let w1 = fiber.embedded_dim();
                    vars.extend(inner.vars.iter().cloned());
                    let embed_inner = inner.embed.clone();
                    let comp = fc.complement_indices(0);
                    let th2: Vec<f64> = comp.iter().map(|&i| n.coords[i]).collect();
                    Ok(FiberChart {
                        vars,
                        embed: Arc::new(move |c: &[f64]| {
                            let arrow = embed_inner(&c[w1..])?;
                            let mut coords = c[..w1].to_vec();
                            coords.extend(arrow.coords.iter().cloned());
                            coords.extend(th2.iter().cloned());
                            Ok(Point::new(encode(0, arrow.block, 0, na, 1), coords))
                        }),
                    })
                }) as crate::groupoid::FiberChartFn)
            } else {
                None
            }
        }
        _ => None,
    };

    Ok(LieGroupoid {
        name: format!("pullback({} along {})", g.name, f.domain.name),
        arrows,
        units,
        source,
        target,
        unit,
        inverse,
        mul,
        unit_sampler: default_unit_sampler(&f.domain),
        dfiber_sampler: dfiber,
        unit_frame,
        exp: None,
        log: None,
        fiber_chart,
    })
}

/// Projection onto a coordinate sub-slice as a [`FiberedProjection`], for a
/// single-block domain: keep the embedded indices `kept` (in order).
pub fn slice_projection(
    domain: &CoordinateManifold,
    codomain: &CoordinateManifold,
    kept: Vec<usize>,
) -> Result<FiberedProjection> {
    FiberedProjection::new(domain.clone(), codomain.clone(), vec![(0, kept)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::basic::pair_groupoid;
    use crate::groupoid::suite::{axiom_suite, SuiteConfig};

    #[test]
    fn pullback_of_pair_along_projection_satisfies_axioms() {
        // N = R^3 -> M = R^2, keeping the last two coordinates.
        let n = CoordinateManifold::euclidean(3);
        let m = CoordinateManifold::euclidean(2);
        let f = slice_projection(&n, &m, vec![1, 2]).unwrap();
        let g = pullback_groupoid(&f, &pair_groupoid(&m)).unwrap();
        let cfg = SuiteConfig { pairs: 120, triples: 60, ..Default::default() };
        let report = axiom_suite(&g, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
        assert_eq!(g.rank(), Some(1 + 2));
    }

    #[test]
    fn sphere_fiber_pullback_satisfies_axioms() {
        // N = S^1 x R -> M = R.
        let n = CoordinateManifold::single(
            "S1xR",
            ModelBlock::new(vec![Factor::Sphere(1), Factor::Line]),
        );
        let m = CoordinateManifold::euclidean(1);
        let f = slice_projection(&n, &m, vec![2]).unwrap();
        let g = pullback_groupoid(&f, &pair_groupoid(&m)).unwrap();
        let cfg = SuiteConfig { pairs: 100, triples: 50, ..Default::default() };
        let report = axiom_suite(&g, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn malformed_projection_is_rejected() {
        let n = CoordinateManifold::single(
            "S1xR",
            ModelBlock::new(vec![Factor::Sphere(1), Factor::Line]),
        );
        let m = CoordinateManifold::euclidean(1);
        // Splitting a sphere factor is not a block projection.
        assert!(slice_projection(&n, &m, vec![0]).is_err());
    }
}
