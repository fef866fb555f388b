//! Elementary groupoid constructors: spaces, pair groupoids, products and
//! bundles of Lie groups.

use std::sync::Arc;

use rand::Rng;

use crate::geometry::manifold::{
    pack_product, pack_product_jets, unpack_product, unpack_product_jets, CoordinateManifold,
    Point,
};
use crate::geometry::map::SmoothMap;
use crate::geometry::sample::{rng_for, sample_one};
use crate::groupoid::{
    default_unit_sampler, jets_match, FiberChart, FiberVar, LieGroupoid, UnitFrame,
};
use crate::jet::{expm1_over, Jet};
use crate::{Factor, Result};

/// Chart-coordinate width of one fiber variable.
pub(crate) fn var_width(v: &FiberVar) -> usize {
    match v {
        FiberVar::Euclidean | FiberVar::LogScale => 1,
        FiberVar::Sphere(p) => p + 1,
    }
}

fn all_line(m: &CoordinateManifold) -> bool {
    m.blocks.iter().all(|b| b.factors.iter().all(|f| matches!(f, Factor::Line)))
}

/// The space `M` seen as a groupoid with only unit arrows.
pub fn space_groupoid(m: &CoordinateManifold) -> LieGroupoid {
    let id = SmoothMap::identity(m);
    let mul = {
        Arc::new(move |g: (usize, &[Jet]), h: (usize, &[Jet])| {
            jets_match(g, h)?;
            Ok((g.0, g.1.to_vec()))
        })
    };
    let dfiber = Arc::new(move |x: &Point, _seed: u64, _index: u64| Ok(x.clone()));
    let frame = UnitFrame {
        rank: 0,
        eval: Arc::new(|b, _j: &[Jet]| Ok((b, Vec::new()))),
    };
    let exp = Arc::new(|x: (usize, &[Jet]), _c: &[Jet]| Ok((x.0, x.1.to_vec())));
    let log = Arc::new(|_b: usize, _j: &[Jet]| Ok(Vec::new()));
    let chart = Arc::new(move |x: &Point| {
        let x = x.clone();
        Ok(FiberChart {
            vars: Vec::new(),
            embed: Arc::new(move |_c: &[f64]| Ok(x.clone())),
        })
    });
    LieGroupoid {
        name: format!("space({})", m.name),
        arrows: m.clone(),
        units: m.clone(),
        source: id.clone(),
        target: id.clone(),
        unit: id.clone(),
        inverse: id,
        mul,
        unit_sampler: default_unit_sampler(m),
        dfiber_sampler: dfiber,
        unit_frame: Some(frame),
        exp: Some(exp),
        log: Some(log),
        fiber_chart: Some(chart),
    }
}

/// The pair groupoid `M × M` over `M`: an arrow `(x, y)` runs from `y` to
/// `x`, and `(x, y) · (y, z) = (x, z)`.
pub fn pair_groupoid(m: &CoordinateManifold) -> LieGroupoid {
    let arrows = CoordinateManifold::product(format!("{0}x{0}", m.name), m, m);
    let units = m.clone();
    let nb = m.blocks.len();

    let mu = m.clone();
    let source = SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
        let (_, second) = unpack_product_jets(&mu, &mu, b, j);
        Ok(second)
    });
    let mu = m.clone();
    let target = SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
        let (first, _) = unpack_product_jets(&mu, &mu, b, j);
        Ok(first)
    });
    let unit = SmoothMap::from_fn(units.clone(), arrows.clone(), move |b, j| {
        let mut coords = j.to_vec();
        coords.extend(j.iter().cloned());
        Ok((b * nb + b, coords))
    });
    let mu = m.clone();
    let inverse = SmoothMap::from_fn(arrows.clone(), arrows.clone(), move |b, j| {
        let ((bx, x), (by, y)) = unpack_product_jets(&mu, &mu, b, j);
        Ok(pack_product_jets(&mu, (by, y), (bx, x)))
    });

    let mu = m.clone();
    let mul = Arc::new(move |g: (usize, &[Jet]), h: (usize, &[Jet])| {
        let ((bx, x), (by, y)) = unpack_product_jets(&mu, &mu, g.0, g.1);
        let ((by2, y2), (bz, z)) = unpack_product_jets(&mu, &mu, h.0, h.1);
        jets_match((by, &y), (by2, &y2))?;
        Ok(pack_product_jets(&mu, (bx, x), (bz, z)))
    });

    let mu = m.clone();
    let dfiber = Arc::new(move |x: &Point, seed: u64, index: u64| {
        let w = sample_one(&mu, seed, index);
        Ok(pack_product(&mu, &w, x))
    });

    // Frame, exponential and integration charts exist for flat models,
    // where the coordinate vector fields give a global smooth frame.
    let flat = all_line(m);
    let dim = m.dim();
    let unit_frame = flat.then(|| {
        let e = m.blocks[0].embedded_dim();
        UnitFrame {
            rank: dim,
            eval: Arc::new(move |b, j: &[Jet]| {
                let frame = (0..dim)
                    .map(|i| {
                        let mut v = vec![Jet::zero(); 2 * e];
                        v[i] = Jet::c(1.0);
                        v
                    })
                    .collect();
                let _ = j;
                Ok((b * nb + b, frame))
            }),
        }
    });
    let exp = flat.then(|| -> crate::groupoid::ExpFn {
        Arc::new(move |x: (usize, &[Jet]), c: &[Jet]| {
            let mut coords: Vec<Jet> = x.1.iter().zip(c).map(|(xi, ci)| xi + ci).collect();
            coords.extend(x.1.iter().cloned());
            Ok((x.0, coords))
        })
    });
    let e0 = m.blocks[0].embedded_dim();
    let log = flat.then(|| -> crate::groupoid::LogFn {
        Arc::new(move |_b: usize, j: &[Jet]| {
            Ok((0..e0).map(|i| &j[i] - &j[e0 + i]).collect())
        })
    });
    let fiber_chart = flat.then(|| -> crate::groupoid::FiberChartFn {
        let mu = m.clone();
        Arc::new(move |x: &Point| {
            let x = x.clone();
            let mu = mu.clone();
            Ok(FiberChart {
                vars: vec![FiberVar::Euclidean; mu.dim()],
                embed: Arc::new(move |c: &[f64]| {
                    Ok(pack_product(&mu, &Point::flat(c.to_vec()), &x))
                }),
            })
        })
    });

    LieGroupoid {
        name: format!("pair({})", m.name),
        arrows,
        units,
        source,
        target,
        unit,
        inverse,
        mul,
        unit_sampler: default_unit_sampler(m),
        dfiber_sampler: dfiber,
        unit_frame,
        exp,
        log,
        fiber_chart,
    }
}

/// Direct product of two groupoids, componentwise on every structure map.
pub fn product_groupoid(a: &LieGroupoid, b: &LieGroupoid) -> LieGroupoid {
    let arrows = CoordinateManifold::product(
        format!("{}x{}", a.arrows.name, b.arrows.name),
        &a.arrows,
        &b.arrows,
    );
    let units = CoordinateManifold::product(
        format!("{}x{}", a.units.name, b.units.name),
        &a.units,
        &b.units,
    );

    let component_map = |fa: &SmoothMap, fb: &SmoothMap, dom: &CoordinateManifold, cod: &CoordinateManifold| {
        let (fa, fb) = (fa.clone(), fb.clone());
        let (da, db) = (fa.domain.clone(), fb.domain.clone());
        let cb = fb.codomain.clone();
        SmoothMap::from_fn(dom.clone(), cod.clone(), move |blk, j| {
            let ((ba, ja), (bb, jb)) = unpack_product_jets(&da, &db, blk, j);
            let outa = fa.eval_jets(ba, &ja)?;
            let outb = fb.eval_jets(bb, &jb)?;
            Ok(pack_product_jets(&cb, outa, outb))
        })
    };

    let source = component_map(&a.source, &b.source, &arrows, &units);
    let target = component_map(&a.target, &b.target, &arrows, &units);
    let unit = component_map(&a.unit, &b.unit, &units, &arrows);
    let inverse = component_map(&a.inverse, &b.inverse, &arrows, &arrows);

    let (aa, ab) = (a.arrows.clone(), b.arrows.clone());
    let (ma, mb) = (a.mul.clone(), b.mul.clone());
    let mul = Arc::new(move |g: (usize, &[Jet]), h: (usize, &[Jet])| {
        let ((ga, ja), (gb, jb)) = unpack_product_jets(&aa, &ab, g.0, g.1);
        let ((ha, ka), (hb, kb)) = unpack_product_jets(&aa, &ab, h.0, h.1);
        let pa = ma((ga, &ja), (ha, &ka))?;
        let pb = mb((gb, &jb), (hb, &kb))?;
        Ok(pack_product_jets(&ab, pa, pb))
    });

    let (sa, sb) = (a.unit_sampler.clone(), b.unit_sampler.clone());
    let bu = b.units.clone();
    let unit_sampler = Arc::new(move |seed: u64, index: u64| {
        let pa = sa(seed ^ 0xa, index)?;
        let pb = sb(seed ^ 0xb, index)?;
        Ok(pack_product(&bu, &pa, &pb))
    });

    let (fa, fb) = (a.dfiber_sampler.clone(), b.dfiber_sampler.clone());
    let (ua, ub) = (a.units.clone(), b.units.clone());
    let ab2 = b.arrows.clone();
    let dfiber = Arc::new(move |x: &Point, seed: u64, index: u64| {
        let (xa, xb) = unpack_product(&ua, &ub, x);
        let ga = fa(&xa, seed ^ 0xa, index)?;
        let gb = fb(&xb, seed ^ 0xb, index)?;
        Ok(pack_product(&ab2, &ga, &gb))
    });

    let unit_frame = match (&a.unit_frame, &b.unit_frame) {
        (Some(fra), Some(frb)) => {
            let (ea, eb) = (fra.eval.clone(), frb.eval.clone());
            let (ua, ub) = (a.units.clone(), b.units.clone());
            let (arra, arrb) = (a.arrows.clone(), b.arrows.clone());
            let rank = fra.rank + frb.rank;
            Some(UnitFrame {
                rank,
                eval: Arc::new(move |blk, j: &[Jet]| {
                    let ((ba, ja), (bb, jb)) = unpack_product_jets(&ua, &ub, blk, j);
                    let (aba, va) = ea(ba, &ja)?;
                    let (abb, vb) = eb(bb, &jb)?;
                    let (wa, wb) = (
                        arra.blocks[aba].embedded_dim(),
                        arrb.blocks[abb].embedded_dim(),
                    );
                    let block = aba * arrb.blocks.len() + abb;
                    let mut out = Vec::with_capacity(va.len() + vb.len());
                    for v in va {
                        let mut w = v;
                        w.extend(std::iter::repeat_with(Jet::zero).take(wb));
                        out.push(w);
                    }
                    for v in vb {
                        let mut w: Vec<Jet> =
                            std::iter::repeat_with(Jet::zero).take(wa).collect();
                        w.extend(v);
                        out.push(w);
                    }
                    Ok((block, out))
                }),
            })
        }
        _ => None,
    };

    let exp = match (&a.exp, &b.exp, &a.unit_frame, &b.unit_frame) {
        (Some(xa), Some(xb), Some(fra), _) => {
            let (xa, xb) = (xa.clone(), xb.clone());
            let (ua, ub) = (a.units.clone(), b.units.clone());
            let ab3 = b.arrows.clone();
            let ra = fra.rank;
            Some(Arc::new(move |x: (usize, &[Jet]), c: &[Jet]| {
                let ((ba, ja), (bb, jb)) = unpack_product_jets(&ua, &ub, x.0, x.1);
                let ga = xa((ba, &ja), &c[..ra])?;
                let gb = xb((bb, &jb), &c[ra..])?;
                Ok(pack_product_jets(&ab3, ga, gb))
            }) as crate::groupoid::ExpFn)
        }
        _ => None,
    };

    let log = match (&a.log, &b.log) {
        (Some(la), Some(lb)) => {
            let (la, lb) = (la.clone(), lb.clone());
            let (aa, ab) = (a.arrows.clone(), b.arrows.clone());
            Some(Arc::new(move |blk: usize, j: &[Jet]| {
                let ((ba, ja), (bb, jb)) = unpack_product_jets(&aa, &ab, blk, j);
                let mut c = la(ba, &ja)?;
                c.extend(lb(bb, &jb)?);
                Ok(c)
            }) as crate::groupoid::LogFn)
        }
        _ => None,
    };

    let fiber_chart = match (&a.fiber_chart, &b.fiber_chart) {
        (Some(ca), Some(cb)) => {
            let (ca, cb) = (ca.clone(), cb.clone());
            let (ua, ub) = (a.units.clone(), b.units.clone());
            let ab4 = b.arrows.clone();
            Some(Arc::new(move |x: &Point| {
                let (xa, xb) = unpack_product(&ua, &ub, x);
                let cha = ca(&xa)?;
                let chb = cb(&xb)?;
                let wa: usize = cha.vars.iter().map(var_width).sum();
                let mut vars = cha.vars.clone();
                vars.extend(chb.vars.iter().cloned());
                let (ea, eb) = (cha.embed.clone(), chb.embed.clone());
                let ab5 = ab4.clone();
                Ok(FiberChart {
                    vars,
                    embed: Arc::new(move |c: &[f64]| {
                        let pa = ea(&c[..wa])?;
                        let pb = eb(&c[wa..])?;
                        Ok(pack_product(&ab5, &pa, &pb))
                    }),
                })
            }) as crate::groupoid::FiberChartFn)
        }
        _ => None,
    };

    LieGroupoid {
        name: format!("{} x {}", a.name, b.name),
        arrows,
        units,
        source,
        target,
        unit,
        inverse,
        mul,
        unit_sampler,
        dfiber_sampler: dfiber,
        unit_frame,
        exp,
        log,
        fiber_chart,
    }
}

/// The fiber group of a [`group_bundle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupModel {
    /// `(R^k, +)`.
    Translation(usize),
    /// The multiplicative group `R₊*` acting trivially (k = 0 scaling).
    Dilation,
    /// `R^k ⋊ R₊*` with `(v₁, s₁)(v₂, s₂) = (v₁ + s₁ v₂, s₁ s₂)`.
    SemidirectScaling(usize),
}

impl GroupModel {
    /// Translation part dimension and whether a scaling coordinate exists.
    fn shape(&self) -> (usize, bool) {
        match self {
            GroupModel::Translation(k) => (*k, false),
            GroupModel::Dilation => (0, true),
            GroupModel::SemidirectScaling(k) => (*k, true),
        }
    }

    pub fn dim(&self) -> usize {
        let (k, s) = self.shape();
        k + usize::from(s)
    }
}

/// The trivial bundle of groups `base × G` over `base`, with source and
/// target both equal to the bundle projection. The scaling coordinate `s`
/// is kept positive by the samplers; the group laws are smooth on `s > 0`.
pub fn group_bundle(base: &CoordinateManifold, model: GroupModel) -> Result<LieGroupoid> {
    let (k, scaled) = model.shape();
    let gdim = model.dim();
    let fiber = CoordinateManifold::single(
        match model {
            GroupModel::Translation(_) => format!("R^{k}"),
            GroupModel::Dilation => "R+*".to_string(),
            GroupModel::SemidirectScaling(_) => format!("R^{k}xR+*"),
        },
        crate::ModelBlock::lines(gdim),
    );
    let arrows = CoordinateManifold::product(
        format!("{}x{}", base.name, fiber.name),
        base,
        &fiber,
    );
    let units = base.clone();

    let (bu, fu) = (base.clone(), fiber.clone());
    let source = SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
        let ((bb, jb), _) = unpack_product_jets(&bu, &fu, b, j);
        Ok((bb, jb))
    });
    let target = source.clone();

    let unit = SmoothMap::from_fn(units.clone(), arrows.clone(), move |b, j| {
        let mut coords = j.to_vec();
        coords.extend(std::iter::repeat_with(Jet::zero).take(k));
        if scaled {
            coords.push(Jet::c(1.0));
        }
        Ok((b, coords))
    });

    let (bu, fu) = (base.clone(), fiber.clone());
    let inverse = SmoothMap::from_fn(arrows.clone(), arrows.clone(), move |b, j| {
        let ((bb, jb), (bf, jf)) = unpack_product_jets(&bu, &fu, b, j);
        let mut g = Vec::with_capacity(gdim);
        if scaled {
            let s = &jf[k];
            for v in &jf[..k] {
                g.push(-(v / s));
            }
            g.push(s.recip());
        } else {
            for v in &jf[..k] {
                g.push(-v);
            }
        }
        Ok(pack_product_jets(&fu, (bb, jb), (bf, g)))
    });

    let (bu, fu) = (base.clone(), fiber.clone());
    let mul = Arc::new(move |g: (usize, &[Jet]), h: (usize, &[Jet])| {
        let ((gb, gjb), (gbf, gj)) = unpack_product_jets(&bu, &fu, g.0, g.1);
        let ((hb, hjb), (_, hj)) = unpack_product_jets(&bu, &fu, h.0, h.1);
        jets_match((gb, &gjb), (hb, &hjb))?;
        let mut out = Vec::with_capacity(gdim);
        if scaled {
            let s1 = &gj[k];
            for (v1, v2) in gj[..k].iter().zip(&hj[..k]) {
                out.push(v1 + &(s1 * v2));
            }
            out.push(s1 * &hj[k]);
        } else {
            for (v1, v2) in gj[..k].iter().zip(&hj[..k]) {
                out.push(v1 + v2);
            }
        }
        Ok(pack_product_jets(&fu, (gb, gjb), (gbf, out)))
    });

    let dfiber = {
        let fu = fiber.clone();
        Arc::new(move |x: &Point, seed: u64, index: u64| {
            let mut rng = rng_for(seed, index);
            let mut g: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if scaled {
                g.push(rng.gen_range(-1.5..1.5f64).exp());
            }
            Ok(pack_product(&fu, x, &Point::flat(g)))
        })
    };

    let base_embed: Vec<usize> = base.blocks.iter().map(|b| b.embedded_dim()).collect();
    let unit_frame = {
        let base_embed = base_embed.clone();
        UnitFrame {
            rank: gdim,
            eval: Arc::new(move |b, j: &[Jet]| {
                let e = base_embed[b] + gdim;
                let _ = j;
                let frame = (0..gdim)
                    .map(|i| {
                        let mut v = vec![Jet::zero(); e];
                        v[base_embed[b] + i] = Jet::c(1.0);
                        v
                    })
                    .collect();
                Ok((b, frame))
            }),
        }
    };

    let exp: crate::groupoid::ExpFn = Arc::new(move |x: (usize, &[Jet]), c: &[Jet]| {
        let mut coords = x.1.to_vec();
        if scaled {
            let a = &c[k];
            let phi = expm1_over(a);
            for v in &c[..k] {
                coords.push(v * &phi);
            }
            coords.push(a.exp());
        } else {
            coords.extend(c.iter().cloned());
        }
        Ok((x.0, coords))
    });

    let log: crate::groupoid::LogFn = {
        let base_embed = base_embed.clone();
        Arc::new(move |b: usize, j: &[Jet]| {
            let fiber = &j[base_embed[b]..];
            if scaled {
                let a = fiber[k].ln();
                let phi = expm1_over(&a);
                let mut c: Vec<Jet> = fiber[..k].iter().map(|w| w / &phi).collect();
                c.push(a);
                Ok(c)
            } else {
                Ok(fiber[..k].to_vec())
            }
        })
    };

    let fiber_chart: crate::groupoid::FiberChartFn = {
        let fu = fiber.clone();
        Arc::new(move |x: &Point| {
            let x = x.clone();
            let fu = fu.clone();
            let mut vars = vec![FiberVar::Euclidean; k];
            if scaled {
                vars.push(FiberVar::LogScale);
            }
            Ok(FiberChart {
                vars,
                embed: Arc::new(move |c: &[f64]| {
                    let mut g = c[..k].to_vec();
                    if scaled {
                        g.push(c[k].exp());
                    }
                    Ok(pack_product(&fu, &x, &Point::flat(g)))
                }),
            })
        })
    };

    Ok(LieGroupoid {
        name: format!("bundle({}, {})", base.name, fiber.name),
        arrows,
        units,
        source,
        target,
        unit,
        inverse,
        mul,
        unit_sampler: default_unit_sampler(base),
        dfiber_sampler: dfiber,
        unit_frame: Some(unit_frame),
        exp: Some(exp),
        log: Some(log),
        fiber_chart: Some(fiber_chart),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::suite::{axiom_suite, SuiteConfig};
    use crate::jet;

    #[test]
    fn pair_groupoid_axioms_hold() {
        let g = pair_groupoid(&CoordinateManifold::euclidean(2));
        let cfg = SuiteConfig { pairs: 120, triples: 60, ..Default::default() };
        let report = axiom_suite(&g, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
        assert!(report.max_residual() <= 1e-12);
    }

    #[test]
    fn semidirect_bundle_axioms_hold() {
        let g = group_bundle(
            &CoordinateManifold::euclidean(1),
            GroupModel::SemidirectScaling(2),
        )
        .unwrap();
        let cfg = SuiteConfig { pairs: 120, triples: 60, ..Default::default() };
        let report = axiom_suite(&g, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn corrupted_mul_is_detected() {
        let g = pair_groupoid(&CoordinateManifold::euclidean(1)).with_corrupted_mul(1e-3);
        let cfg = SuiteConfig { pairs: 80, triples: 40, ..Default::default() };
        let report = axiom_suite(&g, &cfg).unwrap();
        assert!(!report.ok);
        assert!(report.laws.iter().any(|l| l.max_residual > 1e-6 && l.witness.is_some()));
    }

    #[test]
    fn bundle_exponential_matches_group_exponential() {
        // exp(a D + X) = ((e^a - 1)/a · X, e^a) in each fiber.
        let g = group_bundle(
            &CoordinateManifold::euclidean(1),
            GroupModel::SemidirectScaling(1),
        )
        .unwrap();
        let exp = g.exp.as_ref().unwrap();
        let x = jet::constants(&[0.3]);
        let c = jet::constants(&[2.0, 0.7]);
        let (_, out) = exp((0, &x), &c).unwrap();
        let a: f64 = 0.7;
        assert!((out[1].v - 2.0 * a.exp_m1() / a).abs() < 1e-14);
        assert!((out[2].v - a.exp()).abs() < 1e-15);
    }
}
