//! Structured algebroids for the basic geometries and the operations that
//! assemble new ones: thick pullbacks, products, frame rescalings and the
//! adiabatic deformation.

use std::sync::Arc;

use crate::algebroid::section::ScalarFn;
use crate::algebroid::structured::StructuredAlgebroid;
use crate::geometry::manifold::unpack_product_jets;
use crate::groupoid::pullback::FiberedProjection;
use crate::jet::{self, Jet};
use crate::{CoordinateManifold, Error, Factor, Result};

/// Per-factor tangent generators: coordinate fields for scalar factors,
/// rotation fields `R_ab = θ_a e_b − θ_b e_a` for spheres.
#[derive(Clone, Debug)]
enum TangentGenerator {
    Coordinate { index: usize },
    Rotation { offset: usize, width: usize, a: usize, b: usize },
}

impl TangentGenerator {
    fn components(&self, jets: &[Jet], e: usize) -> Vec<Jet> {
        let mut v = vec![Jet::c(0.0); e];
        match *self {
            TangentGenerator::Coordinate { index } => v[index] = Jet::c(1.0),
            TangentGenerator::Rotation { offset, a, b, .. } => {
                v[offset + b] = jets[offset + a].clone();
                v[offset + a] = -&jets[offset + b];
            }
        }
        v
    }
}

fn factor_generators(factors: &[Factor]) -> Result<Vec<TangentGenerator>> {
    let mut gens = Vec::new();
    let mut offset = 0;
    for f in factors {
        match f {
            Factor::Line | Factor::Half => {
                gens.push(TangentGenerator::Coordinate { index: offset })
            }
            Factor::Sphere(p) => {
                for a in 0..*p + 1 {
                    for b in a + 1..*p + 1 {
                        gens.push(TangentGenerator::Rotation {
                            offset,
                            width: p + 1,
                            a,
                            b,
                        });
                    }
                }
            }
            // A zero-dimensional clipped sphere is the single point {1}.
            Factor::ClippedSphere(0) => {}
            Factor::ClippedSphere(_) => {
                return Err(Error::Unsupported(
                    "no canonical tangent frame on a clipped sphere".into(),
                ))
            }
        }
        offset += f.embedded_dim();
    }
    Ok(gens)
}

/// `c`-table of a generator list: rotation pairs inside one sphere factor
/// close under `so(p+1)`, everything else commutes. The constants are read
/// off the matrix commutator `[A x, B x] = (B A − A B) x`.
fn structure_table(gens: &[TangentGenerator]) -> Vec<f64> {
    let r = gens.len();
    let mut c = vec![0.0; r * r * r];
    for (i, gi) in gens.iter().enumerate() {
        for (j, gj) in gens.iter().enumerate() {
            let (o, w, (a1, b1), (a2, b2)) = match (gi, gj) {
                (
                    TangentGenerator::Rotation { offset: o1, width, a: a1, b: b1 },
                    TangentGenerator::Rotation { offset: o2, a: a2, b: b2, .. },
                ) if o1 == o2 => (*o1, *width, (*a1, *b1), (*a2, *b2)),
                _ => continue,
            };
            let mat = |a: usize, b: usize| -> Vec<f64> {
                let mut m = vec![0.0; w * w];
                m[b * w + a] = 1.0;
                m[a * w + b] = -1.0;
                m
            };
            let (ma, mb) = (mat(a1, b1), mat(a2, b2));
            // n = mb · ma − ma · mb
            let mut n = vec![0.0; w * w];
            for p in 0..w {
                for q in 0..w {
                    let mut s = 0.0;
                    for l in 0..w {
                        s += mb[p * w + l] * ma[l * w + q] - ma[p * w + l] * mb[l * w + q];
                    }
                    n[p * w + q] = s;
                }
            }
            for (k, gk) in gens.iter().enumerate() {
                if let TangentGenerator::Rotation { offset, a, b, .. } = gk {
                    if *offset == o {
                        c[(i * r + j) * r + k] = n[b * w + a];
                    }
                }
            }
        }
    }
    c
}

/// The tangent algebroid `TM` of a block manifold, with the identity anchor.
/// All blocks must share one factor list so that a single generator set
/// frames every chart.
pub fn tangent_algebroid(m: &CoordinateManifold) -> Result<StructuredAlgebroid> {
    let factors = m.blocks[0].factors.clone();
    if m.blocks.iter().any(|b| b.factors != factors) {
        return Err(Error::Unsupported(format!(
            "blocks of {} carry different factor lists",
            m.name
        )));
    }
    let gens = factor_generators(&factors)?;
    let rank = gens.len();
    let e = m.blocks[0].embedded_dim();
    let table = structure_table(&gens);

    let g = gens.clone();
    let anchor = Arc::new(move |_b: usize, jets: &[Jet]| -> Result<Vec<Vec<Jet>>> {
        Ok(g.iter().map(|gen| gen.components(jets, e)).collect())
    });
    let structure = Arc::new(move |_b: usize, _jets: &[Jet]| -> Result<Vec<Jet>> {
        Ok(table.iter().map(|&v| Jet::c(v)).collect())
    });
    Ok(StructuredAlgebroid {
        name: format!("T({})", m.name),
        base: m.clone(),
        rank,
        anchor,
        structure,
    })
}

/// The thick pullback `f ⤋ A`: generators are the fiber tangent frame
/// followed by the pulled-back generators of `A` with horizontal anchor
/// lifts. Brackets of horizontal lifts stay horizontal, so the structure
/// functions are the fiber table next to `c_A ∘ f`.
pub fn thick_pullback(
    f: &FiberedProjection,
    a: &StructuredAlgebroid,
) -> Result<StructuredAlgebroid> {
    if f.codomain.blocks != a.base.blocks {
        return Err(Error::Shape(format!(
            "projection codomain {} does not match the base of {}",
            f.codomain.name, a.name
        )));
    }
    let fiber0 = f.fiber_block(0);
    if (0..f.domain.blocks.len()).any(|b| f.fiber_block(b).factors != fiber0.factors) {
        return Err(Error::Unsupported(format!(
            "fibers of {} vary between blocks",
            f.domain.name
        )));
    }
    let fiber_gens = factor_generators(&fiber0.factors)?;
    let fr = fiber_gens.len();
    let rank = fr + a.rank;
    let fiber_table = structure_table(&fiber_gens);

    let fc = f.clone();
    let gens = fiber_gens.clone();
    let ac = a.clone();
    let anchor = Arc::new(move |b: usize, jets: &[Jet]| -> Result<Vec<Vec<Jet>>> {
        let e = jets.len();
        let comp = fc.complement_indices(b);
        let (cb, idx) = &fc.assignment[b];
        let img: Vec<Jet> = idx.iter().map(|&i| jets[i].clone()).collect();
        let fiber: Vec<Jet> = comp.iter().map(|&i| jets[i].clone()).collect();

        let mut out = Vec::with_capacity(gens.len() + ac.rank);
        for gen in &gens {
            let local = gen.components(&fiber, comp.len());
            let mut v = vec![Jet::c(0.0); e];
            for (slot, comp_jet) in comp.iter().zip(local) {
                v[*slot] = comp_jet;
            }
            out.push(v);
        }
        for va in (ac.anchor)(*cb, &img)? {
            let mut v = vec![Jet::c(0.0); e];
            for (slot, comp_jet) in idx.iter().zip(va) {
                v[*slot] = comp_jet;
            }
            out.push(v);
        }
        Ok(out)
    });

    let fc = f.clone();
    let ac = a.clone();
    let table = fiber_table.clone();
    let structure = Arc::new(move |b: usize, jets: &[Jet]| -> Result<Vec<Jet>> {
        let (cb, idx) = &fc.assignment[b];
        let img: Vec<Jet> = idx.iter().map(|&i| jets[i].clone()).collect();
        let ca = (ac.structure)(*cb, &img)?;
        let ra = ac.rank;
        let r = fr + ra;
        let mut c = vec![Jet::c(0.0); r * r * r];
        for i in 0..fr {
            for j in 0..fr {
                for k in 0..fr {
                    c[(i * r + j) * r + k] = Jet::c(table[(i * fr + j) * fr + k]);
                }
            }
        }
        for i in 0..ra {
            for j in 0..ra {
                for k in 0..ra {
                    c[((fr + i) * r + fr + j) * r + fr + k] =
                        ca[(i * ra + j) * ra + k].clone();
                }
            }
        }
        Ok(c)
    });

    Ok(StructuredAlgebroid {
        name: format!("{} ⤋ {}", f.domain.name, a.name),
        base: f.domain.clone(),
        rank,
        anchor,
        structure,
    })
}

/// Direct product of algebroids over the product base.
pub fn direct_product_algebroid(
    a: &StructuredAlgebroid,
    b: &StructuredAlgebroid,
) -> StructuredAlgebroid {
    let base = CoordinateManifold::product(
        format!("{} × {}", a.base.name, b.base.name),
        &a.base,
        &b.base,
    );
    let rank = a.rank + b.rank;

    let (ac, bc) = (a.clone(), b.clone());
    let (abase, bbase) = (a.base.clone(), b.base.clone());
    let anchor = Arc::new(move |blk: usize, jets: &[Jet]| -> Result<Vec<Vec<Jet>>> {
        let ((ia, ja), (ib, jb)) = unpack_product_jets(&abase, &bbase, blk, jets);
        let (ea, eb) = (ja.len(), jb.len());
        let mut out = Vec::with_capacity(ac.rank + bc.rank);
        for v in (ac.anchor)(ia, &ja)? {
            let mut w = v;
            w.extend(std::iter::repeat_with(|| Jet::c(0.0)).take(eb));
            out.push(w);
        }
        for v in (bc.anchor)(ib, &jb)? {
            let mut w = vec![Jet::c(0.0); ea];
            w.extend(v);
            out.push(w);
        }
        Ok(out)
    });

    let (ac, bc) = (a.clone(), b.clone());
    let (abase, bbase) = (a.base.clone(), b.base.clone());
    let structure = Arc::new(move |blk: usize, jets: &[Jet]| -> Result<Vec<Jet>> {
        let ((ia, ja), (ib, jb)) = unpack_product_jets(&abase, &bbase, blk, jets);
        let ca = (ac.structure)(ia, &ja)?;
        let cb = (bc.structure)(ib, &jb)?;
        let (ra, rb) = (ac.rank, bc.rank);
        let r = ra + rb;
        let mut c = vec![Jet::c(0.0); r * r * r];
        for i in 0..ra {
            for j in 0..ra {
                for k in 0..ra {
                    c[(i * r + j) * r + k] = ca[(i * ra + j) * ra + k].clone();
                }
            }
        }
        for i in 0..rb {
            for j in 0..rb {
                for k in 0..rb {
                    c[((ra + i) * r + ra + j) * r + ra + k] =
                        cb[(i * rb + j) * rb + k].clone();
                }
            }
        }
        Ok(c)
    });

    StructuredAlgebroid {
        name: format!("{} × {}", a.name, b.name),
        base,
        rank,
        anchor,
        structure,
    }
}

/// Rescale every generator by the gauge function: `Ẽᵢ = f Eᵢ` with
/// `c̃^k_{ij} = f c^k_{ij} + δ_{jk} (ρ_{Eᵢ} f) − δ_{ik} (ρ_{Eⱼ} f)`.
/// No division by `f` occurs, so the gauge may vanish.
pub fn rescale(a: &StructuredAlgebroid, gauge: ScalarFn, label: &str) -> StructuredAlgebroid {
    let ac = a.clone();
    let gc = gauge.clone();
    let anchor = Arc::new(move |b: usize, jets: &[Jet]| -> Result<Vec<Vec<Jet>>> {
        let s = gc(b, jets)?;
        Ok((ac.anchor)(b, jets)?
            .into_iter()
            .map(|v| v.into_iter().map(|x| &x * &s).collect())
            .collect())
    });

    let ac = a.clone();
    let structure = Arc::new(move |b: usize, jets: &[Jet]| -> Result<Vec<Jet>> {
        let r = ac.rank;
        let (aug, k) = jet::augment_with_basis(jets);
        let s_aug = gauge(b, &aug)?;
        let s = jet::restrict(&s_aug, k);
        let rho = (ac.anchor)(b, jets)?;
        let e = jets.len();
        // ρ_{Eᵢ} f as a jet in the original directions.
        let along: Vec<Jet> = (0..r)
            .map(|i| {
                let mut acc = Jet::c(0.0);
                for m in 0..e {
                    let grad_m = Jet {
                        v: s_aug.d1(k + m),
                        g: (0..k).map(|j| s_aug.d2(j, k + m)).collect(),
                        h: Vec::new(),
                    };
                    acc = acc + &rho[i][m] * &grad_m;
                }
                acc
            })
            .collect();
        let c = (ac.structure)(b, jets)?;
        let mut out = Vec::with_capacity(r * r * r);
        for i in 0..r {
            for j in 0..r {
                for t in 0..r {
                    let mut v = &s * &c[(i * r + j) * r + t];
                    if j == t {
                        v = v + &along[i];
                    }
                    if i == t {
                        v = v - &along[j];
                    }
                    out.push(v);
                }
            }
        }
        Ok(out)
    });

    StructuredAlgebroid {
        name: format!("{label}·({})", a.name),
        base: a.base.clone(),
        rank: a.rank,
        anchor,
        structure,
    }
}

/// The adiabatic algebroid over `base × [0,∞)`: the same generators with
/// anchors scaled by the deformation parameter `t` (and no `∂_t`), structure
/// functions `t · c`.
pub fn adiabatic_algebroid(a: &StructuredAlgebroid) -> StructuredAlgebroid {
    let base = CoordinateManifold::product(
        format!("{} × [0,∞)", a.base.name),
        &a.base,
        &CoordinateManifold::halfline(),
    );
    let (ac, abase) = (a.clone(), a.base.clone());
    let anchor = Arc::new(move |blk: usize, jets: &[Jet]| -> Result<Vec<Vec<Jet>>> {
        let half = CoordinateManifold::halfline();
        let ((ia, ja), (_, jt)) = unpack_product_jets(&abase, &half, blk, jets);
        let t = &jt[0];
        Ok((ac.anchor)(ia, &ja)?
            .into_iter()
            .map(|v| {
                let mut w: Vec<Jet> = v.into_iter().map(|x| &x * t).collect();
                w.push(Jet::c(0.0));
                w
            })
            .collect())
    });
    let (ac, abase) = (a.clone(), a.base.clone());
    let structure = Arc::new(move |blk: usize, jets: &[Jet]| -> Result<Vec<Jet>> {
        let half = CoordinateManifold::halfline();
        let ((ia, ja), (_, jt)) = unpack_product_jets(&abase, &half, blk, jets);
        let t = &jt[0];
        Ok((ac.structure)(ia, &ja)?.into_iter().map(|c| &c * t).collect())
    });
    StructuredAlgebroid {
        name: format!("adiabatic({})", a.name),
        base,
        rank: a.rank,
        anchor,
        structure,
    }
}

/// The algebroid of the scaling groupoid on `[0,∞)`: rank one, anchor
/// `−t ∂_t`, abelian.
pub fn scaling_halfline_algebroid() -> StructuredAlgebroid {
    StructuredAlgebroid {
        name: "A(𝒯)".into(),
        base: CoordinateManifold::halfline(),
        rank: 1,
        anchor: Arc::new(|_, jets: &[Jet]| Ok(vec![vec![-&jets[0]]])),
        structure: Arc::new(|_, _: &[Jet]| Ok(vec![Jet::c(0.0)])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{Algebroid, Section};
    use crate::{ModelBlock, Point};

    #[test]
    fn sphere_rotations_close_under_so3() {
        let m = CoordinateManifold::single("S2", ModelBlock::new(vec![Factor::Sphere(2)]));
        let a = tangent_algebroid(&m).unwrap();
        assert_eq!(a.rank, 3);
        // Generators in lexicographic order: R01, R02, R12.
        let x = Point::new(0, vec![0.6, 0.48, 0.64]);
        let b = a.bracket_value(&Section::generator(3, 0), &Section::generator(3, 1), &x).unwrap();
        // [R01, R02] = -R12 under [A x, B x] = (BA - AB) x.
        let mut expect = vec![0.0; 3];
        expect[2] = -1.0;
        for (u, v) in b.iter().zip(&expect) {
            assert!((u - v).abs() < 1e-12, "{b:?}");
        }
        // Anchor morphism for the same pair, as a numerical sanity check.
        let lhs = a
            .bracket_anchor_value(&Section::generator(3, 0), &Section::generator(3, 1), &x)
            .unwrap();
        let r12 = a.anchor_value(&Section::generator(3, 2), &x).unwrap();
        for (u, v) in lhs.iter().zip(&r12) {
            assert!((u + v).abs() < 1e-12);
        }
    }

    #[test]
    fn rescaled_line_fields_keep_leibniz_shape() {
        // On [0,∞) with gauge t: [t∂, f·t∂] brackets stay polynomial in t.
        let a = tangent_algebroid(&CoordinateManifold::halfline()).unwrap();
        let b = rescale(&a, Arc::new(|_, j: &[Jet]| Ok(j[0].clone())), "t");
        let x = Point::flat(vec![0.8]);
        let one = Section::constant(vec![1.0]);
        let lin = Section::new(1, |_, j| Ok(vec![j[0].clone()]));
        // [t∂, t·(t∂)] = t·(t∂) + t²∂ − ... direct value: [tE, f tE] with
        // E = ∂: coefficient = t ∂(f t)·... checked against the anchor push.
        let lhs = b.bracket_anchor_value(&one, &lin, &x).unwrap();
        let rho_one = b.anchor_value(&one, &x).unwrap();
        let rho_lin = b.anchor_value(&lin, &x).unwrap();
        // [ρX, ρY] for ρX = t∂, ρY = t²∂ is (2t² − t²)∂ = t²∂.
        assert!((rho_one[0] - 0.8).abs() < 1e-12);
        assert!((rho_lin[0] - 0.64).abs() < 1e-12);
        assert!((lhs[0] - 0.64).abs() < 1e-10, "{lhs:?}");
    }

    #[test]
    fn adiabatic_anchor_scales_with_t() {
        let a = tangent_algebroid(&CoordinateManifold::euclidean(2)).unwrap();
        let ad = adiabatic_algebroid(&a);
        assert_eq!(ad.rank, 2);
        let x = Point::flat(vec![0.3, -0.5, 0.25]);
        let rho = ad.anchor_value(&Section::generator(2, 0), &x).unwrap();
        assert_eq!(rho.len(), 3);
        assert!((rho[0] - 0.25).abs() < 1e-12);
        assert!(rho[1].abs() < 1e-12 && rho[2].abs() < 1e-12);
    }
}
