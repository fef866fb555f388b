//! Desingularization of a pair groupoid along a tame submanifold of its
//! base: over the real blow-up of the base, the edge modification of the
//! front face fibration is glued to the pair groupoid of the blown-up
//! space. The result restricts to the original groupoid away from the
//! front face and to a semidirect group bundle on it.

use std::sync::Arc;

use crate::deformation::adiabatic::{adiabatic_groupoid, scaling_action};
use crate::deformation::edge::{edge_modification, edge_modification_ni};
use crate::deformation::scaling::scaling_groupoid;
use crate::desing::glue::{glue, GlueData, GluePiece};
use crate::desing::tame::TameSubmanifold;
use crate::geometry::blowup::BlowUpData;
use crate::geometry::manifold::{CoordinateManifold, Point};
use crate::geometry::map::SmoothMap;
use crate::groupoid::pullback::slice_projection;
use crate::groupoid::{
    group_bundle, pair_groupoid, product_groupoid, pullback_groupoid, reduction,
    semidirect_product, sup_distance, FiberedProjection, GroupModel, GroupoidMorphism,
    LieGroupoid, SubsetSpec, UnitFrame,
};
use crate::jet::Jet;
use crate::{Error, Factor, Result};

/// Tolerance of the structural samples validating a pair presentation.
const PAIR_FORM_TOL: f64 = 1e-9;

/// Verify that `g` is the pair groupoid of `ambient` in the standard
/// presentation: arrows `(y, x)` from `x` to `y` with componentwise
/// structure maps. Checked structurally on the coordinate blocks and on
/// sampled values.
fn pair_form_check(g: &LieGroupoid, ambient: &CoordinateManifold) -> Result<()> {
    let fail = |what: &str| {
        Err(Error::Unsupported(format!(
            "desingularization needs the pair groupoid of {} as input, but {} {}",
            ambient.name, g.name, what
        )))
    };
    if g.units.blocks != ambient.blocks {
        return fail("has different units");
    }
    let doubled = CoordinateManifold::product("square", ambient, ambient);
    if g.arrows.blocks != doubled.blocks {
        return fail("does not have doubled arrow blocks");
    }
    let e = ambient.blocks[0].embedded_dim();
    let sup = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    };
    for i in 0..8u64 {
        let gamma = g.sample_arrow(0x9a12, i)?;
        let d = g.source.eval_point(&gamma)?;
        let r = g.target.eval_point(&gamma)?;
        if sup(&d.coords, &gamma.coords[e..]) > PAIR_FORM_TOL
            || sup(&r.coords, &gamma.coords[..e]) > PAIR_FORM_TOL
        {
            return fail("routes endpoints differently");
        }
        let inv = g.inverse.eval_point(&gamma)?;
        let swapped: Vec<f64> = gamma.coords[e..]
            .iter()
            .chain(&gamma.coords[..e])
            .copied()
            .collect();
        if sup(&inv.coords, &swapped) > PAIR_FORM_TOL {
            return fail("inverts arrows differently");
        }
        let x = g.sample_unit(0x9a12, i)?;
        let u = g.unit.eval_point(&x)?;
        let diag: Vec<f64> = x.coords.iter().chain(&x.coords).copied().collect();
        if sup(&u.coords, &diag) > PAIR_FORM_TOL {
            return fail("has non-diagonal units");
        }
        let (a, b) = g.sample_composable_pair(0x9a12, i)?;
        let p = g.mul_points(&a, &b)?;
        let expect: Vec<f64> = a.coords[..e]
            .iter()
            .chain(&b.coords[e..])
            .copied()
            .collect();
        if sup(&p.coords, &expect) > PAIR_FORM_TOL {
            return fail("multiplies arrows differently");
        }
    }
    Ok(())
}

/// A groupoid desingularized along a tame locus of its base.
#[derive(Clone)]
pub struct Desingularization {
    /// The glued groupoid over the blown-up base.
    pub groupoid: LieGroupoid,
    /// Real blow-up of the base along the locus.
    pub blowup: BlowUpData,
    /// The boundary presentation: the edge modification of the front face
    /// fibration.
    pub edge: LieGroupoid,
    /// Fibration of the front face over the locus.
    pub front_projection: FiberedProjection,
    /// Fibration of the blown-up base over locus × [0, ∞), forgetting the
    /// front sphere directions.
    pub radial_projection: FiberedProjection,
    /// The submanifold data the construction started from.
    pub locus: TameSubmanifold,
    /// The gluing data behind [`Desingularization::groupoid`].
    pub gluing: GlueData,
    /// Whether the deformation direction is kept independent of the fibers.
    pub anisotropic: bool,
}

impl std::fmt::Debug for Desingularization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Desingularization({})", self.groupoid.name)
    }
}

/// The open region `{ρ < 1}` of the blown-up base presented by the edge
/// piece; `ρ` sits at embedded index `n`.
fn edge_region(n: usize) -> SubsetSpec {
    SubsetSpec::CoordInterval { entries: vec![(0, n)], min: f64::NEG_INFINITY, max: 1.0 }
}

/// The open region `{ρ > 0}` presented by the pair piece.
fn pair_region(n: usize) -> SubsetSpec {
    SubsetSpec::CoordInterval { entries: vec![(0, n)], min: 0.0, max: f64::INFINITY }
}

/// The front face `{ρ = 0}` of the blown-up base.
fn front_region(n: usize) -> SubsetSpec {
    SubsetSpec::OpenPredicate {
        name: "front face".into(),
        pred: Arc::new(move |p: &Point| p.coords[n] == 0.0),
    }
}

/// Chart from blow-up coordinates `(ω, ρ, ℓ)` to edge-piece units
/// `(ω, ℓ, t)`, moving the radial coordinate last.
fn to_edge_chart(total: &CoordinateManifold, edge_units: &CoordinateManifold, n: usize, k: usize) -> SmoothMap {
    SmoothMap::from_fn(total.clone(), edge_units.clone(), move |_b, j| {
        let mut out: Vec<Jet> = j[..n].to_vec();
        out.extend_from_slice(&j[n + 1..n + 1 + k]);
        out.push(j[n].clone());
        Ok((0, out))
    })
}

fn from_edge_chart(edge_units: &CoordinateManifold, total: &CoordinateManifold, n: usize, k: usize) -> SmoothMap {
    SmoothMap::from_fn(edge_units.clone(), total.clone(), move |_b, j| {
        let mut out: Vec<Jet> = j[..n].to_vec();
        out.push(j[n + k].clone());
        out.extend_from_slice(&j[n..n + k]);
        Ok((0, out))
    })
}

/// Identification of an edge arrow with the pair arrow of its endpoints,
/// valid over `t > 0`. Isotropic layout `(ω₁, ℓ, X, t, s, ω₂)`:
/// the arrow runs from `(ω₂, s t, ℓ)` to `(ω₁, t, ℓ + t X)`.
fn edge_to_pair(edge: &LieGroupoid, pair: &LieGroupoid, n: usize, k: usize) -> SmoothMap {
    SmoothMap::from_fn(edge.arrows.clone(), pair.arrows.clone(), move |_b, j| {
        let t = &j[n + 2 * k];
        let s = &j[n + 2 * k + 1];
        let mut out: Vec<Jet> = j[..n].to_vec();
        out.push(t.clone());
        for i in 0..k {
            out.push(&j[n + i] + &(t * &j[n + k + i]));
        }
        out.extend_from_slice(&j[n + 2 * k + 2..]);
        out.push(t * s);
        out.extend_from_slice(&j[n..n + k]);
        Ok((0, out))
    })
}

/// Inverse identification: a pair arrow with `ρ > 0` at its target becomes
/// the edge arrow `(ω₁, ℓ₂, (ℓ₁ − ℓ₂)/ρ₁, ρ₁, ρ₂/ρ₁, ω₂)`.
fn pair_to_edge(pair: &LieGroupoid, edge: &LieGroupoid, n: usize, k: usize) -> SmoothMap {
    let w = n + 1 + k;
    SmoothMap::from_fn(pair.arrows.clone(), edge.arrows.clone(), move |_b, j| {
        let rho1 = &j[n];
        if rho1.v <= 0.0 {
            return Err(Error::Degeneracy(
                "a pair arrow touching the front face has no edge presentation".into(),
            ));
        }
        let inv = rho1.recip();
        let mut out: Vec<Jet> = j[..n].to_vec();
        out.extend_from_slice(&j[w + n + 1..w + n + 1 + k]);
        for i in 0..k {
            out.push(&(&j[n + 1 + i] - &j[w + n + 1 + i]) * &inv);
        }
        out.push(rho1.clone());
        out.push(&j[w + n] * &inv);
        out.extend_from_slice(&j[w..w + n]);
        Ok((0, out))
    })
}

/// Anisotropic identification. Layout `(ω₁, ℓ₁, ℓ₂, ω₂, t, s)`: the arrow
/// runs from `(ω₂, t, ℓ₂)` to `(ω₁, t/s, ℓ₁)`.
fn edge_to_pair_ni(edge: &LieGroupoid, pair: &LieGroupoid, n: usize, k: usize) -> SmoothMap {
    SmoothMap::from_fn(edge.arrows.clone(), pair.arrows.clone(), move |_b, j| {
        let t = &j[2 * n + 2 * k];
        let s = &j[2 * n + 2 * k + 1];
        let mut out: Vec<Jet> = j[..n].to_vec();
        out.push(t * &s.recip());
        out.extend_from_slice(&j[n..n + k]);
        out.extend_from_slice(&j[n + 2 * k..2 * n + 2 * k]);
        out.push(t.clone());
        out.extend_from_slice(&j[n + k..n + 2 * k]);
        Ok((0, out))
    })
}

fn pair_to_edge_ni(pair: &LieGroupoid, edge: &LieGroupoid, n: usize, k: usize) -> SmoothMap {
    let w = n + 1 + k;
    SmoothMap::from_fn(pair.arrows.clone(), edge.arrows.clone(), move |_b, j| {
        let rho1 = &j[n];
        if rho1.v <= 0.0 {
            return Err(Error::Degeneracy(
                "a pair arrow touching the front face has no edge presentation".into(),
            ));
        }
        let mut out: Vec<Jet> = j[..n].to_vec();
        out.extend_from_slice(&j[n + 1..n + 1 + k]);
        out.extend_from_slice(&j[w + n + 1..w + n + 1 + k]);
        out.extend_from_slice(&j[w..w + n]);
        out.push(j[w + n].clone());
        out.push(&j[w + n] * &rho1.recip());
        Ok((0, out))
    })
}

/// Rotation generator pairs of the front face factor, in the order of the
/// tangent frame used by the comparison algebroids. `None` when the front
/// carries no canonical frame.
pub(crate) fn front_rotations(front: Factor) -> Option<Vec<(usize, usize)>> {
    match front {
        Factor::Sphere(p) => {
            let mut pairs = Vec::new();
            for a in 0..p + 1 {
                for b in a + 1..p + 1 {
                    pairs.push((a, b));
                }
            }
            Some(pairs)
        }
        Factor::ClippedSphere(0) => Some(Vec::new()),
        _ => None,
    }
}

/// The source-fiber frame of the glued groupoid along its units, dispatched
/// between the two presentations: rotations of the front sphere, the radial
/// scaling generator, then the locus translations.
fn glued_frame(n: usize, k: usize, rots: Vec<(usize, usize)>, anisotropic: bool) -> UnitFrame {
    let rank = rots.len() + k + 1;
    let we = 2 * n + 2 * k + 2;
    let wp = 2 * (n + 1 + k);
    let eval = Arc::new(move |_b: usize, j: &[Jet]| -> Result<(usize, Vec<Vec<Jet>>)> {
        let rho = &j[n];
        let mut vecs = Vec::with_capacity(rots.len() + k + 1);
        if rho.v < 1.0 {
            // Edge presentation; the unit arrow has fiber coordinates ω on
            // both sides and zero frame coefficients.
            for &(a, b) in &rots {
                let mut v = vec![Jet::zero(); we];
                v[b] = j[a].clone();
                v[a] = -&j[b];
                vecs.push(v);
            }
            if anisotropic {
                let mut v = vec![Jet::zero(); we];
                v[2 * n + 2 * k + 1] = Jet::c(1.0);
                vecs.push(v);
                for i in 0..k {
                    let mut v = vec![Jet::zero(); we];
                    v[n + i] = Jet::c(1.0);
                    vecs.push(v);
                }
            } else {
                let mut v = vec![Jet::zero(); we];
                v[n + 2 * k] = -rho;
                v[n + 2 * k + 1] = Jet::c(1.0);
                vecs.push(v);
                for i in 0..k {
                    let mut v = vec![Jet::zero(); we];
                    v[n + k + i] = Jet::c(1.0);
                    vecs.push(v);
                }
            }
            Ok((0, vecs))
        } else {
            for &(a, b) in &rots {
                let mut v = vec![Jet::zero(); wp];
                v[b] = j[a].clone();
                v[a] = -&j[b];
                vecs.push(v);
            }
            let mut v = vec![Jet::zero(); wp];
            v[n] = -rho;
            vecs.push(v);
            for i in 0..k {
                let mut v = vec![Jet::zero(); wp];
                v[n + 1 + i] = if anisotropic { Jet::c(1.0) } else { rho.clone() };
                vecs.push(v);
            }
            Ok((1, vecs))
        }
    });
    UnitFrame { rank, eval }
}

fn build(l: &TameSubmanifold, label: String, anisotropic: bool) -> Result<Desingularization> {
    let bu = l.blow_up()?;
    let n = l.normal;
    let k = l.locus.blocks[0].embedded_dim();
    let front = bu.total.blocks[0].factors[0];

    let mut s_factors = vec![front];
    s_factors.extend(std::iter::repeat(Factor::Line).take(k));
    let s_mfd = CoordinateManifold::single(
        format!("front({})", l.ambient.name),
        crate::ModelBlock::new(s_factors),
    );
    let front_projection = slice_projection(&s_mfd, &l.locus, (n..n + k).collect())?;

    let h = pair_groupoid(&l.locus);
    let edge = if anisotropic {
        edge_modification_ni(&front_projection, &h)?
    } else {
        edge_modification(&front_projection, &h)?
    };

    let pair_total = pair_groupoid(&bu.total);
    let pair_piece = reduction(&pair_total, &pair_region(n));

    let edge_piece = GluePiece {
        groupoid: edge.clone(),
        region: edge_region(n),
        to_piece: to_edge_chart(&bu.total, &edge.units, n, k),
        from_piece: from_edge_chart(&edge.units, &bu.total, n, k),
    };
    let pair_glue_piece = GluePiece {
        groupoid: pair_piece,
        region: pair_region(n),
        to_piece: SmoothMap::from_fn(bu.total.clone(), bu.total.clone(), |b, j| {
            Ok((b, j.to_vec()))
        }),
        from_piece: SmoothMap::from_fn(bu.total.clone(), bu.total.clone(), |b, j| {
            Ok((b, j.to_vec()))
        }),
    };

    let overlap_edge = SubsetSpec::CoordInterval { entries: vec![(0, n + k)], min: 0.0, max: 1.0 };
    let overlap_pair = SubsetSpec::CoordInterval { entries: vec![(0, n)], min: 0.0, max: 1.0 };
    let (fwd, back) = if anisotropic {
        (
            edge_to_pair_ni(&edge, &pair_total, n, k),
            pair_to_edge_ni(&pair_total, &edge, n, k),
        )
    } else {
        (
            edge_to_pair(&edge, &pair_total, n, k),
            pair_to_edge(&pair_total, &edge, n, k),
        )
    };
    let phi = GroupoidMorphism {
        name: format!("overlap identification of {label}"),
        dom: reduction(&edge, &overlap_edge),
        cod: reduction(&pair_total, &overlap_pair),
        arrow_map: fwd,
        unit_map: from_edge_chart(&edge.units, &bu.total, n, k),
        inverse_arrow_map: Some(back),
    };

    let data = GlueData {
        name: label,
        units: bu.total.clone(),
        pieces: [edge_piece, pair_glue_piece],
        phi,
        preferred: 0,
    };
    let mut groupoid = glue(&data)?;
    if let Some(rots) = front_rotations(front) {
        groupoid.unit_frame = Some(glued_frame(n, k, rots, anisotropic));
    }

    let halfline = CoordinateManifold::halfline();
    let radial_codomain = CoordinateManifold::product(
        format!("[0,inf)x{}", l.locus.name),
        &halfline,
        &l.locus,
    );
    let radial_projection =
        slice_projection(&bu.total, &radial_codomain, (n..n + 1 + k).collect())?;

    Ok(Desingularization {
        groupoid,
        blowup: bu,
        edge,
        front_projection,
        radial_projection,
        locus: l.clone(),
        gluing: data,
        anisotropic,
    })
}

/// Desingularize the pair groupoid `g` of `l.ambient` along the locus: the
/// glued groupoid over the blow-up whose boundary piece is the edge
/// modification of the front face fibration.
pub fn desingularize(g: &LieGroupoid, l: &TameSubmanifold) -> Result<Desingularization> {
    pair_form_check(g, &l.ambient)?;
    build(l, format!("[[{} : {}]]", g.name, l.locus.name), false)
}

/// The anisotropic desingularization: the radial deformation stays an
/// independent scaling factor instead of twisting the locus directions.
pub fn desingularize_ni(g: &LieGroupoid, l: &TameSubmanifold) -> Result<Desingularization> {
    pair_form_check(g, &l.ambient)?;
    build(l, format!("[[{} : {}]]_ni", g.name, l.locus.name), true)
}

/// Desingularize along a corner face of half-line directions. The front
/// face is the clipped sphere of inward directions.
pub fn hyperbolic_desingularize(g: &LieGroupoid, l: &TameSubmanifold) -> Result<Desingularization> {
    if !l.hyperbolic {
        return Err(Error::Unsupported(format!(
            "{:?} is not a corner face; use the spherical desingularization",
            l
        )));
    }
    desingularize(g, l)
}

/// The restriction of the desingularization to the front face, as an
/// isomorphism onto the pullback along the front fibration of the
/// semidirect group bundle `Tℒ ⋊ R₊*`.
pub fn locus_restriction_model(d: &Desingularization) -> Result<GroupoidMorphism> {
    if d.anisotropic {
        return Err(Error::Unsupported(
            "the anisotropic boundary splits off its scaling factor; \
             only the twisted variant matches the semidirect bundle"
                .into(),
        ));
    }
    let n = d.locus.normal;
    let k = d.locus.locus.blocks[0].embedded_dim();
    let dom = reduction(&d.groupoid, &front_region(n));
    let bundle = group_bundle(&d.locus.locus, GroupModel::SemidirectScaling(k))?;
    let cod = pullback_groupoid(&d.front_projection, &bundle)?;

    let arrow_map = SmoothMap::from_fn(
        dom.arrows.clone(),
        cod.arrows.clone(),
        move |b, j| {
            if b != 0 {
                return Err(Error::Degeneracy(
                    "an arrow away from the front face does not restrict".into(),
                ));
            }
            let mut out: Vec<Jet> = j[..n + 2 * k].to_vec();
            out.extend_from_slice(&j[n + 2 * k + 1..]);
            Ok((0, out))
        },
    );
    let unit_map = SmoothMap::from_fn(
        dom.units.clone(),
        cod.units.clone(),
        move |_b, j| {
            let mut out: Vec<Jet> = j[..n].to_vec();
            out.extend_from_slice(&j[n + 1..]);
            Ok((0, out))
        },
    );
    let inverse_arrow_map = Some(SmoothMap::from_fn(
        cod.arrows.clone(),
        dom.arrows.clone(),
        move |_b, j| {
            let mut out: Vec<Jet> = j[..n + 2 * k].to_vec();
            out.push(Jet::zero());
            out.extend_from_slice(&j[n + 2 * k..]);
            Ok((0, out))
        },
    ));

    Ok(GroupoidMorphism {
        name: format!("front face reduction of {}", d.groupoid.name),
        dom,
        cod,
        arrow_map,
        unit_map,
        inverse_arrow_map,
    })
}

/// The restriction of the desingularization away from the front face, as an
/// isomorphism onto the pair groupoid of the base minus the locus.
pub fn off_locus_recovery(d: &Desingularization) -> Result<GroupoidMorphism> {
    let n = d.locus.normal;
    let k = d.locus.locus.blocks[0].embedded_dim();
    let wt = n + 1 + k;
    let dom = reduction(&d.groupoid, &pair_region(n));
    let ambient_pair = pair_groupoid(&d.locus.ambient);
    let radius = d.locus.radius.clone();
    let off = SubsetSpec::OpenPredicate {
        name: "positive distance to the locus".into(),
        pred: Arc::new(move |p: &Point| {
            radius.eval_point(p).map(|r| r.coords[0] > 0.0).unwrap_or(false)
        }),
    };
    let cod = reduction(&ambient_pair, &off);

    let down = d.blowup.blow_down.clone();
    let convert = if d.anisotropic {
        edge_to_pair_ni(&d.edge, &pair_groupoid(&d.blowup.total), n, k)
    } else {
        edge_to_pair(&d.edge, &pair_groupoid(&d.blowup.total), n, k)
    };
    let arrow_map = {
        let down = down.clone();
        SmoothMap::from_fn(dom.arrows.clone(), cod.arrows.clone(), move |b, j| {
            let pair: Vec<Jet> = if b == 0 {
                convert.eval_jets(0, j)?.1
            } else {
                j.to_vec()
            };
            let (_, mut first) = down.eval_jets(0, &pair[..wt])?;
            let (_, second) = down.eval_jets(0, &pair[wt..])?;
            first.extend(second);
            Ok((0, first))
        })
    };
    let unit_map = down.clone();

    let lift = d.blowup.polar_lift.clone();
    let back = if d.anisotropic {
        pair_to_edge_ni(&pair_groupoid(&d.blowup.total), &d.edge, n, k)
    } else {
        pair_to_edge(&pair_groupoid(&d.blowup.total), &d.edge, n, k)
    };
    let e = d.locus.ambient.blocks[0].embedded_dim();
    let inverse_arrow_map = Some(SmoothMap::from_fn(
        cod.arrows.clone(),
        dom.arrows.clone(),
        move |_b, j| {
            let (_, mut first) = lift.eval_jets(0, &j[..e])?;
            let (_, second) = lift.eval_jets(0, &j[e..])?;
            let (rho1, rho2) = (first[n].v, second[n].v);
            first.extend(second);
            if rho1 < 1.0 && rho2 < 1.0 {
                back.eval_jets(0, &first)
            } else {
                Ok((1, first))
            }
        },
    ));

    Ok(GroupoidMorphism {
        name: format!("interior recovery of {}", d.groupoid.name),
        dom,
        cod,
        arrow_map,
        unit_map,
        inverse_arrow_map,
    })
}

/// The comparison morphism from the desingularization onto its anisotropic
/// variant: fiberwise the edge comparison, the identity on the pair piece.
/// Over the interior it is bijective; on the front face it collapses the
/// locus directions, so no inverse exists.
pub fn anisotropy_comparison(
    d: &Desingularization,
    dni: &Desingularization,
) -> Result<GroupoidMorphism> {
    if d.anisotropic || !dni.anisotropic {
        return Err(Error::Shape(
            "the comparison runs from the twisted to the anisotropic variant".into(),
        ));
    }
    if d.blowup.total.blocks != dni.blowup.total.blocks {
        return Err(Error::Shape(
            "the two desingularizations live over different blow-ups".into(),
        ));
    }
    let n = d.locus.normal;
    let k = d.locus.locus.blocks[0].embedded_dim();
    let arrow_map = SmoothMap::from_fn(
        d.groupoid.arrows.clone(),
        dni.groupoid.arrows.clone(),
        move |b, j| {
            if b != 0 {
                return Ok((b, j.to_vec()));
            }
            let t = &j[n + 2 * k];
            let s = &j[n + 2 * k + 1];
            let mut out: Vec<Jet> = j[..n].to_vec();
            for i in 0..k {
                out.push(&j[n + i] + &(t * &j[n + k + i]));
            }
            out.extend_from_slice(&j[n..n + k]);
            out.extend_from_slice(&j[n + 2 * k + 2..]);
            out.push(t * s);
            out.push(s.clone());
            Ok((0, out))
        },
    );
    let unit_map = SmoothMap::from_fn(
        d.groupoid.units.clone(),
        dni.groupoid.units.clone(),
        |b, j| Ok((b, j.to_vec())),
    );
    Ok(GroupoidMorphism {
        name: format!("{} -> {}", d.groupoid.name, dni.groupoid.name),
        dom: d.groupoid.clone(),
        cod: dni.groupoid.clone(),
        arrow_map,
        unit_map,
        inverse_arrow_map: None,
    })
}

/// The model of the codimension-one corner desingularization: the scaling
/// semidirect product of the adiabatic deformation of the locus pair
/// groupoid.
pub fn hyperbolic_model(k: usize) -> Result<LieGroupoid> {
    let h = pair_groupoid(&CoordinateManifold::euclidean(k));
    let ad = adiabatic_groupoid(&h)?;
    semidirect_product(&ad.groupoid, &scaling_action(&ad))
}

/// The anisotropic codimension-one model: the locus pair groupoid times the
/// scaling groupoid of the half-line.
pub fn hyperbolic_model_ni(k: usize) -> LieGroupoid {
    product_groupoid(
        &pair_groupoid(&CoordinateManifold::euclidean(k)),
        &scaling_groupoid(),
    )
}

/// For a codimension-one corner locus the front face is a single point and
/// the desingularization is globally isomorphic to its model; this returns
/// the isomorphism.
pub fn hyperbolic_model_morphism(d: &Desingularization) -> Result<GroupoidMorphism> {
    if !d.locus.hyperbolic || d.locus.normal != 1 {
        return Err(Error::Unsupported(
            "the global model needs a codimension-one corner locus".into(),
        ));
    }
    let k = d.locus.locus.blocks[0].embedded_dim();
    let ni = d.anisotropic;
    let cod = if ni { hyperbolic_model_ni(k) } else { hyperbolic_model(k)? };
    let wt = 2 + k;

    // Block 0 drops the point fibers; block 1 solves for the deformation
    // coordinates of the arrow with the given endpoints.
    let arrow_map = SmoothMap::from_fn(
        d.groupoid.arrows.clone(),
        cod.arrows.clone(),
        move |b, j| {
            if b == 0 {
                if ni {
                    let mut out: Vec<Jet> = j[1..1 + 2 * k].to_vec();
                    out.push(j[2 + 2 * k].clone());
                    out.push(j[3 + 2 * k].clone());
                    return Ok((0, out));
                }
                return Ok((0, j[1..2 * k + 3].to_vec()));
            }
            let rho1 = &j[1];
            if rho1.v <= 0.0 {
                return Err(Error::Degeneracy(
                    "a pair presentation cannot touch the front face".into(),
                ));
            }
            let rho2 = &j[wt + 1];
            let l1 = &j[2..2 + k];
            let l2 = &j[wt + 2..wt + 2 + k];
            let mut out: Vec<Jet> = Vec::with_capacity(2 * k + 2);
            if ni {
                out.extend_from_slice(l1);
                out.extend_from_slice(l2);
                out.push(rho2.clone());
                out.push(rho2 * &rho1.recip());
            } else {
                out.extend_from_slice(l2);
                let inv = rho1.recip();
                for i in 0..k {
                    out.push(&(&l1[i] - &l2[i]) * &inv);
                }
                out.push(rho1.clone());
                out.push(rho2 * &inv);
            }
            Ok((0, out))
        },
    );
    let unit_map = SmoothMap::from_fn(
        d.groupoid.units.clone(),
        cod.units.clone(),
        move |_b, j| {
            let mut out: Vec<Jet> = j[2..].to_vec();
            out.push(j[1].clone());
            Ok((0, out))
        },
    );
    let inverse_arrow_map = Some(SmoothMap::from_fn(
        cod.arrows.clone(),
        d.groupoid.arrows.clone(),
        move |_b, j| {
            let one = Jet::c(1.0);
            if ni {
                let (t, s) = (&j[2 * k], &j[2 * k + 1]);
                let (rt, dt) = (t.v / s.v, t.v);
                if rt < 1.0 && dt < 1.0 {
                    let mut out = vec![one.clone()];
                    out.extend_from_slice(&j[..2 * k]);
                    out.push(one);
                    out.push(t.clone());
                    out.push(s.clone());
                    Ok((0, out))
                } else {
                    let mut out = vec![one.clone()];
                    out.push(t * &s.recip());
                    out.extend_from_slice(&j[..k]);
                    out.push(one);
                    out.push(t.clone());
                    out.extend_from_slice(&j[k..2 * k]);
                    Ok((1, out))
                }
            } else {
                let (t, s) = (&j[2 * k], &j[2 * k + 1]);
                let (rt, dt) = (t.v, t.v * s.v);
                if rt < 1.0 && dt < 1.0 {
                    let mut out = vec![one.clone()];
                    out.extend_from_slice(&j[..2 * k]);
                    out.push(t.clone());
                    out.push(s.clone());
                    out.push(one);
                    Ok((0, out))
                } else {
                    let mut out = vec![one.clone()];
                    out.push(t.clone());
                    for i in 0..k {
                        out.push(&j[i] + &(t * &j[k + i]));
                    }
                    out.push(one);
                    out.push(t * s);
                    out.extend_from_slice(&j[..k]);
                    Ok((1, out))
                }
            }
        },
    ));

    Ok(GroupoidMorphism {
        name: format!("{} as its global model", d.groupoid.name),
        dom: d.groupoid.clone(),
        cod,
        arrow_map,
        unit_map,
        inverse_arrow_map,
    })
}

/// The canonical section of a pair groupoid along a tame locus: `σ(u)` is
/// the arrow from `u` to the point of the locus under it.
pub fn pair_section(g: &LieGroupoid, l: &TameSubmanifold) -> SmoothMap {
    let n = l.normal;
    SmoothMap::from_fn(g.units.clone(), g.arrows.clone(), move |b, j| {
        let mut out = vec![Jet::zero(); n];
        out.extend_from_slice(&j[n..]);
        out.extend_from_slice(j);
        Ok((b, out))
    })
}

/// Conjugate a groupoid over the tube `{radius < 1}` onto the pullback of
/// its restriction to the locus: `γ ↦ σ(r(γ)) · γ · σ(d(γ))⁻¹` together
/// with the normal coordinates of the endpoints. The section must satisfy
/// `d ∘ σ = id` and `r ∘ σ = embedding ∘ tube`, which is verified on
/// samples first.
pub fn canonical_form_check(
    g: &LieGroupoid,
    l: &TameSubmanifold,
    section: &SmoothMap,
    cfg: &crate::groupoid::SuiteConfig,
) -> Result<crate::groupoid::SuiteReport> {
    let n = l.normal;
    let k = l.locus.blocks[0].embedded_dim();
    let e = n + k;
    for i in 0..16u64 {
        let x = g.sample_unit(cfg.seed ^ 0x5ec7, i)?;
        let sx = section.eval_point(&x)?;
        let d = g.source.eval_point(&sx)?;
        let r = g.target.eval_point(&sx)?;
        let slice = l.embedding.eval_point(&l.project(&x))?;
        let dres = sup_distance(&d, &x).unwrap_or(f64::INFINITY);
        let rres = sup_distance(&r, &slice).unwrap_or(f64::INFINITY);
        if dres > PAIR_FORM_TOL || rres > PAIR_FORM_TOL {
            return Err(Error::Constraint(format!(
                "the section violates its contract at {:?}: source residual {:.3e}, \
                 target residual {:.3e}",
                x, dres, rres
            )));
        }
    }

    let ball = {
        let radius = l.radius.clone();
        SubsetSpec::OpenPredicate {
            name: "tube interior".into(),
            pred: Arc::new(move |p: &Point| {
                radius.eval_point(p).map(|r| r.coords[0] < 1.0).unwrap_or(false)
            }),
        }
    };
    let dom = reduction(g, &ball);
    let locus_pair = pair_groupoid(&l.locus);
    let cod = reduction(&pullback_groupoid(&l.tube, &locus_pair)?, &ball);

    let arrow_map = {
        let (gm, sec) = (g.clone(), section.clone());
        let (src, tgt, inv) = (g.source.clone(), g.target.clone(), g.inverse.clone());
        SmoothMap::from_fn(dom.arrows.clone(), cod.arrows.clone(), move |b, j| {
            let (db, dj) = src.eval_jets(b, j)?;
            let (rb, rj) = tgt.eval_jets(b, j)?;
            let sr = sec.eval_jets(rb, &rj)?;
            let sd = sec.eval_jets(db, &dj)?;
            let sdi = inv.eval_jets(sd.0, &sd.1)?;
            let left = (gm.mul)((sr.0, &sr.1), (b, j))?;
            let mid = (gm.mul)((left.0, &left.1), (sdi.0, &sdi.1))?;
            let mut out: Vec<Jet> = j[..n].to_vec();
            out.extend_from_slice(&mid.1[n..n + k]);
            out.extend_from_slice(&mid.1[e + n..e + n + k]);
            out.extend_from_slice(&j[e..e + n]);
            Ok((0, out))
        })
    };
    let unit_map = SmoothMap::from_fn(dom.units.clone(), cod.units.clone(), |b, j| {
        Ok((b, j.to_vec()))
    });
    let inverse_arrow_map = {
        let (gm, sec) = (g.clone(), section.clone());
        let inv = g.inverse.clone();
        Some(SmoothMap::from_fn(
            cod.arrows.clone(),
            dom.arrows.clone(),
            move |_b, j| {
                let ur: Vec<Jet> = j[..n]
                    .iter()
                    .chain(&j[n..n + k])
                    .cloned()
                    .collect();
                let ud: Vec<Jet> = j[n + 2 * k..2 * n + 2 * k]
                    .iter()
                    .chain(&j[n + k..n + 2 * k])
                    .cloned()
                    .collect();
                let mut slice_arrow = vec![Jet::zero(); n];
                slice_arrow.extend_from_slice(&j[n..n + k]);
                slice_arrow.extend(std::iter::repeat_with(Jet::zero).take(n));
                slice_arrow.extend_from_slice(&j[n + k..n + 2 * k]);
                let sr = sec.eval_jets(0, &ur)?;
                let sri = inv.eval_jets(sr.0, &sr.1)?;
                let sd = sec.eval_jets(0, &ud)?;
                let left = (gm.mul)((sri.0, &sri.1), (0, &slice_arrow))?;
                (gm.mul)((left.0, &left.1), (sd.0, &sd.1))
            },
        ))
    };

    let m = GroupoidMorphism {
        name: format!("tube normal form of {}", g.name),
        dom,
        cod,
        arrow_map,
        unit_map,
        inverse_arrow_map,
    };
    crate::groupoid::morphism_suite(&m, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::morphism::morphism_suite;
    use crate::groupoid::suite::{axiom_suite, SuiteConfig};
    use crate::groupoid::GroupModel;

    fn quick(pairs: usize, triples: usize) -> SuiteConfig {
        SuiteConfig { pairs, triples, ..Default::default() }
    }

    #[test]
    fn slice_desingularization_satisfies_the_axioms() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let g = pair_groupoid(&l.ambient);
        let d = desingularize(&g, &l).unwrap();
        assert_eq!(d.groupoid.units.blocks, d.blowup.total.blocks);
        assert_eq!(d.groupoid.rank(), Some(3));
        let report = axiom_suite(&d.groupoid, &quick(150, 80)).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn anisotropic_variant_satisfies_the_axioms_and_receives_the_comparison() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let g = pair_groupoid(&l.ambient);
        let d = desingularize(&g, &l).unwrap();
        let dni = desingularize_ni(&g, &l).unwrap();
        let report = axiom_suite(&dni.groupoid, &quick(100, 50)).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
        let psi = anisotropy_comparison(&d, &dni).unwrap();
        let mreport = morphism_suite(&psi, &quick(120, 0)).unwrap();
        assert!(mreport.ok, "{:#?}", mreport.laws);
    }

    #[test]
    fn front_face_restriction_is_the_semidirect_bundle_pullback() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let g = pair_groupoid(&l.ambient);
        let d = desingularize(&g, &l).unwrap();
        let m = locus_restriction_model(&d).unwrap();
        let report = morphism_suite(&m, &quick(100, 0)).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn interior_restriction_recovers_the_pair_groupoid() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let g = pair_groupoid(&l.ambient);
        for d in [desingularize(&g, &l).unwrap(), desingularize_ni(&g, &l).unwrap()] {
            let m = off_locus_recovery(&d).unwrap();
            let report = morphism_suite(&m, &quick(100, 0)).unwrap();
            assert!(report.ok, "{}: {:#?}", d.groupoid.name, report.laws);
        }
    }

    #[test]
    fn corner_desingularization_matches_its_global_model() {
        let l = TameSubmanifold::corner_face(1, 2).unwrap();
        let g = pair_groupoid(&l.ambient);
        let d = hyperbolic_desingularize(&g, &l).unwrap();
        let m = hyperbolic_model_morphism(&d).unwrap();
        let report = morphism_suite(&m, &quick(120, 0)).unwrap();
        assert!(report.ok, "{:#?}", report.laws);

        let dni = desingularize_ni(&g, &l).unwrap();
        let mni = hyperbolic_model_morphism(&dni).unwrap();
        let nireport = morphism_suite(&mni, &quick(120, 0)).unwrap();
        assert!(nireport.ok, "{:#?}", nireport.laws);
    }

    #[test]
    fn tube_normal_form_holds_for_the_pair_groupoid() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let g = pair_groupoid(&l.ambient);
        let sec = pair_section(&g, &l);
        let report = canonical_form_check(&g, &l, &sec, &quick(100, 0)).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn non_pair_presentations_are_rejected() {
        let l = TameSubmanifold::linear_slice(2, 1).unwrap();
        let b = group_bundle(&l.ambient, GroupModel::Translation(3)).unwrap();
        match desingularize(&b, &l) {
            Err(Error::Unsupported(msg)) => {
                assert!(msg.contains("pair groupoid"), "{msg}")
            }
            other => panic!("expected a presentation rejection, got {other:?}"),
        }
    }
}

