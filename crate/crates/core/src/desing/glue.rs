//! Gluing two groupoid presentations over an open cover of a common unit
//! space. Arrows live in whichever piece presents them; a canonical choice
//! resolves the overlap, and multiplication converts factors across the
//! identification when they arrive in different presentations.

use std::sync::Arc;

use rand::Rng;

use crate::algebroid::PropertyReport;
use crate::geometry::manifold::{CoordinateManifold, Point};
use crate::geometry::map::SmoothMap;
use crate::geometry::sample::rng_for;
use crate::groupoid::reduction::{reduction, SubsetSpec};
use crate::groupoid::suite::LawResult;
use crate::groupoid::{
    default_unit_sampler, jets_match, sup_distance, FiberSamplerFn, GroupoidMorphism,
    LieGroupoid, MulFn,
};
use crate::jet::{self, Jet};
use crate::{Error, Result};

/// One half of a gluing: a groupoid presenting the glued object over an
/// open region of the shared unit space, with charts between the region
/// and the piece's own unit coordinates.
#[derive(Clone)]
pub struct GluePiece {
    pub groupoid: LieGroupoid,
    /// The glued units this piece presents.
    pub region: SubsetSpec,
    /// Chart from glued units in the region into the piece's units.
    pub to_piece: SmoothMap,
    /// Inverse chart back to glued units.
    pub from_piece: SmoothMap,
}

/// The data of a two-piece gluing. `phi` identifies the two presentations
/// over the overlap of the regions: a morphism from the first piece's
/// reduction to the overlap into the second piece, invertible on arrows.
#[derive(Clone)]
pub struct GlueData {
    pub name: String,
    pub units: CoordinateManifold,
    pub pieces: [GluePiece; 2],
    pub phi: GroupoidMorphism,
    /// Index of the piece holding the canonical representative of an arrow
    /// representable in both.
    pub preferred: usize,
}

/// Budget of the sampled gluing-hypothesis check.
#[derive(Clone, Debug)]
pub struct GlueConfig {
    pub seed: u64,
    /// Orbit scans started from distinct sampled units.
    pub units: usize,
    /// Composition depth of each orbit scan.
    pub depth: usize,
    /// Arrows sampled out of every reached point.
    pub branching: usize,
    pub tol: f64,
}

impl Default for GlueConfig {
    fn default() -> Self {
        GlueConfig { seed: 0x91ce, units: 24, depth: 3, branching: 5, tol: 1e-9 }
    }
}

/// Canonicalization closure: glued arrow block and jets to the canonical
/// representation of the same arrow.
type CanonFn = Arc<dyn Fn(usize, Vec<Jet>) -> Result<(usize, Vec<Jet>)> + Send + Sync>;

pub(crate) struct GluedParts {
    pub groupoid: LieGroupoid,
    pub canon: CanonFn,
    /// Arrow-block count of the first piece: blocks `>= n0` belong to the
    /// second.
    pub n0: usize,
}

fn validate(data: &GlueData) -> Result<()> {
    if data.preferred > 1 {
        return Err(Error::Shape(format!(
            "preferred piece {} out of range",
            data.preferred
        )));
    }
    if data.phi.inverse_arrow_map.is_none() {
        return Err(Error::Shape(
            "gluing needs an invertible overlap identification".into(),
        ));
    }
    Ok(())
}

/// Convert an arrow across the identification: `dir01` converts a
/// first-piece arrow into the second piece.
fn convert(
    phi_fwd: &SmoothMap,
    phi_inv: &SmoothMap,
    dir01: bool,
    b: usize,
    j: &[Jet],
) -> Result<(usize, Vec<Jet>)> {
    if dir01 {
        phi_fwd.eval_jets(b, j)
    } else {
        phi_inv.eval_jets(b, j)
    }
}

pub(crate) fn assemble(data: &GlueData) -> Result<GluedParts> {
    validate(data)?;
    let p0 = &data.pieces[0];
    let p1 = &data.pieces[1];
    let n0 = p0.groupoid.arrows.blocks.len();
    let mut blocks = p0.groupoid.arrows.blocks.clone();
    blocks.extend(p1.groupoid.arrows.blocks.iter().cloned());
    let arrows = CoordinateManifold::new(format!("{} arrows", data.name), blocks)?;
    let units = data.units.clone();

    let endpoint = |m0: SmoothMap, c0: SmoothMap, m1: SmoothMap, c1: SmoothMap| -> SmoothMap {
        SmoothMap::from_fn(arrows.clone(), units.clone(), move |b, j| {
            if b < n0 {
                let (ub, uj) = m0.eval_jets(b, j)?;
                c0.eval_jets(ub, &uj)
            } else {
                let (ub, uj) = m1.eval_jets(b - n0, j)?;
                c1.eval_jets(ub, &uj)
            }
        })
    };
    let source = endpoint(
        p0.groupoid.source.clone(),
        p0.from_piece.clone(),
        p1.groupoid.source.clone(),
        p1.from_piece.clone(),
    );
    let target = endpoint(
        p0.groupoid.target.clone(),
        p0.from_piece.clone(),
        p1.groupoid.target.clone(),
        p1.from_piece.clone(),
    );

    let regions = [p0.region.clone(), p1.region.clone()];
    let to_piece = [p0.to_piece.clone(), p1.to_piece.clone()];
    let offsets = [0usize, n0];
    let pref = data.preferred;

    let unit = {
        let regions = regions.clone();
        let to_piece = to_piece.clone();
        let part_units = [p0.groupoid.unit.clone(), p1.groupoid.unit.clone()];
        let (units_m, arrows_m) = (units.clone(), arrows.clone());
        SmoothMap::from_fn(units_m, arrows_m, move |b, j| {
            let x = Point::new(b, jet::values(j));
            let piece = if regions[pref].contains(&x) {
                pref
            } else if regions[1 - pref].contains(&x) {
                1 - pref
            } else {
                return Err(Error::Constraint(format!(
                    "glued unit {:?} lies in neither region",
                    x
                )));
            };
            let (ub, uj) = to_piece[piece].eval_jets(b, j)?;
            let (ab, aj) = part_units[piece].eval_jets(ub, &uj)?;
            Ok((ab + offsets[piece], aj))
        })
    };

    let inverse = {
        let invs = [p0.groupoid.inverse.clone(), p1.groupoid.inverse.clone()];
        let (am, am2) = (arrows.clone(), arrows.clone());
        SmoothMap::from_fn(am, am2, move |b, j| {
            let piece = usize::from(b >= n0);
            let (ab, aj) = invs[piece].eval_jets(b - offsets[piece], j)?;
            Ok((ab + offsets[piece], aj))
        })
    };

    // Canonical representation rule: an arrow is stored in the preferred
    // piece exactly when both endpoints lie in the preferred region, and in
    // the other piece when both lie in the other region only. A piece may
    // produce arrows whose endpoints leave its region; the identification
    // must extend smoothly to those so they can be re-housed.
    let canon: CanonFn = {
        let (src, tgt) = (source.clone(), target.clone());
        let regions = regions.clone();
        let (phi_fwd, phi_inv) = (
            data.phi.arrow_map.clone(),
            data.phi.inverse_arrow_map.clone().unwrap(),
        );
        Arc::new(move |b: usize, j: Vec<Jet>| {
            let piece = usize::from(b >= n0);
            let (db, dj) = src.eval_jets(b, &j)?;
            let (rb, rj) = tgt.eval_jets(b, &j)?;
            let d = Point::new(db, jet::values(&dj));
            let r = Point::new(rb, jet::values(&rj));
            let in_pref = regions[pref].contains(&d) && regions[pref].contains(&r);
            let canonical = if in_pref {
                pref
            } else if regions[1 - pref].contains(&d) && regions[1 - pref].contains(&r) {
                1 - pref
            } else {
                return Err(Error::GlueHypothesis(format!(
                    "arrow endpoints {:?} and {:?} fit in neither piece's region",
                    d, r
                )));
            };
            if piece == canonical {
                return Ok((b, j));
            }
            let (cb, cj) = convert(&phi_fwd, &phi_inv, piece == 0, b - offsets[piece], &j)?;
            Ok((cb + offsets[canonical], cj))
        })
    };

    let mul: MulFn = {
        let (src, tgt) = (source.clone(), target.clone());
        let regions = regions.clone();
        let muls = [p0.groupoid.mul.clone(), p1.groupoid.mul.clone()];
        let (phi_fwd, phi_inv) = (
            data.phi.arrow_map.clone(),
            data.phi.inverse_arrow_map.clone().unwrap(),
        );
        let canon = canon.clone();
        Arc::new(move |(bg, jg): (usize, &[Jet]), (bh, jh): (usize, &[Jet])| {
            let pg = usize::from(bg >= n0);
            let ph = usize::from(bh >= n0);
            let (db, dj) = src.eval_jets(bg, jg)?;
            let (rb, rj) = tgt.eval_jets(bh, jh)?;
            jets_match((db, &dj), (rb, &rj))?;
            let (pb, pj) = if pg == ph {
                let (b, j) = muls[pg]((bg - offsets[pg], jg), (bh - offsets[ph], jh))?;
                (b + offsets[pg], j)
            } else {
                let rg = tgt.eval_jets(bg, jg)?;
                let dh = src.eval_jets(bh, jh)?;
                let rg_pt = Point::new(rg.0, jet::values(&rg.1));
                let dh_pt = Point::new(dh.0, jet::values(&dh.1));
                if regions[ph].contains(&rg_pt) {
                    // g also lives in h's piece: d(g) = r(h) is already there.
                    let (cb, cj) = convert(&phi_fwd, &phi_inv, pg == 0, bg - offsets[pg], jg)?;
                    let (b, j) = muls[ph]((cb, &cj), (bh - offsets[ph], jh))?;
                    (b + offsets[ph], j)
                } else if regions[pg].contains(&dh_pt) {
                    let (cb, cj) = convert(&phi_fwd, &phi_inv, ph == 0, bh - offsets[ph], jh)?;
                    let (b, j) = muls[pg]((bg - offsets[pg], jg), (cb, &cj))?;
                    (b + offsets[pg], j)
                } else {
                    return Err(Error::GlueHypothesis(format!(
                        "factors admit no common presentation: endpoints {:?} and {:?} \
                         lie in different pieces only",
                        rg_pt, dh_pt
                    )));
                }
            };
            canon(pb, pj)
        })
    };

    let dfiber: FiberSamplerFn = {
        let regions = regions.clone();
        let to_piece = to_piece.clone();
        let fibers = [
            p0.groupoid.dfiber_sampler.clone(),
            p1.groupoid.dfiber_sampler.clone(),
        ];
        let canon = canon.clone();
        Arc::new(move |x: &Point, seed, index| {
            let in0 = regions[0].contains(x);
            let in1 = regions[1].contains(x);
            let piece = match (in0, in1) {
                (true, false) => 0,
                (false, true) => 1,
                (true, true) => usize::from(rng_for(seed ^ 0x672e, index).gen::<bool>()),
                (false, false) => {
                    return Err(Error::Sampling(format!(
                        "glued unit {:?} lies in neither region",
                        x
                    )))
                }
            };
            let xp = to_piece[piece].eval_point(x)?;
            let arrow = fibers[piece](&xp, seed, index)?;
            let (cb, cj) = canon(arrow.block + offsets[piece], jet::constants(&arrow.coords))?;
            Ok(Point::new(cb, jet::values(&cj)))
        })
    };

    let groupoid = LieGroupoid {
        name: data.name.clone(),
        arrows,
        units: units.clone(),
        source,
        target,
        unit,
        inverse,
        mul,
        unit_sampler: default_unit_sampler(&units),
        dfiber_sampler: dfiber,
        unit_frame: None,
        exp: None,
        log: None,
        fiber_chart: None,
    };
    Ok(GluedParts { groupoid, canon, n0 })
}

/// Glue the two pieces. The sampled gluing-hypothesis check runs first and
/// a violation aborts the construction with a witness.
pub fn glue(data: &GlueData) -> Result<LieGroupoid> {
    let parts = assemble(data)?;
    let report = hypothesis_scan(&parts.groupoid, data, &GlueConfig::default())?;
    if !report.ok {
        let witness = report
            .laws
            .iter()
            .find(|l| l.max_residual > report.tol)
            .map(|l| {
                format!(
                    "{}: {}",
                    l.law,
                    l.witness.clone().unwrap_or_else(|| "no witness".into())
                )
            })
            .unwrap_or_else(|| "unknown violation".into());
        return Err(Error::GlueHypothesis(witness));
    }
    Ok(parts.groupoid)
}

/// Run the sampled gluing-hypothesis check without building the result:
/// orbit scans must never connect units exclusive to one piece with units
/// exclusive to the other, and the overlap identification must be a
/// bijection compatible with endpoints. The verdict is sampled, not proved.
pub fn check_glue_hypothesis(data: &GlueData, cfg: &GlueConfig) -> Result<PropertyReport> {
    let parts = assemble(data)?;
    hypothesis_scan(&parts.groupoid, data, cfg)
}

fn hypothesis_scan(
    glued: &LieGroupoid,
    data: &GlueData,
    cfg: &GlueConfig,
) -> Result<PropertyReport> {
    let mut laws = vec![
        LawResult { law: "orbit dichotomy (sampled)".into(), max_residual: 0.0, witness: None },
        LawResult { law: "regions cover sampled orbits".into(), max_residual: 0.0, witness: None },
        LawResult { law: "identification round trip".into(), max_residual: 0.0, witness: None },
        LawResult { law: "identification endpoints".into(), max_residual: 0.0, witness: None },
    ];
    let regions = [&data.pieces[0].region, &data.pieces[1].region];

    for u in 0..cfg.units as u64 {
        let start = match glued.sample_unit(cfg.seed, u) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let mut frontier = vec![start.clone()];
        let mut only0: Option<Point> = None;
        let mut only1: Option<Point> = None;
        let mut visit = |p: &Point, laws: &mut Vec<LawResult>| {
            let in0 = regions[0].contains(p);
            let in1 = regions[1].contains(p);
            if !in0 && !in1 && laws[1].max_residual == 0.0 {
                laws[1].max_residual = 1.0;
                laws[1].witness = Some(format!("{:?} escapes both regions", p));
            }
            if in0 && !in1 && only0.is_none() {
                only0 = Some(p.clone());
            }
            if in1 && !in0 && only1.is_none() {
                only1 = Some(p.clone());
            }
        };
        visit(&start, &mut laws);
        for step in 0..cfg.depth as u64 {
            let mut next = Vec::new();
            for (pi, p) in frontier.iter().enumerate() {
                for br in 0..cfg.branching as u64 {
                    let salt = cfg
                        .seed
                        .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(
                            1 + step + 31 * br + 1021 * pi as u64 + 65_537 * u,
                        ));
                    let arrow = match (glued.dfiber_sampler)(p, salt, br) {
                        Ok(a) => a,
                        Err(_) => continue,
                    };
                    if let Ok(r) = glued.target.eval_point(&arrow) {
                        visit(&r, &mut laws);
                        next.push(r);
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        if let (Some(a), Some(b)) = (&only0, &only1) {
            if laws[0].max_residual == 0.0 {
                laws[0].max_residual = 1.0;
                laws[0].witness = Some(format!(
                    "one orbit reaches {:?} (first piece only) and {:?} (second piece only)",
                    a, b
                ));
            }
        }
    }

    // Identification: sampled round trips and endpoint compatibility
    // through the unit charts.
    let phi = &data.phi;
    let inv = phi.inverse_arrow_map.as_ref().unwrap();
    for i in 0..cfg.units as u64 {
        let g = match phi.dom.sample_arrow(cfg.seed ^ 0x0f1a, i) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let fwd = phi.arrow_map.eval_point(&g)?;
        let back = inv.eval_point(&fwd)?;
        let r = sup_distance(&g, &back).unwrap_or(f64::INFINITY);
        if r > laws[2].max_residual {
            laws[2].max_residual = r;
            laws[2].witness = Some(format!("arrow {:?}", g));
        }
        for (m0, m1) in [
            (&data.pieces[0].groupoid.source, &data.pieces[1].groupoid.source),
            (&data.pieces[0].groupoid.target, &data.pieces[1].groupoid.target),
        ] {
            let e0 = data.pieces[0].from_piece.eval_point(&m0.eval_point(&g)?)?;
            let e1 = data.pieces[1].from_piece.eval_point(&m1.eval_point(&fwd)?)?;
            let r = sup_distance(&e0, &e1).unwrap_or(f64::INFINITY);
            if r > laws[3].max_residual {
                laws[3].max_residual = r;
                laws[3].witness = Some(format!("arrow {:?}", g));
            }
        }
    }

    let ok = laws.iter().all(|l| l.max_residual <= cfg.tol);
    for l in &mut laws {
        if l.max_residual <= cfg.tol {
            l.witness = None;
        }
    }
    Ok(PropertyReport {
        subject: format!("gluing hypothesis for {} (sampled)", data.name),
        tol: cfg.tol,
        points: cfg.units,
        laws,
        ok,
    })
}

/// The reduction of the glued groupoid to one piece's region, mapped back
/// onto that piece: an isomorphism witnessing that gluing loses nothing.
pub fn piece_recovery(data: &GlueData, piece: usize) -> Result<GroupoidMorphism> {
    if piece > 1 {
        return Err(Error::Shape(format!("piece {piece} out of range")));
    }
    let parts = assemble(data)?;
    let n0 = parts.n0;
    let p = &data.pieces[piece];
    let dom = reduction(&parts.groupoid, &p.region);
    let cod = p.groupoid.clone();
    let offsets = [0usize, n0];
    let off = offsets[piece];

    let (phi_fwd, phi_inv) = (
        data.phi.arrow_map.clone(),
        data.phi.inverse_arrow_map.clone().unwrap(),
    );
    let arrow_map = {
        let (pf, pi) = (phi_fwd, phi_inv);
        SmoothMap::from_fn(dom.arrows.clone(), cod.arrows.clone(), move |b, j| {
            let from = usize::from(b >= n0);
            if from == piece {
                Ok((b - off, j.to_vec()))
            } else {
                convert(&pf, &pi, from == 0, b - offsets[from], j)
            }
        })
    };
    let unit_map = p.to_piece.clone();
    let inverse_arrow_map = {
        let canon = parts.canon.clone();
        Some(SmoothMap::from_fn(
            cod.arrows.clone(),
            dom.arrows.clone(),
            move |b, j| canon(b + off, j.to_vec()),
        ))
    };

    Ok(GroupoidMorphism {
        name: format!("{} restricted to its piece {}", data.name, piece),
        dom,
        cod,
        arrow_map,
        unit_map,
        inverse_arrow_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::basic::{group_bundle, pair_groupoid, GroupModel};
    use crate::groupoid::morphism::morphism_suite;
    use crate::groupoid::suite::{axiom_suite, SuiteConfig};
    use crate::CoordinateManifold;

    fn identity_map(m: &CoordinateManifold) -> SmoothMap {
        SmoothMap::from_fn(m.clone(), m.clone(), |b, j| Ok((b, j.to_vec())))
    }

    fn interval(min: f64, max: f64) -> SubsetSpec {
        SubsetSpec::CoordInterval { entries: vec![(0, 0)], min, max }
    }

    fn bundle_glue_data() -> GlueData {
        // Two translation bundles over R, glued over the strip (0, 1): every
        // orbit is a single base point, so the hypothesis holds.
        let line = CoordinateManifold::euclidean(1);
        let g = group_bundle(&line, GroupModel::Translation(1)).unwrap();
        let left = GluePiece {
            groupoid: g.clone(),
            region: interval(f64::NEG_INFINITY, 1.0),
            to_piece: identity_map(&line),
            from_piece: identity_map(&line),
        };
        let right = GluePiece {
            groupoid: g.clone(),
            region: interval(0.0, f64::INFINITY),
            to_piece: identity_map(&line),
            from_piece: identity_map(&line),
        };
        let overlap_l = reduction(&g, &interval(0.0, 1.0));
        let overlap_r = overlap_l.clone();
        let phi = GroupoidMorphism {
            name: "overlap identity".into(),
            dom: overlap_l,
            cod: overlap_r,
            arrow_map: identity_map(&g.arrows),
            unit_map: identity_map(&line),
            inverse_arrow_map: Some(identity_map(&g.arrows)),
        };
        GlueData {
            name: "line bundle glued from two strips".into(),
            units: line,
            pieces: [left, right],
            phi,
            preferred: 0,
        }
    }

    #[test]
    fn confined_orbits_glue_and_satisfy_axioms() {
        let data = bundle_glue_data();
        let glued = glue(&data).unwrap();
        let cfg = SuiteConfig { pairs: 150, triples: 80, ..Default::default() };
        let report = axiom_suite(&glued, &cfg).unwrap();
        assert!(report.ok, "{:#?}", report.laws);
    }

    #[test]
    fn recovery_onto_each_piece_is_a_morphism() {
        let data = bundle_glue_data();
        for piece in 0..2 {
            let rec = piece_recovery(&data, piece).unwrap();
            let cfg = SuiteConfig { pairs: 120, triples: 0, ..Default::default() };
            let report = morphism_suite(&rec, &cfg).unwrap();
            assert!(report.ok, "piece {piece}: {:#?}", report.laws);
        }
    }

    #[test]
    fn pair_groupoids_on_overlapping_intervals_are_rejected() {
        // Both pieces are pair groupoids of the whole line, so one orbit
        // connects the exclusive parts of the two regions through the
        // overlap; the glued object would need arrows neither piece holds.
        let line = CoordinateManifold::euclidean(1);
        let g = pair_groupoid(&line);
        let left = GluePiece {
            groupoid: g.clone(),
            region: interval(f64::NEG_INFINITY, 1.0),
            to_piece: identity_map(&line),
            from_piece: identity_map(&line),
        };
        let right = GluePiece {
            groupoid: g.clone(),
            region: interval(0.0, f64::INFINITY),
            to_piece: identity_map(&line),
            from_piece: identity_map(&line),
        };
        let overlap = reduction(&g, &interval(0.0, 1.0));
        let phi = GroupoidMorphism {
            name: "overlap identity".into(),
            dom: overlap.clone(),
            cod: overlap,
            arrow_map: identity_map(&g.arrows),
            unit_map: identity_map(&line),
            inverse_arrow_map: Some(identity_map(&g.arrows)),
        };
        let data = GlueData {
            name: "pair groupoid glued from two half-lines".into(),
            units: line,
            pieces: [left, right],
            phi,
            preferred: 0,
        };
        let err = glue(&data).unwrap_err();
        match err {
            Error::GlueHypothesis(w) => {
                assert!(w.contains("orbit"), "witness should name the orbit law: {w}")
            }
            other => panic!("expected a gluing-hypothesis rejection, got {other:?}"),
        }
    }
}
