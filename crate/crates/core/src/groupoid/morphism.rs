//! Morphisms of Lie groupoids and their verification suite.

use rayon::prelude::*;

use crate::geometry::map::SmoothMap;
use crate::groupoid::suite::{SuiteConfig, SuiteReport};
use crate::groupoid::{sup_distance, LieGroupoid};
use crate::{Point, Result};

/// A morphism of Lie groupoids: compatible maps on arrows and units. An
/// optional inverse on arrows upgrades the suite to an isomorphism check.
#[derive(Clone, Debug)]
pub struct GroupoidMorphism {
    pub name: String,
    pub dom: LieGroupoid,
    pub cod: LieGroupoid,
    pub arrow_map: SmoothMap,
    pub unit_map: SmoothMap,
    pub inverse_arrow_map: Option<SmoothMap>,
}

fn residual(a: &Point, b: &Point) -> f64 {
    sup_distance(a, b).unwrap_or(f64::INFINITY)
}

const LAWS: [&str; 7] = [
    "unit compatibility",
    "source compatibility",
    "target compatibility",
    "multiplicativity",
    "inverse compatibility",
    "inverse round trip",
    "image constraints",
];

/// Verify that `m` is a groupoid morphism on deterministic samples of its
/// domain; with an inverse arrow map present, also that it is a bijection
/// onto the sampled arrows.
pub fn morphism_suite(m: &GroupoidMorphism, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let observations: Vec<Vec<(usize, f64, Option<String>)>> = (0..cfg.pairs as u64)
        .into_par_iter()
        .map(|i| observations_at(m, cfg.seed, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::assemble(
        m.name.clone(),
        cfg.tol,
        cfg.pairs,
        0,
        &LAWS,
        observations,
    ))
}

fn observations_at(
    m: &GroupoidMorphism,
    seed: u64,
    i: u64,
) -> Result<Vec<(usize, f64, Option<String>)>> {
    let mut obs: Vec<(usize, f64, Option<String>)> = Vec::new();
    let mut record = |law: usize, r: f64, detail: String| {
        let witness = if r > 0.0 { Some(format!("sample {i}: {detail}")) } else { None };
        obs.push((law, r, witness));
    };

    let x = m.dom.sample_unit(seed, i)?;
    let fx = m.unit_map.eval_point(&x)?;
    let r0 = residual(
        &m.arrow_map.eval_point(&m.dom.unit.eval_point(&x)?)?,
        &m.cod.unit.eval_point(&fx)?,
    );
    record(0, r0, format!("arrow_map(u({x:?})) != u(unit_map({x:?}))"));

    let (g, h) = m.dom.sample_composable_pair(seed, i)?;
    let fg = m.arrow_map.eval_point(&g)?;
    let fh = m.arrow_map.eval_point(&h)?;

    let mut constraint = m.cod.arrows.blocks[fg.block].constraint_violation(&fg.coords);
    constraint = constraint.max(m.cod.units.blocks[fx.block].constraint_violation(&fx.coords));
    record(6, constraint, "image off the codomain manifolds".to_string());

    let r1 = residual(
        &m.cod.source.eval_point(&fg)?,
        &m.unit_map.eval_point(&m.dom.source.eval_point(&g)?)?,
    );
    record(1, r1, format!("source of image at g = {g:?}"));
    let r2 = residual(
        &m.cod.target.eval_point(&fg)?,
        &m.unit_map.eval_point(&m.dom.target.eval_point(&g)?)?,
    );
    record(2, r2, format!("target of image at g = {g:?}"));

    let r3 = residual(
        &m.arrow_map.eval_point(&m.dom.mul_points(&g, &h)?)?,
        &m.cod.mul_points(&fg, &fh)?,
    );
    record(3, r3, format!("multiplicativity at g = {g:?}, h = {h:?}"));

    let r4 = residual(
        &m.arrow_map.eval_point(&m.dom.inverse.eval_point(&g)?)?,
        &m.cod.inverse.eval_point(&fg)?,
    );
    record(4, r4, format!("inverse compatibility at g = {g:?}"));

    if let Some(back) = &m.inverse_arrow_map {
        let r5 = residual(&back.eval_point(&fg)?, &g);
        record(5, r5, format!("round trip at g = {g:?}"));
    }
    Ok(obs)
}
