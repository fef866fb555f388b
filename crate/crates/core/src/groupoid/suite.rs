//! Numerical verification of the groupoid axioms on deterministic samples.

use rayon::prelude::*;

use crate::groupoid::{sup_distance, LieGroupoid};
use crate::{Error, Point, Result};

/// Sample sizes, seed and tolerance of an axiom suite run.
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub pairs: usize,
    pub triples: usize,
    pub tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0x5eed, pairs: 500, triples: 200, tol: 1e-10 }
    }
}

/// Result for a single law: the worst residual seen and where.
#[derive(Clone, Debug)]
pub struct LawResult {
    pub law: String,
    pub max_residual: f64,
    pub witness: Option<String>,
}

/// Outcome of an axiom or morphism suite.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub subject: String,
    pub tol: f64,
    pub pairs_checked: usize,
    pub triples_checked: usize,
    pub laws: Vec<LawResult>,
    pub ok: bool,
}

impl SuiteReport {
    pub fn max_residual(&self) -> f64 {
        self.laws.iter().map(|l| l.max_residual).fold(0.0, f64::max)
    }

    /// Merge per-sample observations `(law index, residual, witness)` into a
    /// final report. Aggregation is index-ordered, so the result does not
    /// depend on evaluation order or thread count.
    pub(crate) fn assemble(
        subject: String,
        tol: f64,
        pairs_checked: usize,
        triples_checked: usize,
        law_names: &[&str],
        observations: Vec<Vec<(usize, f64, Option<String>)>>,
    ) -> SuiteReport {
        let mut laws: Vec<LawResult> = law_names
            .iter()
            .map(|n| LawResult { law: (*n).to_string(), max_residual: 0.0, witness: None })
            .collect();
        for per_sample in observations {
            for (law, residual, witness) in per_sample {
                let entry = &mut laws[law];
                if residual > entry.max_residual {
                    entry.max_residual = residual;
                    entry.witness = witness;
                }
            }
        }
        let ok = laws.iter().all(|l| l.max_residual <= tol);
        // Witnesses are only interesting for failures.
        for l in &mut laws {
            if l.max_residual <= tol {
                l.witness = None;
            }
        }
        SuiteReport { subject, tol, pairs_checked, triples_checked, laws, ok }
    }
}

/// Distance between two points that ought to coincide; block mismatches
/// count as infinite.
fn residual(a: &Point, b: &Point) -> f64 {
    sup_distance(a, b).unwrap_or(f64::INFINITY)
}

/// A product whose failure indicts the law under test rather than the test
/// harness: composability and constraint errors become law violations.
fn try_mul(
    gpd: &LieGroupoid,
    a: &Point,
    b: &Point,
) -> Result<std::result::Result<Point, String>> {
    match gpd.mul_points(a, b) {
        Ok(p) => Ok(Ok(p)),
        Err(Error::NotComposable(m)) | Err(Error::Constraint(m)) => Ok(Err(m)),
        Err(e) => Err(e),
    }
}

const LAWS: [&str; 10] = [
    "unit endpoints",
    "manifold constraints",
    "product endpoints",
    "left identity",
    "right identity",
    "inverse products",
    "inverse endpoints",
    "double inverse",
    "composability of samples",
    "associativity",
];

/// Verify the groupoid axioms of `g` on `cfg.pairs` composable pairs and
/// `cfg.triples` composable triples drawn deterministically from `cfg.seed`.
/// Violations are reported with witnesses; only sampling or evaluation
/// breakdowns produce an error.
pub fn axiom_suite(gpd: &LieGroupoid, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let pair_obs: Vec<Vec<(usize, f64, Option<String>)>> = (0..cfg.pairs as u64)
        .into_par_iter()
        .map(|i| pair_observations(gpd, cfg.seed, i))
        .collect::<Result<Vec<_>>>()?;
    let triple_obs: Vec<Vec<(usize, f64, Option<String>)>> = (0..cfg.triples as u64)
        .into_par_iter()
        .map(|i| triple_observations(gpd, cfg.seed, i))
        .collect::<Result<Vec<_>>>()?;

    let mut observations = pair_obs;
    observations.extend(triple_obs);
    Ok(SuiteReport::assemble(
        gpd.name.clone(),
        cfg.tol,
        cfg.pairs,
        cfg.triples,
        &LAWS,
        observations,
    ))
}

fn pair_observations(
    gpd: &LieGroupoid,
    seed: u64,
    i: u64,
) -> Result<Vec<(usize, f64, Option<String>)>> {
    let mut obs: Vec<(usize, f64, Option<String>)> = Vec::new();
    let mut record = |law: usize, r: f64, detail: &dyn Fn() -> String| {
        let witness = if r > 0.0 { Some(format!("pair {i}: {}", detail())) } else { None };
        obs.push((law, r, witness));
    };

    // Unit arrow endpoints and constraints.
    let x = gpd.sample_unit(seed, i)?;
    let ux = gpd.unit.eval_point(&x)?;
    let dux = gpd.source.eval_point(&ux)?;
    let rux = gpd.target.eval_point(&ux)?;
    let r0 = residual(&dux, &x).max(residual(&rux, &x));
    record(0, r0, &|| format!("u({x:?}) has endpoints {dux:?}, {rux:?}"));

    let mut constraint = gpd.arrows.blocks[ux.block].constraint_violation(&ux.coords);
    constraint = constraint.max(gpd.units.blocks[x.block].constraint_violation(&x.coords));

    // A composable pair and the laws it witnesses.
    let (g, h) = gpd.sample_composable_pair(seed, i)?;
    let dg = gpd.source.eval_point(&g)?;
    let rg = gpd.target.eval_point(&g)?;
    let dh = gpd.source.eval_point(&h)?;
    let rh = gpd.target.eval_point(&h)?;
    constraint = constraint.max(gpd.arrows.blocks[g.block].constraint_violation(&g.coords));
    constraint = constraint.max(gpd.arrows.blocks[h.block].constraint_violation(&h.coords));

    record(8, residual(&dg, &rh), &|| format!("d({g:?}) != r({h:?})"));

    match try_mul(gpd, &g, &h)? {
        Ok(gh) => {
            constraint =
                constraint.max(gpd.arrows.blocks[gh.block].constraint_violation(&gh.coords));
            let r2 = residual(&gpd.source.eval_point(&gh)?, &dh)
                .max(residual(&gpd.target.eval_point(&gh)?, &rg));
            record(2, r2, &|| format!("endpoints of {g:?} * {h:?}"));
        }
        Err(m) => record(2, f64::INFINITY, &|| m.clone()),
    }

    match try_mul(gpd, &gpd.unit.eval_point(&rg)?, &g)? {
        Ok(left) => record(3, residual(&left, &g), &|| format!("u(r(g)) * g != g at g = {g:?}")),
        Err(m) => record(3, f64::INFINITY, &|| m.clone()),
    }
    match try_mul(gpd, &g, &gpd.unit.eval_point(&dg)?)? {
        Ok(right) => record(4, residual(&right, &g), &|| format!("g * u(d(g)) != g at g = {g:?}")),
        Err(m) => record(4, f64::INFINITY, &|| m.clone()),
    }

    let gi = gpd.inverse.eval_point(&g)?;
    constraint = constraint.max(gpd.arrows.blocks[gi.block].constraint_violation(&gi.coords));
    match (try_mul(gpd, &g, &gi)?, try_mul(gpd, &gi, &g)?) {
        (Ok(a), Ok(b)) => {
            let r5 = residual(&a, &gpd.unit.eval_point(&rg)?)
                .max(residual(&b, &gpd.unit.eval_point(&dg)?));
            record(5, r5, &|| format!("g * g⁻¹ or g⁻¹ * g not a unit at g = {g:?}"));
        }
        (Err(m), _) | (_, Err(m)) => record(5, f64::INFINITY, &|| m.clone()),
    }
    let r6 = residual(&gpd.source.eval_point(&gi)?, &rg)
        .max(residual(&gpd.target.eval_point(&gi)?, &dg));
    record(6, r6, &|| format!("endpoints of g⁻¹ at g = {g:?}"));
    record(7, residual(&gpd.inverse.eval_point(&gi)?, &g), &|| {
        format!("(g⁻¹)⁻¹ != g at g = {g:?}")
    });

    record(1, constraint, &|| "sampled or produced arrow off its manifold".to_string());
    Ok(obs)
}

fn triple_observations(
    gpd: &LieGroupoid,
    seed: u64,
    i: u64,
) -> Result<Vec<(usize, f64, Option<String>)>> {
    let (g, h, k) = gpd.sample_composable_triple(seed, i)?;
    let gh = match try_mul(gpd, &g, &h)? {
        Ok(p) => p,
        Err(m) => return Ok(vec![(9, f64::INFINITY, Some(format!("triple {i}: {m}")))]),
    };
    let hk = match try_mul(gpd, &h, &k)? {
        Ok(p) => p,
        Err(m) => return Ok(vec![(9, f64::INFINITY, Some(format!("triple {i}: {m}")))]),
    };
    let a = match try_mul(gpd, &gh, &k)? {
        Ok(p) => p,
        Err(m) => return Ok(vec![(9, f64::INFINITY, Some(format!("triple {i}: {m}")))]),
    };
    let b = match try_mul(gpd, &g, &hk)? {
        Ok(p) => p,
        Err(m) => return Ok(vec![(9, f64::INFINITY, Some(format!("triple {i}: {m}")))]),
    };
    let r = residual(&a, &b);
    let witness = if r > 0.0 {
        Some(format!("triple {i}: (gh)k = {a:?} vs g(hk) = {b:?}"))
    } else {
        None
    };
    Ok(vec![(9, r, witness)])
}
