//! Smooth maps between block manifolds.
//!
//! A map is a single jet-polymorphic evaluator: fed constants it computes
//! values, fed seeded jets it computes directional derivatives and mixed
//! second derivatives through exactly the same code path.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::geometry::manifold::{CoordinateManifold, Point, TangentVector};
use crate::jet::{self, Jet};
use crate::{Error, Result};

/// Evaluator signature: `(block, coords) -> (block, coords)` on jets.
pub type EvalFn = Arc<dyn Fn(usize, &[Jet]) -> Result<(usize, Vec<Jet>)> + Send + Sync>;

/// A smooth map between block manifolds, given by a jet evaluator.
#[derive(Clone)]
pub struct SmoothMap {
    pub domain: CoordinateManifold,
    pub codomain: CoordinateManifold,
    eval: EvalFn,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap({} -> {})", self.domain.name, self.codomain.name)
    }
}

/// Tangent data of a map at a point: the image point and the derivative
/// expressed on an orthonormal tangent basis of the domain.
#[derive(Clone, Debug)]
pub struct TangentJacobian {
    pub codomain_block: usize,
    pub image: Vec<f64>,
    /// `embedded_dim(codomain block) x dim` matrix; column `j` is the push of
    /// the `j`-th domain tangent basis vector.
    pub matrix: DMatrix<f64>,
    pub domain_basis: Vec<Vec<f64>>,
}

impl SmoothMap {
    pub fn new(domain: CoordinateManifold, codomain: CoordinateManifold, eval: EvalFn) -> Self {
        SmoothMap { domain, codomain, eval }
    }

    pub fn from_fn<F>(domain: CoordinateManifold, codomain: CoordinateManifold, f: F) -> Self
    where
        F: Fn(usize, &[Jet]) -> Result<(usize, Vec<Jet>)> + Send + Sync + 'static,
    {
        SmoothMap::new(domain, codomain, Arc::new(f))
    }

    pub fn identity(m: &CoordinateManifold) -> Self {
        SmoothMap::from_fn(m.clone(), m.clone(), |b, j| Ok((b, j.to_vec())))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SmoothMap) -> SmoothMap {
        let f = self.eval.clone();
        let g = inner.eval.clone();
        SmoothMap::from_fn(inner.domain.clone(), self.codomain.clone(), move |b, j| {
            let (bb, jj) = g(b, j)?;
            f(bb, &jj)
        })
    }

    pub fn eval_fn(&self) -> EvalFn {
        self.eval.clone()
    }

    pub fn eval_jets(&self, block: usize, jets: &[Jet]) -> Result<(usize, Vec<Jet>)> {
        (self.eval)(block, jets)
    }

    pub fn eval_point(&self, p: &Point) -> Result<Point> {
        let (b, out) = self.eval_jets(p.block, &jet::constants(&p.coords))?;
        Ok(Point::new(b, jet::values(&out)))
    }

    /// Full Jacobian in embedding coordinates at `p`.
    pub fn jacobian(&self, p: &Point) -> Result<(usize, DMatrix<f64>)> {
        let seeds = jet::seed_first_order(&p.coords);
        let (b, out) = self.eval_jets(p.block, &seeds)?;
        let rows = out.len();
        let cols = p.coords.len();
        Ok((b, DMatrix::from_fn(rows, cols, |i, j| out[i].d1(j))))
    }

    /// Derivative restricted to the domain tangent space at `p`.
    pub fn tangent_jacobian(&self, p: &Point) -> Result<TangentJacobian> {
        let block = self
            .domain
            .blocks
            .get(p.block)
            .ok_or_else(|| Error::Shape(format!("block {} out of range for {}", p.block, self.domain.name)))?;
        let basis = block.tangent_basis(&p.coords);
        let seeds = jet::seed_dirs(&p.coords, &basis, false);
        let (b, out) = self.eval_jets(p.block, &seeds)?;
        let rows = out.len();
        let cols = basis.len();
        Ok(TangentJacobian {
            codomain_block: b,
            image: jet::values(&out),
            matrix: DMatrix::from_fn(rows, cols, |i, j| out[i].d1(j)),
            domain_basis: basis,
        })
    }

    /// Push a tangent vector forward through the map.
    pub fn push_tangent(&self, v: &TangentVector) -> Result<TangentVector> {
        let seeds = jet::seed_dirs(&v.base, std::slice::from_ref(&v.components), false);
        let (b, out) = self.eval_jets(v.block, &seeds)?;
        Ok(TangentVector::new(b, jet::values(&out), jet::gradient_col(&out, 0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_of_polar_map() {
        // (r, phi) -> (r cos phi, r sin phi)
        let m = SmoothMap::from_fn(
            CoordinateManifold::euclidean(2),
            CoordinateManifold::euclidean(2),
            |b, j| Ok((b, vec![&j[0] * &j[1].cos(), &j[0] * &j[1].sin()])),
        );
        let p = Point::flat(vec![2.0, 0.7]);
        let (_, jac) = m.jacobian(&p).unwrap();
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let expect = [[c, -2.0 * s], [s, 2.0 * c]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((jac[(i, j)] - expect[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn compose_chains_evaluators() {
        let e1 = CoordinateManifold::euclidean(1);
        let sq = SmoothMap::from_fn(e1.clone(), e1.clone(), |b, j| Ok((b, vec![&j[0] * &j[0]])));
        let shift = SmoothMap::from_fn(e1.clone(), e1.clone(), |b, j| Ok((b, vec![&j[0] + 1.0])));
        let f = shift.compose(&sq); // x^2 + 1
        let out = f.eval_point(&Point::flat(vec![3.0])).unwrap();
        assert_eq!(out.coords[0], 10.0);
        let (_, jac) = f.jacobian(&Point::flat(vec![3.0])).unwrap();
        assert!((jac[(0, 0)] - 6.0).abs() < 1e-14);
    }

    #[test]
    fn push_tangent_respects_sphere_constraint() {
        // Identity on S^1; pushing a tangent vector keeps it tangent.
        let s1 = CoordinateManifold::single(
            "S^1",
            crate::ModelBlock::new(vec![crate::Factor::Sphere(1)]),
        );
        let id = SmoothMap::identity(&s1);
        let base = vec![0.6, 0.8];
        let v = TangentVector::new(0, base.clone(), vec![-0.8, 0.6]);
        let w = id.push_tangent(&v).unwrap();
        let dot: f64 = w.base.iter().zip(&w.components).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-15);
    }
}
