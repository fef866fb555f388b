//! Model factors and coordinate blocks.
//!
//! Every manifold in this crate is a finite union of *blocks*, and every
//! block is a product of model factors embedded in Euclidean space:
//!
//! * [`Factor::Line`] — one unconstrained coordinate;
//! * [`Factor::Half`] — one coordinate constrained to `[0, ∞)`;
//! * [`Factor::Sphere(p)`] — the unit sphere `S^p`, carried as `p + 1`
//!   embedding coordinates with `|u| = 1`;
//! * [`Factor::ClippedSphere(p)`] — `S^p ∩ [0, ∞)^{p+1}`, the front face of
//!   a corner blow-up, with the same embedding plus sign constraints.
//!
//! Points and tangent vectors are always stored in embedding coordinates;
//! intrinsic dimension and corner structure are recovered from the factor
//! list.

use crate::jet::Jet;

/// A model factor of a coordinate block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    /// The real line.
    Line,
    /// The half-line `[0, ∞)`; contributes one boundary hyperface.
    Half,
    /// The unit sphere `S^p` in `R^{p+1}`.
    Sphere(usize),
    /// `S^p ∩ [0, ∞)^{p+1}`; each embedding coordinate is a hyperface.
    ClippedSphere(usize),
}

impl Factor {
    /// Intrinsic dimension contributed by this factor.
    pub fn dim(&self) -> usize {
        match self {
            Factor::Line | Factor::Half => 1,
            Factor::Sphere(p) | Factor::ClippedSphere(p) => *p,
        }
    }

    /// Number of embedding coordinates this factor occupies.
    pub fn embedded_dim(&self) -> usize {
        match self {
            Factor::Line | Factor::Half => 1,
            Factor::Sphere(p) | Factor::ClippedSphere(p) => *p + 1,
        }
    }

    /// Maximal number of boundary hyperfaces active at a single point.
    pub fn corner_rank(&self) -> usize {
        match self {
            Factor::Line | Factor::Sphere(_) => 0,
            Factor::Half => 1,
            // All p+1 signed coordinates cannot vanish at once on the sphere.
            Factor::ClippedSphere(p) => *p,
        }
    }
}

/// A product of model factors with a fixed embedding-coordinate layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelBlock {
    pub factors: Vec<Factor>,
}

impl ModelBlock {
    pub fn new(factors: Vec<Factor>) -> Self {
        ModelBlock { factors }
    }

    /// Block consisting of `n` line factors.
    pub fn lines(n: usize) -> Self {
        ModelBlock::new(vec![Factor::Line; n])
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).sum()
    }

    pub fn embedded_dim(&self) -> usize {
        self.factors.iter().map(Factor::embedded_dim).sum()
    }

    pub fn corner_rank(&self) -> usize {
        self.factors.iter().map(Factor::corner_rank).sum()
    }

    /// Factors together with their embedding-coordinate offsets.
    pub fn spans(&self) -> impl Iterator<Item = (Factor, usize)> + '_ {
        let mut offset = 0;
        self.factors.iter().map(move |f| {
            let o = offset;
            offset += f.embedded_dim();
            (*f, o)
        })
    }

    /// Concatenation of two blocks (product of the underlying models).
    pub fn concat(&self, other: &ModelBlock) -> ModelBlock {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        ModelBlock::new(factors)
    }

    /// Largest violation of the block's defining constraints at `coords`
    /// (sphere radii off unity, negative boundary coordinates). Zero means
    /// the point lies on the model.
    pub fn constraint_violation(&self, coords: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (f, o) in self.spans() {
            match f {
                Factor::Line => {}
                Factor::Half => worst = worst.max(-coords[o]),
                Factor::Sphere(p) | Factor::ClippedSphere(p) => {
                    let r2: f64 = coords[o..o + p + 1].iter().map(|x| x * x).sum();
                    worst = worst.max((r2.sqrt() - 1.0).abs());
                    if let Factor::ClippedSphere(_) = f {
                        for x in &coords[o..o + p + 1] {
                            worst = worst.max(-x);
                        }
                    }
                }
            }
        }
        worst
    }

    /// Embedding-coordinate indices whose vanishing defines a boundary
    /// hyperface (half-line coordinates and clipped-sphere coordinates).
    pub fn boundary_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (f, o) in self.spans() {
            match f {
                Factor::Half => out.push(o),
                Factor::ClippedSphere(p) => out.extend(o..o + p + 1),
                _ => {}
            }
        }
        out
    }

    /// Renormalise the sphere-factor coordinates of `coords` in place,
    /// leaving every other coordinate untouched.
    pub fn retract(&self, coords: &mut [f64]) {
        for (f, o) in self.spans() {
            if let Factor::Sphere(p) | Factor::ClippedSphere(p) = f {
                let r: f64 = coords[o..o + p + 1].iter().map(|x| x * x).sum::<f64>().sqrt();
                if r > 0.0 {
                    for x in &mut coords[o..o + p + 1] {
                        *x /= r;
                    }
                }
            }
        }
    }

    /// Jet-valued retraction: divide sphere-factor coordinates by their norm.
    pub fn retract_jets(&self, coords: &mut Vec<Jet>) {
        for (f, o) in self.spans() {
            if let Factor::Sphere(p) | Factor::ClippedSphere(p) = f {
                let r = crate::jet::norm(&coords[o..o + p + 1]);
                for x in &mut coords[o..o + p + 1] {
                    *x = &*x / &r;
                }
            }
        }
    }

    /// Orthonormal basis of the tangent space at `coords`, one column per
    /// intrinsic dimension, expressed in embedding coordinates.
    pub fn tangent_basis(&self, coords: &[f64]) -> Vec<Vec<f64>> {
        let e = self.embedded_dim();
        let mut basis = Vec::with_capacity(self.dim());
        for (f, o) in self.spans() {
            match f {
                Factor::Line | Factor::Half => {
                    let mut v = vec![0.0; e];
                    v[o] = 1.0;
                    basis.push(v);
                }
                Factor::Sphere(p) | Factor::ClippedSphere(p) => {
                    for t in sphere_tangent_basis(&coords[o..o + p + 1]) {
                        let mut v = vec![0.0; e];
                        v[o..o + p + 1].copy_from_slice(&t);
                        basis.push(v);
                    }
                }
            }
        }
        basis
    }

    /// Orthogonal projection of `v` onto the tangent space at `coords`
    /// (removes radial components at sphere factors).
    pub fn project_tangent(&self, coords: &[f64], v: &mut [f64]) {
        for (f, o) in self.spans() {
            if let Factor::Sphere(p) | Factor::ClippedSphere(p) = f {
                let u = &coords[o..o + p + 1];
                let d: f64 = u.iter().zip(&v[o..o + p + 1]).map(|(a, b)| a * b).sum();
                for (i, x) in v[o..o + p + 1].iter_mut().enumerate() {
                    *x -= d * u[i];
                }
            }
        }
    }
}

/// Orthonormal basis of `u⊥` for a unit vector `u`, via the Householder
/// reflector sending `u` to a signed axis vector.
fn sphere_tangent_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let m = u.len();
    if m == 1 {
        return Vec::new();
    }
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = u.to_vec();
    w[0] += sign;
    let wn: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut w {
        *x /= wn;
    }
    // Columns j >= 1 of H = I - 2wwᵀ are orthonormal and orthogonal to
    // H e_0 = -sign * u.
    (1..m)
        .map(|j| {
            let mut col = vec![0.0; m];
            col[j] = 1.0;
            for (i, c) in col.iter_mut().enumerate() {
                *c -= 2.0 * w[i] * w[j];
            }
            col
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_ranks() {
        let b = ModelBlock::new(vec![
            Factor::Sphere(2),
            Factor::Half,
            Factor::Line,
            Factor::ClippedSphere(1),
        ]);
        assert_eq!(b.dim(), 2 + 1 + 1 + 1);
        assert_eq!(b.embedded_dim(), 3 + 1 + 1 + 2);
        assert_eq!(b.corner_rank(), 1 + 1);
        assert_eq!(b.boundary_indices(), vec![3, 5, 6]);
    }

    #[test]
    fn sphere_basis_is_orthonormal_and_tangent() {
        let u = [0.6, -0.48, 0.64];
        let n: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let u: Vec<f64> = u.iter().map(|x| x / n).collect();
        let basis = sphere_tangent_basis(&u);
        assert_eq!(basis.len(), 2);
        for (i, a) in basis.iter().enumerate() {
            let ua: f64 = u.iter().zip(a).map(|(x, y)| x * y).sum();
            assert!(ua.abs() < 1e-14);
            for (j, b) in basis.iter().enumerate() {
                let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ab - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn violation_flags_bad_points() {
        let b = ModelBlock::new(vec![Factor::Half, Factor::Sphere(1)]);
        assert_eq!(b.constraint_violation(&[0.5, 1.0, 0.0]), 0.0);
        assert!(b.constraint_violation(&[-0.1, 1.0, 0.0]) >= 0.1);
        assert!(b.constraint_violation(&[0.5, 2.0, 0.0]) >= 0.9);
    }
}
