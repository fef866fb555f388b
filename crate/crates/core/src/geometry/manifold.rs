//! Block manifolds, points and tangent vectors.

use crate::geometry::factor::ModelBlock;
use crate::jet::Jet;
use crate::{Error, Result};

/// A manifold with corners presented as a finite union of coordinate blocks
/// of equal intrinsic dimension. Blocks play the role of (possibly
/// overlapping) charts; constructions that use several blocks fix a normal
/// form saying which block represents which points.
#[derive(Clone, Debug)]
pub struct CoordinateManifold {
    pub name: String,
    pub blocks: Vec<ModelBlock>,
}

impl CoordinateManifold {
    pub fn new(name: impl Into<String>, blocks: Vec<ModelBlock>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Shape("a manifold needs at least one block".into()));
        }
        let d = blocks[0].dim();
        if blocks.iter().any(|b| b.dim() != d) {
            return Err(Error::Shape("blocks of one manifold must share a dimension".into()));
        }
        Ok(CoordinateManifold { name: name.into(), blocks })
    }

    /// Single-block manifold.
    pub fn single(name: impl Into<String>, block: ModelBlock) -> Self {
        CoordinateManifold { name: name.into(), blocks: vec![block] }
    }

    /// Euclidean space `R^n` as one block of line factors.
    pub fn euclidean(n: usize) -> Self {
        CoordinateManifold::single(format!("R^{n}"), ModelBlock::lines(n))
    }

    /// The half-line `[0, ∞)`.
    pub fn halfline() -> Self {
        CoordinateManifold::single("[0,inf)", ModelBlock::new(vec![crate::Factor::Half]))
    }

    /// Intrinsic dimension (equal across blocks).
    pub fn dim(&self) -> usize {
        self.blocks[0].dim()
    }

    pub fn block(&self, i: usize) -> &ModelBlock {
        &self.blocks[i]
    }

    /// Largest corner rank over all blocks.
    pub fn corner_rank(&self) -> usize {
        self.blocks.iter().map(ModelBlock::corner_rank).max().unwrap_or(0)
    }

    /// Verify that `p` lies on this manifold within `tol`.
    pub fn check_point(&self, p: &Point, tol: f64) -> Result<()> {
        let block = self
            .blocks
            .get(p.block)
            .ok_or_else(|| Error::Shape(format!("block {} out of range for {}", p.block, self.name)))?;
        if p.coords.len() != block.embedded_dim() {
            return Err(Error::Shape(format!(
                "point has {} coordinates, block {} of {} embeds in {}",
                p.coords.len(),
                p.block,
                self.name,
                block.embedded_dim()
            )));
        }
        let viol = block.constraint_violation(&p.coords);
        if viol > tol {
            return Err(Error::Constraint(format!(
                "point {:?} violates {} constraints by {viol:.3e}",
                p.coords, self.name
            )));
        }
        Ok(())
    }

    /// Product manifold; blocks are ordered pairs `(i, j) -> i * nb + j`.
    pub fn product(name: impl Into<String>, a: &CoordinateManifold, b: &CoordinateManifold) -> Self {
        let mut blocks = Vec::with_capacity(a.blocks.len() * b.blocks.len());
        for ba in &a.blocks {
            for bb in &b.blocks {
                blocks.push(ba.concat(bb));
            }
        }
        CoordinateManifold { name: name.into(), blocks }
    }
}

/// A point of a [`CoordinateManifold`]: a block index plus embedding
/// coordinates for that block.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub block: usize,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(block: usize, coords: Vec<f64>) -> Self {
        Point { block, coords }
    }

    /// Point in block 0 (the common single-block case).
    pub fn flat(coords: Vec<f64>) -> Self {
        Point { block: 0, coords }
    }
}

/// A tangent vector in embedding coordinates, attached to a base point.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub block: usize,
    pub base: Vec<f64>,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(block: usize, base: Vec<f64>, components: Vec<f64>) -> Self {
        TangentVector { block, base, components }
    }

    pub fn at(p: &Point, components: Vec<f64>) -> Self {
        TangentVector { block: p.block, base: p.coords.clone(), components }
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Pack a pair of points into the corresponding product-manifold point.
pub fn pack_product(b: &CoordinateManifold, pa: &Point, pb: &Point) -> Point {
    let block = pa.block * b.blocks.len() + pb.block;
    let mut coords = pa.coords.clone();
    coords.extend_from_slice(&pb.coords);
    Point { block, coords }
}

/// Split a product-manifold point into its factors.
pub fn unpack_product(a: &CoordinateManifold, b: &CoordinateManifold, p: &Point) -> (Point, Point) {
    let (ia, ib) = (p.block / b.blocks.len(), p.block % b.blocks.len());
    let ea = a.blocks[ia].embedded_dim();
    (
        Point::new(ia, p.coords[..ea].to_vec()),
        Point::new(ib, p.coords[ea..].to_vec()),
    )
}

/// Jet-valued version of [`pack_product`].
pub fn pack_product_jets(
    b: &CoordinateManifold,
    (ba, ja): (usize, Vec<Jet>),
    (bb, jb): (usize, Vec<Jet>),
) -> (usize, Vec<Jet>) {
    let block = ba * b.blocks.len() + bb;
    let mut coords = ja;
    coords.extend(jb);
    (block, coords)
}

/// Jet-valued version of [`unpack_product`].
pub fn unpack_product_jets(
    a: &CoordinateManifold,
    b: &CoordinateManifold,
    block: usize,
    jets: &[Jet],
) -> ((usize, Vec<Jet>), (usize, Vec<Jet>)) {
    let (ia, ib) = (block / b.blocks.len(), block % b.blocks.len());
    let ea = a.blocks[ia].embedded_dim();
    ((ia, jets[..ea].to_vec()), (ib, jets[ea..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Factor;

    #[test]
    fn product_pack_roundtrip() {
        let a = CoordinateManifold::new(
            "A",
            vec![
                ModelBlock::new(vec![Factor::Line, Factor::Line]),
                ModelBlock::new(vec![Factor::Sphere(1), Factor::Half]),
            ],
        )
        .unwrap();
        let b = CoordinateManifold::euclidean(1);
        let prod = CoordinateManifold::product("AxB", &a, &b);
        assert_eq!(prod.blocks.len(), 2);
        assert_eq!(prod.dim(), 3);

        let pa = Point::new(1, vec![0.6, 0.8, 0.3]);
        let pb = Point::flat(vec![-2.0]);
        let p = pack_product(&b, &pa, &pb);
        assert_eq!(p.block, 1);
        let (qa, qb) = unpack_product(&a, &b, &p);
        assert_eq!(qa, pa);
        assert_eq!(qb, pb);
    }

    #[test]
    fn mismatched_block_dims_rejected() {
        let r = CoordinateManifold::new(
            "bad",
            vec![ModelBlock::lines(2), ModelBlock::lines(3)],
        );
        assert!(r.is_err());
    }
}
