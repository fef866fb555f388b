//! The Lie algebroid of a Lie groupoid, computed by differentiating the
//! structure maps. No closed-form bracket is assumed: sections are extended
//! to right-invariant fields through the multiplication and their commutator
//! is read off at the units.

use std::fmt;

use crate::algebroid::section::Section;
use crate::algebroid::{richardson, Algebroid, FD_STEP};
use crate::groupoid::{LieGroupoid, UnitFrame};
use crate::jet::{self, Jet};
use crate::{CoordinateManifold, Error, Point, Result};

/// The algebroid `A(𝓖)` of a groupoid carrying a unit frame.
///
/// The representation space at `x` is the embedded tangent space of the
/// arrow manifold at `u(x)`; a section `Σ fᵢ Eᵢ` takes the value
/// `Σ fᵢ(x) Fᵢ(x)` there, with `Fᵢ` the frame of `ker d₊` along units.
#[derive(Clone)]
pub struct DerivedAlgebroid {
    pub name: String,
    pub groupoid: LieGroupoid,
    rank: usize,
}

impl fmt::Debug for DerivedAlgebroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DerivedAlgebroid")
            .field("name", &self.name)
            .field("rank", &self.rank)
            .finish_non_exhaustive()
    }
}

/// Differentiate a groupoid into its algebroid. Requires a unit frame.
pub fn lie_algebroid_of(g: &LieGroupoid) -> Result<DerivedAlgebroid> {
    let frame = g.unit_frame.as_ref().ok_or_else(|| {
        Error::Capability(format!("{} carries no unit frame to differentiate", g.name))
    })?;
    Ok(DerivedAlgebroid {
        name: format!("A({})", g.name),
        rank: frame.rank,
        groupoid: g.clone(),
    })
}

impl DerivedAlgebroid {
    fn frame(&self) -> &UnitFrame {
        self.groupoid.unit_frame.as_ref().expect("constructed with a frame")
    }

    fn check_rank(&self, s: &Section) -> Result<()> {
        if s.rank != self.rank {
            return Err(Error::Shape(format!(
                "section of rank {} fed to {} of rank {}",
                s.rank, self.name, self.rank
            )));
        }
        Ok(())
    }

    /// `ξ(x) = Σ fᵢ(x) Fᵢ(x)` in embedded arrow coordinates.
    fn section_arrow_jets(
        &self,
        s: &Section,
        block: usize,
        jets: &[Jet],
    ) -> Result<(usize, Vec<Jet>)> {
        let (ab, frame) = (self.frame().eval)(block, jets)?;
        let f = (s.coeffs)(block, jets)?;
        let width = frame.first().map_or(0, Vec::len);
        let mut out = vec![Jet::c(0.0); width];
        for (fi, vec) in f.iter().zip(&frame) {
            for (o, comp) in out.iter_mut().zip(vec) {
                *o = &*o + &(fi * comp);
            }
        }
        Ok((ab, out))
    }

    /// The right-invariant extension `V_ξ(q) = ∂ₛ ((u(r(q)) + s ξ(r(q))) · q)`
    /// evaluated at the arrow point `q`. Output jets carry values and first
    /// derivatives in the incoming directions.
    fn extended_field_jets(
        &self,
        s: &Section,
        ablock: usize,
        ajets: &[Jet],
    ) -> Result<(usize, Vec<Jet>)> {
        let g = &self.groupoid;
        let (rb, rj) = g.target.eval_jets(ablock, ajets)?;
        let (ub, uj) = g.unit.eval_jets(rb, &rj)?;
        let (sb, sj) = self.section_arrow_jets(s, rb, &rj)?;
        if sb != ub {
            return Err(Error::Shape(format!(
                "frame of {} lives in block {sb}, units in block {ub}",
                self.name
            )));
        }
        let (arg, k) = jet::augment_with_vector(&uj, &sj);
        let (pb, pj) = (g.mul)((ub, &arg), (ablock, ajets))?;
        Ok((pb, jet::extract_aux_derivative(&pj, k, k)))
    }

    /// Field values at a plain arrow point.
    fn field_values(&self, s: &Section, q: &Point) -> Result<(usize, Vec<f64>)> {
        let (b, out) = self.extended_field_jets(s, q.block, &jet::constants(&q.coords))?;
        Ok((b, jet::values(&out)))
    }

    fn unit_point(&self, x: &Point) -> Result<Point> {
        self.groupoid.unit.eval_point(x)
    }

    /// Commutator of two point-level fields at `p` by central differences.
    fn field_commutator_fd(
        &self,
        f: &dyn Fn(&Point) -> Result<Vec<f64>>,
        g: &dyn Fn(&Point) -> Result<Vec<f64>>,
        p: &Point,
    ) -> Result<Vec<f64>> {
        let fp = f(p)?;
        let gp = g(p)?;
        let shift = |dir: &[f64], h: f64| -> Point {
            Point::new(
                p.block,
                p.coords.iter().zip(dir).map(|(a, d)| a + h * d).collect(),
            )
        };
        richardson(
            |h| {
                let d_of = |field: &dyn Fn(&Point) -> Result<Vec<f64>>,
                            dir: &[f64]|
                 -> Result<Vec<f64>> {
                    let plus = field(&shift(dir, h))?;
                    let minus = field(&shift(dir, -h))?;
                    Ok(plus
                        .iter()
                        .zip(&minus)
                        .map(|(a, b)| (a - b) / (2.0 * h))
                        .collect())
                };
                let dg = d_of(g, &fp)?;
                let df = d_of(f, &gp)?;
                Ok(dg.iter().zip(&df).map(|(a, b)| a - b).collect())
            },
            FD_STEP,
        )
    }

    /// The extension of an already-computed bracket: the inner bracket is
    /// evaluated pointwise and re-extended through the multiplication.
    fn inner_bracket_field(
        &self,
        s1: &Section,
        s2: &Section,
        q: &Point,
    ) -> Result<Vec<f64>> {
        let g = &self.groupoid;
        let rq = g.target.eval_point(q)?;
        let up = g.unit.eval_point(&rq)?;
        let bv = self.bracket_value(s1, s2, &rq)?;
        let (arg, k) = jet::augment_with_vector(&jet::constants(&up.coords), &jet::constants(&bv));
        let (_, pj) = (g.mul)((up.block, &arg), (q.block, &jet::constants(&q.coords)))?;
        Ok(jet::values(&jet::extract_aux_derivative(&pj, k, k)))
    }
}

impl Algebroid for DerivedAlgebroid {
    fn label(&self) -> String {
        self.name.clone()
    }

    fn base(&self) -> &CoordinateManifold {
        &self.groupoid.units
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn section_value(&self, s: &Section, x: &Point) -> Result<Vec<f64>> {
        self.check_rank(s)?;
        let (_, out) = self.section_arrow_jets(s, x.block, &jet::constants(&x.coords))?;
        Ok(jet::values(&out))
    }

    fn bracket_value(&self, xs: &Section, ys: &Section, x: &Point) -> Result<Vec<f64>> {
        self.check_rank(xs)?;
        self.check_rank(ys)?;
        let p = self.unit_point(x)?;
        let (bv, v) = self.field_values(xs, &p)?;
        let (bw, w) = self.field_values(ys, &p)?;
        if bv != bw {
            return Err(Error::Shape(format!(
                "field blocks differ at a unit of {}",
                self.name
            )));
        }
        // ∂_ε W(p + ε V(p)) − ∂_ε V(p + ε W(p)), mixed with the invisible
        // s-derivative inside the field evaluation.
        let seeds_v = jet::seed_dirs(&p.coords, &[v], true);
        let (_, wj) = self.extended_field_jets(ys, p.block, &seeds_v)?;
        let seeds_w = jet::seed_dirs(&p.coords, &[w], true);
        let (_, vj) = self.extended_field_jets(xs, p.block, &seeds_w)?;
        Ok(wj.iter().zip(&vj).map(|(a, b)| a.d1(0) - b.d1(0)).collect())
    }

    fn bracket_value_fd(&self, xs: &Section, ys: &Section, x: &Point) -> Result<Vec<f64>> {
        self.check_rank(xs)?;
        self.check_rank(ys)?;
        let p = self.unit_point(x)?;
        let me = self;
        let f = move |q: &Point| -> Result<Vec<f64>> { Ok(me.field_values(xs, q)?.1) };
        let g = move |q: &Point| -> Result<Vec<f64>> { Ok(me.field_values(ys, q)?.1) };
        self.field_commutator_fd(&f, &g, &p)
    }

    fn jacobiator_value(
        &self,
        xs: &Section,
        ys: &Section,
        zs: &Section,
        x: &Point,
    ) -> Result<Vec<f64>> {
        let p = self.unit_point(x)?;
        let term = |outer: &Section, s1: &Section, s2: &Section| -> Result<Vec<f64>> {
            let f = move |q: &Point| -> Result<Vec<f64>> { Ok(self.field_values(outer, q)?.1) };
            let g = move |q: &Point| -> Result<Vec<f64>> { self.inner_bracket_field(s1, s2, q) };
            self.field_commutator_fd(&f, &g, &p)
        };
        let t1 = term(xs, ys, zs)?;
        let t2 = term(ys, zs, xs)?;
        let t3 = term(zs, xs, ys)?;
        Ok(t1
            .iter()
            .zip(&t2)
            .zip(&t3)
            .map(|((a, b), c)| a + b + c)
            .collect())
    }

    fn anchor_jets(&self, s: &Section, block: usize, jets: &[Jet]) -> Result<Vec<Jet>> {
        self.check_rank(s)?;
        let g = &self.groupoid;
        let (ub, uj) = g.unit.eval_jets(block, jets)?;
        let (sb, sj) = self.section_arrow_jets(s, block, jets)?;
        if sb != ub {
            return Err(Error::Shape(format!("frame block mismatch in {}", self.name)));
        }
        let (arg, k) = jet::augment_with_vector(&uj, &sj);
        let (tb, tj) = g.target.eval_jets(ub, &arg)?;
        if tb != block {
            return Err(Error::Shape(format!(
                "target of a unit neighbourhood leaves block {block} in {}",
                self.name
            )));
        }
        Ok(jet::extract_aux_derivative(&tj, k, k))
    }

    fn bracket_anchor_value(&self, xs: &Section, ys: &Section, x: &Point) -> Result<Vec<f64>> {
        let b = self.bracket_value(xs, ys, x)?;
        let p = self.unit_point(x)?;
        let (arg, k) =
            jet::augment_with_vector(&jet::constants(&p.coords), &jet::constants(&b));
        let (_, tj) = self.groupoid.target.eval_jets(p.block, &arg)?;
        Ok(jet::values(&jet::extract_aux_derivative(&tj, k, k)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{group_bundle, pair_groupoid, GroupModel};

    #[test]
    fn pair_groupoid_bracket_is_the_vector_field_bracket() {
        // On pair(ℝ) with sections f ∂ and g ∂: [f ∂, g ∂] = (f g' - g f') ∂.
        let a = lie_algebroid_of(&pair_groupoid(&CoordinateManifold::euclidean(1))).unwrap();
        let xs = Section::new(1, |_, j| Ok(vec![j[0].clone()]));
        let ys = Section::new(1, |_, j| Ok(vec![&j[0] * &j[0]]));
        let p = Point::flat(vec![0.7]);
        let b = a.bracket_value(&xs, &ys, &p).unwrap();
        let expected = a
            .section_value(&Section::new(1, |_, j| Ok(vec![&j[0] * &j[0]])), &p)
            .unwrap();
        for (x, y) in b.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-10, "{b:?} vs {expected:?}");
        }
        let fd = a.bracket_value_fd(&xs, &ys, &p).unwrap();
        for (x, y) in b.iter().zip(&fd) {
            assert!((x - y).abs() < 1e-7, "{b:?} vs {fd:?}");
        }
    }

    #[test]
    fn scaling_generator_acts_with_weight_minus_one() {
        // In the ℝ ⋊ ℝ₊ˣ bundle, [D, e₁] = -e₁ for the right-invariant
        // convention.
        let g = group_bundle(
            &CoordinateManifold::euclidean(1),
            GroupModel::SemidirectScaling(1),
        )
        .unwrap();
        let a = lie_algebroid_of(&g).unwrap();
        let d = Section::generator(2, 1);
        let e1 = Section::generator(2, 0);
        let x = Point::flat(vec![0.4]);
        let b = a.bracket_value(&d, &e1, &x).unwrap();
        let minus_e1: Vec<f64> = a
            .section_value(&e1, &x)
            .unwrap()
            .iter()
            .map(|v| -v)
            .collect();
        for (x, y) in b.iter().zip(&minus_e1) {
            assert!((x - y).abs() < 1e-9, "{b:?} vs {minus_e1:?}");
        }
    }

    #[test]
    fn anchor_of_the_pair_groupoid_is_the_identity() {
        let a = lie_algebroid_of(&pair_groupoid(&CoordinateManifold::euclidean(2))).unwrap();
        let s = Section::new(2, |_, j| Ok(vec![j[1].clone(), Jet::c(2.0)]));
        let x = Point::flat(vec![0.3, -0.8]);
        let rho = a.anchor_value(&s, &x).unwrap();
        assert!((rho[0] - -0.8).abs() < 1e-12);
        assert!((rho[1] - 2.0).abs() < 1e-12);
    }
}
