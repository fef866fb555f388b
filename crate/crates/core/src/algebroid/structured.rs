//! Algebroids in Lie–Rinehart form: a frame of generators with anchor
//! vector fields and structure functions.

use std::fmt;
use std::sync::Arc;

use crate::algebroid::section::Section;
use crate::algebroid::{richardson, Algebroid, FD_STEP};
use crate::jet::{self, Jet};
use crate::{CoordinateManifold, Error, Point, Result};

/// Anchor evaluation: base point (jets) to one tangent vector per generator,
/// in embedded base coordinates.
pub type AnchorFn = Arc<dyn Fn(usize, &[Jet]) -> Result<Vec<Vec<Jet>>> + Send + Sync>;

/// Structure functions `c^k_{ij}` packed as `(i · rank + j) · rank + k`,
/// antisymmetric in `(i, j)`.
pub type StructureFn = Arc<dyn Fn(usize, &[Jet]) -> Result<Vec<Jet>> + Send + Sync>;

/// An algebroid presented by generators: the bracket of sections
/// `X = Σ fᵢ Eᵢ`, `Y = Σ gⱼ Eⱼ` is
/// `[X, Y]ₖ = Σᵢ fᵢ (ρ_{Eᵢ} gₖ) − Σⱼ gⱼ (ρ_{Eⱼ} fₖ) + Σᵢⱼ fᵢ gⱼ c^k_{ij}`.
///
/// The frame may be overcomplete; all checked identities are invariant
/// under the choice of presentation.
#[derive(Clone)]
pub struct StructuredAlgebroid {
    pub name: String,
    pub base: CoordinateManifold,
    pub rank: usize,
    pub anchor: AnchorFn,
    pub structure: StructureFn,
}

impl fmt::Debug for StructuredAlgebroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructuredAlgebroid")
            .field("name", &self.name)
            .field("rank", &self.rank)
            .finish_non_exhaustive()
    }
}

impl StructuredAlgebroid {
    fn check_rank(&self, s: &Section) -> Result<()> {
        if s.rank != self.rank {
            return Err(Error::Shape(format!(
                "section of rank {} fed to {} of rank {}",
                s.rank, self.name, self.rank
            )));
        }
        Ok(())
    }

    /// Bracket coefficients as jets. Output jets carry values and first
    /// derivatives in the incoming directions; second-order entries are not
    /// meaningful.
    pub(crate) fn bracket_coeffs_jets(
        &self,
        xs: &Section,
        ys: &Section,
        block: usize,
        jets: &[Jet],
    ) -> Result<Vec<Jet>> {
        self.check_rank(xs)?;
        self.check_rank(ys)?;
        let r = self.rank;
        let (aug, k) = jet::augment_with_basis(jets);
        let f = (xs.coeffs)(block, &aug)?;
        let g = (ys.coeffs)(block, &aug)?;
        let rho = (self.anchor)(block, jets)?;
        let c = (self.structure)(block, jets)?;
        let e = jets.len();

        // Directional derivative of the coefficient jet `a` (evaluated on the
        // basis-augmented point) along the anchor of generator `i`, as a jet
        // in the original directions.
        let along = |a: &Jet, i: usize| -> Jet {
            let mut acc = Jet::c(0.0);
            for m in 0..e {
                let grad_m = Jet {
                    v: a.d1(k + m),
                    g: (0..k).map(|j| a.d2(j, k + m)).collect(),
                    h: Vec::new(),
                };
                acc = acc + &rho[i][m] * &grad_m;
            }
            acc
        };

        let fr: Vec<Jet> = f.iter().map(|j| jet::restrict(j, k)).collect();
        let gr: Vec<Jet> = g.iter().map(|j| jet::restrict(j, k)).collect();

        let mut out = Vec::with_capacity(r);
        for t in 0..r {
            let mut acc = Jet::c(0.0);
            for i in 0..r {
                acc = acc + &fr[i] * along(&g[t], i);
            }
            for j in 0..r {
                acc = acc - &gr[j] * along(&f[t], j);
            }
            for i in 0..r {
                for j in 0..r {
                    let cij = &c[(i * r + j) * r + t];
                    acc = acc + &(&fr[i] * &gr[j]) * cij;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// The bracket as a section, for nested brackets.
    pub fn bracket_section(&self, xs: &Section, ys: &Section) -> Section {
        let me = self.clone();
        let (xs, ys) = (xs.clone(), ys.clone());
        Section::new(self.rank, move |b, j| me.bracket_coeffs_jets(&xs, &ys, b, j))
    }

    fn coeff_values(&self, s: &Section, block: usize, coords: &[f64]) -> Result<Vec<f64>> {
        let out = (s.coeffs)(block, &jet::constants(coords))?;
        Ok(jet::values(&out))
    }
}

impl Algebroid for StructuredAlgebroid {
    fn label(&self) -> String {
        self.name.clone()
    }

    fn base(&self) -> &CoordinateManifold {
        &self.base
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn section_value(&self, s: &Section, x: &Point) -> Result<Vec<f64>> {
        self.check_rank(s)?;
        self.coeff_values(s, x.block, &x.coords)
    }

    fn bracket_value(&self, xs: &Section, ys: &Section, x: &Point) -> Result<Vec<f64>> {
        let out = self.bracket_coeffs_jets(xs, ys, x.block, &jet::constants(&x.coords))?;
        Ok(jet::values(&out))
    }

    fn bracket_value_fd(&self, xs: &Section, ys: &Section, x: &Point) -> Result<Vec<f64>> {
        self.check_rank(xs)?;
        self.check_rank(ys)?;
        let r = self.rank;
        let f = self.coeff_values(xs, x.block, &x.coords)?;
        let g = self.coeff_values(ys, x.block, &x.coords)?;
        let rho = (self.anchor)(x.block, &jet::constants(&x.coords))?;
        let c = (self.structure)(x.block, &jet::constants(&x.coords))?;

        // Central difference of coefficient values along an anchor direction.
        let diff = |s: &Section, i: usize| -> Result<Vec<f64>> {
            let dir: Vec<f64> = rho[i].iter().map(|j| j.v).collect();
            richardson(
                |h| {
                    let shift = |sign: f64| -> Result<Vec<f64>> {
                        let coords: Vec<f64> = x
                            .coords
                            .iter()
                            .zip(&dir)
                            .map(|(a, d)| a + sign * h * d)
                            .collect();
                        self.coeff_values(s, x.block, &coords)
                    };
                    let (plus, minus) = (shift(1.0)?, shift(-1.0)?);
                    Ok(plus
                        .iter()
                        .zip(&minus)
                        .map(|(p, m)| (p - m) / (2.0 * h))
                        .collect())
                },
                FD_STEP,
            )
        };

        let dg: Vec<Vec<f64>> = (0..r).map(|i| diff(ys, i)).collect::<Result<_>>()?;
        let df: Vec<Vec<f64>> = (0..r).map(|j| diff(xs, j)).collect::<Result<_>>()?;

        let mut out = vec![0.0; r];
        for t in 0..r {
            for i in 0..r {
                out[t] += f[i] * dg[i][t];
            }
            for j in 0..r {
                out[t] -= g[j] * df[j][t];
            }
            for i in 0..r {
                for j in 0..r {
                    out[t] += f[i] * g[j] * c[(i * r + j) * r + t].v;
                }
            }
        }
        Ok(out)
    }

    fn jacobiator_value(
        &self,
        xs: &Section,
        ys: &Section,
        zs: &Section,
        x: &Point,
    ) -> Result<Vec<f64>> {
        let t1 = self.bracket_value(xs, &self.bracket_section(ys, zs), x)?;
        let t2 = self.bracket_value(ys, &self.bracket_section(zs, xs), x)?;
        let t3 = self.bracket_value(zs, &self.bracket_section(xs, ys), x)?;
        Ok(t1
            .iter()
            .zip(&t2)
            .zip(&t3)
            .map(|((a, b), c)| a + b + c)
            .collect())
    }

    fn anchor_jets(&self, s: &Section, block: usize, jets: &[Jet]) -> Result<Vec<Jet>> {
        self.check_rank(s)?;
        let f = (s.coeffs)(block, jets)?;
        let rho = (self.anchor)(block, jets)?;
        let e = jets.len();
        let mut out = vec![Jet::c(0.0); e];
        for (i, fi) in f.iter().enumerate() {
            for m in 0..e {
                out[m] = &out[m] + &(fi * &rho[i][m]);
            }
        }
        Ok(out)
    }

    fn bracket_anchor_value(&self, xs: &Section, ys: &Section, x: &Point) -> Result<Vec<f64>> {
        let b = self.bracket_value(xs, ys, x)?;
        let rho = (self.anchor)(x.block, &jet::constants(&x.coords))?;
        let mut out = vec![0.0; x.coords.len()];
        for (t, bt) in b.iter().enumerate() {
            for m in 0..out.len() {
                out[m] += bt * rho[t][m].v;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::constructions::tangent_algebroid;

    #[test]
    fn coordinate_fields_bracket_like_vector_fields() {
        // [x ∂x, x² ∂x] = x² ∂x on the line.
        let a = tangent_algebroid(&CoordinateManifold::euclidean(1)).unwrap();
        let xs = Section::new(1, |_, j| Ok(vec![j[0].clone()]));
        let ys = Section::new(1, |_, j| Ok(vec![&j[0] * &j[0]]));
        let p = Point::flat(vec![0.7]);
        let b = a.bracket_value(&xs, &ys, &p).unwrap();
        assert!((b[0] - 0.49).abs() < 1e-12, "{b:?}");

        let fd = a.bracket_value_fd(&xs, &ys, &p).unwrap();
        assert!((b[0] - fd[0]).abs() < 1e-8);
    }

    #[test]
    fn jacobiator_vanishes_for_polynomial_fields() {
        let a = tangent_algebroid(&CoordinateManifold::euclidean(2)).unwrap();
        let xs = Section::new(2, |_, j| Ok(vec![j[1].clone(), Jet::c(1.0)]));
        let ys = Section::new(2, |_, j| Ok(vec![&j[0] * &j[1], j[0].clone()]));
        let zs = Section::new(2, |_, j| Ok(vec![Jet::c(0.5), &j[0] + &j[1]]));
        let p = Point::flat(vec![0.3, -1.1]);
        let jac = a.jacobiator_value(&xs, &ys, &zs, &p).unwrap();
        for v in jac {
            assert!(v.abs() < 1e-10, "{v}");
        }
    }
}
