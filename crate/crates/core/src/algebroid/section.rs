//! Sections of an algebroid, presented by their coefficient functions with
//! respect to the generating frame.

use std::fmt;
use std::sync::Arc;

use crate::jet::Jet;
use crate::Result;

/// Coefficient functions of a section: base point (as jets) to one jet per
/// frame generator.
pub type CoeffFn = Arc<dyn Fn(usize, &[Jet]) -> Result<Vec<Jet>> + Send + Sync>;

/// A smooth scalar function on the base, jet-capable.
pub type ScalarFn = Arc<dyn Fn(usize, &[Jet]) -> Result<Jet> + Send + Sync>;

/// A section `Σᵢ fᵢ(x) Eᵢ` of an algebroid with frame `E₁, …, E_r`.
#[derive(Clone)]
pub struct Section {
    pub rank: usize,
    pub coeffs: CoeffFn,
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Section").field("rank", &self.rank).finish_non_exhaustive()
    }
}

impl Section {
    pub fn new<F>(rank: usize, coeffs: F) -> Self
    where
        F: Fn(usize, &[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        Section { rank, coeffs: Arc::new(coeffs) }
    }

    /// The `i`-th frame generator as a section.
    pub fn generator(rank: usize, i: usize) -> Self {
        Section::constant({
            let mut c = vec![0.0; rank];
            c[i] = 1.0;
            c
        })
    }

    /// Section with constant coefficients.
    pub fn constant(c: Vec<f64>) -> Self {
        let rank = c.len();
        Section::new(rank, move |_, _| Ok(c.iter().map(|&v| Jet::c(v)).collect()))
    }

    /// The module product `f · X`.
    pub fn scaled(&self, f: ScalarFn) -> Section {
        let coeffs = self.coeffs.clone();
        Section::new(self.rank, move |b, j| {
            let scale = f(b, j)?;
            Ok(coeffs(b, j)?.iter().map(|c| c * &scale).collect())
        })
    }
}
