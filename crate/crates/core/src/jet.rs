//! Forward-mode automatic differentiation on truncated Taylor jets.
//!
//! A [`Jet`] carries a value together with first-order and (optionally)
//! second-order derivative data along a fixed set of seed directions. Every
//! evaluator in this crate — structural maps, multiplications, sections,
//! coefficient functions — is written against `Jet` arithmetic, so the same
//! closure serves plain evaluation (no directions seeded), Jacobians
//! (first-order seeds) and the mixed second derivatives needed by bracket
//! computations (second-order seeds).
//!
//! Conventions:
//!
//! * `g.len()` is the number of seeded directions `k`; an empty `g` means
//!   "constant with respect to all directions" and broadcasts against any `k`.
//! * `h` is the `k*k` row-major symmetric matrix of second derivatives. It is
//!   tracked only when some operand tracks it; seeding with
//!   [`seed_second_order`]/[`seed_dirs`] (with `second_order = true`) turns
//!   it on for everything downstream.
//!
//! Derivatives obtained this way are exact up to floating-point rounding; the
//! independent cross-check used by the test suites is central finite
//! differencing with Richardson extrapolation, implemented where it is used.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Truncated Taylor jet: value, gradient, optional symmetric Hessian block.
#[derive(Clone, Debug, Default)]
pub struct Jet {
    /// Value part.
    pub v: f64,
    /// First derivatives along the seeded directions (empty = constant).
    pub g: Vec<f64>,
    /// Second derivatives, `k*k` row-major (empty = not tracked).
    pub h: Vec<f64>,
}

impl Jet {
    /// A constant jet (no derivative data).
    pub fn c(v: f64) -> Self {
        Jet { v, g: Vec::new(), h: Vec::new() }
    }

    /// A zero constant.
    pub fn zero() -> Self {
        Jet::c(0.0)
    }

    /// Number of seeded directions this jet is aware of.
    pub fn k(&self) -> usize {
        self.g.len()
    }

    fn tracks_h(&self) -> bool {
        !self.h.is_empty()
    }

    /// First derivative along direction `i` (0 when the jet is constant).
    pub fn d1(&self, i: usize) -> f64 {
        self.g.get(i).copied().unwrap_or(0.0)
    }

    /// Second derivative along directions `(i, j)`.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        if self.h.is_empty() {
            return 0.0;
        }
        let k = self.g.len();
        self.h.get(i * k + j).copied().unwrap_or(0.0)
    }

    fn grown(&self, k: usize, want_h: bool) -> Jet {
        let mut g = vec![0.0; k];
        for (i, gi) in self.g.iter().enumerate() {
            g[i] = *gi;
        }
        let mut h = Vec::new();
        if want_h {
            h = vec![0.0; k * k];
            let ks = self.g.len();
            for i in 0..ks {
                for j in 0..ks {
                    if !self.h.is_empty() {
                        h[i * k + j] = self.h[i * ks + j];
                    }
                }
            }
        }
        Jet { v: self.v, g, h }
    }

    fn unify(a: &Jet, b: &Jet) -> (Jet, Jet, usize, bool) {
        let k = a.k().max(b.k());
        let want_h = a.tracks_h() || b.tracks_h();
        (a.grown(k, want_h), b.grown(k, want_h), k, want_h)
    }

    /// Apply a scalar function with derivatives `d1 = f'`, `d2 = f''` at the
    /// value part (chain rule through the jet).
    pub fn lift(&self, f: f64, d1: f64, d2: f64) -> Jet {
        let k = self.k();
        let g: Vec<f64> = self.g.iter().map(|gi| d1 * gi).collect();
        let mut h = Vec::new();
        if self.tracks_h() {
            h = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..k {
                    h[i * k + j] = d1 * self.h[i * k + j] + d2 * self.g[i] * self.g[j];
                }
            }
        }
        Jet { v: f, g, h }
    }

    /// Multiplicative inverse.
    pub fn recip(&self) -> Jet {
        let v = self.v;
        self.lift(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Square root.
    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        self.lift(s, 0.5 / s, -0.25 / (s * s * s))
    }

    /// Exponential.
    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.lift(e, e, e)
    }

    /// Natural logarithm.
    pub fn ln(&self) -> Jet {
        let v = self.v;
        self.lift(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    /// Sine.
    pub fn sin(&self) -> Jet {
        self.lift(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    /// Cosine.
    pub fn cos(&self) -> Jet {
        self.lift(self.v.cos(), -self.v.sin(), -self.v.cos())
    }

    /// Integer power.
    pub fn powi(&self, n: i32) -> Jet {
        let v = self.v;
        let f = v.powi(n);
        let d1 = f64::from(n) * v.powi(n - 1);
        let d2 = f64::from(n) * f64::from(n - 1) * v.powi(n - 2);
        self.lift(f, d1, d2)
    }

    fn add_impl(a: &Jet, b: &Jet) -> Jet {
        let (mut a, b, k, want_h) = Jet::unify(a, b);
        a.v += b.v;
        for i in 0..k {
            a.g[i] += b.g[i];
        }
        if want_h {
            for i in 0..k * k {
                a.h[i] += b.h[i];
            }
        }
        a
    }

    fn sub_impl(a: &Jet, b: &Jet) -> Jet {
        let (mut a, b, k, want_h) = Jet::unify(a, b);
        a.v -= b.v;
        for i in 0..k {
            a.g[i] -= b.g[i];
        }
        if want_h {
            for i in 0..k * k {
                a.h[i] -= b.h[i];
            }
        }
        a
    }

    fn mul_impl(a: &Jet, b: &Jet) -> Jet {
        let (a, b, k, want_h) = Jet::unify(a, b);
        let v = a.v * b.v;
        let mut g = vec![0.0; k];
        for i in 0..k {
            g[i] = a.v * b.g[i] + b.v * a.g[i];
        }
        let mut h = Vec::new();
        if want_h {
            h = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..k {
                    h[i * k + j] = a.v * b.h[i * k + j]
                        + b.v * a.h[i * k + j]
                        + a.g[i] * b.g[j]
                        + a.g[j] * b.g[i];
                }
            }
        }
        Jet { v, g, h }
    }

    fn neg_impl(a: &Jet) -> Jet {
        Jet {
            v: -a.v,
            g: a.g.iter().map(|x| -x).collect(),
            h: a.h.iter().map(|x| -x).collect(),
        }
    }
}

macro_rules! impl_bin_op {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                Jet::$impl_fn(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                Jet::$impl_fn(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                Jet::$impl_fn(self, &rhs)
            }
        }
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                Jet::$impl_fn(self, rhs)
            }
        }
    };
}

impl_bin_op!(Add, add, add_impl);
impl_bin_op!(Sub, sub, sub_impl);
impl_bin_op!(Mul, mul, mul_impl);

impl Div<Jet> for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        Jet::mul_impl(&self, &rhs.recip())
    }
}
impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        Jet::mul_impl(self, &rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::neg_impl(&self)
    }
}
impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::neg_impl(self)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        Jet {
            v: self.v * rhs,
            g: self.g.iter().map(|x| x * rhs).collect(),
            h: self.h.iter().map(|x| x * rhs).collect(),
        }
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        (&self) * rhs
    }
}
impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.v += rhs;
        out
    }
}
impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        (&self) + rhs
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::c(v)
    }
}

/// `(exp(z) - 1) / z` with a series branch near `z = 0`, jet-safe at zero.
pub fn expm1_over(z: &Jet) -> Jet {
    if z.v.abs() < 1e-4 {
        // 1 + z/2 + z^2/6 + z^3/24; the truncation error is below 1e-18 here.
        let z2 = z * z;
        let z3 = &z2 * z;
        Jet::c(1.0) + z * 0.5 + &z2 * (1.0 / 6.0) + &z3 * (1.0 / 24.0)
    } else {
        let num = z.exp() - Jet::c(1.0);
        &num / z
    }
}

/// Seed `coords` with the standard first-order directions (one per entry).
pub fn seed_first_order(coords: &[f64]) -> Vec<Jet> {
    let k = coords.len();
    coords
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut g = vec![0.0; k];
            g[i] = 1.0;
            Jet { v, g, h: Vec::new() }
        })
        .collect()
}

/// Seed `coords` along explicit directions; `dirs[j]` is the `j`-th seeded
/// direction expressed in the same coordinates. With `second_order` the jets
/// also track the symmetric second-derivative block.
pub fn seed_dirs(coords: &[f64], dirs: &[Vec<f64>], second_order: bool) -> Vec<Jet> {
    let k = dirs.len();
    coords
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let g: Vec<f64> = dirs.iter().map(|d| d[i]).collect();
            let h = if second_order { vec![0.0; k * k] } else { Vec::new() };
            Jet { v, g, h }
        })
        .collect()
}

/// Truncate a jet to its first `k` directions, dropping the rest.
pub fn restrict(j: &Jet, k: usize) -> Jet {
    let g: Vec<f64> = (0..k).map(|i| j.d1(i)).collect();
    let h = if j.h.is_empty() {
        Vec::new()
    } else {
        let mut h = vec![0.0; k * k];
        for i in 0..k {
            for l in 0..k {
                h[i * k + l] = j.d2(i, l);
            }
        }
        h
    };
    Jet { v: j.v, g, h }
}

/// Extend a coordinate jet vector by one auxiliary direction per coordinate,
/// seeded with the coordinate basis, tracking second order. Returns the
/// extended jets and the number of original directions `k`; auxiliary
/// direction `k + m` differentiates along the `m`-th coordinate.
pub fn augment_with_basis(jets: &[Jet]) -> (Vec<Jet>, usize) {
    let k = jets.iter().map(Jet::k).max().unwrap_or(0);
    let e = jets.len();
    let kk = k + e;
    let out = jets
        .iter()
        .enumerate()
        .map(|(i, j)| {
            let mut g = vec![0.0; kk];
            for (q, x) in j.g.iter().enumerate() {
                g[q] = *x;
            }
            g[k + i] += 1.0;
            let mut h = vec![0.0; kk * kk];
            for q in 0..j.k() {
                for l in 0..j.k() {
                    h[q * kk + l] = j.d2(q, l);
                }
            }
            Jet { v: j.v, g, h }
        })
        .collect();
    (out, k)
}

/// Extend `base` by one auxiliary direction seeded with the (jet-valued)
/// vector `dir`: the result represents `base(θ) + s · dir(θ)` to second
/// order around `s = 0`. Returns the extended jets and the index `k` of the
/// auxiliary direction.
pub fn augment_with_vector(base: &[Jet], dir: &[Jet]) -> (Vec<Jet>, usize) {
    let k = base
        .iter()
        .chain(dir.iter())
        .map(Jet::k)
        .max()
        .unwrap_or(0);
    let kk = k + 1;
    let out = base
        .iter()
        .zip(dir)
        .map(|(b, d)| {
            let mut g = vec![0.0; kk];
            for (q, x) in b.g.iter().enumerate() {
                g[q] = *x;
            }
            g[k] = d.v;
            let mut h = vec![0.0; kk * kk];
            for q in 0..k {
                for l in 0..k {
                    h[q * kk + l] = b.d2(q, l);
                }
            }
            for q in 0..k {
                h[q * kk + k] = d.d1(q);
                h[k * kk + q] = d.d1(q);
            }
            Jet { v: b.v, g, h }
        })
        .collect();
    (out, k)
}

/// Read the auxiliary-direction derivative off jets produced downstream of
/// [`augment_with_vector`] (or [`augment_with_basis`] with `aux = k + m`):
/// value `∂_aux`, gradient `∂_j ∂_aux` over the original directions.
pub fn extract_aux_derivative(out: &[Jet], k: usize, aux: usize) -> Vec<Jet> {
    out.iter()
        .map(|o| Jet {
            v: o.d1(aux),
            g: (0..k).map(|j| o.d2(j, aux)).collect(),
            h: Vec::new(),
        })
        .collect()
}

/// Wrap plain coordinates as constant jets.
pub fn constants(coords: &[f64]) -> Vec<Jet> {
    coords.iter().map(|&v| Jet::c(v)).collect()
}

/// Extract the value parts of a jet vector.
pub fn values(jets: &[Jet]) -> Vec<f64> {
    jets.iter().map(|j| j.v).collect()
}

/// Extract the first-derivative column along direction `dir`.
pub fn gradient_col(jets: &[Jet], dir: usize) -> Vec<f64> {
    jets.iter().map(|j| j.d1(dir)).collect()
}

/// Euclidean norm of a jet vector's value parts.
pub fn value_norm(jets: &[Jet]) -> f64 {
    jets.iter().map(|j| j.v * j.v).sum::<f64>().sqrt()
}

/// Dot product of two jet vectors.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = Jet::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + x * y;
    }
    acc
}

/// Euclidean norm of a jet vector (jet-valued).
pub fn norm(a: &[Jet]) -> Jet {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn first_order_matches_hand_derivatives() {
        // f(x, y) = x^2 y + sin(x) / y at (1.3, 0.7)
        let p = seed_first_order(&[1.3, 0.7]);
        let (x, y) = (&p[0], &p[1]);
        let f = x * x * y + &(x.sin() / y.clone());
        let fx = 2.0 * 1.3 * 0.7 + 1.3f64.cos() / 0.7;
        let fy = 1.3f64 * 1.3 - 1.3f64.sin() / (0.7 * 0.7);
        assert!(close(f.d1(0), fx, 1e-12), "{} vs {}", f.d1(0), fx);
        assert!(close(f.d1(1), fy, 1e-12));
    }

    #[test]
    fn second_order_mixed_derivative() {
        // f(x, y) = exp(x y): f_xy = (1 + xy) exp(xy)
        let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = seed_dirs(&[0.4, -1.1], &dirs, true);
        let f = (&p[0] * &p[1]).exp();
        let xy: f64 = 0.4 * -1.1;
        let expect = (1.0 + xy) * xy.exp();
        assert!(close(f.d2(0, 1), expect, 1e-12));
        assert!(close(f.d2(1, 0), expect, 1e-12));
    }

    #[test]
    fn expm1_over_series_branch_agrees() {
        // Both branches against the same closed form, straddling the cut.
        for &z in &[1e-5, 5e-5, -2e-5, 9.9e-5, 1.01e-4] {
            let j = expm1_over(&Jet::c(z));
            let direct = z.exp_m1() / z;
            assert!(close(j.v, direct, 1e-12), "z = {z}");
        }
    }

    proptest! {
        #[test]
        fn product_rule_holds(x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let p = seed_first_order(&[x, y]);
            let f = &p[0] * &p[1];
            prop_assert!(close(f.d1(0), y, 1e-12));
            prop_assert!(close(f.d1(1), x, 1e-12));
        }

        #[test]
        fn division_inverts_multiplication(x in -2.0f64..2.0, y in 0.1f64..2.0) {
            let p = seed_first_order(&[x, y]);
            let f = &(&p[0] * &p[1]) / &p[1];
            prop_assert!(close(f.v, x, 1e-12));
            prop_assert!(close(f.d1(0), 1.0, 1e-10));
            prop_assert!(f.d1(1).abs() < 1e-10);
        }

        #[test]
        fn second_order_chain_rule_vs_finite_difference(x in 0.3f64..1.5) {
            // f(x) = sin(x) * exp(x), f'' by jets vs central differences.
            let dirs = vec![vec![1.0]];
            let p = seed_dirs(&[x], &dirs, true);
            let f = p[0].sin() * p[0].exp();
            let h = 1e-4;
            let g = |x: f64| x.sin() * x.exp();
            let fd = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
            prop_assert!(close(f.d2(0, 0), fd, 1e-6));
        }
    }
}
