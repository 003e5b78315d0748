//! Truncated multivariate Taylor polynomials ("jets") in the four chart
//! coordinates.
//!
//! A jet stores the Taylor coefficients `c_α` of a function around a point,
//! for all multi-indices `|α| <= ord`. The partial derivative
//! `∂^α f = α! c_α`. Coefficients may be any [`Coef`], so the same machinery
//! carries real scalars and multivector-valued fields.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::stal::Multivector;

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 4;

/// Order used for metric evaluation unless a check needs more.
pub const DEFAULT_ORDER: usize = 3;

/// Number of monomials of degree `<= k` in four variables.
pub const fn n_coeffs(k: usize) -> usize {
    (k + 1) * (k + 2) * (k + 3) * (k + 4) / 24
}

/// Anything that can be a Taylor coefficient.
pub trait Coef:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + Mul<f64, Output = Self> + AddAssign
{
}

impl<T> Coef for T where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Neg<Output = T> + Mul<f64, Output = T> + AddAssign
{
}

struct Tables {
    monos: Vec<[u8; 4]>,
    lookup: Vec<u16>,
    /// (i, j, k) with monos[i] + monos[j] = monos[k], sorted by degree of k.
    triples: Vec<(u16, u16, u16)>,
    /// triples[..prefix[ord]] are those with output degree <= ord.
    prefix: [usize; MAX_ORDER + 1],
    /// index of alpha + e_v, or u16::MAX when beyond MAX_ORDER.
    shift: Vec<[u16; 4]>,
    factorial: Vec<f64>,
}

fn encode(a: [u8; 4]) -> usize {
    let b = MAX_ORDER + 1;
    ((a[0] as usize * b + a[1] as usize) * b + a[2] as usize) * b + a[3] as usize
}

fn degree(a: [u8; 4]) -> usize {
    a.iter().map(|&x| x as usize).sum()
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut monos = Vec::new();
        for d in 0..=MAX_ORDER {
            // graded lexicographic order, highest power of x0 first
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    for c in (0..=d - a - b).rev() {
                        monos.push([a as u8, b as u8, c as u8, (d - a - b - c) as u8]);
                    }
                }
            }
        }
        let b = MAX_ORDER + 1;
        let mut lookup = vec![u16::MAX; b * b * b * b];
        for (i, m) in monos.iter().enumerate() {
            lookup[encode(*m)] = i as u16;
        }
        let mut triples = Vec::new();
        for (i, a) in monos.iter().enumerate() {
            for (j, bb) in monos.iter().enumerate() {
                let s = [a[0] + bb[0], a[1] + bb[1], a[2] + bb[2], a[3] + bb[3]];
                if degree(s) <= MAX_ORDER {
                    triples.push((i as u16, j as u16, lookup[encode(s)]));
                }
            }
        }
        triples.sort_by_key(|&(_, _, k)| (degree(monos[k as usize]), k));
        let mut prefix = [0; MAX_ORDER + 1];
        for (ord, p) in prefix.iter_mut().enumerate() {
            *p = triples
                .iter()
                .take_while(|&&(_, _, k)| degree(monos[k as usize]) <= ord)
                .count();
        }
        let shift = monos
            .iter()
            .map(|m| {
                let mut s = [u16::MAX; 4];
                for (v, slot) in s.iter_mut().enumerate() {
                    let mut n = *m;
                    n[v] += 1;
                    if degree(n) <= MAX_ORDER {
                        *slot = lookup[encode(n)];
                    }
                }
                s
            })
            .collect();
        let factorial = monos
            .iter()
            .map(|m| m.iter().map(|&k| (1..=k as u32).product::<u32>() as f64).product())
            .collect();
        Tables { monos, lookup, triples, prefix, shift, factorial }
    })
}

/// Index of the coefficient for the multi-index `alpha`.
pub fn mono_index(alpha: [u8; 4]) -> usize {
    assert!(degree(alpha) <= MAX_ORDER, "multi-index beyond maximum jet order");
    tables().lookup[encode(alpha)] as usize
}

/// Multi-index stored at coefficient slot `i`.
pub fn mono(i: usize) -> [u8; 4] {
    tables().monos[i]
}

fn alpha_of(dirs: &[usize]) -> [u8; 4] {
    let mut a = [0u8; 4];
    for &d in dirs {
        a[d] += 1;
    }
    a
}

/// A truncated Taylor expansion with coefficients in `T`.
#[derive(Clone, PartialEq)]
pub struct Jet<T> {
    ord: usize,
    c: Vec<T>,
}

/// Real-valued jet.
pub type Jet3 = Jet<f64>;

/// Multivector-valued jet.
pub type MvJet = Jet<Multivector>;

impl<T: Coef> Jet<T> {
    pub fn constant(v: T, ord: usize) -> Self {
        assert!(ord <= MAX_ORDER);
        let mut c = vec![T::default(); n_coeffs(ord)];
        c[0] = v;
        Jet { ord, c }
    }

    pub fn zero(ord: usize) -> Self {
        Self::constant(T::default(), ord)
    }

    /// Build from Taylor coefficients in storage order; the length fixes the order.
    pub fn from_coeffs(c: Vec<T>) -> Self {
        let ord = (0..=MAX_ORDER)
            .find(|&k| n_coeffs(k) == c.len())
            .expect("coefficient count does not match any jet order");
        Jet { ord, c }
    }

    pub fn order(&self) -> usize {
        self.ord
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.c
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Partial derivative along the listed coordinate directions, e.g.
    /// `deriv(&[1, 1])` is `∂²/∂x1²`.
    pub fn deriv(&self, dirs: &[usize]) -> T {
        assert!(dirs.len() <= self.ord, "derivative order exceeds jet order");
        let i = mono_index(alpha_of(dirs));
        self.c[i] * tables().factorial[i]
    }

    pub fn grad(&self) -> [T; 4] {
        std::array::from_fn(|i| self.deriv(&[i]))
    }

    pub fn hess(&self) -> [[T; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.deriv(&[i, j])))
    }

    pub fn third(&self) -> [[[T; 4]; 4]; 4] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| self.deriv(&[i, j, k])))
        })
    }

    /// Drop terms above order `k`.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.ord);
        Jet { ord: k, c: self.c[..n_coeffs(k)].to_vec() }
    }

    /// `∂f/∂x_v` as a jet of one lower order.
    pub fn partial(&self, v: usize) -> Self {
        assert!(self.ord >= 1, "cannot differentiate an order-0 jet");
        let t = tables();
        let n = n_coeffs(self.ord - 1);
        let c = (0..n)
            .map(|i| {
                let k = t.shift[i][v] as usize;
                self.c[k] * (t.monos[i][v] as f64 + 1.0)
            })
            .collect();
        Jet { ord: self.ord - 1, c }
    }

    pub fn map<U: Coef>(&self, f: impl Fn(T) -> U) -> Jet<U> {
        Jet { ord: self.ord, c: self.c.iter().map(|&x| f(x)).collect() }
    }

    /// Truncated product under a bilinear coefficient map.
    pub fn bilinear<U: Coef, V: Coef>(&self, other: &Jet<U>, f: impl Fn(T, U) -> V) -> Jet<V> {
        let ord = self.ord.min(other.ord);
        let t = tables();
        let mut c = vec![V::default(); n_coeffs(ord)];
        for &(i, j, k) in &t.triples[..t.prefix[ord]] {
            c[k as usize] += f(self.c[i as usize], other.c[j as usize]);
        }
        Jet { ord, c }
    }

    /// Multiply by a real jet.
    pub fn scale(&self, s: &Jet<f64>) -> Self {
        self.bilinear(s, |a, b| a * b)
    }

    /// Value of the polynomial at displacement `h` from the expansion point.
    pub fn eval_at(&self, h: [f64; 4]) -> T {
        let t = tables();
        let mut acc = T::default();
        for (i, &c) in self.c.iter().enumerate() {
            let m = t.monos[i];
            let w: f64 = (0..4).map(|v| h[v].powi(m[v] as i32)).product();
            acc += c * w;
        }
        acc
    }

    fn zip(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let ord = self.ord.min(other.ord);
        let n = n_coeffs(ord);
        Jet { ord, c: (0..n).map(|i| f(self.c[i], other.c[i])).collect() }
    }
}

impl Jet<f64> {
    /// Seed jet for coordinate `v` with value `x`.
    pub fn variable(x: f64, v: usize, ord: usize) -> Self {
        let mut j = Self::constant(x, ord);
        if ord >= 1 {
            let mut a = [0u8; 4];
            a[v] = 1;
            j.c[mono_index(a)] = 1.0;
        }
        j
    }

    /// `φ(f)` from the derivatives `φ^(k)(f0)` for `k = 0..=ord`.
    pub fn compose(&self, derivs: &[f64]) -> Self {
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut out = Self::constant(derivs[0], self.ord);
        let mut power = Self::constant(1.0, self.ord);
        let mut fact = 1.0;
        for (k, &d) in derivs.iter().enumerate().take(self.ord + 1).skip(1) {
            power = &power * &delta;
            fact *= k as f64;
            let w = d / fact;
            for (o, p) in out.c.iter_mut().zip(&power.c) {
                *o += w * p;
            }
        }
        out
    }

    /// `f^p` for real `p`; the value must be positive unless `p` is a
    /// non-negative integer.
    pub fn powf(&self, p: f64) -> Self {
        let x = self.c[0];
        let mut derivs = Vec::with_capacity(self.ord + 1);
        let mut coef = 1.0;
        for k in 0..=self.ord {
            derivs.push(coef * x.powf(p - k as f64));
            coef *= p - k as f64;
        }
        self.compose(&derivs)
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut out = Self::constant(1.0, self.ord);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    pub fn recip(&self) -> Self {
        let x = self.c[0];
        let mut derivs = Vec::with_capacity(self.ord + 1);
        let mut v = 1.0 / x;
        for k in 0..=self.ord {
            derivs.push(v);
            v *= -((k + 1) as f64) / x;
        }
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose(&vec![e; self.ord + 1])
    }

    pub fn ln(&self) -> Self {
        let x = self.c[0];
        let mut derivs = vec![x.ln()];
        let mut v = 1.0 / x;
        for k in 1..=self.ord {
            derivs.push(v);
            v *= -(k as f64) / x;
        }
        self.compose(&derivs)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&(0..=self.ord).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&(0..=self.ord).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn tan(&self) -> Self {
        &self.sin() * &self.cos().recip()
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose(&(0..=self.ord).map(|k| if k % 2 == 0 { s } else { c }).collect::<Vec<_>>())
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose(&(0..=self.ord).map(|k| if k % 2 == 0 { c } else { s }).collect::<Vec<_>>())
    }

    /// `|f|`, smooth away from zero.
    pub fn abs(&self) -> Self {
        if self.c[0] < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Jet<Multivector> {
    pub fn gp(&self, other: &Self) -> Self {
        self.bilinear(other, |a, b| a.gp(&b))
    }

    pub fn wedge(&self, other: &Self) -> Self {
        self.bilinear(other, |a, b| a.wedge(&b))
    }

    pub fn comm(&self, other: &Self) -> Self {
        self.bilinear(other, |a, b| a.comm(&b))
    }

    pub fn lcontr(&self, other: &Self) -> Self {
        self.bilinear(other, |a, b| a.lcontr(&b))
    }

    pub fn scalar_prod(&self, other: &Self) -> Jet<f64> {
        self.bilinear(other, |a, b| a.scalar_prod(&b))
    }

    /// Multiply by a constant multivector on the left.
    pub fn left_mul(&self, m: &Multivector) -> Self {
        self.map(|a| m.gp(&a))
    }

    pub fn reverse(&self) -> Self {
        self.map(|a| a.reverse())
    }

    pub fn hodge(&self) -> Self {
        self.map(|a| a.hodge())
    }

    pub fn hodge_inv(&self) -> Self {
        self.map(|a| a.hodge_inv())
    }

    pub fn grade_part(&self, k: usize) -> Self {
        self.map(|a| a.grade_part(k))
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.max_abs()))
    }

    /// Component jet for one blade.
    pub fn component(&self, mask: u8) -> Jet<f64> {
        self.map(|a| a.get(mask))
    }

    /// Multivector jet from real jets times constant multivectors.
    pub fn from_parts(parts: &[(Jet<f64>, Multivector)]) -> Self {
        let ord = parts.iter().map(|(j, _)| j.ord).min().unwrap_or(MAX_ORDER);
        let mut out = Self::zero(ord);
        for (j, m) in parts {
            for (o, &x) in out.c.iter_mut().zip(&j.c) {
                *o += *m * x;
            }
        }
        out
    }
}

impl<T: Coef> Add for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: &Jet<T>) -> Jet<T> {
        self.zip(rhs, |a, b| a + b)
    }
}

impl<T: Coef> Sub for &Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: &Jet<T>) -> Jet<T> {
        self.zip(rhs, |a, b| a - b)
    }
}

impl<T: Coef> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Jet<T>) -> Jet<T> {
        &self + &rhs
    }
}

impl<T: Coef> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Jet<T>) -> Jet<T> {
        &self - &rhs
    }
}

impl<T: Coef> AddAssign<&Jet<T>> for Jet<T> {
    fn add_assign(&mut self, rhs: &Jet<T>) {
        if rhs.ord < self.ord {
            self.ord = rhs.ord;
            self.c.truncate(n_coeffs(rhs.ord));
        }
        for (a, &b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl<T: Coef> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.map(|a| -a)
    }
}

impl<T: Coef> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.map(|a| -a)
    }
}

impl<T: Coef> Mul<f64> for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, s: f64) -> Jet<T> {
        self.map(|a| a * s)
    }
}

impl<T: Coef> Mul<f64> for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, s: f64) -> Jet<T> {
        self.map(|a| a * s)
    }
}

impl Mul for &Jet<f64> {
    type Output = Jet<f64>;
    fn mul(self, rhs: &Jet<f64>) -> Jet<f64> {
        self.bilinear(rhs, |a, b| a * b)
    }
}

impl Mul for Jet<f64> {
    type Output = Jet<f64>;
    fn mul(self, rhs: Jet<f64>) -> Jet<f64> {
        &self * &rhs
    }
}

impl<T: Coef + fmt::Debug> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet").field("ord", &self.ord).field("c", &self.c).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_jet(rng: &mut ChaCha8Rng, ord: usize) -> Jet<f64> {
        Jet::from_coeffs((0..n_coeffs(ord)).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    #[test]
    fn table_sizes() {
        assert_eq!(n_coeffs(3), 35);
        assert_eq!(n_coeffs(4), 70);
        let t = tables();
        assert_eq!(t.monos.len(), 70);
        for (i, m) in t.monos.iter().enumerate() {
            assert_eq!(mono_index(*m), i);
        }
        // ordered by degree
        for w in t.monos.windows(2) {
            assert!(degree(w[0]) <= degree(w[1]));
        }
    }

    #[test]
    fn square_of_coordinate() {
        let r = Jet::variable(3.0, 1, 3);
        let f = &r * &r;
        assert_eq!(f.value(), 9.0);
        assert_eq!(f.deriv(&[1]), 6.0);
        assert_eq!(f.deriv(&[1, 1]), 2.0);
        assert_eq!(f.deriv(&[1, 1, 1]), 0.0);
        assert_eq!(f.deriv(&[0]), 0.0);
    }

    #[test]
    fn sine_at_half_pi() {
        let th = Jet::variable(std::f64::consts::FRAC_PI_2, 2, 3);
        let s = th.sin();
        assert_relative_eq!(s.value(), 1.0);
        assert!(s.deriv(&[2]).abs() < 1e-15);
        assert_relative_eq!(s.deriv(&[2, 2]), -1.0);
        assert!(s.deriv(&[2, 2, 2]).abs() < 1e-15);
    }

    #[test]
    fn schwarzschild_lapse() {
        let r = Jet::variable(10.0, 1, 3);
        let f = Jet::constant(1.0, 3) - r.recip() * 2.0;
        assert_relative_eq!(f.value(), 0.8, epsilon = 1e-15);
        assert_relative_eq!(f.deriv(&[1]), 0.02, epsilon = 1e-15);
        assert_relative_eq!(f.deriv(&[1, 1]), -0.004, epsilon = 1e-15);
        assert_relative_eq!(f.deriv(&[1, 1, 1]), 0.0012, epsilon = 1e-15);
    }

    #[test]
    fn sin2_plus_cos2() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let f = random_jet(&mut rng, 4);
            let s = f.sin();
            let c = f.cos();
            let one = &(&s * &s) + &(&c * &c);
            assert!((one.value() - 1.0).abs() < 1e-12);
            assert!(one.coeffs()[1..].iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn inverse_functions_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let mut f = random_jet(&mut rng, 4);
            f.coeffs_mut()[0] = rng.random_range(0.5..2.0);
            let id = f.ln().exp();
            assert!((&id - &f).max_abs() < 1e-12);
            let sq = f.sqrt();
            assert!((&(&sq * &sq) - &f).max_abs() < 1e-12);
            let one = &f * &f.recip();
            assert!((&one - &Jet::constant(1.0, 4)).max_abs() < 1e-12);
            assert!((&f.powf(3.0) - &f.powi(3)).max_abs() < 1e-12);
            assert!((&f.powf(-2.0) - &f.powi(-2)).max_abs() < 1e-12);
            let ch = f.cosh();
            let sh = f.sinh();
            assert!((&(&(&ch * &ch) - &(&sh * &sh)) - &Jet::constant(1.0, 4)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn partials_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_jet(&mut rng, 4).sin();
        for i in 0..4 {
            for j in 0..4 {
                let a = f.partial(i).partial(j);
                let b = f.partial(j).partial(i);
                assert!((&a - &b).max_abs() < 1e-14);
                assert!((a.value() - f.deriv(&[i, j])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn product_rule_through_partial() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_jet(&mut rng, 3);
        let g = random_jet(&mut rng, 3);
        for v in 0..4 {
            let lhs = (&f * &g).partial(v);
            let rhs = &(&f.partial(v) * &g.truncate(2)) + &(&f.truncate(2) * &g.partial(v));
            assert!((&lhs - &rhs).max_abs() < 1e-13);
        }
    }

    /// Central differences with one Richardson step, taken on the exact
    /// polynomial the jet represents composed with the function.
    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        type F = fn(&Jet<f64>) -> Jet<f64>;
        type G = fn(f64) -> f64;
        let funcs: [(F, G, (f64, f64)); 9] = [
            (|j| j.sin(), f64::sin, (-2.0, 2.0)),
            (|j| j.cos(), f64::cos, (-2.0, 2.0)),
            (|j| j.tan(), f64::tan, (-1.0, 1.0)),
            (|j| j.exp(), f64::exp, (-2.0, 2.0)),
            (|j| j.ln(), f64::ln, (0.5, 3.0)),
            (|j| j.sqrt(), f64::sqrt, (0.5, 3.0)),
            (|j| j.sinh(), f64::sinh, (-2.0, 2.0)),
            (|j| j.cosh(), f64::cosh, (-2.0, 2.0)),
            (|j| j.abs(), f64::abs, (0.5, 3.0)),
        ];
        for (jf, ff, (lo, hi)) in funcs {
            for _ in 0..100 {
                let x = rng.random_range(lo..hi);
                let j = jf(&Jet::variable(x, 0, 3));
                let fd = |k: usize, h: f64| -> f64 {
                    match k {
                        1 => (ff(x + h) - ff(x - h)) / (2.0 * h),
                        2 => (ff(x + h) - 2.0 * ff(x) + ff(x - h)) / (h * h),
                        _ => (ff(x + 2.0 * h) - 2.0 * ff(x + h) + 2.0 * ff(x - h) - ff(x - 2.0 * h))
                            / (2.0 * h * h * h),
                    }
                };
                let rich = |k: usize, h: f64| (4.0 * fd(k, h / 2.0) - fd(k, h)) / 3.0;
                let checks = [(1, 1e-3, 1e-7), (2, 1e-2, 1e-5), (3, 2e-2, 1e-3)];
                for (k, h, tol) in checks {
                    let exact = j.deriv(&vec![0; k]);
                    let approx = rich(k, h);
                    let scale = exact.abs().max(1.0);
                    assert!(
                        (exact - approx).abs() / scale < tol,
                        "order {k} at x={x}: jet {exact} vs fd {approx}"
                    );
                }
            }
        }
    }

    #[test]
    fn eval_at_matches_taylor_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_jet(&mut rng, 2);
        let h = [0.1, -0.2, 0.3, 0.05];
        let g = f.grad();
        let hs = f.hess();
        let mut expect = f.value();
        for i in 0..4 {
            expect += g[i] * h[i];
            for j in 0..4 {
                expect += 0.5 * hs[i][j] * h[i] * h[j];
            }
        }
        assert_relative_eq!(f.eval_at(h), expect, epsilon = 1e-14);
    }

    #[test]
    fn multivector_jets_follow_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mv = |rng: &mut ChaCha8Rng| {
            Jet::<Multivector>::from_coeffs(
                (0..n_coeffs(2))
                    .map(|_| {
                        let mut c = [0.0; 16];
                        c.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
                        Multivector::from_coeffs(c)
                    })
                    .collect(),
            )
        };
        let a = mv(&mut rng);
        let b = mv(&mut rng);
        for v in 0..4 {
            let lhs = a.gp(&b).partial(v);
            let rhs = &a.partial(v).gp(&b.truncate(1)) + &a.truncate(1).gp(&b.partial(v));
            assert!((&lhs - &rhs).max_abs() < 1e-13);
        }
    }
}
