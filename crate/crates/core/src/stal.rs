//! The spacetime algebra Cl(1,3).
//!
//! A [`Multivector`] holds 16 real coefficients indexed by a 4-bit blade mask.
//! Bit `i` set means generator `i` is present; the canonical blade is the
//! product of its generators in ascending index order. The metric is
//! `eta = diag(+1, -1, -1, -1)`.
//!
//! The same arithmetic serves tangent multivectors (generators `e_a`) and
//! cotangent multiforms (generators `theta^a`); containers carry a [`Role`]
//! when the distinction matters.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

/// Diagonal of the Minkowski metric.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Mask of the volume element `theta^5 = theta^0 theta^1 theta^2 theta^3`.
pub const PSEUDOSCALAR: u8 = 0b1111;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StalError {
    #[error("grade {0} out of range 0..=4")]
    GradeOutOfRange(usize),
    #[error("blade mask {0} out of range 0..16")]
    MaskOutOfRange(u8),
}

/// Which bundle a multivector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Cl(TM): generators are the frame vectors `e_a`.
    Tangent,
    /// Cl(T*M): generators are the co-frame forms `theta^a`.
    Cotangent,
}

/// A canonical basis blade, identified by its generator mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BladeIndex(u8);

impl BladeIndex {
    pub const SCALAR: BladeIndex = BladeIndex(0);
    pub const VOLUME: BladeIndex = BladeIndex(PSEUDOSCALAR);

    pub fn new(mask: u8) -> Result<Self, StalError> {
        if mask < 16 {
            Ok(BladeIndex(mask))
        } else {
            Err(StalError::MaskOutOfRange(mask))
        }
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Generator indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..4).filter(move |i| self.0 >> i & 1 == 1)
    }

    pub fn name(self) -> &'static str {
        BLADE_NAMES[self.0 as usize]
    }

    pub fn all() -> impl Iterator<Item = BladeIndex> {
        (0..16u8).map(BladeIndex)
    }
}

const BLADE_NAMES: [&str; 16] = [
    "1", "e0", "e1", "e01", "e2", "e02", "e12", "e012", "e3", "e03", "e13", "e013", "e23", "e023",
    "e123", "e0123",
];

/// Masks ordered by grade, then lexicographically by index tuple.
pub const CANONICAL_ORDER: [u8; 16] = [
    0b0000, 0b0001, 0b0010, 0b0100, 0b1000, 0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100,
    0b0111, 0b1011, 0b1101, 0b1110, 0b1111,
];

/// Sign of the canonical reordering of `blade(a) * blade(b)`, ignoring the metric.
pub const fn reorder_sign(a: u8, b: u8) -> i8 {
    let mut swaps = 0u32;
    let mut j = 0;
    while j < 4 {
        if (b >> j) & 1 == 1 {
            swaps += (a >> (j + 1)).count_ones();
        }
        j += 1;
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

const fn product_sign(a: u8, b: u8) -> i8 {
    let s = reorder_sign(a, b);
    // shared spatial generators square to -1
    if (a & b & 0b1110).count_ones() % 2 == 1 {
        -s
    } else {
        s
    }
}

const fn build_sign_table() -> [[i8; 16]; 16] {
    let mut t = [[0i8; 16]; 16];
    let mut a = 0;
    while a < 16 {
        let mut b = 0;
        while b < 16 {
            t[a][b] = product_sign(a as u8, b as u8);
            b += 1;
        }
        a += 1;
    }
    t
}

/// `blade(a) * blade(b) = GP_SIGN[a][b] * blade(a ^ b)`.
pub static GP_SIGN: [[i8; 16]; 16] = build_sign_table();

/// Product of `(-1)^{eta}` over the generators of a blade: the sign picked
/// up when every index of the blade is lowered with the metric.
pub const fn metric_sign(mask: u8) -> f64 {
    if (mask & 0b1110).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn reverse_sign(grade: usize) -> f64 {
    if (grade * grade.saturating_sub(1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn grade_of(mask: usize) -> usize {
    (mask as u8).count_ones() as usize
}

/// An element of Cl(1,3).
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Multivector {
    c: [f64; 16],
}

impl Multivector {
    pub const ZERO: Multivector = Multivector { c: [0.0; 16] };

    pub fn zero() -> Self {
        Self::ZERO
    }

    pub fn from_coeffs(c: [f64; 16]) -> Self {
        Multivector { c }
    }

    pub fn coeffs(&self) -> &[f64; 16] {
        &self.c
    }

    pub fn scalar(s: f64) -> Self {
        let mut m = Self::ZERO;
        m.c[0] = s;
        m
    }

    /// Unit blade with the given mask.
    pub fn blade(mask: u8) -> Self {
        let mut m = Self::ZERO;
        m.c[mask as usize & 15] = 1.0;
        m
    }

    /// Generator `e_i` (or `theta^i`).
    pub fn e(i: usize) -> Self {
        Self::blade(1 << i)
    }

    /// Grade-1 element with the given components on the generators.
    pub fn vector(v: [f64; 4]) -> Self {
        let mut m = Self::ZERO;
        for (i, x) in v.into_iter().enumerate() {
            m.c[1 << i] = x;
        }
        m
    }

    /// Product of generators in the given order, e.g. `[0, 1]` is `e0 e1`.
    pub fn product_of(indices: &[usize]) -> Self {
        indices
            .iter()
            .fold(Self::scalar(1.0), |acc, &i| acc.gp(&Self::e(i)))
    }

    pub fn pseudoscalar() -> Self {
        Self::blade(PSEUDOSCALAR)
    }

    pub fn get(&self, mask: u8) -> f64 {
        self.c[mask as usize & 15]
    }

    pub fn scalar_part(&self) -> f64 {
        self.c[0]
    }

    /// Geometric (Clifford) product.
    pub fn gp(&self, other: &Multivector) -> Multivector {
        let mut out = [0.0; 16];
        for a in 0..16 {
            let x = self.c[a];
            if x == 0.0 {
                continue;
            }
            let row = &GP_SIGN[a];
            for b in 0..16 {
                let y = other.c[b];
                if y != 0.0 {
                    out[a ^ b] += row[b] as f64 * x * y;
                }
            }
        }
        Multivector { c: out }
    }

    /// Exterior product: for blades, the product when they share no generator.
    pub fn wedge(&self, other: &Multivector) -> Multivector {
        self.filtered_product(other, |a, b| a & b == 0)
    }

    /// Left contraction `A ⌟ B`: keeps blade pairs with `a ⊆ b`.
    pub fn lcontr(&self, other: &Multivector) -> Multivector {
        self.filtered_product(other, |a, b| a & b == a)
    }

    /// Right contraction `A ⌞ B`: keeps blade pairs with `b ⊆ a`.
    pub fn rcontr(&self, other: &Multivector) -> Multivector {
        self.filtered_product(other, |a, b| a & b == b)
    }

    fn filtered_product(&self, other: &Multivector, keep: impl Fn(usize, usize) -> bool) -> Self {
        let mut out = [0.0; 16];
        for a in 0..16 {
            let x = self.c[a];
            if x == 0.0 {
                continue;
            }
            for b in 0..16 {
                let y = other.c[b];
                if y != 0.0 && keep(a, b) {
                    out[a ^ b] += GP_SIGN[a][b] as f64 * x * y;
                }
            }
        }
        Multivector { c: out }
    }

    /// Scalar product: sum over grades of Gram determinants, `<Ã B>_0`.
    pub fn scalar_prod(&self, other: &Multivector) -> f64 {
        (0..16)
            .map(|m| {
                reverse_sign(grade_of(m)) * GP_SIGN[m][m] as f64 * self.c[m] * other.c[m]
            })
            .sum()
    }

    pub fn reverse(&self) -> Multivector {
        self.map_by_mask(|m, x| reverse_sign(grade_of(m)) * x)
    }

    /// Grade involution: grade-k part times `(-1)^k`.
    pub fn involute(&self) -> Multivector {
        self.map_by_mask(|m, x| if grade_of(m) % 2 == 0 { x } else { -x })
    }

    /// Grade-k projection.
    pub fn grade(&self, k: usize) -> Result<Multivector, StalError> {
        if k > 4 {
            return Err(StalError::GradeOutOfRange(k));
        }
        Ok(self.grade_part(k))
    }

    pub(crate) fn grade_part(&self, k: usize) -> Multivector {
        self.map_by_mask(|m, x| if grade_of(m) == k { x } else { 0.0 })
    }

    pub fn even_part(&self) -> Multivector {
        self.map_by_mask(|m, x| if grade_of(m) % 2 == 0 { x } else { 0.0 })
    }

    pub fn odd_part(&self) -> Multivector {
        self.map_by_mask(|m, x| if grade_of(m) % 2 == 1 { x } else { 0.0 })
    }

    /// `⋆A = Ã θ⁵`.
    pub fn hodge(&self) -> Multivector {
        self.reverse().gp(&Self::pseudoscalar())
    }

    /// Inverse star: `(-1)^{p(4-p)+1} ⋆` on each grade p.
    pub fn hodge_inv(&self) -> Multivector {
        let mut out = Self::ZERO;
        for p in 0..=4 {
            let s = if (p * (4 - p) + 1) % 2 == 0 { 1.0 } else { -1.0 };
            out += self.grade_part(p).hodge() * s;
        }
        out
    }

    /// Bare commutator `AB - BA`.
    pub fn comm(&self, other: &Multivector) -> Multivector {
        self.gp(other) - other.gp(self)
    }

    /// Lowers (or raises) every generator index with the metric. Maps the
    /// coefficient on `e_a e_b ...` to the one on `e^a e^b ...`.
    pub fn lower(&self) -> Multivector {
        self.map_by_mask(|m, x| metric_sign(m as u8) * x)
    }

    /// `A† = e⁰ Ã e⁰`.
    pub fn dagger(&self) -> Multivector {
        let e0 = Self::e(0);
        e0.gp(&self.reverse()).gp(&e0)
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    fn map_by_mask(&self, f: impl Fn(usize, f64) -> f64) -> Multivector {
        let mut out = [0.0; 16];
        for (m, o) in out.iter_mut().enumerate() {
            *o = f(m, self.c[m]);
        }
        Multivector { c: out }
    }
}

impl Index<usize> for Multivector {
    type Output = f64;
    fn index(&self, mask: usize) -> &f64 {
        &self.c[mask]
    }
}

impl IndexMut<usize> for Multivector {
    fn index_mut(&mut self, mask: usize) -> &mut f64 {
        &mut self.c[mask]
    }
}

impl Add for Multivector {
    type Output = Multivector;
    fn add(mut self, rhs: Multivector) -> Multivector {
        self += rhs;
        self
    }
}

impl AddAssign for Multivector {
    fn add_assign(&mut self, rhs: Multivector) {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
    }
}

impl Sub for Multivector {
    type Output = Multivector;
    fn sub(mut self, rhs: Multivector) -> Multivector {
        self -= rhs;
        self
    }
}

impl SubAssign for Multivector {
    fn sub_assign(&mut self, rhs: Multivector) {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self * -1.0
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;
    fn mul(mut self, s: f64) -> Multivector {
        for a in self.c.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl Mul<Multivector> for f64 {
    type Output = Multivector;
    fn mul(self, m: Multivector) -> Multivector {
        m * self
    }
}

impl Mul for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: Multivector) -> Multivector {
        self.gp(&rhs)
    }
}

impl Div<f64> for Multivector {
    type Output = Multivector;
    fn div(self, s: f64) -> Multivector {
        self * (1.0 / s)
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &m in CANONICAL_ORDER.iter() {
            let x = self.c[m as usize];
            if x == 0.0 {
                continue;
            }
            if first {
                write!(f, "{}", x)?;
            } else if x < 0.0 {
                write!(f, " - {}", -x)?;
            } else {
                write!(f, " + {}", x)?;
            }
            if m != 0 {
                write!(f, "*{}", BLADE_NAMES[m as usize])?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: concatenate the generator lists, bubble-sort while
    /// counting swaps, then contract adjacent equal generators with the metric.
    fn oracle(a: u8, b: u8) -> (f64, u8) {
        let mut word: Vec<usize> = (0..4).filter(|i| a >> i & 1 == 1).collect();
        word.extend((0..4).filter(|i| b >> i & 1 == 1));
        let mut sign = 1.0;
        let n = word.len();
        for i in 0..n {
            for j in 0..n - 1 - i {
                if word[j] > word[j + 1] {
                    word.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        let mut out = Vec::new();
        let mut i = 0;
        while i < word.len() {
            if i + 1 < word.len() && word[i] == word[i + 1] {
                sign *= ETA[word[i]];
                i += 2;
            } else {
                out.push(word[i]);
                i += 1;
            }
        }
        let mask = out.iter().fold(0u8, |m, &g| m | (1 << g));
        (sign, mask)
    }

    fn random_mv(rng: &mut ChaCha8Rng) -> Multivector {
        let mut c = [0.0; 16];
        for x in c.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
        Multivector::from_coeffs(c)
    }

    fn random_grade(rng: &mut ChaCha8Rng, k: usize) -> Multivector {
        random_mv(rng).grade_part(k)
    }

    #[test]
    fn all_blade_products_match_oracle() {
        for a in 0..16u8 {
            for b in 0..16u8 {
                let (s, m) = oracle(a, b);
                let p = Multivector::blade(a).gp(&Multivector::blade(b));
                let mut expect = Multivector::ZERO;
                expect[m as usize] = s;
                assert_eq!(p, expect, "blade product {a} * {b}");
            }
        }
    }

    #[test]
    fn generator_squares() {
        assert_eq!(Multivector::e(0).gp(&Multivector::e(0)), Multivector::scalar(1.0));
        for i in 1..4 {
            assert_eq!(Multivector::e(i).gp(&Multivector::e(i)), Multivector::scalar(-1.0));
        }
        let i5 = Multivector::pseudoscalar();
        assert_eq!(i5.gp(&i5), Multivector::scalar(-1.0));
    }

    #[test]
    fn wedge_examples() {
        let e01 = Multivector::e(0).wedge(&Multivector::e(1));
        assert_eq!(e01, Multivector::blade(0b0011));
        assert_eq!(Multivector::e(0).wedge(&Multivector::e(0)), Multivector::ZERO);
        let e23 = Multivector::blade(0b1100);
        assert_eq!(e01.wedge(&e23), Multivector::pseudoscalar());
    }

    #[test]
    fn scalar_product_examples() {
        let e01 = Multivector::blade(0b0011);
        assert_eq!(Multivector::e(0).scalar_prod(&Multivector::e(0)), 1.0);
        assert_eq!(e01.scalar_prod(&e01), -1.0);
        assert_eq!(Multivector::e(0).scalar_prod(&Multivector::blade(0b0110)), 0.0);
    }

    #[test]
    fn scalar_product_is_gram_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v: Vec<Multivector> = (0..4).map(|_| random_grade(&mut rng, 1)).collect();
            let a = v[0].wedge(&v[1]);
            let b = v[2].wedge(&v[3]);
            let g = |x: &Multivector, y: &Multivector| x.gp(y).scalar_part() * 0.5
                + y.gp(x).scalar_part() * 0.5;
            let det = g(&v[0], &v[2]) * g(&v[1], &v[3]) - g(&v[0], &v[3]) * g(&v[1], &v[2]);
            assert_abs_diff_eq!(a.scalar_prod(&b), det, epsilon = 1e-12);
        }
    }

    #[test]
    fn contraction_examples() {
        let e0 = Multivector::e(0);
        let e01 = Multivector::blade(0b0011);
        assert_eq!(e0.lcontr(&e01), Multivector::e(1));
        assert_eq!(e01.lcontr(&e0), Multivector::ZERO);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_mv(&mut rng);
        assert_eq!(Multivector::scalar(1.0).lcontr(&b), b);
    }

    #[test]
    fn reverse_and_grade_examples() {
        let e01 = Multivector::blade(0b0011);
        assert_eq!(e01.reverse(), -e01);
        assert_eq!(Multivector::e(0).reverse(), Multivector::e(0));
        let i5 = Multivector::pseudoscalar();
        assert_eq!(i5.reverse(), i5);
        let a = Multivector::scalar(1.0) + Multivector::e(0) + e01;
        assert_eq!(a.grade(1).unwrap(), Multivector::e(0));
        assert!(a.grade(5).is_err());
        let p = Multivector::e(0).gp(&Multivector::e(1));
        assert_eq!(p.grade(2).unwrap(), e01);
    }

    #[test]
    fn hodge_examples() {
        let i5 = Multivector::pseudoscalar();
        assert_eq!(Multivector::scalar(1.0).hodge(), i5);
        assert_eq!(i5.hodge(), Multivector::scalar(-1.0));
        assert_eq!(Multivector::e(0).hodge(), Multivector::blade(0b1110));
    }

    #[test]
    fn hodge_inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = random_mv(&mut rng);
            let back = a.hodge().hodge_inv();
            assert_abs_diff_eq!((back - a).max_abs(), 0.0, epsilon = 1e-14);
            let back = a.hodge_inv().hodge();
            assert_abs_diff_eq!((back - a).max_abs(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn commutator_examples() {
        let e01 = Multivector::blade(0b0011);
        let e12 = Multivector::blade(0b0110);
        let c = e01.comm(&e12);
        assert_eq!(c - c.grade_part(2), Multivector::ZERO);
        assert!(c.get(0b0101) != 0.0);
        assert_eq!((c - Multivector::blade(0b0101) * c.get(0b0101)).max_abs(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_mv(&mut rng);
        assert_eq!(a.comm(&a).max_abs(), 0.0);
        assert_eq!(Multivector::scalar(2.0).comm(&a), Multivector::ZERO);
    }

    #[test]
    fn vector_anticommutator_is_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_grade(&mut rng, 1);
            let b = random_grade(&mut rng, 1);
            let s = a.gp(&b) + b.gp(&a);
            let dot: f64 = (0..4).map(|i| ETA[i] * a.get(1 << i) * b.get(1 << i)).sum();
            assert_abs_diff_eq!((s - Multivector::scalar(2.0 * dot)).max_abs(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn lower_is_metric_isomorphism() {
        // e_a -> e^a = eta^{aa} e_a is an algebra isomorphism onto itself
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let a = random_mv(&mut rng);
            let b = random_mv(&mut rng);
            let lhs = a.gp(&b).lower();
            let rhs = a.lower().gp(&b.lower());
            assert_abs_diff_eq!((lhs - rhs).max_abs(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn display_uses_blade_names() {
        let m = Multivector::scalar(2.0) - Multivector::blade(0b0011) * 0.5
            + Multivector::pseudoscalar();
        assert_eq!(m.to_string(), "2 - 0.5*e01 + 1*e0123");
        assert_eq!(Multivector::ZERO.to_string(), "0");
    }
}
