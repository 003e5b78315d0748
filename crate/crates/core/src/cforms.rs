//! Clifford-valued differential forms: sections of Cl(TM) ⊗ ΛT*M.
//!
//! A [`Form`] of degree p stores one value per strictly increasing
//! multi-index, i.e. per 4-bit mask of popcount p. Components are the
//! evaluations on basis vectors, so `dx^0 ∧ dx^1` has component 1 on the
//! mask `0b0011`. A field is carried as its Taylor germ at the evaluation
//! point: a `Form<MvJet>` whose component jets give exact derivatives.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::jet::{Jet, MvJet};
use crate::stal::{reorder_sign, Multivector, CANONICAL_ORDER};

/// Which co-frame the form indices refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    /// `dx^μ`
    Coordinate,
    /// `θ^a`
    Orthonormal,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("degree overflow: {p} + {q} > 4")]
    DegreeOverflow { p: usize, q: usize },
    #[error("frame mismatch: {0:?} vs {1:?}")]
    FrameMismatch(Frame, Frame),
    #[error("operation needs {expected:?} form indices, got {got:?}")]
    WrongFrame { expected: Frame, got: Frame },
    #[error("a {p}-form has {expected} components, got {got}")]
    WrongLength { p: usize, expected: usize, got: usize },
    #[error("multivector part must be grade 1 (off-grade magnitude {0:e})")]
    NotVectorValued(f64),
    #[error("direction index {0} out of range 0..4")]
    InvalidDirection(usize),
    #[error("degree {0} out of range 0..=4")]
    InvalidDegree(usize),
}

const OFFSETS: [usize; 6] = [0, 1, 5, 11, 15, 16];

/// Index masks of degree p in canonical order.
pub fn masks(p: usize) -> &'static [u8] {
    &CANONICAL_ORDER[OFFSETS[p]..OFFSETS[p + 1]]
}

/// Position of a mask within [`masks`] of its degree.
pub fn slot(mask: u8) -> usize {
    let p = mask.count_ones() as usize;
    masks(p).iter().position(|&m| m == mask).expect("mask < 16")
}

/// Number of components of a p-form.
pub fn n_components(p: usize) -> usize {
    OFFSETS[p + 1] - OFFSETS[p]
}

fn indices_of(mask: u8) -> Vec<usize> {
    (0..4).filter(|i| mask >> i & 1 == 1).collect()
}

/// Values a form component may take.
pub trait FormValue:
    Clone + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + Mul<f64, Output = Self>
{
}

impl<T> FormValue for T where
    T: Clone + Add<Output = T> + Sub<Output = T> + Neg<Output = T> + Mul<f64, Output = T>
{
}

/// Values with an associative product: the Clifford product for multivectors,
/// ordinary multiplication for scalars.
pub trait CliffordValue: FormValue {
    fn prod(&self, other: &Self) -> Self;
}

impl CliffordValue for Multivector {
    fn prod(&self, other: &Self) -> Self {
        self.gp(other)
    }
}

impl CliffordValue for MvJet {
    fn prod(&self, other: &Self) -> Self {
        self.gp(other)
    }
}

impl CliffordValue for f64 {
    fn prod(&self, other: &Self) -> Self {
        self * other
    }
}

impl CliffordValue for Jet<f64> {
    fn prod(&self, other: &Self) -> Self {
        self * other
    }
}

/// Multiplication by a ring element used for frame changes.
pub trait Scaled<S> {
    fn scaled(&self, s: &S) -> Self;
}

impl Scaled<f64> for Multivector {
    fn scaled(&self, s: &f64) -> Self {
        *self * *s
    }
}

impl Scaled<f64> for f64 {
    fn scaled(&self, s: &f64) -> Self {
        self * s
    }
}

impl Scaled<Jet<f64>> for MvJet {
    fn scaled(&self, s: &Jet<f64>) -> Self {
        self.scale(s)
    }
}

impl Scaled<Jet<f64>> for Jet<f64> {
    fn scaled(&self, s: &Jet<f64>) -> Self {
        self * s
    }
}

/// Ring elements usable in determinants.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}
impl<S> Ring for S where S: Clone + Add<Output = S> + Sub<Output = S> + Mul<Output = S> {}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    if n == 0 {
        return vec![(vec![], 1.0)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        // insert n-1 at every position; moving it left past k entries flips sign k times
        for pos in (0..=p.len()).rev() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            let flips = p.len() - pos;
            out.push((q, if flips % 2 == 0 { s } else { -s }));
        }
    }
    out
}

/// Determinant of the submatrix `m[rows][cols]`.
pub fn minor<S: Ring>(m: &[[S; 4]; 4], rows: &[usize], cols: &[usize]) -> S {
    let n = rows.len();
    assert!(n >= 1 && n == cols.len());
    let mut acc: Option<S> = None;
    for (perm, sign) in permutations(n) {
        let mut term = m[rows[0]][cols[perm[0]]].clone();
        for k in 1..n {
            term = term * m[rows[k]][cols[perm[k]]].clone();
        }
        acc = Some(match acc {
            None if sign > 0.0 => term,
            None => m[rows[0]][cols[0]].clone() - m[rows[0]][cols[0]].clone() - term,
            Some(a) if sign > 0.0 => a + term,
            Some(a) => a - term,
        });
    }
    acc.expect("non-empty permutation set")
}

/// A multivector-valued (or scalar-valued) exterior form at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Form<T> {
    degree: usize,
    frame: Frame,
    comps: Vec<T>,
}

/// Clifford-valued form with numeric values.
pub type CliffordForm = Form<Multivector>;

/// Clifford-valued form field, carried as jets at the evaluation point.
pub type CliffordFormField = Form<MvJet>;

impl<T: FormValue> Form<T> {
    pub fn new(degree: usize, frame: Frame, comps: Vec<T>) -> Result<Self, FormError> {
        if degree > 4 {
            return Err(FormError::InvalidDegree(degree));
        }
        let expected = n_components(degree);
        if comps.len() != expected {
            return Err(FormError::WrongLength { p: degree, expected, got: comps.len() });
        }
        Ok(Form { degree, frame, comps })
    }

    /// Build from a function of the component mask.
    pub fn from_fn(degree: usize, frame: Frame, f: impl FnMut(u8) -> T) -> Self {
        Form { degree, frame, comps: masks(degree).iter().copied().map(f).collect() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn comps(&self) -> &[T] {
        &self.comps
    }

    pub fn get(&self, mask: u8) -> &T {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        &self.comps[slot(mask)]
    }

    /// Component at an arbitrary index tuple; `None` when an index repeats.
    pub fn at(&self, idx: &[usize]) -> Option<T> {
        assert_eq!(idx.len(), self.degree);
        let mut v: Vec<usize> = idx.to_vec();
        let mut sign = 1.0;
        for i in 0..v.len() {
            for j in 0..v.len() - 1 - i {
                if v[j] > v[j + 1] {
                    v.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        let mask = v.iter().fold(0u8, |m, &i| m | 1 << i);
        Some(self.comps[slot(mask)].clone() * sign)
    }

    /// Relabel the frame without touching components.
    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn map<U: FormValue>(&self, f: impl Fn(&T) -> U) -> Form<U> {
        Form { degree: self.degree, frame: self.frame, comps: self.comps.iter().map(f).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self, FormError> {
        if self.frame != other.frame {
            return Err(FormError::FrameMismatch(self.frame, other.frame));
        }
        if self.degree != other.degree {
            return Err(FormError::WrongLength {
                p: self.degree,
                expected: self.comps.len(),
                got: other.comps.len(),
            });
        }
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| f(a.clone(), b.clone())).collect();
        Ok(Form { degree: self.degree, frame: self.frame, comps })
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FormError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a.clone() * s)
    }

    /// Exterior product of the form parts, combining values with `f`.
    pub fn wedge_with<U: FormValue, V: FormValue>(
        &self,
        other: &Form<U>,
        f: impl Fn(&T, &U) -> V,
    ) -> Result<Form<V>, FormError> {
        let (p, q) = (self.degree, other.degree);
        if p + q > 4 {
            return Err(FormError::DegreeOverflow { p, q });
        }
        if self.frame != other.frame {
            return Err(FormError::FrameMismatch(self.frame, other.frame));
        }
        let comps = masks(p + q)
            .iter()
            .map(|&k| {
                let mut acc: Option<V> = None;
                for &i in masks(p).iter().filter(|&&i| i & k == i) {
                    let j = k ^ i;
                    let term = f(self.get(i), other.get(j)) * reorder_sign(i, j) as f64;
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a + term,
                    });
                }
                acc.expect("every mask splits at least once")
            })
            .collect();
        Ok(Form { degree: p + q, frame: self.frame, comps })
    }

    /// Evaluate on `p` vectors given by their components.
    pub fn eval(&self, vs: &[[f64; 4]]) -> T
    where
        T: Scaled<f64>,
    {
        assert_eq!(vs.len(), self.degree);
        let mut acc: Option<T> = None;
        let m: [[f64; 4]; 4] =
            std::array::from_fn(|i| std::array::from_fn(|k| if i < vs.len() { vs[i][k] } else { 0.0 }));
        for &mask in masks(self.degree) {
            let w = if self.degree == 0 {
                1.0
            } else {
                let rows: Vec<usize> = (0..self.degree).collect();
                minor(&m, &rows, &indices_of(mask))
            };
            let term = self.get(mask).scaled(&w);
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.expect("at least one component")
    }

    /// Change co-frame. `m[new][old]` are the components of the new basis
    /// vectors on the old ones, e.g. `e_a^μ` when going to the orthonormal
    /// frame and `h^a_μ` (indexed `[μ][a]`) when going back.
    pub fn convert<S: Ring>(&self, m: &[[S; 4]; 4], to: Frame) -> Self
    where
        T: Scaled<S>,
    {
        if self.degree == 0 {
            return self.clone().with_frame(to);
        }
        let comps = masks(self.degree)
            .iter()
            .map(|&n| {
                let rows = indices_of(n);
                let mut acc: Option<T> = None;
                for &o in masks(self.degree) {
                    let w = minor(m, &rows, &indices_of(o));
                    let term = self.get(o).scaled(&w);
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a + term,
                    });
                }
                acc.expect("at least one component")
            })
            .collect();
        Form { degree: self.degree, frame: to, comps }
    }
}

impl<T: CliffordValue> Form<T> {
    /// The ⊗∧ product: Clifford product of values, exterior product of forms.
    pub fn tensor_wedge(&self, other: &Self) -> Result<Self, FormError> {
        self.wedge_with(other, |a, b| a.prod(b))
    }

    /// Graded commutator `[A,B] = A⊗∧B − (−1)^{pq} B⊗∧A`.
    pub fn comm_form(&self, other: &Self) -> Result<Self, FormError> {
        let ab = self.tensor_wedge(other)?;
        let ba = other.tensor_wedge(self)?;
        if (self.degree * other.degree) % 2 == 0 {
            ab.sub(&ba)
        } else {
            ab.add(&ba)
        }
    }
}

impl<T: crate::jet::Coef> Form<Jet<T>> {
    /// Exterior derivative, acting on component functions.
    pub fn d(&self) -> Result<Self, FormError> {
        if self.frame != Frame::Coordinate {
            return Err(FormError::WrongFrame { expected: Frame::Coordinate, got: self.frame });
        }
        let p = self.degree;
        if p >= 4 {
            return Err(FormError::DegreeOverflow { p, q: 1 });
        }
        let comps = masks(p + 1)
            .iter()
            .map(|&k| {
                let idx = indices_of(k);
                let mut acc: Option<Jet<T>> = None;
                for (m, &v) in idx.iter().enumerate() {
                    let mut term = self.get(k & !(1 << v)).partial(v);
                    if m % 2 == 1 {
                        term = -term;
                    }
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a + term,
                    });
                }
                acc.expect("non-empty")
            })
            .collect();
        Ok(Form { degree: p + 1, frame: self.frame, comps })
    }

    /// Componentwise partial derivative `∂_v`.
    pub fn partial(&self, v: usize) -> Self {
        self.map(|a| a.partial(v))
    }

    /// Numeric values at the expansion point.
    pub fn value(&self) -> Form<T>
    where
        T: FormValue,
    {
        Form {
            degree: self.degree,
            frame: self.frame,
            comps: self.comps.iter().map(|a| a.value()).collect(),
        }
    }

    pub fn truncate(&self, k: usize) -> Self {
        self.map(|a| a.truncate(k))
    }
}

impl Form<Multivector> {
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, a| m.max(a.max_abs()))
    }
}

impl Form<f64> {
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

impl Form<MvJet> {
    /// Largest value-level coefficient at the point.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, a| m.max(a.value().max_abs()))
    }

    /// Largest coefficient over all Taylor orders.
    pub fn max_abs_all(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, a| m.max(a.max_abs()))
    }

    pub fn zero(degree: usize, frame: Frame, ord: usize) -> Self {
        Form::from_fn(degree, frame, |_| MvJet::zero(ord))
    }

    /// Constant-valued 0-form.
    pub fn constant0(m: Multivector, ord: usize) -> Self {
        Form::from_fn(0, Frame::Coordinate, |_| MvJet::constant(m, ord))
    }

    /// Apply a componentwise linear map on values.
    pub fn map_values(&self, f: impl Fn(&Multivector) -> Multivector) -> Self {
        self.map(|a| a.map(|m| f(&m)))
    }
}

impl Form<Jet<f64>> {
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, a| m.max(a.value().abs()))
    }
}

/// Connection-dependent operators. `omega` is the connection bivector
/// 1-form `ω = ω_μ dx^μ` in coordinate indices.
pub mod covariant {
    use super::*;

    fn check_omega(omega: &CliffordFormField) -> Result<(), FormError> {
        if omega.degree() != 1 {
            return Err(FormError::InvalidDegree(omega.degree()));
        }
        if omega.frame() != Frame::Coordinate {
            return Err(FormError::WrongFrame { expected: Frame::Coordinate, got: omega.frame() });
        }
        Ok(())
    }

    /// `DA = dA + ½[ω, A]` for a multivector field (0-form).
    pub fn absolute_diff(a: &MvJet, omega: &CliffordFormField) -> Result<CliffordFormField, FormError> {
        check_omega(omega)?;
        Ok(Form::from_fn(1, Frame::Coordinate, |m| {
            let mu = m.trailing_zeros() as usize;
            a.partial(mu) + omega.get(m).comm(a) * 0.5
        }))
    }

    /// Exterior covariant differential `𝐃A = dA + (p/2)[ω, A]`; for p = 0
    /// this is the absolute differential.
    pub fn excd(a: &CliffordFormField, omega: &CliffordFormField) -> Result<CliffordFormField, FormError> {
        check_omega(omega)?;
        if a.degree() == 0 {
            return absolute_diff(a.get(0), omega);
        }
        let p = a.degree() as f64;
        a.d()?.add(&omega.comm_form(a)?.scale(p / 2.0))
    }

    /// Extended covariant derivative along the coordinate direction `rho`:
    /// `∂_ρ A + (p/2)[ω_ρ, A]` (for p = 0 the coefficient is ½).
    pub fn ecd_coord(
        a: &CliffordFormField,
        omega: &CliffordFormField,
        rho: usize,
    ) -> Result<CliffordFormField, FormError> {
        check_omega(omega)?;
        if rho > 3 {
            return Err(FormError::InvalidDirection(rho));
        }
        let c = if a.degree() == 0 { 0.5 } else { a.degree() as f64 / 2.0 };
        let w = omega.get(1 << rho);
        Ok(a.map(|x| x.partial(rho) + w.comm(x) * c))
    }

    /// Extended covariant derivative along the frame vector `e_r = e_r^μ ∂_μ`.
    pub fn ecd_frame(
        a: &CliffordFormField,
        omega: &CliffordFormField,
        e: &[[Jet<f64>; 4]; 4],
        r: usize,
    ) -> Result<CliffordFormField, FormError> {
        if r > 3 {
            return Err(FormError::InvalidDirection(r));
        }
        let mut acc: Option<CliffordFormField> = None;
        for mu in 0..4 {
            let term = ecd_coord(a, omega, mu)?.map(|x| x.scale(&e[r][mu]));
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term)?,
            });
        }
        Ok(acc.expect("four directions"))
    }

    /// Reassemble `Σ_ρ dx^ρ ∧ (ECD_ρ A)`.
    pub fn reassemble_ecd(a: &CliffordFormField, omega: &CliffordFormField) -> Result<CliffordFormField, FormError> {
        let mut acc: Option<CliffordFormField> = None;
        for rho in 0..4 {
            let dx = Form::from_fn(1, Frame::Coordinate, |m| {
                let ord = a.comps()[0].order();
                MvJet::constant(Multivector::scalar(if m == 1 << rho { 1.0 } else { 0.0 }), ord)
            });
            let term = dx.tensor_wedge(&ecd_coord(a, omega, rho)?)?;
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term)?,
            });
        }
        Ok(acc.expect("four directions"))
    }

    fn check_vector_valued(c: &CliffordFormField) -> Result<(), FormError> {
        let off = c
            .comps()
            .iter()
            .map(|x| (x - &x.grade_part(1)).max_abs())
            .fold(0.0, f64::max);
        if off > 0.0 {
            return Err(FormError::NotVectorValued(off));
        }
        Ok(())
    }

    /// `d𝔠 + ½[ω, 𝔠]` for a vector-valued form.
    pub fn cartan_excd(c: &CliffordFormField, omega: &CliffordFormField) -> Result<CliffordFormField, FormError> {
        check_omega(omega)?;
        check_vector_valued(c)?;
        c.d()?.add(&omega.comm_form(c)?.scale(0.5))
    }

    /// Cartan's exterior differential assembled from the frame expansion
    /// `𝔠 = e_i ⊗ 𝔠^i`: `e_i ⊗ d𝔠^i + (D e_i) ∧ 𝔠^i`.
    pub fn cartan_differential(
        c: &CliffordFormField,
        omega: &CliffordFormField,
    ) -> Result<CliffordFormField, FormError> {
        check_omega(omega)?;
        check_vector_valued(c)?;
        let ord = c.comps().first().map(|j| j.order()).unwrap_or(0);
        let mut acc: Option<CliffordFormField> = None;
        for i in 0..4 {
            let ei = Multivector::e(i);
            let ci: Form<Jet<f64>> = c.map(|x| x.component(1 << i));
            let dci = ci.d()?.map(|s| MvJet::from_parts(&[(s.clone(), ei)]));
            let de_i = absolute_diff(&MvJet::constant(ei, ord), omega)?;
            let ci_mv = ci.map(|s| MvJet::from_parts(&[(s.clone(), Multivector::scalar(1.0))]));
            let term = dci.add(&de_i.tensor_wedge(&ci_mv)?)?;
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term)?,
            });
        }
        Ok(acc.expect("four generators"))
    }
}

#[cfg(test)]
mod tests {
    use super::covariant::*;
    use super::*;
    use crate::jet::n_coeffs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rmv(rng: &mut ChaCha8Rng) -> Multivector {
        let mut c = [0.0; 16];
        c.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
        Multivector::from_coeffs(c)
    }

    fn rform(rng: &mut ChaCha8Rng, p: usize) -> CliffordForm {
        Form::from_fn(p, Frame::Coordinate, |_| rmv(rng))
    }

    fn rjet(rng: &mut ChaCha8Rng, ord: usize, grade: Option<usize>) -> MvJet {
        MvJet::from_coeffs(
            (0..n_coeffs(ord))
                .map(|_| {
                    let m = rmv(rng);
                    grade.map_or(m, |k| m.grade_part(k))
                })
                .collect(),
        )
    }

    fn rfield(rng: &mut ChaCha8Rng, p: usize, ord: usize, grade: Option<usize>) -> CliffordFormField {
        Form::from_fn(p, Frame::Coordinate, |_| rjet(rng, ord, grade))
    }

    #[test]
    fn mask_tables() {
        assert_eq!(masks(1), &[1, 2, 4, 8]);
        assert_eq!(masks(2).len(), 6);
        for p in 0..=4 {
            for (i, &m) in masks(p).iter().enumerate() {
                assert_eq!(slot(m), i);
                assert_eq!(m.count_ones() as usize, p);
            }
        }
    }

    #[test]
    fn minor_matches_direct_determinant() {
        let m = [[2.0, 1.0, 0.0, 3.0], [1.0, 4.0, 1.0, 0.0], [0.0, 2.0, 5.0, 1.0], [1.0, 0.0, 1.0, 2.0]];
        assert_eq!(minor(&m, &[0, 1], &[0, 1]), 2.0 * 4.0 - 1.0);
        assert_eq!(minor(&m, &[1, 0], &[0, 1]), -7.0);
        // cofactor expansion along the first row
        let full: f64 = minor(&m, &[0, 1, 2, 3], &[0, 1, 2, 3]);
        let mut expect = 0.0;
        for j in 0..4 {
            let cols: Vec<usize> = (0..4).filter(|&c| c != j).collect();
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            expect += s * m[0][j] * minor(&m, &[1, 2, 3], &cols);
        }
        assert!((full - expect).abs() < 1e-12);
    }

    #[test]
    fn soldering_form_square() {
        let theta = Form::from_fn(1, Frame::Orthonormal, |m| Multivector::e(m.trailing_zeros() as usize));
        let tt = theta.tensor_wedge(&theta).unwrap();
        assert_eq!(tt.degree(), 2);
        for &k in masks(2) {
            let idx = indices_of(k);
            let expect = Multivector::e(idx[0]).gp(&Multivector::e(idx[1])) * 2.0;
            assert_eq!(*tt.get(k), expect);
        }
    }

    #[test]
    fn unit_zero_form_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = rform(&mut rng, 2);
        let one = Form::from_fn(0, Frame::Coordinate, |_| Multivector::scalar(1.0));
        assert_eq!(a.tensor_wedge(&one).unwrap(), a);
    }

    #[test]
    fn tensor_wedge_matches_antisymmetrised_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = rform(&mut rng, 1);
        let b = rform(&mut rng, 1);
        let ab = a.tensor_wedge(&b).unwrap();
        let basis: Vec<[f64; 4]> = (0..4).map(|i| std::array::from_fn(|k| (i == k) as u8 as f64)).collect();
        for i in 0..4 {
            for j in 0..4 {
                let direct = a.eval(&[basis[i]]).gp(&b.eval(&[basis[j]]))
                    - a.eval(&[basis[j]]).gp(&b.eval(&[basis[i]]));
                assert!((ab.eval(&[basis[i], basis[j]]) - direct).max_abs() < 1e-14);
            }
        }
        let u: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        assert!((ab.eval(&[u, v]) + ab.eval(&[v, u])).max_abs() < 1e-14);
    }

    #[test]
    fn degree_overflow_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = rform(&mut rng, 3);
        let b = rform(&mut rng, 2);
        assert_eq!(a.tensor_wedge(&b), Err(FormError::DegreeOverflow { p: 3, q: 2 }));
        let c = rform(&mut rng, 1).with_frame(Frame::Orthonormal);
        assert!(matches!(rform(&mut rng, 1).tensor_wedge(&c), Err(FormError::FrameMismatch(..))));
    }

    #[test]
    fn odd_commutator_with_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = rform(&mut rng, 1);
        let lhs = a.comm_form(&a).unwrap();
        let rhs = a.tensor_wedge(&a).unwrap().scale(2.0);
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn d_of_x1_dx0() {
        let x1 = Jet::variable(0.3, 1, 2);
        let f = Form::from_fn(1, Frame::Coordinate, |m| {
            if m == 1 {
                MvJet::from_parts(&[(x1.clone(), Multivector::scalar(1.0))])
            } else {
                MvJet::zero(2)
            }
        });
        let df = f.d().unwrap();
        assert_eq!(df.get(0b0011).value(), Multivector::scalar(-1.0));
        for &k in masks(2).iter().filter(|&&k| k != 0b0011) {
            assert_eq!(df.get(k).value(), Multivector::ZERO);
        }
    }

    #[test]
    fn dd_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in 0..3 {
            let f = rfield(&mut rng, p, 3, None);
            assert!(f.d().unwrap().d().unwrap().max_abs_all() < 1e-10);
        }
    }

    #[test]
    fn d_rejects_orthonormal_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = rfield(&mut rng, 1, 2, None).with_frame(Frame::Orthonormal);
        assert!(matches!(f.d(), Err(FormError::WrongFrame { .. })));
    }

    #[test]
    fn frame_conversion_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = rng.random_range(-0.3..0.3) + if i == j { 1.0 } else { 0.0 };
            }
        }
        // inverse by solving with the 4x4 minors (adjugate)
        let all = [0, 1, 2, 3];
        let det = minor(&m, &all, &all);
        let mut inv = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let rows: Vec<usize> = (0..4).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..4).filter(|&c| c != i).collect();
                let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                inv[i][j] = s * minor(&m, &rows, &cols) / det;
            }
        }
        // columns of m^T are new vectors; the inverse transpose maps back
        let mt: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]));
        let it: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| inv[j][i]));
        for p in 1..=4 {
            let a = rform(&mut rng, p);
            let b = a.convert(&m, Frame::Orthonormal).convert(&inv, Frame::Coordinate);
            assert!(b.sub(&a).unwrap().max_abs() < 1e-12, "p = {p}");
            let c = a.convert(&mt, Frame::Orthonormal).convert(&it, Frame::Coordinate);
            assert!(c.sub(&a).unwrap().max_abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn graded_antisymmetry_and_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let (p, q, r) = (rng.random_range(0..=2), rng.random_range(0..=1), rng.random_range(0..=1));
            let a = rform(&mut rng, p);
            let b = rform(&mut rng, q);
            let c = rform(&mut rng, r);
            let s = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
            let anti = a.comm_form(&b).unwrap().add(&b.comm_form(&a).unwrap().scale(s(p * q))).unwrap();
            assert!(anti.max_abs() < 1e-13);
            let j1 = a.comm_form(&b).unwrap().comm_form(&c).unwrap().scale(s(p * r));
            let j2 = b.comm_form(&c).unwrap().comm_form(&a).unwrap().scale(s(q * p));
            let j3 = c.comm_form(&a).unwrap().comm_form(&b).unwrap().scale(s(r * q));
            let sum = j1.add(&j2).unwrap().add(&j3).unwrap();
            assert!(sum.max_abs() < 1e-11, "p={p} q={q} r={r}: {}", sum.max_abs());
        }
    }

    #[test]
    fn d_is_a_graded_derivation_of_the_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (p, q) in [(0, 1), (1, 1), (1, 2), (2, 0)] {
            let a = rfield(&mut rng, p, 3, None);
            let b = rfield(&mut rng, q, 3, None);
            let lhs = a.comm_form(&b).unwrap().d().unwrap();
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = a
                .d()
                .unwrap()
                .comm_form(&b)
                .unwrap()
                .add(&a.comm_form(&b.d().unwrap()).unwrap().scale(sign))
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().max_abs_all() < 1e-9);
        }
    }

    #[test]
    fn ecd_reassembles_excd() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let omega = rfield(&mut rng, 1, 3, Some(2));
        for p in 1..=3 {
            let a = rfield(&mut rng, p, 3, None);
            let lhs = excd(&a, &omega).unwrap();
            let rhs = reassemble_ecd(&a, &omega).unwrap();
            assert!(lhs.sub(&rhs).unwrap().max_abs_all() < 1e-12);
        }
    }

    #[test]
    fn cartan_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let omega = rfield(&mut rng, 1, 3, Some(2));
        for p in 1..=2 {
            let c = rfield(&mut rng, p, 3, Some(1));
            let a = cartan_excd(&c, &omega).unwrap();
            let b = cartan_differential(&c, &omega).unwrap();
            assert!(a.sub(&b).unwrap().max_abs_all() < 1e-12);
        }
        let bad = rfield(&mut rng, 1, 3, Some(2));
        assert!(matches!(cartan_excd(&bad, &omega), Err(FormError::NotVectorValued(_))));
    }
}
