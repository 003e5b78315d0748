//! The Dirac operator on the Clifford bundle of forms.
//!
//! A scalar p-form is a [`FormField`] (coordinate components as jets). For
//! Clifford products it is packed into an [`MvJet`] holding its orthonormal
//! components, `θ^K` ↔ blade `K`. In that picture the covariant derivative
//! along `e_a` is `∂_{e_a} + ½[ω_a♭, ·]`, where `ω_a♭` is the connection
//! bivector with its indices lowered, and `∂ = θ^a D_{e_a}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cforms::{masks, Form, Frame};
use crate::geometry::{GeometryError, Snapshot, J};
use crate::jet::{n_coeffs, MvJet};
use crate::stal::{Multivector, ETA};

/// Scalar-valued form field with jet components.
pub type FormField = Form<J>;

/// Sign of the curvature term in `∂²A = □A + s Ric(A)` and
/// `(∂∧∂)θ^a = s ℛ^a`, with `Ric` normalised so that `R_ab − ½η_ab R = T_ab`
/// has positive energy density. The commonly quoted `+1` fails off vacuum.
pub const RICCI_OPERATOR_SIGN: f64 = -1.0;

/// The sign as usually written.
pub const RICCI_OPERATOR_SIGN_ALT: f64 = 1.0;

fn theta(a: usize) -> Multivector {
    Multivector::e(a)
}

fn sum_jet(it: impl Iterator<Item = MvJet>) -> MvJet {
    it.reduce(|a, b| a + b).expect("non-empty sum")
}

fn need(have: usize, need: usize) -> Result<(), GeometryError> {
    if have < need {
        Err(GeometryError::Order { need, have })
    } else {
        Ok(())
    }
}

fn field_order(f: &FormField) -> usize {
    f.comps().iter().map(|c| c.order()).min().unwrap_or(0)
}

/// Orthonormal components of a form field, packed into a multivector jet.
pub fn clifford_field(s: &Snapshot, f: &FormField) -> MvJet {
    let o = match f.frame() {
        Frame::Coordinate => f.convert(&s.e, Frame::Orthonormal),
        Frame::Orthonormal => f.clone(),
    };
    let parts: Vec<(J, Multivector)> =
        masks(f.degree()).iter().map(|&k| (o.get(k).clone(), Multivector::blade(k))).collect();
    MvJet::from_parts(&parts)
}

/// Grade-p part of a Clifford field as a coordinate form field.
pub fn form_part(s: &Snapshot, x: &MvJet, p: usize) -> FormField {
    Form::from_fn(p, Frame::Orthonormal, |k| x.component(k)).convert(&s.h_transposed(), Frame::Coordinate)
}

/// `½ ω_a♭`, the connection acting on covector-valued Clifford fields.
pub fn connection(s: &Snapshot, a: usize) -> MvJet {
    s.omega_frame[a].map(|w| w.lower() * 0.5)
}

fn frame_partial(s: &Snapshot, a: usize, x: &MvJet) -> MvJet {
    sum_jet((0..4).map(|m| x.partial(m).scale(&s.e[a][m])))
}

/// `D_{e_a} X`.
pub fn cov(s: &Snapshot, a: usize, x: &MvJet) -> MvJet {
    &frame_partial(s, a, x) + &connection(s, a).comm(x)
}

/// `∂X = θ^a D_{e_a} X`.
pub fn dirac(s: &Snapshot, x: &MvJet) -> MvJet {
    sum_jet((0..4).map(|a| cov(s, a, x).left_mul(&theta(a))))
}

/// `∂∧X`.
pub fn dirac_wedge(s: &Snapshot, x: &MvJet) -> MvJet {
    sum_jet((0..4).map(|a| cov(s, a, x).map(|v| theta(a).wedge(&v))))
}

/// `∂⌟X`.
pub fn dirac_contract(s: &Snapshot, x: &MvJet) -> MvJet {
    sum_jet((0..4).map(|a| cov(s, a, x).map(|v| theta(a).lcontr(&v))))
}

/// Second covariant derivatives `∇²_{ab} X = D_a D_b X − Γ^c_{ab} D_c X`.
fn hessian(s: &Snapshot, x: &MvJet) -> [[MvJet; 4]; 4] {
    let first: [MvJet; 4] = std::array::from_fn(|c| cov(s, c, x));
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let dd = cov(s, a, &first[b]);
            let corr = sum_jet((0..4).map(|c| first[c].scale(&s.frame_gamma[c][a][b])));
            dd - corr
        })
    })
}

/// Covariant D'Alembertian `□ = ∂·∂ = η^{ab} ∇²_{ab}`.
pub fn dalembertian(s: &Snapshot, x: &MvJet) -> MvJet {
    let h = hessian(s, x);
    sum_jet((0..4).map(|a| &h[a][a] * ETA[a]))
}

/// Ricci operator `∂∧∂ = θ^a∧θ^b ∇²_{ab}`.
pub fn ricci_operator(s: &Snapshot, x: &MvJet) -> MvJet {
    let h = hessian(s, x);
    let mut terms = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                terms.push(h[a][b].left_mul(&theta(a).wedge(&theta(b))));
            }
        }
    }
    sum_jet(terms.into_iter())
}

/// `(−1)^p`
fn parity(p: usize) -> f64 {
    if p % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Exterior derivative; `None` on 4-forms.
pub fn exterior(f: &FormField) -> Result<Option<FormField>, GeometryError> {
    if f.degree() == 4 {
        return Ok(None);
    }
    need(field_order(f), 1)?;
    Ok(Some(f.d()?))
}

/// Codifferential `δA = (−1)^p ⋆⁻¹ d ⋆ A`; `None` on 0-forms.
pub fn codifferential(s: &Snapshot, f: &FormField) -> Result<Option<FormField>, GeometryError> {
    let p = f.degree();
    if p == 0 {
        return Ok(None);
    }
    let st = s.star(f);
    need(field_order(&st), 1)?;
    Ok(Some(s.star_inv(&st.d()?).scale(parity(p))))
}

fn packed(s: &Snapshot, f: Option<FormField>, ord: usize) -> MvJet {
    match f {
        Some(f) => clifford_field(s, &f),
        None => MvJet::zero(ord),
    }
}

/// `dA − δA` as a Clifford field.
pub fn d_minus_delta(s: &Snapshot, f: &FormField) -> Result<MvJet, GeometryError> {
    let ord = field_order(f).min(s.order);
    let d = packed(s, exterior(f)?, ord);
    let del = packed(s, codifferential(s, f)?, ord);
    Ok(d - del)
}

/// Value of `∂A` at the snapshot point.
pub fn dirac_apply(s: &Snapshot, f: &FormField) -> Result<Multivector, GeometryError> {
    need(field_order(f), 1)?;
    Ok(dirac(s, &clifford_field(s, f)).value())
}

/// `‖∂A − (dA − δA)‖`.
pub fn split_residual(s: &Snapshot, f: &FormField) -> Result<f64, GeometryError> {
    let lhs = dirac_apply(s, f)?;
    let rhs = d_minus_delta(s, f)?.value();
    Ok((lhs - rhs).max_abs())
}

/// The second-order operators applied to one field, as values.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacians {
    /// `∂²A`, from applying the Dirac operator twice.
    pub hodge: Multivector,
    /// `−(dδ + δd)A`
    pub hodge_forms: Multivector,
    /// `□A`
    pub dalembertian: Multivector,
    /// `(∂∧∂)A`
    pub ricci_part: Multivector,
}

impl Laplacians {
    /// `‖∂² + dδ + δd‖`
    pub fn split_residual(&self) -> f64 {
        (self.hodge - self.hodge_forms).max_abs()
    }

    /// `‖∂² − ∂·∂ − ∂∧∂‖`
    pub fn decomposition_residual(&self) -> f64 {
        (self.hodge - self.dalembertian - self.ricci_part).max_abs()
    }
}

/// `−(dδ + δd)A` as a Clifford field.
pub fn hodge_laplacian_forms(s: &Snapshot, f: &FormField) -> Result<MvJet, GeometryError> {
    let ord = field_order(f).min(s.order);
    let dd = match codifferential(s, f)? {
        Some(del) => packed(s, exterior(&del)?, ord),
        None => MvJet::zero(ord),
    };
    let ddel = match exterior(f)? {
        Some(df) => packed(s, codifferential(s, &df)?, ord),
        None => MvJet::zero(ord),
    };
    Ok(-(dd + ddel))
}

pub fn laplacians(s: &Snapshot, f: &FormField) -> Result<Laplacians, GeometryError> {
    need(field_order(f), 2)?;
    let x = clifford_field(s, f);
    Ok(Laplacians {
        hodge: dirac(s, &dirac(s, &x)).value(),
        hodge_forms: hodge_laplacian_forms(s, f)?.value(),
        dalembertian: dalembertian(s, &x).value(),
        ricci_part: ricci_operator(s, &x).value(),
    })
}

/// `Ric(A)` on a 1-form given by orthonormal components: `R^a_b A_a θ^b`.
pub fn ricci_action(s: &Snapshot, v: &Multivector) -> Multivector {
    let mut out = Multivector::ZERO;
    for b in 0..4 {
        let c: f64 = (0..4).map(|a| ETA[a] * s.ricci[a][b] * v.get(1 << a)).sum();
        out = out + theta(b) * c;
    }
    out
}

/// `‖∂²A − □A − sign·Ric(A)‖` for a 1-form field.
pub fn weitzenbock_residual(s: &Snapshot, f: &FormField, sign: f64) -> Result<f64, GeometryError> {
    assert_eq!(f.degree(), 1, "the Weitzenböck identity is stated for 1-forms");
    let l = laplacians(s, f)?;
    let v = clifford_field(s, f).value();
    Ok((l.hodge - l.dalembertian - ricci_action(s, &v) * sign).max_abs())
}

/// Ricci 1-forms `ℛ^a = R^a_b θ^b`.
pub fn ricci_one_forms(s: &Snapshot) -> [Multivector; 4] {
    std::array::from_fn(|a| {
        (0..4).fold(Multivector::ZERO, |acc, b| acc + theta(b) * (ETA[a] * s.ricci[a][b]))
    })
}

fn theta_field(s: &Snapshot, a: usize) -> MvJet {
    MvJet::constant(theta(a), s.order)
}

/// `max_a ‖(∂∧∂)θ^a − sign·ℛ^a‖`.
pub fn ricci_operator_residual_with(s: &Snapshot, sign: f64) -> f64 {
    let r = ricci_one_forms(s);
    (0..4)
        .map(|a| (ricci_operator(s, &theta_field(s, a)).value() - r[a] * sign).max_abs())
        .fold(0.0, f64::max)
}

pub fn ricci_operator_residual(s: &Snapshot) -> f64 {
    ricci_operator_residual_with(s, RICCI_OPERATOR_SIGN)
}

/// `−(∂·∂)θ^a + ∂∧(∂·θ^a) + ∂⌟(∂∧θ^a)`.
pub fn tetrad_wave_lhs(s: &Snapshot, a: usize) -> Multivector {
    let th = theta_field(s, a);
    let boxed = dalembertian(s, &th).value();
    let grad_div = dirac_wedge(s, &dirac_contract(s, &th)).value();
    let div_curl = dirac_contract(s, &dirac_wedge(s, &th)).value();
    grad_div + div_curl - boxed
}

/// Same left side with `∂·` and `∂∧` replaced by `−δ` and `d`:
/// `−□θ^a − dδθ^a − δdθ^a`.
pub fn tetrad_wave_lhs_forms(s: &Snapshot, a: usize) -> Result<Multivector, GeometryError> {
    let boxed = dalembertian(s, &theta_field(s, a)).value();
    let lap = hodge_laplacian_forms(s, &s.theta_scalar(a))?.value();
    Ok(lap - boxed)
}

/// `𝒯^a − ½Tθ^a` with `𝒯^a = T^a_b θ^b`.
pub fn tetrad_wave_rhs(t: &[[f64; 4]; 4], a: usize) -> Multivector {
    let trace: f64 = (0..4).map(|b| ETA[b] * t[b][b]).sum();
    let ta = (0..4).fold(Multivector::ZERO, |acc, b| acc + theta(b) * (ETA[a] * t[a][b]));
    ta - theta(a) * (0.5 * trace)
}

/// `max_a ‖LHS − sign·(𝒯^a − ½Tθ^a)‖` for the tetrad wave equation.
pub fn tetrad_wave_residual_with(s: &Snapshot, t: &[[f64; 4]; 4], sign: f64) -> f64 {
    (0..4).map(|a| (tetrad_wave_lhs(s, a) - tetrad_wave_rhs(t, a) * sign).max_abs()).fold(0.0, f64::max)
}

pub fn tetrad_wave_residual(s: &Snapshot, t: &[[f64; 4]; 4]) -> f64 {
    tetrad_wave_residual_with(s, t, RICCI_OPERATOR_SIGN)
}

/// Agreement of the Clifford and the d/δ assemblies of the wave operator.
pub fn tetrad_wave_route_residual(s: &Snapshot) -> Result<f64, GeometryError> {
    let mut r: f64 = 0.0;
    for a in 0..4 {
        r = r.max((tetrad_wave_lhs(s, a) - tetrad_wave_lhs_forms(s, a)?).max_abs());
    }
    Ok(r)
}

/// `max_a ‖(□ + T)θ^a‖`, the boxed wave equation claimed for the tetrad.
pub fn evans_residual(s: &Snapshot, t: &[[f64; 4]; 4]) -> f64 {
    let trace: f64 = (0..4).map(|b| ETA[b] * t[b][b]).sum();
    (0..4)
        .map(|a| (dalembertian(s, &theta_field(s, a)).value() + theta(a) * trace).max_abs())
        .fold(0.0, f64::max)
}

/// A single evaluation refuting a universal equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub point: [f64; 4],
    pub magnitude: f64,
}

pub fn evans_witness(s: &Snapshot, t: &[[f64; 4]; 4]) -> Witness {
    Witness { point: s.point, magnitude: evans_residual(s, t) }
}

/// Coordinate-index form of the tetrad equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentForm {
    /// `e_a^μ (LHS_a)_ν` against `R^μ_ν` from the coordinate Riemann tensor.
    pub assembly: f64,
    /// `max |R^μ_ν − ½R δ^μ_ν − T^μ_ν|`
    pub field_equation: f64,
}

pub fn component_form(s: &Snapshot, t: &[[f64; 4]; 4]) -> ComponentForm {
    let e = s.e_values();
    let h = s.h_values();
    let ginv: [[f64; 4]; 4] = std::array::from_fn(|m| std::array::from_fn(|n| s.ginv[m][n].value()));
    let lhs: [Multivector; 4] = std::array::from_fn(|a| tetrad_wave_lhs(s, a));
    let rc = s.riemann_coordinate();
    let ric: [[f64; 4]; 4] = std::array::from_fn(|n| {
        std::array::from_fn(|q| {
            let mut acc = 0.0;
            for m in 0..4 {
                for r in 0..4 {
                    acc += ginv[m][r] * rc[m][n][r][q];
                }
            }
            acc
        })
    });
    let scalar: f64 = (0..4).flat_map(|m| (0..4).map(move |n| (m, n))).map(|(m, n)| ginv[m][n] * ric[m][n]).sum();
    let mut assembly: f64 = 0.0;
    let mut field: f64 = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            let assembled: f64 = (0..4)
                .map(|a| e[a][mu] * (0..4).map(|b| lhs[a].get(1 << b) * h[b][nu]).sum::<f64>())
                .sum();
            let r_up: f64 = (0..4).map(|l| ginv[mu][l] * ric[l][nu]).sum();
            // T^μ_ν = e_a^μ η^{aa} T_ab h^b_ν
            let t_up: f64 = (0..4)
                .flat_map(|a| (0..4).map(move |b| (a, b)))
                .map(|(a, b)| e[a][mu] * ETA[a] * t[a][b] * h[b][nu])
                .sum();
            let delta = if mu == nu { 1.0 } else { 0.0 };
            assembly = assembly.max((assembled - RICCI_OPERATOR_SIGN * r_up).abs());
            field = field.max((r_up - 0.5 * scalar * delta - t_up).abs());
        }
    }
    ComponentForm { assembly, field_equation: field }
}

/// Residuals of the operator identities `dd = δδ = 0` and the star relations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatorIdentities {
    pub dd: f64,
    pub delta_delta: f64,
    /// `δ⋆ = (−1)^{p+1} ⋆d`
    pub delta_star: f64,
    /// `⋆δ = (−1)^p d⋆` (the usual right side `⋆d` has the wrong degree)
    pub star_delta: f64,
    /// `dδ⋆ = ⋆dδ`, the usual form
    pub d_delta_star_alternative: f64,
    /// `dδ⋆ = ⋆δd` (derived)
    pub d_delta_star: f64,
    /// `⋆dδ = δd⋆`
    pub star_d_delta: f64,
    /// `d∂² = ∂²d`
    pub d_box: f64,
    /// `δ∂² = ∂²δ`
    pub delta_box: f64,
    /// `⋆∂² = ∂²⋆`
    pub star_box: f64,
}

impl OperatorIdentities {
    /// Largest residual among the relations expected to hold.
    pub fn max_holding(&self) -> f64 {
        [
            self.dd,
            self.delta_delta,
            self.delta_star,
            self.star_delta,
            self.d_delta_star,
            self.star_d_delta,
            self.d_box,
            self.delta_box,
            self.star_box,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn zero_or(f: Option<FormField>) -> f64 {
    f.map(|f| f.value().max_abs()).unwrap_or(0.0)
}

fn diff(a: Option<FormField>, b: Option<FormField>) -> Result<f64, GeometryError> {
    Ok(match (a, b) {
        (Some(a), Some(b)) => a.value().sub(&b.value())?.max_abs(),
        (Some(a), None) | (None, Some(a)) => a.value().max_abs(),
        (None, None) => 0.0,
    })
}

fn opt_d(f: Option<FormField>) -> Result<Option<FormField>, GeometryError> {
    match f {
        Some(f) => exterior(&f),
        None => Ok(None),
    }
}

fn opt_delta(s: &Snapshot, f: Option<FormField>) -> Result<Option<FormField>, GeometryError> {
    match f {
        Some(f) => codifferential(s, &f),
        None => Ok(None),
    }
}

/// `∂²` through the Clifford route, restricted to grade p.
fn box_form(s: &Snapshot, f: &FormField) -> FormField {
    let x = dirac(s, &dirac(s, &clifford_field(s, f)));
    form_part(s, &x, f.degree())
}

/// Evaluate every operator identity on one p-form field. Needs third
/// derivatives of the metric and of the field.
pub fn operator_identities(s: &Snapshot, f: &FormField) -> Result<OperatorIdentities, GeometryError> {
    need(s.order, 3)?;
    need(field_order(f), 3)?;
    let p = f.degree();
    let df = exterior(f)?;
    let delf = codifferential(s, f)?;
    let star_f = s.star(f);
    let dd = zero_or(opt_d(df.clone())?);
    let delta_delta = zero_or(opt_delta(s, delf.clone())?);

    let delta_star = diff(codifferential(s, &star_f)?, df.clone().map(|d| s.star(&d).scale(-parity(p))))?;
    let star_delta = diff(delf.clone().map(|d| s.star(&d)), exterior(&star_f)?.map(|d| d.scale(parity(p))))?;

    let d_delta_star_lhs = opt_d(codifferential(s, &star_f)?)?;
    let d_delta_star_alternative = diff(d_delta_star_lhs.clone(), opt_d(delf.clone())?.map(|x| s.star(&x)))?;
    let d_delta_star = diff(d_delta_star_lhs, opt_delta(s, df.clone())?.map(|x| s.star(&x)))?;
    let star_d_delta = diff(opt_d(delf.clone())?.map(|x| s.star(&x)), opt_delta(s, exterior(&star_f)?)?)?;

    let box_f = box_form(s, f);
    let d_box = diff(exterior(&box_f)?, df.as_ref().map(|d| box_form(s, d)))?;
    let delta_box = diff(codifferential(s, &box_f)?, delf.as_ref().map(|d| box_form(s, d)))?;
    let star_box = s.star(&box_f).value().sub(&box_form(s, &star_f).value())?.max_abs();

    Ok(OperatorIdentities {
        dd,
        delta_delta,
        delta_star,
        star_delta,
        d_delta_star_alternative,
        d_delta_star,
        star_d_delta,
        d_box,
        delta_box,
        star_box,
    })
}

/// A p-form field with random polynomial components of the given jet order,
/// coefficients uniform in `[-1, 1]`.
pub fn polynomial_field(p: usize, ord: usize, seed: u64) -> FormField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Form::from_fn(p, Frame::Coordinate, |_| {
        J::from_coeffs((0..n_coeffs(ord)).map(|_| rng.random_range(-1.0..1.0)).collect())
    })
}

/// Flat-space Maxwell checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellDemo {
    /// `‖dF‖` for the plane wave.
    pub d_f: f64,
    /// `‖δF‖` for the plane wave.
    pub delta_f: f64,
    /// `‖∂F‖` for the plane wave.
    pub dirac_f: f64,
    /// `‖□A_μ + R^ν_μ A_ν‖` for the plane-wave potential.
    pub potential_wave: f64,
    /// `‖∂F‖` for a constant field `E dx⁰∧dx¹`.
    pub static_f: f64,
}

impl MaxwellDemo {
    pub fn residual(&self) -> f64 {
        [self.d_f, self.delta_f, self.dirac_f, self.potential_wave, self.static_f].into_iter().fold(0.0, f64::max)
    }
}

/// Plane wave `A = cos(k·x) dx¹` with `k = (2, 0, 0, 2)` on the Cartesian
/// Minkowski chart, plus a constant field.
pub fn flat_maxwell_demo() -> Result<MaxwellDemo, GeometryError> {
    let spec = crate::fixtures::minkowski();
    let x0 = [0.3, -0.4, 0.2, 0.7];
    let ord = 4;
    let s = Snapshot::new(&spec, x0, ord)?;
    let var = |i: usize| J::variable(x0[i], i, ord);
    let phase = (var(0) - var(3)) * 2.0;
    let wave = phase.cos();
    let a = Form::from_fn(1, Frame::Coordinate, |k| if k == 0b0010 { wave.clone() } else { J::zero(ord) });
    let f = a.d()?;
    let d_f = zero_or(exterior(&f)?);
    let delta_f = zero_or(codifferential(&s, &f)?);
    let dirac_f = dirac_apply(&s, &f)?.max_abs();
    let av = clifford_field(&s, &a);
    let potential_wave = (dalembertian(&s, &av).value() + ricci_action(&s, &av.value())).max_abs();
    let stat = Form::from_fn(2, Frame::Coordinate, |k| J::constant(if k == 0b0011 { 0.8 } else { 0.0 }, ord));
    let static_f = dirac_apply(&s, &stat)?.max_abs();
    Ok(MaxwellDemo { d_f, delta_f, dirac_f, potential_wave, static_f })
}
