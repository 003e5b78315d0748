//! Einstein's equations and their rewritings: the gauge-form current, the
//! Maxwell-like bivector equations, the paravector (Sachs) form, the
//! superpotentials with their pseudo-currents, and the inertial-mass surface
//! integral (in [`mass`]).
//!
//! Frame indices are used throughout. `e^a = η^{aa} e_a`; `R_ab` is the frame
//! curvature bivector, `R_a = −e^b ⌟ R_ab` the Ricci 1-vector.

pub mod mass;

use crate::cforms::{masks, Form, FormError, Frame};
use crate::expr::ExprError;
use crate::geometry::{bivector, pair, GeometryError, Snapshot, J};
use crate::jet::MvJet;
use crate::metric::StressEnergySpec;
use crate::stal::{Multivector, ETA, PSEUDOSCALAR};

fn ev(a: usize) -> Multivector {
    Multivector::e(a)
}

fn ev_up(a: usize) -> Multivector {
    Multivector::e(a) * ETA[a]
}

fn cst(m: Multivector, ord: usize) -> MvJet {
    MvJet::constant(m, ord)
}

fn sum_mv(it: impl Iterator<Item = Multivector>) -> Multivector {
    it.fold(Multivector::ZERO, |a, b| a + b)
}

fn sum_jet(it: impl Iterator<Item = MvJet>) -> MvJet {
    it.reduce(|a, b| a + b).expect("non-empty sum")
}

/// Stress-energy components `T_ab` as jets matching the curvature order.
pub fn stress_jets(s: &Snapshot, t: &StressEnergySpec, ord: usize) -> Result<[[J; 4]; 4], ExprError> {
    t.frame_jets(s.point, ord)
}

/// `T_ab` values.
pub fn stress_values(s: &Snapshot, t: &StressEnergySpec) -> Result<[[f64; 4]; 4], ExprError> {
    let j = t.frame_jets(s.point, 0)?;
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| j[a][b].value())))
}

/// `max |R_ab − ½η_ab R − T_ab|`.
pub fn einstein_residual(s: &Snapshot, t: &[[f64; 4]; 4]) -> f64 {
    let mut r: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let eta = if a == b { ETA[a] } else { 0.0 };
            r = r.max((s.ricci[a][b] - 0.5 * eta * s.scalar - t[a][b]).abs());
        }
    }
    r
}

/// Ricci 1-vectors `R_a = −e^b ⌟ R_ab`.
pub fn ricci_vectors(s: &Snapshot) -> [Multivector; 4] {
    std::array::from_fn(|a| -sum_mv((0..4).map(|b| ev_up(b).lcontr(&s.frame_curvature[a][b]))))
}

/// `R_a` against `R_ab e^b`.
pub fn ricci_vector_residual(s: &Snapshot) -> f64 {
    let rv = ricci_vectors(s);
    (0..4)
        .map(|a| (rv[a] - sum_mv((0..4).map(|b| ev_up(b) * s.ricci[a][b]))).max_abs())
        .fold(0.0, f64::max)
}

/// `R_a − ½R e_a − T_a` with `T_a = T_ab e^b`.
pub fn einstein_vector_residual(s: &Snapshot, t: &[[f64; 4]; 4]) -> f64 {
    let rv = ricci_vectors(s);
    (0..4)
        .map(|a| {
            let ta = sum_mv((0..4).map(|b| ev_up(b) * t[a][b]));
            (rv[a] - ev(a) * (0.5 * s.scalar) - ta).max_abs()
        })
        .fold(0.0, f64::max)
}

/// Maxwell-like bivectors
/// `F_ab = R_a e_b − e_b R_a − ½R(e_a e_b − e_b e_a)`.
pub fn maxwell_f(s: &Snapshot) -> [[Multivector; 4]; 4] {
    let rv = ricci_vectors(s);
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            rv[a] * ev(b) - ev(b) * rv[a] - (ev(a) * ev(b) - ev(b) * ev(a)) * (0.5 * s.scalar)
        })
    })
}

/// The expanded second form of `F_ab` written with the curvature bivectors,
/// compared with [`maxwell_f`].
pub fn maxwell_f_expansion_residual(s: &Snapshot) -> f64 {
    let f = maxwell_f(s);
    let mut r: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let mut x = Multivector::ZERO;
            for c in 0..4 {
                let rac = s.frame_curvature[a][c];
                let ec = ev_up(c);
                x += (rac * ec * ev(b) + ev(b) * ec * rac - ec * rac * ev(b) - ev(b) * rac * ec) * 0.5;
            }
            x -= (ev(a) * ev(b) - ev(b) * ev(a)) * (0.5 * s.scalar);
            r = r.max((x - f[a][b]).max_abs());
        }
    }
    r
}

/// Largest non-bivector part of any `F_ab`.
pub fn maxwell_f_grade_residual(s: &Snapshot) -> f64 {
    maxwell_f(s).iter().flatten().map(|f| (*f - f.grade_part(2)).max_abs()).fold(0.0, f64::max)
}

/// `max ‖F_ab‖`.
pub fn maxwell_f_magnitude(s: &Snapshot) -> f64 {
    maxwell_f(s).iter().flatten().map(|f| f.max_abs()).fold(0.0, f64::max)
}

/// `F_ab − (T_a e_b − e_b T_a)`: the algebraic content of the Maxwell-like
/// face, zero exactly when Einstein's equations hold.
pub fn maxwell_f_source_residual(s: &Snapshot, t: &[[f64; 4]; 4]) -> f64 {
    let f = maxwell_f(s);
    let mut r: f64 = 0.0;
    for a in 0..4 {
        let ta = sum_mv((0..4).map(|c| ev_up(c) * t[a][c]));
        for b in 0..4 {
            r = r.max((f[a][b] - (ta * ev(b) - ev(b) * ta)).max_abs());
        }
    }
    r
}

/// Vacuum identity `(e^c⌟R_ac) e_b = (e^c⌟R_bc) e_a`.
pub fn vacuum_identity_residual(s: &Snapshot) -> f64 {
    let rv = ricci_vectors(s);
    let mut r: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            // e^c⌟R_ac = −R_a
            r = r.max((rv[a] * ev(b) - rv[b] * ev(a)).max_abs());
        }
    }
    r
}

/// `max ‖R_ab‖` over frame pairs.
pub fn max_curvature_bivector(s: &Snapshot) -> f64 {
    s.frame_curvature.iter().flatten().map(|r| r.max_abs()).fold(0.0, f64::max)
}

// ---- field versions -------------------------------------------------------

/// Jets of the frame curvature bivectors `R_ab = e_a^μ e_b^ν R_μν`.
pub fn frame_curvature_jets(s: &Snapshot) -> [[MvJet; 4]; 4] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut acc: Option<MvJet> = None;
            for m in 0..4 {
                for n in 0..4 {
                    let w = &s.e[a][m] * &s.e[b][n];
                    let term = s.curvature[m][n].scale(&w);
                    acc = Some(match acc {
                        None => term,
                        Some(x) => x + term,
                    });
                }
            }
            acc.expect("sixteen terms")
        })
    })
}

/// Jets of `R_a` and of the scalar curvature.
pub fn ricci_jets(s: &Snapshot) -> ([MvJet; 4], J) {
    let rab = frame_curvature_jets(s);
    let ord = rab[0][0].order();
    let rv: [MvJet; 4] =
        std::array::from_fn(|a| -sum_jet((0..4).map(|b| cst(ev_up(b), ord).lcontr(&rab[a][b]))));
    let scalar = (0..4)
        .map(|a| rv[a].scalar_prod(&cst(ev(a), ord)) * ETA[a])
        .reduce(|x, y| x + y)
        .expect("four terms");
    (rv, scalar)
}

/// Directional derivative `∂_{e_a} X = e_a^μ ∂_μ X`.
fn frame_partial(s: &Snapshot, a: usize, x: &MvJet) -> MvJet {
    sum_jet((0..4).map(|m| x.partial(m).scale(&s.e[a][m])))
}

/// Value of `∂_{e_a} X + k [ω_a, X]`; `k = ½` is the covariant derivative of
/// Clifford fields, `k = 1` the extended one used on curvature.
pub fn cov_value(s: &Snapshot, a: usize, x: &MvJet, k: f64) -> Multivector {
    frame_partial(s, a, x).value() + s.omega_frame[a].value().comm(&x.value()) * k
}

/// Jets of `F_ab`.
pub fn maxwell_f_jets(s: &Snapshot) -> [[MvJet; 4]; 4] {
    let (rv, scalar) = ricci_jets(s);
    let ord = scalar.order();
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let eb = cst(ev(b), ord);
            let eab = cst(ev(a) * ev(b) - ev(b) * ev(a), ord);
            &(&rv[a].gp(&eb) - &eb.gp(&rv[a])) - &eab.scale(&(&scalar * 0.5))
        })
    })
}

/// Divergence face: returns `(max_b ‖Σ_a D_{e_a}(F^a_b − T^a e_b + e_b T^a)‖,
/// max_b ‖Σ_a D_{e_a} F^a_b‖)` with derivative coefficient `k`.
pub fn maxwell_divergence(s: &Snapshot, t: &StressEnergySpec, k: f64) -> Result<(f64, f64), GeometryError> {
    if s.order < 3 {
        return Err(GeometryError::Order { need: 3, have: s.order });
    }
    let f = maxwell_f_jets(s);
    let ord = f[0][0].order();
    let tj = stress_jets(s, t, ord)?;
    let (mut res, mut lhs): (f64, f64) = (0.0, 0.0);
    for b in 0..4 {
        let eb = cst(ev(b), ord);
        let mut diff = Multivector::ZERO;
        let mut div = Multivector::ZERO;
        for a in 0..4 {
            let ta = sum_jet((0..4).map(|c| MvJet::from_parts(&[(tj[a][c].clone(), ev_up(c))])));
            let src = &ta.gp(&eb) - &eb.gp(&ta);
            let fa = &f[a][b] * ETA[a];
            div += cov_value(s, a, &fa, k);
            diff += cov_value(s, a, &(&fa - &(&src * ETA[a])), k);
        }
        res = res.max(diff.max_abs());
        lhs = lhs.max(div.max_abs());
    }
    Ok((res, lhs))
}

// ---- paravector form --------------------------------------------------------

/// Paravectors `q_a = e_a e_0`.
pub fn q(a: usize) -> Multivector {
    ev(a) * ev(0)
}

/// Conjugate paravectors `q̌_a = −e_0 e_a`, i.e. `(−1, σ_i)`.
pub fn q_check(a: usize) -> Multivector {
    -(ev(0) * ev(a))
}

/// Sign of the scalar-curvature term in the paravector equations that makes
/// them equivalent to Einstein's.
pub const SACHS_R_SIGN: f64 = -1.0;

/// The sign as usually written.
pub const SACHS_R_SIGN_ALT: f64 = 1.0;

/// `𝔽_ργ` with the sign `r_sign` on the scalar-curvature term (`+1` as
/// usually written; `−1` is the variant consistent with Einstein's equations).
pub fn sachs_f_from(rab: &[[Multivector; 4]; 4], scalar: f64, r_sign: f64) -> [[Multivector; 4]; 4] {
    std::array::from_fn(|rho| {
        std::array::from_fn(|g| {
            let mut x = Multivector::ZERO;
            for l in 0..4 {
                let r = rab[rho][l];
                let rd = r.dagger();
                let ql = q(l) * ETA[l];
                let qcl = q_check(l) * ETA[l];
                x += (r * ql * q_check(g) + q(g) * qcl * r + ql * rd * q_check(g) + q(g) * rd * qcl) * 0.5;
            }
            x + (q(rho) * q_check(g) - q(g) * q_check(rho)) * (0.5 * r_sign * scalar)
        })
    })
}

pub fn sachs_f(s: &Snapshot, r_sign: f64) -> [[Multivector; 4]; 4] {
    sachs_f_from(&s.frame_curvature, s.scalar, r_sign)
}

/// `𝔽 + F` (the paravector bivectors equal `−F_ab` in this representation).
pub fn sachs_equivalence_residual(s: &Snapshot, r_sign: f64) -> f64 {
    let sf = sachs_f(s, r_sign);
    let f = maxwell_f(s);
    sf.iter().flatten().zip(f.iter().flatten()).map(|(a, b)| (*a + *b).max_abs()).fold(0.0, f64::max)
}

/// Largest odd part of any `𝔽_ργ`.
pub fn sachs_even_residual(s: &Snapshot) -> f64 {
    sachs_f(s, -1.0).iter().flatten().map(|x| x.odd_part().max_abs()).fold(0.0, f64::max)
}

/// `R_ρλ q^λ + q^λ R†_ρλ + s·R q_ρ − 2 T_ρ` with `T_ρ = T^μ_ρ q_μ`.
pub fn sachs1_residual(s: &Snapshot, t: &[[f64; 4]; 4], r_sign: f64) -> f64 {
    let mut r: f64 = 0.0;
    for rho in 0..4 {
        let mut x = q(rho) * (r_sign * s.scalar);
        for l in 0..4 {
            let rr = s.frame_curvature[rho][l];
            let ql = q(l) * ETA[l];
            x += rr * ql + ql * rr.dagger();
        }
        let tr = sum_mv((0..4).map(|m| q(m) * (ETA[m] * t[m][rho])));
        r = r.max((x - tr * 2.0).max_abs());
    }
    r
}

fn sachs_f_jets(s: &Snapshot) -> [[MvJet; 4]; 4] {
    let rab = frame_curvature_jets(s);
    let (_, scalar) = ricci_jets(s);
    let ord = scalar.order();
    let c = |m: Multivector| cst(m, ord);
    std::array::from_fn(|rho| {
        std::array::from_fn(|g| {
            let mut x = (c(q(rho) * q_check(g) - q(g) * q_check(rho))).scale(&(&scalar * -0.5));
            for l in 0..4 {
                let r = &rab[rho][l];
                let rd = r.map(|m| m.dagger());
                let ql = c(q(l) * ETA[l]);
                let qcl = c(q_check(l) * ETA[l]);
                let qcg = c(q_check(g));
                let qg = c(q(g));
                let t = &(&(&r.gp(&ql).gp(&qcg) + &qg.gp(&qcl).gp(r)) + &ql.gp(&rd).gp(&qcg)) + &qg.gp(&rd).gp(&qcl);
                x = &x + &(t * 0.5);
            }
            x
        })
    })
}

/// `max_γ ‖Σ_ρ D_{e_ρ}(𝔽^ρ_γ − T^ρ q̌_γ + q_γ Ť^ρ)‖`.
pub fn sachs_divergence_residual(s: &Snapshot, t: &StressEnergySpec) -> Result<f64, GeometryError> {
    if s.order < 3 {
        return Err(GeometryError::Order { need: 3, have: s.order });
    }
    let f = sachs_f_jets(s);
    let ord = f[0][0].order();
    let tj = stress_jets(s, t, ord)?;
    let mut r: f64 = 0.0;
    for g in 0..4 {
        let mut acc = Multivector::ZERO;
        for rho in 0..4 {
            // T^ρ = η^ρρ T^μ_ρ q_μ, Ť^ρ = η^ρρ T^μ_ρ q̌_μ
            let tb = sum_jet((0..4).map(|m| MvJet::from_parts(&[(&tj[m][rho] * (ETA[m] * ETA[rho]), q(m))])));
            let tc = sum_jet((0..4).map(|m| MvJet::from_parts(&[(&tj[m][rho] * (ETA[m] * ETA[rho]), q_check(m))])));
            let src = &tb.gp(&cst(q_check(g), ord)) - &cst(q(g), ord).gp(&tc);
            acc += cov_value(s, rho, &(&(&f[rho][g] * ETA[rho]) - &src), 0.5);
        }
        r = r.max(acc.max_abs());
    }
    Ok(r)
}

/// Cyclic sum of coordinate derivatives of the coordinate components
/// `𝔽_μν = h^a_μ h^b_ν 𝔽_ab`, with the paravectors held constant. Reported
/// only.
pub fn sachs_cyclic_report(s: &Snapshot) -> Result<f64, GeometryError> {
    if s.order < 3 {
        return Err(GeometryError::Order { need: 3, have: s.order });
    }
    let f = sachs_f_jets(s);
    let fc: [[MvJet; 4]; 4] = std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            sum_jet((0..4).flat_map(|a| (0..4).map(move |b| (a, b))).map(|(a, b)| f[a][b].scale(&(&s.h[a][m] * &s.h[b][n]))))
        })
    });
    let mut r: f64 = 0.0;
    for rho in 0..4 {
        for m in 0..4 {
            for n in 0..4 {
                let x = fc[m][n].partial(rho).value() + fc[n][rho].partial(m).value() + fc[rho][m].partial(n).value();
                r = r.max(x.max_abs());
            }
        }
    }
    Ok(r)
}

// ---- gauge current ----------------------------------------------------------

/// Both routes to the current of the gauge-form field equation.
#[derive(Debug, Clone)]
pub struct GaugeCurrent {
    /// `J_ν` from `𝒥 = −⋆⁻¹(d⋆ℛ + [ω, ⋆ℛ])`.
    pub hodge: [Multivector; 4],
    /// Candidate coefficients of `[ω_μ, ℛ^μ_ν]` with the two-route residual.
    pub candidates: Vec<(f64, f64)>,
    /// Coefficient with the smallest residual.
    pub coefficient: f64,
    pub residual: f64,
    /// `max ‖J_ν‖`, to show the check is not vacuous.
    pub magnitude: f64,
    /// `d(⋆𝒥 + [ω, ⋆ℛ])` (needs jet order 4).
    pub closed_derived: Option<f64>,
    /// `d(⋆𝒥 − ½[ω, ⋆ℛ])` in the usual form (needs jet order 4).
    pub closed_alternative: Option<f64>,
}

/// Candidate coefficients for the commutator term of the direct route.
pub const CURRENT_COEFFICIENTS: [f64; 3] = [0.5, 1.0, 2.0];

pub fn gauge_current(s: &Snapshot) -> Result<GaugeCurrent, GeometryError> {
    if s.order < 3 {
        return Err(GeometryError::Order { need: 3, have: s.order });
    }
    let r = s.gauge_curvature_form();
    let star_r = s.star(&r);
    let x = star_r.d()?.add(&s.omega.comm_form(&star_r)?)?;
    let cur = s.star_inv(&x).scale(-1.0);
    let hodge: [Multivector; 4] = std::array::from_fn(|n| cur.get(1 << n).value());

    let gi: [[f64; 4]; 4] = std::array::from_fn(|m| std::array::from_fn(|n| s.ginv[m][n].value()));
    let gam = |l: usize, m: usize, n: usize| s.christoffel[l][m][n].value();
    let rc = &s.gauge_curvature;
    let om: Vec<Multivector> = (0..4).map(|m| s.omega.get(1 << m).value()).collect();
    let mut div = [Multivector::ZERO; 4];
    let mut com = [Multivector::ZERO; 4];
    for n in 0..4 {
        for m in 0..4 {
            for a in 0..4 {
                if gi[m][a] == 0.0 {
                    continue;
                }
                let mut d = rc[a][n].partial(m).value();
                for l in 0..4 {
                    d -= rc[l][n].value() * gam(l, m, a) + rc[a][l].value() * gam(l, m, n);
                }
                div[n] += d * gi[m][a];
                com[n] += om[m].comm(&rc[a][n].value()) * gi[m][a];
            }
        }
    }
    let candidates: Vec<(f64, f64)> = CURRENT_COEFFICIENTS
        .iter()
        .map(|&c| {
            let res = (0..4).map(|n| (div[n] + com[n] * c - hodge[n]).max_abs()).fold(0.0, f64::max);
            (c, res)
        })
        .collect();
    let (coefficient, residual) =
        candidates.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("three candidates");
    let magnitude = hodge.iter().map(|j| j.max_abs()).fold(0.0, f64::max);
    let (closed_derived, closed_alternative) = if s.order >= 4 {
        let star_j = s.star(&cur);
        let wr = s.omega.comm_form(&star_r)?;
        let derived = star_j.add(&wr)?.d()?.max_abs();
        let alternative = star_j.sub(&wr.scale(0.5))?.d()?.max_abs();
        (Some(derived), Some(alternative))
    } else {
        (None, None)
    };
    Ok(GaugeCurrent { hodge, candidates, coefficient, residual, magnitude, closed_derived, closed_alternative })
}

// ---- superpotentials --------------------------------------------------------

/// `ω_ab = η_aa ω^a_b` as a scalar 1-form field.
pub fn omega_lower(s: &Snapshot, a: usize, b: usize) -> Form<J> {
    s.omega_scalar(a, b).scale(ETA[a])
}

/// `⋆S^c = ½ ω_ab ∧ ⋆(θ^a ∧ θ^b ∧ θ^c)`.
pub fn superpotentials(s: &Snapshot) -> Result<[Form<J>; 4], FormError> {
    let mut out: Vec<Form<J>> = Vec::with_capacity(4);
    for c in 0..4 {
        let mut acc = Form::from_fn(2, Frame::Coordinate, |_| J::zero(s.order - 1));
        for a in 0..4 {
            for b in 0..4 {
                if a == b || a == c || b == c {
                    continue;
                }
                acc = acc.add(&omega_lower(s, a, b).tensor_wedge(&s.star_theta3(a, b, c))?)?;
            }
        }
        out.push(acc.scale(0.5));
    }
    Ok(out.try_into().expect("four superpotentials"))
}

/// Sign of the second bracket term in the pseudo-current.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoCurrentSign {
    /// `ω^c_d ⋆(θ^{abd}) − ω^b_d ⋆(θ^{adc})`, as in the definition.
    Alternative,
    /// `ω^c_d ⋆(θ^{abd}) + ω^b_d ⋆(θ^{adc})`, as produced by the derivation.
    Derived,
}

/// `⋆t^c = −½ ω_ab ∧ [ω^c_d ⋆(θ^a∧θ^b∧θ^d) ± ω^b_d ⋆(θ^a∧θ^d∧θ^c)]`.
pub fn pseudo_currents(s: &Snapshot, sign: PseudoCurrentSign) -> Result<[Form<J>; 4], FormError> {
    let sg = match sign {
        PseudoCurrentSign::Alternative => -1.0,
        PseudoCurrentSign::Derived => 1.0,
    };
    let om: Vec<Vec<Form<J>>> = (0..4).map(|a| (0..4).map(|b| s.omega_scalar(a, b)).collect()).collect();
    let mut th: Vec<Form<J>> = Vec::with_capacity(64);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                th.push(s.star_theta3(a, b, c));
            }
        }
    }
    let t3 = |a: usize, b: usize, c: usize| &th[a * 16 + b * 4 + c];
    let mut out: Vec<Form<J>> = Vec::with_capacity(4);
    for c in 0..4 {
        let mut acc = Form::from_fn(3, Frame::Coordinate, |_| J::zero(s.order - 1));
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    continue;
                }
                let oab = om[a][b].scale(ETA[a]);
                let mut inner = Form::from_fn(2, Frame::Coordinate, |_| J::zero(s.order - 1));
                for d in 0..4 {
                    inner = inner.add(&om[c][d].tensor_wedge(t3(a, b, d))?)?;
                    inner = inner.add(&om[b][d].tensor_wedge(t3(a, d, c))?.scale(sg))?;
                }
                acc = acc.add(&oab.tensor_wedge(&inner)?)?;
            }
        }
        out.push(acc.scale(-0.5));
    }
    Ok(out.try_into().expect("four pseudo-currents"))
}

/// `⋆G^d` from Ricci data, through the Clifford Hodge star on orthonormal
/// components.
pub fn star_einstein(s: &Snapshot) -> [Form<f64>; 4] {
    std::array::from_fn(|d| {
        let g = sum_mv((0..4).map(|b| {
            let gdb = ETA[d] * (s.ricci[d][b] - if d == b { 0.5 * ETA[d] * s.scalar } else { 0.0 });
            ev(b) * gdb
        }));
        s.form_from_multivector(&g.hodge(), 3).value()
    })
}

/// `⋆T^a` with `T^a = T^a_b θ^b`, as jets.
pub fn star_stress(s: &Snapshot, t: &[[J; 4]; 4]) -> [Form<J>; 4] {
    std::array::from_fn(|a| {
        let one = Form::from_fn(1, Frame::Orthonormal, |k| &t[a][k.trailing_zeros() as usize] * ETA[a]);
        crate::geometry::star_orthonormal(&one).convert(&s.h_transposed(), Frame::Coordinate)
    })
}

/// Residuals of the superpotential identities at one point.
#[derive(Debug, Clone, Default)]
pub struct SuperpotentialResiduals {
    /// `⋆G^d + ½ ℛ_ab ∧ ⋆(θ^a∧θ^b∧θ^d)`
    pub einstein_from_curvature: f64,
    /// `⋆G^a + d⋆S^a + ⋆t^a` with the derived pseudo-current sign.
    pub einstein_from_superpotential: f64,
    /// Same with the other sign.
    pub einstein_from_superpotential_alternative: f64,
    /// `d⋆S^a + ⋆T^a + ⋆t^a`
    pub field_equation: f64,
    /// `d(⋆T^a + ⋆t^a)` as a 4-form.
    pub conservation: f64,
    /// Clifford expression `[−½ ω_ab ⌟ (θ^a∧θ^b∧θ_c)] θ⁵` against `⋆S_c`.
    pub clifford_superpotential: f64,
    /// `max |⋆S|`, `max |⋆t|`.
    pub s_magnitude: f64,
    pub t_magnitude: f64,
}

/// Orthonormal components of `ω_ab` packed into a covector multivector.
pub fn omega_lower_multivector(s: &Snapshot, a: usize, b: usize) -> Multivector {
    sum_mv((0..4).map(|f| ev(f) * (ETA[a] * s.frame_gamma[a][f][b].value())))
}

/// `⋆S_c` through the Clifford formula, orthonormal components.
pub fn clifford_superpotential(s: &Snapshot, c: usize) -> Multivector {
    let i5 = Multivector::blade(PSEUDOSCALAR);
    let mut x = Multivector::ZERO;
    for a in 0..4 {
        for b in 0..4 {
            let tri = ev(a).wedge(&ev(b)).wedge(&ev_up(c));
            x += omega_lower_multivector(s, a, b).lcontr(&tri) * -0.5;
        }
    }
    x * i5
}

pub fn superpotential_residuals(s: &Snapshot, t: &StressEnergySpec) -> Result<SuperpotentialResiduals, GeometryError> {
    if s.order < 3 {
        return Err(GeometryError::Order { need: 3, have: s.order });
    }
    let sg = star_einstein(s);
    let mut out = SuperpotentialResiduals::default();
    // ⋆G from the curvature 2-forms
    for d in 0..4 {
        let mut acc = sg[d].clone();
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    continue;
                }
                let rab = Form::from_fn(2, Frame::Coordinate, |k| {
                    let (m, n) = pair(k);
                    bivector(a, b).scalar_prod(&s.curvature[m][n].value())
                });
                acc = acc.add(&rab.tensor_wedge(&s.star_theta3(a, b, d).value())?.scale(0.5))?;
            }
        }
        out.einstein_from_curvature = out.einstein_from_curvature.max(acc.max_abs());
    }
    let sp = superpotentials(s)?;
    let td = pseudo_currents(s, PseudoCurrentSign::Derived)?;
    let tp = pseudo_currents(s, PseudoCurrentSign::Alternative)?;
    let tj = stress_jets(s, t, s.order - 1)?;
    let st = star_stress(s, &tj);
    for a in 0..4 {
        let dsp = sp[a].d()?.value();
        out.einstein_from_superpotential =
            out.einstein_from_superpotential.max(sg[a].add(&dsp)?.add(&td[a].value())?.max_abs());
        out.einstein_from_superpotential_alternative =
            out.einstein_from_superpotential_alternative.max(sg[a].add(&dsp)?.add(&tp[a].value())?.max_abs());
        out.field_equation = out.field_equation.max(dsp.add(&st[a].value())?.add(&td[a].value())?.max_abs());
        out.conservation = out.conservation.max(st[a].add(&td[a])?.d()?.value().max_abs());
        let cl = clifford_superpotential(s, a);
        let direct = s.multivector_from_form(&sp[a].value()) * ETA[a];
        out.clifford_superpotential = out.clifford_superpotential.max((cl - direct).max_abs());
        out.s_magnitude = out.s_magnitude.max(sp[a].value().max_abs());
        out.t_magnitude = out.t_magnitude.max(td[a].value().max_abs());
    }
    Ok(out)
}

/// Lorentzian square of the orthonormal components of `⋆t^0`,
/// `Σ_K η^K (⋆t^0_K)²`; a tensor would give the same number in every chart.
pub fn pseudo_current_norm(s: &Snapshot) -> Result<f64, GeometryError> {
    let t0 = pseudo_currents(s, PseudoCurrentSign::Derived)?[0].value();
    let m = s.multivector_from_form(&t0);
    Ok(masks(3).iter().map(|&k| crate::stal::metric_sign(k) * m.get(k) * m.get(k)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn schw(r: f64, th: f64, ord: usize) -> Snapshot {
        Snapshot::new(&fixtures::schwarzschild(), [0.3, r, th, 0.7], ord).unwrap()
    }

    fn frw(t: f64, ord: usize) -> (Snapshot, StressEnergySpec) {
        let spec = fixtures::frw();
        (Snapshot::new(&spec, [t, 0.1, -0.2, 0.3], ord).unwrap(), spec.stress.clone())
    }

    #[test]
    fn frw_dust_satisfies_einstein_equations() {
        let (s, t) = frw(1.3, 3);
        let tv = stress_values(&s, &t).unwrap();
        assert!((tv[0][0] - 4.0 / (3.0 * 1.69)).abs() < 1e-14);
        assert!(einstein_residual(&s, &tv) < 1e-12);
        assert!(einstein_vector_residual(&s, &tv) < 1e-12);
        // detection: the vacuum preset leaves the density as residual
        let vac = [[0.0; 4]; 4];
        assert!((einstein_residual(&s, &vac) - tv[0][0]).abs() < 1e-12);
    }

    #[test]
    fn ricci_vectors_match_components() {
        let (s, _) = frw(0.9, 3);
        assert!(ricci_vector_residual(&s) < 1e-12);
        let s = schw(7.0, 1.0, 3);
        assert!(ricci_vector_residual(&s) < 1e-12);
    }

    #[test]
    fn maxwell_faces_on_schwarzschild() {
        let s = schw(10.0, 1.2, 3);
        assert!(maxwell_f_magnitude(&s) < 1e-12);
        assert!(vacuum_identity_residual(&s) < 1e-12);
        assert!(max_curvature_bivector(&s) > 1e-4);
        assert!(maxwell_f_expansion_residual(&s) < 1e-14);
        let (res, _) = maxwell_divergence(&s, &StressEnergySpec::Vacuum, 0.5).unwrap();
        assert!(res < 1e-10);
    }

    #[test]
    fn maxwell_faces_on_frw_dust() {
        let (s, t) = frw(1.1, 3);
        let tv = stress_values(&s, &t).unwrap();
        assert!(maxwell_f_magnitude(&s) > 1e-2);
        assert!(maxwell_f_grade_residual(&s) < 1e-14);
        assert!(maxwell_f_expansion_residual(&s) < 1e-12);
        assert!(maxwell_f_source_residual(&s, &tv) < 1e-12);
        for k in [0.5, 1.0] {
            let (res, lhs) = maxwell_divergence(&s, &t, k).unwrap();
            assert!(res < 1e-9, "k={k} res={res}");
            assert!(lhs > 1e-3);
        }
        // the wrong source is detected
        let (res, _) = maxwell_divergence(&s, &StressEnergySpec::Vacuum, 0.5).unwrap();
        assert!(res > 1e-3);
    }

    #[test]
    fn paravector_algebra() {
        assert_eq!(q(0), Multivector::scalar(1.0));
        assert_eq!(q_check(0), Multivector::scalar(-1.0));
        for i in 1..4 {
            assert_eq!(q(i), q_check(i));
            assert_eq!(q(i).grade_part(2), q(i));
        }
    }

    #[test]
    fn sachs_face_needs_the_sign_flip_on_the_scalar_term() {
        let (s, t) = frw(1.4, 3);
        let tv = stress_values(&s, &t).unwrap();
        assert!(sachs_equivalence_residual(&s, -1.0) < 1e-12);
        assert!(sachs_equivalence_residual(&s, 1.0) > 1e-2);
        assert!(sachs1_residual(&s, &tv, -1.0) < 1e-12);
        assert!(sachs1_residual(&s, &tv, 1.0) > 1e-2);
        assert!(sachs_even_residual(&s) < 1e-14);
        assert!(sachs_divergence_residual(&s, &t).unwrap() < 1e-9);
        let s = schw(10.0, 1.0, 3);
        assert!(sachs_equivalence_residual(&s, -1.0) < 1e-12);
        assert!(sachs_f(&s, -1.0).iter().flatten().all(|x| x.max_abs() < 1e-12));
    }

    #[test]
    fn gauge_current_coefficient_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3 {
            let r = rng.random_range(5.0..30.0);
            let s = schw(r, rng.random_range(0.4..2.7), 3);
            let gc = gauge_current(&s).unwrap();
            assert_eq!(gc.coefficient, 1.0, "{:?}", gc.candidates);
            assert!(gc.residual < 1e-10 * gc.magnitude.max(1.0), "{:?}", gc.candidates);
            assert!(gc.magnitude > 1e-6);
            for (c, res) in &gc.candidates {
                if *c != 1.0 {
                    assert!(*res > 1e-3 * gc.magnitude, "{c} {res}");
                }
            }
        }
    }

    #[test]
    fn gauge_current_closure_needs_order_four() {
        let s = schw(10.0, 1.0, 4);
        let gc = gauge_current(&s).unwrap();
        assert!(gc.closed_derived.unwrap() < 1e-10);
        assert!(gc.closed_alternative.unwrap() > 1e-6);
        assert!(schw(10.0, 1.0, 3).order == 3 && gauge_current(&schw(10.0, 1.0, 3)).unwrap().closed_derived.is_none());
    }

    #[test]
    fn superpotential_identities() {
        for (s, t) in [(schw(9.0, 1.1, 3), StressEnergySpec::Vacuum), frw(1.2, 3)] {
            let r = superpotential_residuals(&s, &t).unwrap();
            assert!(r.einstein_from_curvature < 1e-12, "{r:?}");
            assert!(r.einstein_from_superpotential < 1e-10, "{r:?}");
            assert!(r.einstein_from_superpotential_alternative > 1e-4, "{r:?}");
            assert!(r.field_equation < 1e-10, "{r:?}");
            assert!(r.conservation < 1e-9, "{r:?}");
            assert!(r.clifford_superpotential < 1e-12, "{r:?}");
            assert!(r.s_magnitude > 1e-3 && r.t_magnitude > 1e-4, "{r:?}");
        }
    }

    #[test]
    fn flat_superpotentials_vanish() {
        let s = Snapshot::new(&fixtures::minkowski(), [0.1, 0.2, 0.3, 0.4], 3).unwrap();
        let r = superpotential_residuals(&s, &StressEnergySpec::Vacuum).unwrap();
        assert_eq!(r.s_magnitude, 0.0);
        assert_eq!(r.t_magnitude, 0.0);
    }
}
