//! Tetrads, Levi-Civita connection, curvature bivectors and the structure
//! equation residuals at a chart point.
//!
//! Conventions. The frame `e_a = e_a^μ ∂_μ` is orthonormal and the co-frame
//! `θ^a = h^a_μ dx^μ` is dual to it. Frame connection coefficients satisfy
//! `∇_{e_a} e_c = Γ^b_{ac} e_b`. The connection bivector of direction `a` is
//! `ω_a = Σ_{b<c} η^{cc} Γ^b_{ac} e_b ∧ e_c`, so that `½[ω_a, v] = ∇_{e_a} v`
//! for constant-coefficient vectors, i.e. `D_{e_a} = ∂_{e_a} + ½[ω_a, ·]`.
//!
//! Two curvature 2-forms are carried:
//! * the Riemann curvature `R_μν = ∂_μω_ν − ∂_νω_μ + ½[ω_μ, ω_ν]`, for which
//!   `[D_μ, D_ν] = ½[R_μν, ·]`;
//! * the gauge curvature `ℛ = dω + ½[ω, ω]`, with components
//!   `∂_μω_ν − ∂_νω_μ + [ω_μ, ω_ν]`, the object that satisfies
//!   `dℛ + [ω, ℛ] = 0` and feeds the exterior-covariant identities.
//!
//! Riemann components are `R_abcd = (e_a ∧ e_b) · R_cd`.

use thiserror::Error;

use crate::cforms::{covariant, masks, minor, CliffordFormField, Form, FormError, FormValue, Frame, Scaled};
use crate::expr::ExprError;
use crate::jet::{Jet, MvJet};
use crate::metric::MetricSpec;
use crate::stal::{Multivector, ETA};

pub type J = Jet<f64>;
pub type M4 = [[J; 4]; 4];

/// Threshold on `|g_μμ|` below which a point is treated as a chart singularity.
pub const DIAGONAL_FLOOR: f64 = 1e-8;
/// Threshold on `|det g|`.
pub const DET_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("chart singular at {point:?}: {what}")]
    Singular { point: [f64; 4], what: String },
    #[error("bad signature at {point:?}: {what}")]
    Signature { point: [f64; 4], what: String },
    #[error("jet order {have} too low, need {need}")]
    Order { need: usize, have: usize },
}

fn zeros(ord: usize) -> M4 {
    std::array::from_fn(|_| std::array::from_fn(|_| J::zero(ord)))
}

fn sum_jets(it: impl Iterator<Item = J>) -> J {
    it.reduce(|a, b| a + b).expect("non-empty sum")
}

/// Blade `e_a ∧ e_b` (zero when `a == b`).
pub fn bivector(a: usize, b: usize) -> Multivector {
    Multivector::e(a).wedge(&Multivector::e(b))
}

/// Signs of the pivots of symmetric Gaussian elimination (Sylvester inertia).
fn inertia(g: &[[f64; 4]; 4]) -> (usize, usize) {
    let mut m = *g;
    let (mut pos, mut neg) = (0, 0);
    for k in 0..4 {
        // symmetric pivoting on the largest remaining diagonal entry
        let p = (k..4).max_by(|&i, &j| m[i][i].abs().total_cmp(&m[j][j].abs())).unwrap_or(k);
        m.swap(k, p);
        for row in m.iter_mut() {
            row.swap(k, p);
        }
        let d = m[k][k];
        if d > 0.0 {
            pos += 1;
        } else if d < 0.0 {
            neg += 1;
        }
        if d == 0.0 {
            continue;
        }
        for i in k + 1..4 {
            let f = m[i][k] / d;
            for j in k..4 {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    (pos, neg)
}

/// Orthonormal frame `e[a][μ] = e_a^μ` by metric Gram–Schmidt over the
/// coordinate basis, time leg first; upper triangular with positive diagonal.
pub fn tetrad(g: &M4, diagonal: bool, point: [f64; 4]) -> Result<M4, GeometryError> {
    let ord = g[0][0].order();
    let mut e = zeros(ord);
    for a in 0..4 {
        let mut u: [J; 4] = std::array::from_fn(|m| J::constant(if m == a { 1.0 } else { 0.0 }, ord));
        if !diagonal {
            for b in 0..a {
                let c = sum_jets((0..4).map(|n| &g[a][n] * &e[b][n]));
                for n in 0..4 {
                    u[n] = &u[n] - &(&c * &e[b][n] * ETA[b]);
                }
            }
        }
        let n2 = if diagonal {
            g[a][a].clone()
        } else {
            sum_jets((0..4).flat_map(|m| (0..4).map(move |n| (m, n))).map(|(m, n)| &(&u[m] * &u[n]) * &g[m][n]))
        };
        if n2.value() * ETA[a] <= 0.0 {
            let gv: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].value()));
            let (pos, neg) = inertia(&gv);
            let what = if (pos, neg) == (1, 3) {
                format!("coordinate frame is not time-first (pivot {a} has the wrong sign)")
            } else {
                format!("signature ({pos},{neg}) is not (1,3)")
            };
            return Err(GeometryError::Signature { point, what });
        }
        let inv_norm = (&n2 * ETA[a]).powf(-0.5);
        for n in 0..4 {
            e[a][n] = &u[n] * &inv_norm;
        }
    }
    Ok(e)
}

/// Everything the identity checks need at one point.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub point: [f64; 4],
    /// Jet order of the metric.
    pub order: usize,
    pub g: M4,
    pub ginv: M4,
    /// `e[a][μ] = e_a^μ`
    pub e: M4,
    /// `h[a][μ] = h^a_μ`
    pub h: M4,
    /// `christoffel[λ][μ][ν] = Γ^λ_μν`
    pub christoffel: [M4; 4],
    /// `frame_gamma[b][a][c] = Γ^b_ac`
    pub frame_gamma: [M4; 4],
    /// `ω_a`
    pub omega_frame: [MvJet; 4],
    /// `ω = ω_μ dx^μ`
    pub omega: CliffordFormField,
    /// Riemann curvature bivectors `R_μν`.
    pub curvature: [[MvJet; 4]; 4],
    /// Gauge curvature components `∂_μω_ν − ∂_νω_μ + [ω_μ, ω_ν]`.
    pub gauge_curvature: [[MvJet; 4]; 4],
    /// `R_ab` at the point.
    pub frame_curvature: [[Multivector; 4]; 4],
    /// `R_abcd` at the point.
    pub riemann: [[[[f64; 4]; 4]; 4]; 4],
    /// `Ric_bd = η^{aa} R_abad`
    pub ricci: [[f64; 4]; 4],
    pub scalar: f64,
}

impl Snapshot {
    pub fn new(spec: &MetricSpec, x: [f64; 4], ord: usize) -> Result<Self, GeometryError> {
        if ord < 2 {
            return Err(GeometryError::Order { need: 2, have: ord });
        }
        let g = spec.metric_jets(x, ord)?;
        Self::from_metric(g, x, spec.is_diagonal())
    }

    /// Build from metric jets directly.
    pub fn from_metric(g: M4, point: [f64; 4], diagonal: bool) -> Result<Self, GeometryError> {
        let ord = g[0][0].order();
        if ord < 2 {
            return Err(GeometryError::Order { need: 2, have: ord });
        }
        for (m, row) in g.iter().enumerate() {
            if row[m].value().abs() < DIAGONAL_FLOOR {
                return Err(GeometryError::Singular { point, what: format!("|g_{m}{m}| below {DIAGONAL_FLOOR:e}") });
            }
        }
        let gv: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].value()));
        let det = minor(&gv, &[0, 1, 2, 3], &[0, 1, 2, 3]);
        if det.abs() < DET_FLOOR || !det.is_finite() {
            return Err(GeometryError::Singular { point, what: format!("|det g| = {:e}", det.abs()) });
        }
        let e = tetrad(&g, diagonal, point)?;
        let mut h = zeros(ord);
        let mut ginv = zeros(ord);
        for a in 0..4 {
            for m in 0..4 {
                h[a][m] = &sum_jets((0..4).map(|n| &e[a][n] * &g[n][m])) * ETA[a];
            }
        }
        for m in 0..4 {
            for n in 0..4 {
                ginv[m][n] = sum_jets((0..4).map(|a| &(&e[a][m] * &e[a][n]) * ETA[a]));
            }
        }
        // dg[s][m][n] = ∂_s g_mn
        let dg: [M4; 4] =
            std::array::from_fn(|s| std::array::from_fn(|m| std::array::from_fn(|n| g[m][n].partial(s))));
        let christoffel: [M4; 4] = std::array::from_fn(|l| {
            std::array::from_fn(|m| {
                std::array::from_fn(|n| {
                    let s = sum_jets((0..4).map(|s| &ginv[l][s] * &(&(&dg[m][s][n] + &dg[n][s][m]) - &dg[s][m][n])));
                    s * 0.5
                })
            })
        });
        // w[l][a][c] = (∇_{e_a} e_c)^λ
        let de: [[[J; 4]; 4]; 4] =
            std::array::from_fn(|c| std::array::from_fn(|l| std::array::from_fn(|m| e[c][l].partial(m))));
        let w: [M4; 4] = std::array::from_fn(|l| {
            std::array::from_fn(|a| {
                std::array::from_fn(|c| {
                    sum_jets((0..4).map(|m| {
                        let inner = &de[c][l][m] + &sum_jets((0..4).map(|n| &christoffel[l][m][n] * &e[c][n]));
                        &e[a][m] * &inner
                    }))
                })
            })
        });
        let frame_gamma: [M4; 4] = std::array::from_fn(|b| {
            std::array::from_fn(|a| std::array::from_fn(|c| sum_jets((0..4).map(|l| &h[b][l] * &w[l][a][c]))))
        });
        let omega_frame: [MvJet; 4] = std::array::from_fn(|a| {
            let mut parts = Vec::new();
            for b in 0..4 {
                for c in b + 1..4 {
                    parts.push((&frame_gamma[b][a][c] * ETA[c], bivector(b, c)));
                }
            }
            MvJet::from_parts(&parts)
        });
        let omega_mu: [MvJet; 4] = std::array::from_fn(|m| {
            (0..4).map(|a| omega_frame[a].scale(&h[a][m])).reduce(|x, y| x + y).expect("four legs")
        });
        let omega = Form::from_fn(1, Frame::Coordinate, |k| omega_mu[k.trailing_zeros() as usize].clone());
        let dom: [[MvJet; 4]; 4] = std::array::from_fn(|m| std::array::from_fn(|n| omega_mu[n].partial(m)));
        let curv = |c: f64| -> [[MvJet; 4]; 4] {
            std::array::from_fn(|m| {
                std::array::from_fn(|n| &(&dom[m][n] - &dom[n][m]) + &(omega_mu[m].comm(&omega_mu[n]) * c))
            })
        };
        let curvature = curv(0.5);
        let gauge_curvature = curv(1.0);
        let ev: [[f64; 4]; 4] = std::array::from_fn(|a| std::array::from_fn(|m| e[a][m].value()));
        let frame_curvature: [[Multivector; 4]; 4] = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut acc = Multivector::ZERO;
                for m in 0..4 {
                    for n in 0..4 {
                        acc += curvature[m][n].value() * (ev[a][m] * ev[b][n]);
                    }
                }
                acc
            })
        });
        let riemann = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                std::array::from_fn(|c| std::array::from_fn(|d| bivector(a, b).scalar_prod(&frame_curvature[c][d])))
            })
        });
        let ricci: [[f64; 4]; 4] =
            std::array::from_fn(|b| std::array::from_fn(|d| (0..4).map(|a| ETA[a] * riemann[a][b][a][d]).sum()));
        let scalar = (0..4).map(|b| ETA[b] * ricci[b][b]).sum();
        Ok(Snapshot {
            point,
            order: ord,
            g,
            ginv,
            e,
            h,
            christoffel,
            frame_gamma,
            omega_frame,
            omega,
            curvature,
            gauge_curvature,
            frame_curvature,
            riemann,
            ricci,
            scalar,
        })
    }

    /// Jet order of curvature quantities.
    pub fn curvature_order(&self) -> usize {
        self.order - 2
    }

    fn need(&self, k: usize) -> Result<(), GeometryError> {
        if self.order < k {
            Err(GeometryError::Order { need: k, have: self.order })
        } else {
            Ok(())
        }
    }

    /// Values `e_a^μ`.
    pub fn e_values(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|a| std::array::from_fn(|m| self.e[a][m].value()))
    }

    /// Values `h^a_μ`.
    pub fn h_values(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|a| std::array::from_fn(|m| self.h[a][m].value()))
    }

    /// `h` transposed: `[μ][a]`, the matrix that maps orthonormal form
    /// components back to coordinate ones.
    pub fn h_transposed(&self) -> M4 {
        std::array::from_fn(|m| std::array::from_fn(|a| self.h[a][m].clone()))
    }

    /// Curvature as a coordinate 2-form field.
    pub fn curvature_form(&self) -> CliffordFormField {
        Form::from_fn(2, Frame::Coordinate, |k| {
            let (m, n) = pair(k);
            self.curvature[m][n].clone()
        })
    }

    /// Gauge curvature `ℛ = dω + ½[ω, ω]` as a coordinate 2-form field.
    pub fn gauge_curvature_form(&self) -> CliffordFormField {
        Form::from_fn(2, Frame::Coordinate, |k| {
            let (m, n) = pair(k);
            self.gauge_curvature[m][n].clone()
        })
    }

    /// Soldering form `𝜽 = e_a ⊗ θ^a` with coordinate components `h^a_μ e_a`.
    pub fn theta_form(&self) -> CliffordFormField {
        Form::from_fn(1, Frame::Coordinate, |k| {
            let m = k.trailing_zeros() as usize;
            let parts: Vec<(J, Multivector)> = (0..4).map(|a| (self.h[a][m].clone(), Multivector::e(a))).collect();
            MvJet::from_parts(&parts)
        })
    }

    /// Coordinate basis vector `∂_μ = h^a_μ e_a` as a multivector field.
    pub fn coordinate_vector(&self, m: usize) -> MvJet {
        let parts: Vec<(J, Multivector)> = (0..4).map(|a| (self.h[a][m].clone(), Multivector::e(a))).collect();
        MvJet::from_parts(&parts)
    }

    /// Scalar co-frame 1-form `θ^a`.
    pub fn theta_scalar(&self, a: usize) -> Form<J> {
        Form::from_fn(1, Frame::Coordinate, |k| self.h[a][k.trailing_zeros() as usize].clone())
    }

    /// Scalar connection 1-form `ω^a_b = Γ^a_{cb} θ^c`.
    pub fn omega_scalar(&self, a: usize, b: usize) -> Form<J> {
        Form::from_fn(1, Frame::Coordinate, |k| {
            let m = k.trailing_zeros() as usize;
            sum_jets((0..4).map(|c| &self.frame_gamma[a][c][b] * &self.h[c][m]))
        })
    }

    /// `R_abcd R^abcd`.
    pub fn kretschmann(&self) -> f64 {
        let mut k = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let r = self.riemann[a][b][c][d];
                        k += ETA[a] * ETA[b] * ETA[c] * ETA[d] * r * r;
                    }
                }
            }
        }
        k
    }

    /// `R_μνρσ = (∂_μ ∧ ∂_ν) · R_ρσ`.
    pub fn riemann_coordinate(&self) -> [[[[f64; 4]; 4]; 4]; 4] {
        let v: [Multivector; 4] = std::array::from_fn(|m| self.coordinate_vector(m).value());
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                std::array::from_fn(|c| {
                    std::array::from_fn(|d| v[a].wedge(&v[b]).scalar_prod(&self.curvature[c][d].value()))
                })
            })
        })
    }

    // ---- residual checks -------------------------------------------------

    /// `max |g − hᵀηh|` and `max |η^{ab} − h^a_μ h^b_ν g^{μν}|`.
    pub fn tetrad_residual(&self) -> f64 {
        let h = self.h_values();
        let mut r: f64 = 0.0;
        for m in 0..4 {
            for n in 0..4 {
                let rec: f64 = (0..4).map(|a| ETA[a] * h[a][m] * h[a][n]).sum();
                r = r.max((rec - self.g[m][n].value()).abs());
            }
        }
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for m in 0..4 {
                    for n in 0..4 {
                        s += h[a][m] * h[b][n] * self.ginv[m][n].value();
                    }
                }
                let target = if a == b { ETA[a] } else { 0.0 };
                r = r.max((s - target).abs());
            }
        }
        r
    }

    /// Metric compatibility: `η_bb Γ^b_ac + η_cc Γ^c_ab = 0`.
    pub fn connection_antisymmetry(&self) -> f64 {
        let mut r: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let s = ETA[b] * self.frame_gamma[b][a][c].value() + ETA[c] * self.frame_gamma[c][a][b].value();
                    r = r.max(s.abs());
                }
            }
        }
        r
    }

    /// `∇g = 0` assembled from Christoffel symbols.
    pub fn metric_compatibility(&self) -> f64 {
        let mut r: f64 = 0.0;
        for l in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    let mut s = self.g[m][n].deriv(&[l]);
                    for k in 0..4 {
                        s -= self.christoffel[k][l][m].value() * self.g[k][n].value();
                        s -= self.christoffel[k][l][n].value() * self.g[m][k].value();
                    }
                    r = r.max(s.abs());
                }
            }
        }
        r
    }

    /// `½[ω_a, e_b]` against `Γ^c_ab e_c` and `−e_b ⌟ ω_a`.
    pub fn frame_derivative_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for a in 0..4 {
            let w = self.omega_frame[a].value();
            for b in 0..4 {
                let eb = Multivector::e(b);
                let lhs = w.comm(&eb) * 0.5;
                let mut rhs = Multivector::ZERO;
                for c in 0..4 {
                    rhs += Multivector::e(c) * self.frame_gamma[c][a][b].value();
                }
                r = r.max((lhs - rhs).max_abs()).max((lhs + eb.lcontr(&w)).max_abs());
            }
        }
        r
    }

    /// Torsion through the Clifford route `𝐃𝜽 = d𝜽 + ½[ω, 𝜽]`.
    pub fn torsion_form(&self) -> Result<CliffordFormField, GeometryError> {
        Ok(covariant::excd(&self.theta_form(), &self.omega)?)
    }

    /// Same with a supplied connection, for detection tests.
    pub fn torsion_with(&self, omega: &CliffordFormField) -> Result<f64, GeometryError> {
        Ok(covariant::excd(&self.theta_form(), omega)?.max_abs())
    }

    /// Torsion through the scalar route `Θ^a = dθ^a + ω^a_b ∧ θ^b`.
    pub fn torsion_scalar(&self) -> Result<f64, GeometryError> {
        let mut r: f64 = 0.0;
        for a in 0..4 {
            let mut t = self.theta_scalar(a).d()?;
            for b in 0..4 {
                t = t.add(&self.omega_scalar(a, b).tensor_wedge(&self.theta_scalar(b))?)?;
            }
            r = r.max(t.max_abs());
        }
        Ok(r)
    }

    /// Cartan's second structure equation against the curvature bivectors:
    /// `dω^a_b + ω^a_c ∧ ω^c_b` vs `R^a_{bμν} = η^{aa} (e_a ∧ e_b) · R_μν`.
    pub fn cartan2_residual(&self) -> Result<f64, GeometryError> {
        self.need(3)?;
        let mut r: f64 = 0.0;
        let oms: Vec<Vec<Form<J>>> = (0..4).map(|a| (0..4).map(|b| self.omega_scalar(a, b)).collect()).collect();
        for a in 0..4 {
            for b in 0..4 {
                let mut om = oms[a][b].d()?;
                for c in 0..4 {
                    om = om.add(&oms[a][c].tensor_wedge(&oms[c][b])?)?;
                }
                for &k in masks(2) {
                    let (m, n) = pair(k);
                    let target = ETA[a] * bivector(a, b).scalar_prod(&self.curvature[m][n].value());
                    r = r.max((om.get(k).value() - target).abs());
                }
            }
        }
        Ok(r)
    }

    /// Riemann pair symmetries on coordinate components.
    pub fn riemann_symmetry_residual(&self) -> f64 {
        let rc = self.riemann_coordinate();
        let mut r: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let x = rc[a][b][c][d];
                        r = r
                            .max((x + rc[b][a][c][d]).abs())
                            .max((x + rc[a][b][d][c]).abs())
                            .max((x - rc[c][d][a][b]).abs());
                        let cyc = x + rc[a][c][d][b] + rc[a][d][b][c];
                        r = r.max(cyc.abs());
                    }
                }
            }
        }
        r
    }

    /// Exterior Bianchi identities as 3-form residuals:
    /// `(dR + ½[ω, R], dℛ + [ω, ℛ])`.
    pub fn bianchi_form_residuals(&self) -> Result<(f64, f64), GeometryError> {
        self.need(3)?;
        let r = self.curvature_form();
        let rt = r.d()?.add(&self.omega.comm_form(&r)?.scale(0.5))?;
        let g = self.gauge_curvature_form();
        let gt = g.d()?.add(&self.omega.comm_form(&g)?)?;
        Ok((rt.max_abs(), gt.max_abs()))
    }

    /// Cyclic sums of extended derivatives of the curvature bivectors:
    /// `(Σ ∂_ρR_μν + ½[ω_ρ, R_μν], Σ ∂_ρℛ_μν + [ω_ρ, ℛ_μν])` over cyclic
    /// permutations of every index triple.
    pub fn bianchi_cyclic_residuals(&self) -> Result<(f64, f64), GeometryError> {
        self.need(3)?;
        let om: Vec<MvJet> = (0..4).map(|m| self.omega.get(1 << m).clone()).collect();
        let cyc = |c: &[[MvJet; 4]; 4], k: f64| -> f64 {
            let mut r: f64 = 0.0;
            for rho in 0..4 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        let term = |a: usize, b: usize, c2: usize| -> Multivector {
                            c[b][c2].partial(a).value() + om[a].value().comm(&c[b][c2].value()) * k
                        };
                        let s = term(rho, mu, nu) + term(mu, nu, rho) + term(nu, rho, mu);
                        r = r.max(s.max_abs());
                    }
                }
            }
            r
        };
        Ok((cyc(&self.curvature, 0.5), cyc(&self.gauge_curvature, 1.0)))
    }

    /// Commutator of covariant derivatives on coordinate vector fields.
    /// Returns `(‖[D_ρ,D_λ]∂_μ + ∂_μ⌟R_ρλ‖, ‖[D_ρ,D_λ]∂_μ − ∂_μ⌟R_ρλ‖,
    /// ‖R_μαρλ e^α − ½(∂_μ R_ρλ − R_ρλ ∂_μ)‖)`.
    pub fn commutator_curvature(&self) -> Result<(f64, f64, f64), GeometryError> {
        self.need(2)?;
        let om: Vec<MvJet> = (0..4).map(|m| self.omega.get(1 << m).clone()).collect();
        let dcov = |x: &MvJet, l: usize| -> MvJet { &x.partial(l) + &(om[l].comm(x) * 0.5) };
        let rc = self.riemann_coordinate();
        let v: [Multivector; 4] = std::array::from_fn(|m| self.coordinate_vector(m).value());
        let (mut derived, mut alternative, mut second): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for mu in 0..4 {
            let em = self.coordinate_vector(mu);
            let first: Vec<MvJet> = (0..4).map(|l| dcov(&em, l)).collect();
            for rho in 0..4 {
                for lam in 0..4 {
                    let c = dcov(&first[lam], rho) - dcov(&first[rho], lam);
                    let cv = c.value();
                    let r = self.curvature[rho][lam].value();
                    let contr = v[mu].lcontr(&r);
                    derived = derived.max((cv + contr).max_abs());
                    alternative = alternative.max((cv - contr).max_abs());
                    let mut lhs = Multivector::ZERO;
                    for al in 0..4 {
                        for be in 0..4 {
                            lhs += v[be] * (rc[mu][al][rho][lam] * self.ginv[al][be].value());
                        }
                    }
                    let rhs = (v[mu].gp(&r) - r.gp(&v[mu])) * 0.5;
                    second = second.max((lhs - rhs).max_abs());
                }
            }
        }
        Ok((derived, alternative, second))
    }

    /// Frame-gauge curvature
    /// `e_a(ω_b) − e_b(ω_a) + ½[ω_a, ω_b] − (Γ^c_ab − Γ^c_ba) ω_c`
    /// against `e_a^μ e_b^ν R_μν`.
    pub fn frame_gauge_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        let ev = self.e_values();
        let dir = |a: usize, x: &MvJet| -> Multivector {
            (0..4).fold(Multivector::ZERO, |acc, m| acc + x.partial(m).value() * ev[a][m])
        };
        for a in 0..4 {
            for b in 0..4 {
                let wa = self.omega_frame[a].value();
                let wb = self.omega_frame[b].value();
                let mut x = dir(a, &self.omega_frame[b]) - dir(b, &self.omega_frame[a]) + wa.comm(&wb) * 0.5;
                for c in 0..4 {
                    let k = self.frame_gamma[c][a][b].value() - self.frame_gamma[c][b][a].value();
                    x -= self.omega_frame[c].value() * k;
                }
                r = r.max((x - self.frame_curvature[a][b]).max_abs());
            }
        }
        r
    }

    /// `𝐃ω` (exterior covariant differential of the connection) against the
    /// component formula `∂_μω_ν − ∂_νω_μ + [ω_μ, ω_ν]`, and the commutator
    /// evaluation `[ω,ω](∂_μ,∂_ν) = 2[ω_μ, ω_ν]`.
    pub fn excd_curvature_residuals(&self) -> Result<(f64, f64), GeometryError> {
        let d = covariant::excd(&self.omega, &self.omega)?;
        let g = self.gauge_curvature_form();
        let two_path = d.sub(&g)?.max_abs();
        let ww = self.omega.comm_form(&self.omega)?;
        let mut r: f64 = 0.0;
        for &k in masks(2) {
            let (m, n) = pair(k);
            let direct = self.omega.get(1 << m).value().comm(&self.omega.get(1 << n).value()) * 2.0;
            r = r.max((ww.get(k).value() - direct).max_abs());
        }
        Ok((two_path, r))
    }
}

/// Hodge star on an orthonormal-frame form: `⋆θ^K = θ̃^K θ⁵`.
pub fn star_orthonormal<T: FormValue>(f: &Form<T>) -> Form<T> {
    let p = f.degree();
    Form::from_fn(4 - p, Frame::Orthonormal, |l| {
        let k = 0b1111 ^ l;
        f.get(k).clone() * Multivector::blade(k).hodge().get(l)
    })
}

/// Inverse of [`star_orthonormal`].
pub fn star_inv_orthonormal<T: FormValue>(f: &Form<T>) -> Form<T> {
    let p = f.degree();
    Form::from_fn(4 - p, Frame::Orthonormal, |k| {
        let l = 0b1111 ^ k;
        f.get(l).clone() * Multivector::blade(l).hodge_inv().get(k)
    })
}

/// Inverse of a 4×4 matrix of jets by cofactors.
pub fn inverse(m: &M4) -> M4 {
    let all = [0, 1, 2, 3];
    let det = minor(m, &all, &all);
    let inv_det = det.recip();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let rows: Vec<usize> = all.iter().copied().filter(|&r| r != j).collect();
            let cols: Vec<usize> = all.iter().copied().filter(|&c| c != i).collect();
            let c = &minor(m, &rows, &cols) * &inv_det;
            if (i + j) % 2 == 1 {
                -c
            } else {
                c
            }
        })
    })
}

impl Snapshot {
    /// Hodge star of a coordinate-frame form field.
    pub fn star<T: FormValue + Scaled<J>>(&self, f: &Form<T>) -> Form<T> {
        star_orthonormal(&f.convert(&self.e, Frame::Orthonormal)).convert(&self.h_transposed(), Frame::Coordinate)
    }

    /// Inverse Hodge star of a coordinate-frame form field.
    pub fn star_inv<T: FormValue + Scaled<J>>(&self, f: &Form<T>) -> Form<T> {
        star_inv_orthonormal(&f.convert(&self.e, Frame::Orthonormal)).convert(&self.h_transposed(), Frame::Coordinate)
    }

    /// Coordinate components of `⋆(θ^a ∧ θ^b ∧ θ^c)`; zero for repeated indices.
    pub fn star_theta3(&self, a: usize, b: usize, c: usize) -> Form<J> {
        let ord = self.order;
        let mask = (1u8 << a) | (1 << b) | (1 << c);
        if mask.count_ones() != 3 {
            return Form::from_fn(1, Frame::Coordinate, |_| J::zero(ord));
        }
        let sign = crate::stal::reorder_sign((1 << a) | (1 << b), 1 << c) as f64
            * crate::stal::reorder_sign(1 << a, 1 << b) as f64;
        let th = Form::from_fn(3, Frame::Orthonormal, |k| J::constant(if k == mask { sign } else { 0.0 }, ord));
        star_orthonormal(&th).convert(&self.h_transposed(), Frame::Coordinate)
    }

    /// Coordinate-frame scalar form from orthonormal components given as a
    /// multivector (`θ^K` ↔ blade `K`).
    pub fn form_from_multivector(&self, m: &Multivector, p: usize) -> Form<J> {
        let ord = self.order;
        Form::from_fn(p, Frame::Orthonormal, |k| J::constant(m.get(k), ord))
            .convert(&self.h_transposed(), Frame::Coordinate)
    }

    /// Orthonormal components of a coordinate-frame scalar form value, packed
    /// into a multivector.
    pub fn multivector_from_form(&self, f: &Form<f64>) -> Multivector {
        let o = f.convert(&self.e_values(), Frame::Orthonormal);
        let mut m = Multivector::ZERO;
        for &k in masks(f.degree()) {
            m[k as usize] = *o.get(k);
        }
        m
    }
}

/// The two indices of a 2-form mask.
pub fn pair(k: u8) -> (usize, usize) {
    let m = k.trailing_zeros() as usize;
    let n = (k & !(1 << m)).trailing_zeros() as usize;
    (m, n)
}
