//! Inertial mass from the surface integral
//! `m(R) = −1/(16π) ∮ ∂_β(g₁₁g₂₂g₃₃ g^{αβ}) dσ_α`, `dσ_α = R² x̂_α dΩ`,
//! over coordinate spheres of a quasi-Cartesian chart, followed by
//! polynomial extrapolation in `1/R`.

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::ExprError;
use crate::geometry::inverse;
use crate::metric::MetricSpec;

/// Smallest accepted number of Gauss–Legendre nodes in θ.
pub const MIN_QUAD_ORDER: usize = 4;

#[derive(Debug, Error)]
pub enum MassError {
    #[error("metric `{0}` is not flagged quasi_cartesian; the surface integral needs a quasi-Cartesian chart")]
    NotQuasiCartesian(String),
    #[error("quadrature order {0} below the minimum {MIN_QUAD_ORDER}")]
    QuadratureOrder(usize),
    #[error("radius {radius} below 3m = {min}")]
    RadiusTooSmall { radius: f64, min: f64 },
    #[error("no radii given")]
    NoRadii,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Compensated sum (Neumaier).
pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// `Σ_{α,β} ∂_β(g₁₁g₂₂g₃₃ g^{αβ}) n_α` at `x` for the unit radial vector `n`.
pub fn integrand(spec: &MetricSpec, x: [f64; 4], n: [f64; 3]) -> Result<f64, ExprError> {
    let g = spec.metric_jets(x, 1)?;
    let gi = inverse(&g);
    let vol = &(&g[1][1] * &g[2][2]) * &g[3][3];
    let mut s = 0.0;
    for a in 1..4 {
        for b in 1..4 {
            s += (&vol * &gi[a][b]).deriv(&[b]) * n[a - 1];
        }
    }
    Ok(s)
}

/// `m(R)` with `order` Gauss–Legendre nodes in θ and `2·order` trapezoid
/// nodes in φ.
pub fn mass_at(spec: &MetricSpec, radius: f64, order: usize) -> Result<f64, MassError> {
    let (ct, wt) = gauss_legendre(order);
    let nphi = 2 * order;
    let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
    let rows: Result<Vec<f64>, ExprError> = (0..order)
        .into_par_iter()
        .map(|i| {
            let cos_t = ct[i];
            let sin_t = (1.0 - cos_t * cos_t).sqrt();
            let vals: Result<Vec<f64>, ExprError> = (0..nphi)
                .map(|j| {
                    let phi = j as f64 * dphi;
                    let n = [sin_t * phi.cos(), sin_t * phi.sin(), cos_t];
                    integrand(spec, [0.0, radius * n[0], radius * n[1], radius * n[2]], n)
                })
                .collect();
            Ok(neumaier_sum(vals?) * dphi * wt[i])
        })
        .collect();
    Ok(-radius * radius / (16.0 * std::f64::consts::PI) * neumaier_sum(rows?))
}

/// Neville extrapolation of `v(h)` to `h = 0`.
pub fn extrapolate_to_zero(h: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
        }
    }
    p[0]
}

/// Least-squares slope of `log|m(R_i) − m(R_{i+1})|` against `log R_i`.
pub fn loglog_slope(rows: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .windows(2)
        .filter_map(|w| {
            let d = (w[0].1 - w[1].1).abs();
            (d > 0.0).then(|| (w[0].0.ln(), d.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Mass table for a set of radii.
#[derive(Debug, Clone)]
pub struct MassRun {
    /// `(R, m(R))` in the order given.
    pub rows: Vec<(f64, f64)>,
    /// Extrapolated `R → ∞` value.
    pub limit: f64,
    /// Convergence slope of successive differences, when defined.
    pub slope: Option<f64>,
}

pub fn inertial_mass(spec: &MetricSpec, radii: &[f64], order: usize) -> Result<MassRun, MassError> {
    if !spec.flags.quasi_cartesian {
        return Err(MassError::NotQuasiCartesian(spec.label.clone()));
    }
    if order < MIN_QUAD_ORDER {
        return Err(MassError::QuadratureOrder(order));
    }
    if radii.is_empty() {
        return Err(MassError::NoRadii);
    }
    if let Some(m) = spec.param("m") {
        if let Some(&r) = radii.iter().find(|&&r| r < 3.0 * m) {
            return Err(MassError::RadiusTooSmall { radius: r, min: 3.0 * m });
        }
    }
    let rows: Vec<(f64, f64)> =
        radii.iter().map(|&r| mass_at(spec, r, order).map(|m| (r, m))).collect::<Result<_, _>>()?;
    let h: Vec<f64> = rows.iter().map(|r| 1.0 / r.0).collect();
    let v: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let limit = extrapolate_to_zero(&h, &v);
    Ok(MassRun { slope: loglog_slope(&rows), rows, limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [4, 7, 32] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for k in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn extrapolation_is_exact_on_polynomials() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let v: Vec<f64> = h.iter().map(|h| 3.0 - 2.0 * h + 5.0 * h * h - h * h * h).collect();
        assert!((extrapolate_to_zero(&h, &v) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        assert_eq!(neumaier_sum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn schwarzschild_mass_is_recovered() {
        let run = inertial_mass(&fixtures::schwarzschild_qc(), &[50.0, 100.0, 200.0, 400.0, 800.0], 32).unwrap();
        assert!((run.limit - 1.0).abs() < 1e-2, "{run:?}");
        for (r, m) in &run.rows {
            assert!((m - 1.0).abs() < 20.0 / r, "{r} {m}");
        }
    }

    #[test]
    fn minkowski_mass_vanishes() {
        let run = inertial_mass(&fixtures::minkowski_qc(), &[50.0, 100.0], 8).unwrap();
        assert!(run.rows.iter().all(|r| r.1.abs() < 1e-10) && run.limit.abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = fixtures::schwarzschild_qc();
        assert!(matches!(inertial_mass(&s, &[50.0], 3), Err(MassError::QuadratureOrder(3))));
        assert!(matches!(inertial_mass(&s, &[2.5], 8), Err(MassError::RadiusTooSmall { .. })));
        assert!(matches!(inertial_mass(&s, &[], 8), Err(MassError::NoRadii)));
        assert!(matches!(
            inertial_mass(&fixtures::schwarzschild(), &[50.0], 8),
            Err(MassError::NotQuasiCartesian(_))
        ));
    }
}
