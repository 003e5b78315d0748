//! Metric specification files.
//!
//! ```toml
//! label = "Schwarzschild"
//! coordinates = ["t", "r", "theta", "phi"]
//!
//! [parameters]
//! m = 1.0
//!
//! [metric]
//! "g.0.0" = "1 - 2*m/r"
//! "g.1.1" = "-1/(1 - 2*m/r)"
//! "g.2.2" = "-r^2"
//! "g.3.3" = "-r^2*sin(theta)^2"
//!
//! [flags]
//! asymptotically_flat = true
//!
//! [sample]
//! r = [4.0, 50.0]
//! theta = [0.3, 2.8]
//!
//! [stress_energy]
//! preset = "vacuum"
//!
//! [oracle]
//! kretschmann = "48*m^2/r^6"
//! ```
//!
//! Only the upper triangle (`i <= j`) of the metric may be given; missing
//! entries are zero. Coordinates without a sample range default to `[0, 1]`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::expr::{parse, BoundExpr, Expr, ExprError, Func};
use crate::jet::Jet;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("cannot read {path}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid metric file: {0}")]
    Toml(String),
    #[error("expected exactly 4 coordinates, got {0}")]
    CoordinateCount(usize),
    #[error("duplicate or reserved name `{0}`")]
    BadName(String),
    #[error("bad metric key `{0}`: expected \"g.i.j\" with 0 <= i <= j <= 3")]
    BadKey(String),
    #[error("in `{key}`")]
    Expr { key: String, source: ExprError },
    #[error("sample range for unknown coordinate `{0}`")]
    UnknownSample(String),
    #[error("empty sample range for `{0}`")]
    BadRange(String),
    #[error("unknown stress-energy preset `{0}` (expected vacuum, dust or perfect_fluid)")]
    UnknownPreset(String),
    #[error("stress-energy preset `{preset}` needs `{field}`")]
    MissingField { preset: String, field: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    label: Option<String>,
    coordinates: Vec<String>,
    #[serde(default)]
    parameters: BTreeMap<String, f64>,
    metric: BTreeMap<String, String>,
    #[serde(default)]
    flags: Flags,
    #[serde(default)]
    sample: BTreeMap<String, [f64; 2]>,
    stress_energy: Option<RawStress>,
    oracle: Option<RawOracle>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    kretschmann: Option<String>,
    mass: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStress {
    preset: String,
    rho: Option<String>,
    p: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    #[serde(default)]
    pub asymptotically_flat: bool,
    #[serde(default)]
    pub quasi_cartesian: bool,
}

/// Energy-momentum tensor in orthonormal frame components.
#[derive(Debug, Clone)]
pub enum StressEnergySpec {
    Vacuum,
    /// `diag(ρ, 0, 0, 0)`
    Dust { rho: BoundExpr },
    /// `diag(ρ, p, p, p)`
    PerfectFluid { rho: BoundExpr, p: BoundExpr },
    /// Fixed components, for tests and detection checks.
    Constant([[f64; 4]; 4]),
}

impl StressEnergySpec {
    pub fn is_vacuum(&self) -> bool {
        matches!(self, StressEnergySpec::Vacuum)
    }

    pub fn name(&self) -> &'static str {
        match self {
            StressEnergySpec::Vacuum => "vacuum",
            StressEnergySpec::Dust { .. } => "dust",
            StressEnergySpec::PerfectFluid { .. } => "perfect_fluid",
            StressEnergySpec::Constant(_) => "constant",
        }
    }

    /// `T_ab` as jets at `x`.
    pub fn frame_jets(&self, x: [f64; 4], ord: usize) -> Result<[[Jet<f64>; 4]; 4], ExprError> {
        let vars: [Jet<f64>; 4] = std::array::from_fn(|i| Jet::variable(x[i], i, ord));
        let mut t: [[Jet<f64>; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Jet::zero(ord)));
        match self {
            StressEnergySpec::Vacuum => {}
            StressEnergySpec::Dust { rho } => t[0][0] = rho.eval(&vars)?,
            StressEnergySpec::PerfectFluid { rho, p } => {
                t[0][0] = rho.eval(&vars)?;
                let p = p.eval(&vars)?;
                for (i, row) in t.iter_mut().enumerate().skip(1) {
                    row[i] = p.clone();
                }
            }
            StressEnergySpec::Constant(c) => {
                for a in 0..4 {
                    for b in 0..4 {
                        t[a][b] = Jet::constant(c[a][b], ord);
                    }
                }
            }
        }
        Ok(t)
    }
}

/// A parsed and validated metric.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub label: String,
    pub coords: [String; 4],
    pub params: BTreeMap<String, f64>,
    pub flags: Flags,
    pub sample: [(f64, f64); 4],
    pub stress: StressEnergySpec,
    /// Closed-form Kretschmann scalar from a symbolic computation, if given.
    kretschmann: Option<BoundExpr>,
    /// Expected inertial mass, for charts where the surface integral applies.
    mass: Option<BoundExpr>,
    exprs: BTreeMap<(usize, usize), Expr>,
    bound: BTreeMap<(usize, usize), BoundExpr>,
}

fn parse_key(key: &str) -> Option<(usize, usize)> {
    let rest = key.strip_prefix("g.")?;
    let (i, j) = rest.split_once('.')?;
    let (i, j): (usize, usize) = (i.parse().ok()?, j.parse().ok()?);
    (i <= j && j < 4).then_some((i, j))
}

impl MetricSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MetricError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| MetricError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, MetricError> {
        let raw: RawFile = toml::from_str(text).map_err(|e| MetricError::Toml(e.to_string()))?;
        let coords: [String; 4] = raw
            .coordinates
            .clone()
            .try_into()
            .map_err(|v: Vec<String>| MetricError::CoordinateCount(v.len()))?;
        let mut seen = std::collections::BTreeSet::new();
        for name in coords.iter().chain(raw.parameters.keys()) {
            if !seen.insert(name.clone()) || Func::from_name(name).is_some() {
                return Err(MetricError::BadName(name.clone()));
            }
        }
        let params = raw.parameters.clone();
        let compile = |key: &str, src: &str| -> Result<(Expr, BoundExpr), MetricError> {
            let e = parse(src).map_err(|source| MetricError::Expr { key: key.to_string(), source })?;
            let b = e
                .bind(&coords, &params)
                .map_err(|source| MetricError::Expr { key: key.to_string(), source })?;
            Ok((e, b))
        };
        let mut exprs = BTreeMap::new();
        let mut bound = BTreeMap::new();
        for (key, src) in &raw.metric {
            let ij = parse_key(key).ok_or_else(|| MetricError::BadKey(key.clone()))?;
            let (e, b) = compile(key, src)?;
            exprs.insert(ij, e);
            bound.insert(ij, b);
        }
        let mut sample = [(0.0, 1.0); 4];
        for (name, [lo, hi]) in &raw.sample {
            let i = coords
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| MetricError::UnknownSample(name.clone()))?;
            if !(lo <= hi) {
                return Err(MetricError::BadRange(name.clone()));
            }
            sample[i] = (*lo, *hi);
        }
        let stress = match &raw.stress_energy {
            None => StressEnergySpec::Vacuum,
            Some(s) => {
                let need = |field: &str, v: &Option<String>| -> Result<BoundExpr, MetricError> {
                    let src = v.as_ref().ok_or_else(|| MetricError::MissingField {
                        preset: s.preset.clone(),
                        field: field.to_string(),
                    })?;
                    Ok(compile(&format!("stress_energy.{field}"), src)?.1)
                };
                match s.preset.as_str() {
                    "vacuum" => StressEnergySpec::Vacuum,
                    "dust" => StressEnergySpec::Dust { rho: need("rho", &s.rho)? },
                    "perfect_fluid" => {
                        StressEnergySpec::PerfectFluid { rho: need("rho", &s.rho)?, p: need("p", &s.p)? }
                    }
                    other => return Err(MetricError::UnknownPreset(other.to_string())),
                }
            }
        };
        let kretschmann = match raw.oracle.as_ref().and_then(|o| o.kretschmann.as_ref()) {
            Some(src) => Some(compile("oracle.kretschmann", src)?.1),
            None => None,
        };
        let mass = match raw.oracle.as_ref().and_then(|o| o.mass.as_ref()) {
            Some(src) => Some(compile("oracle.mass", src)?.1),
            None => None,
        };
        Ok(MetricSpec {
            mass,
            label: raw.label.unwrap_or_else(|| "unnamed".to_string()),
            kretschmann,
            coords,
            params,
            flags: raw.flags,
            sample,
            stress,
            exprs,
            bound,
        })
    }

    /// True when no off-diagonal entry is given.
    pub fn is_diagonal(&self) -> bool {
        self.exprs.keys().all(|&(i, j)| i == j)
    }

    pub fn component(&self, i: usize, j: usize) -> Option<&Expr> {
        self.exprs.get(&(i.min(j), i.max(j)))
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    /// `g_μν` as jets of order `ord` at `x`.
    pub fn metric_jets(&self, x: [f64; 4], ord: usize) -> Result<[[Jet<f64>; 4]; 4], ExprError> {
        let vars: [Jet<f64>; 4] = std::array::from_fn(|i| Jet::variable(x[i], i, ord));
        self.metric_jets_from(&vars)
    }

    /// `g_μν` with arbitrary coordinate input jets.
    pub fn metric_jets_from(&self, vars: &[Jet<f64>; 4]) -> Result<[[Jet<f64>; 4]; 4], ExprError> {
        let ord = vars.iter().map(Jet::order).min().unwrap_or(0);
        let mut g: [[Jet<f64>; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Jet::zero(ord)));
        for (&(i, j), b) in &self.bound {
            let v = b.eval(vars)?;
            g[j][i] = v.clone();
            g[i][j] = v;
        }
        Ok(g)
    }

    /// Oracle value of the Kretschmann scalar at `x`, when the file has one.
    pub fn kretschmann_oracle(&self, x: [f64; 4]) -> Option<Result<f64, ExprError>> {
        let k = self.kretschmann.as_ref()?;
        let vars: [Jet<f64>; 4] = std::array::from_fn(|i| Jet::variable(x[i], i, 0));
        Some(k.eval(&vars).map(|j| j.value()))
    }

    /// Expected value of the inertial-mass limit, evaluated at the origin.
    pub fn mass_oracle(&self) -> Option<Result<f64, ExprError>> {
        let m = self.mass.as_ref()?;
        let vars: [Jet<f64>; 4] = std::array::from_fn(|i| Jet::variable(0.0, i, 0));
        Some(m.eval(&vars).map(|j| j.value()))
    }

    /// Replace the stress-energy tensor.
    pub fn with_stress(mut self, stress: StressEnergySpec) -> Self {
        self.stress = stress;
        self
    }
}
