//! Metric files shipped under `fixtures/`, embedded for tests and the CLI.

use crate::metric::MetricSpec;

pub const MINKOWSKI: &str = include_str!("../../../fixtures/minkowski.toml");
pub const MINKOWSKI_QC: &str = include_str!("../../../fixtures/minkowski_qc.toml");
pub const SCHWARZSCHILD: &str = include_str!("../../../fixtures/schwarzschild.toml");
pub const SCHWARZSCHILD_QC: &str = include_str!("../../../fixtures/schwarzschild_qc.toml");
pub const ISOTROPIC_QC: &str = include_str!("../../../fixtures/isotropic_qc.toml");
pub const FRW: &str = include_str!("../../../fixtures/frw.toml");

/// `(file stem, contents)` for every shipped metric.
pub const ALL: [(&str, &str); 6] = [
    ("minkowski", MINKOWSKI),
    ("minkowski_qc", MINKOWSKI_QC),
    ("schwarzschild", SCHWARZSCHILD),
    ("schwarzschild_qc", SCHWARZSCHILD_QC),
    ("isotropic_qc", ISOTROPIC_QC),
    ("frw", FRW),
];

fn load(text: &str) -> MetricSpec {
    MetricSpec::from_toml_str(text).expect("shipped fixture parses")
}

pub fn minkowski() -> MetricSpec {
    load(MINKOWSKI)
}

pub fn minkowski_qc() -> MetricSpec {
    load(MINKOWSKI_QC)
}

pub fn schwarzschild() -> MetricSpec {
    load(SCHWARZSCHILD)
}

pub fn schwarzschild_qc() -> MetricSpec {
    load(SCHWARZSCHILD_QC)
}

pub fn isotropic_qc() -> MetricSpec {
    load(ISOTROPIC_QC)
}

pub fn frw() -> MetricSpec {
    load(FRW)
}
