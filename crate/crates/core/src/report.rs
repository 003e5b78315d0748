//! JSON check reports.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so a report
//! parses back to the same numbers and re-emits byte-identically. NaN and
//! infinities are written as `null`.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::{Formatter, PrettyFormatter};

/// Default tolerance classes.
pub const TOL_ALGEBRA: f64 = 1e-11;
pub const TOL_FIRST: f64 = 1e-9;
pub const TOL_SECOND: f64 = 1e-7;
pub const TOL_QUADRATURE: f64 = 1e-2;

/// How a residual is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Identity check: pass iff `residual ≤ tolerance`.
    #[default]
    Upper,
    /// Refutation witness: pass iff `residual > tolerance`.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub point: Option<[f64; 4]>,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_nan")]
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "is_upper")]
    pub bound: Bound,
}

fn is_upper(b: &Bound) -> bool {
    *b == Bound::Upper
}

fn finite_or_null<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Check {
    pub fn upper(name: impl Into<String>, point: Option<[f64; 4]>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), point, residual, tolerance, pass: residual <= tolerance, bound: Bound::Upper }
    }

    pub fn lower(name: impl Into<String>, point: Option<[f64; 4]>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), point, residual, tolerance, pass: residual > tolerance, bound: Bound::Lower }
    }
}

/// A named numeric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row.iter().map(|&x| x.is_finite().then_some(x)).collect());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Metadata {
    pub tool_version: String,
    pub command: String,
    pub metric_label: Option<String>,
    pub parameters: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch; omitted for reproducible output.
    pub timestamp: Option<u64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CheckReport {
    pub metadata: Metadata,
    pub checks: Vec<Check>,
    pub tables: BTreeMap<String, Table>,
    pub summary: Summary,
}

impl CheckReport {
    pub fn new(command: &str) -> Self {
        CheckReport {
            metadata: Metadata {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.metadata.notes.push(s.into());
    }

    /// Recount the summary from the checks.
    pub fn finish(&mut self) {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        self.summary = Summary { total: self.checks.len(), passed, failed: self.checks.len() - passed };
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Names that occur twice at the same point.
    pub fn duplicate_names(&self) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        let mut dup = Vec::new();
        for c in &self.checks {
            let key = (c.name.clone(), c.point.map(|p| p.map(f64::to_bits)));
            if !seen.insert(key) {
                dup.push(c.name.clone());
            }
        }
        dup
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits::default());
        self.serialize(&mut ser).expect("report serialises");
        out.push(b'\n');
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Pretty printer that writes every float in scientific notation with 17
/// significant digits.
#[derive(Default)]
struct FixedDigits {
    inner: PrettyFormatter<'static>,
}

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CheckReport {
        let mut r = CheckReport::new("check");
        r.metadata.metric_label = Some("test".into());
        r.metadata.parameters.insert("m".into(), 1.0);
        r.metadata.seed = Some(7);
        r.push(Check::upper("torsion", Some([0.1, 4.5, 1.0, -0.3]), 1.234e-15, TOL_FIRST));
        r.push(Check::upper("broken", None, f64::NAN, TOL_FIRST));
        r.push(Check::lower("witness", None, 0.03, 1e-6));
        let mut t = Table::new(&["radius", "mass"]);
        t.push(&[50.0, 0.98]);
        t.push(&[100.0, f64::INFINITY]);
        r.tables.insert("mass".into(), t);
        r.finish();
        r
    }

    #[test]
    fn pass_follows_bound() {
        let r = sample();
        assert!(r.checks[0].pass);
        assert!(!r.checks[1].pass);
        assert!(r.checks[2].pass);
        assert_eq!(r.summary, Summary { total: 3, passed: 2, failed: 1 });
    }

    #[test]
    fn floats_have_seventeen_digits_and_nan_is_null() {
        let j = sample().to_json();
        assert!(j.contains("1.2339999999999999e-15"), "{j}");
        assert!(j.contains("\"residual\": null"));
        assert!(!j.contains("NaN"));
    }

    #[test]
    fn json_round_trips_byte_identically() {
        let j = sample().to_json();
        let back = CheckReport::from_json(&j).unwrap();
        assert_eq!(back.to_json(), j);
        assert!(back.checks[1].residual.is_nan());
    }

    #[test]
    fn duplicates_are_reported() {
        let mut r = sample();
        r.push(Check::upper("torsion", Some([0.1, 4.5, 1.0, -0.3]), 0.0, 1.0));
        assert_eq!(r.duplicate_names(), vec!["torsion".to_string()]);
    }
}
