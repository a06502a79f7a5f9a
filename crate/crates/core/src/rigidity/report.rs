use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;

use super::definiteness::{classify_definiteness, Definiteness};
use super::diagnostics::{extremum_with_data, oscillation, ExtremumDiagnostics};
use crate::error::{GeometryError, Result};
use crate::warped_geometry::{quotients_from, GraphHypersurface};

/// One named pass/fail comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }

    /// Passes when `value >= tolerance`.
    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value >= tolerance }
    }

    /// Passes when `|value - target| <= tolerance`; stores the deviation.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::at_most(name, (value - target).abs(), tolerance)
    }

    /// Boolean outcome recorded as value 1 or 0.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, tolerance: 1.0, pass: ok }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub oscillation: f64,
}

impl QuotientStats {
    pub fn from_values(q: &[f64]) -> Self {
        Self {
            min: q.iter().copied().fold(f64::INFINITY, f64::min),
            max: q.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: crate::numerics::compensated_sum(q.iter().copied()) / q.len() as f64,
            oscillation: oscillation(q),
        }
    }
}

/// Number of nodes where `-2 E_(k)` has each sign pattern.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DefinitenessCounts {
    pub positive_semi: usize,
    pub negative_semi: usize,
    pub indefinite: usize,
}

/// Quotient statistics, operator definiteness and extremum data of a graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphAnalysis {
    pub quotient: QuotientStats,
    pub definiteness: DefinitenessCounts,
    pub extremum: ExtremumDiagnostics,
}

impl GraphAnalysis {
    /// Largest violation of `min q <= slope(r_min) <= slope(r_max) <= max q`,
    /// zero when the chain holds.
    pub fn chain_violation(&self) -> f64 {
        let ex = &self.extremum;
        let links = [
            self.quotient.min - ex.slope_at_min,
            ex.slope_at_min - ex.slope_at_max,
            ex.slope_at_max - self.quotient.max,
        ];
        links.iter().fold(0.0_f64, |acc, &v| acc.max(v))
    }
}

pub fn analyze_graph(gh: &GraphHypersurface, k: usize) -> Result<GraphAnalysis> {
    let data = gh.evaluate(k)?;
    let q = quotients_from(gh, &data)?;
    let mut counts = DefinitenessCounts::default();
    for p in &data {
        match classify_definiteness(&(&p.lovelock.einstein * -2.0), &p.metric)? {
            Definiteness::PositiveSemi => counts.positive_semi += 1,
            Definiteness::NegativeSemi => counts.negative_semi += 1,
            Definiteness::Indefinite => counts.indefinite += 1,
        }
    }
    Ok(GraphAnalysis {
        quotient: QuotientStats::from_values(&q),
        definiteness: counts,
        extremum: extremum_with_data(gh, k, &data)?,
    })
}

/// Machine-readable run summary: parameters, checks and free-form sections.
///
/// Serialized with sorted keys and every float as a 17-significant-digit
/// exponent literal, so equal runs give equal bytes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RigidityReport {
    pub params: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub sections: BTreeMap<String, Value>,
}

struct ExpFormatter;

impl serde_json::ser::Formatter for ExpFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| GeometryError::InvalidParameter(format!("serialization failed: {e}")))
}

impl RigidityReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn param<T: Serialize>(&mut self, key: &str, v: T) -> Result<&mut Self> {
        self.params.insert(key.to_string(), to_value(&v)?);
        Ok(self)
    }

    pub fn section<T: Serialize>(&mut self, key: &str, v: &T) -> Result<&mut Self> {
        self.sections.insert(key.to_string(), to_value(v)?);
        Ok(self)
    }

    pub fn push(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_value(&self) -> Result<Value> {
        let mut root = serde_json::Map::new();
        root.insert("all_pass".into(), Value::Bool(self.all_pass()));
        root.insert("checks".into(), to_value(&self.checks)?);
        root.insert("params".into(), to_value(&self.params)?);
        for (k, v) in &self.sections {
            root.insert(k.clone(), v.clone());
        }
        Ok(Value::Object(root))
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let mut ser = serde_json::Serializer::with_formatter(out, ExpFormatter);
        self.to_value()?
            .serialize(&mut ser)
            .map_err(|e| GeometryError::InvalidParameter(format!("json output failed: {e}")))
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_json(&mut buf)?;
        buf.push(b'\n');
        Ok(String::from_utf8(buf).expect("json is utf-8"))
    }

    /// Checks as `name,value,tolerance,pass`.
    pub fn write_checks_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| GeometryError::InvalidParameter(format!("csv output failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["name", "value", "tolerance", "pass"]).map_err(io)?;
        for c in &self.checks {
            w.write_record([c.name.clone(), format!("{:.16e}", c.value), format!("{:.16e}", c.tolerance), c.pass.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| GeometryError::InvalidParameter(format!("csv output failed: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_constructors() {
        assert!(Check::at_most("a", 1e-9, 1e-8).pass);
        assert!(!Check::at_most("a", f64::NAN, 1e-8).pass);
        assert!(Check::at_least("b", 2.0, 1.0).pass);
        let c = Check::within("c", 1.5, 1.0, 0.1);
        assert!(!c.pass && (c.value - 0.5).abs() < 1e-15);
        assert!(Check::flag("d", true).pass && !Check::flag("d", false).pass);
    }

    #[test]
    fn json_is_sorted_and_exact() {
        let mut r = RigidityReport::new();
        r.param("zeta", 0.1).unwrap().param("alpha", 3).unwrap();
        r.push(Check::at_most("x", f64::NAN, 1.0));
        let s = r.to_json_string().unwrap();
        assert!(s.contains("\"alpha\":3"));
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("\"value\":null"));
        assert!(s.contains("\"all_pass\":false"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["params"]["zeta"].as_f64(), Some(0.1));
    }
}
