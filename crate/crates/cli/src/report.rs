use std::collections::BTreeMap;
use std::path::Path;

use lyl_core::count_engine::CountPolynomial;
use lyl_core::ginibre_checks::{EdgeExtensionReport, GinibreReport};
use lyl_core::limit_theorems::{CltBoundReport, Hypothesis};
use lyl_core::root_certificates::WedgeCertificate;
use lyl_core::root_finder::RootSet;
use lyl_core::spin_systems::{AppendixBReport, LeeYangCertificate};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialJson {
    pub degree: usize,
    pub coefficients: Vec<String>,
}

impl PolynomialJson {
    pub fn from_count(p: &CountPolynomial) -> Self {
        Self { degree: p.degree(), coefficients: p.to_decimal_strings() }
    }

    /// Positive real coefficients, printed with 17 significant digits.
    pub fn from_f64(c: &[f64]) -> Self {
        Self { degree: c.len().saturating_sub(1), coefficients: c.iter().map(|x| format!("{x:.16e}")).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootJson {
    pub re: f64,
    pub im: f64,
    pub err: f64,
}

pub fn roots_json(rs: &RootSet) -> Vec<RootJson> {
    rs.roots.iter().zip(&rs.err).map(|(z, e)| RootJson { re: z.re, im: z.im, err: *e }).collect()
}

/// One line of the certificate table.
///
/// `applicable` means every hypothesis was met. `sound` is false only when an applicable
/// theorem's conclusion failed. Plain numerical checks carry `holds` instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateEntry {
    pub id: String,
    pub applicable: bool,
    pub sound: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holds: Option<bool>,
    pub bound: Option<f64>,
    pub measured: Option<f64>,
    pub margins: Vec<f64>,
    pub hypotheses: Vec<Hypothesis>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl CertificateEntry {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.into(),
            applicable: true,
            sound: true,
            holds: None,
            bound: None,
            measured: None,
            margins: vec![],
            hypotheses: vec![],
            constants: BTreeMap::new(),
            note: String::new(),
        }
    }

    /// A theorem whose hypotheses are always met: its verdict is its soundness.
    pub fn theorem(id: &str, pass: bool, margins: Vec<f64>) -> Self {
        Self { sound: pass, margins, ..Self::new(id) }
    }

    /// A check that is not a theorem; failing it is reported but is no soundness violation.
    pub fn check(id: &str, holds: bool, margins: Vec<f64>) -> Self {
        Self { holds: Some(holds), margins, ..Self::new(id) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn from_wedge(id: &str, c: &WedgeCertificate) -> Self {
        let margins = c.margins.iter().map(|m| if m.is_nan() { f64::INFINITY } else { *m }).filter(|m| m.is_finite()).collect();
        let mut e = Self::theorem(id, c.pass, margins);
        e.bound = c.modulus_floor.or(Some(c.phi));
        e.measured = finite(c.worst_margin());
        if !c.excluded.is_empty() {
            e.note = format!("{} roots near zero skipped", c.excluded.len());
        }
        e
    }

    pub fn from_clt(r: &CltBoundReport) -> Self {
        let mut e = Self::new(&r.id);
        e.applicable = r.applicable;
        e.sound = r.sound;
        e.bound = finite(r.bound);
        e.measured = finite(r.measured);
        e.margins = r.hypotheses.iter().map(|h| h.margin).collect();
        e.hypotheses = r.hypotheses.clone();
        e.constants = r.constants.clone();
        if r.vacuous {
            e.note = "vacuous bound".into();
        }
        e
    }

    pub fn from_hypotheses(id: &str, hs: Vec<Hypothesis>) -> Self {
        let pass = hs.iter().all(|h| h.satisfied);
        Self { margins: hs.iter().map(|h| h.margin).collect(), hypotheses: hs, ..Self::theorem(id, pass, vec![]) }
    }

    pub fn from_ginibre(r: &GinibreReport) -> Self {
        let mut e = Self::new("ginibre");
        e.applicable = r.hypothesis_holds;
        e.sound = r.sound;
        e.bound = Some(r.a);
        e.measured = Some(r.conclusion_margin);
        e.margins = r.margins.iter().map(|m| m.margin).collect();
        e.hypotheses = vec![Hypothesis { name: "ratio_condition".into(), satisfied: r.hypothesis_holds, margin: r.worst_margin() }];
        if !r.skipped.is_empty() {
            e.note = format!("skipped m = {:?}", r.skipped);
        }
        e
    }

    pub fn from_edge_extension(rs: &[EdgeExtensionReport]) -> Self {
        let pass = rs.iter().all(EdgeExtensionReport::holds);
        let margins = rs.iter().filter_map(|r| r.variance_margin).collect();
        Self::theorem("edge_extension_identities", pass, margins)
    }

    pub fn from_lee_yang(c: &LeeYangCertificate) -> Self {
        let mut e = Self::new("lee_yang_circle");
        e.applicable = c.applicable;
        e.sound = !c.applicable || c.pass;
        e.measured = Some(c.max_deviation);
        e.margins = c.margins.clone();
        e
    }

    pub fn from_appendix_b(r: &AppendixBReport) -> Self {
        let mut e = Self::theorem("lattice_gas_inequality", r.holds, r.rows.iter().map(|row| row.relative_margin).collect());
        let q = &r.quantities;
        e.constants = BTreeMap::from([("B".into(), q.b), ("D".into(), q.d), ("D_general".into(), q.d_general), ("z0".into(), r.z0)]);
        if !r.lhs_nonpositive {
            e.note = "some left-hand side is positive".into();
        }
        e
    }
}

/// Exit status of a finished run: 2 if an applicable certificate is unsound, otherwise 0.
pub fn exit_code_for(certs: &[CertificateEntry]) -> i32 {
    if certs.iter().any(|c| c.applicable && !c.sound) {
        2
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub z0: String,
    pub pipelines: Vec<String>,
    pub root_digits: Option<u32>,
}

impl Metadata {
    pub fn new(z0: String, pipelines: Vec<String>) -> Self {
        Self { tool: "lyl".into(), version: env!("CARGO_PKG_VERSION").into(), z0, pipelines, root_digits: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub instance: serde_json::Value,
    pub polynomial: PolynomialJson,
    pub roots: Vec<RootJson>,
    pub certificates: Vec<CertificateEntry>,
    pub metadata: Metadata,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        exit_code_for(&self.certificates)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(io),
        other => CliError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inapplicable_failures_do_not_count() {
        let mut bad = CertificateEntry::new("x");
        bad.sound = false;
        assert_eq!(exit_code_for(&[bad.clone()]), 2);
        bad.applicable = false;
        assert_eq!(exit_code_for(&[bad]), 0);
        assert_eq!(exit_code_for(&[CertificateEntry::check("y", false, vec![-1.0])]), 0);
    }

    #[test]
    fn entries_serialize_without_empty_fields() {
        let v = serde_json::to_value(CertificateEntry::theorem("t", true, vec![0.5])).unwrap();
        assert!(v.get("holds").is_none() && v.get("note").is_none());
        assert_eq!(v["margins"][0], 0.5);
        assert!(v["bound"].is_null());
    }
}
