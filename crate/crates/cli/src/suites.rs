use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use lyl_core::root_certificates::table1_angles;
use serde::Serialize;

use crate::config::{Pipeline, RunConfig};
use crate::pipeline::{execute, generate, Instance};
use crate::report::{exit_code_for, write_csv, write_json, CertificateEntry, Report};
use crate::CliError;

pub const SUITES: [&str; 3] = ["table1", "examples_5", "ising_small"];

/// One cell of the pass/fail matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixRow {
    pub instance: String,
    pub certificate: String,
    pub applicable: bool,
    pub sound: bool,
    pub holds: Option<bool>,
    pub expected: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    /// Every expected certificate passed.
    pub certified: bool,
    pub matrix: Vec<MatrixRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<Report>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub table1: Vec<Table1Csv>,
}

impl SuiteReport {
    pub fn exit_code(&self) -> i32 {
        let entries: Vec<CertificateEntry> = self.reports.iter().flat_map(|r| r.certificates.clone()).collect();
        exit_code_for(&entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Csv {
    pub d1: u32,
    pub phi1_over_pi: f64,
    pub k2: u32,
    pub d2: u32,
    pub phi2_over_pi: f64,
    pub phi2_cell_over_pi: f64,
    pub below_right_angle: bool,
}

struct Case {
    label: String,
    gen: &'static str,
    params: Vec<(&'static str, String)>,
    expected: &'static [&'static str],
}

fn case(label: &str, gen: &'static str, params: &[(&'static str, &str)], expected: &'static [&'static str]) -> Case {
    Case { label: label.into(), gen, params: params.iter().map(|(k, v)| (*k, v.to_string())).collect(), expected }
}

fn examples_5() -> Vec<Case> {
    vec![
        case("grid_3x3_matchings", "grid_3x3", &[("profile", "matchings")], &["heilmann_lieb", "modulus_floor", "variance_chain"]),
        case("grid_3x3_unbranched", "grid_3x3", &[("profile", "unbranched")], &["wedge_uniform", "modulus_floor", "variance_chain"]),
        case("kbip_4x3_monomer_k3", "kbip_4x3", &[("profile", "matchings"), ("profile2", "down:3")], &["wedge_bipartite", "variance_chain"]),
        case("kbip_5x3_unbranched_k3", "kbip_5x3", &[("profile", "unbranched"), ("profile2", "down:3")], &["wedge_bipartite", "variance_chain"]),
        case("kbip_2x3_even", "kbip_2x3", &[("profile", "matchings"), ("profile2", "0,2")], &["wedge_bipartite", "berry_esseen"]),
    ]
}

fn ising_small() -> Vec<Case> {
    let mut out = Vec::new();
    for beta in ["0.1", "0.3", "1.0"] {
        for gen in ["chain_4", "chain_8", "chain_12", "ring_8", "torus_3x3"] {
            out.push(Case {
                label: format!("{gen}_beta_{beta}"),
                gen,
                params: vec![("beta", beta.to_string())],
                expected: &["lee_yang_circle"],
            });
        }
    }
    out
}

fn passed(c: &CertificateEntry) -> bool {
    match c.holds {
        Some(h) => h,
        None => c.applicable && c.sound,
    }
}

fn run_cases(cfg: &RunConfig, cases: Vec<Case>, pipelines: &[Pipeline]) -> Result<(Vec<MatrixRow>, Vec<Report>), CliError> {
    let mut run_cfg = cfg.clone();
    run_cfg.pipelines = pipelines.iter().copied().collect::<BTreeSet<_>>();
    let results: Vec<Result<Report, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .iter()
            .map(|c| {
                let run_cfg = &run_cfg;
                scope.spawn(move || {
                    let params: BTreeMap<String, String> = c.params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
                    let mut inst = generate(c.gen, &params, 0)?;
                    match &mut inst {
                        Instance::Graph { name, .. } | Instance::Spin { name, .. } => *name = c.label.clone(),
                    }
                    Ok(execute(run_cfg, &inst)?.report)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite worker panicked")).collect()
    });
    let mut matrix = Vec::new();
    let mut reports = Vec::new();
    for (c, r) in cases.iter().zip(results) {
        let r = r?;
        for e in &r.certificates {
            matrix.push(MatrixRow {
                instance: c.label.clone(),
                certificate: e.id.clone(),
                applicable: e.applicable,
                sound: e.sound,
                holds: e.holds,
                expected: c.expected.contains(&e.id.as_str()),
                passed: passed(e),
            });
        }
        for id in c.expected.iter().filter(|id| !r.certificates.iter().any(|e| e.id == **id)) {
            matrix.push(MatrixRow {
                instance: c.label.clone(),
                certificate: id.to_string(),
                applicable: false,
                sound: true,
                holds: None,
                expected: true,
                passed: false,
            });
        }
        reports.push(r);
    }
    Ok((matrix, reports))
}

fn table1() -> Result<(Vec<MatrixRow>, Vec<Table1Csv>), CliError> {
    let rows = table1_angles()?;
    let matrix = rows
        .iter()
        .map(|r| MatrixRow {
            instance: format!("d1={},k2={},d2={}", r.d1, r.k2, r.d2),
            certificate: "angle_sum_below_right_angle".into(),
            applicable: true,
            sound: true,
            holds: Some(r.below_right_angle),
            expected: true,
            passed: r.below_right_angle,
        })
        .collect();
    let table = rows
        .iter()
        .map(|r| Table1Csv {
            d1: r.d1,
            phi1_over_pi: r.phi1 / PI,
            k2: r.k2,
            d2: r.d2,
            phi2_over_pi: r.phi2 / PI,
            phi2_cell_over_pi: r.phi2_cell / PI,
            below_right_angle: r.below_right_angle,
        })
        .collect();
    Ok((matrix, table))
}

/// Runs a curated suite without writing anything.
pub fn scenario_suite(name: &str, cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let (matrix, reports, table) = match name {
        "table1" => {
            let (m, t) = table1()?;
            (m, vec![], t)
        }
        "examples_5" => {
            let (m, r) = run_cases(cfg, examples_5(), &[Pipeline::Certificates, Pipeline::Limits])?;
            (m, r, vec![])
        }
        "ising_small" => {
            let (m, r) = run_cases(cfg, ising_small(), &[Pipeline::Ising])?;
            (m, r, vec![])
        }
        _ => {
            return Err(CliError::Config { field: "suite".into(), message: format!("unknown suite `{name}`; known: {}", SUITES.join(", ")) })
        }
    };
    let certified = matrix.iter().filter(|r| r.expected).all(|r| r.passed);
    Ok(SuiteReport { suite: name.into(), certified, matrix, reports, table1: table })
}

impl SuiteReport {
    pub fn write(&self, dir: &std::path::Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("report.json"), self)?;
        write_csv(&dir.join("matrix.csv"), &self.matrix)?;
        if !self.table1.is_empty() {
            write_csv(&dir.join("table1.csv"), &self.table1)?;
        }
        Ok(())
    }
}
