//! Command-line driver: load or generate an instance, run the selected pipelines,
//! and write `report.json` plus CSV tables.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod suites;

use config::{RunConfig, Source};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {field}: {message}")]
    Config { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] lyl_core::Error),
}

/// What a finished run reports back to `main`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub exit_code: i32,
    pub lines: Vec<String>,
}

/// Runs one configuration end to end and writes its files under `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    if let Source::Suite { name } = &cfg.source {
        let s = suites::scenario_suite(name, cfg)?;
        s.write(&cfg.out)?;
        let failed = s.matrix.iter().filter(|r| r.expected && !r.passed).count();
        let mut lines = vec![format!("suite {}: {} cells, {} expected failures", s.suite, s.matrix.len(), failed)];
        lines.extend(s.matrix.iter().filter(|r| r.expected).map(|r| {
            format!("{:<6} {} {}", if r.passed { "PASS" } else { "FAIL" }, r.instance, r.certificate)
        }));
        return Ok(RunSummary { exit_code: s.exit_code(), lines });
    }
    let inst = pipeline::resolve(cfg)?;
    let out = pipeline::execute(cfg, &inst)?;
    out.write(&cfg.out)?;
    let r = &out.report;
    let mut lines = vec![format!("{}: degree {}, {} certificates", inst.name(), r.polynomial.degree, r.certificates.len())];
    lines.extend(r.certificates.iter().map(|c| {
        let verdict = match (c.holds, c.applicable, c.sound) {
            (Some(true), ..) => "HOLDS",
            (Some(false), ..) => "FAILS",
            (None, false, _) => "N/A",
            (None, true, true) => "SOUND",
            (None, true, false) => "UNSOUND",
        };
        format!("{verdict:<8} {}", c.id)
    }));
    Ok(RunSummary { exit_code: r.exit_code(), lines })
}
