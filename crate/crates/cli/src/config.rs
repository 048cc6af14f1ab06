use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use clap::Parser;
use lyl_core::count_engine::{DEFAULT_ENUM_CAP, DEFAULT_STATE_CAP};
use lyl_core::scalar::parse_rational;
use num_rational::BigRational;
use serde::Serialize;

use crate::CliError;

#[derive(Parser, Debug, Clone, Default)]
#[command(name = "lyl", version, about = "Counting polynomials, certified zeros, and exact limit-theorem checks")]
pub struct Args {
    /// Graph JSON ({"vertices":[{"id","C"}],"edges"}) or spin JSON ({"sites","pairs","beta"}).
    #[arg(long, env = "LYL_INSTANCE")]
    pub instance: Option<PathBuf>,
    /// Generator name: path_8, cycle_6, grid_3x3, complete_4, kbip_2x3, hex_2, gnm_8_12,
    /// or chain_N, ring_N, torus_WxH for spin systems.
    #[arg(long = "gen", env = "LYL_GEN")]
    pub generator: Option<String>,
    /// Generator parameters as K=V: profile, profile2, beta, coupling.
    #[arg(long, env = "LYL_PARAMS", num_args = 1.., value_delimiter = ' ')]
    pub params: Vec<String>,
    #[arg(long, env = "LYL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Positive rational fugacity, e.g. 1, 3/2, 0.25.
    #[arg(long, env = "LYL_Z0", default_value = "1", allow_hyphen_values = true)]
    pub z0: String,
    /// Comma-separated: count, roots, certificates, limits, ginibre, ising, all.
    #[arg(long, env = "LYL_PIPELINE", default_value = "all", value_delimiter = ',')]
    pub pipeline: Vec<String>,
    #[arg(long = "cap-enum", env = "LYL_CAP_ENUM", default_value_t = DEFAULT_ENUM_CAP)]
    pub cap_enum: usize,
    #[arg(long = "cap-states", env = "LYL_CAP_STATES", default_value_t = DEFAULT_STATE_CAP)]
    pub cap_states: usize,
    /// Starting precision of the root finder in significant digits.
    #[arg(long, env = "LYL_PRECISION", default_value_t = 30)]
    pub precision: u32,
    #[arg(long, env = "LYL_OUT", default_value = "lyl-out")]
    pub out: PathBuf,
    /// Curated suite: table1, examples_5, ising_small.
    #[arg(long, env = "LYL_SUITE")]
    pub suite: Option<String>,
    /// Sum Ising couplings over ordered pairs (doubles every J).
    #[arg(long = "ordered-pairs", env = "LYL_ORDERED_PAIRS")]
    pub ordered_pairs: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Count,
    Roots,
    Certificates,
    Limits,
    Ginibre,
    Ising,
}

impl Pipeline {
    pub const ALL: [Pipeline; 6] =
        [Pipeline::Count, Pipeline::Roots, Pipeline::Certificates, Pipeline::Limits, Pipeline::Ginibre, Pipeline::Ising];

    fn parse(s: &str) -> Option<Vec<Pipeline>> {
        Some(match s.trim() {
            "count" => vec![Pipeline::Count],
            "roots" => vec![Pipeline::Roots],
            "certificates" => vec![Pipeline::Certificates],
            "limits" => vec![Pipeline::Limits],
            "ginibre" => vec![Pipeline::Ginibre],
            "ising" => vec![Pipeline::Ising],
            "all" => Pipeline::ALL.to_vec(),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    File { path: PathBuf },
    Generator { name: String, params: BTreeMap<String, String>, seed: u64 },
    Suite { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub enumeration: usize,
    pub states: usize,
    pub precision: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub z0: BigRational,
    pub pipelines: BTreeSet<Pipeline>,
    pub caps: Caps,
    pub out: PathBuf,
    pub ordered_pairs: bool,
}

fn bad(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), message: message.into() }
}

impl RunConfig {
    pub fn from_args(args: &Args) -> Result<Self, CliError> {
        let given = [args.instance.is_some(), args.generator.is_some(), args.suite.is_some()];
        let source = match (&args.instance, &args.generator, &args.suite) {
            _ if given.iter().filter(|&&g| g).count() != 1 => {
                return Err(bad("instance", "give exactly one of --instance, --gen, --suite"))
            }
            (Some(path), _, _) => Source::File { path: path.clone() },
            (_, Some(name), _) => {
                let mut params = BTreeMap::new();
                for kv in args.params.iter().filter(|s| !s.is_empty()) {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad("params", format!("`{kv}` is not K=V")))?;
                    params.insert(k.trim().to_string(), v.trim().to_string());
                }
                Source::Generator { name: name.clone(), params, seed: args.seed }
            }
            (_, _, Some(name)) => Source::Suite { name: name.clone() },
            _ => unreachable!(),
        };
        let z0 = parse_rational(&args.z0).ok_or_else(|| bad("z0", format!("`{}` is not a rational number", args.z0)))?;
        if z0 <= BigRational::from_integer(0.into()) {
            return Err(bad("z0", "fugacity must be positive"));
        }
        let mut pipelines = BTreeSet::new();
        for p in &args.pipeline {
            pipelines.extend(Pipeline::parse(p).ok_or_else(|| bad("pipeline", format!("unknown pipeline `{p}`")))?);
        }
        if pipelines.is_empty() {
            return Err(bad("pipeline", "no pipeline selected"));
        }
        if args.cap_enum == 0 {
            return Err(bad("cap-enum", "must be positive"));
        }
        if args.cap_states == 0 {
            return Err(bad("cap-states", "must be positive"));
        }
        if args.precision == 0 {
            return Err(bad("precision", "must be positive"));
        }
        Ok(Self {
            source,
            z0,
            pipelines,
            caps: Caps { enumeration: args.cap_enum, states: args.cap_states, precision: args.precision },
            out: args.out.clone(),
            ordered_pairs: args.ordered_pairs,
        })
    }

    pub fn wants(&self, p: Pipeline) -> bool {
        self.pipelines.contains(&p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> Result<RunConfig, CliError> {
        let mut full = vec!["lyl"];
        full.extend_from_slice(argv);
        RunConfig::from_args(&Args::try_parse_from(full).unwrap())
    }

    #[test]
    fn generator_with_params() {
        let c = parse(&["--gen", "grid_3x3", "--params", "profile=unbranched", "beta=0.3", "--z0", "3/2", "--pipeline", "roots,certificates"]).unwrap();
        let Source::Generator { params, .. } = &c.source else { panic!() };
        assert_eq!(params["profile"], "unbranched");
        assert_eq!(c.z0, BigRational::new(3.into(), 2.into()));
        assert_eq!(c.pipelines.len(), 2);
    }

    #[test]
    fn rejects_bad_fields() {
        let field = |r: Result<RunConfig, CliError>| match r {
            Err(CliError::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field(parse(&["--gen", "path_3", "--z0", "-1"])), "z0");
        assert_eq!(field(parse(&["--gen", "path_3", "--pipeline", "everything"])), "pipeline");
        assert_eq!(field(parse(&["--gen", "path_3", "--cap-enum", "0"])), "cap-enum");
        assert_eq!(field(parse(&["--z0", "1"])), "instance");
        assert_eq!(field(parse(&["--gen", "path_3", "--suite", "table1"])), "instance");
    }
}
