use std::path::Path;
use std::process::{Command, Output};

use lyl_cli::report::{exit_code_for, CertificateEntry};
use proptest::prelude::*;
use serde_json::Value;

fn lyl(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyl")).args(args).arg("--out").arg(out).env_clear().output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn cert<'a>(r: &'a Value, id: &str) -> &'a Value {
    r["certificates"].as_array().unwrap().iter().find(|c| c["id"] == id).unwrap_or_else(|| panic!("no {id}"))
}

#[test]
fn path_8_full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let o = lyl(&["--gen", "path_8", "--pipeline", "all"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert_eq!(r["polynomial"]["coefficients"], serde_json::json!(["1", "7", "15", "10", "1"]));
    assert_eq!(r["roots"].as_array().unwrap().len(), 4);
    for id in ["heilmann_lieb", "berry_esseen", "counting_agreement", "ginibre"] {
        assert_eq!(cert(&r, id)["applicable"], true, "{id}");
        assert_eq!(cert(&r, id)["sound"], true, "{id}");
    }
    for f in ["roots.csv", "distribution.csv", "cdf_gap.csv", "lclt.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let dist = std::fs::read_to_string(dir.path().join("distribution.csv")).unwrap();
    assert!(dist.starts_with("m,coefficient,probability\n0,1,"));
}

#[test]
fn unbranched_grid_wedge() {
    let dir = tempfile::tempdir().unwrap();
    let o = lyl(&["--gen", "grid_3x3", "--params", "profile=unbranched", "--pipeline", "certificates"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    let w = cert(&r, "wedge_uniform");
    assert_eq!((w["applicable"].as_bool(), w["sound"].as_bool()), (Some(true), Some(true)));
    assert!(w["margins"].as_array().unwrap().iter().all(|m| m.as_f64().unwrap() > -1e-8));
    assert!(r["certificates"].as_array().unwrap().iter().all(|c| c["id"] != "heilmann_lieb"));
}

#[test]
fn reports_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--gen", "gnm_7_10", "--seed", "11", "--params", "profile=down:2", "--z0", "3/2"];
    assert_eq!(lyl(&args, a.path()).status.code(), Some(0));
    assert_eq!(lyl(&args, b.path()).status.code(), Some(0));
    for f in ["report.json", "roots.csv", "distribution.csv", "lclt.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn input_errors_exit_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = lyl(&["--instance", "/definitely/missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("instance"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"vertices": [{"id": "a", "C": [0, 1]}], "edges": [["e", "a", "zz"]]}"#).unwrap();
    let o = lyl(&["--instance", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = lyl(&["--gen", "path_4", "--z0", "0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("z0"));

    assert_eq!(lyl(&["--gen", "wheel_5"], dir.path()).status.code(), Some(1));
    assert_eq!(lyl(&["--gen", "path_4", "--no-such-flag"], dir.path()).status.code(), Some(1));
    assert_eq!(lyl(&["--suite", "examples_9"], dir.path()).status.code(), Some(1));
}

#[test]
fn environment_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lyl"))
        .env_clear()
        .env("LYL_GEN", "cycle_6")
        .env("LYL_PIPELINE", "count")
        .env("LYL_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["polynomial"]["coefficients"], serde_json::json!(["1", "6", "9", "2"]));
    assert_eq!(r["certificates"].as_array().unwrap().len(), 1);
}

#[test]
fn instance_files_match_generators() {
    let dir = tempfile::tempdir().unwrap();
    let g = lyl_core::generators::hex_patch(1).unwrap();
    let cp = lyl_core::graph_model::ConstraintProfile::unbranched(&g);
    let file = dir.path().join("hex.json");
    std::fs::write(&file, lyl_core::graph_model::graph_to_json(&g, &cp)).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(lyl(&["--instance", file.to_str().unwrap(), "--pipeline", "count"], &a).status.code(), Some(0));
    assert_eq!(lyl(&["--gen", "hex_1", "--params", "profile=unbranched", "--pipeline", "count"], &b).status.code(), Some(0));
    assert_eq!(report(&a)["polynomial"], report(&b)["polynomial"]);
    assert_eq!(report(&a)["instance"]["name"], "hex");
}

#[test]
fn spin_instances_and_pair_convention() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tri.json");
    std::fs::write(&file, r#"{"sites": ["a", "b", "c"], "pairs": [["a", "b", 1.0], ["b", "c", 1.0], ["a", "c", 1.0]], "beta": 0.3}"#).unwrap();
    let ordered = dir.path().join("o");
    let doubled = dir.path().join("d");
    let o = lyl(&["--instance", file.to_str().unwrap(), "--pipeline", "ising", "--ordered-pairs"], &ordered);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&file, r#"{"sites": ["a", "b", "c"], "pairs": [["a", "b", 1.0], ["b", "c", 1.0], ["a", "c", 1.0]], "beta": 0.6}"#).unwrap();
    assert_eq!(lyl(&["--instance", file.to_str().unwrap(), "--pipeline", "ising"], &doubled).status.code(), Some(0));
    let (ro, rd) = (report(&ordered), report(&doubled));
    assert_eq!(ro["polynomial"], rd["polynomial"]);
    assert_eq!(cert(&ro, "lee_yang_circle")["sound"], true);
    assert_eq!(cert(&ro, "lattice_gas_inequality")["sound"], true);
}

#[test]
fn suites_certify() {
    for (suite, cells) in [("table1", 5), ("examples_5", 0), ("ising_small", 0)] {
        let dir = tempfile::tempdir().unwrap();
        let o = lyl(&["--suite", suite], dir.path());
        assert_eq!(o.status.code(), Some(0), "{suite}");
        let r = report(dir.path());
        assert_eq!(r["certified"], true, "{suite}");
        if cells > 0 {
            assert_eq!(r["matrix"].as_array().unwrap().len(), cells);
        }
        let csv = std::fs::read_to_string(dir.path().join("matrix.csv")).unwrap();
        assert!(csv.starts_with("instance,certificate,applicable,sound,holds,expected,passed"));
    }
}

#[test]
fn examples_suite_covers_every_family() {
    let dir = tempfile::tempdir().unwrap();
    lyl(&["--suite", "examples_5"], dir.path());
    let r = report(dir.path());
    let expected: Vec<(String, String)> = r["matrix"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|m| m["expected"] == true)
        .map(|m| (m["instance"].as_str().unwrap().into(), m["certificate"].as_str().unwrap().into()))
        .collect();
    for pair in [("grid_3x3_matchings", "heilmann_lieb"), ("grid_3x3_unbranched", "wedge_uniform"), ("kbip_5x3_unbranched_k3", "wedge_bipartite"), ("kbip_2x3_even", "berry_esseen")] {
        assert!(expected.contains(&(pair.0.into(), pair.1.into())), "{pair:?}");
    }
}

fn entry(applicable: bool, sound: bool, holds: Option<bool>) -> CertificateEntry {
    CertificateEntry { applicable, sound, holds, ..CertificateEntry::new("x") }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exit_code_contract(flags in prop::collection::vec((any::<bool>(), any::<bool>(), any::<Option<bool>>()), 0..12)) {
        let certs: Vec<_> = flags.iter().map(|&(a, s, h)| entry(a, s, h)).collect();
        let violated = flags.iter().any(|&(a, s, _)| a && !s);
        prop_assert_eq!(exit_code_for(&certs), if violated { 2 } else { 0 });
    }

    #[test]
    fn injected_violation_flips_a_real_report(n in 3usize..8, at in any::<prop::sample::Index>()) {
        let cfg = lyl_cli::config::RunConfig::from_args(&<lyl_cli::config::Args as clap::Parser>::parse_from(["lyl", "--gen", &format!("cycle_{n}")])).unwrap();
        let inst = lyl_cli::pipeline::resolve(&cfg).unwrap();
        let mut report = lyl_cli::pipeline::execute(&cfg, &inst).unwrap().report;
        prop_assert_eq!(report.exit_code(), 0);
        let k = at.index(report.certificates.len() + 1);
        report.certificates.insert(k, entry(true, false, None));
        prop_assert_eq!(report.exit_code(), 2);
    }
}
