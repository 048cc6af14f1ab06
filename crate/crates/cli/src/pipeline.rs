use std::collections::BTreeMap;
use std::path::Path;

use lyl_core::asano_engine::build_by_asano;
use lyl_core::count_engine::{count_by_enumeration_capped, count_by_frontier_dp_capped, CountPolynomial};
use lyl_core::fugacity_stats::{cdf_gap_curve, distribution, lclt_table, rescale_roots, FugacityModel};
use lyl_core::generators;
use lyl_core::ginibre_checks::{edge_extension_all, ginibre_hypothesis, graph_ginibre_a};
use lyl_core::graph_model::{graph_from_json, graph_to_json, ConstraintProfile, Graph};
use lyl_core::limit_theorems::{
    berry_esseen_bound, canfield_bound, canfield_corollary, characteristic_bound_check, cumulant_remainder_check,
    harper_decomposition, harper_deviation, is_clt_bound, lclt_general_bound, log_concavity_check,
    mean_lower_bound_certificate, mgf_remainder_circle, profile_family, sharp_lclt_condition, variance_chain,
    ProfileFamily,
};
use lyl_core::root_certificates::{
    left_half_plane_check, modulus_certificate, wedge_certificate_bipartite, wedge_certificate_uniform,
};
use lyl_core::root_finder::{find_roots_with_precision, RootSet};
use lyl_core::spin_systems::{
    appendix_b_inequality, chain, finite_pressure, lee_yang_certificate, partition_polynomial, spin_flip_symmetric,
    torus, PairConvention, ParticleSystem, SpinSystem,
};
use lyl_core::Error;
use serde::Serialize;
use serde_json::json;

use crate::config::{Caps, Pipeline, RunConfig, Source};
use crate::report::{roots_json, write_csv, write_json, CertificateEntry, Metadata, PolynomialJson, Report};
use crate::CliError;

pub enum Instance {
    Graph { name: String, graph: Graph, profile: ConstraintProfile },
    Spin { name: String, system: SpinSystem },
}

impl Instance {
    pub fn name(&self) -> &str {
        match self {
            Instance::Graph { name, .. } | Instance::Spin { name, .. } => name,
        }
    }

    fn describe(&self) -> serde_json::Value {
        match self {
            Instance::Graph { name, graph, profile } => {
                let g: serde_json::Value = serde_json::from_str(&graph_to_json(graph, profile)).expect("graph json");
                json!({ "name": name, "kind": "graph", "graph": g })
            }
            Instance::Spin { name, system } => {
                let s: serde_json::Value = serde_json::from_str(&system.to_json()).expect("spin json");
                json!({ "name": name, "kind": "spin", "system": s, "convention": system.convention })
            }
        }
    }
}

fn bad(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), message: message.into() }
}

/// `matchings`, `unbranched`, `down:K`, or an explicit list such as `0,2,4`.
pub fn parse_degree_set(s: &str) -> Result<Vec<u32>, CliError> {
    let s = s.trim();
    let set = match s {
        "matchings" => vec![0, 1],
        "unbranched" => vec![0, 1, 2],
        _ => match s.strip_prefix("down:") {
            Some(k) => (0..=k.parse::<u32>().map_err(|_| bad("params", format!("bad down-set `{s}`")))?).collect(),
            None => s
                .split([',', ';'])
                .map(|t| t.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("params", format!("bad degree set `{s}`")))?,
        },
    };
    if set.is_empty() {
        return Err(bad("params", "empty degree set"));
    }
    Ok(set)
}

fn float_param(params: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64, CliError> {
    params.get(key).map_or(Ok(default), |v| v.parse().map_err(|_| bad("params", format!("{key}=`{v}` is not a number"))))
}

fn spin_generator(name: &str, params: &BTreeMap<String, String>) -> Result<Option<SpinSystem>, CliError> {
    let Some((family, rest)) = name.split_once('_') else { return Ok(None) };
    let beta = float_param(params, "beta", 0.3)?;
    let j = float_param(params, "coupling", 1.0)?;
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("gen", format!("bad size in `{name}`")));
    let s = match family {
        "chain" => chain(num(rest)?, j, beta, false)?,
        "ring" => chain(num(rest)?, j, beta, true)?,
        "torus" => {
            let (w, h) = rest.split_once('x').ok_or_else(|| bad("gen", format!("expected torus_WxH, got `{name}`")))?;
            torus(num(w)?, num(h)?, j, beta)?
        }
        _ => return Ok(None),
    };
    Ok(Some(s))
}

pub fn generate(name: &str, params: &BTreeMap<String, String>, seed: u64) -> Result<Instance, CliError> {
    if let Some(system) = spin_generator(name, params)? {
        return Ok(Instance::Spin { name: name.into(), system });
    }
    let graph = generators::by_name(name, seed).map_err(|e| bad("gen", e.to_string()))?;
    let first = parse_degree_set(params.get("profile").map_or("matchings", String::as_str))?;
    let profile = match params.get("profile2") {
        None => ConstraintProfile::uniform(&graph, &first)?,
        Some(p2) => {
            let second = parse_degree_set(p2)?;
            let side = graph.bipartition().ok_or_else(|| bad("params", "profile2 needs a bipartite graph"))?;
            let sets = side.iter().map(|&s| if s { second.clone() } else { first.clone() }).collect();
            ConstraintProfile::new(&graph, sets)?
        }
    };
    Ok(Instance::Graph { name: name.into(), graph, profile })
}

pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| bad("instance", format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| bad("instance", format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
    let wrap = |e: Error| bad("instance", format!("{}: {e}", path.display()));
    if value.get("beta").is_some() {
        Ok(Instance::Spin { name, system: SpinSystem::from_json(&text).map_err(wrap)? })
    } else {
        let (graph, profile) = graph_from_json(&text).map_err(wrap)?;
        Ok(Instance::Graph { name, graph, profile })
    }
}

pub fn resolve(cfg: &RunConfig) -> Result<Instance, CliError> {
    let mut inst = match &cfg.source {
        Source::File { path } => load_instance(path)?,
        Source::Generator { name, params, seed } => generate(name, params, *seed)?,
        Source::Suite { name } => return Err(bad("suite", format!("`{name}` is a suite, not an instance"))),
    };
    if let Instance::Spin { system, .. } = &mut inst {
        if cfg.ordered_pairs {
            *system = system.clone().with_convention(PairConvention::Ordered);
        }
    }
    Ok(inst)
}

/// Everything a run produces before it touches the disk.
pub struct Outcome {
    pub report: Report,
    pub csv: Vec<(&'static str, CsvTable)>,
}

pub enum CsvTable {
    Roots(Vec<RootRow>),
    Distribution(Vec<DistributionRow>),
    CdfGap(Vec<CdfRow>),
    Lclt(Vec<LcltRow>),
}

#[derive(Serialize)]
pub struct RootRow {
    re: f64,
    im: f64,
    err: f64,
    multiplicity: usize,
}

#[derive(Serialize)]
pub struct DistributionRow {
    m: usize,
    coefficient: String,
    probability: f64,
}

#[derive(Serialize)]
pub struct CdfRow {
    m: usize,
    x: f64,
    f_left: f64,
    f_right: f64,
    gaussian: f64,
}

#[derive(Serialize)]
pub struct LcltRow {
    m: i64,
    probability: f64,
    density: f64,
    error: f64,
}

impl Outcome {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("report.json"), &self.report)?;
        for (file, table) in &self.csv {
            let path = dir.join(file);
            match table {
                CsvTable::Roots(r) => write_csv(&path, r)?,
                CsvTable::Distribution(r) => write_csv(&path, r)?,
                CsvTable::CdfGap(r) => write_csv(&path, r)?,
                CsvTable::Lclt(r) => write_csv(&path, r)?,
            }
        }
        Ok(())
    }
}

/// Turns precondition failures into an inapplicable entry; other errors abort the run.
fn guarded(id: &str, r: lyl_core::Result<CertificateEntry>) -> Result<CertificateEntry, CliError> {
    match r {
        Ok(e) => Ok(e),
        Err(Error::Precondition(m) | Error::Unsupported(m)) => {
            Ok(CertificateEntry { applicable: false, ..CertificateEntry::new(id) }.with_note(m))
        }
        Err(e) => Err(e.into()),
    }
}

fn counting_cross_check(g: &Graph, cp: &ConstraintProfile, dp: &CountPolynomial, caps: &Caps) -> Result<CertificateEntry, CliError> {
    if g.edge_count() > caps.enumeration {
        let e = CertificateEntry { applicable: false, ..CertificateEntry::new("counting_agreement") };
        return Ok(e.with_note(format!("{} edges exceed the enumeration cap", g.edge_count())));
    }
    let en = count_by_enumeration_capped(g, cp, caps.enumeration)?;
    let asano = build_by_asano(g, cp)?;
    let agree = &en == dp && &asano == dp;
    Ok(CertificateEntry::theorem("counting_agreement", agree, vec![]).with_note("enumeration, frontier DP, Asano"))
}

fn heilmann_lieb(rs: &RootSet) -> CertificateEntry {
    let margins = rs
        .roots
        .iter()
        .zip(&rs.err)
        .map(|(z, e)| (e + 1e-9 - z.im.abs()).min(-z.re))
        .collect::<Vec<_>>();
    let pass = margins.iter().all(|m| *m >= 0.0);
    CertificateEntry::theorem("heilmann_lieb", pass, margins)
}

fn root_certificates(g: &Graph, cp: &ConstraintProfile, rs: &RootSet) -> Result<Vec<CertificateEntry>, CliError> {
    let mut out = Vec::new();
    if profile_family(g, cp) == ProfileFamily::Matchings {
        out.push(heilmann_lieb(rs));
    }
    out.push(guarded("modulus_floor", modulus_certificate(g, cp, rs).map(|c| CertificateEntry::from_wedge("modulus_floor", &c)))?);
    out.push(guarded("wedge_uniform", wedge_certificate_uniform(g, cp, rs).map(|c| CertificateEntry::from_wedge("wedge_uniform", &c)))?);
    if let Some(side) = g.bipartition() {
        let c = wedge_certificate_bipartite(g, cp, &side, rs);
        out.push(guarded("wedge_bipartite", c.map(|c| CertificateEntry::from_wedge("wedge_bipartite", &c)))?);
    }
    let lhp = left_half_plane_check(rs);
    out.push(CertificateEntry::check("left_half_plane", lhp.pass, lhp.margins));
    Ok(out)
}

fn limit_certificates(fm: &FugacityModel, rs: &RootSet, graph: Option<(&Graph, &ConstraintProfile)>) -> Result<Vec<CertificateEntry>, CliError> {
    let mut reports = vec![is_clt_bound(fm, rs), berry_esseen_bound(fm, rs), lclt_general_bound(fm, rs)];
    let dt = distribution::<f64>(fm);
    reports.push(canfield_bound(&dt, log_concavity_check(fm.poly()).properly));
    reports.push(canfield_corollary(fm, rs));
    reports.extend(sharp_lclt_condition(fm, rs, graph));
    reports.push(mean_lower_bound_certificate(fm, rs));
    reports.push(mgf_remainder_circle(fm, rs, 16));
    reports.push(cumulant_remainder_check(fm, rs, 400));
    let mut out: Vec<CertificateEntry> = reports.iter().map(CertificateEntry::from_clt).collect();

    let chain = variance_chain(fm, rs, graph).map(|hs| CertificateEntry::from_hypotheses("variance_chain", hs));
    out.push(guarded("variance_chain", chain)?);

    let ch = characteristic_bound_check(fm, rs, 1000).map(|c| {
        let mut e = CertificateEntry::theorem("characteristic_bound", c.max_excess <= 1e-10, vec![-c.max_excess]);
        e.applicable = c.left_half_plane;
        e.sound = !c.left_half_plane || c.max_excess <= 1e-10;
        e.measured = Some(c.max_excess);
        e.bound = Some(0.0);
        e.constants.insert("W".into(), c.w);
        e.constants.insert("worst_t".into(), c.worst_t);
        e
    });
    out.push(guarded("characteristic_bound", ch)?);

    let unit = fm.unit_model();
    let urs = rescale_roots(rs, fm.z0_f64());
    let harper = harper_decomposition(&urs).map(|f| {
        let dev = harper_deviation(&f, &distribution::<f64>(&unit));
        let mut e = CertificateEntry::theorem("harper_decomposition", dev <= 1e-9, vec![1e-9 - dev]);
        e.measured = Some(dev);
        e.bound = Some(1e-9);
        e.note = format!("{} factors", f.len());
        e
    });
    let harper = match harper {
        Err(Error::Numerical(m)) if !left_half_plane_check(&urs).pass => Err(Error::Precondition(m)),
        other => other,
    };
    out.push(guarded("harper_decomposition", harper)?);
    Ok(out)
}

fn ginibre_certificates(g: &Graph, cp: &ConstraintProfile, fm: &FugacityModel, caps: &Caps) -> Result<Vec<CertificateEntry>, CliError> {
    let mut out = Vec::new();
    let gin = graph_ginibre_a(g, cp, fm.z0()).and_then(|a| ginibre_hypothesis(fm, &a)).map(|r| CertificateEntry::from_ginibre(&r));
    out.push(guarded("ginibre", gin)?);
    if g.edge_count() <= caps.enumeration {
        let ext = edge_extension_all(g, cp, caps.enumeration).map(|r| CertificateEntry::from_edge_extension(&r));
        out.push(guarded("edge_extension_identities", ext)?);
    }
    Ok(out)
}

fn distribution_tables(fm: &FugacityModel, csv: &mut Vec<(&'static str, CsvTable)>) {
    let dt = distribution::<f64>(fm);
    let coeffs = fm.poly().to_decimal_strings();
    let rows = coeffs.into_iter().zip(&dt.q).enumerate().map(|(m, (c, q))| DistributionRow { m, coefficient: c, probability: *q });
    csv.push(("distribution.csv", CsvTable::Distribution(rows.collect())));
    if let Ok(curve) = cdf_gap_curve(&dt) {
        let rows = curve.iter().map(|p| CdfRow { m: p.m, x: p.x, f_left: p.f_left, f_right: p.f_right, gaussian: p.g });
        csv.push(("cdf_gap.csv", CsvTable::CdfGap(rows.collect())));
    }
    if let Ok(table) = lclt_table(&dt) {
        let rows = table.iter().map(|p| LcltRow { m: p.m, probability: p.prob, density: p.density, error: p.error });
        csv.push(("lclt.csv", CsvTable::Lclt(rows.collect())));
    }
}

fn root_rows(rs: &RootSet) -> CsvTable {
    CsvTable::Roots(
        (0..rs.len()).map(|j| RootRow { re: rs.roots[j].re, im: rs.roots[j].im, err: rs.err[j], multiplicity: rs.multiplicity[j] }).collect(),
    )
}

fn metadata(cfg: &RunConfig) -> Metadata {
    let names = cfg.pipelines.iter().map(|p| serde_json::to_value(p).unwrap().as_str().unwrap().to_string()).collect();
    Metadata::new(cfg.z0.to_string(), names)
}

fn run_graph(cfg: &RunConfig, inst: &Instance, g: &Graph, cp: &ConstraintProfile) -> Result<Outcome, CliError> {
    let p = count_by_frontier_dp_capped(g, cp, &[], cfg.caps.states)?;
    let mut certs = Vec::new();
    let mut csv = Vec::new();
    let mut meta = metadata(cfg);
    if cfg.wants(Pipeline::Count) {
        certs.push(counting_cross_check(g, cp, &p, &cfg.caps)?);
    }
    let need_roots = [Pipeline::Roots, Pipeline::Certificates, Pipeline::Limits].iter().any(|&q| cfg.wants(q));
    let rs = if need_roots && p.degree() > 0 { Some(find_roots_with_precision(&p, cfg.caps.precision)?) } else { None };
    if let Some(rs) = &rs {
        meta.root_digits = Some(rs.digits);
        if cfg.wants(Pipeline::Roots) {
            csv.push(("roots.csv", root_rows(rs)));
        }
        if cfg.wants(Pipeline::Certificates) {
            certs.extend(root_certificates(g, cp, rs)?);
        }
    }
    let fm = FugacityModel::new(p.clone(), cfg.z0.clone())?;
    if cfg.wants(Pipeline::Limits) {
        distribution_tables(&fm, &mut csv);
        if let Some(rs) = &rs {
            certs.extend(limit_certificates(&fm, rs, Some((g, cp)))?);
        }
    }
    if cfg.wants(Pipeline::Ginibre) {
        certs.extend(ginibre_certificates(g, cp, &fm, &cfg.caps)?);
    }
    let report = Report {
        instance: inst.describe(),
        polynomial: PolynomialJson::from_count(&p),
        roots: rs.as_ref().map(roots_json).unwrap_or_default(),
        certificates: certs,
        metadata: meta,
    };
    Ok(Outcome { report, csv })
}

fn run_spin(cfg: &RunConfig, inst: &Instance, s: &SpinSystem) -> Result<Outcome, CliError> {
    let p = partition_polynomial(s)?;
    let mut certs = Vec::new();
    let mut csv = Vec::new();
    let mut meta = metadata(cfg);
    let z0 = lyl_core::scalar::ratio_to_f64(&cfg.z0);
    if cfg.wants(Pipeline::Count) && s.is_ferromagnetic() {
        certs.push(CertificateEntry::check("spin_flip_symmetry", spin_flip_symmetric(s)?, vec![]));
    }
    let need_roots = [Pipeline::Roots, Pipeline::Certificates, Pipeline::Ising].iter().any(|&q| cfg.wants(q));
    let rs = if need_roots && p.degree() > 0 { Some(p.roots()?) } else { None };
    if let Some(rs) = &rs {
        meta.root_digits = Some(rs.digits);
        if cfg.wants(Pipeline::Roots) {
            csv.push(("roots.csv", root_rows(rs)));
        }
        if cfg.wants(Pipeline::Certificates) || cfg.wants(Pipeline::Ising) {
            certs.push(CertificateEntry::from_lee_yang(&lee_yang_certificate(s, rs)));
        }
    }
    if cfg.wants(Pipeline::Ising) {
        let mut e = CertificateEntry::check("finite_pressure", true, vec![]);
        e.measured = Some(finite_pressure(s, z0)?);
        certs.push(e);
        certs.push(CertificateEntry::from_appendix_b(&appendix_b_inequality(&ParticleSystem::from_spin(s), z0)?));
    }
    let report = Report {
        instance: inst.describe(),
        polynomial: PolynomialJson::from_f64(&p.to_f64()),
        roots: rs.as_ref().map(roots_json).unwrap_or_default(),
        certificates: certs,
        metadata: meta,
    };
    Ok(Outcome { report, csv })
}

/// Runs the selected pipelines on one instance without writing anything.
pub fn execute(cfg: &RunConfig, inst: &Instance) -> Result<Outcome, CliError> {
    match inst {
        Instance::Graph { graph, profile, .. } => run_graph(cfg, inst, graph, profile),
        Instance::Spin { system, .. } => run_spin(cfg, inst, system),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_sets() {
        assert_eq!(parse_degree_set("matchings").unwrap(), vec![0, 1]);
        assert_eq!(parse_degree_set("down:3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_degree_set("0,2,4").unwrap(), vec![0, 2, 4]);
        assert!(parse_degree_set("0,x").is_err());
    }

    #[test]
    fn bipartite_profiles_follow_the_sides() {
        let params = BTreeMap::from([("profile".to_string(), "matchings".to_string()), ("profile2".to_string(), "0,2".to_string())]);
        let Instance::Graph { graph, profile, .. } = generate("kbip_2x3", &params, 0).unwrap() else { panic!() };
        assert_eq!(graph.degree(0), 3);
        assert_eq!(profile.set(0), &[0, 1]);
        assert_eq!(profile.set(4), &[0, 2]);
    }

    #[test]
    fn spin_generators() {
        let p = BTreeMap::from([("beta".to_string(), "0.5".to_string())]);
        let Instance::Spin { system, .. } = generate("ring_6", &p, 0).unwrap() else { panic!() };
        assert_eq!((system.pairs.len(), system.beta), (6, 0.5));
        assert!(matches!(generate("torus_3x3", &BTreeMap::new(), 0).unwrap(), Instance::Spin { .. }));
        assert!(matches!(generate("grid_2x2", &BTreeMap::new(), 0).unwrap(), Instance::Graph { .. }));
        assert!(generate("blob_3", &BTreeMap::new(), 0).is_err());
    }
}
