//! Explicit CLT and LCLT bounds, their hypotheses, and the Harper decomposition.
//!
//! Every bound is evaluated in full even when a hypothesis fails, so reports
//! show how far an instance is from each gate.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::count_engine::CountPolynomial;
use crate::error::{Error, Result};
use crate::fugacity_stats::{
    cdf_vs_gaussian_sup, characteristic_function, distribution, half_plane_tolerance, lclt_sup_error, rescale_roots, variance_surrogates,
    DistributionTable, FugacityModel, Surrogates,
};
use crate::graph_model::{ConstraintProfile, Graph};
use crate::root_finder::{classify_roots, RootSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub satisfied: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `measured <= bound`.
    Upper,
    /// `measured >= bound`.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltBoundReport {
    pub id: String,
    pub hypotheses: Vec<Hypothesis>,
    pub bound: f64,
    pub measured: f64,
    pub applicable: bool,
    pub sound: bool,
    pub vacuous: bool,
    pub direction: Direction,
    pub constants: BTreeMap<String, f64>,
}

impl CltBoundReport {
    fn new(id: &str, direction: Direction) -> Self {
        Self {
            id: id.to_string(),
            hypotheses: Vec::new(),
            bound: f64::NAN,
            measured: f64::NAN,
            applicable: false,
            sound: true,
            vacuous: false,
            direction,
            constants: BTreeMap::new(),
        }
    }

    /// Satisfied iff `margin >= 0`.
    fn hyp(&mut self, name: &str, margin: f64) {
        self.hypotheses.push(Hypothesis { name: name.into(), satisfied: margin >= 0.0, margin });
    }

    /// Satisfied iff `margin > 0`.
    fn hyp_strict(&mut self, name: &str, margin: f64) {
        self.hypotheses.push(Hypothesis { name: name.into(), satisfied: margin > 0.0, margin });
    }

    fn constant(&mut self, name: &str, v: f64) {
        self.constants.insert(name.into(), v);
    }

    fn finish(mut self, bound: f64, measured: f64) -> Self {
        self.bound = bound;
        self.measured = measured;
        self.applicable = self.hypotheses.iter().all(|h| h.satisfied);
        let holds = match self.direction {
            Direction::Upper => measured <= bound,
            Direction::Lower => measured >= bound,
        };
        self.sound = !self.applicable || holds;
        self.vacuous = match self.direction {
            Direction::Upper => !(bound < 1.0),
            Direction::Lower => !(bound > 0.0),
        };
        self
    }

    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.name == name)
    }
}

fn at_unit(fm: &FugacityModel, rs: &RootSet) -> (FugacityModel, RootSet) {
    if fm.is_unit() {
        (fm.clone(), rs.clone())
    } else {
        (fm.unit_model(), rescale_roots(rs, fm.z0_f64()))
    }
}

/// `min_j (tol_j - Re zeta_j)`; nonnegative iff every root is in the closed left half plane.
fn half_plane_margin(rs: &RootSet) -> f64 {
    (0..rs.len()).map(|j| half_plane_tolerance(rs, j) - rs.roots[j].re).fold(f64::INFINITY, f64::min)
}

fn p0_margin(p: &CountPolynomial) -> f64 {
    if p.coeff(0).is_zero() {
        -1.0
    } else {
        1.0
    }
}

fn ratio(a: &num_bigint::BigUint, b: &num_bigint::BigUint) -> f64 {
    crate::scalar::ratio_to_f64(&num_rational::BigRational::new(a.clone().into(), b.clone().into()))
}

/// Constants of the zero-free-disc CLT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltConstants {
    pub delta: f64,
    pub epsilon: f64,
    pub k: f64,
    pub k_star: f64,
    pub b1: f64,
    pub b2: f64,
    pub n0: f64,
}

/// `delta = min(z0, min_j |z0 - zeta_j| - err_j)`.
pub fn zero_free_radius(rs: &RootSet, z0: f64) -> f64 {
    (0..rs.len()).map(|j| (z0 - rs.roots[j]).norm() - rs.err[j]).fold(z0, f64::min)
}

pub fn clt_constants(delta: f64, z0: f64) -> CltConstants {
    let epsilon = (1.0 + (delta / 2.0).min(z0) / z0).ln();
    let k = 2.0 * LN_2 / epsilon.powi(3);
    let k_star = k.exp_m1() / k;
    CltConstants {
        delta,
        epsilon,
        k,
        k_star,
        b1: (2.0 / PI).sqrt() * k * k_star,
        b2: 24.0 / (PI * (2.0 * PI).sqrt()),
        n0: 8.0 / epsilon.powi(3),
    }
}

/// CLT from a zero-free disc around `z0`.
pub fn is_clt_bound(fm: &FugacityModel, rs: &RootSet) -> CltBoundReport {
    let mut r = CltBoundReport::new("clt_zero_free_disc", Direction::Upper);
    let z0 = fm.z0_f64();
    let n = fm.degree() as f64;
    let delta = zero_free_radius(rs, z0);
    r.hyp_strict("zero_free_disc", delta);
    let dt = distribution::<f64>(fm);
    r.hyp_strict("positive_variance", dt.variance);
    if delta <= 0.0 {
        r.hyp("degree_at_least_n0", f64::NEG_INFINITY);
        return r.finish(f64::INFINITY, cdf_vs_gaussian_sup(&dt).unwrap_or(f64::NAN));
    }
    let c = clt_constants(delta, z0);
    r.hyp("degree_at_least_n0", n - c.n0);
    for (name, v) in [("delta", c.delta), ("epsilon", c.epsilon), ("K", c.k), ("K_star", c.k_star), ("B1", c.b1), ("B2", c.b2), ("N0", c.n0)] {
        r.constant(name, v);
    }
    let bound = c.b1 * n / dt.variance.powf(1.5) + c.b2 * n.cbrt() / dt.variance.sqrt();
    r.finish(bound, cdf_vs_gaussian_sup(&dt).unwrap_or(f64::NAN))
}

/// `sup |F - G| <= 12 / sqrt(Var)` for roots in the closed left half plane.
pub fn berry_esseen_bound(fm: &FugacityModel, rs: &RootSet) -> CltBoundReport {
    let (fm, rs) = at_unit(fm, rs);
    let mut r = CltBoundReport::new("berry_esseen", Direction::Upper);
    r.hyp("left_half_plane", half_plane_margin(&rs));
    r.hyp_strict("p0_positive", p0_margin(fm.poly()));
    let dt = distribution::<f64>(&fm);
    r.hyp_strict("positive_variance", dt.variance);
    r.finish(12.0 / dt.variance.sqrt(), cdf_vs_gaussian_sup(&dt).unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Linear,
    Quadratic,
}

/// One independent summand `X_j` with `E[z^X_j] = P_j(z) / P_j(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarperFactor {
    pub kind: FactorKind,
    pub eta: Complex<f64>,
    pub probs: Vec<f64>,
}

impl HarperFactor {
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs.iter().enumerate().map(|(k, p)| (k as f64 - m).powi(2) * p).sum()
    }
}

fn clamp_prob(p: f64, tol: f64, what: &str) -> Result<f64> {
    if p < -tol {
        Err(Error::Numerical(format!("negative probability {p} in {what}")))
    } else {
        Ok(p.max(0.0))
    }
}

/// Splits `P(z) = p_N prod (z + eta_j)` (at unit fugacity) into linear and quadratic factors.
pub fn harper_decomposition(rs: &RootSet) -> Result<Vec<HarperFactor>> {
    let (j1, j2) = classify_roots(rs)?;
    let mut out = Vec::with_capacity(j1.len() + j2.len());
    for j in j1 {
        let eta = rs.eta(j).re;
        let tol = rs.err[j];
        let eta = clamp_prob(eta, tol, "a linear factor")?;
        out.push(HarperFactor {
            kind: FactorKind::Linear,
            eta: Complex::new(eta, 0.0),
            probs: vec![eta / (1.0 + eta), 1.0 / (1.0 + eta)],
        });
    }
    for j in j2 {
        let eta = rs.eta(j);
        let re = clamp_prob(eta.re, half_plane_tolerance(rs, j), "a quadratic factor")?;
        let eta = Complex::new(re, eta.im);
        let norm = (1.0 + eta).norm_sqr();
        out.push(HarperFactor {
            kind: FactorKind::Quadratic,
            eta,
            probs: vec![eta.norm_sqr() / norm, 2.0 * re / norm, 1.0 / norm],
        });
    }
    Ok(out)
}

/// Law of the sum of independent factors.
pub fn convolve_factors(factors: &[HarperFactor]) -> Vec<f64> {
    let mut acc = vec![1.0];
    for f in factors {
        let mut next = vec![0.0; acc.len() + f.probs.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (k, p) in f.probs.iter().enumerate() {
                next[i + k] += a * p;
            }
        }
        acc = next;
    }
    acc
}

/// Largest entrywise difference between the factor convolution and the table.
pub fn harper_deviation(factors: &[HarperFactor], dt: &DistributionTable<f64>) -> f64 {
    let conv = convolve_factors(factors);
    let n = conv.len().max(dt.q.len());
    (0..n)
        .map(|m| (conv.get(m).copied().unwrap_or(0.0) - dt.q.get(m).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// `n` independent draws of `sum X_j`.
pub fn sample_x(factors: &[HarperFactor], n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            factors
                .iter()
                .map(|f| {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    for (k, p) in f.probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            return k as u64;
                        }
                    }
                    (f.probs.len() - 1) as u64
                })
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LogConcavity {
    pub log_concave: bool,
    pub properly: bool,
}

pub fn log_concavity_check(p: &CountPolynomial) -> LogConcavity {
    let a = p.coeffs();
    let n = a.len();
    let at = |k: isize| if k < 0 || k as usize >= n { num_bigint::BigUint::zero() } else { a[k as usize].clone() };
    let log_concave = (1..n.saturating_sub(1)).all(|k| &a[k] * &a[k] >= &a[k - 1] * &a[k + 1]);
    let first = a.iter().position(|c| !c.is_zero());
    let last = a.iter().rposition(|c| !c.is_zero());
    let no_internal_zeros = match (first, last) {
        (Some(f), Some(l)) => a[f..=l].iter().all(|c| !c.is_zero()),
        _ => true,
    };
    let strict = (1..=n as isize).all(|k| {
        let lhs = at(k) * at(k);
        let rhs = at(k - 1) * at(k + 1);
        if at(k).is_zero() {
            lhs == rhs
        } else {
            lhs > rhs
        }
    });
    LogConcavity { log_concave, properly: log_concave && no_internal_zeros && strict }
}

pub const CANFIELD_K: f64 = 12.0;

/// Canfield's quantified Bender theorem with `K = 12`; bound `(14.5 K + 4.87) / Var^{3/4}`.
pub fn canfield_report(variance: f64, properly_log_concave: bool, measured: f64) -> CltBoundReport {
    let mut r = CltBoundReport::new("canfield_lclt", Direction::Upper);
    let k = CANFIELD_K;
    r.hyp_strict("k_above_7", k - 7.0);
    r.hyp_strict("k_over_sqrt_var_below_1e-7", 1e-7 - k / variance.sqrt());
    r.hyp_strict("k_over_var_quarter_below_1e-2", 1e-2 - k / variance.powf(0.25));
    r.hyp_strict("properly_log_concave", if properly_log_concave { 1.0 } else { -1.0 });
    let c = 14.5 * k + 4.87;
    r.constant("K", k);
    r.constant("c", c);
    r.finish(c / variance.powf(0.75), measured)
}

pub fn canfield_bound(dt: &DistributionTable<f64>, properly_log_concave: bool) -> CltBoundReport {
    canfield_report(dt.variance, properly_log_concave, lclt_sup_error(dt).unwrap_or(f64::NAN))
}

/// The wedge form: roots in `|arg| > 2 pi / 3` and `Var > 1.44e9` give `180 / Var^{3/4}`.
pub fn canfield_corollary(fm: &FugacityModel, rs: &RootSet) -> CltBoundReport {
    let mut r = CltBoundReport::new("canfield_corollary", Direction::Upper);
    let wedge = rs.roots.iter().map(|z| z.im.atan2(z.re).abs()).fold(PI, f64::min) - 2.0 * PI / 3.0;
    r.hyp_strict("roots_in_open_wedge", wedge);
    let dt = distribution::<f64>(fm);
    r.hyp_strict("variance_above_1.44e9", dt.variance - 144e7);
    r.finish(180.0 / dt.variance.powf(0.75), lclt_sup_error(&dt).unwrap_or(f64::NAN))
}

fn lclt_base(id: &str, fm: &FugacityModel, rs: &RootSet) -> (CltBoundReport, DistributionTable<f64>, Option<Surrogates>) {
    let (fm, rs) = at_unit(fm, rs);
    let mut r = CltBoundReport::new(id, Direction::Upper);
    let dt = distribution::<f64>(&fm);
    r.hyp("variance_at_least_1", dt.variance - 1.0);
    r.hyp("left_half_plane", half_plane_margin(&rs));
    r.hyp_strict("p0_positive", p0_margin(fm.poly()));
    let s = variance_surrogates(&rs, &fm).ok();
    if let Some(s) = s {
        r.constant("W", s.w);
        r.constant("Delta", s.delta);
        r.constant("f", s.f);
    }
    (r, dt, s)
}

/// The general local bound in terms of `Var` and `W`.
pub fn lclt_general_value(variance: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return f64::INFINITY;
    }
    let v13 = variance.cbrt();
    PI / 4f64.powf(2.0 / 3.0) * v13 / w * (-(4f64.cbrt()) / (PI * PI) * w / (v13 * v13)).exp() + 24.0 / (PI * variance)
}

pub fn lclt_general_bound(fm: &FugacityModel, rs: &RootSet) -> CltBoundReport {
    let (r, dt, s) = lclt_base("lclt_general", fm, rs);
    let w = s.map_or(f64::NAN, |s| s.w);
    let bound = if w.is_nan() { f64::INFINITY } else { lclt_general_value(dt.variance, w) };
    r.finish(bound, lclt_sup_error(&dt).unwrap_or(f64::NAN))
}

/// `W >= (pi^2 / (3 2^{1/3})) Var^{2/3} log Var` gives `25 / (pi Var)`.
pub fn sharp_lclt_threshold(variance: f64) -> f64 {
    PI * PI / (3.0 * 2f64.cbrt()) * variance.powf(2.0 / 3.0) * variance.ln()
}

/// Which special profile a graph instance carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileFamily {
    Matchings,
    Unbranched,
    Other,
}

pub fn profile_family(g: &Graph, cp: &ConstraintProfile) -> ProfileFamily {
    let sets: Vec<&[u32]> = (0..g.vertex_count()).map(|v| cp.set(v)).collect();
    if sets.iter().all(|s| *s == [0, 1]) {
        ProfileFamily::Matchings
    } else if sets.iter().all(|s| *s == [0, 1] || *s == [0, 1, 2]) {
        ProfileFamily::Unbranched
    } else {
        ProfileFamily::Other
    }
}

/// Sharp-regime LCLT gates, plus the graph-family gates when a graph is supplied.
pub fn sharp_lclt_condition(fm: &FugacityModel, rs: &RootSet, graph: Option<(&Graph, &ConstraintProfile)>) -> Vec<CltBoundReport> {
    let mut out = Vec::new();
    let (mut r, dt, s) = lclt_base("sharp_lclt_condition", fm, rs);
    let measured = lclt_sup_error(&dt).unwrap_or(f64::NAN);
    let sharp = 25.0 / (PI * dt.variance);
    let w = s.map_or(f64::NAN, |s| s.w);
    r.hyp("w_condition", w - sharp_lclt_threshold(dt.variance));
    out.push(r.finish(sharp, measured));

    let (mut r, _, s) = lclt_base("sharp_lclt_sufficient", fm, rs);
    let n = fm.degree() as f64;
    let lhs = s.map_or(f64::NAN, |s| s.f * s.delta.min(1.0));
    r.hyp("root_condition", lhs - 8.0 * PI * PI / (3.0 * 2f64.cbrt()) * n.powf(2.0 / 3.0) * n.ln());
    out.push(r.finish(sharp, measured));

    if let Some((g, cp)) = graph {
        let e = g.edge_count() as f64;
        let d = g.max_degree().max(2) as f64;
        let family = profile_family(g, cp);
        let family_margin = |want: ProfileFamily| if family == want || (want == ProfileFamily::Unbranched && family == ProfileFamily::Matchings) { 1.0 } else { -1.0 };

        let mut r = CltBoundReport::new("matching_lclt_gate", Direction::Upper);
        r.hyp_strict("matching_profile", family_margin(ProfileFamily::Matchings));
        r.hyp("edge_count_gate", e - 2.2e8 * d.powi(4));
        out.push(r.finish(200.0 * d.powi(4) / (PI * e), measured));

        let lambda = e.min(g.vertex_count() as f64);
        let mut r = CltBoundReport::new("unbranched_lclt_gate", Direction::Upper);
        r.hyp_strict("unbranched_profile", family_margin(ProfileFamily::Unbranched));
        r.hyp("edge_count_gate", e - 4f64.cbrt() * PI * PI / 3.0 * d.powi(5) * lambda.powf(2.0 / 3.0) * lambda.ln());
        out.push(r.finish(50.0 * d.powi(5) / (PI * e), measured));

        let mut r = CltBoundReport::new("unbranched_lclt_simple_gate", Direction::Upper);
        r.hyp_strict("unbranched_profile", family_margin(ProfileFamily::Unbranched));
        r.hyp("edge_count_gate", e - 150.0 * d.powi(15) * (g.vertex_count() as f64).ln().powi(3));
        out.push(r.finish(50.0 * d.powi(5) / (PI * e), measured));
    }
    out
}

/// `E[X] >= M N` with `M = min(z0, z*) c1 / 2`.
pub fn mean_lower_bound_certificate(fm: &FugacityModel, rs: &RootSet) -> CltBoundReport {
    let mut r = CltBoundReport::new("mean_lower_bound", Direction::Lower);
    let p = fm.poly();
    let n = fm.degree() as f64;
    r.hyp_strict("p0_positive", p0_margin(p));
    r.hyp_strict("p1_positive", if p.coeff(1).is_zero() { -1.0 } else { 1.0 });
    let dt = distribution::<f64>(fm);
    if p.coeff(0).is_zero() || p.coeff(1).is_zero() {
        return r.finish(f64::NAN, dt.mean);
    }
    let c1 = ratio(&p.coeff(1), &p.coeff(0)) / n;
    let delta1 = (0..rs.len()).map(|j| rs.roots[j].norm() - rs.err[j]).fold(f64::INFINITY, f64::min);
    r.hyp_strict("roots_bounded_away_from_zero", delta1);
    let z_star = (delta1 / 4.0).min(c1 * delta1 * delta1 / (80.0 * LN_2));
    let m = fm.z0_f64().min(z_star) * c1 / 2.0;
    r.constant("c1", c1);
    r.constant("delta1", delta1);
    r.constant("z_star", z_star);
    r.constant("M", m);
    r.finish(m * n, dt.mean)
}

/// `f(u) = log(P(e^u z0) / P(z0))` summed root by root with principal logarithms.
pub fn log_mgf(rs: &RootSet, z0: f64, u: Complex<f64>) -> Complex<f64> {
    let w = u.exp() * z0;
    rs.roots.iter().map(|z| ((w - z) / (z0 - z)).ln()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MgfRemainder {
    pub u_re: f64,
    pub u_im: f64,
    pub remainder: f64,
    pub bound: f64,
    pub within_radius: bool,
    pub sound: bool,
}

/// `|f(u) - u E - u^2 Var / 2| <= |u|^3 N K` for `|u| <= eps / 2`.
pub fn mgf_remainder_check(fm: &FugacityModel, rs: &RootSet, u: Complex<f64>) -> Result<MgfRemainder> {
    let z0 = fm.z0_f64();
    let delta = zero_free_radius(rs, z0);
    if delta <= 0.0 {
        return Err(Error::Precondition(format!("no zero-free disc around z0 (delta = {delta})")));
    }
    let c = clt_constants(delta, z0);
    let dt = distribution::<f64>(fm);
    let f = log_mgf(rs, z0, u);
    let remainder = (f - u * dt.mean - u * u * dt.variance / 2.0).norm();
    let bound = u.norm().powi(3) * fm.degree() as f64 * c.k;
    let within_radius = u.norm() <= c.epsilon / 2.0 * (1.0 + 1e-12);
    Ok(MgfRemainder { u_re: u.re, u_im: u.im, remainder, bound, within_radius, sound: !within_radius || remainder <= bound })
}

/// The remainder check on `points` equally spaced points of the circle `|u| = eps/2`.
pub fn mgf_remainder_circle(fm: &FugacityModel, rs: &RootSet, points: usize) -> CltBoundReport {
    let mut r = CltBoundReport::new("mgf_remainder", Direction::Upper);
    let z0 = fm.z0_f64();
    let delta = zero_free_radius(rs, z0);
    r.hyp_strict("zero_free_disc", delta);
    if delta <= 0.0 {
        return r.finish(f64::INFINITY, f64::NAN);
    }
    let c = clt_constants(delta, z0);
    let radius = c.epsilon / 2.0;
    r.constant("radius", radius);
    r.constant("K", c.k);
    let measured = (0..points)
        .map(|k| {
            let u = Complex::from_polar(radius, 2.0 * PI * k as f64 / points as f64);
            mgf_remainder_check(fm, rs, u).map_or(f64::NAN, |m| m.remainder)
        })
        .fold(0.0, f64::max);
    r.finish(radius.powi(3) * fm.degree() as f64 * c.k, measured)
}

/// Ratio `|log phi*(t) + t^2 Var / 2| / (3 |t|^3 Var)` maximised over `t` in `[-1, 1]`; bound 1.
pub fn cumulant_remainder_check(fm: &FugacityModel, rs: &RootSet, grid: usize) -> CltBoundReport {
    let (fm, rs) = at_unit(fm, rs);
    let mut r = CltBoundReport::new("cumulant_remainder", Direction::Upper);
    r.hyp("left_half_plane", half_plane_margin(&rs));
    let dt = distribution::<f64>(&fm);
    r.hyp_strict("positive_variance", dt.variance);
    let mut worst: f64 = 0.0;
    for k in 0..=grid {
        let t = -1.0 + 2.0 * k as f64 / grid as f64;
        if t == 0.0 {
            continue;
        }
        let it = Complex::new(0.0, t);
        let d = log_mgf(&rs, 1.0, it) - it * dt.mean + t * t * dt.variance / 2.0;
        worst = worst.max(d.norm() / (3.0 * t.abs().powi(3) * dt.variance));
    }
    r.finish(1.0, worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicBound {
    pub left_half_plane: bool,
    pub w: f64,
    /// `max_t (|phi(t)| - exp(-4 t^2 W / pi^2))` over the grid.
    pub max_excess: f64,
    pub worst_t: f64,
}

/// `|P(e^{it}) / P(1)| <= exp(-4 t^2 W / pi^2)` on `points` equally spaced `t` in `[-pi, pi]`.
pub fn characteristic_bound_check(fm: &FugacityModel, rs: &RootSet, points: usize) -> Result<CharacteristicBound> {
    let (fm, rs) = at_unit(fm, rs);
    let s = variance_surrogates(&rs, &fm)?;
    let mut out = CharacteristicBound { left_half_plane: half_plane_margin(&rs) >= 0.0, w: s.w, max_excess: f64::NEG_INFINITY, worst_t: 0.0 };
    for k in 0..points {
        let t = -PI + 2.0 * PI * k as f64 / (points - 1).max(1) as f64;
        let excess = characteristic_function(&fm, t).norm() - (-4.0 * t * t * s.w / (PI * PI)).exp();
        if excess > out.max_excess {
            out.max_excess = excess;
            out.worst_t = t;
        }
    }
    Ok(out)
}

/// Each link of the variance chain as `(name, margin)`; all margins should be `>= 0`.
pub fn variance_chain(fm: &FugacityModel, rs: &RootSet, graph: Option<(&Graph, &ConstraintProfile)>) -> Result<Vec<Hypothesis>> {
    let (fm, rs) = at_unit(fm, rs);
    let s = variance_surrogates(&rs, &fm)?;
    let var = distribution::<f64>(&fm).variance;
    let n = fm.degree() as f64;
    let mut out = Vec::new();
    let mut push = |name: &str, margin: f64| out.push(Hypothesis { name: name.into(), satisfied: margin >= -1e-9, margin });
    push("w_le_var", var - s.w);
    push("var_le_n", n - var);
    push("w_ge_root_surrogate", s.w - s.f / 8.0 * s.delta.min(1.0));
    if s.alpha < PI / 2.0 {
        push("var_le_secant_bound", 4.0 * (1.0 + 1.0 / s.alpha.cos()) * s.w - var);
    }
    if let Some((g, cp)) = graph {
        let e = g.edge_count() as f64;
        let d = g.max_degree().max(2) as f64;
        match profile_family(g, cp) {
            ProfileFamily::Matchings => push("matching_variance_floor", var - e / (8.0 * d.powi(4))),
            ProfileFamily::Unbranched => push("unbranched_variance_floor", var - e / (2.0 * d * d * (d - 1.0).powi(3))),
            ProfileFamily::Other => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count_engine::count_by_enumeration;
    use crate::generators;
    use crate::root_finder::find_roots;

    fn unit(p: CountPolynomial) -> (FugacityModel, RootSet) {
        let rs = find_roots(&p).unwrap();
        (FugacityModel::unit(p).unwrap(), rs)
    }

    #[test]
    fn clt_constants_of_binomial() {
        let (fm, rs) = unit(CountPolynomial::one_plus_z_pow(20));
        let r = is_clt_bound(&fm, &rs);
        let eps = 1.5f64.ln();
        assert!((r.constants["epsilon"] - eps).abs() < 1e-15);
        assert!((r.constants["N0"] - 8.0 / eps.powi(3)).abs() < 1e-9);
        assert!(!r.applicable && r.sound);
        let (fm, rs) = unit(CountPolynomial::one_plus_z_pow(121));
        let r = is_clt_bound(&fm, &rs);
        assert!(r.applicable && r.sound && r.vacuous);
        let (fm, rs) = unit(CountPolynomial::from_u64(&[1, 1]));
        assert!(!is_clt_bound(&fm, &rs).applicable);
    }

    #[test]
    fn berry_esseen_examples() {
        let (fm, rs) = unit(CountPolynomial::one_plus_z_pow(100));
        let r = berry_esseen_bound(&fm, &rs);
        assert!((r.bound - 2.4).abs() < 1e-15);
        assert!(r.applicable && r.sound && r.measured < 0.05);
        let (fm, rs) = unit(CountPolynomial::one_plus_z_pow(4));
        let r = berry_esseen_bound(&fm, &rs);
        assert!(r.bound == 12.0 && r.vacuous && r.sound);
    }

    #[test]
    fn harper_examples() {
        let (_, rs) = unit(CountPolynomial::from_u64(&[1, 3, 3]));
        let f = harper_decomposition(&rs).unwrap();
        assert_eq!(f.len(), 1);
        let conv = convolve_factors(&f);
        for (a, b) in conv.iter().zip([1.0 / 7.0, 3.0 / 7.0, 3.0 / 7.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let (_, rs) = unit(CountPolynomial::from_u64(&[1, 3]));
        let f = harper_decomposition(&rs).unwrap();
        assert!((f[0].probs[1] - 0.75).abs() < 1e-15);
        let (_, rs) = unit(CountPolynomial::one_plus_z_pow(10));
        let f = harper_decomposition(&rs).unwrap();
        assert!(sample_x(&f, 0, 1).is_empty());
        let s = sample_x(&f, 100_000, 7);
        assert_eq!(s, sample_x(&f, 100_000, 7));
        let mean = s.iter().sum::<u64>() as f64 / s.len() as f64;
        assert!((mean - 5.0).abs() < 5.0 * (2.5f64 / 1e5).sqrt());
    }

    #[test]
    fn log_concavity() {
        let lc = |c: &[u64]| log_concavity_check(&CountPolynomial::from_u64(c));
        assert_eq!(lc(&[1, 5, 10, 10, 5, 1]), LogConcavity { log_concave: true, properly: true });
        assert_eq!(lc(&[1, 0, 1]), LogConcavity { log_concave: false, properly: false });
        assert_eq!(lc(&[1, 2, 4]), LogConcavity { log_concave: true, properly: false });
        assert_eq!(lc(&[0, 0, 1, 3]), LogConcavity { log_concave: true, properly: true });
    }

    #[test]
    fn canfield_arithmetic() {
        let r = canfield_report(50.0, true, 0.0);
        assert!(!r.applicable);
        assert_eq!(r.constants["c"], 178.87);
        let r = canfield_report(1e18, true, 0.0);
        assert!(r.applicable);
        assert!((r.bound - 178.87 / 10f64.powf(13.5)).abs() < 1e-25);
    }

    #[test]
    fn general_lclt() {
        let (fm, rs) = unit(CountPolynomial::one_plus_z_pow(100));
        let r = lclt_general_bound(&fm, &rs);
        let want = PI / 4f64.powf(2.0 / 3.0) * 25f64.cbrt() / 12.5 * (-(4f64.cbrt()) * 12.5 / (PI * PI * 25f64.powf(2.0 / 3.0))).exp() + 24.0 / (25.0 * PI);
        assert!((r.bound - want).abs() < 1e-14);
        assert!(r.applicable && r.sound);
        let (fm, rs) = unit(CountPolynomial::from_u64(&[1, 0, 1]));
        let r = lclt_general_bound(&fm, &rs);
        assert!(r.bound.is_infinite() && r.vacuous && r.sound && r.applicable);
    }

    #[test]
    fn sharp_gates_inapplicable_at_desk_scale() {
        let g = generators::grid(3, 3).unwrap();
        let cp = ConstraintProfile::matchings(&g);
        let p = count_by_enumeration(&g, &cp).unwrap();
        let (fm, rs) = unit(p);
        let reps = sharp_lclt_condition(&fm, &rs, Some((&g, &cp)));
        assert_eq!(reps.len(), 5);
        assert!(reps.iter().all(|r| !r.applicable && r.sound));
        let gate = &reps[2];
        assert_eq!(gate.id, "matching_lclt_gate");
        assert_eq!(gate.bound, 200.0 * 256.0 / (PI * 12.0));
        assert_eq!(gate.hypothesis("edge_count_gate").unwrap().margin, 12.0 - 2.2e8 * 256.0);
    }

    #[test]
    fn mean_lower_bound_examples() {
        let (fm, rs) = unit(CountPolynomial::one_plus_z_pow(10));
        let r = mean_lower_bound_certificate(&fm, &rs);
        let zs = 0.25f64.min(1.0 / (80.0 * LN_2));
        assert!((r.constants["M"] - zs / 2.0).abs() < 1e-15);
        assert!(r.applicable && r.sound);
        let (fm, rs) = unit(CountPolynomial::from_u64(&[1, 0, 1]));
        assert!(!mean_lower_bound_certificate(&fm, &rs).applicable);
    }

    #[test]
    fn mgf_and_cumulant_remainders() {
        let (fm, rs) = unit(CountPolynomial::one_plus_z_pow(20));
        let m = mgf_remainder_check(&fm, &rs, Complex::new(0.0, 0.0)).unwrap();
        assert_eq!(m.remainder, 0.0);
        let m = mgf_remainder_check(&fm, &rs, Complex::new(0.05, 0.0)).unwrap();
        assert!(m.within_radius && m.sound);
        assert!(mgf_remainder_circle(&fm, &rs, 16).sound);
        let r = cumulant_remainder_check(&fm, &rs, 200);
        assert!(r.applicable && r.sound && r.measured < 1.0);
    }

    #[test]
    fn characteristic_bound_on_grid() {
        let g = generators::grid(3, 3).unwrap();
        let p = count_by_enumeration(&g, &ConstraintProfile::matchings(&g)).unwrap();
        let (fm, rs) = unit(p);
        let c = characteristic_bound_check(&fm, &rs, 1000).unwrap();
        assert!(c.left_half_plane && c.max_excess <= 1e-10);
        let chain = variance_chain(&fm, &rs, Some((&g, &ConstraintProfile::matchings(&g)))).unwrap();
        assert!(chain.iter().all(|h| h.satisfied), "{chain:?}");
    }
}
