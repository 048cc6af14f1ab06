//! Ising systems on small site sets: partition polynomials by brute force,
//! Lee-Yang zeros, finite-volume pressure, and the lattice-gas inequality
//! behind Ginibre's hypothesis.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::factorial;
use crate::root_finder::{find_roots_rational, RootSet};
use crate::scalar::{Real, Scalar};
use crate::Mp60;

pub const MAX_SPIN_SITES: usize = 22;
pub const MAX_PARTICLE_SITES: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairConvention {
    /// `U = -sum_{x<y} J(x,y) s(x) s(y)`.
    #[default]
    Unordered,
    /// The sum runs over ordered pairs, so every coupling counts twice.
    Ordered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    pub sites: Vec<String>,
    pub pairs: Vec<(usize, usize, f64)>,
    pub beta: f64,
    pub convention: PairConvention,
}

#[derive(Deserialize)]
struct SpinJson {
    sites: Vec<String>,
    pairs: Vec<(String, String, f64)>,
    beta: f64,
}

impl SpinSystem {
    pub fn new(sites: Vec<String>, pairs: Vec<(usize, usize, f64)>, beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Input(format!("beta must be finite and nonnegative, got {beta}")));
        }
        let mut seen = std::collections::HashSet::new();
        for (x, y, j) in &pairs {
            if *x >= sites.len() || *y >= sites.len() || x == y {
                return Err(Error::Input(format!("invalid pair ({x}, {y})")));
            }
            if !j.is_finite() {
                return Err(Error::Input(format!("coupling {j} is not finite")));
            }
            if !seen.insert((*x.min(y), *x.max(y))) {
                return Err(Error::Input(format!("pair ({}, {}) listed twice", sites[*x], sites[*y])));
            }
        }
        Ok(Self { sites, pairs, beta, convention: PairConvention::Unordered })
    }

    pub fn with_convention(mut self, convention: PairConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SpinJson = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
        let index: HashMap<&str, usize> = raw.sites.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if index.len() != raw.sites.len() {
            return Err(Error::Input("duplicate site name".into()));
        }
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::Input(format!("unknown site `{s}`")));
        let pairs = raw
            .pairs
            .iter()
            .map(|(x, y, j)| Ok((lookup(x)?, lookup(y)?, *j)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.sites.clone(), pairs, raw.beta)
    }

    pub fn to_json(&self) -> String {
        let pairs: Vec<_> = self.pairs.iter().map(|&(x, y, j)| (&self.sites[x], &self.sites[y], j)).collect();
        serde_json::json!({ "sites": self.sites, "pairs": pairs, "beta": self.beta }).to_string()
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// Couplings as they enter the energy.
    pub fn effective_pairs(&self) -> Vec<(usize, usize, f64)> {
        let k = match self.convention {
            PairConvention::Unordered => 1.0,
            PairConvention::Ordered => 2.0,
        };
        self.pairs.iter().map(|&(x, y, j)| (x, y, k * j)).collect()
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.pairs.iter().all(|p| p.2 >= 0.0)
    }
}

/// Open (or periodic) chain with nearest-neighbour coupling `j`.
pub fn chain(n: usize, j: f64, beta: f64, periodic: bool) -> Result<SpinSystem> {
    let sites = (0..n).map(|i| i.to_string()).collect();
    let mut pairs: Vec<_> = (1..n).map(|i| (i - 1, i, j)).collect();
    if periodic && n > 2 {
        pairs.push((n - 1, 0, j));
    }
    SpinSystem::new(sites, pairs, beta)
}

/// `w x h` torus with nearest-neighbour coupling; both sides must be at least 3.
pub fn torus(w: usize, h: usize, j: f64, beta: f64) -> Result<SpinSystem> {
    if w < 3 || h < 3 {
        return Err(Error::Input("torus sides must be at least 3".into()));
    }
    let id = |x: usize, y: usize| y * w + x;
    let sites = (0..w * h).map(|i| format!("{},{}", i % w, i / w)).collect();
    let mut pairs = Vec::new();
    for y in 0..h {
        for x in 0..w {
            pairs.push((id(x, y), id((x + 1) % w, y), j));
            pairs.push((id(x, y), id(x, (y + 1) % h), j));
        }
    }
    SpinSystem::new(sites, pairs, beta)
}

/// Common dyadic scale `2^-s` making every value an integer.
fn dyadic_scale(values: &[f64]) -> Result<(u32, Vec<i128>)> {
    let mut s: i32 = 0;
    let mut parts = Vec::with_capacity(values.len());
    for &x in values {
        if x == 0.0 {
            parts.push((0i128, 0i32));
            continue;
        }
        let bits = x.abs().to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let (mant, e) = if exp == 0 { (bits & ((1 << 52) - 1), -1074) } else { ((bits & ((1 << 52) - 1)) | 1 << 52, exp - 1075) };
        let tz = mant.trailing_zeros() as i32;
        let m = (mant >> tz) as i128 * if x < 0.0 { -1 } else { 1 };
        parts.push((m, e + tz));
        s = s.max(-(e + tz));
    }
    let mut out = Vec::with_capacity(parts.len());
    for (m, k) in parts {
        let shift = k + s;
        if shift > 64 {
            return Err(Error::Unsupported("coupling magnitudes span too wide a dyadic range".into()));
        }
        out.push(m << shift);
    }
    if s > 4096 {
        return Err(Error::Unsupported("coupling magnitudes span too wide a dyadic range".into()));
    }
    Ok((s as u32, out))
}

/// Counts of configurations grouped by `(m, integer energy)`.
type Groups = BTreeMap<(usize, i128), u64>;

fn enumerate_groups(n: usize, energy: impl Fn(u64) -> i128 + Sync) -> Groups {
    let total = 1u64 << n;
    let chunks = total.min(256);
    let step = total / chunks;
    let parts: Vec<Groups> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut g = Groups::new();
            for mask in c * step..(c + 1) * step {
                *g.entry((mask.count_ones() as usize, energy(mask))).or_insert(0) += 1;
            }
            g
        })
        .collect();
    let mut out = Groups::new();
    for g in parts {
        for (k, v) in g {
            *out.entry(k).or_insert(0) += v;
        }
    }
    out
}

/// `sum over groups of count * exp(beta * 2^-s * S)`, in ascending `S` order.
fn accumulate<T: Real>(n: usize, groups: &Groups, beta: f64, s: u32) -> Vec<T> {
    let scale = BigInt::one() << s;
    let beta = T::from_f64(beta);
    let mut out = vec![T::zero(); n + 1];
    for (&(m, e), &count) in groups {
        let x = beta.clone() * T::from_ratio(&BigRational::new(BigInt::from(e), scale.clone()));
        out[m] = out[m].clone() + T::from_i64(count as i64) * x.exp();
    }
    out
}

fn spin_groups(s: &SpinSystem) -> Result<(Groups, u32)> {
    let n = s.site_count();
    if n > MAX_SPIN_SITES {
        return Err(Error::Resource(format!("{n} sites exceed the enumeration cap of {MAX_SPIN_SITES}")));
    }
    let pairs = s.effective_pairs();
    let (shift, ints) = dyadic_scale(&pairs.iter().map(|p| p.2).collect::<Vec<_>>())?;
    let terms: Vec<(usize, usize, i128)> = pairs.iter().zip(ints).map(|(&(x, y, _), j)| (x, y, j)).collect();
    // -beta U = beta sum J s(x) s(y); the group key is sum J s(x) s(y) scaled to an integer.
    let groups = enumerate_groups(n, |mask| {
        terms.iter().map(|&(x, y, j)| if (mask >> x ^ mask >> y) & 1 == 0 { j } else { -j }).sum()
    });
    Ok((groups, shift))
}

/// `p_m = sum over configurations with m up spins of exp(-beta U)`, in `T`.
pub fn partition_polynomial_in<T: Real>(s: &SpinSystem) -> Result<Vec<T>> {
    let (groups, shift) = spin_groups(s)?;
    Ok(accumulate(s.site_count(), &groups, s.beta, shift))
}

/// Positive coefficients carried at 60 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivePolynomial {
    pub coeffs: Vec<Mp60>,
}

impl PositivePolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64()).collect()
    }

    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.coeffs.iter().map(|c| c.to_ratio()).collect()
    }

    pub fn eval(&self, z: &Mp60) -> Mp60 {
        self.coeffs.iter().rev().fold(Mp60::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    pub fn roots(&self) -> Result<RootSet> {
        find_roots_rational(&self.to_rationals())
    }
}

pub fn partition_polynomial(s: &SpinSystem) -> Result<PositivePolynomial> {
    Ok(PositivePolynomial { coeffs: partition_polynomial_in(s)? })
}

/// Whether the `(m, energy)` table is invariant under `m -> N - m`.
pub fn spin_flip_symmetric(s: &SpinSystem) -> Result<bool> {
    let (groups, _) = spin_groups(s)?;
    let n = s.site_count();
    Ok(groups.iter().all(|(&(m, e), c)| groups.get(&(n - m, e)) == Some(c)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeeYangCertificate {
    pub applicable: bool,
    pub pass: bool,
    /// `tol_j - ||zeta_j| - 1|`.
    pub margins: Vec<f64>,
    pub max_deviation: f64,
}

pub fn lee_yang_certificate(s: &SpinSystem, rs: &RootSet) -> LeeYangCertificate {
    let margins: Vec<f64> = rs.roots.iter().zip(&rs.err).map(|(z, e)| e + 1e-9 - (z.norm() - 1.0).abs()).collect();
    let max_deviation = rs.roots.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    let applicable = s.is_ferromagnetic();
    LeeYangCertificate { applicable, pass: applicable && margins.iter().all(|m| *m >= 0.0), margins, max_deviation }
}

/// `log P(beta, z) / |sites|`.
pub fn finite_pressure(s: &SpinSystem, z: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Input(format!("fugacity must be positive, got {z}")));
    }
    let p = partition_polynomial(s)?;
    Ok(p.eval(&Mp60::from_f64(z)).ln().to_f64() / s.site_count() as f64)
}

/// Lattice gas with pair potential `phi` and one-body term `u`:
/// `U(Y) = sum_{pairs in Y} phi + sum_{x in Y} u_x`, hard core built in.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    pub n: usize,
    pub phi: Vec<(usize, usize, f64)>,
    pub u: Vec<f64>,
    pub beta: f64,
}

impl ParticleSystem {
    pub fn pairs_only(n: usize, phi: Vec<(usize, usize, f64)>, beta: f64) -> Result<Self> {
        Self::new(n, phi, vec![0.0; n], beta)
    }

    pub fn new(n: usize, phi: Vec<(usize, usize, f64)>, u: Vec<f64>, beta: f64) -> Result<Self> {
        if u.len() != n || phi.iter().any(|&(x, y, _)| x >= n || y >= n || x == y) {
            return Err(Error::Input("particle system indices out of range".into()));
        }
        if !(beta >= 0.0 && beta.is_finite()) || phi.iter().any(|p| !p.2.is_finite()) || u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("particle system parameters must be finite, beta >= 0".into()));
        }
        Ok(Self { n, phi, u, beta })
    }

    /// `n_x = (s(x) + 1) / 2` gives `phi = -4J`, `u_x = 2 sum_y J(x,y)`.
    pub fn from_spin(s: &SpinSystem) -> Self {
        let pairs = s.effective_pairs();
        let mut u = vec![0.0; s.site_count()];
        for &(x, y, j) in &pairs {
            u[x] += 2.0 * j;
            u[y] += 2.0 * j;
        }
        Self { n: s.site_count(), phi: pairs.iter().map(|&(x, y, j)| (x, y, -4.0 * j)).collect(), u, beta: s.beta }
    }

    fn phi_matrix(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for &(x, y, p) in &self.phi {
            m[x][y] += p;
            m[y][x] += p;
        }
        m
    }
}

/// `q_m = sum_{|Y| = m} exp(-beta U(Y))` over sets of sites.
pub fn particle_polynomial_in<T: Real>(ps: &ParticleSystem) -> Result<Vec<T>> {
    if ps.n > MAX_PARTICLE_SITES {
        return Err(Error::Resource(format!("{} sites exceed the particle cap of {MAX_PARTICLE_SITES}", ps.n)));
    }
    let mut values: Vec<f64> = ps.phi.iter().map(|p| p.2).collect();
    values.extend(&ps.u);
    let (shift, ints) = dyadic_scale(&values)?;
    let (phi_int, u_int) = ints.split_at(ps.phi.len());
    let terms: Vec<(usize, usize, i128)> = ps.phi.iter().zip(phi_int).map(|(&(x, y, _), &v)| (x, y, v)).collect();
    let groups = enumerate_groups(ps.n, |mask| {
        let pair: i128 = terms.iter().filter(|&&(x, y, _)| mask >> x & mask >> y & 1 == 1).map(|t| t.2).sum();
        let one: i128 = (0..ps.n).filter(|&x| mask >> x & 1 == 1).map(|x| u_int[x]).sum();
        -(pair + one)
    });
    Ok(accumulate(ps.n, &groups, ps.beta, shift))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixBQuantities {
    /// `sup_y sum_{x != y} (1 - exp(-beta phi_+(x, y)))`.
    pub d_pair: f64,
    /// `1 + d_pair`: the coincidence `x = y` is a hard-core overlap.
    pub d: f64,
    /// The supremum over tuples read literally, with every coincidence counted.
    pub d_general: f64,
    /// `-B = inf_x [u_x + sum_y min(phi(x, y), 0)]`.
    pub b: f64,
}

/// `(d_pair, largest single overlap, -B)` in `T`.
fn appendix_b_parts<T: Real>(ps: &ParticleSystem) -> (T, T, T) {
    let m = ps.phi_matrix();
    let beta = T::from_f64(ps.beta);
    let overlap = |x: usize, y: usize| T::one() - (-(beta.clone() * T::from_f64(m[x][y].max(0.0)))).exp();
    let max = |a: T, b: T| if b > a { b } else { a };
    let mut d_pair = T::zero();
    let mut single = T::zero();
    for y in 0..ps.n {
        let mut sum = T::zero();
        for x in (0..ps.n).filter(|&x| x != y) {
            let o = overlap(x, y);
            single = max(single, o.clone());
            sum = sum + o;
        }
        d_pair = max(d_pair, sum);
    }
    let mut neg_b: Option<T> = None;
    for x in 0..ps.n {
        let v = (0..ps.n).filter(|&y| y != x).fold(T::from_f64(ps.u[x]), |acc, y| acc + T::from_f64(m[x][y].min(0.0)));
        neg_b = Some(match neg_b {
            Some(b) if b < v => b,
            _ => v,
        });
    }
    (d_pair, single, neg_b.unwrap_or_else(T::zero))
}

pub fn appendix_b_quantities(ps: &ParticleSystem) -> AppendixBQuantities {
    let (d_pair, single, neg_b) = appendix_b_parts::<Mp60>(ps);
    let d_pair = d_pair.to_f64();
    let d_general = if ps.n < 2 { 1.0 } else { (ps.n - 1) as f64 + single.to_f64() };
    AppendixBQuantities { d_pair, d: 1.0 + d_pair, d_general, b: -neg_b.to_f64() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixBRow {
    pub m: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs - lhs) / max(|lhs|, |rhs|)`, or 0 when both vanish.
    pub relative_margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixBReport {
    pub quantities: AppendixBQuantities,
    pub z0: f64,
    pub rows: Vec<AppendixBRow>,
    pub holds: bool,
    /// Whether `T_{m+1}^2 - T_m T_{m+2} <= 0` for every `m`.
    pub lhs_nonpositive: bool,
}

/// `T_{m+1}^2 - T_m T_{m+2} <= z e^{beta B} D T_m T_{m+1}` for `0 <= m <= N - 2`, using `D = 1 + d_pair`.
pub fn appendix_b_inequality(ps: &ParticleSystem, z0: f64) -> Result<AppendixBReport> {
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::Input(format!("fugacity must be positive, got {z0}")));
    }
    let quantities = appendix_b_quantities(ps);
    let q = particle_polynomial_in::<Mp60>(ps)?;
    let z = Mp60::from_f64(z0);
    let total = q.iter().rev().fold(Mp60::zero(), |acc, c| acc * z.clone() + c.clone());
    let mut zm = Mp60::one();
    let t: Vec<Mp60> = q
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let v = Mp60::from_bigint(&factorial(m as u64).into()) * c.clone() * zm.clone() / total.clone();
            zm = zm.clone() * z.clone();
            v
        })
        .collect();
    let (d_pair, _, neg_b) = appendix_b_parts::<Mp60>(ps);
    let factor = z.clone() * (-(Mp60::from_f64(ps.beta) * neg_b)).exp() * (Mp60::one() + d_pair);
    let tol = Mp60::from_f64(1e-40);
    let mut rows = Vec::new();
    for m in 0..ps.n.saturating_sub(1) {
        let lhs = t[m + 1].clone() * t[m + 1].clone() - t[m].clone() * t[m + 2].clone();
        let rhs = factor.clone() * t[m].clone() * t[m + 1].clone();
        let scale = if lhs.abs_val() > rhs.abs_val() { lhs.abs_val() } else { rhs.abs_val() };
        let diff = rhs.clone() - lhs.clone();
        let relative_margin = if scale.is_zero() { 0.0 } else { (diff.clone() / scale.clone()).to_f64() };
        rows.push(AppendixBRow {
            m,
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            relative_margin,
            holds: diff >= -(tol.clone() * scale),
        });
    }
    Ok(AppendixBReport {
        quantities,
        z0,
        holds: rows.iter().all(|r| r.holds),
        lhs_nonpositive: rows.iter().all(|r| r.lhs <= 0.0),
        rows,
    })
}
