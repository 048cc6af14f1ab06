//! Ginibre's variance inequality and the edge-extension identities behind it.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::count_engine::{admissible_subsets, DEFAULT_ENUM_CAP};
use crate::error::{Error, Result};
use crate::fugacity_stats::{exact_distribution, FugacityModel};
use crate::graph_model::{ConstraintProfile, Graph};
use crate::poly::factorial;
use crate::scalar::ratio_to_f64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GinibreMargin {
    pub m: usize,
    #[serde(skip)]
    pub exact: BigRational,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GinibreReport {
    pub a: f64,
    pub margins: Vec<GinibreMargin>,
    /// Indices where `T_m` or `T_{m+1}` vanishes.
    pub skipped: Vec<usize>,
    pub hypothesis_holds: bool,
    #[serde(skip)]
    pub conclusion_exact: BigRational,
    /// `Var - E / (1 + A)`.
    pub conclusion_margin: f64,
    pub conclusion_holds: bool,
    /// False only if the hypothesis holds and the conclusion does not.
    pub sound: bool,
}

impl GinibreReport {
    pub fn worst_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min)
    }
}

/// `T_m = m! Pr{X = m}`, exactly.
pub fn houses(fm: &FugacityModel) -> Vec<BigRational> {
    exact_distribution(fm)
        .q
        .into_iter()
        .enumerate()
        .map(|(m, q)| q * BigRational::from_integer(factorial(m as u64).into()))
        .collect()
}

pub fn ginibre_hypothesis(fm: &FugacityModel, a: &BigRational) -> Result<GinibreReport> {
    if a <= &-BigRational::one() {
        return Err(Error::Input(format!("A must exceed -1, got {a}")));
    }
    let t = houses(fm);
    let n = fm.degree();
    let mut margins = Vec::new();
    let mut skipped = Vec::new();
    for m in 0..n.saturating_sub(1) {
        if t[m].is_zero() || t[m + 1].is_zero() {
            skipped.push(m);
            continue;
        }
        let exact = &t[m + 2] / &t[m + 1] - &t[m + 1] / &t[m] + a;
        margins.push(GinibreMargin { m, margin: ratio_to_f64(&exact), exact });
    }
    let hypothesis_holds = margins.iter().all(|m| !m.exact.is_negative());
    let dt = exact_distribution(fm);
    let conclusion_exact = &dt.variance - &dt.mean / (BigRational::one() + a);
    let conclusion_holds = !conclusion_exact.is_negative();
    Ok(GinibreReport {
        a: ratio_to_f64(a),
        margins,
        skipped,
        hypothesis_holds,
        conclusion_margin: ratio_to_f64(&conclusion_exact),
        conclusion_exact,
        conclusion_holds,
        sound: !hypothesis_holds || conclusion_holds,
    })
}

/// `A = (2 alpha + 1) z0` for down-set profiles.
pub fn graph_ginibre_a(g: &Graph, cp: &ConstraintProfile, z0: &BigRational) -> Result<BigRational> {
    let alpha = cp.alpha(g)?;
    Ok(z0 * BigRational::from_integer(BigInt::from(2 * alpha + 1)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeExtensionReport {
    pub m: usize,
    pub p_m: u64,
    pub p_m1: u64,
    pub p_m2: u64,
    pub sum_k1: u64,
    pub sum_k2: u64,
    /// `(m + 1) p_{m+1} = sum K_1`.
    pub first_identity: bool,
    /// `(m + 2)(m + 1) p_{m+2} = 2 sum K_2`.
    pub second_identity: bool,
    /// `2 E[K_2] - E[K_1]^2 + (2 alpha + 1) E[K_1]`; absent when `p_m = 0`.
    #[serde(skip)]
    pub variance_margin_exact: Option<BigRational>,
    pub variance_margin: Option<f64>,
    /// Subsets with `K_2 < C(K_1, 2) - alpha K_1`.
    pub pair_bound_violations: u64,
}

impl EdgeExtensionReport {
    pub fn holds(&self) -> bool {
        self.first_identity
            && self.second_identity
            && self.pair_bound_violations == 0
            && self.variance_margin_exact.as_ref().is_none_or(|v| !v.is_negative())
    }
}

struct Extensions {
    p: Vec<u64>,
    masks: HashSet<u64>,
    by_size: Vec<Vec<u64>>,
}

fn extensions(g: &Graph, cp: &ConstraintProfile, cap: usize) -> Result<Extensions> {
    let all = admissible_subsets(g, cp, cap)?;
    let mut by_size = vec![Vec::new(); g.edge_count() + 1];
    for &mask in &all {
        by_size[mask.count_ones() as usize].push(mask);
    }
    Ok(Extensions { p: by_size.iter().map(|v| v.len() as u64).collect(), masks: all.into_iter().collect(), by_size })
}

fn k1_k2(mask: u64, edges: usize, masks: &HashSet<u64>) -> (u64, u64) {
    let free: Vec<u64> = (0..edges).map(|e| 1u64 << e).filter(|b| mask & b == 0).collect();
    let k1 = free.iter().filter(|&&b| masks.contains(&(mask | b))).count() as u64;
    let mut k2 = 0;
    for (i, &a) in free.iter().enumerate() {
        for &b in &free[i + 1..] {
            if masks.contains(&(mask | a | b)) {
                k2 += 1;
            }
        }
    }
    (k1, k2)
}

fn report_at(ext: &Extensions, edges: usize, alpha: u64, m: usize) -> EdgeExtensionReport {
    let at = |k: usize| ext.p.get(k).copied().unwrap_or(0);
    let (sum_k1, sum_k2, violations) = ext.by_size[m]
        .par_iter()
        .map(|&mask| {
            let (k1, k2) = k1_k2(mask, edges, &ext.masks);
            let pair_floor = (k1 * k1.saturating_sub(1) / 2) as i128 - (alpha * k1) as i128;
            (k1, k2, u64::from((k2 as i128) < pair_floor))
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let p_m = at(m);
    let variance_margin_exact = (p_m > 0).then(|| {
        let q = |x: u64| BigRational::new(BigInt::from(x), BigInt::from(p_m));
        let e1 = q(sum_k1);
        BigRational::from_integer(2.into()) * q(sum_k2) - &e1 * &e1 + BigRational::from_integer(BigInt::from(2 * alpha + 1)) * e1
    });
    EdgeExtensionReport {
        m,
        p_m,
        p_m1: at(m + 1),
        p_m2: at(m + 2),
        sum_k1,
        sum_k2,
        first_identity: (m as u64 + 1) * at(m + 1) == sum_k1,
        second_identity: (m as u64 + 2) * (m as u64 + 1) * at(m + 2) == 2 * sum_k2,
        variance_margin: variance_margin_exact.as_ref().map(ratio_to_f64),
        variance_margin_exact,
        pair_bound_violations: violations,
    }
}

/// Both identities at size `m`, with `K_1` and `K_2` computed by definition.
pub fn edge_extension_identities(g: &Graph, cp: &ConstraintProfile, m: usize) -> Result<EdgeExtensionReport> {
    let alpha = cp.alpha(g)? as u64;
    if m > g.edge_count() {
        return Err(Error::Input(format!("m = {m} exceeds the edge count {}", g.edge_count())));
    }
    let ext = extensions(g, cp, DEFAULT_ENUM_CAP)?;
    Ok(report_at(&ext, g.edge_count(), alpha, m))
}

/// Every `m` from 0 to `|E|`, sharing one enumeration.
pub fn edge_extension_all(g: &Graph, cp: &ConstraintProfile, cap: usize) -> Result<Vec<EdgeExtensionReport>> {
    let alpha = cp.alpha(g)? as u64;
    let ext = extensions(g, cp, cap)?;
    Ok((0..=g.edge_count()).map(|m| report_at(&ext, g.edge_count(), alpha, m)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count_engine::{count_by_enumeration, CountPolynomial};
    use crate::generators;
    use crate::scalar::f64_to_ratio;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binomial_is_extremal() {
        let fm = FugacityModel::unit(CountPolynomial::one_plus_z_pow(12)).unwrap();
        let rep = ginibre_hypothesis(&fm, &r(1, 1)).unwrap();
        assert_eq!(rep.margins.len(), 11);
        assert!(rep.margins.iter().all(|m| m.exact.is_zero()));
        assert!(rep.conclusion_exact.is_zero());
        assert!(rep.hypothesis_holds && rep.conclusion_holds && rep.skipped.is_empty());
    }

    #[test]
    fn triangle_matchings() {
        let g = generators::complete(3).unwrap();
        let cp = ConstraintProfile::matchings(&g);
        let a = graph_ginibre_a(&g, &cp, &r(1, 1)).unwrap();
        assert_eq!(a, r(3, 1));
        let fm = FugacityModel::unit(count_by_enumeration(&g, &cp).unwrap()).unwrap();
        let rep = ginibre_hypothesis(&fm, &a).unwrap();
        assert!(rep.hypothesis_holds && rep.conclusion_holds);
        assert!(rep.conclusion_exact.is_zero());

        let m0 = edge_extension_identities(&g, &cp, 0).unwrap();
        assert_eq!((m0.sum_k1, m0.sum_k2, m0.p_m1, m0.p_m2), (3, 0, 3, 0));
        assert!(m0.holds());
    }

    #[test]
    fn failing_hypothesis_is_reported() {
        let fm = FugacityModel::unit(CountPolynomial::from_u64(&[1, 3, 1])).unwrap();
        let rep = ginibre_hypothesis(&fm, &f64_to_ratio(-0.999).unwrap()).unwrap();
        assert!(!rep.hypothesis_holds && rep.sound);
        assert!(rep.worst_margin() < 0.0);
        assert!(ginibre_hypothesis(&fm, &r(-1, 1)).is_err());
    }

    #[test]
    fn zero_houses_are_skipped() {
        let fm = FugacityModel::unit(CountPolynomial::from_u64(&[0, 0, 1, 2, 1])).unwrap();
        let rep = ginibre_hypothesis(&fm, &r(1, 1)).unwrap();
        assert_eq!(rep.skipped, vec![0, 1]);
        assert_eq!(rep.margins.len(), 1);
    }

    #[test]
    fn a_formula_and_gates() {
        let g = generators::grid(3, 3).unwrap();
        assert_eq!(graph_ginibre_a(&g, &ConstraintProfile::matchings(&g), &r(1, 1)).unwrap(), r(7, 1));
        let g = generators::complete(4).unwrap();
        assert_eq!(graph_ginibre_a(&g, &ConstraintProfile::unbranched(&g), &r(2, 1)).unwrap(), r(6, 1));
        let cp = ConstraintProfile::uniform(&g, &[0, 2]).unwrap();
        assert!(matches!(graph_ginibre_a(&g, &cp, &r(1, 1)), Err(Error::Precondition(_))));
    }

    #[test]
    fn four_cycle_unbranched() {
        let g = generators::cycle(4).unwrap();
        let cp = ConstraintProfile::unbranched(&g);
        for rep in edge_extension_all(&g, &cp, DEFAULT_ENUM_CAP).unwrap() {
            assert!(rep.holds(), "{rep:?}");
        }
        let m1 = edge_extension_identities(&g, &cp, 1).unwrap();
        assert_eq!((m1.p_m, m1.sum_k1), (4, 12));
    }
}
