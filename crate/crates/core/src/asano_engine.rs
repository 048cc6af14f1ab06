//! The Grace extension / Asano contraction route to `P_(C)`.
//!
//! Each vertex polynomial is lifted to its symmetric multi-affine extension in
//! one variable per incident edge; the two variables of every edge are then
//! contracted into one, and finally all edge variables are set equal to `z`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::count_engine::{choose_edge_order, CountPolynomial, DEFAULT_ENUM_CAP};
use crate::error::{Error, Result};
use crate::graph_model::{vertex_polynomial, ConstraintProfile, Graph};
use crate::poly::binomial;
use crate::scalar::Scalar;

/// Variables are dense indices below 128.
pub type VarId = usize;

const MAX_VARS: usize = 128;

/// Polynomial of degree at most one in each variable, monomials keyed by bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiAffinePoly {
    universe: u128,
    terms: BTreeMap<u128, BigInt>,
}

fn bit(v: VarId) -> Result<u128> {
    if v >= MAX_VARS {
        return Err(Error::Unsupported(format!("variable id {v} exceeds the {MAX_VARS}-variable limit")));
    }
    Ok(1u128 << v)
}

fn ids(mask: u128) -> Vec<VarId> {
    (0..MAX_VARS).filter(|&i| mask >> i & 1 == 1).collect()
}

impl MultiAffinePoly {
    pub fn constant(c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        Self { universe: 0, terms }
    }

    /// Builds from `(variables of the monomial, coefficient)` pairs.
    pub fn from_terms(universe: &[VarId], terms: Vec<(Vec<VarId>, BigInt)>) -> Result<Self> {
        let mut u = 0u128;
        for &v in universe {
            u |= bit(v)?;
        }
        let mut out = BTreeMap::new();
        for (vars, c) in terms {
            let mut key = 0u128;
            for v in vars {
                let b = bit(v)?;
                if key & b != 0 {
                    return Err(Error::Input(format!("variable {v} repeated in a monomial")));
                }
                if u & b == 0 {
                    return Err(Error::Input(format!("variable {v} not in the universe")));
                }
                key |= b;
            }
            let slot: &mut BigInt = out.entry(key).or_default();
            *slot += c;
        }
        out.retain(|_, c| !c.is_zero());
        Ok(Self { universe: u, terms: out })
    }

    pub fn universe(&self) -> Vec<VarId> {
        ids(self.universe)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Monomials as sorted variable lists with their coefficients.
    pub fn terms(&self) -> Vec<(Vec<VarId>, BigInt)> {
        self.terms.iter().map(|(k, c)| (ids(*k), c.clone())).collect()
    }

    pub fn coefficient(&self, vars: &[VarId]) -> BigInt {
        let key = vars.iter().fold(0u128, |k, &v| k | 1u128 << v);
        self.terms.get(&key).cloned().unwrap_or_default()
    }

    /// Product of polynomials in disjoint variable sets.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.universe & other.universe != 0 {
            return Err(Error::Input("factors share variables; product would not be multi-affine".into()));
        }
        let mut terms = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                terms.insert(ka | kb, ca * cb);
            }
        }
        Ok(Self { universe: self.universe | other.universe, terms })
    }

    /// Sets every variable to `z`; entry `k` is the coefficient of `z^k`.
    pub fn substitute_diagonal(&self) -> Vec<BigInt> {
        let n = self.universe.count_ones() as usize;
        let mut out = vec![BigInt::zero(); n + 1];
        for (k, c) in &self.terms {
            out[k.count_ones() as usize] += c;
        }
        while out.len() > 1 && out.last().is_some_and(Zero::is_zero) {
            out.pop();
        }
        out
    }

    /// True iff coefficients depend only on monomial size.
    pub fn is_symmetric(&self) -> bool {
        let n = self.universe.count_ones();
        let mut by_size: BTreeMap<u32, (BigInt, u64)> = BTreeMap::new();
        for (k, c) in &self.terms {
            let e = by_size.entry(k.count_ones()).or_insert((c.clone(), 0));
            if e.0 != *c {
                return false;
            }
            e.1 += 1;
        }
        by_size
            .iter()
            .all(|(&s, (_, count))| BigUint::from(*count) == binomial(n as u64, s as u64))
    }
}

/// The symmetric multi-affine polynomial whose diagonal is `p`.
pub fn grace_extension(p: &CountPolynomial, d: u32, vars: &[VarId]) -> Result<MultiAffinePoly> {
    if vars.len() != d as usize {
        return Err(Error::Input(format!("grace extension needs {d} variables, got {}", vars.len())));
    }
    if p.degree() > d as usize {
        return Err(Error::Input(format!("degree {} exceeds {d}", p.degree())));
    }
    let mut per_size = Vec::with_capacity(d as usize + 1);
    for k in 0..=d as u64 {
        let (q, r) = BigInt::from(p.coeff(k as usize)).div_rem(&BigInt::from(binomial(d as u64, k)));
        if !r.is_zero() {
            return Err(Error::Unsupported(format!(
                "coefficient p_{k} = {} is not divisible by binom({d}, {k})",
                p.coeff(k as usize)
            )));
        }
        per_size.push(q);
    }
    let mut terms = Vec::new();
    let n = vars.len();
    if n >= 64 {
        return Err(Error::Unsupported("grace extension limited to 63 variables".into()));
    }
    for sub in 0u64..(1u64 << n) {
        let c = &per_size[sub.count_ones() as usize];
        if !c.is_zero() {
            let vs = (0..n).filter(|&i| sub >> i & 1 == 1).map(|i| vars[i]).collect();
            terms.push((vs, c.clone()));
        }
    }
    MultiAffinePoly::from_terms(vars, terms)
}

/// `A + B a + C b + D ab  ->  A + D c`.
pub fn asano_contract(q: &MultiAffinePoly, a: VarId, b: VarId, c: VarId) -> Result<MultiAffinePoly> {
    let (ba, bb, bc) = (bit(a)?, bit(b)?, bit(c)?);
    if a == b || q.universe & ba == 0 || q.universe & bb == 0 {
        return Err(Error::Input(format!("contraction variables {a}, {b} must be distinct members of the universe")));
    }
    let rest = q.universe & !ba & !bb;
    if rest & bc != 0 {
        return Err(Error::Input(format!("contracted variable {c} is not fresh")));
    }
    let mut terms = BTreeMap::new();
    for (k, coeff) in &q.terms {
        let has_a = k & ba != 0;
        let has_b = k & bb != 0;
        match (has_a, has_b) {
            (false, false) => {
                terms.insert(*k, coeff.clone());
            }
            (true, true) => {
                terms.insert((k & !ba & !bb) | bc, coeff.clone());
            }
            _ => {}
        }
    }
    Ok(MultiAffinePoly { universe: rest | bc, terms })
}

/// Zero-free radius of a contraction of discs `|z| < r1` and `|z| < r2`.
pub fn zero_region_product<T: Scalar>(r1: T, r2: T) -> T {
    r1 * r2
}

pub fn build_by_asano(g: &Graph, cp: &ConstraintProfile) -> Result<CountPolynomial> {
    build_by_asano_ordered(g, cp, &choose_edge_order(g), DEFAULT_ENUM_CAP)
}

/// Runs the pipeline contracting edges in the given order.
pub fn build_by_asano_ordered(
    g: &Graph,
    cp: &ConstraintProfile,
    order: &[usize],
    cap: usize,
) -> Result<CountPolynomial> {
    if cp.len() != g.vertex_count() {
        return Err(Error::Input("constraint profile does not cover every vertex".into()));
    }
    if g.edge_count() > cap || 2 * g.edge_count() > MAX_VARS {
        return Err(Error::Resource(format!(
            "Asano build cap of {} edges exceeded ({} edges)",
            cap.min(MAX_VARS / 2),
            g.edge_count()
        )));
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..g.edge_count()).collect::<Vec<_>>() {
        return Err(Error::Input("edge order is not a permutation of the edges".into()));
    }
    // Variable z_{v,e} is 2e for the first endpoint and 2e+1 for the second; z_e reuses 2e.
    let slot = |v: usize, e: usize| 2 * e + usize::from(g.edge(e).u != v);
    let mut q = MultiAffinePoly::constant(BigInt::one());
    let mut included = vec![false; g.vertex_count()];
    for &e in order {
        let edge = g.edge(e);
        for v in [edge.u, edge.v] {
            if !included[v] {
                included[v] = true;
                let vars: Vec<VarId> = g.incident(v).iter().map(|&f| slot(v, f)).collect();
                let pv = vertex_polynomial(cp.set(v), g.degree(v) as u32);
                q = q.mul(&grace_extension(&pv, g.degree(v) as u32, &vars)?)?;
            }
        }
        q = asano_contract(&q, 2 * e, 2 * e + 1, 2 * e)?;
    }
    let diag = q.substitute_diagonal();
    let coeffs = diag
        .into_iter()
        .map(|c| {
            c.to_biguint()
                .ok_or_else(|| Error::Numerical("negative coefficient after contraction".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountPolynomial::new(coeffs))
}
