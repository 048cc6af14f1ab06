//! All complex roots of integer and rational polynomials with a-posteriori error radii.
//!
//! The polynomial is split exactly into square-free factors first, so repeated
//! roots such as those of `(1+z)^N` come out exact rather than as clusters.
//! Each factor is solved by Aberth–Ehrlich iteration, seeded in `f64` and
//! polished in extended precision; failures escalate the precision.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::count_engine::CountPolynomial;
use crate::error::{Error, Result};
use crate::scalar::{cabs, Real, Scalar};
use crate::{Mp120, Mp240, Mp30, Mp480, Mp60};

/// Roots `zeta_j` of a polynomial, listed with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex<f64>>,
    /// Radius of a disc around each root guaranteed (up to the x10 inflation) to hold a true root.
    pub err: Vec<f64>,
    pub is_real: Vec<bool>,
    /// Index of the conjugate partner for non-real roots.
    pub partner: Vec<Option<usize>>,
    /// Multiplicity of the square-free factor each root belongs to.
    pub multiplicity: Vec<usize>,
    /// Largest working precision used, in decimal digits.
    pub digits: u32,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// `eta_j = -zeta_j`.
    pub fn eta(&self, j: usize) -> Complex<f64> {
        -self.roots[j]
    }

    pub fn etas(&self) -> Vec<Complex<f64>> {
        self.roots.iter().map(|z| -z).collect()
    }

    /// Coefficients of `lead * prod (z - zeta_j)`, expanded in extended precision.
    pub fn reconstruct(&self, lead: f64) -> Vec<Complex<f64>> {
        let mut c: Vec<Complex<Mp60>> = vec![Complex::new(Mp60::from_f64(lead), Mp60::zero())];
        for z in &self.roots {
            let zz = Complex::new(Mp60::from_f64(z.re), Mp60::from_f64(z.im));
            let mut next = vec![Complex::new(Mp60::zero(), Mp60::zero()); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] = next[k + 1].clone() + ck.clone();
                next[k] = next[k].clone() - ck.clone() * zz.clone();
            }
            c = next;
        }
        c.into_iter().map(|x| Complex::new(x.re.to_f64(), x.im.to_f64())).collect()
    }
}

// ---------------------------------------------------------------- exact algebra

type QPoly = Vec<BigRational>;

fn trim_q(mut p: QPoly) -> QPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn monic(p: QPoly) -> QPoly {
    let p = trim_q(p);
    match p.last().cloned() {
        Some(lc) => p.into_iter().map(|c| c / lc.clone()).collect(),
        None => p,
    }
}

fn deriv_q(p: &QPoly) -> QPoly {
    trim_q(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect(),
    )
}

fn divrem_q(a: &QPoly, b: &QPoly) -> (QPoly, QPoly) {
    let b = trim_q(b.clone());
    let mut r = trim_q(a.clone());
    if r.len() < b.len() {
        return (vec![], r);
    }
    let lb = b.last().unwrap().clone();
    let mut q = vec![BigRational::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap().clone() / lb.clone();
        for (i, bi) in b.iter().enumerate() {
            let t = r[i + shift].clone() - c.clone() * bi.clone();
            r[i + shift] = t;
        }
        q[shift] = c;
        r.pop();
        r = trim_q(r);
    }
    (trim_q(q), r)
}

fn gcd_q(a: &QPoly, b: &QPoly) -> QPoly {
    let (mut a, mut b) = (monic(a.clone()), monic(b.clone()));
    while !b.is_empty() {
        let (_, r) = divrem_q(&a, &b);
        a = b;
        b = monic(r);
    }
    a
}

fn sub_q(a: &QPoly, b: &QPoly) -> QPoly {
    let n = a.len().max(b.len());
    trim_q(
        (0..n)
            .map(|i| {
                a.get(i).cloned().unwrap_or_else(BigRational::zero) - b.get(i).cloned().unwrap_or_else(BigRational::zero)
            })
            .collect(),
    )
}

/// Primitive integer polynomial with positive leading coefficient.
fn to_primitive_int(p: &QPoly) -> Vec<BigInt> {
    let den = p.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
    primitive(ints)
}

fn primitive(ints: Vec<BigInt>) -> Vec<BigInt> {
    let g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let sign = if ints.last().is_some_and(|c| c.is_negative()) { -BigInt::one() } else { BigInt::one() };
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|c| c / &g * &sign).collect()
}

/// Yun's square-free decomposition over Q: `f = c * prod_i a_i^i`.
fn square_free_factors(f: &[BigInt]) -> Vec<(Vec<BigInt>, usize)> {
    let fq: QPoly = f.iter().map(|c| BigRational::from_integer(c.clone())).collect();
    let df = deriv_q(&fq);
    let a0 = gcd_q(&fq, &df);
    if a0.len() <= 1 {
        return vec![(primitive(f.to_vec()), 1)];
    }
    let mut b = divrem_q(&fq, &a0).0;
    let c = divrem_q(&df, &a0).0;
    let mut d = sub_q(&c, &deriv_q(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while b.len() > 1 {
        let a = gcd_q(&b, &d);
        let nb = divrem_q(&b, &a).0;
        let nc = divrem_q(&d, &a).0;
        if a.len() > 1 {
            out.push((to_primitive_int(&a), i));
        }
        d = sub_q(&nc, &deriv_q(&nb));
        b = nb;
        i += 1;
    }
    out
}

const PRIMES: [u64; 2] = [18_446_744_073_709_551_557, 18_446_744_073_709_551_533];

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn trim_p(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn gcd_degree_mod(f: &[u64], g: &[u64], p: u64) -> usize {
    let (mut a, mut b) = (trim_p(f.to_vec()), trim_p(g.to_vec()));
    while !b.is_empty() {
        let inv = powmod(*b.last().unwrap(), p - 2, p);
        while a.len() >= b.len() && !a.is_empty() {
            let shift = a.len() - b.len();
            let c = mulmod(*a.last().unwrap(), inv, p);
            for (i, &bi) in b.iter().enumerate() {
                let t = mulmod(c, bi, p);
                a[i + shift] = ((a[i + shift] as u128 + p as u128 - t as u128) % p as u128) as u64;
            }
            a = trim_p(a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Proves square-freeness cheaply when `gcd(f, f') = 1` modulo a prime not dividing the leading coefficient.
fn certainly_square_free(f: &[BigInt]) -> bool {
    PRIMES.iter().any(|&p| {
        let pb = BigInt::from(p);
        let red: Vec<u64> = f.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect();
        if *red.last().unwrap() == 0 {
            return false;
        }
        let der: Vec<u64> = red.iter().enumerate().skip(1).map(|(k, &c)| mulmod(c, k as u64 % p, p)).collect();
        gcd_degree_mod(&red, &der, p) == 0
    })
}

// ---------------------------------------------------------------- numerics

fn log2_abs(c: &BigInt) -> f64 {
    let bits = c.bits();
    if bits <= 1000 {
        return c.abs().to_f64().unwrap().log2();
    }
    let shift = bits - 60;
    ((c.abs() >> shift).to_f64().unwrap()).log2() + shift as f64
}

/// Starting points from the upper convex hull of `(k, log|a_k|)`.
fn newton_polygon_starts(f: &[BigInt]) -> Vec<(f64, f64)> {
    let n = f.len() - 1;
    let pts: Vec<(usize, f64)> = f
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k, log2_abs(c)))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let m = j - i;
        let log2_r = (li - lj) / m as f64;
        for k in 0..m {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 / m as f64 + i as f64 / n as f64) + sigma;
            out.push((log2_r, theta));
        }
    }
    out
}

fn horner<T: Real>(a: &[T], z: &Complex<T>) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut p = zero.clone();
    let mut dp = zero;
    for c in a.iter().rev() {
        dp = dp * z.clone() + p.clone();
        p = p * z.clone() + Complex::new(c.clone(), T::zero());
    }
    (p, dp)
}

fn norm2<T: Real>(z: &Complex<T>) -> T {
    z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()
}

fn nudge<T: Real>(z: &Complex<T>) -> Complex<T> {
    let s = (T::epsilon().sqrt()) * (T::one() + cabs(z));
    Complex::new(z.re.clone() + s.clone(), z.im.clone() + s * T::from_f64(0.5))
}

/// Aberth sweeps until every correction is below `tol * |z|` or the residual
/// is at the rounding level of the evaluation.
fn aberth<T: Real>(a: &[T], z: &mut [Complex<T>], max_iter: usize, tol: &T) -> bool {
    let n = z.len();
    let one = Complex::new(T::one(), T::zero());
    let abs_a: Vec<T> = a.iter().map(|c| c.abs_val()).collect();
    let noise = T::from_i64(4 * n as i64 + 4) * T::epsilon();
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let mut all = true;
        for j in 0..n {
            if done[j] {
                continue;
            }
            let (p, dp) = horner(a, &z[j]);
            if p.re.is_zero() && p.im.is_zero() {
                done[j] = true;
                continue;
            }
            let at_noise = !tol.is_zero() && {
                let mz = cabs(&z[j]);
                let bound = abs_a.iter().rev().fold(T::zero(), |acc, c| acc * mz.clone() + c.clone());
                cabs(&p) <= noise.clone() * bound
            };
            if dp.re.is_zero() && dp.im.is_zero() {
                z[j] = nudge(&z[j]);
                all = false;
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex::new(T::zero(), T::zero());
            let mut clash = false;
            for k in 0..n {
                if k != j {
                    let d = z[j].clone() - z[k].clone();
                    if d.re.is_zero() && d.im.is_zero() {
                        clash = true;
                        break;
                    }
                    s = s + one.clone() / d;
                }
            }
            if clash {
                z[j] = nudge(&z[j]);
                all = false;
                continue;
            }
            let denom = one.clone() - ratio.clone() * s;
            let w = if denom.re.is_zero() && denom.im.is_zero() { ratio } else { ratio / denom };
            z[j] = z[j].clone() - w.clone();
            if at_noise || norm2(&w) <= tol.clone() * tol.clone() * norm2(&z[j]) {
                done[j] = true;
            } else {
                all = false;
            }
        }
        if all {
            return true;
        }
    }
    false
}

struct FactorRoots {
    roots: Vec<Complex<f64>>,
    err: Vec<f64>,
    is_real: Vec<bool>,
}

fn solve_at<T: Real>(f: &[BigInt], seeds: Option<&[Complex<f64>]>) -> std::result::Result<FactorRoots, String> {
    let n = f.len() - 1;
    let a: Vec<T> = f.iter().map(T::from_bigint).collect();
    let mut z: Vec<Complex<T>> = match seeds {
        Some(s) => s.iter().map(|c| Complex::new(T::from_f64(c.re), T::from_f64(c.im))).collect(),
        None => newton_polygon_starts(f)
            .into_iter()
            .map(|(log2_r, th)| {
                let r = (T::from_f64(log2_r) * T::from_f64(std::f64::consts::LN_2)).exp();
                Complex::new(r.clone() * T::from_f64(th.cos()), r * T::from_f64(th.sin()))
            })
            .collect(),
    };
    let tol = T::epsilon() * T::from_f64(64.0);
    if !aberth(&a, &mut z, 400 + 4 * n, &tol) {
        return Err("Aberth iteration did not converge".into());
    }
    // Two full polishing sweeps so that early-frozen roots see their final neighbours.
    aberth(&a, &mut z, 2, &T::zero());

    let lead = cabs(&Complex::new(a[n].clone(), T::zero()));
    let nn = T::from_i64(n as i64);
    let abs_a: Vec<T> = a.iter().map(|c| c.abs_val()).collect();
    let mut radius = Vec::with_capacity(n);
    for j in 0..n {
        let (p, _) = horner(&a, &z[j]);
        let mz = cabs(&z[j]);
        let mut bound = T::zero();
        for c in abs_a.iter().rev() {
            bound = bound * mz.clone() + c.clone();
        }
        let rounding = T::from_i64(2 * n as i64 + 2) * T::epsilon() * bound;
        let mut prod = T::one();
        for k in 0..n {
            if k != j {
                prod = prod * norm2(&(z[j].clone() - z[k].clone()));
            }
        }
        let prod = prod.sqrt();
        if prod.is_zero() {
            return Err("coincident approximations".into());
        }
        let r = T::from_i64(10) * nn.clone() * (cabs(&p) + rounding) / (lead.clone() * prod);
        radius.push(r);
    }
    for j in 0..n {
        for k in j + 1..n {
            let d = cabs(&(z[j].clone() - z[k].clone()));
            if d <= radius[j].clone() + radius[k].clone() {
                return Err(format!("inclusion discs {j} and {k} overlap"));
            }
        }
    }
    let mut is_real = vec![false; n];
    for j in 0..n {
        if z[j].im.abs_val() <= radius[j] {
            z[j].im = T::zero();
            is_real[j] = true;
        }
    }
    // Pair remaining roots with their conjugates and make the pairs exact.
    let mut partner: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        if is_real[j] || partner[j].is_some() || z[j].im < T::zero() {
            continue;
        }
        let target = z[j].conj();
        let best = (0..n)
            .filter(|&k| !is_real[k] && partner[k].is_none() && z[k].im < T::zero())
            .min_by(|&x, &y| {
                norm2(&(z[x].clone() - target.clone()))
                    .partial_cmp(&norm2(&(z[y].clone() - target.clone())))
                    .unwrap()
            });
        let Some(k) = best else {
            return Err(format!("non-real root {j} has no conjugate partner"));
        };
        let gap = cabs(&(z[k].clone() - target));
        if gap > radius[j].clone() + radius[k].clone() {
            return Err(format!("root {j} and its conjugate candidate differ by more than their radii"));
        }
        let half = T::from_f64(0.5);
        let re = (z[j].re.clone() + z[k].re.clone()) * half.clone();
        let im = (z[j].im.clone() - z[k].im.clone()) * half;
        z[j] = Complex::new(re.clone(), im.clone());
        z[k] = Complex::new(re, -im);
        let r = if radius[j] > radius[k] { radius[j].clone() } else { radius[k].clone() };
        radius[j] = r.clone();
        radius[k] = r;
        partner[j] = Some(k);
        partner[k] = Some(j);
    }
    if (0..n).any(|j| !is_real[j] && partner[j].is_none()) {
        return Err("unpaired non-real root".into());
    }
    let roots: Vec<Complex<f64>> = z.iter().map(|c| Complex::new(c.re.to_f64(), c.im.to_f64())).collect();
    let err = radius
        .iter()
        .zip(&roots)
        .map(|(r, c)| r.to_f64() + 2.0 * f64::EPSILON * c.norm())
        .collect();
    Ok(FactorRoots { roots, err, is_real })
}

fn f64_seeds(f: &[BigInt]) -> Option<Vec<Complex<f64>>> {
    let logs: Vec<f64> = f.iter().filter(|c| !c.is_zero()).map(log2_abs).collect();
    if logs.iter().any(|&l| l > 900.0) {
        return None;
    }
    let a: Vec<f64> = f.iter().map(|c| c.to_f64().unwrap()).collect();
    let mut z: Vec<Complex<f64>> = newton_polygon_starts(f)
        .into_iter()
        .map(|(log2_r, th)| Complex::from_polar(log2_r.exp2(), th))
        .collect();
    aberth(&a, &mut z, 300, &1e-13);
    z.iter().all(|c| c.re.is_finite() && c.im.is_finite()).then_some(z)
}

const LADDER: [u32; 5] = [30, 60, 120, 240, 480];

fn solve_factor(f: &[BigInt], start_digits: u32) -> Result<(FactorRoots, u32)> {
    if f.len() == 2 {
        let r = BigRational::new(-f[0].clone(), f[1].clone());
        let x = crate::scalar::ratio_to_f64(&r);
        return Ok((
            FactorRoots { roots: vec![Complex::new(x, 0.0)], err: vec![x.abs() * f64::EPSILON], is_real: vec![true] },
            start_digits,
        ));
    }
    let seeds = f64_seeds(f);
    let mut last = String::new();
    for &digits in LADDER.iter().filter(|&&d| d >= start_digits) {
        for s in [seeds.as_deref(), None] {
            let out = match digits {
                30 => solve_at::<Mp30>(f, s),
                60 => solve_at::<Mp60>(f, s),
                120 => solve_at::<Mp120>(f, s),
                240 => solve_at::<Mp240>(f, s),
                _ => solve_at::<Mp480>(f, s),
            };
            match out {
                Ok(r) => return Ok((r, digits)),
                Err(e) => last = e,
            }
            if seeds.is_none() {
                break;
            }
        }
    }
    Err(Error::Numerical(format!("root finding failed at 480 digits on a degree-{} factor: {last}", f.len() - 1)))
}

/// Roots of an integer polynomial given low-to-high.
pub fn find_roots_int(coeffs: &[BigInt], start_digits: u32) -> Result<RootSet> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    if c.len() < 2 {
        return Err(Error::Input("root finding needs degree at least 1".into()));
    }
    let zeros = c.iter().take_while(|x| x.is_zero()).count();
    let f = primitive(c[zeros..].to_vec());
    let factors = if f.len() <= 2 || certainly_square_free(&f) { vec![(f.clone(), 1)] } else { square_free_factors(&f) };

    let mut items: Vec<(Complex<f64>, f64, bool, usize)> = vec![(Complex::new(0.0, 0.0), 0.0, true, zeros); zeros];
    let mut digits = start_digits;
    for (factor, mult) in factors {
        if factor.len() < 2 {
            continue;
        }
        let (fr, d) = solve_factor(&factor, start_digits)?;
        digits = digits.max(d);
        for _ in 0..mult {
            for j in 0..fr.roots.len() {
                items.push((fr.roots[j], fr.err[j], fr.is_real[j], mult));
            }
        }
    }
    items.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap()
            .then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    let n = items.len();
    let mut partner = vec![None; n];
    let mut taken = vec![false; n];
    for j in 0..n {
        if items[j].2 || taken[j] || items[j].0.im <= 0.0 {
            continue;
        }
        let k = (0..n)
            .find(|&k| !taken[k] && !items[k].2 && items[k].0 == items[j].0.conj())
            .ok_or_else(|| Error::Numerical("conjugate pairing lost after sorting".into()))?;
        taken[j] = true;
        taken[k] = true;
        partner[j] = Some(k);
        partner[k] = Some(j);
    }
    Ok(RootSet {
        roots: items.iter().map(|x| x.0).collect(),
        err: items.iter().map(|x| x.1).collect(),
        is_real: items.iter().map(|x| x.2).collect(),
        partner,
        multiplicity: items.iter().map(|x| x.3).collect(),
        digits,
    })
}

/// Roots of a counting polynomial at 30 digits minimum.
pub fn find_roots(p: &CountPolynomial) -> Result<RootSet> {
    find_roots_int(&p.signed_coeffs(), 30)
}

pub fn find_roots_with_precision(p: &CountPolynomial, digits: u32) -> Result<RootSet> {
    find_roots_int(&p.signed_coeffs(), digits)
}

/// Roots of a polynomial with exact rational coefficients.
pub fn find_roots_rational(coeffs: &[BigRational]) -> Result<RootSet> {
    find_roots_int(&to_primitive_int(&coeffs.to_vec()), 30)
}

/// `(J1, J2)`: real roots, and one representative per conjugate pair with `Im(eta) > 0`.
pub fn classify_roots(rs: &RootSet) -> Result<(Vec<usize>, Vec<usize>)> {
    for j in 0..rs.len() {
        if rs.roots[j].re > rs.err[j] + 1e-12 * rs.roots[j].norm().max(1.0) {
            return Err(Error::Precondition(format!("root {j} = {} lies in the right half plane", rs.roots[j])));
        }
    }
    let mut j1 = Vec::new();
    let mut j2 = Vec::new();
    for j in 0..rs.len() {
        if rs.is_real[j] {
            j1.push(j);
        } else {
            match rs.partner[j] {
                Some(_) if rs.roots[j].im < 0.0 => j2.push(j),
                Some(_) => {}
                None => return Err(Error::Numerical(format!("non-real root {j} is unpaired"))),
            }
        }
    }
    Ok((j1, j2))
}
