//! The distribution of `X` at fugacity `z0`: `Pr{X=m} = p_m z0^m / P(z0)`.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::count_engine::CountPolynomial;
use crate::error::{Error, Result};
use crate::root_finder::RootSet;
use crate::scalar::{f64_to_ratio, ratio_to_f64, Real, Scalar};
use crate::Mp30;

/// A counting polynomial together with a positive rational fugacity.
#[derive(Debug, Clone, PartialEq)]
pub struct FugacityModel {
    poly: CountPolynomial,
    z0: BigRational,
}

impl FugacityModel {
    pub fn new(poly: CountPolynomial, z0: BigRational) -> Result<Self> {
        if !z0.is_positive() {
            return Err(Error::Input(format!("fugacity must be positive, got {z0}")));
        }
        if poly.is_zero() {
            return Err(Error::Input("the zero polynomial has no distribution".into()));
        }
        Ok(Self { poly, z0 })
    }

    /// `z0 = 1`.
    pub fn unit(poly: CountPolynomial) -> Result<Self> {
        Self::new(poly, BigRational::one())
    }

    /// The double is converted exactly.
    pub fn with_f64(poly: CountPolynomial, z0: f64) -> Result<Self> {
        let r = f64_to_ratio(z0).ok_or_else(|| Error::Input(format!("fugacity {z0} is not finite")))?;
        Self::new(poly, r)
    }

    pub fn poly(&self) -> &CountPolynomial {
        &self.poly
    }

    pub fn z0(&self) -> &BigRational {
        &self.z0
    }

    pub fn z0_f64(&self) -> f64 {
        ratio_to_f64(&self.z0)
    }

    pub fn is_unit(&self) -> bool {
        self.z0.is_one()
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    /// Integer weights `p_m a^m b^(N-m)` for `z0 = a/b`; proportional to `Pr{X=m}`.
    pub fn weights(&self) -> Vec<BigInt> {
        let n = self.degree();
        let a = self.z0.numer();
        let b = self.z0.denom();
        let mut apow = vec![BigInt::one(); n + 1];
        let mut bpow = vec![BigInt::one(); n + 1];
        for k in 1..=n {
            apow[k] = &apow[k - 1] * a;
            bpow[k] = &bpow[k - 1] * b;
        }
        self.poly
            .signed_coeffs()
            .iter()
            .enumerate()
            .map(|(m, p)| p * &apow[m] * &bpow[n - m])
            .collect()
    }

    /// The polynomial `b^N P(a w / b)`, whose law at `w = 1` is the law of `X` at `z0`.
    pub fn rescaled(&self) -> CountPolynomial {
        CountPolynomial::new(self.weights().into_iter().map(|w| w.to_biguint().unwrap()).collect())
    }

    /// The same law expressed at unit fugacity.
    pub fn unit_model(&self) -> FugacityModel {
        FugacityModel { poly: self.rescaled(), z0: BigRational::one() }
    }
}

/// Roots of `P(z0 w)` in `w` from the roots of `P(z)`.
pub fn rescale_roots(rs: &RootSet, z0: f64) -> RootSet {
    let mut out = rs.clone();
    for j in 0..out.len() {
        out.roots[j] = rs.roots[j] / z0;
        if rs.is_real[j] {
            out.roots[j].im = 0.0;
        }
        out.err[j] = rs.err[j] / z0 + 2.0 * f64::EPSILON * out.roots[j].norm();
    }
    for j in 0..out.len() {
        if let Some(k) = out.partner[j] {
            if j < k {
                out.roots[k] = out.roots[j].conj();
            }
        }
    }
    out
}

/// Probabilities `q_0..q_N` with the mean and variance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable<T> {
    pub q: Vec<T>,
    pub mean: T,
    pub variance: T,
}

impl<T: Scalar> DistributionTable<T> {
    pub fn degree(&self) -> usize {
        self.q.len() - 1
    }

    pub fn to_f64(&self) -> DistributionTable<f64> {
        DistributionTable {
            q: self.q.iter().map(Scalar::to_f64).collect(),
            mean: self.mean.to_f64(),
            variance: self.variance.to_f64(),
        }
    }
}

/// The exact law, computed in rationals and rounded once into `T`.
pub fn distribution<T: Scalar>(fm: &FugacityModel) -> DistributionTable<T> {
    let w = fm.weights();
    let total: BigInt = w.iter().sum();
    let s1: BigInt = w.iter().enumerate().map(|(m, x)| x * BigInt::from(m)).sum();
    let s2: BigInt = w.iter().enumerate().map(|(m, x)| x * BigInt::from(m * m)).sum();
    let mean = BigRational::new(s1, total.clone());
    let variance = BigRational::new(s2, total.clone()) - &mean * &mean;
    DistributionTable {
        q: w.into_iter().map(|x| T::from_ratio(&BigRational::new(x, total.clone()))).collect(),
        mean: T::from_ratio(&mean),
        variance: T::from_ratio(&variance),
    }
}

pub fn exact_distribution(fm: &FugacityModel) -> DistributionTable<BigRational> {
    distribution(fm)
}

/// `E = z P'/P` and `Var = z (z P'/P)'` evaluated at `z0`.
pub fn moments_via_log_derivative<T: Scalar>(fm: &FugacityModel) -> (T, T) {
    let z = T::from_ratio(fm.z0());
    let (mut p, mut d1, mut d2) = (T::zero(), T::zero(), T::zero());
    for c in fm.poly().signed_coeffs().iter().rev() {
        d2 = d2 * z.clone() + d1.clone() + d1.clone();
        d1 = d1 * z.clone() + p.clone();
        p = p * z.clone() + T::from_bigint(c);
    }
    let mean = z.clone() * d1.clone() / p.clone();
    let var = mean.clone() + z.clone() * z * d2 / p - mean.clone() * mean.clone();
    (mean, var)
}

/// `E[X] = sum z0 / (z0 - zeta_j)`.
pub fn mean_from_roots(rs: &RootSet, z0: f64) -> f64 {
    rs.roots.iter().map(|z| (z0 / (z0 - z)).re).sum()
}

/// `Var(X) = sum -zeta_j z0 / (z0 - zeta_j)^2`.
pub fn variance_from_roots(rs: &RootSet, z0: f64) -> f64 {
    rs.roots.iter().map(|z| (-z * z0 / ((z0 - z) * (z0 - z))).re).sum()
}

/// Tolerance used to decide that a root lies in the closed left half plane.
pub fn half_plane_tolerance(rs: &RootSet, j: usize) -> f64 {
    rs.err[j] + 1e-12 * rs.roots[j].norm().max(1.0)
}

/// Variance surrogates at unit fugacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surrogates {
    /// `W = (1/4) sum Re(eta)/(1+|eta|^2)`.
    pub w: f64,
    /// `min_j |eta_j| Re(eta_j)`.
    pub delta: f64,
    /// `p_1 / p_0`.
    pub f: f64,
    /// `max_j |arg eta_j|`.
    pub alpha: f64,
}

pub fn variance_surrogates(rs: &RootSet, fm: &FugacityModel) -> Result<Surrogates> {
    if !fm.is_unit() {
        return Err(Error::Precondition("variance surrogates are defined at z0 = 1; use unit_model()".into()));
    }
    let p0 = fm.poly().coeff(0);
    if p0.is_zero() {
        return Err(Error::Precondition("p_0 = 0, so zero is a root".into()));
    }
    let mut w = 0.0;
    let mut delta = f64::INFINITY;
    let mut alpha: f64 = 0.0;
    for j in 0..rs.len() {
        let eta = rs.eta(j);
        if -eta.re > half_plane_tolerance(rs, j) {
            return Err(Error::Precondition(format!("root {j} = {} lies in the right half plane", rs.roots[j])));
        }
        let re = eta.re.max(0.0);
        w += re / (1.0 + eta.norm_sqr());
        delta = delta.min(eta.norm() * re);
        alpha = alpha.max(eta.im.atan2(re).abs());
    }
    let f = ratio_to_f64(&BigRational::new(fm.poly().coeff(1).into(), p0.into()));
    Ok(Surrogates { w: w / 4.0, delta, f, alpha })
}

/// Standard normal distribution function.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `F` just left of and at the jump point `x_m = (m - E)/sigma`, against `G(x_m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfGapPoint {
    pub m: usize,
    pub x: f64,
    pub f_left: f64,
    pub f_right: f64,
    pub g: f64,
}

pub fn cdf_gap_curve<T: Scalar>(dt: &DistributionTable<T>) -> Result<Vec<CdfGapPoint>> {
    let var = dt.variance.to_f64();
    if var <= 0.0 {
        return Err(Error::Precondition("the distribution function comparison needs positive variance".into()));
    }
    let sigma = var.sqrt();
    let mean = dt.mean.to_f64();
    let mut cum = T::zero();
    let mut out = Vec::with_capacity(dt.q.len());
    for (m, q) in dt.q.iter().enumerate() {
        let left = cum.to_f64();
        cum = cum + q.clone();
        let x = (m as f64 - mean) / sigma;
        out.push(CdfGapPoint { m, x, f_left: left, f_right: cum.to_f64(), g: gaussian_cdf(x) });
    }
    Ok(out)
}

/// `sup_x |F(x) - G(x)|`, attained at a jump point from one side.
pub fn cdf_vs_gaussian_sup<T: Scalar>(dt: &DistributionTable<T>) -> Result<f64> {
    Ok(cdf_gap_curve(dt)?
        .iter()
        .map(|p| (p.f_left - p.g).abs().max((p.f_right - p.g).abs()))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcltPoint {
    pub m: i64,
    pub prob: f64,
    pub density: f64,
    pub error: f64,
}

/// Point probabilities against the Gaussian density over `[E-10s, E+10s]` and the support.
pub fn lclt_table<T: Scalar>(dt: &DistributionTable<T>) -> Result<Vec<LcltPoint>> {
    let var = dt.variance.to_f64();
    if var <= 0.0 {
        return Err(Error::Precondition("the local comparison needs positive variance".into()));
    }
    let mean = dt.mean.to_f64();
    let sigma = var.sqrt();
    let n = dt.degree() as i64;
    let lo = ((mean - 10.0 * sigma).floor() as i64).min(0);
    let hi = ((mean + 10.0 * sigma).ceil() as i64).max(n);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * var).sqrt();
    Ok((lo..=hi)
        .map(|m| {
            let prob = if (0..=n).contains(&m) { dt.q[m as usize].to_f64() } else { 0.0 };
            let d = m as f64 - mean;
            let density = norm * (-d * d / (2.0 * var)).exp();
            LcltPoint { m, prob, density, error: (prob - density).abs() }
        })
        .collect())
}

pub fn lclt_sup_error<T: Scalar>(dt: &DistributionTable<T>) -> Result<f64> {
    Ok(lclt_table(dt)?.iter().map(|p| p.error).fold(0.0, f64::max))
}

/// `P(e^{it} z0) / P(z0)` in the working precision of `T`.
pub fn characteristic_function_in<T: Real>(fm: &FugacityModel, t: &T) -> Complex<T> {
    let z0 = T::from_ratio(fm.z0());
    let (s, c) = t.sin_cos();
    let z = Complex::new(z0.clone() * c, z0.clone() * s);
    let num = fm.poly().eval_complex(&z);
    let den = fm.poly().eval(&z0);
    Complex::new(num.re / den.clone(), num.im / den)
}

/// `E[e^{itX}]`, evaluated at 30 digits.
pub fn characteristic_function(fm: &FugacityModel, t: f64) -> Complex<f64> {
    let v = characteristic_function_in::<Mp30>(fm, &Mp30::from_f64(t));
    Complex::new(v.re.to_f64(), v.im.to_f64())
}
