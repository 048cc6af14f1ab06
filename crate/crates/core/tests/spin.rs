use lyl_core::fugacity_stats::{exact_distribution, FugacityModel};
use lyl_core::spin_systems::*;
use lyl_core::Mp60;
use proptest::prelude::*;

#[test]
fn periodic_chain_zeros_and_pressure() {
    let s = chain(10, 0.5, 1.0, true).unwrap();
    let rs = partition_polynomial(&s).unwrap().roots().unwrap();
    assert!(lee_yang_certificate(&s, &rs).pass);
    let p = finite_pressure(&s, 1.0).unwrap();
    // transfer matrix: lambda_+ = 2 cosh(beta J) for the periodic chain at zero field
    let l = 2.0 * 0.5f64.cosh();
    let exact = ((l.powi(10) + (2.0 * 0.5f64.sinh()).powi(10)).ln()) / 10.0;
    assert!((p - exact).abs() < 1e-14);
    assert!(finite_pressure(&s, 0.0).is_err());
}

#[test]
fn size_cap() {
    let s = chain(23, 1.0, 0.1, false).unwrap();
    assert!(partition_polynomial(&s).is_err());
}

#[test]
fn ideal_gas_is_an_equality_with_hard_core_overlap() {
    let ps = ParticleSystem::pairs_only(6, vec![], 0.7).unwrap();
    let r = appendix_b_inequality(&ps, 1.5).unwrap();
    assert_eq!(r.quantities.d, 1.0);
    assert!(r.holds);
    assert!(r.rows.iter().all(|row| row.lhs > 0.0 && (row.lhs - row.rhs).abs() < 1e-12 * row.rhs));
}

fn random_system(n: usize, couplings: &[f64], beta: f64) -> SpinSystem {
    let mut pairs = Vec::new();
    let mut k = 0;
    for x in 0..n {
        for y in x + 1..n {
            if couplings[k] != 0.0 {
                pairs.push((x, y, couplings[k]));
            }
            k += 1;
        }
    }
    SpinSystem::new((0..n).map(|i| format!("s{i}")).collect(), pairs, beta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ferromagnets_satisfy_lee_yang(n in 2usize..8, cs in prop::collection::vec(0u8..5, 28), beta in 0.05f64..1.5) {
        let couplings: Vec<f64> = cs.iter().map(|&c| c as f64 / 4.0).collect();
        let s = random_system(n, &couplings, beta);
        prop_assert!(spin_flip_symmetric(&s).unwrap());
        let rs = partition_polynomial(&s).unwrap().roots().unwrap();
        prop_assert!(lee_yang_certificate(&s, &rs).pass);
    }

    #[test]
    fn ferromagnetic_distribution_is_symmetric(n in 2usize..7, cs in prop::collection::vec(0u8..4, 21), beta in 0.1f64..1.0) {
        let couplings: Vec<f64> = cs.iter().map(|&c| c as f64 / 2.0).collect();
        let s = random_system(n, &couplings, beta);
        let p = partition_polynomial(&s).unwrap().coeffs;
        for m in 0..=n {
            prop_assert_eq!(&p[m], &p[n - m]);
        }
    }

    #[test]
    fn spin_and_lattice_gas_agree(n in 2usize..7, cs in prop::collection::vec(-4i8..5, 21), beta in 0.1f64..1.0) {
        let couplings: Vec<f64> = cs.iter().map(|&c| c as f64 / 4.0).collect();
        let s = random_system(n, &couplings, beta);
        let p = partition_polynomial_in::<Mp60>(&s).unwrap();
        let q = particle_polynomial_in::<Mp60>(&ParticleSystem::from_spin(&s)).unwrap();
        for m in 0..=n {
            let r = (p[m].clone() / p[0].clone() - q[m].clone() / q[0].clone()) / (q[m].clone() / q[0].clone());
            prop_assert!(lyl_core::Scalar::to_f64(&r).abs() < 1e-50);
        }
    }

    #[test]
    fn lattice_gas_inequality_holds(n in 2usize..7, cs in prop::collection::vec(-6i8..7, 21), beta in 0.1f64..2.0, z0 in 0.2f64..3.0) {
        let mut phi = Vec::new();
        let mut k = 0;
        for x in 0..n {
            for y in x + 1..n {
                if cs[k] != 0 {
                    phi.push((x, y, cs[k] as f64 / 4.0));
                }
                k += 1;
            }
        }
        let r = appendix_b_inequality(&ParticleSystem::pairs_only(n, phi, beta).unwrap(), z0).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }
}

#[test]
fn beta_zero_distribution_is_binomial() {
    let s = chain(8, 2.0, 0.0, false).unwrap();
    let p = partition_polynomial(&s).unwrap();
    let coeffs: Vec<u64> = p.to_f64().iter().map(|&c| c as u64).collect();
    let fm = FugacityModel::unit(lyl_core::count_engine::CountPolynomial::from_u64(&coeffs)).unwrap();
    assert_eq!(exact_distribution(&fm).variance, num_rational::BigRational::from_integer(2.into()));
}
