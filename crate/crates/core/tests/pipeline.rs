use lyl_core::asano_engine::build_by_asano;
use lyl_core::count_engine::{count_by_enumeration, count_by_frontier_dp};
use lyl_core::fugacity_stats::{distribution, exact_distribution, mean_from_roots, rescale_roots, variance_from_roots, FugacityModel};
use lyl_core::generators;
use lyl_core::ginibre_checks::{ginibre_hypothesis, graph_ginibre_a};
use lyl_core::graph_model::{graph_from_json, graph_to_json, ConstraintProfile};
use lyl_core::limit_theorems::{berry_esseen_bound, harper_decomposition, harper_deviation, log_concavity_check};
use lyl_core::root_certificates::{modulus_certificate, wedge_certificate_bipartite};
use lyl_core::root_finder::find_roots;
use lyl_core::scalar::ratio_to_f64;
use lyl_core::Mp60;
use num_rational::BigRational;
use proptest::prelude::*;

#[test]
fn hexagonal_patch_end_to_end() {
    let g = generators::hex_patch(2).unwrap();
    let cp = ConstraintProfile::matchings(&g);
    let p = count_by_frontier_dp(&g, &cp, &[]).unwrap();
    let rs = find_roots(&p).unwrap();
    assert!(modulus_certificate(&g, &cp, &rs).unwrap().pass);
    let side = g.bipartition().unwrap();
    assert!(wedge_certificate_bipartite(&g, &cp, &side, &rs).unwrap().pass);
    assert!(log_concavity_check(&p).properly);
    let fm = FugacityModel::unit(p).unwrap();
    assert!(berry_esseen_bound(&fm, &rs).sound);
    let f = harper_decomposition(&rs).unwrap();
    assert!(harper_deviation(&f, &distribution::<f64>(&fm)) < 1e-12);
}

#[test]
fn json_round_trip_preserves_the_polynomial() {
    let g = generators::grid(2, 3).unwrap();
    let cp = ConstraintProfile::unbranched(&g);
    let (g2, cp2) = graph_from_json(&graph_to_json(&g, &cp)).unwrap();
    assert_eq!(count_by_enumeration(&g, &cp).unwrap(), count_by_enumeration(&g2, &cp2).unwrap());
}

#[test]
fn distribution_is_scalar_generic() {
    let g = generators::cycle(6).unwrap();
    let p = count_by_enumeration(&g, &ConstraintProfile::matchings(&g)).unwrap();
    let fm = FugacityModel::new(p, BigRational::new(2.into(), 3.into())).unwrap();
    let exact = exact_distribution(&fm);
    let mp = distribution::<Mp60>(&fm);
    let fl = distribution::<f64>(&fm);
    assert!((ratio_to_f64(&exact.variance) - fl.variance).abs() < 1e-14);
    assert!(ratio_to_f64(&(mp.mean.to_ratio() - &exact.mean)).abs() < 1e-55);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn three_counting_paths_agree(n in 3usize..7, m in 2usize..10, seed in any::<u64>(), ks in prop::collection::vec(0u32..4, 7)) {
        let g = generators::random_multigraph(n, m, seed).unwrap();
        let sets = (0..g.vertex_count()).map(|v| (0..=ks[v]).collect()).collect();
        let cp = ConstraintProfile::new(&g, sets).unwrap();
        let a = count_by_enumeration(&g, &cp).unwrap();
        prop_assert_eq!(&a, &count_by_frontier_dp(&g, &cp, &[]).unwrap());
        prop_assert_eq!(&a, &build_by_asano(&g, &cp).unwrap());
    }

    #[test]
    fn root_moments_match_exact_moments(n in 4usize..8, m in 3usize..12, seed in any::<u64>(), num in 1i64..6, den in 1i64..6) {
        let g = generators::gnm(n, m.min(n * (n - 1) / 2), seed).unwrap();
        let cp = ConstraintProfile::unbranched(&g);
        let p = count_by_enumeration(&g, &cp).unwrap();
        let rs = find_roots(&p).unwrap();
        let fm = FugacityModel::new(p, BigRational::new(num.into(), den.into())).unwrap();
        let dt = distribution::<f64>(&fm);
        let z0 = fm.z0_f64();
        prop_assert!((mean_from_roots(&rs, z0) - dt.mean).abs() < 1e-9 * dt.mean.max(1.0));
        prop_assert!((variance_from_roots(&rs, z0) - dt.variance).abs() < 1e-9 * dt.variance.max(1.0));
        let unit = fm.unit_model();
        let urs = rescale_roots(&rs, z0);
        prop_assert!((mean_from_roots(&urs, 1.0) - distribution::<f64>(&unit).mean).abs() < 1e-9 * dt.mean.max(1.0));
    }

    #[test]
    fn ginibre_holds_on_down_sets(n in 3usize..7, m in 2usize..10, seed in any::<u64>(), ks in prop::collection::vec(1u32..4, 7), num in 1i64..5) {
        let g = generators::random_multigraph(n, m, seed).unwrap();
        let sets = (0..g.vertex_count()).map(|v| (0..=ks[v]).collect()).collect();
        let cp = ConstraintProfile::new(&g, sets).unwrap();
        let z0 = BigRational::new(num.into(), 2.into());
        let a = graph_ginibre_a(&g, &cp, &z0).unwrap();
        let fm = FugacityModel::new(count_by_frontier_dp(&g, &cp, &[]).unwrap(), z0).unwrap();
        let r = ginibre_hypothesis(&fm, &a).unwrap();
        prop_assert!(r.hypothesis_holds && r.conclusion_holds);
    }
}
