mod common;

use common::*;
use proptest::prelude::*;
use sre_core::geometry::Interval;
use sre_core::schmidt::schmidt;
use sre_core::uhlmann::{align_purifications, fidelity_matrices, fuchs_vdgraaf_check};
use sre_core::{random, SiteSpec, State};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schmidt_reconstructs(n in 2usize..=6, seed in any::<u64>(), cut in 0usize..5) {
        let cut = cut % (n - 1);
        let psi = State::new(random_state(n, seed), SiteSpec::qubits(n)).unwrap();
        let data = schmidt(&psi, cut).unwrap();
        let total: f64 = data.lambdas.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(data.lambdas.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((data.reconstruct() - psi.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(d in 2usize..=8, seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let a = random::density_matrix::<f64, _>(d, &mut rng);
        let b = random::density_matrix::<f64, _>(d, &mut rng);
        let (fab, fba) = (fidelity_matrices(&a, &b), fidelity_matrices(&b, &a));
        prop_assert!((fab - fba).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&fab));
        prop_assert!((fidelity_matrices(&a, &a) - 1.0).abs() < 1e-9);
        prop_assert!(fuchs_vdgraaf_check(&a, &b).pass);
    }

    #[test]
    fn alignment_beats_random_unitaries(n in 2usize..=5, seed in any::<u64>(), lo in 0usize..4) {
        let lo = lo % n;
        let keep = Interval::new(lo, n - 1, n).unwrap().sites();
        let chain = SiteSpec::qubits(n);
        let xi = random_state(n, seed);
        let eta = random_state(n, seed.wrapping_add(1));
        let split = chain.split(&keep).unwrap();
        let al = align_purifications(&xi, &eta, &split).unwrap();
        let mut rng = random::rng(seed);
        for _ in 0..4 {
            let u = random::unitary::<f64, _>(split.keep_dim(), &mut rng);
            let ov = eta.dotc(&split.apply(&u, &xi)).norm();
            prop_assert!(ov <= al.overlap + 1e-10);
        }
        // the optimum is the root fidelity of the complementary marginals
        let rest: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
        if !rest.is_empty() {
            let f = fidelity_matrices(&partial_trace_pure(&xi, &rest, n), &partial_trace_pure(&eta, &rest, n));
            prop_assert!((al.overlap * al.overlap - f).abs() < 1e-8);
        }
    }

    #[test]
    fn restriction_is_a_density_matrix(n in 2usize..=6, seed in any::<u64>(), mask in 1usize..63) {
        let keep: Vec<usize> = (0..n).filter(|s| mask >> s & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let psi = State::new(random_state(n, seed), SiteSpec::qubits(n)).unwrap();
        let rho = psi.restrict_sites(&keep).unwrap();
        prop_assert!(rho.validate(1e-10).is_ok());
    }
}
