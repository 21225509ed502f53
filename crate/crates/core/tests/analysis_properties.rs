use loopsampler::analysis::{fixed_ratio_pass, lossy_pass_matrix, net_efficiency, similarity, similarity_overlap};
use loopsampler::matrices::{dft_matrix, haar_random_unitary, hadamard_matrix};
use loopsampler::{ComplexMatrix, LoopPass, LossParams, SwitchSetting};
use proptest::prelude::*;

fn all_magnitudes_equal(m: &ComplexMatrix) -> bool {
    let first = m.as_slice()[0].norm();
    m.as_slice().iter().all(|z| (z.norm() - first).abs() < 1e-12)
}

#[test]
fn similarity_is_one_exactly_for_balanced_unitaries() {
    let cases: Vec<ComplexMatrix> = vec![
        dft_matrix(6).unwrap().into_inner(),
        hadamard_matrix(16).unwrap().into_inner(),
        ComplexMatrix::identity(5),
        haar_random_unitary(5, 1).unwrap().into_inner(),
        haar_random_unitary(3, 2).unwrap().into_inner(),
    ];
    for m in &cases {
        let s = similarity(m).unwrap();
        assert!(s > 0.0 && s <= 1.0 + 1e-12);
        assert_eq!((s - 1.0).abs() < 1e-12, all_magnitudes_equal(m), "s = {s}");
    }
}

proptest! {
    #[test]
    fn similarity_forms_agree_and_are_bounded(n in 1usize..12, seed in any::<u64>()) {
        let u = haar_random_unitary(n, seed).unwrap();
        let s = similarity(&u).unwrap();
        prop_assert!(s > 0.0 && s <= 1.0 + 1e-12);
        prop_assert!((s - similarity_overlap(&u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn efficiency_is_monotone(ei in 0.5..1.0f64, eo in 0.5..1.0f64, n in 1usize..20, r in 0usize..50) {
        let l = LossParams::new(ei, eo).unwrap();
        prop_assert!(net_efficiency(&l, n + 1, r) <= net_efficiency(&l, n, r));
        prop_assert!(net_efficiency(&l, n, r + 1) <= net_efficiency(&l, n, r));
        // log η is linear in the number of round trips.
        let per_trip = net_efficiency(&l, n, 1).ln();
        prop_assert!((net_efficiency(&l, n, r).ln() - r as f64 * per_trip).abs() < 1e-12);
    }

    #[test]
    fn lossy_passes_are_strictly_subunitary(
        n in 2usize..10,
        theta in 0.05..1.5f64,
        eta in 0.3..0.999f64,
    ) {
        let pass = fixed_ratio_pass(n, theta).unwrap();
        let m = lossy_pass_matrix(&pass, &LossParams::new(eta, 1.0).unwrap());
        let sv = m.max_singular_value();
        prop_assert!(sv < 1.0, "sv = {}", sv);
    }

    #[test]
    fn lossy_random_pass_singular_values(
        settings in proptest::collection::vec((0.0..=std::f64::consts::FRAC_PI_2, -3.0..3.0f64, -3.0..3.0f64), 3..12),
        eta in 0.5..=1.0f64,
    ) {
        let n = settings.len() - 1;
        let mut s: Vec<SwitchSetting> = settings.iter().map(|&(t, p, l)| SwitchSetting::new(t, p, l).unwrap()).collect();
        s[0] = SwitchSetting::reflective();
        s[n] = SwitchSetting::reflective();
        let pass = LoopPass::new(n, s).unwrap();
        let m = lossy_pass_matrix(&pass, &LossParams::new(eta, 1.0).unwrap());
        prop_assert!(m.max_singular_value() <= 1.0 + 1e-12);
    }
}
