use loopsampler::compiler::{compile_unitary, decompose_adjacent_givens, pairwise_bs_program, reconstruct, Strategy};
use loopsampler::loop_model::program_unitary;
use loopsampler::matrices::{dft_matrix, haar_random_unitary, hadamard_matrix};
use loopsampler::{ComplexMatrix, SwitchSetting};
use proptest::prelude::*;

fn embedded(n: usize, a: usize, b: usize, theta: f64, phi: f64, lam: f64) -> ComplexMatrix {
    let g = SwitchSetting::new(theta, phi, lam).unwrap().coupler();
    let mut m = ComplexMatrix::identity(n);
    m[(a, a)] = g.exit;
    m[(a, b)] = g.circulate;
    m[(b, a)] = g.bypass;
    m[(b, b)] = g.enter;
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn per_rotation_round_trip(n in 2usize..=8, seed in any::<u64>()) {
        let u = haar_random_unitary(n, seed).unwrap();
        let prog = compile_unitary(&u, Strategy::PerRotation).unwrap();
        prop_assert!(prog.len() <= n * (n - 1) / 2 + 1);
        prop_assert!(program_unitary(&prog).max_abs_diff(&u) < 1e-8);
        for pass in prog.passes() {
            prop_assert!(pass.settings()[0].is_reflective());
            prop_assert!(pass.settings()[n].is_reflective());
        }
    }

    #[test]
    fn packed_round_trip(n in 2usize..=10, seed in any::<u64>()) {
        let u = haar_random_unitary(n, seed).unwrap();
        let prog = compile_unitary(&u, Strategy::Packed).unwrap();
        prop_assert!(prog.len() <= n + 1);
        prop_assert!(program_unitary(&prog).max_abs_diff(&u) < 1e-8);
    }

    #[test]
    fn factorisation_reconstructs(n in 1usize..=12, seed in any::<u64>()) {
        let u = haar_random_unitary(n, seed).unwrap();
        let (steps, layer) = decompose_adjacent_givens(&u).unwrap();
        prop_assert!(steps.len() <= n * (n - 1) / 2);
        prop_assert!(reconstruct(n, &steps, &layer).max_abs_diff(&u) < 1e-10);
    }

    #[test]
    fn pairwise_random_angles(
        n in 2usize..=10,
        pick in any::<(usize, usize)>(),
        theta in 0.0..=std::f64::consts::FRAC_PI_2,
        phi in -3.0..3.0f64,
        lam in -3.0..3.0f64,
    ) {
        let a = pick.0 % (n - 1);
        let b = a + 1 + pick.1 % (n - 1 - a);
        let prog = pairwise_bs_program(n, a, b, theta, phi, lam).unwrap();
        prop_assert_eq!(prog.len(), 2 * (b - a - 1) + 1);
        prop_assert!(program_unitary(&prog).max_abs_diff(&embedded(n, a, b, theta, phi, lam)) < 1e-10);
    }
}

#[test]
fn every_pair_up_to_ten_modes() {
    for n in 2..=10 {
        for a in 0..n {
            for b in a + 1..n {
                let (theta, phi, lam) = (0.3 + 0.1 * a as f64, -0.2 * b as f64, 0.7);
                let prog = pairwise_bs_program(n, a, b, theta, phi, lam).unwrap();
                let err = program_unitary(&prog).max_abs_diff(&embedded(n, a, b, theta, phi, lam));
                assert!(err < 1e-10, "n={n} a={a} b={b} err={err:e}");
            }
        }
    }
}

#[test]
fn structured_targets_compile() {
    let targets = [
        dft_matrix(5).unwrap(),
        hadamard_matrix(8).unwrap(),
        dft_matrix(16).unwrap(),
    ];
    for u in &targets {
        for strategy in [Strategy::PerRotation, Strategy::Packed] {
            let prog = compile_unitary(u, strategy).unwrap();
            assert!(program_unitary(&prog).max_abs_diff(u) < 1e-8, "{strategy} n={}", u.n());
        }
    }
}

#[test]
fn compilation_is_deterministic() {
    let u = haar_random_unitary(7, 31).unwrap();
    assert_eq!(
        compile_unitary(&u, Strategy::PerRotation).unwrap(),
        compile_unitary(&u, Strategy::PerRotation).unwrap()
    );
}
