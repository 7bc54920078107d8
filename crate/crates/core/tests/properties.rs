//! Property tests for the invariants of each module.

use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tribell_core::mermin_bounds::{
    build_v_matrix, i_plus_minus, k_max, k_max_brute_force, mermin_bound_degenerate_smax, mermin_bound_equal_strengths,
    mermin_bound_unbiased, top_two,
};
use tribell_core::observables::{mermin_expectation, svetlichny_expectation, triple_expectation, GeneralObservable};
use tribell_core::oracle::{see_saw_maximize, SeeSawConfig};
use tribell_core::smallmat::{jacobi_eigen, mat3_transpose, rotate_3x9, singular_values_3x9, JACOBI_MAX_SWEEPS_3};
use tribell_core::states::{build, random_local_unitaries, random_su2, random_unit_vector, StateSpec};
use tribell_core::svetlichny_bounds::{
    build_w_matrix, j_plus_minus, l_max, l_max_brute_force, svetlichny_bound_equal_strengths, svetlichny_bound_unbiased,
};
use tribell_core::tensor_core::{bloch_rotation, decompose, kron3, reconstruct, CMat8};
use tribell_core::{Mat3, Mat3x9, MeasurementSetting, OperatorKind, StrengthSextuple};

fn strengths() -> impl Strategy<Value = StrengthSextuple> {
    proptest::array::uniform6(0.0..=1.0f64).prop_map(|a| StrengthSextuple::from_array(a).unwrap())
}

fn angles() -> impl Strategy<Value = [f64; 3]> {
    proptest::array::uniform3(0.0..=PI)
}

fn tensor() -> impl Strategy<Value = Mat3x9> {
    proptest::array::uniform3(proptest::array::uniform9(-1.0..=1.0f64))
}

fn rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    bloch_rotation(&random_su2(rng))
}

fn random_setting(rng: &mut ChaCha8Rng, s: &StrengthSextuple) -> MeasurementSetting {
    let dirs: [[f64; 3]; 6] = core::array::from_fn(|_| random_unit_vector(rng));
    MeasurementSetting::unbiased(s.as_array(), dirs).unwrap()
}

fn matmul8(a: &CMat8, b: &CMat8) -> CMat8 {
    let mut m = [[Complex64::new(0.0, 0.0); 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            m[i][j] = (0..8).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn i_and_j_match_svd(s in strengths(), a in angles()) {
        let (ip, im) = i_plus_minus(&s, &a).unwrap();
        let (v1, v2) = top_two(&build_v_matrix(&s, &a));
        prop_assert!((ip - (v1 + v2)).abs() < 1e-10);
        prop_assert!((im - (v1 - v2)).abs() < 1e-10);
        let (jp, jm) = j_plus_minus(&s, &a).unwrap();
        let (w1, w2) = top_two(&build_w_matrix(&s, &a));
        prop_assert!((jp - (w1 + w2)).abs() < 1e-10);
        prop_assert!((jm - (w1 - w2)).abs() < 1e-10);
    }

    #[test]
    fn bias_maxima_match_enumeration(s in strengths()) {
        prop_assert!((k_max(&s) - k_max_brute_force(&s)).abs() <= 1e-12);
        prop_assert!((l_max(&s) - l_max_brute_force(&s)).abs() <= 1e-12);
    }

    #[test]
    fn singular_values_frobenius_and_rotation(a in tensor(), seed in any::<u64>()) {
        let sv = singular_values_3x9(&a).values;
        let frob: f64 = a.iter().flatten().map(|x| x * x).sum();
        prop_assert!((sv.iter().map(|s| s * s).sum::<f64>() - frob).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (q, p, r) = (rotation(&mut rng), rotation(&mut rng), rotation(&mut rng));
        let rotated = singular_values_3x9(&rotate_3x9(&a, &q, &p, &r)).values;
        for i in 0..3 {
            prop_assert!((sv[i] - rotated[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn jacobi_terminates(a in proptest::array::uniform3(proptest::array::uniform3(-1.0..=1.0f64))) {
        let sym: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| a[i][j] + a[j][i]));
        prop_assert!(jacobi_eigen(sym, JACOBI_MAX_SWEEPS_3).sweeps <= JACOBI_MAX_SWEEPS_3);
    }

    #[test]
    fn bounds_depend_on_singular_values_only(t in tensor(), s in strengths(), a in angles(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rotated = rotate_3x9(&t, &rotation(&mut rng), &rotation(&mut rng), &rotation(&mut rng));
        let m = |t| mermin_bound_unbiased(t, &s, &a).unwrap().bound_value;
        let w = |t| svetlichny_bound_unbiased(t, &s, &a).unwrap().bound_value;
        prop_assert!((m(&t) - m(&rotated)).abs() < 1e-9);
        prop_assert!((w(&t) - w(&rotated)).abs() < 1e-9);
    }

    #[test]
    fn mermin_bound_monotone_up_to_a_direction_flip(t in tensor(), s in strengths(), a in angles(), i in 0usize..6, bump in 0.0..=1.0f64) {
        // Flipping one direction of party p maps theta_p to pi - theta_p, so the
        // larger of the two bounds is non-decreasing in that party's strengths.
        let p = i / 2;
        let mut flipped = a;
        flipped[p] = PI - a[p];
        let g = |s: &StrengthSextuple| {
            let b = |a| mermin_bound_unbiased(&t, s, a).unwrap().bound_value;
            b(&a).max(b(&flipped))
        };
        let mut up = s.as_array();
        up[i] += (1.0 - up[i]) * bump;
        let (lo, hi) = (g(&s), g(&StrengthSextuple::from_array(up).unwrap()));
        prop_assert!(hi >= lo - 1e-12, "{lo} -> {hi}");
    }

    #[test]
    fn sharp_limits(t in tensor()) {
        let (s1, s2) = top_two(&t);
        let root = (s1 * s1 + s2 * s2).sqrt();
        let m = mermin_bound_equal_strengths(&t, 1.0, 1.0, 1.0).unwrap().bound_value;
        let s = svetlichny_bound_equal_strengths(&t, 1.0, 1.0, 1.0).unwrap().bound_value;
        prop_assert!((m - 2.0 * root).abs() < 1e-10);
        prop_assert!((s - 2.0 * 2f64.sqrt() * root).abs() < 1e-10);
    }

    #[test]
    fn degenerate_value_dominates_angles_with_orthogonal_third_party(
        smax in 0.0..=1.0f64, s in strengths(), tx in 0.0..=PI, ty in 0.0..=PI, seed in any::<u64>()
    ) {
        // Tensor with s1 = s2 = smax in random local frames.
        let mut t = [[0.0; 9]; 3];
        t[0][0] = smax;
        t[1][4] = smax;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = rotate_3x9(&t, &rotation(&mut rng), &rotation(&mut rng), &rotation(&mut rng));
        let value = mermin_bound_degenerate_smax(&s, smax, false).unwrap().bound_value;
        let at = mermin_bound_unbiased(&t, &s, &[tx, ty, FRAC_PI_2]).unwrap().bound_value;
        prop_assert!(value >= at - 1e-9, "{value} < {at}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decompose_reconstruct_round_trip(seed in any::<u64>()) {
        let rho = build(&StateSpec::Random(seed)).unwrap();
        let d = decompose(&rho);
        let back = reconstruct(&d);
        for i in 0..8 {
            for j in 0..8 {
                prop_assert!((back.matrix[i][j] - rho.matrix()[i][j]).norm() < 1e-12);
            }
        }
        prop_assert!(d.lambda.iter().flatten().flatten().all(|x| x.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn local_unitaries_rotate_the_tensor(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = build(&StateSpec::Random(seed)).unwrap();
        let us = random_local_unitaries(&mut rng);
        let t = decompose(&rho).t_matrix();
        let t2 = decompose(&rho.apply_local_unitaries(&us).unwrap()).t_matrix();
        let o = us.map(|u| bloch_rotation(&u));
        let predicted = rotate_3x9(&t, &o[0], &mat3_transpose(&o[1]), &mat3_transpose(&o[2]));
        for (a, b) in predicted.iter().flatten().zip(t2.iter().flatten()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let (a1, a2) = top_two(&t);
        let (b1, b2) = top_two(&t2);
        prop_assert!((a1 - b1).abs() < 1e-9 && (a2 - b2).abs() < 1e-9);
    }

    #[test]
    fn operator_values_invariant_under_joint_rotation(seed in any::<u64>(), s in strengths()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = build(&StateSpec::Random(seed ^ 0x9e37)).unwrap();
        let us = random_local_unitaries(&mut rng);
        let setting = random_setting(&mut rng, &s);
        let o = us.map(|u| bloch_rotation(&u));
        let dirs = setting.directions();
        let moved: [[f64; 3]; 6] = core::array::from_fn(|i| {
            let r = &o[i / 2];
            core::array::from_fn(|a| (0..3).map(|b| r[a][b] * dirs[i][b]).sum())
        });
        let moved = MeasurementSetting::unbiased(s.as_array(), moved).unwrap();
        let d = decompose(&rho);
        let d2 = decompose(&rho.apply_local_unitaries(&us).unwrap());
        prop_assert!((mermin_expectation(&d, &setting) - mermin_expectation(&d2, &moved)).abs() < 1e-10);
        prop_assert!((svetlichny_expectation(&d, &setting) - svetlichny_expectation(&d2, &moved)).abs() < 1e-10);
    }

    #[test]
    fn triple_expectation_matches_dense_trace(seed in any::<u64>(), b in proptest::array::uniform3(-1.0..=1.0f64), r in proptest::array::uniform3(0.0..=1.0f64)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = build(&StateSpec::Random(seed)).unwrap();
        let obs: [GeneralObservable; 3] = core::array::from_fn(|i| {
            let strength = r[i] * (1.0 - b[i].abs());
            GeneralObservable::new(b[i], strength, random_unit_vector(&mut rng)).unwrap()
        });
        let dense = matmul8(&kron3(&obs[0].matrix(), &obs[1].matrix(), &obs[2].matrix()), rho.matrix());
        let tr: Complex64 = (0..8).map(|i| dense[i][i]).sum();
        let v = triple_expectation(&decompose(&rho), &obs[0], &obs[1], &obs[2]);
        prop_assert!((v - tr.re).abs() < 1e-12);
        prop_assert!(v.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn expectations_never_exceed_bounds(seed in any::<u64>(), s in strengths()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = decompose(&build(&StateSpec::Random(seed)).unwrap());
        let t = d.t_matrix();
        let setting = random_setting(&mut rng, &s);
        let a = setting.angles();
        prop_assert!(mermin_expectation(&d, &setting) <= mermin_bound_unbiased(&t, &s, &a).unwrap().bound_value + 1e-9);
        prop_assert!(svetlichny_expectation(&d, &setting) <= svetlichny_bound_unbiased(&t, &s, &a).unwrap().bound_value + 1e-9);
    }

    #[test]
    fn white_noise_scales_the_tensor(seed in any::<u64>(), v in 0.0..=1.0f64) {
        let base = decompose(&build(&StateSpec::Random(seed)).unwrap()).t_matrix();
        let mixed = decompose(&build(&StateSpec::Mix(Box::new(StateSpec::Random(seed)), v)).unwrap()).t_matrix();
        for (a, b) in base.iter().flatten().zip(mixed.iter().flatten()) {
            prop_assert!((v * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_states_are_reproducible(seed in any::<u64>()) {
        prop_assert_eq!(build(&StateSpec::Random(seed)).unwrap(), build(&StateSpec::Random(seed)).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn see_saw_is_sound_and_monotone(seed in any::<u64>(), s in strengths()) {
        let d = decompose(&build(&StateSpec::Random(seed)).unwrap());
        let t = d.t_matrix();
        let cfg = SeeSawConfig { restarts: 3, seed, ..SeeSawConfig::default() };
        for kind in [OperatorKind::Mermin, OperatorKind::Svetlichny] {
            let out = see_saw_maximize(&d, &s, &[0.0; 6], kind, &cfg).unwrap();
            let a = out.setting.angles();
            let bound = match kind {
                OperatorKind::Mermin => mermin_bound_unbiased(&t, &s, &a),
                OperatorKind::Svetlichny => svetlichny_bound_unbiased(&t, &s, &a),
            }
            .unwrap()
            .bound_value;
            prop_assert!(out.value <= bound + 1e-9, "{kind:?}: {} > {bound}", out.value);
            prop_assert!(out.worst_decrease >= -1e-12);
        }
    }
}
