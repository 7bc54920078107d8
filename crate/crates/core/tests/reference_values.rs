//! Reference values from independent oracles: literature maxima, hand
//! arithmetic and the see-saw search.

use core::f64::consts::{FRAC_PI_2, SQRT_2};

use tribell_core::mermin_bounds::{
    mermin_biased_window, mermin_bound_equal_strengths, mermin_bound_unbiased, mermin_bound_x_asymmetric, top_two,
};
use tribell_core::oracle::{see_saw_maximize, SeeSawConfig};
use tribell_core::states::{build, ghz_correlations, is_tstate, StateSpec, TSTATE_TOL};
use tribell_core::svetlichny_bounds::{svetlichny_biased_window, svetlichny_bound_equal_strengths};
use tribell_core::tensor_core::{decompose, CorrelationDecomposition};
use tribell_core::{OperatorKind, StrengthSextuple};

fn oracle(d: &CorrelationDecomposition, s: &StrengthSextuple, kind: OperatorKind, angles: Option<[f64; 3]>) -> f64 {
    let cfg = SeeSawConfig { restarts: 30, seed: 11, angle_constraints: angles, ..SeeSawConfig::default() };
    see_saw_maximize(d, s, &[0.0; 6], kind, &cfg).unwrap().value
}

#[test]
fn ghz_sharp_maxima() {
    let d = decompose(&build(&StateSpec::Ghz).unwrap());
    let t = d.t_matrix();
    let m = mermin_bound_equal_strengths(&t, 1.0, 1.0, 1.0).unwrap().bound_value;
    let s = svetlichny_bound_equal_strengths(&t, 1.0, 1.0, 1.0).unwrap().bound_value;
    assert!((m - 4.0).abs() < 1e-12);
    assert!((s - 4.0 * SQRT_2).abs() < 1e-12);
    let sharp = StrengthSextuple::sharp();
    assert!((oracle(&d, &sharp, OperatorKind::Mermin, None) - 4.0).abs() < 1e-6);
    assert!((oracle(&d, &sharp, OperatorKind::Svetlichny, None) - 4.0 * SQRT_2).abs() < 1e-6);
}

#[test]
fn w_state_sharp_bounds_dominate_literature_maxima() {
    // Known projective maxima for the W state: Mermin 3.046, Svetlichny 4.354.
    // The singular-value bounds are not attained here.
    let d = decompose(&build(&StateSpec::W).unwrap());
    let t = d.t_matrix();
    let m = mermin_bound_equal_strengths(&t, 1.0, 1.0, 1.0).unwrap().bound_value;
    let s = svetlichny_bound_equal_strengths(&t, 1.0, 1.0, 1.0).unwrap().bound_value;
    let sharp = StrengthSextuple::sharp();
    let om = oracle(&d, &sharp, OperatorKind::Mermin, None);
    let os = oracle(&d, &sharp, OperatorKind::Svetlichny, None);
    // s1² + s2² = 25/9 for W.
    assert!((m - 10.0 / 3.0).abs() < 1e-12, "{m}");
    assert!((s - 2.0 * SQRT_2 * 5.0 / 3.0).abs() < 1e-12, "{s}");
    assert!((om - 3.046).abs() < 1e-3, "{om}");
    assert!((os - 4.354).abs() < 1e-3, "{os}");
    assert!(om <= m && os <= s);
}

#[test]
fn ghz_is_not_a_tstate() {
    assert!(!is_tstate(&decompose(&build(&StateSpec::Ghz).unwrap()), TSTATE_TOL));
    assert!(!is_tstate(&decompose(&build(&StateSpec::Mix(Box::new(StateSpec::Ghz), 0.3)).unwrap()), TSTATE_TOL));
}

#[test]
fn white_noise_ghz_scales_linearly() {
    for v in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let t = decompose(&build(&StateSpec::Mix(Box::new(StateSpec::Ghz), v)).unwrap()).t_matrix();
        let m = mermin_bound_equal_strengths(&t, 1.0, 1.0, 1.0).unwrap().bound_value;
        assert!((m - 4.0 * v).abs() < 1e-9, "{v}: {m}");
    }
}

#[test]
fn windows_at_p_two() {
    let m = mermin_biased_window(2.0).unwrap();
    assert!((m.r_biased - (-3.0 + 21f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!((m.r_unbiased - 2f64.powf(-1.0 / 3.0)).abs() < 1e-12);
    let s = svetlichny_biased_window(2.0).unwrap();
    assert!((s.r_biased - 0.8905087442713907).abs() < 1e-12);
    assert!((s.r_unbiased - 2f64.powf(-1.0 / 6.0)).abs() < 1e-12);
    assert!(mermin_biased_window(1.0).is_err());
    assert!(svetlichny_biased_window(SQRT_2).is_err());
}

#[test]
fn ghz_x_asymmetric_bound_versus_quantum_maximum() {
    // Rx = 1, Rx' = 0.5 on GHZ: the closed form gives sqrt(10), while the
    // quantum maximum is exactly 3 (|g| + |g'|/2 with each term at most 2).
    let t = ghz_correlations();
    let r = mermin_bound_x_asymmetric(&t, 1.0, 0.5, 1.0, 1.0, false).unwrap();
    assert!((r.bound_value - 10f64.sqrt()).abs() < 1e-12);
    let d = decompose(&build(&StateSpec::Ghz).unwrap());
    let s = StrengthSextuple::new(1.0, 0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
    let o = oracle(&d, &s, OperatorKind::Mermin, None);
    assert!((o - 3.0).abs() < 1e-6, "{o}");
    assert!(o <= r.bound_value);
}

#[test]
fn fixed_angle_bound_can_fall_as_a_strength_rises() {
    // Rank-one tensor, parallel X and Z pairs, nearly antiparallel Y pair.
    let mut t = [[0.0; 9]; 3];
    t[2][8] = -0.6457512515131876;
    let d = CorrelationDecomposition::from_t_matrix(&t);
    let angles = [0.0, 2.5865749728870457, 0.0];
    let low = StrengthSextuple::new(0.601923831043217, 0.0, 0.44372537024371816, 0.025266122987119697, 0.0, 0.9225171056483475)
        .unwrap();
    let mut a = low.as_array();
    a[4] = 0.3278009910473144;
    let high = StrengthSextuple::from_array(a).unwrap();
    let b_low = mermin_bound_unbiased(&t, &low, &angles).unwrap().bound_value;
    let b_high = mermin_bound_unbiased(&t, &high, &angles).unwrap().bound_value;
    assert!(b_high < b_low - 1e-3, "{b_low} -> {b_high}");
    // The constrained search attains both values, so the decrease is real.
    for (s, b) in [(low, b_low), (high, b_high)] {
        let o = oracle(&d, &s, OperatorKind::Mermin, Some(angles));
        assert!((o - b).abs() < 1e-6, "{o} vs {b}");
    }
}

#[test]
fn maximally_mixed_bounds_vanish() {
    let t = decompose(&build(&StateSpec::Mix(Box::new(StateSpec::W), 0.0)).unwrap()).t_matrix();
    assert_eq!(top_two(&t), (0.0, 0.0));
    let s = StrengthSextuple::uniform(0.7).unwrap();
    assert_eq!(mermin_bound_unbiased(&t, &s, &[FRAC_PI_2; 3]).unwrap().bound_value, 0.0);
}
