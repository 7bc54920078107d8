//! Seeded property suites behind the `verify` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tribell_core::mermin_bounds::{
    build_v_matrix, i_plus_minus, k_max, k_max_brute_force, mermin_bound_equal_strengths, mermin_bound_unbiased, top_two,
};
use tribell_core::oracle::{random_saturable_tensor, SeeSawConfig};
use tribell_core::smallmat::{mat3_transpose, rotate_3x9};
use tribell_core::states::{build, random_local_unitaries, StateSpec};
use tribell_core::svetlichny_bounds::{
    build_w_matrix, j_plus_minus, l_max, l_max_brute_force, svetlichny_bound_equal_strengths, svetlichny_bound_unbiased,
};
use tribell_core::tensor_core::{bloch_rotation, decompose, CorrelationDecomposition};
use tribell_core::{Angles, OperatorKind, StrengthSextuple};

use crate::evaluate::parallel_see_saw;
use crate::output::SuiteResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ClosedForm,
    Tightness,
    BruteForceKl,
    Invariance,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::ClosedForm, Suite::Tightness, Suite::BruteForceKl, Suite::Invariance];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ClosedForm => "closed_form",
            Suite::Tightness => "tightness",
            Suite::BruteForceKl => "brute_force_kl",
            Suite::Invariance => "invariance",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Suite::ClosedForm => 1e-10,
            Suite::Tightness => 1e-4,
            Suite::BruteForceKl => 1e-12,
            Suite::Invariance => 1e-9,
        }
    }
}

/// Restarts per instance in the tightness suite.
pub const TIGHTNESS_RESTARTS: usize = 50;

/// Independent generator for instance `i` of a suite.
pub fn instance_rng(seed: u64, suite: Suite, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((suite as u64) << 32) | i as u64);
    rng
}

pub fn random_strengths<R: Rng>(rng: &mut R) -> StrengthSextuple {
    StrengthSextuple::from_array(std::array::from_fn(|_| rng.random_range(0.0..=1.0))).expect("strengths in [0, 1]")
}

pub fn random_angles<R: Rng>(rng: &mut R) -> Angles {
    std::array::from_fn(|_| rng.random_range(0.0..=std::f64::consts::PI))
}

fn closed_form_deviation(rng: &mut ChaCha8Rng) -> f64 {
    let s = random_strengths(rng);
    let a = random_angles(rng);
    let (ip, im) = i_plus_minus(&s, &a).expect("radicand within tolerance");
    let (jp, jm) = j_plus_minus(&s, &a).expect("radicand within tolerance");
    let (v1, v2) = top_two(&build_v_matrix(&s, &a));
    let (w1, w2) = top_two(&build_w_matrix(&s, &a));
    [ip - (v1 + v2), im - (v1 - v2), jp - (w1 + w2), jm - (w1 - w2)].iter().fold(0.0, |m, d| worst(m, d.abs()))
}

fn brute_force_deviation(rng: &mut ChaCha8Rng) -> f64 {
    let s = random_strengths(rng);
    worst((k_max(&s) - k_max_brute_force(&s)).abs(), (l_max(&s) - l_max_brute_force(&s)).abs())
}

/// Largest of the Mermin and Svetlichny gaps between the equal-strength bound
/// and the constrained see-saw on a tensor built to saturate it.
pub fn tightness_deviation(rng: &mut ChaCha8Rng, seed: u64) -> f64 {
    let sat = random_saturable_tensor(rng);
    let r: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.2..=1.0));
    let s = StrengthSextuple::per_party(r[0], r[1], r[2]).expect("strengths in [0, 1]");
    let decomp = CorrelationDecomposition::from_t_matrix(&sat.t);
    let cfg = SeeSawConfig {
        restarts: TIGHTNESS_RESTARTS,
        seed,
        angle_constraints: Some(sat.angles),
        ..SeeSawConfig::default()
    };
    let bounds = [
        (OperatorKind::Mermin, mermin_bound_equal_strengths(&sat.t, r[0], r[1], r[2])),
        (OperatorKind::Svetlichny, svetlichny_bound_equal_strengths(&sat.t, r[0], r[1], r[2])),
    ];
    bounds
        .into_iter()
        .map(|(kind, bound)| {
            let bound = bound.expect("valid strengths").bound_value;
            let oracle = parallel_see_saw(&decomp, &s, &[0.0; 6], kind, &cfg).expect("valid oracle config").value;
            (bound - oracle).abs()
        })
        .fold(0.0, worst)
}

/// Deviation of the correlation tensor from its predicted rotation and of the
/// singular values and bounds under random local unitaries.
pub fn invariance_deviation(rng: &mut ChaCha8Rng) -> f64 {
    let state = build(&StateSpec::Random(rng.random())).expect("random states are physical");
    let us = random_local_unitaries(rng);
    let rotated = state.apply_local_unitaries(&us).expect("unitary conjugation keeps physicality");
    let t = decompose(&state).t_matrix();
    let t2 = decompose(&rotated).t_matrix();
    let o = us.map(|u| bloch_rotation(&u));
    let predicted = rotate_3x9(&t, &o[0], &mat3_transpose(&o[1]), &mat3_transpose(&o[2]));
    let mut dev = predicted.iter().flatten().zip(t2.iter().flatten()).fold(0.0, |m, (a, b)| worst(m, (a - b).abs()));
    let (a1, a2) = top_two(&t);
    let (b1, b2) = top_two(&t2);
    dev = worst(worst(dev, (a1 - b1).abs()), (a2 - b2).abs());
    let s = random_strengths(rng);
    let angles = random_angles(rng);
    let m = |t| mermin_bound_unbiased(t, &s, &angles).expect("valid input").bound_value;
    let w = |t| svetlichny_bound_unbiased(t, &s, &angles).expect("valid input").bound_value;
    worst(worst(dev, (m(&t) - m(&t2)).abs()), (w(&t) - w(&t2)).abs())
}

/// `max` that keeps NaN, so a broken instance cannot pass.
fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Runs `budget` instances in parallel; the maximum is order independent.
pub fn run_suite(suite: Suite, seed: u64, budget: usize) -> SuiteResult {
    let max_deviation = (0..budget)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, suite, i);
            match suite {
                Suite::ClosedForm => closed_form_deviation(&mut rng),
                Suite::BruteForceKl => brute_force_deviation(&mut rng),
                Suite::Invariance => invariance_deviation(&mut rng),
                Suite::Tightness => tightness_deviation(&mut rng, seed.wrapping_add(i as u64)),
            }
        })
        .reduce(|| 0.0, worst);
    SuiteResult {
        suite: suite.name().to_string(),
        instances: budget,
        tolerance: suite.tolerance(),
        max_deviation,
        passed: max_deviation <= suite.tolerance(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suites_pass() {
        for suite in [Suite::ClosedForm, Suite::BruteForceKl, Suite::Invariance] {
            let r = run_suite(suite, 3, 50);
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn tightness_on_a_few_instances() {
        let r = run_suite(Suite::Tightness, 1, 4);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn same_seed_same_result() {
        assert_eq!(run_suite(Suite::Invariance, 9, 10), run_suite(Suite::Invariance, 9, 10));
    }
}
