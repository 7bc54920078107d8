//! Benchmark states: GHZ family, W, states fixed by their tripartite
//! correlations, white-noise mixtures and seeded random mixed states.

use alloc::boxed::Box;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::smallmat::Mat3x9;
use crate::tensor_core::{reconstruct, CMat2, CorrelationDecomposition, PhysicalityError, ThreeQubitState};

/// Tolerance on local and bipartite coefficients for [`is_tstate`].
pub const TSTATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// `(|000⟩ + |111⟩)/√2`.
    Ghz,
    /// `cos θ |000⟩ + sin θ |111⟩`, θ in `[0, π/2]`.
    GeneralizedGhz(f64),
    /// Equal superposition of the three single-excitation basis states.
    W,
    /// `(1/8)[I⊗I⊗I + Σ T_ijk σ_i⊗σ_j⊗σ_k]`.
    TState(Mat3x9),
    /// `v ρ_base + (1 - v) I/8`.
    Mix(Box<StateSpec>, f64),
    /// Normalized `G G†` for a seeded complex Gaussian `G`.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("visibility {0} outside [0, 1]")]
    Visibility(f64),
    #[error("generalized GHZ angle {0} outside [0, pi/2]")]
    GhzAngle(f64),
    #[error("T-state operator is not positive: minimum eigenvalue {0:e}")]
    NotPositive(f64),
    #[error(transparent)]
    Physicality(#[from] PhysicalityError),
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn build(spec: &StateSpec) -> Result<ThreeQubitState, StateError> {
    let zero = c(0.0);
    match spec {
        StateSpec::Ghz => build(&StateSpec::GeneralizedGhz(core::f64::consts::FRAC_PI_4)),
        StateSpec::GeneralizedGhz(theta) => {
            if !(0.0..=core::f64::consts::FRAC_PI_2).contains(theta) {
                return Err(StateError::GhzAngle(*theta));
            }
            let mut a = [zero; 8];
            a[0] = c(libm::cos(*theta));
            a[7] = c(libm::sin(*theta));
            Ok(ThreeQubitState::pure(&a)?)
        }
        StateSpec::W => {
            let mut a = [zero; 8];
            for i in [1, 2, 4] {
                a[i] = c(1.0);
            }
            Ok(ThreeQubitState::pure(&a)?)
        }
        StateSpec::TState(t) => {
            let r = reconstruct(&CorrelationDecomposition::from_t_matrix(t));
            if !r.is_physical() {
                return Err(StateError::NotPositive(r.min_eigenvalue));
            }
            Ok(r.into_state()?)
        }
        StateSpec::Mix(base, v) => {
            if !(0.0..=1.0).contains(v) {
                return Err(StateError::Visibility(*v));
            }
            let b = build(base)?;
            let mut m = *b.matrix();
            for (i, row) in m.iter_mut().enumerate() {
                for (j, z) in row.iter_mut().enumerate() {
                    *z *= *v;
                    if i == j {
                        *z += c((1.0 - v) / 8.0);
                    }
                }
            }
            Ok(ThreeQubitState::new(m)?)
        }
        StateSpec::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let g: [[Complex64; 8]; 8] = core::array::from_fn(|_| {
                core::array::from_fn(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            });
            let mut m = [[zero; 8]; 8];
            let mut tr = 0.0;
            for i in 0..8 {
                for j in i..8 {
                    let z: Complex64 = (0..8).map(|k| g[i][k] * g[j][k].conj()).sum();
                    m[i][j] = z;
                    m[j][i] = z.conj();
                }
                tr += m[i][i].re;
            }
            for row in m.iter_mut() {
                for z in row.iter_mut() {
                    *z /= tr;
                }
            }
            for (i, row) in m.iter_mut().enumerate() {
                row[i].im = 0.0;
            }
            Ok(ThreeQubitState::new(m)?)
        }
    }
}

/// No local Bloch vectors and no bipartite correlation blocks, within `tol`
/// (Frobenius norm of each block).
pub fn is_tstate(d: &CorrelationDecomposition, tol: f64) -> bool {
    let v = |x: [f64; 3]| libm::sqrt(x.iter().map(|a| a * a).sum());
    let m = |x: [[f64; 3]; 3]| libm::sqrt(x.iter().flatten().map(|a| a * a).sum());
    [v(d.bloch_a()), v(d.bloch_b()), v(d.bloch_c()), m(d.theta_mat()), m(d.phi_mat()), m(d.omega_mat())]
        .iter()
        .all(|&n| n <= tol)
}

/// Correlations of the GHZ state: `T_xxx = 1`, `T_xyy = T_yxy = T_yyx = -1`.
pub fn ghz_correlations() -> Mat3x9 {
    let mut t = [[0.0; 9]; 3];
    t[0][0] = 1.0;
    t[0][4] = -1.0;
    t[1][1] = -1.0;
    t[1][3] = -1.0;
    t
}

/// Uniform point on the unit sphere from two uniform variates.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let ct = 2.0 * u - 1.0;
    let st = libm::sqrt((1.0 - ct * ct).max(0.0));
    let phi = 2.0 * core::f64::consts::PI * v;
    [st * libm::cos(phi), st * libm::sin(phi), ct]
}

/// Haar-random element of SU(2) from a normalized Gaussian quaternion.
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> CMat2 {
    let q: [f64; 4] = core::array::from_fn(|_| rng.sample(StandardNormal));
    let n = libm::sqrt(q.iter().map(|a| a * a).sum());
    let [a, b, cc, d] = q.map(|x| x / n);
    let alpha = Complex64::new(a, b);
    let beta = Complex64::new(cc, d);
    [[alpha, -beta.conj()], [beta, alpha.conj()]]
}

pub fn random_local_unitaries<R: Rng + ?Sized>(rng: &mut R) -> [CMat2; 3] {
    core::array::from_fn(|_| random_su2(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::decompose;

    fn max_diff(a: &ThreeQubitState, b: &ThreeQubitState) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                d = d.max((a.matrix()[i][j] - b.matrix()[i][j]).norm());
            }
        }
        d
    }

    #[test]
    fn zero_visibility_is_maximally_mixed() {
        let s = build(&StateSpec::Mix(Box::new(StateSpec::Ghz), 0.0)).unwrap();
        assert!(max_diff(&s, &ThreeQubitState::maximally_mixed()) < 1e-15);
        let z = build(&StateSpec::TState([[0.0; 9]; 3])).unwrap();
        assert!(max_diff(&z, &ThreeQubitState::maximally_mixed()) < 1e-15);
    }

    #[test]
    fn ghz_decomposes_to_known_tensor() {
        let d = decompose(&build(&StateSpec::Ghz).unwrap());
        let t = d.t_matrix();
        let g = ghz_correlations();
        for i in 0..3 {
            for j in 0..9 {
                assert!((t[i][j] - g[i][j]).abs() < 1e-12);
            }
        }
        assert!(!is_tstate(&d, TSTATE_TOL));
        assert!((d.theta_mat()[2][2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_keeps_bipartite_terms() {
        let d = decompose(&build(&StateSpec::Mix(Box::new(StateSpec::Ghz), 0.3)).unwrap());
        assert!((d.lambda[3][3][0] - 0.3).abs() < 1e-12);
        assert!(!is_tstate(&d, TSTATE_TOL));
    }

    #[test]
    fn tstate_round_trip_and_rejection() {
        let mut t = ghz_correlations();
        for row in t.iter_mut() {
            for x in row.iter_mut() {
                *x *= 0.25;
            }
        }
        let d = decompose(&build(&StateSpec::TState(t)).unwrap());
        assert!(is_tstate(&d, TSTATE_TOL));
        match build(&StateSpec::TState(ghz_correlations())) {
            Err(StateError::NotPositive(e)) => assert!((e + 0.375).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_is_reproducible_and_physical() {
        let a = build(&StateSpec::Random(7)).unwrap();
        let b = build(&StateSpec::Random(7)).unwrap();
        assert_eq!(a, b);
        assert!(a.min_eigenvalue() > -1e-12);
        assert_ne!(a, build(&StateSpec::Random(8)).unwrap());
    }

    #[test]
    fn w_state_has_unit_trace() {
        let w = build(&StateSpec::W).unwrap();
        let tr: f64 = (0..8).map(|i| w.matrix()[i][i].re).sum();
        assert!((tr - 1.0).abs() < 1e-15);
        assert!((w.matrix()[1][2].re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(build(&StateSpec::Mix(Box::new(StateSpec::W), 1.5)), Err(StateError::Visibility(1.5)));
        assert_eq!(build(&StateSpec::GeneralizedGhz(2.0)), Err(StateError::GhzAngle(2.0)));
    }
}
