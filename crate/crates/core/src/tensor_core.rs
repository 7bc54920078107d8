//! Three-qubit density operators and their Pauli-coefficient expansion
//! `Λ_{μνγ} = Tr[(σ_μ⊗σ_ν⊗σ_γ) ρ]`.
//!
//! Basis index of `|abc⟩` is `4a + 2b + c` (first party most significant).

use num_complex::Complex64;

use crate::smallmat::{jacobi_eigen, Mat3, Mat3x9};

pub type CMat2 = [[Complex64; 2]; 2];
pub type CMat8 = [[Complex64; 8]; 8];

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PhysicalityError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("trace is {re} + {im}i, expected 1")]
    NotUnitTrace { re: f64, im: f64 },
    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
}

/// Single-qubit Pauli as a signed permutation: row `r` has its only entry
/// at column `col[r]` with value `val[r]`.
#[derive(Clone, Copy)]
struct SparsePauli {
    col: [usize; 2],
    val: [Complex64; 2],
}

const PAULIS: [SparsePauli; 4] = [
    SparsePauli { col: [0, 1], val: [ONE, ONE] },
    SparsePauli { col: [1, 0], val: [ONE, ONE] },
    SparsePauli { col: [1, 0], val: [Complex64::new(0.0, -1.0), I] },
    SparsePauli { col: [0, 1], val: [ONE, Complex64::new(-1.0, 0.0)] },
];

/// Dense 2×2 Pauli matrix `σ_k`, `k = 0..4` (identity, x, y, z).
pub fn pauli(k: usize) -> CMat2 {
    let p = PAULIS[k];
    let mut m = [[ZERO; 2]; 2];
    for r in 0..2 {
        m[r][p.col[r]] = p.val[r];
    }
    m
}

/// Visits the eight nonzero entries `(row, col, value)` of `σ_μ⊗σ_ν⊗σ_γ`.
fn pauli_string_entries(mu: usize, nu: usize, ga: usize, mut f: impl FnMut(usize, usize, Complex64)) {
    let (p, q, r) = (PAULIS[mu], PAULIS[nu], PAULIS[ga]);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let row = 4 * a + 2 * b + c;
                let col = 4 * p.col[a] + 2 * q.col[b] + r.col[c];
                f(row, col, p.val[a] * q.val[b] * r.val[c]);
            }
        }
    }
}

pub fn hermiticity_deviation(m: &CMat8) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            d = d.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    d
}

pub fn trace(m: &CMat8) -> Complex64 {
    (0..8).map(|i| m[i][i]).sum()
}

/// Smallest eigenvalue of a Hermitian 8×8 matrix via the real 16×16
/// embedding `[[A, -B], [B, A]]` (every eigenvalue appears twice).
pub fn min_hermitian_eigenvalue(m: &CMat8) -> f64 {
    let mut e = [[0.0; 16]; 16];
    for i in 0..8 {
        for j in 0..8 {
            // Symmetrize so tiny Hermiticity errors do not bias the solver.
            let z = 0.5 * (m[i][j] + m[j][i].conj());
            e[i][j] = z.re;
            e[i + 8][j + 8] = z.re;
            e[i][j + 8] = -z.im;
            e[i + 8][j] = z.im;
        }
    }
    jacobi_eigen(e, 100).values[15]
}

fn check_finite(m: &CMat8) -> Result<(), PhysicalityError> {
    if m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(PhysicalityError::NonFinite)
    }
}

fn check_hermitian_unit_trace(m: &CMat8) -> Result<(), PhysicalityError> {
    check_finite(m)?;
    let deviation = hermiticity_deviation(m);
    if deviation > HERMITIAN_TOL {
        return Err(PhysicalityError::NotHermitian { deviation });
    }
    let tr = trace(m);
    if (tr - ONE).norm() > TRACE_TOL {
        return Err(PhysicalityError::NotUnitTrace { re: tr.re, im: tr.im });
    }
    Ok(())
}

/// A physical three-qubit density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeQubitState {
    matrix: CMat8,
}

impl ThreeQubitState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMat8) -> Result<Self, PhysicalityError> {
        check_hermitian_unit_trace(&matrix)?;
        let min_eigenvalue = min_hermitian_eigenvalue(&matrix);
        if min_eigenvalue < -PSD_TOL {
            return Err(PhysicalityError::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn pure(amplitudes: &[Complex64; 8]) -> Result<Self, PhysicalityError> {
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let mut m = [[ZERO; 8]; 8];
        for i in 0..8 {
            for j in 0..8 {
                m[i][j] = amplitudes[i] * amplitudes[j].conj() / n;
            }
        }
        Self::new(m)
    }

    pub fn maximally_mixed() -> Self {
        let mut m = [[ZERO; 8]; 8];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Complex64::new(0.125, 0.0);
        }
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &CMat8 {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.matrix)
    }

    /// `U ρ U†` with `U = U_A ⊗ U_B ⊗ U_C`.
    pub fn apply_local_unitaries(&self, us: &[CMat2; 3]) -> Result<Self, PhysicalityError> {
        let u = kron3(&us[0], &us[1], &us[2]);
        let mut tmp = [[ZERO; 8]; 8];
        for i in 0..8 {
            for j in 0..8 {
                tmp[i][j] = (0..8).map(|k| u[i][k] * self.matrix[k][j]).sum();
            }
        }
        let mut out = [[ZERO; 8]; 8];
        for i in 0..8 {
            for j in 0..8 {
                out[i][j] = (0..8).map(|k| tmp[i][k] * u[j][k].conj()).sum();
            }
        }
        // Re-Hermitize to keep rounding below the validation tolerance.
        for i in 0..8 {
            for j in i..8 {
                let z = 0.5 * (out[i][j] + out[j][i].conj());
                out[i][j] = z;
                out[j][i] = z.conj();
            }
        }
        Self::new(out)
    }
}

pub fn kron3(a: &CMat2, b: &CMat2, c: &CMat2) -> CMat8 {
    let mut m = [[ZERO; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            m[i][j] = a[i >> 2][j >> 2] * b[(i >> 1) & 1][(j >> 1) & 1] * c[i & 1][j & 1];
        }
    }
    m
}

/// Rotation `O` with `U σ·n U† = σ·(O n)`: `O_ij = ½ Tr[σ_i U σ_j U†]`.
pub fn bloch_rotation(u: &CMat2) -> Mat3 {
    let mut o = [[0.0; 3]; 3];
    for j in 0..3 {
        let s = pauli(j + 1);
        let mut usu = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        usu[r][c] += u[r][k] * s[k][l] * u[c][l].conj();
                    }
                }
            }
        }
        for i in 0..3 {
            let si = pauli(i + 1);
            let mut tr = ZERO;
            for r in 0..2 {
                for c in 0..2 {
                    tr += si[r][c] * usu[c][r];
                }
            }
            o[i][j] = 0.5 * tr.re;
        }
    }
    o
}

/// The full Pauli-coefficient family of a three-qubit operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationDecomposition {
    /// `lambda[μ][ν][γ] = Tr[(σ_μ⊗σ_ν⊗σ_γ) ρ]`, index 0 is the identity.
    pub lambda: [[[f64; 4]; 4]; 4],
}

impl CorrelationDecomposition {
    /// Coefficients of a state with maximally mixed marginals, no bipartite
    /// correlations and tripartite correlations `t`.
    pub fn from_t_matrix(t: &Mat3x9) -> Self {
        let mut lambda = [[[0.0; 4]; 4]; 4];
        lambda[0][0][0] = 1.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    lambda[i + 1][j + 1][k + 1] = t[i][3 * j + k];
                }
            }
        }
        Self { lambda }
    }

    /// Local Bloch vector `l` of the first party.
    pub fn bloch_a(&self) -> [f64; 3] {
        core::array::from_fn(|i| self.lambda[i + 1][0][0])
    }

    pub fn bloch_b(&self) -> [f64; 3] {
        core::array::from_fn(|j| self.lambda[0][j + 1][0])
    }

    pub fn bloch_c(&self) -> [f64; 3] {
        core::array::from_fn(|k| self.lambda[0][0][k + 1])
    }

    /// First-second party correlations `Θ_ij`.
    pub fn theta_mat(&self) -> Mat3 {
        core::array::from_fn(|i| core::array::from_fn(|j| self.lambda[i + 1][j + 1][0]))
    }

    /// First-third party correlations `Φ_ik`.
    pub fn phi_mat(&self) -> Mat3 {
        core::array::from_fn(|i| core::array::from_fn(|k| self.lambda[i + 1][0][k + 1]))
    }

    /// Second-third party correlations `Ω_jk`.
    pub fn omega_mat(&self) -> Mat3 {
        core::array::from_fn(|j| core::array::from_fn(|k| self.lambda[0][j + 1][k + 1]))
    }

    pub fn t_tensor(&self) -> [[[f64; 3]; 3]; 3] {
        core::array::from_fn(|i| core::array::from_fn(|j| core::array::from_fn(|k| self.lambda[i + 1][j + 1][k + 1])))
    }

    /// `T` as a 3×9 matrix, column `3j + k`.
    pub fn t_matrix(&self) -> Mat3x9 {
        core::array::from_fn(|i| core::array::from_fn(|c| self.lambda[i + 1][c / 3 + 1][c % 3 + 1]))
    }
}

fn decompose_unchecked(m: &CMat8) -> CorrelationDecomposition {
    let mut lambda = [[[0.0; 4]; 4]; 4];
    for (mu, plane) in lambda.iter_mut().enumerate() {
        for (nu, row) in plane.iter_mut().enumerate() {
            for (ga, out) in row.iter_mut().enumerate() {
                let mut acc = ZERO;
                pauli_string_entries(mu, nu, ga, |r, c, v| acc += v * m[c][r]);
                *out = acc.re;
            }
        }
    }
    CorrelationDecomposition { lambda }
}

pub fn decompose(state: &ThreeQubitState) -> CorrelationDecomposition {
    decompose_unchecked(&state.matrix)
}

/// Decomposes any Hermitian unit-trace operator, positive or not.
pub fn decompose_matrix(m: &CMat8) -> Result<CorrelationDecomposition, PhysicalityError> {
    check_hermitian_unit_trace(m)?;
    Ok(decompose_unchecked(m))
}

/// Operator rebuilt from Pauli coefficients, with its smallest eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub matrix: CMat8,
    pub min_eigenvalue: f64,
}

impl Reconstruction {
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue >= -PSD_TOL
    }

    pub fn into_state(self) -> Result<ThreeQubitState, PhysicalityError> {
        ThreeQubitState::new(self.matrix)
    }
}

/// `(1/8) Σ Λ_{μνγ} σ_μ⊗σ_ν⊗σ_γ`. Negative operators are returned, not
/// rejected; see [`Reconstruction::is_physical`].
pub fn reconstruct(decomp: &CorrelationDecomposition) -> Reconstruction {
    let mut m = [[ZERO; 8]; 8];
    for (mu, plane) in decomp.lambda.iter().enumerate() {
        for (nu, row) in plane.iter().enumerate() {
            for (ga, &l) in row.iter().enumerate() {
                if l != 0.0 {
                    pauli_string_entries(mu, nu, ga, |r, c, v| m[r][c] += v * (l / 8.0));
                }
            }
        }
    }
    let min_eigenvalue = min_hermitian_eigenvalue(&m);
    Reconstruction { matrix: m, min_eigenvalue }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz() -> ThreeQubitState {
        let mut a = [ZERO; 8];
        a[0] = ONE;
        a[7] = ONE;
        ThreeQubitState::pure(&a).unwrap()
    }

    /// Literal `Tr[(σ⊗σ⊗σ) ρ]` by dense matrix products.
    fn dense_lambda(rho: &CMat8, mu: usize, nu: usize, ga: usize) -> f64 {
        let p = kron3(&pauli(mu), &pauli(nu), &pauli(ga));
        let mut tr = ZERO;
        for i in 0..8 {
            for k in 0..8 {
                tr += p[i][k] * rho[k][i];
            }
        }
        tr.re
    }

    #[test]
    fn maximally_mixed_has_only_identity_coefficient() {
        let d = decompose(&ThreeQubitState::maximally_mixed());
        for mu in 0..4 {
            for nu in 0..4 {
                for ga in 0..4 {
                    let expect = if mu + nu + ga == 0 { 1.0 } else { 0.0 };
                    assert_eq!(d.lambda[mu][nu][ga], expect);
                }
            }
        }
    }

    #[test]
    fn ghz_coefficients() {
        let d = decompose(&ghz());
        let t = d.t_tensor();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let expect = match (i, j, k) {
                        (0, 0, 0) => 1.0,
                        (0, 1, 1) | (1, 0, 1) | (1, 1, 0) => -1.0,
                        _ => 0.0,
                    };
                    assert!((t[i][j][k] - expect).abs() < 1e-15, "T[{i}{j}{k}]");
                }
            }
        }
        for m in [d.theta_mat(), d.phi_mat(), d.omega_mat()] {
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == 2 && j == 2 { 1.0 } else { 0.0 };
                    assert!((m[i][j] - expect).abs() < 1e-15);
                }
            }
        }
        assert_eq!(d.bloch_a(), [0.0; 3]);
        assert_eq!(d.bloch_b(), [0.0; 3]);
        assert_eq!(d.bloch_c(), [0.0; 3]);
    }

    #[test]
    fn product_zero_state() {
        let mut a = [ZERO; 8];
        a[0] = ONE;
        let d = decompose(&ThreeQubitState::pure(&a).unwrap());
        assert_eq!(d.bloch_a(), [0.0, 0.0, 1.0]);
        assert_eq!(d.bloch_b(), [0.0, 0.0, 1.0]);
        assert_eq!(d.bloch_c(), [0.0, 0.0, 1.0]);
        let t = d.t_matrix();
        for i in 0..3 {
            for c in 0..9 {
                assert_eq!(t[i][c], if i == 2 && c == 8 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn sparse_traces_match_dense_products() {
        let rho = ghz();
        let d = decompose(&rho);
        for mu in 0..4 {
            for nu in 0..4 {
                for ga in 0..4 {
                    let dense = dense_lambda(rho.matrix(), mu, nu, ga);
                    assert!((d.lambda[mu][nu][ga] - dense).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn identity_coefficients_reconstruct_maximally_mixed() {
        let mut lambda = [[[0.0; 4]; 4]; 4];
        lambda[0][0][0] = 1.0;
        let r = reconstruct(&CorrelationDecomposition { lambda });
        assert_eq!(r.matrix, *ThreeQubitState::maximally_mixed().matrix());
        assert!((r.min_eigenvalue - 0.125).abs() < 1e-14);
    }

    #[test]
    fn ghz_round_trip() {
        let rho = ghz();
        let r = reconstruct(&decompose(&rho));
        for i in 0..8 {
            for j in 0..8 {
                assert!((r.matrix[i][j] - rho.matrix()[i][j]).norm() < 1e-12);
            }
        }
        assert!(r.is_physical());
    }

    #[test]
    fn diagonal_t_state_is_flagged_unphysical() {
        let mut t = [[0.0; 9]; 3];
        t[0][0] = 1.0;
        t[1][4] = 1.0;
        t[2][8] = 1.0;
        let r = reconstruct(&CorrelationDecomposition::from_t_matrix(&t));
        assert!(hermiticity_deviation(&r.matrix) < 1e-15);
        assert!((trace(&r.matrix) - ONE).norm() < 1e-15);
        // XXX, YYY, ZZZ pairwise anticommute, so their sum squares to 3·I.
        let expect = (1.0 - libm::sqrt(3.0)) / 8.0;
        assert!((r.min_eigenvalue - expect).abs() < 1e-12, "{}", r.min_eigenvalue);
        assert!(!r.is_physical());
        assert!(matches!(r.into_state(), Err(PhysicalityError::NotPositive { .. })));
    }

    #[test]
    fn non_hermitian_rejected_by_name() {
        let mut m = *ThreeQubitState::maximally_mixed().matrix();
        m[0][1] = Complex64::new(0.1, 0.0);
        assert!(matches!(decompose_matrix(&m), Err(PhysicalityError::NotHermitian { .. })));
        let mut m = *ThreeQubitState::maximally_mixed().matrix();
        m[0][0] = Complex64::new(0.5, 0.0);
        assert!(matches!(decompose_matrix(&m), Err(PhysicalityError::NotUnitTrace { .. })));
    }

    #[test]
    fn bloch_rotation_of_pauli_x_flips_y_and_z() {
        let o = bloch_rotation(&pauli(1));
        let expect = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((o[i][j] - expect[i][j]).abs() < 1e-15);
            }
        }
    }
}
