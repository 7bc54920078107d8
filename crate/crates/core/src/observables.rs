//! Dichotomic qubit observables `𝓑·I + 𝓡·σ·n` and exact expectation values
//! of triple products, the Mermin operator and the Svetlichny operator.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::smallmat::{dot, norm, Mat3};
use crate::strengths::{clamped_acos, Angles};
use crate::tensor_core::{pauli, CMat2, CorrelationDecomposition};

/// Slack on `𝓡 + |𝓑| ≤ 1` and on unit directions.
pub const OBSERVABLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ObservableError {
    #[error("strength {0} is negative or not finite")]
    BadStrength(f64),
    #[error("strength {strength} plus |bias| {bias} exceeds 1")]
    PositivityViolated { strength: f64, bias: f64 },
    #[error("direction has norm {0}, expected 1")]
    NotUnit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorKind {
    Mermin,
    Svetlichny,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Mermin => "mermin",
            OperatorKind::Svetlichny => "svetlichny",
        }
    }

    /// Largest value reachable by local hidden variable models.
    pub fn classical_limit(self) -> f64 {
        match self {
            OperatorKind::Mermin => crate::MERMIN_CLASSICAL,
            OperatorKind::Svetlichny => crate::SVETLICHNY_CLASSICAL,
        }
    }

    /// Signed products making up the operator; index 1 selects the primed
    /// observable of that party.
    pub fn terms(self) -> &'static [(f64, [usize; 3])] {
        match self {
            OperatorKind::Mermin => &MERMIN_TERMS,
            OperatorKind::Svetlichny => &SVETLICHNY_TERMS,
        }
    }
}

/// `XYZ' + XY'Z + X'YZ - X'Y'Z'`.
const MERMIN_TERMS: [(f64, [usize; 3]); 4] =
    [(1.0, [0, 0, 1]), (1.0, [0, 1, 0]), (1.0, [1, 0, 0]), (-1.0, [1, 1, 1])];

/// Mermin minus its primed partner `X'Y'Z + X'YZ' + XY'Z' - XYZ`.
const SVETLICHNY_TERMS: [(f64, [usize; 3]); 8] = [
    (1.0, [0, 0, 1]),
    (1.0, [0, 1, 0]),
    (1.0, [1, 0, 0]),
    (-1.0, [1, 1, 1]),
    (-1.0, [1, 1, 0]),
    (-1.0, [1, 0, 1]),
    (-1.0, [0, 1, 1]),
    (1.0, [0, 0, 0]),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralObservable {
    pub bias: f64,
    pub strength: f64,
    pub direction: [f64; 3],
}

impl GeneralObservable {
    pub fn new(bias: f64, strength: f64, direction: [f64; 3]) -> Result<Self, ObservableError> {
        if !(strength >= 0.0 && strength.is_finite()) {
            return Err(ObservableError::BadStrength(strength));
        }
        if !bias.is_finite() || strength + libm::fabs(bias) > 1.0 + OBSERVABLE_TOL {
            return Err(ObservableError::PositivityViolated { strength, bias });
        }
        let n = norm(&direction);
        if !(libm::fabs(n - 1.0) <= OBSERVABLE_TOL) {
            return Err(ObservableError::NotUnit(n));
        }
        Ok(Self { bias, strength, direction })
    }

    pub fn unbiased(strength: f64, direction: [f64; 3]) -> Result<Self, ObservableError> {
        Self::new(0.0, strength, direction)
    }

    /// Projective observable `σ·n`.
    pub fn sharp(direction: [f64; 3]) -> Result<Self, ObservableError> {
        Self::new(0.0, 1.0, direction)
    }

    /// The 2×2 operator `𝓑·I + 𝓡·σ·n`.
    pub fn matrix(&self) -> CMat2 {
        let mut m = pauli(0).map(|r| r.map(|z| z * self.bias));
        for k in 0..3 {
            let s = pauli(k + 1);
            for r in 0..2 {
                for c in 0..2 {
                    m[r][c] += s[r][c] * Complex64::new(self.strength * self.direction[k], 0.0);
                }
            }
        }
        m
    }
}

/// Six observables X, X', Y, Y', Z, Z' with their relative angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    observables: [GeneralObservable; 6],
    angles: Angles,
}

impl MeasurementSetting {
    pub fn new(observables: [GeneralObservable; 6]) -> Self {
        let angles = core::array::from_fn(|p| {
            clamped_acos(dot(&observables[2 * p].direction, &observables[2 * p + 1].direction))
        });
        Self { observables, angles }
    }

    /// Unbiased observables with the given strengths (X, X', Y, Y', Z, Z' order).
    pub fn unbiased(strengths: [f64; 6], directions: [[f64; 3]; 6]) -> Result<Self, ObservableError> {
        Self::with_biases(strengths, [0.0; 6], directions)
    }

    pub fn with_biases(
        strengths: [f64; 6],
        biases: [f64; 6],
        directions: [[f64; 3]; 6],
    ) -> Result<Self, ObservableError> {
        let mut obs = [GeneralObservable { bias: 0.0, strength: 0.0, direction: [0.0, 0.0, 1.0] }; 6];
        for i in 0..6 {
            obs[i] = GeneralObservable::new(biases[i], strengths[i], directions[i])?;
        }
        Ok(Self::new(obs))
    }

    pub fn observables(&self) -> &[GeneralObservable; 6] {
        &self.observables
    }

    /// Observable of `party` (0, 1, 2); `primed` picks X' over X etc.
    pub fn get(&self, party: usize, primed: usize) -> &GeneralObservable {
        &self.observables[2 * party + primed]
    }

    /// `(θ_x, θ_y, θ_z)` recomputed from the directions at construction.
    pub fn angles(&self) -> Angles {
        self.angles
    }

    pub fn strengths(&self) -> [f64; 6] {
        self.observables.map(|o| o.strength)
    }

    pub fn biases(&self) -> [f64; 6] {
        self.observables.map(|o| o.bias)
    }

    pub fn directions(&self) -> [[f64; 3]; 6] {
        self.observables.map(|o| o.direction)
    }
}

fn bilinear(m: &Mat3, u: &[f64; 3], v: &[f64; 3]) -> f64 {
    (0..3).map(|i| u[i] * dot(&m[i], v)).sum()
}

/// `xᵀ T (y ⊗ z)`.
pub fn trilinear(t: &[[[f64; 3]; 3]; 3], x: &[f64; 3], y: &[f64; 3], z: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                s += t[i][j][k] * x[i] * y[j] * z[k];
            }
        }
    }
    s
}

/// `⟨X⊗Y⊗Z⟩` through the eight-term expansion in biases, strengths and the
/// Pauli-coefficient blocks.
pub fn triple_expectation(
    d: &CorrelationDecomposition,
    x: &GeneralObservable,
    y: &GeneralObservable,
    z: &GeneralObservable,
) -> f64 {
    let (bx, by, bz) = (x.bias, y.bias, z.bias);
    let (rx, ry, rz) = (x.strength, y.strength, z.strength);
    let (xd, yd, zd) = (&x.direction, &y.direction, &z.direction);
    bx * by * bz
        + by * bz * rx * dot(&d.bloch_a(), xd)
        + bx * bz * ry * dot(&d.bloch_b(), yd)
        + bx * by * rz * dot(&d.bloch_c(), zd)
        + bz * rx * ry * bilinear(&d.theta_mat(), xd, yd)
        + by * rx * rz * bilinear(&d.phi_mat(), xd, zd)
        + bx * ry * rz * bilinear(&d.omega_mat(), yd, zd)
        + rx * ry * rz * trilinear(&d.t_tensor(), xd, yd, zd)
}

fn signed_sum(d: &CorrelationDecomposition, setting: &MeasurementSetting, terms: &[(f64, [usize; 3])]) -> f64 {
    terms
        .iter()
        .map(|(c, [a, b, g])| c * triple_expectation(d, setting.get(0, *a), setting.get(1, *b), setting.get(2, *g)))
        .sum()
}

pub fn operator_expectation(d: &CorrelationDecomposition, setting: &MeasurementSetting, kind: OperatorKind) -> f64 {
    signed_sum(d, setting, kind.terms())
}

pub fn mermin_expectation(d: &CorrelationDecomposition, setting: &MeasurementSetting) -> f64 {
    operator_expectation(d, setting, OperatorKind::Mermin)
}

pub fn svetlichny_expectation(d: &CorrelationDecomposition, setting: &MeasurementSetting) -> f64 {
    operator_expectation(d, setting, OperatorKind::Svetlichny)
}

/// One operator obtained by exchanging primed and unprimed observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantValue {
    /// Which parties had their two observables exchanged.
    pub swaps: [bool; 3],
    pub value: f64,
}

/// Coefficient of each of the eight `(a, b, c)` products after the swap,
/// normalized so the first nonzero entry is positive.
fn canonical_coefficients(kind: OperatorKind, swaps: [bool; 3]) -> [i8; 8] {
    let mut c = [0i8; 8];
    for (coef, idx) in kind.terms() {
        let i: [usize; 3] = core::array::from_fn(|p| idx[p] ^ usize::from(swaps[p]));
        c[4 * i[0] + 2 * i[1] + i[2]] += if *coef > 0.0 { 1 } else { -1 };
    }
    if c.iter().find(|v| **v != 0).is_some_and(|v| *v < 0) {
        c = c.map(|v| -v);
    }
    c
}

/// The operator under every per-party exchange pattern, deduplicated by
/// operator equality up to an overall sign. Mermin yields eight distinct
/// operators, Svetlichny four.
pub fn variant_expectations(
    d: &CorrelationDecomposition,
    setting: &MeasurementSetting,
    kind: OperatorKind,
) -> Vec<VariantValue> {
    let mut seen: Vec<[i8; 8]> = Vec::new();
    let mut out = Vec::new();
    for bits in 0..8u8 {
        let swaps = [bits & 4 != 0, bits & 2 != 0, bits & 1 != 0];
        let key = canonical_coefficients(kind, swaps);
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let terms: Vec<(f64, [usize; 3])> = kind
            .terms()
            .iter()
            .map(|(c, idx)| (*c, core::array::from_fn(|p| idx[p] ^ usize::from(swaps[p]))))
            .collect();
        out.push(VariantValue { swaps, value: signed_sum(d, setting, &terms) });
    }
    out
}
