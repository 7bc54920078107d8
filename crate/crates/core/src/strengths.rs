//! Measurement strengths and relative angles shared by both bound families.

/// Relative angles `(θ_x, θ_y, θ_z)` between each party's two directions.
pub type Angles = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum StrengthError {
    #[error("strength {name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("angle {name} = {value} outside [0, pi]")]
    AngleOutOfRange { name: &'static str, value: f64 },
}

pub const STRENGTH_NAMES: [&str; 6] = ["rx", "rxp", "ry", "ryp", "rz", "rzp"];
pub const ANGLE_NAMES: [&str; 3] = ["theta_x", "theta_y", "theta_z"];

/// Strengths of X, X', Y, Y', Z, Z', each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrengthSextuple {
    pub rx: f64,
    pub rxp: f64,
    pub ry: f64,
    pub ryp: f64,
    pub rz: f64,
    pub rzp: f64,
}

impl StrengthSextuple {
    pub fn new(rx: f64, rxp: f64, ry: f64, ryp: f64, rz: f64, rzp: f64) -> Result<Self, StrengthError> {
        Self::from_array([rx, rxp, ry, ryp, rz, rzp])
    }

    pub fn from_array(a: [f64; 6]) -> Result<Self, StrengthError> {
        for (name, &value) in STRENGTH_NAMES.iter().zip(&a) {
            if !(0.0..=1.0).contains(&value) {
                return Err(StrengthError::OutOfRange { name, value });
            }
        }
        Ok(Self { rx: a[0], rxp: a[1], ry: a[2], ryp: a[3], rz: a[4], rzp: a[5] })
    }

    /// Same strength on every observable.
    pub fn uniform(r: f64) -> Result<Self, StrengthError> {
        Self::from_array([r; 6])
    }

    /// One strength per party, shared by both of its observables.
    pub fn per_party(rx: f64, ry: f64, rz: f64) -> Result<Self, StrengthError> {
        Self::new(rx, rx, ry, ry, rz, rz)
    }

    pub fn sharp() -> Self {
        Self { rx: 1.0, rxp: 1.0, ry: 1.0, ryp: 1.0, rz: 1.0, rzp: 1.0 }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.rx, self.rxp, self.ry, self.ryp, self.rz, self.rzp]
    }

    /// Both observables of every party share a strength.
    pub fn equal_per_party(&self) -> bool {
        self.rx == self.rxp && self.ry == self.ryp && self.rz == self.rzp
    }
}

pub fn validate_angles(a: &Angles) -> Result<(), StrengthError> {
    for (name, &value) in ANGLE_NAMES.iter().zip(a) {
        if !(0.0..=core::f64::consts::PI).contains(&value) {
            return Err(StrengthError::AngleOutOfRange { name, value });
        }
    }
    Ok(())
}

/// `acos` with the argument clamped to `[-1, 1]`.
pub fn clamped_acos(c: f64) -> f64 {
    libm::acos(c.clamp(-1.0, 1.0))
}

/// `asin` with the argument clamped to `[-1, 1]`.
pub fn clamped_asin(s: f64) -> f64 {
    libm::asin(s.clamp(-1.0, 1.0))
}
