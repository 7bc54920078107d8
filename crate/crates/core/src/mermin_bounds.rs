//! Closed-form upper bounds on the Mermin operator for unsharp observables.

use libm::{cos, sin, sqrt};

use crate::report::{BoundError, BoundReport, Criterion, CriterionValue};
use crate::smallmat::{singular_values_3x9, Mat3x9};
use crate::strengths::{clamped_acos, clamped_asin, validate_angles, Angles, StrengthSextuple};
use crate::tensor_core::CorrelationDecomposition;
use crate::MERMIN_CLASSICAL;

/// Negative squares above this are rounding noise and get clamped to zero.
pub const CONSISTENCY_TOL: f64 = 1e-10;

/// Largest two singular values of the correlation matrix.
pub fn top_two(t: &Mat3x9) -> (f64, f64) {
    let sv = singular_values_3x9(t).values;
    (sv[0], sv[1])
}

pub(crate) fn clamp_square(quantity: &'static str, value: f64) -> Result<f64, BoundError> {
    if value < -CONSISTENCY_TOL || value.is_nan() {
        return Err(BoundError::Consistency { quantity, value });
    }
    Ok(value.max(0.0))
}

/// Scalar prefactors of the Mermin-reduced matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub fn v_coefficients(s: &StrengthSextuple) -> VCoefficients {
    let StrengthSextuple { rx, rxp, ry, ryp, rz, rzp } = *s;
    VCoefficients {
        a: rx * ry * rzp + rx * ryp * rz + rxp * ry * rz - rxp * ryp * rzp,
        b: -rx * ry * rzp + rx * ryp * rz + rxp * ry * rz + rxp * ryp * rzp,
        c: rx * ry * rzp + rx * ryp * rz - rxp * ry * rz + rxp * ryp * rzp,
        d: rx * ry * rzp - rx * ryp * rz + rxp * ry * rz + rxp * ryp * rzp,
    }
}

pub(crate) fn half_angles(angles: &Angles) -> [(f64, f64); 3] {
    angles.map(|t| (cos(t / 2.0), sin(t / 2.0)))
}

/// The 3x9 matrix whose singular values pair with those of the correlation
/// matrix in the Mermin bound. Only columns 0, 1, 3, 4 of rows 0 and 1 are nonzero.
pub fn build_v_matrix(s: &StrengthSextuple, angles: &Angles) -> Mat3x9 {
    let VCoefficients { a, b, c, d } = v_coefficients(s);
    let [(cx, sx), (cy, sy), (cz, sz)] = half_angles(angles);
    let mut v = [[0.0; 9]; 3];
    v[0][0] = a * cx * cy * cz;
    v[0][1] = b * cx * cy * sz;
    v[0][3] = d * cx * sy * cz;
    v[0][4] = -c * cx * sy * sz;
    v[1][0] = c * sx * cy * cz;
    v[1][1] = -d * sx * cy * sz;
    v[1][3] = -b * sx * sy * cz;
    v[1][4] = -a * sx * sy * sz;
    v
}

/// Strength-only coefficients entering `I_±`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MerminQuantities {
    pub i0: f64,
    pub i_xy_z: f64,
    pub i_xz_y: f64,
    pub i_yz_x: f64,
    pub i_yz0: f64,
    pub i_zy0: f64,
    pub i1: f64,
}

impl MerminQuantities {
    pub fn new(s: &StrengthSextuple) -> Self {
        let StrengthSextuple { rx, rxp, ry, ryp, rz, rzp } = *s;
        let (rx2, rxp2, ry2, ryp2, rz2, rzp2) = (rx * rx, rxp * rxp, ry * ry, ryp * ryp, rz * rz, rzp * rzp);
        Self {
            i0: rx2 * (ry2 * rzp2 + ryp2 * rz2) + rxp2 * (ry2 * rz2 + ryp2 * rzp2),
            i_xy_z: rx * rxp * ry * ryp * (rz2 - rzp2),
            i_xz_y: rx * rxp * rz * rzp * (ry2 - ryp2),
            i_yz_x: ry * ryp * rz * rzp * (rx2 - rxp2),
            i_yz0: ry2 * ryp2 * (rz2 * rz2 + rzp2 * rzp2),
            i_zy0: rz2 * rzp2 * (ry2 * ry2 + ryp2 * ryp2),
            i1: ry * ryp * rz * rzp,
        }
    }
}

/// `sqrt(I_yz0 sin²θy + I_zy0 sin²θz + I1²(1 - cos2θy cos2θz))`, shared with the
/// Svetlichny closed form.
pub(crate) fn cross_root(q: &MerminQuantities, angles: &Angles) -> Result<f64, BoundError> {
    let (sy, sz) = (sin(angles[1]), sin(angles[2]));
    let inner = q.i_yz0 * sy * sy
        + q.i_zy0 * sz * sz
        + q.i1 * q.i1 * (1.0 - cos(2.0 * angles[1]) * cos(2.0 * angles[2]));
    Ok(sqrt(clamp_square("cross radicand", inner)?))
}

fn i_from_linear(q: &MerminQuantities, s: &StrengthSextuple, lin: f64, angles: &Angles) -> Result<(f64, f64), BoundError> {
    let rad = s.rx * s.rxp * sin(angles[0]) * cross_root(q, angles)?;
    let plus = clamp_square("I+^2", q.i0 + 2.0 * (lin + rad))?;
    let minus = clamp_square("I-^2", q.i0 + 2.0 * (lin - rad))?;
    Ok((sqrt(plus), sqrt(minus)))
}

/// `(I_+, I_-)`: sum and difference of the two nonzero singular values of the
/// matrix from [`build_v_matrix`].
pub fn i_plus_minus(s: &StrengthSextuple, angles: &Angles) -> Result<(f64, f64), BoundError> {
    let q = MerminQuantities::new(s);
    let (cx, cy, cz) = (cos(angles[0]), cos(angles[1]), cos(angles[2]));
    let lin = q.i_xy_z * cx * cy + q.i_xz_y * cx * cz + q.i_yz_x * cy * cz;
    i_from_linear(&q, s, lin, angles)
}

fn pair_bound(s1: f64, s2: f64, plus: f64, minus: f64) -> f64 {
    0.5 * (s1 + s2) * plus + 0.5 * (s1 - s2) * minus
}

/// Bound for unbiased observables at fixed relative angles.
pub fn mermin_bound_unbiased(t: &Mat3x9, s: &StrengthSextuple, angles: &Angles) -> Result<BoundReport, BoundError> {
    validate_angles(angles)?;
    let (s1, s2) = top_two(t);
    let (ip, im) = i_plus_minus(s, angles)?;
    Ok(BoundReport::new(Criterion::MerminUnbiased, pair_bound(s1, s2, ip, im)).with_angles(*angles))
}

/// Bound when each party's two observables share a strength, maximized over angles.
pub fn mermin_bound_equal_strengths(t: &Mat3x9, rx: f64, ry: f64, rz: f64) -> Result<BoundReport, BoundError> {
    StrengthSextuple::per_party(rx, ry, rz)?;
    let (s1, s2) = top_two(t);
    let n2 = s1 * s1 + s2 * s2;
    let theta_x = if n2 > 0.0 { clamped_asin(2.0 * s1 * s2 / n2) } else { core::f64::consts::FRAC_PI_2 };
    let half_pi = core::f64::consts::FRAC_PI_2;
    Ok(BoundReport::new(Criterion::MerminEqualStrengths, 2.0 * rx * ry * rz * sqrt(n2))
        .with_angles([theta_x, half_pi, half_pi])
        .with_note("one representative of a family of maximizing angles"))
}

/// Violation test at mutually orthogonal directions for every party.
pub fn mermin_sufficient_orthogonal(t: &Mat3x9, s: &StrengthSextuple) -> CriterionValue {
    let (s1, s2) = top_two(t);
    let StrengthSextuple { rx, rxp, ry, ryp, rz, rzp } = *s;
    let a = sqrt(ry * ry * rzp * rzp + ryp * ryp * rz * rz);
    let b = sqrt(ry * ry * rz * rz + ryp * ryp * rzp * rzp);
    let (big, small) = if rx * a >= rxp * b { (rx * a, rxp * b) } else { (rxp * b, rx * a) };
    let value = big * s1 + small * s2;
    CriterionValue { value, violated: value > MERMIN_CLASSICAL }
}

/// Angle-dependent bound covering every relabeling of primed and unprimed
/// observables.
pub fn mermin_six_variant_criterion(
    t: &Mat3x9,
    s: &StrengthSextuple,
    angles: &Angles,
) -> Result<CriterionValue, BoundError> {
    validate_angles(angles)?;
    let (s1, s2) = top_two(t);
    let q = MerminQuantities::new(s);
    let (cx, cy, cz) = (cos(angles[0]), cos(angles[1]), cos(angles[2]));
    let lin = (q.i_xy_z * cx * cy).abs() + (q.i_xz_y * cx * cz).abs() + (q.i_yz_x * cy * cz).abs();
    let (ip, im) = i_from_linear(&q, s, lin, angles)?;
    let value = pair_bound(s1, s2, ip, im);
    Ok(CriterionValue { value, violated: value > MERMIN_CLASSICAL })
}

/// Largest bias-only contribution `|K|` over bias signs saturating positivity.
pub fn k_max(s: &StrengthSextuple) -> f64 {
    let [x, xp, y, yp, z, zp] = s.as_array().map(|r| 1.0 - r);
    let first = x * (y * zp + yp * z) + xp * (y * z - yp * zp).abs();
    let second = x * (y * zp - yp * z).abs() + xp * (y * z + yp * zp);
    first.max(second)
}

/// Reference for [`k_max`]: enumerates all 64 sign patterns.
pub fn k_max_brute_force(s: &StrengthSextuple) -> f64 {
    let m = s.as_array().map(|r| 1.0 - r);
    (0..64u32)
        .map(|bits| {
            let b: [f64; 6] = core::array::from_fn(|i| if bits >> i & 1 == 1 { -m[i] } else { m[i] });
            let [bx, bxp, by, byp, bz, bzp] = b;
            (bx * (by * bzp + byp * bz) + bxp * (by * bz - byp * bzp)).abs()
        })
        .fold(0.0, f64::max)
}

/// Unbiased bound plus the largest bias contribution, valid on T-states.
pub fn mermin_bound_tstate(t: &Mat3x9, s: &StrengthSextuple, angles: &Angles) -> Result<BoundReport, BoundError> {
    let mut r = mermin_bound_unbiased(t, s, angles)?;
    r.bound_value += k_max(s);
    r.criterion = Criterion::MerminTState;
    Ok(r)
}

/// [`mermin_bound_tstate`] after checking that the decomposition has no local
/// or bipartite terms.
pub fn mermin_bound_tstate_checked(
    d: &CorrelationDecomposition,
    s: &StrengthSextuple,
    angles: &Angles,
) -> Result<BoundReport, BoundError> {
    if !crate::states::is_tstate(d, crate::states::TSTATE_TOL) {
        return Err(BoundError::NotTState);
    }
    mermin_bound_tstate(&d.t_matrix(), s, angles)
}

/// Strength interval where only biased observables can reach a violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasWindow {
    /// Lowest uniform strength at which biased observables can violate.
    pub r_biased: f64,
    /// Lowest uniform strength at which unbiased observables can violate.
    pub r_unbiased: f64,
}

impl BiasWindow {
    pub fn width(&self) -> f64 {
        self.r_unbiased - self.r_biased
    }
}

/// Window for a T-state whose unbiased quantum maximum is `p`.
pub fn mermin_biased_window(p: f64) -> Result<BiasWindow, BoundError> {
    if !(p > 1.0) {
        return Err(BoundError::NoWindow { p, min: 1.0 });
    }
    Ok(BiasWindow {
        r_unbiased: libm::cbrt(1.0 / p),
        r_biased: (-3.0 + sqrt(3.0) * sqrt(4.0 * p - 1.0)) / (2.0 * (p - 1.0)),
    })
}

/// Maximum over angles when only the first party's strengths differ
/// (`rx >= rxp`, shared `ry`, `rz`).
pub fn mermin_bound_x_asymmetric(
    t: &Mat3x9,
    rx: f64,
    rxp: f64,
    ry: f64,
    rz: f64,
    tstate: bool,
) -> Result<BoundReport, BoundError> {
    let s = StrengthSextuple::new(rx, rxp, ry, ry, rz, rz)?;
    if rx < rxp {
        return Err(BoundError::InvalidInput("x-asymmetric bounds need rx >= rxp"));
    }
    let (s1, s2) = top_two(t);
    let (a2, b2) = (rx * rx * s1 * s1, rxp * rxp * s2 * s2);
    let mut value = 2.0 * ry * rz * sqrt(a2 + b2);
    if tstate {
        value += k_max(&s);
    }
    let half_pi = core::f64::consts::FRAC_PI_2;
    let theta = if a2 + b2 > 0.0 { clamped_acos(sqrt(((a2 - b2) / (a2 + b2)).max(0.0))) } else { half_pi };
    Ok(BoundReport::new(Criterion::MerminXAsymmetric { tstate }, value).with_angles([half_pi, theta, theta]))
}

/// Maximum over angles when the top singular value is doubly degenerate
/// (`s1 = s2 = s_max`).
pub fn mermin_bound_degenerate_smax(s: &StrengthSextuple, s_max: f64, tstate: bool) -> Result<BoundReport, BoundError> {
    if !(s_max >= 0.0) {
        return Err(BoundError::InvalidInput("s_max must be non-negative"));
    }
    let q = MerminQuantities::new(s);
    let StrengthSextuple { rx, rxp, ry, ryp, rz, rzp } = *s;
    let gamma0 = rx * rxp * sqrt(q.i_yz0 + q.i_zy0);
    let mut value = s_max * sqrt(clamp_square("I0 + 2 Gamma0", q.i0 + 2.0 * gamma0)?);
    if tstate {
        value += k_max(s);
    }
    let theta_x = libm::atan2(rz * rzp * (ry * ry + ryp * ryp), ry * ryp * (rz * rz - rzp * rzp).abs());
    let theta_y = if rz >= rzp { 0.0 } else { core::f64::consts::PI };
    let angles = [theta_x, theta_y, core::f64::consts::FRAC_PI_2];
    Ok(BoundReport::new(Criterion::MerminDegenerate { tstate }, value).with_angles(angles))
}

/// Smallest compass-search step in [`grid_maximize`].
pub const REFINE_STEP: f64 = 1e-10;

/// Dense-grid maximization of an angle function over all three angles,
/// `n` points per axis on `[0, π]`, followed by a compass search from the
/// best grid point down to steps of [`REFINE_STEP`].
pub fn grid_maximize<F>(n: usize, mut f: F) -> Result<(f64, Angles), BoundError>
where
    F: FnMut(&Angles) -> Result<f64, BoundError>,
{
    if n < 2 {
        return Err(BoundError::InvalidInput("angle grid needs at least 2 points per axis"));
    }
    let step = core::f64::consts::PI / (n - 1) as f64;
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let a = [i as f64 * step, j as f64 * step, k as f64 * step];
                let v = f(&a)?;
                if v > best.0 {
                    best = (v, a);
                }
            }
        }
    }
    let mut h = step / 2.0;
    while h >= REFINE_STEP {
        let mut improved = false;
        for axis in 0..3 {
            for dir in [1.0, -1.0] {
                let mut a = best.1;
                a[axis] = (a[axis] + dir * h).clamp(0.0, core::f64::consts::PI);
                let v = f(&a)?;
                if v > best.0 {
                    best = (v, a);
                    improved = true;
                }
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    Ok(best)
}

/// Unbiased bound maximized over angles (grid plus local search).
pub fn mermin_bound_unbiased_max(t: &Mat3x9, s: &StrengthSextuple, n: usize) -> Result<BoundReport, BoundError> {
    let (s1, s2) = top_two(t);
    let (value, angles) = grid_maximize(n, |a| {
        let (ip, im) = i_plus_minus(s, a)?;
        Ok(pair_bound(s1, s2, ip, im))
    })?;
    Ok(BoundReport::new(Criterion::MerminUnbiased, value)
        .with_angles(angles)
        .with_note("maximized over angles by grid and local search"))
}
