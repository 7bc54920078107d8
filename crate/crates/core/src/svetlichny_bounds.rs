//! Closed-form upper bounds on the Svetlichny operator for unsharp observables.

use libm::{cos, sqrt};

use crate::mermin_bounds::{clamp_square, cross_root, grid_maximize, half_angles, top_two, BiasWindow, MerminQuantities};
use crate::report::{BoundError, BoundReport, Criterion, CriterionValue, XBranch};
use crate::smallmat::Mat3x9;
use crate::strengths::{clamped_acos, clamped_asin, validate_angles, Angles, StrengthSextuple};
use crate::tensor_core::CorrelationDecomposition;
use crate::SVETLICHNY_CLASSICAL;

/// Prefactors of the Svetlichny-reduced matrix; index 0 is the `+` sign, 1 the `-` sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvetlichnyCoefficients {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: [f64; 2],
}

pub fn w_coefficients(s: &StrengthSextuple) -> SvetlichnyCoefficients {
    let StrengthSextuple { rx, rxp, ry, ryp, rz, rzp } = *s;
    let (p, m) = (rz + rzp, rz - rzp);
    let pm = |u: f64, v: f64| [u * p + v * m, u * p - v * m];
    SvetlichnyCoefficients {
        a: pm(rx * ry - rxp * ryp, rx * ryp + rxp * ry),
        b: pm(rx * ryp + rxp * ry, rx * ry - rxp * ryp),
        c: pm(rx * ry + rxp * ryp, rx * ryp - rxp * ry),
        d: pm(rx * ryp - rxp * ry, rx * ry + rxp * ryp),
    }
}

/// The 3x9 matrix whose singular values pair with those of the correlation
/// matrix in the Svetlichny bound.
pub fn build_w_matrix(s: &StrengthSextuple, angles: &Angles) -> Mat3x9 {
    let SvetlichnyCoefficients { a, b, c, d } = w_coefficients(s);
    let [(cx, sx), (cy, sy), (cz, sz)] = half_angles(angles);
    let mut w = [[0.0; 9]; 3];
    w[0][0] = a[0] * cx * cy * cz;
    w[0][1] = b[0] * cx * cy * sz;
    w[0][3] = c[1] * cx * sy * cz;
    w[0][4] = -d[1] * cx * sy * sz;
    w[1][0] = c[0] * sx * cy * cz;
    w[1][1] = d[0] * sx * cy * sz;
    w[1][3] = a[1] * sx * sy * cz;
    w[1][4] = -b[1] * sx * sy * sz;
    w
}

/// Strength-only coefficients entering `J_±` beyond those shared with `I_±`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvetlichnyQuantities {
    pub j0: f64,
    pub j_yz_x: f64,
    pub j_xz_y: f64,
    pub j_xy_z: f64,
}

impl SvetlichnyQuantities {
    pub fn new(s: &StrengthSextuple) -> Self {
        let StrengthSextuple { rx, rxp, ry, ryp, rz, rzp } = *s;
        let (dx, dy, dz) = (rx * rx - rxp * rxp, ry * ry - ryp * ryp, rz * rz - rzp * rzp);
        Self {
            j0: (rx * rx + rxp * rxp) * (ry * ry + ryp * ryp) * (rz * rz + rzp * rzp),
            j_yz_x: rx * rxp * dy * dz,
            j_xz_y: ry * ryp * dx * dz,
            j_xy_z: rz * rzp * dx * dy,
        }
    }
}

fn j_from_linear(s: &StrengthSextuple, lin: f64, angles: &Angles) -> Result<(f64, f64), BoundError> {
    let mq = MerminQuantities::new(s);
    let q = SvetlichnyQuantities::new(s);
    let k = s.rx * s.rxp;
    let triple = 2.0 * mq.i1 * cos(angles[0]) * cos(angles[1]) * cos(angles[2]);
    let rad = libm::sin(angles[0]) * cross_root(&mq, angles)?;
    let plus = clamp_square("J+^2", q.j0 + 2.0 * (lin - 2.0 * k * (triple - rad)))?;
    let minus = clamp_square("J-^2", q.j0 + 2.0 * (lin - 2.0 * k * (triple + rad)))?;
    Ok((sqrt(plus), sqrt(minus)))
}

/// `(J_+, J_-)`: sum and difference of the two nonzero singular values of the
/// matrix from [`build_w_matrix`].
pub fn j_plus_minus(s: &StrengthSextuple, angles: &Angles) -> Result<(f64, f64), BoundError> {
    let q = SvetlichnyQuantities::new(s);
    let lin = q.j_yz_x * cos(angles[0]) + q.j_xz_y * cos(angles[1]) + q.j_xy_z * cos(angles[2]);
    j_from_linear(s, lin, angles)
}

fn pair_bound(s1: f64, s2: f64, plus: f64, minus: f64) -> f64 {
    0.5 * (s1 + s2) * plus + 0.5 * (s1 - s2) * minus
}

/// Bound for unbiased observables at fixed relative angles.
pub fn svetlichny_bound_unbiased(t: &Mat3x9, s: &StrengthSextuple, angles: &Angles) -> Result<BoundReport, BoundError> {
    validate_angles(angles)?;
    let (s1, s2) = top_two(t);
    let (jp, jm) = j_plus_minus(s, angles)?;
    Ok(BoundReport::new(Criterion::SvetlichnyUnbiased, pair_bound(s1, s2, jp, jm)).with_angles(*angles))
}

/// Closed form for per-party shared strengths. The returned angles reproduce
/// the value; when `s1 > s2` other angles can give a larger unbiased bound.
pub fn svetlichny_bound_equal_strengths(t: &Mat3x9, rx: f64, ry: f64, rz: f64) -> Result<BoundReport, BoundError> {
    StrengthSextuple::per_party(rx, ry, rz)?;
    let (s1, s2) = top_two(t);
    let n2 = s1 * s1 + s2 * s2;
    let half_pi = core::f64::consts::FRAC_PI_2;
    let theta = if n2 > 0.0 { clamped_acos(sqrt(((s1 * s1 - s2 * s2) / n2).max(0.0))) } else { half_pi };
    Ok(
        BoundReport::new(Criterion::SvetlichnyEqualStrengths, 2.0 * core::f64::consts::SQRT_2 * rx * ry * rz * sqrt(n2))
            .with_angles([half_pi, theta, theta])
            .with_note("value at the returned angles; not the maximum over angles when s1 > s2"),
    )
}

/// Violation test at mutually orthogonal directions for every party.
pub fn svetlichny_sufficient_orthogonal(t: &Mat3x9, s: &StrengthSextuple) -> CriterionValue {
    let (s1, s2) = top_two(t);
    let StrengthSextuple { rx, rxp, ry, ryp, rz, rzp } = *s;
    let q = SvetlichnyQuantities::new(s);
    let cross = 4.0 * rx * rxp
        * sqrt((ry * ry * rzp * rzp + ryp * ryp * rz * rz) * (ry * ry * rz * rz + ryp * ryp * rzp * rzp));
    let jp = sqrt(q.j0 + cross);
    let jm = sqrt((q.j0 - cross).max(0.0));
    let value = pair_bound(s1, s2, jp, jm);
    CriterionValue { value, violated: value > SVETLICHNY_CLASSICAL }
}

/// Angle-dependent bound covering every relabeling of primed and unprimed
/// observables.
pub fn svetlichny_six_variant_criterion(
    t: &Mat3x9,
    s: &StrengthSextuple,
    angles: &Angles,
) -> Result<CriterionValue, BoundError> {
    validate_angles(angles)?;
    let (s1, s2) = top_two(t);
    let q = SvetlichnyQuantities::new(s);
    let lin = (q.j_yz_x * cos(angles[0])).abs() + (q.j_xz_y * cos(angles[1])).abs() + (q.j_xy_z * cos(angles[2])).abs();
    let (jp, jm) = j_from_linear(s, lin, angles)?;
    let value = pair_bound(s1, s2, jp, jm);
    Ok(CriterionValue { value, violated: value > SVETLICHNY_CLASSICAL })
}

/// Largest bias-only contribution `|L|` over bias signs saturating positivity.
pub fn l_max(s: &StrengthSextuple) -> f64 {
    let [x, xp, y, yp, z, zp] = s.as_array().map(|r| 1.0 - r);
    let (sum, diff) = (z + zp, (z - zp).abs());
    let a1 = x * (y * sum + yp * diff) + xp * (y * diff - yp * sum).abs();
    let a2 = x * (y * sum - yp * diff).abs() + xp * (y * diff + yp * sum);
    let a3 = x * (y * diff + yp * sum) + xp * (y * sum - yp * diff).abs();
    let a4 = x * (y * diff - yp * sum).abs() + xp * (y * sum + yp * diff);
    a1.max(a2).max(a3).max(a4)
}

/// Reference for [`l_max`]: enumerates all 64 sign patterns.
pub fn l_max_brute_force(s: &StrengthSextuple) -> f64 {
    let m = s.as_array().map(|r| 1.0 - r);
    (0..64u32)
        .map(|bits| {
            let b: [f64; 6] = core::array::from_fn(|i| if bits >> i & 1 == 1 { -m[i] } else { m[i] });
            let [bx, bxp, by, byp, bz, bzp] = b;
            ((bx * by - bxp * byp) * (bz + bzp) + (bx * byp + bxp * by) * (bz - bzp)).abs()
        })
        .fold(0.0, f64::max)
}

/// Unbiased bound plus the largest bias contribution, valid on T-states.
pub fn svetlichny_bound_tstate(t: &Mat3x9, s: &StrengthSextuple, angles: &Angles) -> Result<BoundReport, BoundError> {
    let mut r = svetlichny_bound_unbiased(t, s, angles)?;
    r.bound_value += l_max(s);
    r.criterion = Criterion::SvetlichnyTState;
    Ok(r)
}

pub fn svetlichny_bound_tstate_checked(
    d: &CorrelationDecomposition,
    s: &StrengthSextuple,
    angles: &Angles,
) -> Result<BoundReport, BoundError> {
    if !crate::states::is_tstate(d, crate::states::TSTATE_TOL) {
        return Err(BoundError::NotTState);
    }
    svetlichny_bound_tstate(&d.t_matrix(), s, angles)
}

/// Window for a T-state whose unbiased Svetlichny maximum is `p`.
pub fn svetlichny_biased_window(p: f64) -> Result<BiasWindow, BoundError> {
    let root2 = core::f64::consts::SQRT_2;
    if !(p > root2) {
        return Err(BoundError::NoWindow { p, min: root2 });
    }
    Ok(BiasWindow {
        r_unbiased: libm::cbrt(root2 / p),
        r_biased: (-3.0 + sqrt(3.0) * sqrt(2.0 * root2 * p - 1.0)) / (root2 * (p - root2)),
    })
}

/// Bound for one of the three angle branches when only the first party's
/// strengths differ. `smax_degenerate` is the caller's assertion that
/// `s1 = s2`; the parallel branch is only valid under it.
pub fn svetlichny_bound_x_asymmetric(
    t: &Mat3x9,
    rx: f64,
    rxp: f64,
    ry: f64,
    rz: f64,
    branch: XBranch,
    smax_degenerate: bool,
    tstate: bool,
) -> Result<BoundReport, BoundError> {
    let s = StrengthSextuple::new(rx, rxp, ry, ry, rz, rz)?;
    let (s1, s2) = top_two(t);
    let half_pi = core::f64::consts::FRAC_PI_2;
    let nx = rx * rx + rxp * rxp;
    let (mut value, angles) = match branch {
        XBranch::Orthogonal => (2.0 * ry * rz * (rx * s1 + rxp * s2), [half_pi; 3]),
        XBranch::Mixed => {
            let n2 = s1 * s1 + s2 * s2;
            let prod = if n2 > 0.0 { 2.0 * s1 * s2 / n2 } else { 1.0 };
            let th = clamped_asin(sqrt(prod));
            (2.0 * ry * rz * sqrt(nx) * sqrt(n2), [half_pi, th, th])
        }
        XBranch::Parallel => {
            if !smax_degenerate {
                return Err(BoundError::InvalidInput("parallel branch requires a doubly degenerate top singular value"));
            }
            let prod = if nx > 0.0 { (rx * rx - rxp * rxp).abs() / nx } else { 0.0 };
            let th = clamped_asin(sqrt(prod));
            (2.0 * core::f64::consts::SQRT_2 * ry * rz * s1 * sqrt(nx), [0.0, th, th])
        }
    };
    if tstate {
        value += l_max(&s);
    }
    Ok(BoundReport::new(Criterion::SvetlichnyXAsymmetric { branch, tstate }, value).with_angles(angles))
}

/// Largest of the applicable x-asymmetric branches.
pub fn svetlichny_bound_x_asymmetric_best(
    t: &Mat3x9,
    rx: f64,
    rxp: f64,
    ry: f64,
    rz: f64,
    smax_degenerate: bool,
    tstate: bool,
) -> Result<BoundReport, BoundError> {
    let mut best: Option<BoundReport> = None;
    for branch in XBranch::ALL {
        if branch == XBranch::Parallel && !smax_degenerate {
            continue;
        }
        let r = svetlichny_bound_x_asymmetric(t, rx, rxp, ry, rz, branch, smax_degenerate, tstate)?;
        if best.as_ref().map_or(true, |b| r.bound_value > b.bound_value) {
            best = Some(r);
        }
    }
    let mut out = best.expect("at least one branch");
    out.derived_from = Some(out.criterion);
    out.criterion = Criterion::SvetlichnyXAsymmetricBest { tstate };
    Ok(out)
}

/// Maximum over angles when the top singular value is doubly degenerate.
pub fn svetlichny_bound_degenerate_smax(s: &StrengthSextuple, s_max: f64, tstate: bool) -> Result<BoundReport, BoundError> {
    if !(s_max >= 0.0) {
        return Err(BoundError::InvalidInput("s_max must be non-negative"));
    }
    let mq = MerminQuantities::new(s);
    let q = SvetlichnyQuantities::new(s);
    let StrengthSextuple { rx, rxp, ry, ryp, rz, rzp } = *s;
    let gamma1 = q.j_yz_x.abs() + q.j_xz_y.abs() + q.j_xy_z.abs() + 4.0 * rx * rxp * mq.i1;
    let mut value = s_max * sqrt(clamp_square("J0 + 2 Gamma1", q.j0 + 2.0 * gamma1)?);
    if tstate {
        value += l_max(s);
    }
    let args = [(ry - ryp) * (rz - rzp), (rx - rxp) * (rz - rzp), (rx - rxp) * (ry - ryp)];
    Ok(BoundReport::new(Criterion::SvetlichnyDegenerate { tstate }, value).with_angles(degenerate_angles(args)))
}

/// Each angle is 0 or π by the sign of its argument. Zero arguments are
/// completed so that the product of the cosines is -1.
fn degenerate_angles(args: [f64; 3]) -> Angles {
    let mut signs = args.map(|a| if a > 0.0 { Some(1.0) } else if a < 0.0 { Some(-1.0) } else { None });
    if let Some(last) = signs.iter().rposition(Option::is_none) {
        for s in signs.iter_mut().take(last) {
            s.get_or_insert(1.0);
        }
        let rest: f64 = signs.iter().flatten().product();
        signs[last] = Some(-rest);
    }
    signs.map(|s| if s == Some(1.0) { 0.0 } else { core::f64::consts::PI })
}

/// Unbiased bound maximized over angles (grid plus local search).
pub fn svetlichny_bound_unbiased_max(t: &Mat3x9, s: &StrengthSextuple, n: usize) -> Result<BoundReport, BoundError> {
    let (s1, s2) = top_two(t);
    let (value, angles) = grid_maximize(n, |a| {
        let (jp, jm) = j_plus_minus(s, a)?;
        Ok(pair_bound(s1, s2, jp, jm))
    })?;
    Ok(BoundReport::new(Criterion::SvetlichnyUnbiased, value)
        .with_angles(angles)
        .with_note("maximized over angles by grid and local search"))
}
