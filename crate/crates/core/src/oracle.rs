//! Numerical maximization of operator expectations over measurement
//! directions: a see-saw (alternating coordinate ascent), a bias-sign
//! search for T-states, a constructive alignment that realizes the
//! closed-form value, and a coarse grid scan used as a lower witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mermin_bounds::build_v_matrix;
use crate::observables::{GeneralObservable, MeasurementSetting, ObservableError, OperatorKind, OBSERVABLE_TOL};
use crate::smallmat::{dot, norm, polar3, polar_columns, singular_values_3x9, Mat3, Mat3x9};
use crate::states::{is_tstate, random_unit_vector, TSTATE_TOL};
use crate::strengths::{validate_angles, Angles, StrengthError, StrengthSextuple};
use crate::svetlichny_bounds::build_w_matrix;
use crate::tensor_core::CorrelationDecomposition;

/// Gradients shorter than this leave the direction unchanged.
pub const DEGENERATE_GRADIENT: f64 = 1e-14;
/// Largest alignment residual accepted by [`construct_saturating_setting`].
pub const ALIGNMENT_TOL: f64 = 1e-6;
pub const MAX_GRID_RESOLUTION: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("invalid see-saw configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Strength(#[from] StrengthError),
    #[error("bias optimization needs a T-state")]
    NotTState,
    #[error("no product-form alignment found (residual {residual:e})")]
    NotConstructible { residual: f64 },
    #[error("grid resolution {0} outside 1..=12")]
    Resolution(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeeSawConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub convergence_tol: f64,
    pub seed: u64,
    /// Fixed relative angle between each party's two directions.
    pub angle_constraints: Option<Angles>,
}

impl Default for SeeSawConfig {
    fn default() -> Self {
        Self { restarts: 20, max_sweeps: 1000, convergence_tol: 1e-13, seed: 0, angle_constraints: None }
    }
}

impl SeeSawConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.restarts == 0 {
            return Err(OracleError::InvalidConfig("restarts must be at least 1"));
        }
        if self.max_sweeps == 0 {
            return Err(OracleError::InvalidConfig("max_sweeps must be at least 1"));
        }
        if !(self.convergence_tol >= 1e-14) {
            return Err(OracleError::InvalidConfig("convergence_tol must be >= 1e-14"));
        }
        if let Some(a) = &self.angle_constraints {
            validate_angles(a)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeeSawOutcome {
    pub value: f64,
    pub setting: MeasurementSetting,
    /// Restart that produced the value.
    pub restart: usize,
    pub sweeps: usize,
    pub hit_max_sweeps: bool,
    /// Most negative sweep-to-sweep change seen (0 when ascent was monotone).
    pub worst_decrease: f64,
}

/// Pauli-coefficient blocks unpacked once for repeated contraction.
#[derive(Debug, Clone, Copy)]
struct Blocks {
    l: [f64; 3],
    m: [f64; 3],
    n: [f64; 3],
    theta: Mat3,
    phi: Mat3,
    omega: Mat3,
    t: [[[f64; 3]; 3]; 3],
}

impl Blocks {
    fn new(d: &CorrelationDecomposition) -> Self {
        Self {
            l: d.bloch_a(),
            m: d.bloch_b(),
            n: d.bloch_c(),
            theta: d.theta_mat(),
            phi: d.phi_mat(),
            omega: d.omega_mat(),
            t: d.t_tensor(),
        }
    }

    /// Coefficient vector of `⟨X⊗Y⊗Z⟩` in the direction of `party`, with that
    /// party's strength included.
    fn gradient(&self, obs: [&Obs; 3], party: usize) -> [f64; 3] {
        let [x, y, z] = obs;
        let mut g = [0.0; 3];
        match party {
            0 => {
                for i in 0..3 {
                    let mut tyz = 0.0;
                    for j in 0..3 {
                        for k in 0..3 {
                            tyz += self.t[i][j][k] * y.d[j] * z.d[k];
                        }
                    }
                    g[i] = y.b * z.b * self.l[i]
                        + z.b * y.r * dot(&self.theta[i], &y.d)
                        + y.b * z.r * dot(&self.phi[i], &z.d)
                        + y.r * z.r * tyz;
                }
                g.map(|v| v * x.r)
            }
            1 => {
                for j in 0..3 {
                    let mut txz = 0.0;
                    let mut thx = 0.0;
                    for i in 0..3 {
                        thx += self.theta[i][j] * x.d[i];
                        for k in 0..3 {
                            txz += self.t[i][j][k] * x.d[i] * z.d[k];
                        }
                    }
                    g[j] = x.b * z.b * self.m[j] + z.b * x.r * thx + x.b * z.r * dot(&self.omega[j], &z.d) + x.r * z.r * txz;
                }
                g.map(|v| v * y.r)
            }
            _ => {
                for k in 0..3 {
                    let (mut txy, mut phx, mut omy) = (0.0, 0.0, 0.0);
                    for i in 0..3 {
                        phx += self.phi[i][k] * x.d[i];
                        omy += self.omega[i][k] * y.d[i];
                        for j in 0..3 {
                            txy += self.t[i][j][k] * x.d[i] * y.d[j];
                        }
                    }
                    g[k] = x.b * y.b * self.n[k] + y.b * x.r * phx + x.b * y.r * omy + x.r * y.r * txy;
                }
                g.map(|v| v * z.r)
            }
        }
    }

    fn triple(&self, obs: [&Obs; 3]) -> f64 {
        let [x, y, z] = obs;
        // Terms carrying the first party's direction, then those without it.
        let mut omy = 0.0;
        for j in 0..3 {
            omy += y.d[j] * dot(&self.omega[j], &z.d);
        }
        dot(&self.gradient(obs, 0), &x.d)
            + x.b * (y.b * z.b + z.b * y.r * dot(&self.m, &y.d) + y.b * z.r * dot(&self.n, &z.d) + y.r * z.r * omy)
    }
}

#[derive(Debug, Clone, Copy)]
struct Obs {
    b: f64,
    r: f64,
    d: [f64; 3],
}

struct Problem<'a> {
    blocks: Blocks,
    terms: &'a [(f64, [usize; 3])],
}

impl Problem<'_> {
    fn value(&self, obs: &[Obs; 6]) -> f64 {
        self.terms
            .iter()
            .map(|(c, [a, b, g])| c * self.blocks.triple([&obs[*a], &obs[2 + b], &obs[4 + g]]))
            .sum()
    }

    /// Linear coefficient of the objective in the direction of observable
    /// `2 * party + primed`.
    fn coefficient(&self, obs: &[Obs; 6], party: usize, primed: usize) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (c, idx) in self.terms {
            if idx[party] != primed {
                continue;
            }
            let gi = self.blocks.gradient([&obs[idx[0]], &obs[2 + idx[1]], &obs[4 + idx[2]]], party);
            for (a, b) in g.iter_mut().zip(gi) {
                *a += c * b;
            }
        }
        g
    }

    fn sweep_free(&self, obs: &mut [Obs; 6]) {
        for k in 0..6 {
            let g = self.coefficient(obs, k / 2, k % 2);
            let n = norm(&g);
            if n >= DEGENERATE_GRADIENT {
                obs[k].d = g.map(|v| v / n);
            }
        }
    }

    /// Fixed relative angle: the pair is `c e1 ± s e2` and the frame
    /// `(e1, e2)` is the orthogonal polar factor of `[c(a+b), s(a-b)]`.
    fn sweep_constrained(&self, obs: &mut [Obs; 6], frames: &mut [[[f64; 3]; 2]; 3], angles: &Angles) {
        for p in 0..3 {
            let (c, s) = (libm::cos(angles[p] / 2.0), libm::sin(angles[p] / 2.0));
            let a = self.coefficient(obs, p, 0);
            let b = self.coefficient(obs, p, 1);
            let g = [
                core::array::from_fn(|i| c * (a[i] + b[i])),
                core::array::from_fn(|i| s * (a[i] - b[i])),
            ];
            if norm(&g[0]) + norm(&g[1]) < DEGENERATE_GRADIENT {
                continue;
            }
            frames[p] = polar_columns(&g, &frames[p]);
            set_pair(obs, p, &frames[p], c, s);
        }
    }
}

fn set_pair(obs: &mut [Obs; 6], p: usize, frame: &[[f64; 3]; 2], c: f64, s: f64) {
    obs[2 * p].d = core::array::from_fn(|i| c * frame[0][i] + s * frame[1][i]);
    obs[2 * p + 1].d = core::array::from_fn(|i| c * frame[0][i] - s * frame[1][i]);
}

fn random_frame<R: Rng + ?Sized>(rng: &mut R) -> [[f64; 3]; 2] {
    let e1 = random_unit_vector(rng);
    loop {
        let v = random_unit_vector(rng);
        let d = dot(&v, &e1);
        let w: [f64; 3] = core::array::from_fn(|i| v[i] - d * e1[i]);
        let n = norm(&w);
        if n > 1e-3 {
            return [e1, w.map(|x| x / n)];
        }
    }
}

fn check_biases(strengths: &StrengthSextuple, biases: &[f64; 6]) -> Result<(), OracleError> {
    for (&r, &b) in strengths.as_array().iter().zip(biases) {
        if !b.is_finite() || r + b.abs() > 1.0 + OBSERVABLE_TOL {
            return Err(ObservableError::PositivityViolated { strength: r, bias: b }.into());
        }
    }
    Ok(())
}

fn to_setting(obs: &[Obs; 6]) -> MeasurementSetting {
    MeasurementSetting::new(obs.map(|o| GeneralObservable { bias: o.b, strength: o.r, direction: o.d }))
}

/// One restart of the see-saw, seeded with `config.seed + restart`. Restarts
/// are independent so callers may run them in parallel and merge with
/// [`best_outcome`].
pub fn see_saw_restart(
    decomp: &CorrelationDecomposition,
    strengths: &StrengthSextuple,
    biases: &[f64; 6],
    kind: OperatorKind,
    config: &SeeSawConfig,
    restart: usize,
) -> Result<SeeSawOutcome, OracleError> {
    config.validate()?;
    check_biases(strengths, biases)?;
    let problem = Problem { blocks: Blocks::new(decomp), terms: kind.terms() };
    let r = strengths.as_array();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
    let mut obs: [Obs; 6] = core::array::from_fn(|i| Obs { b: biases[i], r: r[i], d: [0.0, 0.0, 1.0] });
    let mut frames = [[[0.0; 3]; 2]; 3];
    match &config.angle_constraints {
        Some(angles) => {
            for p in 0..3 {
                frames[p] = random_frame(&mut rng);
                set_pair(&mut obs, p, &frames[p], libm::cos(angles[p] / 2.0), libm::sin(angles[p] / 2.0));
            }
        }
        None => {
            for o in obs.iter_mut() {
                o.d = random_unit_vector(&mut rng);
            }
        }
    }
    let mut value = problem.value(&obs);
    let mut worst_decrease: f64 = 0.0;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < config.max_sweeps {
        match &config.angle_constraints {
            Some(angles) => problem.sweep_constrained(&mut obs, &mut frames, angles),
            None => problem.sweep_free(&mut obs),
        }
        sweeps += 1;
        let next = problem.value(&obs);
        let delta = next - value;
        worst_decrease = worst_decrease.min(delta);
        value = next;
        if delta < config.convergence_tol {
            converged = true;
            break;
        }
    }
    Ok(SeeSawOutcome {
        value,
        setting: to_setting(&obs),
        restart,
        sweeps,
        hit_max_sweeps: !converged,
        worst_decrease,
    })
}

/// Keeps the larger value; ties go to the lower restart index so the merge
/// order does not matter.
pub fn best_outcome(a: SeeSawOutcome, b: SeeSawOutcome) -> SeeSawOutcome {
    if b.value > a.value || (b.value == a.value && b.restart < a.restart) {
        b
    } else {
        a
    }
}

/// Best of `config.restarts` see-saw runs from random directions.
pub fn see_saw_maximize(
    decomp: &CorrelationDecomposition,
    strengths: &StrengthSextuple,
    biases: &[f64; 6],
    kind: OperatorKind,
    config: &SeeSawConfig,
) -> Result<SeeSawOutcome, OracleError> {
    let mut best = see_saw_restart(decomp, strengths, biases, kind, config, 0)?;
    for r in 1..config.restarts {
        best = best_outcome(best, see_saw_restart(decomp, strengths, biases, kind, config, r)?);
    }
    Ok(best)
}

/// Biases `±(1 - strength)` for sign pattern `bits` (bit `i` negates observable `i`).
pub fn extreme_biases(strengths: &StrengthSextuple, bits: u32) -> [f64; 6] {
    let r = strengths.as_array();
    core::array::from_fn(|i| if bits >> i & 1 == 1 { -(1.0 - r[i]) } else { 1.0 - r[i] })
}

/// See-saw over each of the 64 extreme bias sign patterns; the objective is
/// multilinear in the biases, so an extreme pattern is optimal.
pub fn bias_optimize(
    decomp: &CorrelationDecomposition,
    strengths: &StrengthSextuple,
    kind: OperatorKind,
    config: &SeeSawConfig,
) -> Result<SeeSawOutcome, OracleError> {
    if !is_tstate(decomp, TSTATE_TOL) {
        return Err(OracleError::NotTState);
    }
    let mut best: Option<SeeSawOutcome> = None;
    for bits in 0..64 {
        let out = see_saw_maximize(decomp, strengths, &extreme_biases(strengths, bits), kind, config)?;
        if best.as_ref().is_none_or(|b| out.value > b.value) {
            best = Some(out);
        }
    }
    Ok(best.expect("64 patterns"))
}

/// `⟨Oxᵀ T (Oy⊗Oz), M⟩`.
fn aligned_overlap(t: &Mat3x9, m: &Mat3x9, o: &[Mat3; 3]) -> f64 {
    let g = frame_gradient(t, m, o, 0);
    (0..3).map(|a| dot(&g[a], &o[0][a])).sum()
}

/// Derivative of [`aligned_overlap`] with respect to frame `p`.
fn frame_gradient(t: &Mat3x9, m: &Mat3x9, o: &[Mat3; 3], p: usize) -> Mat3 {
    let [ox, oy, oz] = o;
    let mut g = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let tv = t[a][3 * b + c];
                if tv == 0.0 {
                    continue;
                }
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            let mv = m[i][3 * j + k];
                            if mv == 0.0 {
                                continue;
                            }
                            let w = tv * mv;
                            match p {
                                0 => g[a][i] += w * oy[b][j] * oz[c][k],
                                1 => g[b][j] += w * ox[a][i] * oz[c][k],
                                _ => g[c][k] += w * ox[a][i] * oy[b][j],
                            }
                        }
                    }
                }
            }
        }
    }
    g
}

fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    let cols: [[f64; 3]; 3] = core::array::from_fn(|_| random_unit_vector(rng));
    polar3(&core::array::from_fn(|r| core::array::from_fn(|c| cols[c][r])))
}

/// Directions realizing `Σ s_i(T) s_i(M)` with `M` the Mermin or Svetlichny
/// reduced matrix at `angles`. Each party uses the pair `c e1 ± s e2` in a
/// frame found by alternating orthogonal Procrustes steps on the three local
/// frames. Fails when no product of local frames aligns the singular
/// vectors within [`ALIGNMENT_TOL`].
pub fn construct_saturating_setting(
    t: &Mat3x9,
    strengths: &StrengthSextuple,
    angles: &Angles,
    kind: OperatorKind,
) -> Result<MeasurementSetting, OracleError> {
    validate_angles(angles)?;
    let m = match kind {
        OperatorKind::Mermin => build_v_matrix(strengths, angles),
        OperatorKind::Svetlichny => build_w_matrix(strengths, angles),
    };
    let st = singular_values_3x9(t);
    let sm = singular_values_3x9(&m);
    let target: f64 = (0..3).map(|i| st.values[i] * sm.values[i]).sum();

    let id: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    // Start from the left singular vectors aligned: Ox a_i = σ_i u_i.
    let mut starts: alloc::vec::Vec<[Mat3; 3]> = alloc::vec::Vec::new();
    for signs in 0..4u32 {
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            let sg = if i < 2 && signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            for r in 0..3 {
                for c in 0..3 {
                    g[r][c] += sg * st.left[r][i] * sm.left[c][i];
                }
            }
        }
        starts.push([polar3(&g), id, id]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        starts.push([random_orthogonal(&mut rng), random_orthogonal(&mut rng), random_orthogonal(&mut rng)]);
    }

    let mut best = (f64::NEG_INFINITY, [id; 3]);
    for mut o in starts {
        let mut value = aligned_overlap(t, &m, &o);
        for _ in 0..5000 {
            for p in [1, 2, 0] {
                o[p] = polar3(&frame_gradient(t, &m, &o, p));
            }
            let next = aligned_overlap(t, &m, &o);
            let done = (next - value).abs() < 1e-15;
            value = next;
            if done {
                break;
            }
        }
        if value > best.0 {
            best = (value, o);
        }
        if target - best.0 < 1e-13 {
            break;
        }
    }
    let residual = target - best.0;
    if residual > ALIGNMENT_TOL {
        return Err(OracleError::NotConstructible { residual });
    }
    let r = strengths.as_array();
    let mut obs = [Obs { b: 0.0, r: 0.0, d: [0.0; 3] }; 6];
    for p in 0..3 {
        let frame = [core::array::from_fn(|i| best.1[p][i][0]), core::array::from_fn(|i| best.1[p][i][1])];
        set_pair(&mut obs, p, &frame, libm::cos(angles[p] / 2.0), libm::sin(angles[p] / 2.0));
        obs[2 * p].r = r[2 * p];
        obs[2 * p + 1].r = r[2 * p + 1];
    }
    Ok(to_setting(&obs))
}

/// All direction pairs of one party on the grid: a plane normal (polar angle
/// in `[0, π/2]`, azimuth in `[0, π)`) and two in-plane angles in `[0, 2π)`.
fn party_grid(res: usize) -> alloc::vec::Vec<[[f64; 3]; 2]> {
    use core::f64::consts::PI;
    let mut out = alloc::vec::Vec::with_capacity(res.pow(4));
    let polar_step = if res > 1 { PI / 2.0 / (res - 1) as f64 } else { 0.0 };
    for ia in 0..res {
        let alpha = ia as f64 * polar_step;
        for ib in 0..res {
            let beta = ib as f64 * PI / res as f64;
            let (sa, ca, sb, cb) = (libm::sin(alpha), libm::cos(alpha), libm::sin(beta), libm::cos(beta));
            // Orthonormal in-plane basis for normal (sa cb, sa sb, ca).
            let e1 = [ca * cb, ca * sb, -sa];
            let e2 = [-sb, cb, 0.0];
            for i1 in 0..res {
                for i2 in 0..res {
                    let dir = |i: usize| {
                        let phi = 2.0 * PI * i as f64 / res as f64;
                        let (c, s) = (libm::cos(phi), libm::sin(phi));
                        core::array::from_fn(|k| c * e1[k] + s * e2[k])
                    };
                    out.push([dir(i1), dir(i2)]);
                }
            }
        }
    }
    out
}

/// Coplanar-direction grid for the second and third parties with the first
/// party maximized exactly. Unbiased observables. A lower witness for the
/// true maximum.
pub fn grid_scan(
    decomp: &CorrelationDecomposition,
    strengths: &StrengthSextuple,
    kind: OperatorKind,
    resolution: usize,
) -> Result<f64, OracleError> {
    if resolution == 0 || resolution > MAX_GRID_RESOLUTION {
        return Err(OracleError::Resolution(resolution));
    }
    let t = decomp.t_tensor();
    let r = strengths.as_array();
    let grid = party_grid(resolution);
    let mut best = f64::NEG_INFINITY;
    for ys in &grid {
        // a[b][i][k] = R_y(b) Σ_j T_ijk y_b[j]
        let a: [[[f64; 3]; 3]; 2] = core::array::from_fn(|b| {
            core::array::from_fn(|i| {
                core::array::from_fn(|k| r[2 + b] * (0..3).map(|j| t[i][j][k] * ys[b][j]).sum::<f64>())
            })
        });
        for zs in &grid {
            let mut g = [[0.0; 3]; 2];
            for (coef, idx) in kind.terms() {
                let w = coef * r[4 + idx[2]];
                let z = &zs[idx[2]];
                for i in 0..3 {
                    g[idx[0]][i] += w * dot(&a[idx[1]][i], z);
                }
            }
            let v = r[0] * norm(&g[0]) + r[1] * norm(&g[1]);
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// A tensor whose equal-strength bounds are attained, with the relative
/// angles that attain them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturableTensor {
    pub t: Mat3x9,
    /// `(π/2, θy, θz)` with `cos θy cos θz = (s1² - s2²)/(s1² + s2²)`.
    pub angles: Angles,
    pub singular_values: [f64; 3],
}

/// Random tensor `s1 u1 pᵀ + s2 u2 p'ᵀ + s3 u3 wᵀ` with `p ∝ y⊗z' + y'⊗z`,
/// `p' ∝ y⊗z - y'⊗z'` for random pairs `(y, y')`, `(z, z')` at the angles that
/// saturate the equal-strength bounds, and `w` orthogonal to both.
pub fn random_saturable_tensor<R: Rng + ?Sized>(rng: &mut R) -> SaturableTensor {
    let mut sv: [f64; 3] = core::array::from_fn(|_| rng.random_range(0.05..1.0));
    sv.sort_by(|a, b| b.total_cmp(a));
    let [s1, s2, s3] = sv;
    let c = (s1 * s1 - s2 * s2) / (s1 * s1 + s2 * s2);
    let cy: f64 = rng.random_range(c..=1.0);
    let cz = if cy > 0.0 { (c / cy).min(1.0) } else { 1.0 };
    let angles = [core::f64::consts::FRAC_PI_2, libm::acos(cy), libm::acos(cz)];
    let pair = |rng: &mut R, theta: f64| {
        let f = random_frame(rng);
        let (h, k) = (libm::cos(theta / 2.0), libm::sin(theta / 2.0));
        let a: [f64; 3] = core::array::from_fn(|i| h * f[0][i] + k * f[1][i]);
        let b: [f64; 3] = core::array::from_fn(|i| h * f[0][i] - k * f[1][i]);
        (a, b)
    };
    let (y, yp) = pair(rng, angles[1]);
    let (z, zp) = pair(rng, angles[2]);
    let kron = |a: &[f64; 3], b: &[f64; 3]| -> [f64; 9] { core::array::from_fn(|i| a[i / 3] * b[i % 3]) };
    let unit9 = |v: [f64; 9]| {
        let n = norm(&v);
        v.map(|x| x / n)
    };
    let (a1, a2, a3, a4) = (kron(&y, &zp), kron(&yp, &z), kron(&y, &z), kron(&yp, &zp));
    let p = unit9(core::array::from_fn(|i| a1[i] + a2[i]));
    let pp = unit9(core::array::from_fn(|i| a3[i] - a4[i]));
    let w = loop {
        let mut v: [f64; 9] = core::array::from_fn(|_| rng.sample(rand_distr::StandardNormal));
        for b in [&p, &pp] {
            let d = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        if norm(&v) > 1e-3 {
            break unit9(v);
        }
    };
    let u = random_orthogonal(rng);
    let mut t = [[0.0; 9]; 3];
    for (k, (s, v)) in [(s1, &p), (s2, &pp), (s3, &w)].into_iter().enumerate() {
        for r in 0..3 {
            for col in 0..9 {
                t[r][col] += s * u[r][k] * v[col];
            }
        }
    }
    SaturableTensor { t, angles, singular_values: sv }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mermin_bounds::top_two;
    use crate::observables::operator_expectation;
    use crate::states::{build, ghz_correlations, StateSpec};
    use crate::tensor_core::decompose;
    use core::f64::consts::{FRAC_PI_2, SQRT_2};

    fn ghz() -> CorrelationDecomposition {
        decompose(&build(&StateSpec::Ghz).unwrap())
    }

    fn quick() -> SeeSawConfig {
        SeeSawConfig { restarts: 20, ..SeeSawConfig::default() }
    }

    #[test]
    fn reduced_matrices_give_expectation_in_canonical_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t: Mat3x9 = core::array::from_fn(|_| core::array::from_fn(|_| rng.random::<f64>() - 0.5));
        let d = CorrelationDecomposition::from_t_matrix(&t);
        let s = StrengthSextuple::new(0.9, 0.6, 0.8, 0.7, 0.5, 0.95).unwrap();
        let angles = [0.7, 1.9, 2.4];
        let r = s.as_array();
        let mut obs = [Obs { b: 0.0, r: 0.0, d: [0.0; 3] }; 6];
        for p in 0..3 {
            let frame = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
            set_pair(&mut obs, p, &frame, libm::cos(angles[p] / 2.0), libm::sin(angles[p] / 2.0));
            obs[2 * p].r = r[2 * p];
            obs[2 * p + 1].r = r[2 * p + 1];
        }
        let setting = to_setting(&obs);
        for (kind, m) in [
            (OperatorKind::Mermin, build_v_matrix(&s, &angles)),
            (OperatorKind::Svetlichny, build_w_matrix(&s, &angles)),
        ] {
            let inner: f64 = (0..3).map(|i| dot(&t[i], &m[i])).sum();
            assert!((operator_expectation(&d, &setting, kind) - inner).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn maximally_mixed_gives_zero() {
        let d = decompose(&crate::ThreeQubitState::maximally_mixed());
        let out = see_saw_maximize(&d, &StrengthSextuple::sharp(), &[0.0; 6], OperatorKind::Mermin, &quick()).unwrap();
        assert_eq!(out.value, 0.0);
        assert_eq!(grid_scan(&d, &StrengthSextuple::sharp(), OperatorKind::Mermin, 3).unwrap(), 0.0);
    }

    #[test]
    fn ghz_sharp_maxima() {
        let s = StrengthSextuple::sharp();
        let m = see_saw_maximize(&ghz(), &s, &[0.0; 6], OperatorKind::Mermin, &quick()).unwrap();
        assert!((m.value - 4.0).abs() < 1e-6, "{}", m.value);
        assert!(m.worst_decrease >= -1e-12);
        let sv = see_saw_maximize(&ghz(), &s, &[0.0; 6], OperatorKind::Svetlichny, &quick()).unwrap();
        assert!((sv.value - 4.0 * SQRT_2).abs() < 1e-6, "{}", sv.value);
    }

    #[test]
    fn deterministic_per_seed() {
        let s = StrengthSextuple::uniform(0.8).unwrap();
        let cfg = SeeSawConfig { restarts: 3, seed: 11, ..SeeSawConfig::default() };
        let a = see_saw_maximize(&ghz(), &s, &[0.0; 6], OperatorKind::Mermin, &cfg).unwrap();
        let b = see_saw_maximize(&ghz(), &s, &[0.0; 6], OperatorKind::Mermin, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constrained_keeps_angles() {
        let s = StrengthSextuple::sharp();
        let angles = [1.0, 2.0, 0.5];
        let cfg = SeeSawConfig { restarts: 4, angle_constraints: Some(angles), ..SeeSawConfig::default() };
        let out = see_saw_maximize(&ghz(), &s, &[0.0; 6], OperatorKind::Mermin, &cfg).unwrap();
        for (a, b) in out.setting.angles().iter().zip(angles) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(out.worst_decrease >= -1e-12);
    }

    #[test]
    fn bias_only_reaches_k_max() {
        let d = CorrelationDecomposition::from_t_matrix(&[[0.0; 9]; 3]);
        let s = StrengthSextuple::uniform(0.0).unwrap();
        let cfg = SeeSawConfig { restarts: 1, ..SeeSawConfig::default() };
        let out = bias_optimize(&d, &s, OperatorKind::Mermin, &cfg).unwrap();
        assert!((out.value - 2.0).abs() < 1e-15);
        assert_eq!(bias_optimize(&ghz(), &s, OperatorKind::Mermin, &cfg), Err(OracleError::NotTState));
    }

    #[test]
    fn saturating_setting_for_ghz() {
        let t = ghz_correlations();
        let d = CorrelationDecomposition::from_t_matrix(&t);
        let s = StrengthSextuple::sharp();
        let m = construct_saturating_setting(&t, &s, &[FRAC_PI_2; 3], OperatorKind::Mermin).unwrap();
        assert!((operator_expectation(&d, &m, OperatorKind::Mermin) - 4.0).abs() < 1e-8);
        let sv = construct_saturating_setting(&t, &s, &[FRAC_PI_2; 3], OperatorKind::Svetlichny).unwrap();
        assert!((operator_expectation(&d, &sv, OperatorKind::Svetlichny) - 4.0 * SQRT_2).abs() < 1e-8);
        let zero = construct_saturating_setting(&[[0.0; 9]; 3], &s, &[1.0; 3], OperatorKind::Mermin).unwrap();
        assert_eq!(operator_expectation(&CorrelationDecomposition::from_t_matrix(&[[0.0; 9]; 3]), &zero, OperatorKind::Mermin), 0.0);
        let (s1, s2) = top_two(&t);
        assert!((s1 - SQRT_2).abs() < 1e-12 && (s2 - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn grid_scan_is_lower_witness() {
        let s = StrengthSextuple::sharp();
        let g = grid_scan(&ghz(), &s, OperatorKind::Mermin, 8).unwrap();
        assert!(g >= 3.9 && g <= 4.0 + 1e-9, "{g}");
        assert!(grid_scan(&ghz(), &s, OperatorKind::Mermin, 13).is_err());
    }
}
