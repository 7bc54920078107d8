//! Dense kernels for the small matrices the bounds need: cyclic Jacobi
//! eigen-decomposition of real symmetric matrices, singular triples of 3×9
//! matrices and polar (nearest orthonormal) factors of thin 3×k matrices.

/// Real 3×3 matrix, row-major.
pub type Mat3 = [[f64; 3]; 3];
/// Real 3×9 matrix, row-major. Column `3*j + k` holds the `(j, k)` pair.
pub type Mat3x9 = [[f64; 9]; 3];

/// Off-diagonal Frobenius norm (relative to `max(1, ‖A‖_F)`) at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-14;
/// Sweep guard for 3×3 problems.
pub const JACOBI_MAX_SWEEPS_3: usize = 30;
/// Singular values below this are reported as exactly zero.
pub const SINGULAR_CLAMP: f64 = 1e-12;
/// Largest tolerated `|A - Aᵀ|` entry for symmetric input.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SmallMatError {
    #[error("matrix is not symmetric (max |A - A^T| = {0:e})")]
    NotSymmetric(f64),
}

/// Eigen-decomposition of a real symmetric `N×N` matrix.
///
/// `vectors[r][i]` is component `r` of the eigenvector for `values[i]`;
/// values are sorted non-increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen<const N: usize> {
    pub values: [f64; N],
    pub vectors: [[f64; N]; N],
    pub sweeps: usize,
}

impl<const N: usize> SymEigen<N> {
    pub fn vector(&self, i: usize) -> [f64; N] {
        core::array::from_fn(|r| self.vectors[r][i])
    }
}

fn off_diagonal_norm<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    let mut s = 0.0;
    for (p, row) in a.iter().enumerate() {
        for v in &row[p + 1..] {
            s += v * v;
        }
    }
    libm::sqrt(2.0 * s)
}

/// Cyclic Jacobi rotations on a symmetric matrix. The input is assumed
/// symmetric; only the upper triangle drives the rotations.
pub fn jacobi_eigen<const N: usize>(mut a: [[f64; N]; N], max_sweeps: usize) -> SymEigen<N> {
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = {
        let f: f64 = a.iter().flatten().map(|x| x * x).sum();
        libm::sqrt(f).max(1.0)
    };
    let mut sweeps = 0;
    while sweeps < max_sweeps && off_diagonal_norm(&a) > JACOBI_TOL * scale {
        sweeps += 1;
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: [usize; N] = core::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    SymEigen {
        values: core::array::from_fn(|i| a[order[i]][order[i]]),
        vectors: core::array::from_fn(|r| core::array::from_fn(|i| v[r][order[i]])),
        sweeps,
    }
}

/// Eigenvalues (non-increasing) and eigenvectors of a symmetric 3×3 matrix.
pub fn eigen_sym3(a: &Mat3) -> Result<SymEigen<3>, SmallMatError> {
    let mut asym: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            asym = asym.max(libm::fabs(a[i][j] - a[j][i]));
        }
    }
    if asym > SYMMETRY_TOL || asym.is_nan() {
        return Err(SmallMatError::NotSymmetric(asym));
    }
    let sym: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| 0.5 * (a[i][j] + a[j][i])));
    Ok(jacobi_eigen(sym, JACOBI_MAX_SWEEPS_3))
}

/// Singular values with left (3×3) and right (9×3) singular vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularTriple {
    /// `s1 >= s2 >= s3 >= 0`.
    pub values: [f64; 3],
    /// Column `i` is `u_i`.
    pub left: Mat3,
    /// Column `i` is `v_i`.
    pub right: [[f64; 3]; 9],
}

impl SingularTriple {
    pub fn left_vector(&self, i: usize) -> [f64; 3] {
        core::array::from_fn(|r| self.left[r][i])
    }

    pub fn right_vector(&self, i: usize) -> [f64; 9] {
        core::array::from_fn(|r| self.right[r][i])
    }

    /// `Σ s_i u_i v_iᵀ`.
    pub fn reconstruct(&self) -> Mat3x9 {
        let mut out = [[0.0; 9]; 3];
        for i in 0..3 {
            for (r, row) in out.iter_mut().enumerate() {
                for (c, x) in row.iter_mut().enumerate() {
                    *x += self.values[i] * self.left[r][i] * self.right[c][i];
                }
            }
        }
        out
    }
}

pub fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm<const N: usize>(a: &[f64; N]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Removes from `v` its components along `basis` and normalizes; `None` if
/// nothing substantial is left.
fn orthonormalize_against<const N: usize>(mut v: [f64; N], basis: &[[f64; N]]) -> Option<[f64; N]> {
    for _ in 0..2 {
        for b in basis {
            let d = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
    }
    let n = norm(&v);
    if n < 1e-8 {
        return None;
    }
    Some(v.map(|x| x / n))
}

/// Completes `basis` with a unit vector orthogonal to all of it, trying the
/// hint first and then the standard axes.
fn complete<const N: usize>(hint: Option<[f64; N]>, basis: &[[f64; N]]) -> [f64; N] {
    if let Some(h) = hint.and_then(|h| orthonormalize_against(h, basis)) {
        return h;
    }
    let mut best = [0.0; N];
    let mut best_norm = -1.0;
    for k in 0..N {
        let mut e = [0.0; N];
        e[k] = 1.0;
        for b in basis {
            let d = dot(&e, b);
            for (x, y) in e.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let n = norm(&e);
        if n > best_norm {
            best_norm = n;
            best = e.map(|x| x / n);
        }
    }
    best
}

pub fn transpose_mul_vec(a: &Mat3x9, u: &[f64; 3]) -> [f64; 9] {
    core::array::from_fn(|c| (0..3).map(|r| a[r][c] * u[r]).sum())
}

pub fn mul_vec(a: &Mat3x9, v: &[f64; 9]) -> [f64; 3] {
    core::array::from_fn(|r| dot(&a[r], v))
}

/// Singular triple of a 3×9 matrix from the Jacobi eigen-decomposition of `A·Aᵀ`.
pub fn singular_values_3x9(a: &Mat3x9) -> SingularTriple {
    let gram: Mat3 = core::array::from_fn(|i| core::array::from_fn(|j| dot(&a[i], &a[j])));
    let eig = jacobi_eigen(gram, JACOBI_MAX_SWEEPS_3);
    let mut lefts: [[f64; 3]; 3] = core::array::from_fn(|i| eig.vector(i));
    // |Aᵀu| is more accurate than sqrt(eigenvalue) for small values.
    let mut vals: [f64; 3] = core::array::from_fn(|i| norm(&transpose_mul_vec(a, &lefts[i])));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    lefts = order.map(|i| lefts[i]);
    vals = order.map(|i| vals[i]);

    let mut rights: [[f64; 9]; 3] = [[0.0; 9]; 3];
    for i in 0..3 {
        if vals[i] <= SINGULAR_CLAMP {
            vals[i] = 0.0;
        }
        let hint = if vals[i] > 0.0 {
            Some(transpose_mul_vec(a, &lefts[i]).map(|x| x / vals[i]))
        } else {
            None
        };
        rights[i] = complete(hint, &rights[..i]);
    }
    SingularTriple {
        values: vals,
        left: core::array::from_fn(|r| core::array::from_fn(|i| lefts[i][r])),
        right: core::array::from_fn(|r| core::array::from_fn(|i| rights[i][r])),
    }
}

/// Nearest matrix with orthonormal columns to the 3×K matrix whose columns
/// are `g` (the orthogonal polar factor). Rank-deficient directions are
/// filled from `fallback` and then from the standard axes.
pub fn polar_columns<const K: usize>(g: &[[f64; 3]; K], fallback: &[[f64; 3]; K]) -> [[f64; 3]; K] {
    let gram: [[f64; K]; K] = core::array::from_fn(|i| core::array::from_fn(|j| dot(&g[i], &g[j])));
    let eig = jacobi_eigen(gram, 60);
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut us: [[f64; 3]; K] = [[0.0; 3]; K];
    for i in 0..K {
        let w = eig.vector(i);
        let gw: [f64; 3] = core::array::from_fn(|r| (0..K).map(|c| g[c][r] * w[c]).sum());
        let hint = if eig.values[i] > 1e-24 * top.max(1e-300) && eig.values[i] > 0.0 {
            Some(gw)
        } else {
            // Map the fallback frame through the eigenbasis so a degenerate
            // direction keeps the caller's current orientation.
            Some(core::array::from_fn(|r| (0..K).map(|c| fallback[c][r] * w[c]).sum()))
        };
        us[i] = complete(hint, &us[..i]);
    }
    core::array::from_fn(|c| {
        core::array::from_fn(|r| (0..K).map(|i| us[i][r] * eig.vectors[c][i]).sum())
    })
}

/// Orthogonal polar factor of a 3×3 matrix (rows in, rows out).
pub fn polar3(a: &Mat3) -> Mat3 {
    let cols: [[f64; 3]; 3] = core::array::from_fn(|c| core::array::from_fn(|r| a[r][c]));
    let id: [[f64; 3]; 3] = core::array::from_fn(|c| core::array::from_fn(|r| if r == c { 1.0 } else { 0.0 }));
    let q = polar_columns(&cols, &id);
    core::array::from_fn(|r| core::array::from_fn(|c| q[c][r]))
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    core::array::from_fn(|i| core::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn mat3_transpose(a: &Mat3) -> Mat3 {
    core::array::from_fn(|i| core::array::from_fn(|j| a[j][i]))
}

pub fn mat3_vec(a: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    core::array::from_fn(|i| dot(&a[i], v))
}

/// `Q · A · (P ⊗ R)` for a 3×9 matrix `A` in the crate's column convention.
pub fn rotate_3x9(a: &Mat3x9, q: &Mat3, p: &Mat3, r: &Mat3) -> Mat3x9 {
    let mut qa = [[0.0; 9]; 3];
    for i in 0..3 {
        for c in 0..9 {
            qa[i][c] = (0..3).map(|k| q[i][k] * a[k][c]).sum();
        }
    }
    let mut out = [[0.0; 9]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for b in 0..3 {
                    for c in 0..3 {
                        s += qa[i][3 * b + c] * p[b][j] * r[c][k];
                    }
                }
                out[i][3 * j + k] = s;
            }
        }
    }
    out
}
