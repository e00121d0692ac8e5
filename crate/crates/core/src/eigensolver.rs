//! Radial eigenproblem on a uniform mesh with Dirichlet boundaries.
//!
//! The kinetic term is the three-point central finite difference, which keeps
//! the Hamiltonian symmetric tridiagonal over the interior mesh points; the
//! full spectrum is obtained with an implicit-shift QL iteration. The two wall
//! points carry exact zeros, so the basis arrays span the whole mesh while the
//! eigenproblem has n_points - 2 degrees of freedom.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform radial mesh including both wall points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialMesh {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
}

impl Default for RadialMesh {
    fn default() -> Self {
        Self { r_min: 0.02, r_max: 20.0, n_points: 256 }
    }
}

impl RadialMesh {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::MeshTooSmall(n_points));
        }
        if !(r_min < r_max) {
            return Err(Error::MeshBoundsInvalid { r_min, r_max });
        }
        Ok(Self { r_min, r_max, n_points })
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.r_min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    /// Number of interior degrees of freedom (Dirichlet removes the walls).
    pub fn n_interior(&self) -> usize {
        self.n_points - 2
    }
}

/// Symmetric tridiagonal matrix; `off_diagonal[i]` couples rows i and i+1.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// y = A x.
    pub fn multiply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diagonal[i] * x[i];
            if i > 0 {
                acc += self.off_diagonal[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off_diagonal[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }
}

/// FD Hamiltonian over the interior points: diagonal 1/(mu dr^2) + V(r_k),
/// off-diagonal -1/(2 mu dr^2).
pub fn build_fd_hamiltonian<F>(mesh: &RadialMesh, potential: F, reduced_mass: f64) -> Result<TridiagonalMatrix>
where
    F: Fn(f64) -> f64,
{
    if mesh.n_points < 3 {
        return Err(Error::MeshTooSmall(mesh.n_points));
    }
    if !(reduced_mass > 0.0) {
        return Err(Error::Config(format!("reduced mass must be positive, got {reduced_mass}")));
    }
    let dr = mesh.spacing();
    let kinetic = 1.0 / (reduced_mass * dr * dr);
    let n_int = mesh.n_interior();
    let diagonal = (0..n_int).map(|k| kinetic + potential(mesh.point(k + 1))).collect();
    let off_diagonal = vec![-0.5 * kinetic; n_int.saturating_sub(1)];
    Ok(TridiagonalMatrix { diagonal, off_diagonal })
}

/// Vibrational pseudo-state basis: full spectrum of the FD Hamiltonian.
/// Wavefunctions are stored on the full mesh (zeros at both walls) and are
/// orthonormal under the trapezoidal inner product.
#[derive(Debug, Clone)]
pub struct VibrationalBasis {
    pub mesh: RadialMesh,
    pub reduced_mass: f64,
    /// Strictly ascending eigenvalues, hartree.
    pub energies: Vec<f64>,
    /// wavefunctions[i] has mesh.n_points samples.
    pub wavefunctions: Vec<Vec<f64>>,
}

impl VibrationalBasis {
    pub fn n_states(&self) -> usize {
        self.energies.len()
    }

    /// Count of negative-energy (bound) states.
    pub fn n_bound(&self) -> usize {
        self.energies.iter().filter(|&&e| e < 0.0).count()
    }

    /// Trapezoidal inner product of states i and j on the mesh.
    pub fn inner(&self, i: usize, j: usize) -> f64 {
        let dr = self.mesh.spacing();
        let (a, b) = (&self.wavefunctions[i], &self.wavefunctions[j]);
        trapezoid_product(a, b, dr)
    }

    /// FNV-1a over the energy spectrum bits; identifies the basis in caches
    /// and manifests.
    pub fn content_hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |v: u64| {
            for byte in v.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.mesh.n_points as u64);
        eat(self.reduced_mass.to_bits());
        for e in &self.energies {
            eat(e.to_bits());
        }
        format!("{h:016x}")
    }

    /// CSV dump: header row carries the energies, then one row per mesh
    /// point: r, phi_0(r), phi_1(r), ... Columns limited to `max_states`.
    pub fn to_csv(&self, max_states: usize) -> String {
        let n_cols = self.n_states().min(max_states);
        let mut out = String::from("r");
        for e in self.energies.iter().take(n_cols) {
            out.push_str(&format!(",{e:.12e}"));
        }
        out.push('\n');
        for k in 0..self.mesh.n_points {
            out.push_str(&format!("{:.12e}", self.mesh.point(k)));
            for phi in self.wavefunctions.iter().take(n_cols) {
                out.push_str(&format!(",{:.12e}", phi[k]));
            }
            out.push('\n');
        }
        out
    }
}

/// Trapezoidal quadrature of a*b on a uniform mesh whose endpoints vanish.
pub fn trapezoid_product(a: &[f64], b: &[f64], dr: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut acc = 0.0;
    for k in 0..n {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        acc += w * a[k] * b[k];
    }
    acc * dr
}

/// Full spectrum of a symmetric tridiagonal matrix with mesh-normalized
/// eigenvectors. Eigenvalues come back strictly ascending; each
/// eigenvector's first nonzero component is positive.
pub fn solve_eigensystem(
    matrix: &TridiagonalMatrix,
    mesh: &RadialMesh,
    reduced_mass: f64,
) -> Result<VibrationalBasis> {
    let n = matrix.dim();
    let mut d = matrix.diagonal.clone();
    let mut e = matrix.off_diagonal.clone();
    e.push(0.0);
    let mut z = vec![0.0f64; n * n];
    for k in 0..n {
        z[k * n + k] = 1.0;
    }
    ql_implicit(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());

    let dr = mesh.spacing();
    let norm = 1.0 / dr.sqrt();
    let mut energies = Vec::with_capacity(n);
    let mut wavefunctions = Vec::with_capacity(n);
    for &j in &order {
        energies.push(d[j]);
        let mut phi = Vec::with_capacity(mesh.n_points);
        phi.push(0.0);
        for k in 0..n {
            phi.push(z[k * n + j] * norm);
        }
        phi.push(0.0);
        if let Some(first) = phi.iter().find(|&&v| v != 0.0) {
            if *first < 0.0 {
                for v in &mut phi {
                    *v = -*v;
                }
            }
        }
        wavefunctions.push(phi);
    }
    Ok(VibrationalBasis { mesh: *mesh, reduced_mass, energies, wavefunctions })
}

/// Eigenvalues only (ascending); O(n^2), used by mesh-convergence checks.
pub fn solve_eigenvalues(matrix: &TridiagonalMatrix) -> Result<Vec<f64>> {
    let mut d = matrix.diagonal.clone();
    let mut e = matrix.off_diagonal.clone();
    e.push(0.0);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

const MAX_QL_ITERATIONS: usize = 50;

/// Implicit-shift QL iteration for a symmetric tridiagonal matrix.
/// `d` holds the diagonal, `e[i]` couples i and i+1 (e[n-1] is workspace).
/// When `z` is given (n*n row-major, initialized to the identity), the
/// accumulated rotations leave eigenvector j in column j.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::EigenNonConvergence { index: l, iterations: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow_at = None;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow_at = Some(i);
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let t = (d[i] - g) * s + 2.0 * c * b;
                p = s * t;
                d[i + 1] = g + p;
                g = c * t - b;
                if let Some(zz) = z.as_deref_mut() {
                    for k in 0..n {
                        f = zz[k * n + i + 1];
                        zz[k * n + i + 1] = s * zz[k * n + i] + c * f;
                        zz[k * n + i] = c * zz[k * n + i] - s * f;
                    }
                }
            }
            match underflow_at {
                Some(i) if i > l => continue,
                Some(_) => {}
                None => {
                    d[l] -= p;
                    e[l] = g;
                    e[m] = 0.0;
                }
            }
        }
    }
    Ok(())
}
