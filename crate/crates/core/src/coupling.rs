//! Time-dependent Hamiltonian matrix elements h_ij(R(t)).
//!
//! h_ij(R) = eps_i delta_ij + <phi_i| V(R, r, gamma) |phi_j> is tabulated on a
//! uniform R grid and interpolated with natural cubic splines; composition
//! with the straight-line trajectory R(t) = sqrt(b^2 + v^2 t^2) yields the
//! Hamiltonian at any time, so one table serves every impact parameter.
//!
//! The residual interaction tail at R_max (a few 1e-9 hartree for the default
//! Morse surface) is subtracted from every grid row at build time, so the
//! table is exactly asymptotic at its last knot: h_ij(R_max) = eps_i delta_ij
//! to machine precision. Raw matrix elements keep the tail.

use ndarray::Array2;
use rayon::prelude::*;

use crate::eigensolver::VibrationalBasis;
use crate::error::{Error, Result};
use crate::potential::{JacobiGeometry, SurfaceModel};
use crate::spline::{natural_second_derivatives, segment_weights};

/// Raw matrix element eps_i delta_ij + integral phi_i V phi_j dr by
/// trapezoidal quadrature on the basis mesh.
pub fn matrix_element(
    i: usize,
    j: usize,
    r_proj: f64,
    basis: &VibrationalBasis,
    surface: &SurfaceModel,
    gamma: f64,
) -> Result<f64> {
    let n = basis.n_states();
    if i >= n {
        return Err(Error::StateIndexOutOfRange { index: i, size: n });
    }
    if j >= n {
        return Err(Error::StateIndexOutOfRange { index: j, size: n });
    }
    let dr = basis.mesh.spacing();
    let phi_i = &basis.wavefunctions[i];
    let phi_j = &basis.wavefunctions[j];
    let mut acc = 0.0;
    for k in 1..basis.mesh.n_points - 1 {
        let g = JacobiGeometry::new(r_proj, basis.mesh.point(k), gamma)?;
        acc += phi_i[k] * surface.interaction_potential(&g) * phi_j[k];
    }
    let diag = if i == j { basis.energies[i] } else { 0.0 };
    Ok(diag + acc * dr)
}

/// Symmetric coupling table over a uniform R grid for the lowest `n_states`
/// basis states. Pairs with i <= j are stored once.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    n_states: usize,
    gamma: f64,
    r_grid: Vec<f64>,
    energies: Vec<f64>,
    /// h values, layout [k * n_pairs + p] for grid point k, pair p.
    values: Vec<f64>,
    /// Natural-spline second derivatives, same layout.
    second: Vec<f64>,
}

#[inline]
fn pair_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i + 1) / 2 + j
}

/// Tabulate h_ij(R) for all i <= j < n_states on the grid 0, dR, ..., r_max,
/// then pin the last row to the exact asymptote diag(eps).
pub fn build_coupling_table(
    basis: &VibrationalBasis,
    surface: &SurfaceModel,
    gamma: f64,
    delta_r: f64,
    r_max: f64,
    n_states: usize,
) -> Result<CouplingTable> {
    if !(delta_r > 0.0) {
        return Err(Error::NonPositiveSpacing(delta_r));
    }
    if n_states == 0 || n_states > basis.n_states() {
        return Err(Error::StateIndexOutOfRange { index: n_states, size: basis.n_states() });
    }
    let n_steps = (r_max / delta_r + 1e-9).floor() as usize;
    let mut r_grid: Vec<f64> = (0..=n_steps).map(|k| k as f64 * delta_r).collect();
    if r_max - r_grid[n_steps] > 1e-9 * delta_r {
        r_grid.push(r_max);
    } else {
        r_grid[n_steps] = r_max;
    }
    let n_grid = r_grid.len();
    let n_pairs = n_states * (n_states + 1) / 2;
    let mesh = &basis.mesh;
    let dr = mesh.spacing();
    let interior: Vec<f64> = (1..mesh.n_points - 1).map(|k| mesh.point(k)).collect();
    let energies: Vec<f64> = basis.energies[..n_states].to_vec();

    let mut values = vec![0.0f64; n_grid * n_pairs];
    let rows: Result<Vec<()>> = values
        .par_chunks_mut(n_pairs)
        .enumerate()
        .map(|(k, row)| {
            let r_proj = r_grid[k];
            let mut v_at_r = Vec::with_capacity(interior.len());
            for &r_vib in &interior {
                let g = JacobiGeometry::new(r_proj, r_vib, gamma)?;
                v_at_r.push(surface.interaction_potential(&g));
            }
            for i in 0..n_states {
                let phi_i = &basis.wavefunctions[i][1..mesh.n_points - 1];
                for j in i..n_states {
                    let phi_j = &basis.wavefunctions[j][1..mesh.n_points - 1];
                    let mut acc = 0.0;
                    for m in 0..interior.len() {
                        acc += phi_i[m] * v_at_r[m] * phi_j[m];
                    }
                    let diag = if i == j { energies[i] } else { 0.0 };
                    row[pair_index(i, j, n_states)] = diag + acc * dr;
                }
            }
            Ok(())
        })
        .collect();
    rows?;

    // Pin the asymptote: subtract the residual tail at R_max from every row.
    let last = (n_grid - 1) * n_pairs;
    let mut tail = vec![0.0f64; n_pairs];
    for i in 0..n_states {
        for j in i..n_states {
            let p = pair_index(i, j, n_states);
            let asym = if i == j { energies[i] } else { 0.0 };
            tail[p] = values[last + p] - asym;
        }
    }
    for k in 0..n_grid {
        for p in 0..n_pairs {
            values[k * n_pairs + p] -= tail[p];
        }
    }

    // Per-pair spline second derivatives.
    let mut second = vec![0.0f64; n_grid * n_pairs];
    let columns: Result<Vec<(usize, Vec<f64>)>> = (0..n_pairs)
        .into_par_iter()
        .map(|p| {
            let col: Vec<f64> = (0..n_grid).map(|k| values[k * n_pairs + p]).collect();
            Ok((p, natural_second_derivatives(&r_grid, &col)?))
        })
        .collect();
    for (p, col) in columns? {
        for k in 0..n_grid {
            second[k * n_pairs + p] = col[k];
        }
    }

    Ok(CouplingTable { n_states, gamma, r_grid, energies, values, second })
}

impl CouplingTable {
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r_max(&self) -> f64 {
        *self.r_grid.last().unwrap()
    }

    pub fn r_grid(&self) -> &[f64] {
        &self.r_grid
    }

    /// Asymptotic energies of the tabulated states.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Tabulated value at grid point k.
    pub fn value_at_grid(&self, i: usize, j: usize, k: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.values[k * self.n_pairs() + pair_index(i, j, self.n_states)]
    }

    fn n_pairs(&self) -> usize {
        self.n_states * (self.n_states + 1) / 2
    }

    /// Spline-interpolated h_ij(R), clamped to the last knot beyond R_max.
    /// The bool reports whether clamping happened.
    pub fn coupling_at(&self, r_proj: f64) -> (Array2<f64>, bool) {
        let n = self.n_states;
        let mut h = Array2::zeros((n, n));
        let clamped = self.fill_coupling_at(r_proj, n, h.as_slice_mut().unwrap(), n);
        (h, clamped)
    }

    /// Hamiltonian along the trajectory R(t) = sqrt(b^2 + v^2 t^2).
    pub fn coupling_at_time(&self, t: f64, b: f64, v: f64) -> (Array2<f64>, bool) {
        self.coupling_at(trajectory_r(b, v, t))
    }

    /// Fill the leading n_sub x n_sub block of `out` (row-major,
    /// stride x stride, stride >= n_sub) with h(R); the rest is untouched.
    /// Returns true when R was clamped to the last knot.
    pub(crate) fn fill_coupling_at(
        &self,
        r_proj: f64,
        n_sub: usize,
        out: &mut [f64],
        stride: usize,
    ) -> bool {
        debug_assert!(n_sub <= self.n_states);
        let r_max = self.r_max();
        let (r, clamped) = if r_proj > r_max { (r_max, true) } else { (r_proj, false) };
        let w = segment_weights(&self.r_grid, r);
        let n_pairs = self.n_pairs();
        let row0 = &self.values[w.index * n_pairs..(w.index + 1) * n_pairs];
        let row1 = &self.values[(w.index + 1) * n_pairs..(w.index + 2) * n_pairs];
        let sec0 = &self.second[w.index * n_pairs..(w.index + 1) * n_pairs];
        let sec1 = &self.second[(w.index + 1) * n_pairs..(w.index + 2) * n_pairs];
        for i in 0..n_sub {
            for j in i..n_sub {
                let p = pair_index(i, j, self.n_states);
                let val =
                    w.w_y0 * row0[p] + w.w_y1 * row1[p] + w.w_m0 * sec0[p] + w.w_m1 * sec1[p];
                out[i * stride + j] = val;
                out[j * stride + i] = val;
            }
        }
        clamped
    }

    /// FNV-1a over the table content; cache key material.
    pub fn content_hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |v: u64| {
            for byte in v.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.n_states as u64);
        eat(self.gamma.to_bits());
        for v in &self.values {
            eat(v.to_bits());
        }
        format!("{h:016x}")
    }

    /// CSV cache image: metadata lines, the grid, energies, then one line per
    /// pair. Floats use the shortest round-trip format.
    pub fn to_cache_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# coupling-table v1 n_states={} gamma={}\n",
            self.n_states, self.gamma
        ));
        out.push_str("grid");
        for r in &self.r_grid {
            out.push_str(&format!(",{r}"));
        }
        out.push('\n');
        out.push_str("energies");
        for e in &self.energies {
            out.push_str(&format!(",{e}"));
        }
        out.push('\n');
        for i in 0..self.n_states {
            for j in i..self.n_states {
                let p = pair_index(i, j, self.n_states);
                out.push_str(&format!("{i},{j}"));
                for k in 0..self.r_grid.len() {
                    out.push_str(&format!(",{}", self.values[k * self.n_pairs() + p]));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Parse a cache image written by `to_cache_string`.
    pub fn from_cache_str(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Cache(msg.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty cache"))?;
        let mut n_states = None;
        let mut gamma = None;
        for tok in header.split_whitespace() {
            if let Some(v) = tok.strip_prefix("n_states=") {
                n_states = v.parse::<usize>().ok();
            } else if let Some(v) = tok.strip_prefix("gamma=") {
                gamma = v.parse::<f64>().ok();
            }
        }
        let n_states = n_states.ok_or_else(|| bad("missing n_states"))?;
        let gamma = gamma.ok_or_else(|| bad("missing gamma"))?;
        let parse_row = |line: &str, tag: &str| -> Result<Vec<f64>> {
            let mut it = line.split(',');
            if it.next() != Some(tag) {
                return Err(bad(&format!("expected {tag} row")));
            }
            it.map(|t| t.parse::<f64>().map_err(|_| bad(&format!("bad float in {tag}"))))
                .collect()
        };
        let r_grid = parse_row(lines.next().ok_or_else(|| bad("missing grid"))?, "grid")?;
        let energies =
            parse_row(lines.next().ok_or_else(|| bad("missing energies"))?, "energies")?;
        if energies.len() != n_states {
            return Err(bad("energy count mismatch"));
        }
        let n_grid = r_grid.len();
        let n_pairs = n_states * (n_states + 1) / 2;
        let mut values = vec![0.0f64; n_grid * n_pairs];
        let mut seen = 0usize;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let i: usize =
                it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad pair row"))?;
            let j: usize =
                it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad pair row"))?;
            if i > j || j >= n_states {
                return Err(bad("pair indices out of range"));
            }
            let p = pair_index(i, j, n_states);
            let mut k = 0;
            for tok in it {
                if k >= n_grid {
                    return Err(bad("too many values in pair row"));
                }
                values[k * n_pairs + p] =
                    tok.parse().map_err(|_| bad("bad float in pair row"))?;
                k += 1;
            }
            if k != n_grid {
                return Err(bad("too few values in pair row"));
            }
            seen += 1;
        }
        if seen != n_pairs {
            return Err(bad("pair row count mismatch"));
        }
        let mut second = vec![0.0f64; n_grid * n_pairs];
        for p in 0..n_pairs {
            let col: Vec<f64> = (0..n_grid).map(|k| values[k * n_pairs + p]).collect();
            let sec = natural_second_derivatives(&r_grid, &col)?;
            for k in 0..n_grid {
                second[k * n_pairs + p] = sec[k];
            }
        }
        Ok(Self { n_states, gamma, r_grid, energies, values, second })
    }
}

/// Straight-line trajectory R(t) = sqrt(b^2 + v^2 t^2); even in t.
pub fn trajectory_r(b: f64, v: f64, t: f64) -> f64 {
    (b * b + v * v * t * t).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{build_fd_hamiltonian, solve_eigensystem, RadialMesh};
    use crate::units::amu_to_electron_masses;
    use std::f64::consts::FRAC_PI_2;

    fn small_basis() -> VibrationalBasis {
        let mesh = RadialMesh::default();
        let surface = SurfaceModel::default();
        let mu = amu_to_electron_masses(0.5);
        let h = build_fd_hamiltonian(&mesh, |r| surface.diatom_potential(r), mu).unwrap();
        solve_eigensystem(&h, &mesh, mu).unwrap()
    }

    fn small_table(basis: &VibrationalBasis, n: usize) -> CouplingTable {
        build_coupling_table(basis, &SurfaceModel::default(), FRAC_PI_2, 0.1, 20.0, n).unwrap()
    }

    #[test]
    fn diagonal_element_asymptotic_at_r_max() {
        let basis = small_basis();
        let surface = SurfaceModel::default();
        for i in [0usize, 3, 7] {
            let h = matrix_element(i, i, 20.0, &basis, &surface, FRAC_PI_2).unwrap();
            assert!((h - basis.energies[i]).abs() < 1e-6, "state {i}");
        }
    }

    #[test]
    fn off_diagonal_zero_for_zero_surface() {
        let basis = small_basis();
        let zero = SurfaceModel::zero_interaction();
        let h = matrix_element(0, 1, 2.0, &basis, &zero, FRAC_PI_2).unwrap();
        assert_eq!(h, 0.0);
        let d = matrix_element(2, 2, 2.0, &basis, &zero, FRAC_PI_2).unwrap();
        assert_eq!(d, basis.energies[2]);
    }

    #[test]
    fn matches_independent_quadrature() {
        // Same defining trapezoid, independently coded (reverse iteration).
        let basis = small_basis();
        let surface = SurfaceModel::default();
        let got = matrix_element(0, 1, 2.0, &basis, &surface, FRAC_PI_2).unwrap();
        let mesh = &basis.mesh;
        let dr = mesh.spacing();
        let mut acc = 0.0;
        for k in (1..mesh.n_points - 1).rev() {
            let g = JacobiGeometry::new(2.0, mesh.point(k), FRAC_PI_2).unwrap();
            acc += basis.wavefunctions[0][k]
                * surface.interaction_potential(&g)
                * basis.wavefunctions[1][k];
        }
        assert!((got - acc * dr).abs() < 1e-12);
    }

    #[test]
    fn index_out_of_range() {
        let basis = small_basis();
        let surface = SurfaceModel::default();
        let n = basis.n_states();
        assert!(matrix_element(n, 0, 1.0, &basis, &surface, FRAC_PI_2).is_err());
    }

    #[test]
    fn table_symmetric_and_pinned() {
        let basis = small_basis();
        let table = small_table(&basis, 8);
        let k_last = table.r_grid().len() - 1;
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(table.value_at_grid(i, j, k_last), table.value_at_grid(j, i, k_last));
            }
            // diagonal at R_max equals eps_i to machine precision
            assert!(
                (table.value_at_grid(i, i, k_last) - basis.energies[i]).abs() < 1e-10,
                "state {i}"
            );
        }
        // off-diagonal magnitude < 1e-6 at R_max
        assert!(table.value_at_grid(0, 1, k_last).abs() < 1e-6);
    }

    #[test]
    fn tail_decays_monotonically_beyond_10() {
        let basis = small_basis();
        let table = small_table(&basis, 8);
        let grid = table.r_grid().to_vec();
        for i in 0..8 {
            for j in i..8 {
                let asym = if i == j { basis.energies[i] } else { 0.0 };
                let mut prev = f64::INFINITY;
                for (k, &r) in grid.iter().enumerate() {
                    if r < 10.0 {
                        continue;
                    }
                    let dev = (table.value_at_grid(i, j, k) - asym).abs();
                    assert!(dev <= prev + 1e-12, "pair ({i},{j}) at R={r}");
                    prev = dev;
                }
            }
        }
    }

    #[test]
    fn spline_matches_direct_off_grid() {
        let basis = small_basis();
        let surface = SurfaceModel::default();
        let table = small_table(&basis, 8);
        // tail-subtracted direct values: matrix_element minus its own R_max residual
        let mut worst = 0.0f64;
        for idx in 0..40 {
            let r = 0.77 + 0.43 * idx as f64; // off-grid sample points
            if r > 17.0 {
                break;
            }
            let (h, _) = table.coupling_at(r);
            for i in 0..8 {
                for j in i..8 {
                    let raw = matrix_element(i, j, r, &basis, &surface, FRAC_PI_2).unwrap();
                    let tail = matrix_element(i, j, 20.0, &basis, &surface, FRAC_PI_2).unwrap()
                        - if i == j { basis.energies[i] } else { 0.0 };
                    let direct = raw - tail;
                    let scale = (0..table.r_grid().len())
                        .map(|k| {
                            (table.value_at_grid(i, j, k)
                                - if i == j { basis.energies[i] } else { 0.0 })
                            .abs()
                        })
                        .fold(0.0f64, f64::max)
                        .max(1e-30);
                    let dev = (h[[i, j]] - direct).abs() / scale;
                    worst = worst.max(dev);
                }
            }
        }
        assert!(worst < 1e-5, "worst relative spline deviation {worst:.2e}");
    }

    #[test]
    fn trajectory_and_time_symmetry() {
        let basis = small_basis();
        let table = small_table(&basis, 4);
        let (b, v) = (0.01, 0.0635);
        assert_eq!(trajectory_r(b, v, 0.0), b);
        let t_edge = (20.0f64.powi(2) - b * b).sqrt() / v;
        assert!((trajectory_r(b, v, t_edge) - 20.0).abs() < 1e-9);
        let (h_plus, c1) = table.coupling_at_time(133.7, b, v);
        let (h_minus, c2) = table.coupling_at_time(-133.7, b, v);
        assert_eq!(h_plus, h_minus);
        assert!(!c1 && !c2);
        // beyond the horizon: clamped and asymptotic
        let (h_far, clamped) = table.coupling_at_time(t_edge * 1.5, b, v);
        assert!(clamped);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { basis.energies[i] } else { 0.0 };
                assert!((h_far[[i, j]] - want).abs() < 1e-6);
            }
        }
        // hermitian by construction, bitwise
        let (h, _) = table.coupling_at_time(17.3, b, v);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h[[i, j]], h[[j, i]]);
            }
        }
    }

    #[test]
    fn at_t_zero_r_equals_b() {
        let basis = small_basis();
        let table = small_table(&basis, 4);
        let (h_t, _) = table.coupling_at_time(0.0, 3.0, 0.0635);
        let (h_r, _) = table.coupling_at(3.0);
        assert_eq!(h_t, h_r);
    }

    #[test]
    fn cache_round_trip() {
        let basis = small_basis();
        let table = small_table(&basis, 4);
        let text = table.to_cache_string();
        let back = CouplingTable::from_cache_str(&text).unwrap();
        assert_eq!(back.n_states(), 4);
        assert_eq!(back.content_hash(), table.content_hash());
        let (a, _) = table.coupling_at(3.33);
        let (b, _) = back.coupling_at(3.33);
        assert_eq!(a, b);
    }
}
