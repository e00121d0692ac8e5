//! Run configuration: defaults, the flat key = value config format, and the
//! default impact-parameter grid.
//!
//! Unknown keys are errors, not warnings. Angles are radians, energies eV,
//! masses amu, everything else atomic units.

use serde::Serialize;

use crate::eigensolver::RadialMesh;
use crate::error::{Error, Result};
use crate::evolution::{Backend, TrotterOrder};
use crate::potential::{CombinationRule, MorseParams, SurfaceModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionConfig {
    /// Laboratory collision energy, eV.
    pub e_lab_ev: f64,
    /// Orientation angle, radians; fixed during a collision.
    pub gamma: f64,
    /// Evolution time step, a.u.
    pub tau: f64,
    /// Trajectory cutoff radius, bohr.
    pub r_max: f64,
    /// Coupling-table grid spacing, bohr.
    pub delta_r: f64,
    pub mesh: RadialMesh,
    /// Diatom reduced mass, amu.
    pub reduced_mass_amu: f64,
    pub projectile_mass_amu: f64,
    pub target_mass_amu: f64,
    /// Number of basis states evolved (padded to the next power of two).
    pub basis_size: usize,
    pub surface: SurfaceModel,
    pub trotter_order: TrotterOrder,
    pub prune_eps: f64,
    pub backend: Backend,
    /// 0 = exact readout.
    pub shots: u64,
    pub seed: u64,
    /// Override for the impact-parameter grid, bohr.
    pub b_grid: Option<Vec<f64>>,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub initial_state: usize,
    /// Continuum counts for the convergence study.
    pub nc_list: Vec<usize>,
    /// Default impact parameter for single-b subcommands.
    pub b: f64,
}

impl Default for CollisionConfig {
    fn default() -> Self {
        Self {
            e_lab_ev: 100.0,
            gamma: std::f64::consts::FRAC_PI_2,
            tau: 0.01,
            r_max: 20.0,
            delta_r: 0.1,
            mesh: RadialMesh::default(),
            reduced_mass_amu: 0.5,
            projectile_mass_amu: 1.0,
            target_mass_amu: 2.0,
            basis_size: 16,
            surface: SurfaceModel::default(),
            trotter_order: TrotterOrder::Second,
            prune_eps: 1e-12,
            backend: Backend::Fused,
            shots: 0,
            seed: 7,
            b_grid: None,
            ode_rtol: 1e-6,
            ode_atol: 1e-12,
            initial_state: 0,
            nc_list: vec![2, 6, 10, 14],
            b: 0.01,
        }
    }
}

/// Default b grid, 61 points: geometric from 0.01 to 0.15 (6 points), linear
/// to 3.3 in steps of 0.07 (45 points), linear to 6 (5 points), sparse tail
/// to 12 (5 points). The b P(b) structure sits at small b; the 0.07 step in
/// the mid range keeps the trapezoid error of smooth profiles below 1e-3.
pub fn default_b_grid() -> Vec<f64> {
    let mut grid = Vec::with_capacity(61);
    for k in 0..6 {
        grid.push(0.01 * (15.0f64).powf(k as f64 / 5.0));
    }
    for k in 1..=45 {
        grid.push(0.15 + 3.15 * k as f64 / 45.0);
    }
    for k in 1..=5 {
        grid.push(3.3 + 2.7 * k as f64 / 5.0);
    }
    for k in 0..5 {
        grid.push(6.75 + 5.25 * k as f64 / 4.0);
    }
    grid
}

impl CollisionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.e_lab_ev > 0.0) {
            return bad(format!("e_lab_ev must be positive, got {}", self.e_lab_ev));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, pi], got {}", self.gamma));
        }
        if !(self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.r_max > 0.0) || !(self.delta_r > 0.0) {
            return bad("r_max and delta_r must be positive".into());
        }
        if self.mesh.n_points < 3 {
            return Err(Error::MeshTooSmall(self.mesh.n_points));
        }
        if !(self.mesh.r_min < self.mesh.r_max) {
            return Err(Error::MeshBoundsInvalid {
                r_min: self.mesh.r_min,
                r_max: self.mesh.r_max,
            });
        }
        if !(self.mesh.r_min >= 0.0) {
            return bad("mesh_r_min must be nonnegative".into());
        }
        if !(self.reduced_mass_amu > 0.0)
            || !(self.projectile_mass_amu > 0.0)
            || !(self.target_mass_amu > 0.0)
        {
            return bad("masses must be positive".into());
        }
        if self.basis_size == 0 {
            return bad("basis_size must be at least 1".into());
        }
        if !(self.b >= 0.0) || self.b >= self.r_max {
            return Err(Error::ImpactParameterTooLarge { b: self.b, r_max: self.r_max });
        }
        if let Some(grid) = &self.b_grid {
            if grid.len() < 2 {
                return Err(Error::QuadratureGridTooSmall(grid.len()));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::GridNotAscending);
            }
            if grid.iter().any(|&b| b < 0.0 || b >= self.r_max) {
                return bad("b_grid values must lie in [0, r_max)".into());
            }
        }
        if !(self.prune_eps >= 0.0) {
            return bad("prune_eps must be nonnegative".into());
        }
        if !(self.ode_rtol > 0.0) || !(self.ode_atol > 0.0) {
            return bad("ode tolerances must be positive".into());
        }
        Ok(())
    }

    /// Canonical key = value snapshot (also reparsable by `parse_config`).
    pub fn to_key_value(&self) -> String {
        let surface = match self.surface.rule {
            CombinationRule::PairwiseAdditive => "morse",
            CombinationRule::NoInteraction => "zero",
        };
        let order = match self.trotter_order {
            TrotterOrder::First => 1,
            TrotterOrder::Second => 2,
        };
        let backend = match self.backend {
            Backend::Gates => "gates",
            Backend::Fused => "fused",
        };
        let mut out = String::new();
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        kv("e_lab_ev", format!("{}", self.e_lab_ev));
        kv("gamma", format!("{}", self.gamma));
        kv("tau", format!("{}", self.tau));
        kv("r_max", format!("{}", self.r_max));
        kv("delta_r", format!("{}", self.delta_r));
        kv("mesh_r_min", format!("{}", self.mesh.r_min));
        kv("mesh_r_max", format!("{}", self.mesh.r_max));
        kv("mesh_points", format!("{}", self.mesh.n_points));
        kv("reduced_mass_amu", format!("{}", self.reduced_mass_amu));
        kv("projectile_mass_amu", format!("{}", self.projectile_mass_amu));
        kv("target_mass_amu", format!("{}", self.target_mass_amu));
        kv("basis_size", format!("{}", self.basis_size));
        kv("surface", surface.into());
        kv("morse_depth", format!("{}", self.surface.diatom.depth));
        kv("morse_r_eq", format!("{}", self.surface.diatom.r_eq));
        kv("morse_width", format!("{}", self.surface.diatom.width));
        kv("trotter_order", format!("{order}"));
        kv("prune_eps", format!("{}", self.prune_eps));
        kv("backend", backend.into());
        kv("shots", format!("{}", self.shots));
        kv("seed", format!("{}", self.seed));
        if let Some(grid) = &self.b_grid {
            let items: Vec<String> = grid.iter().map(|b| format!("{b}")).collect();
            kv("b_grid", items.join(","));
        }
        kv("ode_rtol", format!("{}", self.ode_rtol));
        kv("ode_atol", format!("{}", self.ode_atol));
        kv("initial_state", format!("{}", self.initial_state));
        let items: Vec<String> = self.nc_list.iter().map(|n| format!("{n}")).collect();
        kv("nc_list", items.join(","));
        kv("b", format!("{}", self.b));
        out
    }

    /// FNV-1a key identifying the coupling-table inputs (surface, mesh,
    /// masses, gamma, grid, table size).
    pub fn table_cache_key(&self, n_states: usize) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bits: u64| {
            for byte in bits.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.surface.diatom.depth.to_bits());
        eat(self.surface.diatom.r_eq.to_bits());
        eat(self.surface.diatom.width.to_bits());
        eat(match self.surface.rule {
            CombinationRule::PairwiseAdditive => 1,
            CombinationRule::NoInteraction => 2,
        });
        eat(self.mesh.r_min.to_bits());
        eat(self.mesh.r_max.to_bits());
        eat(self.mesh.n_points as u64);
        eat(self.reduced_mass_amu.to_bits());
        eat(self.gamma.to_bits());
        eat(self.delta_r.to_bits());
        eat(self.r_max.to_bits());
        eat(n_states as u64);
        format!("{h:016x}")
    }
}

/// Parse the flat config format: one `key = value` per line, `#` comments.
/// Unknown keys are errors that name the key.
pub fn parse_config(text: &str) -> Result<CollisionConfig> {
    let mut config = CollisionConfig::default();
    apply_config(&mut config, text)?;
    config.validate()?;
    Ok(config)
}

/// Apply key = value lines onto an existing config (no final validation).
pub fn apply_config(config: &mut CollisionConfig, text: &str) -> Result<()> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        set_key(config, key, value)
            .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
    }
    Ok(())
}

fn set_key(config: &mut CollisionConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    fn num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
        value.parse::<T>().map_err(|_| format!("key '{key}': cannot parse '{value}'"))
    }
    fn list<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<Vec<T>, String> {
        value
            .split(',')
            .map(|t| t.trim().parse::<T>().map_err(|_| format!("key '{key}': bad item '{t}'")))
            .collect()
    }
    match key {
        "e_lab_ev" => config.e_lab_ev = num(key, value)?,
        "gamma" => config.gamma = num(key, value)?,
        "tau" => config.tau = num(key, value)?,
        "r_max" => config.r_max = num(key, value)?,
        "delta_r" => config.delta_r = num(key, value)?,
        "mesh_r_min" => config.mesh.r_min = num(key, value)?,
        "mesh_r_max" => config.mesh.r_max = num(key, value)?,
        "mesh_points" => config.mesh.n_points = num(key, value)?,
        "reduced_mass_amu" => config.reduced_mass_amu = num(key, value)?,
        "projectile_mass_amu" => config.projectile_mass_amu = num(key, value)?,
        "target_mass_amu" => config.target_mass_amu = num(key, value)?,
        "basis_size" => config.basis_size = num(key, value)?,
        "surface" => {
            config.surface.rule = match value {
                "morse" => CombinationRule::PairwiseAdditive,
                "zero" => CombinationRule::NoInteraction,
                other => return Err(format!("key 'surface': unknown model '{other}'")),
            }
        }
        "morse_depth" => config.surface.diatom.depth = num(key, value)?,
        "morse_r_eq" => config.surface.diatom.r_eq = num(key, value)?,
        "morse_width" => config.surface.diatom.width = num(key, value)?,
        "trotter_order" => {
            config.trotter_order = match value {
                "1" => TrotterOrder::First,
                "2" => TrotterOrder::Second,
                other => return Err(format!("key 'trotter_order': must be 1 or 2, got '{other}'")),
            }
        }
        "prune_eps" => config.prune_eps = num(key, value)?,
        "backend" => {
            config.backend = match value {
                "fused" => Backend::Fused,
                "gates" => Backend::Gates,
                other => return Err(format!("key 'backend': unknown backend '{other}'")),
            }
        }
        "shots" => config.shots = num(key, value)?,
        "seed" => config.seed = num(key, value)?,
        "b_grid" => config.b_grid = Some(list(key, value)?),
        "ode_rtol" => config.ode_rtol = num(key, value)?,
        "ode_atol" => config.ode_atol = num(key, value)?,
        "initial_state" => config.initial_state = num(key, value)?,
        "nc_list" => config.nc_list = list(key, value)?,
        "b" => config.b = num(key, value)?,
        other => return Err(format!("unknown key '{other}'")),
    }
    Ok(())
}

/// Placeholder Morse defaults used in docs and tests.
pub fn default_surface() -> SurfaceModel {
    SurfaceModel { diatom: MorseParams::default(), rule: CombinationRule::PairwiseAdditive }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        CollisionConfig::default().validate().unwrap();
    }

    #[test]
    fn b_grid_shape() {
        let grid = default_b_grid();
        assert_eq!(grid.len(), 61);
        assert!((grid[0] - 0.01).abs() < 1e-15);
        assert!((grid[5] - 0.15).abs() < 1e-12);
        assert!((grid[50] - 3.3).abs() < 1e-12);
        assert!((grid[55] - 6.0).abs() < 1e-12);
        assert!((grid[60] - 12.0).abs() < 1e-12);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn parse_round_trip() {
        let mut config = CollisionConfig::default();
        config.tau = 0.1;
        config.basis_size = 32;
        config.b_grid = Some(vec![0.01, 0.5, 2.0]);
        config.surface.rule = CombinationRule::NoInteraction;
        let text = config.to_key_value();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "# comment\n\n tau = 0.05  # trailing\n";
        let config = parse_config(text).unwrap();
        assert_eq!(config.tau, 0.05);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("no_such_key = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("no_such_key"), "{msg}");
    }

    #[test]
    fn bad_value_is_rejected() {
        assert!(parse_config("tau = fast\n").is_err());
        assert!(parse_config("tau = -1\n").is_err());
        assert!(parse_config("surface = boothroyd\n").is_err());
        assert!(parse_config("b_grid = 2.0,1.0\n").is_err());
    }

    #[test]
    fn cache_key_distinguishes_grids() {
        let a = CollisionConfig::default();
        let mut b = a.clone();
        b.delta_r = 0.05;
        assert_ne!(a.table_cache_key(16), b.table_cache_key(16));
        assert_ne!(a.table_cache_key(16), a.table_cache_key(32));
        assert_eq!(a.table_cache_key(16), CollisionConfig::default().table_cache_key(16));
    }
}
