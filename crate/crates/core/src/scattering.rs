//! Impact-parameter kinematics and cross-section quadrature.
//!
//! Cross sections are 2 pi integrals of b P(b) over the impact-parameter
//! grid, by trapezoid with zero extension beyond the last sample. The
//! continuum-convergence study reruns the pipeline with a growing number of
//! continuum states and reports deviations against the largest run.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::CollisionConfig;
use crate::error::{Error, Result};
use crate::pipeline::CollisionContext;
use crate::units::{amu_to_electron_masses, ev_to_hartree};

/// Straight-line trajectory R(t) = sqrt(b^2 + v^2 t^2); even in t.
pub fn trajectory(b: f64, v: f64, t: f64) -> f64 {
    (b * b + v * v * t * t).sqrt()
}

/// Time at which the trajectory reaches r_max: T(b) = sqrt(r_max^2 - b^2)/v.
pub fn time_horizon(b: f64, v: f64, r_max: f64) -> f64 {
    (r_max * r_max - b * b).max(0.0).sqrt() / v
}

/// Projectile velocity in a.u. from the lab energy: the center-of-mass energy
/// carries the usual m_target/(m_proj + m_target) factor and the reduced mass
/// is m_proj m_target/(m_proj + m_target).
pub fn projectile_velocity(e_lab_ev: f64, m_projectile_amu: f64, m_target_amu: f64) -> f64 {
    let fraction = m_target_amu / (m_projectile_amu + m_target_amu);
    let e_cm = ev_to_hartree(fraction * e_lab_ev);
    let reduced =
        amu_to_electron_masses(m_projectile_amu * m_target_amu / (m_projectile_amu + m_target_amu));
    (2.0 * e_cm / reduced).sqrt()
}

fn validate_b_grid(b_grid: &[f64]) -> Result<()> {
    if b_grid.len() < 2 {
        return Err(Error::QuadratureGridTooSmall(b_grid.len()));
    }
    if b_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridNotAscending);
    }
    Ok(())
}

/// sigma = 2 pi integral of b P(b) db, trapezoid over the grid with P = 0
/// beyond the last sample.
pub fn cross_section_bound(b_grid: &[f64], p_of_b: &[f64]) -> Result<f64> {
    validate_b_grid(b_grid)?;
    if p_of_b.len() != b_grid.len() {
        return Err(Error::QuadratureGridTooSmall(p_of_b.len()));
    }
    if p_of_b.iter().any(|&p| !(-1e-9..=1.0 + 1e-9).contains(&p)) {
        return Err(Error::Config("transition probabilities outside [0, 1]".into()));
    }
    let mut acc = 0.0;
    for k in 0..b_grid.len() - 1 {
        let f0 = b_grid[k] * p_of_b[k];
        let f1 = b_grid[k + 1] * p_of_b[k + 1];
        acc += 0.5 * (f0 + f1) * (b_grid[k + 1] - b_grid[k]);
    }
    Ok(2.0 * std::f64::consts::PI * acc)
}

/// Dissociation cross section: Eq.-29-style sum of P into the listed
/// continuum states at each b, then the same quadrature.
pub fn cross_section_dissociation(
    b_grid: &[f64],
    p_rows: &[Vec<f64>],
    continuum_indices: &[usize],
) -> Result<f64> {
    if continuum_indices.is_empty() {
        return Err(Error::NoContinuumStates);
    }
    validate_b_grid(b_grid)?;
    let summed: Vec<f64> = p_rows
        .iter()
        .map(|row| continuum_indices.iter().map(|&j| row[j]).sum::<f64>())
        .collect();
    cross_section_bound(b_grid, &summed)
}

/// One initial state's cross sections at a given continuum count.
#[derive(Debug, Clone, Serialize)]
pub struct CrossSectionSet {
    pub initial: usize,
    pub n_continuum: usize,
    /// sigma_{i->j} for every bound final state j (elastic j = i included;
    /// report it separately downstream).
    pub bound: Vec<f64>,
    /// sigma_{i->D}; zero when no continuum states are included.
    pub dissociation: f64,
    /// b P_D(b) profile for plotting.
    pub b_profile_dissociation: Vec<(f64, f64)>,
}

/// Convergence of cross sections with the number of included continuum
/// states; deviations are percentages against the largest-N_c run.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub nc_list: Vec<usize>,
    pub initial_states: Vec<usize>,
    /// sets[s][k]: initial_states[s] at nc_list[k].
    pub sets: Vec<Vec<CrossSectionSet>>,
    /// dissociation_deviation_percent[s][k] vs the largest N_c.
    pub dissociation_deviation_percent: Vec<Vec<f64>>,
    /// bound_deviation_percent[s][k][j] per bound final state.
    pub bound_deviation_percent: Vec<Vec<Vec<f64>>>,
}

/// Scan the b grid for one initial state and integrate the cross sections.
pub fn cross_sections_for_initial(
    ctx: &CollisionContext,
    initial: usize,
) -> Result<CrossSectionSet> {
    let b_grid = ctx.b_grid();
    let rows: Result<Vec<Vec<f64>>> =
        b_grid.par_iter().map(|&b| ctx.transition_probabilities(initial, b)).collect();
    let rows = rows?;
    let n_bound = ctx.n_bound_in_subset();
    let continuum = ctx.continuum_indices_in_subset();
    let bound: Result<Vec<f64>> = (0..n_bound)
        .map(|j| {
            let p: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            cross_section_bound(&b_grid, &p)
        })
        .collect();
    let (dissociation, profile) = if continuum.is_empty() {
        (0.0, b_grid.iter().map(|&b| (b, 0.0)).collect())
    } else {
        let sums: Vec<f64> =
            rows.iter().map(|r| continuum.iter().map(|&j| r[j]).sum::<f64>()).collect();
        let sigma = cross_section_dissociation(&b_grid, &rows, &continuum)?;
        (sigma, b_grid.iter().zip(&sums).map(|(&b, &p)| (b, b * p)).collect())
    };
    Ok(CrossSectionSet {
        initial,
        n_continuum: continuum.len(),
        bound: bound?,
        dissociation,
        b_profile_dissociation: profile,
    })
}

/// Rerun the pipeline for each requested continuum count (basis = all bound
/// states + N_c continuum states) and tabulate deviations from the largest.
/// A requested N_c = 0 contributes an empty Eq.-29 sum (sigma_D = 0).
pub fn convergence_study(
    base: &CollisionConfig,
    initial_states: &[usize],
    nc_list: &[usize],
) -> Result<ConvergenceStudy> {
    if nc_list.is_empty() || nc_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("nc_list must be non-empty and ascending".into()));
    }
    let mut sets: Vec<Vec<CrossSectionSet>> = vec![Vec::new(); initial_states.len()];
    for &nc in nc_list {
        let mut config = base.clone();
        config.basis_size = 0; // derived below from the bound count
        let ctx = CollisionContext::prepare_with_continuum(config, nc)?;
        for (s, &i) in initial_states.iter().enumerate() {
            sets[s].push(cross_sections_for_initial(&ctx, i)?);
        }
    }
    let last = nc_list.len() - 1;
    let mut dis_dev = vec![vec![0.0; nc_list.len()]; initial_states.len()];
    let mut bound_dev = vec![vec![Vec::new(); nc_list.len()]; initial_states.len()];
    for s in 0..initial_states.len() {
        let reference = &sets[s][last];
        for k in 0..nc_list.len() {
            let set = &sets[s][k];
            dis_dev[s][k] = if reference.dissociation.abs() > 0.0 {
                100.0 * (set.dissociation - reference.dissociation).abs()
                    / reference.dissociation.abs()
            } else {
                0.0
            };
            bound_dev[s][k] = set
                .bound
                .iter()
                .zip(&reference.bound)
                .map(|(a, r)| if r.abs() > 0.0 { 100.0 * (a - r).abs() / r.abs() } else { 0.0 })
                .collect();
        }
    }
    Ok(ConvergenceStudy {
        nc_list: nc_list.to_vec(),
        initial_states: initial_states.to_vec(),
        sets,
        dissociation_deviation_percent: dis_dev,
        bound_deviation_percent: bound_dev,
    })
}
