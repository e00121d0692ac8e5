//! Assembled pipeline: basis -> coupling table -> schedules -> observables.
//!
//! A `CollisionContext` owns the solved basis and the coupling table for one
//! configuration and hands out per-impact-parameter schedules, probabilities,
//! S-matrices and the ODE benchmark, all against the same inputs.

use crate::config::{default_b_grid, CollisionConfig};
use crate::coupling::{build_coupling_table, CouplingTable};
use crate::eigensolver::{build_fd_hamiltonian, solve_eigensystem, VibrationalBasis};
use crate::error::{Error, Result};
use crate::evolution::EvolutionSchedule;
use crate::ode::{
    benchmark_deviation, integrate_schrodinger, AmplitudeVector, DeviationReport, OdeOptions,
    DEVIATION_PROBABILITY_FLOOR,
};
use crate::scattering::projectile_velocity;
use crate::smatrix::{
    assemble_smatrix, transition_probabilities, ReadoutMode, SMatrix, SMatrixMeta,
};
use crate::units::amu_to_electron_masses;

#[derive(Debug, Clone)]
pub struct CollisionContext {
    pub config: CollisionConfig,
    pub basis: VibrationalBasis,
    pub table: CouplingTable,
    pub velocity: f64,
    subset: usize,
}

impl CollisionContext {
    /// Solve the basis and build the coupling table for `config.basis_size`
    /// states.
    pub fn prepare(config: CollisionConfig) -> Result<Self> {
        config.validate()?;
        let subset = config.basis_size;
        Self::prepare_subset(config, subset)
    }

    /// Variant for the convergence study: the evolved subset is all bound
    /// states plus `n_continuum` continuum states.
    pub fn prepare_with_continuum(mut config: CollisionConfig, n_continuum: usize) -> Result<Self> {
        let basis = solve_basis(&config)?;
        let subset = basis.n_bound() + n_continuum;
        if subset > basis.n_states() {
            return Err(Error::StateIndexOutOfRange { index: subset, size: basis.n_states() });
        }
        config.basis_size = subset;
        config.validate()?;
        Self::from_basis(config, basis, subset)
    }

    fn prepare_subset(config: CollisionConfig, subset: usize) -> Result<Self> {
        let basis = solve_basis(&config)?;
        Self::from_basis(config, basis, subset)
    }

    fn from_basis(config: CollisionConfig, basis: VibrationalBasis, subset: usize) -> Result<Self> {
        if subset == 0 || subset > basis.n_states() {
            return Err(Error::StateIndexOutOfRange { index: subset, size: basis.n_states() });
        }
        let table = build_coupling_table(
            &basis,
            &config.surface,
            config.gamma,
            config.delta_r,
            config.r_max,
            subset,
        )?;
        let velocity = projectile_velocity(
            config.e_lab_ev,
            config.projectile_mass_amu,
            config.target_mass_amu,
        );
        Ok(Self { config, basis, table, velocity, subset })
    }

    /// Rebuild around a cached coupling table (the CLI cache path).
    pub fn with_table(config: CollisionConfig, basis: VibrationalBasis, table: CouplingTable) -> Result<Self> {
        config.validate()?;
        let subset = config.basis_size;
        if subset == 0 || subset > table.n_states() {
            return Err(Error::StateIndexOutOfRange { index: subset, size: table.n_states() });
        }
        let velocity = projectile_velocity(
            config.e_lab_ev,
            config.projectile_mass_amu,
            config.target_mass_amu,
        );
        Ok(Self { config, basis, table, velocity, subset })
    }

    pub fn subset(&self) -> usize {
        self.subset
    }

    pub fn n_qubits(&self) -> usize {
        self.subset.next_power_of_two().max(2).trailing_zeros() as usize
    }

    pub fn subset_energies(&self) -> &[f64] {
        &self.table.energies()[..self.subset]
    }

    pub fn n_bound_in_subset(&self) -> usize {
        self.subset_energies().iter().filter(|&&e| e < 0.0).count()
    }

    pub fn continuum_indices_in_subset(&self) -> Vec<usize> {
        self.subset_energies()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn b_grid(&self) -> Vec<f64> {
        self.config.b_grid.clone().unwrap_or_else(default_b_grid)
    }

    fn readout_mode(&self) -> ReadoutMode {
        if self.config.shots == 0 {
            ReadoutMode::Exact
        } else {
            ReadoutMode::Shots { shots: self.config.shots, seed: self.config.seed }
        }
    }

    /// Per-step compiled evolution plan at impact parameter b.
    pub fn schedule(&self, b: f64) -> Result<EvolutionSchedule> {
        EvolutionSchedule::build(
            &self.table,
            b,
            self.velocity,
            self.config.tau,
            self.subset,
            self.config.prune_eps,
        )
    }

    /// Circuit-path final probabilities (padded register length).
    pub fn transition_probabilities(&self, initial: usize, b: f64) -> Result<Vec<f64>> {
        let schedule = self.schedule(b)?;
        transition_probabilities(
            &schedule,
            self.config.trotter_order,
            self.config.backend,
            initial,
            self.subset_energies(),
            self.readout_mode(),
        )
    }

    /// Full S-matrix over the physical subset at impact parameter b.
    pub fn assemble_smatrix(&self, b: f64) -> Result<SMatrix> {
        let schedule = self.schedule(b)?;
        let meta = SMatrixMeta {
            b,
            tau: self.config.tau,
            e_lab_ev: self.config.e_lab_ev,
            gamma: self.config.gamma,
            n_continuum: self.continuum_indices_in_subset().len(),
            basis_hash: self.basis.content_hash(),
            unitarity_defect: 0.0,
            shots: self.config.shots,
        };
        assemble_smatrix(
            &schedule,
            self.config.trotter_order,
            self.config.backend,
            self.readout_mode(),
            meta,
        )
    }

    /// RK5(4) benchmark amplitudes at +T.
    pub fn ode_final(&self, initial: usize, b: f64) -> Result<AmplitudeVector> {
        let opts = OdeOptions {
            rtol: self.config.ode_rtol,
            atol: self.config.ode_atol,
            ..OdeOptions::default()
        };
        integrate_schrodinger(&self.table, self.subset, b, self.velocity, initial, &opts)
    }

    /// Circuit vs ODE final probabilities and their deviation report.
    pub fn benchmark(&self, initial: usize, b: f64) -> Result<BenchmarkResult> {
        let circuit = self.transition_probabilities(initial, b)?;
        let ode = self.ode_final(initial, b)?;
        let p_ode = ode.probabilities();
        let report = benchmark_deviation(&circuit, &p_ode, DEVIATION_PROBABILITY_FLOOR);
        Ok(BenchmarkResult { circuit, ode: p_ode, report })
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    /// Circuit-path probabilities (padded register length).
    pub circuit: Vec<f64>,
    /// Benchmark probabilities (subset length).
    pub ode: Vec<f64>,
    pub report: DeviationReport,
}

fn solve_basis(config: &CollisionConfig) -> Result<VibrationalBasis> {
    let mu = amu_to_electron_masses(config.reduced_mass_amu);
    let surface = config.surface;
    let h = build_fd_hamiltonian(&config.mesh, |r| surface.diatom_potential(r), mu)?;
    solve_eigensystem(&h, &config.mesh, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_dimensions() {
        let mut config = CollisionConfig::default();
        config.basis_size = 4;
        let ctx = CollisionContext::prepare(config).unwrap();
        assert_eq!(ctx.subset(), 4);
        assert_eq!(ctx.n_qubits(), 2);
        assert_eq!(ctx.subset_energies().len(), 4);
        assert_eq!(ctx.n_bound_in_subset(), 4);
        assert!(ctx.continuum_indices_in_subset().is_empty());
        assert!((ctx.velocity - 0.063498).abs() < 1e-5);
    }

    #[test]
    fn continuum_preparation() {
        let mut config = CollisionConfig::default();
        config.mesh.n_points = 64; // keep the eigensolve cheap
        let ctx = CollisionContext::prepare_with_continuum(config, 3).unwrap();
        assert_eq!(ctx.continuum_indices_in_subset().len(), 3);
        assert_eq!(ctx.subset(), ctx.n_bound_in_subset() + 3);
    }
}
