//! Time-ordered evolution: Trotter steps chained along the trajectory.
//!
//! The evolution operator is the time-ordered product over steps t_k = -T + k
//! tau of e^{-i tau_k H(R(t_k))}, each factorized by first- or second-order
//! Suzuki-Trotter. The step count is M = ceil(2T/tau); when tau does not
//! divide 2T the final step is shortened to land exactly on +T and flagged.
//! A horizon shorter than one step collapses to an (flagged) identity.
//!
//! An `EvolutionSchedule` holds per-step Pauli coefficients against one shared
//! canonical string list instead of materializing the full gate list (at the
//! default tau the full circuit runs to ~1e8 gates). Steps can be compiled to
//! circuits on demand or executed directly; the `Fused` backend applies each
//! e^{-i(theta/2)P} factor as a single statevector pass and is verified
//! against per-gate execution of the compiled circuits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{compile_pauli_rotation, Circuit};
use crate::coupling::CouplingTable;
use crate::error::{Error, Result};
use crate::pauli::{butterfly_slot, pauli_transform_in_place, PauliLetter, PauliString, QubitHamiltonian};
use crate::simulator::{PauliAction, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrotterOrder {
    First,
    Second,
}

/// How schedules are executed: per-gate circuits or fused Pauli kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Gates,
    Fused,
}

/// Single Trotter step for a qubit Hamiltonian over duration tau.
/// Order 2 emits the palindrome with half-angle outer factors; order 1 the
/// plain product. An empty Hamiltonian yields an identity circuit.
pub fn trotter_step(hq: &QubitHamiltonian, tau: f64, order: TrotterOrder) -> Circuit {
    let mut c = Circuit::new(hq.n_qubits.max(1));
    if hq.terms.is_empty() {
        return c;
    }
    let mut idx: Vec<usize> = (0..hq.terms.len()).collect();
    idx.sort_by(|&a, &b| hq.terms[a].0.cmp(&hq.terms[b].0));
    match order {
        TrotterOrder::First => {
            for &k in &idx {
                let (p, g) = &hq.terms[k];
                c.append(&compile_pauli_rotation(p, 2.0 * tau * g));
            }
        }
        TrotterOrder::Second => {
            let m = idx.len();
            for &k in &idx[..m - 1] {
                let (p, g) = &hq.terms[k];
                c.append(&compile_pauli_rotation(p, tau * g));
            }
            let (p, g) = &hq.terms[idx[m - 1]];
            c.append(&compile_pauli_rotation(p, 2.0 * tau * g));
            for &k in idx[..m - 1].iter().rev() {
                let (p, g) = &hq.terms[k];
                c.append(&compile_pauli_rotation(p, tau * g));
            }
        }
    }
    c
}

/// Compiled evolution plan for one (impact parameter, tau) pair.
#[derive(Debug, Clone)]
pub struct EvolutionSchedule {
    n_qubits: usize,
    n_physical: usize,
    prune_eps: f64,
    /// Canonical list of strings with an even number of Y letters (the
    /// Hamiltonian along the trajectory is real symmetric).
    strings: Vec<PauliString>,
    actions: Vec<PauliAction>,
    /// Step end times t_k and durations tau_k.
    times: Vec<f64>,
    durations: Vec<f64>,
    /// Coefficients, row-major [step * strings.len() + slot].
    coeffs: Vec<f64>,
    /// Per-step slots with |g| above the pruning threshold.
    alive: Vec<Vec<u16>>,
    truncated_final: bool,
    empty_horizon: bool,
}

impl EvolutionSchedule {
    /// Sample the coupling table along R(t) and encode every step.
    /// `subset` selects the lowest basis states; the Hamiltonian is zero-padded
    /// to the next power of two (padded states stay dynamically decoupled).
    pub fn build(
        table: &CouplingTable,
        b: f64,
        velocity: f64,
        tau: f64,
        subset: usize,
        prune_eps: f64,
    ) -> Result<Self> {
        let r_max = table.r_max();
        if !(b >= 0.0) || b >= r_max {
            return Err(Error::ImpactParameterTooLarge { b, r_max });
        }
        if !(tau > 0.0) {
            return Err(Error::NonPositiveSpacing(tau));
        }
        if subset == 0 || subset > table.n_states() {
            return Err(Error::StateIndexOutOfRange { index: subset, size: table.n_states() });
        }
        let padded = subset.next_power_of_two().max(2);
        let n_qubits = padded.trailing_zeros() as usize;

        let strings: Vec<PauliString> = (0..(1usize << (2 * n_qubits)))
            .map(|code| PauliString::from_packed_code(code, n_qubits))
            .filter(|p| p.count_of(PauliLetter::Y) % 2 == 0)
            .collect();
        debug_assert!(strings.windows(2).all(|w| w[0] < w[1]));
        let codes: Vec<usize> = strings.iter().map(|p| p.code()).collect();
        let actions: Vec<PauliAction> = strings.iter().map(PauliAction::new).collect();

        let horizon = (r_max * r_max - b * b).sqrt() / velocity; // T(b)
        let total = 2.0 * horizon;
        let mut times = Vec::new();
        let mut durations = Vec::new();
        let mut truncated_final = false;
        let mut empty_horizon = false;
        if total < tau {
            empty_horizon = true;
        } else {
            let full_steps = (total / tau).floor() as usize;
            for k in 1..=full_steps {
                times.push(-horizon + k as f64 * tau);
                durations.push(tau);
            }
            let remainder = total - full_steps as f64 * tau;
            if remainder > 1e-12 * tau {
                times.push(horizon);
                durations.push(remainder);
                truncated_final = true;
            } else if let Some(last) = times.last_mut() {
                *last = horizon;
            }
        }

        let slots: Vec<usize> = codes.iter().map(|&c| butterfly_slot(c, n_qubits)).collect();
        let n_steps = times.len();
        let mut coeffs = vec![0.0f64; n_steps * strings.len()];
        let mut h_real = vec![0.0f64; padded * padded];
        let mut scratch = vec![Complex64::new(0.0, 0.0); padded * padded];
        for (k, &t) in times.iter().enumerate() {
            let r = crate::scattering::trajectory(b, velocity, t);
            table.fill_coupling_at(r, subset, &mut h_real, padded);
            for (dst, src) in scratch.iter_mut().zip(&h_real) {
                *dst = Complex64::new(*src, 0.0);
            }
            pauli_transform_in_place(&mut scratch, n_qubits);
            let row = &mut coeffs[k * slots.len()..(k + 1) * slots.len()];
            for (dst, &slot) in row.iter_mut().zip(&slots) {
                *dst = scratch[slot].re;
            }
        }
        let alive: Vec<Vec<u16>> = (0..n_steps)
            .map(|k| {
                let row = &coeffs[k * strings.len()..(k + 1) * strings.len()];
                (0..strings.len() as u16)
                    .filter(|&s| row[s as usize].abs() > prune_eps)
                    .collect()
            })
            .collect();

        Ok(Self {
            n_qubits,
            n_physical: subset,
            prune_eps,
            strings,
            actions,
            times,
            durations,
            coeffs,
            alive,
            truncated_final,
            empty_horizon,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of basis states before padding.
    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    pub fn n_steps(&self) -> usize {
        self.times.len()
    }

    pub fn truncated_final_step(&self) -> bool {
        self.truncated_final
    }

    /// True when 2T < tau collapsed the schedule to an identity.
    pub fn empty_horizon(&self) -> bool {
        self.empty_horizon
    }

    pub fn total_time(&self) -> f64 {
        self.durations.iter().sum()
    }

    pub fn step_time(&self, k: usize) -> f64 {
        self.times[k]
    }

    /// Pruned qubit Hamiltonian sampled for step k (canonical term order).
    pub fn step_hamiltonian(&self, k: usize) -> QubitHamiltonian {
        let row = &self.coeffs[k * self.strings.len()..(k + 1) * self.strings.len()];
        let terms = self.alive[k]
            .iter()
            .map(|&s| (self.strings[s as usize].clone(), row[s as usize]))
            .collect();
        QubitHamiltonian { n_qubits: self.n_qubits, terms }
    }

    /// Gate circuit for step k.
    pub fn step_circuit(&self, k: usize, order: TrotterOrder) -> Circuit {
        trotter_step(&self.step_hamiltonian(k), self.durations[k], order)
    }

    /// Materialize the whole evolution circuit. Fine for short schedules;
    /// the default tau runs to ~1e8 gates, use `run` instead there.
    pub fn to_circuit(&self, order: TrotterOrder) -> Circuit {
        let mut c = Circuit::new(self.n_qubits);
        for k in 0..self.n_steps() {
            c.append(&self.step_circuit(k, order));
        }
        c
    }

    /// Execute the schedule on `psi0`, optionally under an ancilla control.
    /// The register occupies qubits 0..n_qubits; `control`, when given, must
    /// lie outside it and within the state.
    pub fn run(
        &self,
        psi0: &Statevector,
        order: TrotterOrder,
        backend: Backend,
        control: Option<usize>,
    ) -> Result<Statevector> {
        let needed = match control {
            Some(c) => {
                if c < self.n_qubits {
                    return Err(Error::QubitOutOfRange { index: c, n_qubits: self.n_qubits });
                }
                c + 1
            }
            None => self.n_qubits,
        };
        if psi0.n_qubits() < needed {
            return Err(Error::QubitCountMismatch { state: psi0.n_qubits(), circuit: needed });
        }
        let ctrl_mask = control.map_or(0usize, |c| 1usize << c);
        let mut psi = psi0.clone();
        match backend {
            Backend::Gates => {
                for k in 0..self.n_steps() {
                    let circuit = self.step_circuit(k, order);
                    for gate in &circuit.gates {
                        psi.apply_gate_masked(gate, ctrl_mask)?;
                    }
                }
            }
            Backend::Fused => {
                // Precomputed index lists: for each possible pivot qubit the
                // control-satisfying bases with the pivot bit clear, plus the
                // control-satisfying indices for diagonal strings.
                let dim = 1usize << psi0.n_qubits();
                let pair_bases: Vec<Vec<u32>> = (0..self.n_qubits)
                    .map(|q| {
                        (0..dim as u32)
                            .filter(|&i| {
                                let i = i as usize;
                                i & (1 << q) == 0 && i & ctrl_mask == ctrl_mask
                            })
                            .collect()
                    })
                    .collect();
                let diag_indices: Vec<u32> = (0..dim as u32)
                    .filter(|&i| (i as usize) & ctrl_mask == ctrl_mask)
                    .collect();
                let apply = |psi: &mut Statevector, s: u16, theta: f64| {
                    let action = &self.actions[s as usize];
                    match action.pivot_qubit() {
                        Some(q) => {
                            psi.apply_pauli_rotation_pairs(action, theta, &pair_bases[q as usize])
                        }
                        None => psi.apply_pauli_rotation_diagonal(action, theta, &diag_indices),
                    }
                };
                for k in 0..self.n_steps() {
                    let row = &self.coeffs[k * self.strings.len()..(k + 1) * self.strings.len()];
                    let tau_k = self.durations[k];
                    let alive = &self.alive[k];
                    if alive.is_empty() {
                        continue;
                    }
                    match order {
                        TrotterOrder::First => {
                            for &s in alive {
                                apply(&mut psi, s, 2.0 * tau_k * row[s as usize]);
                            }
                        }
                        TrotterOrder::Second => {
                            let m = alive.len();
                            for &s in &alive[..m - 1] {
                                apply(&mut psi, s, tau_k * row[s as usize]);
                            }
                            let s = alive[m - 1];
                            apply(&mut psi, s, 2.0 * tau_k * row[s as usize]);
                            for &s in alive[..m - 1].iter().rev() {
                                apply(&mut psi, s, tau_k * row[s as usize]);
                            }
                        }
                    }
                }
            }
        }
        Ok(psi)
    }
}

/// Compile the full time-ordered evolution circuit (per-step re-encoded
/// coefficients, second order by default via `order`).
pub fn build_evolution_circuit(
    table: &CouplingTable,
    b: f64,
    velocity: f64,
    tau: f64,
    subset: usize,
    order: TrotterOrder,
    prune_eps: f64,
) -> Result<Circuit> {
    let schedule = EvolutionSchedule::build(table, b, velocity, tau, subset, prune_eps)?;
    if schedule.empty_horizon() {
        log::warn!("evolution horizon 2T < tau; emitting identity circuit");
    }
    if schedule.truncated_final_step() {
        log::debug!("final evolution step shortened to land on +T");
    }
    Ok(schedule.to_circuit(order))
}
