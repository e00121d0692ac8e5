//! Exact statevector execution.
//!
//! Amplitude layout: basis-index bit k is qubit k. Every kernel takes a
//! control mask (bits that must all be 1 for an amplitude to participate), so
//! Controlled gates execute natively instead of being decomposed; a controlled
//! GlobalPhase correctly becomes a phase on the control's |1> subspace.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliString};

const DENSE_UNITARY_QUBIT_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// |0...0>.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Computational basis state |index>.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if index >= (1 << n_qubits) {
            return Err(Error::StateIndexOutOfRange { index, size: 1 << n_qubits });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::QubitCountMismatch { state: amps.len(), circuit: 1 << n_qubits });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// <self|other>.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Exact |amplitude|^2 per basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Seeded multinomial draw; counts per basis state, reproducible per seed.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let probs = self.probabilities();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; probs.len()];
        for _ in 0..shots {
            let u: f64 = rng.gen_range(0.0..total);
            let idx = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
            counts[idx] += 1;
        }
        Ok(counts)
    }

    /// Apply one gate in place.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        self.apply_gate_masked(gate, 0)
    }

    pub(crate) fn apply_gate_masked(&mut self, gate: &Gate, ctrl_mask: usize) -> Result<()> {
        let dim = self.amps.len();
        let check = |q: usize| -> Result<()> {
            if q >= self.n_qubits {
                Err(Error::QubitOutOfRange { index: q, n_qubits: self.n_qubits })
            } else {
                Ok(())
            }
        };
        match gate {
            Gate::H { qubit } => {
                check(*qubit)?;
                let bit = 1usize << qubit;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for idx in 0..dim {
                    if idx & bit != 0 || idx & ctrl_mask != ctrl_mask {
                        continue;
                    }
                    let j = idx | bit;
                    let a = self.amps[idx];
                    let b = self.amps[j];
                    self.amps[idx] = (a + b) * s;
                    self.amps[j] = (a - b) * s;
                }
            }
            Gate::RX { qubit, theta } => {
                check(*qubit)?;
                let bit = 1usize << qubit;
                let c = (theta / 2.0).cos();
                let ms = Complex64::new(0.0, -(theta / 2.0).sin());
                for idx in 0..dim {
                    if idx & bit != 0 || idx & ctrl_mask != ctrl_mask {
                        continue;
                    }
                    let j = idx | bit;
                    let a = self.amps[idx];
                    let b = self.amps[j];
                    self.amps[idx] = a * c + b * ms;
                    self.amps[j] = a * ms + b * c;
                }
            }
            Gate::RZ { qubit, theta } => {
                check(*qubit)?;
                let bit = 1usize << qubit;
                let lo = Complex64::from_polar(1.0, -theta / 2.0);
                let hi = Complex64::from_polar(1.0, theta / 2.0);
                for idx in 0..dim {
                    if idx & ctrl_mask != ctrl_mask {
                        continue;
                    }
                    self.amps[idx] *= if idx & bit == 0 { lo } else { hi };
                }
            }
            Gate::CNOT { control, target } => {
                check(*control)?;
                check(*target)?;
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for idx in 0..dim {
                    if idx & cbit == 0 || idx & tbit != 0 || idx & ctrl_mask != ctrl_mask {
                        continue;
                    }
                    self.amps.swap(idx, idx | tbit);
                }
            }
            Gate::GlobalPhase { theta } => {
                let ph = Complex64::from_polar(1.0, *theta);
                for idx in 0..dim {
                    if idx & ctrl_mask != ctrl_mask {
                        continue;
                    }
                    self.amps[idx] *= ph;
                }
            }
            Gate::Controlled { control, gate } => {
                check(*control)?;
                self.apply_gate_masked(gate, ctrl_mask | (1usize << control))?;
            }
        }
        Ok(())
    }

    /// Pair update for a flipping string over precomputed base indices
    /// (pivot bit clear, control mask satisfied).
    pub(crate) fn apply_pauli_rotation_pairs(
        &mut self,
        action: &PauliAction,
        theta: f64,
        bases: &[u32],
    ) {
        debug_assert_ne!(action.flip, 0);
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        let w = Complex64::new(0.0, -s) * action.prefactor;
        for &base in bases {
            let idx = base as usize;
            let partner = idx ^ action.flip;
            let sign_idx = if (idx & action.phase_mask).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            let sign_par =
                if (partner & action.phase_mask).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            let a = self.amps[idx];
            let b = self.amps[partner];
            self.amps[idx] = a * c + b * (w * sign_par);
            self.amps[partner] = b * c + a * (w * sign_idx);
        }
    }

    /// Diagonal update for a Z-only string over precomputed indices.
    pub(crate) fn apply_pauli_rotation_diagonal(
        &mut self,
        action: &PauliAction,
        theta: f64,
        indices: &[u32],
    ) {
        debug_assert_eq!(action.flip, 0);
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        let w = Complex64::new(0.0, -s) * action.prefactor;
        let lo = Complex64::new(c, 0.0) + w;
        let hi = Complex64::new(c, 0.0) - w;
        for &i in indices {
            let idx = i as usize;
            let neg = (idx & action.phase_mask).count_ones() & 1 == 1;
            self.amps[idx] *= if neg { hi } else { lo };
        }
    }

    /// Apply e^{-i(theta/2) P} in one fused pass.
    pub(crate) fn apply_pauli_rotation(
        &mut self,
        action: &PauliAction,
        theta: f64,
        ctrl_mask: usize,
    ) {
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        // weight w such that the partner contribution is w * sign(partner)
        let w = Complex64::new(0.0, -s) * action.prefactor;
        let dim = self.amps.len();
        if action.flip == 0 {
            let lo = Complex64::new(c, 0.0) + w; // sign +1
            let hi = Complex64::new(c, 0.0) - w; // sign -1
            for idx in 0..dim {
                if idx & ctrl_mask != ctrl_mask {
                    continue;
                }
                let neg = (idx & action.phase_mask).count_ones() & 1 == 1;
                self.amps[idx] *= if neg { hi } else { lo };
            }
            return;
        }
        let pivot = 1usize << (usize::BITS - 1 - action.flip.leading_zeros() as u32);
        for idx in 0..dim {
            if idx & pivot != 0 || idx & ctrl_mask != ctrl_mask {
                continue;
            }
            let partner = idx ^ action.flip;
            let sign_idx = if (idx & action.phase_mask).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            let sign_par =
                if (partner & action.phase_mask).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            let a = self.amps[idx];
            let b = self.amps[partner];
            self.amps[idx] = a * c + b * (w * sign_par);
            self.amps[partner] = b * c + a * (w * sign_idx);
        }
    }
}

/// Precomputed action of a Pauli string on basis states:
/// P|x> = prefactor * (-1)^{popcount(x & phase_mask)} |x ^ flip>.
#[derive(Debug, Clone)]
pub(crate) struct PauliAction {
    flip: usize,
    phase_mask: usize,
    prefactor: Complex64,
}

impl PauliAction {
    /// Highest flipped qubit; None for diagonal (Z/I-only) strings.
    pub(crate) fn pivot_qubit(&self) -> Option<u32> {
        if self.flip == 0 {
            None
        } else {
            Some(usize::BITS - 1 - self.flip.leading_zeros())
        }
    }

    pub fn new(p: &PauliString) -> Self {
        let mut flip = 0usize;
        let mut phase_mask = 0usize;
        let mut y_count = 0u32;
        for q in 0..p.n_qubits() {
            match p.letter(q) {
                PauliLetter::I => {}
                PauliLetter::X => flip |= 1 << q,
                PauliLetter::Y => {
                    flip |= 1 << q;
                    phase_mask |= 1 << q;
                    y_count += 1;
                }
                PauliLetter::Z => phase_mask |= 1 << q,
            }
        }
        let prefactor = match y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Self { flip, phase_mask, prefactor }
    }
}

/// Run a circuit on an initial state.
pub fn run(c: &Circuit, psi0: &Statevector) -> Result<Statevector> {
    if c.n_qubits != psi0.n_qubits() {
        return Err(Error::QubitCountMismatch { state: psi0.n_qubits(), circuit: c.n_qubits });
    }
    let mut psi = psi0.clone();
    for g in &c.gates {
        psi.apply_gate(g)?;
    }
    Ok(psi)
}

/// Dense unitary of the circuit; column i is run(c, |i>). Guarded against
/// large registers.
pub fn circuit_unitary(c: &Circuit) -> Result<Array2<Complex64>> {
    if c.n_qubits > DENSE_UNITARY_QUBIT_LIMIT {
        return Err(Error::CircuitTooLarge {
            requested: c.n_qubits,
            limit: DENSE_UNITARY_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << c.n_qubits;
    let mut u = Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
    for col in 0..dim {
        let out = run(c, &Statevector::basis_state(c.n_qubits, col)?)?;
        for row in 0..dim {
            u[[row, col]] = out.amplitude(row);
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::compile_pauli_rotation;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_state(n: usize, seed: u64) -> Statevector {
        let mut rng = StdRng::seed_from_u64(seed);
        let dim = 1usize << n;
        let mut amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Statevector::from_amplitudes(n, amps).unwrap()
    }

    #[test]
    fn rz_phase_on_zero() {
        let mut psi = Statevector::zero(1);
        psi.apply_gate(&Gate::RZ { qubit: 0, theta: 0.8 }).unwrap();
        let expect = Complex64::from_polar(1.0, -0.4);
        assert!((psi.amplitude(0) - expect).norm() < 1e-15);
    }

    #[test]
    fn rx_pi_flips_with_minus_i() {
        let mut psi = Statevector::zero(1);
        psi.apply_gate(&Gate::RX { qubit: 0, theta: std::f64::consts::PI }).unwrap();
        assert!(psi.amplitude(0).norm() < 1e-15);
        assert!((psi.amplitude(1) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn double_hadamard_is_identity() {
        let mut c = Circuit::new(1);
        c.push(Gate::H { qubit: 0 });
        c.push(Gate::H { qubit: 0 });
        let psi = run(&c, &Statevector::zero(1)).unwrap();
        assert!((psi.amplitude(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gates_preserve_norm() {
        let mut psi = random_state(3, 5);
        let gates = [
            Gate::H { qubit: 1 },
            Gate::RX { qubit: 0, theta: 0.7 },
            Gate::RZ { qubit: 2, theta: -1.2 },
            Gate::CNOT { control: 0, target: 2 },
            Gate::GlobalPhase { theta: 0.3 },
            Gate::Controlled { control: 1, gate: Box::new(Gate::RX { qubit: 0, theta: 0.4 }) },
        ];
        for g in &gates {
            psi.apply_gate(g).unwrap();
            assert!((psi.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cnot_unitary_is_permutation() {
        let mut c = Circuit::new(2);
        c.push(Gate::CNOT { control: 0, target: 1 });
        let u = circuit_unitary(&c).unwrap();
        // |00>->|00>, |01>->|11>, |10>->|10>, |11>->|01> (qubit 0 = LSB control)
        let one = Complex64::new(1.0, 0.0);
        assert!((u[[0, 0]] - one).norm() < 1e-15);
        assert!((u[[3, 1]] - one).norm() < 1e-15);
        assert!((u[[2, 2]] - one).norm() < 1e-15);
        assert!((u[[1, 3]] - one).norm() < 1e-15);
    }

    #[test]
    fn empty_circuit_identity() {
        let c = Circuit::new(2);
        let psi0 = random_state(2, 9);
        let psi = run(&c, &psi0).unwrap();
        assert_eq!(psi, psi0);
    }

    #[test]
    fn controlled_gate_inactive_on_zero_control() {
        let mut c = Circuit::new(2);
        c.push(Gate::Controlled { control: 1, gate: Box::new(Gate::H { qubit: 0 }) });
        let psi = run(&c, &Statevector::zero(2)).unwrap();
        assert!((psi.amplitude(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn controlled_global_phase_is_relative() {
        let mut prep = Circuit::new(1);
        prep.push(Gate::H { qubit: 0 });
        let mut psi = run(&prep, &Statevector::zero(1)).unwrap();
        psi.apply_gate(&Gate::Controlled {
            control: 0,
            gate: Box::new(Gate::GlobalPhase { theta: 0.9 }),
        })
        .unwrap();
        let ratio = psi.amplitude(1) / psi.amplitude(0);
        assert!((ratio - Complex64::from_polar(1.0, 0.9)).norm() < 1e-14);
    }

    #[test]
    fn linearity_of_run() {
        let p = PauliString::parse("YX").unwrap();
        let c = compile_pauli_rotation(&p, 0.83);
        let psi1 = random_state(2, 21);
        let psi2 = random_state(2, 22);
        let (alpha, beta) = (Complex64::new(0.6, -0.2), Complex64::new(-0.3, 0.7));
        let mixed_amps: Vec<Complex64> = psi1
            .amplitudes()
            .iter()
            .zip(psi2.amplitudes())
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        let mixed = Statevector::from_amplitudes(2, mixed_amps).unwrap();
        let out_mixed = run(&c, &mixed).unwrap();
        let out1 = run(&c, &psi1).unwrap();
        let out2 = run(&c, &psi2).unwrap();
        for k in 0..4 {
            let want = alpha * out1.amplitude(k) + beta * out2.amplitude(k);
            assert!((out_mixed.amplitude(k) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn fused_rotation_matches_compiled_circuit() {
        for s in ["Z", "XY", "XIYX", "YY", "IZI", "XZY"] {
            let p = PauliString::parse(s).unwrap();
            let n = p.n_qubits();
            let c = compile_pauli_rotation(&p, 0.477);
            let psi0 = random_state(n, 33);
            let via_gates = run(&c, &psi0).unwrap();
            let mut via_fused = psi0.clone();
            via_fused.apply_pauli_rotation(&PauliAction::new(&p), 0.477, 0);
            for k in 0..(1 << n) {
                assert!(
                    (via_gates.amplitude(k) - via_fused.amplitude(k)).norm() < 1e-13,
                    "string {s}, amp {k}"
                );
            }
        }
    }

    #[test]
    fn fused_rotation_controlled_matches_wrapped_circuit() {
        let p = PauliString::parse("XZ").unwrap();
        let c = compile_pauli_rotation(&p, 1.1);
        let ctl = crate::circuit::control_circuit(&c, 2).unwrap();
        let psi0 = random_state(3, 44);
        let via_gates = run(&ctl, &psi0).unwrap();
        let mut via_fused = psi0.clone();
        via_fused.apply_pauli_rotation(&PauliAction::new(&p), 1.1, 1 << 2);
        for k in 0..8 {
            assert!((via_gates.amplitude(k) - via_fused.amplitude(k)).norm() < 1e-13);
        }
    }

    #[test]
    fn probabilities_of_basis_and_uniform() {
        let psi = Statevector::basis_state(2, 3).unwrap();
        assert_eq!(psi.probabilities(), vec![0.0, 0.0, 0.0, 1.0]);
        let mut c = Circuit::new(2);
        c.push(Gate::H { qubit: 0 });
        c.push(Gate::H { qubit: 1 });
        let uni = run(&c, &Statevector::zero(2)).unwrap();
        for p in uni.probabilities() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling_reproducible_and_within_bounds() {
        let mut c = Circuit::new(2);
        c.push(Gate::H { qubit: 0 });
        c.push(Gate::RX { qubit: 1, theta: 0.9 });
        let psi = run(&c, &Statevector::zero(2)).unwrap();
        let shots = 100_000u64;
        let counts = psi.sample(shots, 7).unwrap();
        assert_eq!(counts, psi.sample(shots, 7).unwrap());
        assert_ne!(counts, psi.sample(shots, 8).unwrap());
        assert_eq!(counts.iter().sum::<u64>(), shots);
        for (k, p) in psi.probabilities().iter().enumerate() {
            let sigma = (p * (1.0 - p) * shots as f64).sqrt();
            let dev = (counts[k] as f64 - p * shots as f64).abs();
            assert!(dev <= 4.0 * sigma + 1.0, "outcome {k}: dev {dev}, sigma {sigma}");
        }
        assert!(matches!(psi.sample(0, 1), Err(Error::ZeroShots)));
    }

    #[test]
    fn norm_drift_over_many_gates() {
        let mut rng = StdRng::seed_from_u64(99);
        let mut psi = random_state(4, 1);
        for _ in 0..10_000 {
            let q = rng.gen_range(0..4);
            let g = match rng.gen_range(0..4) {
                0 => Gate::H { qubit: q },
                1 => Gate::RX { qubit: q, theta: rng.gen_range(-3.0..3.0) },
                2 => Gate::RZ { qubit: q, theta: rng.gen_range(-3.0..3.0) },
                _ => {
                    let t = (q + 1 + rng.gen_range(0..3)) % 4;
                    Gate::CNOT { control: q, target: t }
                }
            };
            psi.apply_gate(&g).unwrap();
        }
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_gate_rejected() {
        let mut psi = Statevector::zero(1);
        assert!(psi.apply_gate(&Gate::H { qubit: 1 }).is_err());
        let c = Circuit::new(2);
        assert!(run(&c, &Statevector::zero(1)).is_err());
    }

    #[test]
    fn unitary_guard() {
        let c = Circuit::new(11);
        assert!(matches!(circuit_unitary(&c), Err(Error::CircuitTooLarge { .. })));
    }
}
