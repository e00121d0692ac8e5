//! Gate-level circuits and the Pauli-exponential compiler.
//!
//! compile_pauli_rotation turns e^{-i(theta/2) P} into elementary gates in
//! two steps: basis changes map X and Y letters onto Z (Hadamard sandwich for
//! X, RX(pi/2)/RX(-pi/2) for Y), then a CNOT ladder over the active qubits
//! accumulates parity onto the highest active qubit, where a single RZ(theta)
//! acts, and the ladder unwinds. The all-identity string is a pure global
//! phase e^{-i theta/2}, carried by an explicit GlobalPhase gate: probabilities
//! never see it, but under ancilla control it becomes a physical relative
//! phase, which the S-matrix extraction relies on.

use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliString};

/// Elementary gate. RX and RZ carry their e^{-+ i theta/2} phases exactly;
/// Controlled applies the inner gate on the control's |1> subspace.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H { qubit: usize },
    RX { qubit: usize, theta: f64 },
    RZ { qubit: usize, theta: f64 },
    CNOT { control: usize, target: usize },
    GlobalPhase { theta: f64 },
    Controlled { control: usize, gate: Box<Gate> },
}

impl Gate {
    /// Largest qubit index touched, if any.
    pub fn max_qubit(&self) -> Option<usize> {
        match self {
            Gate::H { qubit } | Gate::RX { qubit, .. } | Gate::RZ { qubit, .. } => Some(*qubit),
            Gate::CNOT { control, target } => Some(*control.max(target)),
            Gate::GlobalPhase { .. } => None,
            Gate::Controlled { control, gate } => {
                Some(gate.max_qubit().map_or(*control, |q| q.max(*control)))
            }
        }
    }

    /// Whether the gate acts on (or is controlled by) the given qubit.
    pub fn touches(&self, q: usize) -> bool {
        match self {
            Gate::H { qubit } | Gate::RX { qubit, .. } | Gate::RZ { qubit, .. } => *qubit == q,
            Gate::CNOT { control, target } => *control == q || *target == q,
            Gate::GlobalPhase { .. } => false,
            Gate::Controlled { control, gate } => *control == q || gate.touches(q),
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::H { qubit } => Gate::H { qubit: *qubit },
            Gate::RX { qubit, theta } => Gate::RX { qubit: *qubit, theta: -theta },
            Gate::RZ { qubit, theta } => Gate::RZ { qubit: *qubit, theta: -theta },
            Gate::CNOT { control, target } => Gate::CNOT { control: *control, target: *target },
            Gate::GlobalPhase { theta } => Gate::GlobalPhase { theta: -theta },
            Gate::Controlled { control, gate } => {
                Gate::Controlled { control: *control, gate: Box::new(gate.inverse()) }
            }
        }
    }

    fn write_text(&self, out: &mut String) {
        match self {
            Gate::H { qubit } => out.push_str(&format!("H q{qubit}")),
            Gate::RX { qubit, theta } => out.push_str(&format!("RX q{qubit} {theta}")),
            Gate::RZ { qubit, theta } => out.push_str(&format!("RZ q{qubit} {theta}")),
            Gate::CNOT { control, target } => out.push_str(&format!("CNOT q{control} q{target}")),
            Gate::GlobalPhase { theta } => out.push_str(&format!("PHASE {theta}")),
            Gate::Controlled { control, gate } => {
                out.push_str(&format!("CTRL q{control} "));
                gate.write_text(out);
            }
        }
    }
}

/// Ordered gate list over n qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    /// Append a gate; indices must fit and CNOT control must differ from its
    /// target (these are construction bugs, not runtime conditions).
    pub fn push(&mut self, gate: Gate) {
        if let Gate::CNOT { control, target } = &gate {
            assert_ne!(control, target, "CNOT control equals target");
        }
        if let Gate::Controlled { control, gate: inner } = &gate {
            assert!(!inner.touches(*control), "controlled gate overlaps its control");
        }
        if let Some(q) = gate.max_qubit() {
            assert!(q < self.n_qubits, "gate qubit {q} out of range for {} qubits", self.n_qubits);
        }
        self.gates.push(gate);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn append(&mut self, other: &Circuit) {
        assert!(other.n_qubits <= self.n_qubits);
        self.gates.extend(other.gates.iter().cloned());
    }

    /// Reversed gate list with negated angles; exact inverse of the circuit.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Line-based text export: "H q0", "RX q2 1.5707963267948966",
    /// "CNOT q0 q1", "PHASE -0.35", "CTRL q4 RZ q1 0.2".
    pub fn to_text(&self) -> String {
        let mut out = format!("# circuit qubits={}\n", self.n_qubits);
        for g in &self.gates {
            g.write_text(&mut out);
            out.push('\n');
        }
        out
    }
}

/// Compile e^{-i(theta/2) P} into elementary gates, exactly, global phase
/// included. Identity letters are skipped by the ladder; the all-identity
/// string compiles to GlobalPhase(-theta/2).
pub fn compile_pauli_rotation(p: &PauliString, theta: f64) -> Circuit {
    let n = p.n_qubits();
    let mut c = Circuit::new(n.max(1));
    let active: Vec<usize> = (0..n).filter(|&q| p.letter(q) != PauliLetter::I).collect();
    if active.is_empty() {
        c.push(Gate::GlobalPhase { theta: -theta / 2.0 });
        return c;
    }
    for &q in &active {
        match p.letter(q) {
            PauliLetter::X => c.push(Gate::H { qubit: q }),
            PauliLetter::Y => c.push(Gate::RX { qubit: q, theta: std::f64::consts::FRAC_PI_2 }),
            _ => {}
        }
    }
    for w in active.windows(2) {
        c.push(Gate::CNOT { control: w[0], target: w[1] });
    }
    let last = *active.last().unwrap();
    c.push(Gate::RZ { qubit: last, theta });
    for w in active.windows(2).rev() {
        c.push(Gate::CNOT { control: w[0], target: w[1] });
    }
    for &q in &active {
        match p.letter(q) {
            PauliLetter::X => c.push(Gate::H { qubit: q }),
            PauliLetter::Y => c.push(Gate::RX { qubit: q, theta: -std::f64::consts::FRAC_PI_2 }),
            _ => {}
        }
    }
    c
}

/// Expected gate count of compile_pauli_rotation for a string of weight >= 1:
/// 2#X + 2#Y basis changes, 2(w-1) CNOTs, one RZ.
pub fn pauli_rotation_gate_count(p: &PauliString) -> usize {
    let w = p.weight();
    2 * p.count_of(PauliLetter::X) + 2 * p.count_of(PauliLetter::Y) + 2 * (w - 1) + 1
}

/// Wrap every gate under an ancilla control. GlobalPhase becomes an
/// ancilla-local phase, preserving the circuit's global phase as a physical
/// relative phase.
pub fn control_circuit(c: &Circuit, ancilla: usize) -> Result<Circuit> {
    if ancilla < c.n_qubits {
        return Err(Error::QubitOutOfRange { index: ancilla, n_qubits: c.n_qubits });
    }
    let mut out = Circuit::new(c.n_qubits.max(ancilla + 1));
    for g in &c.gates {
        out.push(Gate::Controlled { control: ancilla, gate: Box::new(g.clone()) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_z_compiles_to_bare_rz() {
        let p = PauliString::parse("Z").unwrap();
        let c = compile_pauli_rotation(&p, 0.7);
        assert_eq!(c.gates, vec![Gate::RZ { qubit: 0, theta: 0.7 }]);
    }

    #[test]
    fn all_identity_is_global_phase() {
        let p = PauliString::parse("II").unwrap();
        let c = compile_pauli_rotation(&p, 0.7);
        assert_eq!(c.gates, vec![Gate::GlobalPhase { theta: -0.35 }]);
    }

    #[test]
    fn xiyx_gate_pattern() {
        // displayed "XIYX": X on qubit 3, I on qubit 2, Y on qubit 1, X on qubit 0;
        // ladder runs over active qubits 0, 1, 3 and skips the identity qubit.
        let p = PauliString::parse("XIYX").unwrap();
        let theta = 0.42;
        let c = compile_pauli_rotation(&p, theta);
        use Gate::*;
        let pi2 = std::f64::consts::FRAC_PI_2;
        assert_eq!(
            c.gates,
            vec![
                H { qubit: 0 },
                RX { qubit: 1, theta: pi2 },
                H { qubit: 3 },
                CNOT { control: 0, target: 1 },
                CNOT { control: 1, target: 3 },
                RZ { qubit: 3, theta },
                CNOT { control: 1, target: 3 },
                CNOT { control: 0, target: 1 },
                H { qubit: 0 },
                RX { qubit: 1, theta: -pi2 },
                H { qubit: 3 },
            ]
        );
        assert_eq!(c.len(), pauli_rotation_gate_count(&p));
    }

    #[test]
    fn gate_count_formula() {
        for s in ["X", "ZZ", "XIYX", "YYY", "ZIIX", "XYZ"] {
            let p = PauliString::parse(s).unwrap();
            let c = compile_pauli_rotation(&p, 1.0);
            assert_eq!(c.len(), pauli_rotation_gate_count(&p), "string {s}");
        }
    }

    #[test]
    fn inverse_reverses_and_negates() {
        let p = PauliString::parse("XZ").unwrap();
        let c = compile_pauli_rotation(&p, 0.3);
        let inv = c.inverse();
        assert_eq!(inv.gates.len(), c.gates.len());
        assert_eq!(inv.gates[0], *c.gates.last().unwrap());
        match (&c.gates[c.len() / 2], &inv.gates[inv.len() / 2]) {
            (Gate::RZ { theta: a, .. }, Gate::RZ { theta: b, .. }) => assert_eq!(*a, -*b),
            other => panic!("unexpected middle gates: {other:?}"),
        }
    }

    #[test]
    fn control_wraps_every_gate() {
        let p = PauliString::parse("XZ").unwrap();
        let c = compile_pauli_rotation(&p, 0.3);
        let ctl = control_circuit(&c, 2).unwrap();
        assert_eq!(ctl.n_qubits, 3);
        assert_eq!(ctl.len(), c.len());
        for g in &ctl.gates {
            assert!(matches!(g, Gate::Controlled { control: 2, .. }));
        }
        assert!(control_circuit(&c, 1).is_err());
    }

    #[test]
    fn text_export_format() {
        let mut c = Circuit::new(3);
        c.push(Gate::H { qubit: 0 });
        c.push(Gate::RX { qubit: 2, theta: 1.5 });
        c.push(Gate::CNOT { control: 0, target: 1 });
        c.push(Gate::GlobalPhase { theta: -0.35 });
        c.push(Gate::Controlled { control: 2, gate: Box::new(Gate::RZ { qubit: 1, theta: 0.25 }) });
        let text = c.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "H q0");
        assert_eq!(lines[2], "RX q2 1.5");
        assert_eq!(lines[3], "CNOT q0 q1");
        assert_eq!(lines[4], "PHASE -0.35");
        assert_eq!(lines[5], "CTRL q2 RZ q1 0.25");
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn push_rejects_out_of_range() {
        let mut c = Circuit::new(1);
        c.push(Gate::H { qubit: 1 });
    }
}
