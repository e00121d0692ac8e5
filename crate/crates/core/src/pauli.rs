//! Compact qubit encoding of an N-state Hamiltonian (N = 2^n).
//!
//! Basis state i maps to the i-th computational basis state of n qubits, so
//! the Hamiltonian becomes a real combination of n-fold Pauli strings,
//! H = sum_k g_k P_k with g_k = Tr(P_k H) / 2^n. Coefficients are extracted by
//! a recursive block transform (cost O(N^2 log N)) instead of enumerating the
//! 4^n traces.
//!
//! Conventions: qubit k is the k-th bit of the basis index (qubit 0 least
//! significant). Displayed strings read most-significant qubit first, matching
//! the ket |y_{n-1}, ..., y_0>; canonical term order is lexicographic over the
//! displayed string with I < X < Y < Z.

use ndarray::{linalg::kron, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Single-qubit Pauli letter; declaration order defines the canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub fn code(self) -> usize {
        match self {
            PauliLetter::I => 0,
            PauliLetter::X => 1,
            PauliLetter::Y => 2,
            PauliLetter::Z => 3,
        }
    }

    pub fn from_code(code: usize) -> Self {
        match code & 3 {
            0 => PauliLetter::I,
            1 => PauliLetter::X,
            2 => PauliLetter::Y,
            _ => PauliLetter::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    /// Dense 2x2 matrix.
    pub fn matrix(self) -> Array2<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            PauliLetter::I => ndarray::array![[l, o], [o, l]],
            PauliLetter::X => ndarray::array![[o, l], [l, o]],
            PauliLetter::Y => ndarray::array![[o, -i], [i, o]],
            PauliLetter::Z => ndarray::array![[l, o], [o, -l]],
        }
    }
}

/// Tensor product of Pauli letters; `letters[k]` acts on qubit k.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<PauliLetter>,
}

impl PauliString {
    pub fn new(letters: Vec<PauliLetter>) -> Self {
        Self { letters }
    }

    /// Identity string on n qubits.
    pub fn identity(n: usize) -> Self {
        Self { letters: vec![PauliLetter::I; n] }
    }

    /// Parse a displayed string, most-significant qubit first: "XIZ" on three
    /// qubits puts X on qubit 2 and Z on qubit 0.
    pub fn parse(text: &str) -> Result<Self> {
        let mut letters = Vec::with_capacity(text.len());
        for c in text.chars().rev() {
            letters.push(match c {
                'I' => PauliLetter::I,
                'X' => PauliLetter::X,
                'Y' => PauliLetter::Y,
                'Z' => PauliLetter::Z,
                _ => return Err(Error::Config(format!("bad Pauli letter '{c}'"))),
            });
        }
        Ok(Self { letters })
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        self.letters[qubit]
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != PauliLetter::I).count()
    }

    pub fn count_of(&self, letter: PauliLetter) -> usize {
        self.letters.iter().filter(|&&l| l == letter).count()
    }

    /// Packed base-4 code, qubit 0 in the least significant digit.
    pub fn code(&self) -> usize {
        self.letters.iter().enumerate().map(|(q, l)| l.code() << (2 * q)).sum()
    }

    pub fn from_packed_code(code: usize, n: usize) -> Self {
        Self {
            letters: (0..n).map(|q| PauliLetter::from_code(code >> (2 * q))).collect(),
        }
    }

    /// Dense 2^n x 2^n matrix (qubit n-1 is the most significant factor).
    pub fn dense(&self) -> Array2<Complex64> {
        let n = self.n_qubits();
        let mut m = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
        for q in (0..n).rev() {
            m = kron(&m, &self.letters[q].matrix());
        }
        m
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in self.letters.iter().rev() {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    /// Lexicographic over the displayed string (MSB qubit first).
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.letters
            .iter()
            .rev()
            .cmp(other.letters.iter().rev())
            .then(self.letters.len().cmp(&other.letters.len()))
    }
}

/// Qubit Hamiltonian H = sum_k g_k P_k with real coefficients, terms in
/// canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitHamiltonian {
    pub n_qubits: usize,
    pub terms: Vec<(PauliString, f64)>,
}

impl QubitHamiltonian {
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Term-list export: one line per term, "ZXIY<TAB>g".
    pub fn to_term_list(&self) -> String {
        let mut out = String::new();
        for (p, g) in &self.terms {
            out.push_str(&format!("{p}\t{g}\n"));
        }
        out
    }
}

/// Map basis index i to its qubit computational state, most significant
/// qubit first: (y_{n-1}, ..., y_0).
pub fn basis_index_to_qubit_state(i: usize, n: usize) -> Result<Vec<u8>> {
    if n >= usize::BITS as usize || i >= (1usize << n) {
        return Err(Error::StateIndexOutOfRange { index: i, size: 1usize.checked_shl(n as u32).unwrap_or(usize::MAX) });
    }
    Ok((0..n).rev().map(|k| ((i >> k) & 1) as u8).collect())
}

/// In-place Pauli butterfly over a row-major 2^n x 2^n matrix stored flat
/// (entry (r, c) at index (r << n) | c). One pass per qubit combines the
/// four entries differing in that qubit's row/column bits into the
/// I/X/Y/Z half-sums; after all passes the slot with column bits `cb` and
/// row bits `rb` holds the coefficient of the string whose letter on qubit q
/// is decoded from (rb_q, cb_q): (0,0)=I, (0,1)=X, (1,0)=Y, (1,1)=Z.
/// Cost O(N^2 log N), no allocation.
pub(crate) fn pauli_transform_in_place(data: &mut [Complex64], n_qubits: usize) {
    debug_assert_eq!(data.len(), 1usize << (2 * n_qubits));
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    for q in 0..n_qubits {
        let bit_c = 1usize << q;
        let bit_r = 1usize << (q + n_qubits);
        for idx in 0..data.len() {
            if idx & (bit_c | bit_r) != 0 {
                continue;
            }
            let a = data[idx];
            let b = data[idx | bit_c];
            let c = data[idx | bit_r];
            let d = data[idx | bit_c | bit_r];
            data[idx] = (a + d) * half;
            data[idx | bit_c] = (b + c) * half;
            data[idx | bit_r] = (b - c) * half_i;
            data[idx | bit_c | bit_r] = (a - d) * half;
        }
    }
}

/// Transform slot holding the coefficient for a packed base-4 string code.
pub(crate) fn butterfly_slot(code: usize, n_qubits: usize) -> usize {
    let mut c_bits = 0usize;
    let mut r_bits = 0usize;
    for q in 0..n_qubits {
        let letter = (code >> (2 * q)) & 3;
        c_bits |= (letter & 1) << q;
        r_bits |= (letter >> 1) << q;
    }
    c_bits | (r_bits << n_qubits)
}

/// Pauli coefficients of a dense matrix for every string code
/// (index = packed base-4 code). Complex so callers can check that the
/// imaginary parts vanish for Hermitian input.
pub(crate) fn pauli_coefficient_tensor(h: &Array2<Complex64>) -> Vec<Complex64> {
    let n_dim = h.nrows();
    let n_qubits = n_dim.trailing_zeros() as usize;
    let mut data: Vec<Complex64> = h.iter().copied().collect();
    pauli_transform_in_place(&mut data, n_qubits);
    (0..data.len()).map(|code| data[butterfly_slot(code, n_qubits)]).collect()
}

/// Encode a Hermitian 2^n x 2^n matrix as a qubit Hamiltonian; terms with
/// |g| <= prune_eps are dropped.
pub fn encode_hamiltonian(h: &Array2<Complex64>, prune_eps: f64) -> Result<QubitHamiltonian> {
    let n_dim = h.nrows();
    if n_dim == 0 || !n_dim.is_power_of_two() || h.ncols() != n_dim {
        return Err(Error::NotPowerOfTwo(n_dim));
    }
    let mut scale = 0.0f64;
    let mut asym = 0.0f64;
    for i in 0..n_dim {
        for j in 0..n_dim {
            scale = scale.max(h[[i, j]].norm());
            asym = asym.max((h[[i, j]] - h[[j, i]].conj()).norm());
        }
    }
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::NotHermitian(asym));
    }
    let n_qubits = n_dim.trailing_zeros() as usize;
    let coeffs = pauli_coefficient_tensor(h);
    let mut terms: Vec<(PauliString, f64)> = Vec::new();
    for (c, coeff) in coeffs.iter().enumerate() {
        let g = coeff.re;
        if g.abs() > prune_eps {
            terms.push((PauliString::from_packed_code(c, n_qubits), g));
        }
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(QubitHamiltonian { n_qubits, terms })
}

/// Dense sum of Kronecker products; test oracle for the encoder.
pub fn reconstruct(hq: &QubitHamiltonian) -> Array2<Complex64> {
    let dim = 1usize << hq.n_qubits;
    let mut m = Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
    for (p, g) in &hq.terms {
        m = m + p.dense().mapv(|v| v * *g);
    }
    m
}
