//! Shared oracles for the integration suites. Everything here is independent
//! of the circuit/encoding implementation paths it checks.

#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Dense e^{A} by scaling-and-squaring with a Taylor series.
pub fn matrix_exp(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let norm = a.iter().map(|v| v.norm()).fold(0.0f64, f64::max) * n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let scaled = a.mapv(|v| v * scale);
    let mut result = Array2::from_shape_fn((n, n), |(i, j)| {
        Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
    });
    let mut term = result.clone();
    for k in 1..=24 {
        term = term.dot(&scaled).mapv(|v| v / k as f64);
        result = result + &term;
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// e^{-i t H}.
pub fn evolution_of(h: &Array2<Complex64>, t: f64) -> Array2<Complex64> {
    matrix_exp(&h.mapv(|v| v * Complex64::new(0.0, -t)))
}

pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0f64, f64::max)
}

pub fn random_hermitian(n: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = if i == j { 0.0 } else { rng.gen_range(-1.0..1.0) };
            h[[i, j]] = Complex64::new(re, im);
            h[[j, i]] = Complex64::new(re, -im);
        }
    }
    h
}

pub fn random_real_symmetric(n: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            let re: f64 = rng.gen_range(-1.0..1.0);
            h[[i, j]] = Complex64::new(re, 0.0);
            h[[j, i]] = Complex64::new(re, 0.0);
        }
    }
    h
}

/// Dense matrix of a Pauli string from its closed form:
/// e^{-i(theta/2)P} = cos(theta/2) I - i sin(theta/2) P.
pub fn pauli_rotation_dense(p: &qscatter::pauli::PauliString, theta: f64) -> Array2<Complex64> {
    let dim = 1usize << p.n_qubits();
    let dense = p.dense();
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let ms = Complex64::new(0.0, -(theta / 2.0).sin());
    let mut out = dense.mapv(|v| v * ms);
    for k in 0..dim {
        out[[k, k]] += c;
    }
    out
}
