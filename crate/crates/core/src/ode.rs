//! Coupled-channel benchmark: i dc/dt = H(t) c integrated with an adaptive
//! Dormand-Prince 5(4) pair.
//!
//! This is the classical cross-check for the circuit path. It shares
//! coupling_at_time with the circuits on purpose: the comparison then isolates
//! Trotter and encoding errors rather than surface or interpolation ones.
//! Error control treats real and imaginary parts as separate components, with
//! per-step absolute/relative tolerances.

use num_complex::Complex64;

use crate::coupling::CouplingTable;
use crate::error::{Error, Result};

/// Dormand-Prince 5(4) tableau.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// 5th-order weights (row 7 equals the last A row; FSAL).
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Embedded 4th-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        // per-step tolerances of the benchmark solver
        Self { rtol: 1e-6, atol: 1e-12, max_steps: 50_000_000 }
    }
}

/// Complex amplitudes at a time.
#[derive(Debug, Clone)]
pub struct AmplitudeVector {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl AmplitudeVector {
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Generic adaptive RK5(4) over complex state; `rhs(t, y, dy)` fills dy.
pub fn integrate_adaptive<F>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: Vec<Complex64>,
    opts: &OdeOptions,
) -> Result<Vec<Complex64>>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let dim = y0.len();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let direction = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
    rhs(t, &y, &mut k[0]);

    // initial step from the magnitude of y and its derivative
    let scale_norm = |v: &[Complex64], yref: &[Complex64]| -> f64 {
        let mut acc = 0.0;
        for (c, yr) in v.iter().zip(yref) {
            let sr = opts.atol + opts.rtol * yr.re.abs();
            let si = opts.atol + opts.rtol * yr.im.abs();
            acc += (c.re / sr).powi(2) + (c.im / si).powi(2);
        }
        (acc / (2 * dim) as f64).sqrt()
    };
    let d0 = scale_norm(&y, &y);
    let d1 = scale_norm(&k[0], &y);
    let mut h = if d0 > 1e-10 && d1 > 1e-10 { 0.01 * d0 / d1 } else { 1e-6 * span.abs() };
    h = h.min(span.abs()) * direction;

    let mut y_new = vec![Complex64::new(0.0, 0.0); dim];
    let mut y_stage = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..opts.max_steps {
        if (t - t1) * direction >= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * direction > 0.0 {
            h = t1 - t;
        }
        if h.abs() < 1e-14 * span.abs() {
            return Err(Error::StepSizeUnderflow(t));
        }
        for stage in 0..6 {
            for d in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for prev in 0..=stage {
                    let a = A[stage][prev];
                    if a != 0.0 {
                        acc += k[prev][d] * a;
                    }
                }
                y_stage[d] = y[d] + acc * h;
            }
            rhs(t + C[stage] * h, &y_stage, &mut k[stage + 1][..]);
        }
        for d in 0..dim {
            let mut acc5 = Complex64::new(0.0, 0.0);
            let mut err = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                if B5[s] != 0.0 {
                    acc5 += k[s][d] * B5[s];
                }
                let de = B5[s] - B4[s];
                if de != 0.0 {
                    err += k[s][d] * de;
                }
            }
            y_new[d] = y[d] + acc5 * h;
            y_stage[d] = err * h; // reuse as error buffer
        }
        let mut err_acc = 0.0;
        for d in 0..dim {
            let sr = opts.atol + opts.rtol * y[d].re.abs().max(y_new[d].re.abs());
            let si = opts.atol + opts.rtol * y[d].im.abs().max(y_new[d].im.abs());
            err_acc += (y_stage[d].re / sr).powi(2) + (y_stage[d].im / si).powi(2);
        }
        let err_norm = (err_acc / (2 * dim) as f64).sqrt();
        if err_norm <= 1.0 {
            t += h;
            y.copy_from_slice(&y_new);
            // FSAL: stage 7 derivative is the next step's first stage
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            let factor = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * err_norm.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Err(Error::StepSizeUnderflow(t))
}

/// Integrate the coupled-channel equations from -T to +T for one initial
/// basis state, over the lowest `subset` tabulated states.
pub fn integrate_schrodinger(
    table: &CouplingTable,
    subset: usize,
    b: f64,
    velocity: f64,
    initial: usize,
    opts: &OdeOptions,
) -> Result<AmplitudeVector> {
    let r_max = table.r_max();
    if !(b >= 0.0) || b >= r_max {
        return Err(Error::ImpactParameterTooLarge { b, r_max });
    }
    if subset == 0 || subset > table.n_states() {
        return Err(Error::StateIndexOutOfRange { index: subset, size: table.n_states() });
    }
    if initial >= subset {
        return Err(Error::StateIndexOutOfRange { index: initial, size: subset });
    }
    let horizon = (r_max * r_max - b * b).sqrt() / velocity;
    let mut y0 = vec![Complex64::new(0.0, 0.0); subset];
    y0[initial] = Complex64::new(1.0, 0.0);
    let mut h_buf = vec![0.0f64; subset * subset];
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let r = crate::scattering::trajectory(b, velocity, t);
        table.fill_coupling_at(r, subset, &mut h_buf, subset);
        for i in 0..subset {
            let mut acc = Complex64::new(0.0, 0.0);
            let row = &h_buf[i * subset..(i + 1) * subset];
            for (hij, cj) in row.iter().zip(y) {
                acc += cj * *hij;
            }
            // i dc/dt = H c
            dy[i] = Complex64::new(acc.im, -acc.re);
        }
    };
    let amplitudes = integrate_adaptive(rhs, -horizon, horizon, y0, opts)?;
    Ok(AmplitudeVector { amplitudes, time: horizon })
}

/// Maximal relative deviation (percent) between two probability vectors,
/// over states whose reference probability exceeds the floor; reported with
/// and without the ground state (Fig.-12-style metric).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeviationReport {
    pub max_percent: f64,
    pub max_percent_excluding_ground: f64,
    pub states_compared: usize,
}

use serde::Serialize;

pub const DEVIATION_PROBABILITY_FLOOR: f64 = 1e-8;

pub fn benchmark_deviation(p_circuit: &[f64], p_reference: &[f64], floor: f64) -> DeviationReport {
    let n = p_circuit.len().min(p_reference.len());
    let mut max_all = 0.0f64;
    let mut max_excl = 0.0f64;
    let mut compared = 0usize;
    for j in 0..n {
        let pr = p_reference[j];
        if pr <= floor {
            continue;
        }
        compared += 1;
        let dev = 100.0 * (p_circuit[j] - pr).abs() / pr;
        max_all = max_all.max(dev);
        if j != 0 {
            max_excl = max_excl.max(dev);
        }
    }
    DeviationReport {
        max_percent: max_all,
        max_percent_excluding_ground: max_excl,
        states_compared: compared,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(rtol: f64, atol: f64) -> OdeOptions {
        OdeOptions { rtol, atol, max_steps: 10_000_000 }
    }

    #[test]
    fn diagonal_constant_hamiltonian_phases() {
        // i c' = e c  =>  c(t) = e^{-i e t} c(0)
        let eps = [0.3f64, -0.7, 1.1];
        let y0 = vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.64),
            Complex64::new(0.48, 0.0),
        ];
        let t_final = 25.0;
        let out = integrate_adaptive(
            |_t, y, dy| {
                for ((d, c), e) in dy.iter_mut().zip(y).zip(eps.iter()) {
                    *d = Complex64::new(c.im * e, -c.re * e);
                }
            },
            0.0,
            t_final,
            y0.clone(),
            &opts(1e-10, 1e-14),
        )
        .unwrap();
        for (k, e) in eps.iter().enumerate() {
            let want = y0[k] * Complex64::from_polar(1.0, -e * t_final);
            assert!((out[k] - want).norm() < 1e-9, "channel {k}");
        }
    }

    #[test]
    fn rabi_two_level_oscillation() {
        // H = [[0, V], [V, 0]]: P_flip(t) = sin^2(V t)
        let v = 0.35f64;
        let t_final = 9.0;
        let y0 = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let out = integrate_adaptive(
            |_t, y, dy| {
                let h0 = y[1] * v;
                let h1 = y[0] * v;
                dy[0] = Complex64::new(h0.im, -h0.re);
                dy[1] = Complex64::new(h1.im, -h1.re);
            },
            0.0,
            t_final,
            y0,
            &opts(1e-10, 1e-14),
        )
        .unwrap();
        let p1 = out[1].norm_sqr();
        let want = (v * t_final).sin().powi(2);
        assert!((p1 - want).abs() < 1e-8, "{p1} vs {want}");
    }

    #[test]
    fn reversibility() {
        let v = 0.4f64;
        let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let h0 = y[1] * v + y[0] * 0.1;
            let h1 = y[0] * v - y[1] * 0.2;
            dy[0] = Complex64::new(h0.im, -h0.re);
            dy[1] = Complex64::new(h1.im, -h1.re);
        };
        let y0 = vec![Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6)];
        let o = opts(1e-10, 1e-14);
        let fwd = integrate_adaptive(rhs, -5.0, 5.0, y0.clone(), &o).unwrap();
        let back = integrate_adaptive(rhs, 5.0, -5.0, fwd, &o).unwrap();
        for k in 0..2 {
            assert!((back[k] - y0[k]).norm() < 1e-6);
        }
    }

    #[test]
    fn tolerance_convergence() {
        // halving rtol moves the final probabilities by less than 1e-6
        let v = 0.35f64;
        let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let h0 = y[1] * v;
            let h1 = y[0] * v;
            dy[0] = Complex64::new(h0.im, -h0.re);
            dy[1] = Complex64::new(h1.im, -h1.re);
        };
        let y0 = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let tight = integrate_adaptive(rhs, 0.0, 40.0, y0.clone(), &opts(1e-12, 1e-14)).unwrap();
        let base = integrate_adaptive(rhs, 0.0, 40.0, y0.clone(), &opts(1e-8, 1e-12)).unwrap();
        let halved = integrate_adaptive(rhs, 0.0, 40.0, y0, &opts(5e-9, 1e-12)).unwrap();
        let e_base = (base[1].norm_sqr() - tight[1].norm_sqr()).abs();
        let change = (halved[1].norm_sqr() - base[1].norm_sqr()).abs();
        assert!(change < 1e-6, "change {change:.2e}");
        assert!(e_base < 1e-6, "base error {e_base:.2e}");
    }

    #[test]
    fn deviation_report() {
        let ode = [0.5, 0.3, 0.2, 1e-12];
        let circ = [0.525, 0.3, 0.198, 0.5];
        let rep = benchmark_deviation(&circ, &ode, 1e-8);
        // the sub-floor state is excluded from the comparison
        assert_eq!(rep.states_compared, 3);
        // ground state dominates: 5% there, 1% elsewhere
        assert!((rep.max_percent - 5.0).abs() < 1e-9);
        assert!((rep.max_percent_excluding_ground - 1.0).abs() < 1e-9);
        let identical = benchmark_deviation(&ode, &ode, 1e-8);
        assert_eq!(identical.max_percent, 0.0);
        assert_eq!(identical.max_percent_excluding_ground, 0.0);
    }
}
