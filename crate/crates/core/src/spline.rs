//! Natural cubic spline interpolation.
//!
//! Order-4 (cubic polynomial) splines with natural end conditions
//! (vanishing second derivative at both ends). The coupling table stores the
//! per-pair second derivatives and evaluates many splines at one abscissa, so
//! the segment weights are exposed separately from the single-curve type.

use crate::error::{Error, Result};

/// Interpolation weights at one abscissa: value = w_y0*y[k] + w_y1*y[k+1]
/// + w_m0*m[k] + w_m1*m[k+1], with m the second-derivative table.
#[derive(Debug, Clone, Copy)]
pub struct SegmentWeights {
    pub index: usize,
    pub w_y0: f64,
    pub w_y1: f64,
    pub w_m0: f64,
    pub w_m1: f64,
}

/// Locate x in the strictly ascending grid and compute cubic weights.
/// x outside the grid is clamped to the end segments (callers clamp first).
pub fn segment_weights(grid: &[f64], x: f64) -> SegmentWeights {
    debug_assert!(grid.len() >= 2);
    let n = grid.len();
    let k = match grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.clamp(1, n - 1) - 1,
    };
    let h = grid[k + 1] - grid[k];
    let a = (grid[k + 1] - x) / h;
    let b = (x - grid[k]) / h;
    let h2_6 = h * h / 6.0;
    SegmentWeights {
        index: k,
        w_y0: a,
        w_y1: b,
        w_m0: (a * a * a - a) * h2_6,
        w_m1: (b * b * b - b) * h2_6,
    }
}

/// Second derivatives for a natural cubic spline through (grid, values);
/// tridiagonal Thomas solve.
pub fn natural_second_derivatives(grid: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let n = grid.len();
    if n != values.len() || n < 2 {
        return Err(Error::QuadratureGridTooSmall(n));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridNotAscending);
    }
    let mut m = vec![0.0; n];
    if n == 2 {
        return Ok(m);
    }
    // interior equations: (h0/6) m[k-1] + ((h0+h1)/3) m[k] + (h1/6) m[k+1] = rhs
    let mut c_prime = vec![0.0; n - 2];
    let mut d_prime = vec![0.0; n - 2];
    for k in 1..n - 1 {
        let h0 = grid[k] - grid[k - 1];
        let h1 = grid[k + 1] - grid[k];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let rhs = (values[k + 1] - values[k]) / h1 - (values[k] - values[k - 1]) / h0;
        let i = k - 1;
        let denom = if i == 0 { b } else { b - a * c_prime[i - 1] };
        c_prime[i] = c / denom;
        d_prime[i] = if i == 0 { rhs / denom } else { (rhs - a * d_prime[i - 1]) / denom };
    }
    for i in (0..n - 2).rev() {
        m[i + 1] = d_prime[i] - if i + 1 < n - 2 { c_prime[i] * m[i + 2] } else { 0.0 };
    }
    Ok(m)
}

/// Single-curve natural cubic spline.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    grid: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let second = natural_second_derivatives(&grid, &values)?;
        Ok(Self { grid, values, second })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let w = segment_weights(&self.grid, x);
        w.w_y0 * self.values[w.index]
            + w.w_y1 * self.values[w.index + 1]
            + w.w_m0 * self.second[w.index]
            + w.w_m1 * self.second[w.index + 1]
    }
}
