//! Model potential surface in Jacobi coordinates.
//!
//! The diatom is a Morse oscillator and the default triatomic surface is
//! pairwise additive: V3(R, r, gamma) = V(r) + V(d+) + V(d-), where d+/d-
//! are the projectile distances to the two diatom nuclei. The interaction
//! that drives transitions is V3 minus the free-diatom term, so it vanishes
//! identically as R -> infinity, which is what defines asymptotic in/out
//! states. A `NoInteraction` rule keeps the diatom but switches the
//! interaction off; free-evolution oracles use it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Collision geometry: projectile-to-center-of-mass distance `r_proj`,
/// diatom bond length `r_vib`, and the angle `gamma` between them.
/// All lengths in bohr, gamma in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiGeometry {
    r_proj: f64,
    r_vib: f64,
    gamma: f64,
}

impl JacobiGeometry {
    /// Validates r_proj >= 0, r_vib > 0 and gamma in [0, pi].
    pub fn new(r_proj: f64, r_vib: f64, gamma: f64) -> Result<Self> {
        if !(r_proj >= 0.0) || !(r_vib > 0.0) || !(0.0..=std::f64::consts::PI).contains(&gamma) {
            return Err(Error::Config(format!(
                "invalid Jacobi geometry: R = {r_proj}, r = {r_vib}, gamma = {gamma}"
            )));
        }
        Ok(Self { r_proj, r_vib, gamma })
    }

    pub fn r_proj(&self) -> f64 {
        self.r_proj
    }

    pub fn r_vib(&self) -> f64 {
        self.r_vib
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Distances from the projectile to the two diatom nuclei,
    /// d+- = sqrt(R^2 + r^2/4 -+ R r cos gamma).
    pub fn pair_distances(&self) -> (f64, f64) {
        let (big_r, r) = (self.r_proj, self.r_vib);
        let c = self.gamma.cos();
        let base = big_r * big_r + 0.25 * r * r;
        let cross = big_r * r * c;
        ((base - cross).max(0.0).sqrt(), (base + cross).max(0.0).sqrt())
    }
}

/// Distances from the projectile to the two diatom nuclei.
pub fn jacobi_to_distances(g: &JacobiGeometry) -> (f64, f64) {
    g.pair_distances()
}

/// Morse parameters: well depth (hartree), equilibrium distance (bohr),
/// width (1/bohr).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseParams {
    pub depth: f64,
    pub r_eq: f64,
    pub width: f64,
}

impl Default for MorseParams {
    fn default() -> Self {
        // Model defaults: well depth ~4.75 eV so that the zero-point-corrected
        // dissociation energy lands near 4.5 eV.
        Self { depth: 0.1745, r_eq: 1.40, width: 1.03 }
    }
}

impl MorseParams {
    /// V(r) = D (1 - exp(-a (r - r_e)))^2 - D; minimum -D at r_e, 0 at infinity.
    pub fn eval(&self, r: f64) -> f64 {
        let x = (-self.width * (r - self.r_eq)).exp();
        let b = 1.0 - x;
        self.depth * b * b - self.depth
    }
}

/// How the triatomic surface is combined from pair terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombinationRule {
    /// V3 = V(r) + V(d+) + V(d-); interaction = V(d+) + V(d-).
    PairwiseAdditive,
    /// Interaction identically zero; the diatom term is kept.
    NoInteraction,
}

/// Pluggable surface model: a Morse diatom plus a combination rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceModel {
    pub diatom: MorseParams,
    pub rule: CombinationRule,
}

impl Default for SurfaceModel {
    fn default() -> Self {
        Self { diatom: MorseParams::default(), rule: CombinationRule::PairwiseAdditive }
    }
}

impl SurfaceModel {
    pub fn zero_interaction() -> Self {
        Self { diatom: MorseParams::default(), rule: CombinationRule::NoInteraction }
    }

    /// Free-diatom potential V(r).
    pub fn diatom_potential(&self, r: f64) -> f64 {
        self.diatom.eval(r)
    }

    /// Full triatomic surface V3(R, r, gamma).
    pub fn triatomic_potential(&self, g: &JacobiGeometry) -> f64 {
        self.diatom_potential(g.r_vib()) + self.interaction_potential(g)
    }

    /// Interaction V(R, r, gamma) = V3 - V_diatom(r); tends to 0 as R -> infinity.
    pub fn interaction_potential(&self, g: &JacobiGeometry) -> f64 {
        match self.rule {
            CombinationRule::PairwiseAdditive => {
                let (d_minus, d_plus) = g.pair_distances();
                self.diatom.eval(d_minus) + self.diatom.eval(d_plus)
            }
            CombinationRule::NoInteraction => 0.0,
        }
    }
}

/// Free functions mirroring the surface operations.
pub fn diatom_potential(r: f64, m: &SurfaceModel) -> f64 {
    m.diatom_potential(r)
}

pub fn interaction_potential(g: &JacobiGeometry, m: &SurfaceModel) -> f64 {
    m.interaction_potential(g)
}
