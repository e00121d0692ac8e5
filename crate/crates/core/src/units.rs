//! Unit conventions.
//!
//! Everything internal is in Hartree atomic units (hbar = m_e = e = 1):
//! lengths in bohr, energies in hartree, masses in electron masses,
//! times in atomic time units. Only the config surface speaks eV and amu.

/// One atomic mass unit in electron masses.
pub const AMU_IN_ELECTRON_MASSES: f64 = 1822.888486;

/// One hartree in electron volts.
pub const HARTREE_IN_EV: f64 = 27.211386;

/// Convert an energy in eV to hartree.
pub fn ev_to_hartree(ev: f64) -> f64 {
    ev / HARTREE_IN_EV
}

/// Convert a mass in amu to electron masses.
pub fn amu_to_electron_masses(amu: f64) -> f64 {
    amu * AMU_IN_ELECTRON_MASSES
}
