//! Angular momentum in a single irrep and on truncated multi-j grids.
//!
//! Basis vectors inside an irrep are ordered by descending magnetic quantum
//! number: index `k` holds `m = j - k`. Half-integer quantities are carried
//! as doubled integers (`two_j`, `two_m`) everywhere so that `j = 1/2` and
//! `j = 400` go through the same code.

mod operators;
mod phase;
mod wavefunction;
mod wigner;

pub use operators::{spin_coherent_state, spin_operators, SpinOperatorSet};
pub use phase::{phase_state_kernel, PhaseSpacing, PhaseStateBasis};
pub use wavefunction::{
    basis_change_y_to_z, basis_change_y_to_z_with, basis_change_z_to_y, wavefunction_moments,
    Basis, MomentReport, SpinWaveFunction, TruncationInfo,
};
pub use wigner::{
    wigner_d, wigner_d_asymptotic, wigner_d_exact, wigner_d_exact_with_cap, wigner_d_stable,
    wigner_d_stable_with_cap, wigner_d_with_cap, unitarity_deviation, DConfig, DMethod, ExactDElement, WignerDMatrix, EXACT_TWO_J_CAP,
    LOG_DOMAIN_TWO_J_CAP, STABLE_TWO_J_CAP,
};

use serde::{Deserialize, Serialize};

/// Irreducible representation labelled by `two_j = 2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Irrep {
    pub two_j: u32,
}

impl Irrep {
    pub const fn new(two_j: u32) -> Self {
        Self { two_j }
    }

    /// Irrep of dimension `dim`, if `dim >= 1`.
    pub fn from_dimension(dim: usize) -> Option<Self> {
        (dim >= 1).then(|| Self::new((dim - 1) as u32))
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    pub fn dimension(&self) -> usize {
        self.two_j as usize + 1
    }

    /// `m` for basis index `k`.
    pub fn m_at(&self, k: usize) -> f64 {
        self.j() - k as f64
    }

    /// `2m` for basis index `k`.
    pub fn two_m_at(&self, k: usize) -> i64 {
        i64::from(self.two_j) - 2 * k as i64
    }

    /// Basis index for `2m`, if `|m| <= j` and parity matches.
    pub fn index_of(&self, two_m: i64) -> Option<usize> {
        let tj = i64::from(self.two_j);
        if two_m.abs() > tj || (tj - two_m) % 2 != 0 {
            return None;
        }
        Some(((tj - two_m) / 2) as usize)
    }
}

impl std::fmt::Display for Irrep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", format_half(i64::from(self.two_j)))
    }
}

/// Formats a doubled integer as `3`, `-1/2`, ...
pub fn format_half(two_x: i64) -> String {
    if two_x % 2 == 0 {
        format!("{}", two_x / 2)
    } else {
        format!("{two_x}/2")
    }
}

/// Parses `"3"`, `"1/2"`, `"7/2"`, or `"2.5"` into a doubled integer.
pub fn parse_half(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        return (den.trim() == "2").then_some(num);
    }
    if let Ok(n) = s.parse::<i64>() {
        return Some(2 * n);
    }
    let x: f64 = s.parse().ok()?;
    let doubled = 2.0 * x;
    (doubled.fract() == 0.0 && doubled.is_finite()).then_some(doubled as i64)
}
