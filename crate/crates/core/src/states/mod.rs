//! Constructors for the state families used by the witnesses and the
//! spin basis-change case study.
//!
//! The two-mode coherent family is parameterized by complex amplitudes
//! `alpha1, alpha2`; its weight over `N = 2j` is Poisson with mean
//! `2 j_mean`, which is what the `j` truncation window is sized against.
//! All factorial and power ratios are evaluated in the log domain, with the
//! phase carried separately.

mod coherent;
mod fourier;
mod gaussian;
mod oscillator;

pub use coherent::{coherent_spin_wavefunction, transformed_coefficients_exact};
pub use fourier::{fourier_basis_change, ProvisionalBlock, ProvisionalWaveFunction};
pub use gaussian::{gaussian_approx_y, gaussian_approx_z, GaussianEnvelope, GaussianState};
pub use oscillator::{
    fock_product_state, quadrature_ops, tmsv_state, FockState, OscillatorParams, QuadratureSet,
    TMSV_TAIL_TOLERANCE,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::su2::TruncationInfo;

/// Amplitudes `(alpha1, alpha2)` of the two-mode coherent spin family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SU2CoherentParams {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
}

impl SU2CoherentParams {
    pub fn new(alpha1: Complex64, alpha2: Complex64) -> Result<Self> {
        let p = Self { alpha1, alpha2 };
        if !(alpha1.re.is_finite() && alpha1.im.is_finite() && alpha2.re.is_finite() && alpha2.im.is_finite()) {
            return Err(Error::NonFinite("coherent amplitudes"));
        }
        if p.j_mean() <= 0.0 {
            return Err(Error::InvalidParameter("mean j must be positive".into()));
        }
        Ok(p)
    }

    pub fn from_polar(r1: f64, phi1: f64, r2: f64, phi2: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r1, phi1), Complex64::from_polar(r2, phi2))
    }

    /// `|alpha1| = |alpha2| = sqrt(j_mean)`, `phi1 = 0`, `phi2 = phase_offset`.
    pub fn balanced(j_mean: f64, phase_offset: f64) -> Result<Self> {
        let r = j_mean.max(0.0).sqrt();
        Self::from_polar(r, 0.0, r, phase_offset)
    }

    pub fn phi1(&self) -> f64 {
        self.alpha1.arg()
    }

    pub fn phi2(&self) -> f64 {
        self.alpha2.arg()
    }

    /// `(|a1|^2 + |a2|^2) / 2`.
    pub fn j_mean(&self) -> f64 {
        (self.alpha1.norm_sqr() + self.alpha2.norm_sqr()) / 2.0
    }

    /// `(|a1|^2 - |a2|^2) / 2`.
    pub fn jy_mean(&self) -> f64 {
        (self.alpha1.norm_sqr() - self.alpha2.norm_sqr()) / 2.0
    }

    /// `|a1 a2| cos(phi2 - phi1)`.
    pub fn jz_mean(&self) -> f64 {
        (self.alpha1.conj() * self.alpha2).re
    }

    /// `|a1 a2| sin(phi2 - phi1)`.
    pub fn jx_mean(&self) -> f64 {
        (self.alpha1.conj() * self.alpha2).im
    }

    pub fn transformed(&self) -> TransformedParams {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        TransformedParams {
            beta1: (self.alpha2 + self.alpha1) * s,
            beta2: (self.alpha2 - self.alpha1) * s,
        }
    }
}

/// The amplitudes of the same state expanded about `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformedParams {
    pub beta1: Complex64,
    pub beta2: Complex64,
}

impl TransformedParams {
    pub fn phi1(&self) -> f64 {
        self.beta1.arg()
    }

    pub fn phi2(&self) -> f64 {
        self.beta2.arg()
    }

    /// `(|b1|^2 - |b2|^2) / 2`, the mean `m_z`.
    pub fn mz_mean(&self) -> f64 {
        (self.beta1.norm_sqr() - self.beta2.norm_sqr()) / 2.0
    }
}

/// How the `j` range is cut for multi-`j` states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Keep `j` within `j_mean +- window * sqrt(j_mean)`.
    pub window: f64,
    /// Refuse if more than this much weight falls outside.
    pub tolerance: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            window: 6.0,
            tolerance: 1e-9,
        }
    }
}

fn ln_poisson(n: u32, lambda: f64) -> f64 {
    -lambda + f64::from(n) * lambda.ln() - ln_gamma(f64::from(n) + 1.0)
}

/// `N = 2j` weight of the coherent family: Poisson with mean `2 j_mean`.
pub fn j_weight(two_j: u32, j_mean: f64) -> f64 {
    ln_poisson(two_j, 2.0 * j_mean).exp()
}

impl Truncation {
    /// `two_j` range and discarded Poisson weight for a given `j_mean`.
    pub fn window_for(&self, j_mean: f64) -> Result<TruncationInfo> {
        if !(self.window > 0.0) || !(self.tolerance >= 0.0) {
            return Err(Error::InvalidParameter("truncation window must be positive".into()));
        }
        let half = self.window * j_mean.sqrt();
        let lo = (2.0 * (j_mean - half)).ceil().max(0.0) as u32;
        let hi = (2.0 * (j_mean + half)).floor().max(0.0) as u32;
        let lambda = 2.0 * j_mean;
        let mut discarded = 0.0;
        for n in 0..lo {
            discarded += ln_poisson(n, lambda).exp();
        }
        let mut n = hi + 1;
        loop {
            let w = ln_poisson(n, lambda).exp();
            discarded += w;
            if (f64::from(n) > lambda && w < 1e-30) || n > hi + 100_000 {
                break;
            }
            n += 1;
        }
        if discarded > self.tolerance {
            return Err(Error::TruncationUnsafe {
                weight: discarded,
                tolerance: self.tolerance,
            });
        }
        Ok(TruncationInfo {
            two_j_min: lo,
            two_j_max: hi,
            window: self.window,
            discarded_weight: discarded,
            tolerance: self.tolerance,
        })
    }
}
