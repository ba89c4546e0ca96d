use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{j_weight, SU2CoherentParams, Truncation};
use crate::error::Result;
use crate::su2::{Basis, Irrep, SpinWaveFunction};

/// Smallest `j_mean` for which the large-`j` Gaussian forms are trusted.
pub const GAUSSIAN_MIN_J_MEAN: f64 = 100.0;

/// `C(j) (pi w)^{-1/4} exp(-(m - center)^2 / 2w) exp(i rate m)` with
/// `C(j) = sqrt(Poisson(2j; 2 j_mean)) exp(i j_phase_rate j)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    pub center: f64,
    /// `w`: the amplitude falls as `exp(-(m - center)^2 / 2w)`.
    pub width: f64,
    pub phase_rate: f64,
    pub j_mean: f64,
    pub j_phase_rate: f64,
}

impl GaussianEnvelope {
    /// `C(j)`, the per-`j` factor.
    pub fn j_factor(&self, two_j: u32) -> Complex64 {
        let j = f64::from(two_j) / 2.0;
        Complex64::from_polar(j_weight(two_j, self.j_mean).sqrt(), self.j_phase_rate * j)
    }

    /// Unnormalized amplitude at `(j, m)`.
    pub fn amplitude(&self, two_j: u32, m: f64) -> Complex64 {
        let d = m - self.center;
        let shape = (PI * self.width).powf(-0.25) * (-d * d / (2.0 * self.width)).exp();
        self.j_factor(two_j) * Complex64::from_polar(shape, self.phase_rate * m)
    }
}

/// A sampled Gaussian approximation together with the envelope it came from.
#[derive(Clone, Debug)]
pub struct GaussianState {
    pub envelope: GaussianEnvelope,
    pub wavefunction: SpinWaveFunction,
    /// Squared norm on the grid before renormalization.
    pub raw_norm: f64,
    /// Set when the parameters sit outside the large-`j` regime.
    pub regime_warning: Option<String>,
}

fn sample(envelope: GaussianEnvelope, basis: Basis, truncation: &Truncation) -> Result<(SpinWaveFunction, f64)> {
    let info = truncation.window_for(envelope.j_mean)?;
    let mut blocks = BTreeMap::new();
    let mut raw = 0.0;
    for two_j in info.two_j_min..=info.two_j_max {
        let irrep = Irrep::new(two_j);
        let amps: Vec<Complex64> = (0..irrep.dimension())
            .map(|k| envelope.amplitude(two_j, irrep.m_at(k)))
            .collect();
        raw += amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
        blocks.insert(two_j, amps);
    }
    let psi = SpinWaveFunction::normalized(basis, blocks, info)?;
    Ok((psi, raw))
}

fn regime_warning(j_mean: f64, center: f64) -> Option<String> {
    if j_mean < GAUSSIAN_MIN_J_MEAN {
        Some(format!("j_mean = {j_mean} below {GAUSSIAN_MIN_J_MEAN}"))
    } else if center.abs() > 0.1 * j_mean {
        Some(format!("center {center} not small against j_mean = {j_mean}"))
    } else {
        None
    }
}

/// Large-`j` Gaussian form of the coherent family about `y`.
pub fn gaussian_approx_y(params: &SU2CoherentParams, truncation: &Truncation) -> Result<GaussianState> {
    let envelope = GaussianEnvelope {
        center: params.jy_mean(),
        width: params.j_mean(),
        phase_rate: params.phi1() - params.phi2(),
        j_mean: params.j_mean(),
        j_phase_rate: params.phi1() + params.phi2(),
    };
    let (wavefunction, raw_norm) = sample(envelope, Basis::Y, truncation)?;
    Ok(GaussianState {
        envelope,
        wavefunction,
        raw_norm,
        regime_warning: regime_warning(envelope.j_mean, envelope.center),
    })
}

/// Large-`j` Gaussian form of the `z` expansion, centered at the exact
/// `m_z` mean with phase rate `arg b1 - arg b2`. The per-`j` phase uses the
/// `b` phases as well, matching the exact `z` coefficients block by block.
pub fn gaussian_approx_z(params: &SU2CoherentParams, truncation: &Truncation) -> Result<GaussianState> {
    let t = params.transformed();
    let envelope = GaussianEnvelope {
        center: t.mz_mean(),
        width: params.j_mean(),
        phase_rate: t.phi1() - t.phi2(),
        j_mean: params.j_mean(),
        j_phase_rate: t.phi1() + t.phi2(),
    };
    let (wavefunction, raw_norm) = sample(envelope, Basis::Z, truncation)?;
    Ok(GaussianState {
        envelope,
        wavefunction,
        raw_norm,
        regime_warning: regime_warning(envelope.j_mean, envelope.center),
    })
}
