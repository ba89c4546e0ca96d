//! The position-momentum shortcut: treat `Q = m_y / sqrt(Jx)` and
//! `P = m_z / sqrt(Jx)` as continuous conjugate variables and transform with
//! the Fourier kernel `(2 pi)^{-1/2} exp(-i P Q)`.
//!
//! For a Gaussian envelope the transform is analytic. The result is sampled
//! back on the (half-)integer `m_z` lattice of each `j` block. It is not a
//! spin state: its center can sit outside `|m_z| <= j`, so the samples are
//! kept on an extended lattice and the weight outside the irrep is reported.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use super::{GaussianEnvelope, GaussianState};
use crate::error::{Error, Result};
use crate::su2::{Basis, SpinWaveFunction};

/// Samples beyond this many amplitude widths from the center are dropped.
const LATTICE_HALF_WIDTHS: f64 = 12.0;

/// Samples of one block on `two_m = two_m_min, two_m_min + 2, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProvisionalBlock {
    pub two_m_min: i64,
    pub amplitudes: Vec<Complex64>,
}

impl ProvisionalBlock {
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .map(move |(i, a)| (self.two_m_min + 2 * i as i64, *a))
    }
}

/// Output of [`fourier_basis_change`]; always provisional.
#[derive(Clone, Debug)]
pub struct ProvisionalWaveFunction {
    pub blocks: BTreeMap<u32, ProvisionalBlock>,
    /// Predicted center `phase_rate * Jx` of the `m_z` distribution.
    pub center: f64,
    /// Amplitude falls as `exp(-(m - center)^2 / 2 width)`, `width = Jx^2 / j_mean`.
    pub width: f64,
    /// `Jx` used for the `Q, P` rescaling.
    pub jx_mean: f64,
    /// Lattice sum of `|C|^2` before renormalization; one for a faithful resampling.
    pub resampled_norm: f64,
    /// Fraction of the weight with `|m_z| > j`.
    pub out_of_irrep_weight: f64,
}

impl ProvisionalWaveFunction {
    pub fn is_provisional(&self) -> bool {
        true
    }

    pub fn basis(&self) -> Basis {
        Basis::Z
    }

    pub fn norm_squared(&self) -> f64 {
        self.blocks
            .values()
            .flat_map(|b| b.amplitudes.iter())
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Mean `m_z` over the extended lattice.
    pub fn mean_m(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for b in self.blocks.values() {
            for (two_m, a) in b.iter() {
                let w = a.norm_sqr();
                num += two_m as f64 / 2.0 * w;
                den += w;
            }
        }
        num / den
    }

    /// `<self|other>` over lattice points inside the irreps.
    pub fn inner(&self, other: &SpinWaveFunction) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&tj, b) in &self.blocks {
            for (two_m, a) in b.iter() {
                if let Some(o) = other.amplitude(tj, two_m) {
                    acc += a.conj() * o;
                }
            }
        }
        acc
    }

    /// `|<self|other>|^2` with both sides taken as normalized.
    pub fn fidelity(&self, other: &SpinWaveFunction) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_squared() * other.norm_squared())
    }
}

/// Unnormalized analytic sample at `(j, m_z)`.
pub(crate) fn analytic_amplitude(env: &GaussianEnvelope, x: f64, two_j: u32, m: f64) -> Complex64 {
    let center = env.phase_rate * x;
    let width = x * x / env.width;
    let d = m - center;
    let mag = (env.width / (PI * x * x)).powf(0.25) * (-d * d / (2.0 * width)).exp();
    let phase = -(m * env.center / x - env.phase_rate * env.center);
    env.j_factor(two_j) * Complex64::from_polar(mag, phase)
}

/// Analytic Fourier transform of a Gaussian `y` expansion, per fixed `j`.
///
/// With `Q = m_y / sqrt(X)`, `P = m_z / sqrt(X)` and `X = jx_mean`, a `y`
/// envelope with center `c`, width `w` and phase rate `k` maps to
/// `C(j) (w / (pi X^2))^{1/4} exp(-(m_z - k X)^2 / (2 X^2 / w)) exp(-i (m_z c / X - k c))`.
pub fn fourier_basis_change(psi: &GaussianState, jx_mean: f64) -> Result<ProvisionalWaveFunction> {
    if !(jx_mean > 0.0) || !jx_mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Fourier shortcut needs a positive Jx, got {jx_mean}"
        )));
    }
    if psi.wavefunction.basis() != Basis::Y {
        return Err(Error::InvalidParameter("expected a y-basis Gaussian".into()));
    }
    let env = psi.envelope;
    let x = jx_mean;
    let center = env.phase_rate * x;
    let width = x * x / env.width;
    let sigma = width.sqrt();
    let mut blocks = BTreeMap::new();
    let mut total = 0.0;
    let mut outside = 0.0;
    for &two_j in psi.wavefunction.blocks().keys() {
        let tj = i64::from(two_j);
        let lo = (2.0 * (center - LATTICE_HALF_WIDTHS * sigma)).floor() as i64;
        let hi = (2.0 * (center + LATTICE_HALF_WIDTHS * sigma)).ceil() as i64;
        let mut lo = lo.min(-tj);
        let hi = hi.max(tj);
        // Keep the parity of 2j.
        if (lo - tj).rem_euclid(2) != 0 {
            lo -= 1;
        }
        let mut amps = Vec::new();
        let mut two_m = lo;
        while two_m <= hi {
            let a = analytic_amplitude(&env, x, two_j, two_m as f64 / 2.0);
            let w = a.norm_sqr();
            total += w;
            if two_m.abs() > tj {
                outside += w;
            }
            amps.push(a);
            two_m += 2;
        }
        blocks.insert(two_j, ProvisionalBlock { two_m_min: lo, amplitudes: amps });
    }
    if !(total > 0.0) {
        return Err(Error::NonFinite("Fourier resampling"));
    }
    let resampled_norm = total;
    let scale = total.sqrt().recip();
    for b in blocks.values_mut() {
        for a in &mut b.amplitudes {
            *a *= scale;
        }
    }
    Ok(ProvisionalWaveFunction {
        blocks,
        center,
        width,
        jx_mean: x,
        resampled_norm,
        out_of_irrep_weight: outside / total,
    })
}
