//! Coefficient maps `C(j, m)` over a truncated range of `j`.
//!
//! A wavefunction is tagged with the axis it is expanded about (`y` or `z`).
//! There is no global basis object: the two expansions of the same state are
//! connected only through the d-matrix kernel in [`basis_change_y_to_z`].
//!
//! Frame conventions, fixed by the two-mode (Schwinger) construction of the
//! coherent-state families:
//!
//! * `y` expansion: ladder operators `L+-` about `y`, with
//!   `Jz = (L+ + L-)/2` and `Jx = (L+ - L-)/2i`.
//! * `z` expansion: ladder operators `L+-` about `z`, with
//!   `Jx = (L+ - L-)/2i` and `Jy = -(L+ + L-)/2`.
//!
//! With these frames the kernel `C_z(m_z) = sum_{m_y} d^j_{m_y m_z}(pi/2) C_y(m_y)`
//! maps every first moment onto itself.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wigner::{recursion_rows, DConfig, DMethod};
use super::Irrep;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Y,
    Z,
}

/// Which `j` values were kept and how much weight fell outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationInfo {
    pub two_j_min: u32,
    pub two_j_max: u32,
    /// Half-width of the `j` window in units of `sqrt(j_mean)`; zero when the
    /// grid was given explicitly.
    pub window: f64,
    pub discarded_weight: f64,
    /// Allowed deviation of the total squared norm from one.
    pub tolerance: f64,
}

impl TruncationInfo {
    pub fn exact(two_j_min: u32, two_j_max: u32) -> Self {
        Self {
            two_j_min,
            two_j_max,
            window: 0.0,
            discarded_weight: 0.0,
            tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinWaveFunction {
    basis: Basis,
    /// `two_j -> amplitudes`, each indexed by descending `m`.
    blocks: BTreeMap<u32, Vec<Complex64>>,
    truncation: TruncationInfo,
}

impl SpinWaveFunction {
    /// Validates block lengths and the total norm.
    pub fn new(
        basis: Basis,
        blocks: BTreeMap<u32, Vec<Complex64>>,
        truncation: TruncationInfo,
    ) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptyWaveFunction);
        }
        for (&two_j, amps) in &blocks {
            if amps.len() != two_j as usize + 1 {
                return Err(Error::DimensionMismatch {
                    expected: two_j as usize + 1,
                    got: amps.len(),
                });
            }
        }
        let psi = Self {
            basis,
            blocks,
            truncation,
        };
        let norm2 = psi.norm_squared();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > psi.truncation.tolerance.max(1e-12) {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(psi)
    }

    /// Rescales the blocks to unit norm before validation.
    pub fn normalized(
        basis: Basis,
        mut blocks: BTreeMap<u32, Vec<Complex64>>,
        truncation: TruncationInfo,
    ) -> Result<Self> {
        let norm2: f64 = blocks
            .values()
            .flat_map(|b| b.iter())
            .map(|z| z.norm_sqr())
            .sum();
        if norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::NotNormalized(norm2));
        }
        let s = norm2.sqrt().recip();
        for b in blocks.values_mut() {
            for z in b.iter_mut() {
                *z *= s;
            }
        }
        Self::new(basis, blocks, truncation)
    }

    /// Wavefunction living in one irrep.
    pub fn single(basis: Basis, irrep: Irrep, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut blocks = BTreeMap::new();
        blocks.insert(irrep.two_j, amplitudes);
        Self::normalized(basis, blocks, TruncationInfo::exact(irrep.two_j, irrep.two_j))
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn blocks(&self) -> &BTreeMap<u32, Vec<Complex64>> {
        &self.blocks
    }

    pub fn truncation(&self) -> &TruncationInfo {
        &self.truncation
    }

    pub fn amplitude(&self, two_j: u32, two_m: i64) -> Option<Complex64> {
        let k = Irrep::new(two_j).index_of(two_m)?;
        self.blocks.get(&two_j).map(|b| b[k])
    }

    pub fn norm_squared(&self) -> f64 {
        self.blocks
            .values()
            .flat_map(|b| b.iter())
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Squared norm of each `j` block.
    pub fn block_weights(&self) -> BTreeMap<u32, f64> {
        self.blocks
            .iter()
            .map(|(&tj, b)| (tj, b.iter().map(|z| z.norm_sqr()).sum()))
            .collect()
    }

    /// `<self|other>` over the blocks both share.
    pub fn inner(&self, other: &SpinWaveFunction) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (tj, a) in &self.blocks {
            if let Some(b) = other.blocks.get(tj) {
                acc += a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>();
            }
        }
        acc
    }

    /// `|<self|other>|^2`, both sides taken as normalized.
    pub fn fidelity(&self, other: &SpinWaveFunction) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_squared() * other.norm_squared())
    }

    /// Largest per-amplitude absolute difference over the union of keys.
    pub fn max_abs_difference(&self, other: &SpinWaveFunction) -> f64 {
        let mut worst: f64 = 0.0;
        let keys: std::collections::BTreeSet<u32> =
            self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        for tj in keys {
            let n = tj as usize + 1;
            let zero = vec![Complex64::new(0.0, 0.0); n];
            let a = self.blocks.get(&tj).unwrap_or(&zero);
            let b = other.blocks.get(&tj).unwrap_or(&zero);
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }
}

/// First moments of a wavefunction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub j_mean: f64,
    /// `<J^2>` = mean of `j(j+1)`.
    pub j_squared_mean: f64,
    /// Mean `m` about the expansion axis.
    pub m_mean: f64,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

pub fn wavefunction_moments(psi: &SpinWaveFunction) -> Result<MomentReport> {
    let norm2 = psi.norm_squared();
    if norm2 == 0.0 {
        return Err(Error::EmptyWaveFunction);
    }
    let mut j_mean = 0.0;
    let mut j_sq = 0.0;
    let mut m_mean = 0.0;
    let mut raise = Complex64::new(0.0, 0.0);
    for (&tj, amps) in psi.blocks() {
        let irrep = Irrep::new(tj);
        let j = irrep.j();
        for (k, c) in amps.iter().enumerate() {
            let w = c.norm_sqr();
            let m = irrep.m_at(k);
            j_mean += j * w;
            j_sq += j * (j + 1.0) * w;
            m_mean += m * w;
            if k > 0 {
                // <m+1| L+ |m> = sqrt(j(j+1) - m(m+1)); index k-1 holds m+1.
                let coupling = (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt();
                raise += amps[k - 1].conj() * c * coupling;
            }
        }
    }
    let (j_mean, j_sq, m_mean, raise) = (j_mean / norm2, j_sq / norm2, m_mean / norm2, raise / norm2);
    let (jx, jy, jz) = match psi.basis() {
        Basis::Y => (raise.im, m_mean, raise.re),
        Basis::Z => (raise.im, -raise.re, m_mean),
    };
    Ok(MomentReport {
        j_mean,
        j_squared_mean: j_sq,
        m_mean,
        jx,
        jy,
        jz,
    })
}

/// Rotates one block: `out[c] = sum_r d[r][c] * amps[r]` (transpose) or
/// `out[r] = sum_c d[r][c] * amps[c]`.
fn rotate_block(cfg: &DConfig, two_j: u32, amps: &[Complex64], transpose: bool) -> Result<Vec<Complex64>> {
    let irrep = Irrep::new(two_j);
    let n = irrep.dimension();
    let rows: Vec<f64> = match cfg.method_for(irrep)? {
        DMethod::Recursion => recursion_rows(irrep),
        _ => {
            let d = cfg.matrix(irrep)?;
            let m = d.matrix();
            (0..n).flat_map(|r| (0..n).map(move |c| m[(r, c)])).collect()
        }
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if transpose {
        for (r, a) in amps.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &rows[r * n..(r + 1) * n];
            for (o, d) in out.iter_mut().zip(row) {
                *o += a * d;
            }
        }
    } else {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &rows[r * n..(r + 1) * n];
            *o = row.iter().zip(amps).map(|(d, a)| a * d).sum();
        }
    }
    let before: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let after: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    if (before - after).abs() > 1e-10 * before.max(1e-300).max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "block two_j = {two_j} lost norm in rotation: {before} -> {after}"
        )));
    }
    Ok(out)
}

fn rotate(psi: &SpinWaveFunction, cfg: &DConfig, target: Basis, transpose: bool) -> Result<SpinWaveFunction> {
    let rotated: Result<Vec<(u32, Vec<Complex64>)>> = psi
        .blocks()
        .par_iter()
        .map(|(&tj, amps)| rotate_block(cfg, tj, amps, transpose).map(|b| (tj, b)))
        .collect();
    let blocks: BTreeMap<u32, Vec<Complex64>> = rotated?.into_iter().collect();
    SpinWaveFunction::new(target, blocks, psi.truncation().clone())
}

/// `C_z(j, m_z) = sum_{m_y} d^j_{m_y m_z}(pi/2) C_y(j, m_y)` block by block.
pub fn basis_change_y_to_z(psi: &SpinWaveFunction) -> Result<SpinWaveFunction> {
    basis_change_y_to_z_with(psi, &DConfig::default())
}

pub fn basis_change_y_to_z_with(psi: &SpinWaveFunction, cfg: &DConfig) -> Result<SpinWaveFunction> {
    if psi.basis() != Basis::Y {
        return Err(Error::InvalidParameter("expected a y-basis wavefunction".into()));
    }
    rotate(psi, cfg, Basis::Z, true)
}

/// Inverse of [`basis_change_y_to_z`].
pub fn basis_change_z_to_y(psi: &SpinWaveFunction) -> Result<SpinWaveFunction> {
    if psi.basis() != Basis::Z {
        return Err(Error::InvalidParameter("expected a z-basis wavefunction".into()));
    }
    rotate(psi, &DConfig::default(), Basis::Y, false)
}
