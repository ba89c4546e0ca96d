use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Irrep;
use crate::hilbert::CMatrix;

/// Grid rule for `theta_k`, `k = 0..2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseSpacing {
    /// `theta_k = k pi / (2j + 1)`. Not an orthonormal set.
    HalfTurn,
    /// `theta_k = 2 pi k / (2j + 1)`.
    FullTurn,
}

impl PhaseSpacing {
    fn step(&self, irrep: Irrep) -> f64 {
        let n = irrep.dimension() as f64;
        match self {
            PhaseSpacing::HalfTurn => PI / n,
            PhaseSpacing::FullTurn => 2.0 * PI / n,
        }
    }
}

/// `<j, theta | j, m> = exp(i m theta) / sqrt(2j + 1)`.
pub fn phase_state_kernel(irrep: Irrep, theta: f64, two_m: i64) -> Complex64 {
    let m = two_m as f64 / 2.0;
    Complex64::from_polar((irrep.dimension() as f64).sqrt().recip(), m * theta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseStateBasis {
    pub irrep: Irrep,
    pub spacing: PhaseSpacing,
    pub thetas: Vec<f64>,
}

impl PhaseStateBasis {
    pub fn new(irrep: Irrep, spacing: PhaseSpacing) -> Self {
        let step = spacing.step(irrep);
        let thetas = (0..irrep.dimension()).map(|k| k as f64 * step).collect();
        Self {
            irrep,
            spacing,
            thetas,
        }
    }

    /// Row `k`, column `c`: `<theta_k | m_c>` with `m` descending.
    pub fn kernel_matrix(&self) -> CMatrix {
        let n = self.irrep.dimension();
        CMatrix::from_fn(n, n, |k, c| {
            phase_state_kernel(self.irrep, self.thetas[k], self.irrep.two_m_at(c))
        })
    }

    /// Gram matrix `<theta_k | theta_l>`.
    pub fn overlap_matrix(&self) -> CMatrix {
        let k = self.kernel_matrix();
        &k * k.adjoint()
    }

    /// Max-entry deviation of the Gram matrix from the identity.
    pub fn orthonormality_deviation(&self) -> f64 {
        let g = self.overlap_matrix();
        let n = g.nrows();
        (g - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
