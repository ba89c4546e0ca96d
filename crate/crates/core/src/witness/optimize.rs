use serde::Serialize;

use super::{ObservablePair, VIOLATION_TOL};
use crate::error::{Error, Result};
use crate::hilbert::{commutator_bound, covariance, variance, QuantumState};

/// The strongest unit-norm `(alpha, beta)` for a fixed state and pair.
///
/// `margin(alpha, beta) = (alpha, beta) M (alpha, beta)^T`, so the smallest
/// normalized margin is the smallest eigenvalue of `M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaBetaOptimum {
    pub alpha: f64,
    pub beta: f64,
    pub min_eigenvalue: f64,
    pub matrix: [[f64; 2]; 2],
    pub violated: bool,
}

impl AlphaBetaOptimum {
    /// `margin(alpha, beta) / (alpha^2 + beta^2)`.
    pub fn normalized_margin(&self, alpha: f64, beta: f64) -> f64 {
        let [[a, b], [_, c]] = self.matrix;
        (a * alpha * alpha + 2.0 * b * alpha * beta + c * beta * beta) / (alpha * alpha + beta * beta)
    }
}

pub fn optimize_alpha_beta<S: QuantumState + ?Sized>(state: &S, pairs: &ObservablePair) -> Result<AlphaBetaOptimum> {
    let e = pairs.embedded()?;
    let c1 = commutator_bound(state, &e.a1, &e.b1)?;
    let c2 = commutator_bound(state, &e.a2, &e.b2)?;
    let m11 = variance(state, &e.a1)? + variance(state, &e.b1)? - c1;
    let m22 = variance(state, &e.a2)? + variance(state, &e.b2)? - c2;
    let m12 = covariance(state, &e.a1, &e.a2)? - covariance(state, &e.b1, &e.b2)?;
    if !(m11.is_finite() && m22.is_finite() && m12.is_finite()) {
        return Err(Error::NonFinite("witness quadratic form"));
    }
    let mean = 0.5 * (m11 + m22);
    let half_gap = 0.5 * (m11 - m22);
    let radius = half_gap.hypot(m12);
    let lambda = mean - radius;
    // Eigenvector of the smaller eigenvalue, taken from the better-conditioned row.
    let (x, y) = if radius == 0.0 {
        (1.0, 0.0)
    } else if half_gap <= 0.0 {
        (radius - half_gap, -m12)
    } else {
        (-m12, radius + half_gap)
    };
    let n = x.hypot(y);
    Ok(AlphaBetaOptimum {
        alpha: x / n,
        beta: y / n,
        min_eigenvalue: lambda,
        matrix: [[m11, m12], [m12, m22]],
        violated: lambda < -VIOLATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{c64, tensor, CVector, HilbertDims, PureState};
    use crate::states::{tmsv_state, OscillatorParams};
    use crate::su2::Irrep;
    use crate::witness::{general_criterion, random_pairs, WitnessConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigenvector_attains_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = HilbertDims::bipartite(3, 2).unwrap();
        let psi = crate::witness::random_separable(d, 1, 9).unwrap();
        let rho = crate::witness::ensemble_to_density(&psi).unwrap();
        for _ in 0..20 {
            let pairs = random_pairs(d, &mut rng).unwrap();
            let opt = optimize_alpha_beta(&rho, &pairs).unwrap();
            let cfg = WitnessConfig::new(opt.alpha, opt.beta).unwrap();
            let r = general_criterion(&rho, &pairs, &cfg).unwrap();
            assert!((r.margin - opt.min_eigenvalue).abs() < 1e-10);
            for k in 0..64 {
                let t = k as f64 * std::f64::consts::PI / 64.0;
                assert!(opt.min_eigenvalue <= opt.normalized_margin(t.cos(), t.sin()) + 1e-12);
            }
        }
    }

    #[test]
    fn coherent_product_saturates() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(HilbertDims::single(2).unwrap(), CVector::from_vec(vec![c64(s, 0.0), c64(s, 0.0)])).unwrap();
        let psi = tensor(&plus, &plus).unwrap();
        let half = Irrep::new(1);
        let opt = optimize_alpha_beta(&psi, &ObservablePair::collective_spin(half, half)).unwrap();
        assert!(opt.min_eigenvalue.abs() < 1e-12);
        assert!(!opt.violated);
    }

    #[test]
    fn squeezed_vacuum_has_negative_direction() {
        let sq = tmsv_state(&OscillatorParams { r: 0.5, cutoff: 40 }).unwrap();
        let opt = optimize_alpha_beta(&sq.state, &ObservablePair::quadratures(40).unwrap()).unwrap();
        assert!((opt.min_eigenvalue - ((-1.0f64).exp() - 1.0)).abs() < 1e-6);
        assert!(opt.violated);
        assert!((opt.alpha.abs() - opt.beta.abs()).abs() < 1e-6);
    }
}
