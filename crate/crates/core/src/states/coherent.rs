use std::collections::BTreeMap;

use num_complex::Complex64;
use statrs::function::factorial::ln_factorial;

use super::{SU2CoherentParams, Truncation};
use crate::error::Result;
use crate::su2::{Basis, Irrep, SpinWaveFunction};

/// `ln |a|^k` with `0^0 = 1`; `None` for an exact zero.
fn ln_power(modulus: f64, k: u64) -> Option<f64> {
    if k == 0 {
        Some(0.0)
    } else if modulus == 0.0 {
        None
    } else {
        Some(k as f64 * modulus.ln())
    }
}

/// `exp(-j_mean) a1^{j+m} a2^{j-m} / sqrt((j+m)! (j-m)!)` over the window.
pub(crate) fn two_mode_wavefunction(
    a1: Complex64,
    a2: Complex64,
    basis: Basis,
    truncation: &Truncation,
) -> Result<SpinWaveFunction> {
    let j_mean = (a1.norm_sqr() + a2.norm_sqr()) / 2.0;
    let info = truncation.window_for(j_mean)?;
    let (r1, r2) = (a1.norm(), a2.norm());
    let (p1, p2) = (a1.arg(), a2.arg());
    let mut blocks = BTreeMap::new();
    for two_j in info.two_j_min..=info.two_j_max {
        let irrep = Irrep::new(two_j);
        let amps: Vec<Complex64> = (0..irrep.dimension())
            .map(|k| {
                let up = u64::from(two_j) - k as u64; // j + m
                let down = k as u64; // j - m
                match (ln_power(r1, up), ln_power(r2, down)) {
                    (Some(l1), Some(l2)) => {
                        let ln = -j_mean + l1 + l2 - 0.5 * (ln_factorial(up) + ln_factorial(down));
                        let phase = p1 * up as f64 + p2 * down as f64;
                        Complex64::from_polar(ln.exp(), phase)
                    }
                    _ => Complex64::new(0.0, 0.0),
                }
            })
            .collect();
        blocks.insert(two_j, amps);
    }
    SpinWaveFunction::normalized(basis, blocks, info)
}

/// The coherent family expanded about `y`.
pub fn coherent_spin_wavefunction(
    params: &SU2CoherentParams,
    truncation: &Truncation,
) -> Result<SpinWaveFunction> {
    two_mode_wavefunction(params.alpha1, params.alpha2, Basis::Y, truncation)
}

/// The same state expanded about `z`, written directly with
/// `beta1 = (alpha2 + alpha1)/sqrt 2`, `beta2 = (alpha2 - alpha1)/sqrt 2`.
pub fn transformed_coefficients_exact(
    params: &SU2CoherentParams,
    truncation: &Truncation,
) -> Result<SpinWaveFunction> {
    let t = params.transformed();
    two_mode_wavefunction(t.beta1, t.beta2, Basis::Z, truncation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{basis_change_y_to_z, wavefunction_moments};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn balanced_quarter_turn_moments() {
        let p = SU2CoherentParams::balanced(50.0, FRAC_PI_2).unwrap();
        let psi = coherent_spin_wavefunction(&p, &Truncation::default()).unwrap();
        let m = wavefunction_moments(&psi).unwrap();
        assert!((m.j_mean - 50.0).abs() < 1e-8);
        assert!(m.jy.abs() < 1e-8);
        assert!(m.jz.abs() < 1e-8);
        assert!((m.jx - 50.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_alpha2_is_highest_weight() {
        let p = SU2CoherentParams::from_polar(3.0, 0.2, 0.0, 0.0).unwrap();
        let psi = coherent_spin_wavefunction(&p, &Truncation::default()).unwrap();
        for (&tj, amps) in psi.blocks() {
            for (k, a) in amps.iter().enumerate() {
                if k > 0 {
                    assert_eq!(a.norm(), 0.0, "two_j={tj}");
                }
            }
        }
        let m = wavefunction_moments(&psi).unwrap();
        assert!((m.jy - m.j_mean).abs() < 1e-10);
    }

    #[test]
    fn exact_transform_agrees_with_d_matrix_route() {
        let p = SU2CoherentParams::from_polar(2.5, 0.3, 3.1, -1.1).unwrap();
        let y = coherent_spin_wavefunction(&p, &Truncation::default()).unwrap();
        assert!(y.truncation().two_j_max <= 80);
        let rotated = basis_change_y_to_z(&y).unwrap();
        let direct = transformed_coefficients_exact(&p, &Truncation::default()).unwrap();
        assert!(rotated.max_abs_difference(&direct) < 1e-8);
        let mz = wavefunction_moments(&direct).unwrap().m_mean;
        assert!((mz - p.jz_mean()).abs() < 1e-8);
    }
}
