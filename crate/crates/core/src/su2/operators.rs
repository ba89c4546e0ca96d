use num_complex::Complex64;
use statrs::function::factorial::ln_binomial;

use super::Irrep;
use crate::error::{Error, Result};
use crate::hilbert::{c64, CMatrix, CVector, HilbertDims, Observable, PureState};

/// `Jx`, `Jy`, `Jz` of one irrep in the `Jz` eigenbasis.
#[derive(Clone, Debug)]
pub struct SpinOperatorSet {
    pub irrep: Irrep,
    pub jx: Observable,
    pub jy: Observable,
    pub jz: Observable,
}

impl SpinOperatorSet {
    /// `J^2`, which is `j(j+1)` times the identity.
    pub fn j_squared(&self) -> CMatrix {
        let (x, y, z) = (self.jx.matrix(), self.jy.matrix(), self.jz.matrix());
        x * x + y * y + z * z
    }
}

/// Standard ladder-operator construction with Condon-Shortley phases.
pub fn spin_operators(irrep: Irrep) -> SpinOperatorSet {
    let n = irrep.dimension();
    let j = irrep.j();
    let mut raise = CMatrix::zeros(n, n);
    let mut jz = CMatrix::zeros(n, n);
    for k in 0..n {
        let m = irrep.m_at(k);
        jz[(k, k)] = c64(m, 0.0);
        if k > 0 {
            raise[(k - 1, k)] = c64((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower).map(|z| z * 0.5);
    let jy = (&raise - &lower).map(|z| z * Complex64::new(0.0, -0.5));
    let local = |m: CMatrix| Observable::local(m).expect("ladder construction is Hermitian");
    SpinOperatorSet {
        irrep,
        jx: local(jx),
        jy: local(jy),
        jz: local(jz),
    }
}

/// Spin coherent state `exp(-i phi Jz) exp(-i theta Jy) |j, j>` in the
/// `Jz` eigenbasis.
pub fn spin_coherent_state(irrep: Irrep, theta: f64, phi: f64) -> Result<PureState> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidParameter("non-finite angle".into()));
    }
    let n = irrep.dimension();
    let two_j = u64::from(irrep.two_j);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut v = CVector::zeros(n);
    for k in 0..n {
        let m = irrep.m_at(k);
        // j + m = 2j - k, j - m = k
        let up = (two_j - k as u64) as i32;
        let down = k as i32;
        let mag = if c == 0.0 || s == 0.0 {
            let cp = if up == 0 { 1.0 } else { c.powi(up) };
            let sp = if down == 0 { 1.0 } else { s.powi(down) };
            ln_binomial(two_j, k as u64).exp().sqrt() * cp * sp
        } else {
            let ln = 0.5 * ln_binomial(two_j, k as u64)
                + f64::from(up) * c.abs().ln()
                + f64::from(down) * s.abs().ln();
            let sign = c.signum().powi(up) * s.signum().powi(down);
            sign * ln.exp()
        };
        v[k] = Complex64::from_polar(1.0, -m * phi) * mag;
    }
    PureState::normalized(HilbertDims::single(n)?, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{expectation, variance};

    #[test]
    fn qubit_jz_diagonal() {
        let ops = spin_operators(Irrep::new(1));
        assert_eq!(ops.jz.matrix()[(0, 0)], c64(0.5, 0.0));
        assert_eq!(ops.jz.matrix()[(1, 1)], c64(-0.5, 0.0));
    }

    #[test]
    fn spin_one_spectrum() {
        let ev = spin_operators(Irrep::new(2)).jz.eigenvalues();
        for (a, b) in ev.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn algebra_and_casimir() {
        for two_j in 0..=12 {
            let ops = spin_operators(Irrep::new(two_j));
            let (x, y, z) = (ops.jx.matrix(), ops.jy.matrix(), ops.jz.matrix());
            let i = Complex64::new(0.0, 1.0);
            let cyc = [
                (y * z - z * y) - x.map(|v| v * i),
                (z * x - x * z) - y.map(|v| v * i),
                (x * y - y * x) - z.map(|v| v * i),
            ];
            for c in cyc {
                assert!(c.norm() < 1e-12, "two_j={two_j}: {}", c.norm());
            }
            let j = ops.irrep.j();
            let n = ops.irrep.dimension();
            let cas = ops.j_squared() - CMatrix::identity(n, n).map(|v| v * j * (j + 1.0));
            assert!(cas.norm() < 1e-12);
        }
    }

    #[test]
    fn coherent_state_points_along_x() {
        for two_j in [1, 2, 7, 40] {
            let irrep = Irrep::new(two_j);
            let ops = spin_operators(irrep);
            let psi = spin_coherent_state(irrep, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
            assert!((expectation(&psi, &ops.jx).unwrap() - irrep.j()).abs() < 1e-10);
            assert!(expectation(&psi, &ops.jz).unwrap().abs() < 1e-10);
            assert!((variance(&psi, &ops.jy).unwrap() - irrep.j() / 2.0).abs() < 1e-10);
        }
    }
}
