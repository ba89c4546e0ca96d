//! Truncated two-mode Fock spaces: levels `n = 0..=cutoff` per mode, joint
//! index `n1 * (cutoff + 1) + n2`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{c64, CMatrix, HilbertDims, Observable, PureState};

/// Largest weight a constructor may lose to, or park next to, the cutoff.
pub const TMSV_TAIL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// Two-mode squeezing parameter.
    pub r: f64,
    /// Highest Fock level kept in each mode.
    pub cutoff: usize,
}

/// A two-mode state together with its truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    pub state: PureState,
    pub cutoff: usize,
}

impl FockState {
    /// Population on levels `n >= cutoff - 1` in either mode, where the
    /// truncated ladder operators stop behaving.
    pub fn tail_weight(&self) -> f64 {
        let d = self.cutoff + 1;
        let edge = self.cutoff.saturating_sub(1);
        self.state
            .vector()
            .iter()
            .enumerate()
            .filter(|(i, _)| i / d >= edge || i % d >= edge)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn dims(&self) -> HilbertDims {
        self.state.dims()
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::InvalidParameter(format!("Fock cutoff must be at least 2, got {cutoff}")));
    }
    Ok(())
}

/// `sech r * sum_n (-tanh r)^n |n, n>`, renormalized on the truncated space.
pub fn tmsv_state(params: &OscillatorParams) -> Result<FockState> {
    check_cutoff(params.cutoff)?;
    if !params.r.is_finite() {
        return Err(Error::NonFinite("squeezing parameter"));
    }
    let d = params.cutoff + 1;
    let t = -params.r.tanh();
    // Weight beyond the cutoff, before renormalization.
    let lost = (t * t).powi(d as i32);
    let mut v = DVector::from_element(d * d, Complex64::new(0.0, 0.0));
    let mut amp = 1.0 / params.r.cosh();
    for n in 0..d {
        v[n * d + n] = c64(amp, 0.0);
        amp *= t;
    }
    let dims = HilbertDims::bipartite(d, d)?;
    let fock = FockState {
        state: PureState::normalized(dims, v)?,
        cutoff: params.cutoff,
    };
    let weight = lost.max(fock.tail_weight());
    if weight > TMSV_TAIL_TOLERANCE {
        return Err(Error::TruncationUnsafe {
            weight,
            tolerance: TMSV_TAIL_TOLERANCE,
        });
    }
    Ok(fock)
}

/// `|n1> (x) |n2>`.
pub fn fock_product_state(n1: usize, n2: usize, cutoff: usize) -> Result<FockState> {
    check_cutoff(cutoff)?;
    let d = cutoff + 1;
    if n1 >= d || n2 >= d {
        return Err(Error::InvalidParameter(format!(
            "Fock levels ({n1}, {n2}) exceed cutoff {cutoff}"
        )));
    }
    let dims = HilbertDims::bipartite(d, d)?;
    Ok(FockState {
        state: PureState::basis(dims, n1 * d + n2)?,
        cutoff,
    })
}

/// Single-mode quadratures `q = (a + a^dag)/sqrt 2`, `p = i(a^dag - a)/sqrt 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSet {
    pub q: Observable,
    pub p: Observable,
    pub cutoff: usize,
}

impl QuadratureSet {
    /// `(q1, p1, q2, p2)` on the two-mode space.
    pub fn two_mode(&self) -> Result<[Observable; 4]> {
        let d = self.cutoff + 1;
        Ok([
            self.q.embed_system1(d)?,
            self.p.embed_system1(d)?,
            self.q.embed_system2(d)?,
            self.p.embed_system2(d)?,
        ])
    }
}

pub fn quadrature_ops(cutoff: usize) -> Result<QuadratureSet> {
    check_cutoff(cutoff)?;
    let d = cutoff + 1;
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = c64((n as f64).sqrt(), 0.0);
    }
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + &ad).map(|z| z * s);
    let p = (&ad - &a).map(|z| z * c64(0.0, s));
    Ok(QuadratureSet {
        q: Observable::local(q)?,
        p: Observable::local(p)?,
        cutoff,
    })
}
