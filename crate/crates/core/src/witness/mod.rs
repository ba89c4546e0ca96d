//! Variance-sum separability witnesses.
//!
//! For local pairs `(A1, B1)` and `(A2, B2)` with `C_k = |<[A_k, B_k]>|`, every
//! separable state satisfies
//! `var(alpha A1 + beta A2) + var(alpha B1 - beta B2) >= alpha^2 C1 + beta^2 C2`.
//! A margin below `-VIOLATION_TOL` certifies entanglement.

mod ensemble;
pub mod fixtures;
mod optimize;
mod search;

pub use ensemble::{
    decomposition_check, ensemble_to_density, random_config, random_observable, random_pairs,
    random_separable, DecompositionCheckReport, SeparableEnsemble, SeparableTerm, VarianceSplit,
};
pub use optimize::{optimize_alpha_beta, AlphaBetaOptimum};
pub use search::{brute_force_min_margin, SearchOptions, SearchResult, SearchSpace};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{commutator_bound, variance, HilbertDims, Observable, QuantumState, Subsystem};
use crate::states::{quadrature_ops, FockState};
use crate::su2::{spin_operators, Irrep};

/// A witness is violated only when its margin falls below `-VIOLATION_TOL`.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Largest weight next to the Fock cutoff the oscillator witness accepts.
pub const HW_TAIL_GUARD: f64 = 1e-6;

/// Local observables `A1, B1` on system 1 and `A2, B2` on system 2.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservablePair {
    pub a1: Observable,
    pub b1: Observable,
    pub a2: Observable,
    pub b2: Observable,
}

fn local_dim(o: &Observable) -> Result<usize> {
    if o.dims().is_bipartite() {
        return Err(Error::InvalidParameter("pair members must be single-system observables".into()));
    }
    Ok(o.dims().d1)
}

impl ObservablePair {
    pub fn new(a1: Observable, b1: Observable, a2: Observable, b2: Observable) -> Result<Self> {
        let d1 = local_dim(&a1)?;
        let d2 = local_dim(&a2)?;
        for (o, d) in [(&b1, d1), (&b2, d2)] {
            let got = local_dim(o)?;
            if got != d {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        Ok(Self { a1, b1, a2, b2 })
    }

    pub fn dims(&self) -> HilbertDims {
        HilbertDims {
            d1: self.a1.dims().d1,
            d2: Some(self.a2.dims().d1),
        }
    }

    /// `A1 = Jy1`, `B1 = Jz1`, `A2 = Jy2`, `B2 = -Jz2`.
    pub fn collective_spin(j1: Irrep, j2: Irrep) -> Self {
        let s1 = spin_operators(j1);
        let s2 = spin_operators(j2);
        Self {
            a1: s1.jy,
            b1: s1.jz,
            a2: s2.jy,
            b2: s2.jz.scaled(-1.0),
        }
    }

    /// `A_k = q_k`, `B_k = p_k`, so that `u = q1 + q2` and `v = p1 - p2` at unit weights.
    pub fn quadratures(cutoff: usize) -> Result<Self> {
        let ops = quadrature_ops(cutoff)?;
        Ok(Self {
            a1: ops.q.clone(),
            b1: ops.p.clone(),
            a2: ops.q,
            b2: ops.p,
        })
    }

    /// The four observables embedded in the joint space.
    pub fn embedded(&self) -> Result<EmbeddedPair> {
        let d = self.dims();
        let d1 = d.d1;
        let d2 = d.d2.unwrap_or(1);
        Ok(EmbeddedPair {
            a1: self.a1.embed_system1(d2)?,
            b1: self.b1.embed_system1(d2)?,
            a2: self.a2.embed_system2(d1)?,
            b2: self.b2.embed_system2(d1)?,
        })
    }
}

/// [`ObservablePair`] lifted to the joint space.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedPair {
    pub a1: Observable,
    pub b1: Observable,
    pub a2: Observable,
    pub b2: Observable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl WitnessConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter("alpha and beta must be finite".into()));
        }
        if alpha == 0.0 && beta == 0.0 {
            return Err(Error::InvalidParameter("alpha and beta cannot both vanish".into()));
        }
        Ok(Self { alpha, beta })
    }

    pub fn unit() -> Self {
        Self { alpha: 1.0, beta: 1.0 }
    }
}

/// `u = alpha A1 + beta A2`, `v = alpha B1 - beta B2` on the joint space.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinedObservables {
    pub u: Observable,
    pub v: Observable,
}

pub fn assemble_uv(pairs: &ObservablePair, cfg: &WitnessConfig) -> Result<CombinedObservables> {
    let e = pairs.embedded()?;
    assemble_embedded(&e, cfg)
}

fn assemble_embedded(e: &EmbeddedPair, cfg: &WitnessConfig) -> Result<CombinedObservables> {
    let u = e.a1.combine(cfg.alpha, &e.a2, cfg.beta)?;
    let v = e.b1.combine(cfg.alpha, &e.b2, -cfg.beta)?;
    // Re-validate: the combination must stay Hermitian on the joint space.
    let u = Observable::new(u.dims(), u.matrix().clone(), Subsystem::Joint)?;
    let v = Observable::new(v.dims(), v.matrix().clone(), Subsystem::Joint)?;
    Ok(CombinedObservables { u, v })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Oscillator quadratures with `[q, p] = i`.
    Hw,
    /// Arbitrary pairs and weights.
    General,
    /// Unit weights.
    Sum,
    /// Collective spin pairs.
    Spin,
}

impl Criterion {
    pub fn id(&self) -> &'static str {
        match self {
            Criterion::Hw => "hw",
            Criterion::General => "general",
            Criterion::Sum => "sum",
            Criterion::Spin => "spin",
        }
    }
}

/// Right-hand side used by the spin witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinRhs {
    /// `2 |<Jx1>|`, assuming both samples share `|<Jx>|`.
    Symmetric,
    /// `|<Jx1>| + |<Jx2>|`.
    General,
}

/// Right-hand side used by the oscillator witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HwBound {
    /// The ideal value `2`.
    Fixed,
    /// Measured commutators on the truncated space.
    StateDependent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinBounds {
    pub symmetric: f64,
    pub general: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub criterion: Criterion,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub violated: bool,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin_bounds: Option<SpinBounds>,
}

impl WitnessReport {
    fn build(criterion: Criterion, lhs: f64, rhs: f64, c1: f64, c2: f64, cfg: &WitnessConfig) -> Result<Self> {
        if !lhs.is_finite() || !rhs.is_finite() {
            return Err(Error::NonFinite("witness moments"));
        }
        let margin = lhs - rhs;
        Ok(Self {
            criterion,
            lhs,
            rhs,
            margin,
            violated: margin < -VIOLATION_TOL,
            c1,
            c2,
            alpha: cfg.alpha,
            beta: cfg.beta,
            spin_bounds: None,
        })
    }
}

struct Moments {
    lhs: f64,
    c1: f64,
    c2: f64,
}

fn moments<S: QuantumState + ?Sized>(state: &S, e: &EmbeddedPair, cfg: &WitnessConfig) -> Result<Moments> {
    let uv = assemble_embedded(e, cfg)?;
    let lhs = variance(state, &uv.u)? + variance(state, &uv.v)?;
    let c1 = commutator_bound(state, &e.a1, &e.b1)?;
    let c2 = commutator_bound(state, &e.a2, &e.b2)?;
    Ok(Moments { lhs, c1, c2 })
}

pub fn general_criterion<S: QuantumState + ?Sized>(
    state: &S,
    pairs: &ObservablePair,
    cfg: &WitnessConfig,
) -> Result<WitnessReport> {
    let e = pairs.embedded()?;
    let m = moments(state, &e, cfg)?;
    let rhs = cfg.alpha * cfg.alpha * m.c1 + cfg.beta * cfg.beta * m.c2;
    WitnessReport::build(Criterion::General, m.lhs, rhs, m.c1, m.c2, cfg)
}

/// [`general_criterion`] at `alpha = beta = 1`.
pub fn sum_criterion<S: QuantumState + ?Sized>(state: &S, pairs: &ObservablePair) -> Result<WitnessReport> {
    let mut r = general_criterion(state, pairs, &WitnessConfig::unit())?;
    r.criterion = Criterion::Sum;
    Ok(r)
}

/// `var(Jy1 + Jy2) + var(Jz1 + Jz2)` against either spin bound.
pub fn spin_criterion<S: QuantumState + ?Sized>(
    state: &S,
    j1: Irrep,
    j2: Irrep,
    mode: SpinRhs,
) -> Result<WitnessReport> {
    let pairs = ObservablePair::collective_spin(j1, j2);
    let e = pairs.embedded()?;
    let cfg = WitnessConfig::unit();
    let m = moments(state, &e, &cfg)?;
    // [Jy, Jz] = i Jx, so C1 = |<Jx1>|.
    let bounds = SpinBounds {
        symmetric: 2.0 * m.c1,
        general: m.c1 + m.c2,
    };
    let rhs = match mode {
        SpinRhs::Symmetric => bounds.symmetric,
        SpinRhs::General => bounds.general,
    };
    let mut r = WitnessReport::build(Criterion::Spin, m.lhs, rhs, m.c1, m.c2, &cfg)?;
    r.spin_bounds = Some(bounds);
    Ok(r)
}

/// `var(q1 + q2) + var(p1 - p2)` against `2` or the measured commutators.
pub fn hw_criterion(state: &FockState, mode: HwBound) -> Result<WitnessReport> {
    let tail = state.tail_weight();
    if tail > HW_TAIL_GUARD {
        return Err(Error::TruncationUnsafe {
            weight: tail,
            tolerance: HW_TAIL_GUARD,
        });
    }
    let pairs = ObservablePair::quadratures(state.cutoff)?;
    if pairs.dims() != state.dims() {
        return Err(Error::DimensionMismatch {
            expected: pairs.dims().joint(),
            got: state.dims().joint(),
        });
    }
    let e = pairs.embedded()?;
    let cfg = WitnessConfig::unit();
    let m = moments(&state.state, &e, &cfg)?;
    let rhs = match mode {
        HwBound::Fixed => 2.0,
        HwBound::StateDependent => m.c1 + m.c2,
    };
    WitnessReport::build(Criterion::Hw, m.lhs, rhs, m.c1, m.c2, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{c64, tensor, CMatrix, CVector, DensityOperator, PureState};
    use crate::states::{fock_product_state, tmsv_state, OscillatorParams};

    const HALF: Irrep = Irrep::new(1);

    fn plus_x() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(HilbertDims::single(2).unwrap(), CVector::from_vec(vec![c64(s, 0.0), c64(s, 0.0)])).unwrap()
    }

    fn qubit_pair() -> HilbertDims {
        HilbertDims::bipartite(2, 2).unwrap()
    }

    #[test]
    fn plus_x_product_saturates() {
        let psi = tensor(&plus_x(), &plus_x()).unwrap();
        let pairs = ObservablePair::collective_spin(HALF, HALF);
        let r = general_criterion(&psi, &pairs, &WitnessConfig::unit()).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!((r.rhs - 1.0).abs() < 1e-12);
        assert!(!r.violated);
        let s = spin_criterion(&psi, HALF, HALF, SpinRhs::Symmetric).unwrap();
        assert!(s.margin.abs() < 1e-12);
        let b = s.spin_bounds.unwrap();
        assert!((b.symmetric - b.general).abs() < 1e-12);
    }

    #[test]
    fn sum_matches_general_at_unit_weights() {
        let psi = tensor(&plus_x(), &PureState::basis(HilbertDims::single(2).unwrap(), 1).unwrap()).unwrap();
        let pairs = ObservablePair::collective_spin(HALF, HALF);
        let g = general_criterion(&psi, &pairs, &WitnessConfig::unit()).unwrap();
        let s = sum_criterion(&psi, &pairs).unwrap();
        assert_eq!((g.lhs, g.rhs, g.margin, g.violated, g.c1, g.c2), (s.lhs, s.rhs, s.margin, s.violated, s.c1, s.c2));
        assert_eq!(s.criterion, Criterion::Sum);
    }

    #[test]
    fn singlet_is_boundary() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![c64(0.0, 0.0), c64(s, 0.0), c64(-s, 0.0), c64(0.0, 0.0)]);
        let psi = PureState::new(qubit_pair(), v).unwrap();
        let r = spin_criterion(&psi, HALF, HALF, SpinRhs::General).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
        assert!(!r.violated);
    }

    #[test]
    fn maximally_mixed_has_zero_bound() {
        let rho = DensityOperator::maximally_mixed(qubit_pair());
        let r = general_criterion(&rho, &ObservablePair::collective_spin(HALF, HALF), &WitnessConfig::unit()).unwrap();
        assert!(r.rhs.abs() < 1e-15);
        assert!(r.margin >= 0.0);
    }

    #[test]
    fn assemble_identities() {
        let pairs = ObservablePair::collective_spin(HALF, Irrep::new(2));
        let uv = assemble_uv(&pairs, &WitnessConfig::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(uv.u.matrix(), pairs.a1.embed_system1(3).unwrap().matrix());
        let uv = assemble_uv(&pairs, &WitnessConfig::unit()).unwrap();
        let s1 = spin_operators(HALF);
        let s2 = spin_operators(Irrep::new(2));
        let jz = s1.jz.embed_system1(3).unwrap().matrix() + s2.jz.embed_system2(2).unwrap().matrix();
        assert!((uv.v.matrix() - jz).norm() < 1e-15);
        assert!(WitnessConfig::new(0.0, 0.0).is_err());
        assert!(WitnessConfig::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn rejects_mismatched_pairs() {
        let a = Observable::local(CMatrix::identity(2, 2)).unwrap();
        let b = Observable::local(CMatrix::identity(3, 3)).unwrap();
        assert!(ObservablePair::new(a.clone(), b, a.clone(), a.clone()).is_err());
        let psi = PureState::basis(HilbertDims::bipartite(3, 3).unwrap(), 0).unwrap();
        assert!(spin_criterion(&psi, HALF, HALF, SpinRhs::General).is_err());
    }

    #[test]
    fn oscillator_witness() {
        let vac = fock_product_state(0, 0, 20).unwrap();
        let r = hw_criterion(&vac, HwBound::Fixed).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-12);
        assert!(!r.violated);
        let sq = tmsv_state(&OscillatorParams { r: 0.5, cutoff: 40 }).unwrap();
        let r = hw_criterion(&sq, HwBound::Fixed).unwrap();
        assert!((r.lhs - 2.0 * (-1.0f64).exp()).abs() < 1e-6);
        assert!(r.violated);
        let d = hw_criterion(&sq, HwBound::StateDependent).unwrap();
        assert!((d.rhs - 2.0).abs() < 1e-6);
        let near_edge = fock_product_state(19, 0, 20).unwrap();
        assert!(matches!(hw_criterion(&near_edge, HwBound::Fixed), Err(Error::TruncationUnsafe { .. })));
    }
}
