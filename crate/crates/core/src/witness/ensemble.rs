use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use super::{ObservablePair, WitnessConfig};
use crate::error::{Error, Result};
use crate::hilbert::{
    c64, commutator_bound, expectation, variance, CMatrix, CVector, DensityOperator, HilbertDims, Observable, PureState,
    TRACE_TOL,
};

/// One product term `p * rho1 (x) rho2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableTerm {
    pub p: f64,
    pub rho1: DensityOperator,
    pub rho2: DensityOperator,
}

/// A convex mixture of product states.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableEnsemble {
    terms: Vec<SeparableTerm>,
    dims: HilbertDims,
}

impl SeparableEnsemble {
    pub fn new(terms: Vec<SeparableTerm>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidProbabilities("empty ensemble".into()))?;
        let (d1, d2) = (first.rho1.dims(), first.rho2.dims());
        if d1.is_bipartite() || d2.is_bipartite() {
            return Err(Error::InvalidParameter("ensemble factors must be single-system states".into()));
        }
        let mut total = 0.0;
        for t in &terms {
            if !(t.p >= 0.0) || !t.p.is_finite() {
                return Err(Error::InvalidProbabilities(format!("weight {} is not a probability", t.p)));
            }
            for (got, want) in [(t.rho1.dims(), d1), (t.rho2.dims(), d2)] {
                if got != want {
                    return Err(Error::DimensionMismatch {
                        expected: want.joint(),
                        got: got.joint(),
                    });
                }
            }
            total += t.p;
        }
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidProbabilities(format!("weights sum to {total}")));
        }
        Ok(Self {
            terms,
            dims: HilbertDims::bipartite(d1.d1, d2.d1)?,
        })
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }
}

/// `sum_i p_i rho1_i (x) rho2_i`.
pub fn ensemble_to_density(e: &SeparableEnsemble) -> Result<DensityOperator> {
    let n = e.dims.joint();
    let mut m = CMatrix::zeros(n, n);
    for t in &e.terms {
        m += t.rho1.matrix().kronecker(t.rho2.matrix()).map(|z| z * t.p);
    }
    DensityOperator::new(e.dims, m)
}

fn haar_vector<R: Rng>(d: usize, rng: &mut R) -> Result<PureState> {
    let v = CVector::from_fn(d, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    PureState::normalized(HilbertDims::single(d)?, v)
}

/// Haar-random pure factors with flat Dirichlet weights, from a ChaCha8 stream.
pub fn random_separable(dims: HilbertDims, n_terms: usize, seed: u64) -> Result<SeparableEnsemble> {
    let d2 = dims
        .d2
        .ok_or_else(|| Error::InvalidParameter("random_separable needs bipartite dims".into()))?;
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n_terms).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = raw.iter().sum();
    let mut terms = Vec::with_capacity(n_terms);
    for w in raw {
        let rho1 = haar_vector(dims.d1, &mut rng)?.to_density();
        let rho2 = haar_vector(d2, &mut rng)?.to_density();
        terms.push(SeparableTerm { p: w / sum, rho1, rho2 });
    }
    SeparableEnsemble::new(terms)
}

/// `(G + G^dag) / 2` with standard complex Gaussian entries.
pub fn random_observable<R: Rng>(d: usize, rng: &mut R) -> Result<Observable> {
    let g = CMatrix::from_fn(d, d, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let h = (&g + g.adjoint()).map(|z| z * 0.5);
    Observable::local(h)
}

pub fn random_pairs<R: Rng>(dims: HilbertDims, rng: &mut R) -> Result<ObservablePair> {
    let d2 = dims.d2.ok_or_else(|| Error::InvalidParameter("pairs need bipartite dims".into()))?;
    ObservablePair::new(
        random_observable(dims.d1, rng)?,
        random_observable(dims.d1, rng)?,
        random_observable(d2, rng)?,
        random_observable(d2, rng)?,
    )
}

/// `alpha, beta` uniform on `[-2, 2]`, redrawn in the measure-zero all-zero case.
pub fn random_config<R: Rng>(rng: &mut R) -> WitnessConfig {
    loop {
        let alpha = rng.random_range(-2.0..2.0);
        let beta = rng.random_range(-2.0..2.0);
        if let Ok(cfg) = WitnessConfig::new(alpha, beta) {
            return cfg;
        }
    }
}

/// `var(w)` on the mixture against `sum_i p_i var_i(w) + S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceSplit {
    pub direct: f64,
    /// `sum_i p_i (alpha^2 var_i(X1) + beta^2 var_i(X2))`.
    pub local_sum: f64,
    /// `sum_i p_i <w>_i^2 - (sum_i p_i <w>_i)^2`.
    pub s: f64,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionCheckReport {
    pub u: VarianceSplit,
    pub v: VarianceSplit,
    /// `S_u + S_v`.
    pub s: f64,
    pub residual: f64,
    /// `sum_i p_i (alpha^2 C1_i + beta^2 C2_i)` with per-term commutators.
    pub local_bound: f64,
    /// `u.local_sum + v.local_sum - local_bound`, nonnegative by the local uncertainty relations.
    pub local_margin: f64,
}

struct Local {
    mean: f64,
    var: f64,
}

fn local<S: crate::hilbert::QuantumState>(rho: &S, o: &Observable) -> Result<Local> {
    Ok(Local {
        mean: expectation(rho, o)?,
        var: variance(rho, o)?,
    })
}

fn split(
    e: &SeparableEnsemble,
    x1: &Observable,
    x2: &Observable,
    w1: f64,
    w2: f64,
    direct: f64,
) -> Result<VarianceSplit> {
    let mut local_sum = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    for t in e.terms() {
        let l1 = local(&t.rho1, x1)?;
        let l2 = local(&t.rho2, x2)?;
        local_sum += t.p * (w1 * w1 * l1.var + w2 * w2 * l2.var);
        let m = w1 * l1.mean + w2 * l2.mean;
        mean += t.p * m;
        second += t.p * m * m;
    }
    let s = second - mean * mean;
    Ok(VarianceSplit {
        direct,
        local_sum,
        s,
        residual: (direct - local_sum - s).abs(),
    })
}

pub fn decomposition_check(
    e: &SeparableEnsemble,
    pairs: &ObservablePair,
    cfg: &WitnessConfig,
) -> Result<DecompositionCheckReport> {
    if pairs.dims() != e.dims() {
        return Err(Error::DimensionMismatch {
            expected: e.dims().joint(),
            got: pairs.dims().joint(),
        });
    }
    let rho = ensemble_to_density(e)?;
    let uv = super::assemble_uv(pairs, cfg)?;
    let (a, b) = (cfg.alpha, cfg.beta);
    let u = split(e, &pairs.a1, &pairs.a2, a, b, variance(&rho, &uv.u)?)?;
    let v = split(e, &pairs.b1, &pairs.b2, a, -b, variance(&rho, &uv.v)?)?;
    let mut local_bound = 0.0;
    for t in e.terms() {
        let c1 = commutator_bound(&t.rho1, &pairs.a1, &pairs.b1)?;
        let c2 = commutator_bound(&t.rho2, &pairs.a2, &pairs.b2)?;
        local_bound += t.p * (a * a * c1 + b * b * c2);
    }
    Ok(DecompositionCheckReport {
        u,
        v,
        s: u.s + v.s,
        residual: u.residual.max(v.residual),
        local_bound,
        local_margin: u.local_sum + v.local_sum - local_bound,
    })
}
