//! JSON state descriptions. Complex numbers are `[re, im]` pairs.

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, CVector, DensityOperator, HilbertDims, Observable, PureState, State};
use crate::states::{tmsv_state, FockState, OscillatorParams};
use crate::su2::{parse_half, spin_coherent_state, Irrep};
use crate::witness::fixtures::{named_fixture, Fixture};
use crate::witness::{ensemble_to_density, ObservablePair, SeparableEnsemble, SeparableTerm};

/// A spin label given as a number (`0.5`) or a string (`"1/2"`).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SpinLabel {
    Number(f64),
    Text(String),
}

impl SpinLabel {
    pub fn irrep(&self) -> Result<Irrep> {
        let two_j = match self {
            SpinLabel::Number(x) => parse_half(&x.to_string()),
            SpinLabel::Text(s) => parse_half(s),
        };
        match two_j {
            Some(t) if t >= 0 && t <= i64::from(u32::MAX) => Ok(Irrep::new(t as u32)),
            _ => Err(Error::InvalidParameter(format!("{self:?} is not a spin label"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub a1: Vec<Vec<Complex64>>,
    pub b1: Vec<Vec<Complex64>>,
    pub a2: Vec<Vec<Complex64>>,
    pub b2: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalSpec {
    Vector(Vec<Complex64>),
    Matrix(Vec<Vec<Complex64>>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub p: f64,
    pub state1: LocalSpec,
    pub state2: LocalSpec,
}

fn half_turn() -> f64 {
    std::f64::consts::FRAC_PI_2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    DenseDensity {
        dims: [usize; 2],
        matrix: Vec<Vec<Complex64>>,
        pairs: Option<PairSpec>,
    },
    PureVector {
        dims: [usize; 2],
        amplitudes: Vec<Complex64>,
        pairs: Option<PairSpec>,
    },
    /// Product of two spin coherent states; defaults point both along `+x`.
    CoherentSpin {
        j1: SpinLabel,
        j2: SpinLabel,
        #[serde(default = "half_turn")]
        theta1: f64,
        #[serde(default)]
        phi1: f64,
        #[serde(default = "half_turn")]
        theta2: f64,
        #[serde(default)]
        phi2: f64,
    },
    Tmsv {
        r: f64,
        cutoff: Option<usize>,
    },
    Ensemble {
        terms: Vec<TermSpec>,
        pairs: Option<PairSpec>,
    },
    NamedFixture {
        name: String,
    },
}

/// A validated state ready for a witness.
#[derive(Clone, Debug)]
pub enum LoadedState {
    Bipartite {
        state: State,
        pairs: Option<ObservablePair>,
    },
    Fock(FockState),
}

impl LoadedState {
    pub fn dims(&self) -> HilbertDims {
        match self {
            LoadedState::Bipartite { state, .. } => crate::hilbert::QuantumState::dims(state),
            LoadedState::Fock(f) => f.dims(),
        }
    }
}

fn matrix(rows: &[Vec<Complex64>]) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare(n, bad.len()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn dims(d: [usize; 2]) -> Result<HilbertDims> {
    HilbertDims::bipartite(d[0], d[1])
}

fn pairs(spec: &Option<PairSpec>) -> Result<Option<ObservablePair>> {
    let Some(p) = spec else { return Ok(None) };
    let obs = |m: &Vec<Vec<Complex64>>| Observable::local(matrix(m)?);
    Ok(Some(ObservablePair::new(obs(&p.a1)?, obs(&p.b1)?, obs(&p.a2)?, obs(&p.b2)?)?))
}

fn local_density(spec: &LocalSpec) -> Result<DensityOperator> {
    match spec {
        LocalSpec::Vector(v) => {
            let dims = HilbertDims::single(v.len())?;
            Ok(PureState::new(dims, CVector::from_column_slice(v))?.to_density())
        }
        LocalSpec::Matrix(m) => {
            let m = matrix(m)?;
            DensityOperator::new(HilbertDims::single(m.nrows())?, m)
        }
    }
}

impl StateSpec {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::InvalidParameter(format!("state file: {e}")))
    }

    /// Builds and validates the state; `default_cutoff` applies to specs without one.
    pub fn load(&self, default_cutoff: usize) -> Result<LoadedState> {
        match self {
            StateSpec::DenseDensity { dims: d, matrix: m, pairs: p } => Ok(LoadedState::Bipartite {
                state: DensityOperator::new(dims(*d)?, matrix(m)?)?.into(),
                pairs: pairs(p)?,
            }),
            StateSpec::PureVector { dims: d, amplitudes, pairs: p } => Ok(LoadedState::Bipartite {
                state: PureState::new(dims(*d)?, CVector::from_column_slice(amplitudes))?.into(),
                pairs: pairs(p)?,
            }),
            StateSpec::CoherentSpin { j1, j2, theta1, phi1, theta2, phi2 } => {
                let a = spin_coherent_state(j1.irrep()?, *theta1, *phi1)?;
                let b = spin_coherent_state(j2.irrep()?, *theta2, *phi2)?;
                Ok(LoadedState::Bipartite {
                    state: crate::hilbert::tensor(&a, &b)?.into(),
                    pairs: None,
                })
            }
            StateSpec::Tmsv { r, cutoff } => Ok(LoadedState::Fock(tmsv_state(&OscillatorParams {
                r: *r,
                cutoff: cutoff.unwrap_or(default_cutoff),
            })?)),
            StateSpec::Ensemble { terms, pairs: p } => {
                let terms = terms
                    .iter()
                    .map(|t| {
                        Ok(SeparableTerm {
                            p: t.p,
                            rho1: local_density(&t.state1)?,
                            rho2: local_density(&t.state2)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let e = SeparableEnsemble::new(terms)?;
                Ok(LoadedState::Bipartite {
                    state: ensemble_to_density(&e)?.into(),
                    pairs: pairs(p)?,
                })
            }
            StateSpec::NamedFixture { name } => Ok(match named_fixture(name)? {
                Fixture::Spin { state, .. } => LoadedState::Bipartite { state, pairs: None },
                Fixture::Fock(f) => LoadedState::Fock(f),
            }),
        }
    }
}
