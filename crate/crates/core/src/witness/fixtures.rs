//! Named reference states with frozen witness values.

use super::{brute_force_min_margin, SearchOptions};
use crate::error::{Error, Result};
use crate::hilbert::{c64, tensor, CVector, HilbertDims, PureState, State};
use crate::states::{fock_product_state, FockState};
use crate::su2::Irrep;

/// Smallest spin witness margin (general bound) over two-qubit pure states: `1 - sqrt 2`.
pub const TWO_QUBIT_MIN_MARGIN: f64 = -0.414_213_562_373_095;

/// Same for two spin-1 systems, as found by the seeded search below.
pub const SPIN_ONE_MIN_MARGIN: f64 = -0.962_388_608_184_032;

pub const FIXTURE_SEARCH_SEED: u64 = 1;
pub const FIXTURE_SEARCH_RESTARTS: usize = 20;

pub const FIXTURE_NAMES: [&str; 6] = [
    "plus_x_product",
    "singlet",
    "two_qubit_min_margin",
    "spin_one_min_margin",
    "vacuum",
    "plus_x_mixed",
];

#[derive(Clone, Debug, PartialEq)]
pub enum Fixture {
    Spin { state: State, j1: Irrep, j2: Irrep },
    Fock(FockState),
}

fn qubit(a: f64, b: f64) -> Result<PureState> {
    PureState::normalized(HilbertDims::single(2)?, CVector::from_vec(vec![c64(a, 0.0), c64(b, 0.0)]))
}

fn searched(two_j: u32) -> Result<Fixture> {
    let j = Irrep::new(two_j);
    let r = brute_force_min_margin(j, j, FIXTURE_SEARCH_RESTARTS, FIXTURE_SEARCH_SEED, &SearchOptions::default())?;
    Ok(Fixture::Spin {
        state: r.state.into(),
        j1: j,
        j2: j,
    })
}

pub fn named_fixture(name: &str) -> Result<Fixture> {
    let half = Irrep::new(1);
    let spin = |state: State| Fixture::Spin { state, j1: half, j2: half };
    match name {
        "plus_x_product" => Ok(spin(tensor(&qubit(1.0, 1.0)?, &qubit(1.0, 1.0)?)?.into())),
        "singlet" => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let v = CVector::from_vec(vec![c64(0.0, 0.0), c64(s, 0.0), c64(-s, 0.0), c64(0.0, 0.0)]);
            Ok(spin(PureState::new(HilbertDims::bipartite(2, 2)?, v)?.into()))
        }
        "plus_x_mixed" => {
            let mixed = crate::hilbert::DensityOperator::maximally_mixed(HilbertDims::single(2)?);
            Ok(spin(tensor(&qubit(1.0, 1.0)?.to_density(), &mixed)?.into()))
        }
        "two_qubit_min_margin" => searched(1),
        "spin_one_min_margin" => searched(2),
        "vacuum" => Ok(Fixture::Fock(fock_product_state(0, 0, 20)?)),
        other => Err(Error::InvalidParameter(format!(
            "unknown fixture {other:?}; known: {}",
            FIXTURE_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{spin_criterion, SpinRhs};

    #[test]
    fn searched_fixtures_reproduce_frozen_margins() {
        for (name, frozen) in [("two_qubit_min_margin", TWO_QUBIT_MIN_MARGIN), ("spin_one_min_margin", SPIN_ONE_MIN_MARGIN)] {
            let Fixture::Spin { state, j1, j2 } = named_fixture(name).unwrap() else {
                panic!("{name} is a spin fixture");
            };
            let r = spin_criterion(&state, j1, j2, SpinRhs::General).unwrap();
            assert!((r.margin - frozen).abs() < 1e-9, "{name}: {}", r.margin);
            assert!(r.violated);
        }
        assert!((TWO_QUBIT_MIN_MARGIN - (1.0 - 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn every_name_resolves() {
        for name in FIXTURE_NAMES {
            named_fixture(name).unwrap();
        }
        assert!(named_fixture("nope").is_err());
    }
}
