//! Random-restart descent of the spin witness margin over pure states.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{spin_criterion, EmbeddedPair, ObservablePair, SpinRhs};
use crate::error::{Error, Result};
use crate::hilbert::{c64, CMatrix, CVector, HilbertDims, PureState};
use crate::su2::{spin_operators, Irrep};

/// Largest joint dimension the search accepts.
pub const SEARCH_MAX_DIM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchSpace {
    /// All pure joint states.
    Joint,
    /// Product states `phi1 (x) phi2` only.
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub rhs: SpinRhs,
    pub space: SearchSpace,
    /// Maximum descent steps per restart.
    pub max_steps: usize,
    /// Stop a restart once the tangent gradient norm drops below this.
    pub gradient_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            rhs: SpinRhs::General,
            space: SearchSpace::Joint,
            max_steps: 4000,
            gradient_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub state: PureState,
    pub margin: f64,
    pub restarts: usize,
}

struct Problem {
    u: CMatrix,
    v: CMatrix,
    u2: CMatrix,
    v2: CMatrix,
    x1: CMatrix,
    x2: CMatrix,
    rhs: SpinRhs,
    d1: usize,
    d2: usize,
}

fn expect(op: &CMatrix, psi: &CVector) -> f64 {
    psi.dotc(&(op * psi)).re
}

impl Problem {
    fn new(j1: Irrep, j2: Irrep, rhs: SpinRhs) -> Result<Self> {
        let pairs = ObservablePair::collective_spin(j1, j2);
        let EmbeddedPair { a1, b1, a2, b2 } = pairs.embedded()?;
        let u = a1.matrix() + a2.matrix();
        let v = b1.matrix() - b2.matrix();
        let (d1, d2) = (j1.dimension(), j2.dimension());
        let x1 = spin_operators(j1).jx.embed_system1(d2)?.matrix().clone();
        let x2 = spin_operators(j2).jx.embed_system2(d1)?.matrix().clone();
        Ok(Self {
            u2: &u * &u,
            v2: &v * &v,
            u,
            v,
            x1,
            x2,
            rhs,
            d1,
            d2,
        })
    }

    fn margin(&self, psi: &CVector) -> f64 {
        let (mu, mv) = (expect(&self.u, psi), expect(&self.v, psi));
        let lhs = expect(&self.u2, psi) - mu * mu + expect(&self.v2, psi) - mv * mv;
        let (x1, x2) = (expect(&self.x1, psi), expect(&self.x2, psi));
        let rhs = match self.rhs {
            SpinRhs::Symmetric => 2.0 * x1.abs(),
            SpinRhs::General => x1.abs() + x2.abs(),
        };
        lhs - rhs
    }

    /// `G psi` where the margin changes by `2 Re <d psi|G|psi>`.
    fn gradient_operator(&self, psi: &CVector) -> CMatrix {
        let (mu, mv) = (expect(&self.u, psi), expect(&self.v, psi));
        let (x1, x2) = (expect(&self.x1, psi), expect(&self.x2, psi));
        let mut g = &self.u2 + &self.v2 - self.u.map(|z| z * (2.0 * mu)) - self.v.map(|z| z * (2.0 * mv));
        match self.rhs {
            SpinRhs::Symmetric => g -= self.x1.map(|z| z * (2.0 * x1.signum())),
            SpinRhs::General => {
                g -= self.x1.map(|z| z * x1.signum());
                g -= self.x2.map(|z| z * x2.signum());
            }
        }
        g
    }
}

fn random_unit<R: Rng>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = v.norm();
    v.unscale(n)
}

fn project_out(g: CVector, psi: &CVector) -> CVector {
    let overlap = psi.dotc(&g);
    g - psi * overlap
}

/// One restart, parameterized by the current factors.
enum Point {
    Joint(CVector),
    Product(CVector, CVector),
}

impl Point {
    fn vector(&self) -> CVector {
        match self {
            Point::Joint(psi) => psi.clone(),
            Point::Product(a, b) => a.kronecker(b),
        }
    }

    /// Tangent direction of steepest ascent at this point.
    fn tangent(&self, p: &Problem) -> Vec<CVector> {
        let psi = self.vector();
        let gpsi = p.gradient_operator(&psi) * &psi;
        match self {
            Point::Joint(_) => vec![project_out(gpsi, &psi)],
            Point::Product(a, b) => {
                // Row index of the reshaped vector is the system-1 level.
                let m = DMatrix::from_fn(p.d1, p.d2, |i, k| gpsi[i * p.d2 + k]);
                let ga = &m * b.map(|z| z.conj());
                let gb = m.transpose() * a.map(|z| z.conj());
                vec![project_out(ga, a), project_out(gb, b)]
            }
        }
    }

    fn step(&self, dirs: &[CVector], eta: f64) -> Point {
        let move_to = |x: &CVector, d: &CVector| {
            let y = x - d.map(|z| z * eta);
            let n = y.norm();
            y.unscale(n)
        };
        match self {
            Point::Joint(psi) => Point::Joint(move_to(psi, &dirs[0])),
            Point::Product(a, b) => Point::Product(move_to(a, &dirs[0]), move_to(b, &dirs[1])),
        }
    }
}

fn descend(p: &Problem, mut point: Point, opts: &SearchOptions) -> (Point, f64) {
    let mut f = p.margin(&point.vector());
    let mut eta = 0.1;
    for _ in 0..opts.max_steps {
        let dirs = point.tangent(p);
        let g2: f64 = dirs.iter().map(|d| d.norm_squared()).sum();
        if g2.sqrt() < opts.gradient_tol {
            break;
        }
        let mut accepted = false;
        while eta > 1e-14 {
            let trial = point.step(&dirs, eta);
            let ft = p.margin(&trial.vector());
            // Armijo condition on the first-order decrease 2 eta |g|^2.
            if ft <= f - 1e-4 * eta * g2 {
                point = trial;
                f = ft;
                eta *= 1.5;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (point, f)
}

/// Smallest spin witness margin found over `restarts` seeded starting points.
pub fn brute_force_min_margin(
    j1: Irrep,
    j2: Irrep,
    restarts: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    let (d1, d2) = (j1.dimension(), j2.dimension());
    if d1 * d2 > SEARCH_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "joint dimension {} exceeds the search limit {SEARCH_MAX_DIM}",
            d1 * d2
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("at least one restart is required".into()));
    }
    let problem = Problem::new(j1, j2, opts.rhs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(CVector, f64)> = None;
    for _ in 0..restarts {
        let start = match opts.space {
            SearchSpace::Joint => Point::Joint(random_unit(d1 * d2, &mut rng)),
            SearchSpace::Product => Point::Product(random_unit(d1, &mut rng), random_unit(d2, &mut rng)),
        };
        let (point, f) = descend(&problem, start, opts);
        if best.as_ref().is_none_or(|(_, b)| f < *b) {
            best = Some((point.vector(), f));
        }
    }
    let (v, _) = best.expect("at least one restart ran");
    let state = PureState::normalized(HilbertDims::bipartite(d1, d2)?, v)?;
    // Report the margin from the public witness rather than the search's own evaluator.
    let margin = spin_criterion(&state, j1, j2, opts.rhs)?.margin;
    Ok(SearchResult {
        state,
        margin,
        restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::VIOLATION_TOL;

    const HALF: Irrep = Irrep::new(1);
    const ONE: Irrep = Irrep::new(2);

    #[test]
    fn search_reports_consistent_margin() {
        let r = brute_force_min_margin(HALF, HALF, 8, 1, &SearchOptions::default()).unwrap();
        let p = Problem::new(HALF, HALF, SpinRhs::General).unwrap();
        assert!((p.margin(r.state.vector()) - r.margin).abs() < 1e-10);
    }

    #[test]
    fn product_search_never_violates() {
        for (j1, j2) in [(HALF, HALF), (ONE, ONE), (HALF, ONE)] {
            let opts = SearchOptions {
                space: SearchSpace::Product,
                ..SearchOptions::default()
            };
            let r = brute_force_min_margin(j1, j2, 6, 7, &opts).unwrap();
            assert!(r.margin >= -VIOLATION_TOL, "{j1} {j2}: {}", r.margin);
        }
    }

    #[test]
    fn symmetric_bound_needs_symmetric_states() {
        // |+x> (x) |-y>: lhs = 3/4 against 2 |<Jx1>| = 1.
        let opts = SearchOptions {
            rhs: SpinRhs::Symmetric,
            space: SearchSpace::Product,
            ..SearchOptions::default()
        };
        let r = brute_force_min_margin(HALF, HALF, 6, 7, &opts).unwrap();
        assert!(r.margin < -0.2);
    }

    #[test]
    fn refuses_large_spaces() {
        assert!(brute_force_min_margin(Irrep::new(8), Irrep::new(8), 1, 0, &SearchOptions::default()).is_err());
    }
}
