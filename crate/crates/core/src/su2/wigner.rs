//! Reduced rotation matrix `d^j_{m m'}(pi/2)`.
//!
//! Three evaluation routes are provided:
//!
//! * [`DMethod::ExactRational`]: the alternating binomial sum in big-integer
//!   arithmetic, then one rounding to `f64`. Slow, exact, capped at
//!   [`EXACT_TWO_J_CAP`].
//! * [`DMethod::LogDomain`]: the same sum with log-gamma weights and
//!   compensated summation. The sum alternates, so cancellation grows like
//!   `2^j` and the route is only admitted up to [`LOG_DOMAIN_TWO_J_CAP`].
//! * [`DMethod::Recursion`]: three-term recurrence in `m'` seeded from the
//!   closed-form edge columns `d^j_{m, +-j}`, run from both edges towards
//!   `m' = 0` so that every sweep moves in the direction of growth.
//!   Values are carried with a running log scale so `2^{-j}` edge entries
//!   do not underflow the recurrence for large `j`.
//!
//! The phase convention is `d^j_{m m'}(beta) = <j m| exp(-i beta Jy) |j m'>`.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};

use super::Irrep;
use crate::error::{Error, Result};

/// Largest `two_j` accepted by the exact rational route by default.
pub const EXACT_TWO_J_CAP: u32 = 50;
/// Largest `two_j` for which the log-domain alternating sum stays within
/// `1e-10` of the exact value.
pub const LOG_DOMAIN_TWO_J_CAP: u32 = 32;
/// Default cap for the stable (recursion) route.
pub const STABLE_TWO_J_CAP: u32 = 4000;

/// Rows above this size get a sampled unitarity check instead of a full one.
const FULL_UNITARITY_CHECK_DIM: usize = 1601;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DMethod {
    ExactRational,
    LogDomain,
    Recursion,
}

impl DMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DMethod::ExactRational => "exact-rational",
            DMethod::LogDomain => "log-domain",
            DMethod::Recursion => "recursion",
        }
    }
}

/// Caps and method selection for d-matrix evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DConfig {
    /// Blocks with `two_j` at or below this use the exact route.
    pub exact_cap: u32,
    /// Refuse anything above this.
    pub two_j_max: u32,
}

impl Default for DConfig {
    fn default() -> Self {
        Self {
            exact_cap: EXACT_TWO_J_CAP,
            two_j_max: STABLE_TWO_J_CAP,
        }
    }
}

impl DConfig {
    pub fn method_for(&self, irrep: Irrep) -> Result<DMethod> {
        if irrep.two_j > self.two_j_max {
            return Err(Error::CapabilityExceeded {
                method: "stable",
                two_j: irrep.two_j,
                cap: self.two_j_max,
            });
        }
        Ok(if irrep.two_j <= self.exact_cap {
            DMethod::ExactRational
        } else {
            DMethod::Recursion
        })
    }

    /// The matrix with the route chosen by [`Self::method_for`].
    pub fn matrix(&self, irrep: Irrep) -> Result<WignerDMatrix> {
        let method = self.method_for(irrep)?;
        let cap = match method {
            DMethod::ExactRational => self.exact_cap,
            _ => self.two_j_max,
        };
        compute(irrep, method, cap, false)
    }
}

/// Full `(2j+1) x (2j+1)` matrix at `beta = pi/2`.
#[derive(Clone, Debug)]
pub struct WignerDMatrix {
    irrep: Irrep,
    matrix: DMatrix<f64>,
    method: DMethod,
    error_estimate: Option<f64>,
}

impl WignerDMatrix {
    pub fn irrep(&self) -> Irrep {
        self.irrep
    }

    pub fn angle(&self) -> f64 {
        PI / 2.0
    }

    /// Rows and columns ordered by descending `m`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn method(&self) -> DMethod {
        self.method
    }

    /// Max-entry deviation of `d d^T` from the identity, when it was measured.
    pub fn error_estimate(&self) -> Option<f64> {
        self.error_estimate
    }

    /// Element `d^j_{m m'}` for doubled indices.
    pub fn get(&self, two_m: i64, two_mp: i64) -> Option<f64> {
        let r = self.irrep.index_of(two_m)?;
        let c = self.irrep.index_of(two_mp)?;
        Some(self.matrix[(r, c)])
    }

    /// Measures (or re-measures) the unitarity deviation.
    pub fn with_error_estimate(mut self) -> Self {
        self.error_estimate = Some(unitarity_deviation(&self.matrix));
        self
    }
}

/// Max-entry deviation of `d d^T` from the identity. Large matrices are
/// checked on a deterministic subset of rows against all rows.
pub fn unitarity_deviation(d: &DMatrix<f64>) -> f64 {
    let n = d.nrows();
    if n <= FULL_UNITARITY_CHECK_DIM {
        let prod = d * d.transpose();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, k)] - target).abs());
            }
        }
        return worst;
    }
    let step = n.div_ceil(200).max(1);
    let rows: Vec<usize> = (0..n).step_by(step).chain([n - 1]).collect();
    let mut worst: f64 = 0.0;
    for &i in &rows {
        let ri = d.row(i);
        for k in 0..n {
            let dot = ri.dot(&d.row(k));
            let target = if i == k { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// An element of `d^j(pi/2)` in exact form:
/// `value = 2^{-j} * sqrt(factorial_ratio) * alternating_sum`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDElement {
    pub two_j: u32,
    pub two_m: i64,
    pub two_mp: i64,
    /// `sum_k C(j+m, j+m'-k) C(j-m, k) (-1)^{m-m'+k}`.
    pub alternating_sum: BigInt,
    /// `(j+m')! (j-m')! / ((j+m)! (j-m)!)`.
    pub factorial_ratio: BigRational,
    pub value: f64,
}

impl ExactDElement {
    /// The exact square `value^2` as a rational.
    pub fn square(&self) -> BigRational {
        let s = BigRational::from_integer(&self.alternating_sum * &self.alternating_sum);
        let pow2 = BigRational::from_integer(BigInt::one() << self.two_j as usize);
        s * &self.factorial_ratio / pow2
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn binomial_rows(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    rows.push(vec![BigInt::one()]);
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![BigInt::one(); i + 1];
        for k in 1..i {
            row[k] = &prev[k - 1] + &prev[k];
        }
        rows.push(row);
    }
    rows
}

fn binom_at(rows: &[Vec<BigInt>], n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    rows[n as usize][k as usize].clone()
}

fn check_indices(irrep: Irrep, two_m: i64, two_mp: i64) -> Result<(usize, usize)> {
    match (irrep.index_of(two_m), irrep.index_of(two_mp)) {
        (Some(r), Some(c)) => Ok((r, c)),
        _ => Err(Error::InvalidParameter(format!(
            "m = {two_m}/2, m' = {two_mp}/2 not valid for j = {irrep}"
        ))),
    }
}

fn exact_element(irrep: Irrep, two_m: i64, two_mp: i64, rows: &[Vec<BigInt>]) -> ExactDElement {
    let tj = i64::from(irrep.two_j);
    let jpm = (tj + two_m) / 2;
    let jmm = (tj - two_m) / 2;
    let jpmp = (tj + two_mp) / 2;
    let jmmp = (tj - two_mp) / 2;
    let m_minus_mp = (two_m - two_mp) / 2;
    let mut sum = BigInt::zero();
    for k in 0..=jmm {
        let term = binom_at(rows, jpm, jpmp - k) * binom_at(rows, jmm, k);
        if term.is_zero() {
            continue;
        }
        if (m_minus_mp + k).rem_euclid(2) == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let ratio = BigRational::new(
        factorial(jpmp as u64) * factorial(jmmp as u64),
        factorial(jpm as u64) * factorial(jmm as u64),
    );
    let mut elem = ExactDElement {
        two_j: irrep.two_j,
        two_m,
        two_mp,
        alternating_sum: sum,
        factorial_ratio: ratio,
        value: 0.0,
    };
    let sq = elem.square().to_f64().unwrap_or(f64::NAN);
    let sign = if elem.alternating_sum.is_negative() { -1.0 } else { 1.0 };
    elem.value = sign * sq.sqrt();
    elem
}

/// One element by exact integer arithmetic (default cap [`EXACT_TWO_J_CAP`]).
pub fn wigner_d_exact(irrep: Irrep, two_m: i64, two_mp: i64) -> Result<ExactDElement> {
    wigner_d_exact_with_cap(irrep, two_m, two_mp, EXACT_TWO_J_CAP)
}

pub fn wigner_d_exact_with_cap(
    irrep: Irrep,
    two_m: i64,
    two_mp: i64,
    cap: u32,
) -> Result<ExactDElement> {
    if irrep.two_j > cap {
        return Err(Error::CapabilityExceeded {
            method: "exact-rational (use wigner_d_stable)",
            two_j: irrep.two_j,
            cap,
        });
    }
    check_indices(irrep, two_m, two_mp)?;
    let rows = binomial_rows(irrep.two_j as usize);
    Ok(exact_element(irrep, two_m, two_mp, &rows))
}

fn exact_matrix(irrep: Irrep) -> DMatrix<f64> {
    let n = irrep.dimension();
    let rows = binomial_rows(irrep.two_j as usize);
    DMatrix::from_fn(n, n, |r, c| {
        exact_element(irrep, irrep.two_m_at(r), irrep.two_m_at(c), &rows).value
    })
}

/// Neumaier-compensated accumulator.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn log_domain_element(irrep: Irrep, two_m: i64, two_mp: i64) -> f64 {
    let tj = i64::from(irrep.two_j);
    let jpm = (tj + two_m) / 2;
    let jmm = (tj - two_m) / 2;
    let jpmp = (tj + two_mp) / 2;
    let jmmp = (tj - two_mp) / 2;
    let m_minus_mp = (two_m - two_mp) / 2;
    let prefactor = -irrep.j() * LN_2
        + 0.5
            * (ln_factorial(jpmp as u64) + ln_factorial(jmmp as u64)
                - ln_factorial(jpm as u64)
                - ln_factorial(jmm as u64));
    let mut acc = Compensated::default();
    for k in 0..=jmm {
        let top = jpmp - k;
        if top < 0 || top > jpm {
            continue;
        }
        let ln_term = prefactor + ln_binomial(jpm as u64, top as u64) + ln_binomial(jmm as u64, k as u64);
        let sign = if (m_minus_mp + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        acc.add(sign * ln_term.exp());
    }
    acc.value()
}

fn log_domain_matrix(irrep: Irrep) -> DMatrix<f64> {
    let n = irrep.dimension();
    DMatrix::from_fn(n, n, |r, c| {
        log_domain_element(irrep, irrep.two_m_at(r), irrep.two_m_at(c))
    })
}

/// Row-major `(2j+1)^2` buffer computed by the edge-seeded recurrence.
pub(crate) fn recursion_rows(irrep: Irrep) -> Vec<f64> {
    let n = irrep.dimension();
    let two_j = irrep.two_j;
    let j = irrep.j();
    // c_plus[c] = sqrt((j - m')(j + m' + 1)), c_minus[c] = sqrt((j + m')(j - m' + 1))
    let mut c_plus = vec![0.0; n];
    let mut c_minus = vec![0.0; n];
    for c in 0..n {
        let mp = irrep.m_at(c);
        c_plus[c] = ((j - mp) * (j + mp + 1.0)).max(0.0).sqrt();
        c_minus[c] = ((j + mp) * (j - mp + 1.0)).max(0.0).sqrt();
    }
    let ln_edge_base = -j * LN_2;
    let mid = (two_j / 2) as usize;
    let mut out = vec![0.0; n * n];
    let mut seg = vec![0.0; n];
    for r in 0..n {
        let m = irrep.m_at(r);
        let two_m_term = 2.0 * m;
        let ln_seed = ln_edge_base + 0.5 * ln_binomial(u64::from(two_j), r as u64);
        let row = &mut out[r * n..(r + 1) * n];

        // Upper half: m' = j down to the middle, column index increasing.
        {
            let mut log_scale = ln_seed;
            seg[0] = 1.0;
            let mut prev = 0.0;
            for c in 0..mid {
                // d_{m, m'-1} = (-2m d_{m,m'} - c_plus(m') d_{m,m'+1}) / c_minus(m')
                let next = (-two_m_term * seg[c] - c_plus[c] * prev) / c_minus[c];
                prev = seg[c];
                seg[c + 1] = next;
                if next.abs() > 1e250 {
                    for v in &mut seg[..=c + 1] {
                        *v *= 1e-250;
                    }
                    prev *= 1e-250;
                    log_scale += 250.0 * std::f64::consts::LN_10;
                }
            }
            let scale = log_scale.exp();
            for c in 0..=mid {
                row[c] = seg[c] * scale;
            }
        }

        // Lower half: m' = -j up to just past the middle, column index decreasing.
        if mid + 1 < n {
            let mut log_scale = ln_seed;
            // d_{m,-j} carries the sign (-1)^{j+m} = (-1)^{2j - r}.
            let sign = if (two_j as usize + r) % 2 == 0 { 1.0 } else { -1.0 };
            seg[n - 1] = sign;
            let mut prev = 0.0;
            let mut c = n - 1;
            while c > mid + 1 {
                // d_{m, m'+1} = (-2m d_{m,m'} - c_minus(m') d_{m,m'-1}) / c_plus(m')
                let next = (-two_m_term * seg[c] - c_minus[c] * prev) / c_plus[c];
                prev = seg[c];
                seg[c - 1] = next;
                if next.abs() > 1e250 {
                    for v in &mut seg[c - 1..n] {
                        *v *= 1e-250;
                    }
                    prev *= 1e-250;
                    log_scale += 250.0 * std::f64::consts::LN_10;
                }
                c -= 1;
            }
            let scale = log_scale.exp();
            for c in mid + 1..n {
                row[c] = seg[c] * scale;
            }
        }
    }
    out
}

fn recursion_matrix(irrep: Irrep) -> DMatrix<f64> {
    let n = irrep.dimension();
    DMatrix::from_row_slice(n, n, &recursion_rows(irrep))
}

fn compute(irrep: Irrep, method: DMethod, cap: u32, with_estimate: bool) -> Result<WignerDMatrix> {
    if irrep.two_j > cap {
        return Err(Error::CapabilityExceeded {
            method: method.name(),
            two_j: irrep.two_j,
            cap,
        });
    }
    let matrix = match method {
        DMethod::ExactRational => exact_matrix(irrep),
        DMethod::LogDomain => log_domain_matrix(irrep),
        DMethod::Recursion => recursion_matrix(irrep),
    };
    let d = WignerDMatrix {
        irrep,
        matrix,
        method,
        error_estimate: None,
    };
    Ok(if with_estimate { d.with_error_estimate() } else { d })
}

/// Full matrix by an explicit method, with its default cap and a measured
/// unitarity deviation attached.
pub fn wigner_d(irrep: Irrep, method: DMethod) -> Result<WignerDMatrix> {
    let cap = match method {
        DMethod::ExactRational => EXACT_TWO_J_CAP,
        DMethod::LogDomain => LOG_DOMAIN_TWO_J_CAP,
        DMethod::Recursion => STABLE_TWO_J_CAP,
    };
    compute(irrep, method, cap, true)
}

/// [`wigner_d`] with an explicit `two_j` cap in place of the method default.
pub fn wigner_d_with_cap(irrep: Irrep, method: DMethod, cap: u32) -> Result<WignerDMatrix> {
    compute(irrep, method, cap, true)
}

/// Full matrix by the recursion route, capped at [`STABLE_TWO_J_CAP`].
pub fn wigner_d_stable(irrep: Irrep) -> Result<WignerDMatrix> {
    wigner_d_stable_with_cap(irrep, STABLE_TWO_J_CAP)
}

pub fn wigner_d_stable_with_cap(irrep: Irrep, two_j_max: u32) -> Result<WignerDMatrix> {
    compute(irrep, DMethod::Recursion, two_j_max, true)
}

/// Large-`j` form `sqrt(2/(pi j)) exp(|m^2 - m'^2| / 2j) cos((j + m - m') pi/2)`,
/// evaluated as written (including the sign of the exponent).
pub fn wigner_d_asymptotic(irrep: Irrep, two_m: i64, two_mp: i64) -> f64 {
    let j = irrep.j();
    if j == 0.0 {
        return f64::NAN;
    }
    let m = two_m as f64 / 2.0;
    let mp = two_mp as f64 / 2.0;
    // 2(j + m - m') in quarter turns of pi/4: cos(q pi / 4), exact at zeros.
    let q = (i64::from(irrep.two_j) + two_m - two_mp).rem_euclid(8);
    let cosine = match q {
        0 => 1.0,
        1 | 7 => FRAC_1_SQRT_2,
        2 | 6 => 0.0,
        3 | 5 => -FRAC_1_SQRT_2,
        _ => -1.0,
    };
    (2.0 / (PI * j)).sqrt() * ((m * m - mp * mp).abs() / (2.0 * j)).exp() * cosine
}
