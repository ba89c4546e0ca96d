//! Dense complex linear algebra on finite-dimensional Hilbert spaces.
//!
//! States and observables carry their [`HilbertDims`] so that mixing a
//! one-system operator with a bipartite state is caught at the call site
//! instead of producing a silently wrong trace. Everything here is an
//! immutable value; the free functions at the bottom of the module are the
//! moment primitives used by every criterion in [`crate::witness`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance for Hermiticity and normalization checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on the trace of a density operator.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a density operator.
pub const PSD_TOL: f64 = -1e-10;
/// Largest admissible imaginary part of `Tr(rho O)` for Hermitian `O`.
pub const IMAG_TOL: f64 = 1e-10;
/// Negative variances down to this (relative) value are clamped to zero.
pub const VARIANCE_CLAMP: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dimensions of a one- or two-system Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertDims {
    pub d1: usize,
    pub d2: Option<usize>,
}

impl HilbertDims {
    pub fn single(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(Self { d1: d, d2: None })
    }

    pub fn bipartite(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidParameter("dimensions must be at least 1".into()));
        }
        Ok(Self { d1, d2: Some(d2) })
    }

    /// Total dimension of the (joint) space.
    pub fn joint(&self) -> usize {
        self.d1 * self.d2.unwrap_or(1)
    }

    pub fn is_bipartite(&self) -> bool {
        self.d2.is_some()
    }

    fn ensure_eq(&self, other: &HilbertDims) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch {
                expected: self.joint(),
                got: other.joint(),
            });
        }
        Ok(())
    }
}

/// Which factor of a bipartite space an observable acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    System1,
    System2,
    /// The whole space (also used for single-system spaces).
    Joint,
}

/// Hermitian operator with dimension and subsystem metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    dims: HilbertDims,
    matrix: CMatrix,
    subsystem: Subsystem,
}

fn check_square(m: &CMatrix, n: usize) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.nrows(),
        });
    }
    Ok(())
}

/// Relative Hermiticity defect `|M - M^dag|_F / max(1, |M|_F)`.
///
/// The Frobenius norm bounds the operator norm from above, so passing this
/// check implies the operator-norm version.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0;
    for i in 0..n {
        for j in 0..n {
            defect += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
        }
    }
    defect.sqrt() / m.norm().max(1.0)
}

impl Observable {
    pub fn new(dims: HilbertDims, matrix: CMatrix, subsystem: Subsystem) -> Result<Self> {
        check_square(&matrix, dims.joint())?;
        let defect = hermitian_defect(&matrix);
        if !defect.is_finite() || defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        if subsystem != Subsystem::Joint && !dims.is_bipartite() {
            return Err(Error::InvalidParameter(
                "subsystem tag requires bipartite dims".into(),
            ));
        }
        Ok(Self {
            dims,
            matrix,
            subsystem,
        })
    }

    /// Observable on a single-system space of the matrix's dimension.
    pub fn local(matrix: CMatrix) -> Result<Self> {
        let dims = HilbertDims::single(matrix.nrows())?;
        Self::new(dims, matrix, Subsystem::Joint)
    }

    /// Real symmetric convenience constructor.
    pub fn from_real(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::local(matrix.map(|x| c64(x, 0.0)))
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    fn require_local(&self) -> Result<usize> {
        if self.dims.is_bipartite() {
            return Err(Error::InvalidParameter(
                "expected a single-system observable".into(),
            ));
        }
        Ok(self.dims.d1)
    }

    /// `A (x) 1` on a bipartite space whose second factor has dimension `d2`.
    pub fn embed_system1(&self, d2: usize) -> Result<Self> {
        let d1 = self.require_local()?;
        let dims = HilbertDims::bipartite(d1, d2)?;
        let matrix = self.matrix.kronecker(&CMatrix::identity(d2, d2));
        Ok(Self {
            dims,
            matrix,
            subsystem: Subsystem::System1,
        })
    }

    /// `1 (x) B` on a bipartite space whose first factor has dimension `d1`.
    pub fn embed_system2(&self, d1: usize) -> Result<Self> {
        let d2 = self.require_local()?;
        let dims = HilbertDims::bipartite(d1, d2)?;
        let matrix = CMatrix::identity(d1, d1).kronecker(&self.matrix);
        Ok(Self {
            dims,
            matrix,
            subsystem: Subsystem::System2,
        })
    }

    /// Real linear combination `a * self + b * other`, tagged by the common
    /// subsystem or `Joint` when they differ.
    pub fn combine(&self, a: f64, other: &Observable, b: f64) -> Result<Self> {
        self.dims.ensure_eq(&other.dims)?;
        let subsystem = if self.subsystem == other.subsystem {
            self.subsystem
        } else {
            Subsystem::Joint
        };
        let matrix = self.matrix.map(|z| z * a) + other.matrix.map(|z| z * b);
        Ok(Self {
            dims: self.dims,
            matrix,
            subsystem,
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            dims: self.dims,
            matrix: self.matrix.map(|z| z * a),
            subsystem: self.subsystem,
        }
    }

    /// Adds `c` times the identity.
    pub fn shifted(&self, c: f64) -> Self {
        let n = self.dims.joint();
        Self {
            dims: self.dims,
            matrix: &self.matrix + CMatrix::identity(n, n).map(|z| z * c),
            subsystem: self.subsystem,
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: HilbertDims,
    vector: CVector,
}

impl PureState {
    pub fn new(dims: HilbertDims, vector: CVector) -> Result<Self> {
        if vector.len() != dims.joint() {
            return Err(Error::DimensionMismatch {
                expected: dims.joint(),
                got: vector.len(),
            });
        }
        let norm2 = vector.norm_squared();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { dims, vector })
    }

    /// Normalizes `vector` before validation.
    pub fn normalized(dims: HilbertDims, vector: CVector) -> Result<Self> {
        let norm = vector.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new(dims, vector.unscale(norm))
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: HilbertDims, index: usize) -> Result<Self> {
        let n = dims.joint();
        if index >= n {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {n}"
            )));
        }
        let mut v = CVector::zeros(n);
        v[index] = c64(1.0, 0.0);
        Self::new(dims, v)
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn to_density(&self) -> DensityOperator {
        let matrix = &self.vector * self.vector.adjoint();
        DensityOperator {
            dims: self.dims,
            matrix,
        }
    }
}

/// Trace-one positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    dims: HilbertDims,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(dims: HilbertDims, matrix: CMatrix) -> Result<Self> {
        check_square(&matrix, dims.joint())?;
        let defect = hermitian_defect(&matrix);
        if !defect.is_finite() || defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(trace.re));
        }
        let min_eig = matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(Self { dims, matrix })
    }

    /// `1/d` times the identity.
    pub fn maximally_mixed(dims: HilbertDims) -> Self {
        let n = dims.joint();
        Self {
            dims,
            matrix: CMatrix::identity(n, n).map(|z| z / n as f64),
        }
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    // Skips the eigen-check; callers guarantee validity by construction.
    pub(crate) fn from_parts_unchecked(dims: HilbertDims, matrix: CMatrix) -> Self {
        Self { dims, matrix }
    }
}

/// Anything moments can be taken against.
pub trait QuantumState: Send + Sync {
    fn dims(&self) -> HilbertDims;

    /// `Tr(rho O)` (or `<psi|O|psi>`).
    fn trace_with(&self, op: &CMatrix) -> Complex64;

    /// `Tr(rho A B)` (or `<psi|A B|psi>`).
    fn trace_with_product(&self, a: &CMatrix, b: &CMatrix) -> Complex64;
}

impl QuantumState for PureState {
    fn dims(&self) -> HilbertDims {
        self.dims
    }

    fn trace_with(&self, op: &CMatrix) -> Complex64 {
        self.vector.dotc(&(op * &self.vector))
    }

    fn trace_with_product(&self, a: &CMatrix, b: &CMatrix) -> Complex64 {
        let left = a.ad_mul(&self.vector);
        let right = b * &self.vector;
        left.dotc(&right)
    }
}

impl QuantumState for DensityOperator {
    fn dims(&self) -> HilbertDims {
        self.dims
    }

    fn trace_with(&self, op: &CMatrix) -> Complex64 {
        let n = self.dims.joint();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * op[(j, i)];
            }
        }
        acc
    }

    fn trace_with_product(&self, a: &CMatrix, b: &CMatrix) -> Complex64 {
        let ra = &self.matrix * a;
        let n = self.dims.joint();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += ra[(i, j)] * b[(j, i)];
            }
        }
        acc
    }
}

/// Either kind of state, for code that accepts both.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl QuantumState for State {
    fn dims(&self) -> HilbertDims {
        match self {
            State::Pure(s) => s.dims(),
            State::Mixed(s) => s.dims(),
        }
    }

    fn trace_with(&self, op: &CMatrix) -> Complex64 {
        match self {
            State::Pure(s) => s.trace_with(op),
            State::Mixed(s) => s.trace_with(op),
        }
    }

    fn trace_with_product(&self, a: &CMatrix, b: &CMatrix) -> Complex64 {
        match self {
            State::Pure(s) => s.trace_with_product(a, b),
            State::Mixed(s) => s.trace_with_product(a, b),
        }
    }
}

impl From<PureState> for State {
    fn from(s: PureState) -> Self {
        State::Pure(s)
    }
}

impl From<DensityOperator> for State {
    fn from(s: DensityOperator) -> Self {
        State::Mixed(s)
    }
}

/// Kronecker product of two single-system objects.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

fn joint_dims(a: HilbertDims, b: HilbertDims) -> Result<HilbertDims> {
    if a.is_bipartite() || b.is_bipartite() {
        return Err(Error::InvalidParameter(
            "tensor operands must be single-system objects".into(),
        ));
    }
    HilbertDims::bipartite(a.d1, b.d1)
}

impl TensorProduct for Observable {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let dims = joint_dims(self.dims, other.dims)?;
        Observable::new(dims, self.matrix.kronecker(&other.matrix), Subsystem::Joint)
    }
}

impl TensorProduct for PureState {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let dims = joint_dims(self.dims, other.dims)?;
        PureState::new(dims, self.vector.kronecker(&other.vector))
    }
}

impl TensorProduct for DensityOperator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let dims = joint_dims(self.dims, other.dims)?;
        // A product of valid density operators is valid.
        Ok(DensityOperator::from_parts_unchecked(
            dims,
            self.matrix.kronecker(&other.matrix),
        ))
    }
}

pub fn tensor<T: TensorProduct>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

fn check_dims<S: QuantumState + ?Sized>(state: &S, op: &Observable) -> Result<()> {
    state.dims().ensure_eq(&op.dims)
}

fn real_part(z: Complex64) -> Result<f64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite("expectation"));
    }
    if z.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryExpectation(z.im));
    }
    Ok(z.re)
}

/// `Re Tr(rho O)`; the imaginary part must vanish.
pub fn expectation<S: QuantumState + ?Sized>(state: &S, op: &Observable) -> Result<f64> {
    check_dims(state, op)?;
    real_part(state.trace_with(&op.matrix))
}

/// `<O^2> - <O>^2`, clamped at zero within rounding.
pub fn variance<S: QuantumState + ?Sized>(state: &S, op: &Observable) -> Result<f64> {
    check_dims(state, op)?;
    let mean = real_part(state.trace_with(&op.matrix))?;
    let second = real_part(state.trace_with_product(&op.matrix, &op.matrix))?;
    let var = second - mean * mean;
    if var >= 0.0 {
        Ok(var)
    } else if var >= -VARIANCE_CLAMP * second.abs().max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance(var))
    }
}

/// Symmetrized covariance `1/2 <dO1 dO2 + dO2 dO1>`.
pub fn covariance<S: QuantumState + ?Sized>(
    state: &S,
    o1: &Observable,
    o2: &Observable,
) -> Result<f64> {
    check_dims(state, o1)?;
    check_dims(state, o2)?;
    let m1 = real_part(state.trace_with(&o1.matrix))?;
    let m2 = real_part(state.trace_with(&o2.matrix))?;
    // <O2 O1> is the conjugate of <O1 O2> for Hermitian operators.
    let cross = state.trace_with_product(&o1.matrix, &o2.matrix);
    if !cross.re.is_finite() {
        return Err(Error::NonFinite("covariance"));
    }
    Ok(cross.re - m1 * m2)
}

/// `|Tr(rho [A, B])|`.
pub fn commutator_bound<S: QuantumState + ?Sized>(
    state: &S,
    a: &Observable,
    b: &Observable,
) -> Result<f64> {
    check_dims(state, a)?;
    check_dims(state, b)?;
    let ab = state.trace_with_product(&a.matrix, &b.matrix);
    let ba = state.trace_with_product(&b.matrix, &a.matrix);
    let comm = ab - ba;
    if !comm.re.is_finite() || !comm.im.is_finite() {
        return Err(Error::NonFinite("commutator"));
    }
    // Tr(rho [A,B]) is purely imaginary for Hermitian A, B.
    if comm.re.abs() > IMAG_TOL * comm.norm().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "commutator trace has real part {:.3e}",
            comm.re
        )));
    }
    Ok(comm.im.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{spin_operators, Irrep};

    fn qubit_ops() -> crate::su2::SpinOperatorSet {
        spin_operators(Irrep::new(1))
    }

    fn plus_x() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(
            HilbertDims::single(2).unwrap(),
            CVector::from_vec(vec![c64(s, 0.0), c64(s, 0.0)]),
        )
        .unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let a = Observable::local(CMatrix::identity(2, 2)).unwrap();
        let b = Observable::local(CMatrix::identity(3, 3)).unwrap();
        let ab = tensor(&a, &b).unwrap();
        assert_eq!(ab.matrix(), &CMatrix::identity(6, 6));
        assert_eq!(ab.dims(), HilbertDims::bipartite(2, 3).unwrap());
    }

    #[test]
    fn basis_states_tensor() {
        let d = HilbertDims::single(2).unwrap();
        let z = PureState::basis(d, 0).unwrap();
        let zz = tensor(&z, &z).unwrap();
        let expected = [1.0, 0.0, 0.0, 0.0];
        for (x, e) in zz.vector().iter().zip(expected) {
            assert_eq!(*x, c64(e, 0.0));
        }
    }

    #[test]
    fn embedded_jz_spectrum() {
        let jz = qubit_ops().jz;
        let emb = jz.embed_system1(2).unwrap();
        let ev = emb.eigenvalues();
        let expected = [-0.5, -0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn expectation_examples() {
        let ops = qubit_ops();
        let mixed = DensityOperator::maximally_mixed(HilbertDims::single(2).unwrap());
        assert!(expectation(&mixed, &ops.jx).unwrap().abs() < 1e-15);
        let up = PureState::basis(HilbertDims::single(2).unwrap(), 0).unwrap();
        assert!((expectation(&up, &ops.jz).unwrap() - 0.5).abs() < 1e-15);
        assert!((expectation(&plus_x(), &ops.jx).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let ops = qubit_ops();
        let up = PureState::basis(HilbertDims::single(2).unwrap(), 0).unwrap();
        assert_eq!(variance(&up, &ops.jz).unwrap(), 0.0);
        assert!((variance(&plus_x(), &ops.jy).unwrap() - 0.25).abs() < 1e-15);
        let mixed = DensityOperator::maximally_mixed(HilbertDims::single(2).unwrap());
        assert!((variance(&mixed, &ops.jz).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn covariance_examples() {
        let ops = qubit_ops();
        let d2 = HilbertDims::bipartite(2, 2).unwrap();
        let jz1 = ops.jz.embed_system1(2).unwrap();
        let jz2 = ops.jz.embed_system2(2).unwrap();

        let prod = tensor(&plus_x(), &plus_x()).unwrap();
        assert!(covariance(&prod, &jz1, &jz2).unwrap().abs() < 1e-15);
        let v = variance(&prod, &jz1).unwrap();
        assert!((covariance(&prod, &jz1, &jz1).unwrap() - v).abs() < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = PureState::new(
            d2,
            CVector::from_vec(vec![c64(0.0, 0.0), c64(s, 0.0), c64(-s, 0.0), c64(0.0, 0.0)]),
        )
        .unwrap();
        assert!((covariance(&singlet, &jz1, &jz2).unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn commutator_bound_examples() {
        let ops = qubit_ops();
        assert_eq!(commutator_bound(&plus_x(), &ops.jy, &ops.jy).unwrap(), 0.0);
        assert!((commutator_bound(&plus_x(), &ops.jy, &ops.jz).unwrap() - 0.5).abs() < 1e-15);
        let mixed = DensityOperator::maximally_mixed(HilbertDims::single(2).unwrap());
        assert!(commutator_bound(&mixed, &ops.jy, &ops.jz).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let d = HilbertDims::single(2).unwrap();
        let bad = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        assert!(matches!(Observable::local(bad), Err(Error::NotHermitian(_))));
        let not_unit_trace = CMatrix::identity(2, 2);
        assert!(matches!(
            DensityOperator::new(d, not_unit_trace),
            Err(Error::InvalidTrace(_))
        ));
        let negative = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.5, 0.0), c64(-0.5, 0.0)]));
        assert!(matches!(DensityOperator::new(d, negative), Err(Error::NotPositive(_))));
        let jz = qubit_ops().jz;
        let three = DensityOperator::maximally_mixed(HilbertDims::single(3).unwrap());
        assert!(matches!(
            expectation(&three, &jz),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
