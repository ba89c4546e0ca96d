//! Variance-based separability witnesses for bipartite quantum states, and
//! the SU(2) machinery (Wigner d-matrices, multi-j wavefunctions, coherent
//! spin states) needed to compare spin basis changes against the
//! position-momentum Fourier shortcut.

pub mod casestudy;
pub mod cli;
pub mod error;
pub mod hilbert;
pub mod states;
pub mod su2;
pub mod witness;

pub use error::{Error, Result};
