//! Upper bounds on the quantum circuit overhead (QCO) and T-count overhead
//! (T-QCO) of finite single-qubit gate sets.
//!
//! The discrepancy `delta(nu, t)` of a gate set is the largest operator norm of
//! its averaged spin-`s` representations for `1 <= s <= t`; from it follow the
//! computable bounds `Q = log|S| / log(1/delta)` and, for sets `C ∪ {T}` with a
//! finite group `C`, `Q_T = log|C| / log(1/delta(S_T))` with the derived set
//! `S_T = {c T c^dagger}`.

pub mod ensembles;
pub mod error;
pub mod gates;
pub mod io;
pub mod irreps;
pub mod linalg;
pub mod moments;
pub mod overhead;
pub mod rng;

pub use error::{Error, Result};
pub use gates::{GateSet, ProjectiveGate};
