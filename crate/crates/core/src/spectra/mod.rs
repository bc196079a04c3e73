//! Eigenvalue counting, the dense oracle, spectral shift functions and bracketing.

mod bracketing;
mod bunch_kaufman;
mod count;
mod dense;
mod ssf;

pub use bracketing::{bracketing_check, split_hamiltonian, BracketingCounts};
pub use bunch_kaufman::{Inertia, LdltFactor};
pub use count::{
    count_at_or_below, counts_at, inertia_method, CountMethod, CountResult, JITTER_STEP, MAX_JITTER_RETRIES,
    TIE_TOL,
};
pub use dense::{
    dense_count, dense_eigensystem, dense_eigenvalues, dense_eigenvalues_with_threshold, DEFAULT_DENSE_THRESHOLD,
};
pub use ssf::{ssf, SsfResult};
