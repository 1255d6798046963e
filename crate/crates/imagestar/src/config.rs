//! Central numerical configuration.

use crate::Scalar;

/// Tolerances used by every LP-backed decision in the crate.
///
/// A point satisfies a constraint system when `C·alpha <= d + feasibility`
/// componentwise; simplex pivots below `pivot` in magnitude are treated as
/// zero. Declared once here so callers and tests agree on the numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub feasibility: T,
    pub pivot: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            feasibility: T::from_f64(1e-7).expect("tolerance constant"),
            pivot: T::from_f64(1e-9).expect("tolerance constant"),
        }
    }
}

/// Default cap on the number of stars an exact-scheme reachability run may
/// hold at once before aborting with `Error::BudgetExceeded`.
pub const DEFAULT_STAR_BUDGET: usize = 10_000;
