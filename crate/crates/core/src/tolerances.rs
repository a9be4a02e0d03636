//! Numerical tolerances shared by the library and its tests.

/// Tolerance record used by invariant checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Row-sum slack per unit of dimension: a row passes when
    /// `|sum - 1| <= row_sum * n`.
    pub row_sum: f64,
    /// Entrywise slack for symmetry and `[0, 1]` membership.
    pub symmetry: f64,
    /// Row sums of a Laplacian.
    pub laplacian_row_sum: f64,
    /// Smallest eigenvalue accepted for a positive semidefinite matrix.
    pub psd_slack: f64,
    /// Threshold below which a nu entry counts as zero.
    pub nu_threshold: f64,
    /// Eigenvalue gap below which eigenvalues are treated as degenerate.
    pub degeneracy_gap: f64,
}

pub const DEFAULT: Tolerances = Tolerances {
    row_sum: 1e-12,
    symmetry: 1e-12,
    laplacian_row_sum: 1e-10,
    psd_slack: 1e-10,
    nu_threshold: 1e-14,
    degeneracy_gap: 1e-10,
};

impl Default for Tolerances {
    fn default() -> Self {
        DEFAULT
    }
}
