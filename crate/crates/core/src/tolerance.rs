/// Every numerical threshold the crate uses, in one place.
///
/// Functions whose contract names a tolerance take it as an argument; all
/// other checks read [`Tolerances::DEFAULT`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed `||m - m^dagger||`, scaled by `max(1, ||m||)`.
    pub hermitian: f64,
    /// Allowed negative eigenvalue magnitude for PSD inputs, scaled by `max(1, ||m||)`.
    pub psd: f64,
    /// Singular values below `rank_rel * s_max` count as zero.
    pub rank_rel: f64,
    /// Norm deviation accepted when a state is loaded or constructed.
    pub state_norm: f64,
    /// Closure residual `||R - I||` below which a Kraus set counts as closed.
    pub closure: f64,
    /// Allowed deviation of ensemble probabilities from a unit sum.
    pub probability_sum: f64,
    /// Relative slack for the majorization and operator inequalities.
    pub inequality: f64,
    /// Outcomes with probability below this are pruned.
    pub prune: f64,
    /// Monotone values at or below this count as exactly zero in `p_max`.
    pub zero_monotone: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-10,
        psd: 1e-10,
        rank_rel: 1e-10,
        state_norm: 1e-8,
        closure: 1e-9,
        probability_sum: 1e-9,
        inequality: 1e-9,
        prune: 1e-12,
        zero_monotone: 1e-12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
