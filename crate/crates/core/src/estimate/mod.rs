//! Moment and dependence estimators: autocovariances, the long-run variance
//! `rho^2`, global and local scales `s_hat`, and the dependence order `m_hat`.

mod moments;
mod order;
mod scale;
pub mod wilcoxon;

#[cfg(test)]
pub(crate) use moments::autocov_with_mean;
pub use moments::{autocov, correlation_contribution, mean, rho2_hat, MomentEstimates};
pub(crate) use moments::{scale_component, PrefixMoments};
pub use order::{
    estimate_m, lagged_correlation, median, LagSummary, MOrderEstimate, OrderSettings,
    DEFAULT_ALPHA_M, DEFAULT_MAX_LAG, DEFAULT_SECTION_LEN, MIN_SECTIONS,
};
pub use scale::{s_hat_global, s_hat_local, s_hat_local_with_min, LocalScale};
