//! Moments of the simplex families, log-ratio statistics and the Monte Carlo
//! harness used to check them.

mod logratio;
mod mc;
mod moments;

pub use logratio::{expfamily_moments, expfamily_statistic, logratio_stats, LogRatioEntry};
pub use mc::{mc_estimate, mc_moments, summarize, McEstimate, McMoments};
pub use moments::{
    dirichlet_moments, moment, sm_tilt_covariance, sm_tilt_moment, sm_tilt_moment_with, tilt_form, MomentMethod,
    MomentRequest,
};
