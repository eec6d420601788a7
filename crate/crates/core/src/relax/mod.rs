//! LP and SDP relaxations of the oracle optimization problems, their integral
//! embeddings, the fractional certificate on the cycle, and rounding.

mod certificate;
mod outliers;
mod pr;
mod rounding;
mod tzk;

use thiserror::Error;

use crate::metric::MetricSpace;

pub use certificate::{cycle_fractional_solution, CertificateCheck, CycleCertificate};
pub use outliers::{
    build_lp_tz2o, build_sdp_pro, build_sdp_tz2o, embed_integral_pro, embed_integral_tz2o, SdpPro, SdpTz2o,
};
pub use pr::{build_lp_pr, embed_integral_pr, LpPr};
pub use rounding::{
    baseline_pr_sample, round_pr, round_pro, round_tz2o, round_tz2o_topf, run_trials, OutlierSolution, PrRounding,
    RoundingParams, TrialRecord, DEFAULT_EPSILON,
};
pub use tzk::{build_lp_tzk, embed_integral_tzk, LpTzk, TzkLayout};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelaxError {
    #[error("the landmark set must not be empty")]
    EmptySet,
}

/// Index of the unordered pair `{u, v}` (`u != v`) among `n (n - 1) / 2` pairs.
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (u, v) = (u.min(v), u.max(v));
    debug_assert!(u < v && v < n);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Distinct sets `B(u, r) ∪ B(v, d(u,v) - r)` over all integer `r ∈ [0, d(u,v)]`,
/// each as a sorted vertex list, in order of first appearance as `r` grows.
///
/// The union only changes where `B(u, r)` gains a vertex (`r = d(u,w)`) or
/// `B(v, d - r)` loses one (`r = d - d(v,w) + 1`), so those values and `r = 0`
/// cover every distinct set.
pub fn union_balls(ms: &MetricSpace, u: usize, v: usize) -> Vec<Vec<usize>> {
    let d = i64::from(ms.d(u, v));
    let mut rs: Vec<i64> = vec![0];
    for w in 0..ms.len() {
        rs.push(i64::from(ms.d(u, w)));
        rs.push(d - i64::from(ms.d(v, w)) + 1);
    }
    rs.retain(|&r| (0..=d).contains(&r));
    rs.sort_unstable();
    rs.dedup();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for r in rs {
        let mut set = ms.ball_closed(u, r);
        set.extend(ms.ball_closed(v, d - r));
        set.sort_unstable();
        set.dedup();
        if !out.contains(&set) {
            out.push(set);
        }
    }
    out
}
