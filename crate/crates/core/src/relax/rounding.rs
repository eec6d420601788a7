use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::convex::Assignment;
use crate::metric::MetricSpace;
use crate::pr::{pr_cost, pr_cost_outliers, tz2_cost_outliers};

use super::outliers::{SdpPro, SdpTz2o};
use super::pr::LpPr;

pub const DEFAULT_EPSILON: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingParams {
    pub seed: u64,
    pub epsilon: f64,
}

impl RoundingParams {
    pub fn new(seed: u64, epsilon: f64) -> Self {
        assert!(epsilon > 0.0, "epsilon must be positive");
        RoundingParams { seed, epsilon }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrRounding {
    pub landmarks: Vec<usize>,
    pub cost: u64,
    /// Multiplier applied to the fractional values.
    pub scale: f64,
    /// The draw came out empty and the best single vertex was forced in.
    pub forced_empty_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierSolution {
    pub landmarks: Vec<usize>,
    pub outliers: Vec<usize>,
    pub cost: u64,
    pub scale: f64,
    pub forced_empty_fallback: bool,
}

/// Includes `v` with probability `min(scale · x_v, 1)`. An empty draw is
/// replaced by the vertex with the largest `x_v` (lowest id on ties).
fn sample(x: &[f64], scale: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let picked: Vec<usize> = (0..x.len())
        .filter(|&v| rng.gen::<f64>() < (scale * x[v]).clamp(0.0, 1.0))
        .collect();
    if !picked.is_empty() {
        return (picked, false);
    }
    let best = (0..x.len())
        .max_by(|&a, &b| x[a].total_cmp(&x[b]).then(b.cmp(&a)))
        .expect("non-empty vertex set");
    (vec![best], true)
}

fn ln_n(n: usize) -> f64 {
    (n as f64).ln()
}

/// Independent rounding of an optimal landmark LP solution at rate `4 ln n`.
pub fn round_pr(ms: &MetricSpace, lp: &LpPr, sol: &Assignment, seed: u64) -> PrRounding {
    let n = ms.len();
    let x: Vec<f64> = (0..n).map(|v| sol.values[lp.x(v)]).collect();
    let scale = 4.0 * ln_n(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (landmarks, forced) = sample(&x, scale, &mut rng);
    PrRounding { cost: pr_cost(ms, &landmarks), landmarks, scale, forced_empty_fallback: forced }
}

/// Uniform sampler with rate `n^{-1/3}`, a reference point for the LP rounding.
pub fn baseline_pr_sample(ms: &MetricSpace, seed: u64) -> PrRounding {
    let n = ms.len();
    let p = (n as f64).powf(-1.0 / 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut landmarks: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < p).collect();
    let forced = landmarks.is_empty();
    if forced {
        landmarks.push(rng.gen_range(0..n));
    }
    PrRounding { cost: pr_cost(ms, &landmarks), landmarks, scale: p, forced_empty_fallback: forced }
}

fn gram_diag(sol: &Assignment, n: usize) -> Vec<f64> {
    (0..n).map(|v| sol.gram_entry(n, v, v)).collect()
}

fn threshold_outliers(z: &[f64], epsilon: f64) -> Vec<usize> {
    let t = 1.0 / (1.0 + epsilon);
    (0..z.len()).filter(|&v| z[v] >= t).collect()
}

fn top_outliers(z: &[f64], f: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
    let mut out: Vec<usize> = order.into_iter().take(f).collect();
    out.sort_unstable();
    out
}

/// Landmarks at rate `3 ln n / ε`, outliers by the threshold `Z_vv >= 1/(1+ε)`.
pub fn round_tz2o(ms: &MetricSpace, sdp: &SdpTz2o, sol: &Assignment, params: &RoundingParams) -> OutlierSolution {
    let n = ms.len();
    let x: Vec<f64> = (0..n).map(|v| sol.values[sdp.x(v)]).collect();
    let scale = 3.0 * ln_n(n) / params.epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (landmarks, forced) = sample(&x, scale, &mut rng);
    let outliers = threshold_outliers(&gram_diag(sol, n), params.epsilon);
    OutlierSolution {
        cost: tz2_cost_outliers(ms, &landmarks, &outliers, outliers.len()),
        landmarks,
        outliers,
        scale,
        forced_empty_fallback: forced,
    }
}

/// As [`round_tz2o`] with `ε = DEFAULT_EPSILON`, but the outliers are the `f`
/// vertices with the largest `Z_vv` (lowest id on ties).
pub fn round_tz2o_topf(ms: &MetricSpace, sdp: &SdpTz2o, sol: &Assignment, seed: u64) -> OutlierSolution {
    let n = ms.len();
    let x: Vec<f64> = (0..n).map(|v| sol.values[sdp.x(v)]).collect();
    let scale = 3.0 * ln_n(n) / DEFAULT_EPSILON;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (landmarks, forced) = sample(&x, scale, &mut rng);
    let outliers = top_outliers(&gram_diag(sol, n), sdp.f);
    OutlierSolution {
        cost: tz2_cost_outliers(ms, &landmarks, &outliers, outliers.len()),
        landmarks,
        outliers,
        scale,
        forced_empty_fallback: forced,
    }
}

/// Landmarks at rate `6 ln n / ε`, outliers by threshold, landmark-oracle cost.
pub fn round_pro(ms: &MetricSpace, sdp: &SdpPro, sol: &Assignment, params: &RoundingParams) -> OutlierSolution {
    let n = ms.len();
    let x: Vec<f64> = (0..n).map(|v| sol.values[sdp.x(v)]).collect();
    let scale = 6.0 * ln_n(n) / params.epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (landmarks, forced) = sample(&x, scale, &mut rng);
    let outliers = threshold_outliers(&gram_diag(sol, n), params.epsilon);
    OutlierSolution {
        cost: pr_cost_outliers(ms, &landmarks, &outliers, outliers.len()),
        landmarks,
        outliers,
        scale,
        forced_empty_fallback: forced,
    }
}

/// One row of a trial log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub a_size: usize,
    pub f_size: usize,
    pub cost: u64,
    pub lp_or_sdp_objective: f64,
    pub forced_empty_fallback: bool,
}

/// Runs `trials` independent roundings in parallel; trial `t` uses seed `seed + t`.
/// The output is in trial order regardless of scheduling.
pub fn run_trials<F>(trials: usize, seed: u64, one: F) -> Vec<TrialRecord>
where
    F: Fn(usize, u64) -> TrialRecord + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| one(t, seed.wrapping_add(t as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::gen_uniform;
    use crate::relax::{build_lp_pr, build_sdp_tz2o};

    #[test]
    fn sampling_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, forced) = sample(&[1.0, 0.0, 1.0, 0.0], 1.0, &mut rng);
        assert_eq!(a, vec![0, 2]);
        assert!(!forced);
        let (a, forced) = sample(&[0.0, 0.0, 0.0], 5.0, &mut rng);
        assert_eq!(a, vec![0]);
        assert!(forced);
    }

    #[test]
    fn threshold_arithmetic() {
        assert_eq!(threshold_outliers(&[0.95, 0.9, 0.5], 0.1), vec![0]);
        assert_eq!(top_outliers(&[0.2, 0.7, 0.7, 0.1], 2), vec![1, 2]);
        assert_eq!(top_outliers(&[0.2, 0.7, 0.7, 0.1], 0), Vec::<usize>::new());
    }

    #[test]
    fn round_pr_is_deterministic() {
        let ms = gen_uniform(5).unwrap();
        let lp = build_lp_pr(&ms);
        let mut x = vec![0.0; lp.model.num_vars()];
        x[2] = 0.1;
        let sol = lp.model.assignment(x);
        assert_eq!(round_pr(&ms, &lp, &sol, 7), round_pr(&ms, &lp, &sol, 7));
    }

    #[test]
    fn zero_trace_has_no_outliers() {
        let ms = gen_uniform(4).unwrap();
        let sdp = build_sdp_tz2o(&ms, 0);
        let sol = sdp.model.assignment(vec![0.5; sdp.model.num_scalars()], vec![0.0; 16]);
        let r = round_tz2o(&ms, &sdp, &sol, &RoundingParams::new(3, 0.25));
        assert!(r.outliers.is_empty());
        let r = round_tz2o_topf(&ms, &sdp, &sol, 3);
        assert!(r.outliers.is_empty());
    }

    #[test]
    fn trials_keep_order() {
        let recs = run_trials(20, 100, |t, s| TrialRecord {
            trial: t,
            seed: s,
            a_size: 0,
            f_size: 0,
            cost: s,
            lp_or_sdp_objective: 0.0,
            forced_empty_fallback: false,
        });
        assert!(recs.iter().enumerate().all(|(i, r)| r.trial == i && r.seed == 100 + i as u64));
    }
}
