use std::path::Path;

use oracle_opt::convex::{lp_solve, sdp_solve, Assignment, GramSdpModel};
use oracle_opt::exact::{brute_outliers, brute_pr, brute_tz, OutlierProblem};
use oracle_opt::facility::tz2_optimize_greedy;
use oracle_opt::metric::{
    format_id_list, gen_cycle, gen_random_graph_metric, gen_setcover_reduction, gen_uniform, MetricSpace,
    SetCoverInstance,
};
use oracle_opt::pr::PrOracle;
use oracle_opt::relax::{
    baseline_pr_sample, build_lp_pr, build_lp_tzk, build_sdp_pro, build_sdp_tz2o, cycle_fractional_solution,
    round_pr, round_pro, round_tz2o, round_tz2o_topf, run_trials, OutlierSolution, RoundingParams, TrialRecord,
};
use oracle_opt::tz::{sample_levels, tz2_cost_closed_form, LevelChain, TzOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::{csv_text, emit, fmt_f, invalid, read_file, read_instance, read_set, write_file, CliError};
use crate::{
    Algo, EvalArgs, Family, GapArgs, GapFamily, GenArgs, Objective, OptimizeArgs, Queries, ReportArgs, Rounding,
    TrialsArgs,
};

const SDP_TOL: f64 = 1e-4;

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    let need_n = || a.n.ok_or_else(|| invalid("--n is required for this family"));
    let ms = match a.family {
        Family::Cycle => gen_cycle(need_n()?).map_err(invalid)?,
        Family::Uniform => gen_uniform(need_n()?).map_err(invalid)?,
        Family::Random => {
            if !(a.edge_prob > 0.0 && a.edge_prob <= 1.0) {
                return Err(invalid("--edge-prob must be in (0, 1]"));
            }
            if a.max_weight == 0 {
                return Err(invalid("--max-weight must be positive"));
            }
            gen_random_graph_metric(need_n()?, a.edge_prob, a.max_weight, a.seed).map_err(invalid)?
        }
        Family::Setcover => {
            let sc = SetCoverInstance::random(a.universe, a.sets, a.seed).map_err(invalid)?;
            gen_setcover_reduction(&sc).metric
        }
    };
    emit(a.out.as_deref(), &ms.to_text())
}

fn check_epsilon(eps: f64) -> Result<(), CliError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(invalid("--epsilon must be positive"))
    }
}

fn check_outliers(ms: &MetricSpace, f: usize) -> Result<(), CliError> {
    if f <= ms.len() {
        Ok(())
    } else {
        Err(invalid(format!("--outliers {f} exceeds n = {}", ms.len())))
    }
}

fn solve_sdp(model: &GramSdpModel, iters: usize) -> Result<Assignment, CliError> {
    Ok(sdp_solve(model, SDP_TOL, iters)?)
}

struct Solved {
    landmarks: Vec<usize>,
    outliers: Option<Vec<usize>>,
    chain: Option<LevelChain>,
    cost: u64,
    relaxation: f64,
}

impl Solved {
    fn from_outliers(s: OutlierSolution, relaxation: f64) -> Self {
        Solved { landmarks: s.landmarks, outliers: Some(s.outliers), chain: None, cost: s.cost, relaxation }
    }
}

fn run_optimize(ms: &MetricSpace, a: &OptimizeArgs) -> Result<Solved, CliError> {
    check_epsilon(a.epsilon)?;
    check_outliers(ms, a.outliers)?;
    let params = RoundingParams::new(a.seed, a.epsilon);
    let plain = |landmarks: Vec<usize>, cost: u64, relaxation: f64| Solved {
        landmarks,
        outliers: None,
        chain: None,
        cost,
        relaxation,
    };
    Ok(match a.algo {
        Algo::Tz2Greedy => {
            let a1 = tz2_optimize_greedy(ms);
            let cost = tz2_cost_closed_form(ms, &a1).map_err(invalid)?;
            plain(a1, cost, f64::NAN)
        }
        Algo::PrLp => {
            let lp = build_lp_pr(ms);
            let sol = lp_solve(&lp.model, 1e-9)?;
            let r = round_pr(ms, &lp, &sol, a.seed);
            plain(r.landmarks, r.cost, sol.objective)
        }
        Algo::Tz2oSdp => {
            let sdp = build_sdp_tz2o(ms, a.outliers);
            let sol = solve_sdp(&sdp.model, a.sdp_iters)?;
            let r = if a.top_f {
                round_tz2o_topf(ms, &sdp, &sol, a.seed)
            } else {
                round_tz2o(ms, &sdp, &sol, &params)
            };
            Solved::from_outliers(r, sol.objective)
        }
        Algo::PrOSdp => {
            let sdp = build_sdp_pro(ms, a.outliers);
            let sol = solve_sdp(&sdp.model, a.sdp_iters)?;
            Solved::from_outliers(round_pro(ms, &sdp, &sol, &params), sol.objective)
        }
        Algo::Brute => {
            if a.outliers > 0 {
                let problem = match a.objective {
                    Objective::Tz if a.k == 2 => OutlierProblem::Tz2,
                    Objective::Tz => return Err(invalid("outliers are supported for --k 2 only")),
                    Objective::Pr => OutlierProblem::Pr,
                };
                let o = brute_outliers(ms, a.outliers, problem).map_err(invalid)?;
                Solved { landmarks: o.landmarks, outliers: Some(o.outliers), chain: None, cost: o.cost, relaxation: f64::NAN }
            } else if a.objective == Objective::Pr {
                let (landmarks, cost) = brute_pr(ms).map_err(invalid)?;
                plain(landmarks, cost, f64::NAN)
            } else {
                if a.k < 2 {
                    return Err(invalid("--k must be at least 2"));
                }
                let (chain, cost) = brute_tz(ms, a.k).map_err(invalid)?;
                Solved { landmarks: chain.level(1), outliers: None, chain: Some(chain), cost, relaxation: f64::NAN }
            }
        }
    })
}

fn algo_name(a: Algo) -> &'static str {
    match a {
        Algo::Tz2Greedy => "tz2-greedy",
        Algo::PrLp => "pr-lp",
        Algo::Tz2oSdp => "tz2o-sdp",
        Algo::PrOSdp => "pr-o-sdp",
        Algo::Brute => "brute",
    }
}

pub fn optimize(a: &OptimizeArgs) -> Result<(), CliError> {
    let ms = read_instance(&a.instance)?;
    let s = run_optimize(&ms, a)?;
    if let Some(out) = &a.out {
        let text = match &s.chain {
            Some(c) if c.k() > 2 => c.to_text(),
            _ => format!("{}\n", format_id_list(&s.landmarks)),
        };
        write_file(out, &text)?;
    }
    if let Some(path) = &a.outlier_file {
        write_file(path, &format!("{}\n", format_id_list(s.outliers.as_deref().unwrap_or(&[]))))?;
    }
    let row = vec![
        algo_name(a.algo).to_string(),
        ms.len().to_string(),
        s.landmarks.len().to_string(),
        s.outliers.as_ref().map_or(0, Vec::len).to_string(),
        s.cost.to_string(),
        fmt_f(s.relaxation),
        format_id_list(&s.landmarks),
        format_id_list(s.outliers.as_deref().unwrap_or(&[])),
    ];
    let header = ["algo", "n", "a_size", "f_size", "cost", "relaxation_objective", "landmarks", "outliers"];
    print!("{}", csv_text(&header, &[row])?);
    Ok(())
}

const BUCKET: f64 = 0.25;

pub fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let ms = read_instance(&a.instance)?;
    let n = ms.len();
    if n < 2 {
        return Err(invalid("stretch needs at least two vertices"));
    }
    let (name, query, bound, upper): (String, Box<dyn Fn(usize, usize) -> u64>, Box<dyn Fn(u64) -> (u64, String)>, f64) =
        match a.oracle {
            Objective::Tz => {
                let chain = match &a.chain_file {
                    Some(p) => LevelChain::from_text(&read_file(p)?, n).map_err(invalid)?,
                    None => {
                        if a.k < 2 {
                            return Err(invalid("--k must be at least 2"));
                        }
                        sample_levels(&ms, a.k, a.seed)
                    }
                };
                let m = 2 * chain.k() as u64 - 1;
                let oracle = TzOracle::build(&ms, &chain).map_err(invalid)?;
                (
                    format!("tz{}", chain.k()),
                    Box::new(move |u, v| u64::from(oracle.query(u, v))),
                    Box::new(move |d| (m * d, format!("{m}*{d}"))),
                    m as f64,
                )
            }
            Objective::Pr => {
                let landmarks = match &a.set_file {
                    Some(p) => read_set(p, n)?,
                    None => baseline_pr_sample(&ms, a.seed).landmarks,
                };
                let oracle = PrOracle::build(&ms, &landmarks).map_err(invalid)?;
                (
                    "pr".to_string(),
                    Box::new(move |u, v| u64::from(oracle.query(u, v))),
                    Box::new(|d| (2 * d + 1, format!("2*{d}+1"))),
                    3.0,
                )
            }
        };
    let pairs: Vec<(usize, usize)> = match a.queries {
        Queries::All => (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect(),
        Queries::Sample => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            (0..a.samples)
                .map(|_| {
                    let u = rng.gen_range(0..n);
                    let mut v = rng.gen_range(0..n - 1);
                    if v >= u {
                        v += 1;
                    }
                    (u.min(v), u.max(v))
                })
                .collect()
        }
    };
    let buckets = ((upper - 1.0) / BUCKET).ceil() as usize;
    let mut hist = vec![0u64; buckets.max(1)];
    let mut violations = 0u64;
    let mut worst: Option<(u64, u64, usize, usize)> = None;
    for &(u, v) in &pairs {
        let d = u64::from(ms.d(u, v));
        let est = query(u, v);
        if est < d || est > bound(d).0 {
            violations += 1;
        }
        // Largest est/d, compared exactly; the first pair wins ties.
        if worst.is_none_or(|(we, wd, _, _)| est * wd > we * d) {
            worst = Some((est, d, u, v));
        }
        let ratio = est as f64 / d as f64;
        let b = (((ratio - 1.0) / BUCKET).floor().max(0.0) as usize).min(hist.len() - 1);
        hist[b] += 1;
    }
    let mut rows = vec![
        vec!["summary".into(), "oracle".into(), name],
        vec!["summary".into(), "pairs".into(), pairs.len().to_string()],
        vec!["summary".into(), "violations".into(), violations.to_string()],
    ];
    if let Some((est, d, u, v)) = worst {
        rows.push(vec!["summary".into(), "max_ratio".into(), fmt_f(est as f64 / d as f64)]);
        rows.push(vec!["summary".into(), "worst_pair".into(), format!("{} {}", u + 1, v + 1)]);
        rows.push(vec!["summary".into(), "worst_check".into(), format!("{est} <= {}", bound(d).1)]);
    }
    for (i, c) in hist.iter().enumerate() {
        let lo = 1.0 + i as f64 * BUCKET;
        let hi = 1.0 + (i + 1) as f64 * BUCKET;
        let close = if i + 1 == hist.len() { ']' } else { ')' };
        rows.push(vec!["histogram".into(), format!("[{lo:.2},{hi:.2}{close}"), c.to_string()]);
    }
    emit(a.out.as_deref(), &csv_text(&["section", "key", "value"], &rows)?)
}

const TRIAL_HEADER: [&str; 7] = ["trial", "seed", "a_size", "f_size", "cost", "lp_or_sdp_objective", "forced_empty_fallback"];

fn outlier_record(t: usize, seed: u64, s: OutlierSolution, objective: f64) -> TrialRecord {
    TrialRecord {
        trial: t,
        seed,
        a_size: s.landmarks.len(),
        f_size: s.outliers.len(),
        cost: s.cost,
        lp_or_sdp_objective: objective,
        forced_empty_fallback: s.forced_empty_fallback,
    }
}

pub fn trials(a: &TrialsArgs) -> Result<(), CliError> {
    let ms = read_instance(&a.instance)?;
    check_epsilon(a.epsilon)?;
    check_outliers(&ms, a.outliers)?;
    let ms = &ms;
    let records = match a.algo {
        Rounding::PrLp | Rounding::PrBaseline => {
            let lp = build_lp_pr(ms);
            let objective = if a.algo == Rounding::PrLp { Some(lp_solve(&lp.model, 1e-9)?) } else { None };
            run_trials(a.trials, a.seed, |t, seed| {
                let r = match &objective {
                    Some(sol) => round_pr(ms, &lp, sol, seed),
                    None => baseline_pr_sample(ms, seed),
                };
                TrialRecord {
                    trial: t,
                    seed,
                    a_size: r.landmarks.len(),
                    f_size: 0,
                    cost: r.cost,
                    lp_or_sdp_objective: objective.as_ref().map_or(f64::NAN, |s| s.objective),
                    forced_empty_fallback: r.forced_empty_fallback,
                }
            })
        }
        Rounding::Tz2o | Rounding::Tz2oTopf => {
            let sdp = build_sdp_tz2o(ms, a.outliers);
            let sol = solve_sdp(&sdp.model, a.sdp_iters)?;
            run_trials(a.trials, a.seed, |t, seed| {
                let r = if a.algo == Rounding::Tz2oTopf {
                    round_tz2o_topf(ms, &sdp, &sol, seed)
                } else {
                    round_tz2o(ms, &sdp, &sol, &RoundingParams::new(seed, a.epsilon))
                };
                outlier_record(t, seed, r, sol.objective)
            })
        }
        Rounding::Pro => {
            let sdp = build_sdp_pro(ms, a.outliers);
            let sol = solve_sdp(&sdp.model, a.sdp_iters)?;
            run_trials(a.trials, a.seed, |t, seed| {
                outlier_record(t, seed, round_pro(ms, &sdp, &sol, &RoundingParams::new(seed, a.epsilon)), sol.objective)
            })
        }
    };
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.trial.to_string(),
                r.seed.to_string(),
                r.a_size.to_string(),
                r.f_size.to_string(),
                r.cost.to_string(),
                fmt_f(r.lp_or_sdp_objective),
                r.forced_empty_fallback.to_string(),
            ]
        })
        .collect();
    emit(a.out.as_deref(), &csv_text(&TRIAL_HEADER, &rows)?)
}

pub fn gap(a: &GapArgs) -> Result<(), CliError> {
    let GapFamily::Cycle = a.family;
    if a.k < 2 {
        return Err(invalid("--k must be at least 2"));
    }
    if let Some(&bad) = a.n_list.iter().find(|&&n| n < 4) {
        return Err(invalid(format!("cycle sizes must be at least 4, got {bad}")));
    }
    let growth = 1.0 + 1.0 / (1u64 << (a.k - 1)) as f64;
    let mut rows = Vec::new();
    for &n in &a.n_list {
        let ms = gen_cycle(n).map_err(invalid)?;
        let cert = cycle_fractional_solution(n, a.k).evaluate(&ms);
        let lp = if n <= a.lp_max { Some(lp_solve(&build_lp_tzk(&ms, a.k).model, 1e-9)?.objective) } else { None };
        let brute = brute_tz(&ms, a.k).ok().map(|(_, c)| c);
        let ratio = match (brute, lp) {
            (Some(b), Some(l)) if l > 0.0 => fmt_f(b as f64 / l),
            _ => String::new(),
        };
        rows.push(vec![
            n.to_string(),
            a.k.to_string(),
            lp.map_or(String::new(), fmt_f),
            fmt_f(cert.objective),
            fmt_f(cert.max_violation),
            fmt_f(cert.objective / (n as f64).powf(growth)),
            brute.map_or(String::new(), |b| b.to_string()),
            ratio,
        ]);
    }
    let header = [
        "n",
        "k",
        "lp_objective",
        "certificate_objective",
        "certificate_violation",
        "certificate_over_growth",
        "brute_opt",
        "brute_over_lp",
    ];
    emit(a.out.as_deref(), &csv_text(&header, &rows)?)
}

fn summarize(path: &Path) -> Result<Vec<String>, CliError> {
    let text = read_file(path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != TRIAL_HEADER {
        return Err(invalid(format!("{}: not a trial log", path.display())));
    }
    let bad = |what: &str| invalid(format!("{}: bad {what} field", path.display()));
    let (mut count, mut sum_a, mut sum_f, mut sum_cost, mut forced) = (0u64, 0u64, 0u64, 0u64, 0u64);
    let (mut min_cost, mut max_cost) = (u64::MAX, 0u64);
    let mut objective = f64::NAN;
    for rec in rdr.records() {
        let rec = rec?;
        let a: u64 = rec[2].parse().map_err(|_| bad("a_size"))?;
        let f: u64 = rec[3].parse().map_err(|_| bad("f_size"))?;
        let cost: u64 = rec[4].parse().map_err(|_| bad("cost"))?;
        if !rec[5].is_empty() {
            objective = rec[5].parse().map_err(|_| bad("objective"))?;
        }
        if rec[6].parse::<bool>().map_err(|_| bad("forced_empty_fallback"))? {
            forced += 1;
        }
        count += 1;
        sum_a += a;
        sum_f += f;
        sum_cost += cost;
        min_cost = min_cost.min(cost);
        max_cost = max_cost.max(cost);
    }
    let mean = |s: u64| if count == 0 { f64::NAN } else { s as f64 / count as f64 };
    Ok(vec![
        path.display().to_string(),
        count.to_string(),
        fmt_f(mean(sum_a)),
        fmt_f(mean(sum_f)),
        fmt_f(mean(sum_cost)),
        if count == 0 { String::new() } else { min_cost.to_string() },
        if count == 0 { String::new() } else { max_cost.to_string() },
        fmt_f(objective),
        fmt_f(mean(sum_cost) / objective),
        forced.to_string(),
    ])
}

pub fn report(a: &ReportArgs) -> Result<(), CliError> {
    let rows = a.inputs.iter().map(|p| summarize(p)).collect::<Result<Vec<_>, _>>()?;
    let header = [
        "source",
        "trials",
        "mean_a_size",
        "mean_f_size",
        "mean_cost",
        "min_cost",
        "max_cost",
        "lp_or_sdp_objective",
        "mean_cost_over_objective",
        "forced_empty_fallbacks",
    ];
    emit(a.out.as_deref(), &csv_text(&header, &rows)?)
}

