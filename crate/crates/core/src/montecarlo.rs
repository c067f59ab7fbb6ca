//! Finite-sample counterpart of the limit analysis: draw random samples
//! from the population a state describes, estimate the conditional
//! probabilities, and average the resulting population regret across
//! replications.
//!
//! Determinism contract: the random stream of a replication depends only
//! on (base seed, a digest of the state's exact contents, replication
//! index). Results are therefore bit-identical at any thread count, and a
//! grid cell can be reproduced later by re-running its argmax state alone
//! with the same seed.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::predictors::{fit_linear_weighted, logit, Predictions};
use crate::problem::{Problem, State, ThresholdPolicy};
use crate::search::StateGrid;
use crate::Rat;

/// Default cap on total Bernoulli draws (`states × reps × N`).
pub const DEFAULT_MC_BUDGET: u128 = 100_000_000_000;

/// The sampling distribution P_s(y, x) implied by a problem and a state.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingLaw {
    problem: Problem,
    state: State,
    // f64 views used by the sampler.
    cum_weights: Vec<f64>,
    probs: Vec<f64>,
}

impl SamplingLaw {
    pub fn new(problem: Problem, state: State) -> Result<Self> {
        if state.len() != problem.len() {
            return Err(Error::ShapeMismatch {
                expected: problem.len(),
                got: state.len(),
            });
        }
        let mut cum_weights = Vec::with_capacity(problem.len());
        let mut acc = 0.0;
        for w in problem.weights() {
            acc += w.to_f64().unwrap();
            cum_weights.push(acc);
        }
        let probs = state.probs().iter().map(|p| p.to_f64().unwrap()).collect();
        Ok(SamplingLaw {
            problem,
            state,
            cum_weights,
            probs,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn state(&self) -> &State {
        &self.state
    }
}

/// One sampled observation; `x_index` indexes into the problem's
/// covariate list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Draw {
    pub x_index: usize,
    pub y: bool,
}

/// Stream-mixing step (splitmix64 finalizer).
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed and context words.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

/// FNV-1a digest of the state's exact rendering. Identical states hash
/// identically no matter which grid or index they came from.
pub fn state_digest(state: &State) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for byte in state.to_string().bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Draw `n` i.i.d. observations from the law: x by inverse CDF over the
/// finite support, then y ~ Bernoulli(p_sx).
pub fn draw_sample(law: &SamplingLaw, n: usize, seed: u64) -> Vec<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let x_index = law
            .cum_weights
            .iter()
            .position(|c| u < *c)
            .unwrap_or(law.cum_weights.len() - 1);
        let v: f64 = rng.gen();
        out.push(Draw {
            x_index,
            y: v < law.probs[x_index],
        });
    }
    out
}

/// Sample-based estimator of the conditional probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Sample mean of y, broadcast to every covariate.
    MarginalMean,
    /// Ordinary least squares of y on (1, x), exact.
    LinearLs,
    /// Nonlinear least squares of y on σ(a + b·x).
    LogitLs,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::MarginalMean => "marginal-mean",
            Estimator::LinearLs => "linear-ls",
            Estimator::LogitLs => "logit-ls",
        }
    }
}

/// Per-covariate sufficient statistics of a sample.
fn covariate_counts(problem: &Problem, sample: &[Draw]) -> (Vec<u64>, Vec<u64>) {
    let mut n = vec![0u64; problem.len()];
    let mut k = vec![0u64; problem.len()];
    for d in sample {
        n[d.x_index] += 1;
        if d.y {
            k[d.x_index] += 1;
        }
    }
    (n, k)
}

/// Estimate a prediction vector from a sample.
pub fn sample_estimate(
    sample: &[Draw],
    estimator: Estimator,
    problem: &Problem,
) -> Result<Predictions> {
    if sample.is_empty() {
        return Err(Error::Estimation("empty sample".into()));
    }
    match estimator {
        Estimator::MarginalMean => {
            let successes = sample.iter().filter(|d| d.y).count();
            let mean = Rat::new((successes as i64).into(), (sample.len() as i64).into());
            Ok(Predictions::Exact(vec![mean; problem.len()]))
        }
        Estimator::LinearLs => {
            let (n, k) = covariate_counts(problem, sample);
            let observed: Vec<usize> = (0..problem.len()).filter(|&i| n[i] > 0).collect();
            if observed.len() < 2 {
                return Err(Error::Estimation(
                    "fewer than two covariate values observed".into(),
                ));
            }
            // OLS of y on (1, x) equals weighted least squares of the
            // per-covariate means with the observed counts as weights.
            let xs: Vec<Rat> = observed
                .iter()
                .map(|&i| Rat::from_integer(problem.covariates()[i].into()))
                .collect();
            let ws: Vec<Rat> = observed
                .iter()
                .map(|&i| Rat::from_integer((n[i] as i64).into()))
                .collect();
            let ps: Vec<Rat> = observed
                .iter()
                .map(|&i| Rat::new((k[i] as i64).into(), (n[i] as i64).into()))
                .collect();
            let fit = fit_linear_weighted(&xs, &ws, &ps)?;
            let phi = problem
                .covariates()
                .iter()
                .map(|&x| &fit.a + &fit.b * Rat::from_integer(x.into()))
                .collect();
            Ok(Predictions::Exact(phi))
        }
        Estimator::LogitLs => {
            let (n, k) = covariate_counts(problem, sample);
            let observed: Vec<usize> = (0..problem.len()).filter(|&i| n[i] > 0).collect();
            if observed.len() < 2 {
                return Err(Error::Estimation(
                    "fewer than two covariate values observed".into(),
                ));
            }
            let xs: Vec<f64> = observed
                .iter()
                .map(|&i| problem.covariates()[i] as f64)
                .collect();
            let ws: Vec<f64> = observed.iter().map(|&i| n[i] as f64).collect();
            let ps: Vec<f64> = observed
                .iter()
                .map(|&i| k[i] as f64 / n[i] as f64)
                .collect();
            let fit = logit::fit(&xs, &ws, &ps)?;
            let phi = problem
                .covariates()
                .iter()
                .map(|&x| logit::logistic(fit.a + fit.b * x as f64))
                .collect();
            Ok(Predictions::Float(phi))
        }
    }
}

/// Error statistics for one covariate across replications, in the
/// factorized form `expected regret = magnitude × error frequency`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateErrorStats {
    /// Welfare loss when an error occurs: `|(1 - U_xB) - p_sx|`.
    pub magnitude: Rat,
    /// Fraction of successful replications with an error at this covariate.
    pub error_frequency: Rat,
    /// Average covariate-specific regret (before P(x) weighting); equals
    /// magnitude × frequency exactly.
    pub mean_regret: Rat,
}

/// A Monte Carlo estimate of expected population regret.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Replications requested.
    pub reps: u32,
    /// Replications that produced an estimate.
    pub effective_reps: u32,
    /// Replications skipped because estimation failed (degenerate design).
    pub skipped: u32,
    pub seed: u64,
    pub sample_size: usize,
    /// Exact mean over successful replications (regret values are rational).
    pub mean_exact: Rat,
    pub per_covariate: Vec<CovariateErrorStats>,
}

#[derive(Clone)]
struct RepAccumulator {
    sum: Rat,
    sum_sq: Rat,
    err_counts: Vec<u64>,
    contrib_sums: Vec<Rat>,
    effective: u32,
    skipped: u32,
    boundary_events: usize,
}

impl RepAccumulator {
    fn new(n: usize) -> Self {
        RepAccumulator {
            sum: Rat::zero(),
            sum_sq: Rat::zero(),
            err_counts: vec![0; n],
            contrib_sums: vec![Rat::zero(); n],
            effective: 0,
            skipped: 0,
            boundary_events: 0,
        }
    }

    fn merge(mut self, other: RepAccumulator) -> Self {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        for (a, b) in self.err_counts.iter_mut().zip(other.err_counts) {
            *a += b;
        }
        for (a, b) in self.contrib_sums.iter_mut().zip(other.contrib_sums) {
            *a += b;
        }
        self.effective += other.effective;
        self.skipped += other.skipped;
        self.boundary_events += other.boundary_events;
        self
    }
}

/// Expected population regret of plugging a sample estimate into the
/// thresholds, averaged over replicated samples of size `n`.
pub fn expected_regret_mc(
    problem: &Problem,
    state: &State,
    estimator: Estimator,
    policy: &ThresholdPolicy,
    n: usize,
    reps: u32,
    seed: u64,
) -> Result<McEstimate> {
    if reps < 2 {
        return Err(Error::Estimation("need at least two replications".into()));
    }
    if n == 0 {
        return Err(Error::Estimation("sample size must be positive".into()));
    }
    let law = SamplingLaw::new(problem.clone(), state.clone())?;
    if policy.len() != problem.len() {
        return Err(Error::ShapeMismatch {
            expected: problem.len(),
            got: policy.len(),
        });
    }
    let digest = state_digest(state);

    let acc = (0..reps)
        .into_par_iter()
        .fold(
            || RepAccumulator::new(problem.len()),
            |mut acc, rep| {
                let rep_seed = derive_seed(seed, &[digest, rep as u64]);
                let sample = draw_sample(&law, n, rep_seed);
                match sample_estimate(&sample, estimator, problem) {
                    Err(_) => acc.skipped += 1,
                    Ok(preds) => {
                        let rep_report = preds
                            .regret_report(problem, state, policy)
                            .expect("shapes validated above");
                        acc.sum += &rep_report.total;
                        acc.sum_sq += &rep_report.total * &rep_report.total;
                        for (i, err) in rep_report.errors.iter().enumerate() {
                            if *err {
                                acc.err_counts[i] += 1;
                            }
                            acc.contrib_sums[i] += &rep_report.by_covariate[i];
                        }
                        acc.boundary_events += rep_report.boundary_events;
                        acc.effective += 1;
                    }
                }
                acc
            },
        )
        .reduce(|| RepAccumulator::new(problem.len()), RepAccumulator::merge);

    if acc.effective < 2 {
        return Err(Error::Estimation(format!(
            "only {} of {reps} replications produced an estimate",
            acc.effective
        )));
    }

    let eff = Rat::from_integer((acc.effective as i64).into());
    let mean_exact = &acc.sum / &eff;
    // Sample variance of per-replication regret, then the SE of the mean.
    let var = (&acc.sum_sq - &acc.sum * &mean_exact) / (&eff - Rat::one());
    let std_error = (var.to_f64().unwrap().max(0.0) / acc.effective as f64).sqrt();

    let per_covariate = (0..problem.len())
        .map(|i| {
            let magnitude = (problem.cutoff_at(i) - state.prob(i)).abs();
            // Divide the population-weighted contribution back out to the
            // covariate-specific regret of the factorized form.
            let mean_regret = &acc.contrib_sums[i] / &eff / problem.weight(i);
            CovariateErrorStats {
                magnitude,
                error_frequency: Rat::new(
                    (acc.err_counts[i] as i64).into(),
                    (acc.effective as i64).into(),
                ),
                mean_regret,
            }
        })
        .collect();

    Ok(McEstimate {
        mean: mean_exact.to_f64().unwrap(),
        std_error,
        reps,
        effective_reps: acc.effective,
        skipped: acc.skipped,
        seed,
        sample_size: n,
        mean_exact,
        per_covariate,
    })
}

/// Maximum over a state grid of the Monte Carlo expected regret.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSampleMr {
    pub estimate: McEstimate,
    pub argmax_state: State,
    pub argmax_index: usize,
}

/// Finite-sample analogue of grid maximum regret: estimate expected regret
/// for every grid state and report the largest mean.
///
/// Refuses to run when `states × reps × n` exceeds `budget` draws.
pub fn finite_sample_mr(
    problem: &Problem,
    estimator: Estimator,
    policy: &ThresholdPolicy,
    grid: &StateGrid,
    n: usize,
    reps: u32,
    seed: u64,
    budget: u128,
) -> Result<FiniteSampleMr> {
    let cost = grid.state_count() as u128 * reps as u128 * n as u128;
    if cost > budget {
        return Err(Error::McBudget { cost, budget });
    }
    let estimates: Vec<McEstimate> = (0..grid.state_count())
        .into_par_iter()
        .map(|i| {
            let state = grid.state_at(i);
            expected_regret_mc(problem, &state, estimator, policy, n, reps, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    // Exact comparison of means; first index wins ties.
    let argmax_index = estimates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.mean_exact.cmp(&b.1.mean_exact).then(b.0.cmp(&a.0)))
        .expect("grid is nonempty")
        .0;
    Ok(FiniteSampleMr {
        estimate: estimates[argmax_index].clone(),
        argmax_state: grid.state_at(argmax_index),
        argmax_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::PredictorSpec;
    use crate::rat;
    use crate::search::max_regret;

    fn uniform4(welfare: Vec<Rat>) -> Problem {
        Problem::uniform(vec![0, 1, 2, 3], welfare).unwrap()
    }

    fn half_policy() -> ThresholdPolicy {
        ThresholdPolicy::invariant_value(rat(1, 2), 4).unwrap()
    }

    #[test]
    fn degenerate_states_fix_outcomes() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let ones = SamplingLaw::new(p.clone(), State::constant(rat(1, 1), 4).unwrap()).unwrap();
        assert!(draw_sample(&ones, 500, 1).iter().all(|d| d.y));
        let zeros = SamplingLaw::new(p, State::constant(rat(0, 1), 4).unwrap()).unwrap();
        assert!(draw_sample(&zeros, 500, 1).iter().all(|d| !d.y));
    }

    #[test]
    fn sample_mean_concentrates() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let law = SamplingLaw::new(p, State::constant(rat(3, 4), 4).unwrap()).unwrap();
        let n = 100_000;
        let sample = draw_sample(&law, n, 42);
        let mean = sample.iter().filter(|d| d.y).count() as f64 / n as f64;
        let se = (0.75 * 0.25 / n as f64).sqrt();
        assert!((mean - 0.75).abs() <= 5.0 * se, "mean {mean} too far");
    }

    #[test]
    fn draws_are_seed_deterministic() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let law = SamplingLaw::new(p, State::constant(rat(1, 2), 4).unwrap()).unwrap();
        assert_eq!(draw_sample(&law, 100, 7), draw_sample(&law, 100, 7));
        assert_ne!(draw_sample(&law, 100, 7), draw_sample(&law, 100, 8));
    }

    #[test]
    fn marginal_mean_estimate_is_exact_fraction() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let sample = vec![
            Draw { x_index: 0, y: true },
            Draw { x_index: 2, y: true },
            Draw { x_index: 3, y: false },
        ];
        let est = sample_estimate(&sample, Estimator::MarginalMean, &p).unwrap();
        assert_eq!(est, Predictions::Exact(vec![rat(2, 3); 4]));
    }

    #[test]
    fn linear_ls_two_point_interpolation() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let sample = vec![
            Draw { x_index: 0, y: false },
            Draw { x_index: 1, y: true },
        ];
        let est = sample_estimate(&sample, Estimator::LinearLs, &p).unwrap();
        assert_eq!(
            est,
            Predictions::Exact(vec![rat(0, 1), rat(1, 1), rat(2, 1), rat(3, 1)])
        );
    }

    #[test]
    fn linear_ls_degenerate_design_errors() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let sample = vec![
            Draw { x_index: 1, y: false },
            Draw { x_index: 1, y: true },
        ];
        assert!(sample_estimate(&sample, Estimator::LinearLs, &p).is_err());
        assert!(sample_estimate(&sample, Estimator::LogitLs, &p).is_err());
    }

    #[test]
    fn linear_ls_converges_to_limit_fit() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let state = State::new(vec![rat(1, 10), rat(2, 5), rat(3, 5), rat(9, 10)]).unwrap();
        let law = SamplingLaw::new(p.clone(), state.clone()).unwrap();
        let sample = draw_sample(&law, 100_000, 9);
        let est = sample_estimate(&sample, Estimator::LinearLs, &p).unwrap();
        let limit = PredictorSpec::LinearWls.predict(&p, &state).unwrap();
        for i in 0..4 {
            assert!(
                (est.approx(i) - limit.approx(i)).abs() < 0.05,
                "covariate {i}: {} vs {}",
                est.approx(i),
                limit.approx(i)
            );
        }
    }

    #[test]
    fn all_ones_state_has_zero_regret_and_variance() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let state = State::constant(rat(1, 1), 4).unwrap();
        let est = expected_regret_mc(
            &p,
            &state,
            Estimator::MarginalMean,
            &half_policy(),
            50,
            100,
            3,
        )
        .unwrap();
        assert_eq!(est.mean_exact, rat(0, 1));
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.skipped, 0);
    }

    #[test]
    fn binomial_oracle_case() {
        // x-invariant p = 3/4, U = 1/2, t = 1/2, marginal-mean estimator,
        // N = 20: regret is 1/4 exactly when the sample mean is ≤ 1/2,
        // i.e. with probability P(Binomial(20, 3/4) ≤ 10).
        let p = uniform4(vec![rat(1, 2); 4]);
        let state = State::constant(rat(3, 4), 4).unwrap();
        let est = expected_regret_mc(
            &p,
            &state,
            Estimator::MarginalMean,
            &half_policy(),
            20,
            2000,
            7,
        )
        .unwrap();

        // Exact binomial CDF oracle: P(Bin(20, 3/4) ≤ 10) built term by
        // term from term_k = term_{k-1} · 3 · (21-k)/k, term_0 = (1/4)^20.
        let mut term = Rat::one();
        for _ in 0..20 {
            term = term * rat(1, 4);
        }
        let mut cdf = term.clone();
        for k in 1..=10i64 {
            term = term * rat(3, 1) * rat(21 - k, 1) / rat(k, 1);
            cdf += &term;
        }
        let expected = rat(1, 4) * cdf;
        let gap = (est.mean - expected.to_f64().unwrap()).abs();
        assert!(
            gap <= 3.0 * est.std_error,
            "gap {gap} exceeds 3 SE = {}",
            3.0 * est.std_error
        );
    }

    #[test]
    fn factorization_is_exact() {
        let p = uniform4(vec![rat(1, 4); 4]);
        let state = State::new(vec![rat(0, 1), rat(1, 4), rat(3, 4), rat(1, 1)]).unwrap();
        let est = expected_regret_mc(
            &p,
            &state,
            Estimator::MarginalMean,
            &half_policy(),
            15,
            300,
            11,
        )
        .unwrap();
        let mut total = Rat::zero();
        for (i, stats) in est.per_covariate.iter().enumerate() {
            assert_eq!(
                stats.mean_regret,
                &stats.magnitude * &stats.error_frequency
            );
            total += p.weight(i) * &stats.mean_regret;
        }
        assert_eq!(total, est.mean_exact);
    }

    #[test]
    fn consistency_off_threshold() {
        // Every probability at least 0.1 away from the cutoff, and the
        // estimator's limit far from the threshold: regret dies out.
        let p = uniform4(vec![rat(1, 2); 4]);
        let state = State::new(vec![rat(0, 1), rat(0, 1), rat(1, 4), rat(1, 4)]).unwrap();
        let est = expected_regret_mc(
            &p,
            &state,
            Estimator::MarginalMean,
            &half_policy(),
            10_000,
            200,
            5,
        )
        .unwrap();
        assert!(est.mean <= 0.01, "mean {} too large", est.mean);
    }

    #[test]
    fn larger_samples_do_not_do_worse() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let state = State::constant(rat(3, 5), 4).unwrap();
        let coarse = expected_regret_mc(
            &p,
            &state,
            Estimator::MarginalMean,
            &half_policy(),
            100,
            500,
            13,
        )
        .unwrap();
        let fine = expected_regret_mc(
            &p,
            &state,
            Estimator::MarginalMean,
            &half_policy(),
            10_000,
            500,
            13,
        )
        .unwrap();
        let pooled = (coarse.std_error.powi(2) + fine.std_error.powi(2)).sqrt();
        assert!(fine.mean <= coarse.mean + 3.0 * pooled);
    }

    #[test]
    fn budget_refusal_reports_cost() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let grid = StateGrid::shared(vec![rat(0, 1), rat(1, 1)], 4).unwrap();
        let err = finite_sample_mr(
            &p,
            Estimator::MarginalMean,
            &half_policy(),
            &grid,
            1000,
            100,
            1,
            10_000,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::McBudget {
                cost: 1_600_000,
                budget: 10_000
            }
        ));
    }

    #[test]
    fn singleton_zero_regret_grid() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let state = State::constant(rat(1, 1), 4).unwrap();
        let grid = StateGrid::singleton(&state).unwrap();
        let result = finite_sample_mr(
            &p,
            Estimator::MarginalMean,
            &half_policy(),
            &grid,
            50,
            50,
            1,
            DEFAULT_MC_BUDGET,
        )
        .unwrap();
        assert_eq!(result.estimate.mean_exact, rat(0, 1));
        assert_eq!(result.argmax_index, 0);
    }

    #[test]
    fn single_draw_estimates_are_extreme_and_dominate_limit() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let state = State::new(vec![rat(0, 1), rat(1, 4), rat(3, 4), rat(1, 1)]).unwrap();
        let law = SamplingLaw::new(p.clone(), state).unwrap();
        for seed in 0..20 {
            let sample = draw_sample(&law, 1, seed);
            let est = sample_estimate(&sample, Estimator::MarginalMean, &p).unwrap();
            let v = est.approx(0);
            assert!(v == 0.0 || v == 1.0);
        }

        // With N = 1 the finite-sample maximum cannot fall below the limit.
        let grid = StateGrid::shared(
            vec![rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)],
            4,
        )
        .unwrap();
        let limit = max_regret(&p, &PredictorSpec::MarginalMean, &half_policy(), &grid)
            .unwrap()
            .mr
            .to_f64()
            .unwrap();
        let finite = finite_sample_mr(
            &p,
            Estimator::MarginalMean,
            &half_policy(),
            &grid,
            1,
            400,
            21,
            DEFAULT_MC_BUDGET,
        )
        .unwrap();
        assert!(finite.estimate.mean + 3.0 * finite.estimate.std_error >= limit);
    }

    #[test]
    fn rerunning_argmax_state_reproduces_the_estimate() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let grid = StateGrid::shared(vec![rat(0, 1), rat(1, 2), rat(1, 1)], 4).unwrap();
        let full = finite_sample_mr(
            &p,
            Estimator::MarginalMean,
            &half_policy(),
            &grid,
            30,
            100,
            17,
            DEFAULT_MC_BUDGET,
        )
        .unwrap();
        let single = expected_regret_mc(
            &p,
            &full.argmax_state,
            Estimator::MarginalMean,
            &half_policy(),
            30,
            100,
            17,
        )
        .unwrap();
        assert_eq!(single, full.estimate);
    }
}
