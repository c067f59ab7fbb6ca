//! Limit predictors: deterministic functions of the state of nature that
//! an estimator converges to as the sample grows.
//!
//! The correct, shifted, marginal-mean, linear least-squares, and linear
//! interpolating predictors are exact rational functions of the state.
//! Logistic predictors involve the logistic link and are computed in
//! `f64`; their predictions enter the regret engine through the float
//! decision path.

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::problem::{Problem, State, StateRegret, ThresholdPolicy};
use crate::Rat;

/// Which limit predictor to apply.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictorSpec {
    /// φ_sx = p_sx.
    Correct,
    /// φ_sx = p_sx - [(1 - U_xB) - t]: a correct predictor recentred so an
    /// x-invariant threshold `t` acts like the optimal x-specific one.
    Shifted { target: Rat },
    /// φ_sx = p_s, the marginal event probability, for every x.
    MarginalMean,
    /// Weighted linear least squares a + b·x in the sampling limit.
    LinearWls,
    /// Weighted logistic least squares σ(a + b·x) in the sampling limit.
    LogitNls,
    /// K-parameter model fitted to reproduce the first K conditional
    /// probabilities exactly.
    Interpolating { model: InterpModel, k: usize },
}

/// Functional form of the interpolating predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpModel {
    Linear,
    Logit,
}

impl InterpModel {
    /// Number of parameters of the model (both shipped models are two-parameter).
    pub fn param_count(&self) -> usize {
        2
    }
}

impl PredictorSpec {
    /// Short stable name used in tables and config files.
    pub fn name(&self) -> String {
        match self {
            PredictorSpec::Correct => "correct".into(),
            PredictorSpec::Shifted { target } => format!("shifted({target})"),
            PredictorSpec::MarginalMean => "marginal-mean".into(),
            PredictorSpec::LinearWls => "linear-wls".into(),
            PredictorSpec::LogitNls => "logit-nls".into(),
            PredictorSpec::Interpolating { model, k } => match model {
                InterpModel::Linear => format!("interp-linear(k={k})"),
                InterpModel::Logit => format!("interp-logit(k={k})"),
            },
        }
    }

    /// Whether predictions depend on the welfare vector (and not only on
    /// weights, covariates, and the state).
    pub fn welfare_dependent(&self) -> bool {
        matches!(self, PredictorSpec::Shifted { .. })
    }

    pub fn validate(&self, problem: &Problem) -> Result<()> {
        match self {
            PredictorSpec::Shifted { target } => {
                if target.is_negative() || *target > Rat::one() {
                    return Err(Error::InvalidSpec(format!(
                        "shifted target {target} outside [0, 1]"
                    )));
                }
            }
            PredictorSpec::Interpolating { model, k } => {
                if *k < 1 || *k > problem.len() {
                    return Err(Error::InvalidSpec(format!(
                        "K = {k} outside 1..={}",
                        problem.len()
                    )));
                }
                if *k != model.param_count() {
                    return Err(Error::ArityMismatch {
                        params: model.param_count(),
                        k: *k,
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Limit prediction vector for `state`.
    pub fn predict(&self, problem: &Problem, state: &State) -> Result<Predictions> {
        self.validate(problem)?;
        if state.len() != problem.len() {
            return Err(Error::ShapeMismatch {
                expected: problem.len(),
                got: state.len(),
            });
        }
        match self {
            PredictorSpec::Correct => Ok(Predictions::Exact(state.probs().to_vec())),
            PredictorSpec::Shifted { target } => {
                let phi = (0..problem.len())
                    .map(|i| state.prob(i) - (problem.cutoff_at(i) - target))
                    .collect();
                Ok(Predictions::Exact(phi))
            }
            PredictorSpec::MarginalMean => {
                let p_s = crate::problem::marginal_mean(problem, state)?;
                Ok(Predictions::Exact(vec![p_s; problem.len()]))
            }
            PredictorSpec::LinearWls => {
                let fit = fit_linear_wls(problem, state)?;
                let phi = problem
                    .covariates()
                    .iter()
                    .map(|&x| &fit.a + &fit.b * Rat::from_integer(x.into()))
                    .collect();
                Ok(Predictions::Exact(phi))
            }
            PredictorSpec::LogitNls => {
                let fit = fit_logit_nls(problem, state)?;
                let phi = problem
                    .covariates()
                    .iter()
                    .map(|&x| logit::logistic(fit.a + fit.b * x as f64))
                    .collect();
                Ok(Predictions::Float(phi))
            }
            PredictorSpec::Interpolating { model, k } => match model {
                InterpModel::Linear => {
                    let fit = fit_interpolating_linear(problem, state, *k)?;
                    let phi = problem
                        .covariates()
                        .iter()
                        .map(|&x| &fit.a + &fit.b * Rat::from_integer(x.into()))
                        .collect();
                    Ok(Predictions::Exact(phi))
                }
                InterpModel::Logit => {
                    let fit = fit_interpolating_logit(problem, state, *k)?;
                    // The interpolation equations hold by construction, so
                    // return the clamped state entries at the head exactly
                    // instead of round-tripping them through the link.
                    let phi = (0..problem.len())
                        .map(|i| {
                            if i < *k {
                                logit::clamp_prob(state.prob(i).to_f64().unwrap())
                            } else {
                                let x = problem.covariates()[i] as f64;
                                logit::logistic(fit.a + fit.b * x)
                            }
                        })
                        .collect();
                    Ok(Predictions::Float(phi))
                }
            },
        }
    }
}

/// A limit prediction vector, exact or floating-point depending on path.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Exact(Vec<Rat>),
    Float(Vec<f64>),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Exact(v) => v.len(),
            Predictions::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Prediction at position `i` as a float (for display/diagnostics).
    pub fn approx(&self, i: usize) -> f64 {
        match self {
            Predictions::Exact(v) => v[i].to_f64().unwrap_or(f64::NAN),
            Predictions::Float(v) => v[i],
        }
    }

    /// Regret of thresholding these predictions in the given state.
    pub fn regret(
        &self,
        problem: &Problem,
        state: &State,
        policy: &ThresholdPolicy,
    ) -> Result<Rat> {
        Ok(self.regret_report(problem, state, policy)?.total)
    }

    /// As [`Predictions::regret`], with breakdown and boundary diagnostics.
    pub fn regret_report(
        &self,
        problem: &Problem,
        state: &State,
        policy: &ThresholdPolicy,
    ) -> Result<StateRegret> {
        match self {
            Predictions::Exact(v) => crate::problem::state_regret_report(problem, state, v, policy),
            Predictions::Float(v) => crate::problem::state_regret_report(problem, state, v, policy),
        }
    }
}

/// Fitted parameters of a two-parameter predictor model.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedParams<S> {
    pub a: S,
    pub b: S,
    /// Weighted mean squared prediction error at (a, b).
    pub mse: S,
    pub converged: bool,
    /// True when a solver box face is active at the solution.
    pub at_bound: bool,
}

/// Closed-form weighted least squares of `ps` on `(1, xs)`, exact.
///
/// Weights must be positive; they need not sum to one.
pub fn fit_linear_weighted(xs: &[Rat], ws: &[Rat], ps: &[Rat]) -> Result<FittedParams<Rat>> {
    assert!(xs.len() == ws.len() && ws.len() == ps.len());
    let total: Rat = ws.iter().sum();
    if !total.is_positive() {
        return Err(Error::DegenerateDesign("weights sum to zero".into()));
    }
    let mean_x: Rat = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<Rat>() / &total;
    let mean_p: Rat = ps.iter().zip(ws).map(|(p, w)| p * w).sum::<Rat>() / &total;
    let var_x: Rat = xs
        .iter()
        .zip(ws)
        .map(|(x, w)| {
            let d = x - &mean_x;
            w * &d * &d
        })
        .sum();
    if var_x.is_zero() {
        return Err(Error::DegenerateDesign(
            "covariate has zero variance under the weights".into(),
        ));
    }
    let cov_xp: Rat = xs
        .iter()
        .zip(ws)
        .zip(ps)
        .map(|((x, w), p)| w * (x - &mean_x) * (p - &mean_p))
        .sum();
    let b = cov_xp / &var_x;
    let a = &mean_p - &b * &mean_x;
    let mse: Rat = xs
        .iter()
        .zip(ws)
        .zip(ps)
        .map(|((x, w), p)| {
            let r = p - (&a + &b * x);
            w * &r * &r
        })
        .sum::<Rat>()
        / &total;
    Ok(FittedParams {
        a,
        b,
        mse,
        converged: true,
        at_bound: false,
    })
}

/// Limit of least-squares linear prediction: weighted least squares of the
/// state on the covariate labels, in exact arithmetic.
pub fn fit_linear_wls(problem: &Problem, state: &State) -> Result<FittedParams<Rat>> {
    if state.len() != problem.len() {
        return Err(Error::ShapeMismatch {
            expected: problem.len(),
            got: state.len(),
        });
    }
    let xs: Vec<Rat> = problem
        .covariates()
        .iter()
        .map(|&x| Rat::from_integer(x.into()))
        .collect();
    fit_linear_weighted(&xs, problem.weights(), state.probs())
}

/// Limit of least-squares logistic prediction: weighted nonlinear least
/// squares of the state on σ(a + b·x), solved by multistart
/// Levenberg–Marquardt inside the box |a|, |b| ≤ 50.
pub fn fit_logit_nls(problem: &Problem, state: &State) -> Result<FittedParams<f64>> {
    if state.len() != problem.len() {
        return Err(Error::ShapeMismatch {
            expected: problem.len(),
            got: state.len(),
        });
    }
    if problem.len() < 2 {
        return Err(Error::DegenerateDesign(
            "logit fit needs at least two covariate labels".into(),
        ));
    }
    let xs: Vec<f64> = problem.covariates().iter().map(|&x| x as f64).collect();
    let ws: Vec<f64> = problem
        .weights()
        .iter()
        .map(|w| w.to_f64().unwrap())
        .collect();
    let ps: Vec<f64> = state.probs().iter().map(|p| p.to_f64().unwrap()).collect();
    logit::fit(&xs, &ws, &ps)
}

/// Two-point linear interpolation through the first `k` covariates, exact.
pub fn fit_interpolating_linear(
    problem: &Problem,
    state: &State,
    k: usize,
) -> Result<FittedParams<Rat>> {
    check_interp(problem, state, k)?;
    let x0 = Rat::from_integer(problem.covariates()[0].into());
    let x1 = Rat::from_integer(problem.covariates()[1].into());
    let p0 = state.prob(0);
    let p1 = state.prob(1);
    let b = (p1 - p0) / (&x1 - &x0);
    let a = p0 - &b * &x0;
    let mse: Rat = problem
        .covariates()
        .iter()
        .zip(problem.weights())
        .zip(state.probs())
        .map(|((&x, w), p)| {
            let r = p - (&a + &b * Rat::from_integer(x.into()));
            w * &r * &r
        })
        .sum();
    Ok(FittedParams {
        a,
        b,
        mse,
        converged: true,
        at_bound: false,
    })
}

/// Two-point logistic interpolation through the first `k` covariates.
///
/// The link is undefined at 0 and 1, so state entries are clamped to
/// `[ε, 1-ε]` with ε = 1e-6 before inversion.
pub fn fit_interpolating_logit(
    problem: &Problem,
    state: &State,
    k: usize,
) -> Result<FittedParams<f64>> {
    check_interp(problem, state, k)?;
    let x0 = problem.covariates()[0] as f64;
    let x1 = problem.covariates()[1] as f64;
    let p0 = logit::clamp_prob(state.prob(0).to_f64().unwrap());
    let p1 = logit::clamp_prob(state.prob(1).to_f64().unwrap());
    let z0 = logit::logit(p0);
    let z1 = logit::logit(p1);
    let b = (z1 - z0) / (x1 - x0);
    let a = z0 - b * x0;
    let mse: f64 = problem
        .covariates()
        .iter()
        .zip(problem.weights())
        .zip(state.probs())
        .enumerate()
        .map(|(i, ((&x, w), p))| {
            let phi = if i < k {
                logit::clamp_prob(p.to_f64().unwrap())
            } else {
                logit::logistic(a + b * x as f64)
            };
            let r = p.to_f64().unwrap() - phi;
            w.to_f64().unwrap() * r * r
        })
        .sum();
    Ok(FittedParams {
        a,
        b,
        mse,
        converged: true,
        at_bound: false,
    })
}

fn check_interp(problem: &Problem, state: &State, k: usize) -> Result<()> {
    if state.len() != problem.len() {
        return Err(Error::ShapeMismatch {
            expected: problem.len(),
            got: state.len(),
        });
    }
    if k < 1 || k > problem.len() {
        return Err(Error::InvalidSpec(format!(
            "K = {k} outside 1..={}",
            problem.len()
        )));
    }
    if k != 2 {
        return Err(Error::ArityMismatch { params: 2, k });
    }
    Ok(())
}

/// Small weighted logistic least-squares solver.
pub mod logit {
    use super::FittedParams;
    use crate::error::{Error, Result};

    /// Box bound on |a| and |b|.
    pub const PARAM_BOUND: f64 = 50.0;
    /// Multistart grid values for each of a and b.
    pub const MULTISTART: [f64; 7] = [-4.0, -2.0, -0.5, 0.0, 0.5, 2.0, 4.0];
    /// Initial Levenberg–Marquardt damping.
    pub const LAMBDA_INIT: f64 = 1e-3;
    /// Stopping tolerance on the step norm.
    ///
    /// There is deliberately no gradient-norm stop: on states the sigmoid
    /// can interpolate, the gradient decays like the squared residuals and
    /// would halt the solver far inside the parameter box, leaving the
    /// box face inactive and the fit short of the constrained optimum.
    pub const TOLERANCE: f64 = 1e-12;
    /// Iteration cap per start. Large-residual states make Gauss-Newton
    /// linearly (not quadratically) convergent, so the crawl to a
    /// machine-precision plateau can take a few hundred iterations.
    pub const MAX_ITERATIONS: usize = 500;
    /// A run is numerically stationary once this many candidate steps in a
    /// row fail to produce any representable improvement while the damping
    /// rises through 30 orders of magnitude. A healthy damping search
    /// alternates acceptances in between and never trips this.
    pub const STAGNATION_REJECTIONS: usize = 30;
    /// Probability clamp for the logit link.
    pub const PROB_CLAMP: f64 = 1e-6;

    /// Numerically stable standard logistic function.
    pub fn logistic(z: f64) -> f64 {
        if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        }
    }

    /// Inverse logistic (log-odds); caller must keep `p` inside (0, 1).
    pub fn logit(p: f64) -> f64 {
        (p / (1.0 - p)).ln()
    }

    /// Clamp a probability into `[PROB_CLAMP, 1 - PROB_CLAMP]`.
    pub fn clamp_prob(p: f64) -> f64 {
        p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
    }

    /// Weighted squared-error objective for σ(a + b·x) predictions.
    ///
    /// Weights are normalized internally, so the value is a weighted mean
    /// squared error comparable across weightings.
    #[derive(Debug, Clone)]
    pub struct Objective {
        xs: Vec<f64>,
        ws: Vec<f64>,
        ps: Vec<f64>,
    }

    impl Objective {
        pub fn new(xs: &[f64], ws: &[f64], ps: &[f64]) -> Result<Self> {
            assert!(xs.len() == ws.len() && ws.len() == ps.len());
            let total: f64 = ws.iter().sum();
            if !(total > 0.0) {
                return Err(Error::DegenerateDesign("weights sum to zero".into()));
            }
            Ok(Objective {
                xs: xs.to_vec(),
                ws: ws.iter().map(|w| w / total).collect(),
                ps: ps.to_vec(),
            })
        }

        /// Objective value Σ w (p - σ(a + b·x))².
        pub fn value(&self, a: f64, b: f64) -> f64 {
            self.xs
                .iter()
                .zip(&self.ws)
                .zip(&self.ps)
                .map(|((&x, &w), &p)| {
                    let r = p - logistic(a + b * x);
                    w * r * r
                })
                .sum()
        }

        /// Analytic gradient of the objective.
        pub fn gradient(&self, a: f64, b: f64) -> [f64; 2] {
            let mut g = [0.0, 0.0];
            for ((&x, &w), &p) in self.xs.iter().zip(&self.ws).zip(&self.ps) {
                let s = logistic(a + b * x);
                let r = p - s;
                let d = s * (1.0 - s);
                g[0] -= 2.0 * w * r * d;
                g[1] -= 2.0 * w * r * d * x;
            }
            g
        }

        /// Gauss–Newton approximation to the Hessian, `[h_aa, h_ab, h_bb]`,
        /// plus its determinant computed by Cauchy–Binet.
        ///
        /// The matrix is a sum of rank-one terms `c_i [1, x_i][1, x_i]ᵀ`,
        /// so `det = Σ_{i<j} c_i c_j (x_j - x_i)²` — a sum of nonnegative
        /// terms. Forming `h_aa·h_bb - h_ab²` directly instead loses the
        /// tiny determinant to cancellation whenever one covariate row
        /// dominates, which is exactly the near-interpolated regime where
        /// the solver must still move along the small-eigenvalue direction.
        fn gn_hessian(&self, a: f64, b: f64) -> ([f64; 3], f64) {
            let mut h = [0.0; 3];
            let mut coeffs = Vec::with_capacity(self.xs.len());
            for (&x, &w) in self.xs.iter().zip(&self.ws) {
                let s = logistic(a + b * x);
                let d = s * (1.0 - s);
                let base = 2.0 * w * d * d;
                h[0] += base;
                h[1] += base * x;
                h[2] += base * x * x;
                coeffs.push(base);
            }
            let mut det = 0.0;
            for i in 0..self.xs.len() {
                for j in (i + 1)..self.xs.len() {
                    let dx = self.xs[j] - self.xs[i];
                    det += coeffs[i] * coeffs[j] * dx * dx;
                }
            }
            (h, det)
        }
    }

    struct Run {
        a: f64,
        b: f64,
        value: f64,
        converged: bool,
    }

    fn clamp_param(v: f64) -> f64 {
        v.clamp(-PARAM_BOUND, PARAM_BOUND)
    }

    fn lm_from(obj: &Objective, start: (f64, f64)) -> Run {
        let (mut a, mut b) = (clamp_param(start.0), clamp_param(start.1));
        let mut value = obj.value(a, b);
        let mut lambda = LAMBDA_INIT;
        let mut converged = false;

        let mut rejections = 0usize;
        for _ in 0..MAX_ITERATIONS {
            let g = obj.gradient(a, b);
            let (h, det_h) = obj.gn_hessian(a, b);
            let a00 = h[0] + lambda;
            let a01 = h[1];
            let a11 = h[2] + lambda;
            // det(H + λI) assembled from nonnegative pieces.
            let det = det_h + lambda * (h[0] + h[2]) + lambda * lambda;
            if !det.is_finite() || det <= 0.0 {
                // Numerically unusable system; damp harder and retry.
                lambda = (lambda * 10.0).max(1e-300);
                continue;
            }
            let da = (-g[0] * a11 + g[1] * a01) / det;
            let db = (-g[1] * a00 + g[0] * a01) / det;
            let cand_a = clamp_param(a + da);
            let cand_b = clamp_param(b + db);
            let step_a = cand_a - a;
            let step_b = cand_b - b;
            if (step_a * step_a + step_b * step_b).sqrt() < TOLERANCE {
                // Pinned at the box or the proposed move is negligible.
                converged = true;
                break;
            }
            let cand_value = obj.value(cand_a, cand_b);
            if cand_value < value {
                a = cand_a;
                b = cand_b;
                value = cand_value;
                // No fixed or curvature-relative floor: mixed-scale states
                // need the damping to fall to ~1e-21 before the near-null
                // direction of the rank-deficient Gauss-Newton matrix can
                // move, and the stagnation counter bounds the cost of the
                // deep decay.
                lambda = (lambda / 10.0).max(1e-300);
                rejections = 0;
            } else {
                lambda *= 10.0;
                rejections += 1;
                if rejections >= STAGNATION_REJECTIONS {
                    converged = true;
                    break;
                }
            }
        }

        Run {
            a,
            b,
            value,
            converged,
        }
    }

    /// Minimize the weighted logistic squared error over the multistart
    /// grid; returns the best run found.
    pub fn fit(xs: &[f64], ws: &[f64], ps: &[f64]) -> Result<FittedParams<f64>> {
        let obj = Objective::new(xs, ws, ps)?;
        let mut best: Option<Run> = None;
        let mut any_converged = false;
        for &a0 in &MULTISTART {
            for &b0 in &MULTISTART {
                let run = lm_from(&obj, (a0, b0));
                any_converged |= run.converged;
                let better = match &best {
                    None => true,
                    Some(prev) => run.value < prev.value,
                };
                if better {
                    best = Some(run);
                }
            }
        }
        let best = best.expect("multistart grid is nonempty");
        if !any_converged {
            return Err(Error::NonConvergence {
                a: best.a,
                b: best.b,
                mse: best.value,
                details: format!(
                    "no start met tolerance {TOLERANCE} within {MAX_ITERATIONS} iterations"
                ),
            });
        }
        let at_bound = best.a.abs() == PARAM_BOUND || best.b.abs() == PARAM_BOUND;
        Ok(FittedParams {
            a: best.a,
            b: best.b,
            mse: best.value,
            converged: best.converged,
            at_bound,
        })
    }
}
