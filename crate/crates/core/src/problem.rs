//! The decision problem: welfare model, decision rule, error indicator,
//! and per-state population regret.
//!
//! The welfare model is normalized so that surveillance (A) has welfare 1
//! when the event does not occur and 0 when it does, and the aggressive
//! treatment (B) has an outcome-invariant welfare `U_xB` strictly inside
//! (0, 1). Under that normalization B is optimal for group `x` exactly
//! when `p_x > 1 - U_xB`, with A chosen on ties.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Scalar};
use crate::Rat;

/// The two care options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Treatment {
    /// Surveillance / non-invasive option.
    A,
    /// Aggressive / invasive option.
    B,
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Treatment::A => write!(f, "A"),
            Treatment::B => write!(f, "B"),
        }
    }
}

/// Expected welfare per (treatment, outcome) cell, before normalization.
///
/// Generic over the scalar type: exact rationals give exact thresholds,
/// floats are fine for quick calculations.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralWelfare<S: Scalar> {
    pub u_a0: S,
    pub u_a1: S,
    pub u_b0: S,
    pub u_b1: S,
}

impl<S: Scalar> GeneralWelfare<S> {
    pub fn new(u_a0: S, u_a1: S, u_b0: S, u_b1: S) -> Result<Self> {
        let w = GeneralWelfare {
            u_a0,
            u_a1,
            u_b0,
            u_b1,
        };
        w.check()?;
        Ok(w)
    }

    fn check(&self) -> Result<()> {
        if !(self.u_b1 > self.u_a1) {
            return Err(Error::WelfareInequality(
                "U(B,1) > U(A,1) must hold (aggressive treatment is better under illness)",
            ));
        }
        if !(self.u_a0 > self.u_b0) {
            return Err(Error::WelfareInequality(
                "U(A,0) > U(B,0) must hold (surveillance is better without illness)",
            ));
        }
        Ok(())
    }

    /// Probability threshold at which A and B have equal expected welfare.
    ///
    /// Returns `[U(A,0) - U(B,0)] / ([U(A,0) - U(B,0)] + [U(B,1) - U(A,1)])`,
    /// strictly inside (0, 1).
    pub fn optimal_threshold(&self) -> Result<S> {
        self.check()?;
        let gain_a = self.u_a0.clone() - self.u_b0.clone();
        let gain_b = self.u_b1.clone() - self.u_a1.clone();
        Ok(gain_a.clone() / (gain_a + gain_b))
    }

    /// Normalized welfare of the aggressive treatment, `U_xB`.
    ///
    /// Requires the neutralization condition `U(B,0) = U(B,1)` (exact
    /// equality); rescales so that `U(A,0) = 1` and `U(A,1) = 0`.
    pub fn neutralized(&self) -> Result<S> {
        self.check()?;
        if self.u_b0 != self.u_b1 {
            return Err(Error::WelfareInequality(
                "neutralization requires U(B,0) = U(B,1)",
            ));
        }
        let scale = self.u_a0.clone() - self.u_a1.clone();
        Ok((self.u_b0.clone() - self.u_a1.clone()) / scale)
    }
}

/// Threshold value at which A and B have equal expected welfare.
pub fn optimal_threshold_general<S: Scalar>(w: &GeneralWelfare<S>) -> Result<S> {
    w.optimal_threshold()
}

/// A decision problem over a finite covariate space.
///
/// Covariate labels are numeric because the parametric predictors use the
/// label itself as the regressor. Weights and welfare values are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    covariates: Vec<i64>,
    weights: Vec<Rat>,
    welfare: Vec<Rat>,
    // 1 - U_xB, cached because every regret evaluation reads it.
    cutoffs: Vec<Rat>,
}

impl Problem {
    pub fn new(covariates: Vec<i64>, weights: Vec<Rat>, welfare: Vec<Rat>) -> Result<Self> {
        if covariates.is_empty() {
            return Err(Error::InvalidProblem("no covariates".into()));
        }
        if weights.len() != covariates.len() || welfare.len() != covariates.len() {
            return Err(Error::InvalidProblem(format!(
                "covariates/weights/welfare lengths differ: {}/{}/{}",
                covariates.len(),
                weights.len(),
                welfare.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &x in &covariates {
            if !seen.insert(x) {
                return Err(Error::InvalidProblem(format!(
                    "duplicate covariate label {x}"
                )));
            }
        }
        for w in &weights {
            if !w.is_positive() {
                return Err(Error::InvalidProblem(format!(
                    "weight {w} is not strictly positive"
                )));
            }
        }
        let total: Rat = weights.iter().sum();
        if total != Rat::one() {
            return Err(Error::InvalidProblem(format!(
                "weights sum to {total}, expected exactly 1"
            )));
        }
        for u in &welfare {
            if !(u.is_positive() && *u < Rat::one()) {
                return Err(Error::InvalidProblem(format!(
                    "welfare {u} is not strictly inside (0, 1)"
                )));
            }
        }
        let cutoffs = welfare.iter().map(|u| Rat::one() - u).collect();
        Ok(Problem {
            covariates,
            weights,
            welfare,
            cutoffs,
        })
    }

    /// Uniform covariate distribution over the given labels.
    pub fn uniform(covariates: Vec<i64>, welfare: Vec<Rat>) -> Result<Self> {
        let n = covariates.len() as i64;
        if n == 0 {
            return Err(Error::InvalidProblem("no covariates".into()));
        }
        let w = Rat::new(1.into(), n.into());
        Problem::new(covariates, vec![w; n as usize], welfare)
    }

    pub fn len(&self) -> usize {
        self.covariates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariates.is_empty()
    }

    pub fn covariates(&self) -> &[i64] {
        &self.covariates
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn welfare(&self) -> &[Rat] {
        &self.welfare
    }

    pub fn weight(&self, i: usize) -> &Rat {
        &self.weights[i]
    }

    pub fn welfare_at(&self, i: usize) -> &Rat {
        &self.welfare[i]
    }

    /// Position of a covariate label.
    pub fn index_of(&self, label: i64) -> Result<usize> {
        self.covariates
            .iter()
            .position(|&x| x == label)
            .ok_or(Error::UnknownCovariate(label))
    }

    /// Optimal decision cutoff `1 - U_xB` for the covariate at position `i`.
    pub fn cutoff_at(&self, i: usize) -> &Rat {
        &self.cutoffs[i]
    }

    /// Optimal decision cutoff `1 - U_xB`, looked up by covariate label.
    pub fn optimal_threshold(&self, label: i64) -> Result<Rat> {
        Ok(self.cutoffs[self.index_of(label)?].clone())
    }

    /// Policy that applies every group's optimal cutoff.
    pub fn optimal_policy(&self) -> ThresholdPolicy {
        ThresholdPolicy::per_covariate(
            self.cutoffs
                .iter()
                .map(|t| ThresholdEntry::Value(t.clone()))
                .collect(),
        )
    }

    /// Largest regret any rule can incur: `Σ_x P(x) max(U_xB, 1 - U_xB)`.
    pub fn regret_upper_bound(&self) -> Rat {
        self.weights
            .iter()
            .zip(&self.welfare)
            .map(|(w, u)| {
                let cu = Rat::one() - u;
                w * std::cmp::max(u, &cu)
            })
            .sum()
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}

/// A state of nature: one conditional event probability per covariate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(Vec<Rat>);

impl State {
    pub fn new(p: Vec<Rat>) -> Result<Self> {
        for v in &p {
            if v.is_negative() || *v > Rat::one() {
                return Err(Error::InvalidState(format!("entry {v} outside [0, 1]")));
            }
        }
        if p.is_empty() {
            return Err(Error::InvalidState("empty state".into()));
        }
        Ok(State(p))
    }

    /// State with the same probability for every covariate.
    pub fn constant(value: Rat, n: usize) -> Result<Self> {
        State::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[Rat] {
        &self.0
    }

    pub fn prob(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<Rat> = s
            .split(';')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        State::new(parts)
    }
}

/// One covariate group's decision threshold.
///
/// `ForceA` and `ForceB` are the extreme policies `t_x ≥ 1` and `t_x < 0`:
/// they assign the same treatment no matter what the prediction says.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ThresholdEntry {
    Value(Rat),
    ForceA,
    ForceB,
}

impl ThresholdEntry {
    pub fn value(v: Rat) -> Result<Self> {
        if v.is_negative() || v > Rat::one() {
            return Err(Error::InvalidGrid(format!("threshold {v} outside [0, 1]")));
        }
        Ok(ThresholdEntry::Value(v))
    }
}

impl fmt::Display for ThresholdEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdEntry::Value(v) => write!(f, "{v}"),
            ThresholdEntry::ForceA => write!(f, "force-a"),
            ThresholdEntry::ForceB => write!(f, "force-b"),
        }
    }
}

impl FromStr for ThresholdEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "force-a" | "forceA" | "force_a" => Ok(ThresholdEntry::ForceA),
            "force-b" | "forceB" | "force_b" => Ok(ThresholdEntry::ForceB),
            other => ThresholdEntry::value(parse_rational(other)?),
        }
    }
}

/// Per-covariate decision thresholds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThresholdPolicy(Vec<ThresholdEntry>);

impl ThresholdPolicy {
    /// The same threshold for every covariate group.
    pub fn invariant(entry: ThresholdEntry, n: usize) -> Self {
        ThresholdPolicy(vec![entry; n])
    }

    /// The same numeric threshold for every covariate group.
    pub fn invariant_value(t: Rat, n: usize) -> Result<Self> {
        Ok(Self::invariant(ThresholdEntry::value(t)?, n))
    }

    pub fn per_covariate(entries: Vec<ThresholdEntry>) -> Self {
        ThresholdPolicy(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[ThresholdEntry] {
        &self.0
    }

    pub fn entry(&self, i: usize) -> &ThresholdEntry {
        &self.0[i]
    }

    /// True when every entry is the same.
    pub fn is_invariant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Decision rule: A iff the prediction is at or below the threshold.
pub fn decide<S: Scalar>(phi: &S, entry: &ThresholdEntry) -> Treatment {
    decide_with_boundary(phi, entry).0
}

/// Decision rule that also reports whether the comparison was a tie.
///
/// For exact scalars the tie band is exactly `φ = t`; for floats it is
/// `|φ - t| ≤ τ` with the scalar's tolerance, and the tie resolves to A
/// just like the exact rule. Forced entries never produce a boundary event.
pub fn decide_with_boundary<S: Scalar>(phi: &S, entry: &ThresholdEntry) -> (Treatment, bool) {
    match entry {
        ThresholdEntry::Value(t) => {
            let t = S::from_rat(t);
            let tol = S::tie_tolerance();
            let boundary = (phi.clone() - t.clone()).abs() <= tol;
            let choice = if *phi <= t + tol {
                Treatment::A
            } else {
                Treatment::B
            };
            (choice, boundary)
        }
        ThresholdEntry::ForceA => (Treatment::A, false),
        ThresholdEntry::ForceB => (Treatment::B, false),
    }
}

/// Treatment that maximizes expected welfare when `p` is known.
///
/// B is optimal iff `p > 1 - U_xB`; A is chosen on ties.
pub fn optimal_treatment(p: &Rat, welfare_b: &Rat) -> Treatment {
    let cutoff = Rat::one() - welfare_b;
    if *p > cutoff {
        Treatment::B
    } else {
        Treatment::A
    }
}

/// 1 when the plug-in decision differs from the optimal one, else 0.
pub fn error_indicator<S: Scalar>(
    p: &Rat,
    phi: &S,
    entry: &ThresholdEntry,
    welfare_b: &Rat,
) -> bool {
    decide(phi, entry) != optimal_treatment(p, welfare_b)
}

/// Per-state regret with full diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRegret {
    /// Total population regret in this state.
    pub total: Rat,
    /// Each covariate's contribution `P(x)|(1 - U_xB) - p_sx| 1[error]`.
    pub by_covariate: Vec<Rat>,
    /// Which covariates the rule errs on.
    pub errors: Vec<bool>,
    /// Number of threshold comparisons that landed in the tie band.
    pub boundary_events: usize,
}

/// Population regret of predicting `phi` and thresholding it with `policy`
/// while the true state is `state`.
pub fn state_regret<S: Scalar>(
    problem: &Problem,
    state: &State,
    phi: &[S],
    policy: &ThresholdPolicy,
) -> Result<Rat> {
    Ok(state_regret_report(problem, state, phi, policy)?.total)
}

/// As [`state_regret`], but returning the per-covariate breakdown, error
/// flags, and boundary-event count.
pub fn state_regret_report<S: Scalar>(
    problem: &Problem,
    state: &State,
    phi: &[S],
    policy: &ThresholdPolicy,
) -> Result<StateRegret> {
    problem.check_len(state.len())?;
    problem.check_len(phi.len())?;
    problem.check_len(policy.len())?;

    let n = problem.len();
    let mut by_covariate = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    let mut boundary_events = 0usize;
    let mut total = Rat::zero();

    for i in 0..n {
        let p = state.prob(i);
        let (chosen, boundary) = decide_with_boundary(&phi[i], policy.entry(i));
        if boundary {
            boundary_events += 1;
        }
        let optimal = optimal_treatment(p, problem.welfare_at(i));
        let err = chosen != optimal;
        errors.push(err);
        let contribution = if err {
            problem.weight(i) * (problem.cutoff_at(i) - p).abs()
        } else {
            Rat::zero()
        };
        total += &contribution;
        by_covariate.push(contribution);
    }

    debug_assert!(total <= problem.regret_upper_bound());
    Ok(StateRegret {
        total,
        by_covariate,
        errors,
        boundary_events,
    })
}

/// Marginal event probability `p_s = Σ_x P(x) p_sx`.
pub fn marginal_mean(problem: &Problem, state: &State) -> Result<Rat> {
    problem.check_len(state.len())?;
    Ok(problem
        .weights()
        .iter()
        .zip(state.probs())
        .map(|(w, p)| w * p)
        .sum())
}

/// Result of a maximum-regret search over a state grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    /// The maximum regret value.
    pub mr: Rat,
    /// Every state attaining the maximum, in enumeration order.
    pub argmax_states: Vec<State>,
    /// Per-covariate regret contributions at the first argmax state.
    pub breakdown: Vec<Rat>,
    /// Tie-band comparisons seen across the whole search.
    pub boundary_events: usize,
}

impl RegretReport {
    /// First regret-maximizing state in enumeration order.
    pub fn argmax(&self) -> &State {
        &self.argmax_states[0]
    }
}
