//! State-grid enumeration, exhaustive maximum regret, threshold search,
//! and the no-data baseline.
//!
//! Maximum regret over a grid parallelizes across states. To keep results
//! bit-identical at any thread count, the index range is split into
//! contiguous chunks, each chunk reduces on its own, and chunk results
//! merge in index order; with exact arithmetic the outcome is also
//! independent of the chunk size itself.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::predictors::{Predictions, PredictorSpec};
use crate::problem::{
    Problem, RegretReport, State, ThresholdEntry, ThresholdPolicy, Treatment,
};
use crate::Rat;

/// States evaluated per work item in parallel scans.
const CHUNK: usize = 256;

/// A finite grid over the state space: per-covariate lists of feasible
/// conditional probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    axes: Vec<Vec<Rat>>,
    count: usize,
}

impl StateGrid {
    pub fn new(axes: Vec<Vec<Rat>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("no axes".into()));
        }
        for axis in &axes {
            if axis.is_empty() {
                return Err(Error::InvalidGrid("empty axis value list".into()));
            }
            for v in axis {
                if v < &Rat::zero() || v > &Rat::one() {
                    return Err(Error::InvalidGrid(format!("value {v} outside [0, 1]")));
                }
            }
            if !axis.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidGrid(
                    "axis values must be strictly increasing".into(),
                ));
            }
        }
        let mut count: u128 = 1;
        for axis in &axes {
            count = count.saturating_mul(axis.len() as u128);
        }
        let count = usize::try_from(count)
            .map_err(|_| Error::InvalidGrid(format!("state count {count} overflows")))?;
        Ok(StateGrid { axes, count })
    }

    /// The same value list on every axis.
    pub fn shared(values: Vec<Rat>, n: usize) -> Result<Self> {
        StateGrid::new(vec![values; n])
    }

    /// Evenly spaced values `0, step, 2·step, …` capped at 1 (1 included).
    pub fn from_step(step: &Rat, n: usize) -> Result<Self> {
        if !num_traits::Signed::is_positive(step) {
            return Err(Error::InvalidGrid(format!("step {step} must be positive")));
        }
        let mut values = Vec::new();
        let mut v = Rat::zero();
        while v < Rat::one() {
            values.push(v.clone());
            v += step;
        }
        values.push(Rat::one());
        StateGrid::shared(values, n)
    }

    /// Grid containing exactly one state.
    pub fn singleton(state: &State) -> Result<Self> {
        StateGrid::new(state.probs().iter().map(|p| vec![p.clone()]).collect())
    }

    pub fn axes(&self) -> &[Vec<Rat>] {
        &self.axes
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    /// Total number of grid states (product of axis lengths).
    pub fn state_count(&self) -> usize {
        self.count
    }

    /// State at a given index in lexicographic enumeration order (the
    /// first covariate is the most significant digit).
    pub fn state_at(&self, index: usize) -> State {
        debug_assert!(index < self.count);
        let mut digits = vec![0usize; self.axes.len()];
        let mut rest = index;
        for (slot, axis) in digits.iter_mut().zip(&self.axes).rev() {
            *slot = rest % axis.len();
            rest /= axis.len();
        }
        State::new(
            digits
                .iter()
                .zip(&self.axes)
                .map(|(&d, axis)| axis[d].clone())
                .collect(),
        )
        .expect("grid values are valid probabilities")
    }

    /// All grid states in enumeration order.
    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.count).map(move |i| self.state_at(i))
    }
}

/// Deterministic enumeration of every grid state.
pub fn enumerate_states(grid: &StateGrid) -> Vec<State> {
    grid.states().collect()
}

/// Candidate decision thresholds for the outer minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    /// Candidates applied identically to every covariate.
    pub invariant: Vec<ThresholdEntry>,
    /// Optional per-covariate candidate lists; covariates without a list
    /// fall back to the invariant candidates.
    pub per_covariate: Option<Vec<Vec<ThresholdEntry>>>,
    /// Cap on the number of candidate policies in per-covariate mode.
    pub policy_cap: u128,
}

/// Default cap on the per-covariate policy product.
pub const DEFAULT_POLICY_CAP: u128 = 1_000_000;

impl ThresholdGrid {
    pub fn invariant_values(values: Vec<Rat>) -> Result<Self> {
        let invariant = values
            .into_iter()
            .map(ThresholdEntry::value)
            .collect::<Result<Vec<_>>>()?;
        Ok(ThresholdGrid {
            invariant,
            per_covariate: None,
            policy_cap: DEFAULT_POLICY_CAP,
        })
    }

    /// The paper-style interior grid `step, 2·step, …` strictly inside (0, 1).
    pub fn interior_step(step: &Rat) -> Result<Self> {
        if !num_traits::Signed::is_positive(step) {
            return Err(Error::InvalidGrid(format!("step {step} must be positive")));
        }
        let mut values = Vec::new();
        let mut v = step.clone();
        while v < Rat::one() {
            values.push(v.clone());
            v += step;
        }
        if values.is_empty() {
            return Err(Error::InvalidGrid(format!(
                "step {step} leaves no interior thresholds"
            )));
        }
        ThresholdGrid::invariant_values(values)
    }
}

/// How candidate policies are formed from a [`ThresholdGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// One threshold shared by all covariates.
    Invariant,
    /// Cartesian product of per-covariate candidate lists.
    PerCovariate,
}

/// One evaluated candidate policy.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRow {
    pub policy: ThresholdPolicy,
    pub report: RegretReport,
}

/// Result of minimizing maximum regret over candidate threshold policies.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Every candidate with its maximum regret, in enumeration order.
    pub rows: Vec<SearchRow>,
    /// Index of the minimizing candidate (first on ties).
    pub best_index: usize,
}

impl SearchResult {
    pub fn best(&self) -> &SearchRow {
        &self.rows[self.best_index]
    }

    pub fn mmr(&self) -> &Rat {
        &self.best().report.mr
    }
}

/// Predictions for every grid state, computed in parallel in index order.
pub fn predict_states(
    spec: &PredictorSpec,
    problem: &Problem,
    grid: &StateGrid,
) -> Result<Vec<Predictions>> {
    (0..grid.state_count())
        .into_par_iter()
        .map(|i| {
            let state = grid.state_at(i);
            spec.predict(problem, &state)
                .map_err(|e| e.at_state(&state))
        })
        .collect()
}

/// Maximum regret of a (predictor, thresholds) pair over a state grid.
pub fn max_regret(
    problem: &Problem,
    spec: &PredictorSpec,
    policy: &ThresholdPolicy,
    grid: &StateGrid,
) -> Result<RegretReport> {
    let preds = predict_states(spec, problem, grid)?;
    max_regret_cached(problem, &preds, policy, grid)
}

struct ChunkOutcome {
    best: Rat,
    argmax: Vec<usize>,
    boundary_events: usize,
}

/// Maximum regret using predictions already computed per grid state.
///
/// `preds[i]` must correspond to `grid.state_at(i)`; predictions do not
/// depend on the threshold policy, so one prediction pass can serve many
/// policy evaluations.
pub fn max_regret_cached(
    problem: &Problem,
    preds: &[Predictions],
    policy: &ThresholdPolicy,
    grid: &StateGrid,
) -> Result<RegretReport> {
    let n = grid.state_count();
    if preds.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: preds.len(),
        });
    }

    let ranges: Vec<(usize, usize)> = (0..n)
        .step_by(CHUNK)
        .map(|start| (start, (start + CHUNK).min(n)))
        .collect();

    let chunks: Vec<ChunkOutcome> = ranges
        .into_par_iter()
        .map(|(start, end)| {
            let mut best = Rat::zero();
            let mut argmax = Vec::new();
            let mut boundary_events = 0usize;
            for i in start..end {
                let state = grid.state_at(i);
                let rep = preds[i].regret_report(problem, &state, policy)?;
                boundary_events += rep.boundary_events;
                if argmax.is_empty() || rep.total > best {
                    best = rep.total;
                    argmax.clear();
                    argmax.push(i);
                } else if rep.total == best {
                    argmax.push(i);
                }
            }
            Ok(ChunkOutcome {
                best,
                argmax,
                boundary_events,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Merge in index order: chunks are contiguous and already sorted.
    let mut best = Rat::zero();
    let mut argmax: Vec<usize> = Vec::new();
    let mut boundary_events = 0usize;
    for chunk in chunks {
        boundary_events += chunk.boundary_events;
        if argmax.is_empty() || chunk.best > best {
            best = chunk.best;
            argmax = chunk.argmax;
        } else if chunk.best == best {
            argmax.extend(chunk.argmax);
        }
    }

    let argmax_states: Vec<State> = argmax.iter().map(|&i| grid.state_at(i)).collect();
    let first = &argmax_states[0];
    let breakdown = preds[argmax[0]]
        .regret_report(problem, first, policy)?
        .by_covariate;
    Ok(RegretReport {
        mr: best,
        argmax_states,
        breakdown,
        boundary_events,
    })
}

fn candidate_policies(
    tgrid: &ThresholdGrid,
    mode: ThresholdMode,
    n: usize,
) -> Result<Vec<ThresholdPolicy>> {
    match mode {
        ThresholdMode::Invariant => {
            if tgrid.invariant.is_empty() {
                return Err(Error::InvalidGrid("no invariant threshold candidates".into()));
            }
            Ok(tgrid
                .invariant
                .iter()
                .map(|e| ThresholdPolicy::invariant(e.clone(), n))
                .collect())
        }
        ThresholdMode::PerCovariate => {
            let fallback = &tgrid.invariant;
            let lists: Vec<&[ThresholdEntry]> = (0..n)
                .map(|i| {
                    tgrid
                        .per_covariate
                        .as_ref()
                        .and_then(|pc| pc.get(i))
                        .map(|v| v.as_slice())
                        .unwrap_or(fallback.as_slice())
                })
                .collect();
            let mut count: u128 = 1;
            for list in &lists {
                if list.is_empty() {
                    return Err(Error::InvalidGrid(
                        "empty per-covariate threshold list".into(),
                    ));
                }
                count = count.saturating_mul(list.len() as u128);
            }
            if count > tgrid.policy_cap {
                return Err(Error::PolicyBudget {
                    count,
                    cap: tgrid.policy_cap,
                });
            }
            let mut policies = Vec::with_capacity(count as usize);
            let mut digits = vec![0usize; n];
            loop {
                policies.push(ThresholdPolicy::per_covariate(
                    digits
                        .iter()
                        .zip(&lists)
                        .map(|(&d, list)| list[d].clone())
                        .collect(),
                ));
                // Odometer increment, last covariate fastest.
                let mut pos = n;
                loop {
                    if pos == 0 {
                        return Ok(policies);
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    if digits[pos] < lists[pos].len() {
                        break;
                    }
                    digits[pos] = 0;
                }
            }
        }
    }
}

/// Minimize maximum regret over candidate threshold policies with the
/// predictor held fixed (thresholds are chosen ex ante; nature then picks
/// the worst state for each candidate).
pub fn minimize_over_thresholds(
    problem: &Problem,
    spec: &PredictorSpec,
    grid: &StateGrid,
    tgrid: &ThresholdGrid,
    mode: ThresholdMode,
) -> Result<SearchResult> {
    let policies = candidate_policies(tgrid, mode, problem.len())?;
    let preds = predict_states(spec, problem, grid)?;
    let mut rows = Vec::with_capacity(policies.len());
    for policy in policies {
        let report = max_regret_cached(problem, &preds, &policy, grid)?;
        rows.push(SearchRow { policy, report });
    }
    // min_by keeps the first element on ties.
    let best_index = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.report.mr.cmp(&b.1.report.mr))
        .expect("candidate list is nonempty")
        .0;
    Ok(SearchResult { rows, best_index })
}

/// Minimax regret with no data and an unrestricted state space:
/// `Σ_x P(x) min(U_xB, 1 - U_xB)`.
pub fn no_data_mmr(problem: &Problem) -> Rat {
    problem
        .weights()
        .iter()
        .zip(problem.welfare())
        .map(|(w, u)| {
            let cu = Rat::one() - u;
            w * std::cmp::min(u, &cu)
        })
        .sum()
}

/// Minimax-regret treatment when only bounds `p_m ≤ p_x ≤ p_M` are known:
/// B iff the midpoint of the bounds exceeds `1 - U_xB`, A on ties.
pub fn no_data_decision(welfare_b: &Rat, p_m: &Rat, p_max: &Rat) -> Treatment {
    debug_assert!(Rat::zero() <= *p_m && p_m <= p_max && *p_max <= Rat::one());
    let midpoint = (p_m + p_max) / Rat::from_integer(2.into());
    let cutoff = Rat::one() - welfare_b;
    if midpoint > cutoff {
        Treatment::B
    } else {
        Treatment::A
    }
}

/// Best x-invariant threshold for a correctly specified predictor:
/// minimizes `Σ_x P(x)|(1 - U_xB) - t|` over t.
///
/// Returns the weighted median of the optimal cutoffs (the midpoint of the
/// median interval when the minimizer is not unique) and the minimized
/// objective value.
pub fn weighted_median_threshold(problem: &Problem) -> (Rat, Rat) {
    use std::collections::BTreeMap;

    let mut by_cutoff: BTreeMap<Rat, Rat> = BTreeMap::new();
    for i in 0..problem.len() {
        *by_cutoff
            .entry(problem.cutoff_at(i).clone())
            .or_insert_with(Rat::zero) += problem.weight(i);
    }
    let points: Vec<(&Rat, &Rat)> = by_cutoff.iter().collect();
    let half = Rat::new(1.into(), 2.into());

    let mut cumulative = Rat::zero();
    let mut minimizer = points[0].0.clone();
    for (i, (cutoff, weight)) in points.iter().enumerate() {
        cumulative += *weight;
        if cumulative >= half {
            minimizer = if cumulative == half {
                // Median interval [cutoff, next]: any point minimizes.
                let next = points[i + 1].0;
                (*cutoff + next) / Rat::from_integer(2.into())
            } else {
                (*cutoff).clone()
            };
            break;
        }
    }

    let objective: Rat = (0..problem.len())
        .map(|i| problem.weight(i) * num_traits::Signed::abs(&(problem.cutoff_at(i) - &minimizer)))
        .sum();
    (minimizer, objective)
}
