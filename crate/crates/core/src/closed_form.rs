//! Closed-form maximum-regret results: the correct-specification formula,
//! the binary-covariate marginal-mean table, interpolating-predictor
//! bounds, extreme-threshold values, and law-of-total-probability
//! identification intervals.
//!
//! These serve double duty: user-facing exact answers, and independent
//! checks on the grid-search engine.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::problem::{Problem, ThresholdEntry, ThresholdPolicy};
use crate::Rat;

/// Supremum of population regret for a correctly specified predictor with
/// numeric thresholds: `Σ_x P(x) |(1 - U_xB) - t_x|`.
///
/// This is a continuous-state supremum; a coarse grid search can fall
/// short of it because no grid state sits just past the threshold.
pub fn correct_spec_mr(problem: &Problem, policy: &ThresholdPolicy) -> Result<Rat> {
    if policy.len() != problem.len() {
        return Err(Error::ShapeMismatch {
            expected: problem.len(),
            got: policy.len(),
        });
    }
    let mut total = Rat::zero();
    for i in 0..problem.len() {
        match policy.entry(i) {
            ThresholdEntry::Value(t) => {
                total += problem.weight(i) * (problem.cutoff_at(i) - t).abs();
            }
            ThresholdEntry::ForceA | ThresholdEntry::ForceB => {
                return Err(Error::ForcedThreshold(
                    "the correct-specification formula assumes interior thresholds",
                ));
            }
        }
    }
    Ok(total)
}

/// Which cell of the binary marginal-mean table applies, keyed by how the
/// two covariate weights compare to the threshold t*.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table1Cell {
    /// P(x=0) ≤ t* and P(x=1) ≤ t*: MR = max{P0·U0, P1·U1}.
    NeitherExceeds,
    /// P(x=0) ≤ t* and P(x=1) > t*: MR = P0·max{U0, 1-U0}.
    OnlyX1Exceeds,
    /// P(x=0) > t* and P(x=1) ≤ t*: MR = P1·max{U1, 1-U1}.
    OnlyX0Exceeds,
    /// Both weights exceed t*: MR = max{P0(1-U0), P1(1-U1)}.
    BothExceed,
}

/// Closed-form maximum regret for binary x, marginal-mean prediction, and
/// the x-invariant threshold t* = P0(1-U0) + P1(1-U1).
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMarginalCase {
    pub p0: Rat,
    pub p1: Rat,
    pub u0: Rat,
    pub u1: Rat,
    /// The threshold t* = P0(1-U0) + P1(1-U1).
    pub t_star: Rat,
    pub cell: Table1Cell,
    /// The supremum of regret (approached, not always attained).
    pub mr: Rat,
}

fn check_binary_dist(p0: &Rat, p1: &Rat) -> Result<()> {
    if !p0.is_positive() || !p1.is_positive() || p0 + p1 != Rat::one() {
        return Err(Error::InvalidProblem(format!(
            "({p0}, {p1}) is not a positive binary distribution"
        )));
    }
    Ok(())
}

fn check_unit_interior(u: &Rat) -> Result<()> {
    if !(u.is_positive() && *u < Rat::one()) {
        return Err(Error::InvalidProblem(format!(
            "welfare {u} is not strictly inside (0, 1)"
        )));
    }
    Ok(())
}

/// Evaluate the binary marginal-mean table.
///
/// Cell selection uses `≤ t*` versus `> t*` literally; weights equal to
/// t* land in the `≤` branch.
pub fn table1_mr(p0: &Rat, p1: &Rat, u0: &Rat, u1: &Rat) -> Result<BinaryMarginalCase> {
    check_binary_dist(p0, p1)?;
    check_unit_interior(u0)?;
    check_unit_interior(u1)?;

    let one = Rat::one();
    let t_star = p0 * (&one - u0) + p1 * (&one - u1);
    let x0_exceeds = *p0 > t_star;
    let x1_exceeds = *p1 > t_star;
    let (cell, mr) = match (x0_exceeds, x1_exceeds) {
        (false, false) => (
            Table1Cell::NeitherExceeds,
            std::cmp::max(p0 * u0, p1 * u1),
        ),
        (false, true) => (
            Table1Cell::OnlyX1Exceeds,
            p0 * std::cmp::max(u0, &(&one - u0)),
        ),
        (true, false) => (
            Table1Cell::OnlyX0Exceeds,
            p1 * std::cmp::max(u1, &(&one - u1)),
        ),
        (true, true) => (
            Table1Cell::BothExceed,
            std::cmp::max(p0 * (&one - u0), p1 * (&one - u1)),
        ),
    };
    Ok(BinaryMarginalCase {
        p0: p0.clone(),
        p1: p1.clone(),
        u0: u0.clone(),
        u1: u1.clone(),
        t_star,
        cell,
        mr,
    })
}

/// Brute-force check of [`table1_mr`]: scan the (p_s0, p_s1) square on a
/// grid with the given step and return the largest regret found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceMr {
    pub value: f64,
    /// First maximizing grid point (p_s0, p_s1) in scan order.
    pub argmax: (f64, f64),
}

/// Exhaustive grid evaluation of marginal-mean regret at threshold t*.
///
/// Runs in floating point; the caller compares against the closed form
/// with a tolerance of twice the grid step (regret is 1-Lipschitz in each
/// coordinate with weight at most one).
pub fn table1_brute_force(p0: &Rat, u0: &Rat, u1: &Rat, step: &Rat) -> Result<BruteForceMr> {
    let p1 = Rat::one() - p0;
    check_binary_dist(p0, &p1)?;
    check_unit_interior(u0)?;
    check_unit_interior(u1)?;
    if !step.is_positive() {
        return Err(Error::InvalidGrid(format!("step {step} must be positive")));
    }

    let to_f = |r: &Rat| num_traits::ToPrimitive::to_f64(r).unwrap();
    let (w0, w1) = (to_f(p0), to_f(&p1));
    let (c0, c1) = (1.0 - to_f(u0), 1.0 - to_f(u1));
    let t_star = w0 * c0 + w1 * c1;

    // Grid values 0, step, 2·step, …, 1.
    let mut values = Vec::new();
    let mut v = Rat::zero();
    while v < Rat::one() {
        values.push(to_f(&v));
        v += step;
    }
    values.push(1.0);

    let mut best = BruteForceMr {
        value: -1.0,
        argmax: (0.0, 0.0),
    };
    for &pv0 in &values {
        for &pv1 in &values {
            let p_s = w0 * pv0 + w1 * pv1;
            let choose_b = p_s > t_star;
            let mut regret = 0.0;
            if (pv0 > c0) != choose_b {
                regret += w0 * (c0 - pv0).abs();
            }
            if (pv1 > c1) != choose_b {
                regret += w1 * (c1 - pv1).abs();
            }
            if regret > best.value {
                best = BruteForceMr {
                    value: regret,
                    argmax: (pv0, pv1),
                };
            }
        }
    }
    Ok(best)
}

fn check_k(problem: &Problem, k: usize) -> Result<()> {
    if k < 1 || k > problem.len() {
        return Err(Error::InvalidSpec(format!(
            "K = {k} outside 1..={}",
            problem.len()
        )));
    }
    Ok(())
}

/// Bounds on maximum regret for any invertible K-parameter predictor that
/// reproduces the first K conditional probabilities at their optimal head
/// thresholds:
///
/// `Σ_{k>K} P(x) min(1-U_xB, U_xB)  ≤  MR  ≤  Σ_{k>K} P(x) max(1-U_xB, U_xB)`.
///
/// The covariate order of the problem fixes which K covariates form the head.
pub fn interp_bounds(problem: &Problem, k: usize) -> Result<(Rat, Rat)> {
    check_k(problem, k)?;
    let mut lower = Rat::zero();
    let mut upper = Rat::zero();
    for i in k..problem.len() {
        let u = problem.welfare_at(i);
        let cu = Rat::one() - u;
        lower += problem.weight(i) * std::cmp::min(u, &cu);
        upper += problem.weight(i) * std::cmp::max(u, &cu);
    }
    Ok((lower, upper))
}

/// Maximum regret achieved by forcing the tail treatments by welfare sign
/// (A when U_xB < ½, B when U_xB > ½): the lower bound of [`interp_bounds`].
pub fn extreme_threshold_mr(problem: &Problem, k: usize) -> Result<Rat> {
    Ok(interp_bounds(problem, k)?.0)
}

/// The threshold policy behind [`extreme_threshold_mr`]: optimal cutoffs
/// `1 - U_xB` on the head, forced actions on the tail (A when U_xB < ½,
/// B when U_xB > ½, A in the indifferent U_xB = ½ case).
pub fn extreme_tail_policy(problem: &Problem, k: usize) -> Result<ThresholdPolicy> {
    check_k(problem, k)?;
    let half = Rat::new(1.into(), 2.into());
    let entries = (0..problem.len())
        .map(|i| {
            if i < k {
                ThresholdEntry::Value(problem.cutoff_at(i).clone())
            } else if *problem.welfare_at(i) > half {
                ThresholdEntry::ForceB
            } else {
                ThresholdEntry::ForceA
            }
        })
        .collect();
    Ok(ThresholdPolicy::per_covariate(entries))
}

/// The K covariates with the largest weights (ties broken by covariate
/// order), returned in covariate order. Requires the welfare value to be
/// invariant over the resulting tail, which is what makes weight-greedy
/// selection optimal.
pub fn best_k_subset(problem: &Problem, k: usize) -> Result<Vec<i64>> {
    check_k(problem, k)?;
    let mut order: Vec<usize> = (0..problem.len()).collect();
    // Stable sort by descending weight keeps covariate order on ties.
    order.sort_by(|&a, &b| problem.weight(b).cmp(problem.weight(a)));
    let mut head: Vec<usize> = order[..k].to_vec();
    head.sort_unstable();
    let tail: Vec<usize> = (0..problem.len()).filter(|i| !head.contains(i)).collect();
    if let Some((&first, rest)) = tail.split_first() {
        for &i in rest {
            if problem.welfare_at(i) != problem.welfare_at(first) {
                return Err(Error::InvalidSpec(
                    "welfare varies over the tail; weight-greedy selection needs an \
                     x-invariant tail welfare"
                        .into(),
                ));
            }
        }
    }
    Ok(head.iter().map(|&i| problem.covariates()[i]).collect())
}

/// Which conditional probability of a binary-covariate problem an
/// identification interval refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryX {
    X0,
    X1,
}

/// Identification interval for a conditional probability given the
/// marginal `p_s` and the covariate distribution, by the law of total
/// probability:
///
/// `p_s0 ∈ [0,1] ∩ [(p_s - P(x=1))/P(x=0), p_s/P(x=0)]` (and symmetrically
/// for x = 1). Never empty for `p_s ∈ [0, 1]`.
pub fn identification_interval(
    p_s: &Rat,
    p0: &Rat,
    p1: &Rat,
    which: BinaryX,
) -> Result<(Rat, Rat)> {
    check_binary_dist(p0, p1)?;
    if p_s.is_negative() || *p_s > Rat::one() {
        return Err(Error::InvalidState(format!("p_s = {p_s} outside [0, 1]")));
    }
    let (own, other) = match which {
        BinaryX::X0 => (p0, p1),
        BinaryX::X1 => (p1, p0),
    };
    let lo = std::cmp::max(Rat::zero(), (p_s - other) / own);
    let hi = std::cmp::min(Rat::one(), p_s / own);
    debug_assert!(lo <= hi);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::PredictorSpec;
    use crate::problem::{error_indicator, State};
    use crate::rat;
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform4(welfare: Vec<Rat>) -> Problem {
        Problem::uniform(vec![0, 1, 2, 3], welfare).unwrap()
    }

    #[test]
    fn correct_spec_mr_examples() {
        let p = uniform4(vec![rat(1, 5), rat(2, 5), rat(3, 5), rat(4, 5)]);
        let policy = ThresholdPolicy::invariant_value(rat(1, 2), 4).unwrap();
        assert_eq!(correct_spec_mr(&p, &policy).unwrap(), rat(1, 5));

        assert_eq!(
            correct_spec_mr(&p, &p.optimal_policy()).unwrap(),
            rat(0, 1)
        );

        let p = uniform4(vec![rat(1, 2); 4]);
        let policy = ThresholdPolicy::invariant_value(rat(3, 8), 4).unwrap();
        assert_eq!(correct_spec_mr(&p, &policy).unwrap(), rat(1, 8));
    }

    #[test]
    fn correct_spec_mr_rejects_forced_entries() {
        let p = uniform4(vec![rat(1, 2); 4]);
        let policy = ThresholdPolicy::invariant(ThresholdEntry::ForceA, 4);
        assert!(matches!(
            correct_spec_mr(&p, &policy),
            Err(Error::ForcedThreshold(_))
        ));
    }

    #[test]
    fn table1_examples() {
        // Both weights exceed t* = 0.3.
        let case = table1_mr(&rat(1, 2), &rat(1, 2), &rat(7, 10), &rat(7, 10)).unwrap();
        assert_eq!(case.t_star, rat(3, 10));
        assert_eq!(case.cell, Table1Cell::BothExceed);
        assert_eq!(case.mr, rat(3, 20)); // 0.15

        // P1 ≤ t* = 0.5 < P0.
        let case = table1_mr(&rat(9, 10), &rat(1, 10), &rat(1, 2), &rat(1, 2)).unwrap();
        assert_eq!(case.cell, Table1Cell::OnlyX0Exceeds);
        assert_eq!(case.mr, rat(1, 20)); // 0.05

        // P0 ≤ t* = 0.66 < P1.
        let case = table1_mr(&rat(1, 5), &rat(4, 5), &rat(9, 10), &rat(1, 5)).unwrap();
        assert_eq!(case.t_star, rat(33, 50));
        assert_eq!(case.cell, Table1Cell::OnlyX1Exceeds);
        assert_eq!(case.mr, rat(9, 50)); // 0.18
    }

    #[test]
    fn table1_brute_force_agrees_on_examples() {
        let step = rat(1, 400);
        for (p0, u0, u1) in [
            (rat(1, 2), rat(7, 10), rat(7, 10)),
            (rat(9, 10), rat(1, 2), rat(1, 2)),
            (rat(1, 5), rat(9, 10), rat(1, 5)),
            (rat(1, 2), rat(1, 2), rat(1, 2)),
        ] {
            let p1 = Rat::one() - &p0;
            let closed = table1_mr(&p0, &p1, &u0, &u1).unwrap();
            let brute = table1_brute_force(&p0, &u0, &u1, &step).unwrap();
            let gap = (closed.mr.to_f64().unwrap() - brute.value).abs();
            assert!(gap <= 2.0 * step.to_f64().unwrap(), "gap {gap} too large");
        }
    }

    #[test]
    fn table1_oracle_equivalence_sample() {
        // Smaller-scale version of the full 200-configuration check.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let step = rat(1, 100);
        for _ in 0..25 {
            let p0 = rat(rng.gen_range(1..=999), 1000);
            let u0 = rat(rng.gen_range(1..=999), 1000);
            let u1 = rat(rng.gen_range(1..=999), 1000);
            let p1 = Rat::one() - &p0;
            let closed = table1_mr(&p0, &p1, &u0, &u1).unwrap();
            let brute = table1_brute_force(&p0, &u0, &u1, &step).unwrap();
            let gap = (closed.mr.to_f64().unwrap() - brute.value).abs();
            assert!(
                gap <= 2.0 * step.to_f64().unwrap(),
                "gap {gap} at p0={p0}, u0={u0}, u1={u1}"
            );
        }
    }

    #[test]
    fn at_most_one_covariate_errs_at_t_star() {
        // Exhaustive check on binary-x grids: the marginal-mean predictor
        // with threshold t* never errs on both covariates at once.
        let grids = 21;
        for (p0, u0, u1) in [
            (rat(1, 2), rat(7, 10), rat(7, 10)),
            (rat(3, 5), rat(7, 20), rat(13, 20)),
            (rat(9, 10), rat(1, 2), rat(1, 2)),
            (rat(1, 5), rat(9, 10), rat(1, 5)),
        ] {
            let p1 = Rat::one() - &p0;
            let case = table1_mr(&p0, &p1, &u0, &u1).unwrap();
            let problem = Problem::new(vec![0, 1], vec![p0.clone(), p1], vec![u0, u1]).unwrap();
            let entry = ThresholdEntry::Value(case.t_star.clone());
            for k0 in 0..grids {
                for k1 in 0..grids {
                    let s = State::new(vec![rat(k0, grids - 1), rat(k1, grids - 1)]).unwrap();
                    let p_s = crate::problem::marginal_mean(&problem, &s).unwrap();
                    let errs = (0..2)
                        .filter(|&i| {
                            error_indicator(s.prob(i), &p_s, &entry, problem.welfare_at(i))
                        })
                        .count();
                    assert!(errs <= 1, "both covariates err at state {s}");
                }
            }
        }
    }

    #[test]
    fn interp_bounds_examples() {
        let p = uniform4(vec![rat(1, 2); 4]);
        assert_eq!(interp_bounds(&p, 2).unwrap(), (rat(1, 4), rat(1, 4)));

        let p = uniform4(vec![rat(1, 4); 4]);
        assert_eq!(interp_bounds(&p, 2).unwrap(), (rat(1, 8), rat(3, 8)));

        assert_eq!(interp_bounds(&p, 4).unwrap(), (rat(0, 1), rat(0, 1)));
        assert!(interp_bounds(&p, 0).is_err());
        assert!(interp_bounds(&p, 5).is_err());
    }

    #[test]
    fn extreme_threshold_examples() {
        let p = uniform4(vec![rat(1, 4); 4]);
        assert_eq!(extreme_threshold_mr(&p, 2).unwrap(), rat(1, 8));
        assert_eq!(extreme_threshold_mr(&p, 4).unwrap(), rat(0, 1));

        let p = uniform4(vec![rat(1, 5), rat(2, 5), rat(3, 5), rat(4, 5)]);
        assert_eq!(extreme_threshold_mr(&p, 2).unwrap(), rat(3, 20)); // 0.15
    }

    #[test]
    fn extreme_tail_policy_shape() {
        let p = uniform4(vec![rat(1, 5), rat(2, 5), rat(3, 5), rat(4, 5)]);
        let policy = extreme_tail_policy(&p, 2).unwrap();
        assert_eq!(policy.entry(0), &ThresholdEntry::Value(rat(4, 5)));
        assert_eq!(policy.entry(1), &ThresholdEntry::Value(rat(3, 5)));
        assert_eq!(policy.entry(2), &ThresholdEntry::ForceB);
        assert_eq!(policy.entry(3), &ThresholdEntry::ForceB);

        let p = uniform4(vec![rat(1, 4); 4]);
        let policy = extreme_tail_policy(&p, 2).unwrap();
        assert_eq!(policy.entry(2), &ThresholdEntry::ForceA);
    }

    #[test]
    fn best_k_subset_examples() {
        let p = Problem::new(
            vec![0, 1, 2, 3],
            vec![rat(2, 5), rat(3, 10), rat(1, 5), rat(1, 10)],
            vec![rat(1, 2); 4],
        )
        .unwrap();
        assert_eq!(best_k_subset(&p, 2).unwrap(), vec![0, 1]);

        let p = uniform4(vec![rat(1, 2); 4]);
        assert_eq!(best_k_subset(&p, 2).unwrap(), vec![0, 1]);

        let p = Problem::new(
            vec![0, 1, 2, 3],
            vec![rat(1, 10), rat(1, 5), rat(3, 10), rat(2, 5)],
            vec![rat(1, 2); 4],
        )
        .unwrap();
        assert_eq!(best_k_subset(&p, 1).unwrap(), vec![3]);
    }

    #[test]
    fn best_k_subset_requires_invariant_tail() {
        let p = uniform4(vec![rat(1, 2), rat(1, 2), rat(1, 4), rat(3, 4)]);
        assert!(best_k_subset(&p, 2).is_err());
        // A head large enough to leave a single-covariate tail is fine.
        assert!(best_k_subset(&p, 3).is_ok());
    }

    #[test]
    fn identification_interval_examples() {
        let half = rat(1, 2);
        assert_eq!(
            identification_interval(&rat(1, 2), &half, &half, BinaryX::X0).unwrap(),
            (rat(0, 1), rat(1, 1))
        );
        assert_eq!(
            identification_interval(&rat(3, 10), &rat(3, 5), &rat(2, 5), BinaryX::X0).unwrap(),
            (rat(0, 1), rat(1, 2))
        );
        assert_eq!(
            identification_interval(&rat(9, 10), &half, &half, BinaryX::X0).unwrap(),
            (rat(4, 5), rat(1, 1))
        );
    }

    #[test]
    fn identification_interval_duality() {
        // One side's lower bound pairs with the other side's upper bound to
        // reproduce the marginal exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let p0 = rat(rng.gen_range(1..=99), 100);
            let p1 = Rat::one() - &p0;
            let p_s = rat(rng.gen_range(0..=100), 100);
            let (lo0, hi0) = identification_interval(&p_s, &p0, &p1, BinaryX::X0).unwrap();
            let (lo1, hi1) = identification_interval(&p_s, &p0, &p1, BinaryX::X1).unwrap();
            assert!(lo0 <= hi0 && lo1 <= hi1);
            assert_eq!(&p0 * &lo0 + &p1 * &hi1, p_s);
            assert_eq!(&p0 * &hi0 + &p1 * &lo1, p_s);
        }
    }

    #[test]
    fn grid_mr_never_exceeds_correct_spec_supremum() {
        // The closed form is a supremum over the continuous state space, so
        // any grid search for the correct predictor stays at or below it.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let grid = crate::search::StateGrid::shared(
            vec![rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)],
            4,
        )
        .unwrap();
        for _ in 0..20 {
            let welfare: Vec<Rat> = (0..4).map(|_| rat(rng.gen_range(1..=31), 32)).collect();
            let problem = uniform4(welfare);
            let t = rat(rng.gen_range(0..=8), 8);
            let policy = ThresholdPolicy::invariant_value(t, 4).unwrap();
            let report =
                crate::search::max_regret(&problem, &PredictorSpec::Correct, &policy, &grid)
                    .unwrap();
            assert!(report.mr <= correct_spec_mr(&problem, &policy).unwrap());
        }
    }
}
