//! Complete decision procedure for finite point sets, and the search for
//! minimal non-colorable integer windows.

use serde::{Deserialize, Serialize};

use crate::graph::{backtrack, ConflictGraph, SearchOutcome, SearchStats};
use crate::model::{Coloring, PointSet, RestrictionArray};
use crate::rational::Rational;

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SolveStatus {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub witness: Option<Coloring>,
    pub stats: SearchStats,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        self.status == SolveStatus::Sat
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("node budget of {budget} exhausted before the search completed")]
    BudgetExhausted { budget: u64, stats: SearchStats },
}

/// Decides whether `s` is `d`-colorable with the default node budget.
pub fn decide_finite(s: &PointSet, d: &RestrictionArray) -> Result<SolveResult, SolveError> {
    decide_finite_with_budget(s, d, DEFAULT_NODE_BUDGET)
}

pub fn decide_finite_with_budget(
    s: &PointSet,
    d: &RestrictionArray,
    budget: u64,
) -> Result<SolveResult, SolveError> {
    let graph = ConflictGraph::on_points(s, d);
    let (outcome, colors, stats) = backtrack(&graph, budget);
    match outcome {
        SearchOutcome::Found => {
            let colors: Vec<usize> = colors.unwrap_or_default().iter().map(|c| c + 1).collect();
            let witness = Coloring::from_parts(s, &colors);
            debug_assert!(crate::model::verify_coloring(s, &witness, d)
                .map(|v| v.is_empty())
                .unwrap_or(false));
            Ok(SolveResult {
                status: SolveStatus::Sat,
                witness: Some(witness),
                stats,
            })
        }
        SearchOutcome::Exhausted => Ok(SolveResult {
            status: SolveStatus::Unsat,
            witness: None,
            stats,
        }),
        SearchOutcome::OutOfBudget => Err(SolveError::BudgetExhausted { budget, stats }),
    }
}

/// The `k × k` array whose `i`-th row is constant `i`.
pub fn staircase_array(k: usize) -> RestrictionArray {
    assert!(k >= 1, "staircase arrays need k >= 1");
    let rows = (1..=k as i64).map(|i| vec![Rational::from(i); k]).collect();
    RestrictionArray::new(rows).expect("positive rectangular rows")
}

/// Outcome of [`find_unsat_window`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowReport {
    pub found: bool,
    /// Inclusive integer endpoints `[a, b]`.
    pub window: Option<(i64, i64)>,
    /// Radius at which the search stopped: where the first non-colorable
    /// window appeared, or `radius_max`.
    pub radius: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WindowError {
    #[error("window search needs integer restrictions; canonicalize the array first")]
    NonIntegral,
    #[error("search of window [{a}, {b}] ran out of budget")]
    Budget { a: i64, b: i64, budget: u64 },
}

fn window_sat(d: &RestrictionArray, a: i64, b: i64, budget: u64) -> Result<bool, WindowError> {
    decide_finite_with_budget(&PointSet::integer_range(a, b), d, budget)
        .map(|r| r.is_sat())
        .map_err(|_| WindowError::Budget { a, b, budget })
}

/// Grows symmetric windows `[-r, r]` for `r = 1..=radius_max` until one is
/// not `d`-colorable, then trims it from the left and then from the right
/// while it stays non-colorable. The result is non-colorable while both
/// one-point-shorter subwindows are colorable.
pub fn find_unsat_window(
    d: &RestrictionArray,
    radius_max: u64,
) -> Result<WindowReport, WindowError> {
    find_unsat_window_with_budget(d, radius_max, DEFAULT_NODE_BUDGET)
}

pub fn find_unsat_window_with_budget(
    d: &RestrictionArray,
    radius_max: u64,
    budget: u64,
) -> Result<WindowReport, WindowError> {
    if !d.is_integral() {
        return Err(WindowError::NonIntegral);
    }
    for r in 1..=radius_max {
        let r_i = r as i64;
        if window_sat(d, -r_i, r_i, budget)? {
            continue;
        }
        let (mut a, mut b) = (-r_i, r_i);
        // Trimming the left end first cannot invalidate left minimality
        // later: a superset of a non-colorable window is non-colorable.
        while a < b && !window_sat(d, a + 1, b, budget)? {
            a += 1;
        }
        while a < b && !window_sat(d, a, b - 1, budget)? {
            b -= 1;
        }
        return Ok(WindowReport {
            found: true,
            window: Some((a, b)),
            radius: r,
        });
    }
    Ok(WindowReport {
        found: false,
        window: None,
        radius: radius_max,
    })
}
