//! Periodic colorings of the integers: verification, smallest-period search,
//! and the experiment comparing them with window search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{backtrack, ColorMask, ConflictGraph, SearchOutcome};
use crate::model::{Coloring, PointSet, RestrictionArray, Violation};
use crate::rational::Rational;
use crate::solver::{find_unsat_window_with_budget, DEFAULT_NODE_BUDGET};

/// The coloring `x ↦ colors[x mod period]` of all of ℤ. Colors are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicColoring {
    pub period: usize,
    pub colors: Vec<usize>,
}

impl PeriodicColoring {
    pub fn color_at(&self, x: i64) -> usize {
        self.colors[x.rem_euclid(self.period as i64) as usize]
    }

    /// The induced coloring of the integers in `[a, b]`.
    pub fn window(&self, a: i64, b: i64) -> (PointSet, Coloring) {
        let s = PointSet::integer_range(a, b);
        let colors: Vec<usize> = (a..=b).map(|x| self.color_at(x)).collect();
        let t = Coloring::from_parts(&s, &colors);
        (s, t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PeriodicError {
    #[error("periodic colorings need integer restrictions; canonicalize the array first")]
    NonIntegral,
    #[error("period must be positive and match the color vector length ({len})")]
    BadPeriod { len: usize },
    #[error("residue {residue} has color {color}, outside 1..={m}")]
    ColorOutOfRange {
        residue: usize,
        color: usize,
        m: usize,
    },
    #[error("node budget of {budget} exhausted at period {period}")]
    Budget { period: usize, budget: u64 },
}

fn integer_columns(d: &RestrictionArray) -> Result<Vec<Vec<i64>>, PeriodicError> {
    d.integer_entries().ok_or(PeriodicError::NonIntegral)
}

/// Every residue `r`, column `j` and row `i` such that both `r` and
/// `r + d_ij` carry color `j`. Restrictions longer than the period wrap around;
/// a restriction divisible by the period makes its color unusable.
pub fn verify_periodic(
    p: &PeriodicColoring,
    d: &RestrictionArray,
) -> Result<Vec<Violation>, PeriodicError> {
    let rows = integer_columns(d)?;
    if p.period == 0 || p.colors.len() != p.period {
        return Err(PeriodicError::BadPeriod {
            len: p.colors.len(),
        });
    }
    if let Some((residue, &color)) = p
        .colors
        .iter()
        .enumerate()
        .find(|(_, &c)| c == 0 || c > d.m())
    {
        return Err(PeriodicError::ColorOutOfRange {
            residue,
            color,
            m: d.m(),
        });
    }
    let period = p.period as i64;
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for (j, &dist) in row.iter().enumerate() {
            let color = j + 1;
            for r in 0..period {
                if p.colors[r as usize] == color && p.color_at(r + dist) == color {
                    out.push(Violation {
                        x: Rational::from(r),
                        y: Rational::from(r + dist),
                        color,
                        distance: Rational::from(dist),
                        row: i + 1,
                    });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

fn cyclic_graph(period: usize, d: &RestrictionArray) -> ConflictGraph {
    let mut g = ConflictGraph::new(period, d.m());
    for (value, cols) in d.columns_by_value() {
        let class = g.add_class(ColorMask::from_colors(d.m(), &cols));
        let shift = value
            .to_i64()
            .expect("integrality checked by caller")
            .rem_euclid(period as i64) as usize;
        for r in 0..period {
            g.add_edge(r, (r + shift) % period, class);
        }
    }
    g
}

/// Searches periods `1..=p_max` in order and returns the lexicographically
/// least valid color vector of the smallest feasible period.
pub fn find_periodic(
    d: &RestrictionArray,
    p_max: usize,
) -> Result<Option<PeriodicColoring>, PeriodicError> {
    find_periodic_with_budget(d, p_max, DEFAULT_NODE_BUDGET)
}

/// As [`find_periodic`], with a node budget applied to each period separately.
pub fn find_periodic_with_budget(
    d: &RestrictionArray,
    p_max: usize,
    budget: u64,
) -> Result<Option<PeriodicColoring>, PeriodicError> {
    integer_columns(d)?;
    for period in 1..=p_max {
        let g = cyclic_graph(period, d);
        let (outcome, colors, _) = backtrack(&g, budget);
        match outcome {
            SearchOutcome::Found => {
                let colors = colors
                    .unwrap_or_default()
                    .into_iter()
                    .map(|c| c + 1)
                    .collect();
                return Ok(Some(PeriodicColoring { period, colors }));
            }
            SearchOutcome::Exhausted => {}
            SearchOutcome::OutOfBudget => return Err(PeriodicError::Budget { period, budget }),
        }
    }
    Ok(None)
}

/// Window-search outcome for one array in an experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WindowVerdict {
    /// Some integer window `[a, b]` is not colorable.
    UnsatWindow {
        a: i64,
        b: i64,
    },
    /// Every symmetric window up to `radius` is colorable.
    SatToRadius {
        radius: u64,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayRecord {
    pub array: RestrictionArray,
    pub window_verdict: WindowVerdict,
    pub period: Option<PeriodicColoring>,
    pub period_error: Option<String>,
    /// Colorable on every window searched, yet no period up to `p_max` found.
    pub discrepancy: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    pub radius: u64,
    pub p_max: usize,
    pub records: Vec<ArrayRecord>,
    pub discrepancies: Vec<RestrictionArray>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExperimentError {
    #[error("array {0:?} has both a non-colorable window and a periodic coloring")]
    Inconsistent(RestrictionArray),
}

/// Classifies one array by window search and periodic search, both run to
/// completion so the two verdicts can be cross-checked.
pub fn classify(
    d: &RestrictionArray,
    radius: u64,
    p_max: usize,
    budget: u64,
) -> Result<ArrayRecord, ExperimentError> {
    let window_verdict = match find_unsat_window_with_budget(d, radius, budget) {
        Ok(report) => match report.window {
            Some((a, b)) => WindowVerdict::UnsatWindow { a, b },
            None => WindowVerdict::SatToRadius { radius },
        },
        Err(e) => WindowVerdict::Error {
            message: e.to_string(),
        },
    };
    let (period, period_error) = match find_periodic_with_budget(d, p_max, budget) {
        Ok(p) => (p, None),
        Err(e) => (None, Some(e.to_string())),
    };
    if let Some(p) = &period {
        assert!(
            verify_periodic(p, d).map(|v| v.is_empty()).unwrap_or(false),
            "periodic search returned an invalid coloring for {d:?}"
        );
    }
    if matches!(window_verdict, WindowVerdict::UnsatWindow { .. }) && period.is_some() {
        return Err(ExperimentError::Inconsistent(d.clone()));
    }
    let discrepancy = matches!(window_verdict, WindowVerdict::SatToRadius { .. })
        && period.is_none()
        && period_error.is_none();
    Ok(ArrayRecord {
        array: d.clone(),
        window_verdict,
        period,
        period_error,
        discrepancy,
    })
}

/// Runs [`classify`] over every array of `family`. Arrays are processed in
/// parallel; records keep the family's order.
pub fn periodicity_experiment(
    family: &[RestrictionArray],
    radius: u64,
    p_max: usize,
) -> Result<PeriodicityReport, ExperimentError> {
    let records = family
        .par_iter()
        .map(|d| classify(d, radius, p_max, DEFAULT_NODE_BUDGET))
        .collect::<Result<Vec<_>, _>>()?;
    let discrepancies = records
        .iter()
        .filter(|r| r.discrepancy)
        .map(|r| r.array.clone())
        .collect();
    Ok(PeriodicityReport {
        radius,
        p_max,
        records,
        discrepancies,
    })
}
