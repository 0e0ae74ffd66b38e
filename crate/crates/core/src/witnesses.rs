//! Lower-bound witnesses: k-distance sets, the constant-column arrays they
//! induce, and the search for 2-row arrays that cannot color ℤ.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::family::enumerate_arrays;
use crate::model::{PointSet, RestrictionArray};
use crate::periodic::{classify, ExperimentError, PeriodicColoring, WindowVerdict};
use crate::rational::Rational;
use crate::solver::DEFAULT_NODE_BUDGET;

pub const POLYGON_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("need {lo} <= k <= {hi}, got n = {n}, k = {k}")]
    OutOfRange {
        n: usize,
        k: usize,
        lo: usize,
        hi: usize,
    },
}

/// `C(n+1, k)`: every `k`-distance set bound of this size forces at least
/// that many colors in `ℝ^n`.
pub fn lower_bound_binomial(n: usize, k: usize) -> Result<BigUint, DomainError> {
    if n == 0 || k == 0 || k > n + 1 {
        return Err(DomainError::OutOfRange {
            n,
            k,
            lo: 1,
            hi: n + 1,
        });
    }
    Ok(num_integer::binomial(
        BigUint::from(n + 1),
        BigUint::from(k),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coordinates {
    Exact {
        points: Vec<Vec<Rational>>,
    },
    /// Irrational coordinates; distances compared within `tolerance`.
    Approx {
        points: Vec<Vec<f64>>,
        tolerance: f64,
    },
}

/// Points whose pairwise distances take at most `level` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KDistanceSet {
    /// Dimension of the affine space the points span.
    pub dimension: usize,
    pub level: usize,
    #[serde(flatten)]
    pub coordinates: Coordinates,
}

fn squared_distance(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| {
        let diff = x - y;
        acc + &diff * &diff
    })
}

fn float_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Number of clusters in `values` when neighbours closer than `tol` merge.
fn count_within_tolerance(mut values: Vec<f64>, tol: f64) -> usize {
    values.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last: Option<f64> = None;
    for v in values {
        if last.is_none_or(|l| v - l > tol) {
            count += 1;
        }
        last = Some(v);
    }
    count
}

impl KDistanceSet {
    /// A point set on the line; `level` is its number of distinct distances.
    pub fn from_line(points: &PointSet) -> Self {
        let coords: Vec<Vec<Rational>> = points.iter().map(|x| vec![x.clone()]).collect();
        let mut set = KDistanceSet {
            dimension: 1,
            level: 0,
            coordinates: Coordinates::Exact { points: coords },
        };
        set.level = set.distinct_distance_count();
        set
    }

    pub fn len(&self) -> usize {
        match &self.coordinates {
            Coordinates::Exact { points } => points.len(),
            Coordinates::Approx { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact squared distances, for exact coordinates.
    pub fn distinct_squared_distances(&self) -> Option<BTreeSet<Rational>> {
        let Coordinates::Exact { points } = &self.coordinates else {
            return None;
        };
        let mut set = BTreeSet::new();
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                set.insert(squared_distance(a, b));
            }
        }
        Some(set)
    }

    /// Distinct distances: exact for exact coordinates, clustered within the
    /// tolerance otherwise.
    pub fn distinct_distance_count(&self) -> usize {
        match &self.coordinates {
            Coordinates::Exact { .. } => self.distinct_squared_distances().map_or(0, |s| s.len()),
            Coordinates::Approx { points, tolerance } => {
                let mut dists = Vec::new();
                for (i, a) in points.iter().enumerate() {
                    for b in &points[i + 1..] {
                        dists.push(float_distance(a, b));
                    }
                }
                count_within_tolerance(dists, *tolerance)
            }
        }
    }

    /// The 1-D point set, if every point has exactly one exact coordinate.
    pub fn line_points(&self) -> Option<PointSet> {
        match &self.coordinates {
            Coordinates::Exact { points } if points.iter().all(|p| p.len() == 1) => {
                PointSet::new(points.iter().map(|p| p[0].clone()).collect()).ok()
            }
            _ => None,
        }
    }
}

/// The `C(n+1, k)` 0/1 vectors of `ℝ^{n+1}` with exactly `k` ones. They lie in
/// the hyperplane `Σx = k`, so they span an `n`-dimensional affine space, and
/// the squared distance of two of them is `2(k − |A ∩ B|) ∈ {2, 4, …, 2k}`.
pub fn hypersimplex_set(n: usize, k: usize) -> Result<KDistanceSet, DomainError> {
    if k == 0 || k > n {
        return Err(DomainError::OutOfRange { n, k, lo: 1, hi: n });
    }
    fn subsets(
        len: usize,
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..len {
            cur.push(i);
            subsets(len, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut chosen = Vec::new();
    subsets(n + 1, k, 0, &mut Vec::new(), &mut chosen);
    let points = chosen
        .into_iter()
        .map(|set| {
            let mut v = vec![Rational::zero(); n + 1];
            for i in set {
                v[i] = Rational::one();
            }
            v
        })
        .collect();
    Ok(KDistanceSet {
        dimension: n,
        level: k,
        coordinates: Coordinates::Exact { points },
    })
}

/// Vertices of the regular `(2k+1)`-gon on the unit circle; chords take the
/// `k` lengths `2·sin(πj/(2k+1))`, `j = 1..=k`.
pub fn polygon_set(k: usize) -> Result<KDistanceSet, DomainError> {
    if k == 0 {
        return Err(DomainError::OutOfRange {
            n: 2,
            k,
            lo: 1,
            hi: usize::MAX,
        });
    }
    let sides = 2 * k + 1;
    let points = (0..sides)
        .map(|j| {
            let angle = std::f64::consts::TAU * j as f64 / sides as f64;
            vec![angle.cos(), angle.sin()]
        })
        .collect();
    Ok(KDistanceSet {
        dimension: 2,
        level: k,
        coordinates: Coordinates::Approx {
            points,
            tolerance: POLYGON_TOLERANCE,
        },
    })
}

/// What the witness array entries measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Distance,
    /// Used for sets in `ℝ^n`, `n ≥ 2`, whose distances may be irrational.
    SquaredDistance,
}

/// A `t × (s−1)` array, every column listing all `t` distance values of an
/// `s`-point source set. Every pair of source points conflicts in every color,
/// so the `s` points need `s` distinct colors but only `s − 1` exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessInstance {
    pub source: KDistanceSet,
    pub metric: Metric,
    pub array: RestrictionArray,
    pub claim: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PigeonholeCertificate {
    pub points: usize,
    pub colors: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WitnessError {
    #[error("a witness needs at least two points, got {0}")]
    Degenerate(usize),
    #[error("witness arrays need exact coordinates")]
    Approximate,
    #[error("set realizes {found} distances but claims level {level}")]
    LevelExceeded { found: usize, level: usize },
}

pub fn witness_from_kdistance(set: &KDistanceSet) -> Result<WitnessInstance, WitnessError> {
    let s = set.len();
    if s < 2 {
        return Err(WitnessError::Degenerate(s));
    }
    let Some(squared) = set.distinct_squared_distances() else {
        return Err(WitnessError::Approximate);
    };
    if squared.len() > set.level {
        return Err(WitnessError::LevelExceeded {
            found: squared.len(),
            level: set.level,
        });
    }
    let (metric, values): (Metric, Vec<Rational>) = match set.line_points() {
        Some(line) => {
            let mut dists = BTreeSet::new();
            for (i, x) in line.iter().enumerate() {
                for y in &line.points()[i + 1..] {
                    dists.insert(y - x);
                }
            }
            (Metric::Distance, dists.into_iter().collect())
        }
        None => (Metric::SquaredDistance, squared.into_iter().collect()),
    };
    let array = RestrictionArray::from_columns(values.len(), vec![values; s - 1])
        .expect("distances between distinct points are positive");
    Ok(WitnessInstance {
        source: set.clone(),
        metric,
        claim: format!(
            "the {s} source points are not colorable with these {} columns",
            s - 1
        ),
        array,
    })
}

impl WitnessInstance {
    /// Re-derives the pigeonhole argument from scratch: every pair's
    /// (squared) distance must be restricted in every column, and there must
    /// be fewer columns than points.
    pub fn structural_certificate(&self) -> Option<PigeonholeCertificate> {
        let Coordinates::Exact { points } = &self.source.coordinates else {
            return None;
        };
        let columns: Vec<BTreeSet<Rational>> = self
            .array
            .columns()
            .into_iter()
            .map(|c| c.into_iter().collect())
            .collect();
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                let sq = squared_distance(a, b);
                let value = match self.metric {
                    Metric::SquaredDistance => sq,
                    Metric::Distance => (&a[0] - &b[0]).abs(),
                };
                if !columns.iter().all(|c| c.contains(&value)) {
                    return None;
                }
            }
        }
        (points.len() > self.array.m()).then_some(PigeonholeCertificate {
            points: points.len(),
            colors: self.array.m(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsatEntry {
    pub array: RestrictionArray,
    pub window: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicEntry {
    pub array: RestrictionArray,
    pub period: PeriodicColoring,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedEntry {
    pub array: RestrictionArray,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chi2zReport {
    pub entry_max: i64,
    pub columns: usize,
    pub radius: u64,
    pub p_max: usize,
    pub examined: usize,
    /// Arrays with a non-colorable window; each alone shows ℤ needs more
    /// than `columns` colors for two rows.
    pub unsat: Vec<UnsatEntry>,
    pub periodic: Vec<PeriodicEntry>,
    pub unresolved: Vec<UnresolvedEntry>,
}

/// Classifies every `2 × columns` array with entries up to `entry_max`
/// (normalized by column permutation and within-column order). With
/// `columns = 3` non-colorable arrays witness χ̂₂(ℤ) ≥ 4; with `columns = 4`
/// any such array would show χ̂₂(ℤ) ≥ 5.
pub fn chi2z_search(
    entry_max: i64,
    columns: usize,
    radius: u64,
    p_max: usize,
) -> Result<Chi2zReport, ExperimentError> {
    let family = enumerate_arrays(2, columns, entry_max);
    let records = family
        .par_iter()
        .map(|d| classify(d, radius, p_max, DEFAULT_NODE_BUDGET))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Chi2zReport {
        entry_max,
        columns,
        radius,
        p_max,
        examined: records.len(),
        unsat: Vec::new(),
        periodic: Vec::new(),
        unresolved: Vec::new(),
    };
    for rec in records {
        match (rec.window_verdict, rec.period) {
            (WindowVerdict::UnsatWindow { a, b }, _) => report.unsat.push(UnsatEntry {
                array: rec.array,
                window: (a, b),
            }),
            (_, Some(period)) => report.periodic.push(PeriodicEntry {
                array: rec.array,
                period,
            }),
            (verdict, None) => {
                let reason = match (verdict, rec.period_error) {
                    (WindowVerdict::Error { message }, _) => message,
                    (_, Some(message)) => message,
                    _ => format!("colorable to radius {radius}, no period up to {p_max}"),
                };
                report.unresolved.push(UnresolvedEntry {
                    array: rec.array,
                    reason,
                })
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{decide_finite, staircase_array};

    #[test]
    fn binomial_examples() {
        assert_eq!(lower_bound_binomial(3, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(lower_bound_binomial(1, 1).unwrap(), BigUint::from(2u32));
        assert_eq!(lower_bound_binomial(5, 3).unwrap(), BigUint::from(20u32));
        assert!(lower_bound_binomial(2, 4).is_err());
        assert!(lower_bound_binomial(2, 0).is_err());
    }

    #[test]
    fn hypersimplex_examples() {
        let s = hypersimplex_set(2, 1).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(
            s.distinct_squared_distances().unwrap(),
            [Rational::from(2)].into()
        );

        let s = hypersimplex_set(3, 2).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(
            s.distinct_squared_distances().unwrap(),
            [Rational::from(2), Rational::from(4)].into()
        );

        let s = hypersimplex_set(4, 2).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s.distinct_distance_count() <= 2);
        assert!(hypersimplex_set(2, 3).is_err());
    }

    #[test]
    fn polygon_examples() {
        for k in 1..=3 {
            let s = polygon_set(k).unwrap();
            assert_eq!(s.len(), 2 * k + 1);
            assert_eq!(s.distinct_distance_count(), k);
        }
        assert!(matches!(
            witness_from_kdistance(&polygon_set(2).unwrap()),
            Err(WitnessError::Approximate)
        ));
    }

    #[test]
    fn witness_from_three_points() {
        let set = KDistanceSet::from_line(&PointSet::integer_range(0, 2));
        assert_eq!(set.level, 2);
        let w = witness_from_kdistance(&set).unwrap();
        assert_eq!(
            w.array,
            RestrictionArray::from_ints(&[&[1, 1], &[2, 2]]).unwrap()
        );
        assert_eq!(w.metric, Metric::Distance);
        assert!(w.structural_certificate().is_some());
        assert!(!decide_finite(&PointSet::integer_range(0, 2), &w.array)
            .unwrap()
            .is_sat());
    }

    #[test]
    fn witness_reproduces_staircase() {
        for k in 1..=5 {
            let set = KDistanceSet::from_line(&PointSet::integer_range(0, k as i64));
            let w = witness_from_kdistance(&set).unwrap();
            assert_eq!(w.array, staircase_array(k));
        }
    }

    #[test]
    fn witness_from_hypersimplex() {
        let w = witness_from_kdistance(&hypersimplex_set(3, 2).unwrap()).unwrap();
        assert_eq!((w.array.k(), w.array.m()), (2, 5));
        assert_eq!(w.metric, Metric::SquaredDistance);
        assert_eq!(
            w.structural_certificate(),
            Some(PigeonholeCertificate {
                points: 6,
                colors: 5
            })
        );
    }

    #[test]
    fn witness_errors() {
        let single = KDistanceSet::from_line(&PointSet::integer_range(0, 0));
        assert_eq!(
            witness_from_kdistance(&single),
            Err(WitnessError::Degenerate(1))
        );
        let mut set = KDistanceSet::from_line(&PointSet::from_ints(&[0, 1, 3]).unwrap());
        set.level = 2;
        assert!(matches!(
            witness_from_kdistance(&set),
            Err(WitnessError::LevelExceeded { found: 3, level: 2 })
        ));
    }

    #[test]
    fn tampered_witness_has_no_certificate() {
        let set = KDistanceSet::from_line(&PointSet::integer_range(0, 2));
        let mut w = witness_from_kdistance(&set).unwrap();
        w.array = RestrictionArray::from_ints(&[&[1, 1], &[2, 3]]).unwrap();
        assert!(w.structural_certificate().is_none());
    }

    #[test]
    fn chi2z_trivial_family() {
        let report = chi2z_search(1, 3, 6, 6).unwrap();
        assert_eq!(report.examined, 1);
        assert!(report.unsat.is_empty());
        assert_eq!(report.periodic.len(), 1);
        assert_eq!(report.periodic[0].period.period, 2);
    }
}
