//! Instances, colorings and the coloring verifier.
//!
//! A [`RestrictionArray`] has `k` rows and `m` columns. Column `j` lists the
//! restrictions of color `C_j`: two points at one of those distances may not
//! both receive `C_j`. Row order inside a column carries no meaning, and a
//! value repeated within one column restricts only once.
//!
//! Colors are 1-based everywhere in the public surface (`1..=m`).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("an array needs at least one column")]
    NoColumns,
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("declared k = {declared} but {actual} rows were given")]
    RowCount { declared: usize, actual: usize },
    #[error("entry at row {row}, column {col} is {value}, restrictions must be positive")]
    NonPositiveEntry {
        row: usize,
        col: usize,
        value: Rational,
    },
    #[error("point {0} occurs twice")]
    DuplicatePoint(Rational),
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("point {0} has no color")]
    Uncolored(Rational),
    #[error("colored point {0} is not in the point set")]
    UnknownPoint(Rational),
    #[error("point {point} has color {color}, outside 1..={m}")]
    ColorOutOfRange {
        point: Rational,
        color: usize,
        m: usize,
    },
}

/// A `k × m` array of positive rational restrictions, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawArray", into = "RawArray")]
pub struct RestrictionArray {
    k: usize,
    m: usize,
    entries: Vec<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct RawArray {
    k: usize,
    m: usize,
    entries: Vec<Vec<Rational>>,
}

impl TryFrom<RawArray> for RestrictionArray {
    type Error = ModelError;
    fn try_from(raw: RawArray) -> Result<Self, ModelError> {
        if raw.entries.len() != raw.k {
            return Err(ModelError::RowCount {
                declared: raw.k,
                actual: raw.entries.len(),
            });
        }
        RestrictionArray::with_columns(raw.m, raw.entries)
    }
}

impl From<RestrictionArray> for RawArray {
    fn from(a: RestrictionArray) -> Self {
        RawArray {
            k: a.k,
            m: a.m,
            entries: a.entries,
        }
    }
}

impl RestrictionArray {
    /// Builds an array from its rows. At least one row is required to infer
    /// `m`; use [`RestrictionArray::unrestricted`] for `k = 0`.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        let m = rows.first().map(Vec::len).ok_or(ModelError::NoColumns)?;
        Self::with_columns(m, rows)
    }

    pub fn with_columns(m: usize, rows: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        if m == 0 {
            return Err(ModelError::NoColumns);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::RaggedRow {
                    row: i,
                    len: row.len(),
                    expected: m,
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_positive()) {
                return Err(ModelError::NonPositiveEntry {
                    row: i,
                    col: j,
                    value: row[j].clone(),
                });
            }
        }
        Ok(RestrictionArray {
            k: rows.len(),
            m,
            entries: rows,
        })
    }

    /// Builds an array from integer rows; handy for literals.
    pub fn from_ints(rows: &[&[i64]]) -> Result<Self, ModelError> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from(v)).collect())
                .collect(),
        )
    }

    /// Builds an array from its columns, each of length `k`.
    pub fn from_columns(k: usize, columns: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        let m = columns.len();
        if m == 0 {
            return Err(ModelError::NoColumns);
        }
        let mut rows = vec![Vec::with_capacity(m); k];
        for (j, col) in columns.into_iter().enumerate() {
            if col.len() != k {
                return Err(ModelError::RaggedRow {
                    row: j,
                    len: col.len(),
                    expected: k,
                });
            }
            for (i, v) in col.into_iter().enumerate() {
                rows[i].push(v);
            }
        }
        Self::with_columns(m, rows)
    }

    /// The `0 × m` array: no restrictions at all.
    pub fn unrestricted(m: usize) -> Result<Self, ModelError> {
        Self::with_columns(m, Vec::new())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row][col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &Rational> + '_ {
        self.entries.iter().map(move |row| &row[col])
    }

    pub fn columns(&self) -> Vec<Vec<Rational>> {
        (0..self.m)
            .map(|j| self.column(j).cloned().collect())
            .collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (i, j, v)))
    }

    /// Every distinct value, mapped to the `(row, col)` cells (0-based) holding it.
    pub fn cells_by_value(&self) -> BTreeMap<Rational, Vec<(usize, usize)>> {
        let mut map: BTreeMap<Rational, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, j, v) in self.entries() {
            map.entry(v.clone()).or_default().push((i, j));
        }
        map
    }

    /// Every distinct value, mapped to the sorted set of columns (0-based)
    /// restricting it.
    pub fn columns_by_value(&self) -> BTreeMap<Rational, Vec<usize>> {
        self.cells_by_value()
            .into_iter()
            .map(|(v, cells)| {
                let cols: BTreeSet<usize> = cells.into_iter().map(|(_, j)| j).collect();
                (v, cols.into_iter().collect())
            })
            .collect()
    }

    /// Integer view of the entries, if every entry is an integer that fits.
    pub fn integer_entries(&self) -> Option<Vec<Vec<i64>>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(Rational::to_i64).collect())
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.entries().all(|(_, _, v)| v.is_integer())
    }

    /// Restrict to the given columns (0-based, in the given order).
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self, ModelError> {
        let rows = self
            .entries
            .iter()
            .map(|row| cols.iter().map(|&j| row[j].clone()).collect())
            .collect();
        Self::with_columns(cols.len(), rows)
    }
}

/// The largest number of columns in which any single value appears.
pub fn rho(d: &RestrictionArray) -> usize {
    d.columns_by_value()
        .values()
        .map(Vec::len)
        .max()
        .unwrap_or(0)
}

pub fn distinct_restrictions(d: &RestrictionArray) -> BTreeSet<Rational> {
    d.entries().map(|(_, _, v)| v.clone()).collect()
}

/// A finite set of points on the line, sorted ascending, no duplicates.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct PointSet {
    points: Vec<Rational>,
}

impl TryFrom<Vec<Rational>> for PointSet {
    type Error = ModelError;
    fn try_from(points: Vec<Rational>) -> Result<Self, ModelError> {
        PointSet::new(points)
    }
}

impl From<PointSet> for Vec<Rational> {
    fn from(s: PointSet) -> Self {
        s.points
    }
}

impl PointSet {
    /// Sorts the input; duplicates are rejected.
    pub fn new(mut points: Vec<Rational>) -> Result<Self, ModelError> {
        points.sort();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::DuplicatePoint(w[0].clone()));
        }
        Ok(PointSet { points })
    }

    /// Sorts and silently drops duplicates.
    pub fn from_unsorted(points: impl IntoIterator<Item = Rational>) -> Self {
        let set: BTreeSet<Rational> = points.into_iter().collect();
        PointSet {
            points: set.into_iter().collect(),
        }
    }

    /// The integers `a, a+1, ..., b` (empty if `b < a`).
    pub fn integer_range(a: i64, b: i64) -> Self {
        PointSet {
            points: (a..=b).map(Rational::from).collect(),
        }
    }

    pub fn from_ints(points: &[i64]) -> Result<Self, ModelError> {
        Self::new(points.iter().map(|&x| Rational::from(x)).collect())
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.points.binary_search(x).is_ok()
    }

    pub fn index_of(&self, x: &Rational) -> Option<usize> {
        self.points.binary_search(x).ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.points.iter()
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Rational;
    type IntoIter = std::slice::Iter<'a, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Assignment of a color in `1..=m` to each point.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Coloring {
    colors: BTreeMap<Rational, usize>,
}

impl Coloring {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pairs each point with the color at the same position.
    pub fn from_parts(points: &PointSet, colors: &[usize]) -> Self {
        assert_eq!(points.len(), colors.len(), "one color per point");
        Coloring {
            colors: points.iter().cloned().zip(colors.iter().copied()).collect(),
        }
    }

    pub fn set(&mut self, x: Rational, color: usize) {
        self.colors.insert(x, color);
    }

    pub fn get(&self, x: &Rational) -> Option<usize> {
        self.colors.get(x).copied()
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, usize)> + '_ {
        self.colors.iter().map(|(x, &c)| (x, c))
    }

    /// The coloring restricted to the points of `s` that it colors.
    pub fn restrict_to(&self, s: &PointSet) -> Coloring {
        Coloring {
            colors: s
                .iter()
                .filter_map(|x| self.get(x).map(|c| (x.clone(), c)))
                .collect(),
        }
    }

    /// Relabels every point `x` to `c·x`.
    pub fn scaled(&self, c: &Rational) -> Coloring {
        Coloring {
            colors: self.colors.iter().map(|(x, &col)| (x * c, col)).collect(),
        }
    }
}

/// Two points at a restricted distance sharing the restricted color.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub x: Rational,
    pub y: Rational,
    /// 1-based color index.
    pub color: usize,
    pub distance: Rational,
    /// 1-based row index of the entry equal to `distance` in column `color`.
    pub row: usize,
}

/// Checks `coloring` against `d` on `s`, returning every violated
/// `(pair, color, row)` triple sorted by `x`, then `y`, then color, then row.
pub fn verify_coloring(
    s: &PointSet,
    coloring: &Coloring,
    d: &RestrictionArray,
) -> Result<Vec<Violation>, VerifyError> {
    for x in s {
        match coloring.get(x) {
            None => return Err(VerifyError::Uncolored(x.clone())),
            Some(c) if c == 0 || c > d.m() => {
                return Err(VerifyError::ColorOutOfRange {
                    point: x.clone(),
                    color: c,
                    m: d.m(),
                })
            }
            Some(_) => {}
        }
    }
    if coloring.len() != s.len() {
        if let Some((x, _)) = coloring.iter().find(|(x, _)| !s.contains(x)) {
            return Err(VerifyError::UnknownPoint(x.clone()));
        }
    }

    let cells = d.cells_by_value();
    let index: HashMap<&Rational, usize> = s.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let colors: Vec<usize> = s.iter().map(|x| coloring.get(x).unwrap_or(0)).collect();

    let mut out = Vec::new();
    for (i, x) in s.iter().enumerate() {
        for (dist, cells) in &cells {
            let y = x + dist;
            let Some(&jdx) = index.get(&y) else { continue };
            let shared = colors[i];
            if colors[jdx] != shared {
                continue;
            }
            for &(row, col) in cells {
                if col + 1 == shared {
                    out.push(Violation {
                        x: x.clone(),
                        y: y.clone(),
                        color: shared,
                        distance: dist.clone(),
                        row: row + 1,
                    });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Multiplies every entry and point by `c > 0`.
pub fn scale_instance(
    d: &RestrictionArray,
    s: &PointSet,
    c: &Rational,
) -> Result<(RestrictionArray, PointSet), ModelError> {
    if !c.is_positive() {
        return Err(ModelError::NonPositiveScale(c.clone()));
    }
    let rows = d
        .rows()
        .iter()
        .map(|row| row.iter().map(|v| v * c).collect())
        .collect();
    let array = RestrictionArray::with_columns(d.m(), rows)?;
    // Positive scaling preserves order and distinctness.
    let points = PointSet {
        points: s.iter().map(|x| x * c).collect(),
    };
    Ok((array, points))
}

/// Scales by the lcm of all denominators so every entry and point becomes an
/// integer. Returns the scaled instance and the factor used.
pub fn canonicalize(d: &RestrictionArray, s: &PointSet) -> (RestrictionArray, PointSet, BigInt) {
    let factor = d
        .entries()
        .map(|(_, _, v)| v)
        .chain(s.iter())
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let (array, points) = scale_instance(d, s, &Rational::from(factor.clone()))
        .expect("lcm of denominators is positive");
    (array, points, factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn arr(rows: &[&[i64]]) -> RestrictionArray {
        RestrictionArray::from_ints(rows).unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&arr(&[&[1, 1, 2, 3], &[1, 1, 4, 5], &[1, 6, 6, 6]])), 3);
        assert_eq!(rho(&arr(&[&[3, 1, 4, 15, 9, 2, 6]])), 1);
        assert_eq!(rho(&arr(&[&[1, 1, 1], &[2, 3, 4]])), 3);
        assert_eq!(rho(&RestrictionArray::unrestricted(4).unwrap()), 0);
    }

    #[test]
    fn rho_counts_columns_not_cells() {
        // 1 appears three times but only in two columns.
        assert_eq!(rho(&arr(&[&[1, 1], &[1, 2]])), 2);
    }

    #[test]
    fn distinct_examples() {
        let d = arr(&[&[1, 1, 1], &[2, 3, 4]]);
        let set = distinct_restrictions(&d);
        assert_eq!(set, (1..=4).map(Rational::from).collect());
        assert!(set.len() <= d.k() * d.m() - rho(&d) + 1);
        assert_eq!(distinct_restrictions(&arr(&[&[5]])).len(), 1);
        let d = arr(&[&[1, 1, 2, 3], &[1, 1, 4, 5], &[1, 6, 6, 6]]);
        assert_eq!(distinct_restrictions(&d).len(), 6);
        assert!(distinct_restrictions(&d).len() <= d.k() * d.m() - rho(&d) + 1);
    }

    #[test]
    fn array_validation() {
        assert_eq!(
            RestrictionArray::from_ints(&[&[1, 0]]),
            Err(ModelError::NonPositiveEntry {
                row: 0,
                col: 1,
                value: Rational::from(0)
            })
        );
        assert!(matches!(
            RestrictionArray::from_ints(&[&[1, 2], &[3]]),
            Err(ModelError::RaggedRow { row: 1, .. })
        ));
        assert_eq!(
            RestrictionArray::unrestricted(0),
            Err(ModelError::NoColumns)
        );
        let json = r#"{"k":1,"m":2,"entries":[[1,"1/2"]]}"#;
        let d: RestrictionArray = serde_json::from_str(json).unwrap();
        assert_eq!(d.entry(0, 1), &q(1, 2));
        assert!(
            serde_json::from_str::<RestrictionArray>(r#"{"k":2,"m":1,"entries":[[1]]}"#).is_err()
        );
    }

    #[test]
    fn point_set_rejects_duplicates() {
        assert!(PointSet::from_ints(&[3, 1, 3]).is_err());
        let s = PointSet::from_ints(&[3, -1, 2]).unwrap();
        assert_eq!(
            s.points(),
            &[Rational::from(-1), Rational::from(2), Rational::from(3)]
        );
    }

    #[test]
    fn verify_single_point() {
        let s = PointSet::from_ints(&[0]).unwrap();
        let t = Coloring::from_parts(&s, &[1]);
        assert!(verify_coloring(&s, &t, &arr(&[&[1], &[2]]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn verify_reports_forced_violation() {
        let s = PointSet::from_ints(&[0, 1]).unwrap();
        let t = Coloring::from_parts(&s, &[1, 1]);
        let v = verify_coloring(&s, &t, &arr(&[&[1], &[2]])).unwrap();
        assert_eq!(
            v,
            vec![Violation {
                x: Rational::from(0),
                y: Rational::from(1),
                color: 1,
                distance: Rational::from(1),
                row: 1
            }]
        );
    }

    #[test]
    fn verify_clean_two_color_pattern() {
        let s = PointSet::integer_range(0, 3);
        let t = Coloring::from_parts(&s, &[1, 2, 2, 1]);
        assert!(verify_coloring(&s, &t, &arr(&[&[1, 2]]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn verify_reports_one_violation_per_row() {
        let s = PointSet::from_ints(&[0, 1]).unwrap();
        let t = Coloring::from_parts(&s, &[1, 1]);
        let v = verify_coloring(&s, &t, &arr(&[&[1], &[1]])).unwrap();
        assert_eq!(v.iter().map(|v| v.row).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn verify_malformed_inputs() {
        let s = PointSet::from_ints(&[0, 1]).unwrap();
        let d = arr(&[&[1, 2]]);
        let mut t = Coloring::new();
        t.set(Rational::from(0), 1);
        assert_eq!(
            verify_coloring(&s, &t, &d),
            Err(VerifyError::Uncolored(Rational::from(1)))
        );
        t.set(Rational::from(1), 3);
        assert!(matches!(
            verify_coloring(&s, &t, &d),
            Err(VerifyError::ColorOutOfRange { color: 3, .. })
        ));
        t.set(Rational::from(1), 0);
        assert!(matches!(
            verify_coloring(&s, &t, &d),
            Err(VerifyError::ColorOutOfRange { color: 0, .. })
        ));
        t.set(Rational::from(1), 2);
        t.set(Rational::from(7), 2);
        assert_eq!(
            verify_coloring(&s, &t, &d),
            Err(VerifyError::UnknownPoint(Rational::from(7)))
        );
    }

    #[test]
    fn scale_examples() {
        let (d, s) = scale_instance(
            &arr(&[&[1, 2]]),
            &PointSet::integer_range(0, 2),
            &Rational::from(3),
        )
        .unwrap();
        assert_eq!(d, arr(&[&[3, 6]]));
        assert_eq!(s, PointSet::from_ints(&[0, 3, 6]).unwrap());

        let half = RestrictionArray::new(vec![vec![q(1, 2)]]).unwrap();
        let s = PointSet::new(vec![q(0, 1), q(1, 2)]).unwrap();
        let (d, s) = scale_instance(&half, &s, &Rational::from(2)).unwrap();
        assert_eq!(d, arr(&[&[1]]));
        assert_eq!(s, PointSet::integer_range(0, 1));

        assert!(scale_instance(&half, &s, &Rational::from(-1)).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let d = RestrictionArray::new(vec![vec![q(1, 2), q(1, 3)]]).unwrap();
        let s = PointSet::new(vec![q(0, 1), q(1, 6)]).unwrap();
        let (cd, cs, f) = canonicalize(&d, &s);
        assert_eq!(f, BigInt::from(6));
        assert_eq!(cd, arr(&[&[3, 2]]));
        assert_eq!(cs, PointSet::integer_range(0, 1));
        let (bd, bs) = scale_instance(&cd, &cs, &Rational::from(f).recip()).unwrap();
        assert_eq!((bd, bs), (d, s));

        let d = arr(&[&[1, 2]]);
        let s = PointSet::integer_range(0, 2);
        let (cd, cs, f) = canonicalize(&d, &s);
        assert_eq!((cd, cs, f), (d, s, BigInt::from(1)));

        let d = RestrictionArray::new(vec![vec![q(2, 5)]]).unwrap();
        let s = PointSet::new(vec![q(1, 5), q(3, 5)]).unwrap();
        let (cd, cs, f) = canonicalize(&d, &s);
        assert_eq!(f, BigInt::from(5));
        assert_eq!(cd, arr(&[&[2]]));
        assert_eq!(cs, PointSet::from_ints(&[1, 3]).unwrap());
    }
}
