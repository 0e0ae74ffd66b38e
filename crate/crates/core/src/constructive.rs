//! Constructive colorings of finite rational point sets for arrays with
//! enough columns.
//!
//! [`color_line`] recurses on the number of rows. When some restriction `r`
//! is repeated across many columns, the line is cut into half-open intervals
//! of width `r` and the even and odd intervals are colored with disjoint
//! column blocks whose arrays no longer mention `r`. Otherwise repetition is
//! low, the local-lemma condition `16·k·ρ(D) ≤ m` holds, and each coset of the
//! group generated by the entries is colored by random resampling.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::ConflictGraph;
use crate::model::{
    canonicalize, distinct_restrictions, rho, verify_coloring, Coloring, PointSet, RestrictionArray,
};
use crate::rational::Rational;
use crate::solver::{decide_finite, SolveError, SolveResult};

pub const DEFAULT_ROUND_CAP: u64 = 100_000;

/// `B_0 = 1`, `B_k = 32·k·B_{k-1} − 16·k`: an upper bound on the number of
/// columns needed to color the line against any `k`-row array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundSequence {
    pub values: Vec<BigUint>,
}

impl BoundSequence {
    pub fn get(&self, k: usize) -> &BigUint {
        &self.values[k]
    }
}

pub fn bound_sequence(k: usize) -> BoundSequence {
    let mut values = vec![BigUint::one()];
    for i in 1..=k {
        let i_big = BigUint::from(i);
        let next = BigUint::from(32u32) * &i_big * &values[i - 1] - BigUint::from(16u32) * &i_big;
        values.push(next);
    }
    BoundSequence { values }
}

/// `32^k · k!`.
pub fn closed_form_bound(k: usize) -> BigUint {
    let factorial: BigUint = (1..=k).map(BigUint::from).product();
    BigUint::from(32u32).pow(k as u32) * factorial
}

fn bound_as_usize(b: &BigUint) -> usize {
    b.to_usize().unwrap_or(usize::MAX)
}

/// Local-lemma quantities for an array: each bad event has probability at
/// most `p = ρ/m²`, the dependency degree is at most `4(km − ρ + 1) − 2`, and
/// `16·k·ρ ≤ m` guarantees `4pΔ < 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LllDiagnostics {
    pub k: usize,
    pub m: usize,
    pub rho: usize,
    pub p: Rational,
    pub delta_bound: u64,
    pub product: Rational,
    pub guarantee: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("diagnostics need at least one row")]
    NoRows,
}

pub fn lll_diagnostics(d: &RestrictionArray) -> Result<LllDiagnostics, DiagnosticsError> {
    let (k, m) = (d.k(), d.m());
    if k == 0 {
        return Err(DiagnosticsError::NoRows);
    }
    let rho = rho(d);
    let p = Rational::new(rho as i64, (m * m) as i64);
    let delta_bound = (4 * (k * m - rho + 1) - 2) as u64;
    let product = Rational::from(4 * delta_bound as i64) * &p;
    Ok(LllDiagnostics {
        k,
        m,
        rho,
        p,
        delta_bound,
        product,
        guarantee: 16 * k * rho <= m,
    })
}

/// Groups the points of `q` by coset of the subgroup generated by the
/// entries of `d`. Points in different classes are never at a restricted
/// distance. Classes are ordered by their smallest point.
pub fn coset_partition(q: &PointSet, d: &RestrictionArray) -> Vec<PointSet> {
    let (cd, cq, _) = canonicalize(d, q);
    let g = cd
        .entries()
        .fold(BigInt::zero(), |acc, (_, _, v)| acc.gcd(v.numer()));
    let mut classes: BTreeMap<BigInt, (usize, Vec<Rational>)> = BTreeMap::new();
    for (i, (x, cx)) in q.iter().zip(cq.iter()).enumerate() {
        // g = 0 only without restrictions: every point is its own class.
        let key = if g.is_zero() {
            cx.numer().clone()
        } else {
            cx.numer().mod_floor(&g)
        };
        classes
            .entry(key)
            .or_insert_with(|| (i, Vec::new()))
            .1
            .push(x.clone());
    }
    let mut out: Vec<(usize, Vec<Rational>)> = classes.into_values().collect();
    out.sort_by_key(|(first, _)| *first);
    out.into_iter()
        .map(|(_, pts)| PointSet::from_unsorted(pts))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("interval width must be positive, got {0}")]
pub struct NonPositiveWidth(pub Rational);

/// Splits `q` by the parity of `floor(x / r)`: points in even intervals
/// `[2n·r, (2n+1)·r)` go to the first set, the rest to the second. No two
/// points of the same part are exactly `r` apart.
pub fn split_by_interval_parity(
    q: &PointSet,
    r: &Rational,
) -> Result<(PointSet, PointSet), NonPositiveWidth> {
    if !r.is_positive() {
        return Err(NonPositiveWidth(r.clone()));
    }
    let inv = r.recip();
    let (even, odd): (Vec<Rational>, Vec<Rational>) = q
        .iter()
        .cloned()
        .partition(|x| (x * &inv).floor().is_even());
    Ok((PointSet::from_unsorted(even), PointSet::from_unsorted(odd)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleTrace {
    pub rounds: u64,
    #[serde(rename = "final")]
    pub final_coloring: Coloring,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MtOutcome {
    Resampled(ResampleTrace),
    /// Resampling hit the round cap; the exact solver decided instead.
    Fallback {
        rounds: u64,
        seed: u64,
        result: SolveResult,
    },
}

impl MtOutcome {
    /// The coloring found either way, if any.
    pub fn coloring(&self) -> Option<&Coloring> {
        match self {
            MtOutcome::Resampled(trace) => Some(&trace.final_coloring),
            MtOutcome::Fallback { result, .. } => result.witness.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MtError {
    #[error("resampling hit the cap of {rounds} rounds and the fallback search failed: {source}")]
    Exhausted { rounds: u64, source: SolveError },
}

/// Seeded resampling: start from a uniformly random coloring, then while any
/// restricted pair shares a restricted color, re-draw the colors of the least
/// such pair (ordered by its points). Falls back to the exact solver after
/// `round_cap` rounds.
pub fn mt_color(
    q: &PointSet,
    d: &RestrictionArray,
    seed: u64,
    round_cap: u64,
) -> Result<MtOutcome, MtError> {
    let graph = ConflictGraph::on_points(q, d);
    let m = d.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut colors: Vec<usize> = (0..q.len()).map(|_| rng.gen_range(0..m)).collect();

    let bad = |colors: &[usize], u: usize, class: usize| graph.class(class).contains(colors[u]);
    let mut violated = std::collections::BTreeSet::new();
    for u in 0..graph.len() {
        for e in graph.neighbors(u) {
            if u < e.to && colors[u] == colors[e.to] && bad(&colors, u, e.class) {
                violated.insert((u, e.to));
            }
        }
    }

    let mut rounds = 0;
    while let Some((u, v)) = violated.first().copied() {
        if rounds == round_cap {
            return match decide_finite(q, d) {
                Ok(result) => Ok(MtOutcome::Fallback {
                    rounds,
                    seed,
                    result,
                }),
                Err(source) => Err(MtError::Exhausted { rounds, source }),
            };
        }
        rounds += 1;
        colors[u] = rng.gen_range(0..m);
        colors[v] = rng.gen_range(0..m);
        for w in [u, v] {
            for e in graph.neighbors(w) {
                let key = (w.min(e.to), w.max(e.to));
                if colors[w] == colors[e.to] && bad(&colors, w, e.class) {
                    violated.insert(key);
                } else {
                    violated.remove(&key);
                }
            }
        }
    }

    let shifted: Vec<usize> = colors.iter().map(|c| c + 1).collect();
    Ok(MtOutcome::Resampled(ResampleTrace {
        rounds,
        final_coloring: Coloring::from_parts(q, &shifted),
        seed,
    }))
}

/// SplitMix64 finalizer, used to derive independent child seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Branch {
    /// No rows: one color for everything.
    Trivial,
    /// Repeated restriction `r`: interval-parity split.
    Split { r: Rational },
    /// Low repetition: coset classes colored by resampling.
    Coset {
        classes: usize,
        resample_rounds: u64,
        fallbacks: usize,
    },
    /// Too few columns for the construction; the exact solver decided.
    Fallback,
}

/// One node of the recursion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub depth: usize,
    pub k: usize,
    pub m: usize,
    pub rho: usize,
    /// `B_{k-1}`, absent when `k = 0`.
    pub previous_bound: Option<BigUint>,
    pub points: usize,
    #[serde(flatten)]
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorLineOutput {
    pub coloring: Coloring,
    pub trace: Vec<BranchRecord>,
    /// True when `m < B_k` and the exact solver produced the coloring.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ColorLineError {
    #[error("the point set is not colorable for this array (m is below the guaranteed bound)")]
    Unsat,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Resample(#[from] MtError),
}

struct LineColorer<'a> {
    bounds: &'a BoundSequence,
    round_cap: u64,
    trace: Vec<BranchRecord>,
    out: Coloring,
}

impl LineColorer<'_> {
    /// Colors `q` against `d`, whose column `j` is column `col_map[j]` of the
    /// top-level array. Requires `d.m() >= B_{d.k()}`.
    fn color(
        &mut self,
        d: &RestrictionArray,
        col_map: &[usize],
        q: &PointSet,
        seed: u64,
        depth: usize,
    ) -> Result<(), ColorLineError> {
        let k = d.k();
        let rho = rho(d);
        let previous_bound = (k > 0).then(|| self.bounds.get(k - 1).clone());
        let mut record = BranchRecord {
            depth,
            k,
            m: d.m(),
            rho,
            previous_bound: previous_bound.clone(),
            points: q.len(),
            branch: Branch::Trivial,
        };

        let Some(prev) = previous_bound else {
            for x in q {
                self.out.set(x.clone(), col_map[0] + 1);
            }
            self.trace.push(record);
            return Ok(());
        };
        let prev = bound_as_usize(&prev);

        if rho >= prev.saturating_mul(2) {
            let columns_by_value = d.columns_by_value();
            let (r, cols) = columns_by_value
                .iter()
                .find(|(_, cols)| cols.len() == rho)
                .expect("rho is attained");
            let reduced: Vec<Vec<Rational>> = cols
                .iter()
                .map(|&j| {
                    let mut col: Vec<Rational> = d.column(j).cloned().collect();
                    let at = col.iter().position(|v| v == r).expect("r in column");
                    col.remove(at);
                    col
                })
                .collect();
            let first = RestrictionArray::from_columns(k - 1, reduced[..prev].to_vec())
                .expect("subarray of a valid array");
            let second = RestrictionArray::from_columns(k - 1, reduced[prev..2 * prev].to_vec())
                .expect("subarray of a valid array");
            let first_map: Vec<usize> = cols[..prev].iter().map(|&j| col_map[j]).collect();
            let second_map: Vec<usize> = cols[prev..2 * prev].iter().map(|&j| col_map[j]).collect();
            let (even, odd) = split_by_interval_parity(q, r).expect("restrictions are positive");

            record.branch = Branch::Split { r: r.clone() };
            self.trace.push(record);
            self.color(&first, &first_map, &even, derive_seed(seed, 0), depth + 1)?;
            self.color(&second, &second_map, &odd, derive_seed(seed, 1), depth + 1)?;
            return Ok(());
        }

        assert!(
            16 * k * rho <= d.m(),
            "low-repetition branch entered with 16·k·ρ = {} > m = {}",
            16 * k * rho,
            d.m()
        );
        let classes = coset_partition(q, d);
        let mut resample_rounds = 0;
        let mut fallbacks = 0;
        for (i, class) in classes.iter().enumerate() {
            let outcome = mt_color(class, d, derive_seed(seed, i as u64), self.round_cap)?;
            match &outcome {
                MtOutcome::Resampled(trace) => resample_rounds += trace.rounds,
                MtOutcome::Fallback { rounds, .. } => {
                    resample_rounds += rounds;
                    fallbacks += 1;
                }
            }
            let coloring = outcome.coloring().ok_or(ColorLineError::Unsat)?;
            for (x, c) in coloring.iter() {
                self.out.set(x.clone(), col_map[c - 1] + 1);
            }
        }
        record.branch = Branch::Coset {
            classes: classes.len(),
            resample_rounds,
            fallbacks,
        };
        self.trace.push(record);
        Ok(())
    }
}

/// Colors `q` against `d`. When `d` has at least `B_k` columns the recursive
/// construction is used; otherwise the exact solver decides and the result
/// is marked as a fallback. Every returned coloring has been verified.
pub fn color_line(
    d: &RestrictionArray,
    q: &PointSet,
    seed: u64,
) -> Result<ColorLineOutput, ColorLineError> {
    color_line_with_cap(d, q, seed, DEFAULT_ROUND_CAP)
}

pub fn color_line_with_cap(
    d: &RestrictionArray,
    q: &PointSet,
    seed: u64,
    round_cap: u64,
) -> Result<ColorLineOutput, ColorLineError> {
    let bounds = bound_sequence(d.k());
    let output = if BigUint::from(d.m()) < *bounds.get(d.k()) {
        let result = decide_finite(q, d)?;
        let coloring = result.witness.ok_or(ColorLineError::Unsat)?;
        ColorLineOutput {
            coloring,
            trace: vec![BranchRecord {
                depth: 0,
                k: d.k(),
                m: d.m(),
                rho: rho(d),
                previous_bound: (d.k() > 0).then(|| bounds.get(d.k() - 1).clone()),
                points: q.len(),
                branch: Branch::Fallback,
            }],
            fallback: true,
        }
    } else {
        let mut colorer = LineColorer {
            bounds: &bounds,
            round_cap,
            trace: Vec::new(),
            out: Coloring::new(),
        };
        let identity: Vec<usize> = (0..d.m()).collect();
        colorer.color(d, &identity, q, seed, 0)?;
        ColorLineOutput {
            coloring: colorer.out,
            trace: colorer.trace,
            fallback: false,
        }
    };
    let violations =
        verify_coloring(q, &output.coloring, d).expect("coloring is total and in range");
    assert!(
        violations.is_empty(),
        "constructed coloring violates {:?}",
        violations[0]
    );
    Ok(output)
}

/// `|distinct(D)| ≤ k·m − ρ(D) + 1`, the count behind the degree bound.
pub fn distinct_count_bound_holds(d: &RestrictionArray) -> bool {
    d.k() == 0 || distinct_restrictions(d).len() <= d.k() * d.m() - rho(d) + 1
}
