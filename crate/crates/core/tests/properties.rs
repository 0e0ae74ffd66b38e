use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linecolor::constructive::{
    color_line, distinct_count_bound_holds, split_by_interval_parity, Branch,
};
use linecolor::periodic::{find_periodic, verify_periodic, PeriodicColoring};
use linecolor::rational::q;
use linecolor::solver::{decide_finite, find_unsat_window};
use linecolor::witnesses::{
    hypersimplex_set, lower_bound_binomial, polygon_set, witness_from_kdistance, KDistanceSet,
};
use linecolor::{
    rho, scale_instance, verify_coloring, Coloring, PointSet, Rational, RestrictionArray, Violation,
};

fn array(rows: Vec<Vec<i64>>) -> RestrictionArray {
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    RestrictionArray::from_ints(&refs).unwrap()
}

/// A `k × m` array with entries in `1..=max`.
fn arb_array(
    k: std::ops::RangeInclusive<usize>,
    m: std::ops::RangeInclusive<usize>,
    max: i64,
) -> impl Strategy<Value = RestrictionArray> {
    (k, m).prop_flat_map(move |(k, m)| {
        prop::collection::vec(prop::collection::vec(1..=max, m), k).prop_map(array)
    })
}

fn arb_points(max_len: usize, span: i64) -> impl Strategy<Value = PointSet> {
    prop::collection::btree_set(0..span, 1..=max_len)
        .prop_map(|s| PointSet::from_ints(&s.into_iter().collect::<Vec<_>>()).unwrap())
}

fn arb_rational_points(max_len: usize) -> impl Strategy<Value = PointSet> {
    prop::collection::vec((-60i64..60, 1i64..5), 1..=max_len)
        .prop_map(|v| PointSet::from_unsorted(v.into_iter().map(|(n, d)| q(n, d))))
}

/// Every pair, every cell: the quadratic definition of a violation.
fn naive_violations(s: &PointSet, t: &Coloring, d: &RestrictionArray) -> Vec<Violation> {
    let mut out = Vec::new();
    for x in s {
        for y in s {
            if y <= x {
                continue;
            }
            let (cx, cy) = (t.get(x).unwrap(), t.get(y).unwrap());
            let dist = y - x;
            for row in 0..d.k() {
                for col in 0..d.m() {
                    if cx == col + 1 && cy == col + 1 && *d.entry(row, col) == dist {
                        out.push(Violation {
                            x: x.clone(),
                            y: y.clone(),
                            color: col + 1,
                            distance: dist.clone(),
                            row: row + 1,
                        });
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Exhaustive enumeration of all `m^n` colorings.
fn brute_force_sat(s: &PointSet, d: &RestrictionArray) -> bool {
    let n = s.len();
    let m = d.m();
    let total = m.pow(n as u32);
    (0..total).any(|mut code| {
        let colors: Vec<usize> = (0..n)
            .map(|_| {
                let c = code % m + 1;
                code /= m;
                c
            })
            .collect();
        naive_violations(s, &Coloring::from_parts(s, &colors), d).is_empty()
    })
}

fn periodic_is_valid(colors: &[usize], d: &RestrictionArray) -> bool {
    let p = PeriodicColoring {
        period: colors.len(),
        colors: colors.to_vec(),
    };
    verify_periodic(&p, d).unwrap().is_empty()
}

fn any_periodic_of_length(p: usize, d: &RestrictionArray) -> bool {
    let m = d.m();
    (0..m.pow(p as u32)).any(|mut code| {
        let colors: Vec<usize> = (0..p)
            .map(|_| {
                let c = code % m + 1;
                code /= m;
                c
            })
            .collect();
        periodic_is_valid(&colors, d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn verify_matches_naive_checker(
        d in arb_array(1..=3, 1..=3, 5),
        s in arb_points(9, 14),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let colors: Vec<usize> = (0..s.len()).map(|_| rng.gen_range(1..=d.m())).collect();
        let t = Coloring::from_parts(&s, &colors);
        prop_assert_eq!(verify_coloring(&s, &t, &d).unwrap(), naive_violations(&s, &t, &d));
    }

    #[test]
    fn rho_ignores_permutations(d in arb_array(1..=4, 1..=5, 6), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = d.rows().to_vec();
        rows.shuffle(&mut rng);
        let by_rows = RestrictionArray::new(rows).unwrap();
        let mut cols = d.columns();
        cols.shuffle(&mut rng);
        let by_cols = RestrictionArray::from_columns(d.k(), cols.clone()).unwrap();
        for col in &mut cols {
            col.shuffle(&mut rng);
        }
        let within = RestrictionArray::from_columns(d.k(), cols).unwrap();
        prop_assert_eq!(rho(&by_rows), rho(&d));
        prop_assert_eq!(rho(&by_cols), rho(&d));
        prop_assert_eq!(rho(&within), rho(&d));
    }

    #[test]
    fn scaling_preserves_colorability(
        d in arb_array(1..=2, 1..=3, 4),
        s in arb_points(7, 10),
        num in 1i64..7,
        den in 1i64..7,
    ) {
        let c = q(num, den);
        let (d2, s2) = scale_instance(&d, &s, &c).unwrap();
        let a = decide_finite(&s, &d).unwrap();
        let b = decide_finite(&s2, &d2).unwrap();
        prop_assert_eq!(a.status, b.status);
        if let Some(t) = a.witness {
            prop_assert!(verify_coloring(&s2, &t.scaled(&c), &d2).unwrap().is_empty());
        }
    }

    #[test]
    fn distinct_count_bound(d in arb_array(1..=4, 1..=6, 8)) {
        prop_assert!(distinct_count_bound_holds(&d));
    }

    #[test]
    fn decide_matches_brute_force(d in arb_array(1..=2, 1..=3, 4), s in arb_points(8, 12)) {
        let result = decide_finite(&s, &d).unwrap();
        prop_assert_eq!(result.is_sat(), brute_force_sat(&s, &d));
        if let Some(t) = &result.witness {
            prop_assert!(verify_coloring(&s, t, &d).unwrap().is_empty());
        }
    }

    #[test]
    fn colorability_is_monotone(
        d in arb_array(1..=2, 1..=3, 4),
        s in arb_points(10, 12),
        keep in prop::collection::vec(any::<bool>(), 10),
    ) {
        let sub = PointSet::from_unsorted(
            s.iter().zip(keep.iter().cycle()).filter(|(_, k)| **k).map(|(x, _)| x.clone()),
        );
        let whole = decide_finite(&s, &d).unwrap();
        let part = decide_finite(&sub, &d).unwrap();
        if let Some(t) = &whole.witness {
            prop_assert!(part.is_sat());
            prop_assert!(verify_coloring(&sub, &t.restrict_to(&sub), &d).unwrap().is_empty());
        }
        if !part.is_sat() {
            prop_assert!(!whole.is_sat());
        }
    }

    #[test]
    fn unsat_windows_are_minimal(d in arb_array(1..=2, 1..=3, 5)) {
        let report = find_unsat_window(&d, 8).unwrap();
        if let Some((a, b)) = report.window {
            prop_assert!(!decide_finite(&PointSet::integer_range(a, b), &d).unwrap().is_sat());
            prop_assert!(decide_finite(&PointSet::integer_range(a + 1, b), &d).unwrap().is_sat());
            prop_assert!(decide_finite(&PointSet::integer_range(a, b - 1), &d).unwrap().is_sat());
        } else {
            prop_assert!(decide_finite(&PointSet::integer_range(-8, 8), &d).unwrap().is_sat());
        }
    }

    #[test]
    fn periodic_colorings_restrict_to_windows(d in arb_array(1..=2, 2..=3, 6), a in -20i64..20) {
        if let Some(p) = find_periodic(&d, 12).unwrap() {
            let (s, t) = p.window(a, a + 3 * p.period as i64 + 10);
            prop_assert!(verify_coloring(&s, &t, &d).unwrap().is_empty());
            for (_, col, v) in d.entries() {
                if (v.to_i64().unwrap() as usize).is_multiple_of(p.period) {
                    prop_assert!(!p.colors.contains(&(col + 1)));
                }
            }
        }
    }

    #[test]
    fn periodic_period_is_minimal(d in arb_array(1..=2, 2..=3, 6)) {
        match find_periodic(&d, 6).unwrap() {
            Some(p) => {
                for shorter in 1..p.period {
                    prop_assert!(!any_periodic_of_length(shorter, &d));
                }
            }
            None => {
                for p in 1..=6 {
                    prop_assert!(!any_periodic_of_length(p, &d));
                }
            }
        }
    }

    #[test]
    fn parity_split_separates(s in arb_rational_points(40), num in 1i64..20, den in 1i64..4) {
        let r = q(num, den);
        let (u, v) = split_by_interval_parity(&s, &r).unwrap();
        prop_assert_eq!(u.len() + v.len(), s.len());
        for part in [&u, &v] {
            for x in part {
                prop_assert!(!part.contains(&(x + &r)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn color_line_is_valid(
        cols in prop::collection::vec(1i64..6, 16),
        s in arb_rational_points(60),
        seed in any::<u64>(),
    ) {
        let d = array(vec![cols]);
        let out = color_line(&d, &s, seed).unwrap();
        prop_assert!(!out.fallback);
        prop_assert!(verify_coloring(&s, &out.coloring, &d).unwrap().is_empty());
        for rec in &out.trace {
            let split = matches!(rec.branch, Branch::Split { .. });
            if let Some(prev) = &rec.previous_bound {
                let prev: usize = prev.try_into().unwrap();
                prop_assert_eq!(split, rec.rho >= 2 * prev);
            }
        }
    }

    #[test]
    fn line_witnesses_agree(s in arb_points(7, 30)) {
        prop_assume!(s.len() >= 2);
        let set = KDistanceSet::from_line(&s);
        let w = witness_from_kdistance(&set).unwrap();
        prop_assert!(w.structural_certificate().is_some());
        prop_assert!(!decide_finite(&s, &w.array).unwrap().is_sat());
    }
}

#[test]
fn hypersimplex_invariants() {
    for n in 1..=5 {
        for k in 1..=n {
            let set = hypersimplex_set(n, k).unwrap();
            let squared = set.distinct_squared_distances().unwrap();
            assert!(squared.len() <= k);
            let allowed: BTreeSet<Rational> =
                (1..=k as i64).map(|j| Rational::from(2 * j)).collect();
            assert!(squared.is_subset(&allowed));
            assert_eq!(
                num_bigint::BigUint::from(set.len()),
                lower_bound_binomial(n, k).unwrap()
            );
        }
    }
}

#[test]
fn polygon_invariants() {
    for k in 1..=6 {
        let set = polygon_set(k).unwrap();
        assert_eq!(set.len(), 2 * k + 1);
        assert_eq!(set.distinct_distance_count(), k);
    }
}
