//! Enumeration of small integer restriction arrays, normalized up to column
//! permutation and within-column order.

use crate::model::RestrictionArray;
use crate::rational::Rational;

/// Nondecreasing sequences of length `len` over `1..=max`, in lexicographic order.
fn multisets(len: usize, max: i64) -> Vec<Vec<i64>> {
    fn go(len: usize, lo: i64, max: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in lo..=max {
            cur.push(v);
            go(len, v, max, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(len, 1, max, &mut Vec::new(), &mut out);
    out
}

/// Every `k × m` array with entries in `1..=entry_max`, one representative per
/// class under column permutation and reordering within columns. Columns are
/// sorted ascending top to bottom; columns appear in lexicographic order.
pub fn enumerate_arrays(k: usize, m: usize, entry_max: i64) -> Vec<RestrictionArray> {
    if m == 0 || entry_max < 1 {
        return Vec::new();
    }
    let columns = multisets(k, entry_max);
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(m);
    fn go(
        columns: &[Vec<i64>],
        k: usize,
        m: usize,
        lo: usize,
        pick: &mut Vec<usize>,
        out: &mut Vec<RestrictionArray>,
    ) {
        if pick.len() == m {
            let cols = pick
                .iter()
                .map(|&c| columns[c].iter().map(|&v| Rational::from(v)).collect())
                .collect();
            out.push(RestrictionArray::from_columns(k, cols).expect("positive entries"));
            return;
        }
        for c in lo..columns.len() {
            pick.push(c);
            go(columns, k, m, c, pick, out);
            pick.pop();
        }
    }
    if k == 0 {
        out.push(RestrictionArray::unrestricted(m).expect("m > 0"));
        return out;
    }
    go(&columns, k, m, 0, &mut pick, &mut out);
    out
}

/// Every `k × m` array with entries in `1..=entry_max`, without normalization.
pub fn enumerate_all_arrays(k: usize, m: usize, entry_max: i64) -> Vec<RestrictionArray> {
    let cells = k * m;
    let total = (entry_max.max(0) as usize).pow(cells as u32);
    (0..total)
        .map(|mut idx| {
            let mut rows = vec![Vec::with_capacity(m); k];
            for row in rows.iter_mut() {
                for _ in 0..m {
                    row.push(Rational::from((idx % entry_max as usize) as i64 + 1));
                    idx /= entry_max as usize;
                }
            }
            RestrictionArray::with_columns(m, rows).expect("positive entries")
        })
        .collect()
}
