//! Conflict graphs over a finite vertex set and the complete backtracking
//! search shared by the finite and periodic solvers.
//!
//! An edge joins two vertices whose distance is restricted for at least one
//! color; it carries the set of colors that may not appear on both ends.

use crate::model::{PointSet, RestrictionArray};
use crate::rational::Rational;

/// A set of 0-based colors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ColorMask {
    words: Vec<u64>,
}

impl ColorMask {
    pub fn empty(m: usize) -> Self {
        ColorMask {
            words: vec![0; m.div_ceil(64)],
        }
    }

    pub fn from_colors(m: usize, colors: &[usize]) -> Self {
        let mut mask = Self::empty(m);
        for &c in colors {
            mask.insert(c);
        }
        mask
    }

    pub fn insert(&mut self, c: usize) {
        self.words[c / 64] |= 1 << (c % 64);
    }

    #[inline]
    pub fn contains(&self, c: usize) -> bool {
        self.words[c / 64] & (1 << (c % 64)) != 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits & (1 << b) != 0)
                .map(move |b| w * 64 + b)
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Edge {
    pub to: usize,
    pub class: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct ConflictGraph {
    m: usize,
    classes: Vec<ColorMask>,
    adj: Vec<Vec<Edge>>,
    unary: Vec<ColorMask>,
}

impl ConflictGraph {
    pub fn new(n: usize, m: usize) -> Self {
        ConflictGraph {
            m,
            classes: Vec::new(),
            adj: vec![Vec::new(); n],
            unary: vec![ColorMask::empty(m); n],
        }
    }

    pub fn add_class(&mut self, mask: ColorMask) -> usize {
        self.classes.push(mask);
        self.classes.len() - 1
    }

    /// A self-loop forbids the class colors on that vertex outright.
    pub fn add_edge(&mut self, u: usize, v: usize, class: usize) {
        if u == v {
            for c in self.classes[class].iter().collect::<Vec<_>>() {
                self.unary[u].insert(c);
            }
            return;
        }
        self.adj[u].push(Edge { to: v, class });
        self.adj[v].push(Edge { to: u, class });
    }

    /// The conflict graph of `d` on the points of `s`; vertex `i` is the
    /// `i`-th smallest point.
    pub fn on_points(s: &PointSet, d: &RestrictionArray) -> Self {
        let mut g = ConflictGraph::new(s.len(), d.m());
        let by_value = d.columns_by_value();
        let values: Vec<(Rational, usize)> = by_value
            .into_iter()
            .map(|(v, cols)| {
                let mask = ColorMask::from_colors(d.m(), &cols);
                (v, g.add_class(mask))
            })
            .collect();
        let points = s.points();
        if points.len() <= values.len() {
            let lookup: std::collections::HashMap<&Rational, usize> =
                values.iter().map(|(v, c)| (v, *c)).collect();
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    let diff = &points[j] - &points[i];
                    if let Some(&class) = lookup.get(&diff) {
                        g.add_edge(i, j, class);
                    }
                }
            }
        } else {
            for (i, x) in points.iter().enumerate() {
                for (dist, class) in &values {
                    if let Some(j) = s.index_of(&(x + dist)) {
                        g.add_edge(i, j, *class);
                    }
                }
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[Edge] {
        &self.adj[v]
    }

    pub fn class(&self, class: usize) -> &ColorMask {
        &self.classes[class]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SearchStats {
    /// Color assignments tried.
    pub nodes: u64,
    /// Deepest prefix of vertices colored at once.
    pub max_depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SearchOutcome {
    Found,
    Exhausted,
    OutOfBudget,
}

struct Search<'a> {
    g: &'a ConflictGraph,
    m: usize,
    budget: u64,
    colors: Vec<usize>,
    forbid: Vec<u32>,
    domain: Vec<usize>,
    trail: Vec<usize>,
    stats: SearchStats,
}

impl Search<'_> {
    fn dfs(&mut self, v: usize) -> SearchOutcome {
        if v == self.colors.len() {
            return SearchOutcome::Found;
        }
        for c in 0..self.m {
            if self.forbid[v * self.m + c] != 0 {
                continue;
            }
            if self.stats.nodes >= self.budget {
                return SearchOutcome::OutOfBudget;
            }
            self.stats.nodes += 1;
            self.stats.max_depth = self.stats.max_depth.max(v + 1);
            self.colors[v] = c;

            let mark = self.trail.len();
            let mut wiped = false;
            for e in &self.g.adj[v] {
                if e.to <= v || !self.g.classes[e.class].contains(c) {
                    continue;
                }
                let idx = e.to * self.m + c;
                self.forbid[idx] += 1;
                self.trail.push(idx);
                if self.forbid[idx] == 1 {
                    self.domain[e.to] -= 1;
                    wiped |= self.domain[e.to] == 0;
                }
            }
            if !wiped {
                match self.dfs(v + 1) {
                    SearchOutcome::Exhausted => {}
                    done => return done,
                }
            }
            while self.trail.len() > mark {
                let idx = self.trail.pop().unwrap();
                self.forbid[idx] -= 1;
                if self.forbid[idx] == 0 {
                    self.domain[idx / self.m] += 1;
                }
            }
        }
        SearchOutcome::Exhausted
    }
}

/// Complete search in ascending vertex order, ascending color order, with
/// forward checking. The first solution found is the lexicographically
/// smallest proper coloring.
pub(crate) fn backtrack(
    g: &ConflictGraph,
    budget: u64,
) -> (SearchOutcome, Option<Vec<usize>>, SearchStats) {
    let n = g.len();
    let m = g.m;
    let mut forbid = vec![0u32; n * m];
    let mut domain = vec![m; n];
    for v in 0..n {
        for c in g.unary[v].iter() {
            forbid[v * m + c] = 1;
            domain[v] -= 1;
        }
    }
    if domain.contains(&0) {
        return (SearchOutcome::Exhausted, None, SearchStats::default());
    }
    let mut search = Search {
        g,
        m,
        budget,
        colors: vec![0; n],
        forbid,
        domain,
        trail: Vec::new(),
        stats: SearchStats::default(),
    };
    let outcome = search.dfs(0);
    let colors = (outcome == SearchOutcome::Found).then(|| search.colors.clone());
    (outcome, colors, search.stats)
}
