//! Graph separations, the exact iterated separation number, and the separator
//! strategies that drive the solver's divide step.
//!
//! A separation `(A, C)` covers `V` with no edge between `A∖C` and `C∖A`; it
//! is admissible for recursion when neither `A∖C` nor `C∖A` is all of `V`.
//! Under that rule `s(∅) = 0`, `s(K_1) = 1`, and
//! `s(G) = min |A∩C| + max(s(G[A∖C]), s(G[C∖A]))`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::complex::{SkeletonGraph, Vertex};
use crate::grid::grid_point;

/// Largest graph the exact search accepts by default.
pub const EXACT_CAP: usize = 12;
/// Hard limit of the bitmask representation.
const EXACT_HARD_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeparationError {
    #[error("vertex {0} is covered by neither A nor C")]
    Uncovered(Vertex),
    #[error("vertex {0} is not in the graph")]
    Foreign(Vertex),
    #[error("edge {0}-{1} crosses from A∖C to C∖A")]
    CrossingEdge(Vertex, Vertex),
    #[error("TooLargeForExact: {size} vertices exceed the cap of {cap}")]
    TooLargeForExact { size: usize, cap: usize },
}

/// A validated separation, stored as three disjoint sorted parts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Separation {
    a_only: Vec<Vertex>,
    separator: Vec<Vertex>,
    c_only: Vec<Vertex>,
}

impl Separation {
    fn from_parts(mut a_only: Vec<Vertex>, mut separator: Vec<Vertex>, mut c_only: Vec<Vertex>) -> Self {
        a_only.sort_unstable();
        separator.sort_unstable();
        c_only.sort_unstable();
        Separation {
            a_only,
            separator,
            c_only,
        }
    }

    /// `A∖C`
    pub fn a_only(&self) -> &[Vertex] {
        &self.a_only
    }

    /// `C∖A`
    pub fn c_only(&self) -> &[Vertex] {
        &self.c_only
    }

    /// `A∩C`
    pub fn separator(&self) -> &[Vertex] {
        &self.separator
    }

    pub fn a(&self) -> BTreeSet<Vertex> {
        self.a_only.iter().chain(&self.separator).copied().collect()
    }

    pub fn c(&self) -> BTreeSet<Vertex> {
        self.c_only.iter().chain(&self.separator).copied().collect()
    }

    pub fn len(&self) -> usize {
        self.a_only.len() + self.separator.len() + self.c_only.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Neither side-only part is the whole vertex set.
    pub fn is_admissible(&self) -> bool {
        let n = self.len();
        n == 0 || (self.a_only.len() != n && self.c_only.len() != n)
    }
}

/// Checks that `(a, c)` is a separation of `g`.
pub fn validate_separation(
    g: &SkeletonGraph,
    a: &BTreeSet<Vertex>,
    c: &BTreeSet<Vertex>,
) -> Result<Separation, SeparationError> {
    if let Some(&v) = a.iter().chain(c).find(|v| !g.contains(**v)) {
        return Err(SeparationError::Foreign(v));
    }
    if let Some(&v) = g.vertices().iter().find(|v| !a.contains(v) && !c.contains(v)) {
        return Err(SeparationError::Uncovered(v));
    }
    let a_only: Vec<Vertex> = a.difference(c).copied().collect();
    let c_only: BTreeSet<Vertex> = c.difference(a).copied().collect();
    for &u in &a_only {
        if let Some(w) = g.neighbors(u).find(|w| c_only.contains(w)) {
            return Err(SeparationError::CrossingEdge(u, w));
        }
    }
    Ok(Separation {
        a_only,
        separator: a.intersection(c).copied().collect(),
        c_only: c_only.into_iter().collect(),
    })
}

/// Witness tree of best separations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationTree {
    pub separation: Separation,
    pub value: u32,
    pub a_side: Option<Box<SeparationTree>>,
    pub c_side: Option<Box<SeparationTree>>,
}

impl SeparationTree {
    /// Sum of separator sizes along the costliest root-to-leaf path; equals `value`.
    pub fn path_cost(&self) -> u32 {
        let child = |t: &Option<Box<SeparationTree>>| t.as_ref().map_or(0, |t| t.path_cost());
        self.separation.separator.len() as u32 + child(&self.a_side).max(child(&self.c_side))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSeparation {
    pub value: u32,
    /// `None` for the empty graph.
    pub tree: Option<SeparationTree>,
}

/// Exact `s(G)` with a witness tree; ties go to the lexicographically smallest
/// separator, then the lexicographically smallest `A∖C`.
pub fn iterated_separation_number(
    g: &SkeletonGraph,
    cap: usize,
) -> Result<ExactSeparation, SeparationError> {
    let table = ExactTable::new(g, cap)?;
    let full = table.full();
    Ok(ExactSeparation {
        value: table.value(full),
        tree: (full != 0).then(|| table.tree(full)),
    })
}

/// Memoized `s` over every vertex subset of a small graph (bitmask by local index).
struct ExactTable<'g> {
    g: &'g SkeletonGraph,
    n: usize,
    nbr: Vec<u32>,
    s: Vec<u8>,
}

fn pc(x: u32) -> u32 {
    x.count_ones()
}

/// Submasks of `u`, including `u` and `0`.
fn submasks(u: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(u);
    std::iter::from_fn(move || {
        let x = next?;
        next = (x != 0).then(|| (x - 1) & u);
        Some(x)
    })
}

/// Compares two subsets as increasing vertex sequences.
fn seq_cmp(a: u32, b: u32) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let p = (a ^ b).trailing_zeros();
    let a_has = (a >> p) & 1 == 1;
    let other = if a_has { b } else { a };
    // the side holding p is smaller unless the other one has already ended
    let holder_smaller = (other >> p) != 0;
    match (a_has, holder_smaller) {
        (true, true) | (false, false) => Ordering::Less,
        _ => Ordering::Greater,
    }
}

impl<'g> ExactTable<'g> {
    fn new(g: &'g SkeletonGraph, cap: usize) -> Result<Self, SeparationError> {
        let n = g.len();
        let cap = cap.min(EXACT_HARD_CAP);
        if n > cap {
            return Err(SeparationError::TooLargeForExact { size: n, cap });
        }
        let adj: Vec<u32> = (0..n)
            .map(|i| g.neighbors_local(i).iter().fold(0u32, |m, &j| m | (1 << j)))
            .collect();
        let size = 1usize << n;
        let mut nbr = vec![0u32; size];
        for x in 1..size {
            let low = (x as u32).trailing_zeros() as usize;
            nbr[x] = nbr[x & (x - 1)] | adj[low];
        }
        let mut s = vec![0u8; size];
        for u in 1..size as u32 {
            let mut best = pc(u);
            for x in submasks(u) {
                if x == u {
                    continue;
                }
                let allowed = u & !x & !nbr[x as usize];
                let base = pc(u) - pc(x);
                let sx = s[x as usize] as u32;
                for y in submasks(allowed) {
                    if y == u {
                        continue;
                    }
                    let cost = base - pc(y) + sx.max(s[y as usize] as u32);
                    best = best.min(cost);
                }
            }
            s[u as usize] = best as u8;
        }
        Ok(ExactTable { g, n, nbr, s })
    }

    fn full(&self) -> u32 {
        if self.n == 0 {
            0
        } else {
            ((1u64 << self.n) - 1) as u32
        }
    }

    fn value(&self, u: u32) -> u32 {
        self.s[u as usize] as u32
    }

    /// Best `(x, y)` = `(A∖C, C∖A)` for `u` under the tie-break rule.
    fn best_split(&self, u: u32) -> (u32, u32) {
        let target = self.value(u);
        let mut best: Option<(u32, u32)> = None;
        let mut consider = |x: u32, y: u32| {
            let sep = u & !x & !y;
            let better = match best {
                None => true,
                Some((bx, by)) => {
                    let bsep = u & !bx & !by;
                    seq_cmp(sep, bsep).then(seq_cmp(x, bx)) == Ordering::Less
                }
            };
            if better {
                best = Some((x, y));
            }
        };
        for x in submasks(u) {
            if x == u {
                continue;
            }
            let allowed = u & !x & !self.nbr[x as usize];
            for y in submasks(allowed) {
                if y == u {
                    continue;
                }
                let cost = pc(u) - pc(x) - pc(y) + self.value(x).max(self.value(y));
                if cost == target {
                    consider(x, y);
                }
            }
        }
        best.expect("A = C = V always attains a finite value")
    }

    fn vertices_of(&self, mask: u32) -> Vec<Vertex> {
        (0..self.n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.g.vertices()[i])
            .collect()
    }

    fn separation(&self, u: u32) -> Separation {
        let (x, y) = self.best_split(u);
        Separation::from_parts(
            self.vertices_of(x),
            self.vertices_of(u & !x & !y),
            self.vertices_of(y),
        )
    }

    fn tree(&self, u: u32) -> SeparationTree {
        let (x, y) = self.best_split(u);
        let child = |m: u32| (m != 0).then(|| Box::new(self.tree(m)));
        SeparationTree {
            separation: Separation::from_parts(
                self.vertices_of(x),
                self.vertices_of(u & !x & !y),
                self.vertices_of(y),
            ),
            value: self.value(u),
            a_side: child(x),
            c_side: child(y),
        }
    }
}

/// How the solver picks separations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparatorStrategy {
    /// Best separation from the exact search; graphs above `cap` fall back to `BfsLevel`.
    Exact { cap: usize },
    /// Median line of the triangular grid `V_m` (ids packed as in [`crate::grid`]).
    GridLine { m: u32 },
    /// Smallest balanced BFS level.
    BfsLevel,
}

/// Strategy names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Exact,
    GridLine,
    BfsLevel,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Exact => "exact",
            StrategyKind::GridLine => "gridline",
            StrategyKind::BfsLevel => "bfs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Some(StrategyKind::Exact),
            "gridline" | "grid" => Some(StrategyKind::GridLine),
            "bfs" | "bfslevel" => Some(StrategyKind::BfsLevel),
            _ => None,
        }
    }

    /// `m` is only used by `GridLine`.
    pub fn strategy(self, m: u32) -> SeparatorStrategy {
        match self {
            StrategyKind::Exact => SeparatorStrategy::Exact { cap: EXACT_CAP },
            StrategyKind::GridLine => SeparatorStrategy::GridLine { m },
            StrategyKind::BfsLevel => SeparatorStrategy::BfsLevel,
        }
    }
}

impl SeparatorStrategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            SeparatorStrategy::Exact { .. } => StrategyKind::Exact,
            SeparatorStrategy::GridLine { .. } => StrategyKind::GridLine,
            SeparatorStrategy::BfsLevel => StrategyKind::BfsLevel,
        }
    }
}

/// A valid, admissible separation of `g` chosen by `strategy`.
pub fn best_separation(g: &SkeletonGraph, strategy: &SeparatorStrategy) -> Separation {
    if g.is_empty() {
        return Separation::default();
    }
    match *strategy {
        SeparatorStrategy::Exact { cap } => match ExactTable::new(g, cap) {
            Ok(t) => t.separation(t.full()),
            Err(_) => bfs_level(g),
        },
        SeparatorStrategy::GridLine { m } => grid_line(g, m).unwrap_or_else(|| bfs_level(g)),
        SeparatorStrategy::BfsLevel => bfs_level(g),
    }
}

/// Chooses, over the three line families `i = c`, `j = c`, `i + j = c`, the
/// line with the fewest vertices among those leaving at most `2n/3` on each
/// side; ties prefer the more balanced cut. `None` if some vertex is not a
/// grid point or the result is not a separation of `g`.
fn grid_line(g: &SkeletonGraph, m: u32) -> Option<Separation> {
    let n = g.len();
    let coords: Vec<[u32; 3]> = g
        .vertices()
        .iter()
        .map(|&v| grid_point(m, v).map(|p| [p.i, p.j, p.i + p.j]))
        .collect::<Option<_>>()?;
    // (separator size, larger side, direction, line value)
    let mut best: Option<(usize, usize, usize, u32)> = None;
    for dir in 0..3 {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for c in &coords {
            *counts.entry(c[dir]).or_default() += 1;
        }
        let mut before = 0usize;
        for (&value, &cnt) in &counts {
            let after = n - before - cnt;
            if 3 * before <= 2 * n && 3 * after <= 2 * n {
                let key = (cnt, before.max(after), dir, value);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
            before += cnt;
        }
    }
    let (_, _, dir, value) = best?;
    let (mut a, mut s, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for (&v, k) in g.vertices().iter().zip(&coords) {
        match k[dir].cmp(&value) {
            Ordering::Less => a.push(v),
            Ordering::Equal => s.push(v),
            Ordering::Greater => c.push(v),
        }
    }
    let sep = Separation::from_parts(a, s, c);
    is_separation_of(g, &sep).then_some(sep)
}

fn is_separation_of(g: &SkeletonGraph, sep: &Separation) -> bool {
    let c_only: BTreeSet<Vertex> = sep.c_only.iter().copied().collect();
    sep.len() == g.len()
        && sep
            .a_only
            .iter()
            .all(|&u| g.neighbors(u).all(|w| !c_only.contains(&w)))
}

fn components(g: &SkeletonGraph) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut k = 0;
        while k < comp.len() {
            let x = comp[k];
            k += 1;
            for &y in g.neighbors_local(x) {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    comp.push(y as usize);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn bfs_levels(g: &SkeletonGraph, root: usize) -> Vec<Vec<usize>> {
    let mut dist = vec![usize::MAX; g.len()];
    dist[root] = 0;
    let mut levels: Vec<Vec<usize>> = vec![vec![root]];
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors_local(x) {
            let y = y as usize;
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                if levels.len() <= dist[y] {
                    levels.push(Vec::new());
                }
                levels[dist[y]].push(y);
                queue.push_back(y);
            }
        }
    }
    levels
}

/// Disconnected graphs split by whole components with an empty separator;
/// connected ones cut at the smallest BFS level (from a pseudo-peripheral
/// vertex) that leaves at most `2n/3` vertices on each side.
fn bfs_level(g: &SkeletonGraph) -> Separation {
    let n = g.len();
    let verts = |idx: &[usize]| idx.iter().map(|&i| g.vertices()[i]).collect::<Vec<_>>();
    let comps = components(g);
    if comps.len() > 1 {
        let mut order: Vec<&Vec<usize>> = comps.iter().collect();
        order.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let (mut a, mut c) = (Vec::new(), Vec::new());
        for comp in order {
            if a.len() <= c.len() {
                a.extend(verts(comp));
            } else {
                c.extend(verts(comp));
            }
        }
        return Separation::from_parts(a, Vec::new(), c);
    }
    let first = bfs_levels(g, 0);
    let far = *first.last().and_then(|l| l.iter().min()).unwrap_or(&0);
    let levels = bfs_levels(g, far);
    // (balanced?, sep size or side, side or sep size, level)
    let mut best: Option<(bool, usize, usize, usize)> = None;
    let mut before = 0usize;
    for (k, level) in levels.iter().enumerate() {
        let after = n - before - level.len();
        let side = before.max(after);
        let balanced = 3 * side <= 2 * n;
        let key = if balanced {
            (false, level.len(), side, k)
        } else {
            (true, side, level.len(), k)
        };
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
        before += level.len();
    }
    let k = best.expect("connected nonempty graph has a level").3;
    let a: Vec<usize> = levels[..k].iter().flatten().copied().collect();
    let c: Vec<usize> = levels[k + 1..].iter().flatten().copied().collect();
    Separation::from_parts(verts(&a), verts(&levels[k]), verts(&c))
}

/// Separator-size budget `6√(g·n) + 2√(2n) + 1` for a genus-`g` graph on `n` vertices.
pub fn ght_budget(n: usize, genus: usize) -> f64 {
    let (n, g) = (n as f64, genus as f64);
    6.0 * (g * n).sqrt() + 2.0 * (2.0 * n).sqrt() + 1.0
}

/// Solution of `λ = 1 + λ·√(2/3)`.
pub fn separation_lambda() -> f64 {
    1.0 / (1.0 - (2.0f64 / 3.0).sqrt())
}

/// Upper bound `λ(6√(g·n) + 2√(2n)) + log_{3/2} n` on `s(G)`.
pub fn iterated_separation_bound(n: usize, genus: usize) -> f64 {
    let (nf, g) = (n as f64, genus as f64);
    separation_lambda() * (6.0 * (g * nf).sqrt() + 2.0 * (2.0 * nf).sqrt()) + nf.ln() / 1.5f64.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[Vertex]) -> BTreeSet<Vertex> {
        v.iter().copied().collect()
    }

    fn path(n: u32) -> SkeletonGraph {
        SkeletonGraph::new(0..n, (1..n).map(|i| (i - 1, i)))
    }

    fn complete(n: u32) -> SkeletonGraph {
        SkeletonGraph::new(0..n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    #[test]
    fn validate_examples() {
        let (u, v, w) = (1, 2, 3);
        let p = SkeletonGraph::new([u, v, w], [(u, v), (v, w)]);
        let sep = validate_separation(&p, &set(&[u, v]), &set(&[v, w])).unwrap();
        assert_eq!(sep.separator(), &[v]);
        let e = SkeletonGraph::new([u, v], [(u, v)]);
        assert_eq!(
            validate_separation(&e, &set(&[u]), &set(&[v])),
            Err(SeparationError::CrossingEdge(u, v))
        );
        let k3 = complete(3);
        let sep = validate_separation(&k3, &set(&[0, 1, 2]), &set(&[1])).unwrap();
        assert_eq!(sep.separator(), &[1]);
        assert_eq!(
            validate_separation(&k3, &set(&[0]), &set(&[1])),
            Err(SeparationError::Uncovered(2))
        );
        assert_eq!(
            validate_separation(&k3, &set(&[0, 1, 2, 9]), &set(&[])),
            Err(SeparationError::Foreign(9))
        );
    }

    #[test]
    fn exact_small_values() {
        assert_eq!(iterated_separation_number(&path(1), EXACT_CAP).unwrap().value, 1);
        assert_eq!(iterated_separation_number(&path(2), EXACT_CAP).unwrap().value, 2);
        assert_eq!(iterated_separation_number(&complete(3), EXACT_CAP).unwrap().value, 3);
        assert_eq!(iterated_separation_number(&path(3), EXACT_CAP).unwrap().value, 2);
        let empty = SkeletonGraph::default();
        let r = iterated_separation_number(&empty, EXACT_CAP).unwrap();
        assert_eq!((r.value, r.tree), (0, None));
    }

    #[test]
    fn exact_cap_enforced() {
        assert_eq!(
            iterated_separation_number(&path(13), 12),
            Err(SeparationError::TooLargeForExact { size: 13, cap: 12 })
        );
    }

    #[test]
    fn witness_tree_is_consistent() {
        let g = path(7);
        let r = iterated_separation_number(&g, EXACT_CAP).unwrap();
        let t = r.tree.unwrap();
        assert_eq!(t.value, r.value);
        assert_eq!(t.path_cost(), r.value);
        validate_separation(&g, &t.separation.a(), &t.separation.c()).unwrap();
    }

    #[test]
    fn exact_tie_break_is_lexicographic() {
        // path 0-1-2 has value 2; every optimal split uses separator {1}, and
        // the smallest A∖C among them is empty (two isolated vertices cost 1)
        let t = iterated_separation_number(&path(3), EXACT_CAP).unwrap().tree.unwrap();
        assert_eq!(t.separation.separator(), &[1]);
        assert_eq!(t.separation.a_only(), &[] as &[Vertex]);
        assert_eq!(t.separation.c_only(), &[0, 2]);
        assert_eq!(t.c_side.unwrap().separation.separator(), &[] as &[Vertex]);
    }

    #[test]
    fn seq_cmp_matches_vec_order() {
        let to_vec = |m: u32| (0..8).filter(|i| m >> i & 1 == 1).collect::<Vec<u32>>();
        for a in 0..256u32 {
            for b in 0..256u32 {
                assert_eq!(seq_cmp(a, b), to_vec(a).cmp(&to_vec(b)), "{a} {b}");
            }
        }
    }

    #[test]
    fn bfs_examples() {
        let sep = best_separation(&path(7), &SeparatorStrategy::BfsLevel);
        assert_eq!(sep.separator(), &[3]);
        let k3 = complete(3);
        for strategy in [
            SeparatorStrategy::BfsLevel,
            SeparatorStrategy::Exact { cap: EXACT_CAP },
            SeparatorStrategy::GridLine { m: 1 },
        ] {
            let sep = best_separation(&k3, &strategy);
            assert!(!sep.separator().is_empty());
            assert!(sep.is_admissible());
            validate_separation(&k3, &sep.a(), &sep.c()).unwrap();
        }
    }

    #[test]
    fn disconnected_graph_uses_empty_separator() {
        let g = SkeletonGraph::new(0..6, [(0, 1), (1, 2), (3, 4)]);
        let sep = best_separation(&g, &SeparatorStrategy::BfsLevel);
        assert!(sep.separator().is_empty());
        assert!(sep.is_admissible());
        validate_separation(&g, &sep.a(), &sep.c()).unwrap();
    }

    #[test]
    fn budget_values() {
        assert!((ght_budget(128, 0) - 33.0).abs() < 1e-12);
        assert!((ght_budget(1, 0) - (2.0 * 2f64.sqrt() + 1.0)).abs() < 1e-12);
        let l = separation_lambda();
        assert!((l - (1.0 + l * (2.0f64 / 3.0).sqrt())).abs() < 1e-12);
        assert!((l - 5.449).abs() < 1e-3);
    }
}
