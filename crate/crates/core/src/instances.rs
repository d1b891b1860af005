//! Instance families: the regular `m`-subdivision, the `C_b` labelings and
//! their SNAKE encoding `O_b`, the 3-query reduction, and random pseudo-manifolds.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::chain::{label_flow, Label, Labeling};
use crate::complex::{ComplexError, OrientedSimplex, PseudoManifold, Simplex, Vertex};
use crate::grid::{grid_point, grid_size, points, vertex_id, GridPoint};
use crate::oracle::{LabelSource, LabelingOracle};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("m must be at least {min}, got {m}")]
    MTooSmall { m: u32, min: u32 },
    #[error("bit sequence has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid bit {0:?}; expected 0 or 1")]
    InvalidBit(char),
    #[error("SNAKE matrices are capped at m = {cap}, got {m}")]
    CapExceeded { m: u32, cap: u32 },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A binary sequence `b = b_1 … b_len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitSequence {
    bits: Vec<bool>,
}

impl BitSequence {
    pub fn new(bits: Vec<bool>) -> Self {
        BitSequence { bits }
    }

    pub fn zeros(len: usize) -> Self {
        BitSequence::new(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        BitSequence::new(vec![true; len])
    }

    /// The `index`-th sequence of length `len` in lexicographic order.
    pub fn from_index(len: usize, index: u64) -> Self {
        BitSequence::new((0..len).map(|t| (index >> (len - 1 - t)) & 1 == 1).collect())
    }

    /// Inverse of [`Self::from_index`].
    pub fn index(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    /// All sequences of length `len`, lexicographically.
    pub fn all(len: usize) -> impl Iterator<Item = BitSequence> {
        (0..1u64 << len).map(move |k| BitSequence::from_index(len, k))
    }

    pub fn random(rng: &mut SplitMix64, len: usize) -> Self {
        BitSequence::new((0..len).map(|_| rng.bool()).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// `b_t` for `1 ≤ t ≤ len`.
    pub fn bit(&self, t: usize) -> bool {
        self.bits[t - 1]
    }

    /// Number of zeros.
    pub fn w0(&self) -> u32 {
        self.bits.iter().filter(|&&b| !b).count() as u32
    }

    /// Number of ones.
    pub fn w1(&self) -> u32 {
        self.bits.iter().filter(|&&b| b).count() as u32
    }

    /// `w_x` for `x ∈ {0, 1}`.
    pub fn w(&self, x: bool) -> u32 {
        if x {
            self.w1()
        } else {
            self.w0()
        }
    }

    /// `b^t = b_1 … b_t`.
    pub fn prefix(&self, t: usize) -> BitSequence {
        BitSequence::new(self.bits[..t].to_vec())
    }

    /// `|b ∧ b'|`, the longest common prefix length.
    pub fn common_prefix(&self, other: &BitSequence) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Snake points `(w0(b^t) + 1, w1(b^t))` for `t = 0 … len`; point `t` lies
    /// on diagonal `i + j = t + 1`.
    pub fn snake_points(&self) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let (mut w0, mut w1) = (0u32, 0u32);
        out.push(GridPoint::new(1, 0));
        for &b in &self.bits {
            if b {
                w1 += 1;
            } else {
                w0 += 1;
            }
            out.push(GridPoint::new(w0 + 1, w1));
        }
        out
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitSequence {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(InstanceError::InvalidBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitSequence::new)
    }
}

/// Length of `b` for the grid `V_m` (`m − 2`, and 0 when `m < 2`).
pub fn bits_len(m: u32) -> usize {
    m.saturating_sub(2) as usize
}

/// The regular `m`-subdivision of a triangle on `V_m`, coherently oriented.
///
/// Down triangles are ordered `((i,j), (i+1,j), (i,j+1))` and up triangles
/// `((i+1,j), (i+1,j+1), (i,j+1))`.
pub fn regular_subdivision(m: u32) -> Result<PseudoManifold, InstanceError> {
    if m < 1 {
        return Err(InstanceError::MTooSmall { m, min: 1 });
    }
    let id = |i: u32, j: u32| vertex_id(m, GridPoint::new(i, j));
    let mut facets = Vec::with_capacity((m * m) as usize);
    for p in points(m) {
        let (i, j) = (p.i, p.j);
        if i + j < m {
            facets.push(OrientedSimplex::from_ordering(&[id(i, j), id(i + 1, j), id(i, j + 1)])?);
        }
        if i + j + 2 <= m {
            facets.push(OrientedSimplex::from_ordering(&[
                id(i + 1, j),
                id(i + 1, j + 1),
                id(i, j + 1),
            ])?);
        }
    }
    Ok(PseudoManifold::from_oriented(2, &facets)?)
}

/// `C_b(i, j)`; cases are tried in the listed order.
pub fn cb_label(b: &BitSequence, m: u32, p: GridPoint) -> Label {
    cb_label_with(m, p, |q| snake_point_on_diagonal(b, q))
}

fn cb_label_with(m: u32, p: GridPoint, is_snake: impl Fn(GridPoint) -> bool) -> Label {
    let (i, j) = (p.i, p.j);
    if j == 0 && i != 0 {
        1
    } else if i == 0 && j != m {
        2
    } else if i + j == m && j != 0 {
        0
    } else if is_snake(p) {
        1
    } else if j >= 1 && is_snake(GridPoint::new(i + 1, j - 1)) {
        2
    } else {
        0
    }
}

/// Whether `p` is the snake point of `b` on its diagonal.
fn snake_point_on_diagonal(b: &BitSequence, p: GridPoint) -> bool {
    let h = (p.i + p.j) as usize;
    if h == 0 || h > b.len() + 1 {
        return false;
    }
    let pre = &b.bits[..h - 1];
    let w1 = pre.iter().filter(|&&x| x).count() as u32;
    let w0 = (h - 1) as u32 - w1;
    p == GridPoint::new(w0 + 1, w1)
}

fn check_bits(b: &BitSequence, m: u32) -> Result<(), InstanceError> {
    if m < 1 {
        return Err(InstanceError::MTooSmall { m, min: 1 });
    }
    if b.len() != bits_len(m) {
        return Err(InstanceError::LengthMismatch {
            expected: bits_len(m),
            found: b.len(),
        });
    }
    Ok(())
}

/// The labeling `C_b` on `V_m`.
pub fn labeling_cb(b: &BitSequence, m: u32) -> Result<Labeling, InstanceError> {
    check_bits(b, m)?;
    let snake: HashSet<GridPoint> = b.snake_points().into_iter().collect();
    Ok(points(m)
        .map(|p| (vertex_id(m, p), cb_label_with(m, p, |q| snake.contains(&q))))
        .collect())
}

/// The unique fully labeled triangle of `C_b`: `(w0+1, w1), (w0, w1+1), (w0+1, w1+1)`.
pub fn cb_solution(b: &BitSequence) -> [GridPoint; 3] {
    let (w0, w1) = (b.w0(), b.w1());
    [
        GridPoint::new(w0 + 1, w1),
        GridPoint::new(w0, w1 + 1),
        GridPoint::new(w0 + 1, w1 + 1),
    ]
}

/// [`cb_solution`] as a facet of the regular `m`-subdivision; for `m = 1` the
/// single triangle.
pub fn cb_solution_facet(b: &BitSequence, m: u32) -> Simplex {
    if m == 1 {
        return Simplex::new([0, 1, 2]).expect("three distinct points");
    }
    Simplex::new(cb_solution(b).iter().map(|&p| vertex_id(m, p))).expect("three distinct points")
}

/// Points of `V_m` breaking `ℓ(0,k) ≠ 1`, `ℓ(k,0) ≠ 0` or `ℓ(k,m−k) ≠ 2`
/// (unlabeled points count as violations).
pub fn regular_promise_violations(m: u32, l: &Labeling) -> Vec<GridPoint> {
    let mut bad = BTreeSet::new();
    for k in 0..=m {
        let checks = [
            (GridPoint::new(0, k), 1),
            (GridPoint::new(k, 0), 0),
            (GridPoint::new(k, m - k), 2),
        ];
        for (p, forbidden) in checks {
            match l.get(vertex_id(m, p)) {
                Some(x) if x != forbidden => {}
                _ => {
                    bad.insert(p);
                }
            }
        }
    }
    bad.into_iter().collect()
}

/// `C_b` as a closed-form hidden labeling.
#[derive(Debug, Clone)]
pub struct CbRule {
    b: BitSequence,
    m: u32,
    snake: HashSet<GridPoint>,
}

impl CbRule {
    pub fn new(b: BitSequence, m: u32) -> Result<Self, InstanceError> {
        check_bits(&b, m)?;
        let snake = b.snake_points().into_iter().collect();
        Ok(CbRule { b, m, snake })
    }

    pub fn bits(&self) -> &BitSequence {
        &self.b
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

impl LabelSource for CbRule {
    fn contains(&self, v: Vertex) -> bool {
        (v as usize) < grid_size(self.m)
    }

    fn fetch(&mut self, v: Vertex) -> Label {
        self.peek(v)
    }

    fn peek(&self, v: Vertex) -> Label {
        let p = grid_point(self.m, v).expect("checked by contains");
        cb_label_with(self.m, p, |q| self.snake.contains(&q))
    }
}

/// Black-box access to `O_b : V_m → {0, 1}`, counting distinct points read.
#[derive(Debug, Clone)]
pub struct SnakeOracle {
    b: BitSequence,
    m: u32,
    snake: HashSet<GridPoint>,
    queried: HashSet<GridPoint>,
}

impl SnakeOracle {
    pub fn new(b: BitSequence, m: u32) -> Result<Self, InstanceError> {
        if m < 2 {
            return Err(InstanceError::MTooSmall { m, min: 2 });
        }
        check_bits(&b, m)?;
        let snake = b.snake_points().into_iter().collect();
        Ok(SnakeOracle {
            b,
            m,
            snake,
            queried: HashSet::new(),
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `O_b(p)` without counting.
    pub fn value(&self, p: GridPoint) -> u8 {
        self.snake.contains(&p) as u8
    }

    pub fn query(&mut self, p: GridPoint) -> u8 {
        debug_assert!(p.in_grid(self.m));
        self.queried.insert(p);
        self.value(p)
    }

    pub fn count(&self) -> usize {
        self.queried.len()
    }

    /// The SNAKE answer `(w0(b), w1(b))`, for checking.
    pub fn answer(&self) -> (u32, u32) {
        (self.b.w0(), self.b.w1())
    }
}

/// `γ` of the reduction.
pub fn reduction_gamma(a: (u8, u8, u8)) -> Label {
    match a {
        (0, 1, 0) => 1,
        (1, 0, 0) => 2,
        _ => 0,
    }
}

/// The query points `γ1, γ2, γ3` of an interior point `(i, j)`.
pub fn reduction_points(p: GridPoint) -> [Option<GridPoint>; 3] {
    let (i, j) = (p.i, p.j);
    [
        j.checked_sub(1).map(|j1| GridPoint::new(i + 1, j1)),
        Some(p),
        i.checked_sub(1).map(|i1| GridPoint::new(i1, j + 1)),
    ]
}

/// REGULAR 2-SPM labels simulated from a SNAKE oracle: boundary points follow
/// the boundary cases of `C_b`, interior points cost three SNAKE reads.
#[derive(Debug, Clone)]
pub struct ReducedSnakeSource {
    snake: SnakeOracle,
}

impl ReducedSnakeSource {
    pub fn new(snake: SnakeOracle) -> Self {
        ReducedSnakeSource { snake }
    }

    pub fn snake(&self) -> &SnakeOracle {
        &self.snake
    }

    fn label(&self, p: GridPoint, mut read: impl FnMut(GridPoint) -> u8) -> Label {
        let m = self.snake.m;
        if p.on_boundary(m) {
            return cb_label_with(m, p, |_| false);
        }
        let [g1, g2, g3] = reduction_points(p).map(|q| q.filter(|q| q.in_grid(m)).map_or(0, &mut read));
        reduction_gamma((g1, g2, g3))
    }
}

impl LabelSource for ReducedSnakeSource {
    fn contains(&self, v: Vertex) -> bool {
        (v as usize) < grid_size(self.snake.m)
    }

    fn fetch(&mut self, v: Vertex) -> Label {
        let p = grid_point(self.snake.m, v).expect("checked by contains");
        let snake = &mut self.snake;
        let m = snake.m;
        if p.on_boundary(m) {
            return cb_label_with(m, p, |_| false);
        }
        let [g1, g2, g3] =
            reduction_points(p).map(|q| q.filter(|q| q.in_grid(m)).map_or(0, |q| snake.query(q)));
        reduction_gamma((g1, g2, g3))
    }

    fn peek(&self, v: Vertex) -> Label {
        let p = grid_point(self.snake.m, v).expect("checked by contains");
        self.label(p, |q| self.snake.value(q))
    }
}

/// Output translation `β`: `(min i, min j)` over the triangle's points.
pub fn beta(m: u32, facet: &Simplex) -> Option<(u32, u32)> {
    let pts: Vec<GridPoint> = facet
        .vertices()
        .iter()
        .map(|&v| grid_point(m, v))
        .collect::<Option<_>>()?;
    Some((
        pts.iter().map(|p| p.i).min()?,
        pts.iter().map(|p| p.j).min()?,
    ))
}

/// The reduction: an oracle for `C_b` answered through `snake`, and `β`.
pub fn snake_reduce(
    snake: SnakeOracle,
) -> (LabelingOracle<ReducedSnakeSource>, impl Fn(&Simplex) -> Option<(u32, u32)>) {
    let m = snake.m;
    (
        LabelingOracle::new(ReducedSnakeSource::new(snake)),
        move |f: &Simplex| beta(m, f),
    )
}

/// Grows a pseudo `dim`-manifold with exactly `size` facets by gluing simplices
/// onto free ridges. With probability `close` a glued simplex reuses an
/// existing vertex when that keeps every ridge in at most two facets.
pub fn random_manifold_with(
    seed: u64,
    dim: usize,
    size: usize,
    close: (u64, u64),
) -> Result<PseudoManifold, InstanceError> {
    let mut rng = SplitMix64::new(seed);
    let mut facets: Vec<Simplex> = Vec::with_capacity(size);
    let mut present: HashSet<Simplex> = HashSet::new();
    let mut ridge_count: HashMap<Simplex, u8> = HashMap::new();
    let mut free: Vec<Simplex> = Vec::new();
    let mut next: Vertex = 0;

    if dim == 0 {
        return Err(ComplexError::ZeroDimension.into());
    }
    while facets.len() < size {
        free.retain(|r| ridge_count[r] == 1);
        if free.is_empty() {
            let f = Simplex::new(next..next + dim as Vertex + 1)?;
            next += dim as Vertex + 1;
            glue(f, dim, &mut facets, &mut present, &mut ridge_count, &mut free);
            continue;
        }
        let r = free[rng.index(free.len())].clone();
        let mut glued = None;
        if next > 0 && rng.chance(close.0, close.1) {
            for _ in 0..8 {
                let v = rng.below(next as u64) as Vertex;
                if r.contains(v) {
                    continue;
                }
                let f = Simplex::new(r.vertices().iter().copied().chain([v]))?;
                if present.contains(&f) {
                    continue;
                }
                let ok = f
                    .faces(dim - 1)?
                    .iter()
                    .all(|q| q == &r || ridge_count.get(q).copied().unwrap_or(0) <= 1);
                if ok {
                    glued = Some(f);
                    break;
                }
            }
        }
        let f = match glued {
            Some(f) => f,
            None => {
                next += 1;
                Simplex::new(r.vertices().iter().copied().chain([next - 1]))?
            }
        };
        glue(f, dim, &mut facets, &mut present, &mut ridge_count, &mut free);
    }
    Ok(PseudoManifold::new(dim, facets)?)
}

fn glue(
    f: Simplex,
    dim: usize,
    facets: &mut Vec<Simplex>,
    present: &mut HashSet<Simplex>,
    ridge_count: &mut HashMap<Simplex, u8>,
    free: &mut Vec<Simplex>,
) {
    for r in f.faces(dim - 1).expect("dim >= 1") {
        let c = ridge_count.entry(r.clone()).or_default();
        *c += 1;
        if *c == 1 {
            free.push(r);
        }
    }
    present.insert(f.clone());
    facets.push(f);
}

/// [`random_manifold_with`] closing one glue in three.
pub fn random_manifold(seed: u64, dim: usize, size: usize) -> Result<PseudoManifold, InstanceError> {
    random_manifold_with(seed, dim, size, (1, 3))
}

/// An oriented random pseudo-manifold: the first orientable draw among a few
/// derived seeds, else a closure-free (ball-like) draw.
pub fn random_oriented_manifold(
    seed: u64,
    dim: usize,
    size: usize,
) -> Result<PseudoManifold, InstanceError> {
    let mut seeds = SplitMix64::new(seed);
    for _ in 0..16 {
        if let Ok(m) = random_manifold(seeds.next_u64(), dim, size)?.oriented() {
            return Ok(m);
        }
    }
    Ok(random_manifold_with(seed, dim, size, (0, 1))?.oriented()?)
}

/// Uniform labels in `0..=dim` on the vertices of `m`.
pub fn random_labeling(rng: &mut SplitMix64, m: &PseudoManifold) -> Labeling {
    m.vertices()
        .into_iter()
        .map(|v| (v, rng.below(m.dim() as u64 + 1) as Label))
        .collect()
}

/// A random pseudo 2-manifold with `size` facets and a uniform random labeling.
pub fn random_manifold_2d(seed: u64, size: usize) -> Result<(PseudoManifold, Labeling), InstanceError> {
    let m = random_manifold(seed, 2, size)?;
    let mut rng = SplitMix64::new(seed ^ 0x5bd1_e995);
    let l = random_labeling(&mut rng, &m);
    Ok((m, l))
}

/// A random labeled instance satisfying the d-SPM promise, with its start facet.
/// Labels are redrawn until the boundary flow is odd (case a) or some facet is
/// fully labeled (case b, which then starts there).
pub fn random_spm_instance(
    seed: u64,
    dim: usize,
    size: usize,
) -> Result<(PseudoManifold, Labeling, Simplex), InstanceError> {
    let m = random_manifold(seed, dim, size)?;
    let mut rng = SplitMix64::new(seed ^ 0x2545_f491_4f6c_dd1d);
    loop {
        let l = random_labeling(&mut rng, &m);
        let odd = |labels: Vec<Label>| label_flow(&labels, Default::default()).rem_euclid(2) == 1;
        let boundary: i64 = m
            .boundary_complex()
            .iter()
            .map(|r| odd(l.labels_of(&r.base).expect("total")) as i64)
            .sum();
        if boundary % 2 == 1 {
            return Ok((m.clone(), l, m.facets()[0].clone()));
        }
        if let Some(s) = m
            .facets()
            .iter()
            .find(|f| odd(l.labels_of(f).expect("total")))
        {
            return Ok((m.clone(), l.clone(), s.clone()));
        }
    }
}
