//! Simplices, oriented simplices and pseudo d-manifolds.
//!
//! A complex is stored by its maximal simplices (facets); every lower face is
//! derived on demand. Oriented simplices are kept in canonical form: the
//! sorted vertex tuple plus the parity of the permutation that produced it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::{Mul, Neg};

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

/// Vertex identifier. Instance generators document how they pack geometry into ids.
pub type Vertex = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("a simplex needs at least one vertex")]
    EmptySimplex,
    #[error("vertex {0} appears twice in a simplex")]
    DuplicateVertex(Vertex),
    #[error("face dimension {k} is out of range for a {dim}-simplex")]
    FaceDimension { k: usize, dim: usize },
    #[error("vertex index {index} is out of range for a {dim}-simplex")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("pseudo-manifolds have positive dimension")]
    ZeroDimension,
    #[error("facet {facet} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        facet: Simplex,
        expected: usize,
        found: usize,
    },
    #[error("facet {0} is listed twice")]
    DuplicateFacet(Simplex),
    #[error("NotPseudoManifold: ridge {ridge} lies in {count} facets")]
    NotPseudoManifold { ridge: Simplex, count: usize },
    #[error("orientation has {found} entries for {expected} facets")]
    OrientationLength { expected: usize, found: usize },
    #[error("orientation is not coherent across interior ridge {0}")]
    IncoherentOrientation(Simplex),
    #[error("NotOrientable: inconsistent cycle through {} facets", cycle.len())]
    NotOrientable { cycle: Vec<Simplex> },
}

/// Orientation sign of an oriented simplex relative to its sorted vertex order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Sign {
    #[default]
    Pos,
    Neg,
}

impl Sign {
    pub fn from_parity_odd(odd: bool) -> Self {
        if odd {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    /// `(-1)^i`.
    pub fn alternating(i: usize) -> Self {
        Self::from_parity_odd(i % 2 == 1)
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn from_i64(x: i64) -> Option<Self> {
        match x {
            1 => Some(Sign::Pos),
            -1 => Some(Sign::Neg),
            _ => None,
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

/// Parity of the permutation that sorts `seq` (which must hold distinct items).
pub fn sorting_parity<T: Ord>(seq: &[T]) -> Sign {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    Sign::from_parity_odd(inversions % 2 == 1)
}

/// An unoriented simplex: a strictly increasing, nonempty vertex sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Simplex {
    vertices: Vec<Vertex>,
}

impl Simplex {
    pub fn new(vertices: impl IntoIterator<Item = Vertex>) -> Result<Self, ComplexError> {
        let mut vertices: Vec<Vertex> = vertices.into_iter().collect();
        if vertices.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        vertices.sort_unstable();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(ComplexError::DuplicateVertex(w[0]));
        }
        Ok(Simplex { vertices })
    }

    /// Caller guarantees the input is strictly increasing and nonempty.
    pub(crate) fn from_sorted(vertices: Vec<Vertex>) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex { vertices }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// All `k`-faces, i.e. the `(k+1)`-subsets of the vertex set, in lexicographic order.
    pub fn faces(&self, k: usize) -> Result<Vec<Simplex>, ComplexError> {
        if k > self.dim() {
            return Err(ComplexError::FaceDimension { k, dim: self.dim() });
        }
        Ok(self
            .vertices
            .iter()
            .copied()
            .combinations(k + 1)
            .map(Simplex::from_sorted)
            .collect())
    }

    /// The face obtained by dropping the vertex at position `index` of the sorted order.
    pub fn omit(&self, index: usize) -> Result<Simplex, ComplexError> {
        if index > self.dim() {
            return Err(ComplexError::IndexOutOfRange {
                index,
                dim: self.dim(),
            });
        }
        if self.dim() == 0 {
            return Err(ComplexError::EmptySimplex);
        }
        let mut v = self.vertices.clone();
        v.remove(index);
        Ok(Simplex::from_sorted(v))
    }

    /// Edges of the elementary complex spanned by this simplex.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices.iter().copied().tuple_combinations()
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.vertices.iter().join(","))
    }
}

/// A simplex together with one of its two orientations.
///
/// `sign` is relative to the sorted vertex order: `Pos` means the class of the
/// increasing ordering, `Neg` the class of any odd permutation of it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedSimplex {
    pub base: Simplex,
    pub sign: Sign,
}

impl OrientedSimplex {
    pub fn new(base: Simplex, sign: Sign) -> Self {
        OrientedSimplex { base, sign }
    }

    /// Orientation class of a concrete vertex ordering.
    pub fn from_ordering(ordering: &[Vertex]) -> Result<Self, ComplexError> {
        let base = Simplex::new(ordering.iter().copied())?;
        Ok(OrientedSimplex {
            base,
            sign: sorting_parity(ordering),
        })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn opposite(&self) -> Self {
        OrientedSimplex {
            base: self.base.clone(),
            sign: -self.sign,
        }
    }

    /// A representative ordering of the orientation class.
    pub fn ordering(&self) -> Vec<Vertex> {
        let mut v = self.base.vertices.clone();
        if self.sign == Sign::Neg && v.len() >= 2 {
            v.swap(0, 1);
        }
        v
    }

    /// Induced orientation on the face omitting the `index`-th vertex of the
    /// sorted representative: the face keeps the remaining order and flips sign
    /// iff `index` is odd.
    pub fn induced_orientation(&self, index: usize) -> Result<OrientedSimplex, ComplexError> {
        let face = self.base.omit(index)?;
        Ok(OrientedSimplex {
            base: face,
            sign: self.sign * Sign::alternating(index),
        })
    }

    /// All `(d-1)`-faces with their induced orientations, indexed by omitted position.
    pub fn induced_faces(&self) -> Result<Vec<OrientedSimplex>, ComplexError> {
        (0..=self.dim())
            .map(|i| self.induced_orientation(i))
            .collect()
    }
}

impl fmt::Display for OrientedSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.ordering().iter().join(","))
    }
}

/// Undirected simple graph over a sorted vertex list, adjacency by local index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SkeletonGraph {
    vertices: Vec<Vertex>,
    adj: Vec<Vec<u32>>,
}

impl SkeletonGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = Vertex>,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Self {
        let vertices: Vec<Vertex> = vertices
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut adj = vec![Vec::new(); vertices.len()];
        for (u, v) in edges {
            if u == v {
                continue;
            }
            let (Ok(a), Ok(b)) = (vertices.binary_search(&u), vertices.binary_search(&v)) else {
                continue;
            };
            adj[a].push(b as u32);
            adj[b].push(a as u32);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        SkeletonGraph { vertices, adj }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.index_of(v).is_some()
    }

    /// Neighbors by local index.
    pub fn neighbors_local(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.index_of(v)
            .into_iter()
            .flat_map(move |i| self.adj[i].iter().map(move |&j| self.vertices[j as usize]))
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(a), Some(b)) => self.adj[a].binary_search(&(b as u32)).is_ok(),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, list) in self.adj.iter().enumerate() {
            for &b in list {
                if (b as usize) > a {
                    out.push((self.vertices[a], self.vertices[b as usize]));
                }
            }
        }
        out
    }

    pub fn induced(&self, keep: &BTreeSet<Vertex>) -> SkeletonGraph {
        let edges = self
            .edges()
            .into_iter()
            .filter(|(u, v)| keep.contains(u) && keep.contains(v));
        SkeletonGraph::new(
            keep.iter().copied().filter(|v| self.contains(*v)),
            edges,
        )
    }

    pub fn is_complete(&self) -> bool {
        let n = self.len();
        self.adj.iter().all(|l| l.len() + 1 == n)
    }
}

/// Facet incidence of ridges; `None` marks a missing second facet.
pub(crate) type RidgeFacets = [Option<u32>; 2];

/// A validated pseudo d-manifold: every ridge lies in at most two facets.
///
/// Facets are kept sorted; `orientation[k]` is the sign of facet `k`.
/// The empty facet set is accepted (pieces of a split may be empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoManifold {
    dim: usize,
    facets: Vec<Simplex>,
    orientation: Option<Vec<Sign>>,
}

impl PseudoManifold {
    /// Validates an unoriented pseudo-manifold.
    pub fn new(dim: usize, facets: Vec<Simplex>) -> Result<Self, ComplexError> {
        Self::build(dim, facets.into_iter().map(|f| (f, Sign::Pos)).collect(), false)
    }

    /// Validates an oriented pseudo-manifold; `orientation[k]` belongs to `facets[k]`.
    /// Rejects orientations that are not coherent across interior ridges.
    pub fn with_orientation(
        dim: usize,
        facets: Vec<Simplex>,
        orientation: Vec<Sign>,
    ) -> Result<Self, ComplexError> {
        if orientation.len() != facets.len() {
            return Err(ComplexError::OrientationLength {
                expected: facets.len(),
                found: orientation.len(),
            });
        }
        let m = Self::build(dim, facets.into_iter().zip(orientation).collect(), true)?;
        m.check_coherence()?;
        Ok(m)
    }

    /// Oriented facets given as concrete vertex orderings.
    pub fn from_oriented(dim: usize, facets: &[OrientedSimplex]) -> Result<Self, ComplexError> {
        Self::with_orientation(
            dim,
            facets.iter().map(|f| f.base.clone()).collect(),
            facets.iter().map(|f| f.sign).collect(),
        )
    }

    fn build(
        dim: usize,
        mut facets: Vec<(Simplex, Sign)>,
        oriented: bool,
    ) -> Result<Self, ComplexError> {
        if dim == 0 {
            return Err(ComplexError::ZeroDimension);
        }
        if let Some((f, _)) = facets.iter().find(|(f, _)| f.dim() != dim) {
            return Err(ComplexError::DimensionMismatch {
                facet: f.clone(),
                expected: dim,
                found: f.dim(),
            });
        }
        facets.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = facets.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(ComplexError::DuplicateFacet(w[0].0.clone()));
        }
        let mut counts: HashMap<Simplex, usize> = HashMap::new();
        for (f, _) in &facets {
            for i in 0..=dim {
                *counts.entry(f.omit(i)?).or_default() += 1;
            }
        }
        if let Some((ridge, &count)) = counts
            .iter()
            .filter(|(_, &c)| c > 2)
            .min_by(|a, b| a.0.cmp(b.0))
        {
            return Err(ComplexError::NotPseudoManifold {
                ridge: ridge.clone(),
                count,
            });
        }
        let (facets, signs): (Vec<_>, Vec<_>) = facets.into_iter().unzip();
        Ok(PseudoManifold {
            dim,
            facets,
            orientation: oriented.then_some(signs),
        })
    }

    fn check_coherence(&self) -> Result<(), ComplexError> {
        let Some(signs) = &self.orientation else {
            return Ok(());
        };
        let mut seen: HashMap<Simplex, Sign> = HashMap::new();
        for (k, f) in self.facets.iter().enumerate() {
            for i in 0..=self.dim {
                let ridge = f.omit(i)?;
                let induced = signs[k] * Sign::alternating(i);
                if let Some(prev) = seen.insert(ridge.clone(), induced) {
                    if prev == induced {
                        return Err(ComplexError::IncoherentOrientation(ridge));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Simplex] {
        &self.facets
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn orientation(&self) -> Option<&[Sign]> {
        self.orientation.as_deref()
    }

    pub fn is_oriented(&self) -> bool {
        self.orientation.is_some()
    }

    pub fn facet_index(&self, s: &Simplex) -> Option<usize> {
        self.facets.binary_search(s).ok()
    }

    /// Sign of facet `k`; `Pos` for unoriented manifolds.
    pub fn facet_sign(&self, k: usize) -> Sign {
        self.orientation.as_ref().map_or(Sign::Pos, |o| o[k])
    }

    pub fn oriented_facet(&self, k: usize) -> OrientedSimplex {
        OrientedSimplex::new(self.facets[k].clone(), self.facet_sign(k))
    }

    pub fn oriented_facets(&self) -> impl Iterator<Item = OrientedSimplex> + '_ {
        (0..self.facets.len()).map(|k| self.oriented_facet(k))
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.facets
            .iter()
            .flat_map(|f| f.vertices().iter().copied())
            .collect()
    }

    /// Ridge → incident facets (by index), sorted by ridge.
    pub fn ridge_incidence(&self) -> BTreeMap<Simplex, Vec<usize>> {
        let mut map: BTreeMap<Simplex, Vec<usize>> = BTreeMap::new();
        for (k, f) in self.facets.iter().enumerate() {
            for i in 0..=self.dim {
                map.entry(f.omit(i).expect("dim >= 1"))
                    .or_default()
                    .push(k);
            }
        }
        map
    }

    /// The ridges lying in exactly one facet, each with the orientation induced
    /// by that facet (canonical `Pos` facets when unoriented).
    pub fn boundary_complex(&self) -> Vec<OrientedSimplex> {
        let mut out = Vec::new();
        let incidence = self.ridge_incidence();
        for (ridge, owners) in incidence {
            if owners.len() != 1 {
                continue;
            }
            let k = owners[0];
            let f = &self.facets[k];
            let pos = f
                .vertices()
                .iter()
                .position(|v| !ridge.contains(*v))
                .expect("ridge is a proper face");
            let sign = if self.is_oriented() {
                self.facet_sign(k) * Sign::alternating(pos)
            } else {
                Sign::Pos
            };
            out.push(OrientedSimplex::new(ridge, sign));
        }
        out
    }

    /// Vertices of the boundary complex.
    pub fn boundary_vertices(&self) -> BTreeSet<Vertex> {
        self.boundary_complex()
            .iter()
            .flat_map(|r| r.base.vertices().iter().copied())
            .collect()
    }

    pub fn skeleton(&self) -> SkeletonGraph {
        SkeletonGraph::new(
            self.vertices(),
            self.facets.iter().flat_map(|f| f.edges().collect::<Vec<_>>()),
        )
    }

    /// The sub-collection of facets `indices` (orientation restricted).
    pub fn sub_manifold(&self, indices: &[usize]) -> PseudoManifold {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        PseudoManifold {
            dim: self.dim,
            facets: idx.iter().map(|&k| self.facets[k].clone()).collect(),
            orientation: self
                .orientation
                .as_ref()
                .map(|o| idx.iter().map(|&k| o[k]).collect()),
        }
    }

    /// Drops the orientation.
    pub fn unoriented(&self) -> PseudoManifold {
        PseudoManifold {
            dim: self.dim,
            facets: self.facets.clone(),
            orientation: None,
        }
    }

    /// Flood-fills an orientation across shared ridges, one component of the
    /// facet adjacency graph at a time, rooting each component at its smallest
    /// facet with sign `Pos`.
    pub fn check_orientability(&self) -> Result<Vec<Sign>, ComplexError> {
        let n = self.facets.len();
        let ridges = RidgeTable::new(self);
        let mut sign: Vec<Option<Sign>> = vec![None; n];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        for root in 0..n {
            if sign[root].is_some() {
                continue;
            }
            sign[root] = Some(Sign::Pos);
            let mut queue = VecDeque::from([root]);
            while let Some(f) = queue.pop_front() {
                let sf = sign[f].expect("visited");
                for i in 0..=self.dim {
                    let r = ridges.facet_ridges[f * (self.dim + 1) + i] as usize;
                    let Some(g) = ridges.other(r, f) else { continue };
                    let j = ridges.local_index(g, r);
                    // induced signs must cancel: s_g * (-1)^j = -(s_f * (-1)^i)
                    let want = -(sf * Sign::alternating(i)) * Sign::alternating(j);
                    match sign[g] {
                        None => {
                            sign[g] = Some(want);
                            parent[g] = Some(f);
                            queue.push_back(g);
                        }
                        Some(sg) if sg != want => {
                            return Err(ComplexError::NotOrientable {
                                cycle: self.witness_cycle(&parent, f, g),
                            });
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(sign.into_iter().map(|s| s.expect("all visited")).collect())
    }

    fn witness_cycle(&self, parent: &[Option<usize>], f: usize, g: usize) -> Vec<Simplex> {
        let path = |mut x: usize| {
            let mut p = vec![x];
            while let Some(y) = parent[x] {
                p.push(y);
                x = y;
            }
            p
        };
        let pf = path(f);
        let pg = path(g);
        let in_g: BTreeSet<usize> = pg.iter().copied().collect();
        let lca_pos = pf.iter().position(|x| in_g.contains(x)).unwrap_or(pf.len() - 1);
        let lca = pf[lca_pos];
        let mut cycle: Vec<usize> = pf[..=lca_pos].to_vec();
        let g_pos = pg.iter().position(|&x| x == lca).unwrap_or(pg.len() - 1);
        cycle.extend(pg[..g_pos].iter().rev());
        cycle.into_iter().map(|k| self.facets[k].clone()).collect()
    }

    /// Returns a copy carrying the orientation found by [`Self::check_orientability`].
    pub fn oriented(&self) -> Result<PseudoManifold, ComplexError> {
        let signs = self.check_orientability()?;
        Ok(PseudoManifold {
            dim: self.dim,
            facets: self.facets.clone(),
            orientation: Some(signs),
        })
    }
}

/// Validates a facet list as a pseudo `d`-manifold.
pub fn validate_pseudo_manifold(
    facets: Vec<Simplex>,
    d: usize,
) -> Result<PseudoManifold, ComplexError> {
    PseudoManifold::new(d, facets)
}

/// Interned ridges with their (at most two) incident facets.
#[derive(Debug, Clone)]
pub(crate) struct RidgeTable {
    dim: usize,
    /// `facet_ridges[f * (dim + 1) + i]` is the ridge omitting position `i` of facet `f`.
    pub facet_ridges: Vec<u32>,
    pub ridge_facets: Vec<RidgeFacets>,
}

impl RidgeTable {
    pub fn new(m: &PseudoManifold) -> Self {
        let dim = m.dim;
        let mut ids: HashMap<Simplex, u32> = HashMap::with_capacity(m.len() * (dim + 1));
        let mut facet_ridges = Vec::with_capacity(m.len() * (dim + 1));
        let mut ridge_facets: Vec<RidgeFacets> = Vec::new();
        for (k, f) in m.facets.iter().enumerate() {
            for i in 0..=dim {
                let ridge = f.omit(i).expect("dim >= 1");
                let next = ridge_facets.len() as u32;
                let id = *ids.entry(ridge).or_insert(next);
                if id == next {
                    ridge_facets.push([Some(k as u32), None]);
                } else {
                    ridge_facets[id as usize][1] = Some(k as u32);
                }
                facet_ridges.push(id);
            }
        }
        RidgeTable {
            dim,
            facet_ridges,
            ridge_facets,
        }
    }

    pub fn other(&self, ridge: usize, facet: usize) -> Option<usize> {
        let [a, b] = self.ridge_facets[ridge];
        match (a, b) {
            (Some(a), Some(b)) if a as usize == facet => Some(b as usize),
            (Some(a), Some(_)) => Some(a as usize),
            _ => None,
        }
    }

    pub fn local_index(&self, facet: usize, ridge: usize) -> usize {
        let base = facet * (self.dim + 1);
        self.facet_ridges[base..base + self.dim + 1]
            .iter()
            .position(|&r| r as usize == ridge)
            .expect("ridge belongs to facet")
    }
}
