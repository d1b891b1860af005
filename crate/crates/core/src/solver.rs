//! Divide-and-conquer solvers for d-SPM (over ℤ/2) and d-OSPM (over ℤ), the
//! splitting step they rest on, and a brute-force reference.
//!
//! Each level separates the skeleton induced on the still-unlabeled vertices,
//! queries the separator, partitions the facets into `𝔅` (all vertices
//! labeled), `M'` and `M''`, and recurses into a piece whose boundary flow
//! certifies a solution.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::chain::{label_flow, ChainError, Label, Labeling, Ring};
use crate::complex::{PseudoManifold, RidgeTable, Sign, Simplex, SkeletonGraph, Vertex};
use crate::oracle::{LabelSource, LabelingOracle, OracleError};
use crate::separation::{
    best_separation, validate_separation, Separation, SeparationError, SeparatorStrategy,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("PromiseViolation: {0}")]
    PromiseViolation(String),
    #[error("NotOriented: d-OSPM needs an oriented pseudo-manifold")]
    NotOriented,
    #[error("start simplex {0} is not a facet")]
    StartNotFacet(Simplex),
    #[error("InternalInconsistency: {0}")]
    Inconsistent(String),
    #[error("invalid separation: {0}")]
    InvalidSeparation(#[from] SeparationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Which promise case a (sub)problem is solved under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PromiseCase {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Problem {
    /// Unoriented, flows in ℤ/2.
    Spm,
    /// Oriented, flows in ℤ.
    Ospm,
}

/// A d-SPM / d-OSPM instance: the manifold, the start facet and the oracle.
#[derive(Debug, Clone)]
pub struct SpmInstance<S> {
    pub manifold: PseudoManifold,
    pub start: Simplex,
    pub oracle: LabelingOracle<S>,
}

impl<S: LabelSource> SpmInstance<S> {
    pub fn new(
        manifold: PseudoManifold,
        start: Simplex,
        oracle: LabelingOracle<S>,
    ) -> Result<Self, SolveError> {
        if manifold.facet_index(&start).is_none() {
            return Err(SolveError::StartNotFacet(start));
        }
        Ok(SpmInstance {
            manifold,
            start,
            oracle,
        })
    }

    /// Starts at the first facet (only relevant under promise case b).
    pub fn with_first_facet(manifold: PseudoManifold, oracle: LabelingOracle<S>) -> Result<Self, SolveError> {
        let start = manifold
            .facets()
            .first()
            .cloned()
            .ok_or_else(|| SolveError::PromiseViolation("empty manifold".into()))?;
        Self::new(manifold, start, oracle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QueryCounts {
    pub total: usize,
    /// Paid reads of boundary vertices.
    pub boundary: usize,
    pub interior: usize,
}

/// One recursion level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelTrace {
    pub facets: usize,
    pub unknown_before: usize,
    pub separator: Vec<Vertex>,
    /// Facet counts of `𝔅`, `M'`, `M''`.
    pub piece_sizes: [usize; 3],
    /// Boundary flows `N_{d-1}` of `𝔅`, `M'`, `M''`.
    pub piece_flows: [i64; 3],
    pub parent_flow: i64,
    /// Index of the piece recursed into; `None` when `𝔅` held the answer.
    pub chosen: Option<usize>,
    pub case: PromiseCase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub facet: Simplex,
    pub flow: i64,
    pub case: PromiseCase,
    pub queries: QueryCounts,
    pub trace: Vec<LevelTrace>,
}

impl SolveResult {
    /// Sum of separator sizes over the recursion.
    pub fn separator_total(&self) -> usize {
        self.trace.iter().map(|t| t.separator.len()).sum()
    }
}

/// The four parts of a split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// `B = H ∪ (A∩C)`
    pub b: BTreeSet<Vertex>,
    /// `𝔅`: facets with every vertex in `B`.
    pub bridge: PseudoManifold,
    /// `M'`: facets meeting `A∖C`.
    pub left: PseudoManifold,
    /// `M''`: facets meeting `C∖A`.
    pub right: PseudoManifold,
    /// `B'`: ridges of `m` with every vertex in `B`.
    pub b_ridges: Vec<Simplex>,
}

/// Splits `m` along a separation of `G_M[M_0 ∖ h]`.
pub fn split(m: &PseudoManifold, h: &BTreeSet<Vertex>, sep: &Separation) -> Result<Split, SolveError> {
    let rest: BTreeSet<Vertex> = m.vertices().difference(h).copied().collect();
    let g = m.skeleton().induced(&rest);
    validate_separation(&g, &sep.a(), &sep.c())?;
    let b: BTreeSet<Vertex> = h.iter().chain(sep.separator()).copied().collect();
    let a_only: HashSet<Vertex> = sep.a_only().iter().copied().collect();
    let c_only: HashSet<Vertex> = sep.c_only().iter().copied().collect();
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (k, f) in m.facets().iter().enumerate() {
        let left = f.vertices().iter().any(|v| a_only.contains(v));
        let right = f.vertices().iter().any(|v| c_only.contains(v));
        match (left, right) {
            (false, false) => parts[0].push(k),
            (true, false) => parts[1].push(k),
            (false, true) => parts[2].push(k),
            (true, true) => {
                return Err(SolveError::Inconsistent(format!(
                    "facet {f} meets both sides of the separation"
                )))
            }
        }
    }
    let b_ridges = m
        .ridge_incidence()
        .into_keys()
        .filter(|r| r.vertices().iter().all(|v| b.contains(v)))
        .collect();
    let [p0, p1, p2] = parts;
    Ok(Split {
        bridge: m.sub_manifold(&p0),
        left: m.sub_manifold(&p1),
        right: m.sub_manifold(&p2),
        b,
        b_ridges,
    })
}

/// Solves d-SPM: returns a facet with `N_d = 1` in ℤ/2 (distinct from the start in case b).
pub fn solve_spm<S: LabelSource>(
    inst: &mut SpmInstance<S>,
    strategy: &SeparatorStrategy,
) -> Result<SolveResult, SolveError> {
    solve(inst, strategy, Problem::Spm)
}

/// Solves d-OSPM: returns a facet with `N_d = −1` in ℤ.
pub fn solve_ospm<S: LabelSource>(
    inst: &mut SpmInstance<S>,
    strategy: &SeparatorStrategy,
) -> Result<SolveResult, SolveError> {
    solve(inst, strategy, Problem::Ospm)
}

/// Reads the boundary labels, fixes the promise case and runs the recursion.
pub fn solve<S: LabelSource>(
    inst: &mut SpmInstance<S>,
    strategy: &SeparatorStrategy,
    problem: Problem,
) -> Result<SolveResult, SolveError> {
    let m = &inst.manifold;
    if problem == Problem::Ospm && !m.is_oriented() {
        return Err(SolveError::NotOriented);
    }
    let start = m
        .facet_index(&inst.start)
        .ok_or_else(|| SolveError::StartNotFacet(inst.start.clone()))?;
    let oracle = &mut inst.oracle;
    let base = oracle.count();
    let mut known = HashMap::new();
    for v in m.boundary_vertices() {
        known.insert(v, oracle.query(v)?);
    }
    let boundary = oracle.count() - base;

    let mut engine = Engine {
        m,
        ridges: RidgeTable::new(m),
        d: m.dim(),
        ring: match problem {
            Problem::Spm => Ring::Z2,
            Problem::Ospm => Ring::Z,
        },
        problem,
        known,
        owner: vec![0; m.len()],
        next_tag: 1,
        strategy,
        trace: Vec::new(),
    };
    let all: Vec<usize> = (0..m.len()).collect();
    let flow = engine.boundary_flow(&all, 0)?;
    let signed = Ring::Z.alternate(m.dim(), flow);
    let case = match problem {
        Problem::Spm if flow == 1 => PromiseCase::A,
        Problem::Spm => PromiseCase::B,
        Problem::Ospm if signed < 0 => PromiseCase::A,
        Problem::Ospm if signed == 0 => PromiseCase::B,
        Problem::Ospm => {
            return Err(SolveError::PromiseViolation(format!(
                "(-1)^d N_(d-1)[boundary] = {signed} > 0"
            )))
        }
    };
    let facet = engine.run(oracle, all, start, case, flow)?;
    let total = oracle.count() - base;
    let facet_flow = engine.facet_flow(facet)?;
    Ok(SolveResult {
        facet: m.facets()[facet].clone(),
        flow: facet_flow,
        case,
        queries: QueryCounts {
            total,
            boundary,
            interior: total - boundary,
        },
        trace: engine.trace,
    })
}

struct Engine<'a> {
    m: &'a PseudoManifold,
    ridges: RidgeTable,
    d: usize,
    ring: Ring,
    problem: Problem,
    known: HashMap<Vertex, Label>,
    /// Piece tag per facet; a ridge is on a piece's boundary unless its other
    /// facet carries the same tag.
    owner: Vec<u32>,
    next_tag: u32,
    strategy: &'a SeparatorStrategy,
    trace: Vec<LevelTrace>,
}

impl Engine<'_> {
    fn label(&self, v: Vertex) -> Result<Label, SolveError> {
        self.known.get(&v).copied().ok_or_else(|| {
            SolveError::Inconsistent(format!("label of vertex {v} needed before it was read"))
        })
    }

    fn labels(&self, vs: impl Iterator<Item = Vertex>) -> Result<Vec<Label>, SolveError> {
        vs.map(|v| self.label(v)).collect()
    }

    fn sign(&self, f: usize) -> Sign {
        match self.problem {
            Problem::Spm => Sign::Pos,
            Problem::Ospm => self.m.facet_sign(f),
        }
    }

    fn facet_flow(&self, f: usize) -> Result<i64, SolveError> {
        let labels = self.labels(self.m.facets()[f].vertices().iter().copied())?;
        Ok(self.ring.reduce(label_flow(&labels, self.sign(f))))
    }

    /// `N_{d-1}` of the boundary of the piece `facets`, all tagged `tag`.
    fn boundary_flow(&self, facets: &[usize], tag: u32) -> Result<i64, SolveError> {
        let mut total = 0i64;
        for &f in facets {
            let verts = self.m.facets()[f].vertices();
            for i in 0..=self.d {
                let r = self.ridges.facet_ridges[f * (self.d + 1) + i] as usize;
                if self.ridges.other(r, f).is_some_and(|g| self.owner[g] == tag) {
                    continue;
                }
                let labels = self.labels(
                    verts
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i)
                        .map(|(_, &v)| v),
                )?;
                let flow = label_flow(&labels, self.sign(f) * Sign::alternating(i));
                total = self.ring.add(total, flow)?;
            }
        }
        Ok(total)
    }

    fn qualifies(&self, flow: i64) -> bool {
        match self.problem {
            Problem::Spm => flow == 1,
            Problem::Ospm => Ring::Z.alternate(self.d, flow) < 0,
        }
    }

    fn is_solution(&self, flow: i64) -> bool {
        match self.problem {
            Problem::Spm => flow == 1,
            Problem::Ospm => flow == -1,
        }
    }

    fn run<S: LabelSource>(
        &mut self,
        oracle: &mut LabelingOracle<S>,
        mut piece: Vec<usize>,
        mut start: usize,
        mut case: PromiseCase,
        mut parent_flow: i64,
    ) -> Result<usize, SolveError> {
        loop {
            let verts: BTreeSet<Vertex> = piece
                .iter()
                .flat_map(|&f| self.m.facets()[f].vertices().iter().copied())
                .collect();
            let unknown: BTreeSet<Vertex> = verts
                .iter()
                .filter(|v| !self.known.contains_key(v))
                .copied()
                .collect();
            let unknown_before = unknown.len();

            let sep = if unknown.is_empty() {
                Separation::default()
            } else {
                let edges: Vec<(Vertex, Vertex)> = piece
                    .iter()
                    .flat_map(|&f| self.m.facets()[f].edges())
                    .filter(|(u, v)| unknown.contains(u) && unknown.contains(v))
                    .collect();
                let g = SkeletonGraph::new(unknown.iter().copied(), edges);
                let sep = best_separation(&g, self.strategy);
                if !sep.is_admissible() || sep.len() != g.len() {
                    return Err(SolveError::Inconsistent(
                        "strategy returned an inadmissible separation".into(),
                    ));
                }
                sep
            };
            for &v in sep.separator() {
                let l = oracle.query(v)?;
                self.known.insert(v, l);
            }

            let a_only: HashSet<Vertex> = sep.a_only().iter().copied().collect();
            let c_only: HashSet<Vertex> = sep.c_only().iter().copied().collect();
            let mut parts: [Vec<usize>; 3] = Default::default();
            for &f in &piece {
                let vs = self.m.facets()[f].vertices();
                let left = vs.iter().any(|v| a_only.contains(v));
                let right = vs.iter().any(|v| c_only.contains(v));
                let p = match (left, right) {
                    (false, false) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (true, true) => {
                        return Err(SolveError::Inconsistent(format!(
                            "facet {} meets both sides of the separation",
                            self.m.facets()[f]
                        )))
                    }
                };
                parts[p].push(f);
            }
            let tags = [self.next_tag, self.next_tag + 1, self.next_tag + 2];
            self.next_tag += 3;
            for (p, part) in parts.iter().enumerate() {
                for &f in part {
                    self.owner[f] = tags[p];
                }
            }

            let mut level = LevelTrace {
                facets: piece.len(),
                unknown_before,
                separator: sep.separator().to_vec(),
                piece_sizes: [parts[0].len(), parts[1].len(), parts[2].len()],
                piece_flows: [0; 3],
                parent_flow,
                chosen: None,
                case,
            };

            let skip = (case == PromiseCase::B && self.problem == Problem::Spm).then_some(start);
            for &f in &parts[0] {
                let flow = self.facet_flow(f)?;
                if Some(f) == skip {
                    if flow != 1 {
                        return Err(SolveError::PromiseViolation(format!(
                            "start facet {} is not fully labeled",
                            self.m.facets()[f]
                        )));
                    }
                    continue;
                }
                if self.is_solution(flow) {
                    self.trace.push(level);
                    return Ok(f);
                }
            }
            if unknown.is_empty() {
                self.trace.push(level);
                return Err(SolveError::PromiseViolation(
                    "every label of the piece is known and none of its facets is a solution".into(),
                ));
            }

            let mut flows = [0i64; 3];
            for p in 0..3 {
                flows[p] = self.boundary_flow(&parts[p], tags[p])?;
            }
            level.piece_flows = flows;
            let sum = flows.iter().try_fold(0i64, |acc, &x| self.ring.add(acc, x))?;
            if sum != parent_flow {
                self.trace.push(level);
                return Err(SolveError::Inconsistent(format!(
                    "piece flows {flows:?} do not add up to {parent_flow}"
                )));
            }

            let holder = (0..3).find(|&p| parts[p].contains(&start));
            let certifies = |p: usize| {
                !parts[p].is_empty()
                    && self.qualifies(flows[p])
                    && !(self.problem == Problem::Spm && case == PromiseCase::B && holder == Some(p))
            };
            let choice = match (0..3).find(|&p| certifies(p)) {
                Some(p) => Some((p, PromiseCase::A, parts[p][0])),
                None if case == PromiseCase::B => match holder {
                    Some(p) if flows[p] == 0 => Some((p, PromiseCase::B, start)),
                    _ => None,
                },
                None => None,
            };
            let Some((p, next_case, next_start)) = choice else {
                self.trace.push(level);
                return Err(SolveError::PromiseViolation(format!(
                    "no piece certifies a solution (piece flows {flows:?})"
                )));
            };
            level.chosen = Some(p);
            self.trace.push(level);

            let next = std::mem::take(&mut parts[p]);
            let next_unknown = next
                .iter()
                .flat_map(|&f| self.m.facets()[f].vertices().iter())
                .filter(|v| !self.known.contains_key(v))
                .collect::<HashSet<_>>()
                .len();
            if (next.len(), next_unknown) >= (piece.len(), unknown_before) {
                return Err(SolveError::Inconsistent("recursion made no progress".into()));
            }
            piece = next;
            start = next_start;
            case = next_case;
            parent_flow = flows[p];
        }
    }
}

/// All facets with `N_d = target` in `ring` (ℤ needs an orientation).
pub fn brute_force(
    m: &PseudoManifold,
    l: &Labeling,
    ring: Ring,
    target: i64,
) -> Result<Vec<Simplex>, ChainError> {
    if ring == Ring::Z && !m.is_oriented() {
        return Err(ChainError::NotOriented);
    }
    let target = ring.reduce(target);
    let mut out = Vec::new();
    for (k, f) in m.facets().iter().enumerate() {
        let sign = if ring == Ring::Z { m.facet_sign(k) } else { Sign::Pos };
        if ring.reduce(label_flow(&l.labels_of(f)?, sign)) == target {
            out.push(f.clone());
        }
    }
    Ok(out)
}
