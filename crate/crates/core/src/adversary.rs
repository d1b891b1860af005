//! Exact weighted-adversary quantities for small black-box problems, and the
//! SNAKE weight matrix.
//!
//! Row sums are integers; ratios are compared by cross-multiplication and a
//! square root is taken only when reporting.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::grid::{points, GridPoint};
use crate::instances::BitSequence;
use crate::par::{self, Execution};

/// Largest `m` accepted by [`snake_gamma`].
pub const SNAKE_CAP: u32 = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("VacuousMatrix: Γ has no nonzero entry on a pair differing in some position")]
    VacuousMatrix,
    #[error("matrix is {found}×{found}, problem has {expected} inputs")]
    SizeMismatch { expected: usize, found: usize },
    #[error("Γ is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("Γ[{0}, {1}] is nonzero but both inputs have the same output")]
    SameOutput(usize, usize),
    #[error("inputs have different lengths")]
    RaggedInputs,
    #[error("SNAKE needs 3 <= m <= {cap}, got {m}")]
    SnakeRange { m: u32, cap: u32 },
}

/// `f : S → S'` given as a table; inputs are strings over a small alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlackBoxProblem<T> {
    inputs: Vec<Vec<u8>>,
    outputs: Vec<T>,
}

impl<T: Eq> BlackBoxProblem<T> {
    pub fn new(inputs: Vec<Vec<u8>>, outputs: Vec<T>) -> Result<Self, AdversaryError> {
        if inputs.len() != outputs.len() {
            return Err(AdversaryError::SizeMismatch {
                expected: inputs.len(),
                found: outputs.len(),
            });
        }
        if inputs.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(AdversaryError::RaggedInputs);
        }
        Ok(BlackBoxProblem { inputs, outputs })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Input string length `n`.
    pub fn width(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn input(&self, x: usize) -> &[u8] {
        &self.inputs[x]
    }

    pub fn output(&self, x: usize) -> &T {
        &self.outputs[x]
    }
}

/// Symmetric nonnegative integer matrix over `S × S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryMatrix {
    size: usize,
    entries: Vec<u64>,
}

impl AdversaryMatrix {
    pub fn zeros(size: usize) -> Self {
        AdversaryMatrix {
            size,
            entries: vec![0; size * size],
        }
    }

    /// Fills `Γ[x, y] = w(x, y)`, checking symmetry and the same-output rule.
    pub fn from_fn<T: Eq>(
        p: &BlackBoxProblem<T>,
        w: impl Fn(usize, usize) -> u64,
    ) -> Result<Self, AdversaryError> {
        let mut g = AdversaryMatrix::zeros(p.len());
        for x in 0..p.len() {
            for y in 0..p.len() {
                g.entries[x * p.len() + y] = w(x, y);
            }
        }
        g.validate(p)?;
        Ok(g)
    }

    pub fn validate<T: Eq>(&self, p: &BlackBoxProblem<T>) -> Result<(), AdversaryError> {
        if self.size != p.len() {
            return Err(AdversaryError::SizeMismatch {
                expected: p.len(),
                found: self.size,
            });
        }
        for x in 0..self.size {
            for y in 0..self.size {
                let v = self.get(x, y);
                if v != self.get(y, x) {
                    return Err(AdversaryError::NotSymmetric(x, y));
                }
                if v != 0 && p.output(x) == p.output(y) {
                    return Err(AdversaryError::SameOutput(x, y));
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.entries[x * self.size + y]
    }

    pub fn row(&self, x: usize) -> &[u64] {
        &self.entries[x * self.size..(x + 1) * self.size]
    }

    pub fn total(&self) -> u128 {
        self.entries.iter().map(|&v| v as u128).sum()
    }

    /// `Γ_k`: entries kept where the inputs differ at position `k`.
    pub fn restrict<T>(&self, p: &BlackBoxProblem<T>, k: usize) -> AdversaryMatrix {
        let mut out = self.clone();
        for x in 0..self.size {
            for y in 0..self.size {
                if p.inputs[x][k] == p.inputs[y][k] {
                    out.entries[x * self.size + y] = 0;
                }
            }
        }
        out
    }
}

/// `σ(M, x) = Σ_y M[x, y]`.
pub fn sigma(m: &AdversaryMatrix, x: usize) -> u128 {
    m.row(x).iter().map(|&v| v as u128).sum()
}

/// `σ(Γ_k, x)` without materializing `Γ_k`.
pub fn sigma_restricted<T>(g: &AdversaryMatrix, p: &BlackBoxProblem<T>, k: usize, x: usize) -> u128 {
    let xk = p.inputs[x][k];
    g.row(x)
        .iter()
        .zip(&p.inputs)
        .filter(|(_, y)| y[k] != xk)
        .map(|(&v, _)| v as u128)
        .sum()
}

/// A pair `(x, y)` and position `k` attaining a minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub x: usize,
    pub y: usize,
    pub k: usize,
    pub sigma_x: u128,
    pub sigma_y: u128,
    pub sigma_k_x: u128,
    pub sigma_k_y: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryBounds {
    /// `min max(σ(Γ,x)/σ(Γ_k,x), σ(Γ,y)/σ(Γ_k,y))`
    pub rqc: f64,
    /// `min sqrt(σ(Γ,x)σ(Γ,y) / (σ(Γ_k,x)σ(Γ_k,y)))`
    pub qqc: f64,
    pub rqc_witness: Witness,
    pub qqc_witness: Witness,
    pub sigma_min: u128,
    pub sigma_max: u128,
}

/// Exact fraction `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy)]
struct Frac {
    num: u128,
    den: u128,
}

impl Frac {
    fn cmp(&self, other: &Frac) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }

    fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn rqc_term(w: &Witness) -> Frac {
    let a = Frac {
        num: w.sigma_x,
        den: w.sigma_k_x,
    };
    let b = Frac {
        num: w.sigma_y,
        den: w.sigma_k_y,
    };
    if a.cmp(&b) == Ordering::Less {
        b
    } else {
        a
    }
}

fn qqc_term(w: &Witness) -> Frac {
    Frac {
        num: w.sigma_x * w.sigma_y,
        den: w.sigma_k_x * w.sigma_k_y,
    }
}

/// Both raw minima of the weighted adversary expressions, over pairs with
/// `Γ[x, y] ≠ 0` and `x_k ≠ y_k`. Ties keep the smallest `(k, x, y)`.
pub fn adversary_bounds<T: Eq + Sync>(
    p: &BlackBoxProblem<T>,
    g: &AdversaryMatrix,
    exec: Execution,
) -> Result<AdversaryBounds, AdversaryError> {
    g.validate(p)?;
    let n = p.len();
    let sig: Vec<u128> = (0..n).map(|x| sigma(g, x)).collect();
    let positions: Vec<usize> = (0..p.width()).collect();
    let per_k = par::map(&positions, exec, |&k| {
        let sk: Vec<u128> = (0..n).map(|x| sigma_restricted(g, p, k, x)).collect();
        let mut best: (Option<Witness>, Option<Witness>) = (None, None);
        for x in 0..n {
            for y in x + 1..n {
                if g.get(x, y) == 0 || p.inputs[x][k] == p.inputs[y][k] {
                    continue;
                }
                let w = Witness {
                    x,
                    y,
                    k,
                    sigma_x: sig[x],
                    sigma_y: sig[y],
                    sigma_k_x: sk[x],
                    sigma_k_y: sk[y],
                };
                if best.0.is_none_or(|b| rqc_term(&w).cmp(&rqc_term(&b)) == Ordering::Less) {
                    best.0 = Some(w);
                }
                if best.1.is_none_or(|b| qqc_term(&w).cmp(&qqc_term(&b)) == Ordering::Less) {
                    best.1 = Some(w);
                }
            }
        }
        best
    });
    type Best = (Option<Witness>, Option<Witness>);
    let pick = |sel: fn(&Best) -> Option<Witness>, term: fn(&Witness) -> Frac| {
        per_k
            .iter()
            .filter_map(sel)
            .reduce(|a, b| if term(&b).cmp(&term(&a)) == Ordering::Less { b } else { a })
    };
    let rqc = pick(|b| b.0, rqc_term).ok_or(AdversaryError::VacuousMatrix)?;
    let qqc = pick(|b| b.1, qqc_term).ok_or(AdversaryError::VacuousMatrix)?;
    Ok(AdversaryBounds {
        rqc: rqc_term(&rqc).value(),
        qqc: qqc_term(&qqc).value().sqrt(),
        rqc_witness: rqc,
        qqc_witness: qqc,
        sigma_min: sig.iter().copied().min().unwrap_or(0),
        sigma_max: sig.iter().copied().max().unwrap_or(0),
    })
}

fn check_snake_m(m: u32) -> Result<(), AdversaryError> {
    if !(3..=SNAKE_CAP).contains(&m) {
        return Err(AdversaryError::SnakeRange { m, cap: SNAKE_CAP });
    }
    Ok(())
}

/// SNAKE on `V_m` as a table: inputs `O_b` over `V_m` in vertex-id order, for
/// `b` in lexicographic order; outputs `(w0(b), w1(b))`.
pub fn snake_problem(m: u32) -> Result<BlackBoxProblem<(u32, u32)>, AdversaryError> {
    check_snake_m(m)?;
    let pts: Vec<GridPoint> = points(m).collect();
    let (inputs, outputs) = BitSequence::all(m as usize - 2)
        .map(|b| {
            let snake = b.snake_points();
            let row = pts.iter().map(|p| snake.contains(p) as u8).collect();
            (row, (b.w0(), b.w1()))
        })
        .unzip();
    BlackBoxProblem::new(inputs, outputs)
}

/// `Γ[b, b'] = 0` if `w0(b) = w0(b')`, else `2^{|b ∧ b'|}`; rows follow [`snake_problem`].
pub fn snake_gamma(m: u32) -> Result<AdversaryMatrix, AdversaryError> {
    check_snake_m(m)?;
    let len = m as usize - 2;
    let seqs: Vec<BitSequence> = BitSequence::all(len).collect();
    let size = seqs.len();
    let mut g = AdversaryMatrix::zeros(size);
    for (x, b) in seqs.iter().enumerate() {
        for (y, c) in seqs.iter().enumerate() {
            if b.w0() != c.w0() {
                g.entries[x * size + y] = 1u64 << b.common_prefix(c);
            }
        }
    }
    Ok(g)
}

/// `C(n, k)`, zero outside `0 ≤ k ≤ n`.
pub fn binomial(n: i64, k: i64) -> i128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: i128 = 1;
    for i in 0..k {
        r = r * (n - i) as i128 / (i + 1) as i128;
    }
    r
}

/// `Σ_{d=0}^{upper} 2^d [2^{m−3−d} − C(m−3−d, w_{b_{d+1}}(b) − w_{b_{d+1}}(b^d))]`
/// for `b` of length `m − 2`.
pub fn row_sum_formula(b: &BitSequence, upper: i64) -> i128 {
    let m = b.len() as i64 + 2;
    (0..=upper)
        .map(|d| {
            let x = b.bit(d as usize + 1);
            let same = binomial(m - 3 - d, b.w(x) as i64 - b.prefix(d as usize).w(x) as i64);
            (1i128 << d) * ((1i128 << (m - 3 - d)) - same)
        })
        .sum()
}

/// The row-sum formula with upper limit `m − 4`, one short of the last prefix length.
pub fn row_sum_formula_short(b: &BitSequence) -> i128 {
    row_sum_formula(b, b.len() as i64 - 2)
}

/// The row-sum formula over every common-prefix length `d = 0 … m − 3`.
pub fn row_sum_formula_full(b: &BitSequence) -> i128 {
    row_sum_formula(b, b.len() as i64 - 1)
}

/// `Σ_{d=0}^{h−2} 2^d C(h−d−2, ⌊(h−d−2)/2⌋) 2^{m−h−1}`, an upper bound on
/// `σ(Γ_p, b)` for `p` on diagonal `h` when `O_b(p) = 0`.
pub fn sigma_p_upper(m: u32, h: u32) -> i128 {
    let (m, h) = (m as i64, h as i64);
    (0..=h - 2)
        .map(|d| {
            let r = h - d - 2;
            (1i128 << d) * binomial(r, r / 2) * (1i128 << (m - h - 1))
        })
        .sum()
}
