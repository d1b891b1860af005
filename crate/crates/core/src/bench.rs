//! Scaling sweeps over the REGULAR 2-SPM and SNAKE families, CSV rows, and
//! the log-log exponent fit.

use std::io::Write;
use std::time::Instant;

use serde::{Serialize, Serializer};

use crate::grid::{grid_size, GridPoint};
use crate::instances::{beta, bits_len, regular_subdivision, snake_reduce, BitSequence, CbRule, InstanceError, SnakeOracle};
use crate::oracle::LabelingOracle;
use crate::par::{self, Execution};
use crate::rng::SplitMix64;
use crate::separation::StrategyKind;
use crate::solver::{solve_spm, SolveError, SpmInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `C_b` labelings read directly.
    Regular2Spm,
    /// `C_b` simulated from `O_b`; queries are SNAKE reads.
    Snake,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Regular2Spm => "regular2spm",
            Family::Snake => "snake",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regular2spm" => Some(Family::Regular2Spm),
            "snake" => Some(Family::Snake),
            _ => None,
        }
    }

    /// Each family's own input size: `C(m+2, 2)` for REGULAR 2-SPM, `C(m, 2)` for SNAKE.
    pub fn n(self, m: u32) -> usize {
        match self {
            Family::Regular2Spm => grid_size(m),
            Family::Snake => (m as usize * m.saturating_sub(1) as usize) / 2,
        }
    }
}

fn solution_cell<S: Serializer>(p: &(u32, u32), s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("({},{})", p.0, p.1))
}

fn strategy_cell<S: Serializer>(k: &StrategyKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(k.name())
}

fn family_cell<S: Serializer>(f: &Family, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(f.name())
}

/// One solved instance; field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    #[serde(serialize_with = "family_cell")]
    pub family: Family,
    pub m: u32,
    pub n: usize,
    #[serde(serialize_with = "strategy_cell")]
    pub strategy: StrategyKind,
    pub b: String,
    pub queries_total: usize,
    pub queries_interior: usize,
    /// `(w0(b), w1(b))` recovered from the returned triangle.
    #[serde(serialize_with = "solution_cell")]
    pub solution: (u32, u32),
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub family: Family,
    pub ms: Vec<u32>,
    pub samples: usize,
    pub seed: u64,
    pub strategy: StrategyKind,
    pub exec: Execution,
    /// Record wall time; off gives byte-identical rows across runs.
    pub timing: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("m = {m}, b = {b}: {source}")]
    Solve {
        m: u32,
        b: String,
        source: SolveError,
    },
    #[error("m = {m}, b = {b}: solver answered {got:?}, expected {want:?}")]
    WrongAnswer {
        m: u32,
        b: String,
        got: (u32, u32),
        want: (u32, u32),
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Bit sequences for one `m`: all zeros, all ones, then `samples` draws from
/// SplitMix64 seeded with `seed + m`.
pub fn sample_bits(m: u32, samples: usize, seed: u64) -> Vec<BitSequence> {
    let len = bits_len(m);
    let mut rng = SplitMix64::new(seed.wrapping_add(m as u64));
    let mut out = vec![BitSequence::zeros(len), BitSequence::ones(len)];
    out.extend((0..samples).map(|_| BitSequence::random(&mut rng, len)));
    out
}

/// Solves one instance of `family` and checks the answer against `(w0, w1)`.
pub fn run_one(
    family: Family,
    m: u32,
    b: &BitSequence,
    strategy: StrategyKind,
    timing: bool,
) -> Result<BenchRecord, BenchError> {
    let manifold = regular_subdivision(m)?;
    let strat = strategy.strategy(m);
    let err = |source| BenchError::Solve {
        m,
        b: b.to_string(),
        source,
    };
    let started = Instant::now();
    let (facet, total, interior) = match family {
        Family::Regular2Spm => {
            let oracle = LabelingOracle::new(CbRule::new(b.clone(), m)?);
            let mut inst = SpmInstance::with_first_facet(manifold, oracle).map_err(err)?;
            let r = solve_spm(&mut inst, &strat).map_err(err)?;
            (r.facet, r.queries.total, r.queries.interior)
        }
        Family::Snake => {
            let (oracle, _) = snake_reduce(SnakeOracle::new(b.clone(), m)?);
            let mut inst = SpmInstance::with_first_facet(manifold, oracle).map_err(err)?;
            let r = solve_spm(&mut inst, &strat).map_err(err)?;
            let snake = inst.oracle.source().snake().count();
            (r.facet, snake, snake)
        }
    };
    let wall = if timing {
        started.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let got = beta(m, &facet).expect("facets lie in V_m");
    let want = (b.w0(), b.w1());
    if got != want {
        return Err(BenchError::WrongAnswer {
            m,
            b: b.to_string(),
            got,
            want,
        });
    }
    Ok(BenchRecord {
        family,
        m,
        n: family.n(m),
        strategy,
        b: b.to_string(),
        queries_total: total,
        queries_interior: interior,
        solution: got,
        wall_time_ms: wall,
    })
}

/// Runs every `(m, b)` task; rows come back sorted by `(m, b)`.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<BenchRecord>, BenchError> {
    let tasks: Vec<(u32, BitSequence)> = cfg
        .ms
        .iter()
        .flat_map(|&m| sample_bits(m, cfg.samples, cfg.seed).into_iter().map(move |b| (m, b)))
        .collect();
    let mut rows = par::try_map(&tasks, cfg.exec, |(m, b)| {
        run_one(cfg.family, *m, b, cfg.strategy, cfg.timing)
    })?;
    rows.sort_by(|a, b| a.m.cmp(&b.m).then_with(|| a.b.cmp(&b.b)));
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub m: u32,
    pub n: usize,
    pub samples: usize,
    pub worst_interior: usize,
    pub mean_interior: f64,
    pub worst_total: usize,
}

pub fn summarize(rows: &[BenchRecord]) -> Vec<SizeSummary> {
    let mut out: Vec<SizeSummary> = Vec::new();
    for chunk in rows.chunk_by(|a, b| a.m == b.m) {
        let k = chunk.len();
        out.push(SizeSummary {
            m: chunk[0].m,
            n: chunk[0].n,
            samples: k,
            worst_interior: chunk.iter().map(|r| r.queries_interior).max().unwrap_or(0),
            mean_interior: chunk.iter().map(|r| r.queries_interior as f64).sum::<f64>() / k as f64,
            worst_total: chunk.iter().map(|r| r.queries_total).max().unwrap_or(0),
        });
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`; points with `x, y ≤ 0` are skipped.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Fitted exponent of worst interior queries against `n`.
pub fn scaling_exponent(summary: &[SizeSummary]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = summary
        .iter()
        .map(|s| (s.n as f64, s.worst_interior as f64))
        .collect();
    fit_loglog(&pts)
}

/// Triangle points in the form the CLI prints.
pub fn points_of(m: u32, facet: &crate::complex::Simplex) -> Vec<GridPoint> {
    facet
        .vertices()
        .iter()
        .filter_map(|&v| crate::grid::grid_point(m, v))
        .collect()
}
