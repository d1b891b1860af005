//! Black-box Sperner search on pseudo-manifolds: simplicial chains and flows,
//! separator-driven divide and conquer, hard instance families, and exact
//! weighted-adversary quantities.

pub mod adversary;
pub mod audit;
pub mod bench;
pub mod chain;
pub mod complex;
pub mod grid;
pub mod instances;
pub mod io;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod separation;
pub mod solver;
