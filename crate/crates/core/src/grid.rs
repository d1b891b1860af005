//! Triangular grid `V_m = {(i, j) : i, j ≥ 0, i + j ≤ m}` and its vertex packing.
//!
//! Row-major packing: `id(i, j) = i·(2m + 3 − i)/2 + j`. Row `i` holds
//! `m − i + 1` points, so ids run densely over `0 .. C(m+2, 2)`.

use serde::{Deserialize, Serialize};

use crate::complex::Vertex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub i: u32,
    pub j: u32,
}

impl GridPoint {
    pub fn new(i: u32, j: u32) -> Self {
        GridPoint { i, j }
    }

    pub fn in_grid(&self, m: u32) -> bool {
        self.i + self.j <= m
    }

    pub fn on_boundary(&self, m: u32) -> bool {
        self.i == 0 || self.j == 0 || self.i + self.j == m
    }
}

fn row_offset(m: u32, i: u32) -> u64 {
    let (m, i) = (m as u64, i as u64);
    i * (2 * m + 3 - i) / 2
}

/// `|V_m| = C(m+2, 2)`.
pub fn grid_size(m: u32) -> usize {
    let m = m as usize;
    (m + 2) * (m + 1) / 2
}

pub fn vertex_id(m: u32, p: GridPoint) -> Vertex {
    debug_assert!(p.in_grid(m));
    (row_offset(m, p.i) + p.j as u64) as Vertex
}

/// Inverse of [`vertex_id`]; `None` for ids outside `V_m`.
pub fn grid_point(m: u32, id: Vertex) -> Option<GridPoint> {
    let id = id as u64;
    if id >= grid_size(m) as u64 {
        return None;
    }
    // largest i with row_offset(i) <= id
    let (mut lo, mut hi) = (0u32, m);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if row_offset(m, mid) <= id {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let j = (id - row_offset(m, lo)) as u32;
    Some(GridPoint::new(lo, j))
}

pub fn points(m: u32) -> impl Iterator<Item = GridPoint> {
    (0..=m).flat_map(move |i| (0..=m - i).map(move |j| GridPoint::new(i, j)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_is_dense_and_invertible() {
        for m in 0..20 {
            let ids: Vec<Vertex> = points(m).map(|p| vertex_id(m, p)).collect();
            let want: Vec<Vertex> = (0..grid_size(m) as Vertex).collect();
            assert_eq!(ids, want);
            for p in points(m) {
                assert_eq!(grid_point(m, vertex_id(m, p)), Some(p));
            }
            assert_eq!(grid_point(m, grid_size(m) as Vertex), None);
        }
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(grid_size(4), 15);
        assert_eq!(grid_size(8), 45);
        assert_eq!(points(128).filter(|p| p.on_boundary(128)).count(), 3 * 128);
    }
}
