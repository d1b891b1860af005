//! Full-information audit of an instance: validity, promises, conservation,
//! and the count of fully labeled facets. Reads every label.

use serde::Serialize;

use crate::chain::{check_conservation, ChainError, Conservation, Labeling, Ring};
use crate::complex::{PseudoManifold, Simplex};
use crate::grid::GridPoint;
use crate::instances::regular_promise_violations;
use crate::solver::{brute_force, PromiseCase};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromiseReport {
    pub problem: &'static str,
    pub holds: bool,
    pub case: Option<PromiseCase>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub dimension: usize,
    pub facets: usize,
    pub vertices: usize,
    pub boundary_ridges: usize,
    pub oriented: bool,
    pub conservation_z2: Conservation,
    pub conservation_z: Option<Conservation>,
    pub spm: PromiseReport,
    pub ospm: Option<PromiseReport>,
    /// Present for instances on `V_m`.
    pub regular: Option<PromiseReport>,
    /// Facets with `N_d = 1` in ℤ/2.
    pub fully_labeled: Vec<Simplex>,
    pub unique: bool,
}

impl AuditReport {
    pub fn conservation_holds(&self) -> bool {
        self.conservation_z2.holds() && self.conservation_z.is_none_or(|c| c.holds())
    }

    pub fn promises_hold(&self) -> bool {
        self.spm.holds && self.regular.as_ref().is_none_or(|r| r.holds)
    }
}

fn spm_promise(l: &Labeling, start: &Simplex, boundary: i64) -> Result<PromiseReport, ChainError> {
    let start_flow = Ring::Z2.reduce(crate::chain::label_flow(&l.labels_of(start)?, Default::default()));
    let (holds, case, detail) = if boundary == 1 {
        (true, Some(PromiseCase::A), "boundary flow is 1 in Z/2".to_string())
    } else if start_flow == 1 {
        (true, Some(PromiseCase::B), format!("boundary flow is 0 and start {start} is fully labeled"))
    } else {
        (false, None, format!("boundary flow is 0 and start {start} is not fully labeled"))
    };
    Ok(PromiseReport {
        problem: "spm",
        holds,
        case,
        detail,
    })
}

fn ospm_promise(m: &PseudoManifold, l: &Labeling, start: &Simplex, signed_boundary: i64) -> Result<PromiseReport, ChainError> {
    let k = m.facet_index(start).expect("start is a facet");
    let start_flow = crate::chain::label_flow(&l.labels_of(start)?, m.facet_sign(k));
    let (holds, case, detail) = if signed_boundary < 0 {
        (true, Some(PromiseCase::A), format!("(-1)^d N_(d-1)[boundary] = {signed_boundary} < 0"))
    } else if signed_boundary == 0 && start_flow == 1 {
        (true, Some(PromiseCase::B), "boundary flow is 0 and N_d[start] = 1".to_string())
    } else {
        (
            false,
            None,
            format!("(-1)^d N_(d-1)[boundary] = {signed_boundary}, N_d[start] = {start_flow}"),
        )
    };
    Ok(PromiseReport {
        problem: "ospm",
        holds,
        case,
        detail,
    })
}

/// Audits `(m, l)`; `start` defaults to the first facet and `grid_m` enables
/// the REGULAR 2-SPM boundary check.
pub fn audit(
    m: &PseudoManifold,
    l: &Labeling,
    start: Option<&Simplex>,
    grid_m: Option<u32>,
) -> Result<AuditReport, ChainError> {
    let start = start.or(m.facets().first()).cloned().unwrap_or_else(|| {
        Simplex::new(0..m.dim() as u32 + 1).expect("nonempty")
    });
    let conservation_z2 = check_conservation(&m.unoriented(), l)?;
    let conservation_z = if m.is_oriented() {
        Some(check_conservation(m, l)?)
    } else {
        None
    };
    let spm = spm_promise(l, &start, conservation_z2.boundary)?;
    let ospm = match conservation_z {
        Some(c) if m.facet_index(&start).is_some() => Some(ospm_promise(m, l, &start, c.boundary)?),
        _ => None,
    };
    let regular = grid_m.map(|gm| {
        let bad: Vec<GridPoint> = regular_promise_violations(gm, l);
        PromiseReport {
            problem: "regular2spm",
            holds: bad.is_empty(),
            case: None,
            detail: if bad.is_empty() {
                "l(0,k) != 1, l(k,0) != 0, l(k,m-k) != 2 for all k".to_string()
            } else {
                format!(
                    "violated at {}",
                    bad.iter()
                        .map(|p| format!("({},{})", p.i, p.j))
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            },
        }
    });
    let fully_labeled = brute_force(&m.unoriented(), l, Ring::Z2, 1)?;
    Ok(AuditReport {
        dimension: m.dim(),
        facets: m.len(),
        vertices: m.vertices().len(),
        boundary_ridges: m.boundary_complex().len(),
        oriented: m.is_oriented(),
        conservation_z2,
        conservation_z,
        spm,
        ospm,
        regular,
        unique: fully_labeled.len() == 1,
        fully_labeled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::vertex_id;
    use crate::instances::{labeling_cb, random_manifold_2d, regular_subdivision, BitSequence};

    #[test]
    fn cb_instances_pass() {
        for b in BitSequence::all(4) {
            let m = regular_subdivision(6).unwrap();
            let r = audit(&m, &labeling_cb(&b, 6).unwrap(), None, Some(6)).unwrap();
            assert!(r.promises_hold() && r.conservation_holds() && r.unique);
            assert_eq!(r.spm.case, Some(PromiseCase::A));
        }
    }

    #[test]
    fn regular_violation_flagged() {
        let m = regular_subdivision(4).unwrap();
        let mut l = labeling_cb(&"00".parse().unwrap(), 4).unwrap();
        l.insert(vertex_id(4, GridPoint::new(0, 1)), 1);
        let r = audit(&m, &l, None, Some(4)).unwrap();
        assert!(!r.regular.unwrap().holds);
    }

    #[test]
    fn random_conservation() {
        for seed in 0..100 {
            let (m, l) = random_manifold_2d(seed, 30).unwrap();
            assert!(audit(&m, &l, None, None).unwrap().conservation_holds());
        }
    }
}
