//! Exact orbit walks and density probes.
//!
//! An orbit report tabulates T^n x for n = 0, 1, 2, …: per-step norms, and
//! (when targets are supplied) the exact distance to the nearest target
//! plus the least n at which each target is approximated to within eps.
//! All distances are exact dyadic norms of exact differences; "hit" means
//! a strict inequality certified in integer arithmetic.
//!
//! When the start is a certified truncation, its tail bound is carried
//! into the report verbatim: distances refer to the computed
//! representative, and the discarded tail is accounted for separately by
//! the certificate's margin checks at the selected powers.

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicScalar;
use crate::operator::OperatorExpr;
use crate::vector::{CertifiedVector, NormKind, SparseVector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub n: u64,
    /// The iterate itself; omitted by density probes to keep reports flat.
    pub vector: Option<SparseVector>,
    pub norm: DyadicScalar,
    pub distance_to_nearest_target: Option<DyadicScalar>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    /// Position of the target in the supplied target list.
    pub target_index: usize,
    /// Least n with ‖T^n x − target‖ < eps.
    pub orbit_index: u64,
    pub distance: DyadicScalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub operator: OperatorExpr,
    pub start: SparseVector,
    pub norm: NormKind,
    pub tail_bound: Option<DyadicScalar>,
    pub eps: Option<DyadicScalar>,
    pub targets: usize,
    pub points: Vec<OrbitPoint>,
    pub hits: Vec<Hit>,
}

impl OrbitReport {
    /// One row per orbit point; exact dyadic literals, no rounding.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,norm,distance_to_nearest_target\n");
        for p in &self.points {
            let dist = p
                .distance_to_nearest_target
                .as_ref()
                .map(|d| d.to_string())
                .unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", p.n, p.norm, dist));
        }
        out
    }

    /// Every supplied target was approximated within eps.
    pub fn all_hit(&self) -> bool {
        self.hits.len() == self.targets
    }
}

/// Plain trajectory: T^n x for n = 0..=steps with exact norms and the
/// iterates themselves.
pub fn orbit(t: &OperatorExpr, x: &SparseVector, steps: u64, norm: NormKind) -> OrbitReport {
    let mut points = Vec::with_capacity(steps as usize + 1);
    let mut v = x.clone();
    for n in 0..=steps {
        if n > 0 {
            v = t.apply(&v);
        }
        points.push(OrbitPoint {
            n,
            vector: Some(v.clone()),
            norm: v.norm(norm),
            distance_to_nearest_target: None,
        });
    }
    OrbitReport {
        operator: t.clone(),
        start: x.clone(),
        norm,
        tail_bound: None,
        eps: None,
        targets: 0,
        points,
        hits: Vec::new(),
    }
}

/// Walks the orbit of a certified start until every target has been
/// approximated within eps (strictly, in exact arithmetic) or max_steps is
/// reached. Each target is credited at the least qualifying n. The walk
/// stops at the step that clears the last outstanding target, so the
/// report length is itself a density observation.
pub fn density_report(
    t: &OperatorExpr,
    x: &CertifiedVector,
    targets: &[SparseVector],
    eps: &DyadicScalar,
    max_steps: u64,
) -> OrbitReport {
    assert!(eps.is_positive(), "eps must be strictly positive");
    let norm = x.norm;
    let mut remaining: Vec<usize> = (0..targets.len()).collect();
    let mut points = Vec::new();
    let mut hits: Vec<Hit> = Vec::new();
    let mut v = x.computed.clone();
    for n in 0..=max_steps {
        if n > 0 {
            v = t.apply(&v);
        }
        let mut nearest: Option<DyadicScalar> = None;
        for target in targets {
            let dist = (&v - target).norm(norm);
            if nearest.as_ref().is_none_or(|best| dist < *best) {
                nearest = Some(dist);
            }
        }
        remaining.retain(|&i| {
            let dist = (&v - &targets[i]).norm(norm);
            if dist < *eps {
                hits.push(Hit { target_index: i, orbit_index: n, distance: dist });
                false
            } else {
                true
            }
        });
        points.push(OrbitPoint {
            n,
            vector: None,
            norm: v.norm(norm),
            distance_to_nearest_target: nearest,
        });
        if remaining.is_empty() {
            break;
        }
    }
    hits.sort_by_key(|h| h.target_index);
    OrbitReport {
        operator: t.clone(),
        start: x.computed.clone(),
        norm,
        tail_bound: Some(x.tail_bound.clone()),
        eps: Some(eps.clone()),
        targets: targets.len(),
        points,
        hits,
    }
}
