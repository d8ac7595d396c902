//! Trace-distance quantumness of qubit ensembles through Bloch geometry.
//!
//! Measuring a qubit along the unit direction `v` leaves only the component
//! of its Bloch vector parallel to `v`, so the disturbance of state `r` is
//! `½ |r x v|`. The ensemble quantumness is the minimum over `v` of the
//! weighted sum of these terms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::nelder_mead;
use crate::states::{bloch_from_qubit, BlochVector, Ensemble, STATE_TOL};

pub const FIBONACCI_POINTS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QubitEnsemble {
    entries: Vec<(f64, BlochVector)>,
}

impl QubitEnsemble {
    pub fn new(entries: Vec<(f64, BlochVector)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("empty ensemble".into()));
        }
        if entries.iter().any(|(p, _)| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = entries.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        if let Some((_, v)) = entries.iter().find(|(_, v)| v.norm() > 1.0 + STATE_TOL) {
            return Err(Error::BlochVectorTooLong(v.norm()));
        }
        Ok(Self { entries })
    }

    pub fn from_ensemble(e: &Ensemble) -> Result<Self> {
        let entries = e
            .entries()
            .iter()
            .map(|(p, s)| Ok((*p, bloch_from_qubit(s)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(f64, BlochVector)] {
        &self.entries
    }

    /// `½ sum_i p_i |r_i x v|` for a unit vector `v`.
    pub fn objective(&self, v: &BlochVector) -> f64 {
        0.5 * self.entries.iter().map(|(p, r)| p * r.cross(v).norm()).sum::<f64>()
    }
}

/// `|sin|` of the angle between two vectors via `atan2(|a x b|, a . b)`;
/// zero when either vector vanishes.
pub fn abs_sin_angle(a: &BlochVector, b: &BlochVector) -> f64 {
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return 0.0;
    }
    a.cross(b).norm().atan2(a.dot(b)).sin().abs()
}

/// `½ |sin angle(r1, r2)| min(p |r1|, (1-p) |r2|)`.
pub fn two_state_formula(p: f64, r1: &BlochVector, r2: &BlochVector) -> f64 {
    0.5 * abs_sin_angle(r1, r2) * (p * r1.norm()).min((1.0 - p) * r2.norm())
}

fn unit(v: &BlochVector) -> Option<BlochVector> {
    let n = v.norm();
    (n > 0.0).then(|| v.scaled(1.0 / n))
}

const POLE: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };

/// Quantumness and a minimizing direction. Two-member ensembles use the
/// closed form with `v` along the longer of `p_i r_i`; larger ensembles use
/// [`grid_search`].
pub fn qubit_ensemble_quantumness(e: &QubitEnsemble) -> (f64, BlochVector) {
    if let [(p, r1), (_, r2)] = e.entries() {
        let a = r1.scaled(*p);
        let b = r2.scaled(1.0 - p);
        let longer = if a.norm() >= b.norm() { a } else { b };
        return (two_state_formula(*p, r1, r2), unit(&longer).unwrap_or(POLE));
    }
    grid_search(e)
}

fn fibonacci_sphere(n: usize) -> Vec<BlochVector> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rad = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            BlochVector {
                x: rad * phi.cos(),
                y: rad * phi.sin(),
                z,
            }
        })
        .collect()
}

/// Orthonormal pair spanning the plane orthogonal to unit `c`.
fn tangent_frame(c: &BlochVector) -> (BlochVector, BlochVector) {
    let helper = if c.x.abs() < 0.9 {
        BlochVector { x: 1.0, y: 0.0, z: 0.0 }
    } else {
        BlochVector { x: 0.0, y: 1.0, z: 0.0 }
    };
    let e1 = unit(&c.cross(&helper)).unwrap_or(helper);
    let e2 = c.cross(&e1);
    (e1, e2)
}

/// Fibonacci-sphere grid of [`FIBONACCI_POINTS`] directions plus the member
/// directions, followed by simplex refinement around the best few.
pub fn grid_search(e: &QubitEnsemble) -> (f64, BlochVector) {
    let mut candidates = fibonacci_sphere(FIBONACCI_POINTS);
    candidates.extend(e.entries().iter().filter_map(|(_, r)| unit(r)));
    let mut scored: Vec<(f64, BlochVector)> = candidates.into_iter().map(|v| (e.objective(&v), v)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = scored[0];
    for &(_, c) in scored.iter().take(4) {
        let (e1, e2) = tangent_frame(&c);
        let at = |t: &[f64]| {
            let v = BlochVector {
                x: c.x + t[0] * e1.x + t[1] * e2.x,
                y: c.y + t[0] * e1.y + t[1] * e2.y,
                z: c.z + t[0] * e1.z + t[1] * e2.z,
            };
            unit(&v).unwrap_or(c)
        };
        let mut f = |t: &[f64]| e.objective(&at(t));
        let m = nelder_mead(&mut f, &[0.0, 0.0], 0.05, 2000, 1e-15, 1e-10);
        let v = at(&m.x);
        let value = e.objective(&v);
        if value < best.0 {
            best = (value, v);
        }
    }
    best
}
