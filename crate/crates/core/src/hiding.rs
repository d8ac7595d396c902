//! Data-hiding analysis of bipartite state pairs.
//!
//! The LOCC distinguishability of two states has no tractable
//! characterization, so reports carry the best one-sided projective
//! measurement found, which is a lower bound on it. The hiding capability
//! (global minus LOCC distinguishability) is then only bounded from above.
//! Every report labels which of its numbers are exact, bounds, or taken
//! from closed forms.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::disturbance::{quantumness_with_starts, Distance, DisturbanceReport, OptimizerConfig};
use crate::error::{Error, Result};
use crate::linalg::{eigh_unchecked, operator_norm, trace_norm_unchecked, ComplexMatrix};
use crate::measure::{
    block_labels, local_unitary, overlap_bounds, split_blocks, trace_distance, MeasurementScope,
    ProjectiveMeasurement,
};
use crate::optimize::minimize_over_bases;
use crate::states::{sample_haar_state, werner_states, Ensemble, QuantumState, RandomUnitaryChannel};

#[derive(Clone, Debug, Serialize)]
pub struct OverlapSandwich {
    pub lower: f64,
    pub overlap: f64,
    pub upper: f64,
}

/// Closed-form values for the Werner pair of local dimension `d`.
#[derive(Clone, Debug, Serialize)]
pub struct WernerAnalytic {
    pub d: usize,
    pub global_distance: f64,
    pub locc_distance: f64,
    pub hiding_capability: f64,
    pub ensemble_quantumness: f64,
    pub quantumness_bound: f64,
    /// Outcome-distribution distance when both parties measure in the same
    /// computational basis (computed, should equal `locc_distance`).
    pub computational_attainment: f64,
}

impl WernerAnalytic {
    pub fn new(d: usize) -> Self {
        let df = d as f64;
        Self {
            d,
            global_distance: 1.0,
            locc_distance: 2.0 / (df + 1.0),
            hiding_capability: (df - 1.0) / (df + 1.0),
            ensemble_quantumness: df / (2.0 * (df + 1.0)),
            quantumness_bound: df / (df + 1.0),
            computational_attainment: f64::NAN,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HidingReport {
    /// `D1(rho, sigma) = 1 - epsilon`.
    pub global_distance: f64,
    pub epsilon: f64,
    /// Best one-sided projective distinguishability found.
    pub locc_lower_bound: f64,
    /// `global_distance - locc_lower_bound`, an upper estimate of the
    /// hiding capability.
    pub capability_upper_estimate: f64,
    /// Quantumness of `{(½, rho), (½, sigma)}` under measurements on `A`.
    pub ensemble_quantumness: f64,
    /// `2 * ensemble_quantumness`, an upper bound on the hiding capability.
    pub quantumness_bound: f64,
    pub overlap: OverlapSandwich,
    pub locc_measurement: Vec<ProjectiveMeasurement>,
    pub quantumness_report: DisturbanceReport,
    pub analytic: Option<WernerAnalytic>,
    pub labels: BTreeMap<&'static str, &'static str>,
}

fn labels(with_analytic: bool) -> BTreeMap<&'static str, &'static str> {
    let mut m = BTreeMap::from([
        ("global_distance", "numeric, exact"),
        ("epsilon", "numeric, exact"),
        ("locc_lower_bound", "numeric, lower bound (optimized one-sided projective measurement)"),
        ("capability_upper_estimate", "numeric, upper estimate"),
        ("ensemble_quantumness", "numeric, optimized (upper estimate of the minimum)"),
        ("quantumness_bound", "numeric, upper bound on the hiding capability"),
        ("overlap", "numeric, exact"),
    ]);
    if with_analytic {
        m.insert("analytic", "closed form; locc_distance is quoted, not computed");
    }
    m
}

fn check_pair(rho: &QuantumState, sigma: &QuantumState) -> Result<()> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "pair has dims {:?} and {:?}",
            rho.dims(),
            sigma.dims()
        )));
    }
    if rho.dims().len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "hiding needs bipartite states, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

/// `½ ||Pi_A[delta]||_1` for a one-sided basis on `A`.
fn one_sided_distinguishability(delta: &ComplexMatrix, dims: &[usize], labels: &[usize], basis: &ComplexMatrix) -> f64 {
    let u = local_unitary(dims, &[0], &[basis]);
    let rotated = (&u.adjoint() * delta) * &u;
    let (diag, _) = split_blocks(&rotated, labels);
    0.5 * trace_norm_unchecked(&diag)
}

/// Global distance, one-sided LOCC lower bound, the quantumness of the
/// equal-weight pair and the bound it implies on the hiding capability.
pub fn hiding_capability_bounds(rho: &QuantumState, sigma: &QuantumState, cfg: &OptimizerConfig) -> Result<HidingReport> {
    check_pair(rho, sigma)?;
    let dims = rho.dims().to_vec();
    let scope = MeasurementScope::single(0);
    let global = trace_distance(rho, sigma)?;

    let pair = Ensemble::new(vec![(0.5, rho.clone()), (0.5, sigma.clone())])?;
    let q = quantumness_with_starts(&pair, &scope, Distance::Trace, cfg, &[])?;

    // Starting from the quantumness-optimal basis makes the reported
    // estimate respect `capability <= 2 Q` by the triangle inequality.
    let delta = rho.matrix() - sigma.matrix();
    let delta_a = crate::linalg::partial_trace(&delta, &dims, &[0])?;
    let mut starts = vec![
        vec![ComplexMatrix::identity(dims[0])],
        vec![eigh_unchecked(&delta_a).eigenvectors],
        vec![eigh_unchecked(rho.reduced(&[0])?.matrix()).eigenvectors],
        vec![eigh_unchecked(sigma.reduced(&[0])?.matrix()).eigenvectors],
    ];
    starts.push(q.optimal_measurements.iter().map(|m| m.basis().clone()).collect());

    let labels_a = block_labels(&dims, &[0]);
    let search = minimize_over_bases(&[dims[0]], &starts, cfg, |b| {
        -one_sided_distinguishability(&delta, &dims, &labels_a, &b[0])
    })?;
    let locc = (-search.value).clamp(0.0, 1.0);

    let (lower, overlap, upper) = overlap_bounds(rho, sigma)?;
    let report = HidingReport {
        global_distance: global,
        epsilon: 1.0 - global,
        locc_lower_bound: locc,
        capability_upper_estimate: global - locc,
        ensemble_quantumness: q.value,
        quantumness_bound: 2.0 * q.value,
        overlap: OverlapSandwich { lower, overlap, upper },
        locc_measurement: search.bases.into_iter().map(ProjectiveMeasurement::from_unitary_unchecked).collect(),
        quantumness_report: q,
        analytic: None,
        labels: labels(false),
    };
    validate_report(&report)?;
    Ok(report)
}

pub fn validate_report(r: &HidingReport) -> Result<()> {
    let fail = |what: String| Err(Error::InvariantViolation(what));
    if r.capability_upper_estimate > r.quantumness_bound + 1e-5 {
        return fail(format!(
            "capability estimate {} exceeds quantumness bound {}",
            r.capability_upper_estimate, r.quantumness_bound
        ));
    }
    if r.locc_lower_bound < 0.0 || r.locc_lower_bound > r.global_distance + 1e-9 {
        return fail(format!(
            "LOCC bound {} outside [0, {}]",
            r.locc_lower_bound, r.global_distance
        ));
    }
    let o = &r.overlap;
    if o.lower > o.overlap + 1e-9 || o.overlap > o.upper + 1e-9 {
        return fail(format!("overlap sandwich violated: {o:?}"));
    }
    Ok(())
}

/// Total-variation distance between the outcome distributions of the
/// computational-basis measurement of both factors.
pub fn computational_outcome_distance(rho: &QuantumState, sigma: &QuantumState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch("pair dimensions differ".into()));
    }
    Ok(0.5 * (0..rho.dim()).map(|i| (rho.matrix().get(i, i).re - sigma.matrix().get(i, i).re).abs()).sum::<f64>())
}

/// Numerical report for the Werner pair with the closed-form values attached.
pub fn werner_hiding_report(d: usize, cfg: &OptimizerConfig) -> Result<HidingReport> {
    let (sym, anti) = werner_states(d)?;
    let mut report = hiding_capability_bounds(&sym, &anti, cfg)?;
    let mut analytic = WernerAnalytic::new(d);
    analytic.computational_attainment = computational_outcome_distance(&sym, &anti)?;
    report.analytic = Some(analytic);
    report.labels = labels(true);
    Ok(report)
}

/// `max(0, 1 - sqrt(2 R eps))`: lower bound on the LOCC distinguishability
/// of a classical-quantum state from a state at global distance `1 - eps`,
/// with `R` the smaller of the relevant ranks.
pub fn classical_hiding_limit(r: usize, eps: f64) -> Result<f64> {
    if r == 0 || !eps.is_finite() || eps < 0.0 {
        return Err(Error::DomainError(format!("need R >= 1 and eps >= 0, got R={r}, eps={eps}")));
    }
    Ok((1.0 - (2.0 * r as f64 * eps).sqrt()).max(0.0))
}

/// Number of Haar-random probe states used for the empirical eta.
pub const ETA_PROBES: usize = 32;

#[derive(Clone, Debug, Serialize)]
pub struct RandomizingPairCheck {
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub epsilon_bound: f64,
    /// `d * max ||R[psi] - I/d||_inf` over computational-basis and Haar probe
    /// states; a lower estimate of the channel's true eta.
    pub eta_empirical: f64,
    pub rank: usize,
}

/// Builds the random-unitary hiding pair for `seed` (channel drawn from
/// `ChaCha8Rng::seed_from_u64(seed)`, the same stream as
/// [`crate::states::randomized_hiding_pair`]) and checks `eps <= n/d^2`.
pub fn check_randomizing_pair(d: usize, n: usize, seed: u64) -> Result<RandomizingPairCheck> {
    if d < 2 || n < 1 {
        return Err(Error::DomainError(format!("need d >= 2 and n >= 1, got d={d}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channel = RandomUnitaryChannel::sample(d, n, &mut rng);
    let first = channel.choi_state();
    let second = QuantumState::maximally_mixed(vec![d, d])?;
    let epsilon = 1.0 - trace_distance(&first, &second)?;
    let epsilon_bound = n as f64 / (d * d) as f64;

    let mixed = ComplexMatrix::identity(d).scale(1.0 / d as f64);
    let mut probes: Vec<Vec<crate::C64>> = (0..d)
        .map(|i| {
            let mut v = vec![crate::C64::new(0.0, 0.0); d];
            v[i] = crate::C64::new(1.0, 0.0);
            v
        })
        .collect();
    probes.extend((0..ETA_PROBES).map(|_| sample_haar_state(d, &mut rng).amplitudes().to_vec()));
    let mut eta = 0.0f64;
    for v in &probes {
        let out = channel.apply(&ComplexMatrix::outer(v));
        eta = eta.max(d as f64 * operator_norm(&(&out - &mixed))?);
    }

    let check = RandomizingPairCheck {
        d,
        n,
        seed,
        epsilon,
        epsilon_bound,
        eta_empirical: eta,
        rank: first.rank(),
    };
    if epsilon > epsilon_bound + 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "epsilon {epsilon} exceeds n/d^2 = {epsilon_bound}"
        )));
    }
    Ok(check)
}
