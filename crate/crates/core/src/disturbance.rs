//! Disturbance-based quantumness: the optimized average disturbance of an
//! ensemble, the entanglement of disturbance of pure bipartite states and
//! its bounds, the general maximal-disturbance bounds, and Haar averages.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_unchecked, eigh_unchecked, trace_norm_unchecked, ComplexMatrix};
use crate::measure::{
    apply_projective, block_labels, entropy_of_spectrum, local_unitary, relative_entropy, split_blocks,
    trace_distance, MeasurementScope, ProjectiveMeasurement,
};
use crate::optimize::minimize_over_bases;
use crate::parallel::{compensated_sum, map_range};
use crate::states::{
    sample_haar_state, sample_haar_unitary, schmidt_decompose, Ensemble, PureState, QuantumState,
};

/// Distance used to quantify disturbance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distance {
    /// `½ ||rho - Pi[rho]||_1`.
    Trace,
    /// `S(rho || Pi[rho])` in bits.
    RelativeEntropy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iterations: 2000,
            tolerance: 1e-8,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 || self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::DomainError(
                "restarts, iterations and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DisturbanceReport {
    pub value: f64,
    pub optimal_measurements: Vec<ProjectiveMeasurement>,
    pub scope: MeasurementScope,
    pub distance: Distance,
    pub restarts_used: usize,
    pub best_restart_iterations: usize,
    /// The two best restarts agree within ten times the tolerance.
    pub converged: bool,
}

/// `sum_i p_i D(rho_i, Pi[rho_i])` for the given per-target measurements.
pub fn average_disturbance(
    ensemble: &Ensemble,
    meas: &[ProjectiveMeasurement],
    scope: &MeasurementScope,
    distance: Distance,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(ensemble.len());
    for (p, rho) in ensemble.entries() {
        let after = apply_projective(rho, meas, scope)?;
        let d = match distance {
            Distance::Trace => trace_distance(rho, &after)?,
            Distance::RelativeEntropy => relative_entropy(rho, &after)?,
        };
        // rho's support always lies inside that of its dephased version
        debug_assert!(d.is_finite());
        terms.push(p * d);
    }
    Ok(compensated_sum(terms))
}

/// Ensemble prepared for repeated evaluation of the disturbance objective.
struct Objective {
    dims: Vec<usize>,
    targets: Vec<usize>,
    labels: Vec<usize>,
    members: Vec<(f64, ComplexMatrix, f64)>,
    distance: Distance,
}

impl Objective {
    fn new(ensemble: &Ensemble, scope: &MeasurementScope, distance: Distance) -> Self {
        let dims = ensemble.dims().to_vec();
        let members = ensemble
            .entries()
            .iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, s)| {
                let entropy = match distance {
                    Distance::Trace => 0.0,
                    Distance::RelativeEntropy => entropy_of_spectrum(&s.eigenvalues()),
                };
                (*p, s.matrix().clone(), entropy)
            })
            .collect();
        Self {
            labels: block_labels(&dims, scope.targets()),
            targets: scope.targets().to_vec(),
            dims,
            members,
            distance,
        }
    }

    fn eval(&self, bases: &[ComplexMatrix]) -> f64 {
        let refs: Vec<&ComplexMatrix> = bases.iter().collect();
        let u = local_unitary(&self.dims, &self.targets, &refs);
        let ud = u.adjoint();
        compensated_sum(self.members.iter().map(|(p, rho, s_rho)| {
            let rotated = (&ud * rho) * &u;
            let (diag, off) = split_blocks(&rotated, &self.labels);
            let d = match self.distance {
                Distance::Trace => 0.5 * trace_norm_unchecked(&off),
                Distance::RelativeEntropy => entropy_of_spectrum(&eigenvalues_unchecked(&diag)) - s_rho,
            };
            p * d
        }))
    }
}

fn reduced_eigenbasis(state: &QuantumState, target: usize) -> Result<ComplexMatrix> {
    let r = state.reduced(&[target])?;
    Ok(eigh_unchecked(r.matrix()).eigenvectors)
}

/// Deterministic starting bases: computational, eigenbases of the reduced
/// average state and of the first members' reduced states, and the Schmidt
/// bases when the ensemble is a single pure bipartite state.
fn warm_starts(ensemble: &Ensemble, scope: &MeasurementScope) -> Result<Vec<Vec<ComplexMatrix>>> {
    let dims = ensemble.dims();
    let targets = scope.targets();
    let mut starts = vec![targets.iter().map(|&t| ComplexMatrix::identity(dims[t])).collect()];

    let avg = ensemble.average_state();
    starts.push(targets.iter().map(|&t| reduced_eigenbasis(&avg, t)).collect::<Result<Vec<_>>>()?);
    if ensemble.len() > 1 {
        for (_, s) in ensemble.entries().iter().take(8) {
            starts.push(targets.iter().map(|&t| reduced_eigenbasis(s, t)).collect::<Result<Vec<_>>>()?);
        }
    }

    if ensemble.len() == 1 && dims.len() == 2 {
        let rho = &ensemble.entries()[0].1;
        let eig = eigh_unchecked(rho.matrix());
        if eig.rank() == 1 {
            let n = rho.dim();
            let psi = PureState::normalized(dims.to_vec(), eig.eigenvectors.column(n - 1))?;
            let sd = schmidt_decompose(&psi, dims[0], dims[1])?;
            starts.push(
                targets
                    .iter()
                    .map(|&t| if t == 0 { sd.basis_a.clone() } else { sd.basis_b.clone() })
                    .collect(),
            );
        }
    }
    Ok(starts)
}

/// `min over Pi of sum_i p_i D(rho_i, Pi[rho_i])`, with `Pi` ranging over
/// products of complete projective measurements on the scope's targets.
pub fn quantumness(
    ensemble: &Ensemble,
    scope: &MeasurementScope,
    distance: Distance,
    cfg: &OptimizerConfig,
) -> Result<DisturbanceReport> {
    quantumness_with_starts(ensemble, scope, distance, cfg, &[])
}

/// [`quantumness`] with additional caller-supplied starting bases, one
/// matrix per scope target.
pub fn quantumness_with_starts(
    ensemble: &Ensemble,
    scope: &MeasurementScope,
    distance: Distance,
    cfg: &OptimizerConfig,
    extra_starts: &[Vec<ComplexMatrix>],
) -> Result<DisturbanceReport> {
    cfg.validate()?;
    let target_dims = scope.target_dims(ensemble.dims())?;
    let mut starts = warm_starts(ensemble, scope)?;
    starts.extend_from_slice(extra_starts);

    let objective = Objective::new(ensemble, scope, distance);
    let search = minimize_over_bases(&target_dims, &starts, cfg, |b| objective.eval(b))?;
    let optimal_measurements: Vec<ProjectiveMeasurement> = search
        .bases
        .into_iter()
        .map(ProjectiveMeasurement::from_unitary_unchecked)
        .collect();

    let value = search.value.max(0.0);
    let check = average_disturbance(ensemble, &optimal_measurements, scope, distance)?;
    let drift = (check - search.value).abs();
    if drift.is_nan() || drift > 1e-7 || search.value < -1e-9 {
        return Err(Error::InvariantViolation(format!(
            "optimized value {} does not reproduce ({check})",
            search.value
        )));
    }
    Ok(DisturbanceReport {
        value,
        optimal_measurements,
        scope: scope.clone(),
        distance,
        restarts_used: search.restarts_used,
        best_restart_iterations: search.best_iterations,
        converged: search.converged,
    })
}

/// Nonzero entries of a probability vector, renormalized.
fn normalize_distribution(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution("negative or non-finite entry".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    let kept: Vec<f64> = probs.iter().copied().filter(|&p| p >= 1e-12).collect();
    let s: f64 = kept.iter().sum();
    Ok(kept.into_iter().map(|p| p / s).collect())
}

/// `sum_i p_i / (c + p_i) - 1` over the nonzero entries.
pub fn implicit_residual(c: f64, probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| p / (c + p)).sum::<f64>() - 1.0
}

/// The unique `c >= 0` with `sum_i p_i / (c + p_i) = 1` for Schmidt
/// probabilities `p`, found by bisection on `[0, 1]` run until the bracket
/// stops shrinking; the midpoint with the smallest residual is returned.
pub fn entanglement_of_disturbance(schmidt_probs: &[f64]) -> Result<f64> {
    let p = normalize_distribution(schmidt_probs)?;
    if p.len() <= 1 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = (f64::INFINITY, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = implicit_residual(mid, &p);
        if r.abs() < best.0 {
            best = (r.abs(), mid);
        }
        if r == 0.0 || mid <= lo || mid >= hi {
            break;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.1)
}

/// Schmidt probabilities of a pure bipartite state.
pub fn schmidt_probabilities(psi: &PureState) -> Result<Vec<f64>> {
    let dims = psi.dims();
    if dims.len() != 2 {
        return Err(Error::DimensionMismatch(format!("expected two factors, got {dims:?}")));
    }
    Ok(schmidt_decompose(psi, dims[0], dims[1])?.probs)
}

const BOUND_SLACK: f64 = 1e-12;

/// Upper bound on the entanglement of disturbance from the largest Schmidt
/// probability `p1` and the Schmidt rank `r`.
pub fn edist_upper_bound(p1: f64, r: usize) -> Result<f64> {
    if r == 0 || !p1.is_finite() || p1 > 1.0 + BOUND_SLACK || p1 < 1.0 / r as f64 - BOUND_SLACK {
        return Err(Error::DomainError(format!("need 1/R <= p1 <= 1, got p1={p1}, R={r}")));
    }
    let p = p1.min(1.0);
    if r == 1 {
        return Ok(0.0);
    }
    let rf = r as f64;
    let radicand = 4.0 - 4.0 * p - 4.0 * rf + 4.0 * p * p * rf + rf * rf + 2.0 * p * rf * rf
        - 3.0 * p * p * rf * rf;
    let v = (-2.0 + 2.0 * p + rf - p * rf + radicand.max(0.0).sqrt()) / (2.0 * (rf - 1.0));
    Ok(v.max(0.0))
}

/// Large-rank limit of [`edist_upper_bound`].
pub fn edist_upper_bound_limit(p1: f64) -> Result<f64> {
    if !(0.0..=1.0 + BOUND_SLACK).contains(&p1) {
        return Err(Error::DomainError(format!("p1={p1} outside [0, 1]")));
    }
    let p = p1.min(1.0);
    Ok(0.5 * (1.0 - p + (-3.0 * p * p + 1.0 + 2.0 * p).max(0.0).sqrt()))
}

/// Lower bound from the two largest Schmidt probabilities.
pub fn edist_lower_bound(p1: f64, p2: f64) -> Result<f64> {
    if !(p1.is_finite() && p2.is_finite())
        || p2 < 0.0
        || p1 < p2 - BOUND_SLACK
        || p1 + p2 > 1.0 + BOUND_SLACK
    {
        return Err(Error::DomainError(format!(
            "need p1 >= p2 >= 0 and p1 + p2 <= 1, got ({p1}, {p2})"
        )));
    }
    let radicand = -3.0 * p1 * p1 + (p2 - 1.0).powi(2) + 2.0 * p1 * (1.0 + p2);
    Ok((0.5 * (1.0 - p1 - p2 + radicand.max(0.0).sqrt())).max(0.0))
}

/// `1 - p1`.
pub fn edist_simple_lower(p1: f64) -> Result<f64> {
    if !(0.0..=1.0 + BOUND_SLACK).contains(&p1) {
        return Err(Error::DomainError(format!("p1={p1} outside [0, 1]")));
    }
    Ok((1.0 - p1).max(0.0))
}

fn product_dim(dims: &[usize]) -> Result<f64> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DomainError(format!("invalid dimensions {dims:?}")));
    }
    Ok(dims.iter().map(|&d| d as f64).product())
}

/// `1 - 1/prod(dims)` over the measured factors.
pub fn max_disturbance_bound(dims: &[usize]) -> Result<f64> {
    Ok(1.0 - 1.0 / product_dim(dims)?)
}

/// Bound for ensembles carrying total weight `q` on states classical in a
/// common product basis.
pub fn classical_member_bound(q: f64, dims: &[usize]) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::DomainError(format!("q={q} outside [0, 1]")));
    }
    Ok((1.0 - q) * max_disturbance_bound(dims)?)
}

/// Bound for an ensemble of `n` equiprobable states, one of which can be
/// taken as classical.
pub fn n_classical_bound(n: usize, dims: &[usize]) -> Result<f64> {
    if n == 0 {
        return Err(Error::DomainError("n must be at least 1".into()));
    }
    classical_member_bound(1.0 / n as f64, dims)
}

/// `-log2(1 - Q)`.
pub fn log_disturbance(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::DomainError(format!("Q={q} outside [0, 1)")));
    }
    Ok(-(1.0 - q).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaarScope {
    /// A complete measurement of one `d`-dimensional system.
    Single,
    /// A local measurement on `A` of a state on `A ⊗ B`.
    OneSided,
    /// Local measurements on both `A` and `B`.
    TwoSided,
}

/// Analytic `(lower, upper)` bracket on the Haar-averaged trace-distance
/// disturbance. `db` is ignored for [`HaarScope::Single`].
pub fn haar_bounds(kind: HaarScope, da: usize, db: usize) -> (f64, f64) {
    let lower = match kind {
        HaarScope::Single => 1.0 - 2.0 / (da as f64 + 1.0),
        HaarScope::OneSided => 1.0 - (db as f64 + 1.0) / ((da * db) as f64 + 1.0),
        HaarScope::TwoSided => 1.0 - 2.0 / ((da * db) as f64 + 1.0),
    };
    (lower, lower.max(0.0).sqrt())
}

pub const HAAR_BATCH: usize = 1000;

#[derive(Clone, Debug, Serialize)]
pub struct HaarBatch {
    pub index: usize,
    pub samples: usize,
    pub mean: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HaarEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: usize,
    pub max_sample: f64,
    pub batches: Vec<HaarBatch>,
}

/// Monte Carlo average of the trace-distance disturbance of Haar-random
/// pure states under the computational-basis measurement of the scope's
/// targets. Batch `b` of [`HAAR_BATCH`] samples draws from a generator
/// seeded with `seed + b`.
pub fn haar_average_disturbance(
    dims: &[usize],
    scope: &MeasurementScope,
    n_samples: usize,
    seed: u64,
) -> Result<HaarEstimate> {
    if n_samples < 2 {
        return Err(Error::DomainError("need at least two samples".into()));
    }
    scope.check(dims)?;
    let total: usize = dims.iter().product();
    let labels = block_labels(dims, scope.targets());
    let n_batches = n_samples.div_ceil(HAAR_BATCH);

    let batches = map_range(n_batches, |b| {
        let size = HAAR_BATCH.min(n_samples - b * HAAR_BATCH);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(b as u64));
        (0..size)
            .map(|_| {
                let psi = sample_haar_state(total, &mut rng);
                let rho = ComplexMatrix::outer(psi.amplitudes());
                let (_, off) = split_blocks(&rho, &labels);
                0.5 * trace_norm_unchecked(&off)
            })
            .collect::<Vec<f64>>()
    });

    let sum = compensated_sum(batches.iter().flatten().copied());
    let sum_sq = compensated_sum(batches.iter().flatten().map(|x| x * x));
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    let max_sample = batches.iter().flatten().copied().fold(0.0, f64::max);
    Ok(HaarEstimate {
        estimate: mean,
        standard_error: (var / n).sqrt(),
        samples: n_samples,
        max_sample,
        batches: batches
            .iter()
            .enumerate()
            .map(|(index, xs)| HaarBatch {
                index,
                samples: xs.len(),
                mean: compensated_sum(xs.iter().copied()) / xs.len() as f64,
            })
            .collect(),
    })
}

/// Kraus operators `C_i` on the first factor forming the `outcomes` square
/// blocks of a Haar-random isometry, so `sum_i C_i^dagger C_i = I`.
pub fn random_kraus_set<R: Rng + ?Sized>(d: usize, outcomes: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let u = sample_haar_unitary(d * outcomes, rng);
    (0..outcomes)
        .map(|k| ComplexMatrix::from_fn(d, d, |i, j| u.get(k * d + i, j)))
        .collect()
}

/// `E(psi)` and the average `sum_i p_i E(phi_i)` after the one-sided Kraus
/// operation `phi_i = (C_i ⊗ I) psi / sqrt(p_i)`.
pub fn slocc_monotonicity_trial(psi: &PureState, kraus: &[ComplexMatrix]) -> Result<(f64, f64)> {
    let dims = psi.dims();
    if dims.len() != 2 {
        return Err(Error::DimensionMismatch(format!("expected two factors, got {dims:?}")));
    }
    let da = dims[0];
    if kraus.is_empty() || kraus.iter().any(|c| c.rows() != da || c.cols() != da) {
        return Err(Error::InvalidKrausSet(format!("need nonempty {da}x{da} operators")));
    }
    let mut completeness = ComplexMatrix::zeros(da, da);
    for c in kraus {
        completeness = &completeness + &(&c.adjoint() * c);
    }
    let dev = completeness.max_abs_diff(&ComplexMatrix::identity(da));
    if dev > 1e-8 {
        return Err(Error::InvalidKrausSet(format!("sum C^dagger C deviates from I by {dev:e}")));
    }

    let before = entanglement_of_disturbance(&schmidt_probabilities(psi)?)?;
    let mut terms = Vec::with_capacity(kraus.len());
    for c in kraus {
        let v = psi.apply_on_first(c);
        let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if p <= 1e-14 {
            continue;
        }
        let phi = PureState::normalized(dims.to_vec(), v)?;
        terms.push(p * entanglement_of_disturbance(&schmidt_probabilities(&phi)?)?);
    }
    Ok((before, compensated_sum(terms)))
}

/// Trace-distance disturbance of a pure state under fixed per-target bases.
pub fn pure_state_disturbance(psi: &PureState, meas: &[ProjectiveMeasurement], scope: &MeasurementScope) -> Result<f64> {
    average_disturbance(&Ensemble::single(psi.density()), meas, scope, Distance::Trace)
}
