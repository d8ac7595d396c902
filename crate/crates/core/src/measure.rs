//! Complete projective measurements on chosen tensor factors, and the
//! distances and entropies between states.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    digits, eigh_unchecked, singular_values, tensor_product, trace_norm_unchecked, ComplexMatrix,
    RANK_CUTOFF, ZERO,
};
use crate::states::QuantumState;

/// Accepted `max |B^dagger B - I|` for a measurement basis.
pub const UNITARY_TOL: f64 = 1e-9;

/// A complete rank-one projective measurement, stored as the unitary whose
/// columns are the basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMeasurement {
    basis: ComplexMatrix,
}

impl ProjectiveMeasurement {
    pub fn new(basis: ComplexMatrix) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::NonSquareInput {
                rows: basis.rows(),
                cols: basis.cols(),
            });
        }
        if !basis.is_finite() {
            return Err(Error::NonFiniteEntry);
        }
        let dev = basis.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::DimensionMismatch(format!(
                "measurement basis is not unitary (deviation {dev:e})"
            )));
        }
        Ok(Self { basis })
    }

    pub(crate) fn from_unitary_unchecked(basis: ComplexMatrix) -> Self {
        Self { basis }
    }

    pub fn computational(d: usize) -> Self {
        Self {
            basis: ComplexMatrix::identity(d),
        }
    }

    /// Eigenbasis of a Hermitian matrix, ascending eigenvalue order.
    pub fn eigenbasis(m: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            basis: crate::linalg::hermitian_eigendecomposition(m)?.eigenvectors,
        })
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }
}

impl Serialize for ProjectiveMeasurement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::states::matrix_to_json(&self.basis).serialize(s)
    }
}

/// The tensor factors a measurement acts on. A measurement of the whole
/// space is expressed by viewing the state as a single factor and targeting
/// factor 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasurementScope {
    targets: Vec<usize>,
}

impl MeasurementScope {
    /// Targets are sorted and deduplicated.
    pub fn new(mut targets: Vec<usize>) -> Result<Self> {
        targets.sort_unstable();
        targets.dedup();
        if targets.is_empty() {
            return Err(Error::ScopeOutOfRange {
                targets,
                factors: 0,
            });
        }
        Ok(Self { targets })
    }

    pub fn single(target: usize) -> Self {
        Self {
            targets: vec![target],
        }
    }

    /// Every factor of an `n`-factor system.
    pub fn all(n: usize) -> Self {
        Self {
            targets: (0..n.max(1)).collect(),
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn check(&self, dims: &[usize]) -> Result<()> {
        if self.targets.iter().any(|&t| t >= dims.len()) {
            return Err(Error::ScopeOutOfRange {
                targets: self.targets.clone(),
                factors: dims.len(),
            });
        }
        Ok(())
    }

    /// Dimensions of the targeted factors.
    pub fn target_dims(&self, dims: &[usize]) -> Result<Vec<usize>> {
        self.check(dims)?;
        Ok(self.targets.iter().map(|&t| dims[t]).collect())
    }
}

/// Full-space local unitary: the target bases on targeted factors,
/// identities elsewhere.
pub(crate) fn local_unitary(dims: &[usize], targets: &[usize], bases: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(1);
    let mut next = 0;
    for (k, &d) in dims.iter().enumerate() {
        let factor = if next < targets.len() && targets[next] == k {
            next += 1;
            bases[next - 1].clone()
        } else {
            ComplexMatrix::identity(d)
        };
        u = tensor_product(&u, &factor);
    }
    u
}

/// For each full-space index, the tuple of target digits packed into one
/// integer. Two indices belong to the same measurement block iff their
/// labels agree.
pub(crate) fn block_labels(dims: &[usize], targets: &[usize]) -> Vec<usize> {
    let n: usize = dims.iter().product();
    let mut dig = vec![0; dims.len()];
    (0..n)
        .map(|idx| {
            digits(idx, dims, &mut dig);
            targets.iter().fold(0, |acc, &t| acc * dims[t] + dig[t])
        })
        .collect()
}

/// Splits `m` (already expressed in the measurement basis) into its
/// block-diagonal and off-block parts.
pub(crate) fn split_blocks(m: &ComplexMatrix, labels: &[usize]) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.rows();
    let diag = ComplexMatrix::from_fn(n, n, |i, j| if labels[i] == labels[j] { m.get(i, j) } else { ZERO });
    let off = ComplexMatrix::from_fn(n, n, |i, j| if labels[i] != labels[j] { m.get(i, j) } else { ZERO });
    (diag, off)
}

fn check_measurements(state_dims: &[usize], meas: &[ProjectiveMeasurement], scope: &MeasurementScope) -> Result<()> {
    scope.check(state_dims)?;
    if meas.len() != scope.targets().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} measurements for {} targets",
            meas.len(),
            scope.targets().len()
        )));
    }
    for (m, &t) in meas.iter().zip(scope.targets()) {
        if m.dim() != state_dims[t] {
            return Err(Error::DimensionMismatch(format!(
                "measurement of dimension {} on factor {t} of dimension {}",
                m.dim(),
                state_dims[t]
            )));
        }
    }
    Ok(())
}

/// `Pi[rho] = sum_k P_k rho P_k` with one complete projective measurement per
/// target factor.
pub fn apply_projective(
    state: &QuantumState,
    meas: &[ProjectiveMeasurement],
    scope: &MeasurementScope,
) -> Result<QuantumState> {
    check_measurements(state.dims(), meas, scope)?;
    let bases: Vec<&ComplexMatrix> = meas.iter().map(|m| m.basis()).collect();
    let u = local_unitary(state.dims(), scope.targets(), &bases);
    let rotated = (&u.adjoint() * state.matrix()) * &u;
    let (diag, _) = split_blocks(&rotated, &block_labels(state.dims(), scope.targets()));
    Ok(QuantumState::from_parts_unchecked(
        state.dims().to_vec(),
        (&u * &diag) * &u.adjoint(),
    ))
}

fn check_same_dims(rho: &QuantumState, sigma: &QuantumState) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

/// `½ ||rho - sigma||_1`.
pub fn trace_distance(rho: &QuantumState, sigma: &QuantumState) -> Result<f64> {
    check_same_dims(rho, sigma)?;
    Ok((0.5 * trace_norm_unchecked(&(rho.matrix() - sigma.matrix()))).clamp(0.0, 1.0))
}

pub(crate) fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    -eigenvalues
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// `-Tr rho log2 rho`.
pub fn von_neumann_entropy(rho: &QuantumState) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues()).max(0.0)
}

/// `Tr rho (log2 rho - log2 sigma)` in bits, or `f64::INFINITY` when the
/// support of `rho` is not contained in that of `sigma`.
pub fn relative_entropy(rho: &QuantumState, sigma: &QuantumState) -> Result<f64> {
    check_same_dims(rho, sigma)?;
    let er = eigh_unchecked(rho.matrix());
    let es = eigh_unchecked(sigma.matrix());
    let n = rho.dim();
    let support: Vec<usize> = (0..n).filter(|&k| es.eigenvalues[k] > RANK_CUTOFF).collect();

    for k in (0..n).filter(|&k| er.eigenvalues[k] > RANK_CUTOFF) {
        let v = er.eigenvectors.column(k);
        let mut residual = v.clone();
        for &j in &support {
            let w = es.eigenvectors.column(j);
            let overlap: crate::C64 = w.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (r, wi) in residual.iter_mut().zip(&w) {
                *r -= overlap * wi;
            }
        }
        if residual.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() > 1e-8 {
            return Ok(f64::INFINITY);
        }
    }

    // -Tr rho log sigma = -sum_j log mu_j <w_j|rho|w_j>
    let mut cross = 0.0;
    for &j in &support {
        let w = es.eigenvectors.column(j);
        let mut expect = ZERO;
        for a in 0..n {
            for b in 0..n {
                expect += w[a].conj() * rho.matrix().get(a, b) * w[b];
            }
        }
        cross -= expect.re * es.eigenvalues[j].log2();
    }
    Ok((cross - entropy_of_spectrum(&er.eigenvalues)).max(0.0))
}

pub(crate) fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    eigh_unchecked(m).apply_function(|x| if x > RANK_CUTOFF { x.sqrt() } else { 0.0 })
}

/// `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, evaluated as the sum of singular
/// values of `sqrt(rho) sqrt(sigma)`.
pub fn fidelity(rho: &QuantumState, sigma: &QuantumState) -> Result<f64> {
    check_same_dims(rho, sigma)?;
    let prod = &psd_sqrt(rho.matrix()) * &psd_sqrt(sigma.matrix());
    Ok(singular_values(&prod).iter().sum::<f64>().clamp(0.0, 1.0))
}

/// `(F^2 / min(rank rho, rank sigma), Tr(rho sigma), F^2)`.
pub fn overlap_bounds(rho: &QuantumState, sigma: &QuantumState) -> Result<(f64, f64, f64)> {
    let f = fidelity(rho, sigma)?;
    let overlap = rho.matrix().trace_product(sigma.matrix()).re;
    let r = rho.rank().min(sigma.rank()).max(1);
    Ok((f * f / r as f64, overlap, f * f))
}
