//! Quantum states, ensembles and the named constructions used throughout the
//! crate: Schmidt decomposition, Haar sampling, Bloch vectors, flagged
//! (classical-register) states, Werner pairs and random-unitary hiding pairs.

use nalgebra::{DMatrix, SVD};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    complete_orthonormal_basis, eigh_unchecked, swap_operator, tensor_product, ComplexMatrix, C64,
    HERMITIAN_TOL, ONE, RANK_CUTOFF, ZERO,
};

/// Tolerance on trace and positivity of a density matrix.
pub const STATE_TOL: f64 = 1e-9;
/// Tolerance on the norm of a state vector.
pub const PURE_NORM_TOL: f64 = 1e-10;

/// A density matrix together with its tensor-factor dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidState(format!("invalid factor dimensions {dims:?}")));
    }
    Ok(dims.iter().product())
}

impl QuantumState {
    /// Validates Hermiticity, positivity and unit trace (all within
    /// [`STATE_TOL`]) and stores the Hermitian part of `matrix`.
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let total = check_dims(&dims)?;
        if !matrix.is_square() || matrix.rows() != total {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need a {total}x{total} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::NonFiniteEntry);
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { deviation });
        }
        let matrix = matrix.hermitian_part();
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
        }
        let min_eig = eigh_unchecked(&matrix).eigenvalues[0];
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { dims, matrix })
    }

    /// For matrices produced by trace-preserving maps of valid states.
    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, matrix: ComplexMatrix) -> Self {
        Self {
            dims,
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        Ok(Self {
            dims,
            matrix: ComplexMatrix::identity(total).scale(1.0 / total as f64),
        })
    }

    /// Diagonal state with the given probabilities in the computational basis.
    pub fn diagonal(dims: Vec<usize>, probs: &[f64]) -> Result<Self> {
        Self::new(dims, ComplexMatrix::from_real_diagonal(probs))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Reduced state on the listed factors.
    pub fn reduced(&self, keep: &[usize]) -> Result<QuantumState> {
        let m = crate::linalg::partial_trace(&self.matrix, &self.dims, keep)?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let dims = if kept.is_empty() {
            vec![1]
        } else {
            kept.iter().map(|&k| self.dims[k]).collect()
        };
        Ok(Self::from_parts_unchecked(dims, m))
    }

    pub fn tensor(&self, other: &QuantumState) -> QuantumState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts_unchecked(dims, tensor_product(&self.matrix, &other.matrix))
    }

    /// Same matrix viewed with a different factorization of its dimension.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if total != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot view a {}-dimensional state with dims {dims:?}",
                self.dim()
            )));
        }
        Ok(Self { dims, ..self })
    }

    /// Eigenvalue count above [`RANK_CUTOFF`].
    pub fn rank(&self) -> usize {
        eigh_unchecked(&self.matrix).rank()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh_unchecked(&self.matrix).eigenvalues
    }

    /// Applies `U rho U^dagger` for a full-space unitary.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<QuantumState> {
        if u.rows() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch("unitary does not match state".into()));
        }
        Ok(Self::from_parts_unchecked(
            self.dims.clone(),
            (u * &self.matrix) * &u.adjoint(),
        ))
    }
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need {total} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm2} differs from 1")));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Normalizes `amplitudes` first; fails only on a zero or non-finite vector.
    pub fn normalized(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(dims, amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = check_dims(&dims)?;
        if index >= total {
            return Err(Error::DimensionMismatch(format!("basis index {index} >= {total}")));
        }
        let mut amps = vec![ZERO; total];
        amps[index] = ONE;
        Self::new(dims, amps)
    }

    /// `sum_i |ii> / sqrt(d)`.
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        let mut amps = vec![ZERO; d * d];
        let a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            amps[i * d + i] = a;
        }
        Self::new(vec![d, d], amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, self.amplitudes)
    }

    pub fn density(&self) -> QuantumState {
        QuantumState::from_parts_unchecked(self.dims.clone(), ComplexMatrix::outer(&self.amplitudes))
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `(A ⊗ I) |psi>` for an operator acting on the first of two factors,
    /// left unnormalized.
    pub(crate) fn apply_on_first(&self, op: &ComplexMatrix) -> Vec<C64> {
        let (da, db) = (self.dims[0], self.dims[1]);
        let mut out = vec![ZERO; da * db];
        for i in 0..da {
            for k in 0..da {
                let c = op.get(i, k);
                if c == ZERO {
                    continue;
                }
                for j in 0..db {
                    out[i * db + j] += c * self.amplitudes[k * db + j];
                }
            }
        }
        out
    }
}

/// Descending Schmidt probabilities with local bases whose leading columns
/// are the Schmidt vectors.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub probs: Vec<f64>,
    pub basis_a: ComplexMatrix,
    pub basis_b: ComplexMatrix,
}

impl SchmidtDecomposition {
    /// `sum_i sqrt(p_i) |a_i>|b_i>`.
    pub fn reconstruct(&self) -> Result<PureState> {
        let (da, db) = (self.basis_a.rows(), self.basis_b.rows());
        let mut amps = vec![ZERO; da * db];
        for (k, p) in self.probs.iter().enumerate() {
            let s = p.sqrt();
            for i in 0..da {
                for j in 0..db {
                    amps[i * db + j] += self.basis_a.get(i, k) * self.basis_b.get(j, k) * s;
                }
            }
        }
        PureState::normalized(vec![da, db], amps)
    }
}

pub fn schmidt_decompose(psi: &PureState, da: usize, db: usize) -> Result<SchmidtDecomposition> {
    if psi.dims() != [da, db] {
        return Err(Error::DimensionMismatch(format!(
            "expected a [{da}, {db}] pure state, got dims {:?}",
            psi.dims()
        )));
    }
    let coeffs = DMatrix::from_row_slice(da, db, psi.amplitudes());
    let svd = SVD::new(coeffs, true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let k = da.min(db);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut probs: Vec<f64> = order
        .iter()
        .map(|&i| {
            let p = svd.singular_values[i].powi(2);
            if p < RANK_CUTOFF {
                0.0
            } else {
                p
            }
        })
        .collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);

    // psi = sum_k s_k u_k ⊗ conj(v_k); row k of v_t is already conj(v_k)^T.
    let cols_a: Vec<Vec<C64>> = order.iter().map(|&i| u.column(i).iter().copied().collect()).collect();
    let cols_b: Vec<Vec<C64>> = order.iter().map(|&i| v_t.row(i).iter().copied().collect()).collect();
    Ok(SchmidtDecomposition {
        probs,
        basis_a: complete_orthonormal_basis(&cols_a, da),
        basis_b: complete_orthonormal_basis(&cols_b, db),
    })
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random state vector of dimension `d` (normalized complex Gaussian),
/// with the global phase fixed so the first amplitude is real and
/// non-negative.
pub fn sample_haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    assert!(d >= 1, "dimension must be positive");
    let mut amps: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let phase = if amps[0].norm() > 0.0 {
        amps[0].conj() / amps[0].norm()
    } else {
        ONE
    };
    amps.iter_mut().for_each(|z| *z = *z * phase / norm);
    PureState::new(vec![d], amps).expect("normalized by construction")
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1, "dimension must be positive");
    let g = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from(q)
}

/// Random mixed state: `G G^dagger / Tr` for a `dim x rank` Ginibre `G`.
pub fn sample_mixed_state<R: Rng + ?Sized>(dims: Vec<usize>, rank: usize, rng: &mut R) -> Result<QuantumState> {
    let total = check_dims(&dims)?;
    let rank = rank.clamp(1, total);
    let g = ComplexMatrix::from_fn(total, rank, |_, _| complex_gaussian(rng));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    Ok(QuantumState::from_parts_unchecked(dims, m.scale(1.0 / tr)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        if v.norm() > 1.0 + STATE_TOL {
            return Err(Error::BlochVectorTooLong(v.norm()));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &BlochVector) -> BlochVector {
        BlochVector {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn scaled(&self, s: f64) -> BlochVector {
        BlochVector {
            x: self.x * s,
            y: self.y * s,
            z: self.z * s,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

pub fn bloch_from_qubit(state: &QuantumState) -> Result<BlochVector> {
    if state.dim() != 2 {
        return Err(Error::NotAQubit(state.dim()));
    }
    let m = state.matrix();
    let off = m.get(0, 1);
    Ok(BlochVector {
        x: 2.0 * off.re,
        y: -2.0 * off.im,
        z: m.get(0, 0).re - m.get(1, 1).re,
    })
}

/// `(I + r . sigma) / 2`.
pub fn qubit_from_bloch(v: &BlochVector) -> Result<QuantumState> {
    if v.norm() > 1.0 + STATE_TOL {
        return Err(Error::BlochVectorTooLong(v.norm()));
    }
    let m = ComplexMatrix::from_row_major(
        2,
        2,
        vec![
            C64::new((1.0 + v.z) / 2.0, 0.0),
            C64::new(v.x / 2.0, -v.y / 2.0),
            C64::new(v.x / 2.0, v.y / 2.0),
            C64::new((1.0 - v.z) / 2.0, 0.0),
        ],
    )?;
    Ok(QuantumState::from_parts_unchecked(vec![2], m))
}

/// Probability-weighted states on a common space.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    entries: Vec<(f64, QuantumState)>,
}

impl Ensemble {
    pub fn new(entries: Vec<(f64, QuantumState)>) -> Result<Self> {
        let Some((_, first)) = entries.first() else {
            return Err(Error::InvalidDistribution("empty ensemble".into()));
        };
        let dims = first.dims().to_vec();
        if let Some((_, bad)) = entries.iter().find(|(_, s)| s.dims() != dims.as_slice()) {
            return Err(Error::DimensionMismatch(format!(
                "ensemble members have dims {dims:?} and {:?}",
                bad.dims()
            )));
        }
        if entries.iter().any(|(p, _)| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = entries.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { entries })
    }

    pub fn single(state: QuantumState) -> Self {
        Self {
            entries: vec![(1.0, state)],
        }
    }

    pub fn uniform(states: Vec<QuantumState>) -> Result<Self> {
        let p = 1.0 / states.len().max(1) as f64;
        Self::new(states.into_iter().map(|s| (p, s)).collect())
    }

    pub fn entries(&self) -> &[(f64, QuantumState)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        self.entries[0].1.dims()
    }

    pub fn average_state(&self) -> QuantumState {
        let n = self.entries[0].1.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (p, s) in &self.entries {
            acc = &acc + &s.matrix().scale(*p);
        }
        QuantumState::from_parts_unchecked(self.dims().to_vec(), acc)
    }

    /// Replaces entries `i` and `j` by their weighted mixture (coarse graining).
    pub fn merge(&self, i: usize, j: usize) -> Result<Ensemble> {
        if i == j || i >= self.len() || j >= self.len() {
            return Err(Error::DomainError(format!("cannot merge entries {i} and {j}")));
        }
        let (pi, si) = &self.entries[i];
        let (pj, sj) = &self.entries[j];
        let p = pi + pj;
        let merged = if p > 0.0 {
            &si.matrix().scale(pi / p) + &sj.matrix().scale(pj / p)
        } else {
            si.matrix().clone()
        };
        let mut entries: Vec<(f64, QuantumState)> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i && *k != j)
            .map(|(_, e)| e.clone())
            .collect();
        entries.insert(
            i.min(j),
            (p, QuantumState::from_parts_unchecked(si.dims().to_vec(), merged)),
        );
        Ok(Ensemble { entries })
    }
}

/// `sum_i p_i rho_i ⊗ |i><i|`, with the flag register appended as the last
/// tensor factor.
pub fn flagged_state(ensemble: &Ensemble) -> QuantumState {
    let n = ensemble.len();
    let mut dims = ensemble.dims().to_vec();
    dims.push(n);
    let d = ensemble.entries()[0].1.dim();
    let mut acc = ComplexMatrix::zeros(d * n, d * n);
    for (i, (p, s)) in ensemble.entries().iter().enumerate() {
        let mut flag = vec![0.0; n];
        flag[i] = 1.0;
        let block = tensor_product(&s.matrix().scale(*p), &ComplexMatrix::from_real_diagonal(&flag));
        acc = &acc + &block;
    }
    QuantumState::from_parts_unchecked(dims, acc)
}

/// Normalized projectors onto the symmetric and antisymmetric subspaces of
/// two `d`-level systems: `(I ± W) / (d (d ± 1))`.
pub fn werner_states(d: usize) -> Result<(QuantumState, QuantumState)> {
    if d < 2 {
        return Err(Error::DomainError(format!("Werner states need d >= 2, got {d}")));
    }
    let w = swap_operator(d);
    let id = ComplexMatrix::identity(d * d);
    let df = d as f64;
    let sym = (&id + &w).scale(1.0 / (df * (df + 1.0)));
    let anti = (&id - &w).scale(1.0 / (df * (df - 1.0)));
    Ok((
        QuantumState::from_parts_unchecked(vec![d, d], sym),
        QuantumState::from_parts_unchecked(vec![d, d], anti),
    ))
}

/// `½ |0><0| ⊗ |0><0| + ½ |+><+| ⊗ |1><1|`.
pub fn max_cq_qubit_state() -> QuantumState {
    let zero = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
    let one = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
    let plus = ComplexMatrix::from_fn(2, 2, |_, _| C64::new(0.5, 0.0));
    let m = &tensor_product(&zero, &zero).scale(0.5) + &tensor_product(&plus, &one).scale(0.5);
    QuantumState::from_parts_unchecked(vec![2, 2], m)
}

/// Random-unitary channel `rho -> (1/n) sum_i U_i rho U_i^dagger`.
#[derive(Clone, Debug)]
pub struct RandomUnitaryChannel {
    unitaries: Vec<ComplexMatrix>,
}

impl RandomUnitaryChannel {
    pub fn sample<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Self {
        Self {
            unitaries: (0..n).map(|_| sample_haar_unitary(d, rng)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].rows()
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for u in &self.unitaries {
            acc = &acc + &((u * rho) * &u.adjoint());
        }
        acc.scale(1.0 / self.unitaries.len() as f64)
    }

    /// `(R ⊗ id)[psi+]`. Since `(U ⊗ I)|psi+> = vec(U)/sqrt(d)` this is
    /// `(1/(n d)) sum_i vec(U_i) vec(U_i)^dagger`.
    pub fn choi_state(&self) -> QuantumState {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d * d, d * d);
        for u in &self.unitaries {
            acc = &acc + &ComplexMatrix::outer(&u.row_major_entries());
        }
        let scale = 1.0 / (self.unitaries.len() as f64 * d as f64);
        QuantumState::from_parts_unchecked(vec![d, d], acc.scale(scale))
    }
}

/// `((R ⊗ id)[psi+], I/d^2)` for a channel of `n` Haar-random unitaries.
pub fn randomized_hiding_pair<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    rng: &mut R,
) -> Result<(QuantumState, QuantumState)> {
    if d < 2 || n < 1 {
        return Err(Error::DomainError(format!("need d >= 2 and n >= 1, got d={d}, n={n}")));
    }
    let channel = RandomUnitaryChannel::sample(d, n, rng);
    Ok((channel.choi_state(), QuantumState::maximally_mixed(vec![d, d])?))
}

// JSON schemas: state {"dims": [..], "matrix": [[[re, im], ..], ..]};
// ensemble {"entries": [{"p": .., "state": {..}}, ..]};
// pure state {"dims": [..], "amplitudes": [[re, im], ..]}.

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleEntryJson {
    pub p: f64,
    pub state: StateJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleJson {
    pub entries: Vec<EnsembleEntryJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PureStateJson {
    pub dims: Vec<usize>,
    pub amplitudes: Vec<[f64; 2]>,
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let z = m.get(i, j);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    let entries = rows.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
    ComplexMatrix::from_row_major(n, cols, entries)
}

impl From<&QuantumState> for StateJson {
    fn from(s: &QuantumState) -> Self {
        StateJson {
            dims: s.dims().to_vec(),
            matrix: matrix_to_json(s.matrix()),
        }
    }
}

impl TryFrom<&StateJson> for QuantumState {
    type Error = Error;
    fn try_from(j: &StateJson) -> Result<Self> {
        QuantumState::new(j.dims.clone(), matrix_from_json(&j.matrix)?)
    }
}

impl From<&Ensemble> for EnsembleJson {
    fn from(e: &Ensemble) -> Self {
        EnsembleJson {
            entries: e
                .entries()
                .iter()
                .map(|(p, s)| EnsembleEntryJson { p: *p, state: s.into() })
                .collect(),
        }
    }
}

impl TryFrom<&EnsembleJson> for Ensemble {
    type Error = Error;
    fn try_from(j: &EnsembleJson) -> Result<Self> {
        let entries = j
            .entries
            .iter()
            .map(|e| Ok((e.p, QuantumState::try_from(&e.state)?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(entries)
    }
}

impl From<&PureState> for PureStateJson {
    fn from(p: &PureState) -> Self {
        PureStateJson {
            dims: p.dims().to_vec(),
            amplitudes: p.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<&PureStateJson> for PureState {
    type Error = Error;
    fn try_from(j: &PureStateJson) -> Result<Self> {
        PureState::new(
            j.dims.clone(),
            j.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect(),
        )
    }
}
