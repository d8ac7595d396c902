#![allow(dead_code)]

use std::io::Write;

use qdisturb::linalg::tensor_product;
use qdisturb::states::{sample_haar_unitary, sample_mixed_state};
use qdisturb::{ComplexMatrix, Ensemble, QuantumState, C64};
use rand::Rng;

/// Writes straight to the process stderr so the line survives the test
/// harness's output capture.
pub fn report(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

pub fn verdict(name: &str, ok: bool, detail: &str) {
    report(&format!("{name}: {} ({detail})", if ok { "PASS" } else { "FAIL" }));
}

pub fn random_state<R: Rng>(dims: &[usize], rng: &mut R) -> QuantumState {
    let total: usize = dims.iter().product();
    let rank = rng.random_range(1..=total);
    sample_mixed_state(dims.to_vec(), rank, rng).unwrap()
}

pub fn random_full_rank<R: Rng>(dims: &[usize], rng: &mut R) -> QuantumState {
    let total: usize = dims.iter().product();
    sample_mixed_state(dims.to_vec(), total, rng).unwrap()
}

pub fn random_probs<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn random_ensemble<R: Rng>(dims: &[usize], n: usize, rng: &mut R) -> Ensemble {
    let p = random_probs(n, rng);
    Ensemble::new(p.into_iter().map(|pi| (pi, random_state(dims, rng))).collect()).unwrap()
}

/// `sum_i p_i |e_i><e_i| ⊗ rho_i` for a random basis `{e_i}` of the first
/// qubit-or-qudit factor, with well-separated weights.
pub fn random_cq_state<R: Rng>(da: usize, db: usize, rng: &mut R) -> (QuantumState, ComplexMatrix) {
    let basis = sample_haar_unitary(da, rng);
    let mut probs: Vec<f64>;
    loop {
        probs = random_probs(da, rng);
        let mut sorted = probs.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        if sorted.windows(2).all(|w| w[1] - w[0] > 0.05) {
            break;
        }
    }
    let mut m = ComplexMatrix::zeros(da * db, da * db);
    for (i, p) in probs.iter().enumerate() {
        let e = basis.column(i);
        let proj = ComplexMatrix::outer(&e);
        let cond = random_state(&[db], rng);
        m = &m + &tensor_product(&proj, cond.matrix()).scale(*p);
    }
    (QuantumState::new(vec![da, db], m).unwrap(), basis)
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
