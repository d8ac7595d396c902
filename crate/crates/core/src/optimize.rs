//! Derivative-free search over products of local orthonormal bases.
//!
//! A basis on a `d`-dimensional factor is parametrized as `V exp(iH)` where
//! `V` is the restart's anchor unitary and `H` is Hermitian with zero
//! diagonal. Diagonal phases only rephase basis vectors and leave the
//! projectors alone, so `d(d-1)` real parameters suffice.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::disturbance::OptimizerConfig;
use crate::error::{Error, Result};
use crate::linalg::{unitary_exp, ComplexMatrix, C64};
use crate::parallel::map_range;
use crate::states::sample_haar_unitary;

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Adaptive Nelder-Mead (parameters scaled with the dimension). Stops when
/// both the spread of simplex values is below `ftol` and the simplex
/// diameter is below `xtol`, or after `max_iter` iterations.
pub(crate) fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
    xtol: f64,
) -> Minimum {
    let n = x0.len();
    if n == 0 {
        return Minimum {
            x: vec![],
            value: sanitize(f(x0)),
            iterations: 0,
        };
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| sanitize(f(v))).collect();

    let mut iterations = 0;
    let mut order: Vec<usize> = (0..=n).collect();
    while iterations < max_iter {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if values[best].is_finite() && spread <= ftol && diameter <= xtol {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                *c += x / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = sanitize(f(&xr));
        if fr < values[best] {
            let xe = along(alpha * beta);
            let fe = sanitize(f(&xe));
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let xc = along(alpha * gamma);
            let fc = sanitize(f(&xc));
            (xc, fc)
        } else {
            let xc = along(-gamma);
            let fc = sanitize(f(&xc));
            (xc, fc)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &k in &order[1..] {
            for (x, a) in simplex[k].iter_mut().zip(&anchor) {
                *x = a + delta * (*x - a);
            }
            values[k] = sanitize(f(&simplex[k]));
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    Minimum {
        x: simplex.swap_remove(best),
        value: values[best],
        iterations,
    }
}

/// Nelder-Mead followed by restarts from the incumbent with a halved
/// simplex, until a restart stops improving or the budget runs out.
pub(crate) fn minimize_polished(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    budget: usize,
    tol: f64,
) -> Minimum {
    let xtol = 1e-4_f64.min(tol.sqrt());
    let mut best = nelder_mead(f, x0, step, budget, tol, xtol);
    let mut used = best.iterations;
    let mut s = step;
    while used < budget && !x0.is_empty() {
        s = (s * 0.5).max(1e-3);
        let next = nelder_mead(f, &best.x, s, budget - used, tol, xtol);
        used += next.iterations;
        let gain = best.value - next.value;
        if next.value < best.value {
            best.x = next.x;
            best.value = next.value;
        }
        if gain.is_nan() || gain <= tol {
            break;
        }
    }
    best.iterations = used;
    best
}

pub(crate) fn parameter_count(d: usize) -> usize {
    d * d.saturating_sub(1)
}

/// `exp(iH)` for the zero-diagonal Hermitian `H` encoded by `theta`
/// (real and imaginary parts of each upper-triangular entry, row by row).
pub(crate) fn generator_unitary(d: usize, theta: &[f64]) -> ComplexMatrix {
    debug_assert_eq!(theta.len(), parameter_count(d));
    if theta.iter().all(|&t| t == 0.0) {
        return ComplexMatrix::identity(d);
    }
    let mut h = ComplexMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i + 1..d {
            let z = C64::new(theta[k], theta[k + 1]);
            h.set(i, j, z);
            h.set(j, i, z.conj());
            k += 2;
        }
    }
    unitary_exp(&h)
}

fn bases_at(anchor: &[ComplexMatrix], theta: &[f64]) -> Vec<ComplexMatrix> {
    let mut offset = 0;
    anchor
        .iter()
        .map(|v| {
            let d = v.rows();
            let k = parameter_count(d);
            let u = v * &generator_unitary(d, &theta[offset..offset + k]);
            offset += k;
            u
        })
        .collect()
}

pub(crate) struct BasisSearch {
    pub bases: Vec<ComplexMatrix>,
    pub value: f64,
    pub restarts_used: usize,
    pub best_iterations: usize,
    pub converged: bool,
}

/// Minimizes `objective` over one orthonormal basis per entry of
/// `target_dims`. Every warm start is used as a restart anchor; the
/// remaining restarts (up to `cfg.restarts` in total) start from Haar-random
/// bases, random restart `j` drawing from a generator seeded with
/// `cfg.seed + j`. Restarts run in parallel and the minimum is taken in
/// restart order, so the result does not depend on the worker count.
pub(crate) fn minimize_over_bases<F>(
    target_dims: &[usize],
    warm: &[Vec<ComplexMatrix>],
    cfg: &OptimizerConfig,
    objective: F,
) -> Result<BasisSearch>
where
    F: Fn(&[ComplexMatrix]) -> f64 + Sync,
{
    for w in warm {
        let ok = w.len() == target_dims.len() && w.iter().zip(target_dims).all(|(b, &d)| b.rows() == d);
        if !ok {
            return Err(Error::DimensionMismatch("warm-start basis does not match targets".into()));
        }
    }
    let n_params: usize = target_dims.iter().map(|&d| parameter_count(d)).sum();
    let total = cfg.restarts.max(warm.len()).max(1);

    let runs = map_range(total, |k| {
        let anchor: Vec<ComplexMatrix> = if k < warm.len() {
            warm[k].clone()
        } else {
            let j = (k - warm.len()) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(j));
            target_dims.iter().map(|&d| sample_haar_unitary(d, &mut rng)).collect()
        };
        let mut f = |theta: &[f64]| objective(&bases_at(&anchor, theta));
        let m = minimize_polished(&mut f, &vec![0.0; n_params], 0.4, cfg.max_iterations, cfg.tolerance);
        let bases = bases_at(&anchor, &m.x);
        (m.value, m.iterations, bases)
    });

    let mut finite: Vec<(usize, f64)> = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.0.is_finite())
        .map(|(k, r)| (k, r.0))
        .collect();
    if finite.is_empty() {
        return Err(Error::OptimizerFailure(format!(
            "all {total} restarts produced non-finite objective values"
        )));
    }
    finite.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let converged = n_params == 0
        || (finite.len() >= 2 && (finite[1].1 - finite[0].1).abs() <= 10.0 * cfg.tolerance);
    let best = finite[0].0;
    let (value, iterations, bases) = runs.into_iter().nth(best).expect("index in range");
    Ok(BasisSearch {
        bases,
        value,
        restarts_used: total,
        best_iterations: iterations,
        converged,
    })
}
