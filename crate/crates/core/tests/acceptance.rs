//! One test per acceptance criterion. Each prints a PASS/FAIL line on
//! stderr before asserting, so `cargo test --test acceptance -- --nocapture`
//! (or the plain test log) shows the verdicts.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use qdisturb::disturbance::{
    average_disturbance, edist_lower_bound, edist_simple_lower, edist_upper_bound, edist_upper_bound_limit,
    haar_average_disturbance, haar_bounds, max_disturbance_bound, pure_state_disturbance, quantumness_with_starts,
    random_kraus_set, slocc_monotonicity_trial, HaarScope,
};
use qdisturb::hiding::{check_randomizing_pair, classical_hiding_limit, hiding_capability_bounds, werner_hiding_report};
use qdisturb::linalg::tensor_product;
use qdisturb::measure::{apply_projective, fidelity, overlap_bounds, trace_distance};
use qdisturb::qubit::{qubit_ensemble_quantumness, QubitEnsemble};
use qdisturb::states::{flagged_state, max_cq_qubit_state, sample_haar_state, sample_haar_unitary, schmidt_decompose};
use qdisturb::{
    entanglement_of_disturbance, quantumness, ComplexMatrix, Distance, Ensemble, MeasurementScope, OptimizerConfig,
    ProjectiveMeasurement, QuantumState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn within(name: &str, start: Instant, limit: Duration) {
    let t = start.elapsed();
    let ok = t < limit;
    verdict(&format!("{name} runtime"), ok, &format!("{:.2}s, limit {}s", t.as_secs_f64(), limit.as_secs()));
    assert!(ok, "{name} took {t:?}");
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qdisturb")).args(args).output().expect("spawn");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf8"))
}

#[test]
fn ac1_closed_form_agreement() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 1..=99 {
        let p = k as f64 / 100.0;
        let e = entanglement_of_disturbance(&[p, 1.0 - p]).unwrap();
        worst = worst.max((e - (p * (1.0 - p)).sqrt()).abs());
    }
    for d in 2..=16 {
        let e = entanglement_of_disturbance(&vec![1.0 / d as f64; d]).unwrap();
        worst = worst.max((e - (1.0 - 1.0 / d as f64)).abs());
    }
    let ok = worst <= 1e-10;
    verdict("AC1 closed-form agreement", ok, &format!("max error {worst:e}"));
    assert!(ok);
    within("AC1", start, Duration::from_secs(1));
}

#[test]
fn ac2_max_cq_qubit_value() {
    let start = Instant::now();
    let e = Ensemble::single(max_cq_qubit_state());
    let rep = quantumness(&e, &MeasurementScope::single(0), Distance::Trace, &OptimizerConfig::default()).unwrap();
    let states = Ensemble::uniform(vec![
        QuantumState::diagonal(vec![2], &[1.0, 0.0]).unwrap(),
        QuantumState::new(vec![2], ComplexMatrix::from_fn(2, 2, |_, _| c(0.5))).unwrap(),
    ])
    .unwrap();
    let (closed, _) = qubit_ensemble_quantumness(&QubitEnsemble::from_ensemble(&states).unwrap());
    let ok = (rep.value - 0.25).abs() <= 1e-5 && closed == 0.25;
    verdict("AC2 max CQ qubit value", ok, &format!("optimizer {}, closed form {closed}", rep.value));
    assert!(ok);
    within("AC2", start, Duration::from_secs(30));
}

#[test]
fn ac3_werner_suite() {
    let start = Instant::now();
    let cfg = OptimizerConfig::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for d in [2usize, 3] {
        let df = d as f64;
        let r = werner_hiding_report(d, &cfg).unwrap();
        let a = r.analytic.clone().expect("werner report carries analytic values");
        let q_ok = (r.ensemble_quantumness - df / (2.0 * (df + 1.0))).abs() <= 1e-5;
        let locc_ok = (r.locc_lower_bound - 2.0 / (df + 1.0)).abs() <= 1e-5;
        let cap_ok = a.hiding_capability == (df - 1.0) / (df + 1.0);
        let bound_ok = a.quantumness_bound == df / (df + 1.0) && a.quantumness_bound >= a.hiding_capability;
        ok &= q_ok && locc_ok && cap_ok && bound_ok;
        detail.push(format!(
            "d={d}: Q={} LOCC={} capability={} bound={}",
            r.ensemble_quantumness, r.locc_lower_bound, a.hiding_capability, a.quantumness_bound
        ));
    }
    verdict("AC3 Werner suite", ok, &detail.join("; "));
    assert!(ok);
    within("AC3", start, Duration::from_secs(120));
}

#[test]
fn ac4_haar_brackets() {
    let start = Instant::now();
    let settings: [(&str, Vec<usize>, MeasurementScope, HaarScope); 6] = [
        ("single d=2", vec![2], MeasurementScope::single(0), HaarScope::Single),
        ("single d=3", vec![3], MeasurementScope::single(0), HaarScope::Single),
        ("single d=4", vec![4], MeasurementScope::single(0), HaarScope::Single),
        ("one-sided 2x2", vec![2, 2], MeasurementScope::single(0), HaarScope::OneSided),
        ("one-sided 2x3", vec![2, 3], MeasurementScope::single(0), HaarScope::OneSided),
        ("two-sided 2x2", vec![2, 2], MeasurementScope::all(2), HaarScope::TwoSided),
    ];
    let mut all = true;
    for (name, dims, scope, kind) in settings {
        let est = haar_average_disturbance(&dims, &scope, 10_000, 0).unwrap();
        let (lo, hi) = haar_bounds(kind, dims[0], dims.get(1).copied().unwrap_or(1));
        let slack = 3.0 * est.standard_error;
        let ok = est.estimate >= lo - slack && est.estimate <= hi + slack;
        all &= ok;
        verdict(
            &format!("AC4 Haar {name}"),
            ok,
            &format!("{:.5} ± {:.5} in [{lo:.5}, {hi:.5}]", est.estimate, est.standard_error),
        );
    }
    assert!(all);
    within("AC4", start, Duration::from_secs(120));
}

/// Runs one property suite, printing its verdict. `trial` returns the
/// violation amount, positive when the property fails.
fn suite(name: &str, trials: usize, seed: u64, mut trial: impl FnMut(&mut ChaCha8Rng) -> f64) {
    let start = Instant::now();
    let mut r = rng(seed);
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let v = trial(&mut r);
        worst = worst.max(v);
        if v > 0.0 {
            failures += 1;
        }
    }
    verdict(
        &format!("AC5 {name}"),
        failures == 0,
        &format!("{trials} trials, {failures} violations, worst margin {worst:e}, {:.2}s", start.elapsed().as_secs_f64()),
    );
    assert_eq!(failures, 0, "{name}");
}

fn fast_cfg(seed: u64) -> OptimizerConfig {
    OptimizerConfig { restarts: 4, seed, ..OptimizerConfig::default() }
}

fn random_pure(r: &mut ChaCha8Rng) -> (usize, usize, qdisturb::PureState) {
    let da = r.random_range(2..=3);
    let db = r.random_range(2..=3);
    let psi = sample_haar_state(da * db, r).with_dims(vec![da, db]).unwrap();
    (da, db, psi)
}

#[test]
fn ac5_schur_concavity() {
    let start = Instant::now();
    suite("Schur concavity of the implicit root", 400, 51, |r| {
        let n = r.random_range(2..=8);
        let p = random_probs(n, r);
        let (j, k) = (r.random_range(0..n), r.random_range(0..n));
        let t: f64 = r.random_range(0.0..=1.0);
        let mut q = p.clone();
        q[j] = t * p[j] + (1.0 - t) * p[k];
        q[k] = t * p[k] + (1.0 - t) * p[j];
        entanglement_of_disturbance(&p).unwrap() - entanglement_of_disturbance(&q).unwrap() - 1e-12
    });
    within("AC5 Schur", start, Duration::from_secs(600));
}

#[test]
fn ac5_schmidt_basis_optimality() {
    let start = Instant::now();
    suite("Schmidt basis optimality", 200, 52, |r| {
        let (da, db, psi) = random_pure(r);
        let sd = schmidt_decompose(&psi, da, db).unwrap();
        let e = entanglement_of_disturbance(&sd.probs).unwrap();
        let scope = MeasurementScope::single(0);
        let at_schmidt =
            pure_state_disturbance(&psi, &[ProjectiveMeasurement::new(sd.basis_a.clone()).unwrap()], &scope).unwrap();
        let mut worst = (at_schmidt - e).abs() - 1e-9;
        for _ in 0..50 {
            let m = ProjectiveMeasurement::new(sample_haar_unitary(da, r)).unwrap();
            let v = pure_state_disturbance(&psi, &[m], &scope).unwrap();
            worst = worst.max(at_schmidt - v - 1e-9);
        }
        worst
    });
    within("AC5 Schmidt", start, Duration::from_secs(600));
}

#[test]
fn ac5_one_sided_equals_two_sided() {
    let start = Instant::now();
    let mut seed = 0;
    suite("one-sided equals two-sided on pure states", 200, 53, |r| {
        let (_, _, psi) = random_pure(r);
        let e = Ensemble::single(psi.density());
        seed += 1;
        let cfg = fast_cfg(seed);
        let one = quantumness(&e, &MeasurementScope::single(0), Distance::Trace, &cfg).unwrap();
        let two = quantumness(&e, &MeasurementScope::all(2), Distance::Trace, &cfg).unwrap();
        (one.value - two.value).abs() - 1e-5
    });
    within("AC5 one/two-sided", start, Duration::from_secs(600));
}

#[test]
fn ac5_slocc_monotonicity() {
    let start = Instant::now();
    suite("average monotonicity under one-sided Kraus operations", 500, 54, |r| {
        let (da, _, psi) = random_pure(r);
        let outcomes = r.random_range(2..=3);
        let kraus = random_kraus_set(da, outcomes, r);
        let (before, after) = slocc_monotonicity_trial(&psi, &kraus).unwrap();
        after - before - 1e-8
    });
    within("AC5 SLOCC", start, Duration::from_secs(600));
}

#[test]
fn ac5_flag_identity() {
    let start = Instant::now();
    let mut seed = 0;
    suite("flag identity", 200, 55, |r| {
        let n = r.random_range(2..=3);
        let e = random_ensemble(&[2], n, r);
        let flagged = Ensemble::single(flagged_state(&e));
        seed += 1;
        let cfg = fast_cfg(seed);
        let plain = quantumness(&e, &MeasurementScope::single(0), Distance::Trace, &cfg).unwrap();
        let a_basis = plain.optimal_measurements[0].basis().clone();
        let one = quantumness_with_starts(&flagged, &MeasurementScope::single(0), Distance::Trace, &cfg, &[vec![a_basis.clone()]])
            .unwrap()
            .value;
        let paired = vec![a_basis, ComplexMatrix::identity(n)];
        let two = quantumness_with_starts(&flagged, &MeasurementScope::all(2), Distance::Trace, &cfg, &[paired]).unwrap().value;
        let plain = plain.value;
        (plain - one).abs().max((plain - two).abs()) - 1e-5
    });
    within("AC5 flag identity", start, Duration::from_secs(600));
}

#[test]
fn ac5_coarse_graining() {
    let start = Instant::now();
    let mut seed = 0;
    suite("coarse-graining monotonicity", 200, 56, |r| {
        let d = r.random_range(2..=3);
        let e = random_ensemble(&[d], 3, r);
        seed += 1;
        let cfg = fast_cfg(seed);
        let scope = MeasurementScope::single(0);
        let fine = quantumness(&e, &scope, Distance::Trace, &cfg).unwrap();
        let merged = e.merge(0, 1).unwrap();
        let start_basis = vec![fine.optimal_measurements[0].basis().clone()];
        let coarse = quantumness_with_starts(&merged, &scope, Distance::Trace, &cfg, &[start_basis]).unwrap();
        coarse.value - fine.value - 1e-5
    });
    within("AC5 coarse-graining", start, Duration::from_secs(600));
}

#[test]
fn ac5_pinsker() {
    let start = Instant::now();
    let mut seed = 0;
    let k = (std::f64::consts::LN_2 / 2.0).sqrt();
    suite("Pinsker relation between quantumness measures", 200, 57, |r| {
        let d = r.random_range(2..=3);
        let n = r.random_range(1..=3);
        let e = random_ensemble(&[d], n, r);
        seed += 1;
        let cfg = fast_cfg(seed);
        let scope = MeasurementScope::single(0);
        let qs = quantumness(&e, &scope, Distance::RelativeEntropy, &cfg).unwrap();
        let start_basis = vec![qs.optimal_measurements[0].basis().clone()];
        let qd = quantumness_with_starts(&e, &scope, Distance::Trace, &cfg, &[start_basis]).unwrap();
        qd.value - k * qs.value.sqrt() - 1e-5
    });
    within("AC5 Pinsker", start, Duration::from_secs(600));
}

#[test]
fn ac5_fidelity_and_overlap_sandwiches() {
    let start = Instant::now();
    suite("Fuchs-van de Graaf and overlap sandwiches", 400, 58, |r| {
        let d = r.random_range(2..=6);
        let (a, b) = (random_state(&[d], r), random_state(&[d], r));
        let f = fidelity(&a, &b).unwrap();
        let t = trace_distance(&a, &b).unwrap();
        let (lo, ov, hi) = overlap_bounds(&a, &b).unwrap();
        [(1.0 - f) - t, t - (1.0 - f * f).max(0.0).sqrt(), lo - ov, ov - hi]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
            - 1e-9
    });
    within("AC5 sandwiches", start, Duration::from_secs(600));
}

#[test]
fn ac5_bound_sandwich() {
    let start = Instant::now();
    suite("bound sandwich", 400, 59, |r| {
        let n = r.random_range(1..=12);
        let mut p = random_probs(n, r);
        p.sort_by(|a, b| b.total_cmp(a));
        let e = entanglement_of_disturbance(&p).unwrap();
        let (p1, p2) = (p[0], p.get(1).copied().unwrap_or(0.0));
        let chain = [
            edist_simple_lower(p1).unwrap(),
            edist_lower_bound(p1, p2).unwrap(),
            e,
            edist_upper_bound(p1, n).unwrap(),
            edist_upper_bound_limit(p1).unwrap(),
        ];
        chain.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max) - 1e-9
    });
    within("AC5 bound sandwich", start, Duration::from_secs(600));
}

#[test]
fn ac5_max_disturbance_cap() {
    let start = Instant::now();
    suite("maximal disturbance cap", 400, 60, |r| {
        let da = r.random_range(1..=3);
        let db = r.random_range(1..=3);
        let e = random_ensemble(&[da, db], r.random_range(1..=3), r);
        let (scope, measured) = if r.random_bool(0.5) {
            (MeasurementScope::all(2), vec![da, db])
        } else {
            (MeasurementScope::single(0), vec![da])
        };
        let meas: Vec<ProjectiveMeasurement> =
            measured.iter().map(|&d| ProjectiveMeasurement::new(sample_haar_unitary(d, r)).unwrap()).collect();
        let v = average_disturbance(&e, &meas, &scope, Distance::Trace).unwrap();
        v - max_disturbance_bound(&measured).unwrap() - 1e-12
    });
    within("AC5 cap", start, Duration::from_secs(600));
}

#[test]
fn ac6_figure_reproduction() {
    let start = Instant::now();
    let (code, out) = cli(&["figure1", "--grid-steps", "40"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("p1,p2,E,upper_bound"));
    let rows: Vec<[f64; 4]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect();
    let below = rows.iter().all(|r| r[2] <= r[3] + 1e-9);
    let centre = rows.iter().find(|r| (r[0] - 1.0 / 3.0).abs() < 1e-12 && (r[1] - 1.0 / 3.0).abs() < 1e-12).unwrap();
    let centre_gap = centre[3] - centre[2];
    let widest = rows.iter().max_by(|a, b| (a[3] - a[2]).total_cmp(&(b[3] - b[2]))).unwrap();
    let away = (widest[0] - 1.0 / 3.0).abs() > 0.1;
    let ok = below && centre_gap.abs() <= 1e-9 && (centre[2] - 2.0 / 3.0).abs() < 1e-12 && away;
    verdict(
        "AC6 figure reproduction",
        ok,
        &format!(
            "{} rows, centre gap {centre_gap:e}, widest gap {:.4} at p1={:.3}, p2={:.3}",
            rows.len(),
            widest[3] - widest[2],
            widest[0],
            widest[1]
        ),
    );
    assert!(ok);
    within("AC6", start, Duration::from_secs(10));
}

/// CQ state `sum_i p_i |e_i><e_i| ⊗ rho_i` with pure conditional states,
/// so its support leaves room for a nearly orthogonal partner.
fn low_rank_cq(r: &mut ChaCha8Rng) -> (QuantumState, ComplexMatrix) {
    let basis = sample_haar_unitary(2, r);
    let p = r.random_range(0.6..0.9);
    let mut m = ComplexMatrix::zeros(4, 4);
    for (i, w) in [p, 1.0 - p].into_iter().enumerate() {
        let proj = ComplexMatrix::outer(&basis.column(i));
        let cond = sample_haar_state(2, r).density();
        m = &m + &tensor_product(&proj, cond.matrix()).scale(w);
    }
    (QuantumState::new(vec![2, 2], m).unwrap(), basis)
}

/// A state mostly supported on the orthogonal complement of `rho`'s support.
fn nearly_orthogonal(rho: &QuantumState, r: &mut ChaCha8Rng) -> QuantumState {
    let eig = qdisturb::linalg::hermitian_eigendecomposition(rho.matrix()).unwrap();
    let mut comp = ComplexMatrix::zeros(4, 4);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < 1e-9 {
            comp = &comp + &ComplexMatrix::outer(&eig.eigenvectors.column(k));
        }
    }
    let tau = random_full_rank(&[2, 2], r);
    let inside = (&(&comp * tau.matrix()) * &comp).hermitian_part();
    let tr = inside.trace().re;
    let t = r.random_range(0.0..0.05);
    let mix = &inside.scale((1.0 - t) / tr) + &random_state(&[2, 2], r).matrix().scale(t);
    QuantumState::new(vec![2, 2], mix).unwrap()
}

#[test]
fn ac7_classical_hiding_limit() {
    let start = Instant::now();
    let mut r = rng(70);
    let cfg = OptimizerConfig { restarts: 8, ..OptimizerConfig::default() };
    let mut failures = 0;
    let mut tightest = f64::INFINITY;
    for k in 0..50 {
        let (rho, basis) = if k % 2 == 0 { random_cq_state(2, 2, &mut r) } else { low_rank_cq(&mut r) };
        let sigma = if k % 2 == 0 { random_state(&[2, 2], &mut r) } else { nearly_orthogonal(&rho, &mut r) };
        let rep = hiding_capability_bounds(&rho, &sigma, &cfg).unwrap();
        let cq = [ProjectiveMeasurement::new(basis).unwrap()];
        let tilde = apply_projective(&sigma, &cq, &MeasurementScope::single(0)).unwrap();
        let rank = rho.rank().min(tilde.rank());
        let limit = classical_hiding_limit(rank, rep.epsilon).unwrap();
        let margin = rep.locc_lower_bound - (limit - 1e-6);
        tightest = tightest.min(margin);
        if margin < 0.0 {
            failures += 1;
        }
    }
    verdict(
        "AC7 classical hiding limit",
        failures == 0,
        &format!("50 pairs, {failures} violations, tightest margin {tightest:e}"),
    );
    assert_eq!(failures, 0);
    within("AC7", start, Duration::from_secs(60));
}

#[test]
fn ac8_randomizing_pair() {
    let start = Instant::now();
    let mut ok = true;
    for n in [16usize, 64, 256] {
        let mut eps = Vec::new();
        let mut eta = Vec::new();
        for seed in 0..5 {
            let c = check_randomizing_pair(8, n, seed).unwrap();
            ok &= c.epsilon <= n as f64 / 64.0 + 1e-9;
            eps.push(c.epsilon);
            eta.push(c.eta_empirical);
        }
        let max_eps = eps.iter().copied().fold(0.0, f64::max);
        let max_eta = eta.iter().copied().fold(0.0, f64::max);
        report(&format!("AC8 d=8 n={n}: max epsilon {max_eps:.6} (bound {}), empirical eta up to {max_eta:.4}", n as f64 / 64.0));
    }
    verdict("AC8 randomizing pair", ok, "epsilon <= n/d^2 on all 15 runs");
    assert!(ok);
    within("AC8", start, Duration::from_secs(60));
}

fn strip_wall_time(s: &str) -> String {
    s.lines().filter(|l| !l.trim_start().starts_with("\"wall_time\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn ac9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let ens = dir.path().join("werner.json");
    let (a, b) = qdisturb::states::werner_states(2).unwrap();
    let json = qdisturb::states::EnsembleJson::from(&Ensemble::uniform(vec![a, b]).unwrap());
    std::fs::write(&ens, serde_json::to_string(&json).unwrap()).unwrap();
    let ens = ens.to_str().unwrap();

    let commands: Vec<Vec<&str>> = vec![
        vec!["edist", "--probs", "0.5,0.3,0.2"],
        vec!["--seed", "3", "quantumness", ens, "--scope", "a"],
        vec!["--seed", "3", "quantumness", ens, "--scope", "a", "--distance", "relative-entropy"],
        vec!["--seed", "5", "haar", "--dims", "2,3", "--scope", "one-sided", "--samples", "5000"],
        vec!["--seed", "5", "haar", "--dims", "2,2", "--scope", "two-sided", "--samples", "3000", "--csv"],
        vec!["hiding", "--werner", "2"],
        vec!["--seed", "2", "--restarts", "4", "hiding", "--random", "4", "8"],
        vec!["figure1", "--grid-steps", "12"],
    ];
    let mut all = true;
    for args in &commands {
        let (c1, o1) = cli(args);
        let (c2, o2) = cli(args);
        let mut single = vec!["--threads", "1"];
        single.extend_from_slice(args);
        let (c3, o3) = cli(&single);
        let same = c1 == 0 && c1 == c2 && c1 == c3 && strip_wall_time(&o1) == strip_wall_time(&o2);
        let same = same && strip_wall_time(&o1) == strip_wall_time(&o3);
        all &= same;
        verdict(&format!("AC9 determinism `{}`", args.join(" ")), same, "repeat and --threads 1");
    }
    assert!(all);
}
