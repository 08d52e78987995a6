//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gsi_core::experiments::*;
use gsi_core::graph::*;
use gsi_core::interpolation::*;
use gsi_core::l1::{solve_bp_box, L1Problem, SolveStatus};
use gsi_core::nystrom::*;
use gsi_core::sampling::*;
use gsi_core::smoothness::*;
use gsi_core::spectral::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::{lp_reference, median, support_enumeration};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn star() -> Graph {
    Graph::from_edges(5, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)]).unwrap()
}

fn a1() -> Outcome {
    let g = star();
    let s2 = [0.0, -2.0, -2.0, 2.0, 2.0];
    let s3 = [0.0, 2.0, 2.0, 2.0, 2.0];
    let mv2 = markov_variation(&g, &s2, Norm::L2).unwrap();
    let mv3 = markov_variation(&g, &s3, Norm::L2).unwrap();
    let q2 = laplacian_quadratic(&g, &s2).unwrap();
    let q3 = laplacian_quadratic(&g, &s3).unwrap();
    let constant = [0.0, 1.0, -7.0]
        .iter()
        .all(|&c| markov_variation(&g, &[c; 5], Norm::L2).unwrap() == 0.0);
    let pass = (mv2 - 4.0).abs() <= 1e-9 && (mv3 - 20f64.sqrt()).abs() <= 1e-9 && q2 == q3 && constant;
    outcome(pass, format!("MV(s2) {mv2:.10} MV(s3) {mv3:.10} quad {q2} / {q3} constants zero {constant}"))
}

fn a2() -> Outcome {
    let mut worst_range = 0.0f64;
    let mut worst_lead = 0.0f64;
    let mut worst_map = 0.0f64;
    let mut worst_eig = 0.0f64;
    let mut worst_identity = 0.0f64;
    for seed in 0..50u64 {
        let n = if seed < 25 { 20 } else { 100 };
        let (g, _) = random_geometric_graph(n, 6, seed, Kernel::ExpNegDist).unwrap();
        let b = markov_eigs(&g).unwrap();
        let lam = b.eigenvalues();
        let v = b.eigenvectors();
        for &l in lam.iter() {
            worst_range = worst_range.max((l.abs() - 1.0).max(0.0));
        }
        if g.is_connected() {
            let c = v.column(0);
            let spread = c.max() - c.min();
            worst_lead = worst_lead.max((lam[0] - 1.0).abs()).max(spread / c.amax());
        }
        // V = D^{-1/2} U and lambda = 1 - laplacian eigenvalue, column by column.
        let u = b.laplacian_eigenvectors();
        let mu = b.laplacian_eigenvalues();
        for j in 0..n {
            worst_map = worst_map.max((lam[j] - (1.0 - mu[j])).abs());
            for i in 0..n {
                worst_map = worst_map.max((v[(i, j)] - u[(i, j)] / g.degrees()[i].sqrt()).abs());
            }
        }
        // Eigen equations checked against freshly built operators.
        let l = normalized_laplacian(&g).unwrap();
        worst_eig = worst_eig.max((&l * u - u * DMatrix::from_diagonal(mu)).amax());
        let p = DMatrix::from_fn(n, n, |i, j| g.affinity().get(i, j) / g.degrees()[i]);
        worst_eig = worst_eig.max((&p * v - v * DMatrix::from_diagonal(lam)).amax());
        // V(M) Lambda V^{-1} s = P(M) s.
        let v_inv = v.clone().try_inverse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
        for _ in 0..10 {
            let r = rng.gen_range(1..=n / 2);
            let m = uniform_sample(n, r, rng.gen()).unwrap();
            let s = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let lhs = v * DMatrix::from_diagonal(lam) * &v_inv * &s;
            let rhs = &p * &s;
            for &i in &m {
                worst_identity = worst_identity.max((lhs[i] - rhs[i]).abs());
            }
        }
    }
    let pass = worst_range <= 1e-10 && worst_lead <= 1e-10 && worst_map <= 1e-10 && worst_eig <= 1e-10 && worst_identity <= 1e-8;
    outcome(
        pass,
        format!(
            "50 graphs: range excess {worst_range:.1e}, leading pair {worst_lead:.1e}, V/lambda map {worst_map:.1e}, eigen residual {worst_eig:.1e}, one-hop identity {worst_identity:.1e}"
        ),
    )
}

/// Per-seed graph, basis and signal for the N = 200 recovery setups.
fn recovery_instance(seed: u64, amp: Option<f64>) -> (SpectralBasis, Vec<f64>) {
    let (g, _) = random_geometric_graph(200, 12, seed, Kernel::ExpNegDist).unwrap();
    let b = markov_eigs(&g).unwrap();
    let x = match amp {
        None => bandlimited_signal(&b, 20, derive_seed(seed, 7)).unwrap(),
        Some(a) => approx_bandlimited_signal(&b, 20, a, derive_seed(seed, 7)).unwrap(),
    };
    (b, x)
}

fn a3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [20usize, 40] {
        let mut hits = 0;
        let mut worst = 0.0f64;
        for seed in 0..20u64 {
            let (b, x) = recovery_instance(seed, None);
            let m = greedy_spectral_sample(b.eigenvectors(), 20, r).unwrap();
            let s = SampleSet::from_signal(&x, &m).unwrap();
            let y = interpolate_one_shot(&b, &s, 1e-8, 200).unwrap();
            let e = relative_error(&x, &y.signal, ErrorMode::NormalizedDiff).unwrap();
            worst = worst.max(e);
            hits += usize::from(e <= 1e-4);
        }
        pass &= hits >= 18;
        parts.push(format!("r={r}: {hits}/20 with error <= 1e-4 (worst {worst:.2e})"));
    }
    outcome(pass, parts.join("; "))
}

fn a4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [20usize, 40] {
        let (mut one, mut reg, mut lsq) = (Vec::new(), Vec::new(), Vec::new());
        for seed in 0..20u64 {
            let (b, x) = recovery_instance(seed, Some(0.05));
            let m = greedy_spectral_sample(b.eigenvectors(), 20, r).unwrap();
            let s = SampleSet::from_signal(&x, &m).unwrap();
            let err = |y: &[f64]| relative_error(&x, y, ErrorMode::NormalizedDiff).unwrap();
            one.push(err(&interpolate_one_shot(&b, &s, 1e-8, 200).unwrap().signal));
            reg.push(err(&spectral_regression_baseline(&b, &s, r).unwrap().signal));
            lsq.push(err(&least_squares_baseline(&b, &s, 200).unwrap().signal));
        }
        let (one, reg, lsq) = (median(one), median(reg), median(lsq));
        pass &= one <= reg && one <= lsq;
        parts.push(format!("r={r}: one-shot {one:.4} specreg {reg:.4} lsq {lsq:.4}"));
    }
    outcome(pass, format!("medians {}", parts.join("; ")))
}

fn a5() -> Outcome {
    let mut structural = true;
    let mut accuracy = Vec::new();
    let mut notes = Vec::new();
    for seed in 0..10u64 {
        let (g, _, labels) = three_cluster_toy(seed).unwrap();
        let b = markov_eigs(&g).unwrap();
        let picks: Vec<usize> = (0..3).map(|c| labels.iter().position(|&l| l == c).unwrap()).collect();
        let hops = g.hop_distances(&picks).unwrap();
        let reach = hops.iter().flatten().copied().max().unwrap();
        let indicators = cluster_indicator_signals(&labels, 3).unwrap();
        let eta = 1e-8;
        let mut signals = Vec::new();
        for ind in &indicators {
            let s = SampleSet::from_signal(ind, &picks).unwrap();
            let res = interpolate_iterative(&g, &b, &s, eta, 100).unwrap();
            let it = &res.iterations;
            let terminates = it.len() <= reach + 1;
            let l1_up = it.windows(2).all(|w| w[1].spectrum_l1 >= w[0].spectrum_l1 - 1e-6);
            let consistent = picks
                .iter()
                .zip(s.values())
                .all(|(&i, &v)| (res.signal[i] - v).abs() <= eta * (1.0 + 1e-9) + 1e-12);
            let mv_first = it[0].markov_variation.unwrap();
            let mv_last = markov_variation(&g, &res.signal, Norm::L2).unwrap();
            let mv_down = mv_last <= mv_first + 1e-8;
            if !(terminates && l1_up && consistent && mv_down) {
                structural = false;
                notes.push(format!(
                    "seed {seed}: iterations {} (b={reach}) l1 {l1_up} consistent {consistent} mv {mv_down}",
                    it.len()
                ));
            }
            signals.push(res.signal);
        }
        let eval: Vec<usize> = (0..labels.len()).filter(|i| !picks.contains(i)).collect();
        accuracy.push(classification_accuracy(&labels, &signals, &eval).unwrap());
    }
    let mean = accuracy.iter().sum::<f64>() / accuracy.len() as f64;
    let pass = structural && mean >= 95.0;
    let mut detail = format!(
        "structure {}, mean decoding accuracy {mean:.2}% (target 95%), per seed {:?}",
        if structural { "ok" } else { "violated" },
        accuracy.iter().map(|a| a.round() as i64).collect::<Vec<_>>()
    );
    for n in notes {
        detail.push_str("; ");
        detail.push_str(&n);
    }
    outcome(pass, detail)
}

fn a6() -> Outcome {
    // Landmark rows of the extension are the block eigenvectors in both modes.
    let mut bitwise = true;
    for seed in 0..20u64 {
        let (g, _) = random_geometric_graph(60, 6, seed, Kernel::ExpNegDist).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rng.gen_range(5..=30);
        let landmarks = uniform_sample(60, r, rng.gen()).unwrap();
        let blocks = partition_kernel(&g, &landmarks).unwrap();
        let std = nystrom_extend(&blocks, NystromMode::Standard).unwrap();
        let rev = nystrom_extend(&blocks, NystromMode::Revised).unwrap();
        bitwise &= std.z.rows(0, r) == rev.z.rows(0, r) && std.q == rev.q;
        let a = nystrom_markov_eigs(&g, &landmarks, NystromMode::Standard).unwrap();
        let b = nystrom_markov_eigs(&g, &landmarks, NystromMode::Revised).unwrap();
        bitwise &= landmarks.iter().all(|&i| a.eigenvectors().row(i) == b.eigenvectors().row(i));
    }

    // Every node a landmark: the approximation is the exact basis.
    let mut full_limit = 0.0f64;
    let mut mode_gap = 0.0f64;
    for seed in 0..5u64 {
        let (g, _) = random_geometric_graph(80, 8, seed, Kernel::ExpNegDist).unwrap();
        let exact = markov_eigs(&g).unwrap();
        let all: Vec<usize> = (0..80).collect();
        let approx = nystrom_markov_eigs(&g, &all, NystromMode::Revised).unwrap();
        let x = bandlimited_signal(&exact, 10, seed).unwrap();
        let m = uniform_sample(80, 25, derive_seed(seed, 1)).unwrap();
        let s = SampleSet::from_signal(&x, &m).unwrap();
        let a = interpolate_one_shot(&approx, &s, 1e-8, 80).unwrap().signal;
        let b = interpolate_one_shot(&exact, &s, 1e-8, 80).unwrap().signal;
        let num: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|q| q * q).sum::<f64>().sqrt();
        full_limit = full_limit.max(num / den);

        // Dense-ish graph so that every sample has sampled neighbors.
        let (g, _) = random_geometric_graph(80, 30, seed, Kernel::ExpNegDist).unwrap();
        let b = markov_eigs(&g).unwrap();
        let x = bandlimited_signal(&b, 10, seed).unwrap();
        let s = SampleSet::from_signal(&x, &m).unwrap();
        let st = interpolate_nystrom(&g, &s, 1e-8, NystromMode::Standard).unwrap();
        let rv = interpolate_nystrom(&g, &s, 1e-8, NystromMode::Revised).unwrap();
        let scale = rv.spectrum.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for (p, q) in st.spectrum.iter().zip(&rv.spectrum) {
            mode_gap = mode_gap.max((p - q).abs() / scale);
        }
    }

    let (g, _) = random_geometric_graph(2000, 50, 11, Kernel::ExpNegDist).unwrap();
    let landmarks = uniform_sample(2000, 100, 12).unwrap();
    let t0 = Instant::now();
    let approx = nystrom_markov_eigs(&g, &landmarks, NystromMode::Revised).unwrap();
    let t_nys = t0.elapsed();
    let t0 = Instant::now();
    let exact = markov_eigs(&g).unwrap();
    let t_full = t0.elapsed();
    assert_eq!(approx.eigenvectors().nrows(), exact.n());
    let speedup = t_full.as_secs_f64() / t_nys.as_secs_f64();

    let pass = bitwise && full_limit <= 1e-6 && mode_gap <= 1e-6 && t_nys < t_full;
    outcome(
        pass,
        format!(
            "top block bitwise {bitwise}, r=N relative gap {full_limit:.1e}, standard/revised spectrum gap {mode_gap:.1e}, N=2000 r=100: nystrom {:.1} ms vs full {:.1} ms ({speedup:.1}x)",
            t_nys.as_secs_f64() * 1e3,
            t_full.as_secs_f64() * 1e3
        ),
    )
}

fn a7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_obj, mut worst_feas, mut worst_enum) = (0.0f64, 0.0f64, 0.0f64);
    let mut bad_status = 0;
    let mut enumerated = 0;
    for case in 0..200 {
        let r = rng.gen_range(1..=6);
        let m = rng.gen_range(r..=12);
        let eta = [0.0, 0.1, 1.0][case % 3];
        let a = DMatrix::from_fn(r, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let b = DVector::from_fn(r, |_, _| rng.sample::<f64, _>(StandardNormal));
        let sol = solve_bp_box(&L1Problem::new(a.clone(), b.clone(), eta).unwrap());
        if sol.status != SolveStatus::Optimal {
            bad_status += 1;
            continue;
        }
        let reference = lp_reference(&a, &b, eta).expect("reference solves feasible instances");
        worst_obj = worst_obj.max((sol.objective - reference).abs() / reference.abs().max(1.0));
        worst_feas = worst_feas.max(((&a * &sol.y - &b).amax() - eta).max(0.0));
        if eta == 0.0 {
            let (best, _) = support_enumeration(&a, &b).expect("full row rank");
            worst_enum = worst_enum.max((sol.objective - best).abs() / best.max(1.0));
            enumerated += 1;
        }
    }
    let pass = bad_status == 0 && worst_obj <= 1e-6 && worst_feas <= 1e-9 && worst_enum <= 1e-6;
    outcome(
        pass,
        format!(
            "200 instances: non-optimal {bad_status}, objective gap {worst_obj:.1e}, infeasibility {worst_feas:.1e}, support enumeration gap {worst_enum:.1e} over {enumerated} exact cases"
        ),
    )
}

fn a8() -> Outcome {
    let rs = [10usize, 20, 50];
    let mut errs = vec![Vec::new(); rs.len()];
    let mut reg = Vec::new();
    for seed in 0..10u64 {
        let t = synthetic_sensor_table(300, seed).unwrap();
        let g = geodesic_affinity(&t, 10, DEFAULT_DISTANCE_SCALE).unwrap();
        let b = markov_eigs(&g).unwrap();
        let y = t.values();
        for (k, &r) in rs.iter().enumerate() {
            let m = uniform_sample(300, r, derive_seed(seed, r as u64)).unwrap();
            let s = SampleSet::from_signal(&y, &m).unwrap();
            let res = interpolate_iterative(&g, &b, &s, s.default_eta(), 300).unwrap();
            errs[k].push(relative_error(&y, &res.signal, ErrorMode::RelL2).unwrap());
            if r == 10 {
                let sr = spectral_regression_baseline(&b, &s, 300).unwrap();
                reg.push(relative_error(&y, &sr.signal, ErrorMode::RelL2).unwrap());
            }
        }
    }
    let med: Vec<f64> = errs.into_iter().map(median).collect();
    let reg = median(reg);
    let pass = med.windows(2).all(|w| w[1] < w[0]) && med[0] <= reg;
    outcome(
        pass,
        format!(
            "median rel_l2 r=10 {:.4}, r=20 {:.4}, r=50 {:.4}; specreg at r=10 {reg:.4}",
            med[0], med[1], med[2]
        ),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("A1", "star-graph Markov variation", a1, Duration::from_secs(1)),
        ("A2", "spectral property suite", a2, Duration::from_secs(60)),
        ("A3", "exact recovery of bandlimited signals", a3, Duration::from_secs(300)),
        ("A4", "baseline ordering", a4, Duration::from_secs(600)),
        ("A5", "iterative interpolation on the three-cluster toy", a5, Duration::from_secs(120)),
        ("A6", "Nystrom suite", a6, Duration::from_secs(600)),
        ("A7", "l1 solver oracle", a7, Duration::from_secs(300)),
        ("A8", "sensor-field regression", a8, Duration::from_secs(300)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < limit;
        let pass = out.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "{id} {} {name}: {} [{:.2} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
