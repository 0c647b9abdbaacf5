//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Criteria run concurrently; output is printed in order.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use paradox_core::analysis::{analyze, compare_graph, drop_isolates, DegreeSource};
use paradox_core::degree::{edge_end, fit_mean_var, make_poisson, DegreeDistribution};
use paradox_core::gfp::{gfp_delta_transform, sample_attributes};
use paradox_core::graph::{node_stats, paradox_summary, Graph};
use paradox_core::maxent::gamma_for_r;
use paradox_core::poisson::{poisson_delta_negative_fraction, poisson_delta_pmf};
use paradox_core::sampler::{sample_configuration, sample_degree_correlated, sample_poisson_rg, SamplePolicy};
use paradox_core::transform::{
    config_delta_transform, correlated_delta_transform, invert_with_kernel, invert_with_options,
    mean_var_from_transform, prob_delta_positive, smooth_points, InversionMethod,
};
use paradox_core::{AttributeModel, GridSpec, Kernel, NodeAttributes, TransformFn};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Outcome of one criterion: pass flag and a one-line account.
type Outcome = (bool, String);

fn check(ok: bool, what: String, failures: &mut Vec<String>, notes: &mut Vec<String>) {
    if !ok {
        failures.push(what.clone());
    }
    notes.push(what);
}

fn finish(failures: Vec<String>, notes: Vec<String>) -> Outcome {
    if failures.is_empty() {
        (true, notes.join("; "))
    } else {
        (false, failures.join("; "))
    }
}

fn fig_degrees(mean: f64, var: f64) -> DegreeDistribution {
    fit_mean_var(mean, var).unwrap().distribution(1e-10).unwrap()
}

fn criterion_1() -> Outcome {
    let (mut failures, mut notes) = (Vec::new(), Vec::new());
    for (lambda, want) in [(8.0, 0.35), (64.0, 0.44), (1024.0, 0.49)] {
        let got = poisson_delta_negative_fraction(lambda).unwrap();
        check((got - want).abs() <= 0.01, format!("lambda={lambda}: {got:.4} vs {want}"), &mut failures, &mut notes);
    }
    finish(failures, notes)
}

fn criterion_2() -> Outcome {
    let (mut failures, mut notes) = (Vec::new(), Vec::new());
    for lambda in [2.0, 8.0, 32.0] {
        let p = make_poisson(lambda, 1e-15).unwrap();
        let (mean, var) = mean_var_from_transform(&config_delta_transform(&p));
        let target_var = lambda * (1.0 + p.moments().mean_inverse);
        check(
            (mean - 1.0).abs() <= 1e-6 && (var - target_var).abs() <= 1e-4,
            format!(
                "lambda={lambda}: mean {mean:.9} (|err| {:.1e}), var {var:.6} vs {target_var:.6} (|err| {:.1e})",
                (mean - 1.0).abs(),
                (var - target_var).abs()
            ),
            &mut failures,
            &mut notes,
        );
    }
    finish(failures, notes)
}

fn criterion_3() -> Outcome {
    let kernel = Kernel::laplace(1.0 / 3.0).unwrap();
    let grid = GridSpec::new(-10.0, 20.0, 3001).unwrap();
    let atoms = poisson_delta_pmf(8.0, 1e-12).unwrap();
    let smoothed = smooth_points(&atoms.points(), &kernel, &grid);
    let f = config_delta_transform(&make_poisson(8.0, 1e-12).unwrap());
    let lattice = invert_with_kernel(&f, &kernel, &grid).sup_distance(&smoothed);
    let quadrature = invert_with_options(&f, &kernel, &grid, InversionMethod::Quadrature).sup_distance(&smoothed);
    let sup = lattice.max(quadrature);
    (sup <= 0.01, format!("sup-norm lattice {lattice:.1e}, quadrature {quadrature:.1e}"))
}

fn criterion_4() -> Outcome {
    let kernel = Kernel::laplace(1.0 / 3.0).unwrap();
    let (mut failures, mut notes) = (Vec::new(), Vec::new());
    for (i, (mean, var)) in [(8.0, 8.0), (8.0, 64.0), (8.0, 256.0)].into_iter().enumerate() {
        let p = fig_degrees(mean, var);
        let f = config_delta_transform(&p);
        let grid = GridSpec::auto(&f, &kernel);
        let theory = invert_with_kernel(&f, &kernel, &grid);
        let (g, report) = sample_configuration(&p, 100_000, 40 + i as u64, SamplePolicy::Erase).unwrap();
        let (g, _, _) = drop_isolates(&g, None).unwrap();
        let stats = node_stats(&g, None).unwrap();
        let w = 1.0 / stats.len() as f64;
        let points: Vec<(f64, f64)> = stats.delta.iter().map(|&d| (d, w)).collect();
        let mc = smooth_points(&points, &kernel, &grid);
        let sup = theory.sup_distance(&mc);
        check(
            sup <= 0.01,
            format!("({mean},{var}): sup {sup:.4}, erased {:.2}%", 100.0 * report.erased_fraction),
            &mut failures,
            &mut notes,
        );
    }
    finish(failures, notes)
}

fn criterion_5() -> Outcome {
    let p = fig_degrees(8.0, 64.0);
    let q = edge_end(&p);
    let (mut failures, mut notes) = (Vec::new(), Vec::new());
    for r in [-0.5, 0.0, 0.5] {
        let model = gamma_for_r(&q, r).unwrap();
        check((model.r - r).abs() <= 1e-6, format!("r={r}: hit {:.1e}", (model.r - r).abs()), &mut failures, &mut notes);
    }
    let grid: Vec<f64> = (0..13).map(|i| -0.6 + 0.1 * i as f64).collect();
    let (mut means, mut pos) = (Vec::new(), Vec::new());
    for &r in &grid {
        let model = gamma_for_r(&q, r).unwrap();
        let f = correlated_delta_transform(&p, &model.joint()).unwrap();
        means.push(mean_var_from_transform(&f).0);
        pos.push(prob_delta_positive(&f).value);
    }
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    check(decreasing, format!("E[Delta] {:.3} -> {:.3} strictly decreasing: {decreasing}", means[0], means[12]), &mut failures, &mut notes);
    let best = (0..13).max_by(|&a, &b| pos[a].total_cmp(&pos[b])).unwrap();
    check(
        grid[best] < 0.0,
        format!("P(Delta>0) peaks at r={:.1} ({:.5})", grid[best], pos[best]),
        &mut failures,
        &mut notes,
    );
    finish(failures, notes)
}

fn complete_minus_edge(n: usize) -> Graph {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&e| e != (0, 1));
    Graph::with_numeric_ids(n, edges).0
}

fn criterion_6() -> Outcome {
    let (mut failures, mut notes) = (Vec::new(), Vec::new());
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let mut worst = (0.0f64, 0.0f64);
    let mut regular_seen = 0;
    for trial in 0..100u64 {
        let n = rng.random_range(10..=1000usize);
        let seed = 1000 + trial;
        let g = match trial % 4 {
            0 => sample_poisson_rg(n, rng.random_range(1.0..6.0), seed).unwrap().0,
            1 => {
                let p = fig_degrees(rng.random_range(3.0..8.0), rng.random_range(10.0..80.0));
                sample_configuration(&p, n, seed, SamplePolicy::Erase).unwrap().0
            }
            2 => {
                let k = rng.random_range(1..5usize);
                let p = DegreeDistribution::from_pairs(&[(k, 1.0)]).unwrap();
                sample_configuration(&p, n + n % 2, seed, SamplePolicy::Reject).unwrap().0
            }
            _ => {
                let p = fig_degrees(5.0, 30.0);
                let model = gamma_for_r(&edge_end(&p), rng.random_range(-0.4..0.6)).unwrap();
                sample_degree_correlated(&model, 2 * n, seed, SamplePolicy::Erase).unwrap().0
            }
        };
        let (g, _, _) = drop_isolates(&g, None).unwrap();
        let x = sample_attributes(&g, &AttributeModel::default(), seed).unwrap();
        let (a, _) = analyze(&g, Some(&x), 0).unwrap();
        worst.0 = worst.0.max((a.mean_kappa - 1.0).abs());
        worst.1 = worst.1.max((a.mean_delta_x.unwrap() - a.cov_x_kappa.unwrap()).abs());
        let zero = a.mean_delta.abs() <= 1e-12;
        regular_seen += a.regular_components as usize;
        if (a.mean_kappa - 1.0).abs() > 1e-12
            || a.mean_delta < -1e-12
            || zero != a.regular_components
            || (a.mean_delta_x.unwrap() - a.cov_x_kappa.unwrap()).abs() > 1e-12
        {
            failures.push(format!("random graph {trial} (n={}) breaks an identity", g.node_count()));
        }
    }
    notes.push(format!(
        "100 random graphs ({regular_seen} regular): max |mean kappa - 1| {:.1e}, max |mean Dx - Cov(x,kappa)| {:.1e}",
        worst.0, worst.1
    ));

    let hand: [(&str, Graph, f64); 2] = [
        ("P3", Graph::with_numeric_ids(3, [(0, 1), (1, 2)]).0, 1.0 / 3.0),
        ("S3", Graph::with_numeric_ids(4, [(0, 1), (0, 2), (0, 3)]).0, 1.0),
    ];
    for (name, g, want) in hand {
        let s = paradox_summary(&node_stats(&g, None).unwrap());
        check(
            (s.mean_delta - want).abs() <= 1e-12 && (s.mean_kappa - 1.0).abs() <= 1e-12,
            format!("{name}: mean Delta {:.6}", s.mean_delta),
            &mut failures,
            &mut notes,
        );
    }
    let k = complete_minus_edge(1000);
    let stats = node_stats(&k, None).unwrap();
    let negative = (0..stats.len()).filter(|&i| stats.delta_sign(i).is_lt()).count();
    let s = paradox_summary(&stats);
    check(
        negative == 998 && (s.mean_delta - 2.0 / 999_000.0).abs() <= 1e-12 && (s.mean_kappa - 1.0).abs() <= 1e-12,
        format!("K1000 minus edge: {negative} negative, mean Delta {:.6e}", s.mean_delta),
        &mut failures,
        &mut notes,
    );
    finish(failures, notes)
}

fn criterion_7() -> Outcome {
    let (mut failures, mut notes) = (Vec::new(), Vec::new());
    let p = fig_degrees(8.0, 64.0);
    let q = edge_end(&p);

    // x = k reproduces the ordinary paradox
    let model = gamma_for_r(&q, 0.3).unwrap();
    let joint = model.joint();
    let gfp = gfp_delta_transform(&p, &joint, &AttributeModel::degree()).unwrap();
    let ordinary = correlated_delta_transform(&p, &joint).unwrap();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let theta = -30.0 + 0.3 * i as f64;
        worst = worst.max((gfp.eval(theta) - ordinary.eval(theta)).norm());
    }
    let (m1, v1) = mean_var_from_transform(&gfp);
    let (m2, v2) = mean_var_from_transform(&ordinary);
    let dp = (prob_delta_positive(&gfp).value - prob_delta_positive(&ordinary).value).abs();
    worst = worst.max((m1 - m2).abs()).max((v1 - v2).abs()).max(dp);
    check(worst <= 1e-8, format!("x=k reduction max diff {worst:.1e}"), &mut failures, &mut notes);

    let attr = AttributeModel::default();
    let reps = 12;
    for (ri, r) in [-0.5, 0.0, 0.5].into_iter().enumerate() {
        let model = gamma_for_r(&q, r).unwrap();
        let f = gfp_delta_transform(&p, &model.joint(), &attr).unwrap();
        let (theory, _) = mean_var_from_transform(&f);
        let covs: Vec<f64> = (0..reps)
            .map(|rep| {
                let seed = 700 + 100 * ri as u64 + rep;
                let (g, _) = sample_degree_correlated(&model, 200_000, seed, SamplePolicy::Erase).unwrap();
                let (g, _, _) = drop_isolates(&g, None).unwrap();
                let x: NodeAttributes = sample_attributes(&g, &attr, seed + 50).unwrap();
                paradox_summary(&node_stats(&g, Some(&x)).unwrap()).cov_x_kappa.unwrap()
            })
            .collect();
        let mean = covs.iter().sum::<f64>() / reps as f64;
        let sd = (covs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        let se = sd / (reps as f64).sqrt();
        check(
            (mean - theory).abs() <= 3.0 * se,
            format!("r={r}: transform {theory:.4}, simulated {mean:.4} +- {se:.4}"),
            &mut failures,
            &mut notes,
        );
    }
    finish(failures, notes)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let (mut measured, mut maxent, mut config) = (Vec::new(), Vec::new(), Vec::new());
    let mut fallbacks = 0;
    for i in 0..30u64 {
        let mean = rng.random_range(4.0..12.0);
        let var = mean * rng.random_range(1.5..12.0);
        let p = fig_degrees(mean, var);
        let q = edge_end(&p);
        let r = rng.random_range(-0.4..0.6);
        let model = match gamma_for_r(&q, r) {
            Ok(m) => m,
            Err(_) => gamma_for_r(&q, 0.0).unwrap(),
        };
        let (g, _) = sample_degree_correlated(&model, 100_000, 800 + i, SamplePolicy::Erase).unwrap();
        let (g, _, removed) = drop_isolates(&g, None).unwrap();
        let c = compare_graph(&g, DegreeSource::Empirical, removed).unwrap();
        measured.push(c.measured.std);
        config.push(c.config.std);
        match c.maxent {
            Some(m) => maxent.push(m.std),
            None => {
                fallbacks += 1;
                maxent.push(c.config.std);
            }
        }
    }
    let ybar = measured.iter().sum::<f64>() / 30.0;
    let ss_tot: f64 = measured.iter().map(|y| (y - ybar).powi(2)).sum();
    let mse = |pred: &[f64]| pred.iter().zip(&measured).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 30.0;
    let r2 = 1.0 - 30.0 * mse(&maxent) / ss_tot;
    let r2_config = 1.0 - 30.0 * mse(&config) / ss_tot;
    let (mse_maxent, mse_config) = (mse(&maxent), mse(&config));
    (
        r2 >= 0.9 && mse_maxent <= mse_config,
        format!(
            "R2 maxent {r2:.4} (config {r2_config:.4}); MSE maxent {mse_maxent:.3e} vs config {mse_config:.3e}; {fallbacks} fallbacks"
        ),
    )
}

fn criterion_9() -> Outcome {
    let (mut failures, mut notes) = (Vec::new(), Vec::new());
    let p = fig_degrees(8.0, 64.0);
    let joint = gamma_for_r(&edge_end(&p), 0.4).unwrap().joint();
    let atoms_a = vec![(-1.5, 0.2), (0.0, 0.3), (2.25, 0.5)];
    let atoms_b = vec![(1.0, 0.6), (4.0, 0.4)];
    let cases: Vec<(&str, TransformFn)> = vec![
        ("poisson", config_delta_transform(&make_poisson(8.0, 1e-12).unwrap())),
        ("config", config_delta_transform(&p)),
        ("maxent", correlated_delta_transform(&p, &joint).unwrap()),
        ("gfp", gfp_delta_transform(&p, &joint, &AttributeModel::default()).unwrap()),
        ("atoms", TransformFn::from_atoms(atoms_a.clone()).unwrap()),
        ("normal", TransformFn::normal(1.5, 4.0).unwrap()),
    ];
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let one = Complex64::new(1.0, 0.0);
    let other = TransformFn::from_atoms(atoms_b.clone()).unwrap();
    for (name, f) in &cases {
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-5.0..5.0));
        let scaled = f.affine(a, b);
        let sum = f.independent_sum(&other);
        let mut worst = (f.eval(0.0) - one).norm();
        for _ in 0..100 {
            let theta: f64 = rng.random_range(-20.0..20.0);
            let v = f.eval(theta);
            let linear = scaled.eval(theta) - Complex64::from_polar(1.0, -b * theta) * f.eval(a * theta);
            let product = sum.eval(theta) - v * other.eval(theta);
            let conjugate = f.eval(-theta) - v.conj();
            worst = worst.max(linear.norm()).max(product.norm()).max(conjugate.norm());
        }
        check(worst <= 1e-12, format!("{name}: {worst:.1e}"), &mut failures, &mut notes);
    }
    // against independently built atom laws
    let (a, b) = (-0.7, 2.0);
    let mapped = TransformFn::from_atoms(atoms_a.iter().map(|&(x, w)| (a * x + b, w))).unwrap();
    let convolved =
        TransformFn::from_atoms(atoms_a.iter().flat_map(|&(x, u)| atoms_b.iter().map(move |&(y, v)| (x + y, u * v))))
            .unwrap();
    let fa = TransformFn::from_atoms(atoms_a).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let theta: f64 = rng.random_range(-20.0..20.0);
        worst = worst.max((fa.affine(a, b).eval(theta) - mapped.eval(theta)).norm());
        worst = worst.max((fa.independent_sum(&other).eval(theta) - convolved.eval(theta)).norm());
    }
    check(worst <= 1e-12, format!("atom cross-check: {worst:.1e}"), &mut failures, &mut notes);
    finish(failures, notes)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 9] = [
        ("Poisson tail fractions", criterion_1, 60),
        ("Poisson moments", criterion_2, 5),
        ("atoms vs transform inversion", criterion_3, 30),
        ("inverted densities vs Monte Carlo", criterion_4, 300),
        ("assortativity sweep", criterion_5, 300),
        ("exact identities", criterion_6, 60),
        ("attribute paradox", criterion_7, 180),
        ("synthetic comparison study", criterion_8, 600),
        ("transform laws", criterion_9, 5),
    ];
    // optional criterion numbers on the command line select a subset
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected = |i: usize| only.is_empty() || only.contains(&(i + 1));
    // one at a time, so each runtime is measured on an otherwise idle process
    let (mut failed, mut ran) = (0, 0);
    for (i, &(name, run, budget)) in criteria.iter().enumerate() {
        if !selected(i) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let (ok, msg) = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| (false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let status = if ok && in_time { "PASS" } else { "FAIL" };
        let late = if in_time { "" } else { " over budget;" };
        println!(
            "criterion {} {status}: {name} [{:.1}s, budget {budget}s]{late} {msg}",
            i + 1,
            took.as_secs_f64()
        );
        failed += !(ok && in_time) as usize;
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
