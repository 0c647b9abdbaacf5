use paradox_core::analysis::{compare_graph, drop_isolates, DegreeSource};
use paradox_core::degree::{edge_end, fit_mean_var};
use paradox_core::maxent::gamma_for_r;
use paradox_core::sampler::sample_degree_correlated;
use paradox_core::SamplePolicy;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn maxent_predictions_are_unbiased_on_their_own_samples() {
    let p = fit_mean_var(8.0, 64.0).unwrap().distribution(1e-10).unwrap();
    let model = gamma_for_r(&edge_end(&p), 0.3).unwrap();
    let (mut mean_err, mut std_err) = (Vec::new(), Vec::new());
    for seed in 0..30 {
        let (g, _) = sample_degree_correlated(&model, 40_000, 500 + seed, SamplePolicy::Erase).unwrap();
        let (g, _, removed) = drop_isolates(&g, None).unwrap();
        let c = compare_graph(&g, DegreeSource::Empirical, removed).unwrap();
        let pred = c.maxent.expect("r_hat is inside the achievable range");
        mean_err.push(c.measured.mean - pred.mean);
        std_err.push(c.measured.std - pred.std);
    }
    let (m, se) = mean_and_se(&mean_err);
    assert!(m.abs() <= 3.0 * se, "mean error {m} +- {se}");
    let (m, se) = mean_and_se(&std_err);
    assert!(m.abs() <= 3.0 * se, "std error {m} +- {se}");
}
