mod common;

use newsxplain::corpus::Label;
use newsxplain::explain::{
    coalition_value, explain, kernel_exhaustive, shapley_exact, shapley_kernel,
    shapley_permutation, Masking, Method, TextGame,
};
use newsxplain::models::{ModelKind, TextClassifier};
use newsxplain::rng::rng_from_seed;
use newsxplain::text::analyze;
use rand::Rng;

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn exact_efficiency_on_fuzzed_inputs() {
    let c1 = common::c1();
    let mut rng = rng_from_seed(2024);
    for kind in ModelKind::NATIVE {
        let model = common::fixture_model(kind, &c1).load_model().unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let n = rng.gen_range(1..=12);
            let text = common::random_text(&mut rng, &c1.train, n);
            let e = explain(&model, &text, 4096, 1).unwrap();
            assert_eq!(e.method, Method::Exact);
            assert_eq!(e.p_fake, model.predict_proba(&text));
            worst = worst.max(e.efficiency_residual());
        }
        assert!(worst <= 1e-9, "{kind}: {worst}");
    }
}

#[test]
fn value_function_endpoints() {
    let c1 = common::c1();
    let model = common::fixture_model(ModelKind::Nb, &c1)
        .load_model()
        .unwrap();
    let text = "cdc vaccine guidance hoax";
    let (_, tokens) = analyze(text);
    let game = TextGame::new(&model, &tokens, Masking::Remove);
    assert_eq!(
        coalition_value(&game, &[0, 1, 2, 3]),
        model.predict_proba(text)
    );
    assert_eq!(coalition_value(&game, &[]), model.predict_proba(""));
    assert_eq!(coalition_value(&game, &[3]), model.predict_proba("hoax"));
}

#[test]
fn kernel_enumeration_recovers_exact_values() {
    let c1 = common::c1();
    let mut rng = rng_from_seed(7);
    for kind in ModelKind::NATIVE {
        let model = common::fixture_model(kind, &c1).load_model().unwrap();
        for n in [2, 5, 9, 12] {
            let text = common::random_text(&mut rng, &c1.train, n);
            let (_, tokens) = analyze(&text);
            let game = TextGame::new(&model, &tokens, Masking::Remove);
            let exact = shapley_exact(&game).unwrap();
            let kernel = kernel_exhaustive(&game).unwrap();
            assert!(max_diff(&exact.phi, &kernel.phi) <= 1e-6, "{kind} n={n}");
            assert!(kernel.efficiency_residual() <= 1e-9);
        }
    }
}

#[test]
fn permutation_estimate_on_ten_tokens() {
    let c1 = common::c1();
    let model = common::fixture_model(ModelKind::Nb, &c1)
        .load_model()
        .unwrap();
    let text = "cdc hoax vaccine garlic study 5g masks cure trial secret";
    let (_, tokens) = analyze(text);
    assert_eq!(tokens.len(), 10);
    let game = TextGame::new(&model, &tokens, Masking::Remove);
    let exact = shapley_exact(&game).unwrap();
    let perm = shapley_permutation(&game, 2000, 3).unwrap();
    let d = max_diff(&exact.phi, &perm.phi);
    assert!(d <= 0.02, "{d}");
    assert_eq!(perm, shapley_permutation(&game, 2000, 3).unwrap());
}

#[test]
fn symmetry_and_dummy_on_naive_bayes() {
    let c1 = common::c1();
    let model = common::fixture_model(ModelKind::Nb, &c1)
        .load_model()
        .unwrap();
    // "zzqx" is out of vocabulary, so naive Bayes ignores it
    let text = "hoax cdc hoax zzqx study";
    let (_, tokens) = analyze(text);
    let game = TextGame::new(&model, &tokens, Masking::Remove);
    let exact = shapley_exact(&game).unwrap();
    assert!((exact.phi[0] - exact.phi[2]).abs() <= 1e-9);
    assert!(exact.phi[3].abs() <= 1e-12);
    let perm = shapley_permutation(&game, 200, 9).unwrap();
    let se = perm.standard_error.as_ref().unwrap();
    assert!(perm.phi[3].abs() <= 3.0 * se[3] + 1e-15);
    let kernel = shapley_kernel(&game, 30, 9).unwrap();
    assert!(kernel.phi[3].abs() <= 1e-9);
}

#[test]
fn estimators_improve_with_budget() {
    let c1 = common::c1();
    let model = common::fixture_model(ModelKind::Logreg, &c1)
        .load_model()
        .unwrap();
    let mut rng = rng_from_seed(99);
    let text = common::random_text(&mut rng, &c1.train, 12);
    let (_, tokens) = analyze(&text);
    let game = TextGame::new(&model, &tokens, Masking::Remove);
    let exact = shapley_exact(&game).unwrap();
    let mean_error = |f: &dyn Fn(u64) -> Vec<f64>| -> f64 {
        (0..20)
            .map(|seed| max_diff(&f(seed), &exact.phi))
            .sum::<f64>()
            / 20.0
    };
    let perm: Vec<f64> = [25, 50, 100, 200]
        .iter()
        .map(|&b| mean_error(&|s| shapley_permutation(&game, b, s).unwrap().phi))
        .collect();
    let kern: Vec<f64> = [100, 200, 400, 800]
        .iter()
        .map(|&b| mean_error(&|s| shapley_kernel(&game, b, s).unwrap().phi))
        .collect();
    assert!(perm.windows(2).all(|w| w[1] < w[0]), "{perm:?}");
    assert!(kern.windows(2).all(|w| w[1] < w[0]), "{kern:?}");
}

#[test]
fn long_inputs_use_the_kernel_within_budget() {
    let c1 = common::c1();
    let model = common::fixture_model(ModelKind::Logreg, &c1)
        .load_model()
        .unwrap();
    let mut rng = rng_from_seed(4);
    let text = common::random_text(&mut rng, &c1.train, 40);
    let e = explain(&model, &text, 5000, 8).unwrap();
    assert_eq!(e.method, Method::Kernel);
    assert!(e.samples_used <= 5000);
    assert_eq!(e.tokens.len(), 40);
    assert!(e.efficiency_residual() <= 1e-9);
    assert_eq!(e, explain(&model, &text, 5000, 8).unwrap());
    assert_eq!(e.label, Label::from_probability(e.p_fake));
}
