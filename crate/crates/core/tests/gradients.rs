use newsxplain::features::{sequence_from_terms, Vocabulary, WeightedVector};
use newsxplain::models::cnn::{CnnShape, TextCnn};
use newsxplain::models::logreg::objective;
use newsxplain::rng::rng_from_seed;
use rand::Rng;

fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-10 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

/// 18 corpus terms plus the two reserved slots.
fn tiny_vocab() -> Vocabulary {
    let words: Vec<String> = (0..18).map(|i| format!("w{i:02}")).collect();
    let docs: Vec<String> = vec![words.join(" ")];
    Vocabulary::build(docs.iter().map(String::as_str), 1, 100)
}

#[test]
fn cnn_backprop_matches_central_differences() {
    let vocab = tiny_vocab();
    assert_eq!(vocab.len(), 20);
    let shape = CnnShape {
        vocab_size: 20,
        embed_dim: 5,
        widths: vec![2, 3],
        filters: 4,
        max_len: 8,
    };
    let model = TextCnn::<f64>::new(vocab.clone(), shape, 0.5, 7);
    let mut rng = rng_from_seed(11);
    let batch: Vec<_> = (0..6)
        .map(|k| {
            let len = rng.gen_range(3..=8);
            let terms: Vec<Option<String>> = (0..len)
                .map(|_| Some(format!("w{:02}", rng.gen_range(0..18))))
                .collect();
            let seq = sequence_from_terms(terms.iter().map(|t| t.as_deref()), &vocab, 8);
            (seq, (k % 2) as f64)
        })
        .collect();
    // move off the zero biases, where all-padding windows sit on the ReLU kink
    let mut params = model.params().to_vec();
    for p in params.iter_mut().skip(5) {
        *p += rng.gen_range(-0.2..0.2);
    }
    let (_, grad) = model.loss_and_gradient(&params, &batch);
    let eps = 1e-3;
    let mut worst: f64 = 0.0;
    let mut probe = params.clone();
    for i in 0..params.len() {
        probe[i] = params[i] + eps;
        let up = model.loss_and_gradient(&probe, &batch).0;
        probe[i] = params[i] - eps;
        let down = model.loss_and_gradient(&probe, &batch).0;
        probe[i] = params[i];
        let numeric = (up - down) / (2.0 * eps);
        let err = relative_error(grad[i], numeric);
        assert!(
            err <= 1e-4,
            "param {i}: analytic {} numeric {numeric} rel {err}",
            grad[i]
        );
        worst = worst.max(err);
    }
    eprintln!(
        "cnn: {} parameters, worst relative error {worst:.2e}",
        params.len()
    );
}

#[test]
fn logreg_gradient_matches_central_differences() {
    let mut rng = rng_from_seed(5);
    let features: Vec<WeightedVector<f64>> = (0..8)
        .map(|_| WeightedVector {
            dim: 5,
            entries: (0..5).map(|j| (j, rng.gen_range(-1.0..1.0))).collect(),
        })
        .collect();
    let targets: Vec<f64> = (0..8).map(|i| (i % 2) as f64).collect();
    let w: Vec<f64> = (0..5).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let b = 0.1;
    let l2 = 1e-2;
    let g = objective(&features, &targets, &w, b, l2);
    let eps = 1e-5;
    for j in 0..5 {
        let mut up = w.clone();
        up[j] += eps;
        let mut down = w.clone();
        down[j] -= eps;
        let numeric = (objective(&features, &targets, &up, b, l2).loss
            - objective(&features, &targets, &down, b, l2).loss)
            / (2.0 * eps);
        assert!(relative_error(g.weights[j], numeric) <= 1e-6, "w{j}");
    }
    let numeric = (objective(&features, &targets, &w, b + eps, l2).loss
        - objective(&features, &targets, &w, b - eps, l2).loss)
        / (2.0 * eps);
    assert!(relative_error(g.bias, numeric) <= 1e-6);
}
