mod common;

use newsxplain::corpus::Label;
use newsxplain::eval::{default_stopwords, evaluate, term_cloud};
use newsxplain::models::ModelKind;

#[test]
fn rumor_fake_cloud_carries_outbreak_vocabulary() {
    let cloud = term_cloud(&common::c19(), Label::Fake, 20, &default_stopwords());
    let terms: Vec<&str> = cloud.terms.iter().map(|(t, _)| t.as_str()).collect();
    assert!(
        terms.contains(&"wuhan") && terms.contains(&"outbreak"),
        "{terms:?}"
    );
    assert!(cloud.terms.windows(2).all(|w| w[0].1 >= w[1].1));
}

#[test]
fn naive_bayes_report_on_c1() {
    let c1 = common::c1();
    let artifact = common::fixture_model(ModelKind::Nb, &c1);
    let r = evaluate(&artifact, &c1).unwrap();
    assert_eq!(r.configuration, "C1");
    assert_eq!(r.model_id, artifact.model_id());
    assert_eq!(r.test_items, 438);
    assert_eq!(r.confusion.total(), 438);
    assert!((0.0..=100.0).contains(&r.accuracy));
    assert!((r.recall_weighted - r.accuracy).abs() < 1e-9);
    assert!(!r.provenance.is_empty());
    assert!(r.to_markdown().contains("| C1 |"));
}
