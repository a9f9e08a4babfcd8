use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::dataset::DatasetConfiguration;
use crate::eval::metrics::{
    confusion, rounded_percentages, weighted_metrics, ClassMetrics, ConfusionMatrix,
};
use crate::eval::EvalError;
use crate::models::{ModelArtifact, TextClassifier};

/// One (configuration, model) result. Percentages are kept at full precision;
/// the two-decimal half-up rounding happens in [`EvaluationReport::table_row`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub configuration: String,
    pub model_id: String,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub per_class: PerClass,
    pub zero_division: bool,
    pub test_items: usize,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerClass {
    pub fake: ClassMetrics<f64>,
    pub real: ClassMetrics<f64>,
}

fn pct(x: f64) -> f64 {
    x * 100.0
}

impl EvaluationReport {
    pub fn from_confusion(
        configuration: &str,
        model_id: &str,
        cm: ConfusionMatrix,
    ) -> Result<Self, EvalError> {
        let m = weighted_metrics::<f64>(&cm)?;
        let scale = |c: ClassMetrics<f64>| ClassMetrics {
            precision: pct(c.precision),
            recall: pct(c.recall),
            f1: pct(c.f1),
            support: c.support,
        };
        Ok(EvaluationReport {
            configuration: configuration.to_string(),
            model_id: model_id.to_string(),
            precision_weighted: pct(m.precision),
            recall_weighted: pct(m.recall),
            f1_weighted: pct(m.f1),
            accuracy: pct(m.accuracy),
            confusion: cm,
            per_class: PerClass {
                fake: scale(m.fake),
                real: scale(m.real),
            },
            zero_division: m.zero_division,
            test_items: cm.total() as usize,
            provenance: String::new(),
        })
    }

    /// Precision, recall, F1, accuracy as two-decimal percentages.
    pub fn rounded(&self) -> [f64; 4] {
        rounded_percentages(&self.confusion).expect("report has a non-empty confusion matrix")
    }

    pub fn table_header() -> &'static str {
        "| Config. | Model | Precision | Recall | F1 | Accuracy |\n|---|---|---|---|---|---|"
    }

    pub fn table_row(&self) -> String {
        let [p, r, f, a] = self.rounded();
        format!(
            "| {} | {} | {p:.2} | {r:.2} | {f:.2} | {a:.2} |",
            self.configuration, self.model_id
        )
    }

    pub fn to_markdown(&self) -> String {
        format!("{}\n{}\n", Self::table_header(), self.table_row())
    }
}

/// Score every item of `test` and build the report.
pub fn evaluate_classifier<C: TextClassifier + ?Sized>(
    model: &C,
    configuration: &str,
    test: &Corpus,
) -> Result<EvaluationReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::Empty);
    }
    let predicted: Vec<Label> = test
        .iter()
        .map(|i| Label::from_probability(model.predict_proba(&i.text)))
        .collect();
    let truth: Vec<Label> = test.iter().map(|i| i.label).collect();
    EvaluationReport::from_confusion(
        configuration,
        model.model_id(),
        confusion(&predicted, &truth)?,
    )
}

/// Evaluate an artifact on the test split of a configuration.
pub fn evaluate(
    artifact: &ModelArtifact,
    config: &DatasetConfiguration,
) -> Result<EvaluationReport, EvalError> {
    let model = artifact.load_model()?;
    let mut report = evaluate_classifier(&model, config.name.as_str(), &config.test)?;
    report.provenance = config.provenance.clone();
    Ok(report)
}
