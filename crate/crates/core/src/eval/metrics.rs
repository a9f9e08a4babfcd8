//! Confusion matrices and support-weighted metrics.
//!
//! Fake is the positive class. Metrics are generic over the number type so the
//! same code runs in floating point and in exact rationals.

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::eval::EvalError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp_fake: u64,
    pub fn_fake: u64,
    pub tn_real: u64,
    pub fp_real: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp_fake + self.fn_fake + self.tn_real + self.fp_real
    }

    pub fn correct(&self) -> u64 {
        self.tp_fake + self.tn_real
    }

    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (truth, predicted) {
            (Label::Fake, Label::Fake) => self.tp_fake += 1,
            (Label::Fake, Label::Real) => self.fn_fake += 1,
            (Label::Real, Label::Real) => self.tn_real += 1,
            (Label::Real, Label::Fake) => self.fp_real += 1,
        }
    }

    /// `actual,predicted_fake,predicted_real` rows for fake then real.
    pub fn to_csv(&self) -> String {
        format!(
            "actual,predicted_fake,predicted_real\nfake,{},{}\nreal,{},{}\n",
            self.tp_fake, self.fn_fake, self.fp_real, self.tn_real
        )
    }
}

pub fn confusion(predicted: &[Label], truth: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if predicted.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        cm.record(p, t);
    }
    Ok(cm)
}

/// Number types the metrics can be computed in.
pub trait MetricValue: Num + Clone + PartialOrd {
    fn from_count(n: u64) -> Self;
}

impl<T: Num + Clone + PartialOrd + FromPrimitive> MetricValue for T {
    fn from_count(n: u64) -> Self {
        T::from_u64(n).expect("count representable")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetrics<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub accuracy: T,
    pub fake: ClassMetrics<T>,
    pub real: ClassMetrics<T>,
    /// Set when some per-class ratio was 0/0 and defined as 0.
    pub zero_division: bool,
}

fn ratio<T: MetricValue>(num: u64, den: u64, flag: &mut bool) -> T {
    if den == 0 {
        *flag = true;
        T::zero()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

fn class_metrics<T: MetricValue>(tp: u64, fp: u64, fn_: u64, flag: &mut bool) -> ClassMetrics<T> {
    let precision = ratio::<T>(tp, tp + fp, flag);
    let recall = ratio::<T>(tp, tp + fn_, flag);
    let sum = precision.clone() + recall.clone();
    let f1 = if sum == T::zero() {
        T::zero()
    } else {
        let two = T::one() + T::one();
        two * precision.clone() * recall.clone() / sum
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        support: tp + fn_,
    }
}

/// Per-class precision/recall/F1 and their support-weighted averages.
pub fn weighted_metrics<T: MetricValue>(
    cm: &ConfusionMatrix,
) -> Result<WeightedMetrics<T>, EvalError> {
    let n = cm.total();
    if n == 0 {
        return Err(EvalError::Empty);
    }
    let mut flag = false;
    let fake = class_metrics::<T>(cm.tp_fake, cm.fp_real, cm.fn_fake, &mut flag);
    let real = class_metrics::<T>(cm.tn_real, cm.fn_fake, cm.fp_real, &mut flag);
    let total = T::from_count(n);
    let wf = T::from_count(fake.support) / total.clone();
    let wr = T::from_count(real.support) / total.clone();
    let avg = |a: &T, b: &T| wf.clone() * a.clone() + wr.clone() * b.clone();
    Ok(WeightedMetrics {
        precision: avg(&fake.precision, &real.precision),
        recall: avg(&fake.recall, &real.recall),
        f1: avg(&fake.f1, &real.f1),
        accuracy: T::from_count(cm.correct()) / total,
        fake,
        real,
        zero_division: flag,
    })
}

/// Exact rational percentage rounded half-up to two decimals.
pub fn percent_2dp(value: &Ratio<i128>) -> f64 {
    let scaled = value * Ratio::from_integer(10_000i128);
    let half = Ratio::new(1i128, 2);
    let hundredths = (scaled + half).floor().to_integer();
    hundredths as f64 / 100.0
}

/// Two-decimal presentation of all four headline metrics, computed exactly.
pub fn rounded_percentages(cm: &ConfusionMatrix) -> Result<[f64; 4], EvalError> {
    let m = weighted_metrics::<Ratio<i128>>(cm)?;
    Ok([
        percent_2dp(&m.precision),
        percent_2dp(&m.recall),
        percent_2dp(&m.f1),
        percent_2dp(&m.accuracy),
    ])
}

impl<T: ToPrimitive> WeightedMetrics<T> {
    pub fn to_f64(&self) -> WeightedMetrics<f64> {
        let c = |x: &T| x.to_f64().unwrap_or(f64::NAN);
        let cls = |m: &ClassMetrics<T>| ClassMetrics {
            precision: c(&m.precision),
            recall: c(&m.recall),
            f1: c(&m.f1),
            support: m.support,
        };
        WeightedMetrics {
            precision: c(&self.precision),
            recall: c(&self.recall),
            f1: c(&self.f1),
            accuracy: c(&self.accuracy),
            fake: cls(&self.fake),
            real: cls(&self.real),
            zero_division: self.zero_division,
        }
    }
}
