//! Single-label classification reports over the four base classes.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ontology::BaseClass;

/// Counts indexed `[gold][predicted]` in [`BaseClass::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix(pub [[usize; 4]; 4]);

impl ConfusionMatrix {
    pub fn from_pairs(gold: &[BaseClass], pred: &[BaseClass]) -> Self {
        let mut m = [[0usize; 4]; 4];
        for (g, p) in gold.iter().zip(pred) {
            m[g.index()][p.index()] += 1;
        }
        ConfusionMatrix(m)
    }

    pub fn get(&self, gold: BaseClass, pred: BaseClass) -> usize {
        self.0[gold.index()][pred.index()]
    }

    pub fn support(&self, class: BaseClass) -> usize {
        self.0[class.index()].iter().sum()
    }

    pub fn predicted(&self, class: BaseClass) -> usize {
        self.0.iter().map(|row| row[class.index()]).sum()
    }

    pub fn total(&self) -> usize {
        self.0.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..4).map(|i| self.0[i][i]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: BaseClass,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// Whether the class enters the macro average.
    pub included: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MacroMode {
    /// Average over classes seen in gold or predictions.
    #[default]
    PresentClasses,
    /// Average over all four classes.
    AllClasses,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_class: Vec<ClassMetrics>,
    #[serde(rename = "macro")]
    pub macro_avg: Averages,
    #[serde(rename = "weighted")]
    pub weighted_avg: Averages,
    pub accuracy: f64,
    pub total: usize,
    pub macro_mode: MacroMode,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision/recall/F1 with macro and support-weighted averages.
/// Zero denominators yield 0.
pub fn classification_report(gold: &[BaseClass], pred: &[BaseClass], mode: MacroMode) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::EmptyInput);
    }
    let confusion = ConfusionMatrix::from_pairs(gold, pred);
    let total = confusion.total();

    let per_class: Vec<ClassMetrics> = BaseClass::ALL
        .into_iter()
        .map(|class| {
            let tp = confusion.get(class, class);
            let support = confusion.support(class);
            let predicted = confusion.predicted(class);
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                class,
                precision,
                recall,
                f1,
                support,
                included: mode == MacroMode::AllClasses || support > 0 || predicted > 0,
            }
        })
        .collect();

    let included: Vec<&ClassMetrics> = per_class.iter().filter(|m| m.included).collect();
    let n = included.len() as f64;
    let macro_avg = Averages {
        precision: included.iter().map(|m| m.precision).sum::<f64>() / n,
        recall: included.iter().map(|m| m.recall).sum::<f64>() / n,
        f1: included.iter().map(|m| m.f1).sum::<f64>() / n,
    };
    let weight = |f: fn(&ClassMetrics) -> f64| {
        per_class.iter().map(|m| m.support as f64 * f(m)).sum::<f64>() / total as f64
    };
    let weighted_avg = Averages {
        precision: weight(|m| m.precision),
        recall: weight(|m| m.recall),
        f1: weight(|m| m.f1),
    };

    Ok(EvalReport {
        per_class,
        macro_avg,
        weighted_avg,
        accuracy: ratio(confusion.trace(), total),
        total,
        macro_mode: mode,
        confusion,
    })
}

impl EvalReport {
    pub fn class(&self, class: BaseClass) -> &ClassMetrics {
        &self.per_class[class.index()]
    }
}

/// Two-decimal table: one row per class, then the averages and accuracy.
impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20}{:>10}{:>10}{:>10}{:>10}", "Class", "Precision", "Recall", "F1-score", "Support")?;
        for m in &self.per_class {
            writeln!(
                f,
                "{:<20}{:>10.2}{:>10.2}{:>10.2}{:>10}",
                m.class.name(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            )?;
        }
        for (label, avg) in [("Macro Average", &self.macro_avg), ("Weighted Average", &self.weighted_avg)] {
            writeln!(
                f,
                "{:<20}{:>10.2}{:>10.2}{:>10.2}{:>10}",
                label, avg.precision, avg.recall, avg.f1, self.total
            )?;
        }
        writeln!(f, "{:<20}{:>30.2}{:>10}", "Accuracy", self.accuracy, self.total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabelShare {
    pub class: BaseClass,
    pub count: usize,
    pub fraction: f64,
}

/// Count and fraction of each base class in the sequence.
pub fn label_distribution(labels: &[BaseClass]) -> Vec<LabelShare> {
    let mut counts = [0usize; 4];
    for l in labels {
        counts[l.index()] += 1;
    }
    BaseClass::ALL
        .into_iter()
        .map(|class| LabelShare {
            class,
            count: counts[class.index()],
            fraction: ratio(counts[class.index()], labels.len()),
        })
        .collect()
}
