//! Grounding evaluation: parse predictions, judge them against records and
//! aggregate accuracy per category.

mod predictors;
mod report;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ax::{ActionKind, AxTree, Point};
use crate::tasks::{parse_action, TaskRecord};

pub use predictors::{gold_pixel, CommandPredictor, FixedPoint, NeverParse, Oracle, Predictor, PredictorFailure, PredictorInput, RandomClick};
pub use report::{format_report, ReportAxis, ReportStyle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictionKind {
    Click,
    Type,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub kind: PredictionKind,
    /// Image pixels.
    pub point: Option<Point>,
    pub text: Option<String>,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unparseable prediction {0:?}")]
pub struct UnparseablePrediction(pub String);

fn click_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let num = r"([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)";
        Regex::new(&format!(r"^\s*left\s+click\s*,\s*\(\s*{num}\s*,\s*{num}\s*\)\s*$")).unwrap()
    })
}

fn type_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)^\s*type (.+)$").unwrap())
}

/// Accepts `left click, (x, y)` with integer or decimal coordinates and
/// `type <text>`; the text after `type ` is kept verbatim.
pub fn parse_prediction(raw: &str) -> Result<Prediction, UnparseablePrediction> {
    if let Some(c) = click_re().captures(raw) {
        let x: f64 = c[1].parse().map_err(|_| UnparseablePrediction(raw.into()))?;
        let y: f64 = c[2].parse().map_err(|_| UnparseablePrediction(raw.into()))?;
        if x.is_finite() && y.is_finite() {
            return Ok(Prediction { kind: PredictionKind::Click, point: Some(Point::new(x, y)), text: None, raw: raw.into() });
        }
    }
    if let Some(c) = type_re().captures(raw) {
        return Ok(Prediction { kind: PredictionKind::Type, point: None, text: Some(c[1].to_string()), raw: raw.into() });
    }
    Err(UnparseablePrediction(raw.into()))
}

/// Click: the pixel point divided by the record's scaling factor must fall
/// inside the target bbox, edges included. Type: byte-exact text match.
pub fn judge(pred: &Prediction, record: &TaskRecord) -> bool {
    let Ok(gold) = parse_action(&record.action) else { return false };
    match (pred.kind, gold.kind) {
        (PredictionKind::Click, ActionKind::Click) => pred
            .point
            .is_some_and(|p| record.element_data.bbox.contains(p.scaled(1.0 / record.scaling_factor))),
        (PredictionKind::Type, ActionKind::Type) => pred.text.is_some() && pred.text == gold.text,
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub successes: u64,
    pub total: u64,
}

impl Tally {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.successes += u64::from(ok);
    }

    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.successes as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub predictor: String,
    pub runs: u32,
    pub records: usize,
    /// Summed over runs.
    pub overall: Tally,
    pub overall_accuracy: f64,
    pub by_task_category: BTreeMap<String, Tally>,
    pub by_element_category: BTreeMap<String, Tally>,
    pub per_run_accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over runs; 0 for a single run.
    pub stddev: f64,
    pub predictor_failures: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("runs must be at least 1")]
    NoRuns,
}

pub fn evaluate(records: &[TaskRecord], predictor: &dyn Predictor, runs: u32) -> Result<EvalReport, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    if runs == 0 {
        return Err(EvalError::NoRuns);
    }
    let mut overall = Tally::default();
    let mut by_task: BTreeMap<String, Tally> = BTreeMap::new();
    let mut by_element: BTreeMap<String, Tally> = BTreeMap::new();
    let mut per_run = Vec::with_capacity(runs as usize);
    let mut failures = 0;
    for run in 0..runs {
        let verdicts: Vec<(bool, bool)> = records
            .par_iter()
            .enumerate()
            .map(|(index, record)| match predictor.predict(&PredictorInput { record, index, run }) {
                Ok(raw) => (parse_prediction(&raw).is_ok_and(|p| judge(&p, record)), false),
                Err(e) => {
                    log::debug!("predictor failed on record {index}: {e}");
                    (false, true)
                }
            })
            .collect();
        let mut hits = 0u64;
        for (record, (ok, failed)) in records.iter().zip(verdicts) {
            overall.add(ok);
            by_task.entry(record.task_category.clone()).or_default().add(ok);
            by_element.entry(record.element_category.clone()).or_default().add(ok);
            hits += u64::from(ok);
            failures += u64::from(failed);
        }
        per_run.push(hits as f64 / records.len() as f64);
    }
    let mean = per_run.iter().sum::<f64>() / per_run.len() as f64;
    let stddev = if per_run.len() > 1 {
        (per_run.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (per_run.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(EvalReport {
        predictor: predictor.name(),
        runs,
        records: records.len(),
        overall_accuracy: overall.accuracy().unwrap_or(0.0),
        overall,
        by_task_category: by_task,
        by_element_category: by_element,
        per_run_accuracies: per_run,
        mean,
        stddev,
        predictor_failures: failures,
    })
}

/// Chance that one uniform click on the screen hits the record's target.
/// Type records cannot be hit by a click.
pub fn random_hit_probability(record: &TaskRecord) -> f64 {
    let Ok(gold) = parse_action(&record.action) else { return 0.0 };
    if gold.kind != ActionKind::Click {
        return 0.0;
    }
    let Ok(tree) = AxTree::from_json(&record.a11y_path) else { return 0.0 };
    let w = tree.window_bbox();
    record.element_data.bbox.intersection_area(&w) / w.area()
}

/// Expected accuracy of [`RandomClick`] and the standard deviation of its
/// mean accuracy over `runs` runs.
pub fn random_expectation(records: &[TaskRecord], runs: u32) -> (f64, f64) {
    let n = records.len() as f64;
    let ps: Vec<f64> = records.iter().map(random_hit_probability).collect();
    let e = ps.iter().sum::<f64>() / n;
    let var: f64 = ps.iter().map(|p| p * (1.0 - p)).sum();
    (e, var.sqrt() / (n * (runs as f64).sqrt()))
}
