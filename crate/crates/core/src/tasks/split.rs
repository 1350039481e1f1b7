use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::TaskRecord;
use crate::ax::AxTree;

pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitManifest {
    pub train_apps: BTreeSet<String>,
    pub test_apps: BTreeSet<String>,
    pub train_count: usize,
    pub test_count: usize,
    pub fraction_test_apps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutput {
    pub manifest: SplitManifest,
    pub train: Vec<TaskRecord>,
    pub test: Vec<TaskRecord>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("split leaves one side empty ({apps} apps, {test} for test)")]
    DegenerateSplit { apps: usize, test: usize },
    #[error("record {0} has an unreadable accessibility tree")]
    BadTree(usize),
}

/// Puts the apps with the largest mean tree size into the test side.
pub fn split(records: &[TaskRecord], fraction_test_apps: f64) -> Result<SplitOutput, SplitError> {
    let mut sizes: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let n = AxTree::from_json(&r.a11y_path).map_err(|_| SplitError::BadTree(i))?.element_count();
        let e = sizes.entry(r.app_name.as_str()).or_default();
        e.0 += n as f64;
        e.1 += 1;
    }
    let mut ranked: Vec<(&str, f64)> = sizes.into_iter().map(|(a, (sum, c))| (a, sum / c as f64)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let n = ranked.len();
    let k = (fraction_test_apps * n as f64 - 1e-9).ceil().max(0.0) as usize;
    if k == 0 || k >= n {
        return Err(SplitError::DegenerateSplit { apps: n, test: k.min(n) });
    }
    let test_apps: BTreeSet<String> = ranked[..k].iter().map(|(a, _)| a.to_string()).collect();
    let train_apps: BTreeSet<String> = ranked[k..].iter().map(|(a, _)| a.to_string()).collect();
    let (test, train): (Vec<TaskRecord>, Vec<TaskRecord>) =
        records.iter().cloned().partition(|r| test_apps.contains(&r.app_name));
    Ok(SplitOutput {
        manifest: SplitManifest {
            train_apps,
            test_apps,
            train_count: train.len(),
            test_count: test.len(),
            fraction_test_apps,
        },
        train,
        test,
    })
}
