use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// How the significance threshold is compared against a diff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceMode {
    /// `|added| + |removed| > threshold`
    #[default]
    Joint,
    /// `|added| > threshold || |removed| > threshold`
    EitherAlone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HandlerSet {
    pub popup: bool,
    pub invisible: bool,
    pub menu: bool,
    pub empty: bool,
}

impl HandlerSet {
    pub const ALL: HandlerSet = HandlerSet { popup: true, invisible: true, menu: true, empty: true };
    pub const NONE: HandlerSet = HandlerSet { popup: false, invisible: false, menu: false, empty: false };
}

impl Default for HandlerSet {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrawlerConfig {
    pub max_duration_minutes: u64,
    pub default_text: String,
    pub max_depth: u32,
    pub cursor_move_before_click: bool,
    pub agent_usage: bool,
    pub task_collection: bool,
    pub significant_change_threshold: u32,
    pub rng_seed: u64,
    pub significance_mode: SignificanceMode,
    pub handlers: HandlerSet,
}

impl Default for CrawlerConfig {
    fn default() -> Self {
        Self {
            max_duration_minutes: 120,
            default_text: "DEFAULT".into(),
            max_depth: 25,
            cursor_move_before_click: false,
            agent_usage: true,
            task_collection: true,
            significant_change_threshold: 10,
            rng_seed: 0,
            significance_mode: SignificanceMode::Joint,
            handlers: HandlerSet::ALL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid crawler config: {0}")]
pub struct ConfigError(pub String);

impl CrawlerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_depth < 1 {
            return Err(ConfigError("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HaltedReason {
    Budget,
    DepthExhausted,
    Complete,
    LoginFlagged,
    BackendFailure,
}

pub const HANDLER_NAMES: [&str; 4] = ["popup", "invisible", "menu", "empty"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrawlReport {
    pub app_name: String,
    pub nodes_created: u64,
    pub edges_created: u64,
    pub duplicates_linked: u64,
    pub safe_actions: u64,
    pub actions_executed: u64,
    pub restore_failures: u64,
    pub handler_counters: BTreeMap<String, u64>,
    pub elapsed_secs: f64,
    pub halted_reason: HaltedReason,
}

impl CrawlReport {
    pub(crate) fn new(app_name: String) -> Self {
        Self {
            app_name,
            nodes_created: 1,
            edges_created: 0,
            duplicates_linked: 0,
            safe_actions: 0,
            actions_executed: 0,
            restore_failures: 0,
            handler_counters: HANDLER_NAMES.iter().map(|n| (n.to_string(), 0)).collect(),
            elapsed_secs: 0.0,
            halted_reason: HaltedReason::Complete,
        }
    }

    pub(crate) fn bump(&mut self, handler: &str, by: u64) {
        *self.handler_counters.entry(handler.to_string()).or_default() += by;
    }

    pub fn handler_total(&self) -> u64 {
        self.handler_counters.values().sum()
    }
}
