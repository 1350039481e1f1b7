use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use super::AgentRole;

#[derive(Debug, Default)]
pub struct RoleCounters {
    /// Requests sent to the client, retries included.
    pub requests: AtomicU64,
    /// Responses that failed validation.
    pub invalid: AtomicU64,
    /// Client transport/protocol failures.
    pub client_errors: AtomicU64,
    pub retries: AtomicU64,
    pub accepted: AtomicU64,
    /// Calls answered by the deterministic fallback after a client was tried.
    pub fallbacks: AtomicU64,
    /// Calls answered deterministically because no client is configured.
    pub offline: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RoleSnapshot {
    pub requests: u64,
    pub invalid: u64,
    pub client_errors: u64,
    pub retries: u64,
    pub accepted: u64,
    pub fallbacks: u64,
    pub offline: u64,
}

impl RoleCounters {
    pub(crate) fn bump(c: &AtomicU64) {
        c.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> RoleSnapshot {
        let g = |c: &AtomicU64| c.load(Ordering::Relaxed);
        RoleSnapshot {
            requests: g(&self.requests),
            invalid: g(&self.invalid),
            client_errors: g(&self.client_errors),
            retries: g(&self.retries),
            accepted: g(&self.accepted),
            fallbacks: g(&self.fallbacks),
            offline: g(&self.offline),
        }
    }
}

/// Agent call counters, shared across threads.
#[derive(Debug, Default)]
pub struct Telemetry {
    pub input: RoleCounters,
    pub order: RoleCounters,
    pub click_task: RoleCounters,
    pub input_task: RoleCounters,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TelemetrySnapshot {
    pub input: RoleSnapshot,
    pub order: RoleSnapshot,
    pub click_task: RoleSnapshot,
    pub input_task: RoleSnapshot,
}

impl TelemetrySnapshot {
    pub fn total(&self) -> RoleSnapshot {
        let mut t = RoleSnapshot::default();
        for r in [self.input, self.order, self.click_task, self.input_task] {
            t.requests += r.requests;
            t.invalid += r.invalid;
            t.client_errors += r.client_errors;
            t.retries += r.retries;
            t.accepted += r.accepted;
            t.fallbacks += r.fallbacks;
            t.offline += r.offline;
        }
        t
    }
}

impl Telemetry {
    pub fn role(&self, role: AgentRole) -> &RoleCounters {
        match role {
            AgentRole::Input => &self.input,
            AgentRole::Order => &self.order,
            AgentRole::ClickTask => &self.click_task,
            AgentRole::InputTask => &self.input_task,
        }
    }

    pub fn snapshot(&self) -> TelemetrySnapshot {
        TelemetrySnapshot {
            input: self.input.snapshot(),
            order: self.order.snapshot(),
            click_task: self.click_task.snapshot(),
            input_task: self.input_task.snapshot(),
        }
    }
}
