//! Abstract application session. The crawler only talks to these traits;
//! the bundled simulator is one implementation.

use crate::ax::{ActionSpec, ScreenState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("session used after close")]
    DeadSession,
    #[error("backend failure: {0}")]
    Failure(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state_changed: bool,
    pub observation: ScreenState,
}

pub trait Session: Send {
    fn observe(&mut self) -> Result<ScreenState, BackendError>;
    fn perform(&mut self, action: &ActionSpec) -> Result<StepOutcome, BackendError>;
    fn close(&mut self);
}

/// Produces fresh sessions positioned at the application's initial state.
pub trait SessionFactory: Send + Sync {
    fn start(&self) -> Result<Box<dyn Session>, BackendError>;

    fn app_name(&self) -> String {
        "app".into()
    }

    fn genre(&self) -> String {
        String::new()
    }

    /// Starts a session and replays `path` on it.
    fn replay(&self, path: &[ActionSpec]) -> Result<Box<dyn Session>, BackendError> {
        let mut s = self.start()?;
        for a in path {
            s.perform(a)?;
        }
        Ok(s)
    }
}
