use super::{parse_action, TaskRecord};
use crate::ax::{ActionKind, ActionSpec};
use crate::backend::Session;
use crate::sim::{SimBackend, STALE_ID_BASE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayMismatch {
    #[error("target {0} is not on the replayed screen")]
    TargetMissing(u32),
    #[error("target {0} moved: recorded {1:?}, replayed {2:?}")]
    TargetMoved(u32, [f64; 4], [f64; 4]),
    #[error("action {0:?} does not parse")]
    BadAction(String),
    #[error("click at ({0}, {1}) is outside the target")]
    OutsideTarget(f64, f64),
    #[error("click at ({0}, {1}) hits {2:?} instead of the target")]
    WrongElement(f64, f64, Option<u32>),
    #[error("typed text did not arrive")]
    TextNotTyped,
    #[error("session failed: {0}")]
    Backend(String),
}

/// Replays `record` on a fresh simulator session and checks it against the
/// simulator's ground truth: the target is where the record says, a click
/// lands inside it and hits it in the true tree, typing stores the text.
pub fn verify_replay(backend: &SimBackend, record: &TaskRecord) -> Result<(), ReplayMismatch> {
    let mut s = backend.replay_sim(&record.replay_path);
    let observed = s.observe_state();
    let target = &record.element_data;
    let seen = observed.tree.find(target.id).ok_or(ReplayMismatch::TargetMissing(target.id))?;
    if seen.bbox != target.bbox {
        let b = |x: &crate::ax::BBox| [x.x, x.y, x.w, x.h];
        return Err(ReplayMismatch::TargetMoved(target.id, b(&target.bbox), b(&seen.bbox)));
    }
    let action = parse_action(&record.action).map_err(|_| ReplayMismatch::BadAction(record.action.clone()))?;
    match action.kind {
        ActionKind::Click => {
            let p = action.point.expect("parsed click has a point").scaled(1.0 / record.scaling_factor);
            if !target.bbox.contains(p) {
                return Err(ReplayMismatch::OutsideTarget(p.x, p.y));
            }
            let hit = s.hit_target(p);
            let ok = if target.id >= STALE_ID_BASE { hit.is_some() } else { hit == Some(target.id) };
            if !ok {
                return Err(ReplayMismatch::WrongElement(p.x, p.y, hit));
            }
            s.perform(&ActionSpec::click(Some(target.id), p)).map_err(|e| ReplayMismatch::Backend(e.to_string()))?;
            Ok(())
        }
        ActionKind::Type => {
            let text = action.text.expect("parsed type has text");
            let state_before = s.current_state().to_string();
            s.perform(&ActionSpec::type_text(target.id, text.clone())).map_err(|e| ReplayMismatch::Backend(e.to_string()))?;
            let stored = s.typed_values().get(&target.id) == Some(&text);
            if stored || s.current_state() != state_before {
                Ok(())
            } else {
                Err(ReplayMismatch::TextNotTyped)
            }
        }
        _ => Err(ReplayMismatch::BadAction(record.action.clone())),
    }
}
