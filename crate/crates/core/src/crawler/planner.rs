use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::CrawlerConfig;
use crate::agents::{deterministic_order, display_name, AgentSuite, OrderPlan, MAX_GROUPS};
use crate::ax::{canonical_hash, ActionSpec, HashMode, ScreenState, UiElement};
use crate::sim::is_text_role;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanInvalid {
    #[error("plan has {0} groups")]
    TooManyGroups(usize),
    #[error("plan does not cover id {0}")]
    MissingId(u32),
    #[error("plan lists id {0} that was not presented or lists it twice")]
    UnexpectedId(u32),
}

pub fn check_plan(plan: &OrderPlan, presented: &[&UiElement]) -> Result<(), PlanInvalid> {
    if plan.action_order.len() > MAX_GROUPS {
        return Err(PlanInvalid::TooManyGroups(plan.action_order.len()));
    }
    let want: BTreeSet<u32> = presented.iter().map(|e| e.id).collect();
    let mut seen = BTreeSet::new();
    for id in plan.ids() {
        if !want.contains(&id) || !seen.insert(id) {
            return Err(PlanInvalid::UnexpectedId(id));
        }
    }
    match want.difference(&seen).next() {
        Some(id) => Err(PlanInvalid::MissingId(*id)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedActions {
    pub order: Vec<UiElement>,
    pub login_page: bool,
    pub system_access_required: bool,
}

/// Orders `presented` for execution, sampling `dynamic_*` groups down to two
/// members and `repeated_*` groups down to one.
pub fn plan_actions(
    state: &ScreenState,
    presented: &[UiElement],
    config: &CrawlerConfig,
    agents: &AgentSuite,
) -> PlannedActions {
    let refs: Vec<&UiElement> = presented.iter().collect();
    let plan = if config.agent_usage && !refs.is_empty() {
        let p = agents.order_agent(state, &refs);
        match check_plan(&p, &refs) {
            Ok(()) => p,
            Err(e) => {
                log::warn!("order plan rejected: {e}");
                deterministic_order(&refs)
            }
        }
    } else {
        deterministic_order(&refs)
    };
    let by_id: BTreeMap<u32, &UiElement> = refs.iter().map(|e| (e.id, *e)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed ^ canonical_hash(&state.tree, HashMode::Strict));
    let mut order = Vec::with_capacity(presented.len());
    for g in &plan.action_order {
        let keep = if g.is_repeated() {
            1
        } else if g.is_dynamic() {
            2
        } else {
            g.ids.len()
        };
        let ids: Vec<u32> = if keep < g.ids.len() {
            let mut idx = sample(&mut rng, g.ids.len(), keep).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| g.ids[i]).collect()
        } else {
            g.ids.clone()
        };
        order.extend(ids.into_iter().map(|id| by_id[&id].clone()));
    }
    PlannedActions { order, login_page: plan.login_page, system_access_required: plan.system_access_required }
}

/// Why a candidate's outcome is recorded as an edge regardless of size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Force {
    None,
    PopupDismiss,
    /// Pure additions count as an opened (sub)menu.
    Expansion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub element: UiElement,
    pub action: ActionSpec,
    pub steps: Vec<ActionSpec>,
    pub description: String,
    pub force: Force,
}

pub fn describe_click(el: &UiElement) -> String {
    format!("click {} {:?}", el.role, display_name(el))
}

pub fn describe_type(el: &UiElement, text: &str) -> String {
    format!("type {text:?} into {} {:?}", el.role, display_name(el))
}

/// Turns an element into its action sequence: click (optionally preceded by
/// a cursor move), or type-then-enter for text fields.
pub fn candidate_for(el: &UiElement, inputs: &BTreeMap<u32, String>, config: &CrawlerConfig, force: Force) -> Candidate {
    if is_text_role(&el.role) {
        let text = inputs.get(&el.id).cloned().unwrap_or_else(|| config.default_text.clone());
        let action = ActionSpec::type_text(el.id, text.clone());
        return Candidate {
            element: el.clone(),
            steps: vec![action.clone(), ActionSpec::press_enter()],
            action,
            description: describe_type(el, &text),
            force,
        };
    }
    let steps = super::handlers::click_steps(el, config.cursor_move_before_click);
    Candidate {
        element: el.clone(),
        action: steps.last().cloned().expect("click steps end with a click"),
        steps,
        description: describe_click(el),
        force,
    }
}
