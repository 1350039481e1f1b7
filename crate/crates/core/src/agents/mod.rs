//! Language-model agents used during crawling and task synthesis.
//!
//! Every call goes through one path: build a request, validate the reply
//! strictly, retry up to `max_retries` times, then fall back to a
//! deterministic answer. With no client configured only the fallbacks run.

mod client;
mod prompts;
mod telemetry;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::ax::{is_visible, ScreenState, UiElement};
use crate::sim::is_text_role;

pub use client::{first_message_content, AgentRequest, ChatMessage, ClientError, HttpClient, LlmClient, LlmClientConfig};
pub use telemetry::{RoleCounters, RoleSnapshot, Telemetry, TelemetrySnapshot};
pub use validate::{quote_bare_int_keys, validate_json, SchemaId, ValidationContext, ValidationError, Validated, MAX_GROUPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    Input,
    Order,
    ClickTask,
    InputTask,
}

/// Element id to the text that should be typed into it.
pub type InputMap = BTreeMap<u32, String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderGroup {
    pub name: String,
    pub ids: Vec<u32>,
}

impl OrderGroup {
    /// Groups of generated content; only a couple of members get tried.
    pub fn is_dynamic(&self) -> bool {
        self.name.starts_with("dynamic_")
    }

    /// Groups of interchangeable copies; one member gets tried.
    pub fn is_repeated(&self) -> bool {
        self.name.starts_with("repeated_")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrderPlan {
    pub action_order: Vec<OrderGroup>,
    pub login_page: bool,
    pub system_access_required: bool,
}

impl OrderPlan {
    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.action_order.iter().flat_map(|g| g.ids.iter().copied())
    }
}

macro_rules! closed_enum {
    ($name:ident { $($variant:ident => $text:literal),* $(,)? }) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant,)*
            /// Value outside the fixed list, stored as `other:<label>`.
            Other(String),
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),*];

            pub fn as_str(&self) -> &str {
                match self {
                    $($name::$variant => $text,)*
                    $name::Other(s) => s,
                }
            }

            pub fn parse(s: &str) -> Option<Self> {
                match s {
                    $($text => Some($name::$variant),)*
                    _ => s
                        .strip_prefix("other:")
                        .filter(|l| !l.trim().is_empty())
                        .map(|_| $name::Other(s.to_string())),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                $name::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown {}: {s:?}", stringify!($name))))
            }
        }
    };
}

closed_enum!(TaskCategory {
    Navigation => "Navigation",
    Settings => "Settings",
    Files => "Files",
    Apps => "Apps",
    SearchInformation => "Search & Information",
    Media => "Media",
    Accounts => "Accounts",
    Communication => "Communication",
    Input => "Input",
    Connectivity => "Connectivity",
    Modes => "Modes",
    ECommerce => "E-commerce",
});

closed_enum!(ElementCategory {
    Image => "Image",
    Text => "Text",
    CheckboxControl => "Checkbox/Control",
    MenuItem => "Menu item",
    InputField => "Input field",
    Button => "Button",
    Group => "Group",
    Link => "Link",
});

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskAnnotation {
    /// Empty means the annotator rejected the interaction.
    pub task: String,
    pub task_category: Option<TaskCategory>,
    pub element_category: Option<ElementCategory>,
}

impl TaskAnnotation {
    pub fn rejected() -> Self {
        Self { task: String::new(), task_category: None, element_category: None }
    }

    pub fn is_rejected(&self) -> bool {
        self.task.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputTaskAnnotation {
    pub task: String,
    pub action: String,
}

impl InputTaskAnnotation {
    /// The text after the `type ` prefix.
    pub fn text(&self) -> &str {
        self.action.strip_prefix("type ").unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("input task annotation rejected: {0}")]
pub struct RejectedAnnotation(pub String);

const DESTRUCTIVE: &[&str] = &["delete", "remove", "clear", "reset", "erase"];

pub fn is_destructive(el: &UiElement) -> bool {
    let hay = [el.name.as_deref(), el.description.as_deref()]
        .into_iter()
        .flatten()
        .map(str::to_lowercase)
        .collect::<Vec<_>>();
    hay.iter().any(|h| DESTRUCTIVE.iter().any(|k| h.contains(k)))
}

/// Stand-in label for elements without a name: `<role>@<x>,<y>`.
pub fn synthesized_name(el: &UiElement) -> String {
    format!("{}@{},{}", el.role, el.bbox.x, el.bbox.y)
}

pub fn display_name(el: &UiElement) -> String {
    el.label().map(str::to_string).unwrap_or_else(|| synthesized_name(el))
}

pub fn element_category_for_role(role: &str) -> ElementCategory {
    let r = role.to_ascii_lowercase();
    let r = r.strip_prefix("ax").unwrap_or(&r);
    if is_text_role(role) {
        ElementCategory::InputField
    } else if ["checkbox", "radiobutton", "switch", "slider", "stepper", "disclosuretriangle", "incrementor"]
        .iter()
        .any(|k| r.contains(k))
    {
        ElementCategory::CheckboxControl
    } else if r.contains("menuitem") || r.contains("menubaritem") {
        ElementCategory::MenuItem
    } else if r.contains("button") {
        ElementCategory::Button
    } else if r.contains("image") || r.contains("icon") {
        ElementCategory::Image
    } else if r.contains("link") {
        ElementCategory::Link
    } else if r.contains("group") || r.contains("toolbar") || r.contains("list") || r.contains("outline") {
        ElementCategory::Group
    } else {
        ElementCategory::Text
    }
}

fn element_summary(el: &UiElement) -> Value {
    json!({
        "id": el.id,
        "role": el.role,
        "name": el.name,
        "description": el.description,
        "value": el.value,
        "bbox": el.bbox,
        "enabled": el.enabled,
    })
}

fn screen_summary(state: &ScreenState) -> Value {
    let w = state.tree.window_bbox();
    Value::Array(state.tree.flatten().into_iter().filter(|e| is_visible(e, &w)).map(element_summary).collect())
}

/// Client handle, fallback defaults and shared counters.
#[derive(Clone)]
pub struct AgentSuite {
    client: Option<Arc<dyn LlmClient>>,
    pub default_text: String,
    pub max_retries: u32,
    telemetry: Arc<Telemetry>,
}

impl fmt::Debug for AgentSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AgentSuite")
            .field("client", &self.client.is_some())
            .field("default_text", &self.default_text)
            .field("max_retries", &self.max_retries)
            .finish()
    }
}

impl AgentSuite {
    pub fn deterministic(default_text: impl Into<String>) -> Self {
        Self { client: None, default_text: default_text.into(), max_retries: 0, telemetry: Arc::default() }
    }

    pub fn with_client(client: Arc<dyn LlmClient>, default_text: impl Into<String>, max_retries: u32) -> Self {
        Self { client: Some(client), default_text: default_text.into(), max_retries, telemetry: Arc::default() }
    }

    pub fn has_client(&self) -> bool {
        self.client.is_some()
    }

    pub fn telemetry(&self) -> &Telemetry {
        &self.telemetry
    }

    /// Sends the request until a reply validates. `None` means the caller
    /// must use its fallback; counters are updated either way.
    fn consult(
        &self,
        role: AgentRole,
        system: &str,
        payload: Value,
        images: Vec<Vec<u8>>,
        schema: SchemaId,
        ctx: &ValidationContext,
    ) -> Option<Validated> {
        let counters = self.telemetry.role(role);
        let Some(client) = &self.client else {
            RoleCounters::bump(&counters.offline);
            return None;
        };
        let request = AgentRequest {
            role,
            messages: vec![
                ChatMessage { role: "system".into(), content: system.into() },
                ChatMessage { role: "user".into(), content: serde_json::to_string_pretty(&payload).unwrap() },
            ],
            payload,
            images,
        };
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                RoleCounters::bump(&counters.retries);
            }
            RoleCounters::bump(&counters.requests);
            match client.complete(&request) {
                Ok(reply) => match validate_json(reply.as_bytes(), schema, ctx) {
                    Ok(v) => {
                        RoleCounters::bump(&counters.accepted);
                        return Some(v);
                    }
                    Err(e) => {
                        log::debug!("{role:?} reply rejected: {e}");
                        RoleCounters::bump(&counters.invalid);
                    }
                },
                Err(e) => {
                    log::debug!("{role:?} client error: {e}");
                    RoleCounters::bump(&counters.client_errors);
                }
            }
        }
        RoleCounters::bump(&counters.fallbacks);
        None
    }

    /// Text for every text field of the observed tree.
    pub fn input_agent(&self, state: &ScreenState) -> InputMap {
        let fields: BTreeSet<u32> =
            state.tree.flatten().into_iter().filter(|e| is_text_role(&e.role)).map(|e| e.id).collect();
        let mut out: InputMap = fields.iter().map(|id| (*id, self.default_text.clone())).collect();
        if fields.is_empty() {
            return out;
        }
        let ctx = ValidationContext { text_field_ids: fields.clone(), ..Default::default() };
        let payload = json!({ "elements": screen_summary(state), "text_field_ids": fields });
        if let Some(Validated::InputMap(m)) =
            self.consult(AgentRole::Input, prompts::INPUT, payload, vec![], SchemaId::InputMap, &ctx)
        {
            out.extend(m);
        }
        out
    }

    /// Exploration order for `presented`, which must have distinct ids.
    pub fn order_agent(&self, state: &ScreenState, presented: &[&UiElement]) -> OrderPlan {
        if presented.is_empty() {
            return OrderPlan::default();
        }
        let ctx = ValidationContext { presented_ids: presented.iter().map(|e| e.id).collect(), ..Default::default() };
        let payload = json!({
            "screen": screen_summary(state),
            "presented": presented.iter().map(|e| element_summary(e)).collect::<Vec<_>>(),
        });
        match self.consult(AgentRole::Order, prompts::ORDER, payload, vec![], SchemaId::OrderPlan, &ctx) {
            Some(Validated::OrderPlan(p)) => p,
            _ => deterministic_order(presented),
        }
    }

    /// Click task for `element`, clicked on `before`. `after` is the state
    /// the click led to, when known.
    pub fn click_task_agent(
        &self,
        full_image: Option<&[u8]>,
        crop_image: Option<&[u8]>,
        element: &UiElement,
        before: &ScreenState,
        after: Option<&ScreenState>,
    ) -> TaskAnnotation {
        let payload = json!({
            "element": element_summary(element),
            "before": screen_summary(before),
            "after": after.map(screen_summary),
        });
        let images = [full_image, crop_image].into_iter().flatten().map(<[u8]>::to_vec).collect();
        let ctx = ValidationContext::default();
        match self.consult(AgentRole::ClickTask, prompts::CLICK_TASK, payload, images, SchemaId::TaskAnnotation, &ctx) {
            Some(Validated::TaskAnnotation(t)) => t,
            _ => deterministic_click_task(element),
        }
    }

    /// Input task for typing `typed_text` into `field`. The caller falls back
    /// to [`deterministic_input_task`] on rejection.
    pub fn input_task_agent(
        &self,
        task_string: &str,
        full_image: Option<&[u8]>,
        crop_image: Option<&[u8]>,
        field: &UiElement,
        typed_text: &str,
    ) -> Result<InputTaskAnnotation, RejectedAnnotation> {
        let payload = json!({
            "interaction": task_string,
            "field": element_summary(field),
            "typed_text": typed_text,
        });
        let images = [full_image, crop_image].into_iter().flatten().map(<[u8]>::to_vec).collect();
        let ctx = ValidationContext::default();
        match self.consult(AgentRole::InputTask, prompts::INPUT_TASK, payload, images, SchemaId::InputTaskAnnotation, &ctx)
        {
            Some(Validated::InputTaskAnnotation(a)) => Ok(a),
            _ if !self.has_client() => Ok(deterministic_input_task(field, typed_text)),
            _ => Err(RejectedAnnotation(format!("no valid annotation for field {}", field.id))),
        }
    }
}

/// Order without an agent: document order in chunks, destructive elements
/// last. A visible password field marks the screen as a login page.
pub fn deterministic_order(presented: &[&UiElement]) -> OrderPlan {
    let (risky, safe): (Vec<&UiElement>, Vec<&UiElement>) = presented.iter().copied().partition(|e| is_destructive(e));
    let slots = if risky.is_empty() { MAX_GROUPS } else { MAX_GROUPS - 1 };
    let size = 8.max(safe.len().div_ceil(slots));
    let mut groups: Vec<OrderGroup> = safe
        .chunks(size)
        .enumerate()
        .map(|(i, c)| OrderGroup { name: format!("group_{}", i + 1), ids: c.iter().map(|e| e.id).collect() })
        .collect();
    if !risky.is_empty() {
        groups.push(OrderGroup { name: "destructive".into(), ids: risky.iter().map(|e| e.id).collect() });
    }
    let login_page = presented.iter().any(|e| e.role == "AXSecureTextField");
    OrderPlan { action_order: groups, login_page, system_access_required: false }
}

pub fn deterministic_click_task(element: &UiElement) -> TaskAnnotation {
    TaskAnnotation {
        task: format!("click {}", display_name(element)),
        task_category: Some(TaskCategory::Navigation),
        element_category: Some(element_category_for_role(&element.role)),
    }
}

pub fn deterministic_input_task(field: &UiElement, typed_text: &str) -> InputTaskAnnotation {
    InputTaskAnnotation {
        task: format!("Type '{typed_text}' into {}", display_name(field)),
        action: format!("type {typed_text}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ax::{AxTree, BBox};
    use std::sync::Mutex;

    fn el(id: u32, role: &str, name: &str) -> UiElement {
        UiElement::new(id, role, BBox::of(10.0 * id as f64, 0.0, 10.0, 10.0)).named(name)
    }

    fn screen(children: Vec<UiElement>) -> ScreenState {
        let root = UiElement::new(0, "AXWindow", BBox::of(0.0, 0.0, 400.0, 300.0)).with_children(children);
        ScreenState { tree: AxTree::new(root, BBox::of(0.0, 0.0, 400.0, 300.0)).unwrap(), image_name: "s.ppm".into(), scaling_factor: 1.0 }
    }

    /// Replays canned replies in order, then repeats the last one.
    struct Canned(Mutex<Vec<Result<String, ClientError>>>);

    impl Canned {
        fn new(replies: &[&str]) -> Arc<Self> {
            Arc::new(Self(Mutex::new(replies.iter().rev().map(|s| Ok(s.to_string())).collect())))
        }
    }

    impl LlmClient for Canned {
        fn complete(&self, _: &AgentRequest) -> Result<String, ClientError> {
            let mut q = self.0.lock().unwrap();
            if q.len() > 1 {
                q.pop().unwrap()
            } else {
                q.last().cloned().unwrap()
            }
        }
    }

    struct Failing;
    impl LlmClient for Failing {
        fn complete(&self, _: &AgentRequest) -> Result<String, ClientError> {
            Err(ClientError::Transport("down".into()))
        }
    }

    #[test]
    fn fallback_inputs_are_default() {
        let s = screen(vec![el(1, "AXTextField", "a"), el(2, "AXSearchField", "b"), el(3, "AXTextArea", "c"), el(4, "AXButton", "d")]);
        let m = AgentSuite::deterministic("DEFAULT").input_agent(&s);
        assert_eq!(m, BTreeMap::from([(1, "DEFAULT".into()), (2, "DEFAULT".into()), (3, "DEFAULT".into())]));
    }

    #[test]
    fn client_input_accepted_or_retried() {
        let s = screen(vec![el(7, "AXSearchField", "Search")]);
        let ok = AgentSuite::with_client(Canned::new(&[r#"{7: "Yellow Submarine"}"#]), "DEFAULT", 2);
        assert_eq!(ok.input_agent(&s)[&7], "Yellow Submarine");

        let bad = AgentSuite::with_client(Canned::new(&[r#"{99: "x"}"#]), "DEFAULT", 2);
        assert_eq!(bad.input_agent(&s)[&7], "DEFAULT");
        let t = bad.telemetry().snapshot().input;
        assert_eq!((t.requests, t.invalid, t.retries, t.fallbacks), (3, 3, 2, 1));
    }

    #[test]
    fn deterministic_order_groups() {
        let els: Vec<UiElement> = (1..=4).map(|i| el(i, "AXButton", "b")).collect();
        let refs: Vec<&UiElement> = els.iter().collect();
        let p = deterministic_order(&refs);
        assert_eq!(p.action_order.len(), 1);
        assert_eq!(p.action_order[0].ids, vec![1, 2, 3, 4]);
        assert!(!p.login_page && !p.system_access_required);

        let els = [el(1, "AXButton", "Delete All"), el(2, "AXButton", "Open"), el(3, "AXButton", "Save")];
        let refs: Vec<&UiElement> = els.iter().collect();
        let p = deterministic_order(&refs);
        assert_eq!(p.action_order.last().unwrap().ids, vec![1]);
    }

    #[test]
    fn deterministic_order_caps_group_count() {
        let els: Vec<UiElement> = (1..=100).map(|i| el(i, "AXButton", if i == 50 { "Reset" } else { "b" })).collect();
        let refs: Vec<&UiElement> = els.iter().collect();
        let p = deterministic_order(&refs);
        assert!(p.action_order.len() <= MAX_GROUPS);
        let mut ids: Vec<u32> = p.ids().collect();
        ids.sort();
        assert_eq!(ids, (1..=100).collect::<Vec<_>>());
    }

    #[test]
    fn nine_group_plan_falls_back() {
        let els: Vec<UiElement> = (1..=9).map(|i| el(i, "AXButton", "b")).collect();
        let refs: Vec<&UiElement> = els.iter().collect();
        let groups: Vec<String> = (1..=9).map(|i| format!("{{\"g{i}\": [{i}]}}")).collect();
        let reply = format!("{{\"action_order\": [{}]}}", groups.join(","));
        let suite = AgentSuite::with_client(Canned::new(&[&reply]), "DEFAULT", 0);
        let p = suite.order_agent(&screen(els.clone()), &refs);
        assert_eq!(p, deterministic_order(&refs));
        assert_eq!(suite.telemetry().snapshot().order.fallbacks, 1);
    }

    #[test]
    fn click_task_fallback_and_client() {
        let b = el(1, "AXButton", "Open Media");
        let d = deterministic_click_task(&b);
        assert_eq!(d.task, "click Open Media");
        assert_eq!(d.element_category, Some(ElementCategory::Button));

        let s = screen(vec![b.clone()]);
        let reply = r#"{"task": "Open the menu to see tutorials", "task_category": "Search & Information", "element_category": "Button"}"#;
        let suite = AgentSuite::with_client(Canned::new(&[reply]), "DEFAULT", 0);
        assert_eq!(suite.click_task_agent(None, None, &b, &s, Some(&s)).task, "Open the menu to see tutorials");

        let browsing = r#"{"task": "x", "task_category": "Browsing", "element_category": "Button"}"#;
        let suite = AgentSuite::with_client(Canned::new(&[browsing]), "DEFAULT", 0);
        assert_eq!(suite.click_task_agent(None, None, &b, &s, Some(&s)), d);
    }

    #[test]
    fn role_map() {
        assert_eq!(element_category_for_role("AXTextField"), ElementCategory::InputField);
        assert_eq!(element_category_for_role("AXImage"), ElementCategory::Image);
        assert_eq!(element_category_for_role("AXMenuItem"), ElementCategory::MenuItem);
        assert_eq!(element_category_for_role("AXCheckBox"), ElementCategory::CheckboxControl);
        assert_eq!(element_category_for_role("AXRadioButton"), ElementCategory::CheckboxControl);
        assert_eq!(element_category_for_role("AXLink"), ElementCategory::Link);
        assert_eq!(element_category_for_role("AXGroup"), ElementCategory::Group);
        assert_eq!(element_category_for_role("AXStaticText"), ElementCategory::Text);
        assert_eq!(element_category_for_role("AXPopUpButton"), ElementCategory::Button);
    }

    #[test]
    fn input_task_paths() {
        let f = el(3, "AXTextField", "City");
        let d = deterministic_input_task(&f, "DEFAULT");
        assert_eq!(d.action, "type DEFAULT");
        assert_eq!(d.task, "Type 'DEFAULT' into City");
        assert_eq!(AgentSuite::deterministic("DEFAULT").input_task_agent("t", None, None, &f, "DEFAULT").unwrap(), d);

        let ok = r#"{"task": "Use john.doe@example.com as your login email", "action": "type john.doe@example.com"}"#;
        let suite = AgentSuite::with_client(Canned::new(&[ok]), "DEFAULT", 0);
        assert_eq!(suite.input_task_agent("t", None, None, &f, "x").unwrap().text(), "john.doe@example.com");

        let bad = r#"{"task": "t", "action": "click field"}"#;
        let suite = AgentSuite::with_client(Canned::new(&[bad]), "DEFAULT", 1);
        assert!(suite.input_task_agent("t", None, None, &f, "x").is_err());
        assert_eq!(suite.telemetry().snapshot().input_task.invalid, 2);
    }

    #[test]
    fn failing_client_matches_offline() {
        let els = vec![el(1, "AXTextField", "q"), el(2, "AXButton", "Clear"), el(3, "AXButton", "Go")];
        let s = screen(els.clone());
        let refs: Vec<&UiElement> = els.iter().collect();
        let off = AgentSuite::deterministic("DEFAULT");
        let on = AgentSuite::with_client(Arc::new(Failing), "DEFAULT", 2);
        assert_eq!(off.input_agent(&s), on.input_agent(&s));
        assert_eq!(off.order_agent(&s, &refs), on.order_agent(&s, &refs));
        assert_eq!(off.click_task_agent(None, None, &els[2], &s, None), on.click_task_agent(None, None, &els[2], &s, None));
        assert_eq!(on.telemetry().snapshot().total().client_errors, 9);
    }

    #[test]
    fn categories_roundtrip() {
        for c in TaskCategory::ALL {
            assert_eq!(TaskCategory::parse(c.as_str()).as_ref(), Some(c));
        }
        assert_eq!(TaskCategory::ALL.len(), 12);
        assert_eq!(ElementCategory::ALL.len(), 8);
        assert!(TaskCategory::parse("Browsing").is_none());
        assert!(TaskCategory::parse("other:").is_none());
    }
}
