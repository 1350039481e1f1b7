//! Strict validation of agent JSON replies.
//!
//! Nothing is repaired except one lexical convenience: object keys written as
//! bare integers (`{7: "x"}`) are quoted before parsing.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};

use super::{ElementCategory, InputMap, InputTaskAnnotation, OrderGroup, OrderPlan, TaskAnnotation, TaskCategory};

pub const MAX_GROUPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaId {
    InputMap,
    OrderPlan,
    TaskAnnotation,
    InputTaskAnnotation,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("ValidationError({path}): {message}")]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

fn verr(path: impl Into<String>, message: impl Into<String>) -> ValidationError {
    ValidationError { path: path.into(), message: message.into() }
}

/// Id sets the reply is checked against.
#[derive(Debug, Clone, Default)]
pub struct ValidationContext {
    /// Ids presented to the order agent.
    pub presented_ids: BTreeSet<u32>,
    /// Text-field ids of the observed tree.
    pub text_field_ids: BTreeSet<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Validated {
    InputMap(InputMap),
    OrderPlan(OrderPlan),
    TaskAnnotation(TaskAnnotation),
    InputTaskAnnotation(InputTaskAnnotation),
}

/// Quotes bare integer object keys outside string literals.
pub fn quote_bare_int_keys(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len() + 8);
    let (mut i, mut in_str, mut expect_key) = (0, false, false);
    let mut stack: Vec<char> = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if in_str {
            out.push(c);
            if c == '\\' && i + 1 < chars.len() {
                out.push(chars[i + 1]);
                i += 2;
                continue;
            }
            if c == '"' {
                in_str = false;
            }
            i += 1;
            continue;
        }
        match c {
            '"' => {
                in_str = true;
                expect_key = false;
            }
            '{' | '[' => {
                stack.push(c);
                expect_key = c == '{';
            }
            '}' | ']' => {
                stack.pop();
                expect_key = false;
            }
            ',' => expect_key = stack.last() == Some(&'{'),
            '-' | '0'..='9' if expect_key => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let mut k = j;
                while k < chars.len() && chars[k].is_whitespace() {
                    k += 1;
                }
                if k < chars.len() && chars[k] == ':' {
                    out.push('"');
                    out.extend(&chars[i..j]);
                    out.push('"');
                    i = j;
                    expect_key = false;
                    continue;
                }
                expect_key = false;
            }
            c if c.is_whitespace() => {}
            _ => expect_key = false,
        }
        out.push(c);
        i += 1;
    }
    out
}

/// Strips a surrounding markdown code fence, if the whole reply is one.
fn strip_fence(s: &str) -> &str {
    let t = s.trim();
    if let Some(rest) = t.strip_prefix("```") {
        if let Some(body) = rest.strip_suffix("```") {
            return body.trim_start_matches(|c: char| c.is_ascii_alphanumeric()).trim();
        }
    }
    t
}

pub fn validate_json(bytes: &[u8], schema: SchemaId, ctx: &ValidationContext) -> Result<Validated, ValidationError> {
    let text = std::str::from_utf8(bytes).map_err(|_| verr("$", "reply is not UTF-8"))?;
    let text = quote_bare_int_keys(strip_fence(text));
    let v: Value = serde_json::from_str(&text).map_err(|e| verr("$", format!("not JSON: {e}")))?;
    Ok(match schema {
        SchemaId::InputMap => Validated::InputMap(input_map(&v, ctx)?),
        SchemaId::OrderPlan => Validated::OrderPlan(order_plan(&v, ctx)?),
        SchemaId::TaskAnnotation => Validated::TaskAnnotation(task_annotation(&v)?),
        SchemaId::InputTaskAnnotation => Validated::InputTaskAnnotation(input_task_annotation(&v)?),
    })
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ValidationError> {
    v.as_object().ok_or_else(|| verr(path, "expected an object"))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str]) -> Result<(), ValidationError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(verr(format!("$.{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn string_field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a str, ValidationError> {
    match obj.get(key) {
        None => Err(verr(format!("$.{key}"), "missing field")),
        Some(v) => v.as_str().ok_or_else(|| verr(format!("$.{key}"), "expected a string")),
    }
}

fn input_map(v: &Value, ctx: &ValidationContext) -> Result<InputMap, ValidationError> {
    let obj = object(v, "$")?;
    let mut out = BTreeMap::new();
    for (k, val) in obj {
        let path = format!("$.{k}");
        let id: u32 = k.parse().map_err(|_| verr(&path, "key is not an element id"))?;
        if !ctx.text_field_ids.contains(&id) {
            return Err(verr(&path, "id is not a text field of the observed tree"));
        }
        let s = val.as_str().ok_or_else(|| verr(&path, "expected a string"))?;
        if s.is_empty() {
            return Err(verr(&path, "empty input string"));
        }
        out.insert(id, s.to_string());
    }
    Ok(out)
}

fn order_plan(v: &Value, ctx: &ValidationContext) -> Result<OrderPlan, ValidationError> {
    let obj = object(v, "$")?;
    reject_unknown(obj, &["action_order", "login_page", "system_access_required"])?;
    let flag = |k: &str| -> Result<bool, ValidationError> {
        match obj.get(k) {
            None => Ok(false),
            Some(b) => b.as_bool().ok_or_else(|| verr(format!("$.{k}"), "expected a boolean")),
        }
    };
    let login_page = flag("login_page")?;
    let system_access_required = flag("system_access_required")?;
    let groups_v = obj
        .get("action_order")
        .ok_or_else(|| verr("$.action_order", "missing field"))?
        .as_array()
        .ok_or_else(|| verr("$.action_order", "expected an array"))?;
    if groups_v.len() > MAX_GROUPS {
        return Err(verr("$.action_order", format!("{} groups, at most {MAX_GROUPS} allowed", groups_v.len())));
    }
    let mut seen = BTreeSet::new();
    let mut groups = Vec::with_capacity(groups_v.len());
    for (gi, gv) in groups_v.iter().enumerate() {
        let gpath = format!("$.action_order[{gi}]");
        let gobj = object(gv, &gpath)?;
        if gobj.len() != 1 {
            return Err(verr(&gpath, "a group is an object with exactly one name"));
        }
        let (name, ids_v) = gobj.iter().next().unwrap();
        let ipath = format!("{gpath}.{name}");
        let arr = ids_v.as_array().ok_or_else(|| verr(&ipath, "expected an array of ids"))?;
        let mut ids = Vec::with_capacity(arr.len());
        for (ii, idv) in arr.iter().enumerate() {
            let p = format!("{ipath}[{ii}]");
            let id = idv.as_u64().and_then(|n| u32::try_from(n).ok()).ok_or_else(|| verr(&p, "expected an element id"))?;
            if !ctx.presented_ids.contains(&id) {
                return Err(verr(&p, "id was not presented"));
            }
            if !seen.insert(id) {
                return Err(verr(&p, "id appears in more than one place"));
            }
            ids.push(id);
        }
        groups.push(OrderGroup { name: name.clone(), ids });
    }
    if let Some(missing) = ctx.presented_ids.difference(&seen).next() {
        return Err(verr("$.action_order", format!("id {missing} is not covered")));
    }
    Ok(OrderPlan { action_order: groups, login_page, system_access_required })
}

fn task_annotation(v: &Value) -> Result<TaskAnnotation, ValidationError> {
    if let Some(s) = v.as_str() {
        return if s.is_empty() { Ok(TaskAnnotation::rejected()) } else { Err(verr("$", "expected an object")) };
    }
    let obj = object(v, "$")?;
    reject_unknown(obj, &["task", "task_category", "element_category"])?;
    let task = string_field(obj, "task")?;
    if task.trim().is_empty() {
        return Ok(TaskAnnotation::rejected());
    }
    let tc = string_field(obj, "task_category")?;
    let task_category = TaskCategory::parse(tc).ok_or_else(|| verr("$.task_category", format!("unknown category {tc:?}")))?;
    let ec = string_field(obj, "element_category")?;
    let element_category =
        ElementCategory::parse(ec).ok_or_else(|| verr("$.element_category", format!("unknown category {ec:?}")))?;
    Ok(TaskAnnotation { task: task.to_string(), task_category: Some(task_category), element_category: Some(element_category) })
}

fn input_task_annotation(v: &Value) -> Result<InputTaskAnnotation, ValidationError> {
    let obj = object(v, "$")?;
    reject_unknown(obj, &["task", "action"])?;
    let task = string_field(obj, "task")?;
    if task.trim().is_empty() {
        return Err(verr("$.task", "empty task"));
    }
    let action = string_field(obj, "action")?;
    match action.strip_prefix("type ") {
        Some(text) if !text.is_empty() => {}
        _ => return Err(verr("$.action", "action must be \"type <text>\"")),
    }
    Ok(InputTaskAnnotation { task: task.to_string(), action: action.to_string() })
}
