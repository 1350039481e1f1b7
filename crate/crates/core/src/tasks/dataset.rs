use std::path::Path;

use super::TaskRecord;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn to_jsonl(records: &[TaskRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Parses JSON Lines; blank lines are skipped, line numbers are 1-based.
pub fn from_jsonl(text: &str) -> Result<Vec<TaskRecord>, DatasetError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| DatasetError::Parse { line: i + 1, message: e.to_string() }))
        .collect()
}

pub fn write_dataset(records: &[TaskRecord], path: &Path) -> Result<(), DatasetError> {
    std::fs::write(path, to_jsonl(records))?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Vec<TaskRecord>, DatasetError> {
    from_jsonl(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::ax::{AxTree, BBox, UiElement};

    pub(crate) fn record(app: &str, i: u64) -> TaskRecord {
        let el = UiElement::new(1, "AXButton", BBox::of(10.0, 10.0, 20.0, 20.0)).named("Go");
        let tree = AxTree::new(UiElement::new(0, "AXWindow", BBox::of(0.0, 0.0, 100.0, 100.0)).with_children(vec![el.clone()]), BBox::of(0.0, 0.0, 100.0, 100.0)).unwrap();
        TaskRecord {
            screen_id: i,
            app_name: app.into(),
            task: "click Go".into(),
            raw_action: "click AXButton \"Go\"".into(),
            action: "left click, (20, 20)".into(),
            element_data: el,
            scaling_factor: 1.0,
            original_task: true,
            a11y_path: tree.to_json(),
            image_ref: format!("images/{app}/screen_000000.ppm"),
            cropped_image_ref: format!("images/{app}/crop_{i:06}.ppm"),
            task_category: "Navigation".into(),
            element_category: "Button".into(),
            replay_path: vec![],
        }
    }

    #[test]
    fn roundtrip() {
        let rs = vec![record("a", 0), record("b", 1)];
        assert_eq!(from_jsonl(&to_jsonl(&rs)).unwrap(), rs);
        assert_eq!(to_jsonl(&[]), "");
        assert!(from_jsonl("").unwrap().is_empty());
    }

    #[test]
    fn bad_line_number() {
        let mut text = to_jsonl(&[record("a", 0), record("a", 1)]);
        text.push_str("{not json}\n");
        match from_jsonl(&text) {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tasks.jsonl");
        let rs = vec![record("a", 0)];
        write_dataset(&rs, &p).unwrap();
        assert_eq!(read_dataset(&p).unwrap(), rs);
    }
}
