use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ax::{AxTree, Point};
use crate::tasks::{parse_action, TaskRecord};
use crate::ax::ActionKind;

pub struct PredictorInput<'a> {
    pub record: &'a TaskRecord,
    pub index: usize,
    pub run: u32,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredictorFailure {
    #[error("predictor process: {0}")]
    Process(String),
    #[error("predictor has no answer: {0}")]
    NoAnswer(String),
}

/// Maps one task record to a raw action string such as `left click, (x, y)`.
pub trait Predictor: Send + Sync {
    fn name(&self) -> String;
    fn predict(&self, input: &PredictorInput) -> Result<String, PredictorFailure>;
}

/// Answers from the gold record. Only meaningful as a harness self-check.
pub struct Oracle;

impl Predictor for Oracle {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn predict(&self, input: &PredictorInput) -> Result<String, PredictorFailure> {
        Ok(input.record.action.clone())
    }
}

/// Always returns text no grammar accepts.
pub struct NeverParse;

impl Predictor for NeverParse {
    fn name(&self) -> String {
        "never".into()
    }

    fn predict(&self, _: &PredictorInput) -> Result<String, PredictorFailure> {
        Ok("no idea".into())
    }
}

/// Clicks a uniformly random pixel of the screenshot. Draws depend only on
/// the seed, the run and the record index.
pub struct RandomClick {
    pub seed: u64,
}

impl Predictor for RandomClick {
    fn name(&self) -> String {
        format!("random(seed={})", self.seed)
    }

    fn predict(&self, input: &PredictorInput) -> Result<String, PredictorFailure> {
        let r = input.record;
        let w = AxTree::from_json(&r.a11y_path)
            .map_err(|e| PredictorFailure::NoAnswer(e.to_string()))?
            .window_bbox()
            .scaled(r.scaling_factor);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((input.run as u64) << 32) | (input.index as u64 & 0xffff_ffff));
        let x = w.x + rng.gen::<f64>() * w.w;
        let y = w.y + rng.gen::<f64>() * w.h;
        Ok(format!("left click, ({x}, {y})"))
    }
}

/// Clicks the same pixel every time.
pub struct FixedPoint(pub Point);

impl Predictor for FixedPoint {
    fn name(&self) -> String {
        format!("fixed({}, {})", self.0.x, self.0.y)
    }

    fn predict(&self, _: &PredictorInput) -> Result<String, PredictorFailure> {
        Ok(format!("left click, ({}, {})", self.0.x, self.0.y))
    }
}

struct Proc {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Talks to a long-running external model process over stdin/stdout: one
/// JSON object `{"image_path", "a11y_path", "task"}` per line in, one raw
/// action per line out. A crashed process is restarted on the next request.
pub struct CommandPredictor {
    command: String,
    image_root: std::path::PathBuf,
    proc: Mutex<Option<Proc>>,
}

impl CommandPredictor {
    pub fn new(command: impl Into<String>, image_root: impl Into<std::path::PathBuf>) -> Self {
        Self { command: command.into(), image_root: image_root.into(), proc: Mutex::new(None) }
    }

    fn spawn(&self) -> Result<Proc, PredictorFailure> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| PredictorFailure::Process(e.to_string()))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Proc { child, stdin, stdout })
    }

    fn exchange(p: &mut Proc, line: &str) -> std::io::Result<Option<String>> {
        p.stdin.write_all(line.as_bytes())?;
        p.stdin.flush()?;
        let mut out = String::new();
        if p.stdout.read_line(&mut out)? == 0 {
            return Ok(None);
        }
        Ok(Some(out.trim_end_matches(['\r', '\n']).to_string()))
    }
}

impl Predictor for CommandPredictor {
    fn name(&self) -> String {
        format!("command({})", self.command)
    }

    fn predict(&self, input: &PredictorInput) -> Result<String, PredictorFailure> {
        let r = input.record;
        let mut line = serde_json::json!({
            "image_path": self.image_root.join(&r.image_ref),
            "a11y_path": r.a11y_path,
            "task": r.task,
        })
        .to_string();
        line.push('\n');
        let mut guard = self.proc.lock().unwrap_or_else(|e| e.into_inner());
        if guard.is_none() {
            *guard = Some(self.spawn()?);
        }
        let p = guard.as_mut().expect("spawned");
        match Self::exchange(p, &line) {
            Ok(Some(answer)) => Ok(answer),
            Ok(None) => {
                *guard = None;
                Err(PredictorFailure::Process("process closed its output".into()))
            }
            Err(e) => {
                *guard = None;
                Err(PredictorFailure::Process(e.to_string()))
            }
        }
    }
}

impl Drop for CommandPredictor {
    fn drop(&mut self) {
        if let Some(mut p) = self.proc.get_mut().ok().and_then(Option::take) {
            drop(p.stdin);
            let _ = p.child.wait();
        }
    }
}

/// Convenience for tests and the CLI: the gold point in pixels.
pub fn gold_pixel(record: &TaskRecord) -> Option<Point> {
    parse_action(&record.action).ok().filter(|a| a.kind == ActionKind::Click).and_then(|a| a.point)
}
