//! Deterministic simulated applications: declarative specs, sessions with
//! popup/menu modality, quirk injection and schematic screenshots.

mod quirks;
mod render;
mod session;
mod spec;

pub use quirks::{apply_quirks, STALE_ID_BASE};
pub use render::{highlight, pixel_rect, render, Raster, Rgb};
pub use session::{is_text_role, start_session, SimBackend, SimSession};
pub use spec::{
    load_app_spec, load_app_spec_file, AppSpec, MenuSpec, PopupSpec, QuirkConfig, SpecError, StateSpec, TextPredicate,
    TransitionSpec, Trigger,
};
