//! Accessibility-tree crawling, task synthesis and grounding evaluation for
//! desktop applications.

pub mod agents;
pub mod ax;
pub mod backend;
pub mod cli;
pub mod crawler;
pub mod eval;
pub mod graph;
pub mod sim;
pub mod tasks;
