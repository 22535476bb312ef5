//! Offline embodied question answering over a synthetic grid world.
//!
//! The agent maps its surroundings into an occupancy grid, maintains a layered
//! scene graph enriched with room names and frontier-object links, keeps a
//! small memory of question-relevant views, and asks a planner what to do next
//! until the planner is confident in an answer.

pub mod enrichment;
pub mod episode;
pub mod geom;
pub mod http;
pub mod lexicon;
pub mod mapping;
pub mod planner;
pub mod memory;
pub mod scenegraph;
pub mod worldsim;
