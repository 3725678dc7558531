//! Closed-loop UAV mission dialogues over simulated 5G slices, with
//! multi-pillar scoring of the resulting corpora.

pub mod episode;
pub mod network;
pub mod environment;
pub mod tools;
pub mod scoring;
pub mod scenario;
pub mod seeding;
pub mod agents;
pub mod harness;
