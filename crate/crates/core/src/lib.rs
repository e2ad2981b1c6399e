pub mod geometry;
pub mod graph;
pub mod cli;
pub mod engine;
pub mod oracle;
