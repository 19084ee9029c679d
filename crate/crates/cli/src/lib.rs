//! Batch front-end for fracheat experiments.

pub mod commands;
pub mod config;
pub mod output;
