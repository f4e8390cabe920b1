//! Command-line pipeline stages and the interactive session service for
//! `windform`.

pub mod commands;
pub mod service;
