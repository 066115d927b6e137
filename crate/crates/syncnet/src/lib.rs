//! Configuration files, CSV output and command execution for the `syncnet`
//! command-line tool.
//!
//! ```no_run
//! let text = std::fs::read_to_string("configs/counterexample.json").unwrap();
//! let cfg = syncnet::config::parse_config(&text, None).unwrap();
//! let outcome = syncnet::commands::run(&cfg).unwrap();
//! assert_eq!(outcome.exit_code(), 0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

pub use syncnet_core as core;
