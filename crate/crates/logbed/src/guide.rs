//! The narrative guide, one module per book chapter.
//!
//! The chapters live as Markdown under `book/` (a standard mdbook); including
//! them here compiles every code block as a doc-test, so `cargo test --doc`
//! keeps the book honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/determinism.md")]
pub mod determinism {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}

#[doc = include_str!("../../../book/src/attack-chains.md")]
pub mod attack_chains {}

#[doc = include_str!("../../../book/src/log-data.md")]
pub mod log_data {}

#[doc = include_str!("../../../book/src/detection.md")]
pub mod detection {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
