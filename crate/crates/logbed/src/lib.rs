//! logbed simulates a small company network under multi-step cyberattack and
//! turns it into reproducible log datasets.
//!
//! Every run is a pure function of a declarative scenario and a 64-bit seed:
//! a virtual clock and ordered event queue drive seeded user emulation (web,
//! email, file activity) and an adversary executing validated attack chains,
//! while the log emitter records host audit, network sensor, and service
//! events plus a calibrated noise floor. A structural rule engine replays
//! detection over the frozen dataset, and the experiment harness reproduces
//! detected-step counts, per-rule alert statistics, and an inter-host
//! variation analysis with Welch's t-test.
//!
//! ```
//! use logbed::adversary::{generate_chain, build_default_digraph, validate_chain};
//! use logbed::simkernel::RngStream;
//!
//! let digraph = build_default_digraph();
//! let stream = RngStream::derive(42, &["demo"]).unwrap();
//! let targets = vec!["client1".to_string(), "client2".to_string()];
//! let chain = generate_chain(&digraph, &stream, 5, &targets).unwrap();
//! assert!(validate_chain(&chain, &digraph).is_ok());
//! ```
//!
//! The `book/` directory holds the narrative guide; its chapters are
//! compiled as doc-tests via the [`guide`] module so the examples in the
//! book cannot drift from the library.

pub mod adversary;
pub mod detection;
pub mod experiment;
pub mod logemit;
pub mod pipeline;
pub mod scenario;
pub mod selftest;
pub mod simkernel;
pub mod useremu;

pub mod guide;

/// Version of the crate, embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
