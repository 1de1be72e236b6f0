//! Workbench for three interrelated modal logics of propositional control:
//!
//! * **PECP** — a ceteris paribus logic whose modality `<X>` quantifies over
//!   worlds agreeing on every atom in the signature `X`,
//! * **STIT** — atemporal group/individual "seeing to it that" logic over
//!   choice partitions with independent agents,
//! * **CL-PC** — the coalition logic of propositional control, where each
//!   agent owns a set of atoms it may toggle.
//!
//! The crate provides explicit model semantics for all three (plus plain S5),
//! satisfiability-preserving translations between them, a bounded-world S5
//! SAT kernel with an embedded DPLL engine, and brute-force oracles that
//! cross-check every pipeline on small instances.

pub mod atom;
pub mod formula;
pub mod model;
pub mod randgen;
pub mod sat;
pub mod semantics;
pub mod translate;
pub mod verify;

pub use atom::{AgentId, Atom};
pub use formula::{ClpcFormula, Formula, PecpFormula, S5Formula, StitFormula};
pub use model::{ClpcModel, PecpModel, StitModel, World};
