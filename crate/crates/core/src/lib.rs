//! Exact enumeration and invariant theory for quartic D4 fields ordered by
//! conductor.
//!
//! Module map:
//! - [`arith`]: factoring, characters, fundamental discriminants.
//! - [`linalg`]: integer normal forms, prime-field algebra decomposition.
//! - [`quadfield`]: quadratic fields, class groups, units, L-values.
//! - [`quartic`]: quartic orders, Round 2, splitting types, field records.
//! - [`vpairs`]: pairs of ternary quadratic forms and their invariants.
//! - [`census`]: Kummer enumeration of D4 fields and the derived checks.
//! - [`massform`]: local masses, density tables and Euler products.
//! - [`verify`]: named check suites shared by the CLI and the test gate.

pub mod arith;
pub mod linalg;
pub mod quadfield;
pub mod quartic;
pub mod census;
pub mod massform;
pub mod vpairs;
pub mod verify;
