//! Acceptance checks live in `tests/acceptance.rs`.
//!
//! They run against the `fracyule` library and the `fracyule` binary built
//! alongside them in the same target directory.
