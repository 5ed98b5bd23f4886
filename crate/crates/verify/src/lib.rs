//! Acceptance checks for `onespike`; see `tests/acceptance.rs`.
