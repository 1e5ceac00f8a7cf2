//! Acceptance criteria for `density-lab` live in `tests/acceptance.rs` and
//! run with `cargo test -p density-lab-acceptance`. This package lives apart
//! from the library so that its failures do not stop the library's
//! own test binaries from running.
