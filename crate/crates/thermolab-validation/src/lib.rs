//! Acceptance harness for thermolab. Run with `cargo test -p thermolab-validation`.
