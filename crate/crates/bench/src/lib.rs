//! Shared fixtures for the criterion benches.

use std::path::PathBuf;

/// Root of the shipped `.ale` sources.
pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}
