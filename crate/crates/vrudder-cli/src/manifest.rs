//! Run manifest: a structured-text record of tool version, configuration
//! digest, seed, subcommand, timestamps, and every file the run produced.
//! The manifest is the only artifact carrying wall-clock timestamps; traces,
//! reports, and plots stay byte-identical across reruns.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::report::Report;

/// SHA-256 digest of the configuration bytes, lower-case hex.
pub fn config_digest(config_bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Write `run_manifest.txt` into `out_dir` and return its path.
pub fn write_manifest(
    out_dir: &Path,
    subcommand: &str,
    config_bytes: &[u8],
    seed: u64,
    outputs: &[PathBuf],
) -> Result<PathBuf> {
    let (created_unix, finished_unix) = now_pair();
    let mut r = Report::new();
    r.push("tool", format!("vrudder {}", env!("CARGO_PKG_VERSION")));
    r.push("subcommand", subcommand);
    r.push("config_sha256", config_digest(config_bytes));
    r.push("seed", seed.to_string());
    r.push("created_unix", created_unix.to_string());
    r.push("finished_unix", finished_unix.to_string());
    r.push_usize("output_count", outputs.len());
    for (i, path) in outputs.iter().enumerate() {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        r.push(&format!("output.{i}"), name);
    }
    let path = out_dir.join("run_manifest.txt");
    r.write(&path)?;
    Ok(path)
}

fn now_pair() -> (u64, u64) {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    (now, now)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_for_identical_bytes() {
        assert_eq!(config_digest(b"[flight]"), config_digest(b"[flight]"));
        assert_ne!(config_digest(b"[flight]"), config_digest(b"[flight] "));
        // Known vector: SHA-256 of the empty string.
        assert_eq!(
            config_digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
