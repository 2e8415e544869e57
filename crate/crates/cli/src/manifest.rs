use serde::Serialize;
use sha2::{Digest, Sha256};

/// Header line written to stderr before a command runs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub timestamp: String,
}

impl RunManifest {
    /// `inputs` are the raw input file bytes; `args` are the effective
    /// settings that change the numbers (seed and output paths excluded).
    pub fn new(command: &str, inputs: &[&[u8]], args: &serde_json::Value, seed: Option<u64>) -> Self {
        let mut hasher = Sha256::new();
        for bytes in inputs {
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(bytes);
        }
        hasher.update(args.to_string().as_bytes());
        Self {
            command: command.to_string(),
            config_digest: hex::encode(hasher.finalize()),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn emit(&self) {
        eprintln!("{}", serde_json::to_string(self).expect("manifest serializes"));
    }
}
