//! Report headers: engine version, input digest and seed.

use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

/// SHA-256 over named parts, each framed by name and length so that
/// moving bytes between parts changes the digest.
pub fn digest<'a>(parts: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut h = Sha256::new();
    for (name, bytes) in parts {
        h.update(name.as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Header {
    pub command: &'static str,
    pub input_sha256: String,
    pub seed: Option<u64>,
}

impl Header {
    pub fn render(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# tap {}\n# command {}\n# input-sha256 {}\n# seed {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.input_sha256,
            seed
        )
    }
}

pub fn auto_seed() -> u64 {
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
    // fold the 128-bit count; the low bits alone would repeat on coarse clocks
    (nanos as u64) ^ ((nanos >> 64) as u64) ^ u64::from(std::process::id()).rotate_left(32)
}
