//! Run manifests: the resolved command, a content hash of its parameters and
//! a digest of every output file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::commands::Artifact;
use crate::table::Format;

pub const SNR_DEFINITION: &str =
    "snr_db = 10*log10(E/N0); excludes array gain, channels are normalised so E[h^H h] = N";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

impl OutputDigest {
    pub fn of(artifact: &Artifact) -> Self {
        Self { name: artifact.name.clone(), bytes: artifact.bytes.len(), sha256: hex(&Sha256::digest(&artifact.bytes)) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub format: Format,
    /// Seed of the random draws, when the command uses any.
    pub seed: Option<u64>,
    pub snr_definition: String,
    /// Git-style object hash (SHA-256 over `blob <len>\0<json>`) of `command` and `format`.
    pub parameter_hash: String,
    pub outputs: Vec<OutputDigest>,
}

#[derive(Serialize)]
struct Parameters<'a> {
    command: &'a Command,
    format: Format,
}

impl Manifest {
    pub fn new(command: &Command, format: Format, artifacts: &[Artifact]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.clone(),
            format,
            seed: seed_of(command),
            snr_definition: SNR_DEFINITION.into(),
            parameter_hash: parameter_hash(command, format),
            outputs: artifacts.iter().map(OutputDigest::of).collect(),
        }
    }
}

fn seed_of(command: &Command) -> Option<u64> {
    match command {
        Command::PslStats(a) => Some(a.seed),
        Command::Bler(a) => Some(a.stopping.seed),
        Command::Reproduce(a) => Some(a.stopping.seed),
        _ => None,
    }
}

pub fn parameter_hash(command: &Command, format: Format) -> String {
    let body = serde_json::to_vec(&Parameters { command, format }).expect("arguments always serialise");
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", body.len()).as_bytes());
    hasher.update(&body);
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
