use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// What a command produced: the exit code, the table for humans and the JSON payload.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub human: String,
    pub result: Value,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
}

impl Outcome {
    pub fn new(code: u8, human: String, result: Value) -> Self {
        Outcome {
            code,
            human,
            result,
            inputs: Vec::new(),
            seed: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &str, bytes: &[u8]) -> Self {
        InputDigest {
            path: path.to_owned(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

/// The `--json` output. Wall time is left out so that equal inputs give equal bytes.
#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub schema: u32,
    pub command: &'a [String],
    pub inputs: &'a [InputDigest],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub exit_code: u8,
    pub result: &'a Value,
}

impl<'a> RunReport<'a> {
    pub fn new(command: &'a [String], outcome: &'a Outcome) -> Self {
        RunReport {
            schema: SCHEMA_VERSION,
            command,
            inputs: &outcome.inputs,
            seed: outcome.seed,
            exit_code: outcome.code,
            result: &outcome.result,
        }
    }
}
