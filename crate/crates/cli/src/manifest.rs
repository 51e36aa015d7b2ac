use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Outcome};
use crate::run::{load_json, Invocation};

pub const FILE_NAME: &str = "manifest.json";

/// Record of one run, written beside its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub invocation: Invocation,
    /// Output files relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
    pub version: String,
}

impl RunManifest {
    pub fn new(invocation: Invocation, outputs: Vec<String>, wall_time_seconds: f64) -> Self {
        Self { invocation, outputs, wall_time_seconds, version: env!("CARGO_PKG_VERSION").to_string() }
    }

    pub fn write(&self, dir: &Path) -> Outcome<()> {
        let path = dir.join(FILE_NAME);
        let mut text = serde_json::to_string_pretty(self).expect("serializable");
        text.push('\n');
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))
    }

    pub fn read(path: &Path) -> Outcome<Self> {
        load_json(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::{FigureParams, Invocation};

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest::new(
            Invocation::Figure(FigureParams { id: "fig1".into() }),
            vec!["fig1.csv".into()],
            0.25,
        );
        let dir = tempfile::tempdir().unwrap();
        m.write(dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(FILE_NAME)).unwrap();
        assert!(text.contains("\"subcommand\": \"figure\""));
        assert_eq!(RunManifest::read(&dir.path().join(FILE_NAME)).unwrap(), m);
    }

    #[test]
    fn unknown_subcommand_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(FILE_NAME);
        fs::write(&path, r#"{"subcommand":"bogus","parameters":{},"outputs":[],"wall_time_seconds":0,"version":"0"}"#)
            .unwrap();
        match RunManifest::read(&path) {
            Err(Failure::Usage(m)) => assert!(m.contains(FILE_NAME)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
