use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL: &str = "pharmonic";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PHARMONIC_OUT_DIR";

/// One output file, written atomically next to its siblings.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

/// Identifies the tool and the resolved configuration behind an output.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
}

impl Stamp {
    pub fn new<C: Serialize>(command: &'static str, config: &C) -> Result<Self, CliError> {
        let bytes = serde_json::to_vec(config).map_err(|e| CliError::Input(format!("config: {e}")))?;
        Ok(Stamp {
            tool: TOOL,
            version: VERSION,
            command,
            config_sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }

    /// Pretty JSON with the stamp, the resolved config and the report.
    pub fn json<C: Serialize, R: Serialize>(&self, name: &str, config: &C, report: &R) -> Result<Artifact, CliError> {
        #[derive(Serialize)]
        struct Envelope<'a, C, R> {
            #[serde(flatten)]
            stamp: &'a Stamp,
            config: &'a C,
            report: &'a R,
        }
        let mut contents = serde_json::to_vec_pretty(&Envelope {
            stamp: self,
            config,
            report,
        })
        .map_err(|e| CliError::Invariant(format!("cannot serialize report: {e}")))?;
        contents.push(b'\n');
        Ok(Artifact {
            name: name.to_string(),
            contents,
        })
    }

    /// CSV body preceded by a `#` comment line carrying the stamp.
    pub fn csv(&self, name: &str, body: &str) -> Artifact {
        let header = format!(
            "# {} {} {} config-sha256={}\n",
            self.tool, self.version, self.command, self.config_sha256
        );
        Artifact {
            name: name.to_string(),
            contents: [header.as_bytes(), body.as_bytes()].concat(),
        }
    }
}

/// Output directory by precedence: flag, config file, environment, `.`.
pub fn resolve_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    flag.or(config)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes each artifact through a temporary file in `dir` and a rename.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path, source: std::io::Error| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let target = dir.join(&a.name);
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(dir, e))?;
        tmp.write_all(&a.contents).map_err(|e| io(&target, e))?;
        tmp.as_file().sync_all().map_err(|e| io(&target, e))?;
        tmp.persist(&target).map_err(|e| io(&target, e.error))?;
        written.push(target);
    }
    Ok(written)
}
