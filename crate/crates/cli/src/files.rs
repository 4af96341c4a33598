//! File access with paths attached to every error, plus metadata sidecars.

use std::path::{Path, PathBuf};

use nlos::histogram::cube::{Alignment, TimeHistogramCube};
use nlos::histogram::geometry::{GeometryDoc, SceneGeometry};
use nlos::histogram::io::{load_cube, load_volume};
use nlos::histogram::volume::VoxelVolume;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Fail before any work starts if an input is missing.
pub fn require_exists(paths: &[&Path]) -> CliResult<()> {
    for p in paths {
        if !p.exists() {
            return Err(CliError::Io {
                path: p.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "input file does not exist"),
            });
        }
    }
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    write_bytes(path, format!("{text}\n").as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_cube(path: &Path) -> CliResult<TimeHistogramCube> {
    load_cube(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_volume(path: &Path) -> CliResult<VoxelVolume> {
    load_volume(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

/// `<file>.json` next to an output file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Metadata written next to every output: the effective configuration and a
/// summary, plus what downstream commands need to carry on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment: Option<Alignment>,
    pub summary: serde_json::Value,
}

impl Sidecar {
    pub fn new(command: &str, config: serde_json::Value, summary: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            geometry: None,
            alignment: None,
            summary,
        }
    }

    pub fn read_for(path: &Path) -> CliResult<Option<Sidecar>> {
        let side = sidecar_path(path);
        if side.exists() {
            read_json(&side).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn write_for(&self, path: &Path) -> CliResult<()> {
        write_json(&sidecar_path(path), self)
    }
}

/// Geometry from `--geometry`, else from the input's sidecar, else the default setup.
pub fn resolve_geometry(flag: Option<&Path>, input_sidecar: Option<&Sidecar>) -> CliResult<SceneGeometry> {
    let doc = match flag {
        Some(p) => Some(read_json::<GeometryDoc>(p)?),
        None => input_sidecar.and_then(|s| s.geometry.clone()),
    };
    match doc {
        Some(doc) => Ok(SceneGeometry::new(doc)?),
        None => Ok(SceneGeometry::standard()),
    }
}
