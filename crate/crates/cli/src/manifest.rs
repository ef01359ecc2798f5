//! Family manifests: a TOML document with an ordered `operators` list of
//! matrix file paths (relative to the manifest) and optional `labels`.

use std::fs;
use std::path::{Path, PathBuf};

use procrustes::Covariance;
use serde::Deserialize;

use crate::error::{CliError, Context};
use crate::matrix_io::read_covariance;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    operators: Vec<PathBuf>,
    labels: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub path: PathBuf,
    pub operators: Vec<PathBuf>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Family {
    pub manifest: Manifest,
    pub members: Vec<Covariance>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let raw: RawManifest =
            toml::from_str(&text).map_err(|e| CliError::parse(path, None, None, e.to_string()))?;
        if raw.operators.is_empty() {
            return Err(CliError::parse(path, None, None, "manifest lists no operators"));
        }
        let labels = match raw.labels {
            Some(l) if l.len() != raw.operators.len() => {
                return Err(CliError::parse(
                    path,
                    None,
                    None,
                    format!("{} labels for {} operators", l.len(), raw.operators.len()),
                ))
            }
            Some(l) => l,
            None => raw
                .operators
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
        };
        let base = path.parent().unwrap_or(Path::new(""));
        let operators = raw.operators.iter().map(|p| base.join(p)).collect();
        Ok(Self {
            path: path.to_path_buf(),
            operators,
            labels,
        })
    }

    /// Reads every operator and checks that dimensions agree.
    pub fn load(self) -> Result<Family, CliError> {
        let mut members: Vec<Covariance> = Vec::with_capacity(self.operators.len());
        for p in &self.operators {
            let c = read_covariance(p)?;
            if let Some(first) = members.first() {
                if c.dim() != first.dim() {
                    return Err(procrustes::Error::DimMismatch {
                        expected: first.dim(),
                        found: c.dim(),
                    })
                    .context(|| p.display().to_string());
                }
            }
            members.push(c);
        }
        Ok(Family {
            manifest: self,
            members,
        })
    }
}

impl Family {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        Manifest::read(path)?.load()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.manifest.labels[i]
    }
}
