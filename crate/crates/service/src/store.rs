//! One JSON document per project under a root directory.
//!
//! Writes go to a temporary file in the same directory which is synced and
//! then renamed over the target, so readers (and a restarted process) only
//! ever see a complete old or a complete new document. Writes to one project
//! are serialized; writers must present the version they read.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use reqprio_core::{validate_project, ModelError, Project, Violation};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("project `{0}` not found")]
    NotFound(String),
    #[error("project `{0}` already exists")]
    AlreadyExists(String),
    #[error("project id `{0}` must be non-empty and use only letters, digits, `-` and `_`")]
    BadId(String),
    #[error("version conflict: expected {expected}, stored version is {current}")]
    Conflict { expected: u64, current: u64 },
    #[error("project is invalid ({} violations)", .0.len())]
    Invalid(Vec<Violation>),
    #[error("stored project `{id}` is unreadable: {source}")]
    Corrupt { id: String, source: ModelError },
    #[error("store root {0} is not a directory")]
    NoRoot(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjectSummary {
    pub id: String,
    pub version: u64,
}

pub struct ProjectStore {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn check_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(StoreError::BadId(id.to_owned()))
    }
}

/// Replaces `path` with `bytes` via write-to-temp, fsync and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    if let Ok(d) = fs::File::open(dir) {
        // directory fsync is unsupported on some platforms
        let _ = d.sync_all();
    }
    Ok(())
}

impl ProjectStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        if !root.is_dir() {
            return Err(StoreError::NoRoot(root));
        }
        Ok(Self { root, locks: Mutex::new(HashMap::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_of(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.json"))
    }

    fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_owned()).or_default().clone()
    }

    pub fn list(&self) -> Result<Vec<ProjectSummary>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let path = entry?.path();
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            if path.extension().and_then(|e| e.to_str()) != Some("json") || check_id(id).is_err() {
                continue;
            }
            let project = self.load(id)?;
            out.push(ProjectSummary { id: id.to_owned(), version: project.version });
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    /// Reads and validates a stored project.
    pub fn load(&self, id: &str) -> Result<Project, StoreError> {
        check_id(id)?;
        let text = match fs::read_to_string(self.path_of(id)) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_owned())),
            Err(e) => return Err(e.into()),
        };
        let project = Project::from_json(&text).map_err(|source| StoreError::Corrupt { id: id.to_owned(), source })?;
        let violations = validate_project(&project);
        if !violations.is_empty() {
            return Err(StoreError::Invalid(violations));
        }
        Ok(project)
    }

    fn write(&self, id: &str, project: &Project) -> Result<(), StoreError> {
        let mut text = project.to_json();
        text.push('\n');
        write_atomic(&self.path_of(id), text.as_bytes())?;
        Ok(())
    }

    /// Stores a new project at version 1.
    pub fn create(&self, id: &str, mut project: Project) -> Result<Project, StoreError> {
        check_id(id)?;
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        if self.path_of(id).exists() {
            return Err(StoreError::AlreadyExists(id.to_owned()));
        }
        let violations = validate_project(&project);
        if !violations.is_empty() {
            return Err(StoreError::Invalid(violations));
        }
        project.version = 1;
        self.write(id, &project)?;
        Ok(project)
    }

    /// Applies `edit` to the stored project if its version is still
    /// `expected_version`, validates the result and stores it with the next
    /// version. `edit` returning `Ok(false)` means nothing changed; the
    /// document and its version are then left alone.
    pub fn update<F>(&self, id: &str, expected_version: u64, edit: F) -> Result<Project, StoreError>
    where
        F: FnOnce(&mut Project) -> Result<bool, StoreError>,
    {
        check_id(id)?;
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut project = self.load(id)?;
        if project.version != expected_version {
            return Err(StoreError::Conflict { expected: expected_version, current: project.version });
        }
        let current = project.version;
        if !edit(&mut project)? {
            return self.load(id);
        }
        let violations = validate_project(&project);
        if !violations.is_empty() {
            return Err(StoreError::Invalid(violations));
        }
        project.version = current + 1;
        self.write(id, &project)?;
        Ok(project)
    }
}
