use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::desugar::{DesugarError, Desugarer};
use super::program::Program;
use crate::reader::{parse_source, ParseError, Statement, StatementKind};

/// Displays an optional path, `<input>` when absent.
pub struct ShowPath<'a>(pub &'a Option<PathBuf>);

impl fmt::Display for ShowPath<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(p) => write!(f, "{}", p.display()),
            None => write!(f, "<input>"),
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{source}", ShowPath(path))]
    Parse { path: Option<PathBuf>, source: ParseError },
    #[error("{}:{source}", ShowPath(path))]
    Desugar { path: Option<PathBuf>, source: DesugarError },
    #[error("{}: cannot find import \"{name}\"", from.display())]
    ImportNotFound { from: PathBuf, name: String },
}

fn canonical(path: &Path) -> Result<PathBuf, LoadError> {
    path.canonicalize().map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

fn resolve_import(from: &Path, name: &str, search: &[PathBuf]) -> Result<PathBuf, LoadError> {
    let dir = from.parent().unwrap_or(Path::new("."));
    std::iter::once(dir.to_path_buf())
        .chain(search.iter().cloned())
        .map(|d| d.join(name))
        .find(|p| p.is_file())
        .map(|p| canonical(&p))
        .unwrap_or_else(|| Err(LoadError::ImportNotFound { from: from.to_path_buf(), name: name.to_string() }))
}

/// Reads and parses `entries` and everything they import. Each file is read
/// once; files are returned in canonical-path order so loading does not
/// depend on import order.
pub fn read_closure(entries: &[PathBuf], search: &[PathBuf]) -> Result<BTreeMap<PathBuf, Vec<Statement>>, LoadError> {
    let mut files = BTreeMap::new();
    let mut pending: Vec<PathBuf> = entries.iter().map(|p| canonical(p)).collect::<Result<_, _>>()?;
    while let Some(path) = pending.pop() {
        if files.contains_key(&path) {
            continue;
        }
        let src = std::fs::read_to_string(&path).map_err(|source| LoadError::Io { path: path.clone(), source })?;
        let stmts =
            parse_source(&src).map_err(|source| LoadError::Parse { path: Some(path.clone()), source })?;
        for s in &stmts {
            if let StatementKind::Import(name) = &s.kind {
                pending.push(resolve_import(&path, name, search)?);
            }
        }
        files.insert(path, stmts);
    }
    Ok(files)
}

/// Loads a program from source files, following imports.
pub fn load_program(entries: &[PathBuf], search: &[PathBuf]) -> Result<Program, LoadError> {
    let files = read_closure(entries, search)?;
    let mut program = Program::new();
    for (path, stmts) in &files {
        Desugarer::new(&mut program, Some(path))
            .file(stmts)
            .map_err(|source| LoadError::Desugar { path: Some(path.clone()), source })?;
        program.files.push(path.clone());
    }
    Ok(program)
}

impl Program {
    /// Adds statements typed at the REPL. Imports are resolved against the
    /// working directory and the search path; files already loaded are
    /// skipped.
    pub fn add_statements(&mut self, stmts: &[Statement], search: &[PathBuf]) -> Result<(), LoadError> {
        let here = std::env::current_dir().unwrap_or_default().join("<input>");
        let mut imports = Vec::new();
        for s in stmts {
            if let StatementKind::Import(name) = &s.kind {
                imports.push(resolve_import(&here, name, search)?);
            }
        }
        if !imports.is_empty() {
            let files = read_closure(&imports, search)?;
            for (path, file) in &files {
                if self.files.contains(path) {
                    continue;
                }
                Desugarer::new(self, Some(path))
                    .file(file)
                    .map_err(|source| LoadError::Desugar { path: Some(path.clone()), source })?;
                self.files.push(path.clone());
            }
        }
        Desugarer::new(self, None).file(stmts).map_err(|source| LoadError::Desugar { path: None, source })
    }
}
