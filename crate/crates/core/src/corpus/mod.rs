//! The programs shipped with alethe and the golden tests run over them.
//!
//! `stdlib/` holds the library proper; `corpus/` holds example programs,
//! planner and checker fixtures, and `golden.txt`, a manifest of queries
//! with their exact expected output.
//!
//! The manifest is a sequence of blank-line separated cases:
//!
//! ```text
//! case add-forward
//! files std.ale
//! query | + 4 3 ()
//! out () 4 7 +
//! status 0
//! ```
//!
//! `out` may repeat, one line of output each; `status` defaults to 0 and
//! `limit` to the default step limit. Lines starting with `#` are comments.
//! Files are looked up in `corpus/`, then in `stdlib/`.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::shell::{Session, SessionOptions, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topic {
    Arithmetic,
    Lists,
    Sorting,
    Machines,
    MuRecursion,
    Trees,
    Planning,
    Concurrency,
    Checking,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    /// Path relative to the repository root.
    pub path: &'static str,
    pub topic: Topic,
    /// Atoms the file defines relations for.
    pub provides: &'static [&'static str],
    /// Whether the file passes the checker on its own.
    pub loads: bool,
    /// Whether its rules can be evaluated (concurrent rules cannot).
    pub evaluable: bool,
}

const fn entry(path: &'static str, topic: Topic, provides: &'static [&'static str]) -> CorpusEntry {
    CorpusEntry { path, topic, provides, loads: true, evaluable: true }
}

static CONTENTS: [CorpusEntry; 20] = [
    entry("stdlib/nat.ale", Topic::Arithmetic, &["+", "×", "Fact", "Not", "<", "≤", ">", "≥"]),
    entry("stdlib/square.ale", Topic::Arithmetic, &["□"]),
    entry("stdlib/list.ale", Topic::Lists, &["Length", "Sum", "Map", "Reverse", "Concat", "ConcatMap", "Bennett"]),
    entry("stdlib/insert.ale", Topic::Sorting, &["Insert", "Insert'"]),
    entry("stdlib/sort.ale", Topic::Sorting, &["InsertionSort"]),
    entry("stdlib/tape.ale", Topic::Machines, &["Pop", "Left", "Right"]),
    entry("stdlib/murec.ale", Topic::MuRecursion, &["Mu"]),
    entry("stdlib/std.ale", Topic::Arithmetic, &[]),
    entry("corpus/ex_sort.ale", Topic::Sorting, &["InsertionSort", "IS"]),
    entry("corpus/rtm_increment.ale", Topic::Machines, &["Start", "Read", "Walk", "Turn", "Back", "Ret"]),
    CorpusEntry { evaluable: false, ..entry("corpus/rtm_rule.ale", Topic::Machines, &["S1"]) },
    entry("corpus/polish.ale", Topic::Trees, &["Polish", "PolishRead", "PolishReads", "TreeSize", "TreeSize'"]),
    entry("corpus/polish_nice.ale", Topic::Trees, &["Polish", "PolishRead", "PolishReads"]),
    CorpusEntry { evaluable: false, ..entry("corpus/fraction.ale", Topic::Planning, &["+"]) },
    CorpusEntry { loads: false, evaluable: false, ..entry("corpus/coin.ale", Topic::Checking, &["Coin"]) },
    CorpusEntry { evaluable: false, ..entry("corpus/mysquare.ale", Topic::Checking, &["MySquare"]) },
    CorpusEntry { evaluable: false, ..entry("corpus/courier.ale", Topic::Concurrency, &[]) },
    CorpusEntry { evaluable: false, ..entry("corpus/bias_square.ale", Topic::Concurrency, &[]) },
    CorpusEntry { evaluable: false, ..entry("corpus/mass_add.ale", Topic::Concurrency, &["+"]) },
    CorpusEntry { evaluable: false, ..entry("corpus/lattice.ale", Topic::Concurrency, &[]) },
];

/// Every shipped program, library first.
pub fn corpus_contents() -> &'static [CorpusEntry] {
    &CONTENTS
}

/// The repository root this crate was built from.
pub fn default_root() -> PathBuf {
    let here = Path::new(env!("CARGO_MANIFEST_DIR"));
    here.ancestors().nth(2).unwrap_or(here).to_path_buf()
}

/// Finds a program file by name: in `corpus/`, then `stdlib/`, then as given.
pub fn resolve(root: &Path, name: &str) -> PathBuf {
    for dir in ["corpus", "stdlib"] {
        let p = root.join(dir).join(name);
        if p.is_file() {
            return p;
        }
    }
    root.join(name)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenCase {
    pub name: String,
    pub files: Vec<String>,
    pub query: String,
    pub limit: Option<u64>,
    /// Everything the session prints, load diagnostics included, with
    /// paths relative to the repository root.
    pub expected: String,
    pub status: Status,
    /// Line of the `case` header in the manifest.
    pub line: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ManifestError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> ManifestError {
    ManifestError::Syntax { line, message: message.into() }
}

pub fn parse_manifest(text: &str) -> Result<Vec<GoldenCase>, ManifestError> {
    let mut cases = Vec::new();
    let mut current: Option<GoldenCase> = None;
    let finish = |c: Option<GoldenCase>, cases: &mut Vec<GoldenCase>| -> Result<(), ManifestError> {
        if let Some(c) = c {
            if c.query.is_empty() {
                return Err(syntax(c.line, format!("case `{}` has no query", c.name)));
            }
            cases.push(c);
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.starts_with('#') {
            continue;
        }
        if raw.trim().is_empty() {
            finish(current.take(), &mut cases)?;
            continue;
        }
        let (key, value) = raw.split_once(' ').unwrap_or((raw, ""));
        if key == "case" {
            finish(current.take(), &mut cases)?;
            current = Some(GoldenCase {
                name: value.trim().to_string(),
                files: Vec::new(),
                query: String::new(),
                limit: None,
                expected: String::new(),
                status: Status::Ok,
                line,
            });
            continue;
        }
        let Some(case) = current.as_mut() else {
            return Err(syntax(line, "expected `case NAME`"));
        };
        match key {
            "files" => case.files.extend(value.split_whitespace().map(str::to_string)),
            "query" => case.query = value.to_string(),
            "out" => {
                case.expected.push_str(value);
                case.expected.push('\n');
            }
            "limit" => case.limit = Some(value.trim().parse().map_err(|_| syntax(line, "bad limit"))?),
            "status" => {
                case.status = match value.trim() {
                    "0" => Status::Ok,
                    "1" => Status::Diagnostic,
                    "2" => Status::Stalled,
                    other => return Err(syntax(line, format!("unknown status `{other}`"))),
                }
            }
            other => return Err(syntax(line, format!("unknown key `{other}`"))),
        }
    }
    finish(current, &mut cases)?;
    Ok(cases)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenRun {
    pub output: String,
    pub status: Status,
}

impl GoldenRun {
    pub fn matches(&self, case: &GoldenCase) -> bool {
        self.output == case.expected && self.status == case.status
    }
}

/// Loads the case's files into a fresh session and runs its query.
pub fn run_case(case: &GoldenCase, root: &Path) -> GoldenRun {
    let mut session = Session::new(SessionOptions {
        search: vec![root.join("stdlib")],
        limit: case.limit.unwrap_or(crate::engine::DEFAULT_STEP_LIMIT),
        color: false,
    });
    let files: Vec<PathBuf> = case.files.iter().map(|f| resolve(root, f)).collect();
    let mut output = String::new();
    let mut status = Status::Ok;
    if !files.is_empty() {
        let reply = session.load(&files);
        output.push_str(&reply.text);
        status = reply.status;
    }
    if session.files == files {
        let reply = session.execute(&case.query);
        output.push_str(&reply.text);
        status = status.max(reply.status);
    }
    GoldenRun { output: relativize(&output, root), status }
}

fn relativize(text: &str, root: &Path) -> String {
    let root = root.canonicalize().unwrap_or_else(|_| root.to_path_buf());
    text.replace(&format!("{}/", root.display()), "")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_syntax() {
        let text = "# comment\ncase a\nfiles x.ale y.ale\nquery | A\nout A\nout B\nstatus 2\n\ncase b\nquery | B\nlimit 5\n";
        let cases = parse_manifest(text).unwrap();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[0].files, ["x.ale", "y.ale"]);
        assert_eq!(cases[0].expected, "A\nB\n");
        assert_eq!(cases[0].status, Status::Stalled);
        assert_eq!(cases[1].limit, Some(5));
        assert_eq!(cases[1].line, 9);
        assert!(parse_manifest("query | A\n").is_err());
        assert!(parse_manifest("case a\nfiles x\n").is_err());
        assert!(parse_manifest("case a\nquery | A\nstatus 7\n").is_err());
    }

    #[test]
    fn catalog_files_exist() {
        let root = default_root();
        for e in corpus_contents() {
            assert!(root.join(e.path).is_file(), "{}", e.path);
        }
    }
}
