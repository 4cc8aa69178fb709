//! Runs the `alethe` binary as a user would.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use alethe::corpus::{default_root, parse_manifest, resolve};

fn alethe(args: &[&str], stdin: Option<&str>) -> Output {
    let root = default_root();
    let mut child = Command::new(env!("CARGO_BIN_EXE_alethe"))
        .current_dir(&root)
        .arg("--path")
        .arg(root.join("stdlib"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("alethe starts");
    let mut input = child.stdin.take().unwrap();
    input.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(input);
    child.wait_with_output().unwrap()
}

fn text(bytes: &[u8], root: &Path) -> String {
    String::from_utf8_lossy(bytes).replace(&format!("{}/", root.display()), "")
}

#[test]
fn query_succeeds() {
    let out = alethe(&["stdlib/std.ale", "-e", "| (+ 3) 4 _"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "() 7 (+ 3)\n");
}

#[test]
fn ambiguous_program_is_a_diagnostic() {
    let out = alethe(&["corpus/coin.ale", "-e", "| Coin ()"], None);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr, &default_root());
    assert!(err.contains("ambiguity"), "{err}");
    assert!(err.contains("corpus/coin.ale:4:1"), "{err}");
}

#[test]
fn stall_exits_with_two() {
    let out = alethe(&["stdlib/std.ale", "-e", "| () 5 2 +"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("stall: stuck at `() 3 Z +`"));
}

#[test]
fn stats_go_to_stderr() {
    let out = alethe(&["stdlib/std.ale", "--stats", "-e", "| + 4 3 ()"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "() 4 7 +\n");
    assert!(String::from_utf8_lossy(&out.stderr).contains("steps"));
}

#[test]
fn limit_stops_a_long_run() {
    let out = alethe(&["stdlib/std.ale", "--limit", "10", "-e", "| (Fact 5) ()"], None);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn scripted_repl_keeps_bindings() {
    let out = alethe(&["stdlib/std.ale"], Some("> 4 `+ 3` y\n:v\n"));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "y = 7\ny = 7\n");
}

#[test]
fn scripted_repl_reports_the_worst_status() {
    let out = alethe(&["stdlib/std.ale"], Some("| + 1 1 ()\n| () 5 2 +\n| + 2 2 ()\n"));
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("() 1 2 +") && stdout.contains("() 2 4 +"), "{stdout}");
}

#[test]
fn golden_cases_through_the_binary() {
    let root = default_root();
    let cases = parse_manifest(&std::fs::read_to_string(root.join("corpus/golden.txt")).unwrap()).unwrap();
    let mut failures = Vec::new();
    for case in &cases {
        let files: Vec<String> = case.files.iter().map(|f| resolve(&root, f).display().to_string()).collect();
        let limit = case.limit.map(|l| l.to_string());
        let mut args: Vec<&str> = files.iter().map(String::as_str).collect();
        if let Some(l) = &limit {
            args.extend(["--limit", l]);
        }
        args.extend(["-e", &case.query]);
        let out = alethe(&args, None);
        let got = text(&out.stdout, &root) + &text(&out.stderr, &root);
        if got != case.expected || out.status.code() != Some(case.status.exit_code()) {
            failures.push(format!("{} (line {}): exit {:?}\n{got}", case.name, case.line, out.status.code()));
        }
    }
    assert!(failures.is_empty(), "{} of {} cases differ:\n{}", failures.len(), cases.len(), failures.join("\n"));
}
