use std::io::{self, IsTerminal};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;

use alethe::shell::{run_batch, run_repl, Session, SessionOptions, Status};
use clap::Parser;

/// Interpreter for alethe, a reversible declarative language.
///
/// Without `-e`, a REPL starts after loading FILES. When standard input is
/// not a terminal it is read as a script, and the exit status reflects the
/// worst outcome: 0 success, 1 diagnostics, 2 stall.
#[derive(Parser, Debug)]
#[command(name = "alethe", version)]
struct Args {
    /// Program files to load.
    files: Vec<PathBuf>,
    /// Extra directory to search for imports (repeatable).
    #[arg(long = "path", value_name = "DIR")]
    path: Vec<PathBuf>,
    /// Maximum number of rule applications per evaluation.
    #[arg(long, value_name = "N", default_value_t = alethe::engine::DEFAULT_STEP_LIMIT)]
    limit: u64,
    /// Evaluate one query (`| τ*`, `> … `f` …` or `< … `f` …`) and exit.
    #[arg(short = 'e', value_name = "QUERY")]
    query: Option<String>,
    /// Colour diagnostics.
    #[arg(long)]
    color: bool,
    /// With `-e`, report step counts on standard error.
    #[arg(long)]
    stats: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut session = Session::new(SessionOptions { search: args.path, limit: args.limit, color: args.color });
    let cancel = session.cancel_flag();
    if let Err(e) = ctrlc::set_handler(move || cancel.store(true, Ordering::SeqCst)) {
        eprintln!("warning: cannot install interrupt handler: {e}");
    }

    if args.query.is_some() {
        return match run_batch(&mut session, &args.files, args.query.as_deref(), io::stdout(), io::stderr()) {
            Ok(code) => {
                if let (true, Some((steps, work))) = (args.stats, session.last_stats) {
                    eprintln!("{steps} steps, {work} rule applications");
                }
                ExitCode::from(code as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }

    let mut status = Status::Ok;
    if !args.files.is_empty() {
        let reply = session.load(&args.files);
        eprint!("{}", reply.text);
        status = reply.status;
    }
    let interactive = io::stdin().is_terminal();
    match run_repl(&mut session, io::stdin().lock(), io::stdout(), interactive) {
        Ok(worst) if !interactive => ExitCode::from(status.max(worst).exit_code() as u8),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
