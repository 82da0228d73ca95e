use std::io::{Read, Write};
use std::os::unix::net::UnixListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use proofdoc::batch::batch_check;
use proofdoc::config::Config;
use proofdoc::document::{DocumentConfig, DocumentState, Edit, NodeName};
use proofdoc::execution::{Engine, Status};
use proofdoc::pretty::format_string;
use proofdoc::presentation::{present, Antiquotations, Format, SymbolTable};
use proofdoc::protocol::{serve_connection, wire::parse_doc};
use proofdoc::sessions::{DatabaseStore, ExportStore};
use proofdoc::syntax::{format_token_listing, tokenize, KeywordTable};

#[derive(Parser)]
#[command(name = "proofdoc", version, about = "Incremental checking server and batch tools for proof documents")]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve one protocol connection.
    Serve(ServeArgs),
    /// Check files to completion and print diagnostics.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Give up if checking has not settled after this many seconds.
        #[arg(long, default_value_t = 600)]
        timeout: u64,
    },
    /// Print the token listing of a file.
    Tokens { file: PathBuf },
    /// Format a serialized layout tree read from FILE or stdin.
    Format {
        #[arg(long, default_value_t = 80)]
        margin: usize,
        file: Option<PathBuf>,
    },
    /// Render a theory as LaTeX or HTML.
    Present {
        file: PathBuf,
        #[arg(long, default_value = "latex")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List or extract session exports.
    Export(ExportArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Transport {
    /// Listen on a unix socket.
    #[arg(long, value_name = "PATH")]
    socket: Option<PathBuf>,
    /// Speak the protocol on stdin/stdout.
    #[arg(long)]
    stdio: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    transport: Transport,
}

#[derive(Args)]
struct ExportArgs {
    /// Export database; defaults to the configured one.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Session name; defaults to the configured one.
    #[arg(long)]
    session: Option<String>,
    /// List `theory/name` of every entry.
    #[arg(long, conflicts_with = "pattern")]
    list: bool,
    /// `theory/name` pattern; `*` stays within a segment, `**` crosses them.
    pattern: Option<String>,
    /// Directory to write matching entries into.
    #[arg(short, long, requires = "pattern")]
    output: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).map_err(|e| anyhow!("{}:{e}", p.display())),
        None => Ok(Config::default()),
    }
}

fn read_source(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Keywords in effect for a standalone file, including those its header
/// declares.
fn keywords_for(path: &Path, text: &str) -> KeywordTable {
    let name = path
        .file_name()
        .and_then(|n| NodeName::from_path(&n.to_string_lossy()).ok())
        .unwrap_or_else(|| NodeName::theory("Scratch.thy").expect("valid name"));
    let mut doc = DocumentState::new(DocumentConfig::default());
    match doc.apply_edits(&[(name.clone(), Edit::SetNode(text.to_owned()))]) {
        Ok(v) => v.node(&name).map(|n| n.keywords().clone()).unwrap_or_else(KeywordTable::bootstrap),
        Err(_) => KeywordTable::bootstrap(),
    }
}

fn serve(config: Config, args: ServeArgs) -> Result<ExitCode> {
    let deadline = config.engine.hard_deadline;
    let engine = Arc::new(Engine::new(config.engine));
    let socket = args.transport.socket.clone();
    {
        let engine = engine.clone();
        let socket = socket.clone();
        ctrlc::set_handler(move || {
            log::info!("interrupted; cancelling all checks");
            engine.shutdown();
            let until = Instant::now() + deadline;
            while Instant::now() < until && engine.live_units().iter().any(|(_, s, _)| *s == Status::Running) {
                std::thread::sleep(Duration::from_millis(10));
            }
            if let Some(p) = &socket {
                let _ = std::fs::remove_file(p);
            }
            std::process::exit(130);
        })
        .context("cannot install interrupt handler")?;
    }
    match socket {
        Some(path) => {
            let listener = UnixListener::bind(&path).with_context(|| format!("cannot bind {}", path.display()))?;
            log::info!("listening on {}", path.display());
            let (stream, _) = listener.accept().context("accept failed")?;
            let reader = stream.try_clone().context("cannot clone socket")?;
            let result = serve_connection(&engine, reader, stream);
            let _ = std::fs::remove_file(&path);
            result?;
        }
        None => serve_connection(&engine, std::io::stdin().lock(), std::io::stdout())?,
    }
    engine.shutdown();
    Ok(ExitCode::SUCCESS)
}

fn check(config: Config, files: Vec<PathBuf>, timeout: u64) -> Result<ExitCode> {
    let report = batch_check(&files, &config, Duration::from_secs(timeout))?;
    let mut out = std::io::stdout().lock();
    for line in report.lines() {
        writeln!(out, "{line}")?;
    }
    Ok(if report.exit_code() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn export(config: Config, args: ExportArgs) -> Result<ExitCode> {
    let db = args
        .db
        .or(config.export.database)
        .ok_or_else(|| anyhow!("no export database given (use --db or configure export.database)"))?;
    if !db.exists() {
        bail!("export database {} does not exist", db.display());
    }
    let session = args.session.unwrap_or(config.export.session);
    let store = DatabaseStore::open(&db)?;
    let mut out = std::io::stdout().lock();
    if args.list {
        for name in store.list(&session)? {
            writeln!(out, "{name}")?;
        }
        return Ok(ExitCode::SUCCESS);
    }
    let Some(pattern) = args.pattern else { bail!("give --list or a pattern") };
    let entries = store.retrieve_qualified(&session, &pattern)?;
    if entries.is_empty() {
        bail!("no export of session `{session}` matches `{pattern}`");
    }
    match args.output {
        Some(dir) => {
            for e in &entries {
                let path = dir.join(&e.theory).join(&e.name);
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                std::fs::write(&path, &e.payload).with_context(|| format!("cannot write {}", path.display()))?;
                writeln!(out, "{}", path.display())?;
            }
        }
        None => {
            for e in &entries {
                out.write_all(&e.payload)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Serve(args) => serve(config, args),
        Command::Check { files, timeout } => check(config, files, timeout),
        Command::Tokens { file } => {
            let text = read_source(&file)?;
            let tokens = tokenize(&text, &keywords_for(&file, &text));
            print!("{}", format_token_listing(&tokens));
            Ok(ExitCode::SUCCESS)
        }
        Command::Format { margin, file } => {
            let src = match file {
                Some(f) => read_source(&f)?,
                None => {
                    let mut s = String::new();
                    std::io::stdin().read_to_string(&mut s)?;
                    s
                }
            };
            let doc = parse_doc(&src)?;
            println!("{}", format_string(&doc, margin));
            Ok(ExitCode::SUCCESS)
        }
        Command::Present { file, format, output } => {
            let text = read_source(&file)?;
            let out = present(
                &text,
                &keywords_for(&file, &text),
                &SymbolTable::bundled(),
                &Antiquotations::standard(),
                format,
            )
            .map_err(|e| anyhow!("{}: {e}", file.display()))?;
            match output {
                Some(p) => std::fs::write(&p, out).with_context(|| format!("cannot write {}", p.display()))?,
                None => print!("{out}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Export(args) => export(config, args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("proofdoc: {e:#}");
            ExitCode::from(2)
        }
    }
}
