//! The `reqprio` command line.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use reqprio_core::engine::check_dependencies;
use reqprio_core::oss::ingest_tracker_export;
use reqprio_core::{prioritize, validate_project, Error, Mode, Project, StakeholderId};
use serde_json::json;

use crate::report::{dependency_report, ranking_rows, ranking_table};
use crate::store::ProjectStore;
use crate::STORE_ENV;

/// Exit status for a successful run.
pub const EXIT_OK: u8 = 0;
/// Exit status for unreadable or invalid input.
pub const EXIT_FAILURE: u8 = 1;
/// Exit status when `--check-deps` finds the prioritization inconsistent.
pub const EXIT_INCONSISTENT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "reqprio", version, about = "Utility-based requirements prioritization")]
pub struct Cli {
    /// Project store directory. PROJECT arguments that are not files are
    /// looked up here by id.
    #[arg(long, global = true, env = STORE_ENV, value_name = "DIR")]
    pub store: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliMode {
    Single,
    Group,
    Oss,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Self {
        match m {
            CliMode::Single => Mode::Single,
            CliMode::Group => Mode::Group,
            CliMode::Oss => Mode::Oss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct Selection {
    /// Project file, or a project id in the store.
    pub project: String,
    #[arg(long, value_enum, default_value_t = CliMode::Group)]
    pub mode: CliMode,
    /// Stakeholder to prioritize for (required in oss mode).
    #[arg(long)]
    pub stakeholder: Option<String>,
    /// Rescale each stakeholder's dimension weights to sum to 1 before validating.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank a project's requirements by utility.
    Prioritize {
        #[command(flatten)]
        selection: Selection,
        /// Check the prioritization against the project's dependencies.
        #[arg(long)]
        check_deps: bool,
        /// With --check-deps, print a repaired order instead of failing.
        #[arg(long, requires = "check_deps")]
        repair: bool,
    },
    /// Report conflicts between the prioritization and the dependencies.
    Diagnose {
        #[command(flatten)]
        selection: Selection,
        /// Maximum number of diagnoses to list.
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
    /// Convert an issue-tracker export into project requirements.
    Ingest {
        /// Issue export JSON file.
        export: PathBuf,
        /// Merge into this project file instead of starting an empty project.
        #[arg(long)]
        into: Option<PathBuf>,
        /// Write the project here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long)]
        normalize: bool,
    },
    /// Serve the HTTP API over the project store.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::Invalid(violations) => {
            let mut s = format!("project is invalid ({} violations)", violations.len());
            for v in violations {
                s.push_str(&format!("\n  {}: {v}", v.path()));
            }
            s
        }
        other => other.to_string(),
    }
}

fn read_project(arg: &str, store: Option<&Path>, normalize: bool) -> Result<Project, Failure> {
    let path = Path::new(arg);
    let mut project = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{arg}: {e}")))?;
        Project::from_json(&text).map_err(|e| Failure(format!("{arg}: {e}")))?
    } else if let Some(root) = store {
        ProjectStore::open(root)?.load(arg)?
    } else {
        return Err(Failure(format!("{arg}: no such file")));
    };
    if normalize {
        project.normalize_weights();
    }
    Ok(project)
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_FAILURE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<u8, Failure> {
    let store = cli.store.as_deref();
    match cli.command {
        Command::Prioritize { selection: sel, check_deps, repair } => {
            let project = read_project(&sel.project, store, sel.normalize)?;
            let mode = Mode::from(sel.mode);
            let sid = sel.stakeholder.map(StakeholderId::from);
            let ranking = prioritize(&project, mode, sid.as_ref()).map_err(|e| Failure(describe(&e)))?;
            let rows = ranking_rows(&ranking);
            let check = if check_deps {
                Some(check_dependencies(&project, mode, sid.as_ref(), 10).map_err(|e| Failure(describe(&e)))?)
            } else {
                None
            };
            match sel.format {
                Format::Table => {
                    write!(out, "{}", ranking_table(&rows))?;
                    if let Some(c) = &check {
                        write!(out, "\n{}", dependency_report(c))?;
                    }
                }
                Format::Json => {
                    let body = json!({ "mode": mode, "stakeholder": sid, "rows": rows, "dependencies": check });
                    writeln!(out, "{}", serde_json::to_string_pretty(&body)?)?;
                }
            }
            let inconsistent = check.is_some_and(|c| !c.consistent);
            Ok(if inconsistent && !repair { EXIT_INCONSISTENT } else { EXIT_OK })
        }
        Command::Diagnose { selection: sel, limit } => {
            let project = read_project(&sel.project, store, sel.normalize)?;
            let sid = sel.stakeholder.map(StakeholderId::from);
            let check =
                check_dependencies(&project, sel.mode.into(), sid.as_ref(), limit).map_err(|e| Failure(describe(&e)))?;
            match sel.format {
                Format::Table => write!(out, "{}", dependency_report(&check))?,
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&check)?)?,
            }
            Ok(EXIT_OK)
        }
        Command::Ingest { export, into, output, normalize } => {
            let text = std::fs::read_to_string(&export).map_err(|e| Failure(format!("{}: {e}", export.display())))?;
            let fragment = ingest_tracker_export(&text).map_err(|e| Failure(format!("{}: {e}", export.display())))?;
            let mut project = match into {
                Some(p) => read_project(&p.to_string_lossy(), None, false)?,
                None => Project::default(),
            };
            fragment.merge_into(&mut project);
            if normalize {
                project.normalize_weights();
            }
            let violations = validate_project(&project);
            if !violations.is_empty() {
                return Err(Failure(describe(&Error::Invalid(violations))));
            }
            let mut text = project.to_json();
            text.push('\n');
            match output {
                Some(path) => crate::store::write_atomic(&path, text.as_bytes())?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(EXIT_OK)
        }
        Command::Serve { port, host } => {
            let root = store.ok_or_else(|| Failure(format!("serve needs --store or {STORE_ENV}")))?;
            let store = Arc::new(ProjectStore::open(root)?);
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                eprintln!("serving {} on http://{}", store.root().display(), listener.local_addr()?);
                axum::serve(listener, crate::api::router(store)).await
            })?;
            Ok(EXIT_OK)
        }
    }
}
