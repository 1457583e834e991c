//! Command-line entry points. Every command goes through [`Service`];
//! this module only parses arguments and prints.
//!
//! Exit codes: 0 success, 1 domain error or negative result (invalid plan,
//! audit findings, unsolved task), 2 usage error.

use std::fs;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pddlforge::audit::audit_domain;
use pddlforge::builder::ActionDescription;
use pddlforge::correction::FeedbackSource;
use pddlforge::llm::TransportMode;
use pddlforge::orchestrator::LoopStatus;
use pddlforge::workspace::{Project, ProjectConfig};
use serde::Serialize;

use crate::render;
use crate::service::{audit_file, ApiError, FeedbackRequest, PlanRequest, Service, ValidateRequest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    /// Pretty-printed JSON, the same records the HTTP API returns.
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "pddlforge", version, about = "Draft, audit, correct and plan with PDDL domain models written through a language model")]
pub struct Cli {
    /// Project directory.
    #[arg(short = 'C', long, global = true, default_value = ".", value_name = "DIR")]
    pub project: PathBuf,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

/// Objects and initial state for a plan: a suite task or a problem file.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ProblemSource {
    /// Task id from problems/suite.jsonl.
    #[arg(long)]
    pub task: Option<String>,
    /// PDDL problem file.
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a project directory with default templates.
    Init {
        dir: PathBuf,
        #[arg(long)]
        name: Option<String>,
        /// Domain description shown to the model.
        #[arg(long, default_value = "")]
        description: String,
        /// Type declaration, `name` or `name - parent`; repeatable.
        #[arg(long = "type", value_name = "DECL")]
        types: Vec<String>,
        /// Action to construct, `name: description`; repeatable.
        #[arg(long = "action", value_name = "NAME: TEXT")]
        actions: Vec<String>,
        /// Cassette for the replay transport, relative to the project.
        #[arg(long, default_value = "cassettes/replay.jsonl")]
        cassette: PathBuf,
    },
    /// Build the domain model from the action descriptions.
    Construct {
        /// Discard existing construction and correction artifacts.
        #[arg(long)]
        force: bool,
    },
    /// Check the domain model for syntax and consistency errors.
    Audit {
        /// Audit this domain file instead of the project's model.
        #[arg(long, value_name = "FILE")]
        domain: Option<PathBuf>,
    },
    /// Review one action and send corrective feedback.
    Correct {
        #[arg(long)]
        action: String,
        /// Feedback message; repeatable. Without messages, feedback is read
        /// from standard input, one line per message, until an empty line.
        #[arg(long)]
        message: Vec<String>,
        /// Send the first audit finding as feedback.
        #[arg(long)]
        auditor: bool,
        /// Issue key to attach, marking follow-ups on the same problem.
        #[arg(long)]
        issue: Option<String>,
    },
    /// Simulate a plan file and report the first failure.
    Validate {
        plan_file: PathBuf,
        #[command(flatten)]
        source: ProblemSource,
    },
    /// Find the first step of a plan the model considers inexecutable.
    Localize {
        plan_file: PathBuf,
        #[command(flatten)]
        source: ProblemSource,
    },
    /// Translate an instruction into a goal and solve it with search.
    #[command(group = clap::ArgGroup::new("context").required(true).args(["task", "problem", "suite"]))]
    Plan {
        /// Goal in plain language; defaults to the task's instruction, or
        /// the problem file's own goal.
        instruction: Option<String>,
        /// Task id from problems/suite.jsonl.
        #[arg(long)]
        task: Option<String>,
        /// PDDL problem file.
        #[arg(long, value_name = "FILE")]
        problem: Option<PathBuf>,
        /// Run every suite task.
        #[arg(long, conflicts_with_all = ["instruction", "goal"])]
        suite: bool,
        /// PDDL goal to use instead of translating the instruction.
        #[arg(long)]
        goal: Option<String>,
    },
    /// Ask the planner model for a plan and feed validation errors back.
    LlmPlan {
        /// Goal in plain language; defaults to the task's instruction.
        instruction: Option<String>,
        #[command(flatten)]
        source: ProblemSource,
        /// PDDL goal used for validation instead of translating the instruction.
        #[arg(long)]
        goal: Option<String>,
    },
    /// Feedback ledger and planning results.
    Report,
    /// Serve the HTTP API and, optionally, the console's static files.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of static files served outside /v1.
        #[arg(long = "static", value_name = "DIR")]
        static_dir: Option<PathBuf>,
    },
}

/// Writes to stdout; a closed pipe (as with `| head`) is not an error.
fn out(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
}

fn structured<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("payload serializes") + "\n"
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce(&T) -> String) {
    match format {
        Format::Text => out(&text(value)),
        Format::Structured => out(&structured(value)),
    }
}

fn report_error(format: Format, e: &ApiError) {
    match format {
        Format::Text => eprintln!("error[{}]: {}", e.code, e.message),
        Format::Structured => out(&structured(e)),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn validate_request(plan_file: &Path, source: &ProblemSource) -> Result<ValidateRequest> {
    Ok(ValidateRequest {
        plan: read_text(plan_file)?,
        task: source.task.clone(),
        problem: source.problem.as_deref().map(read_text).transpose()?,
    })
}

fn code(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8> {
    let format = cli.format;
    match execute(cli) {
        Ok(code) => Ok(code),
        Err(e) => match e.downcast::<ApiError>() {
            Ok(api) => {
                report_error(format, &api);
                Ok(1)
            }
            Err(other) => Err(other),
        },
    }
}

fn execute(cli: Cli) -> Result<u8> {
    let format = cli.format;
    let svc = Service::new(&cli.project);
    match cli.command {
        Command::Init {
            dir,
            name,
            description,
            types,
            actions,
            cassette,
        } => {
            let name = name
                .or_else(|| dir.file_name().map(|n| n.to_string_lossy().into_owned()))
                .unwrap_or_else(|| "domain".into());
            let mut config = ProjectConfig::new(name, description, TransportMode::Replay { cassette });
            config.types = types;
            for a in actions {
                let (n, text) = a
                    .split_once(':')
                    .with_context(|| format!("action '{a}' is not of the form `name: description`"))?;
                config.actions.push(ActionDescription::new(n.trim(), text.trim()));
            }
            fs::create_dir_all(&dir)?;
            let p = Project::init(&dir, config).map_err(ApiError::from)?;
            emit(format, &p.config.name, |n| format!("initialized project {n} in {}\n", dir.display()));
            Ok(0)
        }
        Command::Construct { force } => {
            let r = svc.construct(force)?;
            emit(format, &r, render::construct);
            Ok(0)
        }
        Command::Audit { domain } => {
            let r = match domain {
                Some(path) => audit_domain(&audit_file(&path)?, Default::default()),
                None => svc.audit()?,
            };
            emit(format, &r, render::audit);
            Ok(code(r.clean))
        }
        Command::Correct {
            action,
            message,
            auditor,
            issue,
        } => correct(&svc, format, &action, message, auditor, issue),
        Command::Validate { plan_file, source } => {
            let r = svc.validate(&validate_request(&plan_file, &source)?)?;
            emit(format, &r, render::validation);
            Ok(code(r.is_valid()))
        }
        Command::Localize { plan_file, source } => {
            let r = svc.localize(&validate_request(&plan_file, &source)?)?;
            emit(format, &r, render::localization);
            Ok(0)
        }
        Command::Plan {
            instruction,
            task,
            problem,
            suite,
            goal,
        } => {
            if suite {
                let r = svc.plan_suite()?;
                emit(format, &r, render::suite);
                return Ok(code(r.solved == r.total));
            }
            let req = PlanRequest {
                instruction,
                task,
                problem: problem.as_deref().map(read_text).transpose()?,
                goal,
            };
            let r = svc.plan(&req)?;
            emit(format, &r, render::plan);
            Ok(code(r.result.plan().is_some()))
        }
        Command::LlmPlan {
            instruction,
            source,
            goal,
        } => {
            let req = PlanRequest {
                instruction,
                task: source.task,
                problem: source.problem.as_deref().map(read_text).transpose()?,
                goal,
            };
            let r = svc.llm_plan(&req)?;
            emit(format, &r, render::llm_loop);
            Ok(code(r.status == LoopStatus::Success))
        }
        Command::Report => {
            let r = svc.report()?;
            emit(format, &r, render::report);
            Ok(0)
        }
        Command::Serve { host, port, static_dir } => serve(svc, &host, port, static_dir),
    }
}

fn correct(
    svc: &Service,
    format: Format,
    action: &str,
    messages: Vec<String>,
    auditor: bool,
    issue: Option<String>,
) -> Result<u8> {
    let detail = svc.action(action)?;
    if format == Format::Text {
        out(&render::action(&detail));
    }
    let mut requests: Vec<FeedbackRequest> = Vec::new();
    if auditor {
        requests.push(FeedbackRequest {
            source: Some(FeedbackSource::Auditor),
            issue: issue.clone(),
            ..Default::default()
        });
    }
    for m in messages {
        requests.push(FeedbackRequest {
            text: Some(m),
            issue: issue.clone(),
            ..Default::default()
        });
    }
    let mut responses = Vec::new();
    if !requests.is_empty() {
        for req in requests {
            let r = svc.feedback(action, req)?;
            if format == Format::Text {
                out(&render::feedback(&r));
            }
            responses.push(r);
        }
    } else {
        let stdin = std::io::stdin();
        let mut lines = stdin.lock().lines();
        loop {
            eprint!("feedback ('.audit' sends the first finding, empty line ends)> ");
            std::io::stderr().flush()?;
            let Some(line) = lines.next().transpose()? else { break };
            let line = line.trim();
            if line.is_empty() {
                break;
            }
            let req = if line == ".audit" {
                FeedbackRequest {
                    source: Some(FeedbackSource::Auditor),
                    ..Default::default()
                }
            } else {
                FeedbackRequest {
                    text: Some(line.to_string()),
                    issue: issue.clone(),
                    ..Default::default()
                }
            };
            let r = svc.feedback(action, req)?;
            if format == Format::Text {
                out(&render::feedback(&r));
            }
            responses.push(r);
        }
    }
    if format == Format::Structured {
        emit(format, &responses, |_| String::new());
    }
    Ok(0)
}

fn serve(svc: Service, host: &str, port: u16, static_dir: Option<PathBuf>) -> Result<u8> {
    let summary = svc.summary()?;
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .with_context(|| format!("invalid address {host}:{port}"))?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        let bound = listener.local_addr()?;
        println!(
            "serving project {} on http://{bound}/v1 (transport: {})",
            summary.name, summary.transport
        );
        if summary.transport == "live" {
            println!("the project transport is live: feedback, plan and construct requests call the model endpoint");
        }
        log::info!("static files: {:?}", static_dir);
        let app = crate::api::router(Arc::new(svc), static_dir.as_deref());
        axum::serve(listener, app).await?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(0)
}
