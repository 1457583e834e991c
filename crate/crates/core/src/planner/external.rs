use std::fs::{self, File};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::pddl::{parse_plan, print_domain, print_problem, DomainModel, ProblemSpec};

use super::{Outcome, PlanResult, PlannerError, SearchStats};

/// Runs an external planner on canonical renderings of `d` and `p`.
///
/// Each element of `command` has `{domain}`, `{problem}` and `{plan}`
/// replaced with file paths; no shell is involved. The plan file must hold
/// one `(action obj ...)` per line; `;` comments are ignored.
pub fn run_external(
    d: &DomainModel,
    p: &ProblemSpec,
    command: &[String],
    time_limit: Duration,
) -> Result<PlanResult, PlannerError> {
    let start = Instant::now();
    let dir = tempfile::tempdir()?;
    let domain = dir.path().join("domain.pddl");
    let problem = dir.path().join("problem.pddl");
    let plan = dir.path().join("plan.txt");
    let out_path = dir.path().join("stdout.txt");
    let err_path = dir.path().join("stderr.txt");
    fs::write(&domain, print_domain(d))?;
    fs::write(&problem, print_problem(p))?;

    let fill = |arg: &str| {
        arg.replace("{domain}", &domain.to_string_lossy())
            .replace("{problem}", &problem.to_string_lossy())
            .replace("{plan}", &plan.to_string_lossy())
    };
    let args: Vec<String> = command.iter().map(|a| fill(a)).collect();
    let (exe, rest) = args
        .split_first()
        .ok_or_else(|| PlannerError::InvalidConfig("external planner command is empty".into()))?;

    let failure = |message: String| {
        let stdout = fs::read_to_string(&out_path).unwrap_or_default();
        let stderr = fs::read_to_string(&err_path).unwrap_or_default();
        PlannerError::ExternalPlannerFailure {
            message,
            stdout,
            stderr,
        }
    };

    let mut child = Command::new(exe)
        .args(rest)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(File::create(&out_path)?)
        .stderr(File::create(&err_path)?)
        .spawn()
        .map_err(|e| failure(format!("could not start '{exe}': {e}")))?;

    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() >= time_limit {
            let _ = child.kill();
            let _ = child.wait();
            let stats = SearchStats {
                wall_ms: start.elapsed().as_millis() as u64,
                ..SearchStats::default()
            };
            return Ok(PlanResult {
                outcome: Outcome::ResourceLimit {
                    reason: format!("external planner exceeded {}s", time_limit.as_secs_f64()),
                },
                stats,
            });
        }
        std::thread::sleep(Duration::from_millis(10));
    };
    if !status.success() {
        return Err(failure(format!("exited with {status}")));
    }
    let text = fs::read_to_string(&plan)
        .map_err(|e| failure(format!("no plan file written: {e}")))?;
    let parsed = parse_plan(&text).map_err(|e| failure(format!("unparseable plan: {e}")))?;
    let stats = SearchStats {
        wall_ms: start.elapsed().as_millis() as u64,
        plan_length: Some(parsed.len()),
        ..SearchStats::default()
    };
    Ok(PlanResult {
        outcome: Outcome::Plan(parsed),
        stats,
    })
}
