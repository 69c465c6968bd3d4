use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{Local, NaiveDateTime};
use clap::{Parser, Subcommand};
use walkdir::WalkDir;

use overrun_lint::boundcheck::run_bound_check;
use overrun_lint::cfg::build_cfgs;
use overrun_lint::detectors::{analyze_unit, find_duplicates, load_ruleset, RuleSet};
use overrun_lint::frontend::{parse_source, CompilationUnit};
use overrun_lint::reporting::{
    annotate_source, emit_report, is_reviewed, parse_review_time, render, ComplexitySummary, Format, MetricsInput,
    Report, ReviewAnnotation,
};
use overrun_lint::runtime::{coverage_summary, execute, AssertionOutcome, CoverageReport, RunOptions, RunTrace};

const EXIT_CLEAN: u8 = 0;
const EXIT_FINDINGS: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "overrun-lint",
    version,
    about = "Bug finding, bound checking and coverage for .sl programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the rule catalog over files or directories.
    Analyze {
        paths: Vec<PathBuf>,
        /// Rule configuration file; all rules are enabled without one.
        #[arg(long)]
        ruleset: Option<PathBuf>,
        #[arg(long, default_value = "txt")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep findings of this priority or more severe (1 is most severe).
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(1..=5))]
        min_priority: u8,
        /// Drop findings covered by a review annotation.
        #[arg(long)]
        honor_reviews: bool,
        /// Also run the array bound checker.
        #[arg(long)]
        bounds: bool,
        /// Report timestamp, `YYYY-MM-DDTHH:MM:SS`; defaults to now.
        #[arg(long)]
        timestamp: Option<String>,
    },
    /// Check array accesses against their loop limits.
    Boundcheck { paths: Vec<PathBuf> },
    /// Execute a program.
    Run {
        file: PathBuf,
        /// `Class.method`; defaults to the first static main.
        #[arg(long)]
        entry: Option<String>,
        /// Enable assertions.
        #[arg(long)]
        ea: bool,
        #[arg(long)]
        coverage: bool,
        /// File whose lines feed `readLine()`.
        #[arg(long)]
        stdin: Option<PathBuf>,
        /// Map a program path to a host file for `open`, as `NAME=HOSTPATH`.
        #[arg(long = "fs", value_name = "NAME=HOSTPATH")]
        fs: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_steps: Option<u64>,
        /// Write a coverage report; the extension picks the format.
        #[arg(long)]
        coverage_out: Option<PathBuf>,
    },
    /// Cyclomatic complexity and complexity coverage per element.
    Metrics {
        paths: Vec<PathBuf>,
        /// Do not run `main` to measure coverage.
        #[arg(long)]
        no_run: bool,
    },
    /// Find duplicated token sequences.
    Cpd {
        paths: Vec<PathBuf>,
        #[arg(long, default_value_t = 100)]
        min_tokens: usize,
    },
    /// Print a file with a review annotation above a line.
    Annotate {
        file: PathBuf,
        #[arg(long)]
        line: u32,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        reviewer: String,
        /// `M/D/YY H.MMAM`; defaults to now.
        #[arg(long)]
        time: Option<String>,
        /// Rewrite the file instead of printing it.
        #[arg(long)]
        in_place: bool,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

fn collect_sources(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    if paths.is_empty() {
        return Err(Failure("no input paths".into()));
    }
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            for entry in WalkDir::new(p).sort_by_file_name() {
                let entry = entry?;
                if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "sl") {
                    files.push(entry.into_path());
                }
            }
        } else if p.exists() {
            files.push(p.clone());
        } else {
            return Err(Failure(format!("{}: no such file or directory", p.display())));
        }
    }
    Ok(files)
}

fn load_unit(path: &Path) -> Result<CompilationUnit, Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let unit = parse_source(&src, path.to_string_lossy())?;
    Ok(unit)
}

/// Parses every file, reporting all parse errors before failing.
fn load_units(paths: &[PathBuf]) -> Result<Vec<CompilationUnit>, Failure> {
    let mut units = Vec::new();
    let mut errors = Vec::new();
    for f in collect_sources(paths)? {
        match load_unit(&f) {
            Ok(u) => units.push(u),
            Err(Failure(e)) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(units)
    } else {
        Err(Failure(errors.join("\n")))
    }
}

fn exit(found: bool) -> u8 {
    if found {
        EXIT_FINDINGS
    } else {
        EXIT_CLEAN
    }
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    paths: &[PathBuf],
    ruleset: Option<&Path>,
    format: Format,
    out: Option<&Path>,
    min_priority: u8,
    honor_reviews: bool,
    bounds: bool,
    timestamp: Option<&str>,
) -> Result<u8, Failure> {
    let rules = match ruleset {
        Some(p) => load_ruleset(&std::fs::read_to_string(p).map_err(|e| Failure(format!("{}: {e}", p.display())))?)?,
        None => RuleSet::default(),
    };
    let generated_at = match timestamp {
        Some(t) => NaiveDateTime::parse_from_str(t, "%Y-%m-%dT%H:%M:%S")
            .map_err(|e| Failure(format!("bad timestamp `{t}`: {e}")))?,
        None => Local::now().naive_local(),
    };
    let units = load_units(paths)?;
    let mut findings = Vec::new();
    let mut bound = Vec::new();
    for u in &units {
        findings.extend(
            analyze_unit(u, &rules)
                .into_iter()
                .filter(|f| f.priority <= min_priority)
                .filter(|f| !honor_reviews || !is_reviewed(&u.source, f.span.line, &f.rule_id)),
        );
        if bounds {
            bound.extend(run_bound_check(u));
        }
    }
    let found = !findings.is_empty() || !bound.is_empty();
    let report = Report::new(findings, generated_at).with_bound_findings(bound);
    match out {
        Some(path) => {
            emit_report(&report, format, path)?;
        }
        None => print!("{}", render(&report, format)),
    }
    Ok(exit(found))
}

fn boundcheck(paths: &[PathBuf]) -> Result<u8, Failure> {
    let mut found = false;
    for u in load_units(paths)? {
        for b in run_bound_check(&u) {
            found = true;
            println!("{}: {} on `{}`: {}", b.span, b.kind, b.array_name, b.detail);
        }
    }
    Ok(exit(found))
}

fn print_trace(trace: &RunTrace) {
    for line in &trace.stdout {
        println!("{line}");
    }
    for a in &trace.assertions {
        if a.outcome == AssertionOutcome::Failed {
            eprintln!("{}: assertion failed in {}: {}", a.span, a.unit_name, a.message);
        }
    }
    for f in &trace.faults {
        eprintln!("{}: {}: {}", f.span, f.kind.as_str(), f.detail);
    }
}

fn format_for(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) => e.parse().unwrap_or(Format::Txt),
        None => Format::Txt,
    }
}

fn coverage_document(unit: &CompilationUnit, cov: &CoverageReport, out: &Path) -> Result<(), Failure> {
    let cfgs = build_cfgs(unit);
    let metrics = ComplexitySummary::build(
        unit.file.as_str(),
        &[MetricsInput {
            unit,
            cfgs: &cfgs,
            coverage: Some(cov),
        }],
    );
    let mut report = Report::new(Vec::new(), Local::now().naive_local()).with_metrics(metrics);
    report.add_coverage(unit.file.as_str(), cov);
    emit_report(&report, format_for(out), out)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    file: &Path,
    entry: Option<String>,
    ea: bool,
    coverage: bool,
    stdin: Option<&Path>,
    fs: &[String],
    seed: u64,
    max_steps: Option<u64>,
    coverage_out: Option<&Path>,
) -> Result<u8, Failure> {
    let unit = load_unit(file)?;
    let stdin_script = match stdin {
        Some(p) => std::fs::read_to_string(p)?.lines().map(str::to_string).collect(),
        None => Vec::new(),
    };
    let mut file_system_stub = BTreeMap::new();
    for mapping in fs {
        let (name, host) = mapping
            .split_once('=')
            .ok_or_else(|| Failure(format!("--fs expects NAME=HOSTPATH, got `{mapping}`")))?;
        file_system_stub.insert(name.to_string(), std::fs::read_to_string(host)?);
    }
    let mut options = RunOptions {
        entry,
        assertions_enabled: ea,
        coverage_enabled: coverage || coverage_out.is_some(),
        stdin_script,
        file_system_stub,
        seed,
        ..RunOptions::default()
    };
    if let Some(n) = max_steps {
        options.max_steps = n;
    }
    let trace = execute(&unit, &options)?;
    print_trace(&trace);
    if options.coverage_enabled {
        let cov = coverage_summary(&trace, &unit, &build_cfgs(&unit))?;
        if coverage {
            for c in &cov.counters {
                eprintln!(
                    "coverage {}: {} covered, {} missed",
                    c.kind.as_str(),
                    c.covered,
                    c.missed
                );
            }
        }
        if let Some(out) = coverage_out {
            coverage_document(&unit, &cov, out)?;
        }
    }
    let failed = !trace.faults.is_empty() || trace.assertions.iter().any(|a| a.outcome == AssertionOutcome::Failed);
    Ok(exit(failed))
}

fn metrics(paths: &[PathBuf], no_run: bool) -> Result<u8, Failure> {
    let units = load_units(paths)?;
    let cfgs: Vec<_> = units.iter().map(build_cfgs).collect();
    let coverage: Vec<Option<CoverageReport>> = units
        .iter()
        .zip(&cfgs)
        .map(|(u, g)| {
            if no_run {
                return None;
            }
            let opts = RunOptions {
                coverage_enabled: true,
                ..RunOptions::default()
            };
            let trace = execute(u, &opts).ok()?;
            coverage_summary(&trace, u, g).ok()
        })
        .collect();
    let inputs: Vec<MetricsInput> = units
        .iter()
        .zip(&cfgs)
        .zip(&coverage)
        .map(|((unit, cfgs), cov)| MetricsInput {
            unit,
            cfgs,
            coverage: cov.as_ref(),
        })
        .collect();
    let project = match paths {
        [one] => one.to_string_lossy().into_owned(),
        _ => "project".to_string(),
    };
    print!("{}", ComplexitySummary::build(&project, &inputs).to_table());
    Ok(EXIT_CLEAN)
}

fn cpd(paths: &[PathBuf], min_tokens: usize) -> Result<u8, Failure> {
    if min_tokens < 10 {
        return Err(Failure(format!("--min-tokens must be at least 10, got {min_tokens}")));
    }
    let units = load_units(paths)?;
    let pairs = find_duplicates(&units, min_tokens);
    for p in &pairs {
        println!(
            "Found a {} token duplication: {}:{}-{} and {}:{}-{}",
            p.token_length,
            p.span_a.file,
            p.span_a.line,
            p.span_a.end_line,
            p.span_b.file,
            p.span_b.line,
            p.span_b.end_line
        );
    }
    Ok(exit(!pairs.is_empty()))
}

fn annotate(
    file: &Path,
    line: u32,
    rule: String,
    reviewer: String,
    time: Option<&str>,
    in_place: bool,
) -> Result<u8, Failure> {
    let time = match time {
        Some(t) => {
            parse_review_time(t).ok_or_else(|| Failure(format!("bad review time `{t}`, expected M/D/YY H.MMAM")))?
        }
        None => Local::now().naive_local(),
    };
    let source = std::fs::read_to_string(file)?;
    let annotated = annotate_source(
        &source,
        line,
        &ReviewAnnotation {
            rule_id: rule,
            reviewer,
            time,
        },
    )?;
    if in_place {
        std::fs::write(file, annotated)?;
    } else {
        print!("{annotated}");
    }
    Ok(EXIT_CLEAN)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze {
            paths,
            ruleset,
            format,
            out,
            min_priority,
            honor_reviews,
            bounds,
            timestamp,
        } => analyze(
            &paths,
            ruleset.as_deref(),
            format,
            out.as_deref(),
            min_priority,
            honor_reviews,
            bounds,
            timestamp.as_deref(),
        ),
        Command::Boundcheck { paths } => boundcheck(&paths),
        Command::Run {
            file,
            entry,
            ea,
            coverage,
            stdin,
            fs,
            seed,
            max_steps,
            coverage_out,
        } => run(
            &file,
            entry,
            ea,
            coverage,
            stdin.as_deref(),
            &fs,
            seed,
            max_steps,
            coverage_out.as_deref(),
        ),
        Command::Metrics { paths, no_run } => metrics(&paths, no_run),
        Command::Cpd { paths, min_tokens } => cpd(&paths, min_tokens),
        Command::Annotate {
            file,
            line,
            rule,
            reviewer,
            time,
            in_place,
        } => annotate(&file, line, rule, reviewer, time.as_deref(), in_place),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
