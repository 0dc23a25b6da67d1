use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use gridswarm::io::{
    parse_rule_file, parse_trace, render_frame, serialize_trace, FrameFormat, TraceHeader, Viewport,
};
use gridswarm::verify::{verify_builtin, verify_radius_coverage_with};
use gridswarm::{
    builtin, validate, AdversaryStrategy, BuiltinId, RuleSet, Simulation, SymmetryPolicy,
    VerifyError,
};

/// Simulate and verify synchronous luminous robots on the infinite grid.
#[derive(Parser)]
#[command(name = "gridswarm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a rule set is well defined.
    Check {
        /// A rule file, or `builtin:ID`.
        source: String,
        /// Accept rotation-symmetric rules with directed moves.
        #[arg(long)]
        allow_symmetric: bool,
        #[arg(long)]
        json: bool,
    },
    /// Execute a rule set and write the trace.
    Run {
        source: String,
        #[arg(long)]
        rounds: u64,
        /// identity, pingpong or random:SEED (`random` reads EXPLORE_SEED).
        #[arg(long, default_value = "identity")]
        adversary: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        allow_symmetric: bool,
    },
    /// Detect phases of a built-in and check its exploration claims.
    Verify {
        /// `builtin:ID`.
        source: String,
        #[arg(long)]
        phases: u64,
        #[arg(long)]
        json: bool,
    },
    /// Report the first round by which the square [-R, R]² has been visited.
    Cover {
        source: String,
        #[arg(long)]
        radius: u64,
        #[arg(long)]
        budget: u64,
        #[arg(long, default_value = "identity")]
        adversary: String,
    },
    /// Draw the frames of a trace file.
    Render {
        trace: PathBuf,
        #[arg(long, value_enum, default_value = "ascii")]
        format: Format,
        /// x0,y0,x1,y1 (inclusive).
        #[arg(long, allow_hyphen_values = true)]
        viewport: String,
        /// Keep every K-th round.
        #[arg(long, default_value_t = 1)]
        every: u64,
        /// Output file for ascii, directory for svg; stdout for ascii when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure simulation throughput of a built-in.
    Bench {
        source: String,
        #[arg(long)]
        rounds: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Svg,
}

impl From<Format> for FrameFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Ascii => FrameFormat::Ascii,
            Format::Svg => FrameFormat::Svg,
        }
    }
}

enum Failure {
    Usage(String),
    Check,
    Collision(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

type CmdResult = Result<(), Failure>;

fn builtin_id(source: &str) -> Result<BuiltinId, Failure> {
    source
        .strip_prefix("builtin:")
        .ok_or_else(|| Failure::Usage(format!("expected builtin:ID, got {source:?}")))?
        .parse()
        .map_err(Failure::Usage)
}

fn load(source: &str) -> Result<RuleSet, Failure> {
    if source.starts_with("builtin:") {
        return Ok(builtin(builtin_id(source)?));
    }
    let text = fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
    parse_rule_file(&text).map_err(|e| Failure::Other(anyhow!("{source}: {e}")))
}

fn adversary(text: &str) -> Result<AdversaryStrategy, Failure> {
    let text = match text {
        "random" | "random:" => {
            let seed = std::env::var("EXPLORE_SEED")
                .map_err(|_| Failure::Usage("`random` without a seed needs EXPLORE_SEED".into()))?;
            format!("random:{seed}")
        }
        s => s.to_string(),
    };
    text.parse().map_err(Failure::Usage)
}

fn policy(allow_symmetric: bool) -> SymmetryPolicy {
    if allow_symmetric {
        SymmetryPolicy::AllowSymmetric
    } else {
        SymmetryPolicy::Strict
    }
}

/// Writes `contents` to a temporary file next to `path`, then renames it.
fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn check(source: &str, allow_symmetric: bool, json: bool) -> CmdResult {
    let rs = load(source)?;
    let report = validate(&rs);
    let ok =
        report.conflicts.is_empty() && (allow_symmetric || report.adversary_controlled.is_empty());
    if json {
        let v = serde_json::json!({ "rule_set": rs.name(), "well_defined": ok, "report": report });
        println!(
            "{}",
            serde_json::to_string_pretty(&v).expect("report serializes")
        );
    } else {
        println!("{report}");
        println!("well_defined: {ok}");
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn run(
    source: &str,
    rounds: u64,
    adv: &str,
    out: Option<&Path>,
    allow_symmetric: bool,
) -> CmdResult {
    let rs = load(source)?;
    let adv = adversary(adv)?;
    let mut sim =
        Simulation::new(&rs, adv, policy(allow_symmetric)).map_err(|e| Failure::Other(e.into()))?;
    let result = sim.advance_by(rounds);
    let header = TraceHeader::new(rs.name(), rs.phi(), rs.colors(), &adv);
    let text = serialize_trace(&header, sim.trace());
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    match result {
        Ok(()) => Ok(()),
        Err(e) if e.is_collision() => Err(Failure::Collision(e.to_string())),
        Err(e) => Err(Failure::Other(e.into())),
    }
}

fn verify(source: &str, phases: u64, json: bool) -> CmdResult {
    let id = builtin_id(source)?;
    let report = verify_builtin(id, phases);
    if json {
        let mut v = serde_json::to_value(&report).expect("report serializes");
        v["passed"] = report.passed().into();
        println!(
            "{}",
            serde_json::to_string_pretty(&v).expect("value serializes")
        );
    } else {
        for p in &report.phases {
            match p.boundary_covered {
                Some(b) => println!("phase {} round {} boundary_covered {b}", p.phase, p.round),
                None => println!("phase {} round {}", p.phase, p.round),
            }
        }
        println!("phases_detected: {}", report.phases_detected);
        println!("boundaries_covered: {}", report.boundaries_covered);
        println!("distance_divergence: {}", report.distance_divergence);
        println!(
            "exclusiveness_as_claimed: {} (node_collisions {}, edge_swaps {}, exclusive {})",
            report.exclusiveness_as_claimed,
            report.audit.node_collisions,
            report.audit.edge_swaps,
            id.exclusive()
        );
        if let Some(f) = &report.failure {
            println!("failure: {f}");
        }
        println!("passed: {}", report.passed());
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn cover(source: &str, radius: u64, budget: u64, adv: &str) -> CmdResult {
    let rs = load(source)?;
    let adv = adversary(adv)?;
    match verify_radius_coverage_with(&rs, radius, budget, adv, SymmetryPolicy::Strict) {
        Ok(round) => {
            println!("covered radius {radius} at round {round}");
            Ok(())
        }
        Err(VerifyError::BudgetExhausted { budget, witness }) => {
            println!("not covered within {budget} rounds; unvisited node {witness}");
            Err(Failure::Check)
        }
        Err(VerifyError::Engine(e)) if e.is_collision() => Err(Failure::Collision(e.to_string())),
        Err(e) => Err(Failure::Other(e.into())),
    }
}

fn render(
    trace: &Path,
    format: Format,
    viewport: &str,
    every: u64,
    out: Option<&Path>,
) -> CmdResult {
    let vp: Viewport = viewport.parse().map_err(Failure::Usage)?;
    if every == 0 {
        return Err(Failure::Usage("--every must be positive".into()));
    }
    let text = fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?;
    let file =
        parse_trace(&text).map_err(|e| Failure::Other(anyhow!("{}: {e}", trace.display())))?;
    let frames = file
        .trace
        .configurations
        .iter()
        .enumerate()
        .step_by(every as usize);
    match format {
        Format::Ascii => {
            let mut buf = String::new();
            for (round, c) in frames {
                buf.push_str(&format!("round {round}\n"));
                buf.push_str(&render_frame(c, vp, FrameFormat::Ascii));
                buf.push('\n');
            }
            match out {
                Some(path) => write_atomic(path, buf.as_bytes())?,
                None => print!("{buf}"),
            }
        }
        Format::Svg => {
            let dir = out.ok_or_else(|| Failure::Usage("svg output needs --out DIR".into()))?;
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let width = file.trace.rounds().to_string().len();
            for (round, c) in frames {
                let path = dir.join(format!("frame_{round:0width$}.svg"));
                write_atomic(&path, render_frame(c, vp, format.into()).as_bytes())?;
            }
        }
    }
    Ok(())
}

fn bench(source: &str, rounds: u64) -> CmdResult {
    let rs = load(source)?;
    let mut sim = Simulation::new(&rs, AdversaryStrategy::Identity, SymmetryPolicy::Strict)
        .map_err(|e| Failure::Other(e.into()))?;
    let mut peak = sim.current().len();
    let start = Instant::now();
    for _ in 0..rounds {
        match sim.advance() {
            Ok(c) => peak = peak.max(c.len()),
            Err(e) if e.is_collision() => return Err(Failure::Collision(e.to_string())),
            Err(e) => return Err(Failure::Other(e.into())),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    println!("rounds: {rounds}");
    println!("seconds: {secs:.6}");
    println!(
        "rounds_per_second: {:.0}",
        rounds as f64 / secs.max(f64::MIN_POSITIVE)
    );
    println!("peak_occupied_nodes: {peak}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check {
            source,
            allow_symmetric,
            json,
        } => check(source, *allow_symmetric, *json),
        Command::Run {
            source,
            rounds,
            adversary,
            trace,
            allow_symmetric,
        } => run(
            source,
            *rounds,
            adversary,
            trace.as_deref(),
            *allow_symmetric,
        ),
        Command::Verify {
            source,
            phases,
            json,
        } => verify(source, *phases, *json),
        Command::Cover {
            source,
            radius,
            budget,
            adversary,
        } => cover(source, *radius, *budget, adversary),
        Command::Render {
            trace,
            format,
            viewport,
            every,
            out,
        } => render(trace, *format, viewport, *every, out.as_deref()),
        Command::Bench { source, rounds } => bench(source, *rounds),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Collision(msg)) => {
            eprintln!("node collision: {msg}");
            ExitCode::from(3)
        }
    }
}
