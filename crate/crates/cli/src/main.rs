use std::collections::BTreeSet;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use provex::bench::{
    corpus, emit_report, gen_minitpch, load_dataset, run_suite, save_dataset, write_relation, BenchReport, ReportFormat,
    SuiteOptions, Q18,
};
use provex::engine::Database;
use provex::explore::{PlanMode, Prepared, Session};
use provex::hybrid::{Objective, PlanOptions};
use provex::ir::{parse_program, Program};
use provex::provgen::Strategy;

#[derive(Parser)]
#[command(name = "provex", version, about = "Which-provenance retrieval for Datalog-style programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time every strategy on each program and emit a report.
    Bench(BenchArgs),
    /// Evaluate a program, select rows of the result and print their provenance.
    Run(RunArgs),
    /// Print the materialization plan chosen for a program.
    Plan(PlanArgs),
    /// Write a generated mini TPC-H dataset to a directory.
    Gen(GenArgs),
    /// Serve the exploration HTTP API.
    Serve(ServeArgs),
}

/// `c,o,l` row counts for Customers, Orders and Lineitem.
#[derive(Debug, Clone, Copy)]
struct Scale([usize; 3]);

impl std::str::FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Scale, String> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        match parts[..] {
            [c, o, l] if c >= 1 && o >= 1 && l >= 1 => Ok(Scale([c, o, l])),
            [_, _, _] => Err("counts must be at least 1".into()),
            _ => Err("expected three counts, c,o,l".into()),
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// Directory with a catalog file and one CSV per relation.
    #[arg(long, conflicts_with = "scale")]
    data: Option<PathBuf>,
    /// Generate mini TPC-H data instead.
    #[arg(long)]
    scale: Option<Scale>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl DataArgs {
    fn load(&self) -> Result<Option<Database>> {
        Ok(match (&self.data, self.scale) {
            (Some(dir), _) => Some(load_dataset(dir).with_context(|| format!("loading {}", dir.display()))?),
            (None, Some(Scale([c, o, l]))) => Some(gen_minitpch(c, o, l, self.seed)),
            (None, None) => None,
        })
    }

    fn require(&self) -> Result<Database> {
        self.load()?.context("pass --data <dir> or --scale c,o,l")
    }
}

#[derive(Args)]
struct PlanChoice {
    /// `auto`, `none`, or comma-separated occurrences to materialize.
    #[arg(long, default_value = "auto")]
    plan: String,
    /// Ranking for automatic plans: `benefit_then_cost` or `ratio`.
    #[arg(long, default_value = "benefit_then_cost")]
    objective: Objective,
}

impl PlanChoice {
    fn mode(&self, program: &Program) -> Result<PlanMode> {
        Ok(match self.plan.trim().to_ascii_lowercase().as_str() {
            "auto" => PlanMode::Auto,
            "none" => PlanMode::None,
            _ => PlanMode::Explicit(
                self.plan
                    .split(',')
                    .map(|n| program.resolve_occurrence(n.trim()))
                    .collect::<provex::error::Result<BTreeSet<_>>>()?,
            ),
        })
    }

    fn options(&self) -> PlanOptions {
        PlanOptions {
            objective: self.objective,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Program files; the mini Q18 is used when none are given.
    #[arg(long = "program")]
    programs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "W,O1,G,O2")]
    strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[command(flatten)]
    plan: PlanChoice,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `csv` or `json`; taken from the `--out` extension when omitted.
    #[arg(long)]
    format: Option<ReportFormat>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    program: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// One result row as comma-separated values; repeat for more rows.
    /// Without it the result itself is printed.
    #[arg(long = "select")]
    select: Vec<String>,
    /// Occurrence to print; every base occurrence when omitted.
    #[arg(long = "table")]
    tables: Vec<String>,
    #[arg(long, default_value = "O2")]
    strategy: Strategy,
    #[command(flatten)]
    plan: PlanChoice,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    program: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    plan: PlanChoice,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    scale: Scale,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// Address to bind; falls back to $PROVEX_LISTEN, then 127.0.0.1:7878.
    #[arg(long)]
    listen: Option<String>,
    /// Seconds before an untouched session is dropped.
    #[arg(long, default_value_t = provex_service::DEFAULT_IDLE.as_secs())]
    idle_secs: u64,
    /// Static files served under /ui.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

fn read_program(path: &Path, db: &Database) -> Result<Program> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&text, db.catalog()).with_context(|| format!("parsing {}", path.display()))
}

fn program_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "program".into())
}

fn bench(args: BenchArgs) -> Result<()> {
    let format = match args.format {
        Some(f) => f,
        None => match args.out.as_deref().and_then(Path::extension) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        },
    };
    let options = |mode: PlanMode| SuiteOptions {
        strategies: args.strategies.clone(),
        reps: args.reps.max(1),
        plan: mode,
        plan_options: args.plan.options(),
        check: true,
    };
    let mut report = BenchReport::default();
    match args.data.load()? {
        Some(db) => {
            let mut programs = Vec::new();
            for path in &args.programs {
                programs.push((program_name(path), read_program(path, &db)?));
            }
            if programs.is_empty() {
                programs.push(("q18".to_string(), parse_program(Q18, db.catalog())?));
            }
            for (name, program) in programs {
                let mode = args.plan.mode(&program)?;
                let part = run_suite(&db, &[(name.clone(), program)], &options(mode))
                    .with_context(|| format!("benchmarking {name}"))?;
                report.cells.extend(part.cells);
            }
        }
        None => {
            if !args.programs.is_empty() {
                bail!("--program needs --data or --scale");
            }
            for f in corpus() {
                let program = f.parse()?;
                let mode = match (&f.plan, args.plan.plan.as_str()) {
                    (Some(set), "auto") => PlanMode::Explicit(set.clone()),
                    _ => args.plan.mode(&program)?,
                };
                let part = run_suite(&f.db, &[(f.name.to_string(), program)], &options(mode))
                    .with_context(|| format!("benchmarking {}", f.name))?;
                report.cells.extend(part.cells);
            }
        }
    }
    emit_report(&report, format, args.out.as_deref())?;
    Ok(())
}

fn parse_row(text: &str) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    match reader.records().next() {
        Some(record) => Ok(record?.iter().map(str::to_string).collect()),
        None => bail!("empty --select value"),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let db = args.data.require()?;
    let program = read_program(&args.program, &db)?;
    let mode = args.plan.mode(&program)?;
    let prepared = Prepared::new(program, &db, args.strategy, &mode, &args.plan.options())?;
    let mut session = Session::from_prepared(prepared);
    if args.select.is_empty() {
        let result = session.result();
        writeln!(std::io::stdout(), "# {} ({} rows)", result.name(), result.len())?;
        write_relation(result, std::io::stdout().lock())?;
        return Ok(());
    }
    let rows = args.select.iter().map(|s| parse_row(s)).collect::<Result<Vec<_>>>()?;
    session.select_rows(&rows)?;
    let tables = if args.tables.is_empty() {
        session.prepared().program().base_occurrences().iter().map(|o| o.to_string()).collect()
    } else {
        args.tables.clone()
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (i, table) in tables.iter().enumerate() {
        let occ = session.resolve(table)?;
        let (rows, stats) = session.provenance(table)?;
        if i > 0 {
            writeln!(out)?;
        }
        writeln!(out, "# {occ} ({} rows)", rows.len())?;
        write_relation(&rows, &mut out)?;
        eprintln!("{occ}: {}", serde_json::to_string(&stats)?);
    }
    Ok(())
}

fn plan(args: PlanArgs) -> Result<()> {
    let db = args.data.require()?;
    let program = read_program(&args.program, &db)?;
    let mode = args.plan.mode(&program)?;
    let prepared = Prepared::new(program, &db, Strategy::O2, &mode, &args.plan.options())?;
    writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&prepared.plan_report())?)?;
    Ok(())
}

fn generate(args: GenArgs) -> Result<()> {
    let [c, o, l] = args.scale.0;
    save_dataset(&gen_minitpch(c, o, l, args.seed), &args.out)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let listen = provex_service::listen_address(args.listen.as_deref());
    let addr: SocketAddr = listen.parse().with_context(|| format!("bad listen address `{listen}`"))?;
    let config = provex_service::Config {
        idle: Duration::from_secs(args.idle_secs),
        ui_dir: args.ui_dir,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("listening on http://{addr}");
    runtime.block_on(provex_service::serve(addr, config))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Bench(a) => bench(a),
        Command::Run(a) => run(a),
        Command::Plan(a) => plan(a),
        Command::Gen(a) => generate(a),
        Command::Serve(a) => serve(a),
    }
}
