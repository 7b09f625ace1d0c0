//! Command-line front end: `gen`, `solve`, `verify`, `bench`.
//!
//! Exit codes: 0 optimal or feasible, 1 runtime failure or failed check,
//! 2 time limit, 3 infeasible, 64 usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bp::{branch_and_price, BpOptions, BpStatus};
use crate::compact::{solve_compact, CompactOptions, SolveStatus};
use crate::core::{
    check_feasibility, evaluate, read_instance, read_schedule, write_instance, write_schedule,
    Instance, Schedule, ScheduleFile, Variant,
};
use crate::instgen::{generate, generate_suite, named_suite, GenParams, Range};
use crate::oracle::{brute_force, OracleLimits};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "crossdock", about = "Dock assignment and truck scheduling with resource scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate random instances.
    Gen(GenArgs),
    /// Solve one instance and write its schedule.
    Solve(SolveArgs),
    /// Check a schedule against an instance.
    Verify(VerifyArgs),
    /// Solve every instance in a directory with several engines.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Compact,
    Bp,
    Oracle,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Compact => "compact",
            Engine::Bp => "bp",
            Engine::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Sipt,
    Sdpt,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Sipt => Variant::SiPT,
            VariantArg::Sdpt => Variant::SdPT,
        }
    }
}

fn parse_range(s: &str) -> Result<Range, String> {
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once(','))
        .ok_or_else(|| format!("expected LO..HI, got '{s}'"))?;
    let lo = a.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<u32>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn parse_ratio(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once('/').ok_or_else(|| format!("expected NUM/DEN, got '{s}'"))?;
    Ok((
        a.trim().parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
        b.trim().parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
    ))
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Horizon length.
    #[arg(long = "T", default_value_t = 16)]
    pub horizon: u32,
    #[arg(long)]
    pub docks: Option<u32>,
    #[arg(long)]
    pub trucks: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = VariantArg::Sdpt)]
    pub variant: VariantArg,
    /// Named suite (paper, paper-small, smoke) instead of a single instance.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_range)]
    pub scenarios: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    pub arrival: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    pub processing: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    pub setup: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    pub slack: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    pub personnel: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    pub equipment: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    pub vehicles: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    pub wait_cost: Option<Range>,
    #[arg(long)]
    pub miss_multiplier: Option<u64>,
    /// Capacity factor as NUM/DEN.
    #[arg(long, value_parser = parse_ratio)]
    pub capacity_factor: Option<(u32, u32)>,
}

impl GenArgs {
    fn params(&self, docks: u32, trucks: u32) -> GenParams {
        let mut p = GenParams::new(self.horizon, docks, trucks)
            .with_seed(self.seed)
            .with_variant(self.variant.into());
        let overrides = [
            (self.scenarios, &mut p.scenario_count_range),
            (self.arrival, &mut p.arrival_range),
            (self.processing, &mut p.processing_range),
            (self.setup, &mut p.setup_range),
            (self.slack, &mut p.window_slack_range),
            (self.personnel, &mut p.workers_range),
            (self.equipment, &mut p.equipment_range),
            (self.vehicles, &mut p.vehicles_range),
            (self.wait_cost, &mut p.wait_cost_range),
        ];
        for (src, dst) in overrides {
            if let Some(r) = src {
                *dst = r;
            }
        }
        if let Some(m) = self.miss_multiplier {
            p.miss_multiplier = m;
        }
        if let Some(c) = self.capacity_factor {
            p.capacity_factor = c;
        }
        p
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Engine::Compact)]
    pub engine: Engine,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Pricing solutions at or below this reduced cost become columns.
    #[arg(long)]
    pub pool_threshold: Option<f64>,
    #[arg(long)]
    pub enable_combinatorial_cuts: bool,
    /// Schedule output path (default: next to the instance).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub schedule: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub dir: PathBuf,
    /// Comma-separated engines.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "compact,bp")]
    pub engines: Vec<Engine>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub pool_threshold: Option<f64>,
    #[arg(long)]
    pub enable_combinatorial_cuts: bool,
    /// Worker threads (instances run in parallel, never within a solve).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Leave the seconds column blank so output is byte-stable.
    #[arg(long)]
    pub stable: bool,
}

/// One benchmark line.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub engine: Engine,
    pub variant: Variant,
    pub nodes: usize,
    pub pricing_calls: Option<usize>,
    pub columns: Option<usize>,
    pub status: SolveStatus,
    pub gap: Option<f64>,
    pub seconds: Option<f64>,
    pub objective: Option<i64>,
}

impl BenchRow {
    pub const HEADER: &'static str =
        "instance,engine,variant,nodes,pricing_calls,columns,status,gap,seconds,objective";

    pub fn csv(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.engine.name(),
            self.variant,
            self.nodes,
            opt(self.pricing_calls.map(|v| v.to_string())),
            opt(self.columns.map(|v| v.to_string())),
            self.status,
            opt(self.gap.map(|g| format!("{g}"))),
            opt(self.seconds.map(|s| format!("{s:.3}"))),
            opt(self.objective.map(|o| o.to_string())),
        )
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            SolveStatus::Optimal | SolveStatus::Feasible => EXIT_OK,
            SolveStatus::Limit => EXIT_LIMIT,
            SolveStatus::Infeasible => EXIT_INFEASIBLE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub variant: Option<Variant>,
    pub time_limit: Option<Duration>,
    pub pool_threshold: Option<f64>,
    pub combinatorial_cuts: bool,
}

/// Runs one engine on one instance.
pub fn run_engine(
    inst: &Instance,
    engine: Engine,
    cfg: &EngineConfig,
) -> Result<(BenchRow, Option<Schedule>), String> {
    let variant = cfg.variant.unwrap_or_else(|| inst.natural_variant());
    match engine {
        Engine::Compact => {
            let out = solve_compact(
                inst,
                &CompactOptions {
                    variant: Some(variant),
                    combinatorial_cuts: cfg.combinatorial_cuts,
                    time_limit: cfg.time_limit,
                    ..Default::default()
                },
            )
            .map_err(|e| e.to_string())?;
            let objective = out.cost.map(|c| c.total);
            let row = BenchRow {
                instance: inst.name.clone(),
                engine,
                variant,
                nodes: out.stats.nodes,
                pricing_calls: None,
                columns: None,
                status: out.stats.status,
                gap: (out.stats.status != SolveStatus::Optimal)
                    .then(|| objective.map(|o| o as f64 - out.stats.bound))
                    .flatten(),
                seconds: Some(out.stats.seconds),
                objective,
            };
            Ok((row, out.schedule))
        }
        Engine::Bp => {
            let mut opts = BpOptions {
                variant: Some(variant),
                time_limit: cfg.time_limit,
                ..Default::default()
            };
            if let Some(t) = cfg.pool_threshold {
                opts.harvest_threshold = t;
            }
            let out = branch_and_price(inst, &opts).map_err(|e| e.to_string())?;
            let status = match out.stats.status {
                BpStatus::Optimal => SolveStatus::Optimal,
                BpStatus::Feasible | BpStatus::Heuristic => SolveStatus::Feasible,
                BpStatus::Limit => SolveStatus::Limit,
                BpStatus::Infeasible => SolveStatus::Infeasible,
            };
            let row = BenchRow {
                instance: inst.name.clone(),
                engine,
                variant,
                nodes: out.stats.master_nodes,
                pricing_calls: Some(out.stats.pricing_calls),
                columns: Some(out.stats.columns),
                status,
                gap: (status != SolveStatus::Optimal)
                    .then(|| out.cost.total as f64 - out.stats.bound),
                seconds: Some(out.stats.seconds),
                objective: Some(out.cost.total),
            };
            Ok((row, Some(out.schedule)))
        }
        Engine::Oracle => {
            if variant == Variant::SiPT && !inst.is_sipt() {
                return Err("instance has scenario-dependent processing times".into());
            }
            let started = std::time::Instant::now();
            let sol = brute_force(inst, &OracleLimits::default()).map_err(|e| e.to_string())?;
            let row = BenchRow {
                instance: inst.name.clone(),
                engine,
                variant,
                nodes: sol.explored as usize,
                pricing_calls: None,
                columns: None,
                status: SolveStatus::Optimal,
                gap: None,
                seconds: Some(started.elapsed().as_secs_f64()),
                objective: Some(sol.cost.total),
            };
            Ok((row, Some(sol.schedule)))
        }
    }
}

/// Aligned text table with one block per dock count.
pub fn format_table(rows: &[BenchRow], docks: &BTreeMap<String, u32>) -> String {
    let header = [
        "instance", "engine", "variant", "#nodes", "pricing", "columns", "status", "gap",
        "seconds", "objective",
    ];
    let cells = |r: &BenchRow| -> Vec<String> {
        r.csv().split(',').map(str::to_string).collect()
    };
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(cells(r)) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cols: Vec<String>| -> String {
        cols.iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = String::new();
    let mut groups: BTreeMap<u32, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry(docks.get(&r.instance).copied().unwrap_or(0))
            .or_default()
            .push(r);
    }
    for (d, group) in groups {
        let _ = writeln!(out, "docks = {d}");
        let _ = writeln!(out, "{}", line(header.iter().map(|h| h.to_string()).collect()));
        for r in group {
            let _ = writeln!(out, "{}", line(cells(r)));
        }
        out.push('\n');
    }
    out
}

fn seconds(v: Option<f64>) -> Option<Duration> {
    v.map(|s| Duration::from_secs_f64(s.max(0.0)))
}

fn cmd_gen(args: &GenArgs) -> Result<i32, String> {
    let instances = match &args.suite {
        Some(name) => {
            let (docks, rule) = named_suite(name).map_err(|e| e.to_string())?;
            generate_suite(&args.params(1, 1), &docks, &rule).map_err(|e| e.to_string())?
        }
        None => {
            let (Some(docks), Some(trucks)) = (args.docks, args.trucks) else {
                eprintln!("gen: --docks and --trucks are required without --suite");
                return Ok(EXIT_USAGE);
            };
            vec![generate(&args.params(docks, trucks)).map_err(|e| e.to_string())?]
        }
    };
    std::fs::create_dir_all(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    for (k, mut inst) in instances.into_iter().enumerate() {
        // suite member k is drawn with seed + k; the seed keeps names unique
        inst.name = format!("{}-s{}", inst.name, args.seed.wrapping_add(k as u64));
        let path = args.out.join(format!("{}.json", inst.name));
        write_instance(&path, &inst).map_err(|e| e.to_string())?;
        println!("{}", path.display());
    }
    Ok(EXIT_OK)
}

fn default_schedule_path(instance: &Path, engine: Engine) -> PathBuf {
    let stem = instance
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    instance.with_file_name(format!("{stem}.{}.schedule.json", engine.name()))
}

fn cmd_solve(args: &SolveArgs) -> Result<i32, String> {
    let inst = read_instance(&args.instance).map_err(|e| e.to_string())?;
    let cfg = EngineConfig {
        variant: args.variant.map(Variant::from),
        time_limit: seconds(args.time_limit),
        pool_threshold: args.pool_threshold,
        combinatorial_cuts: args.enable_combinatorial_cuts,
    };
    let (row, schedule) = run_engine(&inst, args.engine, &cfg)?;
    if let (Some(sched), Some(obj)) = (&schedule, row.objective) {
        let path = args
            .out
            .clone()
            .unwrap_or_else(|| default_schedule_path(&args.instance, args.engine));
        write_schedule(&path, &ScheduleFile::new(&inst.name, sched, obj))
            .map_err(|e| e.to_string())?;
        eprintln!("schedule written to {}", path.display());
    }
    println!("{}", row.csv());
    Ok(row.exit_code())
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32, String> {
    let inst = read_instance(&args.instance).map_err(|e| e.to_string())?;
    let file = read_schedule(&args.schedule).map_err(|e| e.to_string())?;
    let sched = file.schedule();
    let violations = check_feasibility(&inst, &sched);
    for v in &violations {
        println!("violation: {v}");
    }
    let mut ok = violations.is_empty();
    match evaluate(&inst, &sched) {
        Ok(cost) => {
            println!(
                "cost: waiting {} + missed {} = {}",
                cost.waiting_cost, cost.miss_cost, cost.total
            );
            if cost.total != file.objective {
                println!(
                    "objective mismatch: recorded {} but schedule costs {}",
                    file.objective, cost.total
                );
                ok = false;
            }
        }
        Err(e) => {
            println!("cannot evaluate: {e}");
            ok = false;
        }
    }
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}

/// Instance files (`*.json`) of a directory, sorted by file name.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && !p.to_string_lossy().ends_with(".schedule.json")
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Solves every instance with every engine; rows come back in
/// (file, engine) order regardless of thread count.
pub fn bench(
    instances: &[Instance],
    engines: &[Engine],
    cfg: &EngineConfig,
    jobs: usize,
) -> Result<Vec<BenchRow>, String> {
    let tasks: Vec<(usize, Engine)> = (0..instances.len())
        .flat_map(|k| engines.iter().map(move |&e| (k, e)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| e.to_string())?;
    let results: Vec<Result<BenchRow, String>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(k, e)| {
                run_engine(&instances[k], e, cfg)
                    .map(|r| r.0)
                    .map_err(|m| format!("{} / {}: {m}", instances[k].name, e.name()))
            })
            .collect()
    });
    results.into_iter().collect()
}

fn cmd_bench(args: &BenchArgs) -> Result<i32, String> {
    let files = instance_files(&args.dir)?;
    let instances: Vec<Instance> = files
        .iter()
        .map(|p| read_instance(p).map_err(|e| format!("{}: {e}", p.display())))
        .collect::<Result<_, _>>()?;
    let cfg = EngineConfig {
        variant: args.variant.map(Variant::from),
        time_limit: seconds(args.time_limit),
        pool_threshold: args.pool_threshold,
        combinatorial_cuts: args.enable_combinatorial_cuts,
    };
    let mut rows = bench(&instances, &args.engines, &cfg, args.jobs)?;
    if args.stable {
        for r in &mut rows {
            r.seconds = None;
        }
    }
    let mut csv = String::from(BenchRow::HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv());
        csv.push('\n');
    }
    match &args.csv {
        Some(path) => std::fs::write(path, &csv).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{csv}"),
    }
    let docks = instances.iter().map(|i| (i.name.clone(), i.docks)).collect();
    eprint!("{}", format_table(&rows, &docks));
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_FAILURE
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::tests::toy1;

    #[test]
    fn ranges_and_ratios() {
        assert_eq!(parse_range("2..4"), Ok((2, 4)));
        assert_eq!(parse_range("1,3"), Ok((1, 3)));
        assert!(parse_range("7").is_err());
        assert_eq!(parse_ratio("4/5"), Ok((4, 5)));
        assert!(parse_ratio("0.8").is_err());
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run(["crossdock", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["crossdock", "solve"]), EXIT_USAGE);
        assert_eq!(run(["crossdock", "solve", "x.json", "--engine", "cplex"]), EXIT_USAGE);
    }

    #[test]
    fn row_for_every_engine_on_toy1() {
        let cfg = EngineConfig {
            variant: None,
            time_limit: None,
            pool_threshold: None,
            combinatorial_cuts: false,
        };
        for engine in [Engine::Compact, Engine::Bp, Engine::Oracle] {
            let (row, sched) = run_engine(&toy1(), engine, &cfg).unwrap();
            assert_eq!(row.objective, Some(0));
            assert_eq!(row.status, SolveStatus::Optimal);
            assert_eq!(row.exit_code(), EXIT_OK);
            assert!(sched.is_some());
            let csv = row.csv();
            assert!(csv.starts_with(&format!("toy1,{},SiPT,", engine.name())));
            assert_eq!(csv.split(',').count(), BenchRow::HEADER.split(',').count());
        }
    }

    #[test]
    fn table_groups_by_docks() {
        let row = |name: &str| BenchRow {
            instance: name.into(),
            engine: Engine::Bp,
            variant: Variant::SdPT,
            nodes: 1,
            pricing_calls: Some(1),
            columns: Some(2),
            status: SolveStatus::Optimal,
            gap: None,
            seconds: None,
            objective: Some(5),
        };
        let docks = BTreeMap::from([("a".to_string(), 3), ("b".to_string(), 2)]);
        let table = format_table(&[row("a"), row("b")], &docks);
        let d2 = table.find("docks = 2").unwrap();
        let d3 = table.find("docks = 3").unwrap();
        assert!(d2 < d3);
        assert!(table[d2..d3].contains("b "));
    }
}
