use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use ascg_bench::dataset::{build_training_set, collect_dataset};
use ascg_bench::pca::{coordinates_csv, project_trajectory};
use ascg_bench::report::aggregate_report;
use ascg_bench::runner::{read_records, run_benchmark, write_records, BenchmarkConfig};
use ascg_bench::verify::{run_oracle_suite, suite_instances, untrained_models};
use ascg_bench::{solve, BenchError, Instance, Method, Models, Result, SolveOptions};
use ascg_core::colgen::{write_duals_npy, write_trace_csv, CgConfig, PricingMode, DEFAULT_FLOOR};
use ascg_core::graph::emit_dimacs;
use ascg_core::predict::{compute_features, train, LabelConfig, Model, ModelKind, TrainConfig, TrainingSet};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ascg", version, about = "Column generation for fractional graph coloring with learned dual stabilization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random G(n, p) graphs as DIMACS files.
    Gen(GenArgs),
    /// Print per-vertex features as CSV.
    Features(FeaturesArgs),
    /// Collect a labelled training CSV.
    Collect(CollectArgs),
    /// Train a dual predictor.
    Train(TrainArgs),
    /// Solve one instance with one method.
    Solve(SolveArgs),
    /// Run every instance, method and seed and aggregate the results.
    Bench(BenchArgs),
    /// Aggregate an existing records CSV.
    Report(ReportArgs),
    /// Check every method against the enumeration bound on small graphs.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// DIMACS graph file (repeatable).
    #[arg(long = "graph")]
    graphs: Vec<PathBuf>,
    /// Random graph spec `n,p` (repeatable).
    #[arg(long = "gen", value_parser = parse_gen)]
    gens: Vec<(usize, f64)>,
    /// Graphs generated per `--gen` spec.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Seed of the first generated graph; later ones count up.
    #[arg(long, default_value_t = 1)]
    instance_seed: u64,
}

impl InstanceArgs {
    fn load(&self) -> Result<Vec<Instance>> {
        let mut out = self
            .graphs
            .iter()
            .map(|p| Instance::load(p))
            .collect::<Result<Vec<_>>>()?;
        for &(n, p) in &self.gens {
            out.extend((0..self.count).map(|k| Instance::generated(n, p, self.instance_seed + k)));
        }
        Ok(out)
    }

    fn load_one(&self) -> Result<Instance> {
        let mut all = self.load()?;
        if all.len() != 1 {
            return Err(BenchError::Usage(format!("expected exactly one instance, got {}", all.len())));
        }
        Ok(all.remove(0))
    }
}

#[derive(Args)]
struct CgArgs {
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,
    #[arg(long, value_enum, default_value_t = PricingArg::Exact)]
    pricing: PricingArg,
}

impl CgArgs {
    fn config(&self) -> Result<CgConfig> {
        let mut cg = CgConfig {
            pricing_mode: match self.pricing {
                PricingArg::Exact => PricingMode::Exact,
                PricingArg::Heuristic => PricingMode::HeuristicWithExactFallback,
            },
            ..CgConfig::default()
        };
        if let Some(t) = self.time_limit {
            if !(t > 0.0 && t.is_finite()) {
                return Err(BenchError::Usage(format!("bad time limit {t}")));
            }
            cg.time_limit = Duration::from_secs_f64(t);
        }
        if let Some(n) = self.max_iter {
            cg.max_iterations = n;
        }
        Ok(cg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PricingArg {
    Exact,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ffnn,
    Gcn,
}

#[derive(Args)]
struct StabArgs {
    /// Overrides the method's starting penalty.
    #[arg(long)]
    epsilon0: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_FLOOR)]
    floor: f64,
    /// Add this many columns priced against the prediction to the warm start.
    #[arg(long, default_value_t = 0)]
    dual_seeded: usize,
    /// Trained model JSON (repeatable, one per kind).
    #[arg(long = "model")]
    models: Vec<PathBuf>,
}

impl StabArgs {
    fn models(&self) -> Result<Models> {
        let mut models = Models::default();
        for path in &self.models {
            models.insert(Model::load(path)?)?;
        }
        Ok(models)
    }

    fn options(&self, cg: CgConfig) -> SolveOptions {
        SolveOptions {
            cg,
            epsilon0: self.epsilon0,
            floor: self.floor,
            dual_seeded: self.dual_seeded,
            ..SolveOptions::default()
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long = "gen", value_parser = parse_gen, required = true)]
    gens: Vec<(usize, f64)>,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 1)]
    instance_seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    instances: InstanceArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct CollectArgs {
    #[command(flatten)]
    instances: InstanceArgs,
    #[command(flatten)]
    cg: CgArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Training CSV from `collect`; otherwise labels are collected from the
    /// given instances. The GCN needs instances.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    instances: InstanceArgs,
    #[arg(long, value_enum, default_value_t = KindArg::Ffnn)]
    kind: KindArg,
    /// Trailing share of instances held out for early stopping.
    #[arg(long, default_value_t = 0.1)]
    val_fraction: f64,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output model JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instances: InstanceArgs,
    #[arg(long, default_value = "classic", value_parser = parse_method)]
    method: Method,
    #[command(flatten)]
    stab: StabArgs,
    #[command(flatten)]
    cg: CgArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write duals.npy and pca.csv.
    #[arg(long)]
    record_duals: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    instances: InstanceArgs,
    /// Method (repeatable); defaults to every method whose model is available.
    #[arg(long = "method", value_parser = parse_method)]
    methods: Vec<Method>,
    #[command(flatten)]
    stab: StabArgs,
    #[command(flatten)]
    cg: CgArgs,
    /// Inclusive seed range `A..B`.
    #[arg(long, default_value = "1..10", value_parser = parse_seeds)]
    seeds: SeedRange,
    #[arg(long, default_value = "classic")]
    baseline: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value = "classic")]
    baseline: String,
    /// Directory for report.txt and report.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Random graphs in the suite, besides K3, C5 and P3.
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trained models to use instead of untrained ones.
    #[arg(long = "model")]
    models: Vec<PathBuf>,
}

#[derive(Clone, Copy)]
struct SeedRange(u64, u64);

fn parse_gen(s: &str) -> std::result::Result<(usize, f64), String> {
    let (n, p) = s.split_once(',').ok_or("expected n,p")?;
    let n: usize = n.trim().parse().map_err(|e| format!("bad n: {e}"))?;
    let p: f64 = p.trim().parse().map_err(|e| format!("bad p: {e}"))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("p = {p} outside [0, 1]"));
    }
    Ok((n, p))
}

fn parse_seeds(s: &str) -> std::result::Result<SeedRange, String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: u64 = a.parse().map_err(|e| format!("bad seed: {e}"))?;
    let b: u64 = b.trim_start_matches('=').parse().map_err(|e| format!("bad seed: {e}"))?;
    if a > b {
        return Err(format!("empty seed range {s}"));
    }
    Ok(SeedRange(a, b))
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: BenchError| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(BenchError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Features(a) => cmd_features(a),
        Command::Collect(a) => cmd_collect(a),
        Command::Train(a) => cmd_train(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Report(a) => cmd_report(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    fs::create_dir_all(&a.out)?;
    for &(n, p) in &a.gens {
        for k in 0..a.count {
            let inst = Instance::generated(n, p, a.instance_seed + k);
            let path = a.out.join(format!("{}.col", inst.id));
            fs::write(&path, emit_dimacs(&inst.graph, Some(&inst.id)))?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn cmd_features(a: FeaturesArgs) -> Result<()> {
    let instances = a.instances.load()?;
    if instances.is_empty() {
        return Err(BenchError::Usage("no instances given".into()));
    }
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    let mut header = vec!["instance_id".to_owned(), "vertex".to_owned()];
    header.extend((1..=9).map(|k| format!("f{k}")));
    w.write_record(&header)?;
    for inst in &instances {
        for (v, f) in compute_features(&inst.graph, a.seed).iter().enumerate() {
            let mut row = vec![inst.id.clone(), v.to_string()];
            row.extend(f.0.iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_collect(a: CollectArgs) -> Result<()> {
    let instances = a.instances.load()?;
    let cg = a.cg.config()?;
    let (set, summary) = collect_dataset(&instances, &cg, &LabelConfig::default(), a.seed, &a.out)?;
    let rows: usize = set.instances.iter().map(|i| i.len()).sum();
    println!("wrote {rows} rows from {} instances to {}", summary.written.len(), a.out.display());
    for (id, reason) in &summary.skipped {
        println!("skipped {id}: {reason}");
    }
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    if !(0.0..1.0).contains(&a.val_fraction) {
        return Err(BenchError::Usage(format!("validation fraction {} outside [0, 1)", a.val_fraction)));
    }
    let kind = match a.kind {
        KindArg::Ffnn => ModelKind::Ffnn,
        KindArg::Gcn => ModelKind::Gcn,
    };
    let set = match &a.data {
        Some(path) => {
            if kind == ModelKind::Gcn {
                return Err(BenchError::Usage("the GCN trains from instances, not a CSV".into()));
            }
            TrainingSet::read_csv(BufReader::new(File::open(path)?))?
        }
        None => {
            let instances = a.instances.load()?;
            build_training_set(&instances, &CgConfig::default(), &LabelConfig::default(), a.seed).0
        }
    };
    if set.instances.len() < 2 {
        return Err(BenchError::Usage("training needs at least two labelled instances".into()));
    }
    let n_val = ((set.instances.len() as f64 * a.val_fraction).round() as usize).clamp(1, set.instances.len() - 1);
    let split = set.instances.len() - n_val;
    let train_set = TrainingSet { instances: set.instances[..split].to_vec() };
    let val_set = TrainingSet { instances: set.instances[split..].to_vec() };
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        max_epochs: a.epochs.unwrap_or(defaults.max_epochs),
        patience: a.patience.unwrap_or(defaults.patience),
        learning_rate: a.lr.unwrap_or(defaults.learning_rate),
        seed: a.seed,
        ..defaults
    };
    let outcome = train(kind, &train_set, &val_set, &config)?;
    outcome.model.save(&a.out)?;
    let meta = &outcome.model.metadata;
    println!(
        "trained on {} instances ({} held out): best epoch {} of {}, validation mse {:.6}",
        split, n_val, meta.best_epoch, meta.epochs, meta.val_loss
    );
    println!("model {}", a.out.display());
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let instance = a.instances.load_one()?;
    let cg = CgConfig {
        record_duals: a.record_duals,
        ..a.cg.config()?
    };
    let models = a.stab.models()?;
    let (record, result) = solve(&instance, a.method, &models, a.seed, &a.stab.options(cg))?;
    fs::create_dir_all(&a.out)?;
    let trace_path = a.out.join("trace.csv");
    write_trace_csv(&result.trace, create(&trace_path)?)?;
    println!("objective {:.6}", record.objective);
    println!("iterations {}", record.iterations);
    println!("status {}", record.status);
    println!("trace {}", trace_path.display());
    if a.record_duals {
        let npy = a.out.join("duals.npy");
        write_duals_npy(&result.trace, create(&npy)?)?;
        println!("duals {}", npy.display());
        let snapshots: Vec<Vec<f64>> = result.trace.iter().filter_map(|r| r.duals.clone()).collect();
        if snapshots.len() >= 2 {
            let pca = a.out.join("pca.csv");
            fs::write(&pca, coordinates_csv(&project_trajectory(&snapshots, 2)?))?;
            println!("pca {}", pca.display());
        }
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let instances = a.instances.load()?;
    let models = a.stab.models()?;
    let methods = if a.methods.is_empty() {
        Method::ALL
            .into_iter()
            .filter(|m| match m.predictor() {
                Some(ascg_bench::Predictor::Ffnn) => models.ffnn.is_some(),
                Some(ascg_bench::Predictor::Gcn) => models.gcn.is_some(),
                _ => true,
            })
            .collect()
    } else {
        a.methods.clone()
    };
    let config = BenchmarkConfig {
        instances,
        methods,
        seeds: (a.seeds.0..=a.seeds.1).collect(),
        options: a.stab.options(a.cg.config()?),
    };
    let records = run_benchmark(&config, &models)?;
    fs::create_dir_all(&a.out)?;
    let path = a.out.join("records.csv");
    write_records(&records, create(&path)?)?;
    println!("records {}", path.display());
    let ok: Vec<_> = records.iter().filter(|r| r.status != "error").cloned().collect();
    write_report(&ok, &a.baseline, Some(&a.out))
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let records = read_records(BufReader::new(File::open(&a.records)?))?;
    write_report(&records, &a.baseline, a.out.as_deref())
}

fn write_report(records: &[ascg_bench::RunRecord], baseline: &str, out: Option<&Path>) -> Result<()> {
    let report = aggregate_report(records, baseline)?;
    let text = report.to_text();
    print!("{text}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.txt"), &text)?;
        fs::write(dir.join("report.csv"), report.to_csv()?)?;
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let mut models = untrained_models(a.seed)?;
    for path in &a.models {
        models.insert(Model::load(path)?)?;
    }
    let instances = suite_instances(a.count, a.seed);
    let runs = run_oracle_suite(&instances, &Method::ALL, &models, a.seed, false)?;
    let mut out = std::io::stdout().lock();
    let mut failures = 0;
    for r in runs.iter().filter(|r| !r.agrees()) {
        failures += 1;
        writeln!(
            out,
            "MISMATCH {} {} {:?}: {} ({}) vs oracle {}",
            r.instance,
            r.method,
            r.mode,
            r.result.objective,
            r.result.status.as_str(),
            r.oracle
        )?;
    }
    writeln!(out, "{} runs on {} graphs, {failures} mismatches", runs.len(), instances.len())?;
    if failures > 0 {
        return Err(BenchError::Aggregation(format!("{failures} runs disagree with the oracle")));
    }
    Ok(())
}
