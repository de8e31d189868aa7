//! Command-line front end. `run` parses arguments, merges them over an
//! optional configuration file, executes one command and returns the exit
//! status (0 ok, 1 domain error, 2 usage error).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cnn::{self, CnnParams};
use crate::config::{RunConfig, SamplerChoice, SweepModel};
use crate::data::{encode_item, encode_split, Dataset, Split, PIXELS};
use crate::device::{self, DeviceSampler, Mode};
use crate::embedding::build_parallel;
use crate::error::{Error, Result};
use crate::metrics::composite;
use crate::model::{clamp_inputs, read_params, write_params, BmParams, EncodedPoint, ReducedProblem, UnitLayout};
use crate::sampler::{
    self, exact_distribution, index_state, total_variation, Moments, PhaseSampler, SampleSet, SamplerConfig,
};
use crate::seed;
use crate::sweep;
use crate::topology::{buffered_partition, pegasus, smallest_region_core, PartitionPlan};
use crate::trainer::{self, write_trace_csv, EpochMetrics, EvalSet, Phase};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qbm",
    version,
    about = "Boltzmann machine classifiers, parallel annealing and a CNN baseline"
)]
pub struct Cli {
    /// Run configuration (JSON). Flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for written artifacts.
    #[arg(long, global = true, env = "QBM_OUT_DIR", default_value = "qbm-out")]
    pub out: PathBuf,
    /// Maximum worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition a Pegasus graph into buffered regions.
    Partition(PartitionArgs),
    /// Embed a clique into every region of a plan.
    Embed(EmbedArgs),
    /// Train a Boltzmann machine classifier.
    TrainQbm(TrainQbmArgs),
    /// Train the CNN baseline.
    TrainCnn(TrainCnnArgs),
    /// Score a model (or an untrained one) on a dataset split.
    Eval(EvalArgs),
    /// Device time of sequential versus parallel sampling.
    TimingReport(TimingArgs),
    /// Draw samples from a model's free units.
    Sample(SampleArgs),
    /// Hyperparameter search ranked by the validation composite.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Pegasus size parameter.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of regions.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Region map written by `partition`.
    #[arg(long)]
    pub plan: PathBuf,
    /// Clique size.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SamplerFlags {
    /// exact, gibbs, sa or device.
    #[arg(long)]
    pub sampler: Option<SamplerChoice>,
    #[arg(long)]
    pub reads: Option<usize>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub sampler_seed: Option<u64>,
    #[arg(long)]
    pub chain_strength: Option<f64>,
    #[arg(long)]
    pub regions: Option<usize>,
    #[arg(long)]
    pub clique: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainQbmArgs {
    /// QBMD1 dataset file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub init_seed: Option<u64>,
    #[arg(long)]
    pub train_limit: Option<usize>,
    /// Also record the exact label NLL per split.
    #[arg(long)]
    pub track_nll: bool,
    #[command(flatten)]
    pub sampler: SamplerFlags,
}

#[derive(Debug, Args)]
pub struct TrainCnnArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub kernel_size: Option<usize>,
    #[arg(long)]
    pub neurons1: Option<usize>,
    #[arg(long)]
    pub neurons2: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub init_seed: Option<u64>,
    #[arg(long)]
    pub train_limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// train, val or test.
    #[arg(long)]
    pub split: Option<Split>,
    /// PBM1 or PCNN1 checkpoint; omitted means a freshly initialised machine.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub init_seed: Option<u64>,
    #[command(flatten)]
    pub sampler: SamplerFlags,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    /// sequential or parallel.
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub regions: Option<usize>,
    #[arg(long)]
    pub batches: Option<usize>,
    /// Data points per batch.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub reads: Option<usize>,
    #[arg(long)]
    pub phases: Option<usize>,
    #[arg(long)]
    pub programming_us: Option<f64>,
    #[arg(long)]
    pub per_read_us: Option<f64>,
    #[arg(long)]
    pub overhead_us: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub labels: Option<usize>,
    #[arg(long)]
    pub init_seed: Option<u64>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// PBM1 checkpoint whose inputs are clamped to `--data`/`--index`.
    #[arg(long, requires_all = ["data", "index"])]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub index: Option<usize>,
    #[arg(long)]
    pub split: Option<Split>,
    #[command(flatten)]
    pub sampler: SamplerFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// qbm or cnn.
    #[arg(long)]
    pub model: Option<SweepModel>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub per_arch: Option<usize>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CNN epochs per trial.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub train_limit: Option<usize>,
}

fn set<T>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

impl SamplerFlags {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.sampler.kind, self.sampler);
        set(&mut c.sampler.reads, self.reads);
        set(&mut c.sampler.sweeps, self.sweeps);
        set(&mut c.seeds.sampler, self.sampler_seed);
        if self.chain_strength.is_some() {
            c.device.chain_strength = self.chain_strength;
        }
        set(&mut c.device.regions, self.regions);
        set(&mut c.device.clique, self.clique);
    }
}

impl Command {
    fn apply(&self, c: &mut RunConfig) {
        match self {
            Command::Partition(a) => {
                set(&mut c.device.pegasus_m, a.m);
                set(&mut c.device.regions, a.k);
                set(&mut c.seeds.partition, a.seed);
                set(&mut c.device.restarts, a.restarts);
            }
            Command::Embed(a) => {
                set(&mut c.device.clique, a.k);
                set(&mut c.device.pegasus_m, a.m);
                set(&mut c.seeds.embedding, a.seed);
            }
            Command::TrainQbm(a) => {
                if a.data.is_some() {
                    c.data.path = a.data.clone();
                }
                set(&mut c.model.hidden, a.hidden);
                set(&mut c.train.epochs, a.epochs);
                set(&mut c.train.batch_size, a.batch_size);
                set(&mut c.train.learning_rate, a.lr);
                set(&mut c.train.temperature, a.temperature);
                set(&mut c.seeds.train, a.seed);
                set(&mut c.seeds.init, a.init_seed);
                if a.train_limit.is_some() {
                    c.data.train_limit = a.train_limit;
                }
                c.train.track_nll |= a.track_nll;
                a.sampler.apply(c);
            }
            Command::TrainCnn(a) => {
                if a.data.is_some() {
                    c.data.path = a.data.clone();
                }
                set(&mut c.model.cnn.kernel_size, a.kernel_size);
                set(&mut c.model.cnn.neurons1, a.neurons1);
                set(&mut c.model.cnn.neurons2, a.neurons2);
                set(&mut c.train.cnn.learning_rate, a.lr);
                set(&mut c.train.cnn.beta1, a.beta1);
                set(&mut c.train.cnn.beta2, a.beta2);
                set(&mut c.train.cnn.batch_size, a.batch_size);
                set(&mut c.train.cnn.epochs, a.epochs);
                set(&mut c.seeds.train, a.seed);
                set(&mut c.seeds.init, a.init_seed);
                if a.train_limit.is_some() {
                    c.data.train_limit = a.train_limit;
                }
            }
            Command::Eval(a) => {
                if a.data.is_some() {
                    c.data.path = a.data.clone();
                }
                set(&mut c.data.eval_split, a.split);
                set(&mut c.model.hidden, a.hidden);
                set(&mut c.seeds.init, a.init_seed);
                a.sampler.apply(c);
            }
            Command::TimingReport(a) => {
                set(&mut c.device.report_mode, a.mode);
                set(&mut c.device.regions, a.regions);
                let w = &mut c.device.workload;
                set(&mut w.batches, a.batches);
                set(&mut w.points_per_batch, a.points);
                set(&mut w.reads, a.reads);
                set(&mut w.phases, a.phases);
                let t = &mut c.device.timing;
                set(&mut t.programming_us, a.programming_us);
                set(&mut t.per_read_us, a.per_read_us);
                set(&mut t.per_cycle_overhead_us, a.overhead_us);
            }
            Command::Sample(a) => {
                set(&mut c.model.hidden, a.hidden);
                set(&mut c.model.labels, a.labels);
                set(&mut c.seeds.init, a.init_seed);
                set(&mut c.train.temperature, a.temperature);
                if a.data.is_some() {
                    c.data.path = a.data.clone();
                }
                set(&mut c.data.eval_split, a.split);
                a.sampler.apply(c);
            }
            Command::Sweep(a) => {
                set(&mut c.sweep.model, a.model);
                set(&mut c.sweep.trials, a.trials);
                set(&mut c.sweep.per_arch, a.per_arch);
                if a.data.is_some() {
                    c.data.path = a.data.clone();
                }
                set(&mut c.seeds.train, a.seed);
                set(&mut c.train.cnn.epochs, a.epochs);
                if a.train_limit.is_some() {
                    c.data.train_limit = a.train_limit;
                }
            }
        }
    }
}

/// Exit status for an error: configuration problems are usage errors.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_DOMAIN,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("qbm: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command and returns its one-line summary.
pub fn execute(cli: &Cli) -> Result<String> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cli.command.apply(&mut cfg);
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    fs::create_dir_all(&cli.out)?;
    fs::write(cli.out.join("config.json"), cfg.to_json())?;
    pool.install(|| match &cli.command {
        Command::Partition(_) => cmd_partition(&cfg, &cli.out),
        Command::Embed(a) => cmd_embed(&cfg, &a.plan, &cli.out),
        Command::TrainQbm(_) => cmd_train_qbm(&cfg, &cli.out),
        Command::TrainCnn(_) => cmd_train_cnn(&cfg, &cli.out),
        Command::Eval(a) => cmd_eval(&cfg, a.model.as_deref(), &cli.out),
        Command::TimingReport(_) => cmd_timing(&cfg, &cli.out),
        Command::Sample(a) => cmd_sample(&cfg, a.model.as_deref(), a.index, &cli.out),
        Command::Sweep(_) => cmd_sweep(&cfg, &cli.out),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn cmd_partition(cfg: &RunConfig, out: &Path) -> Result<String> {
    let d = &cfg.device;
    let g = pegasus(d.pegasus_m)?;
    let (_, plan) = buffered_partition(&g, d.regions, cfg.seeds.partition, d.restarts)?;
    plan.validate(&g)?;
    let mut f = fs::File::create(out.join("graph.edges"))?;
    g.write_edge_list(&mut f)?;
    f.flush()?;
    write_json(&out.join("plan.json"), &plan)?;
    Ok(format!(
        "partition: P{} ({} nodes, {} edges) into {} regions, sizes {:?}, {} buffered, smallest connected core {}",
        d.pegasus_m,
        g.num_nodes(),
        g.num_edges(),
        plan.k(),
        plan.region_sizes(),
        plan.buffer.len(),
        smallest_region_core(&g, &plan)
    ))
}

fn cmd_embed(cfg: &RunConfig, plan_path: &Path, out: &Path) -> Result<String> {
    let plan: PartitionPlan = serde_json::from_str(&fs::read_to_string(plan_path)?)?;
    let g = pegasus(cfg.device.pegasus_m)?;
    plan.validate(&g)?;
    if !plan.cross_edges(&g).is_empty() {
        return Err(Error::Graph(
            "plan has edges between regions; partition output is already buffered".into(),
        ));
    }
    let pe = build_parallel(&g, &plan, cfg.device.clique, cfg.seeds.embedding)?;
    pe.validate(&g, &plan)?;
    fs::write(out.join("embedding.json"), pe.to_json()? + "\n")?;
    let s = pe.stats();
    Ok(format!(
        "embed: K_{} in {} regions, chain length {}..{} (mean {:.2}), {} qubits used",
        pe.k,
        pe.regions(),
        s.min,
        s.max,
        s.mean,
        s.total
    ))
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg
        .data
        .path
        .as_ref()
        .ok_or_else(|| Error::Config("no dataset given (use --data or data.path)".into()))?;
    Dataset::load(path)
}

struct Splits {
    train: Vec<EncodedPoint>,
    val: Vec<EncodedPoint>,
    test: Vec<EncodedPoint>,
}

fn load_splits(cfg: &RunConfig) -> Result<Splits> {
    let ds = load_dataset(cfg)?;
    let mut train = encode_split(&ds, Split::Train);
    if let Some(n) = cfg.data.train_limit {
        train.truncate(n);
    }
    Ok(Splits {
        train,
        val: encode_split(&ds, Split::Val),
        test: encode_split(&ds, Split::Test),
    })
}

fn eval_sets(s: &Splits) -> Vec<EvalSet<'_>> {
    [("val", &s.val), ("test", &s.test)]
        .into_iter()
        .filter(|(_, p)| !p.is_empty())
        .map(|(name, points)| EvalSet { name, points })
        .collect()
}

/// Software sampler or the composed device.
pub enum AnySampler {
    Software(SamplerConfig),
    Device(Box<DeviceSampler>),
}

impl PhaseSampler for AnySampler {
    fn estimate(&self, problems: &[ReducedProblem], seed: u64) -> Result<Vec<Moments>> {
        match self {
            AnySampler::Software(c) => c.estimate(problems, seed),
            AnySampler::Device(d) => d.estimate(problems, seed),
        }
    }
}

impl AnySampler {
    pub fn from_config(cfg: &RunConfig, free_units: usize) -> Result<Self> {
        if cfg.sampler.kind != SamplerChoice::Device {
            return Ok(AnySampler::Software(cfg.sampler_config()));
        }
        let d = &cfg.device;
        if free_units > d.clique {
            return Err(Error::Config(format!(
                "{free_units} free units do not fit a K_{} embedding",
                d.clique
            )));
        }
        let g = pegasus(d.pegasus_m)?;
        let (_, plan) = buffered_partition(&g, d.regions, cfg.seeds.partition, d.restarts)?;
        Ok(AnySampler::Device(Box::new(DeviceSampler::build(
            g,
            plan,
            d.clique,
            cfg.device_config(),
            cfg.seeds.embedding,
        )?)))
    }

    fn usage_note(&self) -> String {
        match self {
            AnySampler::Software(_) => String::new(),
            AnySampler::Device(d) => {
                let u = d.usage();
                format!(
                    ", device cycles {} for {} instances, chain breaks {:.4}",
                    u.cycles, u.instances, u.mean_chain_break_rate
                )
            }
        }
    }
}

fn progress(label: &str, m: &EpochMetrics) {
    let parts: Vec<String> = m
        .splits
        .iter()
        .map(|s| match s.auc {
            Some(auc) => format!("{} acc {:.4} auc {:.4}", s.split, s.acc, auc),
            None => format!("{} acc {:.4}", s.split, s.acc),
        })
        .collect();
    eprintln!("{label} epoch {}: {}", m.epoch, parts.join(", "));
}

fn final_note(trace: &[EpochMetrics]) -> String {
    match trace.last() {
        None => "no epochs run".into(),
        Some(m) => m
            .splits
            .iter()
            .map(|s| match s.auc {
                Some(auc) => format!("{} acc {:.4} auc {:.4}", s.split, s.acc, auc),
                None => format!("{} acc {:.4}", s.split, s.acc),
            })
            .collect::<Vec<_>>()
            .join(", "),
    }
}

fn write_trace(out: &Path, trace: &[EpochMetrics]) -> Result<()> {
    let mut f = fs::File::create(out.join("trace.csv"))?;
    write_trace_csv(trace, &mut f)?;
    f.flush()?;
    Ok(())
}

fn cmd_train_qbm(cfg: &RunConfig, out: &Path) -> Result<String> {
    let splits = load_splits(cfg)?;
    let layout = cfg.layout(PIXELS)?;
    let sampler = AnySampler::from_config(cfg, layout.free())?;
    let params = BmParams::init(layout, cfg.seeds.init)?;
    let (params, trace) = trainer::train_with_callback(
        params,
        &splits.train,
        &eval_sets(&splits),
        &cfg.train_config(),
        &sampler,
        |m| progress("train-qbm", m),
    )?;
    write_trace(out, &trace)?;
    let mut f = fs::File::create(out.join("model.pbm"))?;
    write_params(&params, &mut f)?;
    f.flush()?;
    Ok(format!(
        "train-qbm: {} epochs on {} points, {}{}",
        trace.len(),
        splits.train.len(),
        final_note(&trace),
        sampler.usage_note()
    ))
}

fn cmd_train_cnn(cfg: &RunConfig, out: &Path) -> Result<String> {
    let splits = load_splits(cfg)?;
    let params = CnnParams::init(cfg.model.cnn, cfg.seeds.init)?;
    let (params, trace) = cnn::train_cnn_with_callback(
        params,
        &splits.train,
        &eval_sets(&splits),
        &cfg.cnn_train_config(),
        |m| progress("train-cnn", m),
    )?;
    write_trace(out, &trace)?;
    let mut f = fs::File::create(out.join("model.pcnn"))?;
    cnn::write_cnn(&params, &mut f)?;
    f.flush()?;
    Ok(format!(
        "train-cnn: {} parameters, {} epochs on {} points, {}",
        params.data.len(),
        trace.len(),
        splits.train.len(),
        final_note(&trace)
    ))
}

#[derive(Serialize)]
struct EvalReport {
    model: String,
    split: Split,
    points: usize,
    prevalence: f64,
    acc: f64,
    auc: Option<f64>,
    composite: Option<f64>,
    nll: Option<f64>,
}

fn cmd_eval(cfg: &RunConfig, model: Option<&Path>, out: &Path) -> Result<String> {
    let ds = load_dataset(cfg)?;
    let split = cfg.data.eval_split;
    let points = encode_split(&ds, split);
    if points.is_empty() {
        return Err(Error::InvalidArgument(format!("split {split} is empty")));
    }
    let bytes = match model {
        Some(p) => Some(fs::read(p)?),
        None => None,
    };
    let (kind, m) = match bytes {
        Some(b) if b.starts_with(b"PCNN1") => ("cnn", cnn::evaluate(&cnn::read_cnn(&b[..])?, split.name(), &points)?),
        other => {
            let params = match other {
                Some(b) => read_params(&b[..])?,
                None => BmParams::init(cfg.layout(PIXELS)?, cfg.seeds.init)?,
            };
            let sampler = AnySampler::from_config(cfg, params.layout().free())?;
            let m = trainer::evaluate(
                &params,
                split.name(),
                &points,
                &sampler,
                cfg.train.temperature,
                cfg.seeds.sampler,
                cfg.train.track_nll,
            )?;
            (if model.is_some() { "qbm" } else { "qbm-untrained" }, m)
        }
    };
    let report = EvalReport {
        model: kind.into(),
        split,
        points: points.len(),
        prevalence: ds.prevalence(split).unwrap_or(0.0),
        acc: m.acc,
        auc: m.auc,
        composite: m.auc.map(|a| composite(m.acc, a)),
        nll: m.nll,
    };
    write_json(&out.join("metrics.json"), &report)?;
    Ok(format!(
        "eval: {kind} on {split} ({} points, prevalence {:.4}): acc {:.4}, auc {}",
        report.points,
        report.prevalence,
        report.acc,
        report.auc.map_or("undefined".into(), |a| format!("{a:.4}"))
    ))
}

fn cmd_timing(cfg: &RunConfig, out: &Path) -> Result<String> {
    let d = &cfg.device;
    let cmp = device::compare_timing(&d.workload, &d.timing, d.regions)?;
    write_json(&out.join("timing.json"), &cmp)?;
    fs::write(out.join("timing.csv"), cmp.to_csv())?;
    let r = match d.report_mode {
        Mode::Sequential => &cmp.sequential,
        Mode::Parallel => &cmp.parallel,
    };
    let t = &d.timing;
    Ok(format!(
        "timing-report: {} mode, {} regions, {} instances in {} cycles ({:.0} us); sequential {} cycles; cycle reduction {:.4}, speedup {:.4}; constants programming {} us, per read {} us, overhead {} us",
        if d.report_mode == Mode::Parallel { "parallel" } else { "sequential" },
        d.regions,
        r.instances,
        r.cycles,
        r.total_time_us,
        cmp.sequential.cycles,
        cmp.cycle_reduction,
        r.speedup_vs_sequential,
        t.programming_us,
        t.per_read_us,
        t.per_cycle_overhead_us
    ))
}

fn cmd_sample(cfg: &RunConfig, model: Option<&Path>, index: Option<usize>, out: &Path) -> Result<String> {
    let t = cfg.train.temperature;
    let rp = match model {
        Some(p) => {
            let params = read_params(&fs::read(p)?[..])?;
            let ds = load_dataset(cfg)?;
            let split = cfg.data.eval_split;
            let i = index.unwrap_or(0);
            let item = ds
                .split(split)
                .nth(i)
                .ok_or_else(|| Error::InvalidArgument(format!("split {split} has no item {i}")))?;
            trainer::phase_problem(&params, &encode_item(item), Phase::Negative, t)?
        }
        None => {
            let layout =
                UnitLayout::new(0, cfg.model.hidden, cfg.model.labels).map_err(|e| Error::Config(e.to_string()))?;
            clamp_inputs(&BmParams::init(layout, cfg.seeds.init)?, &[], t)?
        }
    };
    let ss: SampleSet = match AnySampler::from_config(cfg, rp.m())? {
        AnySampler::Software(c) => sampler::sample(&rp, &c)?,
        AnySampler::Device(d) => d.sample_all(std::slice::from_ref(&rp), cfg.seeds.sampler)?.remove(0),
    };
    let mut f = fs::File::create(out.join("samples.txt"))?;
    ss.write_text(&mut f)?;
    f.flush()?;
    let m = rp.m();
    let mut note = format!(
        "sample: {} reads over {m} free units, {} distinct states",
        ss.total(),
        ss.distinct()
    );
    if m <= 20 {
        let exact = exact_distribution(&rp)?;
        let emp = ss.empirical();
        let mut csv = String::from("state,empirical,exact\n");
        for (i, (e, p)) in emp.iter().zip(&exact.probs).enumerate() {
            let bits: String = index_state(i, m)
                .iter()
                .map(|&b| if b == 1 { '1' } else { '0' })
                .collect();
            csv.push_str(&format!("{bits},{e},{p}\n"));
        }
        fs::write(out.join("distribution.csv"), csv)?;
        note.push_str(&format!(
            ", total variation to exact {:.4}",
            total_variation(&emp, &exact.probs)
        ));
    }
    Ok(note)
}

fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<String> {
    let splits = load_splits(cfg)?;
    if splits.val.is_empty() {
        return Err(Error::InvalidArgument("sweeps need a validation split".into()));
    }
    let s = &cfg.sweep;
    let base = cfg.seeds.train;
    let (result, best): (sweep::SweepResult, serde_json::Value) = match s.model {
        SweepModel::Qbm => {
            let trials = sweep::sample_qbm_trials(&s.qbm_space, s.trials, base)?;
            let kind = cfg.sampler_config().kind;
            let r = sweep::select(&trials, |i, t| {
                let v = sweep::run_qbm_trial(t, &splits.train, &splits.val, kind, seed::derive(base, i as u64))?;
                eprintln!("sweep trial {i}: {t:?} -> val acc {:.4} auc {:.4}", v.0, v.1);
                Ok(v)
            })?;
            let best = serde_json::to_value(&trials[r.best])?;
            (r, best)
        }
        SweepModel::Cnn => {
            let grid = sweep::cnn_grid(crate::data::SIDE)?;
            let trials = sweep::sample_cnn_trials(&s.cnn_space, &grid, s.per_arch, base)?;
            let epochs = cfg.train.cnn.epochs;
            let r = sweep::select(&trials, |i, t| {
                let v = sweep::run_cnn_trial(t, &splits.train, &splits.val, epochs, seed::derive(base, i as u64))?;
                eprintln!("sweep trial {i}: {t:?} -> val acc {:.4} auc {:.4}", v.0, v.1);
                Ok(v)
            })?;
            let best = serde_json::to_value(&trials[r.best])?;
            (r, best)
        }
    };
    let mut f = fs::File::create(out.join("sweep.csv"))?;
    result.write_csv(&mut f)?;
    f.flush()?;
    write_json(&out.join("best.json"), &best)?;
    let b = result.best_outcome();
    Ok(format!(
        "sweep: {} trials, best #{} val acc {:.4} auc {:.4} composite {:.4}",
        result.outcomes.len(),
        b.trial,
        b.val_acc,
        b.val_auc,
        b.composite
    ))
}
