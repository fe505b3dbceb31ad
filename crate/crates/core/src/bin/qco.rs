//! `qco`: gate-set efficiency measures from the command line.
//!
//! Exit codes: 0 success (numerical conditions such as no_gap are reported
//! in-band), 1 usage error, 2 input error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qco_core::ensembles::{
    histogram, run_sweep_with, search_best_completion, spectrum_ensemble, EnsembleKind, EnsembleSpec,
    SearchStrategy, Shard, DEFAULT_BINS, DEFAULT_SIZE,
};
use qco_core::gates::{
    finite_order_sample, group_closure, named_gate, named_group, GateSet, ProjectiveGate, Provenance,
    ProvenanceKind,
};
use qco_core::io;
use qco_core::moments::{delta_profile, Weighting};
use qco_core::overhead::{t_of_eps, OverheadReport, Variant};
use qco_core::rng::{purpose, stream};
use qco_core::Error;

/// Directory used for outputs when `--output` is absent.
const OUTPUT_DIR_ENV: &str = "QCO_OUTPUT_DIR";
const KM_POINTS: usize = 512;
const DEFAULT_CAP: usize = 100_000;

#[derive(Parser)]
#[command(name = "qco", version, about = "Quantum circuit overhead of single-qubit gate sets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; defaults to $QCO_OUTPUT_DIR/<command>.<ext>, else stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Close a generating set into a finite group and write it as a gate-set file.
    Group {
        /// Built-in group: clifford or hurwitz.
        name: Option<String>,
        /// JSON file of generators.
        #[arg(long, conflicts_with = "name")]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Per-spin block norms and the running discrepancy delta(t).
    Delta {
        #[command(flatten)]
        set: SetSource,
        #[command(flatten)]
        scale: Scale,
    },
    /// Q for a gate set.
    Qco {
        #[command(flatten)]
        set: SetSource,
        #[command(flatten)]
        scale: Scale,
    },
    /// Q_T for a group completed by one gate.
    Tqco {
        #[command(flatten)]
        group: GroupSource,
        #[command(flatten)]
        gate: GateSource,
        #[command(flatten)]
        scale: Scale,
    },
    /// Ensemble sweep: one CSV row per (member, t) plus a JSON manifest.
    Sweep {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        scales: Scales,
        /// Q on the raw sets or Q_T on the derived sets.
        #[arg(long, default_value = "Q_T")]
        variant: String,
        /// Manifest path (default: <output>.manifest.json when writing to a file).
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Also write one Q histogram CSV per t into this directory.
        #[arg(long)]
        histograms: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value = "0/1")]
        shard: String,
    },
    /// Aggregated singular-value spectrum with a Kesten-McKay overlay.
    Spectrum {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        scale: Scale,
        #[arg(long, default_value = "multiplicity")]
        weighting: String,
        /// Kesten-McKay overlay CSV (default: <output stem>_km.csv).
        #[arg(long)]
        km_output: Option<PathBuf>,
        #[arg(long, default_value = "0/1")]
        shard: String,
    },
    /// Search for the completion gate minimizing Q_T.
    Search {
        #[command(flatten)]
        group: GroupSource,
        /// Order of candidate gates; omit for Haar-random candidates.
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, default_value_t = 500)]
        budget: usize,
        #[arg(long, default_value = "random")]
        strategy: String,
        #[command(flatten)]
        scale: Scale,
        /// Leave the per-candidate trace out of the output.
        #[arg(long)]
        no_trace: bool,
    },
}

#[derive(Args)]
struct SetSource {
    /// Gate-set JSON file.
    #[arg(long)]
    set: Option<PathBuf>,
    /// Built-in group used as the gate set.
    #[arg(long, conflicts_with = "set")]
    group: Option<String>,
}

#[derive(Args)]
struct GroupSource {
    /// Built-in group: clifford or hurwitz.
    #[arg(long)]
    group: Option<String>,
    /// Gate-set file holding the full group.
    #[arg(long, conflicts_with = "group")]
    group_file: Option<PathBuf>,
}

#[derive(Args)]
struct GateSource {
    /// Named gate: p4, p3/4, t24, t12.
    #[arg(long)]
    gate: Option<String>,
    #[arg(long, conflicts_with = "gate")]
    gate_file: Option<PathBuf>,
    /// Sample the gate with this projective order (uses --seed).
    #[arg(long, conflicts_with_all = ["gate", "gate_file"])]
    order: Option<u32>,
    /// Sample a Haar-random gate (uses --seed).
    #[arg(long, conflicts_with_all = ["gate", "gate_file", "order"])]
    haar: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Scale {
    #[arg(long)]
    t: Option<u32>,
    /// Target accuracy, converted with t = ceil(2^{5/2} / epsilon).
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Scales {
    /// Comma-separated increasing t values.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
}

#[derive(Args)]
struct EnsembleArgs {
    /// haar, group-completion or fixed-completion.
    #[arg(long, default_value = "group-completion")]
    kind: String,
    #[arg(long)]
    group: Option<String>,
    #[arg(long, conflicts_with = "group")]
    group_file: Option<PathBuf>,
    /// Projective order of random gates; omit for Haar-random.
    #[arg(long)]
    order: Option<u32>,
    /// Gates per member for the haar kind.
    #[arg(long, default_value_t = 24)]
    n: usize,
    /// Completion gate for the fixed-completion kind.
    #[arg(long)]
    gate: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SIZE)]
    size: usize,
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::OutOfRange { .. }
        | Error::DimensionTooLarge { .. }
        | Error::InvalidSize { .. }
        | Error::NoGapAtScale { .. }
        | Error::DegenerateDelta { .. }
        | Error::Divergent
        | Error::EpsilonTooLarge { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(w) = cli.global.workers {
        if w == 0 {
            eprintln!("error: --workers must be >= 1");
            return ExitCode::from(1);
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn resolve_output(g: &Global, command: &str, ext: &str) -> Option<PathBuf> {
    g.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| Path::new(&d).join(format!("{command}.{ext}")))
    })
}

fn emit<T: Serialize>(g: &Global, command: &str, csv: impl FnOnce() -> String, json: &T) -> CliResult<()> {
    let path = resolve_output(g, command, g.format.ext());
    let content = match g.format {
        Format::Csv => csv(),
        Format::Json => io::to_json(json),
    };
    io::emit(path.as_deref(), &content)?;
    Ok(())
}

fn resolve_t(scale: &Scale) -> CliResult<(u32, Option<f64>)> {
    match (scale.t, scale.epsilon) {
        (Some(0), _) => Err(usage("--t must be >= 1")),
        (Some(t), None) => Ok((t, None)),
        (None, Some(e)) => Ok((t_of_eps(e, 2)?, Some(e))),
        _ => Err(usage("give exactly one of --t and --epsilon")),
    }
}

fn load_group(name: &Option<String>, file: &Option<PathBuf>) -> CliResult<GateSet> {
    match (name, file) {
        (Some(n), None) => named_group(n).ok_or_else(|| usage(format!("unknown group {n}; use clifford or hurwitz"))),
        (None, Some(f)) => Ok(io::read_gate_set(f)?),
        _ => Err(usage("give one of --group and --group-file")),
    }
}

fn load_set(src: &SetSource) -> CliResult<GateSet> {
    load_group(&src.group, &src.set)
}

fn load_gate(src: &GateSource, seed: u64) -> CliResult<(ProjectiveGate, String)> {
    let mut rng = stream(seed, purpose::GATE, 0);
    if let Some(name) = &src.gate {
        let g = named_gate(name).ok_or_else(|| usage(format!("unknown gate {name}; use p4, p3/4, t24 or t12")))?;
        return Ok((g, name.clone()));
    }
    if let Some(f) = &src.gate_file {
        return Ok((io::read_gate(f)?, f.display().to_string()));
    }
    if let Some(r) = src.order {
        return Ok((finite_order_sample(&mut rng, r)?, format!("order{r}-seed{seed}")));
    }
    if src.haar {
        return Ok((qco_core::gates::haar_sample(&mut rng), format!("haar-seed{seed}")));
    }
    Err(usage("give one of --gate, --gate-file, --order and --haar"))
}

fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Group { name, file, cap } => {
            let set = match (name, file) {
                (Some(n), None) => named_group(n).ok_or_else(|| usage(format!("unknown group {n}")))?,
                (None, Some(f)) => {
                    let gens = io::read_gate_set(f)?;
                    let label = gens.label().to_string();
                    group_closure(gens.gates(), *cap)?
                        .with_label(label)
                        .with_provenance(Provenance::of_kind(ProvenanceKind::Closure).with_source(f.display().to_string()))
                }
                _ => return Err(usage("give a group name or --file")),
            };
            eprintln!("{} elements", set.len());
            let path = resolve_output(g, "group", "json");
            io::emit(path.as_deref(), &io::gate_set_json(&set))?;
            Ok(())
        }
        Command::Delta { set, scale } => {
            let set = load_set(set)?;
            let (t, _) = resolve_t(scale)?;
            let mut profile = delta_profile(&set, t)?;
            profile.seed = Some(g.seed);
            let path = resolve_output(g, "delta", g.format.ext());
            let content = match g.format {
                Format::Csv => io::profile_csv(&profile),
                Format::Json => io::profile_json(&profile),
            };
            io::emit(path.as_deref(), &content)?;
            Ok(())
        }
        Command::Qco { set, scale } => {
            let set = load_set(set)?;
            let (t, eps) = resolve_t(scale)?;
            let profile = delta_profile(&set, t)?;
            let report = OverheadReport::from_profile(Variant::Q, &profile, t, eps)?;
            emit(g, "qco", || io::report_csv(std::slice::from_ref(&report)), &report)
        }
        Command::Tqco { group, gate, scale } => {
            let group = load_group(&group.group, &group.group_file)?;
            let (gate, gate_label) = load_gate(gate, g.seed)?;
            let (t, eps) = resolve_t(scale)?;
            let derived = qco_core::gates::derived_set(&group, &gate)?;
            let profile = delta_profile(&derived, t)?;
            let mut report = OverheadReport::from_profile(Variant::QT, &profile, t, eps)?;
            report.label = format!("{}+{gate_label}", group.label());
            emit(g, "tqco", || io::report_csv(std::slice::from_ref(&report)), &report)
        }
        Command::Sweep { ensemble, scales, variant, manifest, histograms, bins, shard } => {
            let variant = Variant::from_str(variant).map_err(|e| usage(e.to_string()))?;
            let shard = Shard::from_str(shard).map_err(|e| usage(e.to_string()))?;
            let t_list = match (&scales.t, &scales.epsilon) {
                (Some(ts), None) => ts.clone(),
                (None, Some(es)) => es.iter().map(|&e| t_of_eps(e, 2)).collect::<Result<_, _>>()?,
                _ => return Err(usage("give exactly one of --t and --epsilon")),
            };
            let spec = build_spec(ensemble, g.seed, t_list)?;
            let start = std::time::Instant::now();
            let results = run_sweep_with(&spec, variant, shard, &|r| {
                let status = r.error.as_deref().unwrap_or("ok");
                eprintln!("member {} done in {:.2}s: {status}", r.member_index, r.wall_time);
            })?;
            let path = resolve_output(g, "sweep", g.format.ext());
            let content = match g.format {
                Format::Csv => io::sweep_csv(&results, true),
                Format::Json => io::to_json(&results),
            };
            io::emit(path.as_deref(), &content)?;
            let manifest_path = manifest.clone().or_else(|| path.as_ref().map(|p| append_ext(p, "manifest.json")));
            if let Some(mp) = manifest_path {
                let m = Manifest {
                    tool: "qco",
                    version: env!("CARGO_PKG_VERSION"),
                    variant,
                    spec: &spec,
                    shard,
                    members: results.iter().map(|r| (r.member_index, r.member_seed, r.wall_time)).collect(),
                    failures: results.iter().filter(|r| r.error.is_some()).count(),
                    total_wall_time: start.elapsed().as_secs_f64(),
                };
                io::emit(Some(&mp), &io::to_json(&m))?;
            }
            if let Some(dir) = histograms {
                for &t in &spec.t_list {
                    let values = qco_core::ensembles::q_values_at(&results, t);
                    match histogram(&values, *bins, None) {
                        Ok(h) => io::emit(Some(&dir.join(format!("hist_t{t}.csv"))), &io::histogram_csv(&h))?,
                        Err(e) => eprintln!("no histogram at t = {t}: {e}"),
                    }
                }
            }
            Ok(())
        }
        Command::Spectrum { ensemble, scale, weighting, km_output, shard } => {
            let weighting = Weighting::from_str(weighting).map_err(|e| usage(e.to_string()))?;
            let shard = Shard::from_str(shard).map_err(|e| usage(e.to_string()))?;
            let (t, _) = resolve_t(scale)?;
            let spec = build_spec(ensemble, g.seed, vec![t])?;
            let (sample, km) = spectrum_ensemble(&spec, t, weighting, shard)?;
            let path = resolve_output(g, "spectrum", g.format.ext());
            let content = match g.format {
                Format::Csv => io::spectrum_csv(&sample),
                Format::Json => io::to_json(&sample),
            };
            io::emit(path.as_deref(), &content)?;
            let km_path = km_output.clone().or_else(|| path.as_ref().map(|p| sibling(p, "_km.csv")));
            match km_path {
                Some(kp) => io::emit(Some(&kp), &io::km_csv(&km, KM_POINTS))?,
                None => eprintln!("Kesten-McKay overlay not written; pass --km-output"),
            }
            Ok(())
        }
        Command::Search { group, order, budget, strategy, scale, no_trace } => {
            let group = load_group(&group.group, &group.group_file)?;
            let strategy = SearchStrategy::from_str(strategy).map_err(|e| usage(e.to_string()))?;
            let (t, _) = resolve_t(scale)?;
            let mut result = search_best_completion(&group, *order, t, *budget, strategy, g.seed)?;
            if *no_trace {
                result.trace.clear();
            }
            let path = resolve_output(g, "search", "json");
            io::emit(path.as_deref(), &io::to_json(&result))?;
            Ok(())
        }
    }
}

fn build_spec(a: &EnsembleArgs, seed: u64, t_list: Vec<u32>) -> CliResult<EnsembleSpec> {
    let kind = match a.kind.as_str() {
        "haar" => EnsembleKind::Haar { n: a.n, order: a.order },
        "group-completion" => EnsembleKind::GroupCompletion { group: load_group(&a.group, &a.group_file)?, order: a.order },
        "fixed-completion" => {
            let name = a.gate.as_deref().ok_or_else(|| usage("fixed-completion needs --gate"))?;
            let gate = named_gate(name).ok_or_else(|| usage(format!("unknown gate {name}")))?;
            EnsembleKind::FixedCompletion {
                group: load_group(&a.group, &a.group_file)?,
                gate,
                gate_label: name.to_string(),
            }
        }
        other => return Err(usage(format!("unknown kind {other}; use haar, group-completion or fixed-completion"))),
    };
    let spec = EnsembleSpec { kind, size: a.size, seed, t_list };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    Ok(spec)
}

fn append_ext(p: &Path, ext: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn sibling(p: &Path, suffix: &str) -> PathBuf {
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("spectrum");
    p.with_file_name(format!("{stem}{suffix}"))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    variant: Variant,
    spec: &'a EnsembleSpec,
    shard: Shard,
    /// `(member index, member seed, wall time in seconds)`.
    members: Vec<(usize, u64, f64)>,
    failures: usize,
    total_wall_time: f64,
}
