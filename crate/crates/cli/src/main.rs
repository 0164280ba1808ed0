mod data;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hogwild::bench::{delay_sweep, gamma_search, thread_sweep, SweepReport};
use hogwild::engine::digest_iterate;
use hogwild::io::{synth, write_edgelist, write_svmlight, write_triplets, DatasetSpec};
use hogwild::theory::{
    a_infinity, backoff_total_bound, estimate_constants, gamma_prop1, k_prop1, optimal_beta,
    ProblemConstants, RecursionSpec,
};
use hogwild::{
    GraphStats, RunConfig, RunReport, SamplingMode, SchedulerRegistry, StatsMode, StepSchedule,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use data::{parse_delays, parse_list, DataArgs, DelayList, Synthetic, ThreadList};

#[derive(Debug, Parser)]
#[command(
    name = "hogwild",
    version,
    about = "Lock-free parallel SGD experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the sparsity statistics (Ω, Δ, ρ) of a dataset as JSON.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        /// Estimate ρ from this many sampled edges instead of all of them.
        #[arg(long)]
        sampled: Option<usize>,
        #[arg(long, default_value_t = 0)]
        stats_seed: u64,
    },
    /// Train once and write a JSON report.
    Train(TrainArgs),
    /// Time schedulers across thread counts; CSV output.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "hogwild,rr,aig,serial")]
        schedulers: Vec<String>,
        /// Thread counts: `1,2,4` or `1..10`.
        #[arg(long, value_parser = parse_list, default_value = "1..4")]
        threads: ThreadList,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// CSV destination (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the sweep metadata and rows as JSON.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Time serial, hogwild and rr with an artificial per-gradient delay.
    DelaySweep {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Delays in nanoseconds, e.g. `0,1e3,1e4,1e5,1e6`.
        #[arg(long, value_parser = parse_delays, default_value = "0,1e3,1e4,1e5,1e6")]
        delays: DelayList,
        #[arg(long, default_value_t = 4)]
        threads: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Evaluate stepsize and iteration bounds as JSON.
    Theory(TheoryArgs),
    /// Re-run the experiment recorded in a train report and compare.
    Replay { report: PathBuf },
    /// Write a synthetic dataset in its text format.
    Gen {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
        /// Destination for held-out data (svm test examples, mc cells).
        #[arg(long)]
        test_out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    FullEdge,
    SingleComponent,
}

impl From<ModeArg> for SamplingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FullEdge => SamplingMode::FullEdgeWithoutReplacement,
            ModeArg::SingleComponent => SamplingMode::SingleComponentWithReplacement,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    /// Initial stepsize.
    #[arg(long)]
    gamma: Option<f64>,
    /// Stepsize decay per epoch.
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    delay_ns: u64,
    #[arg(long, value_enum, default_value = "full-edge")]
    mode: ModeArg,
    /// Pick γ by a doubling/halving probe of two serial epochs per
    /// candidate (heuristic), starting from --gamma or 1e-3.
    #[arg(long)]
    gamma_search: bool,
}

impl RunArgs {
    fn config(&self, scheduler: &str, threads: usize) -> RunConfig {
        RunConfig {
            scheduler: scheduler.into(),
            threads,
            epochs: self.epochs,
            mode: self.mode.into(),
            seed: self.seed,
            delay_ns: self.delay_ns,
        }
    }

    fn schedule(
        &self,
        problem: &dyn hogwild::CostFunction,
        base: &RunConfig,
    ) -> Result<StepSchedule> {
        let gamma = if self.gamma_search {
            let found = gamma_search(problem, base, self.beta, self.gamma.unwrap_or(1e-3))?;
            eprintln!(
                "gamma search: chose {} after {} probes",
                found.gamma,
                found.probes.len()
            );
            found.gamma
        } else {
            match self.gamma {
                Some(g) => g,
                None => bail!("--gamma is required (or pass --gamma-search)"),
            }
        };
        Ok(StepSchedule::new(gamma, self.beta)?)
    }
}

#[derive(Debug, Clone, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = "hogwild")]
    scheduler: String,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Report destination.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct TheoryArgs {
    /// Strong convexity modulus.
    #[arg(long = "c")]
    c: Option<f64>,
    /// Gradient Lipschitz constant.
    #[arg(long = "L")]
    l: Option<f64>,
    /// Bound on the scaled subgradient norm.
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Maximum lag, usually the thread count.
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Initial squared distance to the optimum.
    #[arg(long, default_value_t = 1.0)]
    d0: f64,
    /// Backoff factor for the two-phase bound (default: the optimal one).
    #[arg(long)]
    beta: Option<f64>,
    /// Evaluate the fixed point at this stepsize instead of the derived one.
    #[arg(long)]
    gamma: Option<f64>,
    /// Estimate M, c, L, Ω, Δ, ρ from the dataset; explicit flags override.
    #[arg(long)]
    estimate: bool,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[command(flatten)]
    data: DataArgs,
}

/// Everything needed to re-run a training experiment.
#[derive(Debug, Serialize, Deserialize)]
struct TrainOutput {
    dataset: DatasetSpec,
    config: RunConfig,
    schedule: StepSchedule,
    stats: GraphStats,
    iterate_digest: String,
    test_metric: Option<f64>,
    report: RunReport,
}

fn stats_for(problem: &dyn hogwild::CostFunction, seed: u64) -> Result<GraphStats> {
    // Exact below a few thousand edges; sampled above.
    Ok(problem
        .hypergraph()
        .compute_stats(StatsMode::Sampled { k: 2000, seed })?)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit_csv(report: &SweepReport, out: Option<&Path>, meta: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => report.write_csv(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        ))?,
        None => report.write_csv(io::stdout().lock())?,
    }
    if let Some(p) = meta {
        write_json(p, report)?;
    }
    Ok(())
}

fn cmd_stats(data: &DataArgs, sampled: Option<usize>, seed: u64) -> Result<()> {
    let ds = data.spec()?.load()?;
    let h = ds.problem.hypergraph();
    let mode = match sampled {
        Some(k) => StatsMode::Sampled { k, seed },
        None => StatsMode::Exact,
    };
    let s = h.compute_stats(mode)?;
    let out = json!({
        "omega": s.omega,
        "delta": s.delta,
        "rho": s.rho,
        "n": h.n(),
        "edges": h.num_edges(),
        "exact": s.exact,
    });
    println!("{out}");
    Ok(())
}

fn train(args: &TrainArgs) -> Result<TrainOutput> {
    let registry = SchedulerRegistry::builtin();
    let scheduler = registry.get(&args.scheduler)?;
    let dataset = args.data.spec()?;
    let ds = dataset.load()?;
    let config = args.run.config(&args.scheduler, args.threads);
    let schedule = args.run.schedule(ds.problem.as_ref(), &config)?;
    let report = scheduler.run(ds.problem.as_ref(), &config, &schedule)?;
    Ok(TrainOutput {
        stats: stats_for(ds.problem.as_ref(), config.seed)?,
        test_metric: ds.test_metric(&report.final_iterate),
        iterate_digest: report.iterate_digest(),
        dataset,
        config,
        schedule,
        report,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.6}"))
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let out = train(args)?;
    write_json(&args.out, &out)?;
    let r = &out.report;
    println!(
        "scheduler={} threads={} epochs={} gamma0={} beta={} wall_seconds={:.6} objective={:.6e} train_metric={} test_metric={} digest={}",
        r.scheduler,
        r.threads,
        r.epochs,
        out.schedule.gamma0,
        out.schedule.beta,
        r.wall_seconds,
        r.final_objective(),
        fmt_opt(r.train_metric),
        fmt_opt(out.test_metric),
        &out.iterate_digest[..16],
    );
    Ok(())
}

fn cmd_replay(path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|source| hogwild::Error::Open {
        path: path.to_path_buf(),
        source,
    })?;
    let recorded: TrainOutput = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a train report", path.display()))?;
    let ds = recorded.dataset.load()?;
    let report = hogwild::run(ds.problem.as_ref(), &recorded.config, &recorded.schedule)?;
    let digest = digest_iterate(&report.final_iterate);
    let out = json!({
        "scheduler": recorded.config.scheduler,
        "threads": recorded.config.threads,
        "recorded_digest": recorded.iterate_digest,
        "replayed_digest": digest,
        "digest_match": digest == recorded.iterate_digest,
        "recorded_objective": recorded.report.final_objective(),
        "replayed_objective": report.final_objective(),
    });
    println!("{out}");
    Ok(())
}

fn with_metadata(
    mut report: SweepReport,
    dataset: DatasetSpec,
    problem: &dyn hogwild::CostFunction,
) -> Result<SweepReport> {
    report.metadata.stats = Some(stats_for(problem, report.metadata.config.seed)?);
    report.metadata.dataset = Some(dataset);
    Ok(report)
}

fn cmd_theory(a: &TheoryArgs) -> Result<()> {
    let mut pc = ProblemConstants {
        c: f64::NAN,
        l: f64::NAN,
        m: f64::NAN,
        omega: f64::NAN,
        delta: f64::NAN,
        rho: f64::NAN,
        tau: a.tau,
    };
    let mut applicable = None;
    if a.estimate {
        let ds = a.data.spec()?.load()?;
        let est = estimate_constants(ds.problem.as_ref(), a.samples, 0, a.tau, StatsMode::Exact)?;
        pc = est.constants;
        applicable = Some(est.applicable);
    }
    let overrides = [
        (&mut pc.c, a.c),
        (&mut pc.l, a.l),
        (&mut pc.m, a.m),
        (&mut pc.omega, a.omega),
        (&mut pc.delta, a.delta),
        (&mut pc.rho, a.rho),
    ];
    for (slot, v) in overrides {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if [pc.c, pc.l, pc.m, pc.omega, pc.delta, pc.rho]
        .iter()
        .any(|v| v.is_nan())
    {
        bail!("pass --c --L --M --omega --delta --rho, or --estimate with a dataset");
    }
    let gamma = match a.gamma {
        Some(g) => g,
        None => gamma_prop1(&pc, a.epsilon, a.theta)?,
    };
    let k = k_prop1(&pc, a.epsilon, a.theta, a.d0)?;
    let fp = a_infinity(&pc, gamma).with_context(|| {
        format!(
            "c·γ = {} must be below 1: the contraction factor 1 − cγ would not be positive",
            pc.c * gamma
        )
    })?;
    let (beta_star, g_star) = optimal_beta();
    let beta = a.beta.unwrap_or(beta_star);
    let spec = RecursionSpec {
        c_r: pc.c * (1.0 - fp.delta_lin),
        b: fp.c_const * pc.m * pc.m / (2.0 * pc.c),
        gamma,
        beta,
        a0: a.d0 / 2.0,
        theta: a.theta,
    };
    let backoff = backoff_total_bound(&spec, a.epsilon)?;
    let out = json!({
        "constants": pc,
        "epsilon": a.epsilon,
        "theta": a.theta,
        "d0": a.d0,
        "gamma": gamma,
        "k": k,
        "a_inf": fp.a_inf,
        "a_inf_exact": fp.a_inf_exact,
        "C": fp.c_const,
        "Q": fp.q,
        "delta_lin": fp.delta_lin,
        "beta": beta,
        "backoff_bound": backoff,
        "beta_star": beta_star,
        "backoff_objective_at_beta_star": g_star,
        "applicable": applicable,
    });
    println!("{out}");
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

fn cmd_gen(data: &DataArgs, out: &Path, test_out: Option<&Path>) -> Result<()> {
    let Some(kind) = data.synthetic else {
        bail!("gen needs --synthetic");
    };
    let mut w = create(out)?;
    match kind {
        Synthetic::Svm => {
            let mut s = synth::svm(
                data.examples + data.test_examples,
                data.features,
                data.nnz,
                data.noise,
                data.data_seed,
            )?;
            let test = s.examples.split_off(data.examples);
            write_svmlight(&mut w, &s.examples)?;
            if let Some(p) = test_out {
                write_svmlight(create(p)?, &test)?;
            }
        }
        Synthetic::Mc => {
            let s = synth::matrix_completion(
                data.rows.unwrap_or(50),
                data.cols.unwrap_or(50),
                data.rank,
                data.fraction,
                data.noise,
                data.data_seed,
            )?;
            write_triplets(&mut w, &s.observed)?;
            if let Some(p) = test_out {
                write_triplets(create(p)?, &s.held_out)?;
            }
        }
        Synthetic::CutGrid => {
            let (_, arcs) = synth::grid_cut(data.side, data.max_weight, data.data_seed)?;
            write_edgelist(&mut w, &arcs)?;
        }
        Synthetic::CutGeometric => {
            let (_, arcs) = synth::geometric_cut(
                data.nodes.unwrap_or(500),
                data.radius,
                data.max_weight,
                data.data_seed,
            )?;
            write_edgelist(&mut w, &arcs)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats {
            data,
            sampled,
            stats_seed,
        } => cmd_stats(&data, sampled, stats_seed),
        Command::Train(args) => cmd_train(&args),
        Command::Sweep {
            data,
            run,
            schedulers,
            threads,
            repeats,
            out,
            meta,
        } => {
            let registry = SchedulerRegistry::builtin();
            for s in &schedulers {
                registry.get(s)?;
            }
            let dataset = data.spec()?;
            let ds = dataset.load()?;
            let base = run.config("hogwild", 1);
            let schedule = run.schedule(ds.problem.as_ref(), &base)?;
            let report = thread_sweep(
                &registry,
                ds.problem.as_ref(),
                &schedulers,
                &threads,
                repeats,
                &base,
                &schedule,
            )?;
            let report = with_metadata(report, dataset, ds.problem.as_ref())?;
            emit_csv(&report, out.as_deref(), meta.as_deref())
        }
        Command::DelaySweep {
            data,
            run,
            delays,
            threads,
            repeats,
            out,
            meta,
        } => {
            let registry = SchedulerRegistry::builtin();
            let dataset = data.spec()?;
            let ds = dataset.load()?;
            let base = run.config("hogwild", threads);
            let schedule = run.schedule(ds.problem.as_ref(), &base)?;
            let report = delay_sweep(
                &registry,
                ds.problem.as_ref(),
                &delays,
                threads,
                repeats,
                &base,
                &schedule,
            )?;
            let report = with_metadata(report, dataset, ds.problem.as_ref())?;
            emit_csv(&report, out.as_deref(), meta.as_deref())
        }
        Command::Theory(args) => cmd_theory(&args),
        Command::Replay { report } => cmd_replay(&report),
        Command::Gen {
            data,
            out,
            test_out,
        } => cmd_gen(&data, &out, test_out.as_deref()),
    }
}

/// 2 for problems with the input data, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<hogwild::Error>() {
            return if e.is_data_error() { 2 } else { 1 };
        }
        if cause.is::<serde_json::Error>() || cause.is::<io::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
