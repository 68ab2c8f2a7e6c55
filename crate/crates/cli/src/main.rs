//! `forest-attack`: run edge-attack strategies on an edge-list graph and emit
//! per-step results or a comparison table.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use forest_attack::attack::{exact_prefix_deltas, run_attack, AttackOptions, Strategy};
use forest_attack::bounds::compute_bounds;
use forest_attack::oracle::{optimum_attack, DEFAULT_BUDGET};
use forest_attack::sketch::{Projection, SketchDim};
use forest_attack::{parse_edge_list, Error, ErrorClass, Graph, PairCounting};

#[derive(Parser)]
#[command(name = "forest-attack", version, about = "Edge attacks that maximize the forest index of a graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select k edges with one strategy and report every step.
    Attack(AttackArgs),
    /// Exact forest-index increase of several strategies for k = 1..=k_max.
    Compare(CompareArgs),
    /// Spectral bounds on the greedy approximation ratio.
    Bounds {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Counting {
    Unordered,
    Ordered,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjectionArg {
    Rademacher,
    Gaussian,
}

#[derive(clap::Args)]
struct Common {
    /// Edge list: `u v [weight]` per line, `#` or `%` comments.
    #[arg(long)]
    input: PathBuf,
    /// Sketch error parameter for the fast method.
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Relative residual target of the iterative solver.
    #[arg(long, default_value_t = 1e-8)]
    solver_tol: f64,
    /// `auto`, `theory`, or a fixed number of projection rows.
    #[arg(long, default_value = "auto")]
    sketch_dim: String,
    #[arg(long, value_enum, default_value_t = ProjectionArg::Rademacher)]
    projection: ProjectionArg,
    /// Maximum subsets the optimum search may enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// Largest node count handled with a dense forest matrix.
    #[arg(long, default_value_t = 4000)]
    dense_limit: usize,
    /// Pair convention for betweenness scores.
    #[arg(long, value_enum, default_value_t = Counting::Unordered)]
    pair_counting: Counting,
}

#[derive(clap::Args)]
struct AttackArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    k: usize,
    /// greedy | fast | optimum | random | betweenness | degprod | degsum | topfegc
    #[arg(long)]
    method: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Record wall-clock milliseconds per step (otherwise written as 0).
    #[arg(long)]
    timing: bool,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated methods.
    #[arg(long, default_value = "greedy,fast,random,betweenness,degprod,degsum,topfegc")]
    methods: String,
    #[arg(long)]
    k_max: usize,
    /// Seeds averaged for the random method.
    #[arg(long, default_value_t = 20)]
    random_trials: u64,
}

fn options(c: &Common) -> Result<AttackOptions, Error> {
    let mut opts = AttackOptions {
        seed: c.seed,
        budget: c.budget,
        counting: match c.pair_counting {
            Counting::Unordered => PairCounting::Unordered,
            Counting::Ordered => PairCounting::Ordered,
        },
        ..AttackOptions::default()
    };
    opts.sketch.epsilon = c.epsilon;
    opts.sketch.solver.rel_tolerance = c.solver_tol;
    opts.sketch.solver.validate()?;
    opts.sketch.projection = match c.projection {
        ProjectionArg::Rademacher => Projection::Rademacher,
        ProjectionArg::Gaussian => Projection::Gaussian,
    };
    opts.sketch.dim = match c.sketch_dim.as_str() {
        "auto" => SketchDim::default(),
        "theory" => SketchDim::Theoretical,
        other => match other.parse::<usize>() {
            Ok(p) if p > 0 => SketchDim::Fixed(p),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "--sketch-dim must be auto, theory or a positive integer, got '{other}'"
                )))
            }
        },
    };
    opts.forest.dense_limit = c.dense_limit;
    Ok(opts)
}

fn load(path: &PathBuf) -> Result<Graph, Error> {
    parse_edge_list(BufReader::new(File::open(path)?))
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn attack(args: &AttackArgs) -> Result<(), Error> {
    let g = load(&args.common.input)?;
    let opts = options(&args.common)?;
    let method: Strategy = args.method.parse()?;
    let mut result = run_attack(&g, args.k, method, &opts)?;
    if !args.timing {
        result.picks.iter_mut().for_each(|p| p.elapsed_ms = 0.0);
    }
    let mut out = sink(&args.common.output)?;
    match args.format {
        Format::Csv => result.write_csv(&g, &mut out)?,
        Format::Json => result.write_json(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<(), Error> {
    let g = load(&args.common.input)?;
    let opts = options(&args.common)?;
    let methods = args
        .methods
        .split(',')
        .map(|s| s.trim().parse::<Strategy>())
        .collect::<Result<Vec<_>, _>>()?;
    if args.k_max > g.edge_count() {
        return Err(Error::InvalidArgument(format!(
            "--k-max {} exceeds the number of edges ({})",
            args.k_max,
            g.edge_count()
        )));
    }
    let mut w = csv::Writer::from_writer(sink(&args.common.output)?);
    w.write_record(["method", "k", "delta_rho"])?;
    for method in methods {
        let deltas: Vec<Option<f64>> = match method {
            Strategy::Optimum => (1..=args.k_max)
                .map(|k| match optimum_attack(&g, k, opts.budget) {
                    Ok((_, v)) => Ok(Some(v)),
                    Err(Error::Budget { required, .. }) => {
                        eprintln!("optimum skipped for k = {k}: {required} subsets exceed the budget");
                        Ok(None)
                    }
                    Err(e) => Err(e),
                })
                .collect::<Result<_, _>>()?,
            Strategy::Random => {
                let mut sums = vec![0.0; args.k_max];
                let trials = args.random_trials.max(1);
                for t in 0..trials {
                    let o = AttackOptions {
                        seed: opts.seed.wrapping_add(t),
                        ..opts
                    };
                    let r = run_attack(&g, args.k_max, Strategy::Random, &o)?;
                    for (s, d) in sums.iter_mut().zip(exact_prefix_deltas(&g, &r.edges(), &opts)?) {
                        *s += d;
                    }
                }
                sums.into_iter().map(|s| Some(s / trials as f64)).collect()
            }
            _ => {
                let r = run_attack(&g, args.k_max, method, &opts)?;
                exact_prefix_deltas(&g, &r.edges(), &opts)?.into_iter().map(Some).collect()
            }
        };
        for (i, d) in deltas.into_iter().enumerate() {
            if let Some(d) = d {
                w.write_record([method.name().to_string(), (i + 1).to_string(), d.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn bounds(input: &PathBuf) -> Result<(), Error> {
    let g = load(input)?;
    let b = compute_bounds(&g);
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &b).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Input => 1,
        ErrorClass::Capacity => 2,
        ErrorClass::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Attack(a) => attack(a),
        Command::Compare(c) => compare(c),
        Command::Bounds { input } => bounds(input),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
