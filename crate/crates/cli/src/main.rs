use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hpq_cli::*;
use hpq_core::geom::Mode;
use hpq_core::okey_dokey::depth_for_eps;
use hpq_core::testkit::{gen_convex, Shape};

#[derive(Parser)]
#[command(name = "hpq", version, about = "Halfplane farthest and nearest point queries on convex point sets")]
#[command(
    after_help = "Exit status: 0 success, 1 verification failure, 2 usage or input error.\nHPQ_THREADS caps the worker threads used by query sweeps."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a convex instance file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "circle", value_parser = parse_shape)]
        shape: Shape,
        #[arg(long, value_enum, default_value = "farthest")]
        mode: ModeArg,
        /// Output file. Standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a structure against brute force on random queries.
    Verify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        structure: StructureOpts,
        #[arg(long, default_value_t = 10_000)]
        queries: usize,
        /// Seed for the query sample.
        #[arg(long, default_value_t = 1)]
        query_seed: u64,
    },
    /// Replay insertions and report pointer changes per step.
    ///
    /// CSV columns: step, delta, cumulative, potential, grappa_writes.
    /// delta is the number of parent/child relations changed by the
    /// insertion, potential the running flarb potential, grappa_writes the
    /// persistent cell writes of that step. A summary with the fitted
    /// constant cumulative / (n lg n) goes to standard error. Exits 1 when
    /// the calibrated bound is exceeded.
    BenchFlarb {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time queries and report their locate budgets.
    ///
    /// CSV columns: query, structure, budget, nanos. budget counts locator
    /// calls for okey-dokey, prefix or suffix subqueries for interval, and
    /// is 1 for prefix. nanos is wall time and is the only column that
    /// varies between runs.
    BenchQuery {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        structure: StructureOpts,
        #[arg(long, default_value_t = 10_000)]
        queries: usize,
        #[arg(long, default_value_t = 1)]
        query_seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report stored cells and history entries against their growth models.
    ///
    /// CSV columns: n, okey_cells, okey_model, interval_history,
    /// prefix_history, history_model. okey_model is n^((2k+1)/(2k-1)) and
    /// history_model is n lg^2 n. Fitted constants go to standard error.
    Space {
        /// Comma-separated instance sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256, 512, 1024, 2048, 4096])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "circle", value_parser = parse_shape)]
        shape: Shape,
        /// Okey-Dokey recursion depth k.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Where sites come from: an instance file, or a generated instance.
#[derive(Args)]
struct Source {
    /// Instance file.
    #[arg(long = "in", conflicts_with_all = ["n", "seed", "shape"])]
    input: Option<PathBuf>,
    /// Generate this many sites instead of reading a file.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_shape)]
    shape: Option<Shape>,
    /// Overrides the instance file's mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args)]
struct StructureOpts {
    #[arg(long, value_enum)]
    structure: StructureArg,
    /// Okey-Dokey query exponent; sets k = ceil(0.5 + 1/eps).
    #[arg(long, conflicts_with = "depth")]
    eps: Option<f64>,
    /// Okey-Dokey recursion depth k. Defaults to 2.
    #[arg(long)]
    depth: Option<usize>,
}

impl StructureOpts {
    fn depth(&self) -> Outcome<usize> {
        match (self.eps, self.depth) {
            (Some(e), _) => depth_for_eps(e).map_err(|e| Failure::Input(e.to_string())),
            (None, Some(0)) => Err(Failure::Input("depth must be at least 1".into())),
            (None, Some(k)) => Ok(k),
            (None, None) => Ok(2),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    s.parse().map_err(|e: hpq_core::Error| e.to_string())
}

fn load(src: &Source) -> Outcome<(hpq_core::ConvexSequence, Mode)> {
    let file = match (&src.input, src.n) {
        (Some(path), _) => InstanceFile::load(path)?,
        (None, Some(n)) => {
            let inst =
                gen_convex(n, src.seed.unwrap_or(1), src.shape.unwrap_or(Shape::Circle)).map_err(|e| Failure::Input(e.to_string()))?;
            InstanceFile::new(Mode::Farthest, &inst.sites)
        }
        (None, None) => return Err(Failure::Input("give --in FILE or --n N".into())),
    };
    let mode = src.mode.unwrap_or(file.mode).into();
    Ok((file.checked_sites()?, mode))
}

fn output(out: &Option<PathBuf>) -> Outcome<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Input(format!("cannot create {}: {e}", p.display())))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<R: serde::Serialize, D: serde::Serialize + ?Sized>(rows: &[R], doc: &D, format: Format, out: &Option<PathBuf>) -> Outcome<()> {
    let mut w = output(out)?;
    match format {
        Format::Csv => write_csv(rows, &mut w)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, doc).map_err(|e| Failure::Input(e.to_string()))?;
            writeln!(w).map_err(|e| Failure::Input(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Failure::Input(e.to_string()))
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Gen { n, seed, shape, mode, out } => {
            let inst = gen_convex(n, seed, shape).map_err(|e| Failure::Input(e.to_string()))?;
            let text = InstanceFile::new(mode.into(), &inst.sites).to_json();
            let mut w = output(&out)?;
            writeln!(w, "{text}").map_err(|e| Failure::Input(e.to_string()))
        }
        Command::Verify { source, structure, queries, query_seed } => {
            let threads = thread_count()?;
            let (sites, mode) = load(&source)?;
            let pts = sites.points().to_vec();
            let built = Built::build(structure.structure, sites, mode, structure.depth()?)?;
            let sample = samples(&pts, queries, query_seed);
            let checked = verify(&built, &pts, mode, structure.structure, &sample, threads)?;
            println!("{}: {checked} queries on {} sites match brute force", structure.structure, pts.len());
            Ok(())
        }
        Command::BenchFlarb { source, format, out } => {
            let (sites, mode) = load(&source)?;
            let report = bench_flarb(sites.points(), mode)?;
            emit(&report.steps, &report, format, &out)?;
            eprintln!(
                "n {} cumulative {} fitted constant {:.4} worst step {:.4} bound {}",
                report.n, report.cumulative, report.fitted_constant, report.worst_step, report.bound_constant
            );
            if report.holds() {
                Ok(())
            } else {
                Err(Failure::Mismatch(format!("amortized bound C = {} exceeded", report.bound_constant)))
            }
        }
        Command::BenchQuery { source, structure, queries, query_seed, format, out } => {
            let threads = thread_count()?;
            let (sites, mode) = load(&source)?;
            let pts = sites.points().to_vec();
            let built = Built::build(structure.structure, sites, mode, structure.depth()?)?;
            let sample = samples(&pts, queries, query_seed);
            let rows = bench_queries(&built, structure.structure, &sample, threads);
            emit(&rows, &rows, format, &out)?;
            let worst = rows.iter().map(|r| r.budget).max().unwrap_or(0);
            let mean = rows.iter().map(|r| r.nanos).sum::<u128>() as f64 / rows.len().max(1) as f64;
            eprintln!("{}: {} queries, max budget {worst}, mean {mean:.0} ns", structure.structure, rows.len());
            Ok(())
        }
        Command::Space { sizes, seed, shape, depth, format, out } => {
            if depth == 0 {
                return Err(Failure::Input("depth must be at least 1".into()));
            }
            let instances = sizes
                .iter()
                .map(|&n| gen_convex(n, seed, shape).map(|i| i.sites).map_err(|e| Failure::Input(e.to_string())))
                .collect::<Outcome<Vec<_>>>()?;
            let rows = space(&instances, depth, Mode::Farthest)?;
            emit(&rows, &rows, format, &out)?;
            for (name, c, spread) in space_fits(&rows) {
                eprintln!("{name}: fitted constant {c:.3}, worst ratio to fit {spread:.3}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hpq: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
