use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use histci::api::{self, ErrorBody, ErrorResponse, Group};
use histci::piecewise::NegativityMode;
use histci::service::{self, ServiceConfig};
use histci::sim::{self, CurveSpec, ExperimentConfig};
use histci::{EstimatorOptions, Error, GroupedData, Method};

#[derive(Parser)]
#[command(name = "histci", version, about = "Quantile confidence intervals from grouped data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point estimate and confidence interval for one quantile.
    Ci {
        /// CSV with columns lower,upper,freq[,mean].
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        shared: Shared,
        /// Sample size, when the frequencies are not counts.
        #[arg(long)]
        n: Option<f64>,
    },
    /// Interval for the difference of one quantile between two groups.
    CiDiff {
        /// Two CSV files: group x, then group y.
        #[arg(long, num_args = 2, required = true)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        shared: Shared,
        /// Method for group y, when it differs from --method.
        #[arg(long)]
        method_y: Option<Method>,
    },
    /// Run a coverage experiment described by a TOML file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Coverage over a grid of probabilities, from a TOML file.
    Curve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit a generalized lambda distribution by percentile matching.
    FitGld {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Serve the JSON API over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Replication limit per simulation cell.
        #[arg(long, default_value_t = service::DEFAULT_MAX_REPS)]
        max_reps: usize,
    },
}

#[derive(Args)]
struct Shared {
    #[arg(long, default_value = "histogram")]
    method: Method,
    /// Probability of the quantile, in (0, 1).
    #[arg(long, value_parser = probability)]
    p: f64,
    /// Confidence level, in (0, 1).
    #[arg(long, default_value_t = 0.95, value_parser = probability)]
    level: f64,
    /// Linear method: model the last bin as an unbounded exponential tail.
    #[arg(long)]
    unbounded_tail: bool,
    /// Linear method: clip a negative segment instead of failing.
    #[arg(long)]
    clip_negative: bool,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

impl Shared {
    fn options(&self) -> EstimatorOptions {
        let mut options = EstimatorOptions::default();
        options.linear.unbounded_tail = self.unbounded_tail;
        if self.clip_negative {
            options.linear.negativity = NegativityMode::Clip;
        }
        options
    }
}

fn probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(format!("{p} is outside the open interval (0, 1)"))
    }
}

fn read_data(path: &Path) -> histci::Result<GroupedData> {
    let file = fs::File::open(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    GroupedData::from_csv(file)
}

fn read_text(path: &Path) -> histci::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn write_output(out: Option<&Path>, text: &str) -> histci::Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(Error::from),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn thread_pool(threads: Option<usize>) -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    builder.build().expect("thread pool")
}

fn run(command: Command) -> histci::Result<()> {
    match command {
        Command::Ci { input, shared, n } => {
            let data = read_data(&input)?;
            let resp = api::estimate(&api::EstimateRequest {
                bins: data.bins().to_vec(),
                method: shared.method,
                p: shared.p,
                level: shared.level,
                n_override: n,
                options: shared.options(),
            })?;
            if shared.json {
                print_json(&resp);
            } else {
                println!("method    {}", resp.method);
                println!("p         {}", resp.p);
                println!("n         {}", resp.n);
                println!("estimate  {}", resp.point);
                println!("density   {}", resp.density);
                println!("{:<9} [{}, {}]", format!("{}%", resp.level * 100.0), resp.lower, resp.upper);
                println!("width     {}", resp.width);
            }
        }
        Command::CiDiff {
            input,
            shared,
            method_y,
        } => {
            let x = read_data(&input[0]).map_err(|e| Error::InGroup {
                group: "x",
                source: Box::new(e),
            })?;
            let y = read_data(&input[1]).map_err(|e| Error::InGroup {
                group: "y",
                source: Box::new(e),
            })?;
            let resp = api::estimate_difference(&api::DiffRequest {
                x: Group {
                    bins: x.bins().to_vec(),
                    method: shared.method,
                    n_override: None,
                },
                y: Group {
                    bins: y.bins().to_vec(),
                    method: method_y.unwrap_or(shared.method),
                    n_override: None,
                },
                p: shared.p,
                level: shared.level,
                options: shared.options(),
            })?;
            if shared.json {
                print_json(&resp);
            } else {
                println!("p           {}", resp.p);
                println!("x           {} (n {}, {}, density {})", resp.x.point, resp.x.n, resp.x.method, resp.x.density);
                println!("y           {} (n {}, {}, density {})", resp.y.point, resp.y.n, resp.y.method, resp.y.density);
                println!("difference  {}", resp.difference);
                println!("{:<11} [{}, {}]", format!("{}%", resp.level * 100.0), resp.lower, resp.upper);
                println!("width       {}", resp.width);
            }
        }
        Command::Simulate { config, out, threads } => {
            let experiment = ExperimentConfig::from_toml(&read_text(&config)?)?;
            let cells = experiment.all_cells();
            let rows = thread_pool(threads).install(|| {
                sim::run_table(&cells, |done, total, row| {
                    let c = &row.cell;
                    let status = match &row.result {
                        Ok(r) => format!("coverage {:.3}, {} failures", r.coverage, r.failures),
                        Err(e) => format!("failed: {e}"),
                    };
                    eprintln!(
                        "[{done}/{total}] {} n={} p={} {} bins={}: {status}",
                        c.distribution.family(),
                        c.n,
                        c.p,
                        c.method,
                        c.binning.label()
                    );
                })
            });
            write_output(out.as_deref(), &sim::table_to_csv(&rows))?;
        }
        Command::Curve { config, out, threads } => {
            let spec = CurveSpec::from_toml(&read_text(&config)?)?;
            let points = thread_pool(threads).install(|| sim::coverage_curve(&spec))?;
            write_output(out.as_deref(), &sim::curve_to_csv(&points))?;
        }
        Command::FitGld { input, json } => {
            let data = read_data(&input)?;
            let report = api::fit_gld(&api::FitRequest {
                bins: data.bins().to_vec(),
                config: Default::default(),
            })?;
            if json {
                print_json(&report);
            } else {
                let g = &report.params;
                println!("lambda     {}", g.lambda);
                println!("eta        {}", g.eta);
                println!("alpha      {}", g.alpha);
                println!("beta       {}", g.beta);
                println!("residual   {:e}", report.residual);
                println!("converged  {}", report.converged);
                println!("iterations {}", report.iterations);
            }
        }
        Command::Serve { addr, max_reps } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(addr, ServiceConfig { max_reps }))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = matches!(
        &cli.command,
        Command::Ci { shared: Shared { json: true, .. }, .. }
            | Command::CiDiff { shared: Shared { json: true, .. }, .. }
            | Command::FitGld { json: true, .. }
    );
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                print_json(&ErrorResponse {
                    error: ErrorBody::from(&e),
                });
            }
            match e.location() {
                Some(loc) if !e.to_string().contains(&loc) => eprintln!("error: {e} (at {loc})"),
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
