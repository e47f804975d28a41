use std::io::{Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sfg_cli::app::{self, AnalyzeRequest, AppError, ComputeOptions, OutputFormat, TfSource};

#[derive(Parser)]
#[command(name = "sfg", version, about = "Transfer functions of signal flow graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the transfer function of a graph file.
    Compute {
        /// Graph file, or `-` for stdin.
        file: PathBuf,
        /// Scale so the plain denominator term has leading coefficient 1.
        #[arg(long)]
        monic: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
        /// Print the variable as z.
        #[arg(long)]
        discrete: bool,
        /// List the loops of the closed graph on stderr.
        #[arg(long)]
        dump_loops: bool,
        /// List the non-touching loop combinations on stderr.
        #[arg(long)]
        dump_combos: bool,
    },
    /// Frequency response, stability, poles and zeros, order reduction.
    Analyze(AnalyzeArgs),
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Evaluate the graph at one point by solving its node equations.
    Oracle {
        file: PathBuf,
        /// Sample point as RE,IM.
        #[arg(long = "s", allow_hyphen_values = true)]
        point: String,
        /// Symbol value, SYM=[num]/[den]. Repeatable.
        #[arg(long = "set")]
        set: Vec<String>,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Graph file, or `-` for stdin.
    #[arg(required_unless_present = "tf", conflicts_with = "tf")]
    file: Option<PathBuf>,
    /// Inline transfer function, e.g. "num=[8,2] den=[6,11,6,1]".
    #[arg(long)]
    tf: Option<String>,
    /// Frequency response as CSV.
    #[arg(long)]
    bode: bool,
    /// Nyquist points (re, im) as CSV.
    #[arg(long)]
    nyquist: bool,
    #[arg(long)]
    routh: bool,
    #[arg(long)]
    roots: bool,
    /// Continued-fraction reduction to this order.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    reduce: Option<u64>,
    #[arg(long)]
    wmin: Option<f64>,
    #[arg(long)]
    wmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Symbol value, SYM=[num]/[den]. Repeatable.
    #[arg(long = "set")]
    set: Vec<String>,
    #[arg(long)]
    monic: bool,
    #[arg(long)]
    discrete: bool,
    /// Print the full result as JSON, as the service returns it.
    #[arg(long)]
    json: bool,
}

fn read_input(path: &Path) -> Result<String, AppError> {
    let mut text = String::new();
    let res = if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;
    Ok(text)
}

fn graph_file(path: &Path) -> Result<sfg_core::graph::GraphFile, AppError> {
    serde_json::from_str(&read_input(path)?)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

fn analyze_request(a: AnalyzeArgs) -> Result<AnalyzeRequest, AppError> {
    let mut set = std::collections::BTreeMap::new();
    for item in &a.set {
        let (sym, _) = app::parse_assignment(item)?;
        let value = item.split_once('=').map(|(_, v)| v.to_string()).unwrap_or_default();
        set.insert(sym.name().to_string(), value);
    }
    Ok(AnalyzeRequest {
        graph: a.file.as_deref().map(graph_file).transpose()?,
        tf: a.tf.map(TfSource::Text),
        set,
        monic: a.monic,
        discrete: a.discrete,
        bode: a.bode,
        nyquist: a.nyquist,
        routh: a.routh,
        roots: a.roots,
        reduce: a.reduce.map(|n| n as usize),
        wmin: a.wmin,
        wmax: a.wmax,
        points: a.points,
    })
}

fn run(cli: Cli) -> Result<String, AppError> {
    match cli.command {
        Command::Compute {
            file,
            monic,
            format,
            discrete,
            dump_loops,
            dump_combos,
        } => {
            let g = app::parse_graph_text(&read_input(&file)?)?;
            let opts = ComputeOptions {
                monic,
                discrete,
                format,
                dump_loops,
                dump_combos,
            };
            let out = app::compute(&g, &opts)?;
            eprint!("{}", out.diagnostics);
            Ok(out.output)
        }
        Command::Analyze(a) => {
            let json = a.json;
            let resp = app::analyze(&analyze_request(a)?)?;
            if json {
                Ok(app::render_json(&resp))
            } else {
                app::render_analysis(&resp)
            }
        }
        Command::Serve { port, host } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| AppError::Input(e.to_string()))?;
            rt.block_on(sfg_cli::service::serve(SocketAddr::new(host, port)))
                .map_err(|e| AppError::Input(format!("serve: {e}")))?;
            Ok(String::new())
        }
        Command::Oracle { file, point, set } => {
            let g = app::parse_graph_text(&read_input(&file)?)?;
            let set = set.iter().map(|s| app::parse_assignment(s)).collect::<Result<Vec<_>, _>>()?;
            app::oracle(&g, app::parse_point(&point)?, &set)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
