//! Command logic shared by the `sfg` binary and the HTTP service. Every
//! function here is pure: text in, text or a serializable value out.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use sfg_core::analysis::{
    default_sweep, frequency_response, log_sweep, moment_report, poles_zeros, reduce_order_cf,
    routh_stability, AnalysisError, FrequencyPoint, MomentReport, RootSet, RouthReport,
};
use sfg_core::format::{
    render_structured, render_table, sweep_csv, to_structured, FormatError,
    StructuredTransfer, Variable,
};
use sfg_core::graph::{GraphError, GraphFile, SfgGraph, SymbolId};
use sfg_core::poly::RationalFn;
use sfg_core::shannon::{
    numeric_oracle, run_pipeline, substitute_symbol, PipelineConfig, PipelineRun, ShannonError,
    TransferFunction,
};

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pipeline(#[from] ShannonError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

impl AppError {
    /// Stable machine-readable name used in service error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Input(_) | AppError::Format(_) => "invalid-input",
            AppError::Graph(_) => "invalid-graph",
            AppError::Pipeline(ShannonError::NoForwardPath) => "no-forward-path",
            AppError::Pipeline(ShannonError::Graph(_)) => "invalid-graph",
            AppError::Pipeline(_) => "pipeline",
            AppError::Analysis(_) => "analysis",
        }
    }

    /// 2 when the output cannot be reached from the input, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Pipeline(ShannonError::NoForwardPath) => 2,
            _ => 1,
        }
    }

    /// True for errors caused by a malformed request rather than by the
    /// graph or transfer function it describes.
    pub fn is_validation(&self) -> bool {
        matches!(self, AppError::Input(_) | AppError::Format(_) | AppError::Graph(_))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Structured,
}

#[derive(Debug, Clone, Default)]
pub struct ComputeOptions {
    pub monic: bool,
    pub discrete: bool,
    pub format: OutputFormat,
    pub dump_loops: bool,
    pub dump_combos: bool,
}

fn variable(discrete: bool) -> Variable {
    if discrete { Variable::Z } else { Variable::S }
}

pub fn parse_graph_text(text: &str) -> Result<SfgGraph, AppError> {
    Ok(sfg_core::parse_graph(text)?)
}

/// Main output of `compute`, plus the optional loop and combination dumps.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeOutput {
    pub output: String,
    pub diagnostics: String,
}

pub fn compute(g: &SfgGraph, opts: &ComputeOptions) -> Result<ComputeOutput, AppError> {
    let run = run_pipeline(g, &PipelineConfig::default())?;
    let mut diagnostics = String::new();
    if opts.dump_loops {
        diagnostics.push_str(&dump_loops(&run));
    }
    if opts.dump_combos {
        diagnostics.push_str(&dump_combos(&run));
    }
    let mut tf = run.transfer?;
    if opts.monic {
        tf = tf.monic();
    }
    let var = variable(opts.discrete);
    let output = match opts.format {
        OutputFormat::Table => render_table(&tf, var),
        OutputFormat::Structured => render_structured(&tf, var),
    };
    Ok(ComputeOutput { output, diagnostics })
}

fn dump_loops(run: &PipelineRun) -> String {
    let mut out = format!("{} loops\n", run.loops.len());
    for (l, gain) in run.loops.iter().zip(&run.gains) {
        let path: Vec<String> = l.node_seq.iter().chain(l.node_seq.first()).map(u32::to_string).collect();
        let _ = write!(out, "  L{}: {}  gain {}", l.index, path.join(" -> "), gain.rational);
        if !gain.monomial.is_one() {
            let _ = write!(out, " * {}", gain.monomial);
        }
        out.push('\n');
    }
    out
}

fn dump_combos(run: &PipelineRun) -> String {
    let mut out = String::new();
    for t in &run.tables {
        let rows: Vec<String> = t
            .rows
            .iter()
            .map(|r| {
                let ids: Vec<String> = r.loops.iter().map(|i| format!("L{i}")).collect();
                format!("{{{}}}", ids.join(","))
            })
            .collect();
        let _ = writeln!(out, "order {} ({} rows): {}", t.order, t.len(), rows.join(" "));
    }
    out
}

/// Symbol value in `SYM=VALUE` form, where `VALUE` is `[num]`,
/// `[num]/[den]` or `num=[..] den=[..]`.
pub fn parse_assignment(text: &str) -> Result<(SymbolId, RationalFn), AppError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| AppError::Input(format!("expected SYM=VALUE, got `{text}`")))?;
    let sym = SymbolId::new(name.trim())?;
    Ok((sym, parse_rational(value)?))
}

pub fn parse_rational(text: &str) -> Result<RationalFn, AppError> {
    let text = text.trim();
    let bad = |e: sfg_core::poly::PolyError| AppError::Input(format!("bad value `{text}`: {e}"));
    if text.contains("num") {
        return text.parse::<RationalFn>().map_err(bad);
    }
    let (num, den) = match text.split_once("]/[") {
        Some((n, d)) => (format!("{n}]"), format!("[{d}")),
        None => (text.to_string(), "[1]".to_string()),
    };
    RationalFn::new(num.parse().map_err(bad)?, den.parse().map_err(bad)?).map_err(bad)
}

/// Transfer function source for `analyze`: a graph, inline text
/// `num=[..] den=[..]`, or the structured transfer format.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum TfSource {
    Text(String),
    Structured(StructuredTransfer),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeRequest {
    pub graph: Option<GraphFile>,
    pub tf: Option<TfSource>,
    /// Symbol values, `SYM -> "[num]/[den]"`.
    pub set: BTreeMap<String, String>,
    pub monic: bool,
    pub discrete: bool,
    pub bode: bool,
    pub nyquist: bool,
    pub routh: bool,
    pub roots: bool,
    pub reduce: Option<usize>,
    pub wmin: Option<f64>,
    pub wmax: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleZero {
    pub zeros: RootSet,
    pub poles: RootSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduction {
    pub order: usize,
    pub transfer: StructuredTransfer,
    pub moments: MomentReport,
    /// Sweep of the reduced model over the same frequencies as `bode`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bode: Option<Vec<FrequencyPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeResponse {
    pub transfer: StructuredTransfer,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bode: Option<Vec<FrequencyPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nyquist: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub routh: Option<RouthReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roots: Option<PoleZero>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<Reduction>,
}

/// Computes (from a graph) or reads the transfer function and substitutes
/// every assigned symbol.
pub fn resolve_transfer(req: &AnalyzeRequest) -> Result<TransferFunction, AppError> {
    let mut tf = match (&req.graph, &req.tf) {
        (Some(file), None) => {
            let g = SfgGraph::try_from(file.clone())?;
            run_pipeline(&g, &PipelineConfig::default())?.transfer?
        }
        (None, Some(TfSource::Text(text))) => {
            let r = parse_rational(text)?;
            let (b, a) = r.into_parts();
            TransferFunction::from_polys(b, a)?
        }
        (None, Some(TfSource::Structured(st))) => st.to_transfer()?,
        (Some(_), Some(_)) => return Err(AppError::Input("give either a graph or a tf, not both".into())),
        (None, None) => return Err(AppError::Input("a graph or a tf is required".into())),
    };
    for (name, value) in &req.set {
        let sym = SymbolId::new(name.as_str())?;
        tf = substitute_symbol(&tf, &sym, &parse_rational(value)?)?;
    }
    Ok(if req.monic { tf.monic() } else { tf })
}

pub fn sweep(req: &AnalyzeRequest) -> Result<Vec<f64>, AppError> {
    if req.wmin.is_none() && req.wmax.is_none() && req.points.is_none() {
        return Ok(default_sweep());
    }
    Ok(log_sweep(
        req.wmin.unwrap_or(1e-2),
        req.wmax.unwrap_or(1e2),
        req.points.unwrap_or(400),
    )?)
}

pub fn analyze(req: &AnalyzeRequest) -> Result<AnalyzeResponse, AppError> {
    let tf = resolve_transfer(req)?;
    let var = variable(req.discrete);
    let wants_sweep = req.bode || req.nyquist;
    let omegas = if wants_sweep { sweep(req)? } else { Vec::new() };
    let points = if wants_sweep { Some(frequency_response(&tf, &omegas)?) } else { None };
    let needs_numeric = req.routh || req.roots || req.reduce.is_some();
    let numeric = if needs_numeric {
        Some(tf.numeric().ok_or(AnalysisError::Symbolic)?)
    } else {
        None
    };
    let reduced = match req.reduce {
        Some(order) => {
            let red = reduce_order_cf(&tf, order)?;
            let bode = if req.bode { Some(frequency_response(&red, &omegas)?) } else { None };
            Some(Reduction {
                order,
                transfer: to_structured(&red, var),
                moments: moment_report(&tf, &red, 2 * order)?,
                bode,
            })
        }
        None => None,
    };
    Ok(AnalyzeResponse {
        transfer: to_structured(&tf, var),
        nyquist: if req.nyquist {
            points.as_ref().map(|p| p.iter().map(|q| [q.value.re, q.value.im]).collect())
        } else {
            None
        },
        bode: if req.bode { points } else { None },
        routh: numeric.as_ref().filter(|_| req.routh).map(|(_, a)| routh_stability(a)),
        roots: match (&numeric, req.roots) {
            (Some(_), true) => {
                let (zeros, poles) = poles_zeros(&tf)?;
                Some(PoleZero { zeros, poles })
            }
            _ => None,
        },
        reduced,
    })
}

/// Pretty JSON with a trailing newline, as served by the HTTP endpoint.
pub fn render_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Text rendering for the terminal: CSV for sweeps, JSON for reports. With
/// more than one section each starts with a `# name` line.
pub fn render_analysis(resp: &AnalyzeResponse) -> Result<String, AppError> {
    let mut sections: Vec<(&str, String)> = Vec::new();
    if let Some(points) = &resp.bode {
        sections.push(("bode", sweep_csv(points)));
    }
    if let Some(points) = &resp.nyquist {
        let mut csv = String::from("re,im\n");
        for [re, im] in points {
            let _ = writeln!(csv, "{re},{im}");
        }
        sections.push(("nyquist", csv));
    }
    if let Some(r) = &resp.routh {
        sections.push(("routh", render_json(r)));
    }
    if let Some(r) = &resp.roots {
        sections.push(("roots", render_json(r)));
    }
    if let Some(r) = &resp.reduced {
        let tf = r.transfer.to_transfer()?;
        let mut text = format!("order {}\n", r.order);
        text.push_str(&render_table(&tf, r.transfer.variable));
        text.push_str(&render_json(&r.moments));
        sections.push(("reduce", text));
        if let Some(points) = &r.bode {
            sections.push(("reduced-bode", sweep_csv(points)));
        }
    }
    if sections.is_empty() {
        let tf = resp.transfer.to_transfer()?;
        return Ok(render_table(&tf, resp.transfer.variable));
    }
    if sections.len() == 1 {
        return Ok(sections.remove(0).1);
    }
    Ok(sections
        .into_iter()
        .map(|(name, body)| format!("# {name}\n{body}"))
        .collect())
}

/// Parses `RE,IM` (or a bare real part).
pub fn parse_point(text: &str) -> Result<Complex64, AppError> {
    let bad = || AppError::Input(format!("expected RE,IM, got `{text}`"));
    let mut parts = text.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = parts.next().transpose().map_err(|_| bad())?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Node-equation value of the graph at `s`, as `re,im`.
pub fn oracle(g: &SfgGraph, s: Complex64, set: &[(SymbolId, RationalFn)]) -> Result<String, AppError> {
    let values: BTreeMap<SymbolId, Complex64> = set.iter().map(|(k, v)| (k.clone(), v.eval(s))).collect();
    let z = numeric_oracle(g, s, &values)?;
    Ok(format!("{},{}\n", z.re, z.im))
}
