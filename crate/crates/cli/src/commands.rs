use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hcolor::conditions::{
    influence_matrix, is_permissive, permissive_limits, InfluenceOptions, InfluenceReport,
    PermissiveMode, UndefinedPolicy,
};
use hcolor::enumeration::{count_colorings, enumerate_colorings, tv_distance, Limits};
use hcolor::experiments::{
    connected_graphs, learn_curve, verify_dobrushin, verify_permissive, verify_same_color,
    BoundReport, ExperimentConfig,
};
use hcolor::gadgets::{Gadget, GadgetDescriptor};
use hcolor::identifiability::{
    is_identifiable, is_identifiable_weighted, IdReason, IdStatus, IdentifiabilityVerdict,
};
use hcolor::learner::{eta, struct_learn, LearnMode, LowerBound};
use hcolor::measure::{Gibbs, Uniform};
use hcolor::sampling::{
    exact_sample_with, gibbs_sample_exact, glauber_sample, GlauberInit, GlauberParams, SampleSet,
};
use hcolor::scalar::{parse_rational, Scalar};
use hcolor::ConstraintGraph;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::io::{
    read_constraint, read_json, read_sample_set, read_system, read_target, write_colorings,
    write_sample_set, ConstraintFile, SystemFile, TargetFile,
};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hcolor",
    version,
    about = "H-coloring structure learning and diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stream every H-coloring of G as JSONL.
    Enumerate(EnumerateArgs),
    /// Exact number of H-colorings of G.
    Count(PairArgs),
    /// Draw samples (JSONL plus a .meta.json sidecar when --out is given).
    Sample(SampleArgs),
    /// Learn the graph from samples.
    Learn(LearnArgs),
    /// Decide identifiability of a constraint graph or weighted system.
    Identifiable(IdentifiableArgs),
    /// Dobrushin influence matrix and coefficient.
    Dobrushin(DobrushinArgs),
    /// Check whether a system is permissive on a graph.
    Permissive(PermissiveArgs),
    /// Generate a catalog graph.
    Gadget(GadgetArgs),
    /// η between nested graphs G1 ⊆ G2.
    Eta(EtaArgs),
    /// Total-variation distance between two uniform coloring measures.
    Tv(TvArgs),
    /// Learning curve as CSV.
    LearnCurve(ConfigArgs),
    /// Check the probability lower bounds against exact enumeration.
    VerifyBounds(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub h: PathBuf,
    #[arg(long)]
    pub g: PathBuf,
    /// Stop with exit code 2 after this many colorings.
    #[arg(long)]
    pub max: Option<u64>,
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub h: PathBuf,
    #[arg(long)]
    pub g: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Glauber,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Constraint graph (uniform measure on colorings).
    #[arg(long, conflicts_with = "system", required_unless_present = "system")]
    pub h: Option<PathBuf>,
    /// Weighted spin system (Gibbs measure).
    #[arg(long)]
    pub system: Option<PathBuf>,
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long)]
    pub num: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 10)]
    pub thin: u64,
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LearnModeArg {
    Any,
    Designated,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub h: PathBuf,
    #[arg(long)]
    pub samples: PathBuf,
    /// Number of vertices (defaults to the sample length).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = LearnModeArg::Any)]
    pub mode: LearnModeArg,
    /// Hard pair for designated mode.
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub pair: Option<Vec<usize>>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct IdentifiableArgs {
    #[arg(long, conflicts_with = "system", required_unless_present = "system")]
    pub h: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Separation tolerance for weighted systems, as a decimal or "p/q".
    /// Defaults to 0 when every `J` entry is a "p/q" string, else 1e-9.
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UndefinedArg {
    Skip,
    One,
}

#[derive(Debug, Args)]
pub struct DobrushinArgs {
    /// Constraint graph; probabilities are computed exactly.
    #[arg(long, conflicts_with = "system", required_unless_present = "system")]
    pub h: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<PathBuf>,
    #[arg(long)]
    pub g: PathBuf,
    /// Treatment of boundary pairs with an undefined conditional.
    #[arg(long, value_enum, default_value_t = UndefinedArg::Skip)]
    pub undefined: UndefinedArg,
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PermissiveModeArg {
    Full,
    SingleVertex,
}

#[derive(Debug, Args)]
pub struct PermissiveArgs {
    #[arg(long, conflicts_with = "system", required_unless_present = "system")]
    pub h: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<PathBuf>,
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long, value_enum, default_value_t = PermissiveModeArg::Full)]
    pub mode: PermissiveModeArg,
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct GadgetArgs {
    /// kq, hardcore, f, gm-family, gmt, nonid-pair or weakbound.
    pub name: String,
    /// Parameters as a JSON object, e.g. '{"q":3,"t":2,"m":2,"mask":[false,false]}'.
    #[arg(long, default_value = "{}")]
    pub params: String,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct EtaArgs {
    #[arg(long)]
    pub h: PathBuf,
    /// The smaller graph.
    #[arg(long)]
    pub g1: PathBuf,
    /// The larger graph.
    #[arg(long)]
    pub g2: PathBuf,
    /// Success margin; adds the implied sample lower bound margin/η.
    #[arg(long)]
    pub margin: Option<String>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct TvArgs {
    #[arg(long)]
    pub h: PathBuf,
    #[arg(long)]
    pub g1: PathBuf,
    #[arg(long)]
    pub g2: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

/// Input of `verify-bounds`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "bound")]
pub enum VerifyConfig {
    /// Every connected graph with `n ≤ max_n` and maximum degree `≤ max_d`
    /// (if given); `q` defaults to `d + 1` per graph.
    SameColor {
        q: Option<usize>,
        max_n: usize,
        max_d: Option<usize>,
    },
    Dobrushin {
        #[serde(default)]
        h: Option<ConstraintFile>,
        #[serde(default)]
        system: Option<SystemFile>,
        graph: TargetFile,
    },
    Permissive {
        system: SystemFile,
        graph: TargetFile,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub instances: usize,
    /// Instances where the bound's hypothesis failed (for example `α ≥ 1`).
    pub not_applicable: usize,
    pub checks: usize,
    pub violations: usize,
    pub min_margin: Option<f64>,
    pub reports: Vec<BoundReport>,
}

fn emit_text(out: &OutArg, text: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e.to_string())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(PathBuf::from("-"), e.to_string()))
        }
    }
}

fn emit_json<T: Serialize>(out: &OutArg, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    emit_text(out, &text)
}

const DEFAULT_TOL: &str = "1e-9";

fn parse_exact(label: &str, s: &str) -> Result<BigRational, CliError> {
    parse_rational(s).ok_or_else(|| CliError::Input(format!("{label}: invalid number {s:?}")))
}

fn limits(force: bool) -> Limits {
    Limits {
        force,
        ..Limits::default()
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Enumerate(a) => enumerate(a),
        Command::Count(a) => count(a),
        Command::Sample(a) => sample(a),
        Command::Learn(a) => learn(a),
        Command::Identifiable(a) => identifiable(a),
        Command::Dobrushin(a) => dobrushin(a),
        Command::Permissive(a) => permissive(a),
        Command::Gadget(a) => gadget(a),
        Command::Eta(a) => eta_cmd(a),
        Command::Tv(a) => tv(a),
        Command::LearnCurve(a) => learn_curve_cmd(a),
        Command::VerifyBounds(a) => verify_bounds(a),
    }
}

fn enumerate(a: EnumerateArgs) -> Result<i32, CliError> {
    let h = read_constraint(&a.h)?;
    let g = read_target(&a.g)?.graph()?;
    let mut lim = limits(a.force);
    lim.max_emitted = a.max;
    let mut stream = enumerate_colorings(&h, &g, lim)?;
    let mut buf = Vec::new();
    write_colorings(&mut buf, stream.by_ref())?;
    emit_text(&a.out, &String::from_utf8(buf).expect("JSON is UTF-8"))?;
    if stream.cap_exceeded() {
        eprintln!("stopped after {} colorings", a.max.unwrap_or(0));
        return Ok(2);
    }
    Ok(0)
}

fn count(a: PairArgs) -> Result<i32, CliError> {
    let h = read_constraint(&a.h)?;
    let g = read_target(&a.g)?.graph()?;
    emit_json(
        &a.out,
        &json!({ "count": count_colorings(&h, &g).count.to_string() }),
    )?;
    Ok(0)
}

fn sample(a: SampleArgs) -> Result<i32, CliError> {
    let target = read_target(&a.g)?;
    let set = match (&a.h, &a.system) {
        (Some(h), _) => {
            let h = read_constraint(h)?;
            let g = target.graph()?;
            match a.method {
                MethodArg::Exact => exact_sample_with(&h, &g, a.num, a.seed, limits(a.force))?,
                MethodArg::Glauber => glauber_sample(
                    &Uniform::new(&h, &g),
                    a.num,
                    glauber_params(&a),
                    GlauberInit::Greedy,
                )?,
            }
        }
        (None, Some(system)) => {
            let s = read_system(system)?.to_f64()?;
            let gw = target.weighted()?;
            match a.method {
                MethodArg::Exact => gibbs_sample_exact(&s, &gw, a.num, a.seed)?,
                MethodArg::Glauber => glauber_sample(
                    &Gibbs::new(&s, &gw),
                    a.num,
                    glauber_params(&a),
                    GlauberInit::Greedy,
                )?,
            }
        }
        (None, None) => return Err(CliError::Usage("one of --h or --system is required".into())),
    };
    for w in &set.warnings {
        eprintln!("warning: {w}");
    }
    match &a.out.out {
        Some(path) => write_sample_set(path, &set)?,
        None => {
            let mut buf = Vec::new();
            write_colorings(&mut buf, set.samples)?;
            emit_text(&a.out, &String::from_utf8(buf).expect("JSON is UTF-8"))?;
        }
    }
    Ok(0)
}

fn glauber_params(a: &SampleArgs) -> GlauberParams {
    GlauberParams {
        burn_in: a.burn_in,
        thinning: a.thin,
        seed: a.seed,
    }
}

fn learn_mode(mode: LearnModeArg, pair: &Option<Vec<usize>>) -> Result<LearnMode, CliError> {
    match (mode, pair) {
        (LearnModeArg::Any, _) => Ok(LearnMode::AnyIncompatible),
        (LearnModeArg::Designated, Some(p)) => Ok(LearnMode::Designated(p[0], p[1])),
        (LearnModeArg::Designated, None) => {
            Err(CliError::Usage("--mode designated needs --pair I J".into()))
        }
    }
}

fn learn(a: LearnArgs) -> Result<i32, CliError> {
    let h = read_constraint(&a.h)?;
    let set: SampleSet = read_sample_set(&a.samples)?;
    let n = a.n.unwrap_or(set.n);
    let report = struct_learn(&h, n, &set.samples, learn_mode(a.mode, &a.pair)?)?;
    let witnesses: Vec<Value> = report
        .witnesses
        .iter()
        .map(|(&(u, v), &k)| json!({ "pair": [u, v], "sample": k }))
        .collect();
    emit_json(
        &a.out,
        &json!({
            "n": n,
            "edges": report.estimate.edges().collect::<Vec<_>>(),
            "mode": report.mode,
            "l_used": report.l_used,
            "witnesses": witnesses,
        }),
    )?;
    Ok(0)
}

/// Verdict JSON. A self-loop verdict is exactly `{"status", "reason"}`;
/// other verdicts add witnesses, certificates and timing.
pub fn verdict_json(v: &IdentifiabilityVerdict) -> Value {
    let witnesses: Vec<Value> = v
        .witnesses
        .iter()
        .map(|(e, c)| json!({ "edge": [e.0, e.1], "coloring": c.as_slice() }))
        .collect();
    let certificates: Vec<Value> = v
        .certificates
        .iter()
        .map(|(e, x)| json!({ "edge": [e.0, e.1], "nodes": x.nodes, "colorings": x.colorings.to_string() }))
        .collect();
    let elapsed_ms = v.elapsed.as_secs_f64() * 1e3;
    match &v.status {
        IdStatus::Identifiable(IdReason::SelfLoop) => {
            json!({ "status": "identifiable", "reason": "self-loop" })
        }
        IdStatus::Identifiable(IdReason::AllEdgesWitnessed) => json!({
            "status": "identifiable",
            "reason": "all-edges-witnessed",
            "witnesses": witnesses,
            "elapsed_ms": elapsed_ms,
        }),
        IdStatus::NotIdentifiable(e) => json!({
            "status": "not-identifiable",
            "edge": [e.0, e.1],
            "witnesses": witnesses,
            "certificates": certificates,
            "elapsed_ms": elapsed_ms,
        }),
        IdStatus::Timeout(edges) => json!({
            "status": "timeout",
            "edges": edges.iter().map(|e| [e.0, e.1]).collect::<Vec<_>>(),
            "witnesses": witnesses,
            "certificates": certificates,
            "elapsed_ms": elapsed_ms,
        }),
    }
}

fn identifiable(a: IdentifiableArgs) -> Result<i32, CliError> {
    let timeout = a.timeout_ms.map(Duration::from_millis);
    let verdict = match (&a.h, &a.system) {
        (Some(h), _) => is_identifiable(&read_constraint(h)?, timeout)?,
        (None, Some(s)) => {
            let file = read_system(s)?;
            let tol = match &a.tol {
                Some(t) => parse_exact("--tol", t)?,
                None if file.couplings_exact() => BigRational::zero(),
                None => parse_exact("--tol", DEFAULT_TOL)?,
            };
            is_identifiable_weighted(&file.to_exact()?, &tol, timeout)?
        }
        (None, None) => return Err(CliError::Usage("one of --h or --system is required".into())),
    };
    emit_json(&a.out, &verdict_json(&verdict))?;
    Ok(if matches!(verdict.status, IdStatus::Timeout(_)) {
        2
    } else {
        0
    })
}

fn influence_json<T: Scalar>(rep: &InfluenceReport<T>, exact: bool) -> Value {
    let cell = |x: &T| {
        if exact {
            json!(x.to_string())
        } else {
            json!(x.to_f64_lossy())
        }
    };
    json!({
        "R": rep.r.iter().map(|row| row.iter().map(cell).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "alpha": cell(&rep.alpha),
        "alpha_f64": rep.alpha.to_f64_lossy(),
        "row_sums": rep.row_sums.iter().map(cell).collect::<Vec<_>>(),
        "skipped": rep.skipped,
        "undefined": rep.undefined,
        "holds": rep.holds(),
    })
}

fn dobrushin(a: DobrushinArgs) -> Result<i32, CliError> {
    let target = read_target(&a.g)?;
    let opts = InfluenceOptions {
        undefined: match a.undefined {
            UndefinedArg::Skip => UndefinedPolicy::Skip,
            UndefinedArg::One => UndefinedPolicy::TreatAsOne,
        },
        force: a.force,
        ..InfluenceOptions::default()
    };
    let value = match (&a.h, &a.system) {
        (Some(h), _) => {
            let h = read_constraint(h)?;
            let g = target.graph()?;
            let rep: InfluenceReport<BigRational> = influence_matrix(&Uniform::new(&h, &g), &opts)?;
            influence_json(&rep, true)
        }
        (None, Some(s)) => {
            let s = read_system(s)?.to_f64()?;
            let gw = target.weighted()?;
            influence_json(&influence_matrix(&Gibbs::new(&s, &gw), &opts)?, false)
        }
        (None, None) => return Err(CliError::Usage("one of --h or --system is required".into())),
    };
    emit_json(&a.out, &value)?;
    Ok(0)
}

fn constraint_of(
    h: &Option<PathBuf>,
    system: &Option<PathBuf>,
) -> Result<ConstraintGraph, CliError> {
    match (h, system) {
        (Some(h), _) => read_constraint(h),
        (None, Some(s)) => Ok(read_system(s)?.to_f64()?.constraint_graph()),
        (None, None) => Err(CliError::Usage("one of --h or --system is required".into())),
    }
}

fn permissive(a: PermissiveArgs) -> Result<i32, CliError> {
    let h = constraint_of(&a.h, &a.system)?;
    let g = read_target(&a.g)?.graph()?;
    let mode = match a.mode {
        PermissiveModeArg::Full => PermissiveMode::Full,
        PermissiveModeArg::SingleVertex => PermissiveMode::SingleVertex,
    };
    let mut lim = permissive_limits();
    lim.force = a.force;
    emit_json(&a.out, &is_permissive(&h, &g, mode, &lim)?)?;
    Ok(0)
}

fn gadget(a: GadgetArgs) -> Result<i32, CliError> {
    let mut params: Value =
        serde_json::from_str(&a.params).map_err(|e| CliError::Input(format!("--params: {e}")))?;
    let obj = params
        .as_object_mut()
        .ok_or_else(|| CliError::Input("--params must be a JSON object".into()))?;
    obj.insert("name".into(), Value::String(a.name.clone()));
    let desc: GadgetDescriptor = serde_json::from_value(params)
        .map_err(|e| CliError::Input(format!("gadget {}: {e}", a.name)))?;
    match desc.generate()? {
        Gadget::Constraint(h) => emit_json(&a.out, &ConstraintFile::of(&h))?,
        Gadget::Target(g) => emit_json(&a.out, &TargetFile::of(&g))?,
        Gadget::Pair(g, g2) => emit_json(
            &a.out,
            &json!({ "g": TargetFile::of(&g), "g_prime": TargetFile::of(&g2) }),
        )?,
    }
    Ok(0)
}

fn eta_cmd(a: EtaArgs) -> Result<i32, CliError> {
    let h = read_constraint(&a.h)?;
    let g1 = read_target(&a.g1)?.graph()?;
    let g2 = read_target(&a.g2)?.graph()?;
    let rep = eta(&h, &g1, &g2)?;
    let mut value = json!({
        "eta": rep.eta.to_string(),
        "eta_f64": rep.eta.to_f64_lossy(),
        "count_g1": rep.count_sub.to_string(),
        "count_g2": rep.count_sup.to_string(),
    });
    if let Some(m) = &a.margin {
        let bound = match rep.implied_lower_bound(&parse_exact("--margin", m)?) {
            LowerBound::Finite(x) => {
                json!({ "samples": x.to_string(), "samples_f64": x.to_f64_lossy() })
            }
            LowerBound::Unbounded => json!("unbounded"),
        };
        value["lower_bound"] = bound;
    }
    emit_json(&a.out, &value)?;
    Ok(0)
}

fn tv(a: TvArgs) -> Result<i32, CliError> {
    let h = read_constraint(&a.h)?;
    let g1 = read_target(&a.g1)?.graph()?;
    let g2 = read_target(&a.g2)?.graph()?;
    let d = tv_distance(&h, &g1, &g2)?;
    emit_json(
        &a.out,
        &json!({ "tv": d.to_string(), "tv_f64": d.to_f64_lossy() }),
    )?;
    Ok(0)
}

fn learn_curve_cmd(a: ConfigArgs) -> Result<i32, CliError> {
    let cfg: ExperimentConfig = read_json(&a.config)?;
    let rows = learn_curve(&cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    emit_text(&a.out, &String::from_utf8(bytes).expect("CSV is UTF-8"))?;
    Ok(0)
}

fn summarize(reports: Vec<BoundReport>, not_applicable: usize) -> VerifySummary {
    VerifySummary {
        instances: reports.len() + not_applicable,
        not_applicable,
        checks: reports.iter().map(|r| r.checks.len()).sum(),
        violations: reports.iter().map(|r| r.violations).sum(),
        min_margin: reports.iter().filter_map(|r| r.min_margin).reduce(f64::min),
        reports,
    }
}

/// Evaluates a bound-verification config.
pub fn verify(cfg: &VerifyConfig) -> Result<VerifySummary, CliError> {
    match cfg {
        VerifyConfig::SameColor { q, max_n, max_d } => {
            let mut reports = Vec::new();
            for n in 2..=*max_n {
                for g in connected_graphs(n)? {
                    let d = g.max_degree();
                    if max_d.is_some_and(|m| d > m) {
                        continue;
                    }
                    reports.push(verify_same_color(q.unwrap_or(d + 1), &g)?);
                }
            }
            Ok(summarize(reports, 0))
        }
        VerifyConfig::Dobrushin { h, system, graph } => {
            let rep = match (h, system) {
                (Some(h), _) => {
                    let h = h.build()?;
                    let g = graph.graph()?;
                    verify_dobrushin::<BigRational, _>(&Uniform::new(&h, &g))?
                }
                (None, Some(s)) => {
                    let s = s.to_f64()?;
                    let gw = graph.weighted()?;
                    verify_dobrushin(&Gibbs::new(&s, &gw))?
                }
                (None, None) => {
                    return Err(CliError::Input("dobrushin config needs h or system".into()))
                }
            };
            Ok(match rep {
                Some(r) => summarize(vec![r], 0),
                None => summarize(Vec::new(), 1),
            })
        }
        VerifyConfig::Permissive { system, graph } => {
            let rep = verify_permissive(&system.to_f64()?, &graph.weighted()?)?;
            Ok(summarize(vec![rep], 0))
        }
    }
}

fn verify_bounds(a: ConfigArgs) -> Result<i32, CliError> {
    let cfg: VerifyConfig = read_json(&a.config)?;
    let summary = verify(&cfg)?;
    emit_json(&a.out, &summary)?;
    Ok(if summary.violations == 0 { 0 } else { 1 })
}
