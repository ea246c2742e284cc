use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use polarset::alignment::{DEFAULT_K_LB, DEFAULT_K_UB};
use polarset::quantum::{Family, BASIS_CAVEAT};
use polarset::sweep::{self, Curve, QuantumRay, Range, RegionRecord, Report, WiretapKind, BISECT_TOL};
use polarset::{Dmc, Error, Execution, Method};

#[derive(Parser, Debug)]
#[command(name = "polarset", version, about = "Region sweeps and boundary bisection for polarized-set alignment")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// BSC(alpha) against BEC(beta).
    #[command(args_override_self = true)]
    AlignmentRegion(AlignmentArgs),
    /// Key-assistance classification for the BSC/BEC wiretap pairs.
    #[command(args_override_self = true)]
    WiretapRegion(WiretapArgs),
    /// Preprocessed broadcast pair.
    #[command(args_override_self = true)]
    BroadcastRegion(BroadcastArgs),
    /// Entanglement-assistance classification for a Pauli family.
    #[command(args_override_self = true)]
    Quantum(QuantumArgs),
    /// Polarized sets of a single BSC or BEC.
    #[command(args_override_self = true)]
    PolarSets(PolarArgs),
    /// Bisect a region boundary along its free parameter.
    #[command(args_override_self = true)]
    Thresholds(ThresholdArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// key=value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct Levels {
    #[arg(long, default_value_t = DEFAULT_K_LB)]
    k_lb: usize,
    #[arg(long, default_value_t = DEFAULT_K_UB)]
    k_ub: usize,
}

#[derive(Args, Debug, Serialize)]
struct AlignmentArgs {
    /// `min:max:step` or a single value.
    #[arg(long, value_parser = parse_range)]
    alpha: Range,
    #[arg(long, value_parser = parse_range, required_unless_present = "beta_ray")]
    beta: Option<Range>,
    /// Bisect the alignment boundaries along beta instead of sweeping a grid.
    #[arg(long)]
    beta_ray: bool,
    #[command(flatten)]
    levels: Levels,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KindArg {
    BscBec,
    BecBsc,
}

#[derive(Args, Debug, Serialize)]
struct WiretapArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, value_parser = parse_range)]
    alpha: Range,
    #[arg(long, value_parser = parse_range)]
    beta: Range,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct BroadcastArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long, value_parser = parse_range)]
    alpha: Range,
    #[arg(long, value_parser = parse_range)]
    beta: Range,
    #[command(flatten)]
    levels: Levels,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyArg {
    Depolarizing,
    Bb84,
    TwoPauli,
}

impl FamilyArg {
    fn family(self) -> Family {
        match self {
            FamilyArg::Depolarizing => Family::Depolarizing,
            FamilyArg::Bb84 => Family::Bb84,
            FamilyArg::TwoPauli => Family::TwoPauli,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct QuantumArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Depolarizing strength.
    #[arg(long, value_parser = parse_range)]
    p: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    qx: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    qz: Option<Range>,
    #[command(flatten)]
    levels: Levels,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ChannelArg {
    Bsc,
    Bec,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Exact,
    Bounds,
}

#[derive(Args, Debug, Serialize)]
struct PolarArgs {
    #[arg(long, value_enum)]
    channel: ChannelArg,
    /// Crossover or erasure probability.
    #[arg(long)]
    param: f64,
    /// Block length, a power of two.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct ThresholdArgs {
    /// ub-levelK, lb-levelK, wiretap-bsc-bec, wiretap-bec-bsc, bc-ub-levelK,
    /// bc-lb-levelK, equal-capacity, eub-levelK, elb-levelK, coherent-info
    #[arg(long)]
    curve: String,
    /// Fixed alpha for the classical curves; a range gives one row per value.
    #[arg(long, value_parser = parse_range)]
    alpha: Option<Range>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Fixed qx for bb84 / two-pauli rays.
    #[arg(long, value_parser = parse_range)]
    qx: Option<Range>,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    #[arg(long, default_value_t = BISECT_TOL)]
    tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match parts.as_slice() {
        [x] => {
            let x = num(x)?;
            if x.is_finite() {
                Ok(Range::single(x))
            } else {
                Err(format!("`{s}` is not finite"))
            }
        }
        [a, b, c] => Range::new(num(a)?, num(b)?, num(c)?).map_err(|e| e.to_string()),
        _ => Err(format!("expected `min:max:step` or a value, got `{s}`")),
    }
}

enum Failure {
    Config(String),
    Compute(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::ParameterOutOfRange { .. } | Error::DepthOverflow { .. } => Failure::Config(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

const SUBCOMMANDS: [&str; 6] = ["alignment-region", "wiretap-region", "broadcast-region", "quantum", "polar-sets", "thresholds"];

/// Splices `--key value` pairs from the config file right after the subcommand,
/// so anything on the real command line overrides them.
fn expand_args(raw: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut path = None;
    for (i, a) in raw.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if a == "--config" {
            path = raw.get(i + 1).cloned();
        }
    }
    let Some(path) = path else { return Ok(raw) };
    let text = fs::read_to_string(&path).map_err(|e| Failure::Config(format!("{path}: {e}")))?;
    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::Config(format!("{path}:{}: expected key=value", n + 1)));
        };
        let k = k.trim().replace('_', "-");
        if k == "config" {
            return Err(Failure::Config(format!("{path}:{}: nested config", n + 1)));
        }
        match v.trim() {
            "true" => extra.push(format!("--{k}")),
            "false" => {}
            v => {
                extra.push(format!("--{k}"));
                extra.push(v.to_string());
            }
        }
    }
    let at = raw.iter().position(|a| SUBCOMMANDS.contains(&a.as_str()));
    let Some(at) = at else { return Ok(raw) };
    let mut out = raw[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&raw[at + 1..]);
    Ok(out)
}

fn main() -> ExitCode {
    let args = match expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(f) => return fail(f),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    let msg = match &f {
        Failure::Config(m) => format!("config error: {m}"),
        Failure::Compute(m) => format!("error: {m}"),
    };
    eprintln!("polarset: {msg}");
    ExitCode::from(f.code())
}

fn common(cmd: &Cmd) -> &Common {
    match cmd {
        Cmd::AlignmentRegion(a) => &a.common,
        Cmd::WiretapRegion(a) => &a.common,
        Cmd::BroadcastRegion(a) => &a.common,
        Cmd::Quantum(a) => &a.common,
        Cmd::PolarSets(a) => &a.common,
        Cmd::Thresholds(a) => &a.common,
    }
}

fn run(cmd: &Cmd) -> Result<(), Failure> {
    let c = common(cmd);
    if c.jobs == 0 {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.jobs)
        .build()
        .map_err(|e| Failure::Compute(format!("thread pool: {e}")))?;
    let (records, caveat) = pool.install(|| compute(cmd))?;
    if records.is_empty() {
        return Err(Failure::Compute("no records produced".into()));
    }
    let text = match c.format {
        Format::Csv => sweep::to_csv(&records),
        Format::Json => {
            let config = serde_json::to_value(cmd).map_err(|e| Failure::Compute(e.to_string()))?;
            Report::new(config, caveat, records).to_json()
        }
    };
    match &c.out {
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Compute(format!("stdout: {e}"))),
        Some(path) => write_atomic(path, &text),
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let res = fs::write(&tmp, text).and_then(|_| fs::rename(&tmp, path));
    res.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Failure::Compute(format!("{}: {e}", path.display()))
    })
}

type Output = (Vec<RegionRecord>, Option<&'static str>);

fn compute(cmd: &Cmd) -> Result<Output, Failure> {
    let exec = Execution::default();
    let records = match cmd {
        Cmd::AlignmentRegion(a) => {
            if a.beta_ray {
                let mut out = Vec::new();
                for alpha in a.alpha.values() {
                    for curve in [
                        Curve::AlignmentUb { alpha, level: a.levels.k_ub },
                        Curve::AlignmentLb { alpha, level: a.levels.k_lb },
                    ] {
                        out.push(threshold(&curve, None, None, BISECT_TOL)?);
                    }
                }
                out
            } else {
                let beta = a.beta.as_ref().expect("clap requires beta");
                sweep::alignment_region(&a.alpha, beta, a.levels.k_lb, a.levels.k_ub, exec)?
            }
        }
        Cmd::WiretapRegion(a) => {
            let kind = match a.kind {
                KindArg::BscBec => WiretapKind::BscBec,
                KindArg::BecBsc => WiretapKind::BecBsc,
            };
            sweep::wiretap_region(kind, &a.alpha, &a.beta, exec)?
        }
        Cmd::BroadcastRegion(a) => sweep::broadcast_region(a.gamma, &a.alpha, &a.beta, a.levels.k_lb, a.levels.k_ub, exec)?,
        Cmd::Quantum(a) => {
            let family = a.family.family();
            let recs = match family {
                Family::Depolarizing => {
                    let p = a.p.as_ref().ok_or_else(|| Failure::Config("depolarizing needs --p".into()))?;
                    sweep::quantum_region(family, p, None, a.levels.k_lb, a.levels.k_ub, exec)?
                }
                _ => {
                    let (Some(qx), Some(qz)) = (&a.qx, &a.qz) else {
                        return Err(Failure::Config("this family needs --qx and --qz".into()));
                    };
                    sweep::quantum_region(family, qx, Some(qz), a.levels.k_lb, a.levels.k_ub, exec)?
                }
            };
            return Ok((recs, Some(BASIS_CAVEAT)));
        }
        Cmd::PolarSets(a) => {
            let w = match a.channel {
                ChannelArg::Bsc => Dmc::bsc(a.param)?,
                ChannelArg::Bec => Dmc::bec(a.param)?,
            };
            let method = match a.method {
                MethodArg::Exact => Method::Exact,
                MethodArg::Bounds => Method::Bounds,
            };
            sweep::polar_set_records(&w, a.n, a.epsilon, method, exec)?
        }
        Cmd::Thresholds(a) => return thresholds(a),
    };
    Ok((records, None))
}

fn threshold(curve: &Curve, lo: Option<f64>, hi: Option<f64>, tol: f64) -> Result<RegionRecord, Failure> {
    let (dlo, dhi) = curve.bracket();
    let x = sweep::curve_threshold(curve, Some((lo.unwrap_or(dlo), hi.unwrap_or(dhi))), tol)?;
    Ok(sweep::threshold_record(curve, x))
}

fn split_level(name: &str, prefix: &str) -> Option<Result<usize, Failure>> {
    name.strip_prefix(prefix)
        .map(|k| k.parse().map_err(|_| Failure::Config(format!("bad level in curve `{name}`"))))
}

fn thresholds(a: &ThresholdArgs) -> Result<Output, Failure> {
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(Failure::Config(format!("tolerance {} must be positive", a.tol)));
    }
    let name = a.curve.as_str();
    let quantum = name.starts_with("eub-level") || name.starts_with("elb-level") || name == "coherent-info";
    let mut curves = Vec::new();
    if quantum {
        let family = a.family.ok_or_else(|| Failure::Config("quantum curves need --family".into()))?;
        let rays: Vec<QuantumRay> = match family {
            FamilyArg::Depolarizing => vec![QuantumRay::Depolarizing],
            f => {
                let qx = a.qx.as_ref().ok_or_else(|| Failure::Config("this family needs --qx".into()))?;
                qx.values()
                    .into_iter()
                    .map(|qx| match f {
                        FamilyArg::Bb84 => QuantumRay::Bb84 { qx },
                        _ => QuantumRay::TwoPauli { qx },
                    })
                    .collect()
            }
        };
        for ray in rays {
            let curve = if let Some(k) = split_level(name, "eub-level") {
                Curve::Eub { ray, level: k? }
            } else if let Some(k) = split_level(name, "elb-level") {
                Curve::Elb { ray, level: k? }
            } else {
                Curve::CoherentInfo { ray }
            };
            curves.push(curve);
        }
    } else {
        let alpha = a.alpha.as_ref().ok_or_else(|| Failure::Config("classical curves need --alpha".into()))?;
        let gamma = || a.gamma.ok_or_else(|| Failure::Config(format!("curve `{name}` needs --gamma")));
        for alpha in alpha.values() {
            let curve = if let Some(k) = split_level(name, "bc-ub-level") {
                Curve::BroadcastUb { alpha, gamma: gamma()?, level: k? }
            } else if let Some(k) = split_level(name, "bc-lb-level") {
                Curve::BroadcastLb { alpha, gamma: gamma()?, level: k? }
            } else if let Some(k) = split_level(name, "ub-level") {
                Curve::AlignmentUb { alpha, level: k? }
            } else if let Some(k) = split_level(name, "lb-level") {
                Curve::AlignmentLb { alpha, level: k? }
            } else {
                match name {
                    "wiretap-bsc-bec" => Curve::WiretapBscBec { alpha },
                    "wiretap-bec-bsc" => Curve::WiretapBecBsc { alpha },
                    "equal-capacity" => Curve::EqualCapacity { alpha, gamma: gamma()? },
                    _ => return Err(Failure::Config(format!("unknown curve `{name}`"))),
                }
            };
            curves.push(curve);
        }
    }
    // each bisection is sequential; rows run side by side
    let exec = Execution::default();
    let mut recs = exec.try_map(&curves, |c| threshold(c, a.lo, a.hi, a.tol))?;
    sweep::sort_records(&mut recs);
    Ok((recs, quantum.then_some(BASIS_CAVEAT)))
}
