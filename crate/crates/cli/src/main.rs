mod signal;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use warpcdm::analyzer::DEFAULT_GRID;
use warpcdm::cdm::{check_nyquist, DEFAULT_M_MAX};
use warpcdm::cost::{cost_reports, derive_unit_costs, render_table, CostReport, UnitCostFit};
use warpcdm::prototype::overdesign_margin;
use warpcdm::{DecimationFactor, Error, FilterSpec, PrototypeFilter, VariableFilter, WarpingCoefficient};

use signal::{read_signal, write_signal, SignalFormat};

const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, msg: msg.into() }
    }

    fn with_context(mut self, ctx: String) -> Self {
        self.msg = format!("{ctx}: {}", self.msg);
        self
    }
}

/// Errors from tuning: unreachable targets are exit 3, anything else is bad input.
fn tuning(e: Error) -> Failure {
    let code = match e {
        Error::TuningInfeasible(_) | Error::Range(_) | Error::Domain(_) => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    };
    Failure { code, msg: e.to_string() }
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::input(e.to_string())
}

#[derive(Parser)]
#[command(name = "warpcdm", version, about = "Variable bandpass filter from one fixed FIR prototype")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a prototype bandpass filter and write it as JSON.
    Design(DesignArgs),
    /// Choose (alpha, M) for a target band and report what the filter does.
    Tune(TuneArgs),
    /// Write the frequency response as CSV (freq,mag_db,phase_rad).
    Response(ResponseArgs),
    /// Run a signal through the tunable filter.
    Filter(FilterArgs),
    /// Print the gate-count comparison table.
    Cost(CostArgs),
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long, default_value_t = 0.14)]
    center: f64,
    #[arg(long, default_value_t = 0.02)]
    bandwidth: f64,
    #[arg(long, default_value_t = 0.002)]
    ripple_db: f64,
    #[arg(long, default_value_t = 90.0)]
    atten_db: f64,
    #[arg(long, default_value_t = 0.01)]
    transition: f64,
    /// Largest decimation factor the prototype must support.
    #[arg(long, default_value_t = 5)]
    max_m: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plain coefficient listing instead of JSON.
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    proto: PathBuf,
    #[arg(long)]
    center: f64,
    #[arg(long)]
    bandwidth: f64,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

#[derive(Args)]
struct ResponseArgs {
    #[arg(long)]
    proto: PathBuf,
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["center", "bandwidth"])]
    alpha: Option<f64>,
    #[arg(long, conflicts_with_all = ["center", "bandwidth"])]
    m: Option<usize>,
    #[arg(long)]
    center: Option<f64>,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the bandpass measurement as JSON here.
    #[arg(long)]
    measurement: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    proto: PathBuf,
    #[arg(long)]
    center: f64,
    #[arg(long)]
    bandwidth: f64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Raw little-endian f64 instead of one number per line.
    #[arg(long)]
    binary: bool,
    /// Retune before sample n: `n:center:bandwidth`. Repeatable.
    #[arg(long = "retune-at")]
    retune_at: Vec<RetunePoint>,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: usize,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct RetunePoint {
    at: usize,
    center: f64,
    bandwidth: f64,
}

impl FromStr for RetunePoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [n, c, b] = parts[..] else {
            return Err(format!("expected n:center:bandwidth, got {s:?}"));
        };
        Ok(RetunePoint {
            at: n.parse().map_err(|_| format!("bad sample index {n:?}"))?,
            center: c.parse().map_err(|_| format!("bad center {c:?}"))?,
            bandwidth: b.parse().map_err(|_| format!("bad bandwidth {b:?}"))?,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Design(a) => cmd_design(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Response(a) => cmd_response(a),
        Command::Filter(a) => cmd_filter(a),
        Command::Cost(a) => cmd_cost(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

/// Writes to `path`, or stdout when absent. The file only appears once
/// the whole payload is ready.
fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            body(&mut buf).map_err(input)?;
            fs::write(p, buf).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = BufWriter::new(stdout.lock());
            match body(&mut lock).and_then(|_| lock.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(input),
            }
        }
    }
}

fn load_proto(path: &Path) -> Result<Arc<PrototypeFilter>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    PrototypeFilter::from_json(&text)
        .map(Arc::new)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn cmd_design(a: DesignArgs) -> Result<(), Failure> {
    let spec = FilterSpec {
        center: a.center,
        bandwidth: a.bandwidth,
        passband_ripple_db: a.ripple_db,
        stopband_atten_db: a.atten_db,
        transition_width: a.transition,
    };
    spec.validate().map_err(input)?;
    let max_m = DecimationFactor::new(a.max_m).map_err(input)?;
    check_nyquist(&spec, max_m).map_err(|e| Failure::input(format!("edge constraint: {e}")))?;
    let margin = overdesign_margin(spec.stopband_atten_db, max_m.get());
    let proto = warpcdm::design_bandpass(&spec.with_margin(margin)).map_err(input)?;
    emit(a.out.as_deref(), |w| {
        if a.text {
            proto.write_text(w)
        } else {
            writeln!(w, "{}", proto.to_json())
        }
    })
}

fn cmd_tune(a: TuneArgs) -> Result<(), Failure> {
    let proto = load_proto(&a.proto)?;
    let f = VariableFilter::build(proto, a.center, a.bandwidth, a.m_max).map_err(tuning)?;
    let report = f.report(a.grid).map_err(tuning)?;
    let json = serde_json::to_string_pretty(&report).map_err(input)?;
    emit(None, |w| writeln!(w, "{json}"))
}

fn cmd_response(a: ResponseArgs) -> Result<(), Failure> {
    let proto = load_proto(&a.proto)?;
    let f = match (a.alpha, a.m, a.center, a.bandwidth) {
        (Some(alpha), Some(m), None, None) => {
            let alpha = WarpingCoefficient::new(alpha).map_err(input)?;
            VariableFilter::with_knobs(proto, alpha, m, a.m_max.max(m)).map_err(tuning)?
        }
        (None, None, Some(c), Some(b)) => VariableFilter::build(proto, c, b, a.m_max).map_err(tuning)?,
        _ => {
            return Err(Failure::input(
                "give either --alpha and --m, or --center and --bandwidth",
            ))
        }
    };
    let curve = f.response_curve(a.grid).map_err(input)?;
    if let Some(path) = &a.measurement {
        let m = f.measure(a.grid).map_err(input)?;
        let json = serde_json::to_string_pretty(&m).map_err(input)?;
        emit(Some(path), |w| writeln!(w, "{json}"))?;
    }
    emit(a.out.as_deref(), |w| curve.write_csv(w))
}

fn cmd_filter(a: FilterArgs) -> Result<(), Failure> {
    let proto = load_proto(&a.proto)?;
    let format = SignalFormat::from_binary_flag(a.binary);
    let x = read_signal(&a.input, format).map_err(Failure::input)?;
    for pair in a.retune_at.windows(2) {
        if pair[1].at <= pair[0].at {
            return Err(Failure::input("--retune-at sample indices must be strictly increasing"));
        }
    }
    if let Some(last) = a.retune_at.last() {
        if last.at >= x.len() {
            return Err(Failure::input(format!(
                "--retune-at index {} is beyond the {}-sample input",
                last.at,
                x.len()
            )));
        }
    }

    let mut f = VariableFilter::build(proto, a.center, a.bandwidth, a.m_max).map_err(tuning)?;
    let mut y = Vec::with_capacity(x.len());
    let mut start = 0;
    for p in &a.retune_at {
        y.extend(f.process(&x[start..p.at]));
        f.retune(p.center, p.bandwidth)
            .map_err(|e| tuning(e).with_context(format!("retune at sample {}", p.at)))?;
        start = p.at;
    }
    y.extend(f.process(&x[start..]));

    let mut buf = Vec::new();
    write_signal(&mut buf, &y, format).map_err(input)?;
    fs::write(&a.out, buf).map_err(|e| Failure::input(format!("cannot write {}: {e}", a.out.display())))
}

#[derive(serde::Serialize)]
struct CostJson<'a> {
    unit_costs: &'a UnitCostFit,
    rows: &'a [CostReport],
}

fn cmd_cost(a: CostArgs) -> Result<(), Failure> {
    let fit = derive_unit_costs().map_err(input)?;
    let reports = cost_reports(&fit.costs);
    if a.json {
        let json = serde_json::to_string_pretty(&CostJson { unit_costs: &fit, rows: &reports }).map_err(input)?;
        emit(None, |w| writeln!(w, "{json}"))
    } else {
        let table = render_table(&reports, &fit);
        emit(None, |w| write!(w, "{table}"))
    }
}
