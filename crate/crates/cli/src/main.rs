//! `hillgaps`: oracle-versus-asymptotics runs from the command line.
//!
//! Exit status is 0 on success, 1 for usage errors and malformed input,
//! 2 when the numerics fail (pair validation, denominator guard, solver).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hillgaps::asymptotics::{
    condition_check, e_recursion, eig_first_order, eig_second_order, gap_first_order, gap_order_m,
    gap_second_order, ConditionKind, SeriesParams,
};
use hillgaps::experiment::{
    csv_column_for, emit_report, fit_decay_rate, run_gap_experiment, ExperimentConfig, OrderSelection,
    ParitySelection, PotentialSpec, ReportFormat,
};
use hillgaps::galerkin::{band_structure, GalerkinConfig};
use hillgaps::kronig_penney::{kp_derived, kp_gap_leading, kp_make, kp_qk, kp_rate_classify, parse_ratio};
use hillgaps::potential::{derived_coeffs, fourier_table};
use hillgaps::{Error, Parity};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hillgaps", version, about = "Spectral gaps of Hill operators: Galerkin oracle versus Fourier asymptotics")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Oracle gaps and asymptotic estimates over a range of n
    Gaps(GapsArgs),
    /// Band edges over a quasimomentum grid
    Bands(BandsArgs),
    /// Eigenvalue estimates and the E-recursion trace at one n
    Estimate(EstimateArgs),
    /// Closed-form Kronig–Penney data at one index
    Kp(KpArgs),
    /// Log-log decay fit of one CSV column against n
    Fit(FitArgs),
}

#[derive(Args, Clone)]
struct PotentialArgs {
    /// free | mathieu | kronig_penney | random_trig
    #[arg(long, default_value = "free")]
    preset: String,
    /// JSON potential file; overrides --preset
    #[arg(long)]
    potential_file: Option<PathBuf>,
    /// Mathieu amplitude (q = 2a·cos 2πx)
    #[arg(long, default_value_t = 0.1)]
    a: f64,
    /// Kronig–Penney height on (c, 1]
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Kronig–Penney cut as p/q
    #[arg(long, default_value = "1/2")]
    c: String,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, default_value_t = 0.5)]
    scale: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl PotentialArgs {
    fn spec(&self) -> Result<PotentialSpec, Error> {
        if let Some(path) = &self.potential_file {
            return Ok(PotentialSpec::File { path: path.clone() });
        }
        match self.preset.as_str() {
            "free" => Ok(PotentialSpec::Free),
            "mathieu" => Ok(PotentialSpec::Mathieu { a: self.a }),
            "kronig_penney" | "kp" => Ok(PotentialSpec::KronigPenney { b: self.b, c: self.c.clone() }),
            "random_trig" => Ok(PotentialSpec::RandomTrig {
                degree: self.degree,
                scale: self.scale,
                seed: self.seed,
            }),
            other => Err(Error::InvalidArgument(format!("unknown preset '{other}'"))),
        }
    }
}

#[derive(Args)]
struct GapsArgs {
    /// JSON experiment config; other flags are ignored when given
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    potential: PotentialArgs,
    /// periodic | antiperiodic | both
    #[arg(long, default_value = "both")]
    parity: ParitySelection,
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long)]
    n_max: Option<usize>,
    /// Galerkin half-width M (default 2·n_max + 16)
    #[arg(long)]
    truncation: Option<usize>,
    /// Order m >= 2 of the recursive estimate; 0 disables it
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long)]
    no_first: bool,
    #[arg(long)]
    no_second: bool,
    /// Cutoff K of the iterated sums
    #[arg(long)]
    cutoff: Option<usize>,
    /// Half-width of the matrix-free pair refinement
    #[arg(long)]
    refine: Option<usize>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BandsArgs {
    #[command(flatten)]
    potential: PotentialArgs,
    #[arg(long, default_value_t = 32)]
    truncation: usize,
    #[arg(long, default_value_t = 8)]
    bands: usize,
    /// Number of quasimomenta, spaced evenly on (−π, π]
    #[arg(long, default_value_t = 16)]
    grid_points: usize,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    potential: PotentialArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "periodic")]
    parity: Parity,
    /// Depth m of the E-recursion
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Fourier table half-width (and series cutoff)
    #[arg(long, default_value_t = 256)]
    k_max: usize,
    /// Threshold ε of the non-degeneracy conditions
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct KpArgs {
    #[arg(long)]
    b: f64,
    /// Cut position as p/q
    #[arg(long)]
    c: String,
    #[arg(long)]
    k: i64,
}

#[derive(Args)]
struct FitArgs {
    /// CSV file with an `n` column
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    column: String,
    /// Restrict to rows with this parity
    #[arg(long)]
    parity: Option<Parity>,
    #[arg(long)]
    n_min: Option<f64>,
    #[arg(long)]
    n_max: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("HILLGAPS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("HILLGAPS_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Gaps(a) => gaps(a),
        Command::Bands(a) => bands(a),
        Command::Estimate(a) => estimate(a),
        Command::Kp(a) => kp(a),
        Command::Fit(a) => fit(a),
    }
}

fn gaps(a: GapsArgs) -> Result<(), Error> {
    let cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let n_max = a
                .n_max
                .ok_or_else(|| Error::InvalidArgument("--n-max is required without --config".into()))?;
            let mut cfg = ExperimentConfig::new(a.potential.spec()?, a.n_min, n_max);
            cfg.parity = a.parity;
            cfg.truncation = a.truncation;
            cfg.orders = OrderSelection {
                first: !a.no_first,
                second: !a.no_second,
                recursion: (a.order > 0).then_some(a.order),
            };
            cfg.series_cutoff = a.cutoff;
            cfg.refine_half_width = a.refine;
            cfg.format = a.format;
            cfg.output = a.output.clone();
            cfg
        }
    };
    let rows = run_gap_experiment(&cfg)?;
    emit_report(&rows, cfg.format, cfg.output.as_deref())
}

fn bands(a: BandsArgs) -> Result<(), Error> {
    if a.grid_points == 0 {
        return Err(Error::InvalidArgument("--grid-points must be positive".into()));
    }
    let p = a.potential.spec()?.potential()?;
    let pi = std::f64::consts::PI;
    let grid: Vec<f64> = (1..=a.grid_points)
        .map(|i| -pi + 2.0 * pi * i as f64 / a.grid_points as f64)
        .collect();
    let cfg = GalerkinConfig::new(0.0, a.truncation);
    cfg.validate()?;
    let bands = band_structure(&p, &grid, a.bands, &cfg)?;
    println!("band,min,max");
    for b in bands {
        println!("{},{},{}", b.index, b.min, b.max);
    }
    Ok(())
}

fn estimate(a: EstimateArgs) -> Result<(), Error> {
    if a.n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()));
    }
    let p = a.potential.spec()?.potential()?;
    let t = fourier_table(&p, a.k_max)?;
    let d = derived_coeffs(&t, t.k_max())?;
    let sp = SeriesParams::new(a.k_max);
    let (n, parity) = (a.n, a.parity);
    let kappa = parity.kappa(n);
    let first = [eig_first_order(&t, n, 1, parity)?, eig_first_order(&t, n, 2, parity)?];
    let second = [
        eig_second_order(&t, &d, n, 1, parity, &sp)?,
        eig_second_order(&t, &d, n, 2, parity, &sp)?,
    ];
    let rec = [
        e_recursion(&t, parity, n, 1, a.order, &sp)?,
        e_recursion(&t, parity, n, 2, a.order, &sp)?,
    ];
    let q = t.get(kappa);
    let mut out = json!({
        "n": n,
        "parity": parity,
        "kappa": kappa,
        "free_level": parity.free_level::<f64>(n) + t.mean_shift(),
        "q_kappa": [q.re, q.im],
        "first_order": first,
        "second_order": second,
        "recursion": rec,
        "gap_first_order": gap_first_order(&t, kappa),
        "gap_second_order": gap_second_order(&t, &d, kappa),
    });
    if a.order >= 2 {
        out["gap_order_m"] = json!(gap_order_m(&t, n, a.order, parity, &sp)?);
    }
    if let Some(eps) = a.eps {
        let mut cond = serde_json::Map::new();
        for (name, kind) in [
            ("43", ConditionKind::FirstOrder),
            ("49", ConditionKind::SecondOrder),
            ("52", ConditionKind::Recursion),
        ] {
            let ok = condition_check(&t, &d, parity, n, eps, kind, a.order.max(1), &sp)?;
            cond.insert(name.into(), json!(ok));
        }
        out["conditions"] = serde_json::Value::Object(cond);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn kp(a: KpArgs) -> Result<(), Error> {
    let params = kp_make(a.b, parse_ratio(&a.c)?)?;
    let k = a.k;
    let q = kp_qk::<f64>(&params, k)?;
    let d = kp_derived::<f64>(&params, k)?;
    println!("a = {}", params.a);
    println!("b = {}", params.b);
    println!("c = {}", params.c);
    println!("q_{k} = {} {:+}i", q.re, q.im);
    println!("Q_0 = {}", d.q0);
    println!("Q_{k} = {} {:+}i", d.qk.re, d.qk.im);
    println!("S_{k}_leading = {} {:+}i", d.sk_leading.re, d.sk_leading.im);
    println!("gap_leading = {}", kp_gap_leading::<f64>(&params, k)?);
    println!("classification = {}", kp_rate_classify(&params, k).name());
    Ok(())
}

fn fit(a: FitArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&a.input)?;
    let mut points = csv_column_for(&text, &a.column, a.parity)?;
    points.retain(|&(n, _)| a.n_min.is_none_or(|lo| n >= lo) && a.n_max.is_none_or(|hi| n <= hi));
    let f = fit_decay_rate(&points)?;
    println!("slope = {}", f.slope);
    println!("intercept = {}", f.intercept);
    println!("r_squared = {}", f.r_squared);
    println!("used = {}", f.used);
    println!("dropped = {}", f.dropped);
    Ok(())
}
