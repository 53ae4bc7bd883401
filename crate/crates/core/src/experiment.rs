//! Oracle-versus-estimator runs, decay fits and report output.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{gap_first_order, gap_order_m, gap_second_order, SeriesParams};
use crate::galerkin::{spectral_pairs, GalerkinConfig};
use crate::kronig_penney::{kp_make, parse_ratio};
use crate::potential::{derived_coeffs, fourier_table, PotentialFile, TrigPoly};
use crate::scalar::linear_fit;
use crate::{Error, Parity, Potential, Result};

/// Where the potential of an experiment comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Free,
    /// `2a·cos(2πx)`.
    Mathieu { a: f64 },
    /// Step potential with mean zero; `c` as `"p/q"`.
    KronigPenney { b: f64, c: String },
    RandomTrig { degree: usize, scale: f64, seed: u64 },
    File { path: PathBuf },
}

impl PotentialSpec {
    pub fn potential(&self) -> Result<Potential<f64>> {
        match self {
            PotentialSpec::Free => Ok(Potential::zero()),
            PotentialSpec::Mathieu { a } => Ok(Potential::mathieu(*a)),
            PotentialSpec::KronigPenney { b, c } => Ok(kp_make(*b, parse_ratio(c)?)?.potential()),
            PotentialSpec::RandomTrig { degree, scale, seed } => {
                Ok(Potential::TrigPoly(TrigPoly::random(*degree, *scale, *seed)))
            }
            PotentialSpec::File { path } => PotentialFile::load(path)?.to_potential(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParitySelection {
    Periodic,
    Antiperiodic,
    Both,
}

impl ParitySelection {
    pub fn parities(self) -> Vec<Parity> {
        match self {
            ParitySelection::Periodic => vec![Parity::Periodic],
            ParitySelection::Antiperiodic => vec![Parity::Antiperiodic],
            ParitySelection::Both => vec![Parity::Periodic, Parity::Antiperiodic],
        }
    }
}

impl std::str::FromStr for ParitySelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(ParitySelection::Periodic),
            "antiperiodic" => Ok(ParitySelection::Antiperiodic),
            "both" => Ok(ParitySelection::Both),
            other => Err(Error::InvalidArgument(format!("unknown parity selection '{other}'"))),
        }
    }
}

/// Which estimates go into the report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSelection {
    #[serde(default = "yes")]
    pub first: bool,
    #[serde(default = "yes")]
    pub second: bool,
    /// `m ≥ 2` of the recursive estimate, if wanted.
    #[serde(default)]
    pub recursion: Option<usize>,
}

fn yes() -> bool {
    true
}

impl Default for OrderSelection {
    fn default() -> Self {
        Self {
            first: true,
            second: true,
            recursion: Some(2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format '{other}'"))),
        }
    }
}

/// JSON schema of a `gaps` run:
///
/// ```json
/// {
///   "potential": {"preset": "kronig_penney", "b": 1.0, "c": "1/2"},
///   "parity": "both",
///   "n_min": 1,
///   "n_max": 40,
///   "truncation": 96,
///   "orders": {"first": true, "second": true, "recursion": 2},
///   "series_cutoff": null,
///   "refine_half_width": null,
///   "format": "csv",
///   "output": "gaps.csv"
/// }
/// ```
///
/// Omitted optional fields take the defaults of [`ExperimentConfig::new`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialSpec,
    #[serde(default = "both")]
    pub parity: ParitySelection,
    #[serde(default = "one")]
    pub n_min: usize,
    pub n_max: usize,
    /// Galerkin half-width `M`; defaults to `2·n_max + 16`.
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub orders: OrderSelection,
    /// Cutoff `K` of the iterated sums; defaults to the table half-width.
    #[serde(default)]
    pub series_cutoff: Option<usize>,
    #[serde(default)]
    pub refine_half_width: Option<usize>,
    #[serde(default = "csv")]
    pub format: ReportFormat,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn both() -> ParitySelection {
    ParitySelection::Both
}

fn one() -> usize {
    1
}

fn csv() -> ReportFormat {
    ReportFormat::Csv
}

impl ExperimentConfig {
    pub fn new(potential: PotentialSpec, n_min: usize, n_max: usize) -> Self {
        Self {
            potential,
            parity: ParitySelection::Both,
            n_min,
            n_max,
            truncation: None,
            orders: OrderSelection::default(),
            series_cutoff: None,
            refine_half_width: None,
            format: ReportFormat::Csv,
            output: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn truncation(&self) -> usize {
        self.truncation.unwrap_or(2 * self.n_max + 16)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= n_min <= n_max, got n_min = {}, n_max = {}",
                self.n_min, self.n_max
            )));
        }
        if self.truncation() < 2 * self.n_max + 16 {
            return Err(Error::InvalidArgument(format!(
                "truncation {} is below 2·n_max + 16 = {}",
                self.truncation(),
                2 * self.n_max + 16
            )));
        }
        if let Some(m) = self.orders.recursion {
            if m < 2 {
                return Err(Error::InvalidArgument("recursion order must be at least 2".into()));
            }
        }
        if self.series_cutoff == Some(0) {
            return Err(Error::InvalidArgument("series cutoff must be at least 1".into()));
        }
        Ok(())
    }
}

/// One line of a gap report. Absent orders are `None` (blank in CSV).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReportRow {
    pub n: usize,
    pub parity: Parity,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap_oracle: f64,
    pub gap_o1: Option<f64>,
    pub gap_o2: Option<f64>,
    pub gap_om: Option<f64>,
    pub err_o1: Option<f64>,
    pub err_o2: Option<f64>,
    pub err_om: Option<f64>,
    pub trunc_err: f64,
}

pub const CSV_HEADER: &str = "n,parity,lambda1,lambda2,gap_oracle,gap_o1,gap_o2,gap_om,err_o1,err_o2,err_om,trunc_err";

/// Oracle gaps and the selected estimates for every `n` and parity.
/// Rows are ordered by parity (periodic first), then `n`.
pub fn run_gap_experiment(cfg: &ExperimentConfig) -> Result<Vec<GapReportRow>> {
    cfg.validate()?;
    let potential = cfg.potential.potential()?;
    let m = cfg.truncation();
    let mut rows = Vec::new();
    for parity in cfg.parity.parities() {
        let mut gcfg = GalerkinConfig::for_parity(parity, m);
        if let Some(r) = cfg.refine_half_width {
            gcfg = gcfg.with_refinement(r);
        }
        let table = fourier_table(&potential, gcfg.table_width())?;
        let derived = derived_coeffs(&table, table.k_max())?;
        let sp = SeriesParams::new(cfg.series_cutoff.unwrap_or(table.k_max()));
        let pairs = spectral_pairs(&table, parity, cfg.n_max, &gcfg)?;
        let part: Result<Vec<GapReportRow>> = (cfg.n_min..=cfg.n_max)
            .into_par_iter()
            .map(|n| {
                let pair = pairs
                    .pair(n)
                    .ok_or_else(|| Error::InvalidArgument(format!("pair {n} missing from oracle table")))?;
                let kappa = parity.kappa(n);
                let gap_o1 = cfg.orders.first.then(|| gap_first_order(&table, kappa));
                let gap_o2 = cfg.orders.second.then(|| gap_second_order(&table, &derived, kappa));
                let gap_om = cfg
                    .orders
                    .recursion
                    .map(|order| gap_order_m(&table, n, order, parity, &sp))
                    .transpose()?;
                let err = |g: Option<f64>| g.map(|g| (pair.gap - g).abs());
                Ok(GapReportRow {
                    n,
                    parity,
                    lambda1: pair.lower,
                    lambda2: pair.upper,
                    gap_oracle: pair.gap,
                    gap_o1,
                    gap_o2,
                    gap_om,
                    err_o1: err(gap_o1),
                    err_o2: err(gap_o2),
                    err_om: err(gap_om),
                    trunc_err: pair.trunc_err,
                })
            })
            .collect();
        rows.extend(part?);
    }
    Ok(rows)
}

/// Least-squares fit of `ln e_n = slope·ln n + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points used.
    pub used: usize,
    /// Points with `e_n = 0` that were left out.
    pub dropped: usize,
}

/// Fits `(ln n, ln e_n)` after dropping zero errors; needs four positive points.
pub fn fit_decay_rate(points: &[(f64, f64)]) -> Result<DecayFit> {
    for &(n, e) in points {
        if !(n > 0.0) || !(e >= 0.0) || !e.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid fit point ({n}, {e})")));
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|&&(_, e)| e > 0.0)
        .map(|&(n, e)| (n.ln(), e.ln()))
        .unzip();
    let dropped = points.len() - xs.len();
    if xs.len() < 4 {
        return Err(Error::InsufficientFitData {
            positive: xs.len(),
            dropped,
        });
    }
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        slope,
        intercept,
        r_squared,
        used: xs.len(),
        dropped,
    })
}

/// Report text in the requested format, newline terminated.
pub fn render_report(rows: &[GapReportRow], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(csv_error)?;
            }
            let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                .expect("csv output is UTF-8");
            Ok(format!("{CSV_HEADER}\n{body}"))
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(rows: &[GapReportRow], format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let text = render_report(rows, format)?;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses CSV report text back into rows.
pub fn parse_csv_report(text: &str) -> Result<Vec<GapReportRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

/// `(n, value)` pairs of one numeric column of a CSV file with an `n` column.
/// Blank cells are skipped.
pub fn csv_column(text: &str, column: &str) -> Result<Vec<(f64, f64)>> {
    csv_column_for(text, column, None)
}

/// As [`csv_column`], keeping only rows whose `parity` cell matches.
pub fn csv_column_for(text: &str, column: &str, parity: Option<Parity>) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(csv_error)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no column '{name}' in CSV header")))
    };
    let (ni, ci) = (find("n")?, find(column)?);
    let pi = parity.map(|_| find("parity")).transpose()?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("non-numeric CSV cell '{s}'")))
    };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        if let (Some(i), Some(want)) = (pi, parity) {
            if rec.get(i).map(str::trim) != Some(want.name()) {
                continue;
            }
        }
        let cell = rec.get(ci).unwrap_or("").trim();
        if cell.is_empty() {
            continue;
        }
        out.push((parse(rec.get(ni).unwrap_or(""))?, parse(cell)?));
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("CSV: {other:?}")),
    }
}
