//! Command-line front end.
//!
//! Every command writes its main output to `--out` and a run manifest next to it
//! (`<out>.manifest.json`). Only the manifest carries a timestamp, so reruns and
//! `replay --manifest` reproduce the outputs byte for byte.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{
    compare_rect, cutoff_table, efficiency_sweep, rect_systematic_error, scan_width, significance,
    width_range, WidthStrategy,
};
use crate::charfunc::{estimate_cf, uniform_grid};
use crate::error::{Error, Result};
use crate::filters::{verify_filter_axioms, NonclassicalityFilter};
use crate::io::{manifest_path, RunManifest, Table};
use crate::quasiprob::alpha_grid;
use crate::spats::{quadrature_second_moment, sample_quadratures, QuadratureDataset, SpatsParams};

#[derive(Debug, Parser)]
#[command(name = "nonclassical", version, about = "Nonclassicality quasiprobabilities from homodyne data")]
pub struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, value_parser = positive_usize)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate homodyne quadratures of a lossy single-photon-added thermal state.
    Simulate(SimulateArgs),
    /// Estimate the characteristic function of a dataset.
    Charfunc(CharfuncArgs),
    /// Reconstruct the filtered quasiprobability and its significance.
    Reconstruct(ReconstructArgs),
    /// Scan the autocorrelation-filter width for the most significant negativity.
    ScanWidth(ScanWidthArgs),
    /// Hard-cutoff reconstructions with their systematic error.
    CompareRect(CompareRectArgs),
    /// Mean significance versus detection efficiency.
    EfficiencySweep(SweepArgs),
    /// Check the four filter requirements numerically.
    VerifyFilter(VerifyArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FilterChoice {
    Autocorr,
    Rect,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = nonnegative_f64)]
    nbar: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = efficiency)]
    eta: f64,
    #[arg(long, value_parser = positive_usize)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CharfuncArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 8.0, allow_hyphen_values = true, value_parser = positive_f64)]
    bmax: f64,
    #[arg(long, default_value_t = crate::charfunc::DEFAULT_STEP, allow_hyphen_values = true, value_parser = positive_f64)]
    step: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct AlphaArgs {
    #[arg(long, default_value_t = crate::quasiprob::DEFAULT_ALPHA_MAX, allow_hyphen_values = true, value_parser = nonnegative_f64)]
    alpha_max: f64,
    /// Number of grid points on [0, alpha-max].
    #[arg(long, default_value_t = crate::quasiprob::DEFAULT_ALPHA_POINTS, value_parser = positive_usize)]
    alpha_steps: usize,
}

impl AlphaArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        alpha_grid(self.alpha_max, self.alpha_steps)
    }
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    filter: FilterChoice,
    #[arg(long, allow_hyphen_values = true, value_parser = positive_f64)]
    width: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = positive_f64)]
    cutoff: Option<f64>,
    #[command(flatten)]
    alpha: AlphaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ScanWidthArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_WIDTH_MIN, allow_hyphen_values = true, value_parser = positive_f64)]
    wmin: f64,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_WIDTH_MAX, allow_hyphen_values = true, value_parser = positive_f64)]
    wmax: f64,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_WIDTH_STEP, allow_hyphen_values = true, value_parser = positive_f64)]
    step: f64,
    #[command(flatten)]
    alpha: AlphaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareRectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2.2,3.8", allow_hyphen_values = true, value_parser = positive_f64)]
    cutoffs: Vec<f64>,
    #[command(flatten)]
    alpha: AlphaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = nonnegative_f64)]
    nbar: f64,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true, value_parser = efficiency)]
    etas: Vec<f64>,
    #[arg(long, default_value_t = 100_000, value_parser = positive_usize)]
    samples: usize,
    /// First seed; datasets use `seed, seed+1, …`.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10, value_parser = positive_usize)]
    replicates: usize,
    /// Fixed width; without it the best width of the scan range is used per dataset.
    #[arg(long, allow_hyphen_values = true, value_parser = positive_f64)]
    width: Option<f64>,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_WIDTH_MIN, allow_hyphen_values = true, value_parser = positive_f64)]
    wmin: f64,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_WIDTH_MAX, allow_hyphen_values = true, value_parser = positive_f64)]
    wmax: f64,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_WIDTH_STEP, allow_hyphen_values = true, value_parser = positive_f64)]
    wstep: f64,
    #[command(flatten)]
    alpha: AlphaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    kind: FilterChoice,
    #[arg(long, allow_hyphen_values = true, value_parser = positive_f64)]
    width: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = positive_f64)]
    cutoff: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be > 0"))
    }
}

fn nonnegative_f64(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be >= 0"))
    }
}

fn efficiency(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} must lie in (0, 1]"))
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let recorded: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli, recorded) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, recorded: Vec<String>) -> Result<()> {
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid("threads", e.to_string()))?
            .install(|| dispatch(cli.command, recorded)),
        None => dispatch(cli.command, recorded),
    }
}

fn dispatch(command: Command, recorded: Vec<String>) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a, recorded),
        Command::Charfunc(a) => charfunc(a, recorded),
        Command::Reconstruct(a) => reconstruct(a, recorded),
        Command::ScanWidth(a) => scan(a, recorded),
        Command::CompareRect(a) => compare(a, recorded),
        Command::EfficiencySweep(a) => sweep(a, recorded),
        Command::VerifyFilter(a) => verify(a, recorded),
        Command::Replay(a) => replay(a),
    }
}

fn finish(out: &Path, command: &str, recorded: Vec<String>, parameters: serde_json::Value) -> Result<()> {
    RunManifest::new(command, recorded, parameters).write(&manifest_path(out))
}

fn manifest_name(out: &Path) -> String {
    manifest_path(out)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn write_text(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, serde_json::to_string_pretty(value)? + "\n")
}

fn write_table(path: &Path, table: Table, format: Format, manifest: String, extra: serde_json::Value) -> Result<()> {
    match format {
        Format::Csv => table.with_meta("manifest", manifest).write_csv(path),
        Format::Json => {
            let columns: serde_json::Map<String, serde_json::Value> = table
                .headers
                .iter()
                .zip(&table.columns)
                .map(|(h, c)| (h.clone(), json!(c.iter().map(|v| finite_or_null(*v)).collect::<Vec<_>>())))
                .collect();
            write_json(
                path,
                &json!({ "manifest": manifest, "metadata": extra, "columns": columns }),
            )
        }
    }
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetJson {
    nbar: f64,
    eta: f64,
    seed: u64,
    convention: String,
    samples: Vec<f64>,
}

/// Reads a dataset written by `simulate` in either format.
pub fn read_dataset(path: &Path) -> Result<QuadratureDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('{') {
        let d: DatasetJson = serde_json::from_str(&text).map_err(|e| Error::data(path, e.to_string()))?;
        let params = SpatsParams::new(d.nbar, d.eta).map_err(|e| Error::data(path, e.to_string()))?;
        if d.samples.is_empty() {
            return Err(Error::data(path, "dataset contains no samples"));
        }
        QuadratureDataset::new(d.samples, params, d.seed)
    } else {
        QuadratureDataset::read_csv(path)
    }
}

fn simulate(a: SimulateArgs, recorded: Vec<String>) -> Result<()> {
    let params = SpatsParams::new(a.nbar, a.eta)?;
    let data = sample_quadratures(&params, a.samples, a.seed)?;
    let out = &a.output.out;
    match a.output.format {
        Format::Csv => data.write_csv(out)?,
        Format::Json => write_json(
            out,
            &DatasetJson {
                nbar: a.nbar,
                eta: a.eta,
                seed: a.seed,
                convention: crate::spats::QUADRATURE_CONVENTION.into(),
                samples: data.samples().to_vec(),
            },
        )?,
    }
    let mean = data.mean();
    let variance = data.second_moment() - mean * mean;
    println!("samples {}  mean {mean:.5}  (analytic 0)", data.count());
    println!("variance {variance:.5}  (analytic {:.5})", quadrature_second_moment(&params));
    finish(
        out,
        "simulate",
        recorded,
        json!({ "params": params, "samples": a.samples, "seed": a.seed, "format": a.output.format }),
    )
}

fn charfunc(a: CharfuncArgs, recorded: Vec<String>) -> Result<()> {
    let data = read_dataset(&a.input)?;
    let cf = estimate_cf(&data, &uniform_grid(a.bmax, a.step))?;
    let out = &a.output.out;
    let meta = json!({
        "input": a.input, "N": data.count(), "seed": data.seed(), "params": data.params(),
        "bmax": a.bmax, "step": a.step,
    });
    println!(
        "{} radii on [0, {}]  max |Im Φ̂|/σ = {:.2}",
        cf.radii().len(),
        cf.radii().last().copied().unwrap_or(0.0),
        cf.max_imag_over_sigma()
    );
    write_table(out, cf.to_table(), a.output.format, manifest_name(out), meta.clone())?;
    finish(out, "charfunc", recorded, meta)
}

fn filter_from(kind: FilterChoice, width: Option<f64>, cutoff: Option<f64>) -> Result<NonclassicalityFilter> {
    match kind {
        FilterChoice::Autocorr => {
            let w = width.ok_or_else(|| Error::invalid("width", "--filter autocorr requires --width"))?;
            NonclassicalityFilter::autocorrelation(w)
        }
        FilterChoice::Rect => {
            let c = cutoff.ok_or_else(|| Error::invalid("cutoff", "--filter rect requires --cutoff"))?;
            NonclassicalityFilter::rectangular(c)
        }
    }
}

fn reconstruct(a: ReconstructArgs, recorded: Vec<String>) -> Result<()> {
    let filter = filter_from(a.filter, a.width, a.cutoff)?;
    let grid = a.alpha.grid()?;
    let data = read_dataset(&a.input)?;
    let profile = crate::analysis::reconstruct(&data, &filter, &grid)?;
    let sig = significance(&profile)?;
    println!(
        "S_min = {:.3} at |α| = {}  (deepest negativity: S = {:.3} at |α| = {})",
        sig.s_min, sig.alpha_at_min, sig.s_at_p_min, sig.alpha_at_p_min
    );
    let out = &a.output.out;
    let meta = json!({
        "input": a.input, "filter": profile.filter, "N": data.count(), "seed": data.seed(),
        "params": data.params(), "integration": profile.settings, "alpha_grid": { "max": a.alpha.alpha_max, "points": a.alpha.alpha_steps },
        "significance": sig,
    });
    match a.output.format {
        Format::Csv => profile
            .to_table()
            .with_meta("seed", data.seed())
            .with_meta("nbar", format!("{:?}", data.params().nbar()))
            .with_meta("eta", format!("{:?}", data.params().eta()))
            .with_meta("S_min", format!("{:?}", sig.s_min))
            .with_meta("alpha_at_min", format!("{:?}", sig.alpha_at_min))
            .with_meta("manifest", manifest_name(out))
            .write_csv(out)?,
        Format::Json => write_json(
            out,
            &json!({
                "manifest": manifest_name(out),
                "metadata": meta,
                "alpha": profile.alpha_radii,
                "p": profile.values,
                "sigma": profile.sigmas,
                "significance": profile.significances().into_iter().map(finite_or_null).collect::<Vec<_>>(),
            }),
        )?,
    }
    finish(out, "reconstruct", recorded, meta)
}

fn scan(a: ScanWidthArgs, recorded: Vec<String>) -> Result<()> {
    let widths = width_range(a.wmin, a.wmax, a.step)?;
    let grid = a.alpha.grid()?;
    let data = read_dataset(&a.input)?;
    let result = scan_width(&data, &widths, &grid)?;
    println!("best width {}  S_min = {:.3}", result.best_width, result.best.s_min);
    let out = &a.output.out;
    let meta = json!({
        "input": a.input, "N": data.count(), "seed": data.seed(), "params": data.params(),
        "widths": widths, "alpha_grid": { "max": a.alpha.alpha_max, "points": a.alpha.alpha_steps },
        "best_width": result.best_width,
    });
    write_table(out, result.to_table(), a.output.format, manifest_name(out), meta.clone())?;
    finish(out, "scan-width", recorded, meta)
}

fn compare(a: CompareRectArgs, recorded: Vec<String>) -> Result<()> {
    let grid = a.alpha.grid()?;
    let data = read_dataset(&a.input)?;
    let rows = compare_rect(&data, &a.cutoffs, &grid)?;
    for r in &rows {
        println!(
            "cutoff {}  S_min = {:.3} at |α| = {}  P(0) = {:.4} ± {:.4}  max |bias| = {:.4}",
            r.cutoff, r.significance.s_min, r.significance.alpha_at_min, r.p_origin, r.sigma_origin, r.max_abs_bias
        );
    }
    let out = &a.output.out;
    let bands = a
        .cutoffs
        .iter()
        .map(|&c| rect_systematic_error(&data.params(), c, &grid))
        .collect::<Result<Vec<_>>>()?;
    let meta = json!({
        "input": a.input, "N": data.count(), "seed": data.seed(), "params": data.params(),
        "cutoffs": a.cutoffs, "alpha_grid": { "max": a.alpha.alpha_max, "points": a.alpha.alpha_steps },
        "bias_bands": bands,
    });
    write_table(out, cutoff_table(&rows), a.output.format, manifest_name(out), meta.clone())?;
    finish(out, "compare-rect", recorded, meta)
}

fn sweep(a: SweepArgs, recorded: Vec<String>) -> Result<()> {
    let grid = a.alpha.grid()?;
    let seeds: Vec<u64> = (0..a.replicates as u64).map(|i| a.seed.wrapping_add(i)).collect();
    let strategy = match a.width {
        Some(w) => WidthStrategy::Fixed(w),
        None => WidthStrategy::Scanned(width_range(a.wmin, a.wmax, a.wstep)?),
    };
    let result = efficiency_sweep(a.nbar, &a.etas, a.samples, &seeds, &strategy, &grid)?;
    for r in &result.rows {
        println!(
            "η = {}  mean S_min = {:.3}  W(0) = {:+.5}",
            r.eta, r.mean_s_min, r.wigner_origin
        );
    }
    let out = &a.output.out;
    let meta = json!({
        "nbar": a.nbar, "etas": a.etas, "samples": a.samples, "seeds": seeds, "width_strategy": strategy,
        "alpha_grid": { "max": a.alpha.alpha_max, "points": a.alpha.alpha_steps },
        "rows": result.rows,
    });
    write_table(out, result.to_table(), a.output.format, manifest_name(out), meta.clone())?;
    finish(out, "efficiency-sweep", recorded, meta)
}

fn verify(a: VerifyArgs, recorded: Vec<String>) -> Result<()> {
    let width = match a.kind {
        FilterChoice::Autocorr => a.width,
        FilterChoice::Rect => a.cutoff.or(a.width),
    };
    let filter = filter_from(a.kind, width, width)?;
    let report = verify_filter_axioms(&filter);
    for c in &report.checks {
        println!("{:<19} {}  margin {:+.3e}  {}", format!("{:?}", c.axiom), if c.passed { "pass" } else { "FAIL" }, c.margin, c.detail);
    }
    if let Some(out) = &a.out {
        match a.format {
            Format::Json => write_json(out, &json!({ "manifest": manifest_name(out), "report": report }))?,
            Format::Csv => {
                let mut t = Table::new(&["axiom", "passed", "margin"])
                    .with_meta("filter", report.filter.kind)
                    .with_meta("width", report.filter.width)
                    .with_meta("manifest", manifest_name(out));
                for (i, c) in report.checks.iter().enumerate() {
                    t.push_row(&[(i + 1) as f64, if c.passed { 1.0 } else { 0.0 }, c.margin]);
                }
                t.write_csv(out)?;
            }
        }
        finish(out, "verify-filter", recorded, json!({ "filter": report.filter }))?;
    }
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<()> {
    let manifest = RunManifest::read(&a.manifest)?;
    if manifest.args.first().map(String::as_str) == Some("replay") {
        return Err(Error::data(&a.manifest, "manifest records a replay"));
    }
    let mut args = vec!["nonclassical".to_string()];
    args.extend(manifest.args.iter().cloned());
    let cli = Cli::try_parse_from(&args).map_err(|e| Error::data(&a.manifest, e.to_string()))?;
    execute(cli, manifest.args)
}
