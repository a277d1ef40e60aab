//! `lrdcp`: simulate LRD series, run CUSUM/Wilcoxon change-point tests,
//! tabulate critical values, estimate power and compute efficiencies.
//!
//! Exit codes: 0 ok, 2 flag error, 3 input error, 4 missing critical value
//! or quantile entry, 5 numeric failure.

mod exit;
mod output;
mod study;

use std::fs;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lrd_changepoint::fgn::{FgnGenerator, LrdSpec};
use lrd_changepoint::hermite::{are_iid, are_lrd, compute_summary, QuadratureConfig};
use lrd_changepoint::io::{read_series, write_series};
use lrd_changepoint::montecarlo::{run_power_study, Design, QuantileKey, QuantileTable, SampleSize, ScaleConvention};
use lrd_changepoint::rng::GaussianStream;
use lrd_changepoint::stats::test_statistic;
use lrd_changepoint::transform::{shift_in_place, ChangeSpec};
use lrd_changepoint::{Method, Mode, Series64, Shift, Sidedness, Transform};

use exit::{CliError, CliResult};
use output::Metadata;

#[derive(Parser, Debug)]
#[command(
    name = "lrdcp",
    version,
    about = "Change-point tests for long-range dependent series"
)]
struct Cli {
    /// Base seed for all random streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Cusum,
    Wilcoxon,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cusum => Method::Cusum,
            MethodArg::Wilcoxon => Method::Wilcoxon,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Lrd,
    Iid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SidedArg {
    OneSided,
    TwoSided,
}

impl From<SidedArg> for Sidedness {
    fn from(s: SidedArg) -> Self {
        match s {
            SidedArg::OneSided => Sidedness::OneSided,
            SidedArg::TwoSided => Sidedness::TwoSided,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScaleArg {
    Hermite,
    Unit,
}

impl From<ScaleArg> for ScaleConvention {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Hermite => ScaleConvention::Hermite,
            ScaleArg::Unit => ScaleConvention::Unit,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Lrd)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.7)]
    hurst: f64,
    /// gaussian or pareto31.
    #[arg(long, default_value = "gaussian")]
    transform: String,
}

impl ModelArgs {
    fn mode(&self) -> CliResult<Mode> {
        Ok(match self.mode {
            ModeArg::Iid => Mode::Iid,
            ModeArg::Lrd => Mode::Lrd(LrdSpec::new(self.hurst)?),
        })
    }

    fn transform(&self) -> CliResult<Transform> {
        Transform::from_name(&self.transform).map_err(|e| CliError::flag(e.to_string()))
    }

    fn hurst(&self) -> f64 {
        match self.mode {
            ModeArg::Iid => 0.5,
            ModeArg::Lrd => self.hurst,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct StatArgs {
    #[arg(long, value_enum, default_value_t = SidedArg::TwoSided)]
    sidedness: SidedArg,
    #[arg(long, value_enum, default_value_t = ScaleArg::Hermite)]
    scale: ScaleArg,
    /// Use d_n = √Var(S_n) instead of n^H.
    #[arg(long)]
    exact_dn: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a series (fGn → transform → level shift), one value per line.
    Simulate {
        n: usize,
        #[command(flatten)]
        model: ModelArgs,
        /// Break fraction; the shift starts after index ⌊nτ⌋.
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Absolute shift h.
        #[arg(long, conflicts_with = "shift_constant")]
        shift: Option<f64>,
        /// Shift constant c with h = c·n^{-D/2}.
        #[arg(long)]
        shift_constant: Option<f64>,
    },
    /// Run a change-point test on a single-column series.
    Test {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Cusum)]
        method: MethodArg,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, conflicts_with = "quantile_table")]
        critical_value: Option<f64>,
        /// Quantile table; the finite-sample entry at n is preferred over the asymptotic one.
        #[arg(long)]
        quantile_table: Option<PathBuf>,
        /// Include the unnormalized path.
        #[arg(long)]
        emit_path: bool,
    },
    /// Estimate critical values and write a quantile table.
    Quantiles {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        stat: StatArgs,
        /// Significance levels.
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        alpha: Vec<f64>,
        /// Finite sample sizes.
        #[arg(long = "n", value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "cusum,wilcoxon")]
        method: Vec<MethodArg>,
        /// Also estimate the bridge-supremum quantile.
        #[arg(long)]
        asymptotic: bool,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// Grid size of the asymptotic simulation.
        #[arg(long, default_value_t = 8192)]
        grid: usize,
        /// Merge into an existing table.
        #[arg(long)]
        append: Option<PathBuf>,
    },
    /// Run a power study described by a study file.
    Power {
        #[arg(long)]
        study: PathBuf,
        #[arg(long)]
        quantile_table: Option<PathBuf>,
    },
    /// Asymptotic relative efficiency of Wilcoxon against CUSUM.
    Are {
        #[arg(long, default_value = "gaussian", conflicts_with = "iid")]
        transform: String,
        /// LRD parameter D = 2 − 2H.
        #[arg(long, default_value_t = 0.6, conflicts_with = "iid")]
        d: f64,
        /// i.i.d. Gaussian data.
        #[arg(long)]
        iid: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(exit::Status::Numeric as u8);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate {
            n,
            model,
            tau,
            shift,
            shift_constant,
        } => simulate(cli, *n, model, *tau, *shift, *shift_constant),
        Command::Test {
            input,
            method,
            model,
            stat,
            alpha,
            critical_value,
            quantile_table,
            emit_path,
        } => test(
            cli,
            input,
            (*method).into(),
            model,
            stat,
            *alpha,
            *critical_value,
            quantile_table.as_deref(),
            *emit_path,
        ),
        Command::Quantiles {
            model,
            stat,
            alpha,
            sizes,
            method,
            asymptotic,
            reps,
            grid,
            append,
        } => quantiles(
            cli,
            model,
            stat,
            alpha,
            sizes,
            method,
            *asymptotic,
            *reps,
            *grid,
            append.as_deref(),
        ),
        Command::Power { study, quantile_table } => power(cli, study, quantile_table.as_deref()),
        Command::Are { transform, d, iid } => are(cli, transform, *d, *iid),
    }
}

fn simulate(
    cli: &Cli,
    n: usize,
    model: &ModelArgs,
    tau: f64,
    shift: Option<f64>,
    shift_constant: Option<f64>,
) -> CliResult<()> {
    if n < 2 {
        return Err(CliError::flag("n must be ≥ 2"));
    }
    let mode = model.mode()?;
    let transform = model.transform()?;
    let spec = match shift_constant {
        Some(c) => ChangeSpec::new(tau, Shift::Constant(c))?,
        None => ChangeSpec::new(tau, Shift::Absolute(shift.unwrap_or(0.0)))?,
    };
    let d = match mode {
        Mode::Lrd(s) => s.d(),
        Mode::Iid => 1.0,
    };
    let h = spec.resolve_shift(n, d);
    let mut values = match mode {
        Mode::Lrd(s) => FgnGenerator::<f64>::new(n, s.hurst())?.sample(cli.seed).into_values(),
        Mode::Iid => {
            let mut v = vec![0.0; n];
            GaussianStream::from_seed(cli.seed).fill(&mut v);
            v
        }
    };
    transform.apply_in_place(&mut values);
    shift_in_place(&mut values, tau, h);
    if shift_constant.is_some() {
        eprintln!("resolved shift h={h}");
    }

    let mut meta = Metadata::new("simulate", cli.seed);
    meta.push("n", n)
        .push("mode", format!("{:?}", model.mode).to_lowercase())
        .push("hurst", model.hurst())
        .push("transform", transform.name())
        .push("tau", tau)
        .push("h", h);
    if let Some(c) = shift_constant {
        meta.push("shift_constant", c);
    }
    let mut out = output::open(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => {
            let fields: Vec<(&str, String)> = meta.fields().iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            write_series(&mut out, &values, &fields)?;
        }
        Format::Json => output::write_json(&mut out, &meta.wrap(json!({ "values": values })))?,
    }
    out.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn test(
    cli: &Cli,
    input: &std::path::Path,
    method: Method,
    model: &ModelArgs,
    stat: &StatArgs,
    alpha: f64,
    critical_value: Option<f64>,
    quantile_table: Option<&std::path::Path>,
    emit_path: bool,
) -> CliResult<()> {
    let file = fs::File::open(input).map_err(|e| CliError::input(format!("cannot read {}: {e}", input.display())))?;
    let series: Series64 = read_series(BufReader::new(file)).map_err(|e| CliError::input(e.to_string()))?;
    let n = series.len();
    let design = Design::new(n, model.mode()?, model.transform()?)?
        .with_sidedness(stat.sidedness.into())
        .with_scale(stat.scale.into())
        .with_exact_dn(stat.exact_dn);
    let norm = design.normalization(method)?;

    let critical = match (critical_value, quantile_table) {
        (Some(c), _) => c,
        (None, Some(path)) => {
            let table = read_table(path)?;
            let key = QuantileKey {
                alpha,
                hurst: design.hurst(),
                sample_size: SampleSize::Finite(n),
                sidedness: design.sidedness(),
                method,
                transform: design.transform().name().to_string(),
                scale: design.scale(),
            };
            let asym = QuantileKey {
                sample_size: SampleSize::Asymptotic,
                ..key.clone()
            };
            match table.get(&key).or_else(|| table.get(&asym)) {
                Some(v) => v,
                None => return Err(lrd_changepoint::Error::MissingQuantile(key.to_string()).into()),
            }
        }
        (None, None) => {
            return Err(CliError::new(
                exit::Status::MissingTable,
                "no critical value: pass --critical-value or --quantile-table",
            ))
        }
    };
    let report = test_statistic(&series, method, design.mode(), design.sidedness(), &norm, critical)?;

    let mut meta = Metadata::new("test", cli.seed);
    meta.push("input", input.display())
        .push("method", method.name())
        .push("mode", format!("{:?}", model.mode).to_lowercase())
        .push("hurst", design.hurst())
        .push("transform", design.transform().name())
        .push("sidedness", design.sidedness().name())
        .push("scale", design.scale().name())
        .push("exact_dn", stat.exact_dn)
        .push("alpha", alpha);
    let mut out = output::open(cli.output.as_deref())?;
    match cli.format {
        Format::Json => {
            let mut value = serde_json::to_value(&report).map_err(|e| CliError::input(e.to_string()))?;
            if !emit_path {
                value.as_object_mut().map(|m| m.remove("raw_path"));
            }
            output::write_json(&mut out, &meta.wrap(value))?;
        }
        Format::Csv => {
            write!(out, "{}", meta.comment_block())?;
            writeln!(
                out,
                "method,n,dn,hermite_scale,statistic,argmax_k,critical_value,reject"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                method.name(),
                report.n,
                report.dn,
                report.hermite_scale,
                report.statistic,
                report.argmax_k,
                report.critical_value,
                report.reject
            )?;
            if emit_path {
                writeln!(out, "# path")?;
                writeln!(out, "k,raw_path")?;
                for (i, v) in report.raw_path.iter().enumerate() {
                    writeln!(out, "{},{v}", i + 1)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn read_table(path: &std::path::Path) -> CliResult<QuantileTable> {
    let file = fs::File::open(path).map_err(|e| {
        CliError::new(
            exit::Status::MissingTable,
            format!("cannot read quantile table {}: {e}", path.display()),
        )
    })?;
    QuantileTable::read_csv(BufReader::new(file)).map_err(|e| CliError::input(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn quantiles(
    cli: &Cli,
    model: &ModelArgs,
    stat: &StatArgs,
    alphas: &[f64],
    sizes: &[usize],
    methods: &[MethodArg],
    asymptotic: bool,
    reps: usize,
    grid: usize,
    append: Option<&std::path::Path>,
) -> CliResult<()> {
    if sizes.is_empty() && !asymptotic {
        return Err(CliError::flag("nothing to estimate: pass --n and/or --asymptotic"));
    }
    let mut table = match append {
        Some(p) => read_table(p)?,
        None => QuantileTable::new(),
    };
    let mode = model.mode()?;
    let transform = model.transform()?;
    let sidedness: Sidedness = stat.sidedness.into();
    for &alpha in alphas {
        if asymptotic {
            table.add_asymptotic(model.hurst(), alpha, sidedness, grid, reps, cli.seed)?;
        }
        for &n in sizes {
            let design = Design::new(n, mode, transform.clone())?
                .with_sidedness(sidedness)
                .with_scale(stat.scale.into())
                .with_exact_dn(stat.exact_dn);
            for &m in methods {
                table.add_finite(&design, m.into(), alpha, reps, cli.seed)?;
            }
        }
    }

    let mut meta = Metadata::new("quantiles", cli.seed);
    meta.push("mode", format!("{:?}", model.mode).to_lowercase())
        .push("hurst", model.hurst())
        .push("transform", transform.name())
        .push("sidedness", sidedness.name())
        .push("scale", ScaleConvention::from(stat.scale).name())
        .push("reps", reps)
        .push("grid", grid);
    let mut out = output::open(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => {
            write!(out, "{}", meta.comment_block())?;
            table.write_csv(&mut out)?;
        }
        Format::Json => {
            let entries: Vec<_> = table
                .entries()
                .iter()
                .map(|e| {
                    json!({
                        "alpha": e.key.alpha,
                        "hurst": e.key.hurst,
                        "sample_size": e.key.sample_size.to_string(),
                        "sidedness": e.key.sidedness.name(),
                        "method": e.key.method.name(),
                        "transform": e.key.transform,
                        "scale": e.key.scale.name(),
                        "value": e.value,
                        "reps": e.reps,
                        "grid_n": e.grid_n,
                        "seed": e.seed,
                    })
                })
                .collect();
            output::write_json(&mut out, &meta.wrap(json!(entries)))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn power(cli: &Cli, study_path: &std::path::Path, table_path: Option<&std::path::Path>) -> CliResult<()> {
    let text = fs::read_to_string(study_path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", study_path.display())))?;
    let config = study::parse(&text, cli.seed)?;
    let table = match table_path {
        Some(p) => read_table(p)?,
        None => {
            let needed: Vec<String> = config.required_keys().iter().map(|k| k.to_string()).collect();
            return Err(CliError::new(
                exit::Status::MissingTable,
                format!("power needs --quantile-table with: {}", needed.join("; ")),
            ));
        }
    };
    let result = run_power_study(&config, &table)?;

    let mut meta = Metadata::new("power", config.seed);
    meta.push("study", study_path.display())
        .push("study_text", text.replace('\n', "\\n"));
    let mut out = output::open(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => {
            write!(out, "{}", meta.comment_block())?;
            result.write_csv(&mut out)?;
        }
        Format::Json => {
            let value = serde_json::to_value(&result).map_err(|e| CliError::input(e.to_string()))?;
            output::write_json(&mut out, &meta.wrap(value))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn are(cli: &Cli, transform: &str, d: f64, iid: bool) -> CliResult<()> {
    let mut meta = Metadata::new("are", cli.seed);
    let (value, b, extra) = if iid {
        meta.push("regime", "iid");
        let r = are_iid();
        (r.value, r.b, json!({}))
    } else {
        let t = Transform::from_name(transform).map_err(|e| CliError::flag(e.to_string()))?;
        let summary = compute_summary(&t, &QuadratureConfig::default())?;
        let r = are_lrd(&summary, d)?;
        meta.push("regime", "lrd").push("transform", t.name()).push("d", d);
        (
            r.value,
            r.b,
            json!({
                "a1": summary.a1,
                "j1_integral": summary.j1_integral,
                "f_sq_integral": summary.f_sq_integral,
                "shift_ratio": summary.shift_ratio,
            }),
        )
    };
    let mut out = output::open(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => {
            write!(out, "{}", meta.comment_block())?;
            let mut header = vec!["are".to_string(), "b".to_string()];
            let mut row = vec![value.to_string(), b.to_string()];
            if let Some(map) = extra.as_object() {
                for (k, v) in map {
                    header.push(k.clone());
                    row.push(v.to_string());
                }
            }
            writeln!(out, "{}", header.join(","))?;
            writeln!(out, "{}", row.join(","))?;
        }
        Format::Json => {
            let mut value = json!({ "are": value, "b": b });
            if let (Some(dst), Some(src)) = (value.as_object_mut(), extra.as_object()) {
                dst.extend(src.clone());
            }
            output::write_json(&mut out, &meta.wrap(value))?;
        }
    }
    out.flush()?;
    Ok(())
}
