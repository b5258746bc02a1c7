//! `fm2i`: transform, forecast and benchmark time series from the command
//! line.
//!
//! Exit codes: 0 success, 1 unexpected failure, 2 input error, 3 no
//! feasible model, 4 incomplete method comparison.

mod io;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fm2i_core::bench::{self, compare, naive_forecast, MethodForecasts};
use fm2i_core::imaging::{encode, export_ppm, EncodingSpec, Technique};
use fm2i_core::series::{difference, minmax_scale, split};
use fm2i_core::transforms::{build, DEFAULT_CLAMP_EPS};
use fm2i_core::tuner::{forecast, tune, ConfigSpace, ModelConfig, Strategy, Tuned};
use fm2i_core::{Error, Execution, TimeSeries, TransformKind};
use serde_json::json;

use crate::io::{create_dir, forecast_csv, load_series, read_forecast_csv, write, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "fm2i", version, about = "Forecasting by matrix-to-image inpainting")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Recorded in the manifest; the pipeline itself is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run every loop sequentially.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Frequent,
    ShortMemory,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump a series' matrix representation and its encoded image.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        kind: TransformKind,
        #[arg(long)]
        out: PathBuf,
        /// Series scaling interval `lo,hi` (default: the kind's interval).
        #[arg(long, value_parser = parse_pair)]
        bounds: Option<(f64, f64)>,
        #[arg(long)]
        differenced: bool,
        /// Series to use when the input holds several.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value = "dynamic")]
        encoding: Technique,
    },
    /// Forecast every series of the input.
    Forecast {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        horizon: usize,
        /// Config-space file; a single config is used as is, several are tuned.
        #[arg(long, conflicts_with = "auto", required_unless_present = "auto")]
        config: Option<PathBuf>,
        /// Tune over the default config space.
        #[arg(long)]
        auto: bool,
        /// Hold out the last `horizon` values and report metrics on them.
        #[arg(long)]
        holdout: bool,
        #[arg(long, value_enum, default_value = "frequent")]
        strategy: StrategyArg,
        /// Prefix window of the short-memory strategy.
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare tuned FM2I, Naive and external forecasts on a dataset.
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        /// Directory of `<method>.csv` files with `id,step,value` rows.
        #[arg(long)]
        methods: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "frequent")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("invalid bounds {a},{b}"));
    }
    Ok((a, b))
}

fn strategy(arg: StrategyArg, window: usize) -> Strategy {
    match arg {
        StrategyArg::Frequent => Strategy::Frequent,
        StrategyArg::ShortMemory => Strategy::ShortMemory(window.max(1)),
    }
}

fn strategy_name(s: Strategy) -> String {
    match s {
        Strategy::Frequent => "frequent".into(),
        Strategy::ShortMemory(w) => format!("short-memory:{w}"),
    }
}

/// Exit code for an error chain.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e.root() {
            Error::MissingForecasts(_) => 4,
            Error::NoFeasibleModel
            | Error::InsufficientContext { .. }
            | Error::GcSingularity { .. }
            | Error::TooShort { .. } => 3,
            Error::Io(_)
            | Error::Schema(_)
            | Error::Config { .. }
            | Error::Ppm(_)
            | Error::NonFinite { .. }
            | Error::InvalidBounds { .. }
            | Error::OutOfRange { .. }
            | Error::ZeroHorizon
            | Error::HorizonExceedsSeries { .. }
            | Error::InvalidPatch(_) => 2,
            Error::Stage { .. } => 1,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("cannot configure thread pool")?;
    }
    let exec = if cli.common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Transform {
            input,
            kind,
            out,
            bounds,
            differenced,
            id,
            encoding,
        } => cmd_transform(&cli.common, &input, kind, &out, bounds, differenced, id.as_deref(), encoding),
        Command::Forecast {
            input,
            horizon,
            config,
            auto: _,
            holdout,
            strategy: s,
            window,
            out,
        } => cmd_forecast(
            &cli.common,
            exec,
            &input,
            horizon,
            config.as_deref(),
            holdout,
            strategy(s, window),
            &out,
        ),
        Command::Bench {
            dataset,
            methods,
            config,
            strategy: s,
            window,
            out,
        } => cmd_bench(
            &cli.common,
            exec,
            &dataset,
            methods.as_deref(),
            config.as_deref(),
            strategy(s, window),
            &out,
        ),
    }
}

fn manifest(common: &Common, command: &str, config: serde_json::Value, inputs: Vec<PathBuf>, out: &Path) -> RunManifest {
    RunManifest {
        seed: common.seed,
        threads: common.threads,
        ..RunManifest::new(command, config, inputs, out)
    }
}

fn pick<'a>(series: &'a [TimeSeries], id: Option<&str>) -> Result<&'a TimeSeries> {
    match id {
        Some(id) => series
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Config {
                line: 0,
                message: format!("no series with id '{id}'"),
            })
            .map_err(Into::into),
        None => series.first().ok_or_else(|| Error::TooShort { needed: 1, got: 0 }.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_transform(
    common: &Common,
    input: &Path,
    kind: TransformKind,
    out: &Path,
    bounds: Option<(f64, f64)>,
    differenced: bool,
    id: Option<&str>,
    encoding: Technique,
) -> Result<()> {
    let all = load_series(input)?;
    let ts = pick(&all, id)?;
    let (lo, hi) = bounds.unwrap_or(kind.series_bounds());
    let work = if differenced {
        difference(ts.values())?.0
    } else {
        ts.values().to_vec()
    };
    let (x, record) = minmax_scale(&work, lo, hi)?;
    let (repr, ctx) = build(kind, &x, DEFAULT_CLAMP_EPS, (0.0, 1.0)).context("transform stage")?;
    if ctx.clamped > 0 {
        eprintln!(
            "warning: {} value(s) clamped into [{}, {}] for {kind}",
            ctx.clamped,
            DEFAULT_CLAMP_EPS,
            1.0 - DEFAULT_CLAMP_EPS
        );
    }
    let side = repr.side();
    let image = encode(
        repr.data.as_slice(),
        &vec![true; side * side],
        side,
        EncodingSpec::unit(encoding),
    )
    .context("encode stage")?;

    create_dir(out)?;
    let mut csv = Vec::new();
    repr.data.write_csv(&mut csv)?;
    write(&out.join("matrix.csv"), csv)?;
    export_ppm(&image.grid, &out.join("image.ppm"))?;
    manifest(
        common,
        "transform",
        json!({
            "id": ts.id,
            "kind": kind.as_str(),
            "series_bounds": [lo, hi],
            "differenced": differenced,
            "encoding": encoding.as_str(),
            "side": side,
            "clamped": ctx.clamped,
            "scaling": {"min": record.observed_min, "max": record.observed_max},
            "matrix_scaling": {"min": ctx.matrix.observed_min, "max": ctx.matrix.observed_max},
        }),
        vec![input.to_path_buf()],
        out,
    )
    .write(out)?;
    Ok(())
}

fn config_json(c: &ModelConfig) -> serde_json::Value {
    json!({
        "transform": c.kind.as_str(),
        "differenced": c.differenced,
        "series_bounds": [c.series_bounds.0, c.series_bounds.1],
        "matrix_bounds": [c.matrix_bounds.0, c.matrix_bounds.1],
        "encoding": c.encoding.as_str(),
        "patch": c.patch_size,
        "estimator": c.estimator.as_str(),
    })
}

fn load_space(config: Option<&Path>, exec: Execution) -> Result<ConfigSpace> {
    let mut space = match config {
        Some(p) => ConfigSpace::parse(
            &std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        )?,
        None => ConfigSpace::default(),
    };
    space.pipeline.exec = exec;
    Ok(space)
}

/// Selected config, its forecast and the tuning log when one was run.
struct Fitted {
    config: ModelConfig,
    values: Vec<f64>,
    tuned: Option<Tuned>,
}

fn fit(train: &[f64], space: &ConfigSpace, h: usize, strat: Strategy) -> Result<Fitted> {
    let inner = fm2i_core::tuner::Pipeline {
        exec: Execution::Sequential,
        ..space.pipeline
    };
    if space.len() == 1 {
        let config = space.configs[0];
        let values = forecast(train, &config, h, &inner)?.values;
        return Ok(Fitted {
            config,
            values,
            tuned: None,
        });
    }
    let tuned = tune(train, space, h, strat)?;
    let values = forecast(train, &tuned.config, h, &inner)?.values;
    Ok(Fitted {
        config: tuned.config,
        values,
        tuned: Some(tuned),
    })
}

fn write_log(dir: &Path, id: &str, tuned: &Tuned) -> Result<()> {
    let mut buf = Vec::new();
    tuned.log.write_csv(&mut buf)?;
    write(&dir.join(format!("{id}.csv")), buf)
}

#[allow(clippy::too_many_arguments)]
fn cmd_forecast(
    common: &Common,
    exec: Execution,
    input: &Path,
    h: usize,
    config: Option<&Path>,
    holdout: bool,
    strat: Strategy,
    out: &Path,
) -> Result<()> {
    let all = load_series(input)?;
    let space = load_space(config, exec)?;
    let mut splits = Vec::with_capacity(all.len());
    for ts in &all {
        if holdout && h > 0 {
            let s = split(ts, h).with_context(|| format!("series {}", ts.id))?;
            splits.push((s.train.values().to_vec(), Some(s.test)));
        } else {
            splits.push((ts.values().to_vec(), None));
        }
    }

    let fitted: Vec<Result<Option<Fitted>>> = exec.map(&splits, |(train, _)| {
        if h == 0 {
            return Ok(None);
        }
        fit(train, &space, h, strat).map(Some)
    });

    create_dir(out)?;
    let logs = out.join("logs");
    let mut rows = Vec::new();
    let mut selected = String::from("id,transform,differenced,series_lo,series_hi,patch,estimator,oracle\n");
    let mut metrics_csv = String::from("id,mse,rmse,mae,mape,smape\n");
    let mut plot = String::from("id,t,actual,forecast\n");
    for ((ts, (train, test)), fit) in all.iter().zip(&splits).zip(fitted) {
        let fit = fit.with_context(|| format!("series {}", ts.id))?;
        let values = fit.as_ref().map(|f| f.values.clone()).unwrap_or_default();
        if let Some(f) = &fit {
            let c = f.config;
            let oracle = f
                .tuned
                .as_ref()
                .and_then(|t| t.oracle)
                .map(|(o, _)| o.to_string())
                .unwrap_or_default();
            writeln!(
                selected,
                "{},{},{},{},{},{},{},{}",
                ts.id, c.kind, c.differenced, c.series_bounds.0, c.series_bounds.1, c.patch_size, c.estimator, oracle
            )?;
            if let Some(t) = &f.tuned {
                create_dir(&logs)?;
                write_log(&logs, &ts.id, t)?;
            }
        }
        if let Some(test) = test {
            let m = bench::metrics(&values, test)?;
            let na = |v: Option<f64>| v.map_or("NA".to_string(), |v| v.to_string());
            writeln!(
                metrics_csv,
                "{},{},{},{},{},{}",
                ts.id,
                m.mse,
                m.rmse,
                m.mae,
                na(m.mape),
                na(m.smape)
            )?;
        }
        for (t, v) in train.iter().enumerate() {
            writeln!(plot, "{},{t},{v},", ts.id)?;
        }
        for (k, v) in values.iter().enumerate() {
            let actual = test.as_ref().map(|a| a[k].to_string()).unwrap_or_default();
            writeln!(plot, "{},{},{actual},{v}", ts.id, train.len() + k)?;
        }
        rows.push((ts.id.clone(), values));
    }

    write(
        &out.join("forecast.csv"),
        forecast_csv(rows.iter().map(|(id, v)| (id.as_str(), v.as_slice()))),
    )?;
    write(&out.join("plot.csv"), plot)?;
    if h > 0 {
        write(&out.join("selected.csv"), selected)?;
    }
    if holdout {
        write(&out.join("metrics.csv"), metrics_csv)?;
    }
    let mut inputs = vec![input.to_path_buf()];
    inputs.extend(config.map(Path::to_path_buf));
    manifest(
        common,
        "forecast",
        json!({
            "horizon": h,
            "holdout": holdout,
            "strategy": strategy_name(strat),
            "configs": space.len(),
            "single_config": (space.len() == 1).then(|| config_json(&space.configs[0])),
            "min_prefix": space.min_prefix,
            "top_k": space.top_k,
            "search_region": format!("{:?}", space.pipeline.search_region),
            "band_factor": space.pipeline.band_factor,
            "sequential": common.sequential,
        }),
        inputs,
        out,
    )
    .write(out)?;
    Ok(())
}

/// How the FM2I forecast of a bench series was obtained.
#[derive(Debug, Clone)]
enum Provenance {
    Tuned(ModelConfig),
    /// Too short to tune; forecast with the fallback config.
    Default(ModelConfig),
    /// No FM2I forecast possible; naive values substituted.
    Naive(String),
}

/// Fallback for series too short to tune: plain MAC with the smallest patch.
fn fallback_config() -> ModelConfig {
    ModelConfig::new(TransformKind::Mac, false, 3)
}

fn bench_fm2i(train: &[f64], h: usize, space: &ConfigSpace, strat: Strategy) -> (Vec<f64>, Provenance, Option<Tuned>) {
    let inner = fm2i_core::tuner::Pipeline {
        exec: Execution::Sequential,
        ..space.pipeline
    };
    if let Ok(f) = fit(train, space, h, strat) {
        return (f.values, Provenance::Tuned(f.config), f.tuned);
    }
    let cfg = fallback_config();
    match forecast(train, &cfg, h, &inner) {
        Ok(f) => (f.values, Provenance::Default(cfg), None),
        Err(e) => {
            let values = naive_forecast(train, h).unwrap_or_default();
            (values, Provenance::Naive(e.to_string()), None)
        }
    }
}

fn cmd_bench(
    common: &Common,
    exec: Execution,
    dataset: &Path,
    methods_dir: Option<&Path>,
    config: Option<&Path>,
    strat: Strategy,
    out: &Path,
) -> Result<()> {
    let data = bench::ingest_csv(dataset)?;
    let space = load_space(config, exec)?;

    let mut external: Vec<(String, MethodForecasts)> = Vec::new();
    if let Some(dir) = methods_dir {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .with_context(|| format!("cannot read {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        for f in files {
            let name = f.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            external.push((name, read_forecast_csv(&f)?));
        }
    }

    let actuals: Vec<(String, Vec<f64>)> = data
        .series
        .iter()
        .map(|s| {
            let h = s.declared_horizon;
            (s.id.clone(), s.values()[s.len() - h..].to_vec())
        })
        .collect();
    // fail on gaps before spending time on tuning
    let mut gaps = Vec::new();
    for (name, fc) in &external {
        for (id, a) in &actuals {
            match fc.get(id) {
                None => gaps.push(format!("{name}: missing {id}")),
                Some(f) if f.len() != a.len() => {
                    gaps.push(format!("{name}: {id} has {} values, expected {}", f.len(), a.len()))
                }
                Some(_) => {}
            }
        }
    }
    if !gaps.is_empty() {
        return Err(Error::MissingForecasts(gaps).into());
    }

    let results = exec.map(&data.series, |s| {
        let h = s.declared_horizon;
        let train = &s.values()[..s.len() - h];
        bench_fm2i(train, h, &space, strat)
    });

    let mut fm2i = MethodForecasts::new();
    let mut naive = MethodForecasts::new();
    let mut selected = String::from("id,provenance,config,oracle\n");
    let logs = out.join("logs");
    create_dir(&logs)?;
    let mut fallbacks = BTreeMap::new();
    for (s, (values, prov, tuned)) in data.series.iter().zip(results) {
        let h = s.declared_horizon;
        let train = &s.values()[..s.len() - h];
        fm2i.insert(s.id.clone(), values);
        naive.insert(s.id.clone(), naive_forecast(train, h)?);
        let (tag, cfg) = match &prov {
            Provenance::Tuned(c) => ("tuned", c.to_string()),
            Provenance::Default(c) => ("default", c.to_string()),
            Provenance::Naive(reason) => ("naive", reason.replace(',', ";")),
        };
        *fallbacks.entry(tag).or_insert(0usize) += 1;
        let oracle = tuned
            .as_ref()
            .and_then(|t| t.oracle)
            .map(|(o, _)| o.to_string())
            .unwrap_or_default();
        writeln!(selected, "{},{tag},{cfg},{oracle}", s.id)?;
        if let Some(t) = &tuned {
            write_log(&logs, &s.id, t)?;
        }
    }

    let mut methods = vec![("FM2I".to_string(), fm2i), ("Naive".to_string(), naive)];
    methods.extend(external);
    let report = compare(&actuals, &methods)?;

    create_dir(&out.join("forecasts"))?;
    for (name, fc) in &methods {
        let rows = data.series.iter().map(|s| (s.id.as_str(), fc[&s.id].as_slice()));
        write(&out.join("forecasts").join(format!("{name}.csv")), forecast_csv(rows))?;
    }
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    write(&out.join("report.csv"), buf)?;
    let mut buf = Vec::new();
    report.write_per_series(&mut buf)?;
    write(&out.join("per_series.csv"), buf)?;
    let counts = data.period_counts();
    let title = format!(
        "sMAPE and ranks of error: {} series ({})",
        data.len(),
        counts
            .iter()
            .map(|(p, n)| format!("{n} {p}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    write(&out.join("report.txt"), report.to_text(&title))?;
    write(&out.join("selected.csv"), selected)?;

    let mut inputs = vec![dataset.to_path_buf()];
    inputs.extend(methods_dir.map(Path::to_path_buf));
    inputs.extend(config.map(Path::to_path_buf));
    manifest(
        common,
        "bench",
        json!({
            "series": data.len(),
            "methods": report.methods,
            "strategy": strategy_name(strat),
            "configs": space.len(),
            "min_prefix": space.min_prefix,
            "top_k": space.top_k,
            "fm2i_provenance": fallbacks,
            "sequential": common.sequential,
        }),
        inputs,
        out,
    )
    .write(out)?;
    Ok(())
}
