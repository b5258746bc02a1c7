//! End-to-end forecasting pipeline, progressive grid search and model-log
//! mining.
//!
//! Grid search repeats every configuration of a space over growing prefixes
//! of the training series, scores each pseudo-forecast by sMAPE and merges
//! the results into a log in (prefix, config) order before sorting. The log
//! is therefore a pure function of its inputs, whatever the execution
//! policy.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result, Stage};
use crate::exec::Execution;
use crate::imaging::{decode, encode, EncodingSpec, Technique};
use crate::inpaint::{inpaint, PatchConfig, SearchRegion};
use crate::series::{difference, minmax_scale};
use crate::transforms::{
    build, clamp_unit, extend_for_forecast, extract_forecast, Estimator, EstimatorPath, Matrix, MatrixRepr,
    TransformKind, DEFAULT_CLAMP_EPS,
};

/// One point of the configuration space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub kind: TransformKind,
    pub differenced: bool,
    pub series_bounds: (f64, f64),
    pub matrix_bounds: (f64, f64),
    pub encoding: Technique,
    pub patch_size: usize,
    pub estimator: Estimator,
}

impl ModelConfig {
    /// Config with the kind's mandatory series bounds and a `[0, 1]` matrix.
    pub fn new(kind: TransformKind, differenced: bool, patch_size: usize) -> Self {
        ModelConfig {
            kind,
            differenced,
            series_bounds: kind.series_bounds(),
            matrix_bounds: (0.0, 1.0),
            encoding: Technique::Dynamic,
            patch_size,
            estimator: Estimator::Auto,
        }
    }

    /// Enforces the per-kind series bounds: `[0, 1]` for GASF and
    /// `[eps, 1 - eps]` for the GC family.
    pub fn validate(&self, clamp_eps: f64) -> Result<()> {
        let (lo, hi) = self.series_bounds;
        let required = match self.kind {
            TransformKind::Gasf => Some((0.0, 1.0)),
            k if k.is_gc_family() => Some((clamp_eps, 1.0 - clamp_eps)),
            _ => None,
        };
        if let Some((rlo, rhi)) = required {
            if (lo - rlo).abs() > 1e-12 || (hi - rhi).abs() > 1e-12 {
                return Err(Error::InvalidBounds { lo, hi });
            }
        }
        crate::series::check_bounds(lo, hi)?;
        crate::series::check_bounds(self.matrix_bounds.0, self.matrix_bounds.1)
    }

    fn key(&self) -> (TransformKind, bool, usize, Estimator, Technique) {
        (self.kind, self.differenced, self.patch_size, self.estimator, self.encoding)
    }
}

impl Eq for ModelConfig {}

impl Ord for ModelConfig {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key()
            .cmp(&other.key())
            .then(self.series_bounds.0.total_cmp(&other.series_bounds.0))
            .then(self.series_bounds.1.total_cmp(&other.series_bounds.1))
            .then(self.matrix_bounds.0.total_cmp(&other.matrix_bounds.0))
            .then(self.matrix_bounds.1.total_cmp(&other.matrix_bounds.1))
    }
}

impl PartialOrd for ModelConfig {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{} bounds=[{},{}] patch={} enc={} est={}",
            self.kind,
            if self.differenced { "+diff" } else { "" },
            self.series_bounds.0,
            self.series_bounds.1,
            self.patch_size,
            self.encoding,
            self.estimator
        )
    }
}

/// Settings shared by every configuration of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pipeline {
    pub search_region: SearchRegion,
    /// Band width in units of the patch size.
    pub band_factor: usize,
    pub clamp_eps: f64,
    pub exec: Execution,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline {
            search_region: SearchRegion::Band,
            band_factor: 4,
            clamp_eps: DEFAULT_CLAMP_EPS,
            exec: Execution::default(),
        }
    }
}

impl Pipeline {
    pub fn patch(&self, patch_size: usize) -> PatchConfig {
        PatchConfig {
            patch_size,
            search_region: self.search_region,
            band_width: self.band_factor * patch_size,
        }
    }
}

/// Forecast plus the inversion rule used at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub values: Vec<f64>,
    pub paths: Vec<EstimatorPath>,
    /// Number of input values moved by the GC clamp.
    pub clamped: usize,
}

/// Full pipeline: optional differencing, scaling, transform, extension,
/// encoding, inpainting, decoding, extraction and inverse scalings.
pub fn forecast(series: &[f64], cfg: &ModelConfig, h: usize, pipe: &Pipeline) -> Result<Forecast> {
    if h == 0 {
        return Ok(Forecast {
            values: vec![],
            paths: vec![],
            clamped: 0,
        });
    }
    cfg.validate(pipe.clamp_eps).map_err(|e| e.at(Stage::Scale))?;
    let (work, last) = if cfg.differenced {
        let (d, _) = difference(series).map_err(|e| e.at(Stage::Difference))?;
        (d, series[series.len() - 1])
    } else {
        (series.to_vec(), 0.0)
    };
    let (lo, hi) = cfg.series_bounds;
    let (x, record) = minmax_scale(&work, lo, hi).map_err(|e| e.at(Stage::Scale))?;

    let (repr, ctx) = build(cfg.kind, &x, pipe.clamp_eps, cfg.matrix_bounds).map_err(|e| e.at(Stage::Transform))?;
    let (ext, mask) = extend_for_forecast(&repr, h);
    let side = ext.side();
    let spec = EncodingSpec {
        technique: cfg.encoding,
        value_lo: cfg.matrix_bounds.0,
        value_hi: cfg.matrix_bounds.1,
    };
    let image = encode(ext.data.as_slice(), &mask, side, spec).map_err(|e| e.at(Stage::Encode))?;
    let decoded = decode(&image);
    let filled = inpaint(&decoded, &mask, side, side, &pipe.patch(cfg.patch_size), pipe.exec)
        .map_err(|e| e.at(Stage::Inpaint))?;
    let filled = MatrixRepr {
        data: Matrix::from_vec(side, filled.values),
        ..ext
    };

    let known = if cfg.kind.is_gc_family() {
        clamp_unit(&x, pipe.clamp_eps).0
    } else {
        x
    };
    let extraction =
        extract_forecast(&filled, &ctx, &known, h, cfg.estimator).map_err(|e| e.at(Stage::Extract))?;

    let mut values: Vec<f64> = extraction.values.iter().map(|&v| record.unscale(v)).collect();
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index }.at(Stage::Unscale));
    }
    if cfg.differenced {
        let mut acc = last;
        for v in values.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    Ok(Forecast {
        values,
        paths: extraction.paths,
        clamped: ctx.clamped,
    })
}

/// Configuration space plus the search settings that go with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpace {
    pub configs: Vec<ModelConfig>,
    pub min_prefix: usize,
    pub top_k: usize,
    pub pipeline: Pipeline,
}

impl Default for ConfigSpace {
    /// Every transform, plain and differenced, patch sizes 3 to 11, dynamic
    /// encoding and the default estimator.
    fn default() -> Self {
        ConfigSpace::product(
            &TransformKind::ALL,
            &[false, true],
            &[3, 5, 7, 9, 11],
            &[Technique::Dynamic],
            &[Estimator::Auto],
            &[],
            (0.0, 1.0),
        )
    }
}

impl ConfigSpace {
    /// Cartesian product in argument order. `free_bounds` lists extra series
    /// bounds for kinds without a mandatory interval (STAM, MAC, RPM); when
    /// empty each kind uses its default bounds.
    pub fn product(
        kinds: &[TransformKind],
        differenced: &[bool],
        patches: &[usize],
        encodings: &[Technique],
        estimators: &[Estimator],
        free_bounds: &[(f64, f64)],
        matrix_bounds: (f64, f64),
    ) -> Self {
        let mut configs = Vec::new();
        for &kind in kinds {
            let constrained = kind == TransformKind::Gasf || kind.is_gc_family();
            let bounds: Vec<(f64, f64)> = if constrained || free_bounds.is_empty() {
                vec![kind.series_bounds()]
            } else {
                free_bounds.to_vec()
            };
            for &d in differenced {
                for &b in &bounds {
                    for &p in patches {
                        for &enc in encodings {
                            for &est in estimators {
                                configs.push(ModelConfig {
                                    series_bounds: b,
                                    matrix_bounds,
                                    encoding: enc,
                                    estimator: est,
                                    ..ModelConfig::new(kind, d, p)
                                });
                            }
                        }
                    }
                }
            }
        }
        ConfigSpace {
            configs,
            min_prefix: 12,
            top_k: 3,
            pipeline: Pipeline::default(),
        }
    }

    /// Parse `key = value` lines. `#` starts a comment. Keys:
    /// `transforms`, `differenced`, `patch_sizes`, `encodings`,
    /// `estimators` and `free_bounds` (`lo:hi` pairs) are comma-separated
    /// lists; `matrix_bounds` is one `lo:hi` pair; `min_prefix`, `top_k`,
    /// `band_factor` are integers; `search_region` is `band` or `full`;
    /// `clamp_eps` is a real. Omitted keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kinds = TransformKind::ALL.to_vec();
        let mut diffs = vec![false, true];
        let mut patches = vec![3, 5, 7, 9, 11];
        let mut encodings = vec![Technique::Dynamic];
        let mut estimators = vec![Estimator::Auto];
        let mut free_bounds = Vec::new();
        let mut matrix_bounds = (0.0, 1.0);
        let mut min_prefix = 12;
        let mut top_k = 3;
        let mut pipeline = Pipeline::default();

        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| Error::Config { line: no + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let pair = |s: &str| -> std::result::Result<(f64, f64), String> {
                let (a, b) = s.split_once(':').ok_or(format!("expected lo:hi, got '{s}'"))?;
                let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
                let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(format!("invalid bounds '{s}'"));
                }
                Ok((a, b))
            };
            let owned: Vec<String> = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect();
            let parse_list = |what: &str| -> std::result::Result<Vec<String>, String> {
                if owned.is_empty() {
                    Err(format!("{what} list is empty"))
                } else {
                    Ok(owned.clone())
                }
            };
            let res: std::result::Result<(), String> = (|| {
                match key {
                    "transforms" => {
                        kinds = parse_list(key)?.iter().map(|s| s.parse()).collect::<std::result::Result<_, _>>()?
                    }
                    "differenced" => {
                        diffs = parse_list(key)?
                            .iter()
                            .map(|s| match s.to_ascii_lowercase().as_str() {
                                "true" | "yes" | "1" => Ok(vec![true]),
                                "false" | "no" | "0" => Ok(vec![false]),
                                "both" => Ok(vec![false, true]),
                                other => Err(format!("invalid boolean '{other}'")),
                            })
                            .collect::<std::result::Result<Vec<_>, _>>()?
                            .concat();
                        diffs.dedup();
                    }
                    "patch_sizes" => {
                        patches = parse_list(key)?
                            .iter()
                            .map(|s| {
                                let p: usize = s.parse().map_err(|e| format!("patch size '{s}': {e}"))?;
                                if p < 3 || p.is_multiple_of(2) {
                                    Err(format!("patch size {p} must be odd and at least 3"))
                                } else {
                                    Ok(p)
                                }
                            })
                            .collect::<std::result::Result<_, _>>()?
                    }
                    "encodings" | "encoding" => {
                        encodings = parse_list(key)?.iter().map(|s| s.parse()).collect::<std::result::Result<_, _>>()?
                    }
                    "estimators" | "estimator" => {
                        estimators = parse_list(key)?.iter().map(|s| s.parse()).collect::<std::result::Result<_, _>>()?
                    }
                    "free_bounds" => free_bounds = parse_list(key)?.iter().map(|s| pair(s)).collect::<std::result::Result<_, _>>()?,
                    "matrix_bounds" => matrix_bounds = pair(value)?,
                    "min_prefix" => min_prefix = value.parse().map_err(|e| format!("min_prefix: {e}"))?,
                    "top_k" => {
                        top_k = value.parse().map_err(|e| format!("top_k: {e}"))?;
                        if top_k == 0 {
                            return Err("top_k must be positive".into());
                        }
                    }
                    "band_factor" => {
                        pipeline.band_factor = value.parse().map_err(|e| format!("band_factor: {e}"))?;
                        if pipeline.band_factor == 0 {
                            return Err("band_factor must be positive".into());
                        }
                    }
                    "search_region" => {
                        pipeline.search_region = match value {
                            "band" => SearchRegion::Band,
                            "full" => SearchRegion::FullKnown,
                            other => return Err(format!("unknown search region '{other}'")),
                        }
                    }
                    "clamp_eps" => {
                        let eps: f64 = value.parse().map_err(|e| format!("clamp_eps: {e}"))?;
                        if !(eps > 0.0 && eps < 0.5) {
                            return Err(format!("clamp_eps {eps} outside (0, 0.5)"));
                        }
                        pipeline.clamp_eps = eps;
                    }
                    other => return Err(format!("unknown key '{other}'")),
                }
                Ok(())
            })();
            res.map_err(bad)?;
        }

        let mut space = ConfigSpace::product(
            &kinds,
            &diffs,
            &patches,
            &encodings,
            &estimators,
            &free_bounds,
            matrix_bounds,
        );
        if (pipeline.clamp_eps - DEFAULT_CLAMP_EPS).abs() > 0.0 {
            for c in space.configs.iter_mut().filter(|c| c.kind.is_gc_family()) {
                c.series_bounds = (pipeline.clamp_eps, 1.0 - pipeline.clamp_eps);
            }
        }
        space.min_prefix = min_prefix;
        space.top_k = top_k;
        space.pipeline = pipeline;
        Ok(space)
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Prefix lengths explored for a training series of length `n`, with the
    /// pseudo-horizon used at each.
    pub fn prefixes(&self, n: usize, h: usize) -> Vec<(usize, usize)> {
        (self.min_prefix.max(2)..n)
            .map(|p| (p, pseudo_horizon(p, h)))
            .filter(|&(p, ph)| ph >= 1 && p + ph <= n)
            .collect()
    }
}

/// Declared horizon capped at a third of the prefix.
pub fn pseudo_horizon(prefix: usize, h: usize) -> usize {
    h.min(prefix / 3)
}

/// sMAPE in percent; terms with `|F| + |A| = 0` count as zero error.
pub fn smape_score(forecast: &[f64], actual: &[f64]) -> f64 {
    if forecast.is_empty() || forecast.len() != actual.len() {
        return f64::INFINITY;
    }
    let sum: f64 = forecast
        .iter()
        .zip(actual)
        .map(|(f, a)| {
            let den = f.abs() + a.abs();
            if den == 0.0 {
                0.0
            } else {
                (f - a).abs() / den
            }
        })
        .sum();
    let s = 200.0 * sum / forecast.len() as f64;
    if s.is_finite() {
        s
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub prefix_len: usize,
    pub config: ModelConfig,
    pub smape: f64,
    /// 1-based rank within the prefix.
    pub rank: usize,
    /// Set when the config could not forecast this prefix; `smape` is then
    /// infinite.
    pub flag: Option<String>,
}

/// Rows sorted stably by `(prefix_len, smape)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelLog {
    pub rows: Vec<LogRow>,
}

fn flag_for(err: &Error) -> String {
    let stage = match err {
        Error::Stage { stage, .. } => format!("{stage}:"),
        _ => String::new(),
    };
    let kind = match err.root() {
        Error::InsufficientContext { .. } => "insufficient_context",
        Error::TooShort { .. } => "too_short",
        Error::GcSingularity { .. } => "gc_singularity",
        Error::NonFinite { .. } => "non_finite",
        Error::InvalidBounds { .. } | Error::OutOfRange { .. } => "out_of_range",
        _ => "error",
    };
    format!("infeasible:{stage}{kind}")
}

/// Progressive grid search.
///
/// For every prefix `P` (from `space.min_prefix`, growing by one) and every
/// config, forecast the next `min(h, P/3)` training values and score them.
pub fn grid_search(train: &[f64], space: &ConfigSpace, h: usize) -> Result<ModelLog> {
    if h == 0 {
        return Err(Error::ZeroHorizon);
    }
    let prefixes = space.prefixes(train.len(), h);
    if prefixes.is_empty() {
        return Err(Error::TooShort {
            needed: space.min_prefix.max(3) + 1,
            got: train.len(),
        });
    }
    let points: Vec<(usize, usize, usize)> = prefixes
        .iter()
        .flat_map(|&(p, ph)| (0..space.configs.len()).map(move |c| (p, ph, c)))
        .collect();
    let exec = space.pipeline.exec;
    let inner = Pipeline {
        exec: Execution::Sequential,
        ..space.pipeline
    };
    let scored = exec.map(&points, |&(p, ph, c)| {
        let cfg = space.configs[c];
        match forecast(&train[..p], &cfg, ph, &inner) {
            Ok(f) => {
                let s = smape_score(&f.values, &train[p..p + ph]);
                let flag = (!s.is_finite()).then(|| "infeasible:non_finite".to_string());
                (s, flag)
            }
            Err(e) => (f64::INFINITY, Some(flag_for(&e))),
        }
    });

    let mut rows: Vec<LogRow> = points
        .iter()
        .zip(scored)
        .map(|(&(p, _, c), (smape, flag))| LogRow {
            prefix_len: p,
            config: space.configs[c],
            smape,
            rank: 0,
            flag,
        })
        .collect();
    rows.sort_by(|a, b| a.prefix_len.cmp(&b.prefix_len).then(a.smape.total_cmp(&b.smape)));
    let mut start = 0;
    while start < rows.len() {
        let p = rows[start].prefix_len;
        let mut r = 1;
        for row in rows[start..].iter_mut().take_while(|row| row.prefix_len == p) {
            row.rank = r;
            r += 1;
        }
        start += r - 1;
    }
    Ok(ModelLog { rows })
}

impl ModelLog {
    /// Distinct prefix lengths, ascending.
    pub fn prefixes(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.rows.iter().map(|r| r.prefix_len).collect();
        p.dedup();
        p
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "prefix_len,transform,differenced,series_lo,series_hi,patch,estimator,smape,flag")?;
        for r in &self.rows {
            let c = &r.config;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.prefix_len,
                c.kind,
                c.differenced,
                c.series_bounds.0,
                c.series_bounds.1,
                c.patch_size,
                c.estimator,
                if r.smape.is_finite() { r.smape.to_string() } else { "inf".into() },
                r.flag.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }
}

fn frequent_among<'a>(rows: impl Iterator<Item = &'a LogRow>, k: usize) -> Result<ModelConfig> {
    // count, smape sum per config over top-k finite rows
    let mut tally: BTreeMap<ModelConfig, (usize, f64)> = BTreeMap::new();
    for r in rows.filter(|r| r.rank <= k && r.smape.is_finite()) {
        let e = tally.entry(r.config).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += r.smape;
    }
    tally
        .into_iter()
        .min_by(|(ca, (na, sa)), (cb, (nb, sb))| {
            nb.cmp(na)
                .then((sa / *na as f64).total_cmp(&(sb / *nb as f64)))
                .then(ca.cmp(cb))
        })
        .map(|(c, _)| c)
        .ok_or(Error::NoFeasibleModel)
}

/// Most frequent config among the top `k` of each prefix; ties go to the
/// lower mean sMAPE over those rows, then to config order.
pub fn select_frequent(log: &ModelLog, k: usize) -> Result<ModelConfig> {
    frequent_among(log.rows.iter(), k)
}

/// [`select_frequent`] restricted to the last `w` prefix lengths.
pub fn select_short_memory(log: &ModelLog, w: usize, k: usize) -> Result<ModelConfig> {
    let prefixes = log.prefixes();
    let cut = prefixes.len().saturating_sub(w);
    let Some(&first) = prefixes.get(cut) else {
        return Err(Error::NoFeasibleModel);
    };
    frequent_among(log.rows.iter().filter(|r| r.prefix_len >= first), k)
}

/// Config with the lowest mean sMAPE over all prefixes, for diagnostics.
pub fn oracle_best(log: &ModelLog) -> Option<(ModelConfig, f64)> {
    let mut sums: BTreeMap<ModelConfig, (usize, f64)> = BTreeMap::new();
    for r in &log.rows {
        let e = sums.entry(r.config).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += r.smape;
    }
    sums.into_iter()
        .map(|(c, (n, s))| (c, s / n as f64))
        .filter(|(_, m)| m.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

/// Model-selection strategy applied to the log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Frequent,
    ShortMemory(usize),
}

/// Outcome of tuning one series.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuned {
    pub config: ModelConfig,
    pub log: ModelLog,
    pub oracle: Option<(ModelConfig, f64)>,
}

/// Grid search then select.
pub fn tune(train: &[f64], space: &ConfigSpace, h: usize, strategy: Strategy) -> Result<Tuned> {
    let log = grid_search(train, space, h)?;
    let config = match strategy {
        Strategy::Frequent => select_frequent(&log, space.top_k)?,
        Strategy::ShortMemory(w) => select_short_memory(&log, w, space.top_k)?,
    };
    let oracle = oracle_best(&log);
    Ok(Tuned { config, log, oracle })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: usize, cfg: ModelConfig, smape: f64, rank: usize) -> LogRow {
        LogRow {
            prefix_len: p,
            config: cfg,
            smape,
            rank,
            flag: None,
        }
    }

    fn a() -> ModelConfig {
        ModelConfig::new(TransformKind::Mac, false, 3)
    }

    fn b() -> ModelConfig {
        ModelConfig::new(TransformKind::Gasf, false, 3)
    }

    #[test]
    fn default_space_has_seventy_configs() {
        let s = ConfigSpace::default();
        assert_eq!(s.len(), 70);
        assert!(s.configs.iter().all(|c| c.validate(DEFAULT_CLAMP_EPS).is_ok()));
    }

    #[test]
    fn pseudo_horizon_capped() {
        assert_eq!(pseudo_horizon(12, 6), 4);
        assert_eq!(pseudo_horizon(30, 6), 6);
        let s = ConfigSpace::default();
        let p = s.prefixes(20, 6);
        assert_eq!(p.first(), Some(&(12, 4)));
        assert!(p.iter().all(|&(p, ph)| p + ph <= 20));
    }

    #[test]
    fn majority_wins() {
        let mut rows = Vec::new();
        for p in 0..5 {
            let (first, second) = if p < 4 { (a(), b()) } else { (b(), a()) };
            rows.push(row(12 + p, first, 1.0, 1));
            rows.push(row(12 + p, second, 2.0, 2));
        }
        let log = ModelLog { rows };
        assert_eq!(select_frequent(&log, 1).unwrap(), a());
    }

    #[test]
    fn tie_goes_to_lower_mean() {
        let log = ModelLog {
            rows: vec![
                row(12, a(), 7.0, 1),
                row(13, a(), 7.0, 1),
                row(14, b(), 5.0, 1),
                row(15, b(), 5.0, 1),
            ],
        };
        assert_eq!(select_frequent(&log, 1).unwrap(), b());
        assert_eq!(select_short_memory(&log, 1, 1).unwrap(), b());
        assert_eq!(select_short_memory(&log, 100, 1).unwrap(), select_frequent(&log, 1).unwrap());
    }

    #[test]
    fn single_row_and_infeasible_logs() {
        let log = ModelLog {
            rows: vec![row(12, a(), 3.0, 1)],
        };
        assert_eq!(select_frequent(&log, 3).unwrap(), a());
        let log = ModelLog {
            rows: vec![row(12, a(), f64::INFINITY, 1)],
        };
        assert!(matches!(select_frequent(&log, 3), Err(Error::NoFeasibleModel)));
    }

    #[test]
    fn parse_config_file() {
        let s = ConfigSpace::parse(
            "# small space\ntransforms = mac, gasf\ndifferenced = false\npatch_sizes = 3,5\nsearch_region = full\ntop_k = 2\n",
        )
        .unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.top_k, 2);
        assert_eq!(s.pipeline.search_region, SearchRegion::FullKnown);
        let err = ConfigSpace::parse("transforms = mac\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        assert!(ConfigSpace::parse("patch_sizes = 4").is_err());
    }

    #[test]
    fn constant_series_forecasts_constant() {
        let s = vec![5.0; 20];
        for kind in TransformKind::ALL {
            for d in [false, true] {
                let cfg = ModelConfig::new(kind, d, 3);
                let f = forecast(&s, &cfg, 4, &Pipeline::default()).unwrap();
                for v in f.values {
                    assert!((v - 5.0).abs() < 1e-6, "{cfg}: {v}");
                }
            }
        }
    }

    #[test]
    fn zero_horizon_is_empty() {
        let f = forecast(&[1.0, 2.0, 3.0], &a(), 0, &Pipeline::default()).unwrap();
        assert!(f.values.is_empty());
    }

    #[test]
    fn stage_tags_on_errors() {
        let err = forecast(&[1.0, 2.0, 3.0, 4.0], &ModelConfig::new(TransformKind::Mac, false, 5), 2, &Pipeline::default())
            .unwrap_err();
        assert!(matches!(err, Error::Stage { stage: Stage::Inpaint, .. }));
        assert_eq!(flag_for(&err), "infeasible:inpaint:insufficient_context");
    }
}
