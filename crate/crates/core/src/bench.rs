//! Error metrics, the naive baseline, dataset ingestion and multi-method
//! comparison reports.
//!
//! Percentage metrics are reported multiplied by 100. A metric whose
//! denominator vanishes for some term is undefined for that series and is
//! excluded from averages; the report counts the exclusions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result, RowError};
use crate::series::{Category, Period, TimeSeries};

/// Metric columns in report order.
pub const METRICS: [&str; 5] = ["MSE", "RMSE", "MAE", "MAPE", "sMAPE"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// Undefined when some actual is zero.
    pub mape: Option<f64>,
    /// Undefined when some `|F| + |A|` is zero.
    pub smape: Option<f64>,
}

impl Metrics {
    pub fn get(&self, metric: usize) -> Option<f64> {
        match metric {
            0 => Some(self.mse),
            1 => Some(self.rmse),
            2 => Some(self.mae),
            3 => self.mape,
            4 => self.smape,
            _ => None,
        }
    }
}

/// Metrics of forecasts `f` against actuals `a`.
pub fn metrics(f: &[f64], a: &[f64]) -> Result<Metrics> {
    if f.is_empty() || f.len() != a.len() {
        return Err(Error::TooShort {
            needed: a.len().max(1),
            got: f.len(),
        });
    }
    let n = f.len() as f64;
    let mse = f.iter().zip(a).map(|(f, a)| (f - a) * (f - a)).sum::<f64>() / n;
    let mae = f.iter().zip(a).map(|(f, a)| (f - a).abs()).sum::<f64>() / n;
    let mape = if a.contains(&0.0) {
        None
    } else {
        Some(100.0 * f.iter().zip(a).map(|(f, a)| ((f - a) / a).abs()).sum::<f64>() / n)
    };
    let smape = if f.iter().zip(a).any(|(f, a)| f.abs() + a.abs() == 0.0) {
        None
    } else {
        Some(200.0 * f.iter().zip(a).map(|(f, a)| (f - a).abs() / (f.abs() + a.abs())).sum::<f64>() / n)
    };
    Ok(Metrics {
        mse,
        rmse: mse.sqrt(),
        mae,
        mape,
        smape,
    })
}

/// Repeat the last observation `h` times.
pub fn naive_forecast(series: &[f64], h: usize) -> Result<Vec<f64>> {
    let last = *series.last().ok_or(Error::TooShort { needed: 1, got: 0 })?;
    Ok(vec![last; h])
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub series: Vec<TimeSeries>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Number of series per period.
    pub fn period_counts(&self) -> BTreeMap<Period, usize> {
        let mut m = BTreeMap::new();
        for s in &self.series {
            *m.entry(s.period).or_insert(0) += 1;
        }
        m
    }
}

fn parse_row(fields: &[&str]) -> std::result::Result<TimeSeries, String> {
    if fields.len() < 6 {
        return Err(format!("expected at least 6 fields, got {}", fields.len()));
    }
    let id = fields[0].trim();
    if id.is_empty() {
        return Err("empty id".into());
    }
    let category: Category = fields[1].parse()?;
    let period: Period = fields[2].parse()?;
    let horizon = match fields[3].trim() {
        "" => period.default_horizon(),
        h => h.parse::<usize>().map_err(|e| format!("horizon '{h}': {e}"))?,
    };
    let n: usize = fields[4]
        .trim()
        .parse()
        .map_err(|e| format!("n '{}': {e}", fields[4].trim()))?;
    let values: Vec<f64> = fields[5..]
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("value '{s}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if values.len() != n {
        return Err(format!("n = {n} but {} values", values.len()));
    }
    if horizon == 0 {
        return Err("horizon must be positive".into());
    }
    if horizon >= n {
        return Err(format!("horizon {horizon} >= length {n}"));
    }
    TimeSeries::with_meta(id, values, category, period, horizon).map_err(|e| e.to_string())
}

/// Parse `id,category,period,horizon,n,v0,v1,...` rows. A first line
/// starting with `id` is a header. An empty horizon defaults from the
/// period. Every malformed row is reported, not just the first.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut series = Vec::new();
    let mut errors = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (no == 0 && line.to_ascii_lowercase().starts_with("id")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match parse_row(&fields) {
            Ok(ts) if !seen.insert(ts.id.clone()) => errors.push(RowError {
                line: no + 1,
                message: format!("duplicate id '{}'", ts.id),
            }),
            Ok(ts) => series.push(ts),
            Err(message) => errors.push(RowError { line: no + 1, message }),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Schema(errors));
    }
    Ok(Dataset { series })
}

pub fn ingest_csv(path: &Path) -> Result<Dataset> {
    parse_dataset(&fs::read_to_string(path)?)
}

/// Forecasts of one method, keyed by series id.
pub type MethodForecasts = BTreeMap<String, Vec<f64>>;

/// Per-series, per-method results.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    pub id: String,
    /// One entry per method, in method order.
    pub metrics: Vec<Metrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub methods: Vec<String>,
    pub per_series: Vec<SeriesResult>,
    /// `averages[method][metric]`, `None` when no series defines it.
    pub averages: Vec<[Option<f64>; 5]>,
    /// Series excluded from each average because the metric was undefined.
    pub exclusions: Vec<[usize; 5]>,
    /// `ranks[method][metric]`, a permutation of `1..=methods` per metric.
    pub ranks: Vec<[usize; 5]>,
    /// Times ranked best by sMAPE; tied methods split the credit equally,
    /// so the counts sum to the number of series.
    pub best: Vec<f64>,
}

/// Score every method on every series' held-out tail (`test` values keyed
/// by id) and build the comparison tables.
pub fn compare(
    actuals: &[(String, Vec<f64>)],
    methods: &[(String, MethodForecasts)],
) -> Result<MetricsReport> {
    let mut gaps = Vec::new();
    for (name, fc) in methods {
        for (id, a) in actuals {
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
        return Err(Error::MissingForecasts(gaps));
    }

    let m = methods.len();
    let mut per_series = Vec::with_capacity(actuals.len());
    let mut best = vec![0.0; m];
    for (id, a) in actuals {
        let row: Vec<Metrics> = methods
            .iter()
            .map(|(_, fc)| metrics(&fc[id], a))
            .collect::<Result<_>>()?;
        let scores: Vec<f64> = row.iter().map(|r| r.smape.unwrap_or(f64::INFINITY)).collect();
        let low = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let tied: Vec<usize> = (0..m).filter(|&k| scores[k] == low).collect();
        if !tied.is_empty() {
            for &k in &tied {
                best[k] += 1.0 / tied.len() as f64;
            }
        }
        per_series.push(SeriesResult {
            id: id.clone(),
            metrics: row,
        });
    }

    let mut averages = vec![[None; 5]; m];
    let mut exclusions = vec![[0usize; 5]; m];
    for k in 0..m {
        for metric in 0..5 {
            let vals: Vec<f64> = per_series.iter().filter_map(|s| s.metrics[k].get(metric)).collect();
            exclusions[k][metric] = per_series.len() - vals.len();
            if !vals.is_empty() {
                averages[k][metric] = Some(vals.iter().sum::<f64>() / vals.len() as f64);
            }
        }
    }

    let mut ranks = vec![[0usize; 5]; m];
    for metric in 0..5 {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| {
            let vx = averages[x][metric].unwrap_or(f64::INFINITY);
            let vy = averages[y][metric].unwrap_or(f64::INFINITY);
            vx.total_cmp(&vy).then(x.cmp(&y))
        });
        for (r, &k) in order.iter().enumerate() {
            ranks[k][metric] = r + 1;
        }
    }

    Ok(MetricsReport {
        methods: methods.iter().map(|(n, _)| n.clone()).collect(),
        per_series,
        averages,
        exclusions,
        ranks,
        best,
    })
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn short(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"))
}

impl MetricsReport {
    /// Percentage of series on which each method ranked best by sMAPE.
    pub fn best_percent(&self) -> Vec<f64> {
        let n = self.per_series.len().max(1) as f64;
        self.best.iter().map(|b| 100.0 * b / n).collect()
    }

    /// `id,method,mse,rmse,mae,mape,smape`.
    pub fn write_per_series<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "id,method,mse,rmse,mae,mape,smape")?;
        for s in &self.per_series {
            for (name, m) in self.methods.iter().zip(&s.metrics) {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    s.id,
                    name,
                    m.mse,
                    m.rmse,
                    m.mae,
                    num(m.mape),
                    num(m.smape)
                )?;
            }
        }
        Ok(())
    }

    /// One row per method: averages with ranks, exclusion counts and
    /// times-ranked-best.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "method,mse,mse_rank,rmse,rmse_rank,mae,mae_rank,mape,mape_rank,smape,smape_rank,mape_excluded,smape_excluded,best_count,best_percent"
        )?;
        let pct = self.best_percent();
        for k in 0..self.methods.len() {
            let mut line = self.methods[k].clone();
            for metric in 0..5 {
                write!(line, ",{},{}", num(self.averages[k][metric]), self.ranks[k][metric]).unwrap();
            }
            write!(
                line,
                ",{},{},{},{}",
                self.exclusions[k][3], self.exclusions[k][4], self.best[k], pct[k]
            )
            .unwrap();
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Aligned plain-text table: each metric's average with its rank in
    /// parentheses, then times ranked best.
    pub fn to_text(&self, title: &str) -> String {
        let mut header = vec!["Method".to_string()];
        header.extend(METRICS.iter().map(|m| m.to_string()));
        header.push("Best".into());
        header.push("Best %".into());
        let pct = self.best_percent();
        let mut rows = vec![header];
        for k in 0..self.methods.len() {
            let mut r = vec![self.methods[k].clone()];
            for metric in 0..5 {
                r.push(format!("{} ({})", short(self.averages[k][metric]), self.ranks[k][metric]));
            }
            r.push(format!("{}", self.best[k]));
            r.push(format!("{:.2}", pct[k]));
            rows.push(r);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = format!("{title}\n");
        for (i, r) in rows.iter().enumerate() {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    if c == 0 {
                        format!("{s:<w$}", w = widths[c])
                    } else {
                        format!("{s:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if i == 0 {
                out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
                out.push('\n');
            }
        }
        let excluded: Vec<String> = (0..self.methods.len())
            .filter(|&k| self.exclusions[k][3] + self.exclusions[k][4] > 0)
            .map(|k| {
                format!(
                    "{}: MAPE undefined on {}, sMAPE undefined on {}",
                    self.methods[k], self.exclusions[k][3], self.exclusions[k][4]
                )
            })
            .collect();
        if !excluded.is_empty() {
            out.push_str("Excluded from averages:\n");
            for e in excluded {
                out.push_str(&format!("  {e}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        let m = metrics(&[3.0, 4.0], &[3.0, 4.0]).unwrap();
        assert_eq!((m.mse, m.rmse, m.mae, m.mape, m.smape), (0.0, 0.0, 0.0, Some(0.0), Some(0.0)));

        let m = metrics(&[110.0], &[100.0]).unwrap();
        assert_eq!(m.mae, 10.0);
        assert!((m.mape.unwrap() - 10.0).abs() < 1e-12);
        assert!((m.smape.unwrap() - 2000.0 / 210.0).abs() < 1e-12);

        let m = metrics(&[2.0, 4.0], &[1.0, 3.0]).unwrap();
        assert_eq!((m.mse, m.rmse, m.mae), (1.0, 1.0, 1.0));
    }

    #[test]
    fn undefined_metrics() {
        let m = metrics(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!((m.mape, m.smape), (None, None));
        assert!(metrics(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn naive_examples() {
        assert_eq!(naive_forecast(&[1., 2., 3.], 2).unwrap(), vec![3., 3.]);
        assert_eq!(naive_forecast(&[7.], 1).unwrap(), vec![7.]);
        assert!(naive_forecast(&[], 1).is_err());
    }

    #[test]
    fn ingest_rows() {
        let text = "id,category,period,horizon,n,values\n\
                    a,micro,yearly,,8,1,2,3,4,5,6,7,8\n\
                    b,macro,quarterly,2,4,1,2,3,4\n\
                    c,finance,monthly,1,3,1,2,3\n";
        let d = parse_dataset(text).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.series[0].declared_horizon, 6);
        assert_eq!(d.series[1].category, Category::Macro);

        let bad = "a,micro,yearly,6,5,1,2,3,4,5\nb,micro,yearly,2,3,1,2\nc,nope,yearly,1,2,1,2\n";
        match parse_dataset(bad) {
            Err(Error::Schema(rows)) => {
                assert_eq!(rows.iter().map(|r| r.line).collect::<Vec<_>>(), vec![1, 2, 3]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn fc(pairs: &[(&str, &[f64])]) -> MethodForecasts {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect()
    }

    #[test]
    fn dominant_method_ranks_first() {
        let actuals = vec![("x".to_string(), vec![10.0, 10.0]), ("y".to_string(), vec![5.0])];
        let methods = vec![
            ("good".to_string(), fc(&[("x", &[10.0, 11.0]), ("y", &[5.5])])),
            ("bad".to_string(), fc(&[("x", &[20.0, 20.0]), ("y", &[9.0])])),
        ];
        let r = compare(&actuals, &methods).unwrap();
        assert_eq!(r.ranks, vec![[1; 5], [2; 5]]);
        assert_eq!(r.best, vec![2.0, 0.0]);
        assert_eq!(r.best_percent(), vec![100.0, 0.0]);
    }

    #[test]
    fn ties_split_best_credit() {
        let actuals = vec![("x".to_string(), vec![1.0])];
        let methods = vec![
            ("a".to_string(), fc(&[("x", &[2.0])])),
            ("b".to_string(), fc(&[("x", &[2.0])])),
        ];
        let r = compare(&actuals, &methods).unwrap();
        assert_eq!(r.best, vec![0.5, 0.5]);
        assert_eq!(r.ranks[0][4] + r.ranks[1][4], 3);
    }

    #[test]
    fn missing_forecasts_listed() {
        let actuals = vec![("x".to_string(), vec![1.0]), ("y".to_string(), vec![1.0])];
        let methods = vec![("a".to_string(), fc(&[("x", &[2.0])]))];
        match compare(&actuals, &methods) {
            Err(Error::MissingForecasts(g)) => assert_eq!(g, vec!["a: missing y".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
