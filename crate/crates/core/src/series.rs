//! Series types, invertible min-max scaling and first differencing.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Sampling period of a series. Determines the default forecast horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Period {
    Yearly,
    Quarterly,
    Monthly,
    Other,
}

impl Period {
    /// M3 horizons: 6 yearly, 8 quarterly, 18 monthly, 8 for "other".
    pub fn default_horizon(self) -> usize {
        match self {
            Period::Yearly => 6,
            Period::Quarterly => 8,
            Period::Monthly => 18,
            Period::Other => 8,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Period::Yearly => "yearly",
            Period::Quarterly => "quarterly",
            Period::Monthly => "monthly",
            Period::Other => "other",
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yearly" | "year" | "y" => Ok(Period::Yearly),
            "quarterly" | "quarter" | "q" => Ok(Period::Quarterly),
            "monthly" | "month" | "m" => Ok(Period::Monthly),
            "other" | "o" => Ok(Period::Other),
            other => Err(format!("unknown period '{other}'")),
        }
    }
}

/// M3 domain category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Micro,
    Industry,
    Macro,
    Finance,
    Demographic,
    Other,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Micro => "micro",
            Category::Industry => "industry",
            Category::Macro => "macro",
            Category::Finance => "finance",
            Category::Demographic => "demog",
            Category::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "micro" => Ok(Category::Micro),
            "industry" => Ok(Category::Industry),
            "macro" => Ok(Category::Macro),
            "finance" => Ok(Category::Finance),
            "demog" | "demographic" => Ok(Category::Demographic),
            "other" => Ok(Category::Other),
            other => Err(format!("unknown category '{other}'")),
        }
    }
}

/// An ordered, finite, real-valued series of at least two observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub id: String,
    pub category: Category,
    pub period: Period,
    pub declared_horizon: usize,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::with_meta(id, values, Category::Other, Period::Other, 1)
    }

    pub fn with_meta(
        id: impl Into<String>,
        values: Vec<f64>,
        category: Category,
        period: Period,
        declared_horizon: usize,
    ) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if declared_horizon == 0 {
            return Err(Error::ZeroHorizon);
        }
        Ok(TimeSeries {
            id: id.into(),
            category,
            period,
            declared_horizon,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn derive(&self, values: Vec<f64>) -> Result<TimeSeries> {
        TimeSeries::with_meta(
            self.id.clone(),
            values,
            self.category,
            self.period,
            self.declared_horizon,
        )
    }
}

/// Train/test partition of a series; `test` holds the last `h` values.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSeries {
    pub train: TimeSeries,
    pub test: Vec<f64>,
}

/// Hold out the last `h` observations.
pub fn split(ts: &TimeSeries, h: usize) -> Result<SplitSeries> {
    if h == 0 {
        return Err(Error::ZeroHorizon);
    }
    if h >= ts.len() {
        return Err(Error::HorizonExceedsSeries {
            horizon: h,
            len: ts.len(),
        });
    }
    let cut = ts.len() - h;
    Ok(SplitSeries {
        train: ts.derive(ts.values[..cut].to_vec())?,
        test: ts.values[cut..].to_vec(),
    })
}

/// Parameters of an affine min-max map, plus the differencing anchor when
/// the scaled series was differenced first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRecord {
    pub observed_min: f64,
    pub observed_max: f64,
    pub target_lo: f64,
    pub target_hi: f64,
    pub anchor: Option<f64>,
}

impl ScalingRecord {
    pub fn new(observed_min: f64, observed_max: f64, lo: f64, hi: f64) -> Result<Self> {
        check_bounds(lo, hi)?;
        if !(observed_min <= observed_max) {
            return Err(Error::InvalidBounds {
                lo: observed_min,
                hi: observed_max,
            });
        }
        Ok(ScalingRecord {
            observed_min,
            observed_max,
            target_lo: lo,
            target_hi: hi,
            anchor: None,
        })
    }

    pub fn identity() -> Self {
        ScalingRecord {
            observed_min: 0.0,
            observed_max: 1.0,
            target_lo: 0.0,
            target_hi: 1.0,
            anchor: None,
        }
    }

    pub fn differenced(&self) -> bool {
        self.anchor.is_some()
    }

    /// True when the observed range collapses to a single value.
    pub fn is_degenerate(&self) -> bool {
        self.observed_min == self.observed_max
    }

    pub fn scale(&self, v: f64) -> f64 {
        if self.is_degenerate() {
            return 0.5 * (self.target_lo + self.target_hi);
        }
        let t = (v - self.observed_min) / (self.observed_max - self.observed_min);
        // written as a convex combination so both endpoints land exactly
        self.target_lo * (1.0 - t) + self.target_hi * t
    }

    /// Affine inverse of [`scale`](Self::scale). Values outside the target
    /// interval are extrapolated, never clamped.
    pub fn unscale(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            return self.observed_min;
        }
        let u = (x - self.target_lo) / (self.target_hi - self.target_lo);
        self.observed_min * (1.0 - u) + self.observed_max * u
    }
}

pub(crate) fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(Error::InvalidBounds { lo, hi })
    }
}

/// Map `values` affinely onto `[lo, hi]`: the minimum lands on `lo`, the
/// maximum on `hi`. A constant input maps to the midpoint.
pub fn minmax_scale(values: &[f64], lo: f64, hi: f64) -> Result<(Vec<f64>, ScalingRecord)> {
    check_bounds(lo, hi)?;
    if values.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let record = ScalingRecord::new(min, max, lo, hi)?;
    let scaled = values.iter().map(|&v| record.scale(v)).collect();
    Ok((scaled, record))
}

pub fn unscale(values: &[f64], record: &ScalingRecord) -> Vec<f64> {
    values.iter().map(|&x| record.unscale(x)).collect()
}

/// First differences `s[i+1] - s[i]` and the anchor `s[0]`.
pub fn difference(values: &[f64]) -> Result<(Vec<f64>, f64)> {
    if values.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: values.len(),
        });
    }
    let diffs = values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((diffs, values[0]))
}

/// Cumulative sum seeded by `anchor`; inverse of [`difference`].
pub fn undifference(diffs: &[f64], anchor: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(diffs.len() + 1);
    out.push(anchor);
    let mut acc = anchor;
    for d in diffs {
        acc += d;
        out.push(acc);
    }
    out
}
