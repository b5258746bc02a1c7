//! Series-to-matrix representations and the inverse mappings that read a
//! forecast back out of an extended matrix.
//!
//! Every builder takes a series that has already been scaled into the
//! transform's working interval: `[0, 1]` for GASF, `[eps, 1 - eps]` for the
//! generalized-cosine family, anything for STAM/MAC/RPM.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::series::{minmax_scale, ScalingRecord};
use crate::spectral::autocorr;

/// Clamp margin applied before generalized-cosine transforms.
pub const DEFAULT_CLAMP_EPS: f64 = 0.05;

const GC_SINGULAR: f64 = 1e-12;
const MAC_DEGENERATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransformKind {
    Stam,
    Mac,
    Gasf,
    Gc,
    Gcs1,
    Gcs2,
    Rpm,
}

impl TransformKind {
    pub const ALL: [TransformKind; 7] = [
        TransformKind::Stam,
        TransformKind::Mac,
        TransformKind::Gasf,
        TransformKind::Gc,
        TransformKind::Gcs1,
        TransformKind::Gcs2,
        TransformKind::Rpm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransformKind::Stam => "stam",
            TransformKind::Mac => "mac",
            TransformKind::Gasf => "gasf",
            TransformKind::Gc => "gc",
            TransformKind::Gcs1 => "gcs1",
            TransformKind::Gcs2 => "gcs2",
            TransformKind::Rpm => "rpm",
        }
    }

    pub fn is_gc_family(self) -> bool {
        matches!(
            self,
            TransformKind::Gc | TransformKind::Gcs1 | TransformKind::Gcs2
        )
    }

    /// Whether the built matrix is symmetric for every input.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, TransformKind::Gc | TransformKind::Rpm)
    }

    /// Series interval each transform expects its input scaled to.
    pub fn series_bounds(self) -> (f64, f64) {
        match self {
            TransformKind::Gasf | TransformKind::Rpm => (0.0, 1.0),
            TransformKind::Gc | TransformKind::Gcs1 | TransformKind::Gcs2 => {
                (DEFAULT_CLAMP_EPS, 1.0 - DEFAULT_CLAMP_EPS)
            }
            TransformKind::Stam | TransformKind::Mac => (-1.0, 1.0),
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransformKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        TransformKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown transform '{s}'"))
    }
}

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    side: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(side: usize) -> Self {
        Matrix {
            side,
            data: vec![0.0; side * side],
        }
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                data.push(f(i, j));
            }
        }
        Matrix { side, data }
    }

    pub fn from_vec(side: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), side * side, "matrix data must be side*side");
        Matrix { side, data }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.side + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.side + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.side, |i, j| self.get(j, i))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.side).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            side: self.side,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Row-major CSV, 17 significant digits per entry.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for row in self.data.chunks(self.side.max(1)) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// A matrix tagged with the transform that produced it. When a forecast
/// region is attached, `side == source_len + horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRepr {
    pub kind: TransformKind,
    pub data: Matrix,
    pub source_len: usize,
    pub horizon: usize,
}

impl MatrixRepr {
    fn new(kind: TransformKind, data: Matrix) -> Self {
        let source_len = data.side();
        MatrixRepr {
            kind,
            data,
            source_len,
            horizon: 0,
        }
    }

    pub fn side(&self) -> usize {
        self.data.side()
    }
}

/// What is needed to map an (inpainted) rescaled matrix back to series
/// values.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformContext {
    pub kind: TransformKind,
    /// Internal pre-scaling of the series (RPM's `[0, 1]` normalization).
    pub input: Option<ScalingRecord>,
    /// Matrix-level min-max rescale applied after the transform.
    pub matrix: ScalingRecord,
    pub clamp_eps: f64,
    /// Number of series values the GC clamp moved.
    pub clamped: usize,
}

fn require_len(x: &[f64], needed: usize) -> Result<()> {
    if x.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: x.len(),
        });
    }
    Ok(())
}

fn require_unit(x: &[f64], what: &'static str) -> Result<()> {
    match x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(&value) => Err(Error::OutOfRange {
            what,
            value,
            lo: 0.0,
            hi: 1.0,
        }),
        None => Ok(()),
    }
}

/// Symmetric Toeplitz matrix of the series autocorrelation.
pub fn to_stam(x: &[f64]) -> Result<MatrixRepr> {
    require_len(x, 2)?;
    let gamma = autocorr(x).gamma;
    Ok(MatrixRepr::new(
        TransformKind::Stam,
        Matrix::from_fn(x.len(), |i, j| gamma[i.abs_diff(j)]),
    ))
}

/// Outer product `x_i * x_j`. Its k-th diagonal sums to `(n+1) * gamma(k)`.
pub fn to_mac(x: &[f64]) -> Result<MatrixRepr> {
    require_len(x, 1)?;
    Ok(MatrixRepr::new(
        TransformKind::Mac,
        Matrix::from_fn(x.len(), |i, j| x[i] * x[j]),
    ))
}

/// Gramian angular summation field `cos(theta_i + theta_j)` with
/// `theta = arccos(x)`.
pub fn to_gasf(x: &[f64]) -> Result<MatrixRepr> {
    require_len(x, 1)?;
    require_unit(x, "GASF input")?;
    let sin: Vec<f64> = x.iter().map(|v| (1.0 - v * v).sqrt()).collect();
    Ok(MatrixRepr::new(
        TransformKind::Gasf,
        Matrix::from_fn(x.len(), |i, j| x[i] * x[j] - sin[i] * sin[j]),
    ))
}

/// Clamp values into `[eps, 1 - eps]`, returning how many were moved.
pub fn clamp_unit(x: &[f64], eps: f64) -> (Vec<f64>, usize) {
    let mut moved = 0;
    let out = x
        .iter()
        .map(|&v| {
            let c = v.clamp(eps, 1.0 - eps);
            if c != v {
                moved += 1;
            }
            c
        })
        .collect();
    (out, moved)
}

/// Generalized cosine `sin(theta_i) / sin(theta_i + theta_j)`; diagonal
/// `1 / (2 x_i)`. Not symmetric in general.
pub fn to_gc(x: &[f64]) -> Result<MatrixRepr> {
    require_len(x, 1)?;
    require_unit(x, "GC input")?;
    let n = x.len();
    let sin: Vec<f64> = x.iter().map(|v| (1.0 - v * v).sqrt()).collect();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let (num, den) = if i == j {
                (1.0, 2.0 * x[i])
            } else {
                (sin[i], x[i] * sin[j] + x[j] * sin[i])
            };
            if den.abs() < GC_SINGULAR {
                return Err(Error::GcSingularity { row: i, col: j });
            }
            m.set(i, j, num / den);
        }
    }
    Ok(MatrixRepr::new(TransformKind::Gc, m))
}

/// `(GC + GC^T) / 2`.
pub fn to_gcs1(x: &[f64]) -> Result<MatrixRepr> {
    let gc = to_gc(x)?.data;
    let data = Matrix::from_fn(gc.side(), |i, j| 0.5 * (gc.get(i, j) + gc.get(j, i)));
    Ok(MatrixRepr::new(TransformKind::Gcs1, data))
}

/// GC with its upper triangle replaced by the mirrored lower triangle.
pub fn to_gcs2(x: &[f64]) -> Result<MatrixRepr> {
    let gc = to_gc(x)?.data;
    let data = Matrix::from_fn(gc.side(), |i, j| {
        if i < j {
            gc.get(j, i)
        } else {
            gc.get(i, j)
        }
    });
    Ok(MatrixRepr::new(TransformKind::Gcs2, data))
}

/// Relative position matrix `(z_i - z_j + 1) / 2` over the series
/// normalized to `[0, 1]`. Returns the normalization record with it.
pub fn to_rpm(x: &[f64]) -> Result<(MatrixRepr, ScalingRecord)> {
    require_len(x, 2)?;
    let (z, record) = minmax_scale(x, 0.0, 1.0)?;
    let data = Matrix::from_fn(z.len(), |i, j| (z[i] - z[j] + 1.0) / 2.0);
    Ok((MatrixRepr::new(TransformKind::Rpm, data), record))
}

/// Build the representation of `kind` and rescale its entries onto
/// `matrix_bounds`. GC-family inputs are clamped into `[eps, 1 - eps]`
/// first; `TransformContext::clamped` reports how many values moved.
pub fn build(
    kind: TransformKind,
    x: &[f64],
    clamp_eps: f64,
    matrix_bounds: (f64, f64),
) -> Result<(MatrixRepr, TransformContext)> {
    let mut input = None;
    let mut clamped = 0;
    let raw = match kind {
        TransformKind::Stam => to_stam(x)?,
        TransformKind::Mac => to_mac(x)?,
        TransformKind::Gasf => to_gasf(x)?,
        TransformKind::Rpm => {
            let (m, rec) = to_rpm(x)?;
            input = Some(rec);
            m
        }
        TransformKind::Gc | TransformKind::Gcs1 | TransformKind::Gcs2 => {
            let (cx, moved) = clamp_unit(x, clamp_eps);
            clamped = moved;
            match kind {
                TransformKind::Gc => to_gc(&cx)?,
                TransformKind::Gcs1 => to_gcs1(&cx)?,
                _ => to_gcs2(&cx)?,
            }
        }
    };
    let (scaled, matrix) = minmax_scale(raw.data.as_slice(), matrix_bounds.0, matrix_bounds.1)?;
    let repr = MatrixRepr {
        data: Matrix::from_vec(raw.side(), scaled),
        ..raw
    };
    Ok((
        repr,
        TransformContext {
            kind,
            input,
            matrix,
            clamp_eps,
            clamped,
        },
    ))
}

/// Grow the matrix by `h` rows and columns. The returned mask is `true` on
/// the original block and `false` on the L-shaped forecast region.
pub fn extend_for_forecast(m: &MatrixRepr, h: usize) -> (MatrixRepr, Vec<bool>) {
    let n = m.side();
    let side = n + h;
    let mut data = Matrix::zeros(side);
    let mut mask = vec![false; side * side];
    for i in 0..n {
        for j in 0..n {
            data.set(i, j, m.data.get(i, j));
            mask[i * side + j] = true;
        }
    }
    (
        MatrixRepr {
            kind: m.kind,
            data,
            source_len: m.source_len,
            horizon: m.horizon + h,
        },
        mask,
    )
}

/// Which inversion rule to apply when reading forecasts back out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Estimator {
    /// The per-kind default: least squares (MAC), median over known rows
    /// (GASF, RPM), diagonal (GC family), lag system (STAM).
    #[default]
    Auto,
    /// Diagonal inversion wherever the kind admits one.
    Diagonal,
    /// Aggregate over the known rows/columns of the forecast step.
    CrossSection,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Auto, Estimator::Diagonal, Estimator::CrossSection];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Auto => "auto",
            Estimator::Diagonal => "diagonal",
            Estimator::CrossSection => "cross",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Estimator::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown estimator '{s}'"))
    }
}

/// The rule that actually produced a forecast value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorPath {
    LeastSquares,
    DiagonalFallback,
    Median,
    Diagonal,
    CrossSectionFallback,
    LagSystem,
    LastValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// Forecast values in the transform's input space.
    pub values: Vec<f64>,
    pub paths: Vec<EstimatorPath>,
}

/// Median of `v`. For an even count the two middle values are averaged,
/// unless `prefer` is given, in which case the middle value closest to it
/// is returned.
fn median(mut v: Vec<f64>, prefer: Option<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        return Some(v[mid]);
    }
    let (a, b) = (v[mid - 1], v[mid]);
    Some(match prefer {
        Some(p) if (a - p).abs() <= (b - p).abs() => a,
        Some(_) => b,
        None => 0.5 * (a + b),
    })
}

/// Read `h` forecast values out of an inpainted matrix.
///
/// `m` is in the rescaled space produced by [`build`]; `known` is the series
/// the matrix was built from (in the transform's input space) and its
/// length fixes where the forecast region starts.
pub fn extract_forecast(
    m: &MatrixRepr,
    ctx: &TransformContext,
    known: &[f64],
    h: usize,
    estimator: Estimator,
) -> Result<Extraction> {
    let n = known.len();
    if m.side() != n + h {
        return Err(Error::TooShort {
            needed: n + h,
            got: m.side(),
        });
    }
    if h == 0 {
        return Ok(Extraction {
            values: vec![],
            paths: vec![],
        });
    }
    let raw = m.data.map(|v| ctx.matrix.unscale(v));
    let mut values = Vec::with_capacity(h);
    let mut paths = Vec::with_capacity(h);
    match ctx.kind {
        TransformKind::Stam => return Ok(extract_stam(&raw, known, h)),
        TransformKind::Mac => {
            let energy: f64 = known.iter().map(|v| v * v).sum();
            let degenerate = known.iter().all(|v| v.abs() < MAC_DEGENERATE);
            for f in n..n + h {
                let num: f64 = (0..n).map(|i| known[i] * raw.get(i, f)).sum();
                let sign = if num < 0.0 { -1.0 } else { 1.0 };
                let diag = || sign * raw.get(f, f).max(0.0).sqrt();
                if degenerate {
                    values.push(diag());
                    paths.push(EstimatorPath::DiagonalFallback);
                } else if estimator == Estimator::Diagonal {
                    values.push(diag());
                    paths.push(EstimatorPath::Diagonal);
                } else {
                    values.push(num / energy);
                    paths.push(EstimatorPath::LeastSquares);
                }
            }
        }
        TransformKind::Gasf => {
            for f in n..n + h {
                let diag = (raw.get(f, f).clamp(-1.0, 1.0).acos() / 2.0).cos();
                if estimator == Estimator::Diagonal {
                    values.push(diag);
                    paths.push(EstimatorPath::Diagonal);
                    continue;
                }
                let cands = (0..n)
                    .map(|i| (raw.get(i, f).clamp(-1.0, 1.0).acos() - known[i].acos()).cos())
                    .collect();
                values.push(median(cands, Some(diag)).unwrap_or(diag));
                paths.push(EstimatorPath::Median);
            }
        }
        TransformKind::Gc | TransformKind::Gcs1 | TransformKind::Gcs2 => {
            let eps = ctx.clamp_eps;
            let tol = 1e-9;
            let anchor = known[n - 1];
            for f in n..n + h {
                let cross = || {
                    let cands = (0..n)
                        .filter_map(|i| gc_row_candidate(ctx.kind, raw.get(f, i), known[i], anchor))
                        .collect();
                    median(cands, None).map(|v| v.clamp(eps, 1.0 - eps))
                };
                if estimator == Estimator::CrossSection {
                    values.push(cross().unwrap_or(anchor));
                    paths.push(EstimatorPath::Median);
                    continue;
                }
                let d = 1.0 / (2.0 * raw.get(f, f));
                if d.is_finite() && d >= eps - tol && d <= 1.0 - eps + tol {
                    values.push(d.clamp(eps, 1.0 - eps));
                    paths.push(EstimatorPath::Diagonal);
                } else {
                    values.push(cross().unwrap_or(anchor));
                    paths.push(EstimatorPath::CrossSectionFallback);
                }
            }
        }
        TransformKind::Rpm => {
            let record = ctx.input.unwrap_or_else(ScalingRecord::identity);
            let z: Vec<f64> = known.iter().map(|&v| record.scale(v)).collect();
            for f in n..n + h {
                let cands = (0..n).map(|i| 2.0 * raw.get(f, i) - 1.0 + z[i]).collect();
                let zf = median(cands, None).unwrap_or(z[n - 1]);
                values.push(record.unscale(zf));
                paths.push(if estimator == Estimator::Diagonal {
                    EstimatorPath::CrossSectionFallback
                } else {
                    EstimatorPath::Median
                });
            }
        }
    }
    Ok(Extraction { values, paths })
}

/// Solve one forecast-row entry of a GC-family matrix for `x_f`, given the
/// known `x_i`. Row `f` of GC and GCS2 holds `sin(t_f) / sin(t_f + t_i)`;
/// GCS1 holds the average of that and its transpose.
fn gc_row_candidate(kind: TransformKind, entry: f64, xi: f64, anchor: f64) -> Option<f64> {
    let ti = xi.clamp(-1.0, 1.0).acos();
    let (si, ci) = ti.sin_cos();
    if !entry.is_finite() {
        return None;
    }
    match kind {
        TransformKind::Gcs1 => {
            // (sin t_i + sin t) - 2 M sin(t_i + t) = 0 on t in [0, pi/2]
            let g = |t: f64| si + t.sin() - 2.0 * entry * (ti + t).sin();
            let steps = 128;
            let hi = std::f64::consts::FRAC_PI_2;
            let mut roots = Vec::new();
            let mut best = (f64::INFINITY, 0.0);
            let mut prev_t = 0.0;
            let mut prev_g = g(0.0);
            for k in 1..=steps {
                let t = hi * k as f64 / steps as f64;
                let gt = g(t);
                if gt.abs() < best.0 {
                    best = (gt.abs(), t);
                }
                if prev_g == 0.0 {
                    roots.push(prev_t);
                } else if prev_g.signum() != gt.signum() {
                    let (mut a, mut b, mut ga) = (prev_t, t, prev_g);
                    for _ in 0..60 {
                        let mid = 0.5 * (a + b);
                        let gm = g(mid);
                        if gm.signum() == ga.signum() {
                            a = mid;
                            ga = gm;
                        } else {
                            b = mid;
                        }
                    }
                    roots.push(0.5 * (a + b));
                }
                prev_t = t;
                prev_g = gt;
            }
            let xs: Vec<f64> = if roots.is_empty() {
                vec![best.1.cos()]
            } else {
                roots.iter().map(|t| t.cos()).collect()
            };
            xs.into_iter()
                .min_by(|a, b| (a - anchor).abs().total_cmp(&(b - anchor).abs()))
        }
        _ => {
            // sin t_f (1 - M cos t_i) = M cos t_f sin t_i
            let tf = (entry * si).atan2(1.0 - entry * ci);
            Some(tf.cos())
        }
    }
}

/// Forecasts from an inpainted STAM.
///
/// Lag estimates are averaged over the forecast region's diagonals. For
/// lags `L >= h` every product `s_k s_{k-L}` contains at most one unknown,
/// so the lag equations of the extended series are linear in the forecast
/// values and are solved by least squares.
fn extract_stam(raw: &Matrix, known: &[f64], h: usize) -> Extraction {
    let n = known.len();
    let side = n + h;
    let mut sums = vec![0.0; side];
    let mut counts = vec![0usize; side];
    for i in 0..side {
        for j in 0..side {
            if i >= n || j >= n {
                let lag = i.abs_diff(j);
                sums[lag] += raw.get(i, j);
                counts[lag] += 1;
            }
        }
    }
    let gamma: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();

    let fallback = || Extraction {
        values: vec![known[n - 1]; h],
        paths: vec![EstimatorPath::LastValue; h],
    };
    if n < h {
        return fallback();
    }

    // rows: lags h..side, unknown j corresponds to s_{n+j}
    let mut ata = vec![0.0; h * h];
    let mut atb = vec![0.0; h];
    for lag in h..side {
        let known_part: f64 = (lag..n).map(|k| known[k] * known[k - lag]).sum();
        let rhs = side as f64 * gamma[lag] - known_part;
        let row: Vec<f64> = (0..h)
            .map(|j| {
                let k = n + j;
                if k >= lag {
                    known[k - lag]
                } else {
                    0.0
                }
            })
            .collect();
        for a in 0..h {
            atb[a] += row[a] * rhs;
            for b in 0..h {
                ata[a * h + b] += row[a] * row[b];
            }
        }
    }
    match solve_dense(ata, atb, h) {
        Some(values) if values.iter().all(|v| v.is_finite()) => Extraction {
            values,
            paths: vec![EstimatorPath::LagSystem; h],
        },
        _ => fallback(),
    }
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))?;
        if a[pivot * n + col].abs() <= 1e-12 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for r in col + 1..n {
            let factor = a[r * n + col] / a[col * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - tail) / a[r * n + r];
    }
    Some(x)
}
