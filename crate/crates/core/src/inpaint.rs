//! Exemplar-based inpainting adapted for extrapolating from image borders.
//!
//! Greedy fill: the front cell with the highest confidence x data priority
//! is filled by copying the best-matching fully known source patch (lowest
//! mean squared difference over the target's known cells) into the still
//! unknown cells of its patch. Target patches touching the image border are
//! clipped rather than padded, and both the confidence term and the SSD are
//! normalized by the number of in-bounds (resp. known) cells.
//!
//! Source patches are drawn from the initially known region only. Every
//! scan runs in row-major order with strict comparisons, so ties resolve to
//! the lowest row-major index and runs are bit-for-bit reproducible.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Lower bound of the data term, so flat regions are ordered by confidence.
pub const DATA_FLOOR: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum SearchRegion {
    /// Every fully known source patch.
    FullKnown,
    /// Source centres within `band_width` (Chebyshev) of the target cell.
    #[default]
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchConfig {
    pub patch_size: usize,
    pub search_region: SearchRegion,
    pub band_width: usize,
}

impl PatchConfig {
    /// Band search with the default width of four patches.
    pub fn new(patch_size: usize) -> Self {
        PatchConfig {
            patch_size,
            search_region: SearchRegion::Band,
            band_width: 4 * patch_size,
        }
    }

    pub fn full(patch_size: usize) -> Self {
        PatchConfig {
            search_region: SearchRegion::FullKnown,
            ..PatchConfig::new(patch_size)
        }
    }

    pub fn radius(&self) -> usize {
        self.patch_size / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size < 3 || self.patch_size.is_multiple_of(2) {
            return Err(Error::InvalidPatch(format!(
                "patch size {} must be odd and at least 3",
                self.patch_size
            )));
        }
        if self.band_width < self.patch_size {
            return Err(Error::InvalidPatch(format!(
                "band width {} smaller than patch size {}",
                self.band_width, self.patch_size
            )));
        }
        Ok(())
    }
}

/// One greedy fill step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillStep {
    pub step: usize,
    pub target: (usize, usize),
    pub source: (usize, usize),
    pub ssd: f64,
    pub priority: f64,
}

/// Mutable inpainting state. Exposed so callers can single-step a run.
#[derive(Debug, Clone)]
pub struct FillState {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub confidence: Vec<f64>,
    pub log: Vec<FillStep>,
    /// Row-major indices of centres of fully known source patches.
    sources: Vec<usize>,
    priority: Vec<f64>,
    remaining: usize,
}

impl FillState {
    pub fn new(values: &[f64], mask: &[bool], width: usize, height: usize, cfg: &PatchConfig) -> Result<Self> {
        cfg.validate()?;
        assert_eq!(values.len(), width * height, "values must be width*height");
        assert_eq!(mask.len(), values.len(), "mask must match values");
        let sources = source_centres(mask, width, height, cfg.radius());
        let known = mask.iter().filter(|k| **k).count();
        if sources.is_empty() || known < cfg.patch_size * cfg.patch_size {
            return Err(Error::InsufficientContext {
                patch: cfg.patch_size,
            });
        }
        let mut state = FillState {
            width,
            height,
            values: values.to_vec(),
            mask: mask.to_vec(),
            confidence: mask.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect(),
            log: Vec::new(),
            sources,
            priority: vec![f64::NAN; values.len()],
            remaining: values.len() - known,
        };
        state.refresh_priorities(0, height, 0, width, cfg);
        Ok(state)
    }

    pub fn is_complete(&self) -> bool {
        self.remaining == 0
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    /// Centres of the candidate source patches, as `(row, col)`.
    pub fn sources(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sources.iter().map(|&i| (i / self.width, i % self.width))
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        r * self.width + c
    }

    #[inline]
    pub fn known(&self, r: usize, c: usize) -> bool {
        self.mask[self.idx(r, c)]
    }

    /// Unknown cell with at least one known 4-neighbour.
    pub fn on_front(&self, r: usize, c: usize) -> bool {
        if self.known(r, c) {
            return false;
        }
        (r > 0 && self.known(r - 1, c))
            || (r + 1 < self.height && self.known(r + 1, c))
            || (c > 0 && self.known(r, c - 1))
            || (c + 1 < self.width && self.known(r, c + 1))
    }

    /// Fill-front cells in row-major order.
    pub fn front(&self) -> Vec<(usize, usize)> {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (r, c)))
            .filter(|&(r, c)| self.on_front(r, c))
            .collect()
    }

    /// In-bounds window of the patch centred at `(r, c)`: `(r0, r1, c0, c1)`
    /// with exclusive upper ends.
    fn window(&self, r: usize, c: usize, rad: usize) -> (usize, usize, usize, usize) {
        (
            r.saturating_sub(rad),
            (r + rad + 1).min(self.height),
            c.saturating_sub(rad),
            (c + rad + 1).min(self.width),
        )
    }

    fn refresh_priorities(&mut self, r0: usize, r1: usize, c0: usize, c1: usize, cfg: &PatchConfig) {
        for r in r0..r1 {
            for c in c0..c1 {
                let i = self.idx(r, c);
                self.priority[i] = if self.on_front(r, c) {
                    priority((r, c), self, cfg)
                } else {
                    f64::NAN
                };
            }
        }
    }

    /// Front cell with the highest priority; lowest row-major index on ties.
    pub fn next_target(&self) -> Option<((usize, usize), f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &p) in self.priority.iter().enumerate() {
            if p.is_nan() {
                continue;
            }
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((i, p));
            }
        }
        best.map(|(i, p)| ((i / self.width, i % self.width), p))
    }

    /// Run one fill step.
    pub fn step(&mut self, cfg: &PatchConfig, exec: Execution) -> Result<FillStep> {
        let (target, prio) = self.next_target().ok_or(Error::InsufficientContext {
            patch: cfg.patch_size,
        })?;
        let (source, ssd) = best_patch(target, self, cfg, exec).ok_or(Error::InsufficientContext {
            patch: cfg.patch_size,
        })?;
        let rad = cfg.radius();
        let conf = confidence_term(target, self, rad);
        let (r0, r1, c0, c1) = self.window(target.0, target.1, rad);
        for r in r0..r1 {
            for c in c0..c1 {
                let i = self.idx(r, c);
                if self.mask[i] {
                    continue;
                }
                let sr = source.0 + r - target.0;
                let sc = source.1 + c - target.1;
                self.values[i] = self.values[self.idx(sr, sc)];
                self.mask[i] = true;
                self.confidence[i] = conf;
                self.remaining -= 1;
            }
        }
        let reach = 2 * rad + 2;
        let (r0, r1, c0, c1) = self.window(target.0, target.1, reach);
        self.refresh_priorities(r0, r1, c0, c1, cfg);
        let step = FillStep {
            step: self.log.len(),
            target,
            source,
            ssd,
            priority: prio,
        };
        self.log.push(step);
        Ok(step)
    }
}

fn source_centres(mask: &[bool], width: usize, height: usize, rad: usize) -> Vec<usize> {
    let size = 2 * rad + 1;
    if width < size || height < size {
        return Vec::new();
    }
    // summed-area table of known cells
    let w1 = width + 1;
    let mut sat = vec![0usize; (height + 1) * w1];
    for r in 0..height {
        for c in 0..width {
            sat[(r + 1) * w1 + c + 1] =
                mask[r * width + c] as usize + sat[r * w1 + c + 1] + sat[(r + 1) * w1 + c] - sat[r * w1 + c];
        }
    }
    let full = size * size;
    let mut out = Vec::new();
    for r in rad..height - rad {
        for c in rad..width - rad {
            let (r0, c0, r1, c1) = (r - rad, c - rad, r + rad + 1, c + rad + 1);
            let count = sat[r1 * w1 + c1] + sat[r0 * w1 + c0] - sat[r0 * w1 + c1] - sat[r1 * w1 + c0];
            if count == full {
                out.push(r * width + c);
            }
        }
    }
    out
}

/// Mean confidence of the patch, known cells contributing their confidence
/// and unknown cells zero, over the in-bounds part of the patch.
pub fn confidence_term(cell: (usize, usize), state: &FillState, rad: usize) -> f64 {
    let (r0, r1, c0, c1) = state.window(cell.0, cell.1, rad);
    let mut sum = 0.0;
    for r in r0..r1 {
        for c in c0..c1 {
            let i = state.idx(r, c);
            if state.mask[i] {
                sum += state.confidence[i];
            }
        }
    }
    sum / ((r1 - r0) * (c1 - c0)) as f64
}

fn gradient_at(state: &FillState, r: usize, c: usize) -> (f64, f64) {
    let v = |r: usize, c: usize| state.values[state.idx(r, c)];
    let axis = |prev: Option<(usize, usize)>, next: Option<(usize, usize)>| {
        let p = prev.filter(|&(r, c)| state.known(r, c));
        let n = next.filter(|&(r, c)| state.known(r, c));
        match (p, n) {
            (Some(p), Some(n)) => 0.5 * (v(n.0, n.1) - v(p.0, p.1)),
            (Some(p), None) => v(r, c) - v(p.0, p.1),
            (None, Some(n)) => v(n.0, n.1) - v(r, c),
            (None, None) => 0.0,
        }
    };
    let gx = axis(
        c.checked_sub(1).map(|c| (r, c)),
        (c + 1 < state.width).then_some((r, c + 1)),
    );
    let gy = axis(
        r.checked_sub(1).map(|r| (r, c)),
        (r + 1 < state.height).then_some((r + 1, c)),
    );
    (gx, gy)
}

/// Isophote strength across the front: `|grad(I)^perp . n|`, with the
/// gradient taken as the strongest one among known cells of the 3x3
/// neighbourhood and `n` the normalized mask gradient. Floored at
/// [`DATA_FLOOR`].
pub fn data_term(cell: (usize, usize), state: &FillState) -> f64 {
    let (r, c) = cell;
    let (r0, r1, c0, c1) = state.window(r, c, 1);

    let m = |r: usize, c: usize| if state.known(r, c) { 1.0f64 } else { 0.0 };
    let nx = 0.5 * ((if c + 1 < state.width { m(r, c + 1) } else { 0.0 }) - (if c > 0 { m(r, c - 1) } else { 0.0 }));
    let ny = 0.5 * ((if r + 1 < state.height { m(r + 1, c) } else { 0.0 }) - (if r > 0 { m(r - 1, c) } else { 0.0 }));
    let norm = (nx * nx + ny * ny).sqrt();
    if norm == 0.0 {
        return DATA_FLOOR;
    }
    let (nx, ny) = (nx / norm, ny / norm);

    let mut grad = (0.0, 0.0);
    let mut mag = 0.0;
    for qr in r0..r1 {
        for qc in c0..c1 {
            if !state.known(qr, qc) {
                continue;
            }
            let g = gradient_at(state, qr, qc);
            let m2 = g.0 * g.0 + g.1 * g.1;
            if m2 > mag {
                mag = m2;
                grad = g;
            }
        }
    }
    // isophote = (-gy, gx)
    let d = (-grad.1 * nx + grad.0 * ny).abs();
    d.max(DATA_FLOOR)
}

/// `confidence x data` priority of a front cell.
pub fn priority(cell: (usize, usize), state: &FillState, cfg: &PatchConfig) -> f64 {
    confidence_term(cell, state, cfg.radius()) * data_term(cell, state)
}

/// Best source patch centre for `target` and its normalized SSD.
///
/// Compares only the target's in-bounds known cells. Band search falls back
/// to the full source set when no source lies inside the band.
pub fn best_patch(
    target: (usize, usize),
    state: &FillState,
    cfg: &PatchConfig,
    exec: Execution,
) -> Option<((usize, usize), f64)> {
    let rad = cfg.radius() as isize;
    let (tr, tc) = (target.0 as isize, target.1 as isize);
    let mut offsets: Vec<(isize, f64)> = Vec::new();
    for dr in -rad..=rad {
        for dc in -rad..=rad {
            let (r, c) = (tr + dr, tc + dc);
            if r < 0 || c < 0 || r >= state.height as isize || c >= state.width as isize {
                continue;
            }
            let i = state.idx(r as usize, c as usize);
            if state.mask[i] {
                offsets.push((dr * state.width as isize + dc, state.values[i]));
            }
        }
    }
    if offsets.is_empty() {
        return None;
    }

    let candidates: Vec<usize> = match cfg.search_region {
        SearchRegion::FullKnown => state.sources.clone(),
        SearchRegion::Band => {
            let bw = cfg.band_width;
            let inside: Vec<usize> = state
                .sources
                .iter()
                .copied()
                .filter(|&s| {
                    let (r, c) = (s / state.width, s % state.width);
                    r.abs_diff(target.0) <= bw && c.abs_diff(target.1) <= bw
                })
                .collect();
            if inside.is_empty() {
                state.sources.clone()
            } else {
                inside
            }
        }
    };

    let values = &state.values;
    let ssd_sum = |centre: usize, bound: f64| -> Option<f64> {
        let mut sum = 0.0;
        for &(off, tv) in &offsets {
            let d = values[(centre as isize + off) as usize] - tv;
            sum += d * d;
            if sum > bound {
                return None;
            }
        }
        Some(sum)
    };

    let best = if exec.is_parallel() {
        exec.min_by_index(candidates.len(), |k| ssd_sum(candidates[k], f64::INFINITY))
    } else {
        let mut best: Option<(usize, f64)> = None;
        for (k, &centre) in candidates.iter().enumerate() {
            let bound = best.map_or(f64::INFINITY, |b| b.1);
            if let Some(s) = ssd_sum(centre, bound) {
                if best.is_none_or(|b| s < b.1) {
                    best = Some((k, s));
                }
            }
        }
        best
    }?;
    let centre = candidates[best.0];
    Some((
        (centre / state.width, centre % state.width),
        best.1 / offsets.len() as f64,
    ))
}

/// Result of a complete inpainting run.
#[derive(Debug, Clone)]
pub struct Inpainted {
    pub values: Vec<f64>,
    pub confidence: Vec<f64>,
    pub log: Vec<FillStep>,
}

/// Fill every unknown cell of a `width x height` row-major grid.
pub fn inpaint(
    values: &[f64],
    mask: &[bool],
    width: usize,
    height: usize,
    cfg: &PatchConfig,
    exec: Execution,
) -> Result<Inpainted> {
    let mut state = FillState::new(values, mask, width, height, cfg)?;
    while !state.is_complete() {
        state.step(cfg, exec)?;
    }
    Ok(Inpainted {
        values: state.values,
        confidence: state.confidence,
        log: state.log,
    })
}

/// Fill log as CSV: `step,target_row,target_col,source_row,source_col,ssd`.
pub fn write_fill_log<W: Write>(log: &[FillStep], mut w: W) -> io::Result<()> {
    writeln!(w, "step,target_row,target_col,source_row,source_col,ssd")?;
    for s in log {
        writeln!(
            w,
            "{},{},{},{},{},{:e}",
            s.step, s.target.0, s.target.1, s.source.0, s.source.1, s.ssd
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).map(|(r, c)| f(r, c)).collect()
    }

    fn hole(w: usize, h: usize, f: impl Fn(usize, usize) -> bool) -> Vec<bool> {
        (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).map(|(r, c)| !f(r, c)).collect()
    }

    #[test]
    fn config_validation() {
        assert!(PatchConfig::new(4).validate().is_err());
        assert!(PatchConfig::new(1).validate().is_err());
        let mut c = PatchConfig::new(5);
        c.band_width = 3;
        assert!(c.validate().is_err());
        assert!(PatchConfig::new(5).validate().is_ok());
    }

    #[test]
    fn constant_image_fills_exactly() {
        let v = grid(12, 12, |_, _| 0.37);
        let m = hole(12, 12, |r, c| r >= 9 || c >= 9);
        let out = inpaint(&v, &m, 12, 12, &PatchConfig::new(3), Execution::Sequential).unwrap();
        assert!(out.values.iter().all(|&x| x == 0.37));
    }

    #[test]
    fn known_cells_never_change() {
        let v = grid(10, 10, |r, c| ((r * 7 + c * 3) % 5) as f64 / 4.0);
        let m = hole(10, 10, |r, c| (3..6).contains(&r) && (2..7).contains(&c));
        let out = inpaint(&v, &m, 10, 10, &PatchConfig::new(3), Execution::Sequential).unwrap();
        for i in 0..100 {
            if m[i] {
                assert_eq!(out.values[i], v[i]);
            }
        }
        assert!(out.log.len() <= m.iter().filter(|k| !**k).count());
    }

    #[test]
    fn insufficient_context_is_rejected() {
        let v = grid(4, 4, |_, _| 0.0);
        let m = hole(4, 4, |r, _| r >= 2);
        let r = inpaint(&v, &m, 4, 4, &PatchConfig::new(3), Execution::Sequential);
        assert!(matches!(r, Err(Error::InsufficientContext { patch: 3 })));
    }

    #[test]
    fn corner_has_higher_confidence_than_edge() {
        // hole is the bottom-right 4x4 block of an 8x8 image
        let v = grid(8, 8, |_, _| 0.5);
        let m = hole(8, 8, |r, c| r >= 4 && c >= 4);
        let st = FillState::new(&v, &m, 8, 8, &PatchConfig::new(3)).unwrap();
        let corner = confidence_term((4, 4), &st, 1);
        let edge = confidence_term((4, 6), &st, 1);
        assert!((corner - 5.0 / 9.0).abs() < 1e-12);
        assert!((edge - 3.0 / 9.0).abs() < 1e-12);
        assert!(corner > edge);
        // flat image: data term at floor
        assert_eq!(data_term((4, 4), &st), DATA_FLOOR);
    }

    #[test]
    fn priority_ties_break_row_major() {
        let v = grid(8, 8, |_, _| 0.5);
        let m = hole(8, 8, |r, _| r >= 5);
        let st = FillState::new(&v, &m, 8, 8, &PatchConfig::new(3)).unwrap();
        // clipped border patches have fewer in-bounds cells, hence higher confidence
        let (t, _) = st.next_target().unwrap();
        assert_eq!(t, (5, 0));
    }

    #[test]
    fn zero_ssd_ties_pick_lowest_index() {
        let v = grid(9, 9, |_, _| 1.0);
        let m = hole(9, 9, |r, c| r == 8 && c == 8);
        let st = FillState::new(&v, &m, 9, 9, &PatchConfig::full(3)).unwrap();
        let (src, ssd) = best_patch((8, 8), &st, &PatchConfig::full(3), Execution::Sequential).unwrap();
        assert_eq!((src, ssd), ((1, 1), 0.0));
        let (src_p, _) = best_patch((8, 8), &st, &PatchConfig::full(3), Execution::Parallel).unwrap();
        assert_eq!(src_p, (1, 1));
    }

    #[test]
    fn fill_log_csv() {
        let log = [FillStep {
            step: 0,
            target: (1, 2),
            source: (3, 4),
            ssd: 0.25,
            priority: 1.0,
        }];
        let mut buf = Vec::new();
        write_fill_log(&log, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,target_row,target_col,source_row,source_col,ssd\n0,1,2,3,4,2.5e-1\n"
        );
    }
}
