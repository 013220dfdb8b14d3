//! Location-aware detection and class-aware localization metrics.
//!
//! References and predictions are grouped into segments of `segment_frames`
//! label frames. Inside each (segment, class) every track becomes one
//! instance whose direction is the component-wise median of its per-frame
//! unit vectors. Instances are paired by minimum total angular distance.
//!
//! * Localization (LE, LR) counts every class-matched pair.
//! * Detection (ER, F1) counts a pair as a true positive only when its error
//!   is within the angular threshold; a pair beyond the threshold becomes one
//!   false positive plus one false negative.

use std::collections::BTreeMap;

use crate::error::{Result, SalsaError};
use crate::types::{angle_between, direction_to_unit, EventAnnotation, LABEL_FRAME_RATE};

pub const DEFAULT_THRESHOLD_DEG: f64 = 20.0;
pub const DEFAULT_SEGMENT_FRAMES: usize = 10;

/// Aggregate error of the four metrics, each mapped so that 0 is perfect.
pub fn d_seld(er: f64, f1: f64, le_deg: f64, lr: f64) -> f64 {
    (er + (1.0 - f1) + le_deg / 180.0 + (1.0 - lr)) / 4.0
}

/// Great-circle angle between two `(azimuth, elevation)` directions in degrees.
pub fn angular_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    crate::types::angular_distance(a, b)
}

/// Minimum-cost assignment on a dense `rows x cols` cost matrix.
///
/// Returns `assignment[row] = Some(col)` for `min(rows, cols)` rows.
/// Shortest augmenting path with potentials, O(n^2 m).
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = cost.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = cost[0].len();
    if cols == 0 {
        return vec![None; rows];
    }
    if rows > cols {
        let transposed: Vec<Vec<f64>> = (0..cols)
            .map(|j| (0..rows).map(|i| cost[i][j]).collect())
            .collect();
        let by_col = hungarian(&transposed);
        let mut out = vec![None; rows];
        for (j, i) in by_col.into_iter().enumerate() {
            if let Some(i) = i {
                out[i] = Some(j);
            }
        }
        return out;
    }

    // 1-based potentials; column 0 is a virtual start.
    let (n, m) = (rows, cols);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
        }
    }
    out
}

/// Matching outcome for one class inside one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSegmentMatch {
    pub segment: usize,
    pub class_index: usize,
    pub num_refs: usize,
    pub num_preds: usize,
    /// Angular error of every class-matched pair, in degrees.
    pub pair_errors: Vec<f64>,
}

impl ClassSegmentMatch {
    /// `(tp, fp, fn)` with detection gated at `threshold_deg`.
    pub fn detection_counts(&self, threshold_deg: f64) -> (usize, usize, usize) {
        let tp = self
            .pair_errors
            .iter()
            .filter(|&&e| e <= threshold_deg)
            .count();
        (tp, self.num_preds - tp, self.num_refs - tp)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchingResult {
    pub entries: Vec<ClassSegmentMatch>,
    pub num_segments: usize,
}

impl MatchingResult {
    pub fn total_refs(&self) -> usize {
        self.entries.iter().map(|e| e.num_refs).sum()
    }

    pub fn total_preds(&self) -> usize {
        self.entries.iter().map(|e| e.num_preds).sum()
    }
}

/// Component-wise median of unit vectors, renormalized.
fn median_direction(vectors: &[[f64; 3]]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut comp: Vec<f64> = vectors.iter().map(|v| v[k]).collect();
        comp.sort_by(f64::total_cmp);
        let n = comp.len();
        *slot = if n % 2 == 1 {
            comp[n / 2]
        } else {
            0.5 * (comp[n / 2 - 1] + comp[n / 2])
        };
    }
    let norm = (out[0] * out[0] + out[1] * out[1] + out[2] * out[2]).sqrt();
    if norm > 1e-12 {
        out.map(|x| x / norm)
    } else {
        // opposing directions cancelled; fall back to the mean
        let mut mean = [0.0; 3];
        for v in vectors {
            for k in 0..3 {
                mean[k] += v[k];
            }
        }
        mean
    }
}

type InstanceKey = (usize, usize, usize); // (segment, class, track)

fn group_instances(
    events: &[EventAnnotation],
    segment_frames: usize,
) -> BTreeMap<InstanceKey, [f64; 3]> {
    let mut frames: BTreeMap<InstanceKey, Vec<[f64; 3]>> = BTreeMap::new();
    for e in events {
        let key = (e.frame_index / segment_frames, e.class_index, e.track_index);
        frames
            .entry(key)
            .or_default()
            .push(direction_to_unit(e.azimuth_deg, e.elevation_deg));
    }
    frames
        .into_iter()
        .map(|(key, mut vs)| {
            // row order must not influence the median
            vs.sort_by(|a, b| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            (key, median_direction(&vs))
        })
        .collect()
}

/// Pair reference and predicted instances per (segment, class).
pub fn match_events(
    refs: &[EventAnnotation],
    preds: &[EventAnnotation],
    segment_frames: usize,
) -> Result<MatchingResult> {
    if segment_frames == 0 {
        return Err(SalsaError::Config(
            "segment length must be at least one frame".into(),
        ));
    }
    let ref_inst = group_instances(refs, segment_frames);
    let pred_inst = group_instances(preds, segment_frames);

    // (segment, class) -> (reference directions, predicted directions)
    type Cell = (Vec<[f64; 3]>, Vec<[f64; 3]>);
    let mut cells: BTreeMap<(usize, usize), Cell> = BTreeMap::new();
    for (&(seg, class, _), v) in &ref_inst {
        cells.entry((seg, class)).or_default().0.push(*v);
    }
    for (&(seg, class, _), v) in &pred_inst {
        cells.entry((seg, class)).or_default().1.push(*v);
    }

    let last_frame = refs.iter().chain(preds).map(|e| e.frame_index).max();
    let num_segments = last_frame.map_or(0, |f| f / segment_frames + 1);

    let entries = cells
        .into_iter()
        .map(|((segment, class_index), (r, p))| {
            let cost: Vec<Vec<f64>> = r
                .iter()
                .map(|a| p.iter().map(|b| angle_between(*a, *b)).collect())
                .collect();
            let pair_errors = hungarian(&cost)
                .into_iter()
                .enumerate()
                .filter_map(|(i, j)| j.map(|j| cost[i][j]))
                .collect();
            ClassSegmentMatch {
                segment,
                class_index,
                num_refs: r.len(),
                num_preds: p.len(),
                pair_errors,
            }
        })
        .collect();
    Ok(MatchingResult {
        entries,
        num_segments,
    })
}

/// [`match_events`] after checking that both lists use the label frame rate.
pub fn match_events_at_rates(
    refs: &[EventAnnotation],
    ref_rate: f64,
    preds: &[EventAnnotation],
    pred_rate: f64,
    segment_frames: usize,
) -> Result<MatchingResult> {
    for (name, rate) in [("reference", ref_rate), ("prediction", pred_rate)] {
        if (rate - LABEL_FRAME_RATE).abs() > 1e-9 {
            return Err(SalsaError::Config(format!(
                "{name} frame rate {rate} fps differs from label rate {LABEL_FRAME_RATE} fps"
            )));
        }
    }
    match_events(refs, preds, segment_frames)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    pub threshold_deg: f64,
    /// Count only pairs within the threshold towards localization recall.
    pub lr_gated: bool,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            threshold_deg: DEFAULT_THRESHOLD_DEG,
            lr_gated: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeldScores {
    pub er: f64,
    pub f1: f64,
    pub le_deg: f64,
    pub lr: f64,
    pub d_seld: f64,
    /// Set when there were no reference events; LE is then reported as 180.
    pub no_reference_events: bool,
}

impl SeldScores {
    pub fn from_metrics(er: f64, f1: f64, le_deg: f64, lr: f64) -> Self {
        Self {
            er,
            f1,
            le_deg,
            lr,
            d_seld: d_seld(er, f1, le_deg, lr),
            no_reference_events: false,
        }
    }

    /// `{"er":..,"f1":..,"le":..,"lr":..,"d_seld":..}` on one line.
    pub fn to_json_line(&self) -> String {
        format!(
            "{{\"er\":{:.6},\"f1\":{:.6},\"le\":{:.6},\"lr\":{:.6},\"d_seld\":{:.6}}}",
            self.er, self.f1, self.le_deg, self.lr, self.d_seld
        )
    }
}

impl std::fmt::Display for SeldScores {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ER      {:.4}", self.er)?;
        writeln!(f, "F1      {:.4}", self.f1)?;
        writeln!(f, "LE_CD   {:.2} deg", self.le_deg)?;
        writeln!(f, "LR_CD   {:.4}", self.lr)?;
        write!(f, "D_SELD  {:.4}", self.d_seld)?;
        if self.no_reference_events {
            write!(f, "\n(no reference events: LE undefined, reported as 180)")?;
        }
        Ok(())
    }
}

pub fn compute_scores(matching: &MatchingResult, threshold_deg: f64) -> Result<SeldScores> {
    compute_scores_with(
        matching,
        &ScoreConfig {
            threshold_deg,
            ..Default::default()
        },
    )
}

pub fn compute_scores_with(matching: &MatchingResult, cfg: &ScoreConfig) -> Result<SeldScores> {
    if !(cfg.threshold_deg > 0.0) {
        return Err(SalsaError::Config(format!(
            "threshold {} must be positive",
            cfg.threshold_deg
        )));
    }
    let t = cfg.threshold_deg;

    let mut per_segment: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    let mut errors_sum = 0.0;
    let mut matched = 0usize;
    let mut matched_gated = 0usize;
    for entry in &matching.entries {
        let (etp, efp, efn) = entry.detection_counts(t);
        tp += etp;
        fp += efp;
        fn_ += efn;
        let seg = per_segment.entry(entry.segment).or_default();
        seg.0 += efn;
        seg.1 += efp;
        errors_sum += entry.pair_errors.iter().sum::<f64>();
        matched += entry.pair_errors.len();
        matched_gated += etp;
    }

    let n_ref = matching.total_refs();
    let errors: usize = per_segment
        .values()
        .map(|&(seg_fn, seg_fp)| {
            let s = seg_fn.min(seg_fp);
            let d = seg_fn.saturating_sub(seg_fp);
            let i = seg_fp.saturating_sub(seg_fn);
            s + d + i
        })
        .sum();
    let er = errors as f64 / n_ref.max(1) as f64;
    let denom = 2 * tp + fp + fn_;
    let f1 = if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    };
    let le_deg = if matched == 0 {
        180.0
    } else {
        errors_sum / matched as f64
    };
    let lr_pairs = if cfg.lr_gated { matched_gated } else { matched };
    let lr = if n_ref == 0 {
        0.0
    } else {
        lr_pairs as f64 / n_ref as f64
    };

    let mut scores = SeldScores::from_metrics(er, f1, le_deg, lr);
    scores.no_reference_events = n_ref == 0;
    Ok(scores)
}

/// Match and score in one call with the default segment length.
pub fn score_events(
    refs: &[EventAnnotation],
    preds: &[EventAnnotation],
    cfg: &ScoreConfig,
) -> Result<SeldScores> {
    let matching = match_events(refs, preds, DEFAULT_SEGMENT_FRAMES)?;
    compute_scores_with(&matching, cfg)
}
