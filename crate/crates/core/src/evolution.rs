//! Temporal analysis drivers.
//!
//! The cumulative driver grows one complex across the piece and snapshots it
//! after every step; the sliding driver builds a fresh complex per measure
//! window. A step's outgoing transition belongs to the next step, so no
//! snapshot contains information from music not yet heard. Every snapshot
//! recomputes the exact topological invariants and their algebraic identity
//! checks; a violation is an internal error that must abort the run.

use std::str::FromStr;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::complex::SimplicialComplex;
use crate::curvature::{CurvatureError, CurvatureSummary, VertexCurvatureMode};
use crate::homology::{HomologyError, TopologySnapshot};
use crate::score::{ElementSequence, MusicalElement};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("empty element sequence")]
    EmptySequence,
    #[error("elements have no measure indices; meter is unknown (set --beats-per-measure)")]
    MeasuresNotAssigned,
    #[error("window and stride must be at least 1 measure")]
    BadWindow,
    #[error("sliding window of {window} measures exceeds the piece ({measures} measures)")]
    WindowTooLarge { window: usize, measures: usize },
    #[error("sliding mode steps by measures; element stepping is cumulative-only")]
    SlidingByElements,
    #[error("series of {len} steps is too short (minimum {min})")]
    SeriesTooShort { len: usize, min: usize },
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("unknown {what} `{value}`")]
    UnknownVariant { what: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvolutionMode {
    #[default]
    Cumulative,
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepUnit {
    #[default]
    Measure,
    Element,
}

impl EvolutionMode {
    pub fn name(self) -> &'static str {
        match self {
            EvolutionMode::Cumulative => "cumulative",
            EvolutionMode::Sliding => "sliding",
        }
    }
}

impl StepUnit {
    pub fn name(self) -> &'static str {
        match self {
            StepUnit::Measure => "measure",
            StepUnit::Element => "element",
        }
    }
}

impl FromStr for EvolutionMode {
    type Err = EvolutionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cumulative" => Ok(EvolutionMode::Cumulative),
            "sliding" => Ok(EvolutionMode::Sliding),
            other => Err(EvolutionError::UnknownVariant {
                what: "mode",
                value: other.to_string(),
            }),
        }
    }
}

impl FromStr for StepUnit {
    type Err = EvolutionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "measure" => Ok(StepUnit::Measure),
            "element" => Ok(StepUnit::Element),
            other => Err(EvolutionError::UnknownVariant {
                what: "step unit",
                value: other.to_string(),
            }),
        }
    }
}

impl Serialize for EvolutionMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl Serialize for StepUnit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub mode: EvolutionMode,
    pub step_unit: StepUnit,
    /// Window width in measures (sliding only).
    pub window_measures: usize,
    /// Window stride in measures (sliding only).
    pub stride_measures: usize,
    pub curvature_mode: VertexCurvatureMode,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            mode: EvolutionMode::Cumulative,
            step_unit: StepUnit::Measure,
            window_measures: 2,
            stride_measures: 1,
            curvature_mode: VertexCurvatureMode::default(),
        }
    }
}

/// One recorded step: topology, curvature digest, and the position the step
/// covers (measure index, element index, or window start measure).
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub position: usize,
    pub topology: TopologySnapshot,
    pub curvature: CurvatureSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionSeries {
    pub mode: EvolutionMode,
    pub step_unit: StepUnit,
    pub window: Option<usize>,
    pub stride: Option<usize>,
    pub curvature_mode: VertexCurvatureMode,
    pub steps: Vec<StepRecord>,
}

/// χ(t) and t rescaled onto [0, 1]; χ is divided by |χ(first)|, falling back
/// to max |χ| (flagged) when the first value is zero.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizedSeries {
    pub t: Vec<f64>,
    pub chi_norm: Vec<f64>,
    pub fallback: bool,
}

/// A maximal run of steps whose χ did not change from the previous step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Plateau {
    pub start: usize,
    pub end: usize,
}

impl Plateau {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }
}

fn measure_of(el: &MusicalElement) -> Result<usize, EvolutionError> {
    el.measure.ok_or(EvolutionError::MeasuresNotAssigned)
}

/// Grow the complex over the whole piece, one snapshot per step.
///
/// Within a step, elements are ingested in onset order; each element's chord
/// simplex follows the transition edge from the previously heard element, so
/// a step's outgoing transition is only ingested with the next step.
pub fn run_cumulative(
    seq: &ElementSequence,
    cfg: &EvolutionConfig,
) -> Result<EvolutionSeries, EvolutionError> {
    if seq.is_empty() {
        return Err(EvolutionError::EmptySequence);
    }
    let elements = &seq.elements;

    // step boundaries: per measure (possibly-empty interior measures kept as
    // steps) or per element
    let step_positions: Vec<(usize, std::ops::Range<usize>)> = match cfg.step_unit {
        StepUnit::Element => (0..elements.len()).map(|i| (i, i..i + 1)).collect(),
        StepUnit::Measure => {
            let first = measure_of(&elements[0])?;
            let last = measure_of(elements.last().unwrap())?;
            let mut bounds = Vec::with_capacity(last - first + 1);
            let mut cursor = 0;
            for measure in first..=last {
                let begin = cursor;
                while cursor < elements.len() && measure_of(&elements[cursor])? == measure {
                    cursor += 1;
                }
                bounds.push((measure, begin..cursor));
            }
            debug_assert_eq!(cursor, elements.len(), "elements ordered by measure");
            bounds
        }
    };

    let mut complex = SimplicialComplex::new();
    let mut steps: Vec<StepRecord> = Vec::with_capacity(step_positions.len());
    for (step, (position, range)) in step_positions.into_iter().enumerate() {
        let mut changed = false;
        for idx in range {
            if idx > 0 {
                changed |= !complex
                    .insert_transition(
                        elements[idx - 1].representative,
                        elements[idx].representative,
                    )
                    .is_empty();
            }
            changed |= !complex.insert_element(&elements[idx]).is_empty();
        }
        let record = match steps.last() {
            // a step that created nothing (an exact repeat or an empty
            // measure) leaves the complex in its already-verified state
            Some(prev) if !changed => {
                let mut topology = prev.topology.clone();
                topology.step = step;
                StepRecord {
                    position,
                    topology,
                    curvature: prev.curvature.clone(),
                }
            }
            _ => StepRecord {
                position,
                topology: TopologySnapshot::compute(&complex, step)?,
                curvature: CurvatureSummary::compute(&complex, cfg.curvature_mode)?,
            },
        };
        steps.push(record);
    }

    Ok(EvolutionSeries {
        mode: EvolutionMode::Cumulative,
        step_unit: cfg.step_unit,
        window: None,
        stride: None,
        curvature_mode: cfg.curvature_mode,
        steps,
    })
}

/// Build a fresh complex per measure window `[start, start + W)`, advancing
/// by the stride. Transitions are kept only between consecutive elements
/// that both fall inside the window.
pub fn run_sliding(
    seq: &ElementSequence,
    cfg: &EvolutionConfig,
) -> Result<EvolutionSeries, EvolutionError> {
    if seq.is_empty() {
        return Err(EvolutionError::EmptySequence);
    }
    if cfg.step_unit == StepUnit::Element {
        return Err(EvolutionError::SlidingByElements);
    }
    if cfg.window_measures == 0 || cfg.stride_measures == 0 {
        return Err(EvolutionError::BadWindow);
    }
    let elements = &seq.elements;
    let first = measure_of(&elements[0])?;
    let last = measure_of(elements.last().unwrap())?;
    let span = last - first + 1;
    if cfg.window_measures > span {
        return Err(EvolutionError::WindowTooLarge {
            window: cfg.window_measures,
            measures: span,
        });
    }

    let mut steps = Vec::new();
    let mut step = 0;
    let mut start = first;
    while start + cfg.window_measures <= last + 1 {
        let end = start + cfg.window_measures; // exclusive
        let mut complex = SimplicialComplex::new();
        let mut prev_in_window = false;
        for idx in 0..elements.len() {
            let m = measure_of(&elements[idx])?;
            let inside = m >= start && m < end;
            if inside {
                if prev_in_window && idx > 0 {
                    complex.insert_transition(
                        elements[idx - 1].representative,
                        elements[idx].representative,
                    );
                }
                complex.insert_element(&elements[idx]);
            }
            prev_in_window = inside;
        }
        steps.push(StepRecord {
            position: start,
            topology: TopologySnapshot::compute(&complex, step)?,
            curvature: CurvatureSummary::compute(&complex, cfg.curvature_mode)?,
        });
        step += 1;
        start += cfg.stride_measures;
    }

    Ok(EvolutionSeries {
        mode: EvolutionMode::Sliding,
        step_unit: StepUnit::Measure,
        window: Some(cfg.window_measures),
        stride: Some(cfg.stride_measures),
        curvature_mode: cfg.curvature_mode,
        steps,
    })
}

impl EvolutionSeries {
    pub fn euler_series(&self) -> Vec<i64> {
        self.steps.iter().map(|s| s.topology.euler).collect()
    }

    /// Largest simplex dimension reached anywhere in the series.
    pub fn max_dimension(&self) -> usize {
        self.steps
            .iter()
            .map(|s| s.topology.simplex_counts.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// Normalized axes that also cover single-step series (t = 0).
    fn normalized_axes(&self) -> (Vec<f64>, Vec<f64>, bool) {
        let chi = self.euler_series();
        let n = chi.len();
        let t: Vec<f64> = if n <= 1 {
            vec![0.0; n]
        } else {
            (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
        };
        let first = chi.first().copied().unwrap_or(0);
        let (denom, fallback) = if first != 0 {
            (first.abs() as f64, false)
        } else {
            let max_abs = chi.iter().map(|c| c.abs()).max().unwrap_or(0);
            (if max_abs > 0 { max_abs as f64 } else { 1.0 }, true)
        };
        let chi_norm = chi.iter().map(|&c| c as f64 / denom).collect();
        (t, chi_norm, fallback)
    }

    /// Series CSV: `step,t_norm,N0..Nd,beta0..betad,euler,euler_norm,meanF1..meanFd,sumKv`.
    pub fn to_csv(&self) -> String {
        let d = self.max_dimension();
        let (t, chi_norm, _) = self.normalized_axes();
        let mut header = String::from("step,t_norm");
        for k in 0..=d {
            header.push_str(&format!(",N{k}"));
        }
        for k in 0..=d {
            header.push_str(&format!(",beta{k}"));
        }
        header.push_str(",euler,euler_norm");
        for k in 1..=d.max(1) {
            header.push_str(&format!(",meanF{k}"));
        }
        header.push_str(",sumKv\n");

        let mut out = header;
        for (i, record) in self.steps.iter().enumerate() {
            let counts = &record.topology.simplex_counts;
            let betti = &record.topology.betti;
            let mut row = format!("{},{}", record.topology.step, t[i]);
            for k in 0..=d {
                row.push_str(&format!(",{}", counts.get(k).copied().unwrap_or(0)));
            }
            for k in 0..=d {
                row.push_str(&format!(",{}", betti.get(k).copied().unwrap_or(0)));
            }
            row.push_str(&format!(",{},{}", record.topology.euler, chi_norm[i]));
            for k in 0..d.max(1) {
                let mean = record.curvature.mean_forman.get(k).copied().unwrap_or(f64::NAN);
                row.push_str(&format!(",{mean}"));
            }
            row.push_str(&format!(",{}\n", record.curvature.sum_vertex_curvature));
            out.push_str(&row);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (t, chi_norm, fallback) = self.normalized_axes();
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .enumerate()
            .map(|(i, record)| {
                json!({
                    "step": record.topology.step,
                    "position": record.position,
                    "t_norm": t[i],
                    "simplex_counts": record.topology.simplex_counts,
                    "betti": record.topology.betti,
                    "euler": record.topology.euler,
                    "euler_norm": chi_norm[i],
                    "mean_forman": record.curvature.mean_forman,
                    "sum_vertex_curvature": record.curvature.sum_vertex_curvature,
                })
            })
            .collect();
        json!({
            "mode": self.mode,
            "step_unit": self.step_unit,
            "window": self.window,
            "stride": self.stride,
            "curvature_mode": self.curvature_mode,
            "normalization_fallback": fallback,
            "steps": steps,
        })
    }
}

/// Rescale time onto [0, 1] and χ by |χ(first)|.
pub fn normalize_series(series: &EvolutionSeries) -> Result<NormalizedSeries, EvolutionError> {
    if series.steps.len() < 2 {
        return Err(EvolutionError::SeriesTooShort {
            len: series.steps.len(),
            min: 2,
        });
    }
    let (t, chi_norm, fallback) = series.normalized_axes();
    Ok(NormalizedSeries {
        t,
        chi_norm,
        fallback,
    })
}

/// Maximal intervals of ≥ `min_len` consecutive steps with Δχ = 0, sorted by
/// start. Interval bounds are the steps whose χ equals the previous step's.
pub fn detect_plateaus(chi: &[i64], min_len: usize) -> Vec<Plateau> {
    debug_assert!(min_len >= 2);
    let mut plateaus = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 1..=chi.len() {
        let flat = i < chi.len() && chi[i] == chi[i - 1];
        match (flat, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(start)) => {
                let end = i - 1;
                if end - start + 1 >= min_len {
                    plateaus.push(Plateau { start, end });
                }
                run_start = None;
            }
            _ => {}
        }
    }
    plateaus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Beats;
    use crate::score::{ElementKind, MusicalElement};

    fn element(measure: usize, onset: i64, pitches: &[u8]) -> MusicalElement {
        let mut sorted = pitches.to_vec();
        sorted.sort_unstable();
        MusicalElement {
            kind: if sorted.len() > 1 {
                ElementKind::Chord
            } else {
                ElementKind::Note
            },
            representative: crate::score::chord_root(&sorted).unwrap(),
            pitches: sorted,
            onset_beats: Beats::from_integer(onset),
            measure: Some(measure),
        }
    }

    fn seq(elements: Vec<MusicalElement>) -> ElementSequence {
        ElementSequence { elements }
    }

    #[test]
    fn empty_sequence_is_an_error() {
        let cfg = EvolutionConfig::default();
        assert!(matches!(
            run_cumulative(&seq(vec![]), &cfg),
            Err(EvolutionError::EmptySequence)
        ));
    }

    #[test]
    fn one_measure_piece_is_a_single_step() {
        let cfg = EvolutionConfig::default();
        let s = seq(vec![
            element(0, 0, &[60, 64, 67]),
            element(0, 1, &[65]),
        ]);
        let series = run_cumulative(&s, &cfg).unwrap();
        assert_eq!(series.steps.len(), 1);
        // the single snapshot equals the full-piece complex
        assert_eq!(series.steps[0].topology.simplex_counts, vec![4, 4, 1]);
    }

    #[test]
    fn transition_merges_disjoint_measures() {
        // measure 0 and measure 1 share no pitches; the cross-measure
        // transition joins the components in step 1
        let cfg = EvolutionConfig::default();
        let s = seq(vec![
            element(0, 0, &[60]),
            element(0, 1, &[64]),
            element(1, 4, &[50]),
            element(1, 5, &[54]),
        ]);
        let series = run_cumulative(&s, &cfg).unwrap();
        assert_eq!(series.steps[0].topology.betti[0], 1);
        assert_eq!(series.steps[1].topology.betti[0], 1);
        // without the bridge the second measure would add a fresh component:
        // check the bridge edge exists
        let sliding_cfg = EvolutionConfig {
            mode: EvolutionMode::Sliding,
            window_measures: 1,
            ..EvolutionConfig::default()
        };
        let windows = run_sliding(&s, &sliding_cfg).unwrap();
        assert_eq!(windows.steps.len(), 2);
        // each 1-measure window is its own 2-note path
        assert_eq!(windows.steps[0].topology.simplex_counts, vec![2, 1]);
        assert_eq!(windows.steps[1].topology.simplex_counts, vec![2, 1]);
    }

    #[test]
    fn repeats_change_nothing() {
        let cfg = EvolutionConfig::default();
        let theme = [
            (0usize, &[60u8, 64, 67][..]),
            (0, &[65]),
            (1, &[60, 69]),
            (1, &[65]),
        ];
        let mut elements = Vec::new();
        for (i, (m, p)) in theme.iter().enumerate() {
            elements.push(element(*m, i as i64, p));
        }
        // exact repeat two measures later; the bridge transition 65→60
        // re-creates an edge that measure 0 already holds
        for (i, (m, p)) in theme.iter().enumerate() {
            elements.push(element(*m + 2, 8 + i as i64, p));
        }
        let series = run_cumulative(&seq(elements), &cfg).unwrap();
        let chi = series.euler_series();
        assert_eq!(chi.len(), 4);
        assert_eq!(chi[2], chi[1]);
        assert_eq!(chi[3], chi[2]);
        assert_eq!(
            series.steps[1].topology.simplex_counts,
            series.steps[3].topology.simplex_counts
        );
        // counts never decrease
        for w in series.steps.windows(2) {
            let a = &w[0].topology.simplex_counts;
            let b = &w[1].topology.simplex_counts;
            for k in 0..a.len() {
                assert!(b.get(k).copied().unwrap_or(0) >= a[k]);
            }
        }
    }

    #[test]
    fn element_stepping_snapshots_every_element() {
        let cfg = EvolutionConfig {
            step_unit: StepUnit::Element,
            ..EvolutionConfig::default()
        };
        let s = seq(vec![
            element(0, 0, &[60, 64, 67]),
            element(0, 1, &[65]),
            element(1, 4, &[60, 69]),
        ]);
        let series = run_cumulative(&s, &cfg).unwrap();
        assert_eq!(series.steps.len(), 3);
        assert_eq!(series.steps[0].topology.simplex_counts, vec![3, 3, 1]);
        // element 1 brings its vertex plus the transition edge from the root
        assert_eq!(series.steps[1].topology.simplex_counts, vec![4, 4, 1]);
        // measure stepping groups the first two into one step
        let by_measure = run_cumulative(&s, &EvolutionConfig::default()).unwrap();
        assert_eq!(by_measure.steps.len(), 2);
        assert_eq!(
            by_measure.steps[0].topology.simplex_counts,
            series.steps[1].topology.simplex_counts
        );
        assert_eq!(
            by_measure.steps[1].topology.simplex_counts,
            series.steps[2].topology.simplex_counts
        );
    }

    #[test]
    fn sliding_full_width_equals_cumulative_final() {
        let cfg = EvolutionConfig::default();
        let s = seq(vec![
            element(0, 0, &[60, 64, 67]),
            element(0, 1, &[65]),
            element(1, 4, &[60, 69]),
            element(2, 8, &[62]),
        ]);
        let cumulative = run_cumulative(&s, &cfg).unwrap();
        let sliding_cfg = EvolutionConfig {
            mode: EvolutionMode::Sliding,
            window_measures: 3,
            ..EvolutionConfig::default()
        };
        let sliding = run_sliding(&s, &sliding_cfg).unwrap();
        assert_eq!(sliding.steps.len(), 1);
        assert_eq!(
            sliding.steps[0].topology.simplex_counts,
            cumulative.steps.last().unwrap().topology.simplex_counts
        );
        assert_eq!(
            sliding.steps[0].topology.betti,
            cumulative.steps.last().unwrap().topology.betti
        );
    }

    #[test]
    fn window_larger_than_piece_is_rejected() {
        let s = seq(vec![element(0, 0, &[60])]);
        let cfg = EvolutionConfig {
            mode: EvolutionMode::Sliding,
            window_measures: 4,
            ..EvolutionConfig::default()
        };
        assert!(matches!(
            run_sliding(&s, &cfg),
            Err(EvolutionError::WindowTooLarge { window: 4, measures: 1 })
        ));
    }

    #[test]
    fn identical_windows_have_identical_snapshots() {
        let cfg = EvolutionConfig {
            mode: EvolutionMode::Sliding,
            window_measures: 1,
            ..EvolutionConfig::default()
        };
        let s = seq(vec![
            element(0, 0, &[60, 64]),
            element(0, 1, &[67]),
            element(1, 4, &[55]),
            element(2, 8, &[60, 64]),
            element(2, 9, &[67]),
        ]);
        let series = run_sliding(&s, &cfg).unwrap();
        assert_eq!(series.steps.len(), 3);
        assert_eq!(
            series.steps[0].topology.simplex_counts,
            series.steps[2].topology.simplex_counts
        );
        assert_eq!(series.steps[0].topology.betti, series.steps[2].topology.betti);
    }

    #[test]
    fn normalization_examples() {
        let make = |chi: &[i64]| {
            let steps = chi
                .iter()
                .enumerate()
                .map(|(i, &euler)| StepRecord {
                    position: i,
                    topology: TopologySnapshot {
                        step: i,
                        simplex_counts: vec![euler.unsigned_abs() as usize],
                        betti: vec![euler.unsigned_abs() as usize],
                        euler,
                    },
                    curvature: CurvatureSummary {
                        mean_forman: vec![],
                        sum_vertex_curvature: 0.0,
                    },
                })
                .collect();
            EvolutionSeries {
                mode: EvolutionMode::Cumulative,
                step_unit: StepUnit::Measure,
                window: None,
                stride: None,
                curvature_mode: VertexCurvatureMode::FormanSum,
                steps,
            }
        };
        let n = normalize_series(&make(&[5, 4, 3])).unwrap();
        assert_eq!(n.t, vec![0.0, 0.5, 1.0]);
        assert_eq!(n.chi_norm, vec![1.0, 0.8, 0.6]);
        assert!(!n.fallback);

        let constant = normalize_series(&make(&[2, 2, 2])).unwrap();
        assert_eq!(constant.chi_norm, vec![1.0, 1.0, 1.0]);

        let zero_first = normalize_series(&make(&[0, -2, -4])).unwrap();
        assert!(zero_first.fallback);
        assert_eq!(zero_first.chi_norm, vec![0.0, -0.5, -1.0]);

        assert!(matches!(
            normalize_series(&make(&[1])),
            Err(EvolutionError::SeriesTooShort { len: 1, min: 2 })
        ));
    }

    #[test]
    fn plateau_detection() {
        // strictly decreasing: none
        assert!(detect_plateaus(&[5, 4, 3, 2], 2).is_empty());
        // all constant: one full-length run of zero deltas
        assert_eq!(
            detect_plateaus(&[7, 7, 7, 7, 7], 2),
            vec![Plateau { start: 1, end: 4 }]
        );
        // two separated plateaus
        assert_eq!(
            detect_plateaus(&[5, 4, 4, 4, 3, 2, 2, 2], 2),
            vec![Plateau { start: 2, end: 3 }, Plateau { start: 6, end: 7 }]
        );
        // runs shorter than min_len are dropped
        assert!(detect_plateaus(&[5, 5, 4, 3], 2).is_empty());
    }

    #[test]
    fn csv_shape() {
        let cfg = EvolutionConfig::default();
        let s = seq(vec![
            element(0, 0, &[60, 64, 67]),
            element(1, 4, &[65]),
        ]);
        let series = run_cumulative(&s, &cfg).unwrap();
        let csv = series.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "step,t_norm,N0,N1,N2,beta0,beta1,beta2,euler,euler_norm,meanF1,meanF2,sumKv"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,0,3,3,1,1,0,0,1,1,"));
    }
}
