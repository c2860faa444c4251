//! Subcommand implementations. Each returns the one-line summary printed to
//! stdout; every produced file is deterministic for fixed input and flags.

use std::path::{Path, PathBuf};

use serde_json::json;

use simploscore::complex::SimplicialComplex;
use simploscore::curvature::{gauss_bonnet_series, CurvatureReport};
use simploscore::evolution::{
    detect_plateaus, normalize_series, run_cumulative, run_sliding, EvolutionConfig,
    EvolutionMode, EvolutionSeries,
};
use simploscore::fitting::{fit_exponential, fit_linear, fit_poly, FitResult};
use simploscore::homology::{
    betti_spectral, boundary_matrix, boundary_matrix_csv, TopologySnapshot, DEFAULT_SPECTRAL_TOL,
};
use simploscore::ingest::{
    assign_measures, events_to_csv, parse_midi, MeterSource, MeterSpec, ParsedPiece,
};
use simploscore::score::{detect_simultaneities, ElementSequence};

use crate::config::{ModelSpec, Settings};
use crate::svg::{Plot, Style};
use crate::AppError;

fn read_input(path: &Path) -> Result<Vec<u8>, AppError> {
    std::fs::read(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string())
}

fn out_file(settings: &Settings, base: &str, suffix: &str) -> Result<PathBuf, AppError> {
    std::fs::create_dir_all(&settings.out).map_err(|e| {
        AppError::Data(format!(
            "cannot create output directory {}: {e}",
            settings.out.display()
        ))
    })?;
    Ok(settings.out.join(format!("{base}.{suffix}")))
}

fn write_file(path: &Path, content: &str) -> Result<(), AppError> {
    std::fs::write(path, content)
        .map_err(|e| AppError::Data(format!("cannot write {}: {e}", path.display())))
}

fn json_text(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    text
}

/// Parse, segment and group one MIDI input.
fn load_piece(
    input: &Path,
    settings: &Settings,
) -> Result<(ParsedPiece, Option<MeterSpec>, ElementSequence), AppError> {
    let bytes = read_input(input)?;
    let mut piece =
        parse_midi(&bytes).map_err(|e| AppError::Data(format!("{}: {e}", input.display())))?;
    if piece.events.is_empty() {
        return Err(AppError::Data(format!(
            "{}: empty piece (no notes)",
            input.display()
        )));
    }
    let meter = settings
        .beats_per_measure
        .map(|b| MeterSpec::new(b, MeterSource::CliOverride))
        .or(piece.meter);
    if let Some(m) = &meter {
        assign_measures(&mut piece.events, m, settings.pickup_beats);
    }
    let seq = detect_simultaneities(&piece.events, settings.epsilon_beats);
    Ok((piece, meter, seq))
}

fn build_full_complex(seq: &ElementSequence) -> SimplicialComplex {
    let mut c = SimplicialComplex::new();
    for (i, el) in seq.elements.iter().enumerate() {
        if i > 0 {
            c.insert_transition(seq.elements[i - 1].representative, el.representative);
        }
        c.insert_element(el);
    }
    c
}

fn run_evolution(seq: &ElementSequence, settings: &Settings) -> Result<EvolutionSeries, AppError> {
    let cfg = EvolutionConfig {
        mode: settings.mode,
        step_unit: settings.step_unit,
        window_measures: settings.window,
        stride_measures: settings.stride,
        curvature_mode: settings.curvature,
    };
    let series = match settings.mode {
        EvolutionMode::Cumulative => run_cumulative(seq, &cfg)?,
        EvolutionMode::Sliding => run_sliding(seq, &cfg)?,
    };
    Ok(series)
}

fn counts_str(counts: &[usize]) -> String {
    let inner: Vec<String> = counts.iter().map(usize::to_string).collect();
    format!("({})", inner.join(","))
}

pub fn analyze(
    input: &Path,
    settings: &Settings,
    export_matrices: bool,
) -> Result<String, AppError> {
    let (piece, meter, seq) = load_piece(input, settings)?;
    let complex = build_full_complex(&seq);
    let snapshot = TopologySnapshot::compute(&complex, 0)?;
    let spectral = betti_spectral(&complex, DEFAULT_SPECTRAL_TOL)?;
    if spectral != snapshot.betti {
        log::warn!(
            "{}: spectral Betti numbers {:?} disagree with exact {:?}",
            input.display(),
            spectral,
            snapshot.betti
        );
    }
    let curvature = CurvatureReport::compute(&complex, settings.curvature)?;

    let base = stem(input);
    if settings.formats.json {
        let report = json!({
            "input": input.display().to_string(),
            "midi_format": piece.format,
            "ppq": piece.ppq,
            "meter": meter,
            "warnings": piece.warnings,
            "note_count": piece.events.len(),
            "element_count": seq.len(),
            "dimension": complex.dimension(),
            "topology": {
                "simplex_counts": snapshot.simplex_counts,
                "betti": snapshot.betti,
                "betti_spectral": spectral,
                "euler": snapshot.euler,
            },
            "curvature": curvature.summary_json(),
            "element_sequence": seq.to_json(),
            "complex": complex.to_json(),
        });
        write_file(&out_file(settings, &base, "analysis.json")?, &json_text(&report))?;
    }
    if settings.formats.csv {
        write_file(
            &out_file(settings, &base, "notes.csv")?,
            &events_to_csv(&piece.events),
        )?;
        write_file(&out_file(settings, &base, "curvature.csv")?, &curvature.to_csv())?;
    }
    if export_matrices {
        if let Some(d) = complex.dimension() {
            for k in 1..=d {
                let b = boundary_matrix(&complex, k)?;
                write_file(
                    &out_file(settings, &base, &format!("B{k}.csv"))?,
                    &boundary_matrix_csv(&b),
                )?;
            }
        }
    }

    Ok(format!(
        "{}: notes={} elements={} dim={} N={} beta={} chi={}",
        input.display(),
        piece.events.len(),
        seq.len(),
        complex.dimension().map_or(0, |d| d),
        counts_str(&snapshot.simplex_counts),
        counts_str(&snapshot.betti),
        snapshot.euler
    ))
}

pub fn evolve(input: &Path, settings: &Settings) -> Result<String, AppError> {
    let (_piece, _meter, seq) = load_piece(input, settings)?;
    let series = run_evolution(&seq, settings)?;
    let base = stem(input);

    if settings.formats.csv {
        write_file(&out_file(settings, &base, "evolution.csv")?, &series.to_csv())?;
    }
    if settings.formats.json {
        write_file(
            &out_file(settings, &base, "evolution.json")?,
            &json_text(&series.to_json()),
        )?;
    }
    if settings.formats.svg {
        write_file(
            &out_file(settings, &base, "evolution.svg")?,
            &evolution_svg(&series, &base),
        )?;
    }

    let chi = series.euler_series();
    let plateaus = detect_plateaus(&chi, 2);
    let plateau_text = if plateaus.is_empty() {
        "none".to_string()
    } else {
        plateaus
            .iter()
            .map(|p| format!("[{}..{}]", p.start, p.end))
            .collect::<Vec<_>>()
            .join(" ")
    };
    Ok(format!(
        "{}: mode={} steps={} chi_final={} plateaus={}",
        input.display(),
        series.mode.name(),
        series.steps.len(),
        chi.last().copied().unwrap_or(0),
        plateau_text
    ))
}

fn evolution_svg(series: &EvolutionSeries, base: &str) -> String {
    let n = series.steps.len();
    let t: Vec<f64> = if n <= 1 {
        vec![0.0; n]
    } else {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    };
    let chi_norm: Vec<f64> = match normalize_series(series) {
        Ok(norm) => norm.chi_norm,
        Err(_) => series.euler_series().iter().map(|&c| c as f64).collect(),
    };
    let sum_k: Vec<f64> = series
        .steps
        .iter()
        .map(|s| s.curvature.sum_vertex_curvature)
        .collect();
    let k_scale = sum_k
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut plot = Plot::line(
        &format!("{base}: evolution ({})", series.mode.name()),
        "t (normalized)",
        "normalized value",
    );
    plot = plot.with(
        "normalized Euler characteristic",
        Style::Line,
        t.iter().copied().zip(chi_norm).collect(),
    );
    plot = plot.with(
        "total vertex curvature / max",
        Style::Line,
        t.iter().copied().zip(sum_k.iter().map(|v| v / k_scale)).collect(),
    );
    plot.render()
}

pub fn gauss_bonnet(input: &Path, settings: &Settings) -> Result<String, AppError> {
    let (_piece, _meter, seq) = load_piece(input, settings)?;
    let series = run_evolution(&seq, settings)?;
    let gb = gauss_bonnet_series(&series)?;
    let base = stem(input);

    if settings.formats.json {
        let report = json!({
            "input": input.display().to_string(),
            "curvature_mode": settings.curvature,
            "series": gb,
        });
        write_file(
            &out_file(settings, &base, "gauss_bonnet.json")?,
            &json_text(&report),
        )?;
    }
    if settings.formats.csv {
        let mut csv = String::from("euler,sum_vertex_curvature\n");
        for (chi, k) in &gb.points {
            csv.push_str(&format!("{chi},{k}\n"));
        }
        write_file(&out_file(settings, &base, "gauss_bonnet.csv")?, &csv)?;
    }
    if settings.formats.svg {
        let scatter: Vec<(f64, f64)> = gb.points.iter().map(|&(c, k)| (c as f64, k)).collect();
        let mut plot = Plot::line(
            &format!("{base}: total curvature vs Euler characteristic"),
            "Euler characteristic",
            "Σ K_v",
        )
        .with("steps", Style::Scatter, scatter.clone());
        if let (Some(slope), Some(intercept)) = (gb.slope, gb.intercept) {
            let xs: Vec<f64> = scatter.iter().map(|p| p.0).collect();
            let (lo, hi) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                });
            plot = plot.with(
                "least-squares line",
                Style::Line,
                vec![(lo, slope * lo + intercept), (hi, slope * hi + intercept)],
            );
        }
        write_file(&out_file(settings, &base, "gauss_bonnet.svg")?, &plot.render())?;
    }

    let line = match gb.slope {
        Some(slope) => format!(
            "{}: slope={:.6} intercept={:.6} alpha=1/N0={:.6} alpha_fitted={} ratio_alpha_slope_over_2pi={:.6}",
            input.display(),
            slope,
            gb.intercept.unwrap_or(f64::NAN),
            gb.alpha,
            gb.alpha_fitted
                .map(|a| format!("{a:.6}"))
                .unwrap_or_else(|| "undefined".to_string()),
            gb.ratio.unwrap_or(f64::NAN),
        ),
        None => format!(
            "{}: slope undefined (constant Euler characteristic), alpha=1/N0={:.6}",
            input.display(),
            gb.alpha
        ),
    };
    Ok(line)
}

/// Column-oriented numeric CSV with a header row.
struct SeriesTable {
    header: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl SeriesTable {
    fn read(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| AppError::Data(format!("{}: empty series CSV", path.display())))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut columns = vec![Vec::new(); header.len()];
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(AppError::Data(format!(
                    "{}: line {} has {} fields, header has {}",
                    path.display(),
                    lineno + 2,
                    fields.len(),
                    header.len()
                )));
            }
            for (i, field) in fields.iter().enumerate() {
                let value: f64 = field.trim().parse().map_err(|_| {
                    AppError::Data(format!(
                        "{}: line {}: `{}` is not a number",
                        path.display(),
                        lineno + 2,
                        field
                    ))
                })?;
                columns[i].push(value);
            }
        }
        Ok(SeriesTable { header, columns })
    }

    fn column(&self, name: &str, path: &Path) -> Result<&[f64], AppError> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| {
                AppError::Data(format!(
                    "{}: series CSV is missing column `{name}` (has: {})",
                    path.display(),
                    self.header.join(", ")
                ))
            })
    }
}

fn run_fit(model: ModelSpec, x: &[f64], y: &[f64], exp_no_offset: bool) -> Result<FitResult, AppError> {
    let fit = match model {
        ModelSpec::Linear => fit_linear(x, y),
        ModelSpec::Poly(n) => fit_poly(x, y, n),
        ModelSpec::Exponential => fit_exponential(x, y, exp_no_offset),
    }?;
    Ok(fit)
}

fn params_str(params: &[f64]) -> String {
    let inner: Vec<String> = params.iter().map(|p| format!("{p:.6}")).collect();
    format!("[{}]", inner.join(", "))
}

pub fn fit(
    series_path: &Path,
    settings: &Settings,
    x_col: &str,
    y_col: &str,
) -> Result<String, AppError> {
    let table = SeriesTable::read(series_path)?;
    let x_raw = table.column(x_col, series_path)?;
    let y_raw = table.column(y_col, series_path)?;
    // drop rows that are not finite in either coordinate (e.g. NaN means of
    // empty curvature orders)
    let (x, y): (Vec<f64>, Vec<f64>) = x_raw
        .iter()
        .zip(y_raw)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .unzip();
    if x.len() < x_raw.len() {
        log::warn!(
            "{}: dropped {} non-finite rows before fitting",
            series_path.display(),
            x_raw.len() - x.len()
        );
    }
    let fit = run_fit(settings.model, &x, &y, settings.exp_no_offset)?;

    let base = stem(series_path);
    if settings.formats.json {
        let report = json!({
            "input": series_path.display().to_string(),
            "x_column": x_col,
            "y_column": y_col,
            "fit": fit,
        });
        write_file(&out_file(settings, &base, "fit.json")?, &json_text(&report))?;
    }
    if settings.formats.svg {
        let scatter: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
        let (lo, hi) = x
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let curve: Vec<(f64, f64)> = (0..=200)
            .map(|i| {
                let xv = lo + (hi - lo) * i as f64 / 200.0;
                (xv, fit.predict(xv))
            })
            .collect();
        let plot = Plot::line(&format!("{base}: {} fit", fit.model), x_col, y_col)
            .with("data", Style::Scatter, scatter)
            .with("fit", Style::Line, curve);
        write_file(&out_file(settings, &base, "fit.svg")?, &plot.render())?;
    }

    Ok(format!(
        "{}: model={} params={} r2={:.6}{}",
        series_path.display(),
        fit.model,
        params_str(&fit.params),
        fit.r_squared,
        if fit.flags.is_empty() {
            String::new()
        } else {
            format!(" flags={}", fit.flags.join(","))
        }
    ))
}

pub fn plot(
    series_path: &Path,
    settings: &Settings,
    x_col: &str,
    y_cols: &str,
) -> Result<String, AppError> {
    let table = SeriesTable::read(series_path)?;
    let x = table.column(x_col, series_path)?.to_vec();
    let base = stem(series_path);
    let mut plot = Plot::line(&base, x_col, "value");
    for y_col in y_cols.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let y = table.column(y_col, series_path)?;
        plot = plot.with(
            y_col,
            Style::Line,
            x.iter().copied().zip(y.iter().copied()).collect(),
        );
    }
    let path = out_file(settings, &base, "plot.svg")?;
    write_file(&path, &plot.render())?;
    Ok(format!("{}: wrote {}", series_path.display(), path.display()))
}
