//! Report emission and re-ingestion: per-image records, threshold curves,
//! dataset scores, leaderboards (CSV / Markdown / JSON), and SVG curve
//! plots. Numbers in CSV use the shortest round-trip float form, so
//! re-ingesting a report reproduces the exact values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::{EvalOutcome, MeanCurvePoint};
use super::rank::{Leaderboard, ScoreRow};
use crate::error::{Error, Result};
use crate::metrics::CurvePoint;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

// -------------------------------------------------------------------------
// Per-image records
// -------------------------------------------------------------------------

/// Scalar per-image scores as stored in a records CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub stem: String,
    pub mae: f64,
    pub f_max: f64,
    pub f_adaptive: f64,
    pub s_measure: f64,
    pub e_max: f64,
    pub bce: f64,
}

pub fn records_csv(outcome: &EvalOutcome) -> String {
    let mut out = String::from("stem,mae,f_max,f_adaptive,s_measure,e_max,bce\n");
    for r in &outcome.results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.stem,
            r.record.mae,
            r.record.f_max,
            r.record.f_adaptive,
            r.record.s_measure,
            r.record.e_max,
            r.record.bce
        ));
    }
    out
}

pub fn write_records_csv(path: &Path, outcome: &EvalOutcome) -> Result<()> {
    write_file(path, &records_csv(outcome))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<RecordRow>> {
    let text = read_file(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

// -------------------------------------------------------------------------
// Threshold curves
// -------------------------------------------------------------------------

const CURVE_HEADER: &str = "threshold,precision,recall,f,e\n";

fn curve_rows<'a>(points: impl Iterator<Item = (u8, f64, f64, f64, f64)> + 'a) -> String {
    let mut out = String::from(CURVE_HEADER);
    for (theta, p, r, f, e) in points {
        out.push_str(&format!("{theta},{p},{r},{f},{e}\n"));
    }
    out
}

pub fn mean_curve_csv(points: &[MeanCurvePoint]) -> String {
    curve_rows(
        points
            .iter()
            .map(|p| (p.threshold, p.precision, p.recall, p.f_beta, p.e_value)),
    )
}

pub fn image_curve_csv(points: &[CurvePoint]) -> String {
    curve_rows(
        points
            .iter()
            .map(|p| (p.threshold, p.precision, p.recall, p.f_beta, p.e_value)),
    )
}

pub fn write_mean_curve_csv(path: &Path, points: &[MeanCurvePoint]) -> Result<()> {
    write_file(path, &mean_curve_csv(points))
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<MeanCurvePoint>> {
    #[derive(Deserialize)]
    struct Row {
        threshold: u8,
        precision: f64,
        recall: f64,
        f: f64,
        e: f64,
    }
    let text = read_file(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut points = Vec::new();
    for row in reader.deserialize() {
        let row: Row = row?;
        points.push(MeanCurvePoint {
            threshold: row.threshold,
            precision: row.precision,
            recall: row.recall,
            f_beta: row.f,
            e_value: row.e,
        });
    }
    Ok(points)
}

// -------------------------------------------------------------------------
// Dataset scores
// -------------------------------------------------------------------------

#[derive(Serialize)]
struct ScoresDocument<'a> {
    dataset: &'a str,
    model: &'a str,
    scores: &'a super::eval::DatasetScores,
    failures: &'a [super::eval::FailedImage],
}

pub fn scores_json(outcome: &EvalOutcome) -> String {
    let doc = ScoresDocument {
        dataset: &outcome.dataset,
        model: &outcome.model,
        scores: &outcome.scores,
        failures: &outcome.failures,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("scores serialize");
    text.push('\n');
    text
}

pub fn write_scores_json(path: &Path, outcome: &EvalOutcome) -> Result<()> {
    write_file(path, &scores_json(outcome))
}

// -------------------------------------------------------------------------
// Leaderboards
// -------------------------------------------------------------------------

/// Reads score rows from a CSV with at least the columns
/// model,dataset,s,f,e,mae — which both bare score tables and emitted
/// leaderboard CSVs provide.
pub fn read_score_rows_csv(path: &Path) -> Result<Vec<ScoreRow>> {
    let text = read_file(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(model), Some(dataset), Some(s), Some(f), Some(e), Some(mae)) = (
        col("model"),
        col("dataset"),
        col("s"),
        col("f"),
        col("e"),
        col("mae"),
    ) else {
        return Err(Error::Manifest(format!(
            "{}: expected columns model,dataset,s,f,e,mae",
            path.display()
        )));
    };
    let parse = |field: &str| -> Result<f64> {
        field
            .parse()
            .map_err(|_| Error::Manifest(format!("bad score value '{field}'")))
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(ScoreRow {
            model: record[model].to_string(),
            dataset: record[dataset].to_string(),
            s: parse(&record[s])?,
            f: parse(&record[f])?,
            e: parse(&record[e])?,
            mae: parse(&record[mae])?,
        });
    }
    Ok(rows)
}

pub fn write_score_rows_csv(path: &Path, rows: &[ScoreRow]) -> Result<()> {
    let mut out = String::from("model,dataset,s,f,e,mae\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.model, r.dataset, r.s, r.f, r.e, r.mae
        ));
    }
    write_file(path, &out)
}

/// Long-format leaderboard CSV: one row per model x dataset, scores first
/// so the file re-ingests as a score table.
pub fn leaderboard_csv(lb: &Leaderboard) -> String {
    let mut out = String::from(
        "model,dataset,s,f,e,mae,rank_s,rank_f,rank_e,rank_mae,mean_metric_rank,dataset_rank,mean_dataset_rank,all_rank\n",
    );
    let mut rows: Vec<_> = lb.rows.iter().collect();
    rows.sort_by(|a, b| a.model.cmp(&b.model));
    for row in rows {
        for (dataset, c) in &row.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                row.model,
                dataset,
                c.s,
                c.f,
                c.e,
                c.mae,
                c.rank_s,
                c.rank_f,
                c.rank_e,
                c.rank_mae,
                c.mean_metric_rank,
                c.dataset_rank,
                row.mean_dataset_rank,
                row.all_rank
            ));
        }
    }
    out
}

pub fn write_leaderboard_csv(path: &Path, lb: &Leaderboard) -> Result<()> {
    write_file(path, &leaderboard_csv(lb))
}

pub fn leaderboard_json(lb: &Leaderboard) -> String {
    let mut text = serde_json::to_string_pretty(lb).expect("leaderboard serialize");
    text.push('\n');
    text
}

pub fn write_leaderboard_json(path: &Path, lb: &Leaderboard) -> Result<()> {
    write_file(path, &leaderboard_json(lb))
}

/// Markdown table with per-dataset column groups in the order
/// S↑, F↑, E↑, M↓, Rank, and the overall rank last.
pub fn leaderboard_markdown(lb: &Leaderboard) -> String {
    let mut out = String::new();
    out.push_str("| Model |");
    for d in &lb.datasets {
        out.push_str(&format!(" {d} S↑ | F↑ | E↑ | M↓ | Rank |"));
    }
    out.push_str(" All Rank |\n");
    out.push_str("|---|");
    for _ in &lb.datasets {
        out.push_str("---|---|---|---|---|");
    }
    out.push_str("---|\n");
    for row in &lb.rows {
        out.push_str(&format!("| {} |", row.model));
        for d in &lb.datasets {
            let c = &row.cells[d];
            out.push_str(&format!(
                " {:.3} | {:.3} | {:.3} | {:.3} | {} |",
                c.s, c.f, c.e, c.mae, c.dataset_rank
            ));
        }
        out.push_str(&format!(" {} |\n", row.all_rank));
    }
    if !lb.excluded.is_empty() {
        out.push_str(&format!(
            "\nExcluded (missing dataset cells): {}\n",
            lb.excluded.join(", ")
        ));
    }
    out.push_str(
        "\nRank orders models by the mean of the four metric ranks per dataset; \
         All Rank by the mean of dataset ranks. Ties break by higher S, then model name.\n",
    );
    out
}

pub fn write_leaderboard_markdown(path: &Path, lb: &Leaderboard) -> Result<()> {
    write_file(path, &leaderboard_markdown(lb))
}

// -------------------------------------------------------------------------
// SVG plots
// -------------------------------------------------------------------------

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

/// One polyline per named series over unit-interval axes.
pub fn svg_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    x_max: f64,
    series: &[(String, Vec<(f64, f64)>)],
) -> String {
    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + x / x_max * plot_w;
    let sy = |y: f64| MARGIN_T + (1.0 - y) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n",
        MARGIN_L + plot_w / 2.0
    ));
    out.push_str(&format!(
        "  <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" fill=\"none\" stroke=\"#333\"/>\n"
    ));
    for i in 0..=5 {
        let fx = i as f64 / 5.0;
        let x = sx(fx * x_max);
        let y = sy(fx);
        out.push_str(&format!(
            "  <line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#333\"/>\n",
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0
        ));
        out.push_str(&format!(
            "  <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{:.1}</text>\n",
            MARGIN_T + plot_h + 18.0,
            fx * x_max
        ));
        out.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{MARGIN_L}\" y2=\"{y:.1}\" stroke=\"#333\"/>\n",
            MARGIN_L - 5.0
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{fx:.1}</text>\n",
            MARGIN_L - 9.0,
            y + 4.0
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{x_label}</text>\n",
        MARGIN_L + plot_w / 2.0,
        SVG_H - 12.0
    ));
    out.push_str(&format!(
        "  <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 {:.1})\">{y_label}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    ));

    for (i, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(y.clamp(0.0, 1.0))))
            .collect();
        out.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            coords.join(" ")
        ));
        let ly = MARGIN_T + 14.0 + i as f64 * 16.0;
        out.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            SVG_W - MARGIN_R + 10.0,
            SVG_W - MARGIN_R + 34.0
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{name}</text>\n",
            SVG_W - MARGIN_R + 40.0,
            ly + 4.0
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Precision-recall plot, one polyline per model.
pub fn svg_pr_curves(series: &[(String, Vec<MeanCurvePoint>)]) -> String {
    let lines: Vec<(String, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(name, curve)| {
            (
                name.clone(),
                curve.iter().map(|p| (p.recall, p.precision)).collect(),
            )
        })
        .collect();
    svg_chart("Precision-Recall", "Recall", "Precision", 1.0, &lines)
}

/// F-measure vs threshold plot, one polyline per model.
pub fn svg_f_curves(series: &[(String, Vec<MeanCurvePoint>)]) -> String {
    let lines: Vec<(String, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(name, curve)| {
            (
                name.clone(),
                curve
                    .iter()
                    .map(|p| (f64::from(p.threshold), p.f_beta))
                    .collect(),
            )
        })
        .collect();
    svg_chart("F-measure vs threshold", "Threshold", "F", 255.0, &lines)
}

pub fn write_svg(path: &Path, svg: &str) -> Result<()> {
    write_file(path, svg)
}
