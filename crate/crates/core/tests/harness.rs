//! End-to-end harness runs over real PNG fixtures: scan, evaluate, emit,
//! re-ingest.

mod common;

use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_map, random_mixed_mask};
use sodbench_core::bench::{
    evaluate_manifest, rank_models, report, scan_manifest, EvalOptions, ScoreRow,
};
use sodbench_core::map::{save_map, SaliencyMap};
use sodbench_core::metrics::{self, DEFAULT_BETA2};

#[test]
fn scan_evaluate_and_reingest_records() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("toy");
    fs::create_dir_all(base.join("GT")).unwrap();
    fs::create_dir_all(base.join("pred/m")).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut expected = Vec::new();
    for i in 0..6 {
        let stem = format!("img_{i}");
        let gt = random_mixed_mask(&mut rng, 24, 24, 0.4);
        // predictions at a different resolution exercise the resize path
        let pred = random_map(&mut rng, 18, 18);
        save_map(
            &base.join("GT").join(format!("{stem}.png")),
            &SaliencyMap::from_mask(&gt),
        )
        .unwrap();
        save_map(&base.join("pred/m").join(format!("{stem}.png")), &pred).unwrap();
        expected.push((stem, pred, gt));
    }

    let scan = scan_manifest(dir.path(), "toy", "m").unwrap();
    assert_eq!(scan.manifest.pairs.len(), 6);
    let opts = EvalOptions {
        jobs: 2,
        ..Default::default()
    };
    let outcome = evaluate_manifest(&scan.manifest, &opts).unwrap();
    assert_eq!(outcome.scores.images, 6);
    assert!(outcome.failures.is_empty());

    // Each record matches a direct computation on the decoded pair. The
    // prediction went through an 8-bit save, so requantize before comparing.
    for (stem, pred, gt) in &expected {
        let quantized: Vec<f64> = pred
            .values()
            .iter()
            .map(|v| f64::from(sodbench_core::map::scale_to_u8(*v)) / 255.0)
            .collect();
        let reloaded = SaliencyMap::new(18, 18, quantized)
            .unwrap()
            .resize_to(24, 24)
            .unwrap();
        let direct = metrics::MetricRecord::compute(&reloaded, gt, DEFAULT_BETA2).unwrap();
        let record = &outcome
            .results
            .iter()
            .find(|r| &r.stem == stem)
            .unwrap()
            .record;
        assert_eq!(record, &direct, "{stem}");
    }

    // records CSV re-ingests with the exact same numbers
    let records_path = dir.path().join("records.csv");
    report::write_records_csv(&records_path, &outcome).unwrap();
    let rows = report::read_records_csv(&records_path).unwrap();
    assert_eq!(rows.len(), 6);
    for (row, result) in rows.iter().zip(&outcome.results) {
        assert_eq!(row.stem, result.stem);
        assert_eq!(row.mae, result.record.mae);
        assert_eq!(row.s_measure, result.record.s_measure);
        assert_eq!(row.bce, result.record.bce);
    }
}

#[test]
fn leaderboard_roundtrip_through_emitted_csv() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut rows = Vec::new();
    for model in ["m1", "m2", "m3", "m4"] {
        for dataset in ["d1", "d2"] {
            rows.push(ScoreRow {
                model: model.into(),
                dataset: dataset.into(),
                s: rng.gen_range(0.4..0.95),
                f: rng.gen_range(0.4..0.95),
                e: rng.gen_range(0.5..0.99),
                mae: rng.gen_range(0.02..0.3),
            });
        }
    }
    let board = rank_models(&rows).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("leaderboard.csv");
    report::write_leaderboard_csv(&path, &board).unwrap();
    let reread = report::read_score_rows_csv(&path).unwrap();
    assert_eq!(rank_models(&reread).unwrap(), board);

    // markdown renders every model exactly once
    let md = report::leaderboard_markdown(&board);
    for model in ["m1", "m2", "m3", "m4"] {
        assert_eq!(md.matches(&format!("| {model} |")).count(), 1);
    }
}
