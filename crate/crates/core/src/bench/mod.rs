//! Dataset ingestion and the benchmark harness: manifest scanning, parallel
//! evaluation, ranking, bound analysis, and report emission.

mod eval;
mod rank;
pub mod report;

pub use eval::{
    bound_analysis, evaluate_loaded, evaluate_manifest, Bounds, DatasetScores, EvalOptions,
    EvalOutcome, FailedImage, ImageResult, MeanCurvePoint,
};
pub use rank::{rank_models, Leaderboard, LeaderboardCell, LeaderboardRow, ScoreRow};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One prediction/ground-truth/depth triple, matched by stem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImagePair {
    pub stem: String,
    pub pred: PathBuf,
    pub gt: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<PathBuf>,
}

/// Declared pairing of predictions, ground truths, and depth maps for one
/// model on one dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub model: String,
    pub pairs: Vec<ImagePair>,
}

/// Scan result: the manifest plus anything that failed to pair up.
#[derive(Debug, Clone)]
pub struct ScanReport {
    pub manifest: DatasetManifest,
    pub unmatched_preds: Vec<String>,
    pub unmatched_gts: Vec<String>,
}

fn stems_of_dir(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut map = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if let Some(previous) = map.insert(stem.to_string(), path.clone()) {
            return Err(Error::Manifest(format!(
                "duplicate stem '{}' in {}: {} and {}",
                stem,
                dir.display(),
                previous.display(),
                path.display()
            )));
        }
    }
    Ok(map)
}

/// Walks `<root>/<dataset>/{GT,depth,pred/<model>}/` and matches files by
/// stem. Unmatched files are reported, not silently dropped.
pub fn scan_manifest(root: &Path, dataset: &str, model: &str) -> Result<ScanReport> {
    let base = root.join(dataset);
    let gt_dir = base.join("GT");
    let pred_dir = base.join("pred").join(model);
    let depth_dir = base.join("depth");

    let gts = stems_of_dir(&gt_dir)?;
    let preds = stems_of_dir(&pred_dir)?;
    let depths = if depth_dir.is_dir() {
        stems_of_dir(&depth_dir)?
    } else {
        BTreeMap::new()
    };

    let mut pairs = Vec::new();
    let mut unmatched_gts = Vec::new();
    for (stem, gt) in &gts {
        match preds.get(stem) {
            Some(pred) => pairs.push(ImagePair {
                stem: stem.clone(),
                pred: pred.clone(),
                gt: gt.clone(),
                depth: depths.get(stem).cloned(),
            }),
            None => unmatched_gts.push(stem.clone()),
        }
    }
    let unmatched_preds: Vec<String> = preds
        .keys()
        .filter(|stem| !gts.contains_key(*stem))
        .cloned()
        .collect();

    if pairs.is_empty() {
        return Err(Error::Manifest(format!(
            "no prediction/ground-truth pairs found under {}",
            base.display()
        )));
    }
    Ok(ScanReport {
        manifest: DatasetManifest {
            name: dataset.to_string(),
            model: model.to_string(),
            pairs,
        },
        unmatched_preds,
        unmatched_gts,
    })
}

impl DatasetManifest {
    /// Loads an explicit manifest from JSON and validates it.
    pub fn from_json_file(path: &Path) -> Result<DatasetManifest> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)?;
        manifest.pairs.sort_by(|a, b| a.stem.cmp(&b.stem));
        manifest.validate()?;
        Ok(manifest)
    }

    /// Checks stem uniqueness and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::Manifest("manifest lists no pairs".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for pair in &self.pairs {
            if !seen.insert(&pair.stem) {
                return Err(Error::Manifest(format!("duplicate stem '{}'", pair.stem)));
            }
            for path in [Some(&pair.pred), Some(&pair.gt), pair.depth.as_ref()]
                .into_iter()
                .flatten()
            {
                if !path.is_file() {
                    return Err(Error::Manifest(format!(
                        "missing file for stem '{}': {}",
                        pair.stem,
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }
}
