//! Leaderboard construction: per-metric competition ranks, per-dataset
//! ordinal ranks, and the overall rank across datasets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One model's dataset scores over the four leaderboard metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub model: String,
    pub dataset: String,
    pub s: f64,
    pub f: f64,
    pub e: f64,
    pub mae: f64,
}

/// Scores plus ranks for one model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardCell {
    pub s: f64,
    pub f: f64,
    pub e: f64,
    pub mae: f64,
    pub rank_s: u32,
    pub rank_f: u32,
    pub rank_e: u32,
    pub rank_mae: u32,
    pub mean_metric_rank: f64,
    pub dataset_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub model: String,
    /// Keyed by dataset name.
    pub cells: BTreeMap<String, LeaderboardCell>,
    pub mean_dataset_rank: f64,
    pub all_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub datasets: Vec<String>,
    /// Sorted by overall rank.
    pub rows: Vec<LeaderboardRow>,
    /// Models dropped for missing a (model, dataset) cell.
    pub excluded: Vec<String>,
}

/// Competition rank: tied entries share the minimum rank and the next
/// entry skips accordingly. `higher_better` flips the comparison.
fn competition_ranks(values: &[f64], higher_better: bool) -> Vec<u32> {
    values
        .iter()
        .map(|v| {
            let better = values
                .iter()
                .filter(|o| if higher_better { **o > *v } else { **o < *v })
                .count();
            better as u32 + 1
        })
        .collect()
}

/// Builds the leaderboard from dataset scores. Per-metric ranks use
/// competition ranking (descending for S/F/E, ascending for MAE); the
/// dataset rank orders models by the mean of their four metric ranks with
/// ties broken by higher S then model name; the overall rank orders models
/// by the mean of their dataset ranks under the same tie-break.
pub fn rank_models(rows: &[ScoreRow]) -> Result<Leaderboard> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no score rows".into()));
    }
    let mut by_key: BTreeMap<(String, String), &ScoreRow> = BTreeMap::new();
    for row in rows {
        if by_key
            .insert((row.model.clone(), row.dataset.clone()), row)
            .is_some()
        {
            return Err(Error::Manifest(format!(
                "duplicate score row for {} on {}",
                row.model, row.dataset
            )));
        }
    }

    let datasets: Vec<String> = rows
        .iter()
        .map(|r| r.dataset.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let all_models: Vec<String> = rows
        .iter()
        .map(|r| r.model.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let (models, excluded): (Vec<String>, Vec<String>) = all_models.into_iter().partition(|m| {
        datasets
            .iter()
            .all(|d| by_key.contains_key(&(m.clone(), d.clone())))
    });
    if models.is_empty() {
        return Err(Error::Manifest(
            "every model is missing at least one dataset cell".into(),
        ));
    }

    let mut cells: BTreeMap<String, BTreeMap<String, LeaderboardCell>> = BTreeMap::new();
    for dataset in &datasets {
        let scores: Vec<&ScoreRow> = models
            .iter()
            .map(|m| by_key[&(m.clone(), dataset.clone())])
            .collect();
        let rank_s = competition_ranks(&scores.iter().map(|r| r.s).collect::<Vec<_>>(), true);
        let rank_f = competition_ranks(&scores.iter().map(|r| r.f).collect::<Vec<_>>(), true);
        let rank_e = competition_ranks(&scores.iter().map(|r| r.e).collect::<Vec<_>>(), true);
        let rank_mae = competition_ranks(&scores.iter().map(|r| r.mae).collect::<Vec<_>>(), false);

        // Ordinal dataset rank over the mean metric rank; ties go to the
        // higher S, then the lexicographically smaller model name.
        let mut order: Vec<usize> = (0..models.len()).collect();
        let mean_rank = |i: usize| f64::from(rank_s[i] + rank_f[i] + rank_e[i] + rank_mae[i]) / 4.0;
        order.sort_by(|&a, &b| {
            mean_rank(a)
                .partial_cmp(&mean_rank(b))
                .unwrap()
                .then(scores[b].s.partial_cmp(&scores[a].s).unwrap())
                .then(models[a].cmp(&models[b]))
        });
        let mut dataset_rank = vec![0u32; models.len()];
        for (pos, &i) in order.iter().enumerate() {
            dataset_rank[i] = pos as u32 + 1;
        }

        for (i, model) in models.iter().enumerate() {
            cells.entry(model.clone()).or_default().insert(
                dataset.clone(),
                LeaderboardCell {
                    s: scores[i].s,
                    f: scores[i].f,
                    e: scores[i].e,
                    mae: scores[i].mae,
                    rank_s: rank_s[i],
                    rank_f: rank_f[i],
                    rank_e: rank_e[i],
                    rank_mae: rank_mae[i],
                    mean_metric_rank: mean_rank(i),
                    dataset_rank: dataset_rank[i],
                },
            );
        }
    }

    let mean_dataset_rank: Vec<f64> = models
        .iter()
        .map(|m| {
            datasets
                .iter()
                .map(|d| f64::from(cells[m][d].dataset_rank))
                .sum::<f64>()
                / datasets.len() as f64
        })
        .collect();
    let mean_s: Vec<f64> = models
        .iter()
        .map(|m| datasets.iter().map(|d| cells[m][d].s).sum::<f64>() / datasets.len() as f64)
        .collect();

    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_by(|&a, &b| {
        mean_dataset_rank[a]
            .partial_cmp(&mean_dataset_rank[b])
            .unwrap()
            .then(mean_s[b].partial_cmp(&mean_s[a]).unwrap())
            .then(models[a].cmp(&models[b]))
    });

    let rows = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| LeaderboardRow {
            model: models[i].clone(),
            cells: cells[&models[i]].clone(),
            mean_dataset_rank: mean_dataset_rank[i],
            all_rank: pos as u32 + 1,
        })
        .collect();

    Ok(Leaderboard {
        datasets,
        rows,
        excluded,
    })
}

impl Leaderboard {
    pub fn row(&self, model: &str) -> Option<&LeaderboardRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// Flattens the board back into score rows (sorted by model then
    /// dataset), the inverse of [`rank_models`]'s input.
    pub fn score_rows(&self) -> Vec<ScoreRow> {
        let mut out = Vec::new();
        let mut rows: Vec<&LeaderboardRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.model.cmp(&b.model));
        for row in rows {
            for (dataset, cell) in &row.cells {
                out.push(ScoreRow {
                    model: row.model.clone(),
                    dataset: dataset.clone(),
                    s: cell.s,
                    f: cell.f,
                    e: cell.e,
                    mae: cell.mae,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: &str, dataset: &str, s: f64, f: f64, e: f64, mae: f64) -> ScoreRow {
        ScoreRow {
            model: model.into(),
            dataset: dataset.into(),
            s,
            f,
            e,
            mae,
        }
    }

    #[test]
    fn simple_two_model_board() {
        let rows = vec![
            row("good", "d1", 0.9, 0.9, 0.9, 0.05),
            row("bad", "d1", 0.5, 0.5, 0.5, 0.20),
        ];
        let lb = rank_models(&rows).unwrap();
        let good = lb.row("good").unwrap();
        let bad = lb.row("bad").unwrap();
        assert_eq!(good.all_rank, 1);
        assert_eq!(bad.all_rank, 2);
        assert_eq!(good.cells["d1"].rank_mae, 1);
        assert_eq!(bad.cells["d1"].dataset_rank, 2);
    }

    #[test]
    fn ties_share_minimum_rank_and_skip() {
        let rows = vec![
            row("a", "d", 0.9, 0.9, 0.9, 0.05),
            row("b", "d", 0.9, 0.9, 0.9, 0.05),
            row("c", "d", 0.8, 0.8, 0.8, 0.10),
        ];
        let lb = rank_models(&rows).unwrap();
        assert_eq!(lb.row("a").unwrap().cells["d"].rank_s, 1);
        assert_eq!(lb.row("b").unwrap().cells["d"].rank_s, 1);
        assert_eq!(lb.row("c").unwrap().cells["d"].rank_s, 3);
        // Ordinal dataset rank breaks the tie by name once S ties too.
        assert_eq!(lb.row("a").unwrap().cells["d"].dataset_rank, 1);
        assert_eq!(lb.row("b").unwrap().cells["d"].dataset_rank, 2);
    }

    #[test]
    fn missing_cell_excludes_model() {
        let rows = vec![
            row("a", "d1", 0.9, 0.9, 0.9, 0.05),
            row("a", "d2", 0.8, 0.8, 0.8, 0.06),
            row("partial", "d1", 0.7, 0.7, 0.7, 0.10),
        ];
        let lb = rank_models(&rows).unwrap();
        assert_eq!(lb.excluded, vec!["partial".to_string()]);
        assert_eq!(lb.rows.len(), 1);
    }

    #[test]
    fn duplicate_rows_rejected() {
        let rows = vec![
            row("a", "d", 0.9, 0.9, 0.9, 0.05),
            row("a", "d", 0.8, 0.8, 0.8, 0.06),
        ];
        assert!(rank_models(&rows).is_err());
    }

    #[test]
    fn score_rows_invert_ranking() {
        let rows = vec![
            row("a", "d1", 0.9, 0.85, 0.92, 0.05),
            row("b", "d1", 0.7, 0.95, 0.80, 0.08),
            row("a", "d2", 0.6, 0.65, 0.72, 0.15),
            row("b", "d2", 0.9, 0.85, 0.90, 0.05),
        ];
        let board = rank_models(&rows).unwrap();
        assert_eq!(rank_models(&board.score_rows()).unwrap(), board);
    }

    #[test]
    fn invariant_to_row_permutation() {
        let rows = vec![
            row("a", "d1", 0.9, 0.85, 0.92, 0.05),
            row("b", "d1", 0.7, 0.95, 0.80, 0.08),
            row("c", "d1", 0.8, 0.75, 0.85, 0.04),
            row("a", "d2", 0.6, 0.65, 0.72, 0.15),
            row("b", "d2", 0.9, 0.85, 0.90, 0.05),
            row("c", "d2", 0.7, 0.75, 0.80, 0.10),
        ];
        let base = rank_models(&rows).unwrap();
        let mut shuffled = rows.clone();
        shuffled.reverse();
        shuffled.swap(1, 4);
        assert_eq!(rank_models(&shuffled).unwrap(), base);
    }
}
