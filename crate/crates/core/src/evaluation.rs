//! Precision and recall of estimated clusterings against true clusters,
//! and batch scoring over simulated replications.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::EstimatorPolicy;
use crate::error::{Error, Result};
use crate::fofc::{fofc, Clustering, FofcConfig};
use crate::sem::{derive_seed, draw_parameters, random_topology, rng_for, simulate, DataType};

fn overlap(a: &[usize], b: &[usize]) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

/// Largest share of `est` contained in a single true cluster.
pub fn individual_precision(est: &[usize], truth: &[Vec<usize>]) -> f64 {
    assert!(!est.is_empty(), "estimated cluster must be nonempty");
    let best = truth.iter().map(|t| overlap(est, t)).max().unwrap_or(0);
    best as f64 / est.len() as f64
}

/// Mean individual precision, or `None` when nothing was clustered.
pub fn final_precision(clustering: &Clustering, truth: &[Vec<usize>]) -> Option<f64> {
    if clustering.clusters.is_empty() {
        return None;
    }
    let sum: f64 = clustering
        .clusters
        .iter()
        .map(|c| individual_precision(&c.members, truth))
        .sum();
    Some(sum / clustering.clusters.len() as f64)
}

/// Largest share of `true_cluster` found in a single estimated cluster.
pub fn individual_recall(true_cluster: &[usize], clustering: &Clustering) -> f64 {
    assert!(!true_cluster.is_empty(), "true cluster must be nonempty");
    let best = clustering
        .clusters
        .iter()
        .map(|c| overlap(true_cluster, &c.members))
        .max()
        .unwrap_or(0);
    best as f64 / true_cluster.len() as f64
}

pub fn final_recall(clustering: &Clustering, truth: &[Vec<usize>]) -> f64 {
    assert!(!truth.is_empty(), "truth must be nonempty");
    truth.iter().map(|t| individual_recall(t, clustering)).sum::<f64>() / truth.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    /// `None` when the clustering is empty.
    pub precision: Option<f64>,
    pub recall: f64,
    pub clusters: usize,
}

pub fn score(clustering: &Clustering, truth: &[Vec<usize>]) -> Score {
    Score {
        precision: final_precision(clustering, truth),
        recall: final_recall(clustering, truth),
        clusters: clustering.clusters.len(),
    }
}

/// One simulation condition: a graph shape, a sample size, a data type and
/// an estimator policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub num_latents: usize,
    pub children: usize,
    pub latent_edges: usize,
    pub impurities: usize,
    pub n: usize,
    pub data_type: DataType,
    #[serde(default)]
    pub policy: EstimatorPolicy,
}

impl Condition {
    pub fn new(latent_edges: usize, n: usize, data_type: DataType) -> Self {
        Condition {
            num_latents: 5,
            children: 4,
            latent_edges,
            impurities: 0,
            n,
            data_type,
            policy: EstimatorPolicy::Pearson,
        }
    }

    pub fn label(&self) -> String {
        format!(
            "L{}C{}E{}I{}",
            self.num_latents, self.children, self.latent_edges, self.impurities
        )
    }

    /// Seed of the graph. It depends only on the graph shape, so every data
    /// type and estimator of the same shape shares the true graph.
    pub fn topology_seed(&self, master: u64) -> u64 {
        derive_seed(
            master,
            &[
                self.num_latents as u64,
                self.children as u64,
                self.latent_edges as u64,
                self.impurities as u64,
            ],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchConfig {
    pub reps: usize,
    pub master_seed: u64,
    /// Reuse one set of coefficients across reps instead of redrawing them.
    pub fix_coefficients: bool,
    pub fofc: FofcConfig,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            reps: 40,
            master_seed: 0,
            fix_coefficients: false,
            fofc: FofcConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScore {
    pub condition: String,
    pub data_type: DataType,
    pub rep: usize,
    pub seed: u64,
    pub precision: Option<f64>,
    pub recall: f64,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub condition: String,
    pub data_type: DataType,
    pub estimator: EstimatorPolicy,
    pub n: usize,
    pub reps: usize,
    /// Mean over runs that produced at least one cluster; `None` if none did.
    pub mean_precision: Option<f64>,
    pub sd_precision: Option<f64>,
    pub mean_recall: f64,
    pub sd_recall: f64,
    /// Fraction of runs with at least one cluster.
    pub coverage: f64,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregates per-run scores of one condition.
pub fn summarize(condition: &Condition, runs: &[RunScore]) -> ScoreRow {
    let precisions: Vec<f64> = runs.iter().filter_map(|r| r.precision).collect();
    let recalls: Vec<f64> = runs.iter().map(|r| r.recall).collect();
    let (mean_precision, sd_precision) = if precisions.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_sd(&precisions);
        (Some(m), Some(s))
    };
    let (mean_recall, sd_recall) = mean_sd(&recalls);
    ScoreRow {
        condition: condition.label(),
        data_type: condition.data_type,
        estimator: condition.policy,
        n: condition.n,
        reps: runs.len(),
        mean_precision,
        sd_precision,
        mean_recall,
        sd_recall,
        coverage: precisions.len() as f64 / runs.len() as f64,
    }
}

/// Runs FOFC on `cfg.reps` simulated datasets of one condition.
///
/// The graph is fixed by the condition's shape and the master seed. Each rep
/// redraws coefficients (unless fixed) and samples, from a seed that does not
/// depend on the data type, so data types see the same Gaussian draws.
pub fn run_condition(condition: &Condition, cfg: &BatchConfig) -> Result<Vec<RunScore>> {
    if cfg.reps == 0 {
        return Err(Error::Precondition("reps must be at least 1".into()));
    }
    let topo_seed = condition.topology_seed(cfg.master_seed);
    let topology = random_topology(
        condition.num_latents,
        condition.children,
        condition.latent_edges,
        condition.impurities,
        &mut rng_for(topo_seed, 0),
    )?;
    let fixed = if cfg.fix_coefficients {
        Some(draw_parameters(&topology, derive_seed(topo_seed, &[u64::MAX]))?)
    } else {
        None
    };
    let truth = topology.true_clusters();
    (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(topo_seed, &[rep as u64]);
            let spec = match &fixed {
                Some(s) => s.clone().with_seed(seed),
                None => draw_parameters(&topology, seed)?,
            };
            let (data, _) = simulate(&spec, condition.n, condition.data_type)?;
            let clustering = fofc(&data, condition.policy, &cfg.fofc)?;
            let s = score(&clustering, &truth);
            Ok(RunScore {
                condition: condition.label(),
                data_type: condition.data_type,
                rep,
                seed,
                precision: s.precision,
                recall: s.recall,
                clusters: s.clusters,
            })
        })
        .collect::<Vec<Result<RunScore>>>()
        .into_iter()
        .enumerate()
        .map(|(rep, r)| {
            r.map_err(|e| {
                e.context(format!(
                    "condition {} ({}), rep {rep}",
                    condition.label(),
                    condition.data_type
                ))
            })
        })
        .collect()
}

/// One summary row per condition, in input order.
pub fn batch_score(conditions: &[Condition], cfg: &BatchConfig) -> Result<Vec<ScoreRow>> {
    conditions
        .iter()
        .map(|c| run_condition(c, cfg).map(|runs| summarize(c, &runs)))
        .collect()
}

/// Writes rows as CSV; a missing mean precision is an empty field.
pub fn write_score_csv<W: Write, T: Serialize>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fofc::{select_disjoint, LatentCluster};
    use approx::assert_abs_diff_eq;

    fn truth() -> Vec<Vec<usize>> {
        (0..5).map(|l| (4 * l..4 * l + 4).collect()).collect()
    }

    fn clustering(sets: &[&[usize]]) -> Clustering {
        Clustering {
            clusters: sets
                .iter()
                .enumerate()
                .map(|(k, s)| LatentCluster {
                    label: format!("_L{}", k + 1),
                    members: s.to_vec(),
                })
                .collect(),
            unclustered: vec![],
        }
    }

    #[test]
    fn individual_scores() {
        let t = truth();
        assert_eq!(individual_precision(&[0, 1, 2], &t), 1.0);
        assert_eq!(individual_precision(&[0, 1, 2, 4], &t), 0.75);
        assert_eq!(individual_precision(&[0, 4, 8, 12], &t), 0.25);
        let c = clustering(&[&[0, 1, 2, 3]]);
        assert_eq!(individual_recall(&[0, 1, 2, 3], &c), 1.0);
        assert_eq!(individual_recall(&[4, 5, 6, 7], &c), 0.0);
        let c = clustering(&[&[0, 1, 9, 10, 11]]);
        assert_eq!(individual_recall(&[0, 1, 2, 3], &c), 0.5);
    }

    #[test]
    fn final_scores() {
        let t = truth();
        let perfect = select_disjoint(&t, 20);
        assert_eq!(final_precision(&perfect, &t), Some(1.0));
        assert_eq!(final_recall(&perfect, &t), 1.0);
        let c = clustering(&[&[0, 1, 2], &[4, 5, 8, 9]]);
        assert_eq!(final_precision(&c, &t), Some(0.75));
        let empty = Clustering::default();
        assert_eq!(final_precision(&empty, &t), None);
        assert_eq!(final_recall(&empty, &t), 0.0);
        let half = clustering(&[&[0, 1, 2, 3]]);
        assert_abs_diff_eq!(final_recall(&half, &t[..2]), 0.5);
    }

    #[test]
    fn scores_ignore_labels_and_order() {
        let t = truth();
        let a = clustering(&[&[0, 1, 2], &[4, 5, 9]]);
        let mut b = clustering(&[&[9, 5, 4], &[2, 0, 1]]);
        b.clusters[0].label = "_L7".into();
        assert_eq!(score(&a, &t), score(&b, &t));
    }

    #[test]
    fn summary_with_empty_runs() {
        let cond = Condition::new(0, 100, DataType::Continuous);
        let mk = |precision, recall| RunScore {
            condition: cond.label(),
            data_type: cond.data_type,
            rep: 0,
            seed: 0,
            precision,
            recall,
            clusters: 0,
        };
        let row = summarize(&cond, &[mk(Some(1.0), 1.0), mk(None, 0.0), mk(Some(0.5), 0.5)]);
        assert_eq!(row.mean_precision, Some(0.75));
        assert_abs_diff_eq!(row.coverage, 2.0 / 3.0);
        assert_abs_diff_eq!(row.mean_recall, 0.5);
        let none = summarize(&cond, &[mk(None, 0.0)]);
        assert_eq!(none.mean_precision, None);
        let mut buf = Vec::new();
        write_score_csv(&[none], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("L5C4E0I0,0,pearson,100,1,,,0.0,0.0,0.0"));
    }

    #[test]
    fn batch_is_deterministic_and_single_rep_matches() {
        let cond = Condition::new(1, 300, DataType::Continuous);
        let cfg = BatchConfig {
            reps: 3,
            master_seed: 5,
            ..BatchConfig::default()
        };
        let rows = batch_score(&[cond, cond], &cfg).unwrap();
        assert_eq!(rows[0], rows[1]);
        let runs = run_condition(&cond, &BatchConfig { reps: 1, ..cfg }).unwrap();
        let one = summarize(&cond, &runs);
        assert_eq!(one.mean_recall, runs[0].recall);
        assert_eq!(one.mean_precision, runs[0].precision);
        assert!(run_condition(&cond, &BatchConfig { reps: 0, ..cfg }).is_err());
    }
}
