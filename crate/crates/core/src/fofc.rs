//! Find One Factor Clusters: pure triples, growth, disjoint selection.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{mixed_matrix, CorrelationMatrix, EstimatorPolicy};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::tetrad::{quad_vanishes, triple_passes_screens, TetradConfig};

pub type Triple = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FofcConfig {
    #[serde(flatten)]
    pub tetrad: TetradConfig,
    /// Fraction of triples `{o, a, b}` (over pairs `a, b` already in the
    /// cluster) that must be pure before `o` joins. `1.0` demands all.
    pub growth_fraction: f64,
}

impl Default for FofcConfig {
    fn default() -> Self {
        FofcConfig {
            tetrad: TetradConfig::default(),
            growth_fraction: 1.0,
        }
    }
}

impl FofcConfig {
    pub fn validate(&self) -> Result<()> {
        self.tetrad.validate()?;
        if !(self.growth_fraction > 0.0 && self.growth_fraction <= 1.0) {
            return Err(Error::Domain(format!(
                "growth_fraction must lie in (0, 1], got {}",
                self.growth_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentCluster {
    pub label: String,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<LatentCluster>,
    pub unclustered: Vec<usize>,
}

impl Clustering {
    /// Member index sets, in output order.
    pub fn member_sets(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }

    /// Clusters as sorted sets, independent of labels and order.
    pub fn as_partition(&self) -> BTreeSet<Vec<usize>> {
        self.member_sets().into_iter().collect()
    }
}

/// Position of a sorted quad in the colex enumeration of 4-subsets.
fn quad_rank(q: [usize; 4]) -> usize {
    binom(q[0], 1) + binom(q[1], 2) + binom(q[2], 3) + binom(q[3], 4)
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn sorted4(mut q: [usize; 4]) -> [usize; 4] {
    q.sort_unstable();
    q
}

/// All triples that pass [`crate::tetrad::pure_triple`] against the full variable set,
/// in lexicographic order.
pub fn find_pure_triples(corr: &CorrelationMatrix, cfg: &TetradConfig) -> Result<Vec<Triple>> {
    let p = corr.dim();
    if p < 4 {
        return Err(Error::Precondition(format!("FOFC needs at least 4 variables, got {p}")));
    }
    cfg.validate()?;

    // Each quad is shared by four triples, so decide every quad once.
    let mut quads = Vec::with_capacity(binom(p, 4));
    for d in 3..p {
        for c in 2..d {
            for b in 1..c {
                for a in 0..b {
                    quads.push([a, b, c, d]);
                }
            }
        }
    }
    let vanishes: Vec<bool> = quads.par_iter().map(|&q| quad_vanishes(corr, q, cfg)).collect();

    let triples: Vec<Triple> = (0..p)
        .flat_map(|a| (a + 1..p).flat_map(move |b| (b + 1..p).map(move |c| [a, b, c])))
        .collect();
    let pure: Vec<bool> = triples
        .par_iter()
        .map(|&t| {
            let others = p - 3;
            let allowed = (cfg.failure_tolerance * others as f64).floor() as usize;
            let failures = (0..p)
                .filter(|w| !t.contains(w))
                .filter(|&w| !vanishes[quad_rank(sorted4([t[0], t[1], t[2], w]))])
                .count();
            failures <= allowed && triple_passes_screens(corr, t, cfg)
        })
        .collect();
    Ok(triples
        .into_iter()
        .zip(pure)
        .filter_map(|(t, ok)| ok.then_some(t))
        .collect())
}

/// Expands each pure triple into a cluster by adding variables `o` for which
/// the triples `{o, a, b}` with `a, b` in the cluster are pure.
///
/// Triples are processed in sorted order and variables are tried in
/// ascending index order, so the output is deterministic.
pub fn grow_clusters(triples: &[Triple], growth_fraction: f64) -> Vec<Vec<usize>> {
    let mut sorted: Vec<Triple> = triples
        .iter()
        .map(|t| {
            let mut t = *t;
            t.sort_unstable();
            t
        })
        .collect();
    sorted.sort_unstable();
    sorted.dedup();
    let pure: HashSet<Triple> = sorted.iter().copied().collect();
    let vars: BTreeSet<usize> = sorted.iter().flatten().copied().collect();

    let is_pure = |a: usize, b: usize, c: usize| {
        let mut t = [a, b, c];
        t.sort_unstable();
        pure.contains(&t)
    };

    let mut candidates: BTreeSet<Vec<usize>> = BTreeSet::new();
    for t in &sorted {
        let mut cluster: Vec<usize> = t.to_vec();
        loop {
            let mut grew = false;
            for &o in &vars {
                if cluster.contains(&o) {
                    continue;
                }
                let mut total = 0usize;
                let mut hits = 0usize;
                for x in 0..cluster.len() {
                    for y in x + 1..cluster.len() {
                        total += 1;
                        if is_pure(o, cluster[x], cluster[y]) {
                            hits += 1;
                        }
                    }
                }
                let accept = if growth_fraction >= 1.0 {
                    hits == total
                } else {
                    hits as f64 >= growth_fraction * total as f64
                };
                if accept {
                    cluster.push(o);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        cluster.sort_unstable();
        candidates.insert(cluster);
    }
    candidates.into_iter().collect()
}

/// Greedy selection: take the largest candidate (ties go to the
/// lexicographically smallest), drop everything overlapping it, repeat.
pub fn select_disjoint(candidates: &[Vec<usize>], p: usize) -> Clustering {
    let mut pool: Vec<Vec<usize>> = candidates
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c.dedup();
            c
        })
        .filter(|c| c.len() >= 3)
        .collect();
    pool.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

    let mut used = vec![false; p];
    let mut clusters = Vec::new();
    for c in pool {
        if c.iter().any(|&v| v >= p || used[v]) {
            continue;
        }
        for &v in &c {
            used[v] = true;
        }
        clusters.push(LatentCluster {
            label: format!("_L{}", clusters.len() + 1),
            members: c,
        });
    }
    Clustering {
        clusters,
        unclustered: (0..p).filter(|&v| !used[v]).collect(),
    }
}

/// FOFC on a precomputed correlation (or covariance) matrix.
pub fn fofc_matrix(corr: &CorrelationMatrix, cfg: &FofcConfig) -> Result<Clustering> {
    cfg.validate()?;
    if !corr.is_population() && corr.n() < 5 {
        return Err(Error::Precondition(format!("FOFC needs n >= 5, got {}", corr.n())));
    }
    let triples = find_pure_triples(corr, &cfg.tetrad)?;
    let candidates = grow_clusters(&triples, cfg.growth_fraction);
    Ok(select_disjoint(&candidates, corr.dim()))
}

/// FOFC on a dataset with the given estimator policy.
pub fn fofc(data: &Dataset, policy: EstimatorPolicy, cfg: &FofcConfig) -> Result<Clustering> {
    if data.p() < 4 {
        return Err(Error::Precondition(format!(
            "FOFC needs at least 4 variables, got {}",
            data.p()
        )));
    }
    if data.n() < 5 {
        return Err(Error::Precondition(format!("FOFC needs n >= 5, got {}", data.n())));
    }
    let corr = mixed_matrix(data, policy).map_err(|e| e.context(format!("{policy} correlation matrix")))?;
    fofc_matrix(&corr, cfg)
}
