//! Analytic sweeps over discretized single-factor models: how well products
//! of discrete correlations preserve tetrad equalities, and how the
//! discrete-to-continuous correlation ratio depends on category counts.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete::{discrete_cor, CutoffVector, DiscretizedPair};
use crate::error::{Error, Result};
use crate::normal::Rho;
use crate::sem::{derive_seed, random_cutoffs, rng_for, CutoffMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DichotomyMode {
    /// Cutoff at 0.
    Median,
    /// Cutoff drawn from `U(0, 1)`.
    NonMedian,
    /// No discretization.
    Continuous,
}

impl DichotomyMode {
    pub const ALL: [DichotomyMode; 3] = [
        DichotomyMode::Median,
        DichotomyMode::NonMedian,
        DichotomyMode::Continuous,
    ];

    fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for DichotomyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DichotomyMode::Median => "median",
            DichotomyMode::NonMedian => "non_median",
            DichotomyMode::Continuous => "continuous",
        })
    }
}

impl FromStr for DichotomyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(DichotomyMode::Median),
            "non_median" | "non-median" => Ok(DichotomyMode::NonMedian),
            "continuous" => Ok(DichotomyMode::Continuous),
            other => Err(Error::Domain(format!("unknown dichotomy mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    /// Largest continuous correlation among the four pairs involved.
    pub x: f64,
    /// Ratio of the two partition products of discrete correlations.
    pub y: f64,
    pub mode: DichotomyMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetradRatioStudy {
    pub records: Vec<RatioRecord>,
    /// Draws dropped because the denominator product was zero.
    pub skipped: usize,
}

impl TetradRatioStudy {
    pub fn skipped_fraction(&self) -> f64 {
        let total = self.records.len() + self.skipped;
        if total == 0 {
            0.0
        } else {
            self.skipped as f64 / total as f64
        }
    }
}

/// The three ways to split four variables into two pairs.
const PAIRINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

/// One draw: a single-factor model on four variables whose largest involved
/// correlation equals `target`, discretized per `mode`.
fn ratio_draw(mode: DichotomyMode, target: f64, seed: u64) -> Option<RatioRecord> {
    let mut rng = rng_for(seed, 0);
    let pick = sample(&mut rng, 3, 2);
    let (p1, p2) = (PAIRINGS[pick.index(0)], PAIRINGS[pick.index(1)]);
    let pairs: Vec<(usize, usize)> = p1.iter().chain(p2.iter()).copied().collect();

    // Positive loadings rescaled so the largest involved a_i a_j hits the target.
    let loadings = loop {
        let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(0.2..1.0)).collect();
        let top = pairs.iter().map(|&(i, j)| raw[i] * raw[j]).fold(0.0, f64::max);
        let s = (target / top).sqrt();
        let a: Vec<f64> = raw.iter().map(|v| v * s).collect();
        if a.iter().all(|&v| v < 1.0) {
            break a;
        }
    };
    let cutoffs: Vec<Option<CutoffVector>> = (0..4)
        .map(|_| match mode {
            DichotomyMode::Median => Some(CutoffVector::median()),
            DichotomyMode::NonMedian => {
                Some(random_cutoffs(2, CutoffMode::DichotomyUniform01, &mut rng).expect("k = 2 is valid"))
            }
            DichotomyMode::Continuous => None,
        })
        .collect();
    let cor = |i: usize, j: usize| {
        let rho = loadings[i] * loadings[j];
        match (&cutoffs[i], &cutoffs[j]) {
            (Some(a), Some(b)) => {
                discrete_cor(&DiscretizedPair::new(a.clone(), b.clone(), Rho::saturating(rho))).value()
            }
            _ => rho,
        }
    };
    let product = |p: [(usize, usize); 2]| cor(p[0].0, p[0].1) * cor(p[1].0, p[1].1);
    let (num, den) = (product(p1), product(p2));
    if den == 0.0 {
        return None;
    }
    let x = pairs
        .iter()
        .map(|&(i, j)| loadings[i] * loadings[j])
        .fold(0.0, f64::max);
    Some(RatioRecord {
        x,
        y: num / den,
        mode,
        seed,
    })
}

/// For each mode, grid value and rep, draws a positive single-factor model
/// on four variables, chooses two of the three pairings at random and
/// records the ratio of their products of discretized correlations against
/// the largest continuous correlation involved. Records are sorted by `x`.
pub fn tetrad_ratio_sweep(
    modes: &[DichotomyMode],
    rho_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<TetradRatioStudy> {
    if let Some(bad) = rho_grid.iter().find(|&&g| !(g > 0.0 && g < 1.0)) {
        return Err(Error::Domain(format!("grid value {bad} outside (0, 1)")));
    }
    let jobs: Vec<(DichotomyMode, usize, usize)> = modes
        .iter()
        .flat_map(|&m| (0..rho_grid.len()).flat_map(move |g| (0..reps).map(move |r| (m, g, r))))
        .collect();
    let draws: Vec<Option<RatioRecord>> = jobs
        .par_iter()
        .map(|&(m, g, r)| ratio_draw(m, rho_grid[g], derive_seed(seed, &[m.index(), g as u64, r as u64])))
        .collect();
    let skipped = draws.iter().filter(|d| d.is_none()).count();
    let mut records: Vec<RatioRecord> = draws.into_iter().flatten().collect();
    records.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.mode.cmp(&b.mode)).then(a.seed.cmp(&b.seed)));
    Ok(TetradRatioStudy { records, skipped })
}

/// Evenly spaced grid `step, 2 step, ...` strictly inside `(0, 1)`.
pub fn default_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| i as f64 / (points + 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryRatioRow {
    /// Category count of the variable with more categories.
    pub larger: usize,
    pub smaller: usize,
    /// Mean over the correlation list of discrete correlation / continuous correlation.
    pub mean_ratio: f64,
    pub seed: u64,
}

/// Nine pairs with category counts `(m, i + 2)`, `m` uniform in `2..=i + 2`,
/// gap-centered cutoffs, and the mean over `rho_list` of the ratio of the
/// discrete correlation to the continuous one.
pub fn category_ratio_sweep(rho_list: &[f64], seed: u64) -> Result<Vec<CategoryRatioRow>> {
    if rho_list.is_empty() {
        return Err(Error::Domain("correlation list is empty".into()));
    }
    if let Some(bad) = rho_list.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::Domain(format!("correlation {bad} outside (0, 1)")));
    }
    let mut rng = rng_for(seed, 0);
    let mut rows = Vec::with_capacity(9);
    for i in 0..9 {
        let larger = i + 2;
        let smaller = rng.gen_range(2..=larger);
        let cut_s = random_cutoffs(smaller, CutoffMode::GapCentered, &mut rng)?;
        let cut_l = random_cutoffs(larger, CutoffMode::GapCentered, &mut rng)?;
        let sum: f64 = rho_list
            .iter()
            .map(|&r| {
                let pair = DiscretizedPair::new(cut_s.clone(), cut_l.clone(), Rho::new(r).expect("checked above"));
                discrete_cor(&pair).value() / r
            })
            .sum();
        rows.push(CategoryRatioRow {
            larger,
            smaller,
            mean_ratio: sum / rho_list.len() as f64,
            seed,
        });
    }
    Ok(rows)
}

/// Writes serializable rows as CSV with a header.
pub fn write_csv<W: Write, T: Serialize>(rows: &[T], writer: W) -> Result<()> {
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
    use std::f64::consts::PI;

    #[test]
    fn continuous_ratios_are_exactly_one() {
        let s = tetrad_ratio_sweep(&[DichotomyMode::Continuous], &default_grid(9), 20, 3).unwrap();
        assert_eq!(s.records.len(), 180);
        for r in &s.records {
            assert!((r.y - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn x_matches_grid_and_records_are_sorted() {
        let grid = [0.3, 0.6];
        let s = tetrad_ratio_sweep(&DichotomyMode::ALL, &grid, 10, 4).unwrap();
        for r in &s.records {
            assert!(grid.iter().any(|g| (g - r.x).abs() < 1e-12));
            assert!(r.y.is_finite() && r.y > 0.0);
        }
        assert!(s.records.windows(2).all(|w| w[0].x <= w[1].x));
        assert_eq!(s, tetrad_ratio_sweep(&DichotomyMode::ALL, &grid, 10, 4).unwrap());
        assert!(tetrad_ratio_sweep(&DichotomyMode::ALL, &[1.0], 1, 4).is_err());
    }

    #[test]
    fn median_mode_ratios_near_one_below_065() {
        let s = tetrad_ratio_sweep(&[DichotomyMode::Median], &default_grid(13), 30, 5).unwrap();
        let low: Vec<&RatioRecord> = s.records.iter().filter(|r| r.x <= 0.65).collect();
        let inside = low.iter().filter(|r| (0.9..=1.1).contains(&r.y)).count();
        assert!(inside as f64 >= 0.95 * low.len() as f64);
    }

    #[test]
    fn binary_small_rho_ratio_tends_to_two_over_pi() {
        // Direct check of the limit used by the category sweep's k = g = 2 row.
        let pair = DiscretizedPair::new(CutoffVector::median(), CutoffVector::median(), Rho::new(1e-4).unwrap());
        assert!((discrete_cor(&pair).value() / 1e-4 - 2.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn category_sweep_shape_and_trend() {
        let rhos = default_grid(9);
        let mut sums = [0.0; 9];
        for seed in 0..20 {
            let rows = category_ratio_sweep(&rhos, seed).unwrap();
            assert_eq!(rows.len(), 9);
            for (i, r) in rows.iter().enumerate() {
                assert_eq!(r.larger, i + 2);
                assert!((2..=r.larger).contains(&r.smaller));
                assert!(r.mean_ratio > 0.0 && r.mean_ratio <= 1.0 + 1e-12);
                sums[i] += r.mean_ratio;
            }
        }
        // Averaged over seeds, more categories track the continuous correlation better.
        assert!(sums[8] > sums[0]);
        assert!(sums.windows(2).filter(|w| w[1] >= w[0]).count() >= 6);
        assert!(category_ratio_sweep(&[], 0).is_err());
    }
}
