//! Sample association matrices: Pearson, Spearman, tetrachoric/polychoric.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::discrete::CutoffVector;
use crate::error::{Error, Result};
use crate::normal::{bvn_cdf_raw, bvn_pdf_raw, std_normal_quantile, Rho};

/// How a matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Pearson,
    Spearman,
    /// Polychoric for discrete pairs, Pearson elsewhere.
    Polychoric,
    /// Exact population values; tetrads are compared to zero directly.
    Population,
}

/// Which estimator fills each pair of a mixed dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorPolicy {
    /// Product-moment correlation of the raw (integer-coded) values.
    #[default]
    Pearson,
    /// Spearman rank correlation for every pair.
    Rank,
    /// Tetrachoric/polychoric for discrete-discrete pairs, Pearson for the rest.
    Polychoric,
}

impl FromStr for EstimatorPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(EstimatorPolicy::Pearson),
            "rank" | "spearman" => Ok(EstimatorPolicy::Rank),
            "tetrachoric" | "polychoric" => Ok(EstimatorPolicy::Polychoric),
            other => Err(Error::Domain(format!("unknown estimator `{other}`"))),
        }
    }
}

impl fmt::Display for EstimatorPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorPolicy::Pearson => "pearson",
            EstimatorPolicy::Rank => "rank",
            EstimatorPolicy::Polychoric => "polychoric",
        })
    }
}

/// Symmetric association matrix of `p` variables.
///
/// Correlation matrices have a unit diagonal. Covariance matrices are
/// accepted by the tetrad engine as well (its tests are invariant to
/// rescaling), so the unit diagonal is only enforced by [`CorrelationMatrix::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    dim: usize,
    values: Vec<f64>,
    estimator: Estimator,
    n: usize,
    /// Indices of pairs whose estimate hit the ±1 clamp.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    clamped: Vec<(usize, usize)>,
}

impl CorrelationMatrix {
    /// Builds from row-major values; checks symmetry, unit diagonal, and range.
    pub fn new(dim: usize, values: Vec<f64>, estimator: Estimator, n: usize) -> Result<Self> {
        let m = Self::covariance(dim, values, estimator, n)?;
        for i in 0..dim {
            if (m.get(i, i) - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!("diagonal entry {i} is {}", m.get(i, i))));
            }
            for j in 0..dim {
                if m.get(i, j).abs() > 1.0 + 1e-12 {
                    return Err(Error::Domain(format!(
                        "entry ({i},{j}) = {} outside [-1,1]",
                        m.get(i, j)
                    )));
                }
            }
        }
        Ok(m)
    }

    /// A symmetric matrix with positive diagonal, e.g. a covariance matrix.
    pub fn covariance(dim: usize, values: Vec<f64>, estimator: Estimator, n: usize) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::Domain(format!(
                "{} values for a {dim}x{dim} matrix",
                values.len()
            )));
        }
        for i in 0..dim {
            if !(values[i * dim + i] > 0.0) {
                return Err(Error::Domain(format!("diagonal entry {i} is not positive")));
            }
            for j in 0..i {
                let (a, b) = (values[i * dim + j], values[j * dim + i]);
                if !a.is_finite() || (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(Error::Domain(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(CorrelationMatrix {
            dim,
            values,
            estimator,
            n,
            clamped: Vec::new(),
        })
    }

    pub fn identity(dim: usize, n: usize) -> Self {
        let mut values = vec![0.0; dim * dim];
        for i in 0..dim {
            values[i * dim + i] = 1.0;
        }
        CorrelationMatrix {
            dim,
            values,
            estimator: Estimator::Population,
            n,
            clamped: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    /// Correlation implied by the stored entries, also for covariance input.
    pub fn cor(&self, i: usize, j: usize) -> f64 {
        self.get(i, j) / (self.get(i, i) * self.get(j, j)).sqrt()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    pub fn is_population(&self) -> bool {
        self.estimator == Estimator::Population
    }

    pub fn clamped_pairs(&self) -> &[(usize, usize)] {
        &self.clamped
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Rescales to unit diagonal.
    pub fn to_correlation(&self) -> CorrelationMatrix {
        let d = self.dim;
        let values = (0..d * d)
            .map(|k| if k / d == k % d { 1.0 } else { self.cor(k / d, k % d) })
            .collect();
        CorrelationMatrix {
            dim: d,
            values,
            estimator: self.estimator,
            n: self.n,
            clamped: self.clamped.clone(),
        }
    }

    /// Symmetric permutation: entry `(a, b)` of the result is `(order[a], order[b])` here.
    pub fn permuted(&self, order: &[usize]) -> CorrelationMatrix {
        let d = order.len();
        let values = (0..d * d).map(|k| self.get(order[k / d], order[k % d])).collect();
        CorrelationMatrix {
            dim: d,
            values,
            estimator: self.estimator,
            n: self.n,
            clamped: Vec::new(),
        }
    }

    pub fn with_sample_size(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }
}

fn centered(x: &[f64]) -> (Vec<f64>, f64) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let ss = c.iter().map(|v| v * v).sum::<f64>();
    (c, ss)
}

fn pearson_of_columns(
    cols: &[(Vec<f64>, f64)],
    names: &[&str],
    estimator: Estimator,
    n: usize,
) -> Result<CorrelationMatrix> {
    for ((_, ss), name) in cols.iter().zip(names) {
        if !(*ss > 0.0) {
            return Err(Error::ZeroVariance {
                column: name.to_string(),
            });
        }
    }
    let p = cols.len();
    let mut values = vec![0.0; p * p];
    for i in 0..p {
        values[i * p + i] = 1.0;
        for j in 0..i {
            let dot: f64 = cols[i].0.iter().zip(&cols[j].0).map(|(a, b)| a * b).sum();
            let r = (dot / (cols[i].1 * cols[j].1).sqrt()).clamp(-1.0, 1.0);
            values[i * p + j] = r;
            values[j * p + i] = r;
        }
    }
    Ok(CorrelationMatrix {
        dim: p,
        values,
        estimator,
        n,
        clamped: Vec::new(),
    })
}

pub fn pearson_matrix(data: &Dataset) -> Result<CorrelationMatrix> {
    let cols: Vec<_> = (0..data.p()).map(|j| centered(data.values(j))).collect();
    let names: Vec<&str> = data.columns().iter().map(|c| c.name.as_str()).collect();
    pearson_of_columns(&cols, &names, Estimator::Pearson, data.n())
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

pub fn spearman_matrix(data: &Dataset) -> Result<CorrelationMatrix> {
    let cols: Vec<_> = (0..data.p()).map(|j| centered(&midranks(data.values(j)))).collect();
    let names: Vec<&str> = data.columns().iter().map(|c| c.name.as_str()).collect();
    pearson_of_columns(&cols, &names, Estimator::Spearman, data.n())
}

/// Result of a two-step polychoric fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PolychoricFit {
    pub rho: Rho,
    pub thresholds_a: CutoffVector,
    pub thresholds_b: CutoffVector,
    pub log_likelihood: f64,
    /// The likelihood peaked at the ±(1 - 1e-6) boundary.
    pub clamped: bool,
}

/// Observed `k x g` cell counts of two integer-coded columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<f64>,
}

impl ContingencyTable {
    pub fn from_codes(a: &[usize], ka: usize, b: &[usize], kb: usize) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Domain("columns differ in length".into()));
        }
        let mut counts = vec![0.0; ka * kb];
        for (&x, &y) in a.iter().zip(b) {
            if x >= ka || y >= kb {
                return Err(Error::Domain(format!("code ({x},{y}) outside {ka}x{kb} table")));
            }
            counts[x * kb + y] += 1.0;
        }
        Ok(ContingencyTable {
            rows: ka,
            cols: kb,
            counts,
        })
    }

    pub fn from_counts(rows: usize, cols: usize, counts: Vec<f64>) -> Result<Self> {
        if counts.len() != rows * cols || rows < 2 || cols < 2 {
            return Err(Error::Domain("table must be at least 2x2 with rows*cols counts".into()));
        }
        Ok(ContingencyTable { rows, cols, counts })
    }

    pub fn count(&self, a: usize, b: usize) -> f64 {
        self.counts[a * self.cols + b]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    fn row_margins(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|a| (0..self.cols).map(|b| self.count(a, b)).sum())
            .collect()
    }

    fn col_margins(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|b| (0..self.rows).map(|a| self.count(a, b)).sum())
            .collect()
    }
}

/// Thresholds `Phi^{-1}` of the cumulative marginal proportions.
fn thresholds_from_margins(margins: &[f64], side: &str) -> Result<CutoffVector> {
    let total: f64 = margins.iter().sum();
    if let Some(c) = margins.iter().position(|&m| m == 0.0) {
        return Err(Error::EmptyCategory {
            column: side.to_string(),
            category: c,
        });
    }
    let mut cum = 0.0;
    let mut cuts = Vec::with_capacity(margins.len() - 1);
    for m in &margins[..margins.len() - 1] {
        cum += m;
        cuts.push(std_normal_quantile(cum / total)?);
    }
    CutoffVector::new(cuts)
}

fn extended(c: &CutoffVector) -> Vec<f64> {
    std::iter::once(f64::NEG_INFINITY)
        .chain(c.as_slice().iter().copied())
        .chain(std::iter::once(f64::INFINITY))
        .collect()
}

/// Multinomial log-likelihood of the table at correlation `rho`, thresholds fixed.
pub fn polychoric_log_likelihood(table: &ContingencyTable, th_a: &CutoffVector, th_b: &CutoffVector, rho: f64) -> f64 {
    let ea = extended(th_a);
    let eb = extended(th_b);
    let grid = cdf_grid(&ea, &eb, rho);
    let gc = eb.len();
    let mut ll = 0.0;
    for a in 0..table.rows {
        for b in 0..table.cols {
            let n = table.count(a, b);
            if n == 0.0 {
                continue;
            }
            let p = grid[(a + 1) * gc + b + 1] - grid[a * gc + b + 1] - grid[(a + 1) * gc + b] + grid[a * gc + b];
            ll += n * p.max(1e-300).ln();
        }
    }
    ll
}

fn cdf_grid(ea: &[f64], eb: &[f64], rho: f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(ea.len() * eb.len());
    for &u in ea {
        for &v in eb {
            g.push(bvn_cdf_raw(u, v, rho));
        }
    }
    g
}

/// `d loglik / d rho`, using `d Psi / d rho = psi` on every cell corner.
fn log_likelihood_gradient(table: &ContingencyTable, ea: &[f64], eb: &[f64], rho: f64) -> f64 {
    let grid = cdf_grid(ea, eb, rho);
    let gc = eb.len();
    let dens: Vec<f64> = ea
        .iter()
        .flat_map(|&u| eb.iter().map(move |&v| bvn_pdf_raw(u, v, rho)))
        .collect();
    let mut grad = 0.0;
    for a in 0..table.rows {
        for b in 0..table.cols {
            let n = table.count(a, b);
            if n == 0.0 {
                continue;
            }
            let idx = |i: usize, j: usize| i * gc + j;
            let p = grid[idx(a + 1, b + 1)] - grid[idx(a, b + 1)] - grid[idx(a + 1, b)] + grid[idx(a, b)];
            let dp = dens[idx(a + 1, b + 1)] - dens[idx(a, b + 1)] - dens[idx(a + 1, b)] + dens[idx(a, b)];
            grad += n * dp / p.max(1e-300);
        }
    }
    grad
}

/// Bound of the search interval; estimates reaching it are flagged.
pub const POLYCHORIC_BOUND: f64 = 1.0 - 1e-6;

/// Two-step polychoric correlation of a contingency table.
///
/// Thresholds come from the marginal proportions. The correlation maximizes
/// the cell likelihood: a coarse scan brackets the peak, golden-section
/// narrows it, and Newton steps on the analytic score polish it.
pub fn polychoric_table(table: &ContingencyTable) -> Result<PolychoricFit> {
    let th_a = thresholds_from_margins(&table.row_margins(), "a")?;
    let th_b = thresholds_from_margins(&table.col_margins(), "b")?;
    let ea = extended(&th_a);
    let eb = extended(&th_b);
    let ll = |r: f64| polychoric_log_likelihood(table, &th_a, &th_b, r);

    const SCAN: usize = 40;
    let grid: Vec<f64> = (0..=SCAN)
        .map(|i| -POLYCHORIC_BOUND + 2.0 * POLYCHORIC_BOUND * i as f64 / SCAN as f64)
        .collect();
    let scores: Vec<f64> = grid.iter().map(|&r| ll(r)).collect();
    let best = scores
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(SCAN / 2);
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(SCAN)]);

    // Golden-section search on [lo, hi].
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (ll(x1), ll(x2));
    while hi - lo > 1e-9 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = ll(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = ll(x1);
        }
    }
    let mut rho = 0.5 * (lo + hi);

    // Newton polish on the score, staying inside the scan bracket.
    let (blo, bhi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(SCAN)]);
    for _ in 0..8 {
        let g = log_likelihood_gradient(table, &ea, &eb, rho);
        let h = 1e-6;
        let curv = (log_likelihood_gradient(table, &ea, &eb, (rho + h).min(POLYCHORIC_BOUND))
            - log_likelihood_gradient(table, &ea, &eb, (rho - h).max(-POLYCHORIC_BOUND)))
            / (2.0 * h);
        if !(curv < 0.0) {
            break;
        }
        let next = rho - g / curv;
        if !(next >= blo && next <= bhi) {
            break;
        }
        let done = (next - rho).abs() < 1e-13;
        if ll(next) + 1e-12 * ll(next).abs() < ll(rho) {
            break;
        }
        rho = next;
        if done {
            break;
        }
    }
    let rho = rho.clamp(-POLYCHORIC_BOUND, POLYCHORIC_BOUND);
    let clamped = POLYCHORIC_BOUND - rho.abs() < 1e-8;
    Ok(PolychoricFit {
        rho: Rho::saturating(rho),
        log_likelihood: ll(rho),
        thresholds_a: th_a,
        thresholds_b: th_b,
        clamped,
    })
}

/// Polychoric correlation of two integer-coded columns with `ka` and `kb` categories.
pub fn polychoric(a: &[usize], ka: usize, b: &[usize], kb: usize) -> Result<PolychoricFit> {
    polychoric_table(&ContingencyTable::from_codes(a, ka, b, kb)?)
}

/// Tetrachoric correlation: the 2x2 case of [`polychoric`].
pub fn tetrachoric(a: &[bool], b: &[bool]) -> Result<PolychoricFit> {
    let ca: Vec<usize> = a.iter().map(|&x| usize::from(x)).collect();
    let cb: Vec<usize> = b.iter().map(|&x| usize::from(x)).collect();
    polychoric(&ca, 2, &cb, 2)
}

/// Assembles a matrix for possibly mixed columns, one estimator per pair.
pub fn mixed_matrix(data: &Dataset, policy: EstimatorPolicy) -> Result<CorrelationMatrix> {
    match policy {
        EstimatorPolicy::Pearson => pearson_matrix(data),
        EstimatorPolicy::Rank => spearman_matrix(data),
        EstimatorPolicy::Polychoric => {
            let mut m = pearson_matrix(data)?;
            m.estimator = Estimator::Polychoric;
            let p = data.p();
            let discrete: Vec<(usize, usize, Vec<usize>)> = (0..p)
                .filter_map(|j| match data.column(j).kind {
                    crate::data::ColumnKind::Discrete { categories } => Some((j, categories, data.codes(j).unwrap())),
                    crate::data::ColumnKind::Continuous => None,
                })
                .collect();
            let pairs: Vec<(usize, usize)> = (0..discrete.len()).flat_map(|x| (0..x).map(move |y| (x, y))).collect();
            let fits: Vec<Result<(usize, usize, PolychoricFit)>> = pairs
                .par_iter()
                .map(|&(x, y)| {
                    let (i, ki, ci) = &discrete[x];
                    let (j, kj, cj) = &discrete[y];
                    polychoric(ci, *ki, cj, *kj).map(|fit| (*i, *j, fit)).map_err(|e| {
                        let e = name_category_error(e, &data.column(*i).name, &data.column(*j).name);
                        Error::Pair {
                            a: data.column(*i).name.clone(),
                            b: data.column(*j).name.clone(),
                            source: Box::new(e),
                        }
                    })
                })
                .collect();
            for fit in fits {
                let (i, j, fit) = fit?;
                let r = fit.rho.value();
                m.values[i * p + j] = r;
                m.values[j * p + i] = r;
                if fit.clamped {
                    m.clamped.push((j.min(i), j.max(i)));
                }
            }
            m.clamped.sort_unstable();
            Ok(m)
        }
    }
}

fn name_category_error(e: Error, a: &str, b: &str) -> Error {
    match e {
        Error::EmptyCategory { column, category } => Error::EmptyCategory {
            column: if column == "a" { a.to_string() } else { b.to_string() },
            category,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Column;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_pairs(r: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (1.0 - r * r).sqrt();
        (0..n)
            .map(|_| {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                (z1, r * z1 + s * z2)
            })
            .unzip()
    }

    fn cont(values: Vec<Vec<f64>>) -> Dataset {
        let cols = (0..values.len()).map(|j| Column::continuous(format!("x{j}"))).collect();
        Dataset::new(cols, values).unwrap()
    }

    #[test]
    fn pearson_basics() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let m = pearson_matrix(&cont(vec![x.clone(), y, x])).unwrap();
        assert_abs_diff_eq!(m.get(0, 1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.get(0, 2), 1.0, epsilon = 1e-12);
        assert_eq!(m.get(1, 1), 1.0);
    }

    #[test]
    fn pearson_independent_columns() {
        let n = 100_000;
        let (x, y) = normal_pairs(0.0, n, 1);
        let m = pearson_matrix(&cont(vec![x, y])).unwrap();
        assert!(m.get(0, 1).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn pearson_zero_variance_names_column() {
        let err = pearson_matrix(&cont(vec![vec![1.0, 2.0, 3.0, 4.0], vec![5.0; 4]])).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance { ref column } if column == "x1"));
    }

    #[test]
    fn spearman_basics() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 7919) % 97) as f64 / 10.0 - 4.0).collect();
        let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let m = spearman_matrix(&cont(vec![x, ex, neg])).unwrap();
        assert_abs_diff_eq!(m.get(0, 1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.get(0, 2), -1.0, epsilon = 1e-12);
        assert!(spearman_matrix(&cont(vec![vec![1.0, 2.0, 3.0, 4.0], vec![0.0; 4]])).is_err());
    }

    #[test]
    fn spearman_with_ties_hand_computed() {
        // x = [1, 2, 2, 3, 4, 4] -> ranks [1, 2.5, 2.5, 4, 5.5, 5.5]
        // y = [3, 1, 2, 2, 5, 6] -> ranks [4, 1, 2.5, 2.5, 5, 6]
        let x = vec![1.0, 2.0, 2.0, 3.0, 4.0, 4.0];
        let y = vec![3.0, 1.0, 2.0, 2.0, 5.0, 6.0];
        assert_eq!(midranks(&x), vec![1.0, 2.5, 2.5, 4.0, 5.5, 5.5]);
        assert_eq!(midranks(&y), vec![4.0, 1.0, 2.5, 2.5, 5.0, 6.0]);
        // Both rank vectors have mean 3.5.
        // dx = [-2.5, -1, -1, 0.5, 2, 2], dy = [0.5, -2.5, -1, -1, 1.5, 2.5]
        // sum dx dy = -1.25 + 2.5 + 1 - 0.5 + 3 + 5 = 9.75
        // sum dx^2 = 6.25 + 1 + 1 + 0.25 + 4 + 4 = 16.5
        // sum dy^2 = 0.25 + 6.25 + 1 + 1 + 2.25 + 6.25 = 17
        let expected = 9.75 / (16.5f64 * 17.0).sqrt();
        let m = spearman_matrix(&cont(vec![x, y])).unwrap();
        assert_abs_diff_eq!(m.get(0, 1), expected, epsilon = 1e-14);
    }

    fn dichotomize(x: &[f64], s: f64) -> Vec<bool> {
        x.iter().map(|&v| v > s).collect()
    }

    #[test]
    fn tetrachoric_recovers_rho() {
        let (x, y) = normal_pairs(0.5, 100_000, 2);
        let fit = tetrachoric(&dichotomize(&x, 0.0), &dichotomize(&y, 0.0)).unwrap();
        assert!((fit.rho.value() - 0.5).abs() < 0.03, "{:?}", fit.rho);
        assert!(!fit.clamped);
    }

    #[test]
    fn tetrachoric_independence_table_is_zero() {
        // Cell proportions equal products of margins 0.3/0.7 and 0.6/0.4.
        let t = ContingencyTable::from_counts(2, 2, vec![180.0, 120.0, 420.0, 280.0]).unwrap();
        let fit = polychoric_table(&t).unwrap();
        assert_abs_diff_eq!(fit.rho.value(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn tetrachoric_empty_margin_errors() {
        let a = vec![true; 10];
        let b: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        assert!(matches!(tetrachoric(&a, &b), Err(Error::EmptyCategory { .. })));
    }

    #[test]
    fn tetrachoric_perfect_association_is_clamped() {
        let a: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
        let fit = tetrachoric(&a, &a).unwrap();
        assert!(fit.clamped);
        assert!(fit.rho.value() > 0.999);
    }

    fn grid_search(table: &ContingencyTable, fit: &PolychoricFit) -> f64 {
        (-999..=999)
            .map(|i| i as f64 / 1000.0)
            .max_by(|&a, &b| {
                polychoric_log_likelihood(table, &fit.thresholds_a, &fit.thresholds_b, a).total_cmp(
                    &polychoric_log_likelihood(table, &fit.thresholds_a, &fit.thresholds_b, b),
                )
            })
            .unwrap()
    }

    #[test]
    fn polychoric_recovers_rho_and_matches_grid_search() {
        let (x, y) = normal_pairs(0.6, 100_000, 3);
        let ci = CutoffVector::new(vec![-0.5, 0.7]).unwrap();
        let cj = CutoffVector::new(vec![-1.0, 0.2]).unwrap();
        let a: Vec<usize> = x.iter().map(|&v| ci.categorize(v)).collect();
        let b: Vec<usize> = y.iter().map(|&v| cj.categorize(v)).collect();
        let table = ContingencyTable::from_codes(&a, 3, &b, 3).unwrap();
        let fit = polychoric_table(&table).unwrap();
        assert!((fit.rho.value() - 0.6).abs() < 0.03, "{:?}", fit.rho);
        assert!((fit.rho.value() - grid_search(&table, &fit)).abs() <= 1e-3);
    }

    #[test]
    fn polychoric_independent_columns() {
        let (x, y) = normal_pairs(0.0, 100_000, 4);
        let c = CutoffVector::new(vec![-0.3, 0.9]).unwrap();
        let a: Vec<usize> = x.iter().map(|&v| c.categorize(v)).collect();
        let b: Vec<usize> = y.iter().map(|&v| c.categorize(v)).collect();
        let fit = polychoric(&a, 3, &b, 3).unwrap();
        assert!(fit.rho.value().abs() < 0.03);
    }

    #[test]
    fn polychoric_binary_equals_tetrachoric() {
        let (x, y) = normal_pairs(-0.35, 5_000, 5);
        let a = dichotomize(&x, 0.4);
        let b = dichotomize(&y, -0.2);
        let t = tetrachoric(&a, &b).unwrap();
        let ca: Vec<usize> = a.iter().map(|&v| usize::from(v)).collect();
        let cb: Vec<usize> = b.iter().map(|&v| usize::from(v)).collect();
        let p = polychoric(&ca, 2, &cb, 2).unwrap();
        assert_abs_diff_eq!(t.rho.value(), p.rho.value(), epsilon = 1e-9);
    }

    #[test]
    fn polychoric_empty_category_named() {
        let a = vec![0, 0, 2, 2, 0, 2];
        let b = vec![0, 1, 0, 1, 1, 0];
        match polychoric(&a, 3, &b, 2) {
            Err(Error::EmptyCategory { category, .. }) => assert_eq!(category, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn score_vanishes_at_estimate() {
        let (x, y) = normal_pairs(0.45, 2_000, 6);
        let c = CutoffVector::new(vec![-0.6, 0.1, 0.8]).unwrap();
        let a: Vec<usize> = x.iter().map(|&v| c.categorize(v)).collect();
        let b: Vec<usize> = y.iter().map(|&v| c.categorize(v)).collect();
        let table = ContingencyTable::from_codes(&a, 4, &b, 4).unwrap();
        let fit = polychoric_table(&table).unwrap();
        let n = table.total();
        let ll = |r: f64| polychoric_log_likelihood(&table, &fit.thresholds_a, &fit.thresholds_b, r) / n;
        let h = 1e-5;
        let r = fit.rho.value();
        let d = (ll(r + h) - ll(r - h)) / (2.0 * h);
        assert!(d.abs() < 1e-5, "score {d}");
    }

    #[test]
    fn mixed_matrix_policies() {
        let n = 3_000;
        let (x, y) = normal_pairs(0.5, n, 7);
        let (z, w) = normal_pairs(-0.3, n, 8);
        let data = cont(vec![x.clone(), y.clone(), z.clone()]);
        assert_eq!(
            mixed_matrix(&data, EstimatorPolicy::Pearson).unwrap().as_slice(),
            pearson_matrix(&data).unwrap().as_slice()
        );
        assert_eq!(
            mixed_matrix(&data, EstimatorPolicy::Polychoric).unwrap().as_slice(),
            pearson_matrix(&data).unwrap().as_slice()
        );
        assert_eq!(
            mixed_matrix(&data, EstimatorPolicy::Rank).unwrap().as_slice(),
            spearman_matrix(&data).unwrap().as_slice()
        );

        let c = CutoffVector::new(vec![0.2]).unwrap();
        let mixed = Dataset::new(
            vec![
                Column::continuous("x"),
                Column::discrete("y", 2),
                Column::discrete("w", 2),
            ],
            vec![
                x,
                y.iter().map(|&v| c.categorize(v) as f64).collect(),
                w.iter().map(|&v| c.categorize(v) as f64).collect(),
            ],
        )
        .unwrap();
        for policy in [
            EstimatorPolicy::Pearson,
            EstimatorPolicy::Rank,
            EstimatorPolicy::Polychoric,
        ] {
            let m = mixed_matrix(&mixed, policy).unwrap();
            for i in 0..3 {
                assert_eq!(m.get(i, i), 1.0);
                for j in 0..3 {
                    assert_eq!(m.get(i, j), m.get(j, i));
                    assert!(m.get(i, j).abs() <= 1.0);
                }
            }
        }
        let _ = z;
    }
}
