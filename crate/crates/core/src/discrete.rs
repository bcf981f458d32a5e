//! Moments of threshold-discretized standard normal variables.
//!
//! A variable with cutoffs `S_0 < S_1 < ... < S_{k-2}` takes category `c`
//! when `S_{c-1} < X <= S_c` (with `S_{-1} = -inf`, `S_{k-1} = +inf`), and is
//! coded by the integers `0..k`. Every covariance below assumes that coding.
//!
//! Writing `V = sum_c 1{X > S_c}` turns the covariance of two discretized
//! variables into a double sum of indicator covariances, each of which is
//! `Psi(S_a, S_b, rho) - Psi(S_a, S_b, 0)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{bvn_cdf_increment, std_normal_cdf, std_normal_pdf, Cutoff, Rho};

/// Strictly increasing finite thresholds of a `k`-category variable (`k - 1` values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CutoffVector(Vec<f64>);

impl CutoffVector {
    pub fn new(cutoffs: Vec<f64>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidCutoffs("need at least one cutoff (k >= 2)".into()));
        }
        if let Some(bad) = cutoffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidCutoffs(format!("non-finite cutoff {bad}")));
        }
        if let Some(w) = cutoffs.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCutoffs(format!(
                "cutoffs must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(CutoffVector(cutoffs))
    }

    /// The single median cutoff of a symmetric dichotomy.
    pub fn median() -> Self {
        CutoffVector(vec![0.0])
    }

    pub fn categories(&self) -> usize {
        self.0.len() + 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Category boundaries including the ±∞ ends.
    pub fn bounds(&self) -> Vec<Cutoff> {
        std::iter::once(Cutoff::NegInf)
            .chain(self.0.iter().map(|&c| Cutoff::Finite(c)))
            .chain(std::iter::once(Cutoff::PosInf))
            .collect()
    }

    /// Category of a latent value.
    pub fn categorize(&self, x: f64) -> usize {
        // V = c iff S_{c-1} < x <= S_c
        self.0.partition_point(|&s| s < x)
    }

    /// Cutoffs of the variable obtained by merging the top two categories.
    pub fn merge_top(&self) -> Option<Self> {
        (self.0.len() >= 2).then(|| CutoffVector(self.0[..self.0.len() - 1].to_vec()))
    }
}

impl TryFrom<Vec<f64>> for CutoffVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        CutoffVector::new(v)
    }
}

impl From<CutoffVector> for Vec<f64> {
    fn from(c: CutoffVector) -> Vec<f64> {
        c.0
    }
}

/// Two discretized standard normals and the correlation of their latents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedPair {
    pub cut_i: CutoffVector,
    pub cut_j: CutoffVector,
    pub rho: Rho,
}

impl DiscretizedPair {
    pub fn new(cut_i: CutoffVector, cut_j: CutoffVector, rho: Rho) -> Self {
        DiscretizedPair { cut_i, cut_j, rho }
    }
}

pub fn discrete_marginal_pmf(cut: &CutoffVector) -> Vec<f64> {
    let cdf: Vec<f64> = cut.bounds().iter().map(|b| std_normal_cdf(b.value())).collect();
    cdf.windows(2).map(|w| w[1] - w[0]).collect()
}

/// `Cov(1{X > S}, X)` for standard normal `X`, which is `phi(S)`.
pub fn binary_cont_cov(s: f64) -> f64 {
    std_normal_pdf(s)
}

/// `Cov(1{X_i > S}, X_j)` when `X_j` correlates with `X_i` only through `rho`.
pub fn binary_other_cov(s: f64, rho: Rho) -> f64 {
    rho.value() * binary_cont_cov(s)
}

/// Exact covariance of two discretized variables:
/// `sum_a sum_b [Psi(S_ia, S_jb, rho) - Psi(S_ia, S_jb, 0)]`.
pub fn discrete_cov_exact(pair: &DiscretizedPair) -> f64 {
    if pair.rho.value() == 0.0 {
        return 0.0;
    }
    pair.cut_i
        .as_slice()
        .iter()
        .flat_map(|&a| pair.cut_j.as_slice().iter().map(move |&b| (a, b)))
        .map(|(a, b)| bvn_cdf_increment(Cutoff::Finite(a), Cutoff::Finite(b), pair.rho))
        .sum()
}

/// The same covariance written with negated cutoffs,
/// `sum [Psi(-S_ia, -S_jb, rho) - Psi(-S_ia, -S_jb, 0)]`, i.e. as
/// `P(X_i > S, X_j > T) - P(X_i > S) P(X_j > T)` summed over cutoff pairs.
pub fn discrete_cov_upper_tail(pair: &DiscretizedPair) -> f64 {
    pair.cut_i
        .as_slice()
        .iter()
        .flat_map(|&a| pair.cut_j.as_slice().iter().map(move |&b| (a, b)))
        .map(|(a, b)| bvn_cdf_increment(Cutoff::Finite(-a), Cutoff::Finite(-b), pair.rho))
        .sum()
}

/// Covariance contributed by the top cutoff of `V_i`:
/// `sum_b [Psi(S_{i,k-2}, S_jb, rho) - Psi(S_{i,k-2}, S_jb, 0)]`.
///
/// Adding it to the covariance computed with the top two categories of `V_i`
/// merged recovers the full covariance.
pub fn top_cutoff_increment(pair: &DiscretizedPair) -> f64 {
    let top = *pair.cut_i.as_slice().last().expect("non-empty cutoff vector");
    pair.cut_j
        .as_slice()
        .iter()
        .map(|&b| bvn_cdf_increment(Cutoff::Finite(top), Cutoff::Finite(b), pair.rho))
        .sum()
}

/// Variance of the integer-coded variable.
pub fn discrete_var(cut: &CutoffVector) -> f64 {
    let pmf = discrete_marginal_pmf(cut);
    let mean: f64 = pmf.iter().enumerate().map(|(c, p)| c as f64 * p).sum();
    pmf.iter().enumerate().map(|(c, p)| (c as f64 - mean).powi(2) * p).sum()
}

pub fn discrete_mean(cut: &CutoffVector) -> f64 {
    discrete_marginal_pmf(cut)
        .iter()
        .enumerate()
        .map(|(c, p)| c as f64 * p)
        .sum()
}

pub fn discrete_cor(pair: &DiscretizedPair) -> Rho {
    let cov = discrete_cov_exact(pair);
    let denom = (discrete_var(&pair.cut_i) * discrete_var(&pair.cut_j)).sqrt();
    Rho::saturating(cov / denom)
}

/// Covariance of two median dichotomies: `arcsin(rho) / (2 pi)`.
pub fn median_dichotomy_cov(rho: Rho) -> f64 {
    rho.value().asin() / (2.0 * PI)
}

/// Separable approximation for two dichotomies with cutoffs `si`, `sj`:
/// `exp(-si^2/2) exp(-sj^2/2) arcsin(rho) / (2 pi)`.
pub fn nonmedian_cov_approx(si: f64, sj: f64, rho: Rho) -> f64 {
    (-0.5 * si * si).exp() * (-0.5 * sj * sj).exp() * median_dichotomy_cov(rho)
}

/// Separable approximation for multi-category variables, summing the
/// Gaussian weights of every cutoff on each side.
pub fn multi_cat_cov_approx(cut_i: &CutoffVector, cut_j: &CutoffVector, rho: Rho) -> f64 {
    let weight = |c: &CutoffVector| c.as_slice().iter().map(|s| (-0.5 * s * s).exp()).sum::<f64>();
    weight(cut_i) * weight(cut_j) * median_dichotomy_cov(rho)
}

/// `Cor(A,C) - Cor(A,B) Cor(B,C)`; zero exactly when the correlations factor
/// through `B`, which for binary variables is conditional independence of
/// `A` and `C` given `B`.
pub fn lemma1_residual(cor_ab: Rho, cor_bc: Rho, cor_ac: Rho) -> f64 {
    cor_ac.value() - cor_ab.value() * cor_bc.value()
}
