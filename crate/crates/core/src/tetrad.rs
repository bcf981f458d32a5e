//! Tetrad differences and tests for vanishing tetrads.
//!
//! Pairing convention: the tetrad over indices `(i, j, w, h)` is
//! `r_ij r_wh - r_iw r_jh`. For a quad `(a, b, c, d)` the three tetrads are
//!
//! ```text
//! t1 = r_ab r_cd - r_ac r_bd    (a, b, c, d)
//! t2 = r_ab r_cd - r_ad r_bc    (a, b, d, c)
//! t3 = r_ac r_bd - r_ad r_bc    (a, c, d, b)
//! ```
//!
//! so `t1 - t2 + t3 = 0` identically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::correlation::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::normal::std_normal_sf;

/// Tolerance below which population tetrads and correlations count as zero.
pub const EXACT_ZERO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tetrad {
    pub indices: [usize; 4],
    pub value: f64,
}

impl Tetrad {
    pub fn new(m: &CorrelationMatrix, [i, j, w, h]: [usize; 4]) -> Self {
        Tetrad {
            indices: [i, j, w, h],
            value: m.get(i, j) * m.get(w, h) - m.get(i, w) * m.get(j, h),
        }
    }
}

/// The three tetrads of a quad, in the order documented at module level.
pub fn tetrad_diffs(m: &CorrelationMatrix, [a, b, c, d]: [usize; 4]) -> Result<[Tetrad; 3]> {
    let q = [a, b, c, d];
    if q.iter().any(|&x| x >= m.dim()) {
        return Err(Error::Precondition(format!(
            "quad {q:?} out of range for dimension {}",
            m.dim()
        )));
    }
    for x in 0..4 {
        for y in 0..x {
            if q[x] == q[y] {
                return Err(Error::Precondition(format!("quad {q:?} has repeated indices")));
            }
        }
    }
    Ok([
        Tetrad::new(m, [a, b, c, d]),
        Tetrad::new(m, [a, b, d, c]),
        Tetrad::new(m, [a, c, d, b]),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TetradTest {
    /// Wishart's sampling variance built from 2x2 and 4x4 subdeterminants.
    #[default]
    Wishart,
    /// Delta method with the normal-theory covariance of sample covariances.
    Delta,
}

impl FromStr for TetradTest {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wishart" => Ok(TetradTest::Wishart),
            "delta" => Ok(TetradTest::Delta),
            other => Err(Error::Domain(format!("unknown tetrad test `{other}`"))),
        }
    }
}

impl fmt::Display for TetradTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TetradTest::Wishart => "wishart",
            TetradTest::Delta => "delta",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TetradConfig {
    /// Significance level of each tetrad test.
    pub alpha: f64,
    pub test: TetradTest,
    /// Triples containing a pair with |r| below this are never pure.
    pub min_abs_corr: f64,
    /// Reject triples containing a pair whose correlation is not
    /// significantly different from zero (Fisher z at `alpha`).
    pub zero_corr_screen: bool,
    /// Fraction of fourth variables allowed to produce a rejected tetrad.
    pub failure_tolerance: f64,
}

impl Default for TetradConfig {
    fn default() -> Self {
        TetradConfig {
            alpha: DEFAULT_ALPHA,
            test: TetradTest::Wishart,
            min_abs_corr: 0.0,
            zero_corr_screen: true,
            failure_tolerance: 0.0,
        }
    }
}

/// Per-test significance level used unless configured otherwise. A triple
/// faces three tests per other variable, so this is far below 0.05.
pub const DEFAULT_ALPHA: f64 = 0.001;

impl TetradConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.min_abs_corr) {
            return Err(Error::Domain(format!(
                "min_abs_corr must lie in [0, 1), got {}",
                self.min_abs_corr
            )));
        }
        if !(0.0..=1.0).contains(&self.failure_tolerance) {
            return Err(Error::Domain("failure_tolerance must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

fn det2(m: &CorrelationMatrix, a: usize, b: usize) -> f64 {
    m.get(a, a) * m.get(b, b) - m.get(a, b) * m.get(b, a)
}

fn det4(m: &CorrelationMatrix, idx: [usize; 4]) -> f64 {
    let mut a = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            a[r][c] = m.get(idx[r], idx[c]);
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut det = 1.0;
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Sampling variance of the tetrad `(i, j, w, h)` under the chosen test.
pub fn tetrad_variance(m: &CorrelationMatrix, [i, j, w, h]: [usize; 4], test: TetradTest) -> Result<f64> {
    let n = m.n() as f64;
    if m.n() <= 4 {
        return Err(Error::TestUndefined(format!("sample size {} too small", m.n())));
    }
    let var = match test {
        TetradTest::Wishart => {
            // The tetrad is the determinant of the cross block between
            // {i, h} and {j, w}.
            let d_a = det2(m, i, h);
            let d_b = det2(m, j, w);
            if !(d_a > 1e-14) || !(d_b > 1e-14) {
                return Err(Error::TestUndefined(format!(
                    "singular 2x2 block in tetrad ({i},{j},{w},{h})"
                )));
            }
            let d = det4(m, [i, j, w, h]);
            (d_a * d_b * (n + 1.0) / (n - 1.0) - d) / (n - 2.0)
        }
        TetradTest::Delta => {
            // t = s_ij s_wh - s_iw s_jh; Cov(s_ab, s_cd) = (s_ac s_bd + s_ad s_bc) / n.
            let terms = [
                ((i, j), m.get(w, h)),
                ((w, h), m.get(i, j)),
                ((i, w), -m.get(j, h)),
                ((j, h), -m.get(i, w)),
            ];
            let mut v = 0.0;
            for &((a, b), ga) in &terms {
                for &((c, d), gc) in &terms {
                    v += ga * gc * (m.get(a, c) * m.get(b, d) + m.get(a, d) * m.get(b, c));
                }
            }
            v / n
        }
    };
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::TestUndefined(format!(
            "non-positive variance {var} for tetrad ({i},{j},{w},{h})"
        )));
    }
    Ok(var)
}

/// Two-sided p-value for `H0: tetrad (i, j, w, h) = 0`.
pub fn tetrad_p_value(m: &CorrelationMatrix, idx: [usize; 4], test: TetradTest) -> Result<f64> {
    if m.n() <= 4 {
        return Err(Error::TestUndefined(format!("sample size {} too small", m.n())));
    }
    let t = Tetrad::new(m, idx).value;
    if t == 0.0 {
        return Ok(1.0);
    }
    let var = tetrad_variance(m, idx, test)?;
    let z = t.abs() / var.sqrt();
    Ok((2.0 * std_normal_sf(z)).min(1.0))
}

/// Wishart test of a single tetrad.
pub fn wishart_test(m: &CorrelationMatrix, idx: [usize; 4]) -> Result<f64> {
    tetrad_p_value(m, idx, TetradTest::Wishart)
}

/// Fisher-z p-value for `H0: correlation (i, j) = 0`.
pub fn zero_correlation_p_value(m: &CorrelationMatrix, i: usize, j: usize) -> f64 {
    let r = m.cor(i, j).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
    let n = m.n() as f64;
    if n <= 3.0 {
        return 1.0;
    }
    let z = r.atanh() * (n - 3.0).sqrt();
    (2.0 * std_normal_sf(z.abs())).min(1.0)
}

/// Whether every pair of the triple carries usable factor signal.
pub(crate) fn triple_passes_screens(m: &CorrelationMatrix, [a, b, c]: [usize; 3], cfg: &TetradConfig) -> bool {
    let pairs = [(a, b), (a, c), (b, c)];
    for &(x, y) in &pairs {
        let r = m.cor(x, y).abs();
        if cfg.min_abs_corr > 0.0 && r < cfg.min_abs_corr {
            return false;
        }
        if cfg.zero_corr_screen {
            let zero = if m.is_population() {
                r < EXACT_ZERO
            } else {
                zero_correlation_p_value(m, x, y) > cfg.alpha
            };
            if zero {
                return false;
            }
        }
    }
    true
}

/// True when all three tetrads of the quad are judged to vanish.
pub fn quad_vanishes(m: &CorrelationMatrix, quad: [usize; 4], cfg: &TetradConfig) -> bool {
    let Ok(tetrads) = tetrad_diffs(m, quad) else {
        return false;
    };
    if m.is_population() {
        let scale = quad.iter().map(|&x| m.get(x, x)).product::<f64>().sqrt();
        return tetrads.iter().all(|t| t.value.abs() < EXACT_ZERO * scale);
    }
    tetrads.iter().all(|t| match tetrad_p_value(m, t.indices, cfg.test) {
        Ok(p) => p > cfg.alpha,
        Err(_) => false,
    })
}

/// A triple is pure when, for every other variable in `universe`, all three
/// tetrads of the resulting quad vanish (up to `failure_tolerance`).
pub fn pure_triple(m: &CorrelationMatrix, triple: [usize; 3], universe: &[usize], cfg: &TetradConfig) -> Result<bool> {
    if universe.len() < 4 {
        return Err(Error::Precondition(format!(
            "pure-triple test needs at least 4 variables, got {}",
            universe.len()
        )));
    }
    let [a, b, c] = triple;
    if a == b || a == c || b == c {
        return Err(Error::Precondition(format!("triple {triple:?} has repeated indices")));
    }
    if triple.iter().any(|t| !universe.contains(t)) {
        return Err(Error::Precondition(format!(
            "triple {triple:?} not contained in universe"
        )));
    }
    if !triple_passes_screens(m, triple, cfg) {
        return Ok(false);
    }
    let others: Vec<usize> = universe.iter().copied().filter(|x| !triple.contains(x)).collect();
    let allowed = (cfg.failure_tolerance * others.len() as f64).floor() as usize;
    let mut failures = 0;
    for &w in &others {
        if !quad_vanishes(m, [a, b, c, w], cfg) {
            failures += 1;
            if failures > allowed {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::Estimator;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn one_factor(loadings: &[f64], estimator: Estimator, n: usize) -> CorrelationMatrix {
        let p = loadings.len();
        let mut v = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                v[i * p + j] = if i == j { 1.0 } else { loadings[i] * loadings[j] };
            }
        }
        CorrelationMatrix::new(p, v, estimator, n).unwrap()
    }

    fn random_correlation(p: usize, rng: &mut ChaCha8Rng) -> CorrelationMatrix {
        // Gram matrix of random unit vectors.
        let vecs: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                let v: Vec<f64> = (0..p + 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        let mut m = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                m[i * p + j] = if i == j {
                    1.0
                } else {
                    vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum()
                };
            }
        }
        CorrelationMatrix::new(p, m, Estimator::Pearson, 500).unwrap()
    }

    #[test]
    fn one_factor_tetrads_vanish() {
        let m = one_factor(&[0.8, 0.7, 0.6, 0.5], Estimator::Population, 1000);
        for t in tetrad_diffs(&m, [0, 1, 2, 3]).unwrap() {
            assert_abs_diff_eq!(t.value, 0.0, epsilon = 1e-15);
        }
        let id = CorrelationMatrix::identity(4, 100);
        assert!(tetrad_diffs(&id, [0, 1, 2, 3]).unwrap().iter().all(|t| t.value == 0.0));
    }

    #[test]
    fn tetrad_arithmetic() {
        let mut v = vec![0.1; 16];
        for i in 0..4 {
            v[i * 4 + i] = 1.0;
        }
        v[1] = 0.5;
        v[4] = 0.5;
        v[2 * 4 + 3] = 0.5;
        v[3 * 4 + 2] = 0.5;
        let m = CorrelationMatrix::new(4, v, Estimator::Pearson, 100).unwrap();
        let t = tetrad_diffs(&m, [0, 1, 2, 3]).unwrap();
        assert_abs_diff_eq!(t[0].value, 0.24, epsilon = 1e-15);
        assert_abs_diff_eq!(t[1].value, 0.24, epsilon = 1e-15);
        assert_abs_diff_eq!(t[2].value, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tetrad_identity_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let m = random_correlation(6, &mut rng);
            let mut q: Vec<usize> = (0..6).collect();
            for k in (1..6).rev() {
                q.swap(k, rng.gen_range(0..=k));
            }
            let t = tetrad_diffs(&m, [q[0], q[1], q[2], q[3]]).unwrap();
            assert_abs_diff_eq!(t[0].value - t[1].value + t[2].value, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn swapping_within_a_pair_keeps_classification() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = TetradConfig::default();
        for _ in 0..100 {
            let m = random_correlation(4, &mut rng);
            let p1 = tetrad_p_value(&m, [0, 1, 2, 3], TetradTest::Wishart).unwrap();
            // Swap i and j: r_ji r_wh - r_jw r_ih, which is a different pairing.
            let p2 = tetrad_p_value(&m, [1, 0, 3, 2], TetradTest::Wishart).unwrap();
            assert_eq!(p1 > cfg.alpha, p2 > cfg.alpha);
            assert_abs_diff_eq!(p1, p2, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_statistic_has_unit_p_value() {
        let m = one_factor(&[0.8, 0.7, 0.6, 0.5], Estimator::Pearson, 1_000_000);
        for t in tetrad_diffs(&m, [0, 1, 2, 3]).unwrap() {
            if t.value == 0.0 {
                assert_eq!(wishart_test(&m, t.indices).unwrap(), 1.0);
            } else {
                assert!(wishart_test(&m, t.indices).unwrap() > 0.99);
            }
        }
    }

    #[test]
    fn wishart_undefined_cases() {
        let m = one_factor(&[0.8, 0.7, 0.6, 0.5], Estimator::Pearson, 4);
        assert!(matches!(wishart_test(&m, [0, 1, 2, 3]), Err(Error::TestUndefined(_))));
        let mut v = vec![0.3; 16];
        for i in 0..4 {
            v[i * 4 + i] = 1.0;
        }
        v[3] = 1.0;
        v[12] = 1.0;
        v[1] = 0.5;
        v[4] = 0.5;
        let m = CorrelationMatrix::new(4, v, Estimator::Pearson, 100).unwrap();
        // {i, h} = {0, 3} is singular.
        assert!(matches!(wishart_test(&m, [0, 1, 2, 3]), Err(Error::TestUndefined(_))));
    }

    #[test]
    fn pure_triple_population_and_preconditions() {
        let m = one_factor(&[0.8, 0.7, 0.6, 0.5], Estimator::Population, 1000);
        let cfg = TetradConfig::default();
        let u = [0, 1, 2, 3];
        for t in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            assert!(pure_triple(&m, t, &u, &cfg).unwrap());
        }
        assert!(pure_triple(&m, [0, 1, 2], &[0, 1, 2], &cfg).is_err());
    }

    #[test]
    fn screens_reject_zero_correlation_triples() {
        let id = CorrelationMatrix::identity(5, 1000);
        let cfg = TetradConfig::default();
        assert!(!pure_triple(&id, [0, 1, 2], &[0, 1, 2, 3, 4], &cfg).unwrap());
        let off = TetradConfig {
            zero_corr_screen: false,
            ..cfg
        };
        assert!(pure_triple(&id, [0, 1, 2], &[0, 1, 2, 3, 4], &off).unwrap());
        let min = TetradConfig {
            zero_corr_screen: false,
            min_abs_corr: 0.1,
            ..cfg
        };
        assert!(!pure_triple(&id, [0, 1, 2], &[0, 1, 2, 3, 4], &min).unwrap());
    }

    #[test]
    fn decisions_invariant_under_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = TetradConfig {
            alpha: 0.05,
            ..TetradConfig::default()
        };
        for _ in 0..30 {
            let c = random_correlation(6, &mut rng);
            let scales: Vec<f64> = (0..6).map(|_| rng.gen_range(0.2..5.0)).collect();
            let cov: Vec<f64> = (0..36)
                .map(|k| c.get(k / 6, k % 6) * scales[k / 6] * scales[k % 6])
                .collect();
            let cov = CorrelationMatrix::covariance(6, cov, Estimator::Pearson, c.n()).unwrap();
            let back = cov.to_correlation();
            let u: Vec<usize> = (0..6).collect();
            for t in [[0, 1, 2], [1, 3, 5], [2, 4, 5]] {
                for test in [TetradTest::Wishart, TetradTest::Delta] {
                    let cfg = TetradConfig { test, ..cfg };
                    assert_eq!(
                        pure_triple(&cov, t, &u, &cfg).unwrap(),
                        pure_triple(&back, t, &u, &cfg).unwrap()
                    );
                    for w in 0..6 {
                        if t.contains(&w) {
                            continue;
                        }
                        let q = [t[0], t[1], t[2], w];
                        let pc = tetrad_p_value(&cov, q, test).unwrap();
                        let pr = tetrad_p_value(&back, q, test).unwrap();
                        assert_abs_diff_eq!(pc, pr, epsilon = 1e-9);
                    }
                }
            }
        }
    }
}
