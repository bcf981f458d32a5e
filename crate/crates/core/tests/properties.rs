use mixed_fofc::correlation::{pearson_matrix, polychoric, CorrelationMatrix, Estimator, EstimatorPolicy};
use mixed_fofc::data::{Column, Dataset};
use mixed_fofc::discrete::CutoffVector;
use mixed_fofc::evaluation::score;
use mixed_fofc::fofc::{fofc, fofc_matrix, FofcConfig};
use mixed_fofc::sem::{implied_covariance, random_model, simulate, simulate_gaussian, DataType};
use mixed_fofc::tetrad::{tetrad_diffs, tetrad_p_value, TetradTest};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[test]
fn fofc_is_deterministic_and_permutation_equivariant() {
    let spec = random_model(4, 4, 3, 0, 21).unwrap();
    let (data, _) = simulate(&spec, 1500, DataType::MedianBinary).unwrap();
    let cfg = FofcConfig::default();
    let a = fofc(&data, EstimatorPolicy::Pearson, &cfg).unwrap();
    assert_eq!(a, fofc(&data, EstimatorPolicy::Pearson, &cfg).unwrap());

    let corr = pearson_matrix(&data).unwrap();
    let order: Vec<usize> = (0..16).rev().collect();
    let b = fofc_matrix(&corr.permuted(&order), &cfg).unwrap();
    let mapped: Vec<Vec<usize>> = b
        .member_sets()
        .iter()
        .map(|set| {
            let mut v: Vec<usize> = set.iter().map(|&i| order[i]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let mut left = a
        .member_sets()
        .iter()
        .map(|s| s.iter().copied().collect::<Vec<_>>())
        .collect::<Vec<_>>();
    let mut right = mapped;
    left.sort();
    right.sort();
    assert_eq!(left, right);
}

#[test]
fn independent_noise_columns_stay_unclustered() {
    let spec = random_model(3, 4, 1, 0, 2).unwrap();
    let base = simulate_gaussian(&spec, 2000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut columns = base.columns().to_vec();
    let mut values: Vec<Vec<f64>> = (0..base.p()).map(|j| base.values(j).to_vec()).collect();
    for k in 0..4 {
        columns.push(Column::continuous(format!("N{k}")));
        values.push((0..base.n()).map(|_| rng.sample(StandardNormal)).collect());
    }
    let data = Dataset::new(columns, values).unwrap();
    let c = fofc(&data, EstimatorPolicy::Pearson, &FofcConfig::default()).unwrap();
    for k in 12..16 {
        assert!(c.unclustered.contains(&k), "noise column {k} clustered: {c:?}");
    }
    let s = score(&c, &spec.true_clusters());
    assert_eq!(s.precision, Some(1.0));
}

#[test]
fn population_recovery_with_discrete_free_model() {
    for seed in 0..10 {
        let spec = random_model(5, 4, 6, 0, seed).unwrap();
        let c = fofc_matrix(&implied_covariance(&spec).unwrap(), &FofcConfig::default()).unwrap();
        let s = score(&c, &spec.true_clusters());
        assert_eq!((s.precision, s.recall), (Some(1.0), 1.0), "seed {seed}");
    }
}

#[test]
fn tetrad_test_has_power_against_two_factor_quads() {
    let spec = random_model(2, 2, 0, 0, 12).unwrap();
    let mut rejected = 0;
    for rep in 0..50 {
        let m = pearson_matrix(&simulate_gaussian(&spec.clone().with_seed(rep), 1000).unwrap()).unwrap();
        if tetrad_p_value(&m, [0, 1, 2, 3], TetradTest::Wishart).unwrap() < 0.05 {
            rejected += 1;
        }
    }
    assert!(rejected >= 45, "power {rejected}/50");
}

#[test]
fn polychoric_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (ca, cb) = (
        CutoffVector::new(vec![-0.5, 0.6]).unwrap(),
        CutoffVector::new(vec![-1.0, 0.0, 0.9]).unwrap(),
    );
    for rho in [-0.6, 0.0, 0.45, 0.8] {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..20_000 {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            a.push(ca.categorize(z1));
            b.push(cb.categorize(rho * z1 + (1.0 - rho * rho as f64).sqrt() * z2));
        }
        let fit = polychoric(&a, 3, &b, 4).unwrap();
        assert!((fit.rho.value() - rho).abs() < 0.03, "rho {rho}: {}", fit.rho.value());
        assert!((fit.thresholds_b.as_slice()[2] - 0.9).abs() < 0.05);
    }
}

fn random_corr(seed: u64, p: usize) -> CorrelationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..p + 2).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let mut cov = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            cov[i * p + j] = rows[i].iter().zip(&rows[j]).map(|(x, y)| x * y).sum();
        }
    }
    CorrelationMatrix::covariance(p, cov, Estimator::Pearson, 100)
        .unwrap()
        .to_correlation()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tetrad_identity_holds(seed in any::<u64>(), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let m = random_corr(seed, 5);
        let [t1, t2, t3] = tetrad_diffs(&m, perm).unwrap();
        prop_assert!((t1.value - t2.value + t3.value).abs() < 1e-12);
    }

    #[test]
    fn p_values_are_probabilities(seed in any::<u64>()) {
        let m = random_corr(seed, 4);
        for test in [TetradTest::Wishart, TetradTest::Delta] {
            let p = tetrad_p_value(&m, [0, 1, 2, 3], test).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn clusters_are_disjoint_and_cover(seed in 0u64..200) {
        let m = random_corr(seed, 8);
        let c = fofc_matrix(&m, &FofcConfig::default()).unwrap();
        let mut seen = vec![0; 8];
        for cl in &c.clusters {
            prop_assert!(cl.members.len() >= 3);
            for &v in &cl.members { seen[v] += 1; }
        }
        for &v in &c.unclustered { seen[v] += 1; }
        prop_assert!(seen.iter().all(|&k| k == 1));
    }
}
