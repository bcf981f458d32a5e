//! Linear-Gaussian latent variable models with pure one-factor measurement
//! models, ancestral sampling, and cutoff discretization.
//!
//! Variables are ordered latents first (in `latent_order`), then measured
//! variables by index. Measured variable `m` is a child of latent
//! `m / children_per_latent`.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::correlation::{CorrelationMatrix, Estimator};
use crate::data::{Column, ColumnKind, Dataset};
use crate::discrete::CutoffVector;
use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

/// Name of the pseudo-random generator recorded in metadata.
pub const GENERATOR: &str = "ChaCha8";

/// Upper bound on the share of a latent's variance explained by its parents.
pub const LATENT_EXPLAINED_CAP: f64 = 0.8;

const STREAM_PARAMETERS: u64 = 0;
const STREAM_SAMPLES: u64 = 1;
const STREAM_CUTOFFS: u64 = 2;

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a master seed with a path of integers into a child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    path.iter()
        .fold(splitmix(master), |acc, &x| splitmix(acc ^ splitmix(x)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelTopology {
    pub num_latents: usize,
    pub children_per_latent: usize,
    /// A topological order of the latent DAG.
    pub latent_order: Vec<usize>,
    /// Directed latent edges `(from, to)`.
    pub latent_edges: Vec<(usize, usize)>,
    /// Directed measured-to-measured edges `(from, to)`, `from < to`.
    pub impurities: Vec<(usize, usize)>,
}

impl ModelTopology {
    pub fn num_measured(&self) -> usize {
        self.num_latents * self.children_per_latent
    }

    pub fn latent_of(&self, measured: usize) -> usize {
        measured / self.children_per_latent
    }

    /// Measured children of each latent.
    pub fn true_clusters(&self) -> Vec<Vec<usize>> {
        let c = self.children_per_latent;
        (0..self.num_latents).map(|l| (l * c..(l + 1) * c).collect()).collect()
    }

    fn validate(&self) -> Result<()> {
        let l = self.num_latents;
        if l == 0 || self.children_per_latent == 0 {
            return Err(Error::InfeasibleModel("need at least one latent and one child".into()));
        }
        let mut pos = vec![usize::MAX; l];
        for (k, &v) in self.latent_order.iter().enumerate() {
            if v >= l || pos[v] != usize::MAX {
                return Err(Error::InfeasibleModel("latent_order is not a permutation".into()));
            }
            pos[v] = k;
        }
        if self.latent_order.len() != l {
            return Err(Error::InfeasibleModel("latent_order is not a permutation".into()));
        }
        for &(a, b) in &self.latent_edges {
            if a >= l || b >= l || pos[a] >= pos[b] {
                return Err(Error::InfeasibleModel(format!(
                    "latent edge ({a}, {b}) breaks the order"
                )));
            }
        }
        let p = self.num_measured();
        for &(a, b) in &self.impurities {
            if a >= b || b >= p {
                return Err(Error::InfeasibleModel(format!(
                    "impurity ({a}, {b}) is not oriented low to high"
                )));
            }
        }
        Ok(())
    }
}

/// Uniformly chosen latent edge set with a random acyclic orientation, plus
/// impurities between measured variables of distinct clusters.
pub fn random_topology<R: Rng + ?Sized>(
    num_latents: usize,
    children: usize,
    num_latent_edges: usize,
    num_impurities: usize,
    rng: &mut R,
) -> Result<ModelTopology> {
    if num_latents == 0 || children == 0 {
        return Err(Error::InfeasibleModel("need at least one latent and one child".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..num_latents)
        .flat_map(|a| (a + 1..num_latents).map(move |b| (a, b)))
        .collect();
    if num_latent_edges > pairs.len() {
        return Err(Error::InfeasibleModel(format!(
            "{num_latent_edges} latent edges requested but only {} latent pairs exist",
            pairs.len()
        )));
    }
    let p = num_latents * children;
    let cross: Vec<(usize, usize)> = (0..p)
        .flat_map(|a| (a + 1..p).map(move |b| (a, b)))
        .filter(|&(a, b)| a / children != b / children)
        .collect();
    if num_impurities > cross.len() {
        return Err(Error::InfeasibleModel(format!(
            "{num_impurities} impurities requested but only {} cross-cluster pairs exist",
            cross.len()
        )));
    }

    let mut order: Vec<usize> = (0..num_latents).collect();
    order.shuffle(rng);
    let mut pos = vec![0; num_latents];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut latent_edges: Vec<(usize, usize)> = sample(rng, pairs.len(), num_latent_edges)
        .into_iter()
        .map(|k| {
            let (a, b) = pairs[k];
            if pos[a] < pos[b] {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    latent_edges.sort_unstable();
    let mut impurities: Vec<(usize, usize)> = sample(rng, cross.len(), num_impurities)
        .into_iter()
        .map(|k| cross[k])
        .collect();
    impurities.sort_unstable();

    Ok(ModelTopology {
        num_latents,
        children_per_latent: children,
        latent_order: order,
        latent_edges,
        impurities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub coef: f64,
}

/// A fully parameterized model. Every variable, latent or measured, has
/// unit population variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementModelSpec {
    pub num_latents: usize,
    pub children_per_latent: usize,
    pub latent_order: Vec<usize>,
    pub latent_edges: Vec<Edge>,
    pub impurities: Vec<Edge>,
    /// Coefficient of each measured variable on its latent parent.
    pub loadings: Vec<f64>,
    pub latent_noise_sd: Vec<f64>,
    pub measured_noise_sd: Vec<f64>,
    /// Seed for sampling; parameters were drawn from it too.
    pub seed: u64,
}

/// Draws coefficients for a topology.
///
/// Loadings have magnitude `U(0.5, 0.9)` and random sign, latent edges
/// `U(0.3, 0.6)`, impurities `U(0.3, 0.5)`. Latent edge weights into a
/// latent are shrunk when its parents would explain more than
/// [`LATENT_EXPLAINED_CAP`] of its variance. A measured variable with
/// impurity parents has its whole equation divided by its standard deviation.
pub fn draw_parameters(topology: &ModelTopology, seed: u64) -> Result<MeasurementModelSpec> {
    topology.validate()?;
    let mut rng = rng_for(seed, STREAM_PARAMETERS);
    let l = topology.num_latents;
    let p = topology.num_measured();

    let mut latent_edges: Vec<Edge> = topology
        .latent_edges
        .iter()
        .map(|&(from, to)| Edge {
            from,
            to,
            coef: rng.gen_range(0.3..0.6),
        })
        .collect();
    let loadings: Vec<f64> = (0..p)
        .map(|_| {
            let a: f64 = rng.gen_range(0.5..0.9);
            if rng.gen_bool(0.5) {
                a
            } else {
                -a
            }
        })
        .collect();
    let mut impurities: Vec<Edge> = topology
        .impurities
        .iter()
        .map(|&(from, to)| Edge {
            from,
            to,
            coef: rng.gen_range(0.3..0.5),
        })
        .collect();

    // Covariance among all variables, filled in causal order.
    let m = l + p;
    let mut s = vec![vec![0.0; m]; m];
    let mut latent_noise_sd = vec![0.0; l];
    for &v in &topology.latent_order {
        let idx: Vec<usize> = (0..latent_edges.len()).filter(|&k| latent_edges[k].to == v).collect();
        let explained = quad_form(&s, idx.iter().map(|&k| (latent_edges[k].from, latent_edges[k].coef)));
        if explained > LATENT_EXPLAINED_CAP {
            let f = (LATENT_EXPLAINED_CAP / explained).sqrt();
            for &k in &idx {
                latent_edges[k].coef *= f;
            }
        }
        let parents: Vec<(usize, f64)> = idx
            .iter()
            .map(|&k| (latent_edges[k].from, latent_edges[k].coef))
            .collect();
        let explained = quad_form(&s, parents.iter().copied());
        latent_noise_sd[v] = (1.0 - explained).sqrt();
        fill_row(&mut s, v, &parents, 1.0);
    }

    let mut measured_noise_sd = vec![0.0; p];
    let mut loadings = loadings;
    for x in 0..p {
        let lat = topology.latent_of(x);
        let a = loadings[x];
        let noise_var = 1.0 - a * a;
        let imp: Vec<usize> = (0..impurities.len()).filter(|&k| impurities[k].to == x).collect();
        let mut parents: Vec<(usize, f64)> = vec![(lat, a)];
        parents.extend(imp.iter().map(|&k| (l + impurities[k].from, impurities[k].coef)));
        let total = quad_form(&s, parents.iter().copied()) + noise_var;
        let sd = total.sqrt();
        loadings[x] = a / sd;
        for &k in &imp {
            impurities[k].coef /= sd;
        }
        for par in &mut parents {
            par.1 /= sd;
        }
        measured_noise_sd[x] = noise_var.sqrt() / sd;
        fill_row(&mut s, l + x, &parents, 1.0);
    }

    Ok(MeasurementModelSpec {
        num_latents: l,
        children_per_latent: topology.children_per_latent,
        latent_order: topology.latent_order.clone(),
        latent_edges,
        impurities,
        loadings,
        latent_noise_sd,
        measured_noise_sd,
        seed,
    })
}

fn quad_form(s: &[Vec<f64>], terms: impl Iterator<Item = (usize, f64)> + Clone) -> f64 {
    let mut acc = 0.0;
    for (a, wa) in terms.clone() {
        for (b, wb) in terms.clone() {
            acc += wa * wb * s[a][b];
        }
    }
    acc
}

fn fill_row(s: &mut [Vec<f64>], v: usize, parents: &[(usize, f64)], var: f64) {
    let m = s.len();
    for u in 0..m {
        if u == v {
            continue;
        }
        let c: f64 = parents.iter().map(|&(pa, w)| w * s[pa][u]).sum();
        s[v][u] = c;
        s[u][v] = c;
    }
    s[v][v] = var;
}

/// Random topology and parameters from one seed.
pub fn random_model(
    num_latents: usize,
    children: usize,
    num_latent_edges: usize,
    num_impurities: usize,
    seed: u64,
) -> Result<MeasurementModelSpec> {
    let mut rng = rng_for(seed, STREAM_PARAMETERS);
    let topology = random_topology(num_latents, children, num_latent_edges, num_impurities, &mut rng)?;
    draw_parameters(&topology, derive_seed(seed, &[1]))
}

impl MeasurementModelSpec {
    pub fn num_measured(&self) -> usize {
        self.loadings.len()
    }

    pub fn topology(&self) -> ModelTopology {
        ModelTopology {
            num_latents: self.num_latents,
            children_per_latent: self.children_per_latent,
            latent_order: self.latent_order.clone(),
            latent_edges: self.latent_edges.iter().map(|e| (e.from, e.to)).collect(),
            impurities: self.impurities.iter().map(|e| (e.from, e.to)).collect(),
        }
    }

    pub fn true_clusters(&self) -> Vec<Vec<usize>> {
        self.topology().true_clusters()
    }

    pub fn measured_names(&self) -> Vec<String> {
        (1..=self.num_measured()).map(|i| format!("X{i}")).collect()
    }

    /// Same parameters, different sampling seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Structural coefficient matrix `B` (row = child) and noise SDs over
    /// latents followed by measured variables.
    fn structural(&self) -> (DMatrix<f64>, Vec<f64>) {
        let l = self.num_latents;
        let m = l + self.num_measured();
        let mut b = DMatrix::zeros(m, m);
        for e in &self.latent_edges {
            b[(e.to, e.from)] = e.coef;
        }
        for (x, &a) in self.loadings.iter().enumerate() {
            b[(l + x, x / self.children_per_latent)] = a;
        }
        for e in &self.impurities {
            b[(l + e.to, l + e.from)] = e.coef;
        }
        let mut sd = self.latent_noise_sd.clone();
        sd.extend(&self.measured_noise_sd);
        (b, sd)
    }

    /// Covariance of all variables, `(I - B)^-1 Omega (I - B)^-T`.
    pub fn full_covariance(&self) -> Result<DMatrix<f64>> {
        let (b, sd) = self.structural();
        let m = b.nrows();
        let inv = (DMatrix::identity(m, m) - b)
            .try_inverse()
            .ok_or_else(|| Error::InfeasibleModel("I - B is singular".into()))?;
        let omega = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(m, sd.iter().map(|s| s * s)));
        Ok(&inv * omega * inv.transpose())
    }
}

/// Population covariance of the measured variables.
pub fn implied_covariance(spec: &MeasurementModelSpec) -> Result<CorrelationMatrix> {
    let full = spec.full_covariance()?;
    let l = spec.num_latents;
    let p = spec.num_measured();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            v[i * p + j] = 0.5 * (full[(l + i, l + j)] + full[(l + j, l + i)]);
        }
    }
    CorrelationMatrix::covariance(p, v, Estimator::Population, 0)
}

/// Ancestral sampling of `n` rows of the measured variables.
pub fn simulate_gaussian(spec: &MeasurementModelSpec, n: usize) -> Result<Dataset> {
    spec.topology().validate()?;
    let l = spec.num_latents;
    let p = spec.num_measured();
    let mut rng = rng_for(spec.seed, STREAM_SAMPLES);

    let mut latent_parents = vec![Vec::new(); l];
    for e in &spec.latent_edges {
        latent_parents[e.to].push((e.from, e.coef));
    }
    let mut imp_parents = vec![Vec::new(); p];
    for e in &spec.impurities {
        imp_parents[e.to].push((e.from, e.coef));
    }

    let mut lat = vec![0.0; l];
    let mut x = vec![0.0; p];
    let mut cols = vec![Vec::with_capacity(n); p];
    for _ in 0..n {
        for &v in &spec.latent_order {
            let z: f64 = rng.sample(StandardNormal);
            lat[v] = latent_parents[v].iter().map(|&(pa, w)| w * lat[pa]).sum::<f64>() + spec.latent_noise_sd[v] * z;
        }
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            x[j] = spec.loadings[j] * lat[j / spec.children_per_latent]
                + imp_parents[j].iter().map(|&(pa, w)| w * x[pa]).sum::<f64>()
                + spec.measured_noise_sd[j] * z;
            cols[j].push(x[j]);
        }
    }
    let columns = spec.measured_names().into_iter().map(Column::continuous).collect();
    Dataset::new(columns, cols)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffMode {
    /// A single cutoff drawn from `U(0, 1)`.
    DichotomyUniform01,
    /// `k - 1` cutoffs with `U(0, 1)` gaps, shifted to zero mean.
    GapCentered,
}

pub fn random_cutoffs<R: Rng + ?Sized>(k: usize, mode: CutoffMode, rng: &mut R) -> Result<CutoffVector> {
    if k < 2 {
        return Err(Error::Domain(format!("need at least 2 categories, got {k}")));
    }
    match mode {
        CutoffMode::DichotomyUniform01 => {
            if k != 2 {
                return Err(Error::Domain(format!("dichotomy mode needs k = 2, got {k}")));
            }
            let s: f64 = rng.sample(Open01);
            CutoffVector::new(vec![s])
        }
        CutoffMode::GapCentered => {
            let mut c = Vec::with_capacity(k - 1);
            let mut acc = 0.0;
            c.push(acc);
            for _ in 1..k - 1 {
                let gap: f64 = rng.sample(Open01);
                acc += gap;
                c.push(acc);
            }
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            CutoffVector::new(c.into_iter().map(|v| v - mean).collect())
        }
    }
}

/// How one column is discretized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plan", rename_all = "snake_case")]
pub enum ColumnPlan {
    KeepContinuous,
    /// Cutoff at 0, the median of a standardized Gaussian.
    Median,
    /// One cutoff drawn from `U(0, 1)`.
    RandomDichotomy,
    /// `k` categories with gap-centered random cutoffs.
    RandomCategories {
        k: usize,
    },
    Cutoffs {
        cutoffs: CutoffVector,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationPlan {
    pub columns: Vec<ColumnPlan>,
}

impl DiscretizationPlan {
    pub fn uniform(p: usize, plan: ColumnPlan) -> Self {
        DiscretizationPlan { columns: vec![plan; p] }
    }

    pub fn for_data_type(p: usize, data_type: DataType) -> Self {
        Self::uniform(p, data_type.column_plan())
    }

    /// Discretizes the second half of every cluster and keeps the rest.
    pub fn half_mixed(num_latents: usize, children: usize, data_type: DataType) -> Self {
        let plan = data_type.column_plan();
        let columns = (0..num_latents * children)
            .map(|x| {
                if x % children >= children / 2 {
                    plan.clone()
                } else {
                    ColumnPlan::KeepContinuous
                }
            })
            .collect();
        DiscretizationPlan { columns }
    }
}

/// Applies a plan. Random cutoffs come from `seed`; resolved cutoffs are
/// recorded on the output columns.
pub fn discretize(data: &Dataset, plan: &DiscretizationPlan, seed: u64) -> Result<Dataset> {
    if plan.columns.len() != data.p() {
        return Err(Error::Precondition(format!(
            "plan covers {} columns, dataset has {}",
            plan.columns.len(),
            data.p()
        )));
    }
    let mut rng = rng_for(seed, STREAM_CUTOFFS);
    let mut columns = Vec::with_capacity(data.p());
    let mut values = Vec::with_capacity(data.p());
    for (j, cp) in plan.columns.iter().enumerate() {
        let col = data.column(j);
        let cutoffs = match cp {
            ColumnPlan::KeepContinuous => None,
            ColumnPlan::Median => Some(CutoffVector::median()),
            ColumnPlan::RandomDichotomy => Some(random_cutoffs(2, CutoffMode::DichotomyUniform01, &mut rng)?),
            ColumnPlan::RandomCategories { k } => Some(random_cutoffs(*k, CutoffMode::GapCentered, &mut rng)?),
            ColumnPlan::Cutoffs { cutoffs } => Some(cutoffs.clone()),
        };
        match cutoffs {
            None => {
                columns.push(col.clone());
                values.push(data.values(j).to_vec());
            }
            Some(cut) => {
                if col.is_discrete() {
                    return Err(Error::InvalidDataset(format!(
                        "column `{}` is already discrete",
                        col.name
                    )));
                }
                values.push(data.values(j).iter().map(|&x| cut.categorize(x) as f64).collect());
                columns.push(Column {
                    name: col.name.clone(),
                    kind: ColumnKind::Discrete {
                        categories: cut.categories(),
                    },
                    cutoffs: Some(cut),
                });
            }
        }
    }
    Dataset::new(columns, values)
}

/// Data-type codes: `0` continuous, `2` median binary, `2_` binary with a
/// `U(0, 1)` cutoff, `k >= 3` k-ary with gap-centered cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DataType {
    Continuous,
    MedianBinary,
    NonMedianBinary,
    Categories(usize),
}

impl DataType {
    /// The codes used in the simulation studies.
    pub const STUDY_CODES: [DataType; 8] = [
        DataType::Continuous,
        DataType::MedianBinary,
        DataType::NonMedianBinary,
        DataType::Categories(3),
        DataType::Categories(4),
        DataType::Categories(5),
        DataType::Categories(6),
        DataType::Categories(8),
    ];

    pub fn column_plan(self) -> ColumnPlan {
        match self {
            DataType::Continuous => ColumnPlan::KeepContinuous,
            DataType::MedianBinary => ColumnPlan::Median,
            DataType::NonMedianBinary => ColumnPlan::RandomDichotomy,
            DataType::Categories(k) => ColumnPlan::RandomCategories { k },
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataType::Continuous => f.write_str("0"),
            DataType::MedianBinary => f.write_str("2"),
            DataType::NonMedianBinary => f.write_str("2_"),
            DataType::Categories(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for DataType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(DataType::Continuous),
            "2" => Ok(DataType::MedianBinary),
            "2_" => Ok(DataType::NonMedianBinary),
            other => match other.parse::<usize>() {
                Ok(k) if (3..=16).contains(&k) => Ok(DataType::Categories(k)),
                _ => Err(Error::Domain(format!("unknown data type code `{other}`"))),
            },
        }
    }
}

impl Serialize for DataType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DataType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sidecar JSON written next to a simulated CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub schema_version: u32,
    pub generator: String,
    pub seed: u64,
    pub n: usize,
    pub data_type: DataType,
    pub spec: MeasurementModelSpec,
    pub plan: DiscretizationPlan,
    pub columns: Vec<Column>,
}

impl DatasetMetadata {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let meta: DatasetMetadata = serde_json::from_reader(File::open(path)?)?;
        if meta.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidDataset(format!(
                "metadata schema_version {} is not supported",
                meta.schema_version
            )));
        }
        Ok(meta)
    }
}

/// Samples `n` rows from `spec` and discretizes them per `data_type`, with
/// every random choice derived from `spec.seed`.
pub fn simulate(spec: &MeasurementModelSpec, n: usize, data_type: DataType) -> Result<(Dataset, DatasetMetadata)> {
    let raw = simulate_gaussian(spec, n)?;
    let plan = DiscretizationPlan::for_data_type(raw.p(), data_type);
    let data = discretize(&raw, &plan, spec.seed)?;
    let meta = DatasetMetadata {
        schema_version: SCHEMA_VERSION,
        generator: GENERATOR.to_string(),
        seed: spec.seed,
        n,
        data_type,
        spec: spec.clone(),
        plan,
        columns: data.columns().to_vec(),
    };
    Ok((data, meta))
}
