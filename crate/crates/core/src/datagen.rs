//! Design and response generators: simplex codebooks and random linear
//! Gaussian SEMs over the predictors, plus `Y = X γ* + σ N`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::format::fmt10;
use crate::model::{CoefficientVector, EnvironmentData, ModelSpec};
use crate::scalar::Real;
use crate::support::{SupportSet, MAX_PREDICTORS};

/// Range every SEM edge coefficient and response weight is drawn from.
pub const COEFFICIENT_RANGE: (f64, f64) = (0.5, 1.5);

/// Simplex codebook with three unit directions at 120° in the first two
/// coordinates, scaled to radius `√n_e` and zero-padded to `n_e` rows.
pub fn simplex_codebook<T: Real>(env_id: usize, n_e: usize) -> Result<EnvironmentData<T>> {
    if n_e < 2 {
        return Err(Error::invalid("n_e", "simplex codewords need at least 2 samples"));
    }
    let h = T::lit(3.0).sqrt() / T::lit(2.0);
    let half = T::lit(0.5);
    let dirs = [(T::one(), T::zero()), (-half, -h), (-half, h)];
    let radius = T::from_count(n_e).sqrt();
    let mut x = Array2::zeros((n_e, 3));
    for (c, &(a0, a1)) in dirs.iter().enumerate() {
        x[[0, c]] = radius * a0;
        x[[1, c]] = radius * a1;
    }
    EnvironmentData::new(env_id, x)
}

pub(crate) fn uniform_coefficient<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.random_range(COEFFICIENT_RANGE.0..=COEFFICIENT_RANGE.1))
}

fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// How many predictor-to-predictor edges a random SEM gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgePolicy {
    /// Uniform integer on `0..=C(m,2)`.
    Uniform,
    /// No edges: every predictor is top-level.
    Independent,
    /// Every forward pair of the drawn order.
    Complete,
    /// Exactly this many, capped at `C(m,2)`.
    Exactly(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemConfig<T> {
    /// Inclusive range `m` is drawn from.
    pub m_range: (usize, usize),
    pub edges: EdgePolicy,
    /// Mean shift of the top-level predictors, indexed by environment id.
    pub intervention_means: Vec<T>,
}

impl<T: Real> SemConfig<T> {
    pub fn new(m_range: (usize, usize), edges: EdgePolicy, intervention_means: Vec<T>) -> Result<Self> {
        let (lo, hi) = m_range;
        if lo == 0 || lo > hi || hi > MAX_PREDICTORS {
            return Err(Error::invalid(
                "m_range",
                format!("need 1 <= lo <= hi <= {MAX_PREDICTORS}, got [{lo}, {hi}]"),
            ));
        }
        if intervention_means.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("intervention_means", "must be finite"));
        }
        Ok(SemConfig {
            m_range,
            edges,
            intervention_means,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemEdge<T> {
    /// 0-based column of the parent predictor.
    pub parent: usize,
    pub child: usize,
    pub coefficient: T,
}

/// A drawn linear Gaussian SEM over the predictors together with the
/// response model. The response is a sink: nothing intervenes on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SemSpec<T> {
    pub m: usize,
    /// Topological order of predictor columns.
    pub order: Vec<usize>,
    pub edges: Vec<SemEdge<T>>,
    pub intervention_means: Vec<T>,
    pub s_star: SupportSet,
    /// Response weights for all `m` predictors; only those in `s_star` act.
    pub y_coefficients: CoefficientVector<T>,
}

impl<T: Real> SemSpec<T> {
    pub fn parents(&self, child: usize) -> impl Iterator<Item = &SemEdge<T>> {
        self.edges.iter().filter(move |e| e.child == child)
    }

    /// Predictors without parents; these receive the mean shifts.
    pub fn top_level(&self) -> Vec<usize> {
        (0..self.m)
            .filter(|&c| self.parents(c).next().is_none())
            .collect()
    }

    /// Kahn's algorithm over the edge list.
    pub fn is_acyclic(&self) -> bool {
        let mut indegree = vec![0usize; self.m];
        for e in &self.edges {
            indegree[e.child] += 1;
        }
        let mut ready: Vec<usize> = (0..self.m).filter(|&c| indegree[c] == 0).collect();
        let mut seen = 0;
        while let Some(node) = ready.pop() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.parent == node) {
                indegree[e.child] -= 1;
                if indegree[e.child] == 0 {
                    ready.push(e.child);
                }
            }
        }
        seen == self.m
    }
}

fn pair_count(m: usize) -> usize {
    m * (m.saturating_sub(1)) / 2
}

/// Draws a random SEM: `m` uniform on the range, a uniformly random
/// topological order, the edge count per `config.edges`, that many distinct
/// forward pairs, coefficients uniform on [0.5, 1.5], and `S*` uniform over
/// all subsets.
pub fn random_sem<T: Real, R: Rng + ?Sized>(rng: &mut R, config: &SemConfig<T>) -> SemSpec<T> {
    let m = rng.random_range(config.m_range.0..=config.m_range.1);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);

    let total = pair_count(m);
    let count = match config.edges {
        EdgePolicy::Uniform => rng.random_range(0..=total),
        EdgePolicy::Independent => 0,
        EdgePolicy::Complete => total,
        EdgePolicy::Exactly(k) => k.min(total),
    };
    // Forward pair number p enumerates (a, b), a < b, over order positions.
    let forward: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| ((a + 1)..m).map(move |b| (a, b)))
        .collect();
    let mut chosen: Vec<usize> = index::sample(rng, total, count).into_vec();
    chosen.sort_unstable();
    let edges = chosen
        .into_iter()
        .map(|p| {
            let (a, b) = forward[p];
            SemEdge {
                parent: order[a],
                child: order[b],
                coefficient: uniform_coefficient(rng),
            }
        })
        .collect();

    let s_star = SupportSet::from_bits(rng.random_range(0..(1u64 << m)) as u32);
    let w: Vec<T> = (0..m).map(|_| uniform_coefficient(rng)).collect();
    SemSpec {
        m,
        order,
        edges,
        intervention_means: config.intervention_means.clone(),
        s_star,
        y_coefficients: CoefficientVector::new(w).expect("coefficients are positive"),
    }
}

/// Samples `n_e` independent rows of the predictors for one environment.
/// Top-level predictors get `mean(env) + N(0,1)`; every other predictor is
/// the weighted sum of its parents plus `N(0,1)`.
pub fn sample_sem_environment<T: Real, R: Rng + ?Sized>(
    spec: &SemSpec<T>,
    env_id: usize,
    n_e: usize,
    rng: &mut R,
) -> Result<EnvironmentData<T>> {
    let mean = *spec
        .intervention_means
        .get(env_id)
        .ok_or(Error::UnknownEnvironment(env_id))?;
    if n_e == 0 {
        return Err(Error::invalid("n_e", "must be at least 1"));
    }
    let parents: Vec<Vec<(usize, T)>> = (0..spec.m)
        .map(|c| spec.parents(c).map(|e| (e.parent, e.coefficient)).collect())
        .collect();
    let mut x = Array2::zeros((n_e, spec.m));
    for t in 0..n_e {
        for &node in &spec.order {
            let base = if parents[node].is_empty() {
                mean
            } else {
                parents[node]
                    .iter()
                    .map(|&(p, coef)| coef * x[[t, p]])
                    .sum::<T>()
            };
            x[[t, node]] = base + standard_normal::<T, _>(rng);
        }
    }
    EnvironmentData::new(env_id, x)
}

/// Fills in `Y = X γ* + σ ε` with `ε` i.i.d. standard normal.
pub fn generate_response<T: Real, R: Rng + ?Sized>(
    env: &EnvironmentData<T>,
    model: &ModelSpec<T>,
    rng: &mut R,
) -> Result<EnvironmentData<T>> {
    env.check_weights(&model.w)?;
    let gamma = Array1::from(model.gamma_star());
    let mut y = env.x().dot_generic(&gamma);
    let sigma = model.noise.sigma;
    for v in y.iter_mut() {
        let e: T = standard_normal(rng);
        *v = *v + sigma * e;
    }
    env.clone().with_response(y)
}

trait DotGeneric<T> {
    fn dot_generic(&self, v: &Array1<T>) -> Array1<T>;
}

impl<T: Real> DotGeneric<T> for Array2<T> {
    fn dot_generic(&self, v: &Array1<T>) -> Array1<T> {
        self.rows()
            .into_iter()
            .map(|row| row.iter().zip(v.iter()).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
}

/// Generated environments with their ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub envs: Vec<EnvironmentData<T>>,
    pub model: ModelSpec<T>,
    pub provenance: Provenance,
}

/// Writes the design file (`env,row,x1..xm`) and response file (`env,row,y`).
/// Environments without a response are skipped in the response file.
pub fn write_dataset_csv<T: Real>(
    envs: &[EnvironmentData<T>],
    x_path: &Path,
    y_path: &Path,
) -> std::io::Result<()> {
    fs::write(x_path, design_csv(envs))?;
    fs::write(y_path, response_csv(envs))
}

pub fn design_csv<T: Real>(envs: &[EnvironmentData<T>]) -> String {
    let m = envs.first().map_or(0, |e| e.m());
    let mut out = String::from("env,row");
    for i in 1..=m {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    for env in envs {
        for (t, row) in env.x().rows().into_iter().enumerate() {
            let _ = write!(out, "{},{}", env.env_id, t);
            for &v in row {
                let _ = write!(out, ",{}", fmt10(v.to_f64_lossy()));
            }
            out.push('\n');
        }
    }
    out
}

pub fn response_csv<T: Real>(envs: &[EnvironmentData<T>]) -> String {
    let mut out = String::from("env,row,y\n");
    for env in envs {
        if let Some(y) = env.y() {
            for (t, &v) in y.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", env.env_id, t, fmt10(v.to_f64_lossy()));
            }
        }
    }
    out
}

/// Parse failure in a dataset file, with 1-based line number.
#[derive(Debug, thiserror::Error)]
pub enum DataFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    Model(#[from] Error),
}

type Rows = BTreeMap<usize, Vec<(usize, Vec<f64>)>>;

fn parse_table(path: &Path, expect_prefix: &[&str], value_cols: Option<usize>) -> std::result::Result<(usize, Rows), DataFileError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| DataFileError::Io {
        path: name.clone(),
        source,
    })?;
    let parse_err = |line: usize, msg: String| DataFileError::Parse {
        path: name.clone(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields.len() < expect_prefix.len() || fields[..expect_prefix.len()] != *expect_prefix {
        return Err(parse_err(1, format!("header must start with {}", expect_prefix.join(","))));
    }
    let width = fields.len() - 2;
    if let Some(w) = value_cols {
        if width != w {
            return Err(parse_err(1, format!("expected {w} value columns, found {width}")));
        }
    }
    let mut rows: Rows = BTreeMap::new();
    for (k, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != fields.len() {
            return Err(parse_err(k + 1, format!("expected {} fields, found {}", fields.len(), cells.len())));
        }
        let env: usize = cells[0]
            .parse()
            .map_err(|_| parse_err(k + 1, format!("bad env id `{}`", cells[0])))?;
        let row: usize = cells[1]
            .parse()
            .map_err(|_| parse_err(k + 1, format!("bad row index `{}`", cells[1])))?;
        let values = cells[2..]
            .iter()
            .map(|c| {
                c.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(k + 1, format!("bad number `{c}`")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rows.entry(env).or_default().push((row, values));
    }
    for (env, list) in rows.iter_mut() {
        list.sort_by_key(|(r, _)| *r);
        if list.iter().enumerate().any(|(i, (r, _))| *r != i) {
            return Err(parse_err(0, format!("environment {env}: rows must be numbered 0..n without gaps")));
        }
    }
    Ok((width, rows))
}

/// Reads a design file and an optional response file back into
/// environments ordered by env id.
pub fn read_dataset_csv(
    x_path: &Path,
    y_path: Option<&Path>,
) -> std::result::Result<Vec<EnvironmentData<f64>>, DataFileError> {
    let (m, xs) = parse_table(x_path, &["env", "row"], None)?;
    let ys = match y_path {
        Some(p) => Some(parse_table(p, &["env", "row", "y"], Some(1))?.1),
        None => None,
    };
    let mut envs = Vec::with_capacity(xs.len());
    for (env_id, rows) in xs {
        let n = rows.len();
        let flat: Vec<f64> = rows.into_iter().flat_map(|(_, v)| v).collect();
        let x = Array2::from_shape_vec((n, m), flat).map_err(|e| Error::Dimension(e.to_string()))?;
        let mut env = EnvironmentData::new(env_id, x)?;
        if let Some(ys) = &ys {
            let y = ys.get(&env_id).ok_or_else(|| DataFileError::Parse {
                path: y_path.unwrap().display().to_string(),
                line: 0,
                msg: format!("no response rows for environment {env_id}"),
            })?;
            env.set_response(y.iter().map(|(_, v)| v[0]).collect())?;
        }
        envs.push(env);
    }
    if let Some(ys) = &ys {
        if let Some(extra) = ys.keys().find(|k| !envs.iter().any(|e| e.env_id == **k)) {
            return Err(DataFileError::Parse {
                path: y_path.unwrap().display().to_string(),
                line: 0,
                msg: format!("response rows for unknown environment {extra}"),
            });
        }
    }
    if envs.is_empty() {
        return Err(DataFileError::Parse {
            path: x_path.display().to_string(),
            line: 0,
            msg: "no data rows".into(),
        });
    }
    Ok(envs)
}
