//! Method dispatch and pairwise distance tables.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{dtw, lp_distance};
use crate::error::{Error, Result};
use crate::harness::dataset::LabeledDataset;
use crate::harness::pca::principal_direction;
use crate::metrics::{ptlp, ptlp_beta_infinity, ptlp_beta_zero, tlp};
use crate::signal::{Beta, DiscreteSignal, GroundCostParams};
use crate::sliced::{sample_slices, slice_lambda_schedule, sptlp, stlp, SliceSet, DEFAULT_SLICES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lp,
    Dtw,
    /// Balanced transport between the value distributions.
    Ot,
    Tlp,
    Stlp,
    Ptlp,
    Sptlp,
    #[serde(rename = "ptlp_beta0")]
    PtlpBeta0,
    #[serde(rename = "ptlp_betainf")]
    PtlpBetaInf,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Lp,
        Method::Dtw,
        Method::Ot,
        Method::Tlp,
        Method::Stlp,
        Method::Ptlp,
        Method::Sptlp,
        Method::PtlpBeta0,
        Method::PtlpBetaInf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lp => "lp",
            Method::Dtw => "dtw",
            Method::Ot => "ot",
            Method::Tlp => "tlp",
            Method::Stlp => "stlp",
            Method::Ptlp => "ptlp",
            Method::Sptlp => "sptlp",
            Method::PtlpBeta0 => "ptlp_beta0",
            Method::PtlpBetaInf => "ptlp_betainf",
        }
    }

    pub fn uses_beta(self) -> bool {
        matches!(
            self,
            Method::Tlp | Method::Stlp | Method::Ptlp | Method::Sptlp
        )
    }

    pub fn uses_lambda(self) -> bool {
        matches!(
            self,
            Method::Ptlp | Method::Sptlp | Method::PtlpBeta0 | Method::PtlpBetaInf
        )
    }

    pub fn is_sliced(self) -> bool {
        matches!(self, Method::Stlp | Method::Sptlp)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown method {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// A distance method with its parameters. For `sptlp`, `params.lambda()` is
/// the penalty of the reference slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceConfig {
    pub method: Method,
    pub params: GroundCostParams,
    pub slices: usize,
    pub seed: u64,
}

impl DistanceConfig {
    pub fn new(method: Method, params: GroundCostParams) -> Self {
        Self {
            method,
            params,
            slices: DEFAULT_SLICES,
            seed: 0,
        }
    }

    pub fn with_slices(mut self, slices: usize, seed: u64) -> Self {
        self.slices = slices;
        self.seed = seed;
        self
    }

    /// Resolves dataset-dependent state: random slices and, for `sptlp`,
    /// per-slice penalties scheduled around the principal direction of
    /// `reference`.
    pub fn prepare(&self, reference: &LabeledDataset) -> Result<PreparedDistance> {
        let slices = if self.method.is_sliced() {
            if self.params.beta().finite().is_none() {
                return Err(Error::InvalidParameter(format!(
                    "{} needs a finite beta",
                    self.method
                )));
            }
            let set = sample_slices(self.slices, reference.lifted_dim(), self.seed)?;
            Some(if self.method == Method::Sptlp {
                let theta0 = principal_direction(reference, &self.params)?;
                slice_lambda_schedule(&theta0, self.params.lambda(), set)?
            } else {
                set
            })
        } else {
            None
        };
        Ok(PreparedDistance {
            config: *self,
            slices,
        })
    }
}

/// A [`DistanceConfig`] ready for evaluation.
#[derive(Debug, Clone)]
pub struct PreparedDistance {
    config: DistanceConfig,
    slices: Option<SliceSet>,
}

impl PreparedDistance {
    pub fn config(&self) -> &DistanceConfig {
        &self.config
    }

    pub fn slices(&self) -> Option<&SliceSet> {
        self.slices.as_ref()
    }

    /// Distance between two signals. Transport methods report the `p`-th
    /// root of their objective; `lp` is already a root and `dtw` is the raw
    /// warping cost.
    pub fn distance(&self, a: &DiscreteSignal, b: &DiscreteSignal) -> Result<f64> {
        let params = &self.config.params;
        let root = |v: f64| v.powf(1.0 / params.p());
        match self.config.method {
            Method::Lp => lp_distance(a, b, params.p()),
            Method::Dtw => dtw(a, b),
            Method::Ot => Ok(tlp(a, b, &params.with_beta_value(Beta::Infinity)?)?.root_value),
            Method::Tlp => Ok(tlp(a, b, params)?.root_value),
            Method::Ptlp => Ok(ptlp(a, b, params)?.root_value),
            Method::PtlpBeta0 => ptlp_beta_zero(a, b, params).map(root),
            Method::PtlpBetaInf => ptlp_beta_infinity(a, b, params).map(root),
            Method::Stlp => stlp(a, b, params, self.slices.as_ref().expect("prepared")).map(root),
            Method::Sptlp => sptlp(a, b, params, self.slices.as_ref().expect("prepared")).map(root),
        }
    }
}

/// Symmetric table of pairwise distances with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub values: Vec<Vec<f64>>,
    pub metadata: DistanceMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMetadata {
    pub method: Method,
    pub p: f64,
    pub beta: String,
    pub lambda: f64,
    pub slices: Option<SliceMetadata>,
    pub dataset: String,
    pub dataset_hash: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMetadata {
    pub count: usize,
    pub seed: u64,
}

impl DistanceMetadata {
    fn new(config: &DistanceConfig, dataset: &LabeledDataset) -> Self {
        Self {
            method: config.method,
            p: config.params.p(),
            beta: config.params.beta().to_string(),
            lambda: config.params.lambda(),
            slices: config.method.is_sliced().then_some(SliceMetadata {
                count: config.slices,
                seed: config.seed,
            }),
            dataset: dataset.name.clone(),
            dataset_hash: dataset.content_hash(),
            size: dataset.len(),
        }
    }
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// One row per line, comma separated, shortest round-trip floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.values {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v}").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
        out
    }

    /// Writes the CSV to `path` and the metadata to `<path>.meta.json`.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        fs::write(path, self.to_csv()).map_err(io)?;
        let sidecar = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.metadata)?;
        fs::write(&sidecar, json + "\n").map_err(|source| Error::Io {
            path: sidecar,
            source,
        })
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    os.into()
}

fn check_finite(v: f64, i: usize, j: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Pair {
            i,
            j,
            source: Box::new(Error::InvalidParameter(format!("distance is {v}"))),
        })
    }
}

/// All pairwise distances within `dataset`. Pairs `i < j` are evaluated in
/// parallel on the current rayon pool and mirrored.
pub fn pairwise_matrix(
    dataset: &LabeledDataset,
    config: &DistanceConfig,
) -> Result<DistanceMatrix> {
    let prepared = config.prepare(dataset)?;
    let n = dataset.len();
    let signals = dataset.signals();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let upper = pairs
        .par_iter()
        .map(|&(i, j)| {
            prepared
                .distance(&signals[i], &signals[j])
                .map_err(|e| Error::Pair {
                    i,
                    j,
                    source: Box::new(e),
                })
                .and_then(|v| check_finite(v, i, j))
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(upper) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(DistanceMatrix {
        values,
        metadata: DistanceMetadata::new(config, dataset),
    })
}

/// Distances from every query signal (rows) to every reference signal
/// (columns). Dataset-dependent state is fitted on `reference`.
pub fn cross_matrix(
    queries: &LabeledDataset,
    reference: &LabeledDataset,
    config: &DistanceConfig,
) -> Result<Vec<Vec<f64>>> {
    let prepared = config.prepare(reference)?;
    let (nq, nr) = (queries.len(), reference.len());
    let flat = (0..nq * nr)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nr, idx % nr);
            prepared
                .distance(&queries.signals()[i], &reference.signals()[j])
                .map_err(|e| Error::Pair {
                    i,
                    j,
                    source: Box::new(e),
                })
                .and_then(|v| check_finite(v, i, j))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(flat.chunks(nr.max(1)).map(<[f64]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GroundCostParams {
        GroundCostParams::with_beta(2.0, 1.0, 0.5).unwrap()
    }

    fn ds(rows: &[&[f64]]) -> LabeledDataset {
        let signals = rows
            .iter()
            .map(|r| DiscreteSignal::from_series(r).unwrap())
            .collect();
        let labels = (0..rows.len()).map(|i| (i % 2).to_string()).collect();
        LabeledDataset::new("t", signals, labels).unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
        }
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn identical_signals_give_zero_matrix() {
        let d = ds(&[&[1.0, 2.0, 0.5], &[1.0, 2.0, 0.5], &[1.0, 2.0, 0.5]]);
        for m in Method::ALL {
            let cfg = DistanceConfig::new(m, params()).with_slices(10, 1);
            let mat = pairwise_matrix(&d, &cfg);
            // sptlp needs variance for its reference direction
            if m == Method::Sptlp {
                continue;
            }
            let mat = mat.unwrap();
            assert!(mat.values.iter().flatten().all(|&v| v == 0.0), "{m}");
        }
    }

    #[test]
    fn entries_match_direct_calls() {
        let d = ds(&[
            &[0.0, 1.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 0.0, 2.0],
            &[0.5, 0.5, 0.5],
        ]);
        for m in Method::ALL {
            let cfg = DistanceConfig::new(m, params()).with_slices(20, 3);
            let mat = pairwise_matrix(&d, &cfg).unwrap();
            let prepared = cfg.prepare(&d).unwrap();
            for i in 0..d.len() {
                assert_eq!(mat.get(i, i), 0.0);
                for j in 0..d.len() {
                    assert_eq!(mat.get(i, j), mat.get(j, i));
                    if i < j {
                        let direct = prepared.distance(&d.signals()[i], &d.signals()[j]).unwrap();
                        assert_eq!(mat.get(i, j), direct, "{m} ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn ptlp_matrix_uses_root_value() {
        let d = ds(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let mat = pairwise_matrix(&d, &DistanceConfig::new(Method::Ptlp, params())).unwrap();
        let direct = ptlp(&d.signals()[0], &d.signals()[1], &params()).unwrap();
        assert_eq!(mat.get(0, 1), direct.root_value);
    }

    #[test]
    fn precondition_failure_names_the_pair() {
        let d = ds(&[&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0, 2.0]]);
        let err = pairwise_matrix(&d, &DistanceConfig::new(Method::Lp, params())).unwrap_err();
        assert!(matches!(err, Error::Pair { i: 0, j: 2, .. }), "{err}");
        assert!(err.is_method_precondition());
        // transport methods accept ragged data
        assert!(pairwise_matrix(&d, &DistanceConfig::new(Method::Ptlp, params())).is_ok());
        assert!(pairwise_matrix(&d, &DistanceConfig::new(Method::Dtw, params())).is_ok());
    }

    #[test]
    fn csv_and_sidecar() {
        let d = ds(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let mat = pairwise_matrix(&d, &DistanceConfig::new(Method::Lp, params())).unwrap();
        assert_eq!(mat.to_csv(), "0,1\n1,0\n");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        mat.write(&path).unwrap();
        let meta: DistanceMetadata =
            serde_json::from_str(&fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(meta, mat.metadata);
        assert_eq!(meta.dataset_hash, d.content_hash());
    }

    #[test]
    fn cross_matrix_shape() {
        let train = ds(&[&[0.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]]);
        let test = ds(&[&[0.0, 1.0], &[3.0, 3.0]]);
        let m = cross_matrix(&test, &train, &DistanceConfig::new(Method::Tlp, params())).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].len(), 3);
        assert_eq!(m[0][0], 0.0);
    }
}
