//! Dataset descriptions, text-format parsers and synthetic generators.

pub mod synth;
mod text;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use text::{
    parse_edgelist, parse_svmlight, parse_triplets, write_edgelist, write_svmlight, write_triplets,
    EdgeList, SvmData,
};

use crate::error::{Error, Result};
use crate::problems::{CostFunction, CutProblem, McProblem, SvmProblem};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Open {
            path: path.to_path_buf(),
            source,
        })
}

fn default_noise() -> f64 {
    0.0
}

/// Where a problem comes from. Serializes with a `format` tag so reports
/// can embed it and replay the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum DatasetSpec {
    Svmlight {
        path: PathBuf,
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_path: Option<PathBuf>,
    },
    Triplets {
        path: PathBuf,
        rows: usize,
        cols: usize,
        rank: usize,
        mu: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_path: Option<PathBuf>,
    },
    Edgelist {
        path: PathBuf,
        /// Simplex dimension (number of labels).
        d: usize,
        /// Node count; inferred from the largest index when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<usize>,
    },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SyntheticSpec {
    Svm {
        examples: usize,
        features: usize,
        nnz: usize,
        lambda: f64,
        #[serde(default = "default_noise")]
        noise: f64,
        /// Extra examples generated for a held-out test set.
        #[serde(default)]
        test_examples: usize,
        seed: u64,
    },
    Mc {
        rows: usize,
        cols: usize,
        rank: usize,
        fraction: f64,
        mu: f64,
        #[serde(default = "default_noise")]
        noise: f64,
        seed: u64,
    },
    CutGrid {
        side: usize,
        d: usize,
        max_weight: u32,
        seed: u64,
    },
    CutGeometric {
        nodes: usize,
        radius: f64,
        d: usize,
        max_weight: u32,
        seed: u64,
    },
}

/// Held-out data for the test metric.
#[derive(Clone)]
pub enum TestSet {
    None,
    /// Misclassification rate on separate examples.
    Svm(Arc<SvmProblem>),
    /// RMSE on held-out cells.
    Mc {
        problem: Arc<McProblem>,
        entries: Vec<(usize, usize, f64)>,
    },
}

/// A loaded problem plus its held-out data.
#[derive(Clone)]
pub struct Dataset {
    pub problem: Arc<dyn CostFunction>,
    pub test: TestSet,
}

impl std::fmt::Debug for Dataset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dataset")
            .field("family", &self.problem.family())
            .field("dim", &self.problem.dim())
            .field("terms", &self.problem.num_terms())
            .finish()
    }
}

impl Dataset {
    /// `None` for families without a test metric or without test data.
    pub fn test_metric(&self, x: &[f64]) -> Option<f64> {
        match &self.test {
            TestSet::None => None,
            TestSet::Svm(p) => Some(p.misclassification_rate(x)),
            TestSet::Mc { problem, entries } if !entries.is_empty() => {
                Some(problem.rmse(x, entries))
            }
            TestSet::Mc { .. } => None,
        }
    }
}

fn svm_dataset(train: SvmData, test: Option<SvmData>, lambda: f64) -> Result<Dataset> {
    let n = train
        .num_features
        .max(test.as_ref().map_or(0, |t| t.num_features));
    let problem = Arc::new(SvmProblem::new(n, train.examples, lambda)?);
    let test = match test {
        Some(t) if !t.examples.is_empty() => {
            TestSet::Svm(Arc::new(SvmProblem::new(n, t.examples, lambda)?))
        }
        _ => TestSet::None,
    };
    Ok(Dataset { problem, test })
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSpec::Svmlight {
                path,
                lambda,
                test_path,
            } => {
                let train = parse_svmlight(open(path)?)?;
                let test = test_path
                    .as_deref()
                    .map(|p| parse_svmlight(open(p)?))
                    .transpose()?;
                svm_dataset(train, test, *lambda)
            }
            DatasetSpec::Triplets {
                path,
                rows,
                cols,
                rank,
                mu,
                test_path,
            } => {
                let entries = parse_triplets(open(path)?, *rows, *cols)?;
                let problem = Arc::new(McProblem::new(*rows, *cols, *rank, *mu, entries)?);
                let test = match test_path {
                    Some(p) => TestSet::Mc {
                        problem: problem.clone(),
                        entries: parse_triplets(open(p)?, *rows, *cols)?,
                    },
                    None => TestSet::None,
                };
                Ok(Dataset { problem, test })
            }
            DatasetSpec::Edgelist { path, d, nodes } => {
                let list = parse_edgelist(open(path)?)?;
                let n = nodes.unwrap_or(list.nodes);
                Ok(Dataset {
                    problem: Arc::new(CutProblem::new(n, *d, list.arcs)?),
                    test: TestSet::None,
                })
            }
            DatasetSpec::Synthetic(s) => s.generate(),
        }
    }
}

impl SyntheticSpec {
    pub fn generate(&self) -> Result<Dataset> {
        match *self {
            SyntheticSpec::Svm {
                examples,
                features,
                nnz,
                lambda,
                noise,
                test_examples,
                seed,
            } => {
                let mut sample = synth::svm(examples + test_examples, features, nnz, noise, seed)?;
                let test = sample.examples.split_off(examples);
                let train = SvmData {
                    examples: sample.examples,
                    num_features: features,
                };
                let test = SvmData {
                    examples: test,
                    num_features: features,
                };
                svm_dataset(train, Some(test), lambda)
            }
            SyntheticSpec::Mc {
                rows,
                cols,
                rank,
                fraction,
                mu,
                noise,
                seed,
            } => {
                let s = synth::matrix_completion(rows, cols, rank, fraction, noise, seed)?;
                let problem = Arc::new(McProblem::new(rows, cols, rank, mu, s.observed)?);
                Ok(Dataset {
                    test: TestSet::Mc {
                        problem: problem.clone(),
                        entries: s.held_out,
                    },
                    problem,
                })
            }
            SyntheticSpec::CutGrid {
                side,
                d,
                max_weight,
                seed,
            } => {
                let (n, arcs) = synth::grid_cut(side, max_weight, seed)?;
                Ok(Dataset {
                    problem: Arc::new(CutProblem::new(n, d, arcs)?),
                    test: TestSet::None,
                })
            }
            SyntheticSpec::CutGeometric {
                nodes,
                radius,
                d,
                max_weight,
                seed,
            } => {
                let (n, arcs) = synth::geometric_cut(nodes, radius, max_weight, seed)?;
                Ok(Dataset {
                    problem: Arc::new(CutProblem::new(n, d, arcs)?),
                    test: TestSet::None,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_round_trip() {
        let spec = DatasetSpec::Synthetic(SyntheticSpec::Mc {
            rows: 5,
            cols: 6,
            rank: 2,
            fraction: 0.5,
            mu: 0.1,
            noise: 0.0,
            seed: 3,
        });
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"format\":\"synthetic\"") && json.contains("\"family\":\"mc\""));
        assert_eq!(serde_json::from_str::<DatasetSpec>(&json).unwrap(), spec);
    }

    #[test]
    fn missing_file_reports_path() {
        let spec = DatasetSpec::Edgelist {
            path: "/nonexistent/graph.txt".into(),
            d: 2,
            nodes: None,
        };
        let err = spec.load().unwrap_err();
        assert!(err
            .to_string()
            .starts_with("cannot open /nonexistent/graph.txt"));
        assert!(err.is_data_error());
    }

    #[test]
    fn synthetic_svm_has_test_split() {
        let ds = SyntheticSpec::Svm {
            examples: 100,
            features: 30,
            nnz: 4,
            lambda: 0.01,
            noise: 0.0,
            test_examples: 20,
            seed: 1,
        }
        .generate()
        .unwrap();
        assert_eq!(ds.problem.num_terms(), 100);
        assert!(ds.test_metric(&vec![0.0; 30]).is_some());
    }
}
