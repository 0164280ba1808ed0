//! Dataset selection flags shared by every subcommand.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use hogwild::io::{DatasetSpec, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Svmlight,
    Triplets,
    Edgelist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Synthetic {
    Svm,
    Mc,
    CutGrid,
    CutGeometric,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input file in the format given by --format.
    #[arg(long, short = 'i', conflicts_with_all = ["synthetic", "dataset"])]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "svmlight")]
    pub format: Format,

    /// Held-out file (svmlight or triplets) for the test metric.
    #[arg(long)]
    pub test: Option<PathBuf>,

    /// JSON dataset description, as embedded in reports.
    #[arg(long, conflicts_with = "synthetic")]
    pub dataset: Option<PathBuf>,

    /// Generate a synthetic problem instead of reading a file.
    #[arg(long, value_enum)]
    pub synthetic: Option<Synthetic>,

    /// SVM ridge weight.
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,

    /// Matrix rows (triplets, synthetic mc).
    #[arg(long)]
    pub rows: Option<usize>,
    /// Matrix columns (triplets, synthetic mc).
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub rank: usize,
    /// Matrix completion regularizer.
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,

    /// Simplex dimension for graph cuts.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Node count for edge lists (default: largest index + 1).
    #[arg(long)]
    pub nodes: Option<usize>,

    #[arg(long, default_value_t = 1000)]
    pub examples: usize,
    #[arg(long, default_value_t = 100)]
    pub features: usize,
    /// Nonzeros per synthetic SVM example.
    #[arg(long, default_value_t = 10)]
    pub nnz: usize,
    /// Label flip probability (svm) or entry noise deviation (mc).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub test_examples: usize,
    /// Observed fraction for synthetic mc.
    #[arg(long, default_value_t = 0.3)]
    pub fraction: f64,
    /// Grid side length for cut-grid.
    #[arg(long, default_value_t = 10)]
    pub side: usize,
    #[arg(long, default_value_t = 0.2)]
    pub radius: f64,
    #[arg(long, default_value_t = 10)]
    pub max_weight: u32,
    /// Seed for synthetic data (independent of the run seed).
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
}

impl DataArgs {
    pub fn spec(&self) -> Result<DatasetSpec> {
        if let Some(path) = &self.dataset {
            let text = std::fs::read_to_string(path).map_err(|source| hogwild::Error::Open {
                path: path.clone(),
                source,
            })?;
            return serde_json::from_str(&text)
                .with_context(|| format!("invalid dataset description in {}", path.display()));
        }
        if let Some(kind) = self.synthetic {
            return Ok(DatasetSpec::Synthetic(self.synthetic_spec(kind)?));
        }
        let Some(path) = self.input.clone() else {
            bail!("no data: pass --input, --synthetic or --dataset");
        };
        Ok(match self.format {
            Format::Svmlight => DatasetSpec::Svmlight {
                path,
                lambda: self.lambda,
                test_path: self.test.clone(),
            },
            Format::Triplets => {
                let (Some(rows), Some(cols)) = (self.rows, self.cols) else {
                    bail!("triplets input needs --rows and --cols");
                };
                DatasetSpec::Triplets {
                    path,
                    rows,
                    cols,
                    rank: self.rank,
                    mu: self.mu,
                    test_path: self.test.clone(),
                }
            }
            Format::Edgelist => DatasetSpec::Edgelist {
                path,
                d: self.d,
                nodes: self.nodes,
            },
        })
    }

    fn synthetic_spec(&self, kind: Synthetic) -> Result<SyntheticSpec> {
        Ok(match kind {
            Synthetic::Svm => SyntheticSpec::Svm {
                examples: self.examples,
                features: self.features,
                nnz: self.nnz,
                lambda: self.lambda,
                noise: self.noise,
                test_examples: self.test_examples,
                seed: self.data_seed,
            },
            Synthetic::Mc => SyntheticSpec::Mc {
                rows: self.rows.unwrap_or(50),
                cols: self.cols.unwrap_or(50),
                rank: self.rank,
                fraction: self.fraction,
                mu: self.mu,
                noise: self.noise,
                seed: self.data_seed,
            },
            Synthetic::CutGrid => SyntheticSpec::CutGrid {
                side: self.side,
                d: self.d,
                max_weight: self.max_weight,
                seed: self.data_seed,
            },
            Synthetic::CutGeometric => SyntheticSpec::CutGeometric {
                nodes: self.nodes.unwrap_or(500),
                radius: self.radius,
                d: self.d,
                max_weight: self.max_weight,
                seed: self.data_seed,
            },
        })
    }
}

// Aliases keep clap from treating the parsed lists as repeated arguments.
pub type ThreadList = Vec<usize>;
pub type DelayList = Vec<u64>;

/// Parses `1,2,4` or the inclusive range `1..8`.
pub fn parse_list(s: &str) -> std::result::Result<ThreadList, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a
            .trim()
            .parse()
            .map_err(|_| format!("bad range start `{a}`"))?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| format!("bad range end `{b}`"))?;
        if a > b {
            return Err(format!("empty range {s}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad integer `{t}`")))
        .collect()
}

/// Comma-separated nanosecond delays; scientific notation such as `1e6` is
/// accepted.
pub fn parse_delays(s: &str) -> std::result::Result<DelayList, String> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| format!("bad delay `{t}`"))?;
            if v < 0.0 || !v.is_finite() || v.fract() != 0.0 {
                return Err(format!("delay must be a nonnegative integer, got `{t}`"));
            }
            Ok(v as u64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_list("1,2,8").unwrap(), vec![1, 2, 8]);
        assert!(parse_list("4..1").is_err());
        assert_eq!(parse_delays("0,1e3,1e6").unwrap(), vec![0, 1000, 1_000_000]);
        assert!(parse_delays("-1").is_err());
    }
}
