use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SeededRng};
use crate::problems::sigmoid;

/// Binary classification samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<DenseVector>,
    pub labels: Vec<f64>,
    pub seed: u64,
}

impl Dataset {
    pub fn new(features: Vec<DenseVector>, labels: Vec<f64>, seed: u64) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: features.len(),
                right: labels.len(),
            });
        }
        if features.is_empty() {
            return Err(Error::Insufficient("dataset has no samples".into()));
        }
        let d = features[0].len();
        if let Some(bad) = features.iter().find(|x| x.len() != d) {
            return Err(Error::LengthMismatch {
                left: d,
                right: bad.len(),
            });
        }
        if let Some(y) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::Domain(format!("labels must be 0 or 1, got {y}")));
        }
        Ok(Dataset {
            features,
            labels,
            seed,
        })
    }

    /// `n` samples with standard normal features; labels drawn from a
    /// logistic teacher `P(y=1|x) = sigmoid(2⟨w*, x⟩/√d)` with `w* ~ N(0, I)`.
    pub fn synthetic(n: usize, d: usize, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        let teacher = rng.normal_vector(d, 1.0);
        let scale = 2.0 / (d as f64).sqrt();
        let mut features = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let x = rng.normal_vector(d, 1.0);
            let p = sigmoid(scale * x.dot(&teacher).unwrap());
            labels.push(if rng.uniform(0.0, 1.0) < p { 1.0 } else { 0.0 });
            features.push(x);
        }
        Dataset {
            features,
            labels,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, DenseVector::len)
    }

    /// One sample per line: comma-separated features, label last. No header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for (x, y) in self.features.iter().zip(&self.labels) {
            let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            row.push(y.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, seed: u64) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let values: Vec<f64> = record
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("dataset line {}: {e}", line + 1)))?;
            let Some((&label, x)) = values.split_last() else {
                return Err(Error::Config(format!("dataset line {} is empty", line + 1)));
            };
            features.push(DenseVector::from(x));
            labels.push(label);
        }
        Dataset::new(features, labels, seed)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path, seed: u64) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, seed)
    }
}
