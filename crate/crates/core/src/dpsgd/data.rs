use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dense labelled samples, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    classes: usize,
}

impl Dataset {
    pub fn new(x: Vec<f64>, labels: Vec<usize>, dim: usize) -> Result<Self> {
        if dim == 0 || labels.is_empty() {
            return Err(Error::Dataset("dataset needs at least one sample and one feature".into()));
        }
        if x.len() != labels.len() * dim {
            return Err(Error::LengthMismatch { expected: labels.len() * dim, actual: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("features must be finite".into()));
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1).max(2);
        Ok(Self { x, labels, dim, classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    fn subset(&self, idx: &[usize]) -> Self {
        let mut x = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            x.extend_from_slice(self.row(i));
        }
        Self { x, labels: idx.iter().map(|&i| self.labels[i]).collect(), dim: self.dim, classes: self.classes }
    }

    /// Seeded random split into `(train, test)` with `test_size` test rows.
    pub fn split(&self, test_size: usize, seed: u64) -> Result<(Dataset, Dataset)> {
        if test_size == 0 || test_size >= self.len() {
            return Err(Error::Dataset(format!("test size {test_size} out of range for {} rows", self.len())));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (test, train) = idx.split_at(test_size);
        Ok((self.subset(train), self.subset(test)))
    }

    /// First `n` rows.
    pub fn take(&self, n: usize) -> Dataset {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }
}

/// Isotropic Gaussian clusters with unit variance. Class centers are random
/// directions scaled so neighbouring centers sit about `separation` apart.
pub fn synthetic_blobs(n: usize, dim: usize, classes: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if classes < 2 || dim == 0 || n < classes {
        return Err(Error::invalid("blobs need dim >= 1, classes >= 2, n >= classes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
            // two random unit directions are ~sqrt(2) apart
            v.into_iter().map(|a| a / norm * separation / std::f64::consts::SQRT_2).collect()
        })
        .collect();
    let mut x = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        for &m in &centers[c] {
            let e: f64 = rng.sample(StandardNormal);
            x.push(m + e);
        }
        labels.push(c);
    }
    Dataset::new(x, labels, dim)
}

/// Reads a CSV with a header row whose last column is `label`.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || headers.iter().next_back() != Some("label") {
        return Err(Error::Dataset("expected at least one feature column and a final `label` column".into()));
    }
    let dim = headers.len() - 1;
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        for field in record.iter().take(dim) {
            x.push(field.trim().parse::<f64>().map_err(|e| Error::Dataset(format!("row {}: {e}", line + 1)))?);
        }
        let label = record[dim].trim();
        labels.push(label.parse::<usize>().map_err(|e| Error::Dataset(format!("row {} label {label:?}: {e}", line + 1)))?);
    }
    Dataset::new(x, labels, dim)
}

fn idx_header(bytes: &[u8], kind: u8, what: &str) -> Result<(Vec<usize>, usize)> {
    if bytes.len() < 4 || bytes[0] != 0 || bytes[1] != 0 || bytes[2] != kind {
        return Err(Error::Dataset(format!("{what}: not an unsigned-byte IDX file")));
    }
    let ndim = bytes[3] as usize;
    let start = 4 + 4 * ndim;
    if bytes.len() < start {
        return Err(Error::Dataset(format!("{what}: truncated header")));
    }
    let dims: Vec<usize> = (0..ndim)
        .map(|i| u32::from_be_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes")) as usize)
        .collect();
    let total: usize = dims.iter().product();
    if bytes.len() != start + total {
        return Err(Error::Dataset(format!("{what}: expected {total} data bytes, found {}", bytes.len() - start)));
    }
    Ok((dims, start))
}

/// Loads an IDX image/label pair (the MNIST layout), scaling pixels to [0, 1].
pub fn load_idx(images: &Path, labels: &Path, limit: Option<usize>) -> Result<Dataset> {
    let img = std::fs::read(images)?;
    let lab = std::fs::read(labels)?;
    let (idims, istart) = idx_header(&img, 0x08, "images")?;
    let (ldims, lstart) = idx_header(&lab, 0x08, "labels")?;
    if idims.is_empty() || ldims.len() != 1 || idims[0] != ldims[0] {
        return Err(Error::Dataset("image and label counts disagree".into()));
    }
    let n = limit.map_or(idims[0], |l| l.min(idims[0]));
    let dim: usize = idims[1..].iter().product::<usize>().max(1);
    let x = img[istart..istart + n * dim].iter().map(|&b| b as f64 / 255.0).collect();
    let labels = lab[lstart..lstart + n].iter().map(|&b| b as usize).collect();
    Dataset::new(x, labels, dim)
}

/// Principal-component projection fitted on one dataset.
#[derive(Clone, Debug)]
pub struct Pca {
    mean: Vec<f64>,
    // rows are components
    basis: DMatrix<f64>,
}

impl Pca {
    pub fn fit(data: &Dataset, components: usize) -> Result<Self> {
        let (n, d) = (data.len(), data.dim());
        if components == 0 || components > d {
            return Err(Error::invalid(format!("PCA components must be in 1..={d}")));
        }
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for (m, v) in mean.iter_mut().zip(data.row(i)) {
                *m += v / n as f64;
            }
        }
        let centered = DMatrix::from_fn(n, d, |i, j| data.row(i)[j] - mean[j]);
        let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let basis = DMatrix::from_fn(components, d, |r, c| eig.eigenvectors[(c, order[r])]);
        Ok(Self { mean, basis })
    }

    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        let k = self.basis.nrows();
        let mut x = Vec::with_capacity(data.len() * k);
        for i in 0..data.len() {
            let row = data.row(i);
            for r in 0..k {
                x.push((0..row.len()).map(|c| self.basis[(r, c)] * (row[c] - self.mean[c])).sum());
            }
        }
        let mut out = Dataset::new(x, data.labels.clone(), k)?;
        out.classes = data.classes;
        Ok(out)
    }
}
