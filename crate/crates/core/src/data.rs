//! MNIST (IDX) and IRIS (CSV) ingestion, binary-pair selection, scaling and
//! batching.

use std::fmt;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{io_err, Error, Result};
use crate::network::Label;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

pub const MNIST_FILES: [&str; 4] = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
];

/// Images as flattened `u8` pixels plus their digit labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` pixels, row-major per image.
    pub pixels: Vec<u8>,
    pub labels: Vec<u8>,
}

impl IdxImages {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let d = self.rows * self.cols;
        &self.pixels[i * d..(i + 1) * d]
    }
}

/// The predefined MNIST train and test halves.
#[derive(Debug, Clone)]
pub struct MnistSplits {
    pub train: IdxImages,
    pub test: IdxImages,
}

struct IdxReader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> IdxReader<'a> {
    fn fail(&self, offset: usize, reason: impl Into<String>) -> Error {
        Error::Idx {
            path: self.path.to_path_buf(),
            offset: offset as u64,
            reason: reason.into(),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        let end = self.pos + 4;
        let b = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| self.fail(self.pos, "truncated header"))?;
        self.pos = end;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let magic = self.u32()?;
        if magic != expected {
            return Err(self.fail(0, format!("magic 0x{magic:08x}, expected 0x{expected:08x}")));
        }
        Ok(())
    }

    fn payload(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos + len;
        if self.bytes.len() < end {
            return Err(self.fail(
                self.bytes.len(),
                format!(
                    "truncated payload: header promises {len} bytes from offset {}, file has {}",
                    self.pos,
                    self.bytes.len() - self.pos
                ),
            ));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(io_err(path))
}

/// Parses an IDX image file and its label file.
pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<IdxImages> {
    let image_bytes = read_file(images_path)?;
    let mut images = IdxReader {
        path: images_path,
        bytes: &image_bytes,
        pos: 0,
    };
    images.magic(IDX_IMAGES_MAGIC)?;
    let count = images.u32()? as usize;
    let rows = images.u32()? as usize;
    let cols = images.u32()? as usize;
    if rows == 0 || cols == 0 {
        return Err(images.fail(8, format!("degenerate image size {rows}x{cols}")));
    }
    let pixels = images.payload(count * rows * cols)?.to_vec();

    let label_bytes = read_file(labels_path)?;
    let mut labels = IdxReader {
        path: labels_path,
        bytes: &label_bytes,
        pos: 0,
    };
    labels.magic(IDX_LABELS_MAGIC)?;
    let label_count = labels.u32()? as usize;
    if label_count != count {
        return Err(labels.fail(
            4,
            format!(
                "{label_count} labels but {count} images in {}",
                images_path.display()
            ),
        ));
    }
    let payload = labels.payload(count)?;
    if let Some(i) = payload.iter().position(|&l| l > 9) {
        return Err(labels.fail(8 + i, format!("label {} outside 0..=9", payload[i])));
    }
    Ok(IdxImages {
        rows,
        cols,
        pixels,
        labels: payload.to_vec(),
    })
}

/// Loads the four standard MNIST files from `dir`.
pub fn load_mnist_dir(dir: &Path) -> Result<MnistSplits> {
    let p = |name: &str| dir.join(name);
    Ok(MnistSplits {
        train: load_mnist_idx(&p(MNIST_FILES[0]), &p(MNIST_FILES[1]))?,
        test: load_mnist_idx(&p(MNIST_FILES[2]), &p(MNIST_FILES[3]))?,
    })
}

/// Raw IRIS measurements with classes 0 = setosa, 1 = versicolor,
/// 2 = virginica.
#[derive(Debug, Clone, PartialEq)]
pub struct IrisRows {
    pub features: Vec<[f64; 4]>,
    pub labels: Vec<u8>,
}

fn iris_class(field: &str) -> Option<u8> {
    let name = field.trim().trim_matches('"');
    let lower = name.to_ascii_lowercase();
    match lower.strip_prefix("iris-").unwrap_or(&lower) {
        "setosa" | "0" => Some(0),
        "versicolor" | "1" => Some(1),
        "virginica" | "2" => Some(2),
        _ => None,
    }
}

/// Parses IRIS rows of four measurements and a class. A first row whose
/// feature fields are not all numeric is taken as a header.
pub fn load_iris_csv(path: &Path) -> Result<IrisRows> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let fail = |row: usize, reason: String| Error::Csv {
        path: path.to_path_buf(),
        row,
        reason,
    };
    let mut out = IrisRows {
        features: Vec::new(),
        labels: Vec::new(),
    };
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let is_header = first
            && fields
                .iter()
                .take(4)
                .any(|f| f.trim_matches('"').parse::<f64>().is_err());
        first = false;
        if is_header {
            continue;
        }
        if fields.len() != 5 {
            return Err(fail(
                row,
                format!("expected 5 columns, found {}", fields.len()),
            ));
        }
        let mut features = [0.0; 4];
        for (slot, field) in features.iter_mut().zip(&fields) {
            *slot = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| fail(row, format!("non-numeric feature {field:?}")))?;
        }
        let class = iris_class(fields[4])
            .ok_or_else(|| fail(row, format!("unknown class {:?}", fields[4])))?;
        out.features.push(features);
        out.labels.push(class);
    }
    if out.labels.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// A binary-labelled dataset with features in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// One sample per row.
    pub features: Array2<f64>,
    pub labels: Vec<Label>,
    /// Original classes; the first maps to label 0, the second to label 1.
    pub source_classes: (u8, u8),
    pub split: Split,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn sample(&self, i: usize) -> (ArrayView1<'_, f64>, Label) {
        (self.features.row(i), self.labels[i])
    }

    /// Fraction of samples labelled 1.
    pub fn positive_fraction(&self) -> f64 {
        let ones = self.labels.iter().filter(|&&l| l == Label::One).count();
        ones as f64 / self.len() as f64
    }
}

/// Per-feature min/max fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    pub fn fit(features: &Array2<f64>) -> Result<ScalerParams> {
        if features.nrows() == 0 {
            return Err(Error::EmptyDataset("cannot fit a scaler on no rows".into()));
        }
        let fold = |init: f64, f: fn(f64, f64) -> f64| {
            features
                .axis_iter(Axis(1))
                .map(|col| col.iter().copied().fold(init, f))
                .collect::<Vec<_>>()
        };
        Ok(ScalerParams {
            min: fold(f64::INFINITY, f64::min),
            max: fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Min-max scales in place and clamps into `[0, 1]`. Constant features
    /// map to 0.
    pub fn apply(&self, features: &mut Array2<f64>) {
        for (mut col, (&lo, &hi)) in features
            .axis_iter_mut(Axis(1))
            .zip(self.min.iter().zip(&self.max))
        {
            let range = hi - lo;
            col.mapv_inplace(|v| {
                if range > 0.0 {
                    ((v - lo) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            });
        }
    }
}

/// Raw data for either supported source.
#[derive(Debug, Clone)]
pub enum RawData {
    Mnist(MnistSplits),
    Iris(IrisRows),
}

/// Train/test split of the IRIS pair. MNIST always uses its own split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

fn check_pair(class_a: u8, class_b: u8, present: &[u8], source: &str) -> Result<()> {
    if class_a == class_b {
        return Err(Error::Config(format!(
            "pair classes must differ, got {class_a},{class_b}"
        )));
    }
    for c in [class_a, class_b] {
        if !present.contains(&c) {
            return Err(Error::Config(format!(
                "class {c} does not occur in the {source} data"
            )));
        }
    }
    Ok(())
}

fn mnist_subset(raw: &IdxImages, pair: (u8, u8), split: Split) -> Dataset {
    let keep: Vec<usize> = (0..raw.len())
        .filter(|&i| raw.labels[i] == pair.0 || raw.labels[i] == pair.1)
        .collect();
    let d = raw.rows * raw.cols;
    let mut features = Array2::zeros((keep.len(), d));
    for (mut row, &i) in features.rows_mut().into_iter().zip(&keep) {
        for (v, &px) in row.iter_mut().zip(raw.image(i)) {
            *v = f64::from(px) / 255.0;
        }
    }
    Dataset {
        features,
        labels: keep
            .iter()
            .map(|&i| Label::from_bool(raw.labels[i] == pair.1))
            .collect(),
        source_classes: pair,
        split,
    }
}

fn iris_subset(raw: &IrisRows, idx: &[usize], pair: (u8, u8), split: Split) -> Dataset {
    let mut features = Array2::zeros((idx.len(), 4));
    for (mut row, &i) in features.rows_mut().into_iter().zip(idx) {
        row.assign(&ArrayView1::from(&raw.features[i]));
    }
    Dataset {
        features,
        labels: idx
            .iter()
            .map(|&i| Label::from_bool(raw.labels[i] == pair.1))
            .collect(),
        source_classes: pair,
        split,
    }
}

/// Selects samples of `class_a` (label 0) and `class_b` (label 1) and
/// scales them into `[0, 1]`.
///
/// MNIST keeps its predefined split and divides pixels by 255. IRIS is split
/// per class with the seeded `split`, then min-max scaled with statistics
/// from the training half only.
pub fn make_binary_pair(
    raw: &RawData,
    class_a: u8,
    class_b: u8,
    split: SplitSpec,
) -> Result<(Dataset, Dataset)> {
    let pair = (class_a, class_b);
    match raw {
        RawData::Mnist(m) => {
            check_pair(class_a, class_b, &m.train.labels, "MNIST train")?;
            check_pair(class_a, class_b, &m.test.labels, "MNIST test")?;
            Ok((
                mnist_subset(&m.train, pair, Split::Train),
                mnist_subset(&m.test, pair, Split::Test),
            ))
        }
        RawData::Iris(rows) => {
            check_pair(class_a, class_b, &rows.labels, "IRIS")?;
            if !(split.train_fraction > 0.0 && split.train_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "train fraction must lie in (0, 1), got {}",
                    split.train_fraction
                )));
            }
            let (train_idx, test_idx) = split_indices(&rows.labels, pair, split);
            let mut train = iris_subset(rows, &train_idx, pair, Split::Train);
            let mut test = iris_subset(rows, &test_idx, pair, Split::Test);
            let scaler = ScalerParams::fit(&train.features)?;
            scaler.apply(&mut train.features);
            scaler.apply(&mut test.features);
            Ok((train, test))
        }
    }
}

/// Per-class seeded split of the samples of `pair` into train and test
/// indices.
fn split_indices(labels: &[u8], pair: (u8, u8), split: SplitSpec) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(split.seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in [pair.0, pair.1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_train = (idx.len() as f64 * split.train_fraction).round() as usize;
        let n_train = n_train.clamp(1, idx.len().saturating_sub(1).max(1));
        test.extend_from_slice(&idx[n_train..]);
        idx.truncate(n_train);
        train.extend(idx);
    }
    (train, test)
}

/// Shuffled mini-batches of sample indices for one epoch.
pub fn batches(len: usize, batch_size: usize, epoch_seed: u64) -> Vec<Vec<usize>> {
    assert!(batch_size >= 1, "batch size must be positive");
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(epoch_seed));
    order.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

/// Where the dataset files live.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataPaths {
    pub mnist_dir: Option<PathBuf>,
    pub iris_file: Option<PathBuf>,
}
