//! Datasets: paired input/output samples, CSV ingestion and synthetic targets.
//!
//! The on-disk format is a plain CSV with a header naming the columns
//! `x0..x{d-1}, y0..y{q-1}`. No scaling or normalization is ever applied on
//! load; values pass through verbatim.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A finite sample set: `M` input points in `ℝ^d` with outputs in `ℝ^q`.
///
/// The inputs double as the discrete candidate domain for greedy selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset, validating shapes and rejecting non-finite entries.
    pub fn new(inputs: Vec<Vec<f64>>, outputs: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::input("dataset has no rows"));
        }
        if inputs.len() != outputs.len() {
            return Err(Error::input(format!(
                "dataset has {} input rows but {} output rows",
                inputs.len(),
                outputs.len()
            )));
        }
        let d = inputs[0].len();
        let q = outputs[0].len();
        if d == 0 || q == 0 {
            return Err(Error::input("dataset rows must have at least one column"));
        }
        for (i, row) in inputs.iter().enumerate() {
            if row.len() != d {
                return Err(Error::input(format!(
                    "input row {i} has {} columns, expected {d}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::input(format!(
                    "non-finite input value {v} in row {i}"
                )));
            }
        }
        for (i, row) in outputs.iter().enumerate() {
            if row.len() != q {
                return Err(Error::input(format!(
                    "output row {i} has {} columns, expected {q}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::input(format!(
                    "non-finite output value {v} in row {i}"
                )));
            }
        }
        Ok(Dataset { inputs, outputs })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one row
    }

    /// Input dimension `d`.
    pub fn dim_in(&self) -> usize {
        self.inputs[0].len()
    }

    /// Output dimension `q`.
    pub fn dim_out(&self) -> usize {
        self.outputs[0].len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Vec<f64>] {
        &self.outputs
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i]
    }

    pub fn output(&self, i: usize) -> &[f64] {
        &self.outputs[i]
    }

    /// New dataset containing the given rows, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::input("dataset subset is empty"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::input(format!(
                "subset index {bad} out of range for {} rows",
                self.len()
            )));
        }
        let inputs = indices.iter().map(|&i| self.inputs[i].clone()).collect();
        let outputs = indices.iter().map(|&i| self.outputs[i].clone()).collect();
        Ok(Dataset { inputs, outputs })
    }

    /// Deterministic shuffled train/test split. `train_fraction` in `(0, 1]`;
    /// a fraction of 1 yields no test set.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Dataset, Option<Dataset>)> {
        if !(train_fraction > 0.0 && train_fraction <= 1.0) {
            return Err(Error::input(format!(
                "train fraction must be in (0, 1], got {train_fraction}"
            )));
        }
        if train_fraction == 1.0 {
            return Ok((self.clone(), None));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        // The offset keeps this stream distinct from fold shuffling at the same seed.
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x51BD));
        shuffle(&mut order, &mut rng);
        let n_train = ((self.len() as f64) * train_fraction).round() as usize;
        let n_train = n_train.clamp(1, self.len());
        let (train_idx, test_idx) = order.split_at(n_train);
        let mut train_idx = train_idx.to_vec();
        let mut test_idx = test_idx.to_vec();
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        let train = self.subset(&train_idx)?;
        let test = if test_idx.is_empty() {
            None
        } else {
            Some(self.subset(&test_idx)?)
        };
        Ok((train, test))
    }
}

/// Fisher-Yates with the crate's seeded RNG; kept local so shuffles stay
/// stable across rand crate upgrades.
pub(crate) fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
}

fn parse_header(path: &str, header: &csv::StringRecord) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut x_cols: Vec<Option<usize>> = Vec::new();
    let mut y_cols: Vec<Option<usize>> = Vec::new();
    for (pos, name) in header.iter().enumerate() {
        let name = name.trim();
        let (prefix, rest) = name.split_at(1.min(name.len()));
        let target = match prefix {
            "x" => &mut x_cols,
            "y" => &mut y_cols,
            _ => {
                return Err(Error::Parse {
                    path: path.to_string(),
                    row: 1,
                    column: pos + 1,
                    message: format!("unexpected column name {name:?}, expected x<i> or y<j>"),
                })
            }
        };
        let idx: usize = rest.parse().map_err(|_| Error::Parse {
            path: path.to_string(),
            row: 1,
            column: pos + 1,
            message: format!("unexpected column name {name:?}, expected x<i> or y<j>"),
        })?;
        if idx >= target.len() {
            target.resize(idx + 1, None);
        }
        if target[idx].is_some() {
            return Err(Error::Parse {
                path: path.to_string(),
                row: 1,
                column: pos + 1,
                message: format!("duplicate column {name:?}"),
            });
        }
        target[idx] = Some(pos);
    }
    let unwrap_all = |cols: Vec<Option<usize>>, prefix: &str| -> Result<Vec<usize>> {
        cols.into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| Error::Parse {
                    path: path.to_string(),
                    row: 1,
                    column: 1,
                    message: format!("missing column {prefix}{i}"),
                })
            })
            .collect()
    };
    let x = unwrap_all(x_cols, "x")?;
    let y = unwrap_all(y_cols, "y")?;
    if x.is_empty() || y.is_empty() {
        return Err(Error::Parse {
            path: path.to_string(),
            row: 1,
            column: 1,
            message: "header must name at least x0 and y0".to_string(),
        });
    }
    Ok((x, y))
}

/// Loads a dataset from CSV with columns `x0..x{d-1}, y0..y{q-1}`.
///
/// Dimensions are inferred from the header. Non-numeric or non-finite cells
/// are rejected with their row and column location.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::input(format!("cannot open {display}: {e}")))?;
    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            path: display.clone(),
            row: 1,
            column: 1,
            message: e.to_string(),
        })?
        .clone();
    let (x_cols, y_cols) = parse_header(&display, &header)?;

    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (rec_idx, record) in reader.records().enumerate() {
        let row = rec_idx + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::Parse {
            path: display.clone(),
            row,
            column: 1,
            message: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                path: display.clone(),
                row,
                column: record.len(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let parse_cell = |pos: usize| -> Result<f64> {
            let cell = &record[pos];
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                path: display.clone(),
                row,
                column: pos + 1,
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: display.clone(),
                    row,
                    column: pos + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            Ok(value)
        };
        inputs.push(
            x_cols
                .iter()
                .map(|&p| parse_cell(p))
                .collect::<Result<Vec<f64>>>()?,
        );
        outputs.push(
            y_cols
                .iter()
                .map(|&p| parse_cell(p))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    if inputs.is_empty() {
        return Err(Error::Parse {
            path: display,
            row: 1,
            column: 1,
            message: "file contains a header but no data rows".to_string(),
        });
    }
    Dataset::new(inputs, outputs)
}

/// Writes a dataset in the same CSV schema `load_csv` reads.
///
/// Numbers use the shortest decimal representation that round-trips, so a
/// save/load cycle reproduces the dataset bit for bit.
pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (0..dataset.dim_in())
        .map(|i| format!("x{i}"))
        .chain((0..dataset.dim_out()).map(|j| format!("y{j}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..dataset.len() {
        let cells: Vec<String> = dataset
            .input(i)
            .iter()
            .chain(dataset.output(i).iter())
            .map(|v| v.to_string())
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Synthetic target families for experiments and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// Smooth oscillatory components: Gaussian bumps plus a plane wave.
    FrankeVec,
    /// Smooth monotone components with sharp gradients near the boundary,
    /// loosely imitating force/torque stiffness curves.
    StiffnessLike,
    /// All outputs identically zero.
    Zero,
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "franke-vec" => Ok(Generator::FrankeVec),
            "stiffness-like" => Ok(Generator::StiffnessLike),
            "zero" => Ok(Generator::Zero),
            other => Err(Error::input(format!(
                "unknown generator {other:?} (expected \"franke-vec\", \"stiffness-like\" or \"zero\")"
            ))),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::FrankeVec => write!(f, "franke-vec"),
            Generator::StiffnessLike => write!(f, "stiffness-like"),
            Generator::Zero => write!(f, "zero"),
        }
    }
}

/// Deterministic synthetic dataset: `n` points uniform in `[-1, 1]^d` with
/// `q`-dimensional outputs from the chosen generator.
pub fn synth(generator: Generator, n: usize, d: usize, q: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::input("synthetic dataset needs n >= 1"));
    }
    if d == 0 || q == 0 {
        return Err(Error::input("synthetic dataset needs d >= 1 and q >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();

    let outputs: Vec<Vec<f64>> = match generator {
        Generator::Zero => inputs.iter().map(|_| vec![0.0; q]).collect(),
        Generator::FrankeVec => {
            let components: Vec<FrankeComponent> = (0..q)
                .map(|_| FrankeComponent::sample(d, &mut rng))
                .collect();
            inputs
                .iter()
                .map(|x| components.iter().map(|c| c.eval(x)).collect())
                .collect()
        }
        Generator::StiffnessLike => {
            let components: Vec<StiffnessComponent> = (0..q)
                .map(|_| StiffnessComponent::sample(d, &mut rng))
                .collect();
            inputs
                .iter()
                .map(|x| components.iter().map(|c| c.eval(x)).collect())
                .collect()
        }
    };
    Dataset::new(inputs, outputs)
}

/// One output component of the "franke-vec" generator: a handful of Gaussian
/// bumps plus one sinusoid of a linear form.
struct FrankeComponent {
    bumps: Vec<(f64, Vec<f64>, f64)>, // amplitude, center, inverse width
    wave_amplitude: f64,
    wave_direction: Vec<f64>,
    wave_frequency: f64,
    wave_phase: f64,
}

impl FrankeComponent {
    fn sample(d: usize, rng: &mut ChaCha8Rng) -> Self {
        let bumps = (0..4)
            .map(|_| {
                let amp = rng.random_range(0.4..1.2);
                let center: Vec<f64> = (0..d).map(|_| rng.random_range(-0.9..0.9)).collect();
                let inv_width = rng.random_range(1.0..4.0);
                (amp, center, inv_width)
            })
            .collect();
        let wave_direction: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        FrankeComponent {
            bumps,
            wave_amplitude: rng.random_range(0.2..0.6),
            wave_direction,
            wave_frequency: rng.random_range(2.0..6.0),
            wave_phase: rng.random_range(0.0..std::f64::consts::TAU),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for (amp, center, inv_width) in &self.bumps {
            let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            v += amp * (-inv_width * d2).exp();
        }
        let dot: f64 = x.iter().zip(&self.wave_direction).map(|(a, b)| a * b).sum();
        v + self.wave_amplitude * (self.wave_frequency * dot + self.wave_phase).sin()
    }
}

/// One output component of the "stiffness-like" generator: a sum of
/// coordinate-wise sinh terms, monotone in each coordinate and steep near the
/// domain boundary, plus a small linear part.
struct StiffnessComponent {
    gains: Vec<f64>,
    rates: Vec<f64>,
    linear: Vec<f64>,
}

impl StiffnessComponent {
    fn sample(d: usize, rng: &mut ChaCha8Rng) -> Self {
        StiffnessComponent {
            gains: (0..d).map(|_| rng.random_range(0.5..1.5)).collect(),
            rates: (0..d).map(|_| rng.random_range(2.0..4.0)).collect(),
            linear: (0..d).map(|_| rng.random_range(-0.5..0.5)).collect(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            v += self.gains[i] * (self.rates[i] * xi).sinh() + self.linear[i] * xi;
        }
        v
    }
}
