use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::grid::{GridAxis, TorusGrid};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

type PlanKey = (usize, bool);

fn plan_cache() -> &'static RwLock<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let key = (n, dir == Direction::Forward);
    if let Some(p) = plan_cache().read().expect("fft cache poisoned").get(&key) {
        return p.clone();
    }
    let mut cache = plan_cache().write().expect("fft cache poisoned");
    cache
        .entry(key)
        .or_insert_with(|| {
            let d = match dir {
                Direction::Forward => FftDirection::Forward,
                Direction::Inverse => FftDirection::Inverse,
            };
            FftPlanner::new().plan_fft(n, d)
        })
        .clone()
}

/// Unitary N-dimensional DFT in place, axis by axis.
pub(crate) fn fft_nd(data: &mut [Complex64], shape: &[usize], dir: Direction) {
    let total: usize = shape.iter().product();
    debug_assert_eq!(total, data.len());
    let mut block_buf = Vec::new();
    let mut scratch = Vec::new();
    for axis in 0..shape.len() {
        let n = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let fft = plan(n, dir);
        scratch.resize(fft.get_inplace_scratch_len(), Complex64::default());
        if inner == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = n * inner;
        block_buf.resize(block, Complex64::default());
        for chunk in data.chunks_exact_mut(block) {
            for i in 0..n {
                for j in 0..inner {
                    block_buf[j * n + i] = chunk[i * inner + j];
                }
            }
            fft.process_with_scratch(&mut block_buf, &mut scratch);
            for i in 0..n {
                for j in 0..inner {
                    chunk[i * inner + j] = block_buf[j * n + i];
                }
            }
        }
    }
    let scale = 1.0 / (total as f64).sqrt();
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Complex samples on a [`TorusGrid`], row-major with the last axis fastest.
///
/// The same type carries spectra (FFT storage order) after [`transform`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<TorusGrid>,
    samples: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Arc<TorusGrid>) -> Self {
        let n = grid.len();
        Field { grid, samples: vec![Complex64::default(); n] }
    }

    pub fn from_samples(grid: Arc<TorusGrid>, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, samples })
    }

    /// Sample `f` at the grid coordinates.
    pub fn from_fn(grid: Arc<TorusGrid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut samples = vec![Complex64::default(); grid.len()];
        let mut z = vec![0.0; grid.dim()];
        grid.for_each_index(|flat, idx| {
            for (a, &i) in idx.iter().enumerate() {
                z[a] = grid.coordinate(a, i);
            }
            samples[flat] = f(&z);
        });
        Field { grid, samples }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn check_grid(&self, other: &Field) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids".into()))
        }
    }

    /// `sqrt(dV * sum |f|^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field { grid: self.grid.clone(), samples: self.samples.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Field> {
        self.check_grid(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { grid: self.grid.clone(), samples })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &Field) -> Result<()> {
        self.check_grid(other)?;
        for (a, &b) in self.samples.iter_mut().zip(&other.samples) {
            *a += c * b;
        }
        Ok(())
    }

    /// The same samples reinterpreted on another grid with identical shape.
    pub fn with_grid(self, grid: Arc<TorusGrid>) -> Result<Field> {
        if grid.shape() != self.grid.shape() || grid.split() != self.grid.split() {
            return Err(Error::GridMismatch("shape or split differs".into()));
        }
        Ok(Field { grid, samples: self.samples })
    }
}

/// Unitary DFT of the samples; `Inverse` undoes `Forward`.
pub fn transform(f: &Field, direction: Direction) -> Field {
    let mut out = f.clone();
    fft_nd(&mut out.samples, &f.grid.shape(), direction);
    out
}

/// `sqrt(dV * sum |F|^2)` over the spectrum; equals `l2_norm` by Plancherel.
pub fn spectral_l2_norm(f: &Field) -> f64 {
    transform(f, Direction::Forward).l2_norm()
}

/// Little-endian snapshot: `u64` axis count, `f64` extents, `u64` point
/// counts, `u64` split, then interleaved re/im `f64` samples.
pub fn write_snapshot<W: Write>(f: &Field, mut w: W) -> std::io::Result<()> {
    let g = f.grid();
    w.write_all(&(g.dim() as u64).to_le_bytes())?;
    for a in g.axes() {
        w.write_all(&a.extent.to_le_bytes())?;
    }
    for a in g.axes() {
        w.write_all(&(a.points as u64).to_le_bytes())?;
    }
    w.write_all(&(g.split() as u64).to_le_bytes())?;
    for v in f.samples() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| Error::Snapshot(e.to_string()))?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Field> {
    let dim = read_u64(&mut r)? as usize;
    if dim == 0 || dim > 16 {
        return Err(Error::Snapshot(format!("implausible axis count {dim}")));
    }
    let extents = (0..dim).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let points = (0..dim).map(|_| read_u64(&mut r)).collect::<Result<Vec<_>>>()?;
    let split = read_u64(&mut r)? as usize;
    let axes = extents
        .into_iter()
        .zip(points)
        .map(|(extent, points)| GridAxis { extent, points: points as usize })
        .collect();
    let grid = Arc::new(TorusGrid::new(axes, split)?);
    let samples = (0..grid.len())
        .map(|_| Ok(Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?)))
        .collect::<Result<Vec<_>>>()?;
    Field::from_samples(grid, samples)
}
