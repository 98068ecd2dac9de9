use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub extent: f64,
    pub points: usize,
}

/// Squared frequency magnitudes per lattice point, in FFT storage order.
#[derive(Debug)]
pub(crate) struct Lattice {
    pub zeta_sq: Vec<f64>,
    pub eta_sq: Vec<f64>,
}

/// Periodic box `prod [-L_i/2, L_i/2)`; the last `split` axes are the
/// y-variables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusGrid {
    axes: Vec<GridAxis>,
    split: usize,
    #[serde(skip)]
    lattice: OnceLock<Arc<Lattice>>,
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes && self.split == other.split
    }
}

impl TorusGrid {
    pub fn new(axes: Vec<GridAxis>, split: usize) -> Result<Self> {
        if axes.is_empty() {
            return invalid("grid needs at least one axis");
        }
        if split < 1 || split > axes.len() {
            return invalid(format!("split {split} outside 1..={}", axes.len()));
        }
        for (i, a) in axes.iter().enumerate() {
            if !(a.extent.is_finite() && a.extent > 0.0) {
                return invalid(format!("axis {i}: extent must be positive, got {}", a.extent));
            }
            if a.points == 0 || a.points % 2 != 0 {
                return invalid(format!("axis {i}: point count must be positive and even, got {}", a.points));
            }
        }
        Ok(TorusGrid { axes, split, lattice: OnceLock::new() })
    }

    /// `dim` axes with the same extent and point count.
    pub fn cube(dim: usize, extent: f64, points: usize, split: usize) -> Result<Self> {
        Self::new(vec![GridAxis { extent, points }; dim], split)
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn x_dim(&self) -> usize {
        self.dim() - self.split
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of samples in one y-slice (contiguous in row-major order).
    pub fn y_len(&self) -> usize {
        self.axes[self.x_dim()..].iter().map(|a| a.points).product()
    }

    pub fn x_len(&self) -> usize {
        self.axes[..self.x_dim()].iter().map(|a| a.points).product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let a = self.axes[axis];
        a.extent / a.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.spacing(i)).product()
    }

    pub fn x_cell_volume(&self) -> f64 {
        (0..self.x_dim()).map(|i| self.spacing(i)).product()
    }

    pub fn y_cell_volume(&self) -> f64 {
        (self.x_dim()..self.dim()).map(|i| self.spacing(i)).product()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.extent).product()
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        -0.5 * self.axes[axis].extent + i as f64 * self.spacing(axis)
    }

    /// Signed integer mode of storage index `i`: `0, 1, ..., n/2-1, -n/2, ..., -1`.
    pub fn mode(&self, axis: usize, i: usize) -> i64 {
        let n = self.axes[axis].points;
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        2.0 * PI * self.mode(axis, i) as f64 / self.axes[axis].extent
    }

    /// Largest `|zeta|` on the lattice, attained at the Nyquist corner.
    pub fn max_frequency(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| (PI * a.points as f64 / a.extent).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Same sample counts with every extent divided by `factor`.
    pub fn shrunk(&self, factor: f64) -> Result<Self> {
        let axes = self
            .axes
            .iter()
            .map(|a| GridAxis { extent: a.extent / factor, points: a.points })
            .collect();
        Self::new(axes, self.split)
    }

    /// Same extents with twice the points per axis.
    pub fn refined(&self) -> Result<Self> {
        let axes = self
            .axes
            .iter()
            .map(|a| GridAxis { extent: a.extent, points: 2 * a.points })
            .collect();
        Self::new(axes, self.split)
    }

    /// Visit every lattice point in storage order with its multi-index.
    pub fn for_each_index(&self, mut visit: impl FnMut(usize, &[usize])) {
        let shape = self.shape();
        let mut idx = vec![0usize; shape.len()];
        for flat in 0..self.len() {
            visit(flat, &idx);
            for a in (0..shape.len()).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    pub(crate) fn lattice(&self) -> Arc<Lattice> {
        self.lattice
            .get_or_init(|| {
                let xd = self.x_dim();
                let mut zeta_sq = vec![0.0; self.len()];
                let mut eta_sq = vec![0.0; self.len()];
                self.for_each_index(|flat, idx| {
                    let mut e = 0.0;
                    let mut z = 0.0;
                    for (a, &i) in idx.iter().enumerate() {
                        let w = self.wavenumber(a, i).powi(2);
                        z += w;
                        if a >= xd {
                            e += w;
                        }
                    }
                    zeta_sq[flat] = z;
                    eta_sq[flat] = e;
                });
                Arc::new(Lattice { zeta_sq, eta_sq })
            })
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_points_and_bad_split() {
        assert!(TorusGrid::cube(2, 1.0, 7, 1).is_err());
        assert!(TorusGrid::cube(2, 1.0, 8, 0).is_err());
        assert!(TorusGrid::cube(2, 1.0, 8, 3).is_err());
        assert!(TorusGrid::cube(2, -1.0, 8, 1).is_err());
    }

    #[test]
    fn modes_follow_fft_order() {
        let g = TorusGrid::cube(1, 2.0 * PI, 8, 1).unwrap();
        let modes: Vec<i64> = (0..8).map(|i| g.mode(0, i)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.wavenumber(0, 3), 3.0);
    }

    #[test]
    fn slice_sizes() {
        let g = TorusGrid::new(
            vec![
                GridAxis { extent: 1.0, points: 4 },
                GridAxis { extent: 2.0, points: 6 },
                GridAxis { extent: 3.0, points: 8 },
            ],
            2,
        )
        .unwrap();
        assert_eq!(g.x_len(), 4);
        assert_eq!(g.y_len(), 48);
        assert!((g.cell_volume() - g.x_cell_volume() * g.y_cell_volume()).abs() < 1e-15);
    }
}
