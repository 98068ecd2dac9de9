use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;

const TABLE_INTERVALS: usize = 4096;

/// Smooth step `S` on `[0, 1]`: normalized integral of
/// `exp(-a / (x (1 - x)))`, tabulated with cubic Hermite interpolation
/// against the exact derivative.
#[derive(Debug)]
struct StepTable {
    steepness: f64,
    norm: f64,
    values: Vec<f64>,
}

impl StepTable {
    fn bump(a: f64, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            (-a / (x * (1.0 - x))).exp()
        }
    }

    fn new(steepness: f64) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
        let h = 1.0 / TABLE_INTERVALS as f64;
        let mut values = Vec::with_capacity(TABLE_INTERVALS + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for i in 0..TABLE_INTERVALS {
            let a = i as f64 * h;
            acc += rule.integrate(a, a + h, |x| Self::bump(steepness, x));
            values.push(acc);
        }
        let norm = acc;
        for v in values.iter_mut() {
            *v /= norm;
        }
        StepTable { steepness, norm, values }
    }

    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let h = 1.0 / TABLE_INTERVALS as f64;
        let i = ((x / h) as usize).min(TABLE_INTERVALS - 1);
        let x0 = i as f64 * h;
        let u = (x - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let d0 = h * Self::bump(self.steepness, x0) / self.norm;
        let d1 = h * Self::bump(self.steepness, x0 + h) / self.norm;
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * d0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * d1
    }
}

/// Radial dyadic cutoff `psi(r) = theta(r) - theta(2r)` built from a smooth
/// profile `theta` equal to 1 on `[0, 1]` and 0 on `[2, inf)`.
#[derive(Clone, Debug)]
pub struct SpectralCutoff {
    table: Arc<StepTable>,
}

impl Default for SpectralCutoff {
    fn default() -> Self {
        build_cutoff(1.0)
    }
}

/// `steepness` is the constant `a` in the mollifier `exp(-a / (x (1 - x)))`.
pub fn build_cutoff(steepness: f64) -> SpectralCutoff {
    assert!(steepness > 0.0 && steepness.is_finite(), "steepness must be positive");
    SpectralCutoff { table: Arc::new(StepTable::new(steepness)) }
}

impl SpectralCutoff {
    pub fn steepness(&self) -> f64 {
        self.table.steepness
    }

    pub fn theta(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            1.0 - self.table.eval(r - 1.0)
        }
    }

    pub fn psi(&self, r: f64) -> f64 {
        self.theta(r) - self.theta(2.0 * r)
    }

    /// `psi_j(r) = psi(2^{-j} r)`.
    pub fn psi_j(&self, j: i32, r: f64) -> f64 {
        self.psi(r * 2f64.powi(-j))
    }

    /// `sum_{j=a}^{b} psi_j(r)`, evaluated term by term.
    pub fn band_sum(&self, a: i32, b: i32, r: f64) -> f64 {
        (a..=b).map(|j| self.psi_j(j, r)).sum()
    }

    /// Closed form of [`band_sum`](Self::band_sum):
    /// `theta(2^{-b} r) - theta(2^{1-a} r)`.
    pub fn band_sum_closed(&self, a: i32, b: i32, r: f64) -> f64 {
        self.theta(r * 2f64.powi(-b)) - self.theta(r * 2f64.powi(1 - a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_endpoints() {
        let c = SpectralCutoff::default();
        assert_eq!(c.theta(0.3), 1.0);
        assert_eq!(c.theta(1.0), 1.0);
        assert_eq!(c.theta(2.0), 0.0);
        assert!((c.theta(1.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn psi_support_and_range() {
        let c = SpectralCutoff::default();
        assert_eq!(c.psi(0.25), 0.0);
        assert_eq!(c.psi(0.5), 0.0);
        assert_eq!(c.psi(2.0), 0.0);
        assert_eq!(c.psi(1.0), 1.0);
        for i in 0..=1000 {
            let r = 3.0 * i as f64 / 1000.0;
            let v = c.psi(r);
            assert!((0.0..=1.0).contains(&v), "psi({r}) = {v}");
        }
    }

    #[test]
    fn table_is_smooth_across_knots() {
        let c = build_cutoff(1.0);
        let h = 1.0 / TABLE_INTERVALS as f64;
        let x = 1.0 + 700.0 * h;
        let left = c.theta(x - 1e-9);
        let right = c.theta(x + 1e-9);
        assert!((left - right).abs() < 1e-8);
    }
}
