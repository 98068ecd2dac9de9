use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

pub(crate) const PANEL_ORDER: usize = 16;

fn reference_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(PANEL_ORDER).unwrap())
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Composite Gauss-Legendre nodes and weights on `[a, b]`.
pub(crate) fn composite_rule(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
    let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in reference_rule() {
            nodes.push(mid + 0.5 * h * x);
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

/// Area of the unit sphere in `R^d`; `|S^0| = 2`.
pub(crate) fn sphere_area(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

/// Average of `e^{i x . omega}` over the unit sphere of `R^d`, as a
/// function of `x = |x|`: `Gamma(d/2) (2/x)^{d/2-1} J_{d/2-1}(x)`.
pub(crate) fn spherical_mean(d: usize, x: f64) -> f64 {
    let x2 = x * x;
    match d {
        1 => x.cos(),
        2 => libm::j0(x),
        3 => {
            if x.abs() < 1e-3 {
                1.0 - x2 / 6.0 + x2 * x2 / 120.0
            } else {
                x.sin() / x
            }
        }
        4 => {
            if x.abs() < 1e-3 {
                1.0 - x2 / 8.0 + x2 * x2 / 192.0
            } else {
                2.0 * libm::j1(x) / x
            }
        }
        5 => {
            if x.abs() < 0.05 {
                1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0
            } else {
                3.0 * (x.sin() - x * x.cos()) / (x2 * x)
            }
        }
        _ => panic!("spherical mean implemented for dimensions 1..=5, got {d}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_rule_integrates_oscillation() {
        let (x, w) = composite_rule(0.0, 10.0, 12);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * (3.0 * x).cos()).sum();
        assert!((v - (30f64).sin() / 3.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn spherical_mean_small_argument_branches_are_continuous() {
        for d in 1..=5 {
            let a = spherical_mean(d, 0.999e-3);
            let b = spherical_mean(d, 1.001e-3);
            assert!((a - b).abs() < 1e-8, "d = {d}");
            assert!((spherical_mean(d, 0.0) - 1.0).abs() < 1e-15);
        }
        let a = spherical_mean(5, 0.0499);
        let b = spherical_mean(5, 0.0501);
        assert!((a - b).abs() < 1e-5);
    }

    #[test]
    fn spherical_mean_matches_direct_average_in_3d() {
        // (1/2) int_{-1}^{1} cos(x u) du = sin x / x.
        let (u, w) = composite_rule(-1.0, 1.0, 4);
        for &x in &[0.3, 2.0, 7.5] {
            let avg: f64 = 0.5 * u.iter().zip(&w).map(|(u, w)| w * (x * u).cos()).sum::<f64>();
            assert!((avg - spherical_mean(3, x)).abs() < 1e-12);
        }
    }
}
