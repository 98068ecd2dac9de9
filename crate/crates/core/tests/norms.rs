use std::f64::consts::PI;
use std::sync::Arc;

use dispersive_lab::exponents::*;
use dispersive_lab::norms::*;
use dispersive_lab::spectral::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn triple(s: &str) -> ExponentTriple {
    s.parse().unwrap()
}

fn random_field(grid: &Arc<TorusGrid>, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Field::from_samples(grid.clone(), samples).unwrap()
}

fn band_limited(grid: &Arc<TorusGrid>, lo: f64, hi: f64, seed: u64) -> Field {
    let noise = random_field(grid, seed);
    apply_multiplier(&noise, |z| {
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        c(if r >= lo && r <= hi { 1.0 } else { 0.0 })
    })
    .unwrap()
}

/// Riemann sum of `|v|^p` over one axis, by hand.
fn axis_lp(values: &[f64], h: f64, p: f64) -> f64 {
    (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h).powf(1.0 / p)
}

fn grid_xy() -> Arc<TorusGrid> {
    Arc::new(
        TorusGrid::new(
            vec![
                GridAxis { extent: 6.0, points: 16 },
                GridAxis { extent: 8.0, points: 12 },
                GridAxis { extent: 5.0, points: 10 },
            ],
            2,
        )
        .unwrap(),
    )
}

#[test]
fn separable_norm_factorizes() {
    let g = grid_xy();
    let a = |x: f64| 1.0 + x.sin().powi(2);
    let b = |y: f64, z: f64| (-(y * y) / 3.0 - z * z / 2.0).exp() + 0.1;
    let f = Field::from_fn(g.clone(), |p| c(a(p[0]) * b(p[1], p[2])));
    let ax: Vec<f64> = (0..16).map(|i| a(g.coordinate(0, i))).collect();
    let mut by = Vec::new();
    for i in 0..12 {
        for j in 0..10 {
            by.push(b(g.coordinate(1, i), g.coordinate(2, j)));
        }
    }
    for (r, rt) in [(2.0, 2.0), (5.0, 3.0), (16.0 / 7.0, 4.0), (1.5, 7.0)] {
        let expect = axis_lp(&ax, g.spacing(0), r) * axis_lp(&by, g.y_cell_volume(), rt);
        let got = mixed_space_norm(&f, ExtRational::Finite(rational(r)), ExtRational::Finite(rational(rt)));
        assert!((got - expect).abs() < 1e-10 * expect, "{r} {rt}");
    }
}

fn rational(x: f64) -> Rational {
    let d = 7 * 1024;
    rat((x * d as f64).round() as i128, d)
}

#[test]
fn equal_exponents_collapse() {
    let g = grid_xy();
    let f = random_field(&g, 1);
    for p in [2, 3, 6] {
        let e = ExtRational::integer(p);
        let a = mixed_space_norm(&f, e, e);
        let b = lebesgue_norm(&f, p as f64);
        assert!((a - b).abs() < 1e-12 * b);
    }
}

#[test]
fn gaussian_mixed_norm() {
    // ||e^{-x^2}||_{L^p(R)} = (pi/p)^{1/(2p)}.
    let g = Arc::new(TorusGrid::cube(3, 16.0, 64, 2).unwrap());
    let f = Field::from_fn(g, |z| c((-z.iter().map(|v| v * v).sum::<f64>()).exp()));
    let gl = |p: f64| (PI / p).powf(0.5 / p);
    for (r, rt) in [(2i128, 2i128), (4, 3), (6, 2)] {
        let (rf, rtf) = (r as f64, rt as f64);
        let expect = gl(rf) * gl(rtf).powi(2);
        let got = mixed_space_norm(&f, ExtRational::integer(r), ExtRational::integer(rt));
        assert!((got / expect - 1.0).abs() < 1e-3, "{r} {rt}: {got} {expect}");
    }
}

#[test]
fn sobolev_examples() {
    let g = grid_xy();
    let f = random_field(&g, 2);
    let l2 = f.l2_norm();
    assert!((sobolev_norm(&f, 0.0, Flavor::Inhomogeneous, DerivativeAxes::All) - l2).abs() < 1e-14 * l2);
    assert!(sobolev_norm(&f, 0.8, Flavor::Inhomogeneous, DerivativeAxes::All) >= l2);
    let kx = 2.0 * PI / 6.0 * 2.0;
    let ky = 2.0 * PI / 8.0;
    let mode = Field::from_fn(g, |z| Complex64::from_polar(1.0, kx * z[0] + ky * z[1]));
    let s = 0.7;
    let got = sobolev_norm(&mode, s, Flavor::Homogeneous, DerivativeAxes::All);
    let expect = (kx * kx + ky * ky).powf(s / 2.0) * mode.l2_norm();
    assert!((got - expect).abs() < 1e-12 * expect);
}

#[test]
fn spacetime_norm_examples() {
    let g = grid_xy();
    let f = random_field(&g, 3);
    let t = triple("(5, 4, 3)");
    let u = Trajectory::sample(2.5, 11, |_| f.clone()).unwrap();
    let expect = 2.5f64.powf(0.2) * mixed_space_norm(&f, t.r, t.r_tilde);
    assert!((spacetime_norm(&u, &NormSpec::plain(&t)) - expect).abs() < 1e-12 * expect);
}

#[test]
fn free_gaussian_energy_norm() {
    let g = Arc::new(TorusGrid::cube(3, 20.0, 32, 2).unwrap());
    let f = Field::from_fn(g, |z| c((-0.5 * z.iter().map(|v| v * v).sum::<f64>()).exp()));
    let u = Trajectory::free(&f, FlowOrder::Schrodinger, 1.0, 9).unwrap();
    let n = spacetime_norm(&u, &NormSpec::plain(&triple("inf,2,2")));
    assert!((n - f.l2_norm()).abs() < 1e-8 * f.l2_norm());
}

#[test]
fn holder_consistency() {
    let g = grid_xy();
    let f = random_field(&g, 4);
    let two = ExtRational::integer(2);
    assert!((mixed_space_norm(&f, two, two) - spectral_l2_norm(&f)).abs() < 1e-10 * f.l2_norm());
}

#[test]
fn strichartz_quotient_energy_triple() {
    let g = Arc::new(TorusGrid::cube(3, 16.0, 32, 2).unwrap());
    let cut = SpectralCutoff::default();
    let f = lp_project(&random_field(&g, 5), 0, &cut);
    let params = EquationParams::new(3, 2, FlowOrder::Schrodinger, rat(1, 1), rat(3, 1)).unwrap();
    let q = strichartz_quotient(&f, &params, &triple("inf,2,2"), 1.0, 9).unwrap();
    assert!((q - 1.0).abs() < 1e-8, "{q}");
    assert!(strichartz_quotient(&Field::zeros(g), &params, &triple("inf,2,2"), 1.0, 9).is_err());
}

#[test]
fn strichartz_quotient_refinement() {
    // Same continuum datum sampled at n and 2n points per axis.
    let params = EquationParams::new(3, 2, FlowOrder::Schrodinger, rat(1, 1), rat(3, 1)).unwrap();
    let t = triple("(16/3, 4, 16/7)");
    let datum = |z: &[f64]| {
        let r2: f64 = z.iter().map(|v| v * v).sum();
        Complex64::from_polar((-r2 / 2.0).exp(), z[0] - 0.5 * z[2])
    };
    let q = |n| {
        let g = Arc::new(TorusGrid::cube(3, 16.0, n, 2).unwrap());
        strichartz_quotient(&Field::from_fn(g, datum), &params, &t, 1.0, 17).unwrap()
    };
    let (a, b) = (q(16), q(32));
    assert!((a / b - 1.0).abs() < 0.10, "{a} {b}");
}

fn trajectories(g: &Arc<TorusGrid>, seed: u64) -> Trajectory {
    let f = band_limited(g, 0.0, 3.0, seed);
    Trajectory::free(&f, FlowOrder::Schrodinger, 1.0, 5).unwrap()
}

#[test]
fn distance_axioms() {
    let g = grid_xy();
    let set = [triple("inf,2,2"), triple("4,3,3"), triple("16/3,4,16/7")];
    let (u, v, w) = (trajectories(&g, 6), trajectories(&g, 7), trajectories(&g, 8));
    assert_eq!(contraction_distance(&u, &u, &set).unwrap(), 0.0);
    let duv = contraction_distance(&u, &v, &set).unwrap();
    assert!((duv - contraction_distance(&v, &u, &set).unwrap()).abs() < 1e-14 * duv);
    let (dvw, duw) = (contraction_distance(&v, &w, &set).unwrap(), contraction_distance(&u, &w, &set).unwrap());
    assert!(duw <= duv + dvw);
    let zero = u.scaled(c(0.0));
    let d2 = contraction_distance(&u.scaled(c(2.0)), &u, &set).unwrap();
    let d0 = contraction_distance(&u, &zero, &set).unwrap();
    assert!((d2 - d0).abs() < 1e-13 * d0);
    let sup = set.iter().map(|t| spacetime_norm(&u, &NormSpec::plain(t))).fold(0.0, f64::max);
    assert!((d0 - sup).abs() < 1e-13 * sup);
    assert!(contraction_distance(&u, &v, &[]).is_err());
}

#[test]
fn distance_rejects_mismatched_samples() {
    let g = grid_xy();
    let f = random_field(&g, 9);
    let a = Trajectory::free(&f, FlowOrder::Schrodinger, 1.0, 5).unwrap();
    let b = Trajectory::free(&f, FlowOrder::Schrodinger, 1.0, 6).unwrap();
    assert!(contraction_distance(&a, &b, &[triple("inf,2,2")]).is_err());
}

#[test]
fn embedding_identity_case() {
    let g = grid_xy();
    let f = random_field(&g, 10);
    let e = ExtRational::integer(3);
    assert!(embedding_check(&f, 0.0, e, e, 2).unwrap() <= 1.0 + 1e-10);
}

/// Largest embedding ratio `W^{1, 16/7}_y -> L^16_y` seen over 100 random
/// band-limited fields on the 3D grid with split 2, frozen from a run.
const EMBEDDING_FAMILY_MAX: f64 = 0.2673;

#[test]
fn embedding_family_bounded() {
    let g = Arc::new(TorusGrid::cube(3, 12.0, 16, 2).unwrap());
    let (rt, target) = (ExtRational::new(16, 7), ExtRational::integer(16));
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let hi = 1.0 + (seed % 5) as f64;
        let f = band_limited(&g, 0.0, hi, 100 + seed);
        let r = embedding_check(&f, 1.0, rt, target, 2).unwrap();
        let r2 = embedding_check(&f.scaled(Complex64::new(-2.0, 3.0)), 1.0, rt, target, 2).unwrap();
        assert!((r - r2).abs() < 1e-12 * r);
        worst = worst.max(r);
    }
    assert!(worst.is_finite() && worst < EMBEDDING_FAMILY_MAX, "{worst}");
}

#[test]
fn partial_regularity_nesting() {
    // One sampled datum viewed with k = 1 and k = 2 y-axes, and with all axes.
    let g2 = Arc::new(TorusGrid::cube(3, 10.0, 16, 2).unwrap());
    let g1 = Arc::new(TorusGrid::cube(3, 10.0, 16, 1).unwrap());
    let s = 0.8;
    for seed in 0..5 {
        let f2 = band_limited(&g2, 0.0, 4.0, 200 + seed);
        let f1 = Field::from_samples(g1.clone(), f2.samples().to_vec()).unwrap();
        let a = sobolev_norm(&f1, s, Flavor::Inhomogeneous, DerivativeAxes::YOnly);
        let b = sobolev_norm(&f2, s, Flavor::Inhomogeneous, DerivativeAxes::YOnly);
        let full = sobolev_norm(&f2, s, Flavor::Inhomogeneous, DerivativeAxes::All);
        assert!(a <= b * (1.0 + 1e-12) && b <= full * (1.0 + 1e-12), "{a} {b} {full}");
    }
}

/// Largest `||f||_{L^r_x L^{r~}_y} / ||(sum_j |P_j f|^2)^{1/2}||_{L^r_x L^{r~}_y}`
/// seen over the test family, frozen from a run.
const SQUARE_FUNCTION_MAX: f64 = 1.1483;

#[test]
fn square_function_comparison() {
    let g = Arc::new(TorusGrid::cube(3, 2.0 * PI, 32, 2).unwrap());
    let cut = SpectralCutoff::default();
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let f = band_limited(&g, 1.0, 12.0, 300 + seed);
        let pieces: Vec<Field> = (0..=4).map(|j| lp_project(&f, j, &cut)).collect();
        let sq = Field::from_samples(
            g.clone(),
            (0..g.len())
                .map(|i| c(pieces.iter().map(|p| p.samples()[i].norm_sqr()).sum::<f64>().sqrt()))
                .collect(),
        )
        .unwrap();
        for (r, rt) in [(4, 3), (3, 3), (6, 4)] {
            let (r, rt) = (ExtRational::integer(r), ExtRational::integer(rt));
            worst = worst.max(mixed_space_norm(&f, r, rt) / mixed_space_norm(&sq, r, rt));
        }
    }
    assert!(worst < SQUARE_FUNCTION_MAX, "{worst}");
}

#[test]
fn time_quadrature_converges() {
    let g = Arc::new(TorusGrid::cube(3, 12.0, 16, 2).unwrap());
    let f = band_limited(&g, 0.0, 2.5, 11);
    let t = triple("(16/3, 4, 16/7)");
    let n = |m| spacetime_norm(&Trajectory::free(&f, FlowOrder::Schrodinger, 1.0, m).unwrap(), &NormSpec::plain(&t));
    let (a, b) = (n(65), n(129));
    assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
}

#[test]
fn prefix_restricts_horizon() {
    let g = grid_xy();
    let u = trajectories(&g, 12);
    let h = u.prefix(3).unwrap();
    assert_eq!(h.horizon(), 0.5);
    assert_eq!(h.weights(), &[0.125, 0.25, 0.125]);
    assert!(u.prefix(1).is_err() && u.prefix(6).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mixed_norm_homogeneous(seed in 0u64..500, a in 0.01f64..100.0, r in 1i128..8, rt in 1i128..8) {
        let g = grid_xy();
        let f = random_field(&g, seed);
        let (r, rt) = (ExtRational::integer(r), ExtRational::integer(rt));
        let n = mixed_space_norm(&f, r, rt);
        prop_assert!((mixed_space_norm(&f.scaled(c(a)), r, rt) - a * n).abs() < 1e-12 * a * n);
    }

    #[test]
    fn mixed_norm_triangle(s1 in 0u64..500, s2 in 500u64..1000, r in 1i128..8, rt in 1i128..8) {
        let g = grid_xy();
        let (f, h) = (random_field(&g, s1), random_field(&g, s2));
        let (r, rt) = (ExtRational::integer(r), ExtRational::integer(rt));
        let lhs = mixed_space_norm(&f.add(&h).unwrap(), r, rt);
        prop_assert!(lhs <= (mixed_space_norm(&f, r, rt) + mixed_space_norm(&h, r, rt)) * (1.0 + 1e-12));
    }
}
