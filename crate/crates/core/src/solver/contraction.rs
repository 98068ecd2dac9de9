use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{wave_packets, PacketSpec};
use super::duhamel::CauchyData;
use super::nonlinearity::Nonlinearity;
use crate::error::{invalid, Error, Result};
use crate::exponents::{
    rational_to_f64, select_schrodinger_exponents, select_wave_exponents, EpsilonPick, EquationParams,
    ExponentTriple, ExtRational, FlowOrder, Rational, SelectionResult,
};
use crate::norms::{contraction_distance, spacetime_norm, trapezoid, NormSpec, Trajectory};
use crate::spectral::{DerivativeAxes, Flavor, TorusGrid};

/// Regularity the contraction works with: `s` for NLS, `s - 1/2` for NLW.
pub fn working_regularity(params: &EquationParams) -> Rational {
    match params.flow {
        FlowOrder::Schrodinger => params.s,
        FlowOrder::Wave => params.s - Rational::new(1, 2),
    }
}

/// Exponent selection matching the equation (`k = 2` NLS, `k = 1` NLW).
pub fn select_for(params: &EquationParams, pick: EpsilonPick) -> Result<SelectionResult> {
    match params.flow {
        FlowOrder::Schrodinger => {
            if params.k != 2 {
                return invalid(format!("the NLS contraction uses k = 2, got {}", params.k));
            }
            select_schrodinger_exponents(params.n, params.s, params.p, pick)
        }
        FlowOrder::Wave => {
            if params.k != 1 {
                return invalid(format!("the NLW contraction uses k = 1, got {}", params.k));
            }
            select_wave_exponents(params.n, working_regularity(params), params.p, pick)
        }
    }
}

/// Corner triples of the class plus the selected triple.
///
/// NLS: `(inf, 2, 2)`, `(4, 2N/(N-1), 2N/(N-1))`, selected.
/// NLW: `(inf, 2N/(N-1), 2N/(N-1))`, selected.
pub fn default_triples(params: &EquationParams, sel: &SelectionResult) -> Vec<ExponentTriple> {
    let n = params.n as i128;
    let diag = ExtRational::new(2 * n, n - 1);
    let mut out = match params.flow {
        FlowOrder::Schrodinger => vec![
            ExponentTriple { q: ExtRational::Infinite, r: ExtRational::integer(2), r_tilde: ExtRational::integer(2) },
            ExponentTriple { q: ExtRational::integer(4), r: diag, r_tilde: diag },
        ],
        FlowOrder::Wave => vec![ExponentTriple { q: ExtRational::Infinite, r: diag, r_tilde: diag }],
    };
    if !out.contains(&sel.triple) {
        out.push(sel.triple);
    }
    out
}

/// `max_triples ||<nabla_y>^{s} u||_{L^q L^r L^{r~}}`, the norm of the
/// contraction ball.
pub fn ball_norm(u: &Trajectory, triples: &[ExponentTriple], s_y: f64) -> f64 {
    triples
        .iter()
        .map(|t| spacetime_norm(u, &NormSpec::y_sobolev(t, s_y)))
        .fold(0.0, f64::max)
}

/// Size of the data in the space the theorem is stated in:
/// `||<nabla_y>^s f||_{L^2}` (NLS) or
/// `||<d_y>^{s'} f||_{H^{1/2}} + ||<d_y>^{s'} g||_{H^{-1/2}}` (NLW, homogeneous).
pub fn data_norm(data: &CauchyData, s_y: f64) -> f64 {
    use crate::spectral::fractional_derivative as fd;
    match data {
        CauchyData::Schrodinger { f } => fd(f, s_y, DerivativeAxes::YOnly, Flavor::Inhomogeneous).l2_norm(),
        CauchyData::Wave { f, g } => {
            let wf = fd(f, s_y, DerivativeAxes::YOnly, Flavor::Inhomogeneous);
            let wg = fd(g, s_y, DerivativeAxes::YOnly, Flavor::Inhomogeneous);
            fd(&wf, 0.5, DerivativeAxes::All, Flavor::Homogeneous).l2_norm()
                + fd(&wg, -0.5, DerivativeAxes::All, Flavor::Homogeneous).l2_norm()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Ball radius `A`; absent for plain Picard runs.
    #[serde(rename = "A")]
    pub radius: Option<f64>,
    /// `d(Phi u, Phi v) / d(u, v)` samples, or successive gap ratios for Picard runs.
    pub ratios: Vec<f64>,
    pub budget_lhs: Option<f64>,
    pub budget_rhs: Option<f64>,
    pub converged: bool,
    pub iterates_gap: Vec<f64>,
    pub beta: f64,
    /// Measured free-evolution constant `C~`.
    pub strichartz_constant: Option<f64>,
    /// Measured Duhamel constant `C^`.
    pub duhamel_constant: Option<f64>,
    pub data_norm: f64,
    pub triples: Vec<ExponentTriple>,
    /// `d(Phi(u*), u*)` for the final Picard iterate.
    pub fixed_point_residual: Option<f64>,
}

impl ContractionReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub time_samples: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Triples for the distance; empty selects [`default_triples`].
    pub triples: Vec<ExponentTriple>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { time_samples: 17, max_iter: 50, tol: 1e-10, triples: Vec::new() }
    }
}

fn time_template(data: &CauchyData, horizon: f64, samples: usize) -> Result<Trajectory> {
    let (times, weights) = trapezoid(horizon, samples)?;
    let f = data.primary();
    Trajectory::new(horizon, times, weights, vec![f.clone(); samples])
}

fn resolve_triples(params: &EquationParams, requested: &[ExponentTriple]) -> Result<(SelectionResult, Vec<ExponentTriple>)> {
    let sel = select_for(params, EpsilonPick::Midpoint)?;
    let triples = if requested.is_empty() { default_triples(params, &sel) } else { requested.to_vec() };
    Ok((sel, triples))
}

/// Picard iteration `u^0 = free evolution`, `u^{n+1} = Phi(u^n)` until the
/// gap `d(u^{n+1}, u^n)` drops below `tol`.
///
/// Returns [`Error::Diverged`] when the gap grows three times in a row.
pub fn picard_solve(
    data: &CauchyData,
    nl: &Nonlinearity,
    params: &EquationParams,
    horizon: f64,
    cfg: &SolverConfig,
) -> Result<(Trajectory, ContractionReport)> {
    let (sel, triples) = resolve_triples(params, &cfg.triples)?;
    let template = time_template(data, horizon, cfg.time_samples)?;
    let mut u = data.free(&template)?;
    let mut gaps: Vec<f64> = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let next = data.duhamel(&u, nl)?;
        let gap = contraction_distance(&next, &u, &triples)?;
        gaps.push(gap);
        u = next;
        if gap < cfg.tol {
            converged = true;
            break;
        }
        let n = gaps.len();
        if n >= 4 && gaps[n - 3] > gaps[n - 4] && gaps[n - 2] > gaps[n - 3] && gaps[n - 1] > gaps[n - 2] {
            return Err(Error::Diverged { gaps });
        }
    }
    let residual = contraction_distance(&data.duhamel(&u, nl)?, &u, &triples)?;
    let ratios = gaps.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
    let s_y = rational_to_f64(&working_regularity(params));
    let report = ContractionReport {
        horizon,
        radius: None,
        ratios,
        budget_lhs: None,
        budget_rhs: None,
        converged,
        iterates_gap: gaps,
        beta: rational_to_f64(&sel.beta),
        strichartz_constant: None,
        duhamel_constant: None,
        data_norm: data_norm(data, s_y),
        triples,
        fixed_point_residual: Some(residual),
    };
    Ok((u, report))
}

/// Whether the gap sequence decays geometrically at the end: every ratio
/// among the final three is at most `0.9`.
pub fn gaps_geometric(gaps: &[f64]) -> bool {
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[1] / w[0]).collect();
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    !tail.is_empty() && tail.iter().all(|&r| r <= 0.9)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub time_samples: usize,
    pub seed: u64,
    pub triples: Vec<ExponentTriple>,
    /// Shape of the random data used to populate the ball.
    pub packets: PacketSpec,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions { time_samples: 17, seed: 0, triples: Vec::new(), packets: PacketSpec::default() }
    }
}

fn random_free(
    data: &CauchyData,
    grid: &std::sync::Arc<TorusGrid>,
    template: &Trajectory,
    packets: &PacketSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory> {
    let h = wave_packets(grid, packets, rng)?;
    let d = match data {
        CauchyData::Schrodinger { .. } => CauchyData::schrodinger(h),
        CauchyData::Wave { .. } => CauchyData::wave(h, wave_packets(grid, packets, rng)?)?.0,
    };
    d.free(template)
}

/// Sample pairs in the ball `X(T, A)`, `A = 2 C~ ||data||`, and measure
/// contraction ratios and the budget `C~ ||data|| + C^ T^beta A^p <= A`.
///
/// Pairs are free evolutions of independent random data scaled into the
/// ball, plus one pair at distance about `A` and one at about `A/100`.
pub fn contraction_experiment(
    data: &CauchyData,
    nl: &Nonlinearity,
    params: &EquationParams,
    horizon: f64,
    n_pairs: usize,
    opts: &ExperimentOptions,
) -> Result<ContractionReport> {
    if n_pairs < 2 {
        return invalid("need at least two sample pairs");
    }
    let (sel, triples) = resolve_triples(params, &opts.triples)?;
    let beta = rational_to_f64(&sel.beta);
    let s_y = rational_to_f64(&working_regularity(params));
    let template = time_template(data, horizon, opts.time_samples)?;
    let grid = data.primary().grid().clone();
    let free = data.free(&template)?;
    let size = data_norm(data, s_y);
    if size == 0.0 {
        return invalid("data has zero norm");
    }
    let c_tilde = ball_norm(&free, &triples, s_y) / size;
    let radius = 2.0 * c_tilde * size;
    let t_beta = horizon.powf(beta);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let unit = |rng: &mut ChaCha8Rng| -> Result<Trajectory> {
        let w = random_free(data, &grid, &template, &opts.packets, rng)?;
        let n = ball_norm(&w, &triples, s_y);
        Ok(w.scaled(Complex64::new(1.0 / n, 0.0)))
    };
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut pairs = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs - 2 {
        let (a, b) = (unit(&mut rng)?, unit(&mut rng)?);
        let (ta, tb) = (rng.random_range(0.2..1.0), rng.random_range(0.2..1.0));
        pairs.push((a.scaled(c(ta * radius)), b.scaled(c(tb * radius))));
    }
    let w1 = unit(&mut rng)?;
    let w2 = unit(&mut rng)?;
    pairs.push((w1.scaled(c(radius)), w1.scaled(c(-radius))));
    let near_u = w1.scaled(c(0.99 * radius));
    let near_v = w1.scaled(c(0.98 * radius)).add(&w2.scaled(c(0.01 * radius)))?;
    pairs.push((near_u, near_v));

    let mut ratios = Vec::with_capacity(n_pairs);
    let mut c_hat: f64 = 0.0;
    for (u, v) in &pairs {
        let pu = data.duhamel(u, nl)?;
        let pv = data.duhamel(v, nl)?;
        let d_uv = contraction_distance(u, v, &triples)?;
        if d_uv > 0.0 {
            ratios.push(contraction_distance(&pu, &pv, &triples)? / d_uv);
        }
        for (w, pw) in [(u, &pu), (v, &pv)] {
            let nw = ball_norm(w, &triples, s_y);
            if nw > 0.0 {
                let inhom = ball_norm(&pw.sub(&free)?, &triples, s_y);
                c_hat = c_hat.max(inhom / (t_beta * nw.powf(nl.p)));
            }
        }
    }
    let lhs = c_tilde * size + c_hat * t_beta * radius.powf(nl.p);
    let converged = ratios.iter().all(|&r| r <= 0.5) && lhs <= radius;
    Ok(ContractionReport {
        horizon,
        radius: Some(radius),
        ratios,
        budget_lhs: Some(lhs),
        budget_rhs: Some(radius),
        converged,
        iterates_gap: Vec::new(),
        beta,
        strichartz_constant: Some(c_tilde),
        duhamel_constant: Some(c_hat),
        data_norm: size,
        triples,
        fixed_point_residual: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub converged: bool,
    pub max_ratio: f64,
    pub budget_lhs: f64,
    pub budget_rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectionOutcome {
    pub report: Option<ContractionReport>,
    pub history: Vec<BisectionStep>,
}

/// Halve `T` from `t_start` until the experiment converges, then bisect
/// between the last failing and first passing horizon.
pub fn find_contraction_time(
    data: &CauchyData,
    nl: &Nonlinearity,
    params: &EquationParams,
    t_start: f64,
    n_pairs: usize,
    opts: &ExperimentOptions,
    max_halvings: usize,
    bisection_steps: usize,
) -> Result<BisectionOutcome> {
    let mut history = Vec::new();
    let run = |t: f64, history: &mut Vec<BisectionStep>| -> Result<ContractionReport> {
        let r = contraction_experiment(data, nl, params, t, n_pairs, opts)?;
        history.push(BisectionStep {
            horizon: t,
            converged: r.converged,
            max_ratio: r.max_ratio(),
            budget_lhs: r.budget_lhs.unwrap_or(f64::NAN),
            budget_rhs: r.budget_rhs.unwrap_or(f64::NAN),
        });
        Ok(r)
    };
    let mut t = t_start;
    let mut good = None;
    for _ in 0..=max_halvings {
        let r = run(t, &mut history)?;
        if r.converged {
            good = Some(r);
            break;
        }
        t *= 0.5;
    }
    let Some(mut best) = good else {
        return Ok(BisectionOutcome { report: None, history });
    };
    if t < t_start {
        let (mut lo, mut hi) = (t, 2.0 * t);
        for _ in 0..bisection_steps {
            let mid = 0.5 * (lo + hi);
            let r = run(mid, &mut history)?;
            if r.converged {
                lo = mid;
                best = r;
            } else {
                hi = mid;
            }
        }
    }
    Ok(BisectionOutcome { report: Some(best), history })
}

/// `|| <nabla_y>^s F(u) ||_{L^{q'} L^{r'} L^{r~'}} / (T^beta ||u||^p_{L^q L^r W^{s,r~}})`
/// with `(q, r, r~)` the selected triple.
pub fn nonlinear_estimate_check(
    u: &Trajectory,
    nl: &Nonlinearity,
    params: &EquationParams,
    sel: &SelectionResult,
    horizon: f64,
) -> Result<f64> {
    if (u.horizon() - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return invalid(format!("trajectory horizon {} differs from T = {horizon}", u.horizon()));
    }
    let s_y = rational_to_f64(&working_regularity(params));
    let t = sel.triple;
    let dual = ExponentTriple { q: t.q.conjugate()?, r: t.r.conjugate()?, r_tilde: t.r_tilde.conjugate()? };
    let fu = u.map(|s| nl.evaluate(s))?;
    let lhs = spacetime_norm(&fu, &NormSpec::y_sobolev(&dual, s_y));
    if lhs == 0.0 {
        return Ok(0.0);
    }
    let rhs = spacetime_norm(u, &NormSpec::y_sobolev(&t, s_y));
    Ok(lhs / (horizon.powf(rational_to_f64(&sel.beta)) * rhs.powf(nl.p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::rat;

    #[test]
    fn default_triples_include_selection() {
        let p = EquationParams::new(3, 2, FlowOrder::Schrodinger, rat(1, 1), rat(3, 1)).unwrap();
        let sel = select_for(&p, EpsilonPick::Midpoint).unwrap();
        let t = default_triples(&p, &sel);
        assert_eq!(t.len(), 3);
        assert!(t.contains(&sel.triple));
        assert!(t.iter().all(|t| crate::exponents::in_class_s(3, 2, t)));

        let w = EquationParams::new(2, 1, FlowOrder::Wave, rat(1, 1), rat(4, 1)).unwrap();
        let sel = select_for(&w, EpsilonPick::Midpoint).unwrap();
        let t = default_triples(&w, &sel);
        assert!(t.iter().all(|t| crate::exponents::in_class_w(2, 1, t)));
    }

    #[test]
    fn gap_geometry() {
        assert!(gaps_geometric(&[1.0, 0.1, 0.01, 0.001]));
        assert!(!gaps_geometric(&[1.0, 0.1, 0.095, 0.001]));
        assert!(!gaps_geometric(&[1.0]));
    }

    #[test]
    fn wrong_split_rejected() {
        let p = EquationParams::new(3, 1, FlowOrder::Schrodinger, rat(1, 1), rat(3, 1)).unwrap();
        assert!(select_for(&p, EpsilonPick::Midpoint).is_err());
    }
}
