use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exponents::{ExtRational, Rational};
use crate::norms::lebesgue_norm;
use crate::spectral::{fractional_derivative, DerivativeAxes, Field, Flavor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityForm {
    /// `lambda |u|^{p-1} u`.
    PowerPreserving,
    /// `lambda |u|^p`.
    PowerModulus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub p: f64,
    pub lambda: f64,
    pub form: NonlinearityForm,
}

impl Nonlinearity {
    pub fn new(p: f64, lambda: f64, form: NonlinearityForm) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return invalid(format!("need p > 1, got {p}"));
        }
        if !lambda.is_finite() {
            return invalid("coefficient must be finite");
        }
        Ok(Nonlinearity { p, lambda, form })
    }

    pub fn linear(self) -> Self {
        Nonlinearity { lambda: 0.0, ..self }
    }

    pub fn value(&self, u: Complex64) -> Complex64 {
        let m = u.norm();
        if m == 0.0 {
            return Complex64::default();
        }
        match self.form {
            NonlinearityForm::PowerPreserving => u * (self.lambda * m.powf(self.p - 1.0)),
            NonlinearityForm::PowerModulus => Complex64::new(self.lambda * m.powf(self.p), 0.0),
        }
    }

    /// Wirtinger derivatives `(dF/du, dF/du-bar)`.
    pub fn wirtinger(&self, u: Complex64) -> (Complex64, Complex64) {
        let m = u.norm();
        if m == 0.0 {
            return (Complex64::default(), Complex64::default());
        }
        let (p, l) = (self.p, self.lambda);
        match self.form {
            NonlinearityForm::PowerPreserving => (
                Complex64::new(0.5 * l * (p + 1.0) * m.powf(p - 1.0), 0.0),
                u * u * (0.5 * l * (p - 1.0) * m.powf(p - 3.0)),
            ),
            NonlinearityForm::PowerModulus => {
                let c = 0.5 * l * p * m.powf(p - 2.0);
                (u.conj() * c, u * c)
            }
        }
    }

    /// `|F'(u)| = |dF/du| + |dF/du-bar|`, the operator norm of the real
    /// differential.
    pub fn derivative_norm(&self, u: Complex64) -> f64 {
        let (a, b) = self.wirtinger(u);
        a.norm() + b.norm()
    }

    pub fn evaluate(&self, u: &Field) -> Field {
        u.map(|v| self.value(v))
    }
}

/// Range of `|u| |F'(u)| / |F(u)|` over the nonzero samples of `u`.
pub fn structural_check(nl: &Nonlinearity, u: &Field) -> Option<(f64, f64)> {
    let ratios: Vec<f64> = u
        .samples()
        .iter()
        .filter(|v| v.norm() > 1e-300)
        .map(|&v| v.norm() * nl.derivative_norm(v) / nl.value(v).norm())
        .filter(|r| r.is_finite())
        .collect();
    if ratios.is_empty() {
        return None;
    }
    Some((ratios.iter().copied().fold(f64::MAX, f64::min), ratios.iter().copied().fold(0.0, f64::max)))
}

/// `max |F(u) - F(v)| / ((|u|^{p-1} + |v|^{p-1}) |u - v|)` over samples with
/// denominator at least `1e-14`.
pub fn lipschitz_check(nl: &Nonlinearity, u: &Field, v: &Field) -> Result<f64> {
    if !u.same_grid(v) {
        return Err(crate::Error::GridMismatch("lipschitz_check on different grids".into()));
    }
    let e = nl.p - 1.0;
    Ok(u.samples()
        .iter()
        .zip(v.samples())
        .filter_map(|(&a, &b)| {
            let den = (a.norm().powf(e) + b.norm().powf(e)) * (a - b).norm();
            (den >= 1e-14).then(|| (nl.value(a) - nl.value(b)).norm() / den)
        })
        .fold(0.0, f64::max))
}

/// `|| |nabla|^s F(u) ||_{L^c} / (||u||^{p-1}_{L^{a(p-1)}} || |nabla|^s u ||_{L^b})`
/// with `1/c = 1/a + 1/b`.
pub fn chain_rule_check(
    nl: &Nonlinearity,
    u: &Field,
    s: f64,
    a: Rational,
    b: Rational,
    c: Rational,
) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return invalid(format!("need 0 < s <= 1, got {s}"));
    }
    let one = Rational::from_integer(1);
    if a <= one || b <= one || c <= one {
        return invalid("exponents must exceed 1");
    }
    if c.recip() != a.recip() + b.recip() {
        return invalid(format!("1/{c} != 1/{a} + 1/{b}"));
    }
    let to_f = |x: Rational| ExtRational::Finite(x).to_f64();
    let lhs = lebesgue_norm(
        &fractional_derivative(&nl.evaluate(u), s, DerivativeAxes::All, Flavor::Homogeneous),
        to_f(c),
    );
    let base = lebesgue_norm(u, to_f(a) * (nl.p - 1.0)).powf(nl.p - 1.0);
    let grad = lebesgue_norm(&fractional_derivative(u, s, DerivativeAxes::All, Flavor::Homogeneous), to_f(b));
    if base * grad == 0.0 {
        return invalid("denominator vanishes");
    }
    Ok(lhs / (base * grad))
}
