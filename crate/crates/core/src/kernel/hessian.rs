use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};
use crate::exponents::FlowOrder;

/// Phase `phi(xi) = |(xi, eta)|^sigma` with `eta` frozen; an empty `eta`
/// gives the full phase on `R^{dim xi}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpec {
    flow: FlowOrder,
    eta: Vec<f64>,
}

impl PhaseSpec {
    pub fn new(flow: FlowOrder, eta: Vec<f64>) -> Result<Self> {
        let e = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(e <= 2.0) {
            return invalid(format!("frozen |eta| = {e} exceeds 2"));
        }
        Ok(PhaseSpec { flow, eta })
    }

    pub fn full(flow: FlowOrder) -> Self {
        PhaseSpec { flow, eta: Vec::new() }
    }

    pub fn flow(&self) -> FlowOrder {
        self.flow
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    fn eta_sq(&self) -> f64 {
        self.eta.iter().map(|v| v * v).sum()
    }

    pub fn value(&self, xi: &[f64]) -> f64 {
        let rho_sq = xi.iter().map(|v| v * v).sum::<f64>() + self.eta_sq();
        match self.flow {
            FlowOrder::Schrodinger => rho_sq,
            FlowOrder::Wave => rho_sq.sqrt(),
        }
    }
}

const ANNULUS_SLACK: f64 = 1e-12;

/// Closed-form Hessian of `phi` in `xi` on the annulus `1/2 <= |(xi, eta)| <= 2`.
pub fn hessian_of_phase(spec: &PhaseSpec, xi: &[f64]) -> Result<DMatrix<f64>> {
    let d = xi.len();
    if d == 0 {
        return invalid("xi must have at least one component");
    }
    let rho_sq = xi.iter().map(|v| v * v).sum::<f64>() + spec.eta_sq();
    let rho = rho_sq.sqrt();
    if rho < 0.5 - ANNULUS_SLACK || rho > 2.0 + ANNULUS_SLACK {
        return invalid(format!("|(xi, eta)| = {rho} is outside the annulus [1/2, 2]"));
    }
    Ok(match spec.flow {
        FlowOrder::Schrodinger => DMatrix::identity(d, d) * 2.0,
        FlowOrder::Wave => {
            let c = rho_sq.powf(-1.5);
            DMatrix::from_fn(d, d, |i, j| {
                let delta = if i == j { rho_sq } else { 0.0 };
                c * (delta - xi[i] * xi[j])
            })
        }
    })
}

/// Central second differences of `phi` with step `h`.
pub fn finite_difference_hessian(spec: &PhaseSpec, xi: &[f64], h: f64) -> DMatrix<f64> {
    let d = xi.len();
    let mut p = xi.to_vec();
    let mut eval = |di: f64, i: usize, dj: f64, j: usize| {
        p.copy_from_slice(xi);
        p[i] += di;
        p[j] += dj;
        spec.value(&p)
    };
    DMatrix::from_fn(d, d, |i, j| {
        (eval(h, i, h, j) - eval(h, i, -h, j) - eval(-h, i, h, j) + eval(-h, i, -h, j)) / (4.0 * h * h)
    })
}

/// Number of eigenvalues with magnitude above `tol` times the largest.
pub fn hessian_rank(spec: &PhaseSpec, xi: &[f64], tol: f64) -> Result<usize> {
    let h = hessian_of_phase(spec, xi)?;
    let eig = SymmetricEigen::new(h).eigenvalues;
    let top = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return Ok(0);
    }
    Ok(eig.iter().filter(|v| v.abs() > tol * top).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_bound_enforced() {
        assert!(PhaseSpec::new(FlowOrder::Wave, vec![1.5, 1.5]).is_err());
        assert!(PhaseSpec::new(FlowOrder::Wave, vec![2.0]).is_ok());
    }

    #[test]
    fn outside_annulus_rejected() {
        let s = PhaseSpec::full(FlowOrder::Schrodinger);
        assert!(hessian_of_phase(&s, &[0.1, 0.1]).is_err());
        assert!(hessian_of_phase(&s, &[3.0, 0.0]).is_err());
        assert!(hessian_of_phase(&s, &[0.5, 0.0]).is_ok());
    }
}
