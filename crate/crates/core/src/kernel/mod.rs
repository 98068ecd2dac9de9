//! The frequency-localized dispersive kernel
//! `K(z, t) = (2 pi)^{-N} int e^{i z.zeta} e^{it|zeta|^sigma} psi(zeta) d zeta`,
//! its partial Fourier transform in `y`, their decay in `t`, and the
//! Hessians of the phases `|(xi, eta)|^sigma`.

mod decay;
mod hessian;
mod quadrature;
mod value;

pub use decay::{decay_fit, least_squares_slope, log_spaced, DecayFitReport, DecaySample, NormMode};
pub use hessian::{finite_difference_hessian, hessian_of_phase, hessian_rank, PhaseSpec};
pub use value::{
    kernel_scale, kernel_value, kernel_value_radial, l2_eta_aggregate, partial_kernel_value,
    partial_kernel_value_radial, REFINEMENT_TOL,
};
