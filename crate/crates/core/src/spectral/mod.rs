//! Periodic-grid spectral machinery: unitary DFT, Fourier multipliers,
//! the dyadic cutoff and Littlewood-Paley projectors, fractional
//! derivatives and the free propagators `e^{it|D|^sigma}`.

mod cutoff;
mod field;
mod grid;
mod ops;

pub use cutoff::{build_cutoff, SpectralCutoff};
pub use field::{read_snapshot, spectral_l2_norm, transform, write_snapshot, Direction, Field};
pub use grid::{GridAxis, TorusGrid};
pub(crate) use field::fft_nd;
pub use ops::{
    apply_multiplier, derivative_symbol, fractional_derivative, from_symbol, lp_project, propagate, rescale_field,
    DerivativeAxes, Flavor,
};
