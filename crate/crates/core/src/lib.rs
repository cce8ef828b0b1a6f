//! Band structure of a rectangular lattice of δ-coupled edges, and of the same
//! lattice with one chain of vertex couplings changed from `γ` to `γ̃`.
//!
//! Everything except [`oracle`] is generic over the floating-point type; the
//! aliases below fix it to `f64`.

pub mod dispersion;
pub mod error;
pub mod fiber;
pub mod interval;
pub mod measure;
pub mod oracle;
pub mod perturbed;
pub mod rational;
pub mod roots;
pub mod scalar;
pub mod types;
pub mod unperturbed;

pub use dispersion::{
    bc_membership, edge_curve_g, f_hat_tau, f_plus_minus, f_tau, gamma_star, interior_gammas, negative_edge_limits,
    type1_edge_limits, type2_edge_limits, xi_functions, BcMembership, Branch, EdgeConstants,
};
pub use error::{Result, SpectrumError};
pub use fiber::{
    fiber_band_membership, fiber_discrete_eigenvalue, mode_profile, transfer_eigenvalues, FiberEigenvalue, ModeProfile,
};
pub use interval::merge_intervals;
pub use measure::{s_measure, sigma_measure, xi_split, Estimator, MeasureReport};
pub use perturbed::{
    classify_regime, edge_touch_predictions, new_bands_in_gaps, s_membership, NewBand, RegimeCase, RegimeReport,
    TouchRule,
};
pub use roots::bracket_root;
pub use scalar::Scalar;
pub use types::{BandSet, EnergyInterval, FiberParams, LatticeParams, MomentumClassification, SpectralPoint};
pub use unperturbed::{compute_bands, flat_bands, gaps_in_window, negative_band, EdgeKind, GapRecord};

pub type Real = f64;
pub type Lattice = LatticeParams<Real>;
pub type Fiber = FiberParams<Real>;
pub type Point = SpectralPoint<Real>;
pub type Interval = EnergyInterval<Real>;
pub type Bands = BandSet<Real>;
pub type Gap = GapRecord<Real>;
pub type Eigenvalue = FiberEigenvalue<Real>;
pub type Band = NewBand<Real>;
pub type Regime = RegimeReport<Real>;
