//! Domain types: lattice parameters, spectral points, fibers, intervals.

use serde::Serialize;

use crate::error::{Result, SpectrumError};
use crate::scalar::Scalar;

/// Edge lengths `a`, `b`, coupling `gamma` and the optional perturbed coupling
/// `gamma_tilde` on the distinguished vertex chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeParams<T> {
    a: T,
    b: T,
    gamma: T,
    gamma_tilde: Option<T>,
}

impl<T: Scalar> LatticeParams<T> {
    pub fn new(a: T, b: T, gamma: T) -> Result<Self> {
        if !(a.is_finite() && a > T::zero()) {
            return Err(SpectrumError::InvalidParameter(format!("a must be positive and finite, got {a}")));
        }
        if !(b.is_finite() && b > T::zero()) {
            return Err(SpectrumError::InvalidParameter(format!("b must be positive and finite, got {b}")));
        }
        if !gamma.is_finite() {
            return Err(SpectrumError::InvalidParameter(format!("gamma must be finite, got {gamma}")));
        }
        Ok(Self { a, b, gamma, gamma_tilde: None })
    }

    pub fn perturbed(a: T, b: T, gamma: T, gamma_tilde: T) -> Result<Self> {
        Self::new(a, b, gamma)?.with_gamma_tilde(gamma_tilde)
    }

    pub fn with_gamma_tilde(mut self, gamma_tilde: T) -> Result<Self> {
        if !gamma_tilde.is_finite() {
            return Err(SpectrumError::InvalidParameter(format!(
                "gamma_tilde must be finite, got {gamma_tilde}"
            )));
        }
        self.gamma_tilde = Some(gamma_tilde);
        Ok(self)
    }

    /// Same lattice with the perturbation removed.
    pub fn unperturbed(&self) -> Self {
        Self { gamma_tilde: None, ..*self }
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn gamma_tilde(&self) -> Option<T> {
        self.gamma_tilde
    }

    pub fn require_gamma_tilde(&self) -> Result<T> {
        self.gamma_tilde.ok_or(SpectrumError::MissingGammaTilde)
    }

    pub fn max_edge(&self) -> T {
        self.a.max(self.b)
    }

    pub fn min_edge(&self) -> T {
        self.a.min(self.b)
    }
}

/// A point on the energy axis carried by its momentum (`E = k²`),
/// decay rate (`E = −κ²`) or the threshold `E = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "sign", rename_all = "snake_case")]
pub enum SpectralPoint<T> {
    Positive { k: T },
    Zero,
    Negative { kappa: T },
}

impl<T: Scalar> SpectralPoint<T> {
    pub fn positive(k: T) -> Result<Self> {
        if k.is_finite() && k > T::zero() {
            Ok(Self::Positive { k })
        } else {
            Err(SpectrumError::InvalidParameter(format!("momentum must be positive, got {k}")))
        }
    }

    pub fn negative(kappa: T) -> Result<Self> {
        if kappa.is_finite() && kappa > T::zero() {
            Ok(Self::Negative { kappa })
        } else {
            Err(SpectrumError::InvalidParameter(format!("decay rate must be positive, got {kappa}")))
        }
    }

    pub fn from_energy(e: T) -> Self {
        if e > T::zero() {
            Self::Positive { k: e.sqrt() }
        } else if e < T::zero() {
            Self::Negative { kappa: (-e).sqrt() }
        } else {
            Self::Zero
        }
    }

    /// `q > 0` is a momentum, `q < 0` a decay rate `κ = −q`.
    pub fn from_signed_momentum(q: T) -> Self {
        if q > T::zero() {
            Self::Positive { k: q }
        } else if q < T::zero() {
            Self::Negative { kappa: -q }
        } else {
            Self::Zero
        }
    }

    pub fn signed_momentum(&self) -> T {
        match *self {
            Self::Positive { k } => k,
            Self::Zero => T::zero(),
            Self::Negative { kappa } => -kappa,
        }
    }

    pub fn energy(&self) -> T {
        match *self {
            Self::Positive { k } => k * k,
            Self::Zero => T::zero(),
            Self::Negative { kappa } => -(kappa * kappa),
        }
    }
}

/// Energy ↦ signed momentum.
pub fn signed_momentum_of<T: Scalar>(e: T) -> T {
    if e >= T::zero() {
        e.sqrt()
    } else {
        -(-e).sqrt()
    }
}

/// Signed momentum ↦ energy.
pub fn energy_of_signed<T: Scalar>(q: T) -> T {
    if q >= T::zero() {
        q * q
    } else {
        -(q * q)
    }
}

/// Quasimomenta of a fiber; `tau = cos(theta2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberParams<T> {
    pub theta2: T,
    pub tau: T,
    pub theta1: Option<T>,
    pub tau1: Option<T>,
}

impl<T: Scalar> FiberParams<T> {
    pub fn new(theta2: T) -> Result<Self> {
        check_quasimomentum(theta2)?;
        Ok(Self { theta2, tau: theta2.cos(), theta1: None, tau1: None })
    }

    /// Fiber with `theta2 = arccos(tau) ∈ [0, π]`.
    pub fn from_tau(tau: T) -> Result<Self> {
        if !(tau.abs() <= T::one()) {
            return Err(SpectrumError::InvalidParameter(format!("tau must lie in [-1, 1], got {tau}")));
        }
        Ok(Self { theta2: tau.acos(), tau, theta1: None, tau1: None })
    }

    pub fn with_theta1(mut self, theta1: T) -> Result<Self> {
        check_quasimomentum(theta1)?;
        self.theta1 = Some(theta1);
        self.tau1 = Some(theta1.cos());
        Ok(self)
    }
}

fn check_quasimomentum<T: Scalar>(theta: T) -> Result<()> {
    let pi = T::PI();
    // Accept values rounded just past ±π by the caller's arithmetic.
    let slack = pi * T::epsilon() * T::lit(4.0);
    if theta.is_finite() && theta.abs() <= pi + slack {
        Ok(())
    } else {
        Err(SpectrumError::InvalidParameter(format!("quasimomentum must lie in [-pi, pi], got {theta}")))
    }
}

/// Position of a momentum relative to `Ξ_a = {sin ka = 0}` and `Ξ_b = {sin kb = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MomentumClassification {
    pub in_xi_a: bool,
    pub in_xi_b: bool,
    pub in_xi: bool,
    pub flat_band_point: bool,
}

impl MomentumClassification {
    pub fn of<T: Scalar>(params: &LatticeParams<T>, k: T) -> Self {
        let in_xi_a = near_sine_zero(k, params.a());
        let in_xi_b = near_sine_zero(k, params.b());
        Self { in_xi_a, in_xi_b, in_xi: in_xi_a || in_xi_b, flat_band_point: in_xi_a && in_xi_b }
    }
}

/// `|sin(k·len)| < 1e−9·max(1, k·len)`, floored at the scalar's resolution.
pub(crate) fn near_sine_zero<T: Scalar>(k: T, len: T) -> bool {
    let x = k * len;
    let rel = T::tol_floor(T::lit(1e-9), 16.0);
    x.sin().abs() < rel * x.max(T::one())
}

/// Closed energy interval `[lo, hi]`; `lo` may be `−∞` for the gap below the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyInterval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> EnergyInterval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(SpectrumError::InvalidParameter(format!("interval needs lo <= hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub(crate) fn raw(lo: T, hi: T) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> T {
        self.lo + (self.hi - self.lo) / T::lit(2.0)
    }

    pub fn contains(&self, e: T) -> bool {
        self.lo <= e && e <= self.hi
    }

    pub fn contains_open(&self, e: T) -> bool {
        self.lo < e && e < self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }
}

/// Computed spectrum on a window: merged band intervals and flat-band energies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSet<T> {
    pub bands: Vec<EnergyInterval<T>>,
    pub flat_bands: Vec<T>,
    pub window: EnergyInterval<T>,
    /// The unclipped negative band, kept separately for reporting.
    pub negative_band: Option<EnergyInterval<T>>,
}

impl<T: Scalar> BandSet<T> {
    /// Open gaps between consecutive bands inside the window.
    pub fn gaps(&self) -> Vec<EnergyInterval<T>> {
        self.bands.windows(2).map(|w| EnergyInterval::raw(w[0].hi, w[1].lo)).collect()
    }

    /// Band pieces at non-negative energy, excluding degenerate `[0, 0]` pieces.
    pub fn positive_bands(&self) -> Vec<EnergyInterval<T>> {
        self.bands
            .iter()
            .filter_map(|b| {
                let lo = b.lo.max(T::zero());
                (lo < b.hi).then(|| EnergyInterval::raw(lo, b.hi))
            })
            .collect()
    }

    /// Total band length inside the window.
    pub fn measure(&self) -> T {
        self.bands.iter().fold(T::zero(), |acc, b| acc + b.width())
    }

    pub fn contains(&self, e: T) -> bool {
        self.bands.iter().any(|b| b.contains(e)) || self.flat_bands.contains(&e)
    }
}
