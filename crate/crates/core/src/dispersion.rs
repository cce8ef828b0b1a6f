//! Closed-form dispersion functions and edge-limit constants.
//!
//! Positive energies use `k = √E`, negative energies `κ = √−E`. Hyperbolic
//! quantities are evaluated scaled by `e^{−κa}` so that large `κ` does not
//! overflow; the scaled forms are exact rewrites, not approximations.

use serde::Serialize;

use crate::error::{Result, SpectrumError};
use crate::scalar::Scalar;
use crate::types::{near_sine_zero, LatticeParams, MomentumClassification, SpectralPoint};

/// Branch of the edge curve `g±`. `Plus` belongs to the constraint `f < −1`
/// (condition BC⁺, blue), `Minus` to `f > 1` (condition BC⁻, red).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// Branch selected by the sign of `f` in a fiber gap.
    pub fn for_f<T: Scalar>(f: T) -> Self {
        if f < T::zero() {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }

    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

/// Outcome of the perturbed band conditions at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMembership {
    InSPlus,
    InSMinus,
    NotInS,
}

impl BcMembership {
    pub fn is_member(self) -> bool {
        !matches!(self, BcMembership::NotInS)
    }
}

/// `γ̃` values of the two branches at one limit point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPair<T> {
    pub plus: T,
    pub minus: T,
}

impl<T: Scalar> BranchPair<T> {
    pub fn get(&self, branch: Branch) -> T {
        match branch {
            Branch::Plus => self.plus,
            Branch::Minus => self.minus,
        }
    }
}

/// Which of the two type-2 constants was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Type2Label {
    /// Nontrivial value attained at `τ = 1`.
    P1,
    /// Nontrivial value attained at `τ = −1`.
    P2,
}

/// Limits of the edge curves at gap edges of σ(H_γ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeConstants<T> {
    /// `k_o = (2n−1)π/b`, limit of `g±(−1; k)`. `None` when `ρ < 0`.
    Type1Odd { n: u32, k: T, rho: T, gamma_tilde_o: Option<BranchPair<T>> },
    /// `k_e = 2nπ/b`, limit of `g±(1; k)`. `None` when `σ < 0`.
    Type1Even { n: u32, k: T, sigma: T, gamma_tilde_e: Option<BranchPair<T>> },
    /// Band edge where `A = ±(1 + |B|)`; one branch value is exactly `γ`.
    Type2 {
        k: T,
        branch: Branch,
        trivial: T,
        gamma_tilde_p: T,
        label: Type2Label,
        tau_nontrivial: T,
    },
    /// Edge of the negative band.
    Negative { kappa: T, gamma_tilde_n1: T, gamma_tilde_n2: T },
}

// ═══════════════════════════════════════════════════════════════════════
// Positive energies
// ═══════════════════════════════════════════════════════════════════════

fn half<T: Scalar>() -> T {
    T::lit(0.5)
}

fn check_k<T: Scalar>(k: T) -> Result<()> {
    if k.is_finite() && k > T::zero() {
        Ok(())
    } else {
        Err(SpectrumError::InvalidParameter(format!("momentum must be positive, got {k}")))
    }
}

fn check_tau<T: Scalar>(tau: T) -> Result<()> {
    if tau.abs() <= T::one() {
        Ok(())
    } else {
        Err(SpectrumError::InvalidParameter(format!("tau must lie in [-1, 1], got {tau}")))
    }
}

/// Trigonometric pieces shared by the positive-energy conditions.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Trig<T> {
    pub sa: T,
    pub sb: T,
    pub sab: T,
    /// `γ sin ka sin kb/(2k) + sin k(a+b)`, i.e. `A·sin kb`.
    pub num: T,
}

impl<T: Scalar> Trig<T> {
    pub fn new(p: &LatticeParams<T>, k: T) -> Self {
        let (a, b) = (p.a(), p.b());
        let sa = (k * a).sin();
        let sb = (k * b).sin();
        let sab = (k * (a + b)).sin();
        let num = p.gamma() * sa * sb / (k + k) + sab;
        Self { sa, sb, sab, num }
    }

    pub fn a_coef(&self) -> T {
        self.num / self.sb
    }

    pub fn b_coef(&self) -> T {
        self.sa / self.sb
    }

    /// `f_τ(k)·sin kb`.
    pub fn f_times_sb(&self, tau: T) -> T {
        self.num - tau * self.sa
    }

    /// Magnitude of the terms entering `band_margin`, for relative tolerances.
    pub fn scale(&self) -> T {
        self.sa.abs() + self.sb.abs() + self.sab.abs() + (self.num - self.sab).abs()
    }
}

/// `f_τ(k) = γ sin ka/(2k) + sin k(a+b)/sin kb − τ sin ka/sin kb`.
pub fn f_tau<T: Scalar>(params: &LatticeParams<T>, tau: T, k: T) -> Result<T> {
    check_k(k)?;
    check_tau(tau)?;
    if near_sine_zero(k, params.b()) {
        return Err(SpectrumError::SingularAtXiB { k: k.as_f64() });
    }
    Ok(f_tau_unchecked(params, tau, k))
}

#[inline]
pub(crate) fn f_tau_unchecked<T: Scalar>(params: &LatticeParams<T>, tau: T, k: T) -> T {
    let t = Trig::new(params, k);
    t.f_times_sb(tau) / t.sb
}

/// `(F₊(k), F₋(k))`, the maximum and minimum of `F(τ₁, τ₂, k)` over `[−1, 1]²`.
pub fn f_plus_minus<T: Scalar>(params: &LatticeParams<T>, k: T) -> Result<(T, T)> {
    check_k(k)?;
    if MomentumClassification::of(params, k).in_xi {
        return Err(SpectrumError::SingularOnXi { k: k.as_f64() });
    }
    let reduced = |len: T| {
        let x = k * len;
        x * half() - T::FRAC_PI_2() * (x / T::PI()).floor()
    };
    let (ra, rb) = (reduced(params.a()), reduced(params.b()));
    let f_plus = ra.tan() + rb.tan();
    let f_minus = -(T::one() / ra.tan()) - T::one() / rb.tan();
    Ok((f_plus, f_minus))
}

/// `F(τ₁, τ₂, k) = (τ₁ − cos ka)/sin ka + (τ₂ − cos kb)/sin kb`.
pub fn spectral_f<T: Scalar>(params: &LatticeParams<T>, tau1: T, tau2: T, k: T) -> T {
    let (xa, xb) = (k * params.a(), k * params.b());
    (tau1 - xa.cos()) / xa.sin() + (tau2 - xb.cos()) / xb.sin()
}

/// `γ* = −4(1/a + 1/b)`.
pub fn gamma_star<T: Scalar>(params: &LatticeParams<T>) -> T {
    -T::lit(4.0) * (params.a().recip() + params.b().recip())
}

/// `(ξ₁, ξ₂) = (|sin k(a/2+b)| − |sin ka/2|, |cos k(a/2+b)| − |cos ka/2|)`.
pub fn xi_functions<T: Scalar>(params: &LatticeParams<T>, k: T) -> (T, T) {
    let outer = k * (params.a() * half() + params.b());
    let inner = k * params.a() * half();
    (outer.sin().abs() - inner.sin().abs(), outer.cos().abs() - inner.cos().abs())
}

/// `(γₙ⁺, γₙ⁻) = (2kₙ tan(kₙb/2), −2kₙ cot(kₙb/2))` with `kₙ = nπ/a`.
pub fn interior_gammas<T: Scalar>(params: &LatticeParams<T>, n: u32) -> Result<(T, T)> {
    if n == 0 {
        return Err(SpectrumError::InvalidParameter("n must be positive".into()));
    }
    let k = T::from_u32(n).unwrap() * T::PI() / params.a();
    if near_sine_zero(k, params.b()) {
        return Err(SpectrumError::Precondition(format!("sin(k_n b) = 0 for n = {n}")));
    }
    let t = (k * params.b() * half()).tan();
    Ok(((k + k) * t, -(k + k) / t))
}

// ═══════════════════════════════════════════════════════════════════════
// Negative energies (scaled by e^{−κa})
// ═══════════════════════════════════════════════════════════════════════

/// Hyperbolic pieces multiplied by `e^{−κa}`; `kappa = 0` gives the `κ → 0⁺` limit
/// of the unscaled quantities.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HypScaled<T> {
    pub kappa: T,
    /// `e^{−κa}`
    pub damp: T,
    /// `B̂ · e^{−κa} = (sinh κa/sinh κb) · e^{−κa}`
    pub b_hat: T,
    /// `Â · e^{−κa}`
    pub a_hat: T,
    /// `sinh κa/(2κ)` times `e^{−κa}`
    pub sinh_a_over_2k: T,
}

impl<T: Scalar> HypScaled<T> {
    pub fn new(p: &LatticeParams<T>, kappa: T) -> Self {
        let (a, b) = (p.a(), p.b());
        if kappa == T::zero() {
            let sinh_a_over_2k = a * half();
            let ratio_ab = (a + b) / b;
            let b_hat = a / b;
            return Self {
                kappa,
                damp: T::one(),
                b_hat,
                a_hat: p.gamma() * sinh_a_over_2k + ratio_ab,
                sinh_a_over_2k,
            };
        }
        let two = T::lit(2.0);
        // 1 − e^{−2κL}, accurate for small κL
        let one_minus = |len: T| -(-(two * kappa * len)).exp_m1();
        let (ua, ub, uab) = (one_minus(a), one_minus(b), one_minus(a + b));
        let damp = (-(kappa * a)).exp();
        // (sinh κ(a+b)/sinh κb) · e^{−κa}
        let ratio_ab = uab / ub;
        let b_hat = (-(kappa * b)).exp() * ua / ub;
        let sinh_a_over_2k = ua / (T::lit(4.0) * kappa);
        let a_hat = p.gamma() * sinh_a_over_2k + ratio_ab;
        Self { kappa, damp, b_hat, a_hat, sinh_a_over_2k }
    }

    /// `f̂_τ(κ)·e^{−κa}`.
    pub fn f_hat(&self, tau: T) -> T {
        self.a_hat - tau * self.b_hat
    }

    /// `2κ/sinh κa`, with the limit `2/a` at `κ = 0`.
    pub fn prefactor(&self, a: T) -> T {
        if self.kappa == T::zero() {
            T::lit(2.0) / a
        } else {
            self.damp / self.sinh_a_over_2k
        }
    }
}

/// `f̂_τ(κ) = γ sinh κa/(2κ) + sinh κ(a+b)/sinh κb − τ sinh κa/sinh κb`.
pub fn f_hat_tau<T: Scalar>(params: &LatticeParams<T>, tau: T, kappa: T) -> Result<T> {
    if !(kappa.is_finite() && kappa > T::zero()) {
        return Err(SpectrumError::InvalidParameter(format!("decay rate must be positive, got {kappa}")));
    }
    check_tau(tau)?;
    let h = HypScaled::new(params, kappa);
    Ok(h.f_hat(tau) * (kappa * params.a()).exp())
}

/// `f_τ` at `E = 0` (common limit of `f_τ(k→0⁺)` and `f̂_τ(κ→0⁺)`).
pub fn f_tau_at_zero<T: Scalar>(params: &LatticeParams<T>, tau: T) -> T {
    HypScaled::new(params, T::zero()).f_hat(tau)
}

// ═══════════════════════════════════════════════════════════════════════
// Perturbation functions
// ═══════════════════════════════════════════════════════════════════════

/// `G(k) = (γ̃−γ) sin ka/(2k)` or `Ĝ(κ) = (γ̃−γ) sinh κa/(2κ)`.
pub fn perturbation_sign_fn<T: Scalar>(params: &LatticeParams<T>, point: SpectralPoint<T>) -> Result<T> {
    let dg = params.require_gamma_tilde()? - params.gamma();
    match point {
        SpectralPoint::Positive { k } => {
            check_k(k)?;
            Ok(dg * (k * params.a()).sin() / (k + k))
        }
        SpectralPoint::Negative { kappa } => {
            if !(kappa > T::zero()) {
                return Err(SpectrumError::InvalidParameter(format!("decay rate must be positive, got {kappa}")));
            }
            let h = HypScaled::new(params, kappa);
            Ok(dg * h.sinh_a_over_2k * (kappa * params.a()).exp())
        }
        SpectralPoint::Zero => Err(SpectrumError::Precondition(
            "perturbation_sign_fn is undefined at zero energy".into(),
        )),
    }
}

/// Offset used for one-sided limits at Ξ points.
pub(crate) fn xi_offset<T: Scalar>(params: &LatticeParams<T>) -> T {
    T::lit(1e-7) * T::PI() / params.max_edge()
}

/// Evaluates BC± at one point; Ξ_b points are decided by agreeing one-sided limits.
pub fn bc_membership<T: Scalar>(params: &LatticeParams<T>, point: SpectralPoint<T>) -> Result<BcMembership> {
    let gt = params.require_gamma_tilde()?;
    Ok(match point {
        SpectralPoint::Positive { k } => {
            check_k(k)?;
            if near_sine_zero(k, params.b()) {
                let d = xi_offset(params);
                let left = bc_positive(params, gt, (k - d).max(k * half()));
                let right = bc_positive(params, gt, k + d);
                if left == right {
                    left
                } else {
                    BcMembership::NotInS
                }
            } else {
                bc_positive(params, gt, k)
            }
        }
        SpectralPoint::Negative { kappa } => bc_hyp(params, gt, HypScaled::new(params, kappa)),
        SpectralPoint::Zero => bc_hyp(params, gt, HypScaled::new(params, T::zero())),
    })
}

/// BC± multiplied through by `|sin kb|`.
pub(crate) fn bc_positive<T: Scalar>(params: &LatticeParams<T>, gamma_tilde: T, k: T) -> BcMembership {
    let t = Trig::new(params, k);
    let g = (gamma_tilde - params.gamma()) * t.sa / (k + k);
    let root = (g * g + T::one()).sqrt();
    let rhs = t.sa.abs();
    if g > T::zero() && (t.num + root * t.sb).abs() <= rhs {
        BcMembership::InSPlus
    } else if g < T::zero() && (t.num - root * t.sb).abs() <= rhs {
        BcMembership::InSMinus
    } else {
        BcMembership::NotInS
    }
}

/// Hat variant of BC± multiplied through by `e^{−κa}`.
pub(crate) fn bc_hyp<T: Scalar>(params: &LatticeParams<T>, gamma_tilde: T, h: HypScaled<T>) -> BcMembership {
    let g = (gamma_tilde - params.gamma()) * h.sinh_a_over_2k;
    let root = (g * g + h.damp * h.damp).sqrt();
    if g > T::zero() && (h.a_hat + root).abs() <= h.b_hat {
        BcMembership::InSPlus
    } else if g < T::zero() && (h.a_hat - root).abs() <= h.b_hat {
        BcMembership::InSMinus
    } else {
        BcMembership::NotInS
    }
}

// ═══════════════════════════════════════════════════════════════════════
// Edge curves
// ═══════════════════════════════════════════════════════════════════════

/// `g±(τ; k) = γ ± (2k/sin ka)√(f_τ² − 1)` and its hat analogue.
pub fn edge_curve_g<T: Scalar>(
    params: &LatticeParams<T>,
    tau: T,
    point: SpectralPoint<T>,
    branch: Branch,
) -> Result<T> {
    check_tau(tau)?;
    let (f, f_abs_cmp, value) = match point {
        SpectralPoint::Positive { k } => {
            check_k(k)?;
            if MomentumClassification::of(params, k).in_xi {
                return Err(SpectrumError::SingularOnXi { k: k.as_f64() });
            }
            let f = f_tau_unchecked(params, tau, k);
            let sa = (k * params.a()).sin();
            let root = ((f - T::one()) * (f + T::one())).max(T::zero()).sqrt();
            (f, f.abs() - T::one(), params.gamma() + branch.sign::<T>() * (k + k) / sa * root)
        }
        SpectralPoint::Negative { kappa } => {
            if !(kappa > T::zero()) {
                return Err(SpectrumError::InvalidParameter(format!("decay rate must be positive, got {kappa}")));
            }
            let h = HypScaled::new(params, kappa);
            hyp_curve(params, &h, tau, branch)
        }
        SpectralPoint::Zero => {
            let h = HypScaled::new(params, T::zero());
            hyp_curve(params, &h, tau, branch)
        }
    };
    if f_abs_cmp < T::zero() {
        return Err(SpectrumError::InsideFiberBand { f_abs: f.abs().as_f64() });
    }
    if Branch::for_f(f) != branch && f.abs() > T::one() {
        return Err(SpectrumError::BranchMismatch { branch: branch.name(), f: f.as_f64() });
    }
    Ok(value)
}

/// Returns `(sign-carrying f̂ proxy, |f̂| − 1 proxy, curve value)`.
fn hyp_curve<T: Scalar>(params: &LatticeParams<T>, h: &HypScaled<T>, tau: T, branch: Branch) -> (T, T, T) {
    let fs = h.f_hat(tau);
    let d2 = h.damp * h.damp;
    let root_s = (fs * fs - d2).max(T::zero()).sqrt();
    let value = params.gamma() + branch.sign::<T>() * hyp_times_prefactor(params, h, root_s);
    let cmp = fs.abs() - h.damp;
    let f_proxy = if fs.abs() >= h.damp { fs } else { fs / h.damp };
    (f_proxy, cmp, value)
}

/// `(2κ/sinh κa)·X` for `X` given scaled by `e^{−κa}`.
fn hyp_times_prefactor<T: Scalar>(params: &LatticeParams<T>, h: &HypScaled<T>, scaled: T) -> T {
    if h.kappa == T::zero() {
        h.prefactor(params.a()) * scaled
    } else {
        scaled / h.sinh_a_over_2k
    }
}

/// Edge curve on the signed-momentum axis without domain checks; the branch is
/// taken as given. Used by scans that already know they are inside a gap.
pub(crate) fn edge_curve_signed<T: Scalar>(params: &LatticeParams<T>, tau: T, q: T, sign: T) -> T {
    if q > T::zero() {
        let t = Trig::new(params, q);
        let f = t.f_times_sb(tau) / t.sb;
        let root = ((f - T::one()) * (f + T::one())).max(T::zero()).sqrt();
        params.gamma() + sign * (q + q) / t.sa * root
    } else {
        let h = HypScaled::new(params, -q);
        let fs = h.f_hat(tau);
        let root_s = (fs * fs - h.damp * h.damp).max(T::zero()).sqrt();
        params.gamma() + sign * hyp_times_prefactor(params, &h, root_s)
    }
}

/// `f_τ` (positive `q`) or `f̂_τ` (negative `q`) on the signed-momentum axis.
pub(crate) fn f_signed<T: Scalar>(params: &LatticeParams<T>, tau: T, q: T) -> T {
    if q > T::zero() {
        f_tau_unchecked(params, tau, q)
    } else {
        let h = HypScaled::new(params, -q);
        if q == T::zero() {
            h.f_hat(tau)
        } else {
            h.f_hat(tau) / h.damp
        }
    }
}

// ═══════════════════════════════════════════════════════════════════════
// Edge-limit constants
// ═══════════════════════════════════════════════════════════════════════

fn type1_rho<T: Scalar>(params: &LatticeParams<T>, n_coef: T, k: T) -> T {
    let (s, c) = ((k * params.a()).sin(), (k * params.a()).cos());
    let bgs = params.b() * params.gamma() * s;
    let npi = n_coef * T::PI();
    bgs * bgs + T::lit(2.0) * npi * bgs * c + npi * npi * (c * c - T::one())
}

/// The `ρ`/`σ` expression exactly as it is commonly printed,
/// `(bγ s)² + (Nπ c)² + N(bγ s − Nπ)π`; kept to document that it differs from
/// the limit of the edge curves whenever `cos(k a) ≠ ½`.
pub fn type1_rho_as_printed<T: Scalar>(params: &LatticeParams<T>, n_coef: T, k: T) -> T {
    let (s, c) = ((k * params.a()).sin(), (k * params.a()).cos());
    let bgs = params.b() * params.gamma() * s;
    let npi = n_coef * T::PI();
    bgs * bgs + (npi * c) * (npi * c) + n_coef * (bgs - npi) * T::PI()
}

fn type1_pair<T: Scalar>(params: &LatticeParams<T>, k: T, value: T) -> Option<BranchPair<T>> {
    if value < T::zero() {
        return None;
    }
    let d = value.sqrt() / ((k * params.a()).sin() * params.b());
    Some(BranchPair { plus: params.gamma() + d, minus: params.gamma() - d })
}

/// Limits of `g±(−1; k)` as `k → k_o = (2n−1)π/b`.
pub fn type1_odd_limits<T: Scalar>(params: &LatticeParams<T>, n: u32) -> Result<EdgeConstants<T>> {
    if n == 0 {
        return Err(SpectrumError::InvalidParameter("n must be positive".into()));
    }
    let n_t = T::from_u32(n).unwrap();
    let k = (T::lit(2.0) * n_t - T::one()) * T::PI() / params.b();
    if near_sine_zero(k, params.a()) {
        return Err(SpectrumError::Type1FirstSituation { k: k.as_f64() });
    }
    let rho = type1_rho(params, T::lit(4.0) * n_t - T::lit(2.0), k);
    Ok(EdgeConstants::Type1Odd { n, k, rho, gamma_tilde_o: type1_pair(params, k, rho) })
}

/// Limits of `g±(1; k)` as `k → k_e = 2nπ/b`.
pub fn type1_even_limits<T: Scalar>(params: &LatticeParams<T>, n: u32) -> Result<EdgeConstants<T>> {
    if n == 0 {
        return Err(SpectrumError::InvalidParameter("n must be positive".into()));
    }
    let n_t = T::from_u32(n).unwrap();
    let k = T::lit(2.0) * n_t * T::PI() / params.b();
    if near_sine_zero(k, params.a()) {
        return Err(SpectrumError::Type1FirstSituation { k: k.as_f64() });
    }
    let sigma = type1_rho(params, T::lit(4.0) * n_t, k);
    Ok(EdgeConstants::Type1Even { n, k, sigma, gamma_tilde_e: type1_pair(params, k, sigma) })
}

/// Both type-1 limits for index `n`.
pub fn type1_edge_limits<T: Scalar>(
    params: &LatticeParams<T>,
    n: u32,
) -> (Result<EdgeConstants<T>>, Result<EdgeConstants<T>>) {
    (type1_odd_limits(params, n), type1_even_limits(params, n))
}

/// `|A| − (1 + |B|)` multiplied by `|sin kb|`, relative to the term scale.
pub fn class2_residual<T: Scalar>(params: &LatticeParams<T>, k: T) -> T {
    let t = Trig::new(params, k);
    let scale = t.scale().max(T::min_positive_value());
    (t.num.abs() - t.sa.abs() - t.sb.abs()) / scale
}

/// Edge constants at a band edge `k` satisfying `A = ±(1 + |B|)`.
pub fn type2_edge_limits<T: Scalar>(params: &LatticeParams<T>, k: T) -> Result<EdgeConstants<T>> {
    check_k(k)?;
    let cls = MomentumClassification::of(params, k);
    if cls.in_xi {
        return Err(SpectrumError::Precondition(format!("k = {k} lies in Xi; not a type-2 edge")));
    }
    if class2_residual(params, k).abs() > T::tol_floor(T::lit(1e-7), 1e4) {
        return Err(SpectrumError::Precondition(format!("k = {k} does not satisfy the band-edge condition")));
    }
    let t = Trig::new(params, k);
    let (a_coef, b_coef) = (t.a_coef(), t.b_coef());
    // A > 0 means f ≥ 1 next to the edge, hence the minus branch.
    let branch = if a_coef > T::zero() { Branch::Minus } else { Branch::Plus };
    let one_plus = T::one() + T::lit(2.0) * b_coef.abs();
    let root = ((one_plus - T::one()) * (one_plus + T::one())).sqrt();
    let gamma_tilde_p = params.gamma() + branch.sign::<T>() * (k + k) / t.sa * root;
    // f = A − τB equals ±(1 + 2|B|) at τ = −sign(A)·sign(B)
    let tau_nontrivial = -a_coef.signum() * b_coef.signum();
    let label = if tau_nontrivial > T::zero() { Type2Label::P1 } else { Type2Label::P2 };
    Ok(EdgeConstants::Type2 { k, branch, trivial: params.gamma(), gamma_tilde_p, label, tau_nontrivial })
}

/// Hat residual `|Â| − (1 + B̂)` scaled by `e^{−κa}`, relative to the term scale.
pub fn negative_edge_residual<T: Scalar>(params: &LatticeParams<T>, kappa: T) -> T {
    let h = HypScaled::new(params, kappa);
    let scale = h.a_hat.abs() + h.damp + h.b_hat;
    (h.a_hat.abs() - h.damp - h.b_hat) / scale
}

/// `γ̃ⁿ₁ = γ + (2κ/sinh κa)√((1+2B̂)² − 1)` and `γ̃ⁿ₂ = γ − (same)`.
pub fn negative_edge_limits<T: Scalar>(params: &LatticeParams<T>, kappa: T) -> Result<EdgeConstants<T>> {
    if !(kappa >= T::zero() && kappa.is_finite()) {
        return Err(SpectrumError::InvalidParameter(format!("decay rate must be non-negative, got {kappa}")));
    }
    if negative_edge_residual(params, kappa).abs() > T::tol_floor(T::lit(1e-7), 1e4) {
        return Err(SpectrumError::Precondition(format!(
            "kappa = {kappa} does not satisfy the negative band-edge condition"
        )));
    }
    Ok(negative_limits_unchecked(params, kappa))
}

pub(crate) fn negative_limits_unchecked<T: Scalar>(params: &LatticeParams<T>, kappa: T) -> EdgeConstants<T> {
    let h = HypScaled::new(params, kappa);
    // √((1+2B̂)² − 1)·e^{−κa} = √((e^{−κa} + 2B̂e^{−κa})² − e^{−2κa})
    let x = h.damp + T::lit(2.0) * h.b_hat;
    let root_s = ((x - h.damp) * (x + h.damp)).sqrt();
    let delta = hyp_times_prefactor(params, &h, root_s);
    EdgeConstants::Negative {
        kappa,
        gamma_tilde_n1: params.gamma() + delta,
        gamma_tilde_n2: params.gamma() - delta,
    }
}
