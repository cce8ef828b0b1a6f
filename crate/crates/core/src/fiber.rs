//! Fiber operators at fixed `θ₂`: band membership, transfer-matrix
//! eigenvalues, the discrete eigenvalue per gap and its vertex profile.

use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{f_signed, xi_offset, Branch, HypScaled, Trig};
use crate::error::{Result, SpectrumError};
use crate::interval::merge_intervals;
use crate::roots::{bisect_predicate, bracket_root, linspace, midpoints};
use crate::scalar::Scalar;
use crate::types::{
    energy_of_signed, near_sine_zero, signed_momentum_of, EnergyInterval, FiberParams, LatticeParams, MomentumClassification,
    SpectralPoint,
};
use crate::unperturbed::GapRecord;

/// Minimum residual scan size per gap.
pub const MIN_SCAN: usize = 512;
const MAX_SCAN: usize = 1 << 20;

/// A discrete eigenvalue of the perturbed fiber operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberEigenvalue<T> {
    pub fiber: FiberParams<T>,
    pub point: SpectralPoint<T>,
    pub energy: T,
    /// `Plus`: `f < −1` (upper condition); `Minus`: `f > 1` (lower condition).
    pub branch: Branch,
    /// Unperturbed `f_τ` (or `f̂_τ`) at the eigenvalue.
    pub f_gamma: T,
    /// The transfer eigenvalue with `|Λ| < 1`.
    pub lambda_decaying: T,
    /// Its partner, `1/lambda_decaying`.
    pub lambda_growing: T,
    /// `1/|ln|Λ||`, in lattice steps of length `a`.
    pub localization_length: T,
}

/// Vertex values `ν_j = Λ^{|j|}` of a localized mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeProfile<T> {
    pub vertex_values: Vec<(i64, T)>,
    pub decay_rate: T,
}

/// Fiber bands and the discrete eigenvalues in its gaps on a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberSpectrum<T> {
    pub fiber: FiberParams<T>,
    pub bands: Vec<EnergyInterval<T>>,
    pub eigenvalues: Vec<FiberEigenvalue<T>>,
}

/// `f_τ` at a spectral point (hat variant for negative energies).
fn f_at<T: Scalar>(params: &LatticeParams<T>, tau: T, point: SpectralPoint<T>) -> T {
    f_signed(params, tau, point.signed_momentum())
}

/// `|f_τ| ≤ 1` (or `|f̂_τ| ≤ 1`).
pub fn fiber_band_membership<T: Scalar>(
    params: &LatticeParams<T>,
    fiber: &FiberParams<T>,
    point: SpectralPoint<T>,
) -> bool {
    let tau = fiber.tau;
    match point {
        SpectralPoint::Positive { k } => {
            if near_sine_zero(k, params.b()) {
                let d = xi_offset(params);
                let left = (k - d).max(k * T::lit(0.5));
                in_fiber_band_k(params, tau, left) && in_fiber_band_k(params, tau, k + d)
            } else {
                in_fiber_band_k(params, tau, k)
            }
        }
        SpectralPoint::Negative { kappa } => {
            let h = HypScaled::new(params, kappa);
            h.f_hat(tau).abs() <= h.damp
        }
        SpectralPoint::Zero => HypScaled::new(params, T::zero()).f_hat(tau).abs() <= T::one(),
    }
}

/// `|f_τ(k)| ≤ 1` in the form `|f·sin kb| ≤ |sin kb|`.
fn in_fiber_band_k<T: Scalar>(params: &LatticeParams<T>, tau: T, k: T) -> bool {
    let t = Trig::new(params, k);
    t.f_times_sb(tau).abs() <= t.sb.abs()
}

/// Membership on the signed-momentum axis.
fn in_fiber_band_signed<T: Scalar>(params: &LatticeParams<T>, tau: T, q: T) -> bool {
    if q > T::zero() {
        in_fiber_band_k(params, tau, q)
    } else {
        let h = HypScaled::new(params, -q);
        h.f_hat(tau).abs() <= h.damp
    }
}

/// `(Λ₊, Λ₋) = f ± √(f² − 1)`; the larger magnitude is computed directly and
/// the other as its reciprocal, so `Λ₊Λ₋ = 1` to rounding.
pub fn transfer_eigenvalues<T: Scalar>(
    params: &LatticeParams<T>,
    fiber: &FiberParams<T>,
    point: SpectralPoint<T>,
) -> Result<(T, T)> {
    let f = f_at(params, fiber.tau, point);
    lambdas_from_f(f)
}

pub(crate) fn lambdas_from_f<T: Scalar>(f: T) -> Result<(T, T)> {
    if !(f.abs() > T::one()) {
        return Err(SpectrumError::InsideFiberBand { f_abs: f.abs().as_f64() });
    }
    let root = ((f - T::one()) * (f + T::one())).sqrt();
    if f > T::zero() {
        let large = f + root;
        Ok((large, large.recip()))
    } else {
        let large = f - root;
        Ok((large.recip(), large))
    }
}

/// Eigenvalue residual `G − s·√(f² − 1)` on the signed-momentum axis, with
/// `s = +1` for `f < −1` and `−1` for `f > 1`. Negative `q` is scaled by `e^{−κa}`.
fn eigen_residual<T: Scalar>(params: &LatticeParams<T>, dg: T, tau: T, q: T) -> T {
    residual_with_error(params, dg, tau, q).0
}

/// The residual together with a first-order bound on its rounding error.
/// Each sine carries the error of its rounded argument; near points where
/// `sin ka` and `sin kb` vanish together `f` is a ratio of tiny numbers and
/// the bound grows accordingly.
fn residual_with_error<T: Scalar>(params: &LatticeParams<T>, dg: T, tau: T, q: T) -> (T, T) {
    let eps = T::epsilon();
    let four = T::lit(4.0);
    if q > T::zero() {
        let (a, b) = (params.a(), params.b());
        let t = Trig::new(params, q);
        let f = t.f_times_sb(tau) / t.sb;
        let two_k = q + q;
        let g = dg * t.sa / two_k;
        let root = ((f - T::one()) * (f + T::one())).max(T::zero()).sqrt();
        let (ea, eb, eab) = (eps * (q * a + T::one()), eps * (q * b + T::one()), eps * (q * (a + b) + T::one()));
        let e_num = eab + params.gamma().abs() / two_k * (t.sb.abs() * ea + t.sa.abs() * eb) + tau.abs() * ea;
        let e_f = (e_num + f.abs() * eb) / t.sb.abs();
        let e_sq = (f.abs() + T::one()) * e_f;
        let e_root = if root > T::zero() { (f.abs() * e_f / root).min(e_sq.sqrt()) } else { e_sq.sqrt() };
        let e_g = dg.abs() * ea / two_k;
        let r = g - Branch::for_f(f).sign::<T>() * root;
        (r, four * (e_g + e_root) + eps * r.abs())
    } else {
        let h = HypScaled::new(params, -q);
        let fs = h.f_hat(tau);
        let g = dg * h.sinh_a_over_2k;
        let root = ((fs - h.damp) * (fs + h.damp)).max(T::zero()).sqrt();
        let r = g - Branch::for_f(fs).sign::<T>() * root;
        (r, four * eps * (g.abs() + root))
    }
}

/// Index pairs of consecutive resolvable samples whose residual signs differ.
/// Samples whose residual is within its rounding bound are skipped.
fn count_sign_changes<T: Scalar>(values: &[(T, T)]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &(v, err)) in values.iter().enumerate() {
        if !v.is_finite() || v.abs() <= err {
            continue;
        }
        if let Some(j) = last {
            if (values[j].0 < T::zero()) != (v < T::zero()) {
                out.push((j, i));
            }
        }
        last = Some(i);
    }
    out
}

/// Discrete eigenvalue of the perturbed fiber inside a gap of σ(H_γ).
pub fn fiber_discrete_eigenvalue<T: Scalar>(
    params: &LatticeParams<T>,
    fiber: &FiberParams<T>,
    gap: &GapRecord<T>,
) -> Result<Option<FiberEigenvalue<T>>> {
    let q_hi = signed_momentum_of(gap.interval.hi);
    let q_lo = if gap.is_semi_infinite() {
        semi_infinite_floor(params, q_hi)?
    } else {
        signed_momentum_of(gap.interval.lo)
    };
    fiber_eigenvalue_between(params, fiber, q_lo, q_hi)
}

/// Lower truncation of the semi-infinite gap on the signed-momentum axis:
/// `−κ_max` with `κ_max = max(10/a, 10/b, 5|γ̃|·max(a, b))`.
pub fn semi_infinite_floor<T: Scalar>(params: &LatticeParams<T>, q_top: T) -> Result<T> {
    let gt = params.require_gamma_tilde()?;
    let ten = T::lit(10.0);
    let kappa_max = (ten / params.a()).max(ten / params.b()).max(T::lit(5.0) * gt.abs() * params.max_edge());
    Ok((-kappa_max).min(q_top - kappa_max))
}

/// Eigenvalue search on an open signed-momentum interval inside one fiber gap.
pub fn fiber_eigenvalue_between<T: Scalar>(
    params: &LatticeParams<T>,
    fiber: &FiberParams<T>,
    q_lo: T,
    q_hi: T,
) -> Result<Option<FiberEigenvalue<T>>> {
    let dg = params.require_gamma_tilde()? - params.gamma();
    if !(q_hi > q_lo) || dg == T::zero() {
        return Ok(None);
    }
    let tau = fiber.tau;
    let r = |q: T| eigen_residual(params, dg, tau, q);

    let width = q_hi - q_lo;
    let mut n = MIN_SCAN;
    let mut history: Vec<usize> = Vec::new();
    let (pts, changes) = loop {
        let mut pts = midpoints(q_lo, q_hi, n);
        // Midpoints leave half a cell unscanned at each end.
        for m in 3..=edge_depth(params, q_lo) {
            pts.push(q_lo + width * T::lit(10f64.powi(-m)));
        }
        for m in 3..=edge_depth(params, q_hi) {
            pts.push(q_hi - width * T::lit(10f64.powi(-m)));
        }
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let vals: Vec<(T, T)> = pts.iter().map(|&q| residual_with_error(params, dg, tau, q)).collect();
        let changes = count_sign_changes(&vals);
        history.push(changes.len());
        let stable = history.len() >= 3 && history[history.len() - 3..].iter().all(|&c| c == changes.len());
        if stable || n >= MAX_SCAN {
            break (pts, changes);
        }
        n *= 2;
    };
    match changes.len() {
        0 => Ok(None),
        1 => {
            let (i, j) = changes[0];
            let tol = T::tol_floor(T::lit(1e-15) * pts[i].abs().max(T::one()), 4.0);
            let q = bracket_root(r, pts[i], pts[j], tol)?;
            Ok(Some(eigen_at(params, fiber, q)?))
        }
        c => Err(SpectrumError::UniquenessViolation { count: c, lo: q_lo.as_f64(), hi: q_hi.as_f64() }),
    }
}

/// How close to an end (as `10^{-m}` of the width) the scan may probe before
/// rounding dominates: both sines vanish at a flat-band point.
pub(crate) fn edge_depth<T: Scalar>(params: &LatticeParams<T>, q: T) -> i32 {
    if q > T::zero() && MomentumClassification::of(params, q).flat_band_point {
        5
    } else {
        8
    }
}

fn eigen_at<T: Scalar>(params: &LatticeParams<T>, fiber: &FiberParams<T>, q: T) -> Result<FiberEigenvalue<T>> {
    let point = SpectralPoint::from_signed_momentum(q);
    let mut f = f_signed(params, fiber.tau, q);
    if q > T::zero() {
        // on the eigenvalue |f| = √(1 + G²) with f opposite in sign to G;
        // this avoids the cancellation in f near flat-band points
        let dg = params.require_gamma_tilde()? - params.gamma();
        let g = dg * (q * params.a()).sin() / (q + q);
        if g != T::zero() {
            f = -g.signum() * (T::one() + g * g).sqrt();
        }
    }
    let (lp, lm) = lambdas_from_f(f)?;
    let branch = Branch::for_f(f);
    let (decaying, growing) = if f > T::zero() { (lm, lp) } else { (lp, lm) };
    Ok(FiberEigenvalue {
        fiber: *fiber,
        point,
        energy: point.energy(),
        branch,
        f_gamma: f,
        lambda_decaying: decaying,
        lambda_growing: growing,
        localization_length: decaying.abs().ln().abs().recip(),
    })
}

/// `ν_j = Λ^{|j|}` for `|j| ≤ j_max`, with `ν₀ = 1`.
pub fn mode_profile<T: Scalar>(eig: &FiberEigenvalue<T>, j_max: u32) -> ModeProfile<T> {
    let lam = eig.lambda_decaying;
    let j_max = j_max as i64;
    let vertex_values = (-j_max..=j_max).map(|j| (j, lam.powi(j.unsigned_abs() as i32))).collect();
    ModeProfile { vertex_values, decay_rate: lam.abs() }
}

// ═══════════════════════════════════════════════════════════════════════
// Whole-fiber scans
// ═══════════════════════════════════════════════════════════════════════

/// Bands of the unperturbed fiber on `window` (closures, merged).
pub fn fiber_bands<T: Scalar>(
    params: &LatticeParams<T>,
    fiber: &FiberParams<T>,
    window: EnergyInterval<T>,
) -> Vec<EnergyInterval<T>> {
    let tau = fiber.tau;
    let (q_lo, q_hi) = (signed_momentum_of(window.lo), signed_momentum_of(window.hi));
    let n = (((q_hi - q_lo) * params.max_edge() * T::lit(2000.0)).ceil().as_f64() as usize).max(256);
    let pts = linspace(q_lo, q_hi, n + 1);
    let flags: Vec<bool> = pts.par_iter().map(|&q| in_fiber_band_signed(params, tau, q)).collect();
    let tol = |q: T| T::tol_floor(T::lit(1e-12) * q.abs().max(T::one()), 4.0);
    let mut raw = Vec::new();
    let mut open = flags[0].then_some(q_lo);
    for i in 0..pts.len() - 1 {
        if flags[i] == flags[i + 1] {
            continue;
        }
        let (x, y) = (pts[i], pts[i + 1]);
        let pred = |q: T| in_fiber_band_signed(params, tau, q);
        if flags[i] {
            let (edge, _) = bisect_predicate(pred, x, y, tol(x));
            raw.push((open.take().unwrap(), edge));
        } else {
            let (edge, _) = bisect_predicate(pred, y, x, tol(x));
            open = Some(edge);
        }
    }
    if let Some(s) = open {
        raw.push((s, q_hi));
    }
    let ivs: Vec<_> = raw
        .into_iter()
        .map(|(a, b)| EnergyInterval::raw(energy_of_signed(a), energy_of_signed(b)))
        .collect();
    merge_intervals(&ivs, T::zero())
}

/// Fiber bands plus one eigenvalue search per gap piece. Gap pieces are split at
/// the poles of `f` (points of Ξ_b), where `f` changes sign through infinity.
pub fn fiber_spectrum<T: Scalar>(
    params: &LatticeParams<T>,
    fiber: &FiberParams<T>,
    window: EnergyInterval<T>,
) -> Result<FiberSpectrum<T>> {
    params.require_gamma_tilde()?;
    let bands = fiber_bands(params, fiber, window);
    let gaps = crate::interval::complement_within(window, &bands);
    let mut pieces = Vec::new();
    for g in gaps {
        let (mut lo, hi) = (signed_momentum_of(g.lo), signed_momentum_of(g.hi));
        let step = T::PI() / params.b();
        if hi > T::zero() {
            let mut j = (lo.max(T::zero()) / step).floor() + T::one();
            while j * step < hi {
                let pole = j * step;
                if pole > lo {
                    pieces.push((lo, pole));
                    lo = pole;
                }
                j = j + T::one();
            }
        }
        pieces.push((lo, hi));
    }
    let found: Vec<Result<Option<FiberEigenvalue<T>>>> =
        pieces.par_iter().map(|&(lo, hi)| fiber_eigenvalue_between(params, fiber, lo, hi)).collect();
    let mut eigenvalues = Vec::new();
    for r in found {
        if let Some(e) = r? {
            eigenvalues.push(e);
        }
    }
    Ok(FiberSpectrum { fiber: *fiber, bands, eigenvalues })
}
