//! Spectrum of the unperturbed lattice: positive bands, flat bands, the
//! negative band, and gap-edge classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{class2_residual, gamma_star, negative_edge_residual, xi_offset, HypScaled, Trig};
use crate::error::{Result, SpectrumError};
use crate::interval::merge_intervals;
use crate::rational::{rational_approx, MAX_DENOMINATOR, RELATIVE_TOLERANCE};
use crate::roots::{bisect_predicate, bracket_root, linspace};
use crate::scalar::Scalar;
use crate::types::{BandSet, EnergyInterval, LatticeParams, MomentumClassification, SpectralPoint};

/// Scan density in samples per unit of `k·max(a, b)`.
pub const SAMPLES_PER_UNIT: f64 = 2000.0;
/// Edge tolerance in `k`.
pub const EDGE_TOL_K: f64 = 1e-12;
/// Relative residual accepted for a band-edge condition.
pub const EDGE_RESIDUAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    XiPoint,
    ConditionEdge,
    SpectrumBottom,
}

/// An open gap of σ(H_γ) with classified edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRecord<T> {
    pub interval: EnergyInterval<T>,
    pub left_edge_kind: EdgeKind,
    pub right_edge_kind: EdgeKind,
    /// `None` for the semi-infinite gap.
    pub left_point: Option<SpectralPoint<T>>,
    pub right_point: SpectralPoint<T>,
}

impl<T: Scalar> GapRecord<T> {
    pub fn is_semi_infinite(&self) -> bool {
        self.left_point.is_none()
    }
}

/// Closure of the negative band with its defining roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativeBandRoots<T> {
    /// Root of `γ/(2κ) + tanh(κa/2) + tanh(κb/2) = 0`.
    pub kappa1: T,
    /// Root of `γ/(2κ) + coth(κa/2) + coth(κb/2) = 0`, present iff `γ < γ*`.
    pub kappa2: Option<T>,
}

// ═══════════════════════════════════════════════════════════════════════
// Membership
// ═══════════════════════════════════════════════════════════════════════

/// `m(k) = |sin ka| + |sin kb| − |γ sin ka sin kb/(2k) + sin k(a+b)|`, the band
/// condition multiplied through by `|sin kb|`, with its rounding allowance.
pub(crate) fn band_margin<T: Scalar>(params: &LatticeParams<T>, k: T) -> (T, T) {
    let t = Trig::new(params, k);
    let m = t.sa.abs() + t.sb.abs() - t.num.abs();
    // sin of a rounded argument carries an absolute error ~ε·(1 + k·len); near
    // flat-band points the margin vanishes to third order, so no relative scaling.
    let noise = T::epsilon() * T::lit(64.0) * (T::one() + k * (params.a() + params.b())) * t.scale().max(T::one());
    (m, noise)
}

/// `k² ∈ σ(H_γ)`; points of Ξ are in the spectrum.
pub fn band_membership_positive<T: Scalar>(params: &LatticeParams<T>, k: T) -> bool {
    if !(k > T::zero()) {
        return false;
    }
    if MomentumClassification::of(params, k).in_xi {
        return true;
    }
    let (m, noise) = band_margin(params, k);
    m >= -noise
}

/// `−κ² ∈ σ(H_γ)`.
pub fn band_membership_negative<T: Scalar>(params: &LatticeParams<T>, kappa: T) -> bool {
    if !(kappa > T::zero()) {
        return false;
    }
    let h = HypScaled::new(params, kappa);
    let m = h.damp + h.b_hat - h.a_hat.abs();
    m >= -T::epsilon() * T::lit(64.0) * (h.damp + h.b_hat + h.a_hat.abs())
}

/// `0 ∈ σ(H_γ)` iff `γ* ≤ γ ≤ 0`.
pub fn zero_in_spectrum<T: Scalar>(params: &LatticeParams<T>) -> bool {
    let g = params.gamma();
    g <= T::zero() && g >= gamma_star(params)
}

/// Whether `(0, δ)` lies in the spectrum for small `δ`: `γ* < γ ≤ 0`.
fn spectrum_touches_zero_from_above<T: Scalar>(params: &LatticeParams<T>) -> bool {
    let g = params.gamma();
    g <= T::zero() && g > gamma_star(params)
}

/// Membership of an arbitrary energy.
pub fn in_spectrum<T: Scalar>(params: &LatticeParams<T>, e: T) -> bool {
    match SpectralPoint::from_energy(e) {
        SpectralPoint::Positive { k } => band_membership_positive(params, k),
        SpectralPoint::Negative { kappa } => band_membership_negative(params, kappa),
        SpectralPoint::Zero => zero_in_spectrum(params),
    }
}

// ═══════════════════════════════════════════════════════════════════════
// Flat bands and the negative band
// ═══════════════════════════════════════════════════════════════════════

/// Energies `(nπ/a)² = (mπ/b)² ≤ e_max`.
pub fn flat_bands<T: Scalar>(params: &LatticeParams<T>, e_max: T) -> Vec<T> {
    let ratio = (params.b() / params.a()).as_f64();
    let Some(r) = rational_approx(ratio, MAX_DENOMINATOR, RELATIVE_TOLERANCE) else {
        return Vec::new();
    };
    // b/a = m/n: k = jnπ/a = jmπ/b
    let n = T::from_u64(*r.denom()).unwrap();
    let base = n * T::PI() / params.a();
    let mut out = Vec::new();
    let mut j = 1u64;
    loop {
        let k = base * T::from_u64(j).unwrap();
        let e = k * k;
        if !(e <= e_max) {
            break;
        }
        out.push(e);
        j += 1;
    }
    out
}

/// Roots `κ₁` and (for `γ < γ*`) `κ₂`; `None` for `γ ≥ 0`.
pub fn negative_band_roots<T: Scalar>(params: &LatticeParams<T>) -> Result<Option<NegativeBandRoots<T>>> {
    let g = params.gamma();
    if g >= T::zero() {
        return Ok(None);
    }
    let (a, b) = (params.a(), params.b());
    let half = T::lit(0.5);
    // κ·(γ/(2κ) + tanh(κa/2) + tanh(κb/2)), increasing from γ/2 < 0 to +∞
    let h1 = |kappa: T| g * half + kappa * ((kappa * a * half).tanh() + (kappa * b * half).tanh());
    let kappa1 = grow_and_solve(h1, -g / T::lit(8.0))?;
    let kappa2 = if g < gamma_star(params) {
        // κ·coth(κL/2) → 2/L as κ → 0
        let kcoth = |kappa: T, len: T| {
            if kappa == T::zero() {
                T::lit(2.0) / len
            } else {
                kappa / (kappa * len * half).tanh()
            }
        };
        let h2 = |kappa: T| g * half + kcoth(kappa, a) + kcoth(kappa, b);
        Some(grow_and_solve(h2, T::zero())?)
    } else {
        None
    };
    Ok(Some(NegativeBandRoots { kappa1, kappa2 }))
}

/// Root of an increasing `h` with `h(lo) < 0`, bracket grown geometrically.
fn grow_and_solve<T: Scalar, F: Fn(T) -> T>(h: F, lo: T) -> Result<T> {
    let mut hi = lo.max(T::one());
    let mut n = 0;
    while h(hi) <= T::zero() {
        hi = hi * T::lit(2.0);
        n += 1;
        if n > 2000 || !hi.is_finite() {
            return Err(SpectrumError::Internal("negative-band root bracket did not close".into()));
        }
    }
    let tol = T::tol_floor(hi * T::lit(1e-15), 4.0);
    bracket_root(h, lo, hi, tol)
}

/// `σ(H_γ) ∩ (−∞, 0] = [−κ₁², E₂]`.
pub fn negative_band<T: Scalar>(params: &LatticeParams<T>) -> Result<Option<EnergyInterval<T>>> {
    Ok(negative_band_roots(params)?.map(|r| {
        let hi = r.kappa2.map_or(T::zero(), |k2| -(k2 * k2));
        EnergyInterval::raw(-(r.kappa1 * r.kappa1), hi)
    }))
}

// ═══════════════════════════════════════════════════════════════════════
// Band assembly
// ═══════════════════════════════════════════════════════════════════════

/// Closures of the positive bands on `[k_lo, k_hi]`, as momentum intervals.
pub(crate) fn scan_positive_k<T: Scalar>(params: &LatticeParams<T>, k_lo: T, k_hi: T) -> Vec<(T, T)> {
    if !(k_hi > k_lo) {
        return Vec::new();
    }
    let maxe = params.max_edge();
    let tiny = T::lit(1e-9) * T::PI() / maxe;
    let from_zero = k_lo <= T::zero();
    let k_start = if from_zero { tiny.min(k_hi) } else { k_lo };
    let span = (k_hi - k_start).max(T::zero());
    let n = ((span * maxe * T::lit(SAMPLES_PER_UNIT)).ceil().as_f64() as usize).max(64);
    let mut pts = linspace(k_start, k_hi, n + 1);

    // Every gap has a Ξ point at one edge; probe both sides of each one.
    let delta = xi_offset(params);
    for len in [params.a(), params.b()] {
        let step = T::PI() / len;
        let mut j = (k_start / step).floor() + T::one();
        loop {
            let k0 = j * step;
            if k0 >= k_hi {
                break;
            }
            for x in [k0 - delta, k0, k0 + delta] {
                if x > k_start && x < k_hi {
                    pts.push(x);
                }
            }
            j = j + T::one();
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();

    let mut flags: Vec<bool> = pts.par_iter().map(|&k| band_membership_positive(params, k)).collect();
    if from_zero {
        flags[0] = spectrum_touches_zero_from_above(params);
    }

    let edge_tol = |k: T| T::lit(EDGE_TOL_K).max(T::epsilon() * T::lit(4.0) * k);
    // (index of last sample before the transition, in-band side is left?)
    let transitions: Vec<usize> = (0..pts.len() - 1).filter(|&i| flags[i] != flags[i + 1]).collect();
    let refined: Vec<T> = transitions
        .par_iter()
        .map(|&i| {
            let (x, y) = (pts[i], pts[i + 1]);
            let in_left = flags[i];
            let (p_in, p_out) = if in_left { (x, y) } else { (y, x) };
            let (edge, _) = bisect_predicate(|k| band_membership_positive(params, k), p_in, p_out, edge_tol(x));
            snap_to_xi(params, edge)
        })
        .collect();

    let mut out = Vec::new();
    let mut open: Option<T> = if flags[0] { Some(if from_zero { T::zero() } else { k_start }) } else { None };
    for (idx, &i) in transitions.iter().enumerate() {
        let edge = refined[idx];
        if flags[i] {
            let start = open.take().expect("band open before its upper edge");
            out.push((start, edge));
        } else {
            open = Some(edge);
        }
        let _ = i;
    }
    if let Some(start) = open {
        out.push((start, k_hi));
    }
    out
}

/// Snap radius for band edges next to Ξ points, relative in `k·len`. At
/// flat-band points the band margin is second order in `k − k₀`, so rounding
/// noise blurs the edge over ~1e−7; no real gap is that narrow at these scales.
pub const XI_SNAP_RELATIVE: f64 = 1e-6;

/// Replaces an edge lying next to a Ξ point by the exact Ξ point.
fn snap_to_xi<T: Scalar>(params: &LatticeParams<T>, k: T) -> T {
    let rel = T::tol_floor(T::lit(XI_SNAP_RELATIVE), 16.0);
    for len in [params.a(), params.b()] {
        let step = T::PI() / len;
        let k0 = (k / step).round() * step;
        if k0 > T::zero() && (k - k0).abs() * len <= rel * (k * len).max(T::one()) {
            return k0;
        }
    }
    k
}

/// σ(H_γ) on `window`: positive bands, negative band, zero, flat bands.
pub fn compute_bands<T: Scalar>(params: &LatticeParams<T>, window: EnergyInterval<T>) -> Result<BandSet<T>> {
    if !(window.lo < window.hi) || !window.lo.is_finite() || !window.hi.is_finite() {
        return Err(SpectrumError::InvalidParameter(format!(
            "window needs finite lo < hi, got [{}, {}]",
            window.lo, window.hi
        )));
    }
    let params = params.unperturbed();
    let mut raw = Vec::new();
    if window.hi > T::zero() {
        let k_lo = window.lo.max(T::zero()).sqrt();
        for (k0, k1) in scan_positive_k(&params, k_lo, window.hi.sqrt()) {
            let lo = if k0 == T::zero() { T::zero() } else { (k0 * k0).max(window.lo) };
            let hi = (k1 * k1).min(window.hi);
            if lo <= hi {
                raw.push(EnergyInterval::raw(lo, hi));
            }
        }
    }
    let negative = negative_band(&params)?;
    if let Some(nb) = negative {
        if let Some(clipped) = nb.intersect(&window) {
            raw.push(clipped);
        }
    }
    if zero_in_spectrum(&params) && window.contains(T::zero()) {
        raw.push(EnergyInterval::raw(T::zero(), T::zero()));
    }
    let mut bands = merge_intervals(&raw, T::zero());
    // A lone [0, 0] only survives when it is genuinely isolated.
    bands.retain(|b| !b.is_degenerate() || b.lo == T::zero());
    let flat = flat_bands(&params, window.hi).into_iter().filter(|&e| e >= window.lo).collect();
    Ok(BandSet { bands, flat_bands: flat, window, negative_band: negative })
}

// ═══════════════════════════════════════════════════════════════════════
// Gap edges
// ═══════════════════════════════════════════════════════════════════════

/// Tags a band edge at energy `e` as a Ξ point or a band-edge condition root.
pub fn classify_edge<T: Scalar>(params: &LatticeParams<T>, e: T) -> Result<(EdgeKind, SpectralPoint<T>)> {
    let tol = T::tol_floor(T::lit(EDGE_RESIDUAL_TOL), 1e4);
    let point = SpectralPoint::from_energy(e);
    let kind = match point {
        SpectralPoint::Positive { k } => {
            if MomentumClassification::of(params, k).in_xi {
                Some(EdgeKind::XiPoint)
            } else if class2_residual(params, k).abs() <= tol {
                Some(EdgeKind::ConditionEdge)
            } else {
                None
            }
        }
        SpectralPoint::Zero => Some(EdgeKind::ConditionEdge),
        SpectralPoint::Negative { kappa } => {
            (negative_edge_residual(params, kappa).abs() <= tol).then_some(EdgeKind::ConditionEdge)
        }
    };
    kind.map(|k| (k, point)).ok_or(SpectrumError::UnclassifiedEdge { energy: e.as_f64() })
}

/// Finite gaps of `bandset` with both edges classified.
pub fn classify_gap_edges<T: Scalar>(params: &LatticeParams<T>, bandset: &BandSet<T>) -> Result<Vec<GapRecord<T>>> {
    bandset
        .gaps()
        .into_iter()
        .map(|gap| {
            let (lk, lp) = classify_edge(params, gap.lo)?;
            let (rk, rp) = classify_edge(params, gap.hi)?;
            Ok(GapRecord { interval: gap, left_edge_kind: lk, right_edge_kind: rk, left_point: Some(lp), right_point: rp })
        })
        .collect()
}

/// Bottom of σ(H_γ).
pub fn spectrum_bottom<T: Scalar>(params: &LatticeParams<T>) -> Result<T> {
    let params = params.unperturbed();
    if let Some(nb) = negative_band(&params)? {
        return Ok(nb.lo);
    }
    if params.gamma() == T::zero() {
        return Ok(T::zero());
    }
    // γ > 0: the first Ξ point lies in σ, so the first band starts below it.
    let k_top = T::PI() / params.max_edge() * T::lit(1.0001);
    let bands = scan_positive_k(&params, T::zero(), k_top);
    let (k0, _) = bands.first().copied().ok_or_else(|| SpectrumError::Internal("no band below the first Xi point".into()))?;
    Ok(k0 * k0)
}

/// The gap `(−∞, inf σ(H_γ))`.
pub fn semi_infinite_gap<T: Scalar>(params: &LatticeParams<T>) -> Result<GapRecord<T>> {
    let bottom = spectrum_bottom(params)?;
    let (kind, point) = classify_edge(&params.unperturbed(), bottom)?;
    Ok(GapRecord {
        interval: EnergyInterval::raw(T::neg_infinity(), bottom),
        left_edge_kind: EdgeKind::SpectrumBottom,
        right_edge_kind: kind,
        left_point: None,
        right_point: point,
    })
}

/// The semi-infinite gap followed by the classified finite gaps in `window`.
pub fn gaps_in_window<T: Scalar>(params: &LatticeParams<T>, window: EnergyInterval<T>) -> Result<Vec<GapRecord<T>>> {
    let params = params.unperturbed();
    let bottom = semi_infinite_gap(&params)?;
    let lo = window.lo.min(bottom.interval.hi);
    let span = EnergyInterval::new(lo, window.hi.max(lo + T::one()))?;
    let bs = compute_bands(&params, span)?;
    let mut out = vec![bottom];
    out.extend(classify_gap_edges(&params, &bs)?.into_iter().filter(|g| g.interval.hi > window.lo));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn lp(a: f64, b: f64, g: f64) -> LatticeParams<f64> {
        LatticeParams::new(a, b, g).unwrap()
    }

    fn win(lo: f64, hi: f64) -> EnergyInterval<f64> {
        EnergyInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn gamma_zero_everything_in_band() {
        let p = lp(1.0, 3.0, 0.0);
        for i in 1..2000 {
            assert!(band_membership_positive(&p, 0.00731 * i as f64));
        }
        let bs = compute_bands(&p, win(0.0, 50.0)).unwrap();
        assert_eq!(bs.bands, vec![win(0.0, 50.0)]);
        assert!(classify_gap_edges(&p, &bs).unwrap().is_empty());
    }

    #[test]
    fn xi_points_are_members() {
        let p = lp(1.0, 3.0, 4.0);
        for n in 1..10 {
            assert!(band_membership_positive(&p, n as f64 * PI));
            assert!(band_membership_positive(&p, n as f64 * PI / 3.0));
        }
    }

    #[test]
    fn negative_membership_examples() {
        assert!(band_membership_negative(&lp(1.0, 3.0, -4.0), 1.0));
        assert!(!band_membership_negative(&lp(1.0, 3.0, -4.0), 2.0));
        for i in 1..100 {
            assert!(!band_membership_negative(&lp(1.0, 3.0, 0.5), 0.1 * i as f64));
        }
    }

    #[test]
    fn flat_band_examples() {
        let f = flat_bands(&lp(3.0, 2.0, 0.0), 20.0);
        assert_eq!(f.len(), 1);
        assert_eq!(flat_bands(&lp(3.0, 2.0, 0.0), 40.0).len(), 2);
        assert_relative_eq!(f[0], PI * PI, max_relative = 1e-12);
        let f = flat_bands(&lp(1.0, 3.0, 0.0), 15.0);
        assert_eq!(f.len(), 1);
        assert_relative_eq!(f[0], PI * PI, max_relative = 1e-12);
        let phi = (5f64.sqrt() + 1.0) / 2.0;
        assert!(flat_bands(&lp(phi, 1.0, 0.0), 1e6).is_empty());
    }

    #[test]
    fn negative_band_examples() {
        assert!(negative_band(&lp(1.0, 3.0, 1.0)).unwrap().is_none());
        let nb = negative_band(&lp(1.0, 3.0, -4.0)).unwrap().unwrap();
        assert_eq!(nb.hi, 0.0);
        let k1 = (-nb.lo).sqrt();
        assert!((k1 - 1.30).abs() < 0.01, "{k1}");
        let r = negative_band_roots(&lp(1.0, 3.0, -6.0)).unwrap().unwrap();
        let k2 = r.kappa2.unwrap();
        assert!(0.0 < k2 && k2 < r.kappa1);
    }

    #[test]
    fn golden_mean_bands() {
        let phi = (5f64.sqrt() + 1.0) / 2.0;
        let p = lp(phi, 1.0, -2.72);
        let bs = compute_bands(&p, win(0.0, 40.0)).unwrap();
        let gaps: Vec<_> = bs.gaps().into_iter().filter(|g| g.lo > 0.0).collect();
        assert!(!gaps.is_empty());
        assert!((3.5..4.0).contains(&gaps[0].midpoint()), "{gaps:?}");
    }

    #[test]
    fn gap_edge_orientation_gamma_positive() {
        let p = lp(1.0, 3.0, 4.0);
        let bs = compute_bands(&p, win(0.0, 60.0)).unwrap();
        let gaps = classify_gap_edges(&p, &bs).unwrap();
        assert!(gaps.len() >= 3);
        for g in gaps {
            assert_eq!(g.left_edge_kind, EdgeKind::XiPoint, "{g:?}");
            assert_eq!(g.right_edge_kind, EdgeKind::ConditionEdge, "{g:?}");
        }
    }

    #[test]
    fn gap_edge_orientation_gamma_negative() {
        let p = lp(1.0, 3.0, -4.0);
        let bs = compute_bands(&p, win(0.0, 60.0)).unwrap();
        let gaps = classify_gap_edges(&p, &bs).unwrap();
        assert!(!gaps.is_empty());
        for g in gaps {
            assert_eq!(g.left_edge_kind, EdgeKind::ConditionEdge, "{g:?}");
            assert_eq!(g.right_edge_kind, EdgeKind::XiPoint, "{g:?}");
        }
    }

    #[test]
    fn flat_band_at_band_edge() {
        let p = lp(3.0, 2.0, -6.0);
        let bs = compute_bands(&p, win(-20.0, 40.0)).unwrap();
        let e = PI * PI;
        assert_relative_eq!(bs.flat_bands[0], e, max_relative = 1e-12);
        let at_edge = bs.bands.iter().any(|b| (b.lo - e).abs() < 1e-9 * e || (b.hi - e).abs() < 1e-9 * e);
        assert!(at_edge, "{:?}", bs.bands);
    }

    #[test]
    fn threshold_at_gamma_star() {
        let p = lp(1.0, 3.0, 0.0);
        let gs = gamma_star(&p);
        for i in 0..20 {
            let g = gs - 1.0 + 2.0 * i as f64 / 19.0 * 1.5;
            let q = lp(1.0, 3.0, g);
            let bs = compute_bands(&q, win(0.0, 12.0)).unwrap();
            let first = bs.positive_bands()[0];
            if g > gs && g <= 0.0 {
                assert!(first.lo < 1e-6, "γ={g}: {first:?}");
            } else {
                assert!(first.lo > 1e-4, "γ={g}: {first:?}");
            }
        }
    }

    #[test]
    fn semi_infinite_bottoms() {
        assert_eq!(spectrum_bottom(&lp(1.0, 3.0, 0.0)).unwrap(), 0.0);
        let b = spectrum_bottom(&lp(1.0, 3.0, 4.0)).unwrap();
        assert!((b - 0.58436).abs() < 1e-4, "{b}");
        let g = semi_infinite_gap(&lp(1.0, 3.0, -4.0)).unwrap();
        assert_eq!(g.right_edge_kind, EdgeKind::ConditionEdge);
    }
}
