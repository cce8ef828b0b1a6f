//! New bands created by perturbing one chain of couplings, gap closures and
//! the perturbation regime.

use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{
    bc_membership, edge_curve_signed, f_signed, negative_limits_unchecked, type1_even_limits, type1_odd_limits,
    type2_edge_limits, Branch, EdgeConstants,
};
use crate::error::{Result, SpectrumError};
use crate::fiber::semi_infinite_floor;
use crate::roots::{bracket_root, midpoints};
use crate::scalar::Scalar;
use crate::types::{energy_of_signed, signed_momentum_of, EnergyInterval, LatticeParams, MomentumClassification, SpectralPoint};
use crate::unperturbed::{gaps_in_window, EdgeKind, GapRecord};

/// Relative energy distance below which a new band touches a gap edge.
pub const TOUCH_TOL: f64 = 1e-7;
const CURVE_SAMPLES: usize = 4096;

/// A band of σ(H_{γ,γ̃}) inside one gap of σ(H_γ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewBand<T> {
    pub gap: GapRecord<T>,
    pub interval: EnergyInterval<T>,
    /// `Plus` is BC⁺ (`G > 0`, `f < −1`), `Minus` is BC⁻.
    pub condition: Branch,
    pub touches_lower_edge: bool,
    pub touches_upper_edge: bool,
}

impl<T: Scalar> NewBand<T> {
    /// The band fills the closure of a finite gap.
    pub fn closes_gap(&self) -> bool {
        !self.gap.is_semi_infinite() && self.touches_lower_edge && self.touches_upper_edge
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeCase {
    /// `γ < 0`, `γ̃ < γ`.
    I,
    /// `γ < 0`, `γ̃ > γ`.
    Ii,
    /// `γ > 0`, `γ̃ < γ`.
    Iii,
    /// `γ > 0`, `γ̃ > γ`.
    Iv,
}

impl RegimeCase {
    pub fn label(self) -> &'static str {
        match self {
            RegimeCase::I => "i",
            RegimeCase::Ii => "ii",
            RegimeCase::Iii => "iii",
            RegimeCase::Iv => "iv",
        }
    }

    /// `γ = 0` is assigned by the sign of `γ̃`: negative to `i`, positive to `iv`.
    pub fn of(gamma: f64, gamma_tilde: f64) -> Self {
        let down = gamma_tilde < gamma;
        if gamma < 0.0 || (gamma == 0.0 && down) {
            if down {
                RegimeCase::I
            } else {
                RegimeCase::Ii
            }
        } else if down {
            RegimeCase::Iii
        } else {
            RegimeCase::Iv
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport<T> {
    pub case: RegimeCase,
    pub per_gap: Vec<(GapRecord<T>, Option<NewBand<T>>)>,
    pub closed_gaps: Vec<GapRecord<T>>,
    pub spectrum_unchanged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapEdge {
    Lower,
    Upper,
}

/// When a new band reaches a gap edge, as a condition on `γ̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", content = "threshold", rename_all = "snake_case")]
pub enum TouchRule<T> {
    /// Both edge curves diverge to the same side.
    Never,
    AtMost(T),
    AtLeast(T),
    /// Closed interval between the two edge-curve limits.
    Between(T, T),
}

impl<T: Scalar> TouchRule<T> {
    pub fn admits(&self, gamma_tilde: T) -> bool {
        match *self {
            TouchRule::Never => false,
            TouchRule::AtMost(t) => gamma_tilde <= t,
            TouchRule::AtLeast(t) => gamma_tilde >= t,
            TouchRule::Between(lo, hi) => lo <= gamma_tilde && gamma_tilde <= hi,
        }
    }

    /// Distance from `gamma_tilde` to the nearest threshold.
    pub fn margin(&self, gamma_tilde: T) -> T {
        match *self {
            TouchRule::Never => T::infinity(),
            TouchRule::AtMost(t) | TouchRule::AtLeast(t) => (gamma_tilde - t).abs(),
            TouchRule::Between(lo, hi) => (gamma_tilde - lo).abs().min((gamma_tilde - hi).abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeTouchPrediction<T> {
    pub edge: GapEdge,
    pub kind: EdgeKind,
    pub point: SpectralPoint<T>,
    pub constants: Option<EdgeConstants<T>>,
    pub rule: TouchRule<T>,
}

/// `γ̃ ∈ S_{γ,γ̃}` at `point`: one of the two perturbed band conditions holds.
pub fn s_membership<T: Scalar>(params: &LatticeParams<T>, point: SpectralPoint<T>) -> Result<bool> {
    Ok(bc_membership(params, point)?.is_member())
}

/// Signed-momentum extent of a gap; the semi-infinite gap is truncated at `−κ_max`.
fn gap_span<T: Scalar>(params: &LatticeParams<T>, gap: &GapRecord<T>) -> Result<(T, T)> {
    let hi = signed_momentum_of(gap.interval.hi);
    let lo = if gap.is_semi_infinite() { semi_infinite_floor(params, hi)? } else { signed_momentum_of(gap.interval.lo) };
    Ok((lo, hi))
}

/// Branch of a gap: the sign of `f_τ` is the same for every `τ` inside it.
pub fn gap_branch<T: Scalar>(params: &LatticeParams<T>, gap: &GapRecord<T>) -> Result<Branch> {
    let (lo, hi) = gap_span(params, gap)?;
    Ok(Branch::for_f(f_signed(params, T::zero(), (lo + hi) * T::lit(0.5))))
}

/// The part of S_{γ,γ̃} inside `gap`: where `γ̃` lies between the two edge
/// curves `g_s(±1; q)`, `s` the branch of the gap.
pub fn new_band_in_gap<T: Scalar>(params: &LatticeParams<T>, gap: &GapRecord<T>) -> Result<Option<NewBand<T>>> {
    let gt = params.require_gamma_tilde()?;
    let (q_lo, q_hi) = gap_span(params, gap)?;
    let branch = gap_branch(params, gap)?;
    let s = branch.sign::<T>();
    let curve = |tau: T, q: T| edge_curve_signed(params, tau, q, s) - gt;

    let width = q_hi - q_lo;
    let mut pts = midpoints(q_lo, q_hi, CURVE_SAMPLES);
    // Crossings closer to an edge than the uniform spacing. Next to a Ξ_a edge
    // `f² − 1` is lost to rounding within ~1e-13 of the width, and within ~√ε
    // at a flat-band point where both sines vanish.
    let depth = |point: Option<SpectralPoint<T>>| match point {
        Some(SpectralPoint::Positive { k }) if MomentumClassification::of(params, k).flat_band_point => 5,
        Some(_) => 8,
        None => 0,
    };
    let lo_point = if gap.is_semi_infinite() { None } else { gap.left_point };
    for m in 3..=depth(lo_point) {
        pts.push(q_lo + width * T::lit(10f64.powi(-m)));
    }
    for m in 3..=depth(Some(gap.right_point)) {
        pts.push(q_hi - width * T::lit(10f64.powi(-m)));
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut cuts = vec![q_lo, q_hi];
    for tau in [T::one(), -T::one()] {
        let vals: Vec<T> = pts.iter().map(|&q| curve(tau, q)).collect();
        for i in 0..pts.len() - 1 {
            let (x, y) = (vals[i], vals[i + 1]);
            if x.is_finite() && y.is_finite() && (x < T::zero()) != (y < T::zero()) {
                let tol = T::tol_floor(T::lit(1e-14) * pts[i].abs().max(T::one()), 4.0);
                cuts.push(bracket_root(|q| curve(tau, q), pts[i], pts[i + 1], tol)?);
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();

    let between = |q: T| {
        let (p, m) = (curve(T::one(), q), curve(-T::one(), q));
        (p <= T::zero()) != (m < T::zero()) || p == T::zero() || m == T::zero()
    };
    let mut runs: Vec<(T, T)> = Vec::new();
    for w in cuts.windows(2) {
        if w[1] <= w[0] || !between((w[0] + w[1]) * T::lit(0.5)) {
            continue;
        }
        match runs.last_mut() {
            Some(last) if last.1 == w[0] => last.1 = w[1],
            _ => runs.push((w[0], w[1])),
        }
    }
    match runs.len() {
        0 => Ok(None),
        1 => {
            let (lo, hi) = runs[0];
            let interval = EnergyInterval::raw(energy_of_signed(lo), energy_of_signed(hi));
            let touches = |e: T, edge: T| (e - edge).abs() <= T::lit(TOUCH_TOL) * edge.abs().max(T::one());
            Ok(Some(NewBand {
                gap: *gap,
                interval,
                condition: branch,
                touches_lower_edge: !gap.is_semi_infinite() && touches(interval.lo, gap.interval.lo),
                touches_upper_edge: touches(interval.hi, gap.interval.hi),
            }))
        }
        _ => Err(SpectrumError::ConnectivityViolation {
            lo: energy_of_signed(runs[0].0).as_f64(),
            hi: energy_of_signed(runs[runs.len() - 1].1).as_f64(),
        }),
    }
}

/// New bands in the semi-infinite gap and every gap of σ(H_γ) meeting `window`.
pub fn new_bands_in_gaps<T: Scalar>(params: &LatticeParams<T>, window: EnergyInterval<T>) -> Result<Vec<NewBand<T>>> {
    Ok(per_gap(params, window)?.into_iter().filter_map(|(_, b)| b).collect())
}

fn per_gap<T: Scalar>(
    params: &LatticeParams<T>,
    window: EnergyInterval<T>,
) -> Result<Vec<(GapRecord<T>, Option<NewBand<T>>)>> {
    params.require_gamma_tilde()?;
    let gaps = gaps_in_window(params, window)?;
    let found: Vec<Result<Option<NewBand<T>>>> = gaps.par_iter().map(|g| new_band_in_gap(params, g)).collect();
    gaps.into_iter().zip(found).map(|(g, b)| Ok((g, b?))).collect()
}

pub fn classify_regime<T: Scalar>(params: &LatticeParams<T>, window: EnergyInterval<T>) -> Result<RegimeReport<T>> {
    let gt = params.require_gamma_tilde()?;
    if gt == params.gamma() {
        return Err(SpectrumError::NoPerturbation);
    }
    let case = RegimeCase::of(params.gamma().as_f64(), gt.as_f64());
    let per_gap = per_gap(params, window)?;
    let closed_gaps = per_gap.iter().filter(|(_, b)| b.is_some_and(|b| b.closes_gap())).map(|(g, _)| *g).collect();
    let spectrum_unchanged = per_gap.iter().all(|(_, b)| b.is_none());
    Ok(RegimeReport { case, per_gap, closed_gaps, spectrum_unchanged })
}

/// Touch rules for both edges of a gap (only the upper one for the semi-infinite gap).
pub fn edge_touch_predictions<T: Scalar>(
    params: &LatticeParams<T>,
    gap: &GapRecord<T>,
) -> Result<Vec<EdgeTouchPrediction<T>>> {
    let branch = gap_branch(params, gap)?;
    let mut out = Vec::with_capacity(2);
    if let Some(p) = gap.left_point {
        out.push(predict_edge(params, GapEdge::Lower, gap.left_edge_kind, p, branch)?);
    }
    out.push(predict_edge(params, GapEdge::Upper, gap.right_edge_kind, gap.right_point, branch)?);
    Ok(out)
}

fn predict_edge<T: Scalar>(
    params: &LatticeParams<T>,
    edge: GapEdge,
    kind: EdgeKind,
    point: SpectralPoint<T>,
    branch: Branch,
) -> Result<EdgeTouchPrediction<T>> {
    let g = params.gamma();
    let (constants, rule) = match (kind, point) {
        (EdgeKind::XiPoint, SpectralPoint::Positive { k }) => xi_rule(params, edge, k, branch)?,
        (EdgeKind::ConditionEdge, SpectralPoint::Positive { k }) => {
            let c = type2_edge_limits(params, k)?;
            let EdgeConstants::Type2 { gamma_tilde_p, branch: b, .. } = c else { unreachable!() };
            if b != branch {
                return Err(SpectrumError::BranchMismatch { branch: b.name(), f: k.as_f64() });
            }
            (Some(c), TouchRule::Between(g.min(gamma_tilde_p), g.max(gamma_tilde_p)))
        }
        (EdgeKind::ConditionEdge, SpectralPoint::Negative { .. } | SpectralPoint::Zero) => {
            let kappa = -point.signed_momentum();
            let c = negative_limits_unchecked(params, kappa);
            let EdgeConstants::Negative { gamma_tilde_n1, gamma_tilde_n2, .. } = c else { unreachable!() };
            let rule = match branch {
                Branch::Plus => TouchRule::Between(g, gamma_tilde_n1),
                Branch::Minus => TouchRule::Between(gamma_tilde_n2, g),
            };
            (Some(c), rule)
        }
        _ => {
            return Err(SpectrumError::UnclassifiedEdge { energy: point.energy().as_f64() });
        }
    };
    Ok(EdgeTouchPrediction { edge, kind, point, constants, rule })
}

/// At a Ξ_b point one edge curve has a finite limit and the other diverges; at
/// a Ξ_a point both diverge to the same side.
fn xi_rule<T: Scalar>(
    params: &LatticeParams<T>,
    edge: GapEdge,
    k: T,
    branch: Branch,
) -> Result<(Option<EdgeConstants<T>>, TouchRule<T>)> {
    if MomentumClassification::of(params, k).in_xi_a {
        return Ok((None, TouchRule::Never));
    }
    let m = (k * params.b() / T::PI()).round().to_u32().unwrap_or(0);
    let (c, pair, tau_div) = if m % 2 == 1 {
        let c = type1_odd_limits(params, m.div_ceil(2))?;
        let EdgeConstants::Type1Odd { gamma_tilde_o, .. } = c else { unreachable!() };
        (c, gamma_tilde_o, T::one())
    } else {
        let c = type1_even_limits(params, m / 2)?;
        let EdgeConstants::Type1Even { gamma_tilde_e, .. } = c else { unreachable!() };
        (c, gamma_tilde_e, -T::one())
    };
    let Some(pair) = pair else { return Ok((Some(c), TouchRule::Never)) };
    let limit = pair.get(branch);
    let inward = match edge {
        GapEdge::Lower => T::one(),
        GapEdge::Upper => -T::one(),
    };
    let probe = k * (T::one() + inward * T::lit(1e-6));
    let divergent = edge_curve_signed(params, tau_div, probe, branch.sign());
    let rule = if divergent > limit { TouchRule::AtLeast(limit) } else { TouchRule::AtMost(limit) };
    Ok((Some(c), rule))
}
