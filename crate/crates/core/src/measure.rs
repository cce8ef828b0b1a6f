//! Spectral-measure estimators: the fraction of energies in σ(H_γ) and in
//! S_{γ,γ̃}, and the high-energy split probabilities `p₁`, `p₂`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{bc_positive, xi_functions, BcMembership};
use crate::error::Result;
use crate::perturbed::s_membership;
use crate::rational::{rational_approx, MAX_DENOMINATOR, RELATIVE_TOLERANCE};
use crate::scalar::Scalar;
use crate::types::{EnergyInterval, LatticeParams, SpectralPoint};
use crate::unperturbed::{compute_bands, in_spectrum};

/// Minimum accepted sample count.
pub const MIN_SAMPLES: usize = 10_000;
const SHARD: usize = 1 << 14;
/// `xi_split` ignores `k < XI_CUTOFF_SCALE / min(a, b)`.
pub const XI_CUTOFF_SCALE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    /// Cell midpoints of a uniform grid.
    Grid,
    /// Uniform draws; shard `i` uses stream `i` of a ChaCha8 generator seeded with `seed`.
    MonteCarlo { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiSplit<T> {
    pub p1: T,
    pub p2: T,
    /// Lower end of the sampled momentum range.
    pub k_cutoff: T,
    pub sample_count: usize,
}

/// Fractions of S-members among momenta with `(γ̃ − γ) sin ka > 0` (BC⁺ side)
/// and `< 0` (BC⁻ side).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSplit<T> {
    pub plus_fraction: T,
    pub minus_fraction: T,
    pub plus_samples: usize,
    pub minus_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureReport<T> {
    /// Energy cutoff `K`.
    pub energy_cutoff: T,
    /// Sampled in energy.
    pub p_sigma: T,
    /// `|σ ∩ [0, K]| / K` from the band set.
    pub p_sigma_bands: T,
    /// Sampled in energy; present when `γ̃` is set.
    pub p_s: Option<T>,
    /// Sampled in momentum above `xi_k_cutoff`.
    pub p1: T,
    pub p2: T,
    pub xi_k_cutoff: T,
    pub sample_count: usize,
    pub estimator: Estimator,
}

/// `√(p(1 − p)/n)`.
pub fn binomial_standard_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n.max(1) as f64).sqrt()
}

/// Evaluates `f` at `n` points of `(lo, hi]` and sums the returned counters.
fn sample_sum<T, F, const N: usize>(lo: T, hi: T, n: usize, est: Estimator, f: F) -> [usize; N]
where
    T: Scalar,
    F: Fn(T) -> [usize; N] + Sync,
{
    let shards = n.div_ceil(SHARD);
    let width = hi - lo;
    let n_t = T::from_usize(n).unwrap();
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let range = s * SHARD..((s + 1) * SHARD).min(n);
            let mut acc = [0usize; N];
            let mut add = |x: T| {
                for (a, v) in acc.iter_mut().zip(f(x)) {
                    *a += v;
                }
            };
            match est {
                Estimator::Grid => {
                    for i in range {
                        add(lo + width * (T::from_usize(i).unwrap() + T::lit(0.5)) / n_t);
                    }
                }
                Estimator::MonteCarlo { seed } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(s as u64);
                    for _ in range {
                        // (0, 1] keeps the upper end and drops the lower one.
                        let u: f64 = 1.0 - rng.random::<f64>();
                        add(lo + width * T::lit(u));
                    }
                }
            }
            acc
        })
        .reduce(|| [0usize; N], |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        })
}

fn fraction<T: Scalar>(count: usize, n: usize) -> T {
    T::from_usize(count).unwrap() / T::from_usize(n.max(1)).unwrap()
}

/// `|σ(H_γ) ∩ [0, K]| / K` by membership sampling in energy.
pub fn sigma_measure<T: Scalar>(params: &LatticeParams<T>, k_energy: T, samples: usize) -> T {
    sigma_measure_with(params, k_energy, samples, Estimator::Grid)
}

pub fn sigma_measure_with<T: Scalar>(params: &LatticeParams<T>, k_energy: T, samples: usize, est: Estimator) -> T {
    let p = params.unperturbed();
    let n = samples.max(MIN_SAMPLES);
    let [hits] = sample_sum(T::zero(), k_energy, n, est, |e| [in_spectrum(&p, e) as usize]);
    fraction(hits, n)
}

/// `|σ(H_γ) ∩ [0, K]| / K` from the total length of the computed bands.
pub fn sigma_measure_from_bands<T: Scalar>(params: &LatticeParams<T>, k_energy: T) -> Result<T> {
    let bs = compute_bands(&params.unperturbed(), EnergyInterval::new(T::zero(), k_energy)?)?;
    Ok(bs.measure() / k_energy)
}

/// Fraction of `E ∈ (0, K]` in S_{γ,γ̃}.
pub fn s_measure<T: Scalar>(params: &LatticeParams<T>, k_energy: T, samples: usize) -> Result<T> {
    s_measure_with(params, k_energy, samples, Estimator::Grid)
}

pub fn s_measure_with<T: Scalar>(params: &LatticeParams<T>, k_energy: T, samples: usize, est: Estimator) -> Result<T> {
    params.require_gamma_tilde()?;
    let n = samples.max(MIN_SAMPLES);
    let [hits] = sample_sum(T::zero(), k_energy, n, est, |e| {
        [s_membership(params, SpectralPoint::from_energy(e)).unwrap_or(false) as usize]
    });
    Ok(fraction(hits, n))
}

/// Lower end of the `xi_split` momentum range for a given `√K`.
pub fn xi_cutoff<T: Scalar>(params: &LatticeParams<T>, k_max: T) -> T {
    (T::lit(XI_CUTOFF_SCALE) / params.min_edge()).min(k_max * T::lit(0.5))
}

/// `(p₁, p₂)`: fractions of `k ∈ (k_cut, √K]` with `ξ₁(k) ≤ 0` and `ξ₂(k) ≤ 0`.
pub fn xi_split<T: Scalar>(params: &LatticeParams<T>, k_energy: T, samples: usize) -> XiSplit<T> {
    xi_split_with(params, k_energy, samples, Estimator::Grid)
}

pub fn xi_split_with<T: Scalar>(params: &LatticeParams<T>, k_energy: T, samples: usize, est: Estimator) -> XiSplit<T> {
    let k_max = k_energy.sqrt();
    let k_cutoff = xi_cutoff(params, k_max);
    let n = samples.max(MIN_SAMPLES);
    let [c1, c2] = sample_sum(k_cutoff, k_max, n, est, |k| {
        let (x1, x2) = xi_functions(params, k);
        [(x1 <= T::zero()) as usize, (x2 <= T::zero()) as usize]
    });
    XiSplit { p1: fraction(c1, n), p2: fraction(c2, n), k_cutoff, sample_count: n }
}

/// S-membership split by the sign of `(γ̃ − γ) sin ka`, sampled uniformly in
/// `k ∈ (k_cut, √K]`. The two fractions tend to `p₁` and `p₂`.
pub fn s_branch_split<T: Scalar>(params: &LatticeParams<T>, k_energy: T, samples: usize) -> Result<BranchSplit<T>> {
    let gt = params.require_gamma_tilde()?;
    let k_max = k_energy.sqrt();
    let k_cutoff = xi_cutoff(params, k_max);
    let n = samples.max(MIN_SAMPLES);
    let dg = gt - params.gamma();
    let [plus, plus_in, minus, minus_in] = sample_sum(k_cutoff, k_max, n, Estimator::Grid, |k| {
        let g = dg * (k * params.a()).sin();
        let member = bc_positive(params, gt, k) != BcMembership::NotInS;
        if g > T::zero() {
            [1, member as usize, 0, 0]
        } else if g < T::zero() {
            [0, 0, 1, member as usize]
        } else {
            [0; 4]
        }
    });
    Ok(BranchSplit {
        plus_fraction: fraction(plus_in, plus),
        minus_fraction: fraction(minus_in, minus),
        plus_samples: plus,
        minus_samples: minus,
    })
}

/// Common period `T = m·2π/a` of `ξ₁`, `ξ₂`, where `a/(a + 2b) = m/n` in lowest
/// terms; `None` when the ratio is not recognised as rational.
pub fn xi_period<T: Scalar>(params: &LatticeParams<T>) -> Option<T> {
    let (a, b) = (params.a().as_f64(), params.b().as_f64());
    let r = rational_approx(a / (a + 2.0 * b), MAX_DENOMINATOR, RELATIVE_TOLERANCE)?;
    Some(T::lit(*r.numer() as f64) * T::lit(2.0) * T::PI() / params.a())
}

/// All estimates at energy cutoff `K` with one estimator.
pub fn measure_report<T: Scalar>(
    params: &LatticeParams<T>,
    k_energy: T,
    samples: usize,
    est: Estimator,
) -> Result<MeasureReport<T>> {
    let n = samples.max(MIN_SAMPLES);
    let p_s = match params.gamma_tilde() {
        Some(gt) if gt != params.gamma() => Some(s_measure_with(params, k_energy, n, est)?),
        Some(_) => Some(T::zero()),
        None => None,
    };
    let xi = xi_split_with(params, k_energy, n, est);
    Ok(MeasureReport {
        energy_cutoff: k_energy,
        p_sigma: sigma_measure_with(params, k_energy, n, est),
        p_sigma_bands: sigma_measure_from_bands(params, k_energy)?,
        p_s,
        p1: xi.p1,
        p2: xi.p2,
        xi_k_cutoff: xi.k_cutoff,
        sample_count: n,
        estimator: est,
    })
}
