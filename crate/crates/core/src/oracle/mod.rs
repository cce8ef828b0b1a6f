//! Brute-force checks that share no code path with the closed forms they test.
//! Double precision only.

mod comb;

pub use comb::{oracle_comb_discretization, oracle_comb_richardson, CombRichardson};

use crate::error::{Result, SpectrumError};
use crate::fiber::FiberEigenvalue;
use crate::types::{LatticeParams, SpectralPoint};

/// Acceptance width of the τ-grid scan at momentum `k`.
pub fn tau_scan_tolerance(params: &LatticeParams<f64>, k: f64, grid_n: usize) -> f64 {
    let r = (k * params.a()).sin() / (k * params.b()).sin();
    2.0 / grid_n as f64 * (1.0 + r.abs())
}

/// Searches a `grid_n × grid_n` grid of `(τ₁, τ₂) ∈ [−1, 1]²` for a pair with
/// `τ₁ + (sin ka/sin kb)τ₂` within tolerance of `γ sin ka/(2k) + sin k(a+b)/sin kb`.
pub fn oracle_tau_scan(params: &LatticeParams<f64>, k: f64, grid_n: usize) -> Result<bool> {
    if grid_n < 101 {
        return Err(SpectrumError::Precondition(format!("grid_n must be at least 101, got {grid_n}")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(SpectrumError::InvalidParameter(format!("momentum must be positive, got {k}")));
    }
    let (a, b, g) = (params.a(), params.b(), params.gamma());
    let sb = (k * b).sin();
    if sb.abs() < 1e-9 * (k * b).max(1.0) {
        return Err(SpectrumError::SingularAtXiB { k });
    }
    let r = (k * a).sin() / sb;
    let rhs = g * (k * a).sin() / (2.0 * k) + (k * (a + b)).sin() / sb;
    let tol = tau_scan_tolerance(params, k, grid_n);
    let node = |i: usize| -1.0 + 2.0 * i as f64 / (grid_n - 1) as f64;
    for j in 0..grid_n {
        let target = rhs - r * node(j);
        // Nearest τ₁ node, clamped to the grid.
        let i = (((target + 1.0) * 0.5 * (grid_n - 1) as f64).round().max(0.0) as usize).min(grid_n - 1);
        if (node(i) - target).abs() <= tol {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `f_τ` evaluated from its defining formula at any energy, for coupling `gamma`.
fn f_direct(a: f64, b: f64, gamma: f64, tau: f64, point: SpectralPoint<f64>) -> f64 {
    match point {
        SpectralPoint::Positive { k } => {
            let (sa, sb) = ((k * a).sin(), (k * b).sin());
            gamma * sa / (2.0 * k) + (k * (a + b)).sin() / sb - tau * sa / sb
        }
        SpectralPoint::Negative { kappa: q } => {
            let (sa, sb) = ((q * a).sinh(), (q * b).sinh());
            gamma * sa / (2.0 * q) + (q * (a + b)).sinh() / sb - tau * sa / sb
        }
        SpectralPoint::Zero => gamma * a / 2.0 + (a + b) / b - tau * a / b,
    }
}

/// Largest `|ν_{j+1} − 2f ν_j + ν_{j−1}|` over `|j| ≤ n` for `ν_j = Λ^{|j|}`,
/// with `f = f_γ̃` at `j = 0` and `f = f_γ` elsewhere.
pub fn oracle_recursion_residual(params: &LatticeParams<f64>, eig: &FiberEigenvalue<f64>, n: usize) -> Result<f64> {
    if n < 10 {
        return Err(SpectrumError::Precondition(format!("N must be at least 10, got {n}")));
    }
    let gt = params.require_gamma_tilde()?;
    let (a, b, tau) = (params.a(), params.b(), eig.fiber.tau);
    let f_g = f_direct(a, b, params.gamma(), tau, eig.point);
    let f_gt = f_direct(a, b, gt, tau, eig.point);
    let lam = eig.lambda_decaying;
    let nu = |j: i64| lam.powi(j.unsigned_abs() as i32);
    let n = n as i64;
    Ok((-n..=n)
        .map(|j| {
            let f = if j == 0 { f_gt } else { f_g };
            (nu(j + 1) - 2.0 * f * nu(j) + nu(j - 1)).abs()
        })
        .fold(0.0, f64::max))
}
