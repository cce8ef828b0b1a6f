//! Continued-fraction reconstruction of edge-length ratios.

use num_rational::Ratio;

/// Denominator bound for treating a ratio as rational.
pub const MAX_DENOMINATOR: u64 = 1_000_000;
/// Relative tolerance a convergent must reach.
pub const RELATIVE_TOLERANCE: f64 = 1e-12;

/// First continued-fraction convergent `p/q` of `x > 0` with
/// `|x − p/q| ≤ rel_tol·x` and `q ≤ max_den`, if any.
pub fn rational_approx(x: f64, max_den: u64, rel_tol: f64) -> Option<Ratio<u64>> {
    if !(x.is_finite() && x > 0.0) {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut rem = x;
    for _ in 0..64 {
        let ai = rem.floor();
        if ai > u64::MAX as f64 / 2.0 {
            return None;
        }
        let ai_u = ai as u64;
        let p2 = ai_u.checked_mul(p1)?.checked_add(p0)?;
        let q2 = ai_u.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            return None;
        }
        if ((p2 as f64 / q2 as f64) - x).abs() <= rel_tol * x {
            return Some(Ratio::new(p2, q2));
        }
        let frac = rem - ai;
        if frac <= 0.0 {
            return None;
        }
        rem = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}
