//! Bracketing root finder and scan helpers.

use crate::error::{Result, SpectrumError};
use crate::scalar::Scalar;

const MAX_BISECTIONS: usize = 500;

/// Root of `f` on `[lo, hi]` by bisection down to bracket width `tol`, then one
/// secant step inside the final bracket.
pub fn bracket_root<T: Scalar, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> Result<T> {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut flo = eval(&mut f, lo)?;
    let mut fhi = eval(&mut f, hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(SpectrumError::NoBracket { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(&mut f, mid)?;
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let secant = lo - flo * (hi - lo) / (fhi - flo);
    if secant.is_finite() && secant >= lo && secant <= hi {
        let fs = eval(&mut f, secant)?;
        if fs.abs() <= flo.abs().min(fhi.abs()) {
            return Ok(secant);
        }
    }
    Ok(if flo.abs() <= fhi.abs() { lo } else { hi })
}

fn eval<T: Scalar, F: FnMut(T) -> T>(f: &mut F, x: T) -> Result<T> {
    let y = f(x);
    if y.is_nan() {
        Err(SpectrumError::SingularEvaluation { at: x.as_f64() })
    } else {
        Ok(y)
    }
}

/// Shrinks `[a, b]` with `pred(a) != pred(b)` to width `tol`; returns the final
/// pair ordered as the inputs, so the first entry keeps `pred(a)`.
pub fn bisect_predicate<T: Scalar, P: FnMut(T) -> bool>(mut pred: P, a: T, b: T, tol: T) -> (T, T) {
    let pa = pred(a);
    let (mut x, mut y) = (a, b);
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTIONS {
        if (y - x).abs() <= tol {
            break;
        }
        let mid = x + (y - x) / two;
        if mid == x || mid == y {
            break;
        }
        if pred(mid) == pa {
            x = mid;
        } else {
            y = mid;
        }
    }
    (x, y)
}

/// `n` equally spaced points on `[lo, hi]` including both ends.
pub fn linspace<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::from_usize(n - 1).unwrap();
            (0..n).map(|i| if i == n - 1 { hi } else { lo + step * T::from_usize(i).unwrap() }).collect()
        }
    }
}

/// `n` cell midpoints of `[lo, hi]` (open-interval sampling).
pub fn midpoints<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    let step = (hi - lo) / T::from_usize(n.max(1)).unwrap();
    (0..n).map(|i| lo + step * (T::from_usize(i).unwrap() + T::lit(0.5))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = bracket_root(|x: f64| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sine_pi() {
        let r = bracket_root(f64::sin, 3.0, 4.0, 1e-12).unwrap();
        assert!((r - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn negative_band_equation() {
        let f = |x: f64| 2.0 / x - (x / 2.0).tanh() - (1.5 * x).tanh();
        let r = bracket_root(f, 1.2, 1.35, 1e-12).unwrap();
        // independent fine scan
        let n = 150_000;
        let mut prev = f(1.2);
        let mut found = None;
        for i in 1..=n {
            let x = 1.2 + 0.15 * i as f64 / n as f64;
            let y = f(x);
            if prev.signum() != y.signum() {
                found = Some(x);
                break;
            }
            prev = y;
        }
        assert!((r - found.unwrap()).abs() < 2e-6);
        assert!((1.29..1.31).contains(&r), "{r}");
    }

    #[test]
    fn no_bracket() {
        assert!(matches!(bracket_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-9), Err(SpectrumError::NoBracket { .. })));
    }

    #[test]
    fn nan_reported() {
        let r = bracket_root(|x: f64| if x > 0.5 { f64::NAN } else { x - 0.7 }, 0.0, 1.0, 1e-9);
        assert!(matches!(r, Err(SpectrumError::SingularEvaluation { .. })));
    }

    #[test]
    fn half_tolerance_agrees() {
        let f = |x: f64| x.cos() - x;
        let r1 = bracket_root(f, 0.0, 1.0, 1e-10).unwrap();
        let r2 = bracket_root(f, 0.0, 1.0, 5e-11).unwrap();
        assert!((r1 - r2).abs() <= 1e-10);
    }

    #[test]
    fn generic_f32() {
        let r = bracket_root(|x: f32| x * x - 2.0, 1.0, 2.0, 1e-6).unwrap();
        assert!((r - 2f32.sqrt()).abs() < 1e-6);
    }
}
