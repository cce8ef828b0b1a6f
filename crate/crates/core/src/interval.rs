//! Interval-set algebra on energy intervals.

use crate::scalar::Scalar;
use crate::types::EnergyInterval;

/// Sorts `raw` and merges intervals whose separation is at most `eps`.
pub fn merge_intervals<T: Scalar>(raw: &[EnergyInterval<T>], eps: T) -> Vec<EnergyInterval<T>> {
    let mut v: Vec<EnergyInterval<T>> = raw.to_vec();
    v.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap_or(std::cmp::Ordering::Equal).then(
        x.hi.partial_cmp(&y.hi).unwrap_or(std::cmp::Ordering::Equal),
    ));
    let mut out: Vec<EnergyInterval<T>> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi + eps => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Parts of `outer` not covered by the sorted disjoint `cover`.
pub fn complement_within<T: Scalar>(
    outer: EnergyInterval<T>,
    cover: &[EnergyInterval<T>],
) -> Vec<EnergyInterval<T>> {
    let mut out = Vec::new();
    let mut cursor = outer.lo;
    for c in cover {
        if c.hi < cursor {
            continue;
        }
        if c.lo > outer.hi {
            break;
        }
        if c.lo > cursor {
            out.push(EnergyInterval::raw(cursor, c.lo.min(outer.hi)));
        }
        cursor = cursor.max(c.hi);
    }
    if cursor < outer.hi {
        out.push(EnergyInterval::raw(cursor, outer.hi));
    }
    out
}
