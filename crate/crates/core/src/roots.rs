//! Grid scan plus bisection for sign changes of a scalar function.

/// A located sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub root: f64,
    /// Sign changes seen on the scan grid (all directions).
    pub sign_changes: usize,
}

/// Bisects `[lo, hi]` until the bracket cannot shrink further in double precision.
/// Requires `f(lo) <= 0 < f(hi)` or the reverse.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let lo_positive = f(lo) > 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if (f(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // return whichever end has the smaller residual
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Evaluates `f` at `points` evenly spaced nodes of `[lo, hi]`.
pub fn scan(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let x = if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
            (x, f(x))
        })
        .collect()
}

/// Outcome of scanning a function for its last change from non-positive to positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanResult {
    Crossing(Crossing),
    /// Positive at every scan node.
    AlwaysPositive,
    /// Non-positive at every scan node.
    NeverPositive,
    /// Sign changes exist but none goes upward.
    OnlyDownward { sign_changes: usize },
}

pub fn last_upward_crossing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> ScanResult {
    let samples = scan(&f, lo, hi, points);
    let positive: Vec<bool> = samples.iter().map(|&(_, y)| y > 0.0).collect();
    let sign_changes = positive.windows(2).filter(|w| w[0] != w[1]).count();
    if sign_changes == 0 {
        return if positive[0] { ScanResult::AlwaysPositive } else { ScanResult::NeverPositive };
    }
    let last_up = (0..samples.len() - 1).rev().find(|&i| !positive[i] && positive[i + 1]);
    match last_up {
        Some(i) => ScanResult::Crossing(Crossing {
            root: bisect(&f, samples[i].0, samples[i + 1].0),
            sign_changes,
        }),
        None => ScanResult::OnlyDownward { sign_changes },
    }
}
