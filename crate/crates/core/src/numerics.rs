//! Small numerical helpers shared across modules.

/// Sum in a fixed pairwise tree. The association order depends only on the
/// slice length, so results are bit-stable across thread counts.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n`.
pub fn pairwise_sum_by(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    fn rec(lo: usize, hi: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        if hi - lo <= 16 {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, &f)
}

/// Quintic cutoff: 1 for `t <= 0`, 0 for `t >= 1`, `1 - (10t^3 - 15t^4 + 6t^5)` between.
pub fn quintic_cutoff(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Derivative of [`quintic_cutoff`].
pub fn quintic_cutoff_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        -30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

/// Observed convergence order between two errors at refinement ratio `ratio`.
pub fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(d: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = d.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Sign with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_midpoint_and_ends() {
        assert_eq!(quintic_cutoff(-0.6), 1.0);
        assert_eq!(quintic_cutoff(3.0), 0.0);
        assert!((quintic_cutoff(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cutoff_derivative_matches_difference_quotient() {
        for &t in &[0.1, 0.3, 0.5, 0.77] {
            let h = 1e-6;
            let fd = (quintic_cutoff(t + h) - quintic_cutoff(t - h)) / (2.0 * h);
            assert!((fd - quintic_cutoff_deriv(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum_by(1000, |i| (i + 1) as f64), 500500.0);
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sgn(0.0), 0.0);
        assert_eq!(sgn(-2.0), -1.0);
    }
}
