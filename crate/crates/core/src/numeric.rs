//! Small numerical helpers shared by every module.

/// Neumaier-compensated running sum. Addition order is left to right, so the
/// result is deterministic for a given input order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Maximum bisection steps used by every root finder in the crate.
pub const BISECTION_MAX_ITER: usize = 200;

/// Bisection for an increasing function on `[lo, hi]`: returns `x` with
/// `f(x) ≈ target`. Stops once the bracket no longer shrinks in floating
/// point, once it is narrower than `x_tol`, or after [`BISECTION_MAX_ITER`]
/// steps.
pub fn bisect_increasing<F>(f: F, target: f64, mut lo: f64, mut hi: f64, x_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= x_tol {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick the better endpoint.
    let (flo, fhi) = (f(lo), f(hi));
    if (flo - target).abs() <= (fhi - target).abs() {
        lo
    } else {
        hi
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Shortest round-trip-exact rendering with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{:.16e}", x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert!((compensated_sum(xs) - 4e-16).abs() < 1e-30);
    }

    #[test]
    fn bisection_finds_square_root() {
        let x = bisect_increasing(|x| x * x, 2.0, 0.0, 2.0, 0.0);
        assert!((x - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.powi(-60), 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
