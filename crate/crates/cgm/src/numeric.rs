//! Small numerical utilities shared across modules: compensated summation,
//! bracketed root finding, and golden-section minimization.

/// Neumaier-compensated accumulator. Used wherever sums may mix magnitudes
/// badly (transform sums over many atoms, long mean/variance sums).
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums an iterator with compensation.
pub fn comp_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Root of a strictly decreasing function on `[lo, hi]` with
/// `f(lo) > 0 > f(hi)`, by bisection down to bracket width `width_tol`.
/// Returns the bracket midpoint. Panics are avoided: a sign anomaly from
/// finite precision collapses to the nearer endpoint.
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, width_tol: f64) -> f64 {
    debug_assert!(lo < hi);
    while hi - lo > width_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating-point resolution
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes a strictly unimodal function on `[lo, hi]` by golden-section
/// search down to bracket width `width_tol`. Returns `(argmin, min)`.
pub fn golden_section_min<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    width_tol: f64,
) -> (f64, f64) {
    debug_assert!(lo <= hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > width_tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            if x1 >= x2 {
                break; // interval at floating-point resolution
            }
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            if x2 <= x1 {
                break;
            }
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1e16);
        for _ in 0..10 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 10.0);
    }

    #[test]
    fn bisection_finds_decreasing_root() {
        let root = bisect_decreasing(|z| 2.0 - z * z * z, 0.0, 2.0, 1e-14);
        assert!((root - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|z| (z - 0.3).powi(2) + 1.0, -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_handles_degenerate_interval() {
        let (x, fx) = golden_section_min(|z| z * z, 0.5, 0.5, 1e-12);
        assert_eq!(x, 0.5);
        assert_eq!(fx, 0.25);
    }
}
