//! The finite-size variational problem behind the centered last-passage
//! asymptotics. For a parameter pair at grid size `(m, n)` the stationary
//! mean as a function of the tilt `z` is
//!
//! ```text
//! M(m,n)(z) = Σ_{i<=m} 1/(a_m(i)+z) + Σ_{j<=n} 1/(b_n(j)-z),   z ∈ I(m,n),
//! ```
//!
//! strictly convex on the open interval `I(m,n) = (-min a_m, min b_n)` and
//! blowing up at both ends. [`solve_centering`] locates the unique interior
//! minimizer `zeta` (the root of the derivative), the minimum `M`, the
//! common-variance scale `C`, and the distance `Delta` from `zeta` to the
//! interval ends. [`rains_limit`] solves the infinite-series analog for
//! summable parameter sequences.

use crate::error::{Error, Result};
use crate::numeric::{bisect_decreasing, comp_sum, golden_section_min, CompensatedSum};
use crate::params::ParamPair;
use serde::{Deserialize, Serialize};

/// Bracket inset as a fraction of the interval width; brackets expand inward
/// geometrically from here until the root function changes sign.
const BRACKET_INSET: f64 = 1e-12;

/// Bisection terminates at this fraction of the interval width, then one
/// Newton step polishes the root.
const BISECT_WIDTH: f64 = 1e-14;

/// Residual acceptance threshold, relative to the variance scale `C`.
const RESIDUAL_REL_TOL: f64 = 1e-9;

/// Output of [`solve_centering`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CenteringResult {
    /// Minimizer of the stationary mean; interior point of `I(m,n)`.
    pub zeta: f64,
    /// Centering constant `M(m,n)`: the minimal stationary mean.
    pub center: f64,
    /// Variance scale `C(m,n) = Σ_i 1/(a_m(i)+zeta)^2`, which at the
    /// minimizer equals the `b`-side sum.
    pub variance: f64,
    /// `min(min a_m + zeta, min b_n - zeta)`: distance to the interval ends.
    pub delta: f64,
    /// Value of the minimizer equation at `zeta` (should be ~0).
    pub residual: f64,
}

/// Mean of the stationary last-passage value at `(m, n)` under tilt `z`.
pub fn stationary_mean(pp: &ParamPair, m: usize, n: usize, z: f64) -> Result<f64> {
    let a_row = pp.a().row(m)?;
    let b_row = pp.b().row(n)?;
    let s = pp.summary(m, n)?;
    let (lo, hi) = s.interval();
    if !(z > lo && z < hi) {
        return Err(Error::Domain(format!(
            "z = {z} outside the open interval ({lo}, {hi})"
        )));
    }
    Ok(mean_of_rows(&a_row, &b_row, z))
}

fn mean_of_rows(a_row: &[f64], b_row: &[f64], z: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for &a in a_row {
        acc.add(1.0 / (a + z));
    }
    for &b in b_row {
        acc.add(1.0 / (b - z));
    }
    acc.value()
}

/// Derivative-root data: `f(z) = Σ 1/(a+z)^2 - Σ 1/(b-z)^2`, strictly
/// decreasing on the interval, `+∞` at the left end, `-∞` at the right.
fn root_fn(a_row: &[f64], b_row: &[f64], z: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for &a in a_row {
        acc.add(1.0 / ((a + z) * (a + z)));
    }
    for &b in b_row {
        acc.add(-1.0 / ((b - z) * (b - z)));
    }
    acc.value()
}

fn root_fn_deriv(a_row: &[f64], b_row: &[f64], z: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for &a in a_row {
        acc.add(-2.0 / ((a + z) * (a + z) * (a + z)));
    }
    for &b in b_row {
        acc.add(-2.0 / ((b - z) * (b - z) * (b - z)));
    }
    acc.value()
}

/// Solves the centering problem at `(m, n)`: bisection on the strictly
/// decreasing derivative-root function down to `1e-14 |I|`, then one Newton
/// polish. The residual is checked against `1e-9 C`; failure to meet it is a
/// bug sentinel, not a user error.
pub fn solve_centering(pp: &ParamPair, m: usize, n: usize) -> Result<CenteringResult> {
    let a_row = pp.a().row(m)?;
    let b_row = pp.b().row(n)?;
    let s = pp.summary(m, n)?;
    let (left, right) = s.interval();
    let width = s.width();

    let f = |z: f64| root_fn(&a_row, &b_row, z);

    // The poles guarantee a sign change; the insets only dodge division by
    // values indistinguishable from zero.
    let mut inset_lo = BRACKET_INSET * width;
    let mut lo = left + inset_lo;
    while !(f(lo) > 0.0) {
        inset_lo *= 8.0;
        lo = left + inset_lo;
        if inset_lo > 0.25 * width {
            return Err(Error::Numerical(
                "no sign change near the left end of the centering bracket".into(),
            ));
        }
    }
    let mut inset_hi = BRACKET_INSET * width;
    let mut hi = right - inset_hi;
    while !(f(hi) < 0.0) {
        inset_hi *= 8.0;
        hi = right - inset_hi;
        if inset_hi > 0.25 * width {
            return Err(Error::Numerical(
                "no sign change near the right end of the centering bracket".into(),
            ));
        }
    }

    let mut zeta = bisect_decreasing(f, lo, hi, BISECT_WIDTH * width);
    let fz = f(zeta);
    let dfz = root_fn_deriv(&a_row, &b_row, zeta);
    if dfz < 0.0 {
        let polished = zeta - fz / dfz;
        if polished > left && polished < right && f(polished).abs() < fz.abs() {
            zeta = polished;
        }
    }

    let residual = f(zeta);
    let variance = comp_sum(a_row.iter().map(|&a| 1.0 / ((a + zeta) * (a + zeta))));
    if !(residual.abs() <= RESIDUAL_REL_TOL * variance) {
        return Err(Error::Numerical(format!(
            "centering residual {residual} exceeds {} (C = {variance})",
            RESIDUAL_REL_TOL * variance
        )));
    }
    let center = mean_of_rows(&a_row, &b_row, zeta);
    let delta = (s.min_a + zeta).min(s.min_b - zeta);
    Ok(CenteringResult {
        zeta,
        center,
        variance,
        delta,
        residual,
    })
}

/// Output of [`rains_limit`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RainsLimit {
    /// Minimal value of the truncated series objective.
    pub value: f64,
    /// Minimizer within `(-inf a, inf b)`.
    pub minimizer: f64,
    /// `tail_bound` plus the solver's value tolerance.
    pub error_bound: f64,
}

/// Truncated series objective `Σ_i 1/(a_i+z) + Σ_j 1/(b_j-z)` over the
/// supplied prefixes.
pub fn rains_objective(a: &[f64], b: &[f64], z: f64) -> Result<f64> {
    let (inf_a, inf_b) = series_infima(a, b)?;
    if !(z > -inf_a && z < inf_b) {
        return Err(Error::Domain(format!(
            "z = {z} outside the open interval ({}, {inf_b})",
            -inf_a
        )));
    }
    Ok(mean_of_rows(a, b, z))
}

/// Minimizes the truncated series objective over `z ∈ (-inf a, inf b)` by
/// golden-section search. The caller supplies the truncation prefixes and a
/// certified bound on the dropped tail, uniform over the interval; the
/// reported value is accurate to `tail_bound` plus solver tolerance. A
/// last-half partial-sum increment grossly exceeding the certificate
/// falsifies summability and is rejected.
pub fn rains_limit(a: &[f64], b: &[f64], tail_bound: f64) -> Result<RainsLimit> {
    if !(tail_bound >= 0.0) || !tail_bound.is_finite() {
        return Err(Error::Domain(format!(
            "tail bound must be a finite nonnegative real, got {tail_bound}"
        )));
    }
    let (inf_a, inf_b) = series_infima(a, b)?;
    let width = inf_a + inf_b;
    let z_mid = 0.5 * (inf_b - inf_a);

    // Cauchy check at the interval midpoint: the increment contributed by
    // the last half of each prefix must be consistent with the certified
    // tail. The factor is deliberately loose; the check exists to catch
    // non-summable sequences (harmonic growth), not to re-derive the bound.
    let increment = half_increment(a, z_mid, true) + half_increment(b, z_mid, false);
    if increment > f64::max(1e3 * tail_bound, 1e-6) {
        return Err(Error::Divergent(format!(
            "last-half partial sums advance by {increment}, inconsistent with tail bound {tail_bound}"
        )));
    }

    let inset = 1e-12 * width;
    let (minimizer, value) = golden_section_min(
        |z| mean_of_rows(a, b, z),
        -inf_a + inset,
        inf_b - inset,
        1e-11 * width,
    );
    Ok(RainsLimit {
        value,
        minimizer,
        error_bound: tail_bound + 1e-10 * value.abs(),
    })
}

fn series_infima(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("parameter prefixes must be nonempty".into()));
    }
    let inf_a = a.iter().copied().fold(f64::INFINITY, f64::min);
    let inf_b = b.iter().copied().fold(f64::INFINITY, f64::min);
    if !(inf_a + inf_b > 0.0) {
        return Err(Error::Domain(format!(
            "need inf a + inf b > 0, got {inf_a} + {inf_b}"
        )));
    }
    Ok((inf_a, inf_b))
}

/// Sum of `1/(x ± z)` over the last half of the prefix.
fn half_increment(xs: &[f64], z: f64, a_side: bool) -> f64 {
    let start = xs.len() / 2;
    comp_sum(xs[start..].iter().map(|&x| {
        if a_side {
            1.0 / (x + z)
        } else {
            1.0 / (x - z)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamFamily;
    use crate::rng;
    use approx::assert_relative_eq;

    fn homogeneous(rate_half: f64, cap: usize) -> ParamPair {
        ParamPair::new(
            ParamFamily::constant(rate_half, cap).unwrap(),
            ParamFamily::constant(rate_half, cap).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn stationary_mean_hand_values() {
        let pp = homogeneous(0.5, 4);
        assert_relative_eq!(stationary_mean(&pp, 2, 2, 0.0).unwrap(), 8.0);
        assert_relative_eq!(stationary_mean(&pp, 2, 1, 0.0).unwrap(), 6.0);
        assert!(stationary_mean(&pp, 2, 2, 0.5).is_err());
        assert!(stationary_mean(&pp, 2, 2, -0.5).is_err());
    }

    #[test]
    fn symmetric_case_centers_at_zero() {
        for n in [1usize, 2, 5, 50] {
            let pp = homogeneous(0.5, 50);
            let r = solve_centering(&pp, n, n).unwrap();
            assert!(r.zeta.abs() < 1e-12, "zeta = {}", r.zeta);
            assert_relative_eq!(r.center, 4.0 * n as f64, max_relative = 1e-9);
            assert_relative_eq!(r.variance, 4.0 * n as f64, max_relative = 1e-9);
            assert_relative_eq!(r.delta, 0.5, max_relative = 1e-9);
        }
    }

    #[test]
    fn closed_form_two_by_one() {
        // 2/(0.5+z)^2 = 1/(0.5-z)^2 has the root (3-2√2)/2; the mean there
        // is 3+2√2.
        let pp = homogeneous(0.5, 2);
        let r = solve_centering(&pp, 2, 1).unwrap();
        let sqrt2 = 2f64.sqrt();
        assert_relative_eq!(r.zeta, (3.0 - 2.0 * sqrt2) / 2.0, max_relative = 1e-10);
        assert_relative_eq!(r.center, 3.0 + 2.0 * sqrt2, max_relative = 1e-10);
        assert!(r.residual.abs() <= RESIDUAL_REL_TOL * r.variance);
    }

    #[test]
    fn unit_rate_single_cell() {
        let pp = homogeneous(0.5, 1);
        let r = solve_centering(&pp, 1, 1).unwrap();
        assert_relative_eq!(r.center, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn variance_sides_agree() {
        let a = ParamFamily::row_constant(vec![0.4, 0.9, 0.6, 1.3, 0.8]).unwrap();
        let b = ParamFamily::row_constant(vec![0.7, 0.5, 1.1, 0.6, 0.9]).unwrap();
        let pp = ParamPair::new(a, b).unwrap();
        let r = solve_centering(&pp, 5, 4).unwrap();
        let b_row = pp.b().row(4).unwrap();
        let b_side = comp_sum(
            b_row
                .iter()
                .map(|&b| 1.0 / ((b - r.zeta) * (b - r.zeta))),
        );
        assert_relative_eq!(r.variance, b_side, max_relative = 1e-9);
    }

    #[test]
    fn variance_respects_trivial_bound() {
        let pp = homogeneous(0.5, 64);
        for (m, n) in [(1, 1), (3, 7), (64, 9), (64, 64)] {
            let r = solve_centering(&pp, m, n).unwrap();
            let s = pp.summary(m, n).unwrap();
            let bound = 4.0 * m.max(n) as f64 / (s.width() * s.width());
            assert!(r.variance <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn envelope_bounds_mean_from_below() {
        let a = ParamFamily::row_constant(vec![0.3, 0.8, 0.5, 1.0, 0.45, 0.9]).unwrap();
        let b = ParamFamily::row_constant(vec![0.6, 0.4, 0.95, 0.55, 0.7, 1.2]).unwrap();
        let pp = ParamPair::new(a, b).unwrap();
        let r = solve_centering(&pp, 6, 6).unwrap();
        let s = pp.summary(6, 6).unwrap();
        let (lo, hi) = s.interval();
        for k in 0..200u64 {
            let u = rng::cell_uniform(11, 0, k, 0);
            let z = lo + (hi - lo) * (0.5e-3 + 0.999 * u);
            let mean = stationary_mean(&pp, 6, 6, z).unwrap();
            assert!(mean >= r.center - 1e-12 * r.center.abs());
            if (z - r.zeta).abs() > 1e-3 {
                assert!(mean > r.center);
            }
        }
    }

    #[test]
    fn shift_reparametrization_is_exact() {
        // The identity is exact (no statistical or truncation slack), so the
        // tolerance is machine-level; bitwise equality is spoiled only by
        // bracket rounding in different binades.
        let s = 0.25f64;
        let a_vals = vec![0.5, 0.75, 0.5, 1.0];
        let b_vals = vec![0.5, 0.625, 0.875, 0.5];
        let pp = ParamPair::new(
            ParamFamily::row_constant(a_vals.clone()).unwrap(),
            ParamFamily::row_constant(b_vals.clone()).unwrap(),
        )
        .unwrap();
        let shifted = ParamPair::new(
            ParamFamily::row_constant(a_vals.iter().map(|&v| v + s).collect()).unwrap(),
            ParamFamily::row_constant(b_vals.iter().map(|&v| v - s).collect()).unwrap(),
        )
        .unwrap();
        let r0 = solve_centering(&pp, 4, 3).unwrap();
        let r1 = solve_centering(&shifted, 4, 3).unwrap();
        assert_relative_eq!(r1.zeta, r0.zeta - s, max_relative = 1e-13);
        assert_relative_eq!(r1.center, r0.center, max_relative = 1e-13);
        assert_relative_eq!(r1.variance, r0.variance, max_relative = 1e-13);
        assert_relative_eq!(r1.delta, r0.delta, max_relative = 1e-13);
    }

    #[test]
    fn dropping_smallest_a_entries_lowers_zeta() {
        let mut a_vals = vec![0.3, 0.35, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5];
        a_vals.sort_by(f64::total_cmp);
        let b = ParamFamily::constant(0.5, 8).unwrap();
        let full = ParamPair::new(ParamFamily::row_constant(a_vals.clone()).unwrap(), b.clone())
            .unwrap();
        let zeta_full = solve_centering(&full, 8, 8).unwrap().zeta;
        for k in 1..4 {
            let dropped = ParamPair::new(
                ParamFamily::row_constant(a_vals[k..].to_vec()).unwrap(),
                b.clone(),
            )
            .unwrap();
            let zeta_dropped = solve_centering(&dropped, 8 - k, 8).unwrap().zeta;
            assert!(
                zeta_dropped <= zeta_full + 1e-12,
                "k = {k}: {zeta_dropped} > {zeta_full}"
            );
        }
    }

    #[test]
    fn random_instances_meet_residual_tolerance() {
        for inst in 0..100u64 {
            let m = 1 + (rng::cell_u64(3, inst, 0, 0) % 40) as usize;
            let n = 1 + (rng::cell_u64(3, inst, 1, 0) % 40) as usize;
            let cap = m.max(n);
            let a: Vec<f64> = (0..cap as u64)
                .map(|i| 0.1 + rng::cell_uniform(3, inst, 2, i))
                .collect();
            let b: Vec<f64> = (0..cap as u64)
                .map(|j| 0.1 + rng::cell_uniform(3, inst, 3, j))
                .collect();
            let pp = ParamPair::new(
                ParamFamily::row_constant(a).unwrap(),
                ParamFamily::row_constant(b).unwrap(),
            )
            .unwrap();
            let r = solve_centering(&pp, m, n).unwrap();
            assert!(r.residual.abs() <= RESIDUAL_REL_TOL * r.variance);
            let s = pp.summary(m, n).unwrap();
            assert!(r.zeta > s.interval().0 && r.zeta < s.interval().1);
            assert!(r.delta > 0.0);
        }
    }

    #[test]
    fn inverse_square_series_limit() {
        // Oracle: partial sums of 2 Σ 1/i^2 with integral tail brackets
        // enclose π²/3, and the solver lands within 2e-6 of it.
        let k = 1_000_000usize;
        let seq: Vec<f64> = (1..=k).map(|i| (i as f64) * (i as f64)).collect();
        let partial = comp_sum(seq.iter().map(|&v| 2.0 / v));
        let target = std::f64::consts::PI * std::f64::consts::PI / 3.0;
        assert!(partial + 2.0 / (k as f64 + 1.0) < target);
        assert!(partial + 2.0 / k as f64 > target);

        let r = rains_limit(&seq, &seq, 2.1e-6).unwrap();
        assert!(
            (r.value - target).abs() <= 2e-6,
            "value {} vs {target}",
            r.value
        );
        assert!(r.minimizer.abs() < 1e-3);
    }

    #[test]
    fn objective_off_center_exceeds_limit() {
        let k = 100_000usize;
        let seq: Vec<f64> = (1..=k).map(|i| (i as f64) * (i as f64)).collect();
        let target = std::f64::consts::PI * std::f64::consts::PI / 3.0;
        let off = rains_objective(&seq, &seq, 0.5).unwrap();
        assert!(off > target);
    }

    #[test]
    fn harmonic_series_is_rejected() {
        let seq: Vec<f64> = (1..=100_000).map(|i| i as f64).collect();
        match rains_limit(&seq, &seq, 1e-3) {
            Err(Error::Divergent(_)) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
