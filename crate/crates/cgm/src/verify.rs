//! Statistical verification harness: Kolmogorov-Smirnov checks against
//! exponential references, two-sample invariance checks, tail and
//! concentration decay tables, exit-point localization, raster Hausdorff
//! distances for limit-shape convergence, and the block-inhomogeneous
//! corner growth ratio against its series limit.
//!
//! Every check derives one seed per replica with [`substream`], so replica
//! aggregation is order-independent and each verdict is reproducible
//! bit-for-bit from `(seed, configuration)`.

use rayon::prelude::*;

use crate::centering::{rains_limit, solve_centering, RainsLimit};
use crate::error::{Error, Result};
use crate::lpp::{cluster, exit_points, lpp_point, stationary_grid, FamilyMode};
use crate::numeric::comp_sum;
use crate::params::{ParamFamily, ParamPair};
use crate::rng::{cell_exponential, substream};
use crate::shape::{in_limit_shape, ShapeSpec};

/// Significance level of every distributional check.
pub const KS_ALPHA: f64 = 0.001;
/// Smallest sample size the asymptotic KS critical values are trusted for.
pub const KS_MIN_SAMPLE: usize = 100;
/// Normal quantile used for the 99% Wilson intervals on exceedance
/// frequencies.
const WILSON_Z: f64 = 2.575_829_303_548_901;
/// Cells per axis of limit-shape comparison rasters; the resulting
/// resolution sits below the fluctuation scale at the calibration time.
pub const LIMIT_SHAPE_RASTER_SIDE: usize = 800;
/// Stream label of the sum-of-exponentials replicas.
const EXPSUM_STREAM: u64 = 0x6578_7073;

/// Asymptotic two-sided KS critical coefficient `sqrt(ln(2/alpha)/2)`;
/// the one-sample threshold is this over `sqrt(n)`.
fn ks_critical_coefficient() -> f64 {
    (0.5 * (2.0 / KS_ALPHA).ln()).sqrt()
}

/// Empirical distribution of a finite sample.
#[derive(Clone, Debug)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::Domain("empty sample".to_string()));
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "sample contains non-finite values".to_string(),
            ));
        }
        sample.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: sample })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `<= x`; nondecreasing in `x` with values in
    /// `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }
}

/// Outcome of one distributional check: the test statistic against its
/// pass threshold, plus enough context to reproduce the verdict.
#[derive(Clone, Debug)]
pub struct KsReport {
    /// Identifier of the reference distribution or check.
    pub check: String,
    pub statistic: f64,
    pub sample_size: usize,
    pub threshold: f64,
    pub pass: bool,
}

impl KsReport {
    fn new(check: String, statistic: f64, sample_size: usize, threshold: f64) -> Self {
        KsReport {
            check,
            statistic,
            sample_size,
            threshold,
            pass: statistic < threshold,
        }
    }
}

/// Sup-distance between the empirical CDF of a sorted sample and
/// `1 - exp(-rate x)`.
fn exponential_ks_statistic(sorted: &[f64], rate: f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let f = -(-rate * x).exp_m1();
        d = d.max(((k + 1) as f64 / n - f).max(f - k as f64 / n));
    }
    d
}

/// One-sample KS check of a sample against the exponential distribution
/// with the given rate. Nonpositive values beyond a one-per-mille
/// tolerance mark the sample as non-exponential data and are rejected
/// before testing.
pub fn ks_exponential(sample: &[f64], rate: f64) -> Result<KsReport> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Domain(format!(
            "reference rate must be positive and finite, got {rate}"
        )));
    }
    if sample.len() < KS_MIN_SAMPLE {
        return Err(Error::Domain(format!(
            "need at least {KS_MIN_SAMPLE} observations for the asymptotic threshold, got {}",
            sample.len()
        )));
    }
    let nonpositive = sample.iter().filter(|&&v| !(v > 0.0)).count();
    if sample.iter().any(|v| !v.is_finite())
        || nonpositive as f64 > 1e-3 * sample.len() as f64
    {
        return Err(Error::Domain(format!(
            "{nonpositive} of {} values are nonpositive or non-finite; not exponential data",
            sample.len()
        )));
    }
    let cdf = EmpiricalCdf::new(sample.to_vec())?;
    let d = exponential_ks_statistic(cdf.sorted(), rate);
    let threshold = ks_critical_coefficient() / (cdf.n() as f64).sqrt();
    Ok(KsReport::new(
        format!("exp(rate={rate})"),
        d,
        cdf.n(),
        threshold,
    ))
}

/// Two-sample KS statistic over sorted samples (merge walk; ties advance
/// both sides before the gap is measured).
fn two_sample_statistic(x: &[f64], y: &[f64]) -> f64 {
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < x.len() || j < y.len() {
        let xv = x.get(i).copied().unwrap_or(f64::INFINITY);
        let yv = y.get(j).copied().unwrap_or(f64::INFINITY);
        let v = xv.min(yv);
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    d
}

/// Draws corner values `G(m, n)` under both parameter pairs with shared
/// per-replica seeds (identical pairs therefore produce identical draws)
/// and compares the two samples with a KS test. This is the raw engine
/// behind [`permutation_check`]; it applies no relationship between the
/// two pairs.
pub fn two_sample_corner_check(
    pp1: &ParamPair,
    pp2: &ParamPair,
    m: usize,
    n: usize,
    seed: u64,
    replicas: usize,
) -> Result<KsReport> {
    if replicas < KS_MIN_SAMPLE {
        return Err(Error::Domain(format!(
            "need at least {KS_MIN_SAMPLE} replicas, got {replicas}"
        )));
    }
    let draw = |pp: &ParamPair| -> Result<Vec<f64>> {
        (0..replicas)
            .into_par_iter()
            .map(|r| lpp_point(pp, m, n, substream(seed, r as u64)))
            .collect()
    };
    let mut x = draw(pp1)?;
    let mut y = draw(pp2)?;
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let d = two_sample_statistic(&x, &y);
    let nf = replicas as f64;
    let threshold = ks_critical_coefficient() * ((nf + nf) / (nf * nf)).sqrt();
    Ok(KsReport::new(
        format!("two-sample G({m},{n})"),
        d,
        replicas,
        threshold,
    ))
}

fn sorted_row(fam: &ParamFamily, len: usize) -> Result<Vec<f64>> {
    let mut row = fam.row(len)?;
    row.sort_by(f64::total_cmp);
    Ok(row)
}

/// Checks that the corner law is unchanged under permutations of the
/// parameter rows: validates that `permuted` really is a rearrangement of
/// `pp` on the `(m, n)` rows, then runs the two-sample corner check.
pub fn permutation_check(
    pp: &ParamPair,
    permuted: &ParamPair,
    m: usize,
    n: usize,
    seed: u64,
    replicas: usize,
) -> Result<KsReport> {
    if sorted_row(pp.a(), m)? != sorted_row(permuted.a(), m)?
        || sorted_row(pp.b(), n)? != sorted_row(permuted.b(), n)?
    {
        return Err(Error::Domain(
            "second parameter pair is not a row/column permutation of the first".to_string(),
        ));
    }
    two_sample_corner_check(pp, permuted, m, n, seed, replicas)
}

/// Absolute sample Pearson correlation between paired observations.
fn abs_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = comp_sum(x.iter().copied()) / n;
    let my = comp_sum(y.iter().copied()) / n;
    let cov = comp_sum(x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)));
    let vx = comp_sum(x.iter().map(|&a| (a - mx) * (a - mx)));
    let vy = comp_sum(y.iter().map(|&b| (b - my) * (b - my)));
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    (cov / (vx * vy).sqrt()).abs()
}

/// Checks the stationarity of increments: for each requested row index
/// `i`, the top-edge horizontal increments `I(i, n)` across replicas are
/// tested against `Exp(a_m(i) + z)`; for each requested column `j`, the
/// right-edge vertical increments `J(m, j)` against `Exp(b_n(j) - z)`.
/// Adjacent-increment independence is spot-checked through the lag-1
/// sample correlation, reported with threshold `4/sqrt(N)`.
pub fn burke_check(
    pp: &ParamPair,
    m: usize,
    n: usize,
    z: f64,
    seed: u64,
    rows: &[usize],
    cols: &[usize],
    replicas: usize,
) -> Result<Vec<KsReport>> {
    for &i in rows {
        if i == 0 || i > m {
            return Err(Error::OutOfRange {
                what: "requested row index",
                got: i,
                limit: m,
            });
        }
    }
    for &j in cols {
        if j == 0 || j > n {
            return Err(Error::OutOfRange {
                what: "requested column index",
                got: j,
                limit: n,
            });
        }
    }
    // Collect the requested increments plus right-neighbors for the lag-1
    // correlation checks.
    let mut row_idx: Vec<usize> = rows
        .iter()
        .flat_map(|&i| [i, i + 1])
        .filter(|&i| i <= m)
        .collect();
    row_idx.sort_unstable();
    row_idx.dedup();
    let mut col_idx: Vec<usize> = cols
        .iter()
        .flat_map(|&j| [j, j + 1])
        .filter(|&j| j <= n)
        .collect();
    col_idx.sort_unstable();
    col_idx.dedup();

    let per_replica: Vec<(Vec<f64>, Vec<f64>)> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<(Vec<f64>, Vec<f64>)> {
            let sg = stationary_grid(pp, m, n, z, substream(seed, r as u64))?;
            let row_vals = row_idx
                .iter()
                .map(|&i| sg.g_hat(i, n) - sg.g_hat(i - 1, n))
                .collect();
            let col_vals = col_idx
                .iter()
                .map(|&j| sg.g_hat(m, j) - sg.g_hat(m, j - 1))
                .collect();
            Ok((row_vals, col_vals))
        })
        .collect::<Result<_>>()?;

    let column_of = |store: usize, k: usize| -> Vec<f64> {
        per_replica
            .iter()
            .map(|(rv, cv)| if store == 0 { rv[k] } else { cv[k] })
            .collect()
    };
    let a_row = pp.a().row(m)?;
    let b_row = pp.b().row(n)?;
    let lag_threshold = 4.0 / (replicas as f64).sqrt();

    let mut reports = Vec::new();
    for &i in rows {
        let k = row_idx.binary_search(&i).unwrap();
        let sample = column_of(0, k);
        let rate = a_row[i - 1] + z;
        let mut report = ks_exponential(&sample, rate)?;
        report.check = format!("I({i},{n}) ~ exp(rate={rate})");
        reports.push(report);
        if let Ok(k_next) = row_idx.binary_search(&(i + 1)) {
            let next = column_of(0, k_next);
            let rho = abs_correlation(&sample, &next);
            reports.push(KsReport::new(
                format!("lag1 I({i},{n}) vs I({},{n})", i + 1),
                rho,
                replicas,
                lag_threshold,
            ));
        }
    }
    for &j in cols {
        let k = col_idx.binary_search(&j).unwrap();
        let sample = column_of(1, k);
        let rate = b_row[j - 1] - z;
        let mut report = ks_exponential(&sample, rate)?;
        report.check = format!("J({m},{j}) ~ exp(rate={rate})");
        reports.push(report);
        if let Ok(k_next) = col_idx.binary_search(&(j + 1)) {
            let next = column_of(1, k_next);
            let rho = abs_correlation(&sample, &next);
            reports.push(KsReport::new(
                format!("lag1 J({m},{j}) vs J({m},{})", j + 1),
                rho,
                replicas,
                lag_threshold,
            ));
        }
    }
    Ok(reports)
}

/// Which tail of the centered distribution a profile measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailSide {
    Right,
    Left,
}

/// Exceedance frequency at one deviation scale, with a 99% Wilson
/// interval.
#[derive(Clone, Copy, Debug)]
pub struct TailPoint {
    pub s: f64,
    pub frequency: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Exceedance frequencies on a grid of deviation scales.
#[derive(Clone, Debug)]
pub struct DecayTable {
    pub points: Vec<TailPoint>,
    /// Exact consequence of event nesting when all points share one set
    /// of replicas; recorded so downstream reports can assert it.
    pub nonincreasing: bool,
}

impl DecayTable {
    pub fn frequency_at(&self, s: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.s == s)
            .map(|p| p.frequency)
    }

    /// Whether the frequency at `s = 1` stays below one half; `None` when
    /// the grid does not contain `s = 1`.
    pub fn below_half_at_one(&self) -> Option<bool> {
        self.frequency_at(1.0).map(|f| f < 0.5)
    }
}

fn wilson_99(successes: usize, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn decay_table_from(deviations: &[f64], s_grid: &[f64]) -> Result<DecayTable> {
    for pair in s_grid.windows(2) {
        if !(pair[1] >= pair[0]) {
            return Err(Error::Domain(format!(
                "deviation grid must be nondecreasing, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    if s_grid.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::Domain(
            "deviation scales must be finite and nonnegative".to_string(),
        ));
    }
    let n = deviations.len();
    let points: Vec<TailPoint> = s_grid
        .iter()
        .map(|&s| {
            let hits = deviations.iter().filter(|&&d| d >= s).count();
            let (wilson_low, wilson_high) = wilson_99(hits, n);
            TailPoint {
                s,
                frequency: hits as f64 / n as f64,
                wilson_low,
                wilson_high,
            }
        })
        .collect();
    let nonincreasing = points.windows(2).all(|w| w[1].frequency <= w[0].frequency);
    Ok(DecayTable {
        points,
        nonincreasing,
    })
}

/// Empirical tail of the corner value around its centering: the frequency
/// of `G >= M + shift + s sqrt(C)` (right) or `G <= M + shift - s sqrt(C)`
/// (left) per deviation scale `s`, over one shared set of replicas. The
/// shared replicas make the decay exactly nonincreasing by event nesting.
pub fn tail_profile(
    pp: &ParamPair,
    m: usize,
    n: usize,
    s_grid: &[f64],
    replicas: usize,
    side: TailSide,
    seed: u64,
    center_shift: f64,
) -> Result<DecayTable> {
    if replicas < 1000 {
        return Err(Error::Domain(format!(
            "tail profiles need at least 1000 replicas, got {replicas}"
        )));
    }
    let sol = solve_centering(pp, m, n)?;
    let center = sol.center + center_shift;
    let scale = sol.variance.sqrt();
    let draws: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| lpp_point(pp, m, n, substream(seed, r as u64)))
        .collect::<Result<_>>()?;
    let deviations: Vec<f64> = draws
        .iter()
        .map(|&g| match side {
            TailSide::Right => (g - center) / scale,
            TailSide::Left => (center - g) / scale,
        })
        .collect();
    decay_table_from(&deviations, s_grid)
}

/// Empirical concentration of a sum of independent exponentials around
/// its mean, in units of `sqrt(sum of 1/rate^2)`: two-sided exceedance
/// frequency per deviation scale.
pub fn expsum_concentration(
    rates: &[f64],
    replicas: usize,
    s_grid: &[f64],
    seed: u64,
) -> Result<DecayTable> {
    if rates.is_empty() {
        return Err(Error::Domain("empty rate list".to_string()));
    }
    if rates.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Domain(
            "all rates must be positive and finite".to_string(),
        ));
    }
    if replicas < KS_MIN_SAMPLE {
        return Err(Error::Domain(format!(
            "need at least {KS_MIN_SAMPLE} replicas, got {replicas}"
        )));
    }
    let mean = comp_sum(rates.iter().map(|&r| 1.0 / r));
    let sd = comp_sum(rates.iter().map(|&r| 1.0 / (r * r))).sqrt();
    let deviations: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let rep_seed = substream(seed, r as u64);
            let sum = comp_sum(
                rates
                    .iter()
                    .enumerate()
                    .map(|(i, &rate)| cell_exponential(rep_seed, EXPSUM_STREAM, i as u64, 0, rate)),
            );
            (sum - mean).abs() / sd
        })
        .collect();
    decay_table_from(&deviations, s_grid)
}

/// Exit-point statistics of the stationary geodesics over replicas at one
/// tilt.
#[derive(Clone, Debug)]
pub struct ExitProfile {
    pub z: f64,
    /// `(Z_hor, Z_ver)` per replica.
    pub exits: Vec<(usize, usize)>,
    /// `max(Z_hor, Z_ver)` per replica, the localization statistic.
    pub max_exits: Vec<usize>,
    pub median_max: f64,
    /// Fraction of replicas with `max(Z_hor, Z_ver) > m^{3/4}`.
    pub frac_beyond_m34: f64,
}

/// Exit-point histogram at an explicit tilt `z`.
pub fn exit_profile_at(
    pp: &ParamPair,
    m: usize,
    n: usize,
    z: f64,
    seed: u64,
    replicas: usize,
) -> Result<ExitProfile> {
    if replicas == 0 {
        return Err(Error::Domain("need at least one replica".to_string()));
    }
    let exits: Vec<(usize, usize)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let sg = stationary_grid(pp, m, n, z, substream(seed, r as u64))?;
            exit_points(&sg, m, n)
        })
        .collect::<Result<_>>()?;
    let max_exits: Vec<usize> = exits.iter().map(|&(h, v)| h.max(v)).collect();
    let mut sorted = max_exits.clone();
    sorted.sort_unstable();
    let median_max = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) as f64 / 2.0
    };
    let cutoff = (m as f64).powf(0.75);
    let frac_beyond_m34 =
        max_exits.iter().filter(|&&e| e as f64 > cutoff).count() as f64 / replicas as f64;
    Ok(ExitProfile {
        z,
        exits,
        max_exits,
        median_max,
        frac_beyond_m34,
    })
}

/// Exit-point histogram at the variance-balancing tilt of `(m, n)`, where
/// geodesics are expected to localize near the origin.
pub fn exit_profile(
    pp: &ParamPair,
    m: usize,
    n: usize,
    seed: u64,
    replicas: usize,
) -> Result<ExitProfile> {
    let zeta = solve_centering(pp, m, n)?.zeta;
    exit_profile_at(pp, m, n, zeta, seed, replicas)
}

/// Boolean raster over the square `[0, c]^2` on a `side x side` grid of
/// spacing `h = c/side`; predicates are sampled at lower-left cell
/// corners (see [`RegionRaster::from_predicate`]).
#[derive(Clone, Debug)]
pub struct RegionRaster {
    side: usize,
    h: f64,
    words: Vec<u64>,
}

impl RegionRaster {
    pub fn new_empty(c: f64, side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::Domain("raster needs at least one cell".to_string()));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!(
                "bounding box size must be positive and finite, got {c}"
            )));
        }
        Ok(RegionRaster {
            side,
            h: c / side as f64,
            words: vec![0u64; (side * side).div_ceil(64)],
        })
    }

    /// Rasterizes a membership predicate by evaluating it at every cell's
    /// lower-left corner `(ix*h, iy*h)`.
    ///
    /// The regions rasterized here (growth clusters and their limits) are
    /// closed down-left, and for such sets the lower-left corner lies in
    /// the region exactly when the cell meets it at all, so this
    /// convention keeps the raster error O(h) even where the boundary
    /// meets an axis in a cusp. Center sampling would clip such a cusp to
    /// the cells whose centers clear it, an O(sqrt(h)) bite that would
    /// dominate any Hausdorff comparison near the axes.
    pub fn from_predicate(
        c: f64,
        side: usize,
        mut member: impl FnMut(f64, f64) -> Result<bool>,
    ) -> Result<Self> {
        let mut raster = Self::new_empty(c, side)?;
        for iy in 0..side {
            let y = iy as f64 * raster.h;
            for ix in 0..side {
                let x = ix as f64 * raster.h;
                if member(x, y)? {
                    raster.set_cell(ix, iy);
                }
            }
        }
        Ok(raster)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Side length of the bounding box.
    pub fn c(&self) -> f64 {
        self.h * self.side as f64
    }

    pub fn set_cell(&mut self, ix: usize, iy: usize) {
        assert!(ix < self.side && iy < self.side, "cell out of range");
        let k = iy * self.side + ix;
        self.words[k / 64] |= 1u64 << (k % 64);
    }

    pub fn is_set(&self, ix: usize, iy: usize) -> bool {
        assert!(ix < self.side && iy < self.side, "cell out of range");
        self.is_set_linear(iy * self.side + ix)
    }

    fn is_set_linear(&self, k: usize) -> bool {
        self.words[k / 64] & (1u64 << (k % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Placeholder distance seeding unset cells before the transform; any
/// finite value far above the largest attainable squared cell distance
/// works, and finiteness keeps the envelope arithmetic well-defined.
const EDT_FAR: f64 = 1e12;

/// One-dimensional squared-distance transform by lower envelopes of
/// parabolas; exact for the sampled values.
fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        d[q] = (q as f64 - p as f64) * (q as f64 - p as f64) + f[p];
    }
}

/// Squared Euclidean distance (in cell units) from every cell to the
/// nearest set cell, via the two-pass column/row transform.
fn squared_edt(raster: &RegionRaster) -> Vec<f64> {
    let s = raster.side;
    let mut dist = vec![0.0f64; s * s];
    let mut f = vec![0.0f64; s];
    let mut d = vec![0.0f64; s];
    let mut v = vec![0usize; s];
    let mut z = vec![0.0f64; s + 1];
    for ix in 0..s {
        for (iy, slot) in f.iter_mut().enumerate() {
            *slot = if raster.is_set(ix, iy) { 0.0 } else { EDT_FAR };
        }
        edt_1d(&f, &mut d, &mut v, &mut z);
        for iy in 0..s {
            dist[iy * s + ix] = d[iy];
        }
    }
    for iy in 0..s {
        f.copy_from_slice(&dist[iy * s..(iy + 1) * s]);
        edt_1d(&f, &mut d, &mut v, &mut z);
        dist[iy * s..(iy + 1) * s].copy_from_slice(&d);
    }
    dist
}

/// Hausdorff distance between two nonempty rasters over the same box and
/// resolution: the larger of the two directed max-min distances, exact on
/// the sampled cell lattice.
pub fn hausdorff(r1: &RegionRaster, r2: &RegionRaster) -> Result<f64> {
    if r1.side != r2.side || r1.h != r2.h {
        return Err(Error::Domain(
            "rasters must share the bounding box and resolution".to_string(),
        ));
    }
    if r1.count() == 0 || r2.count() == 0 {
        return Err(Error::Domain(
            "Hausdorff distance is undefined for an empty raster".to_string(),
        ));
    }
    let directed_sq = |from: &RegionRaster, to_edt: &[f64]| -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..from.side * from.side {
            if from.is_set_linear(k) {
                worst = worst.max(to_edt[k]);
            }
        }
        worst
    };
    let d12 = directed_sq(r1, &squared_edt(r2));
    let d21 = directed_sq(r2, &squared_edt(r1));
    Ok(d12.max(d21).sqrt() * r1.h)
}

/// Outcome of a limit-shape comparison: the Hausdorff distance between
/// the time-scaled cluster and the predicted region, with both rasters
/// for export.
pub struct LimitShapeReport {
    pub distance: f64,
    pub cluster_scaled: RegionRaster,
    pub predicted: RegionRaster,
}

/// Rasterizes the time-`t` cluster scaled by `1/t` and the predicted
/// limit region over `[0, c]^2`, and measures their Hausdorff distance.
/// The sampled extent must cover the scaled box so no cluster cell is
/// cropped away.
pub fn limit_shape_check(
    pp: &ParamPair,
    spec: &ShapeSpec,
    t: f64,
    extent: usize,
    seed: u64,
    c: f64,
) -> Result<LimitShapeReport> {
    if !(c > 0.0) || !c.is_finite() || !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "need positive finite box size and time, got c = {c}, t = {t}"
        )));
    }
    if (extent as f64) < c * t {
        return Err(Error::Domain(format!(
            "extent {extent} does not cover the scaled box: need at least {}",
            (c * t).ceil()
        )));
    }
    let mode = if pp.a().extent_independent() && pp.b().extent_independent() {
        FamilyMode::Shared
    } else {
        FamilyMode::PerRectangle
    };
    let raster = cluster(pp, extent, extent, t, seed, mode)?;
    let cluster_scaled =
        RegionRaster::from_predicate(c, LIMIT_SHAPE_RASTER_SIDE, |x, y| {
            Ok(raster.contains_point(x * t, y * t))
        })?;
    let predicted = RegionRaster::from_predicate(c, LIMIT_SHAPE_RASTER_SIDE, |x, y| {
        in_limit_shape(spec, x, y)
    })?;
    let distance = hausdorff(&cluster_scaled, &predicted)?;
    Ok(LimitShapeReport {
        distance,
        cluster_scaled,
        predicted,
    })
}

/// Outcome of a block-inhomogeneous growth run against the series limit.
#[derive(Clone, Debug)]
pub struct RainsReport {
    /// `G(Kn, Kn) / n` for the block-constant weights.
    pub ratio: f64,
    /// Raw corner value.
    pub corner: f64,
    /// Truncated-series minimization the ratio converges to.
    pub reference: RainsLimit,
}

/// Computes the corner growth ratio for block-constant parameters:
/// cell `(i, j)` has rate `base_a[ceil(i/n)-1] + base_b[ceil(j/n)-1]` on
/// the `[Kn] x [Kn]` box. Since the weights are nonnegative the corner
/// value is also the supremum over the box. The reference limit is
/// minimized over the full supplied prefixes with the given certified
/// tail bound.
pub fn rains_check(
    base_a: &[f64],
    base_b: &[f64],
    n: usize,
    k: usize,
    seed: u64,
    tail_bound: f64,
) -> Result<RainsReport> {
    if n == 0 || k == 0 {
        return Err(Error::Domain(format!(
            "need positive block size and block count, got n = {n}, k = {k}"
        )));
    }
    if base_a.len() < k || base_b.len() < k {
        return Err(Error::Domain(format!(
            "need at least {k} leading parameters per side, got {} and {}",
            base_a.len(),
            base_b.len()
        )));
    }
    let reference = rains_limit(base_a, base_b, tail_bound)?;
    let pp = ParamPair::new(
        ParamFamily::block_constant(base_a[..k].to_vec(), n)?,
        ParamFamily::block_constant(base_b[..k].to_vec(), n)?,
    )?;
    let corner = lpp_point(&pp, k * n, k * n, seed)?;
    Ok(RainsReport {
        ratio: corner / n as f64,
        corner,
        reference,
    })
}
