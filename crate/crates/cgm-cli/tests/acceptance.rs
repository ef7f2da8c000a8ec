//! Acceptance suite: eleven numbered end-to-end criteria, one test each.
//! Each test prints a `criterion NN: PASS` line with its measured values
//! (visible with `--nocapture`); a failed assertion marks the criterion
//! failed. Tolerances are pinned as constants next to each criterion.

use std::process::Command;
use std::time::Instant;

use cgm::centering::{rains_limit, solve_centering};
use cgm::lpp::{grid_id_for, lpp_forward, lpp_point, sample_weights, StorageMode, WeightGrid};
use cgm::measures::{Measure1D, TransformPair};
use cgm::params::{ParamFamily, ParamPair};
use cgm::rng::{cell_u64, cell_uniform, substream};
use cgm::shape::{boundary, gamma, limit_flux, limit_height, ShapeSpec};
use cgm::tasep::{flux, height};
use cgm::verify::{
    burke_check, exit_profile, limit_shape_check, permutation_check, rains_check, tail_profile,
    two_sample_corner_check, TailSide,
};

fn homogeneous(cap: usize) -> ParamPair {
    ParamPair::new(
        ParamFamily::constant(0.5, cap).unwrap(),
        ParamFamily::constant(0.5, cap).unwrap(),
    )
    .unwrap()
}

/// Homogeneous rate-1 limit shape data.
fn rost_spec() -> ShapeSpec {
    let half = || Measure1D::point_mass(0.5, 1.0).unwrap();
    ShapeSpec::new(TransformPair::new(half(), half(), 0.5, 0.5).unwrap(), 0.5, 0.5).unwrap()
}

/// Limit shape data with the a-side minimum dragged to zero while the
/// running minima hold at 0.5 (one vanishing defect row).
fn defect_spec() -> ShapeSpec {
    let half = || Measure1D::point_mass(0.5, 1.0).unwrap();
    ShapeSpec::new(TransformPair::new(half(), half(), 0.0, 0.5).unwrap(), 0.5, 0.5).unwrap()
}

/// Criterion 1 — shape function against the homogeneous closed form
/// `(sqrt x + sqrt y)^2` on a 50x50 grid of (0,1]^2.
#[test]
fn criterion_01_homogeneous_shape_closed_form() {
    const REL: f64 = 1e-10;
    let start = Instant::now();
    let spec = rost_spec();
    let mut worst: f64 = 0.0;
    for i in 1..=50 {
        for j in 1..=50 {
            let (x, y) = (i as f64 / 50.0, j as f64 / 50.0);
            let exact = (x.sqrt() + y.sqrt()).powi(2);
            let got = gamma(&spec, x, y).unwrap();
            worst = worst.max((got - exact).abs() / exact);
        }
    }
    assert!(worst <= REL, "max relative error {worst}");
    println!(
        "criterion 01: PASS - 2500 shape values within {REL} relative (worst {worst:.3e}) in {:.2?}",
        start.elapsed()
    );
}

/// Criterion 2 — piecewise shape with one vanishing defect row: curved
/// branch for x >= y, linear branch for x <= y, exact vertical intercept
/// and axis spike.
#[test]
fn criterion_02_defect_shape_piecewise_and_features() {
    const REL: f64 = 1e-10;
    let start = Instant::now();
    let spec = defect_spec();
    let mut worst: f64 = 0.0;
    for i in 1..=50 {
        for j in 1..=50 {
            let (x, y) = (i as f64 / 50.0, j as f64 / 50.0);
            let exact = if x >= y {
                (x.sqrt() + y.sqrt()).powi(2)
            } else {
                2.0 * (x + y)
            };
            let got = gamma(&spec, x, y).unwrap();
            worst = worst.max((got - exact).abs() / exact);
        }
    }
    assert!(worst <= REL, "max relative error {worst}");

    let geometry = boundary(&spec, 512).unwrap();
    let flat = geometry.flat_v.expect("flat segment on the vertical side");
    assert_eq!(flat.from, (0.0, 0.5), "vertical intercept");
    let spike = geometry.spike_v.expect("vertical axis spike");
    assert_eq!(spike.from, (0.0, 0.5), "spike lower end");
    assert_eq!(spike.to, (0.0, 1.0), "spike upper end");
    println!(
        "criterion 02: PASS - piecewise branches within {REL} (worst {worst:.3e}), \
         intercept 0.5 and spike [0.5, 1.0] exact, in {:.2?}",
        start.elapsed()
    );
}

/// Criterion 3 — centering solver: homogeneous closed forms, the (2,1)
/// closed form, and the balance-equation residual on 10^3 random
/// instances.
#[test]
fn criterion_03_centering_solver() {
    const ZETA_ABS: f64 = 1e-12;
    const CENTER_REL: f64 = 1e-9;
    const CLOSED_FORM_ABS: f64 = 1e-10;
    const RESIDUAL_REL: f64 = 1e-9;
    let start = Instant::now();

    for n in [1usize, 7, 64, 500] {
        let pp = homogeneous(n);
        let sol = solve_centering(&pp, n, n).unwrap();
        assert!(sol.zeta.abs() <= ZETA_ABS, "n = {n}: zeta = {}", sol.zeta);
        let center_err = (sol.center - 4.0 * n as f64).abs() / (4.0 * n as f64);
        assert!(center_err <= CENTER_REL, "n = {n}: center error {center_err}");
    }

    let pp = homogeneous(2);
    let sol = solve_centering(&pp, 2, 1).unwrap();
    let zeta_exact = (3.0 - 2.0 * 2f64.sqrt()) / 2.0;
    let center_exact = 3.0 + 2.0 * 2f64.sqrt();
    assert!((sol.zeta - zeta_exact).abs() <= CLOSED_FORM_ABS, "zeta {}", sol.zeta);
    assert!(
        (sol.center - center_exact).abs() <= CLOSED_FORM_ABS * center_exact,
        "center {}",
        sol.center
    );

    // Random instances: sizes up to 40, values in [0.2, 1.2] x [0.3, 1.3].
    let mut worst_rel: f64 = 0.0;
    for inst in 0..1000u64 {
        let m = 1 + (cell_u64(900, 1, inst, 0) % 40) as usize;
        let n = 1 + (cell_u64(900, 1, inst, 1) % 40) as usize;
        let a: Vec<f64> = (0..m)
            .map(|i| 0.2 + cell_uniform(901, 2, inst, i as u64))
            .collect();
        let b: Vec<f64> = (0..n)
            .map(|j| 0.3 + cell_uniform(901, 3, inst, j as u64))
            .collect();
        let pp = ParamPair::new(
            ParamFamily::row_constant(a).unwrap(),
            ParamFamily::row_constant(b).unwrap(),
        )
        .unwrap();
        let sol = solve_centering(&pp, m, n).unwrap();
        worst_rel = worst_rel.max(sol.residual.abs() / sol.variance);
    }
    assert!(worst_rel <= RESIDUAL_REL, "worst residual/C = {worst_rel}");
    println!(
        "criterion 03: PASS - closed forms and 1000 residuals (worst residual/C {worst_rel:.3e}) \
         in {:.2?}",
        start.elapsed()
    );
}

/// Criterion 4 — law of large numbers at finite size: one passage value
/// at (800, 800) lands in the +/-5% band around 4 per unit.
#[test]
fn criterion_04_passage_value_law_of_large_numbers() {
    let start = Instant::now();
    let pp = homogeneous(800);
    let ratio = lpp_point(&pp, 800, 800, 2027).unwrap() / 800.0;
    assert!((3.8..=4.2).contains(&ratio), "G(800,800)/800 = {ratio}");
    println!(
        "criterion 04: PASS - G(800,800)/800 = {ratio:.4} in [3.8, 4.2], in {:.2?}",
        start.elapsed()
    );
}

/// Criterion 5 — Hausdorff convergence of the scaled cluster to the
/// homogeneous limit region at the reference simulation scale, plus a
/// nonincreasing trend in t with 50% slack.
///
/// A single sample of the distance is dominated by the cluster tips near
/// the axes, which wander on the t^{-1/2} scale with a half-normal
/// profile, so the trend is asserted on means over a few independent
/// replicas per t; the headline distance bound stays a single pinned run.
#[test]
fn criterion_05_limit_shape_hausdorff() {
    const DISTANCE_MAX: f64 = 0.08;
    const TREND_SLACK: f64 = 1.5;
    const TREND_REPLICAS: u64 = 5;
    let start = Instant::now();
    let pp = homogeneous(4000);
    let spec = rost_spec();

    let headline = limit_shape_check(&pp, &spec, 1000.0, 4000, 2028, 1.1)
        .unwrap()
        .distance;
    assert!(headline <= DISTANCE_MAX, "distance at t = 1000 is {headline}");

    let mut means = Vec::new();
    for t in [250.0, 500.0, 1000.0] {
        let mut sum = 0.0;
        for r in 0..TREND_REPLICAS {
            let seed = substream(2028, r + 1);
            sum += limit_shape_check(&pp, &spec, t, 4000, seed, 1.1)
                .unwrap()
                .distance;
        }
        means.push(sum / TREND_REPLICAS as f64);
    }
    for w in means.windows(2) {
        assert!(
            w[1] <= TREND_SLACK * w[0],
            "trend violated beyond slack: means {means:?}"
        );
    }
    println!(
        "criterion 05: PASS - d(1000) = {headline:.4} <= {DISTANCE_MAX}, \
         mean distances {means:?} at t = 250/500/1000, in {:.2?}",
        start.elapsed()
    );
}

/// Criterion 6 — stationary increment laws: KS pass at alpha = 0.001 for
/// two rows and two columns, at two admissible tilts, 10^4 replicas on a
/// 50x50 grid.
#[test]
fn criterion_06_stationary_increment_laws() {
    let start = Instant::now();
    let pp = homogeneous(50);
    let mut checks = 0usize;
    for z in [0.0, 0.2] {
        let reports = burke_check(&pp, 50, 50, z, 2029, &[1, 50], &[1, 50], 10_000).unwrap();
        for r in &reports {
            assert!(
                r.pass,
                "z = {z}: {} failed with statistic {} vs threshold {}",
                r.check, r.statistic, r.threshold
            );
        }
        checks += reports.len();
    }
    println!(
        "criterion 06: PASS - {checks} increment checks pass at both tilts in {:.2?}",
        start.elapsed()
    );
}

/// Criterion 7 — permutation invariance of the corner law on a 3x3
/// instance with distinct parameters, plus a failing negative control.
#[test]
fn criterion_07_permutation_invariance() {
    let start = Instant::now();
    let pair = |a: [f64; 3], b: [f64; 3]| {
        ParamPair::new(
            ParamFamily::row_constant(a.to_vec()).unwrap(),
            ParamFamily::row_constant(b.to_vec()).unwrap(),
        )
        .unwrap()
    };
    let base = pair([0.3, 0.7, 0.5], [0.4, 0.6, 0.45]);
    let permuted = pair([0.5, 0.3, 0.7], [0.45, 0.4, 0.6]);
    let tampered = pair([0.3, 0.7, 0.2], [0.4, 0.6, 0.45]);

    let invariance = permutation_check(&base, &permuted, 3, 3, 2030, 20_000).unwrap();
    assert!(
        invariance.pass,
        "invariance failed: D = {} vs {}",
        invariance.statistic, invariance.threshold
    );
    let control = two_sample_corner_check(&base, &tampered, 3, 3, 2030, 20_000).unwrap();
    assert!(
        !control.pass,
        "negative control unexpectedly passed: D = {}",
        control.statistic
    );
    println!(
        "criterion 07: PASS - invariance D = {:.4} < {:.4}, control D = {:.4} fails, in {:.2?}",
        invariance.statistic,
        invariance.threshold,
        control.statistic,
        start.elapsed()
    );
}

/// Criterion 8 — block-constant growth with squared-integer parameters:
/// the ratio at n = 100, K = 20 lands within 10% of pi^2/3, and the
/// series limit itself is reproduced to 2e-6.
#[test]
fn criterion_08_block_growth_series_limit() {
    const RATIO_REL: f64 = 0.10;
    const LIMIT_ABS: f64 = 2e-6;
    let start = Instant::now();
    let limit = std::f64::consts::PI.powi(2) / 3.0;
    let base: Vec<f64> = (1..=1_000_000u64).map(|k| (k as f64) * (k as f64)).collect();
    let reference = rains_limit(&base, &base, LIMIT_ABS).unwrap();
    assert!(
        (reference.value - limit).abs() <= LIMIT_ABS,
        "series limit {} vs {limit}",
        reference.value
    );
    let report = rains_check(&base, &base, 100, 20, 2031, LIMIT_ABS).unwrap();
    assert!(
        (report.ratio - limit).abs() <= RATIO_REL * limit,
        "ratio {} vs {limit}",
        report.ratio
    );
    println!(
        "criterion 08: PASS - ratio {:.4} within 10% of {limit:.6}, series value within {LIMIT_ABS}, \
         in {:.2?}",
        report.ratio,
        start.elapsed()
    );
}

/// Criterion 9 — exclusion process limits against the derived closed
/// forms: the height ratio at (100, 400) in its stated band, and the flux
/// at (400, 800) within 15% of the variational oracle.
#[test]
fn criterion_09_tasep_limits() {
    const FLUX_REL: f64 = 0.15;
    let start = Instant::now();
    let spec = rost_spec();

    // Height: the limiting value is (sqrt t - sqrt n)^2 = 100 at n = 100,
    // t = 400, i.e. ratio 0.25.
    let pp = homogeneous(256);
    let wg = sample_weights(&pp, 256, 100, 2032, grid_id_for(256, 100)).unwrap();
    let g = lpp_forward(&wg, StorageMode::Full);
    let h_ratio = height(&g, 100, 400.0).unwrap() as f64 / 400.0;
    let h_limit = limit_height(&spec, 100.0, 400.0).unwrap();
    assert!((h_limit - 100.0).abs() < 1e-9, "height oracle {h_limit}");
    assert!((0.18..=0.32).contains(&h_ratio), "H(100,400)/400 = {h_ratio}");

    // Flux: the variational oracle maximizes (t - x A(z)) / (A(z) + B(z));
    // at x = 400, t = 800 it equals 50, i.e. 0.0625 per unit time.
    let f_limit = limit_flux(&spec, 400.0, 800.0).unwrap();
    assert!((f_limit - 50.0).abs() < 1e-9, "flux oracle {f_limit}");
    let pp = homogeneous(640);
    let wg = sample_weights(&pp, 640, 160, 2033, grid_id_for(640, 160)).unwrap();
    let g = lpp_forward(&wg, StorageMode::Full);
    let f_ratio = flux(&g, 400, 800.0).unwrap() as f64 / 800.0;
    let oracle_ratio = f_limit / 800.0;
    assert!(
        (f_ratio - oracle_ratio).abs() <= FLUX_REL * oracle_ratio,
        "F(400,800)/800 = {f_ratio} vs oracle {oracle_ratio}"
    );
    println!(
        "criterion 09: PASS - height ratio {h_ratio:.4} in [0.18, 0.32], \
         flux ratio {f_ratio:.4} within 15% of {oracle_ratio}, in {:.2?}",
        start.elapsed()
    );
}

/// Criterion 10 — the dynamic program equals exhaustive path enumeration
/// exactly on every sub-corner of 4x4 grids over 20 independent draws.
#[test]
fn criterion_10_dp_equals_path_enumeration() {
    let start = Instant::now();

    // Forward enumeration: from (1,1) move up/right, tracking the running
    // sum in path order so additions associate exactly as in the DP;
    // record the best arrival at every cell.
    fn enumerate(w: &WeightGrid, m: usize, n: usize) -> Vec<f64> {
        let mut best = vec![f64::NEG_INFINITY; m * n];
        fn walk(w: &WeightGrid, m: usize, n: usize, i: usize, j: usize, acc: f64, best: &mut [f64]) {
            let here = acc + w.w(i, j);
            let idx = (j - 1) * m + (i - 1);
            if here > best[idx] {
                best[idx] = here;
            }
            if i < m {
                walk(w, m, n, i + 1, j, here, best);
            }
            if j < n {
                walk(w, m, n, i, j + 1, here, best);
            }
        }
        walk(w, m, n, 1, 1, 0.0, &mut best);
        best
    }

    let pp = homogeneous(4);
    for draw in 0..20u64 {
        let wg = sample_weights(&pp, 4, 4, substream(2034, draw), draw + 1).unwrap();
        let g = lpp_forward(&wg, StorageMode::Full);
        let best = enumerate(&wg, 4, 4);
        for i in 1..=4 {
            for j in 1..=4 {
                let dp = g.value(i, j).unwrap();
                let brute = best[(j - 1) * 4 + (i - 1)];
                assert!(
                    dp == brute,
                    "draw {draw}: DP {dp} != enumeration {brute} at ({i},{j})"
                );
            }
        }
    }
    println!(
        "criterion 10: PASS - DP equals enumeration exactly on 20 draws x 16 corners in {:.2?}",
        start.elapsed()
    );
}

/// Criterion 11 — determinism across worker threads: the same run
/// executed by the binary with 1, 2, and 8 threads produces identical
/// manifests (hence identical artifact checksums) and identical artifact
/// bytes.
#[test]
fn criterion_11_thread_count_determinism() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut manifests = Vec::new();
    let mut rasters = Vec::new();
    for threads in ["1", "2", "8"] {
        let dir = tmp.path().join(format!("threads-{threads}"));
        let out = Command::new(env!("CARGO_BIN_EXE_cgm"))
            .args([
                "simulate",
                "--preset",
                "rost",
                "--grid",
                "512x512",
                "--t",
                "150",
                "--seed",
                "21",
                "--threads",
                threads,
                "--out",
                dir.to_str().unwrap(),
            ])
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "threads = {threads}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        manifests.push(std::fs::read(dir.join("run.json")).unwrap());
        rasters.push(std::fs::read(dir.join("cluster.pgm")).unwrap());
    }
    assert_eq!(manifests[0], manifests[1], "manifests differ at 2 threads");
    assert_eq!(manifests[0], manifests[2], "manifests differ at 8 threads");
    assert_eq!(rasters[0], rasters[1]);
    assert_eq!(rasters[0], rasters[2]);
    println!(
        "criterion 11: PASS - identical manifests and artifacts across 1/2/8 threads in {:.2?}",
        start.elapsed()
    );
}

/// Criteria-adjacent: the tail and exit reports run at reference scale
/// and emit verdicts; only structural properties are asserted, never
/// statistical bounds beyond the stated significance.
#[test]
fn criteria_adjacent_tail_and_exit_reports() {
    let start = Instant::now();
    let pp = homogeneous(200);
    let s_grid: Vec<f64> = (0..=6).map(|k| k as f64 * 0.5).collect();
    let table = tail_profile(&pp, 100, 100, &s_grid, 2000, TailSide::Right, 2035, 0.0).unwrap();
    assert!(table.nonincreasing, "shared replicas force exact nesting");
    let left = tail_profile(&pp, 100, 100, &s_grid, 2000, TailSide::Left, 2035, 0.0).unwrap();
    assert!(left.nonincreasing);

    let profile = exit_profile(&pp, 200, 200, 2036, 1000).unwrap();
    let cutoff = (200f64).powf(0.75);
    assert!(
        profile.median_max <= cutoff,
        "median max-exit {} beyond {cutoff}",
        profile.median_max
    );
    println!(
        "criteria-adjacent: PASS - decay tables nonincreasing, median max-exit {} <= {cutoff:.2}, \
         in {:.2?}",
        profile.median_max,
        start.elapsed()
    );
}

/// Criteria-adjacent: the golden-section evaluations of the limiting
/// height and flux agree with a dense scan over the admissible tilts.
#[test]
fn criteria_adjacent_limit_observables_match_dense_scan() {
    let start = Instant::now();
    for spec in [rost_spec(), defect_spec()] {
        let (lo, hi) = spec.interval();
        let dense = |f: &dyn Fn(f64) -> f64| -> f64 {
            let steps = 200_000;
            let inset = 1e-9 * (hi - lo);
            let (a, b) = (lo + inset, hi - inset);
            let mut best = 0.0f64;
            for k in 0..=steps {
                let z = a + (b - a) * k as f64 / steps as f64;
                best = best.max(f(z));
            }
            best
        };
        for (y, t) in [(100.0, 400.0), (37.5, 200.0), (3.0, 11.0)] {
            let got = limit_height(&spec, y, t).unwrap();
            let scan = dense(&|z| (t - y * spec.tp.b(z).unwrap()) / spec.tp.a(z).unwrap());
            assert!(
                (got - scan).abs() <= 1e-4 * (1.0 + got.abs()),
                "height({y},{t}): {got} vs dense {scan}"
            );
        }
        for (x, t) in [(400.0, 800.0), (120.0, 500.0), (2.0, 9.0)] {
            let got = limit_flux(&spec, x, t).unwrap();
            let scan = dense(&|z| {
                let a = spec.tp.a(z).unwrap();
                let b = spec.tp.b(z).unwrap();
                (t - x * a) / (a + b)
            });
            assert!(
                (got - scan).abs() <= 1e-4 * (1.0 + got.abs()),
                "flux({x},{t}): {got} vs dense {scan}"
            );
        }
    }
    println!(
        "criteria-adjacent: PASS - limiting height/flux match dense tilt scans in {:.2?}",
        start.elapsed()
    );
}
