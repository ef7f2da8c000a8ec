//! Subcommand implementations: each run writes plot-ready CSV/PGM
//! artifacts into the output directory plus a `run.json` manifest holding
//! the canonical config echo, its hash, and a checksum per artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;

use cgm::centering::solve_centering;
use cgm::lpp::{cluster, grid_id_for, lpp_forward, sample_weights, FamilyMode, StorageMode};
use cgm::params::{ParamFamily, ParamPair};
use cgm::rng::digest_words;
use cgm::shape::{boundary, BoundaryGeometry, Segment};
use cgm::tasep::frame;
use cgm::verify::{
    burke_check, exit_profile, expsum_concentration, limit_shape_check, permutation_check,
    rains_check, tail_profile, two_sample_corner_check, DecayTable, KsReport, RegionRaster,
    TailSide,
};

use crate::config::{Resolved, RunConfig};
use crate::CliError;

/// Manifest written at the end of every run.
#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a RunConfig,
    /// Hash of the canonical config serialization.
    config_hash: String,
    artifacts: Vec<ArtifactEntry>,
    /// Checksums of in-memory grid objects, for cross-run determinism
    /// checks independent of file encoding.
    grid_checksums: Vec<GridChecksum>,
}

#[derive(Serialize)]
struct ArtifactEntry {
    file: String,
    checksum: String,
}

#[derive(Serialize)]
struct GridChecksum {
    object: String,
    checksum: String,
}

/// Collects artifacts in one output directory and finishes with the
/// manifest.
struct ArtifactSink {
    dir: PathBuf,
    artifacts: Vec<ArtifactEntry>,
    grids: Vec<GridChecksum>,
}

fn bytes_checksum(bytes: &[u8]) -> u64 {
    let words = bytes.chunks(8).map(|chunk| {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        u64::from_le_bytes(word)
    });
    digest_words(std::iter::once(bytes.len() as u64).chain(words))
}

impl ArtifactSink {
    fn new(dir: &PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::new("io", format!("cannot create {}: {e}", dir.display())))?;
        Ok(ArtifactSink {
            dir: dir.clone(),
            artifacts: Vec::new(),
            grids: Vec::new(),
        })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| CliError::new("io", format!("cannot write {}: {e}", path.display())))?;
        self.artifacts.push(ArtifactEntry {
            file: name.to_string(),
            checksum: format!("{:016x}", bytes_checksum(bytes)),
        });
        Ok(())
    }

    /// Checksums a file that was written directly by a library writer.
    fn note_file(&mut self, name: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let bytes = fs::read(&path)
            .map_err(|e| CliError::new("io", format!("cannot read back {}: {e}", path.display())))?;
        self.artifacts.push(ArtifactEntry {
            file: name.to_string(),
            checksum: format!("{:016x}", bytes_checksum(&bytes)),
        });
        Ok(())
    }

    fn add_grid_checksum(&mut self, object: &str, checksum: u64) {
        self.grids.push(GridChecksum {
            object: object.to_string(),
            checksum: format!("{checksum:016x}"),
        });
    }

    fn finish(self, echo: &RunConfig) -> Result<(), CliError> {
        let canonical = serde_json::to_vec(echo)
            .map_err(|e| CliError::new("io", format!("config serialization: {e}")))?;
        let manifest = Manifest {
            config: echo,
            config_hash: format!("{:016x}", bytes_checksum(&canonical)),
            artifacts: self.artifacts,
            grid_checksums: self.grids,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| CliError::new("io", format!("manifest serialization: {e}")))?;
        bytes.push(b'\n');
        let path = self.dir.join("run.json");
        fs::write(&path, &bytes)
            .map_err(|e| CliError::new("io", format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}


fn boundary_csv(geometry: &BoundaryGeometry, scale: f64) -> String {
    let mut out = String::from("part,x,y\n");
    for &(x, y) in &geometry.curved {
        let _ = writeln!(out, "curve,{},{}", x * scale, y * scale);
    }
    let segments: [(&str, &Option<Segment>); 4] = [
        ("flat_v", &geometry.flat_v),
        ("flat_h", &geometry.flat_h),
        ("spike_v", &geometry.spike_v),
        ("spike_h", &geometry.spike_h),
    ];
    for (name, seg) in segments {
        if let Some(s) = seg {
            let _ = writeln!(out, "{name},{},{}", s.from.0 * scale, s.from.1 * scale);
            let _ = writeln!(out, "{name},{},{}", s.to.0 * scale, s.to.1 * scale);
        }
    }
    out
}

fn ks_csv_rows(out: &mut String, prefix: &str, reports: &[KsReport]) {
    for r in reports {
        let _ = writeln!(
            out,
            "{prefix}{},{},{},{},{}",
            r.check, r.statistic, r.sample_size, r.threshold, r.pass
        );
    }
}

fn decay_csv_rows(out: &mut String, case: &str, table: &DecayTable) {
    for p in &table.points {
        let _ = writeln!(
            out,
            "{case},{},{},{},{}",
            p.s, p.frequency, p.wilson_low, p.wilson_high
        );
    }
}

/// P5 raster of a region: rows top-to-bottom correspond to decreasing y.
fn region_pgm(r: &RegionRaster) -> Vec<u8> {
    let side = r.side();
    let mut bytes = format!("P5\n{side} {side}\n1\n").into_bytes();
    for iy in (0..side).rev() {
        for ix in 0..side {
            bytes.push(u8::from(r.is_set(ix, iy)));
        }
    }
    bytes
}

pub fn dispatch(r: &Resolved) -> Result<(), CliError> {
    match r.command.as_str() {
        "simulate" => simulate(r),
        "shape" => shape(r),
        "centering" => centering(r),
        "tasep" => tasep(r),
        "verify-burke" => verify_burke(r),
        "verify-permutation" => verify_permutation(r),
        "verify-tails" => verify_tails(r),
        "verify-exit" => verify_exit(r),
        "verify-limitshape" => verify_limitshape(r),
        "verify-expsum" => verify_expsum(r),
        "rains" => rains(r),
        other => Err(CliError::new(
            "config",
            format!("unknown command {other:?}"),
        )),
    }
}

fn simulate(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    let pp = r.families()?;
    let (m, n) = r.grid;
    let mode = if pp.a().extent_independent() && pp.b().extent_independent() {
        FamilyMode::Shared
    } else {
        FamilyMode::PerRectangle
    };
    let raster = cluster(&pp, m, n, r.t, r.seed, mode)?;
    raster.write_pgm(&r.out.join("cluster.pgm"))?;
    sink.note_file("cluster.pgm")?;
    raster.write_runlength_csv(&r.out.join("cluster_runs.csv"))?;
    sink.note_file("cluster_runs.csv")?;
    sink.add_grid_checksum("cluster", raster.checksum());

    // Predicted boundary, scaled by the horizon for overlay on the
    // raster; skipped when the configuration has no nondegenerate shape.
    if let Ok(spec) = r.shape_spec() {
        let geometry = boundary(&spec, 1024)?;
        sink.write_bytes(
            "boundary_scaled.csv",
            boundary_csv(&geometry, r.t).as_bytes(),
        )?;
    }
    println!(
        "simulate: {} of {} cells grown by t = {}",
        raster.count(),
        m * n,
        r.t
    );
    sink.finish(&r.echo)
}

fn shape(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    let spec = r.shape_spec()?;
    let geometry = boundary(&spec, 1024)?;
    sink.write_bytes("boundary.csv", boundary_csv(&geometry, 1.0).as_bytes())?;

    let mut features = String::from("feature,x0,y0,x1,y1\n");
    let segments: [(&str, &Option<Segment>); 4] = [
        ("flat_v", &geometry.flat_v),
        ("flat_h", &geometry.flat_h),
        ("spike_v", &geometry.spike_v),
        ("spike_h", &geometry.spike_h),
    ];
    for (name, seg) in segments {
        if let Some(s) = seg {
            let _ = writeln!(
                features,
                "{name},{},{},{},{}",
                s.from.0, s.from.1, s.to.0, s.to.1
            );
        }
    }
    sink.write_bytes("features.csv", features.as_bytes())?;
    println!(
        "shape: {} boundary points, degenerate = {}",
        geometry.curved.len(),
        geometry.degenerate
    );
    sink.finish(&r.echo)
}

fn centering(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    let pp = r.families()?;
    let (m, n) = r.grid;
    let sol = solve_centering(&pp, m, n)?;
    let csv = format!(
        "m,n,zeta,center,variance,delta,residual\n{m},{n},{},{},{},{},{}\n",
        sol.zeta, sol.center, sol.variance, sol.delta, sol.residual
    );
    sink.write_bytes("centering.csv", csv.as_bytes())?;
    println!(
        "centering: zeta = {}, center = {}, variance = {}",
        sol.zeta, sol.center, sol.variance
    );
    sink.finish(&r.echo)
}

fn tasep(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    let pp = r.families()?;
    let (m, n) = r.grid;
    let wg = sample_weights(&pp, m, n, r.seed, grid_id_for(m, n))?;
    let g = lpp_forward(&wg, StorageMode::Full);
    let f = frame(&g, r.t)?;
    let mut heights = String::from("n,height,position\n");
    for (idx, (&h, &p)) in f.heights.iter().zip(&f.positions).enumerate() {
        let _ = writeln!(heights, "{},{h},{p}", idx + 1);
    }
    sink.write_bytes("heights.csv", heights.as_bytes())?;
    let mut flux = String::from("m,flux\n");
    for (idx, &fl) in f.flux.iter().enumerate() {
        let _ = writeln!(flux, "{},{fl}", idx + 1);
    }
    sink.write_bytes("flux.csv", flux.as_bytes())?;
    sink.add_grid_checksum("lpp", g.checksum());
    println!(
        "tasep: t = {}, max height = {}, flux through column 1 = {}",
        r.t,
        f.heights.iter().copied().max().unwrap_or(0),
        f.flux.first().copied().unwrap_or(0)
    );
    sink.finish(&r.echo)
}

fn verify_burke(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    let pp = r.families()?;
    let (m, n) = r.grid;
    let mut csv = String::from("z,check,statistic,sample_size,threshold,pass\n");
    let mut passes = 0usize;
    let mut total = 0usize;
    for z in [0.0, 0.2] {
        let reports = burke_check(&pp, m, n, z, r.seed, &[1, m], &[1, n], r.replicas)?;
        passes += reports.iter().filter(|rep| rep.pass).count();
        total += reports.len();
        ks_csv_rows(&mut csv, &format!("{z},"), &reports);
    }
    sink.write_bytes("burke.csv", csv.as_bytes())?;
    println!("verify-burke: {passes}/{total} checks pass");
    sink.finish(&r.echo)
}

fn verify_permutation(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    // Canonical 3x3 instance with distinct parameters on both sides, its
    // permutation, and a non-permutation negative control.
    let pair = |a: [f64; 3], b: [f64; 3]| -> Result<ParamPair, CliError> {
        Ok(ParamPair::new(
            ParamFamily::row_constant(a.to_vec())?,
            ParamFamily::row_constant(b.to_vec())?,
        )?)
    };
    let base = pair([0.3, 0.7, 0.5], [0.4, 0.6, 0.45])?;
    let permuted = pair([0.5, 0.3, 0.7], [0.45, 0.4, 0.6])?;
    let tampered = pair([0.3, 0.7, 0.2], [0.4, 0.6, 0.45])?;

    let invariance = permutation_check(&base, &permuted, 3, 3, r.seed, r.replicas)?;
    let control = two_sample_corner_check(&base, &tampered, 3, 3, r.seed, r.replicas)?;
    let mut csv = String::from("case,check,statistic,sample_size,threshold,pass\n");
    ks_csv_rows(&mut csv, "invariance,", std::slice::from_ref(&invariance));
    ks_csv_rows(&mut csv, "negative-control,", std::slice::from_ref(&control));
    sink.write_bytes("permutation.csv", csv.as_bytes())?;
    println!(
        "verify-permutation: invariance pass = {}, negative control pass = {} (expected false)",
        invariance.pass, control.pass
    );
    sink.finish(&r.echo)
}

fn verify_tails(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    let pp = r.families()?;
    let (m, n) = r.grid;
    let s_grid: Vec<f64> = (0..=8).map(|k| k as f64 * 0.5).collect();
    let mut csv = String::from("side,s,frequency,wilson_low,wilson_high\n");
    let mut nonincreasing = true;
    for (label, side) in [("right", TailSide::Right), ("left", TailSide::Left)] {
        let table = tail_profile(&pp, m, n, &s_grid, r.replicas, side, r.seed, 0.0)?;
        nonincreasing &= table.nonincreasing;
        decay_csv_rows(&mut csv, label, &table);
    }
    sink.write_bytes("tails.csv", csv.as_bytes())?;
    println!("verify-tails: exceedance decay nonincreasing = {nonincreasing}");
    sink.finish(&r.echo)
}

fn verify_exit(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    let pp = r.families()?;
    let (m, n) = r.grid;
    let profile = exit_profile(&pp, m, n, r.seed, r.replicas)?;
    let mut counts = std::collections::BTreeMap::new();
    for &e in &profile.exits {
        *counts.entry(e).or_insert(0usize) += 1;
    }
    let mut csv = String::from("z_hor,z_ver,count\n");
    for ((zh, zv), c) in counts {
        let _ = writeln!(csv, "{zh},{zv},{c}");
    }
    sink.write_bytes("exits.csv", csv.as_bytes())?;
    let summary = format!(
        "z,median_max,frac_beyond_m34\n{},{},{}\n",
        profile.z, profile.median_max, profile.frac_beyond_m34
    );
    sink.write_bytes("exit_summary.csv", summary.as_bytes())?;
    println!(
        "verify-exit: median max-exit {} (m^0.75 = {}), fraction beyond = {}",
        profile.median_max,
        (m as f64).powf(0.75),
        profile.frac_beyond_m34
    );
    sink.finish(&r.echo)
}

fn verify_limitshape(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    const C: f64 = 1.1;
    let extent = if r.grid_explicit {
        r.grid.0.max(r.grid.1)
    } else {
        (C * r.t).ceil() as usize + 1
    };
    // The cluster box is extent x extent regardless of the grid aspect, so
    // the families must cover the square.
    let pp = r.families_covering(extent, extent)?;
    let spec = r.shape_spec()?;
    let report = limit_shape_check(&pp, &spec, r.t, extent, r.seed, C)?;
    sink.write_bytes(
        "limitshape.csv",
        format!("t,extent,distance\n{},{extent},{}\n", r.t, report.distance).as_bytes(),
    )?;
    sink.write_bytes("cluster_scaled.pgm", &region_pgm(&report.cluster_scaled))?;
    sink.write_bytes("predicted.pgm", &region_pgm(&report.predicted))?;
    println!(
        "verify-limitshape: Hausdorff distance {} at t = {}",
        report.distance, r.t
    );
    sink.finish(&r.echo)
}

fn verify_expsum(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    let mut csv = String::from("case,s,frequency,wilson_low,wilson_high\n");
    let unit = vec![1.0; 100];
    let table = expsum_concentration(&unit, r.replicas, &[0.0, 1.0, 2.0, 3.0], r.seed)?;
    decay_csv_rows(&mut csv, "unit-100", &table);
    let spread_freq = table.frequency_at(3.0);
    let hetero: Vec<f64> = (1..=100).map(|i| i as f64).collect();
    let table = expsum_concentration(&hetero, r.replicas, &[0.0, 2.0, 4.0], r.seed)?;
    decay_csv_rows(&mut csv, "rates-1-100", &table);
    sink.write_bytes("expsum.csv", csv.as_bytes())?;
    println!(
        "verify-expsum: unit-rate frequency at s = 3 is {:?}",
        spread_freq
    );
    sink.finish(&r.echo)
}

fn rains(r: &Resolved) -> Result<(), CliError> {
    let mut sink = ArtifactSink::new(&r.out)?;
    // Squared-integer parameters; the prefix length is set by the
    // certified tail bound (the series tail beyond L is about 2/L).
    let len = ((2.0 / r.tail).ceil() as usize)
        .clamp(r.blocks, 8_000_000)
        .max(r.blocks);
    let base: Vec<f64> = (1..=len).map(|k| (k as f64) * (k as f64)).collect();
    let report = rains_check(&base, &base, r.block, r.blocks, r.seed, r.tail)?;
    let csv = format!(
        "n,k,ratio,corner,reference,minimizer,reference_error_bound\n{},{},{},{},{},{},{}\n",
        r.block,
        r.blocks,
        report.ratio,
        report.corner,
        report.reference.value,
        report.reference.minimizer,
        report.reference.error_bound
    );
    sink.write_bytes("rains.csv", csv.as_bytes())?;
    println!(
        "rains: ratio {} vs series limit {} (+/- {})",
        report.ratio, report.reference.value, report.reference.error_bound
    );
    sink.finish(&r.echo)
}
