//! Weight sampling and last-passage dynamic programming.
//!
//! A weight grid attaches an independent exponential to every lattice cell,
//! with the rate at `(i, j)` given by the parameter sum `a_m(i) + b_n(j)`.
//! Passage times follow the up-right recursion
//! `G(i,j) = max(G(i-1,j), G(i,j-1)) + w(i,j)` with zero boundary terms.
//! Because every draw is a pure function of `(seed, stream, i, j)`, grids
//! regenerate bit-identically in any evaluation order, which makes the
//! parallel wavefront, the memory-lean rolling mode, and cell-at-a-time
//! streaming all agree exactly.
//!
//! On top of the bulk process the module builds increment-stationary grids
//! with boundary weights controlled by a tilt `z`, exit points of their
//! geodesics, and boolean cluster rasters of the growing region, with PGM
//! and run-length CSV export for visual inspection.

use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::ParamPair;
use crate::rng::{cell_exponential, digest_words, substream};

/// Largest number of scalar cells a fully materialized grid may hold
/// (one gibibyte of `f64`s).
pub const MAX_FULL_CELLS: usize = 1 << 27;
/// Cell budget for rasters, which store one bit per cell.
pub const MAX_RASTER_CELLS: usize = 1 << 30;
/// Cell budget for per-rectangle cluster mode, where the cost of cell
/// `(i, j)` is itself `i·j` draws.
pub const MAX_PER_RECTANGLE_CELLS: usize = 1 << 14;

/// Stream id of the weight collection attached to the rectangle `(m, n)`.
/// The point process uses one independent collection per extent.
pub fn grid_id_for(m: usize, n: usize) -> u64 {
    substream(substream(0x6772_6964, m as u64), n as u64)
}

/// Stream id used when every rectangle shares one weight family (the
/// common-sample coupling used for cluster pictures).
pub const SHARED_FAMILY_STREAM: u64 = 0x636c_7573;

fn require_extent(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Domain(format!(
            "grid extent must be positive, got {m} x {n}"
        )));
    }
    Ok(())
}

fn cells_checked(m: usize, n: usize, limit: usize, advice: &str) -> Result<usize> {
    match m.checked_mul(n) {
        Some(cells) if cells <= limit => Ok(cells),
        _ => Err(Error::Resource(format!(
            "{m} x {n} cells exceed the budget of {limit}; {advice}"
        ))),
    }
}

/// Materialized exponential weights on `[1..=m] x [1..=n]`.
///
/// Values are stored with `i` contiguous: `w(i, j)` lives at
/// `(j-1)*m + (i-1)`. Regeneration with the same parameters, seed, and
/// grid id is bit-identical.
#[derive(Clone, Debug)]
pub struct WeightGrid {
    m: usize,
    n: usize,
    seed: u64,
    grid_id: u64,
    w: Vec<f64>,
}

impl WeightGrid {
    /// Wraps explicit values (layout `(j-1)*m + (i-1)`); used for hand
    /// examples and synthetic inputs. The seed and grid id are recorded
    /// as zero.
    pub fn from_values(m: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        require_extent(m, n)?;
        let cells = cells_checked(m, n, MAX_FULL_CELLS, "reduce the extent")?;
        if values.len() != cells {
            return Err(Error::Domain(format!(
                "expected {cells} values for a {m} x {n} grid, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!(
                "weights must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(WeightGrid {
            m,
            n,
            seed: 0,
            grid_id: 0,
            w: values,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    /// Weight at 1-based `(i, j)`.
    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.w[(j - 1) * self.m + (i - 1)]
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    /// Digest of the dimensions and every stored value, in order.
    pub fn checksum(&self) -> u64 {
        digest_words(
            [self.m as u64, self.n as u64]
                .into_iter()
                .chain(self.w.iter().map(|v| v.to_bits())),
        )
    }
}

/// Samples the weight grid of extent `(m, n)`: independent draws with
/// `w(i,j) ~ Exp(a_m(i) + b_n(j))`, keyed by `(seed, grid_id, i, j)` so the
/// result does not depend on fill order or thread count.
pub fn sample_weights(
    pp: &ParamPair,
    m: usize,
    n: usize,
    seed: u64,
    grid_id: u64,
) -> Result<WeightGrid> {
    require_extent(m, n)?;
    cells_checked(
        m,
        n,
        MAX_FULL_CELLS,
        "stream cells instead (rolling mode / point evaluation)",
    )?;
    let a_row = pp.a().row(m)?;
    let b_row = pp.b().row(n)?;
    let mut w = vec![0.0_f64; m * n];
    w.par_chunks_mut(m).enumerate().for_each(|(jm1, col)| {
        let bj = b_row[jm1];
        let j = (jm1 + 1) as u64;
        for (im1, slot) in col.iter_mut().enumerate() {
            *slot = cell_exponential(seed, grid_id, (im1 + 1) as u64, j, a_row[im1] + bj);
        }
    });
    Ok(WeightGrid {
        m,
        n,
        seed,
        grid_id,
        w,
    })
}

/// How much of the passage-time grid is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StorageMode {
    /// Every `G(i, j)`; required by exit points and cluster analysis.
    Full,
    /// Only the far edges `G(·, n)` and `G(m, ·)`, with O(m+n) memory.
    Rolling,
}

enum Storage {
    Full(Vec<f64>),
    Rolling { north: Vec<f64>, east: Vec<f64> },
}

/// Passage times of a weight grid under the up-right recursion.
pub struct LppGrid {
    m: usize,
    n: usize,
    storage: Storage,
}

impl LppGrid {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> StorageMode {
        match self.storage {
            Storage::Full(_) => StorageMode::Full,
            Storage::Rolling { .. } => StorageMode::Rolling,
        }
    }

    /// `G(i, j)` at 1-based indices; full storage only.
    pub fn value(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || i > self.m || j == 0 || j > self.n {
            return Err(Error::OutOfRange {
                what: "passage-time index",
                got: if i == 0 || i > self.m { i } else { j },
                limit: if i == 0 || i > self.m { self.m } else { self.n },
            });
        }
        match &self.storage {
            Storage::Full(g) => Ok(g[(j - 1) * self.m + (i - 1)]),
            Storage::Rolling { .. } => Err(Error::Domain(
                "rolling storage keeps only the far edges; use full mode for interior values"
                    .to_string(),
            )),
        }
    }

    /// `G(m, n)`.
    pub fn corner(&self) -> f64 {
        match &self.storage {
            Storage::Full(g) => g[self.m * self.n - 1],
            Storage::Rolling { east, .. } => east[self.n - 1],
        }
    }

    /// `G(i, n)` for `i = 1..=m`.
    pub fn north_edge(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Full(g) => g[(self.n - 1) * self.m..].to_vec(),
            Storage::Rolling { north, .. } => north.clone(),
        }
    }

    /// `G(m, j)` for `j = 1..=n`.
    pub fn east_edge(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Full(g) => (1..=self.n).map(|j| g[j * self.m - 1]).collect(),
            Storage::Rolling { east, .. } => east.clone(),
        }
    }

    /// Digest of the dimensions and the stored values.
    pub fn checksum(&self) -> u64 {
        let dims = [self.m as u64, self.n as u64];
        match &self.storage {
            Storage::Full(g) => {
                digest_words(dims.into_iter().chain(g.iter().map(|v| v.to_bits())))
            }
            Storage::Rolling { north, east } => digest_words(
                dims.into_iter()
                    .chain(north.iter().map(|v| v.to_bits()))
                    .chain(east.iter().map(|v| v.to_bits())),
            ),
        }
    }
}

/// Rolling-buffer evaluation of the recursion; returns the far edges
/// `(G(·, n), G(m, ·))`. The zero-initialized buffer doubles as the
/// boundary condition for the first row and column.
fn dp_rolling(m: usize, n: usize, w: impl Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<f64>) {
    let mut cur = vec![0.0_f64; m];
    let mut east = vec![0.0_f64; n];
    for j in 1..=n {
        let mut left = 0.0_f64;
        for i in 1..=m {
            let v = left.max(cur[i - 1]) + w(i, j);
            cur[i - 1] = v;
            left = v;
        }
        east[j - 1] = cur[m - 1];
    }
    (cur, east)
}

/// Full-storage evaluation by anti-diagonal wavefronts. Cells of one
/// diagonal depend only on the previous diagonal, so they are computed in
/// parallel into a scratch row and then committed; each cell is written
/// once, making the result independent of the worker count.
fn dp_full(m: usize, n: usize, w: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0_f64; m * n];
    let mut scratch: Vec<f64> = Vec::new();
    for d in 2..=(m + n) {
        let i_min = if d > n { d - n } else { 1 };
        let i_max = if d - 1 < m { d - 1 } else { m };
        let len = i_max - i_min + 1;
        scratch.resize(len, 0.0);
        {
            let g_read = &g;
            scratch
                .par_iter_mut()
                .with_min_len(512)
                .enumerate()
                .for_each(|(k, slot)| {
                    let i = i_min + k;
                    let j = d - i;
                    let left = if i > 1 { g_read[(j - 1) * m + (i - 2)] } else { 0.0 };
                    let down = if j > 1 { g_read[(j - 2) * m + (i - 1)] } else { 0.0 };
                    *slot = left.max(down) + w[(j - 1) * m + (i - 1)];
                });
        }
        for (k, v) in scratch.iter().enumerate() {
            let i = i_min + k;
            let j = d - i;
            g[(j - 1) * m + (i - 1)] = *v;
        }
    }
    g
}

/// Passage times for a materialized weight grid.
pub fn lpp_forward(wg: &WeightGrid, mode: StorageMode) -> LppGrid {
    let storage = match mode {
        StorageMode::Full => Storage::Full(dp_full(wg.m, wg.n, &wg.w)),
        StorageMode::Rolling => {
            let (north, east) = dp_rolling(wg.m, wg.n, |i, j| wg.w(i, j));
            Storage::Rolling { north, east }
        }
    };
    LppGrid {
        m: wg.m,
        n: wg.n,
        storage,
    }
}

/// Corner passage time `G(m, n)` of the point process: the extent `(m, n)`
/// gets its own weight collection (stream id derived from the extent), and
/// the weights are streamed through a rolling buffer without ever being
/// materialized.
pub fn lpp_point(pp: &ParamPair, m: usize, n: usize, seed: u64) -> Result<f64> {
    require_extent(m, n)?;
    let a_row = pp.a().row(m)?;
    let b_row = pp.b().row(n)?;
    let grid_id = grid_id_for(m, n);
    let (north, _) = dp_rolling(m, n, |i, j| {
        cell_exponential(
            seed,
            grid_id,
            i as u64,
            j as u64,
            a_row[i - 1] + b_row[j - 1],
        )
    });
    Ok(north[m - 1])
}

/// Labels of the three independent weight collections of a stationary grid.
const STATIONARY_SALT: u64 = 0x7374_6174;
const HORIZONTAL_BOUNDARY: u64 = 1;
const VERTICAL_BOUNDARY: u64 = 2;
const BULK: u64 = 3;

/// Increment-stationary passage times on `[0..=m] x [0..=n]`: boundary
/// weights on the axes with tilted rates, coupled bulk weights inside, and
/// the same up-right recursion started from `Ĝ(0,0) = 0`.
pub struct StationaryGrid {
    m: usize,
    n: usize,
    z: f64,
    /// `Ĝ(i, j)` at `i + j*(m+1)`.
    g: Vec<f64>,
    /// Bulk weights at `(i-1) + (j-1)*m`.
    bulk: Vec<f64>,
}

impl StationaryGrid {
    /// Builds the grid from explicit boundary and bulk weights (hand
    /// examples, synthetic couplings). `horizontal[i-1]` is the weight at
    /// `(i, 0)`, `vertical[j-1]` at `(0, j)`, bulk layout `(i-1)+(j-1)*m`.
    pub fn from_values(
        z: f64,
        horizontal: Vec<f64>,
        vertical: Vec<f64>,
        bulk: Vec<f64>,
    ) -> Result<Self> {
        let m = horizontal.len();
        let n = vertical.len();
        require_extent(m, n)?;
        if bulk.len() != m * n {
            return Err(Error::Domain(format!(
                "expected {} bulk values for a {m} x {n} grid, got {}",
                m * n,
                bulk.len()
            )));
        }
        Ok(Self::assemble(m, n, z, &horizontal, &vertical, bulk))
    }

    fn assemble(
        m: usize,
        n: usize,
        z: f64,
        horizontal: &[f64],
        vertical: &[f64],
        bulk: Vec<f64>,
    ) -> Self {
        let stride = m + 1;
        let mut g = vec![0.0_f64; stride * (n + 1)];
        for i in 1..=m {
            g[i] = g[i - 1] + horizontal[i - 1];
        }
        for j in 1..=n {
            g[j * stride] = g[(j - 1) * stride] + vertical[j - 1];
        }
        for j in 1..=n {
            for i in 1..=m {
                let left = g[j * stride + i - 1];
                let down = g[(j - 1) * stride + i];
                g[j * stride + i] = left.max(down) + bulk[(j - 1) * m + (i - 1)];
            }
        }
        StationaryGrid { m, n, z, g, bulk }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// `Ĝ(i, j)` for `0 <= i <= m`, `0 <= j <= n`.
    pub fn g_hat(&self, i: usize, j: usize) -> f64 {
        assert!(i <= self.m && j <= self.n, "index ({i}, {j}) out of range");
        self.g[j * (self.m + 1) + i]
    }

    /// Bulk weight at 1-based `(i, j)`.
    pub fn bulk_weight(&self, i: usize, j: usize) -> f64 {
        self.bulk[(j - 1) * self.m + (i - 1)]
    }

    /// Corner value `Ĝ(m, n)`.
    pub fn corner(&self) -> f64 {
        self.g_hat(self.m, self.n)
    }

    /// Horizontal increments `I(i, j) = Ĝ(i, j) - Ĝ(i-1, j)` for
    /// `i = 1..=m` at fixed `j`.
    pub fn increments_along_i(&self, j: usize) -> Vec<f64> {
        (1..=self.m)
            .map(|i| self.g_hat(i, j) - self.g_hat(i - 1, j))
            .collect()
    }

    /// Vertical increments `J(i, j) = Ĝ(i, j) - Ĝ(i, j-1)` for
    /// `j = 1..=n` at fixed `i`.
    pub fn increments_along_j(&self, i: usize) -> Vec<f64> {
        (1..=self.n)
            .map(|j| self.g_hat(i, j) - self.g_hat(i, j - 1))
            .collect()
    }

    /// Last-passage value of the coupled bulk weights over
    /// `[i0..=m] x [j0..=n]` (no boundary weights involved).
    pub fn bulk_lpp_from(&self, i0: usize, j0: usize) -> Result<f64> {
        if i0 == 0 || i0 > self.m || j0 == 0 || j0 > self.n {
            return Err(Error::OutOfRange {
                what: "bulk restart index",
                got: if i0 == 0 || i0 > self.m { i0 } else { j0 },
                limit: if i0 == 0 || i0 > self.m { self.m } else { self.n },
            });
        }
        let w = (self.m - i0 + 1, self.n - j0 + 1);
        let (north, _) = dp_rolling(w.0, w.1, |i, j| self.bulk_weight(i0 + i - 1, j0 + j - 1));
        Ok(north[w.0 - 1])
    }

    /// Digest of the dimensions, tilt, and every passage value.
    pub fn checksum(&self) -> u64 {
        digest_words(
            [self.m as u64, self.n as u64, self.z.to_bits()]
                .into_iter()
                .chain(self.g.iter().map(|v| v.to_bits())),
        )
    }
}

/// Samples the increment-stationary grid at tilt `z`: boundary weights
/// `ŵ(i,0) ~ Exp(a_m(i)+z)` and `ŵ(0,j) ~ Exp(b_n(j)-z)`, bulk weights
/// `Exp(a_m(i)+b_n(j))`, all independent, from three named substreams of
/// the seed.
pub fn stationary_grid(
    pp: &ParamPair,
    m: usize,
    n: usize,
    z: f64,
    seed: u64,
) -> Result<StationaryGrid> {
    require_extent(m, n)?;
    cells_checked(m + 1, n + 1, MAX_FULL_CELLS / 2, "reduce the extent")?;
    let summary = pp.summary(m, n)?;
    let (lo, hi) = summary.interval();
    if !(z > lo && z < hi) {
        return Err(Error::Domain(format!(
            "tilt z = {z} lies outside the admissible interval ({lo}, {hi})"
        )));
    }
    let a_row = pp.a().row(m)?;
    let b_row = pp.b().row(n)?;
    let base = substream(grid_id_for(m, n), STATIONARY_SALT);
    let hs = substream(base, HORIZONTAL_BOUNDARY);
    let vs = substream(base, VERTICAL_BOUNDARY);
    let bs = substream(base, BULK);
    let horizontal: Vec<f64> = (1..=m)
        .map(|i| cell_exponential(seed, hs, i as u64, 0, a_row[i - 1] + z))
        .collect();
    let vertical: Vec<f64> = (1..=n)
        .map(|j| cell_exponential(seed, vs, 0, j as u64, b_row[j - 1] - z))
        .collect();
    let mut bulk = vec![0.0_f64; m * n];
    bulk.par_chunks_mut(m).enumerate().for_each(|(jm1, col)| {
        let bj = b_row[jm1];
        let j = (jm1 + 1) as u64;
        for (im1, slot) in col.iter_mut().enumerate() {
            *slot = cell_exponential(seed, bs, (im1 + 1) as u64, j, a_row[im1] + bj);
        }
    });
    Ok(StationaryGrid::assemble(m, n, z, &horizontal, &vertical, bulk))
}

/// Exit points `(Z_hor, Z_ver)` of the geodesic of `Ĝ(m, n)`: the largest
/// boundary index through which some geodesic leaves the respective axis,
/// or 0 when no geodesic touches that axis beyond the origin. Found by
/// backtracking the stored values twice, once hugging each axis, so ties
/// resolve toward the larger index.
pub fn exit_points(sg: &StationaryGrid, m: usize, n: usize) -> Result<(usize, usize)> {
    if m == 0 || m > sg.m || n == 0 || n > sg.n {
        return Err(Error::OutOfRange {
            what: "exit-point corner",
            got: if m == 0 || m > sg.m { m } else { n },
            limit: if m == 0 || m > sg.m { sg.m } else { sg.n },
        });
    }
    // Bottom-hugging geodesic: prefer the predecessor below on ties, which
    // keeps the column index as large as possible.
    let (mut i, mut j) = (m, n);
    while i > 0 && j > 0 {
        if sg.g_hat(i, j - 1) >= sg.g_hat(i - 1, j) {
            j -= 1;
        } else {
            i -= 1;
        }
    }
    let z_hor = if j == 0 { i } else { 0 };
    // Left-hugging geodesic: the mirror image for the vertical exit.
    let (mut i, mut j) = (m, n);
    while i > 0 && j > 0 {
        if sg.g_hat(i - 1, j) >= sg.g_hat(i, j - 1) {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    let z_ver = if i == 0 { j } else { 0 };
    Ok((z_hor, z_ver))
}

/// Whether cluster cells share one weight family or draw a fresh
/// collection per rectangle extent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyMode {
    /// One weight family for the whole raster: cell `(i, j)` thresholds
    /// the single grid's `G(i, j)`. The growing set is a staircase.
    Shared,
    /// Every cell `(i, j)` evaluates its own rectangle's corner value with
    /// an extent-derived weight collection. Cost grows like the fourth
    /// power of the extent, so the budget is tight.
    PerRectangle,
}

/// Boolean raster `cell(i, j) = [G(i, j) <= t]` over `[1..=m] x [1..=n]`,
/// bit-packed.
pub struct ClusterRaster {
    m: usize,
    n: usize,
    t: f64,
    words: Vec<u64>,
}

impl ClusterRaster {
    fn new_empty(m: usize, n: usize, t: f64) -> Self {
        ClusterRaster {
            m,
            n,
            t,
            words: vec![0u64; (m * n).div_ceil(64)],
        }
    }

    fn set(&mut self, i: usize, j: usize) {
        let k = (j - 1) * self.m + (i - 1);
        self.words[k / 64] |= 1u64 << (k % 64);
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Whether lattice cell `(i, j)` (1-based) is in the cluster.
    pub fn is_set(&self, i: usize, j: usize) -> bool {
        assert!(
            (1..=self.m).contains(&i) && (1..=self.n).contains(&j),
            "cell ({i}, {j}) out of range"
        );
        let k = (j - 1) * self.m + (i - 1);
        self.words[k / 64] & (1u64 << (k % 64)) != 0
    }

    /// Membership of a continuum point `(x, y)`, `x, y >= 0`, under the
    /// closure convention: the responsible cell index is `ceil(x)`, bumped
    /// to 1 on the axis itself. Points beyond the rasterized extent are
    /// reported as outside.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        if !(x >= 0.0) || !(y >= 0.0) {
            return false;
        }
        let i = if x == 0.0 { 1 } else { x.ceil() as usize };
        let j = if y == 0.0 { 1 } else { y.ceil() as usize };
        if i > self.m || j > self.n {
            return false;
        }
        self.is_set(i, j)
    }

    /// Number of cells in the cluster.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Digest of the dimensions, threshold, and packed cells.
    pub fn checksum(&self) -> u64 {
        digest_words(
            [self.m as u64, self.n as u64, self.t.to_bits()]
                .into_iter()
                .chain(self.words.iter().copied()),
        )
    }

    /// Writes the raster as a binary PGM with maxval 1 (pixel value 1 =
    /// in-cluster). Image rows run top to bottom, so row 0 is lattice row
    /// `j = n`; columns follow `i` left to right.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.m * self.n + 32);
        out.extend_from_slice(format!("P5\n{} {}\n1\n", self.m, self.n).as_bytes());
        for j in (1..=self.n).rev() {
            for i in 1..=self.m {
                out.push(self.is_set(i, j) as u8);
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Writes maximal runs of in-cluster cells along each lattice row `j`
    /// as CSV with header `j,i_start,i_end`.
    pub fn write_runlength_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "j,i_start,i_end")?;
        for j in 1..=self.n {
            let mut start = None;
            for i in 1..=self.m {
                match (self.is_set(i, j), start) {
                    (true, None) => start = Some(i),
                    (false, Some(s)) => {
                        writeln!(out, "{j},{s},{}", i - 1)?;
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                writeln!(out, "{j},{s},{}", self.m)?;
            }
        }
        out.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(())
    }
}

/// Rasterizes the growing cluster at time `t` over `[1..=m] x [1..=n]`.
/// Shared mode streams one weight family through a rolling buffer; the
/// per-rectangle mode evaluates each cell's own corner process and is
/// budgeted accordingly.
pub fn cluster(
    pp: &ParamPair,
    m: usize,
    n: usize,
    t: f64,
    seed: u64,
    mode: FamilyMode,
) -> Result<ClusterRaster> {
    require_extent(m, n)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "cluster time must be nonnegative and finite, got {t}"
        )));
    }
    let mut raster = ClusterRaster::new_empty(m, n, t);
    match mode {
        FamilyMode::Shared => {
            cells_checked(m, n, MAX_RASTER_CELLS, "reduce the extent")?;
            let a_row = pp.a().row(m)?;
            let b_row = pp.b().row(n)?;
            let mut cur = vec![0.0_f64; m];
            for j in 1..=n {
                let bj = b_row[j - 1];
                let mut left = 0.0_f64;
                for i in 1..=m {
                    let w = cell_exponential(
                        seed,
                        SHARED_FAMILY_STREAM,
                        i as u64,
                        j as u64,
                        a_row[i - 1] + bj,
                    );
                    let v = left.max(cur[i - 1]) + w;
                    cur[i - 1] = v;
                    left = v;
                    if v <= t {
                        raster.set(i, j);
                    }
                }
            }
        }
        FamilyMode::PerRectangle => {
            cells_checked(
                m,
                n,
                MAX_PER_RECTANGLE_CELLS,
                "per-rectangle mode needs a bounded extent; use shared mode for large rasters",
            )?;
            for j in 1..=n {
                for i in 1..=m {
                    if lpp_point(pp, i, j, seed)? <= t {
                        raster.set(i, j);
                    }
                }
            }
        }
    }
    Ok(raster)
}
