//! Exclusion-process observables read off the passage-time grids.
//!
//! With nonnegative weights the passage times are coordinatewise
//! nondecreasing, so each lattice row defines a height
//! `H(n, t) = max{m : G(m, n) <= t}` (0 if none), each particle sits at
//! `sigma(n, t) = H(n, t) - n + 1`, and the flux through site `m` counts
//! diagonal cells, `F(m, t) = max{j : G(m+j-1, j) <= t}`. Every argmax is
//! certified interior: if a defining scan runs off the sampled grid while
//! the values are still below `t`, the functions report an
//! insufficient-extent error instead of silently truncating.

use crate::error::{Error, Result};
use crate::lpp::{LppGrid, StorageMode};
use crate::params::{FamilyKind, ParamFamily, ParamPair};
use crate::rng::{cell_exponential, substream};

/// Starting width for the self-extending row evaluation.
const INITIAL_TRAJECTORY_WIDTH: usize = 64;
/// Stream label of trajectory weight realizations.
const TRAJECTORY_SALT: u64 = 0x7472_616a;

fn require_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "time must be nonnegative and finite, got {t}"
        )));
    }
    Ok(())
}

/// Largest prefix of a nondecreasing row with values `<= t`.
fn cutoff(row: &[f64], t: f64) -> usize {
    row.partition_point(|&g| g <= t)
}

/// Height of the interface over row `n` at time `t`: the largest `m` with
/// `G(m, n) <= t`, or 0 when even the first cell exceeds `t`. Rolling
/// grids expose only their top row `n = g.n()`.
pub fn height(g: &LppGrid, n: usize, t: f64) -> Result<usize> {
    require_time(t)?;
    if n == 0 || n > g.n() {
        return Err(Error::OutOfRange {
            what: "row index n",
            got: n,
            limit: g.n(),
        });
    }
    let h = match g.mode() {
        StorageMode::Full => {
            // The row is nondecreasing, so binary-search the cutoff.
            let (mut lo, mut hi) = (0usize, g.m());
            while lo < hi {
                let mid = lo + (hi - lo + 1) / 2;
                if g.value(mid, n)? <= t {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            lo
        }
        StorageMode::Rolling => {
            if n != g.n() {
                return Err(Error::Domain(
                    "rolling storage exposes only the top row; use full mode for interior rows"
                        .to_string(),
                ));
            }
            cutoff(&g.north_edge(), t)
        }
    };
    if h == g.m() {
        return Err(Error::InsufficientExtent(format!(
            "row {n} is saturated at time {t}: G({}, {n}) <= t, so the height may exceed the grid",
            g.m()
        )));
    }
    Ok(h)
}

/// Flux through site `m` by time `t`: the largest `j` with
/// `G(m+j-1, j) <= t`, or 0 when the first diagonal cell exceeds `t`.
/// The scan must be stopped by a value exceeding `t` while still inside
/// the grid; otherwise the count is not certified and an
/// insufficient-extent error is returned.
pub fn flux(g: &LppGrid, m: usize, t: f64) -> Result<usize> {
    require_time(t)?;
    if m == 0 {
        return Err(Error::OutOfRange {
            what: "site index m",
            got: 0,
            limit: g.m(),
        });
    }
    let mut j = 1usize;
    loop {
        let i = m + j - 1;
        if i > g.m() || j > g.n() {
            return Err(Error::InsufficientExtent(format!(
                "diagonal through site {m} leaves the {} x {} grid at step {j} with all values <= {t}",
                g.m(),
                g.n()
            )));
        }
        if g.value(i, j)? > t {
            return Ok(j - 1);
        }
        j += 1;
    }
}

/// Snapshot of the exclusion process at one time: heights and particle
/// positions per row, flux per site.
#[derive(Clone, Debug)]
pub struct TasepFrame {
    pub t: f64,
    /// `heights[n-1] = H(n, t)` for `n = 1..=rows`.
    pub heights: Vec<usize>,
    /// `positions[n-1] = H(n, t) - n + 1`, the site of particle `n`.
    pub positions: Vec<i64>,
    /// `flux[m-1] = F(m, t)` for `m = 1..=sites`.
    pub flux: Vec<usize>,
}

/// Evaluates heights for every row, positions, and flux for every column
/// of a fully stored grid at time `t`. Any saturated scan surfaces as an
/// insufficient-extent error.
pub fn frame(g: &LppGrid, t: f64) -> Result<TasepFrame> {
    require_time(t)?;
    let heights: Vec<usize> = (1..=g.n())
        .map(|n| height(g, n, t))
        .collect::<Result<_>>()?;
    let positions: Vec<i64> = heights
        .iter()
        .enumerate()
        .map(|(nm1, &h)| h as i64 - nm1 as i64)
        .collect();
    let flux: Vec<usize> = (1..=g.m()).map(|m| flux(g, m, t)).collect::<Result<_>>()?;
    Ok(TasepFrame {
        t,
        heights,
        positions,
        flux,
    })
}

fn is_row_independent(fam: &ParamFamily) -> bool {
    matches!(
        fam.kind(),
        FamilyKind::RowConstant(_) | FamilyKind::BlockConstant { .. }
    )
}

/// One sampled point of a fixed-row trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub height: usize,
    /// Particle position `height - n + 1`.
    pub position: i64,
}

/// Height and position of the fixed row `n` along a nondecreasing time
/// grid, from a single weight realization. Requires row-independent
/// parameter families so that widening the grid extends the same
/// realization (and so that the particle reading is meaningful). The grid
/// is widened geometrically until the height argmax is interior at the
/// final time; running into the family cap is an insufficient-extent
/// error.
pub fn trajectory(
    pp: &ParamPair,
    n: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<Vec<TrajectoryPoint>> {
    if !is_row_independent(pp.a()) || !is_row_independent(pp.b()) {
        return Err(Error::Domain(
            "trajectories need row-independent parameter families; row-dependent grids have no \
             single particle path"
                .to_string(),
        ));
    }
    if t_grid.is_empty() {
        return Err(Error::Domain("empty time grid".to_string()));
    }
    for pair in t_grid.windows(2) {
        if !(pair[1] >= pair[0]) {
            return Err(Error::Domain(format!(
                "time grid must be nondecreasing, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    require_time(t_grid[0])?;
    require_time(*t_grid.last().unwrap())?;
    let t_max = *t_grid.last().unwrap();
    let b_row = pp.b().row(n)?;
    let cap = pp.a().cap();
    let stream = substream(TRAJECTORY_SALT, n as u64);
    let mut m = INITIAL_TRAJECTORY_WIDTH.min(cap);
    let row = loop {
        let a_row = pp.a().row(m)?;
        // Same rolling recursion as the passage-time engine: cur[i-1]
        // holds G(i, j) while sweeping rows j = 1..=n.
        let mut cur = vec![0.0_f64; m];
        for j in 1..=n {
            let bj = b_row[j - 1];
            let mut left = 0.0_f64;
            for i in 1..=m {
                let w = cell_exponential(seed, stream, i as u64, j as u64, a_row[i - 1] + bj);
                let v = left.max(cur[i - 1]) + w;
                cur[i - 1] = v;
                left = v;
            }
        }
        if cur[m - 1] > t_max {
            break cur;
        }
        if m == cap {
            return Err(Error::InsufficientExtent(format!(
                "row {n} is still saturated at time {t_max} at the family cap {cap}"
            )));
        }
        m = (m * 2).min(cap);
    };
    Ok(t_grid
        .iter()
        .map(|&t| {
            let h = cutoff(&row, t);
            TrajectoryPoint {
                t,
                height: h,
                position: h as i64 - n as i64 + 1,
            }
        })
        .collect())
}
