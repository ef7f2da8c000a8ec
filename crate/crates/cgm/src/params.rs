//! Doubly-indexed rate parameters `a_m(i)` (and symmetrically `b_n(j)`),
//! their running minima, empirical measures, and validation.
//!
//! A family assigns a real `a_m(i)` to every `1 <= i <= m <= cap`. Four
//! constructors cover all experiments: a row-independent sequence, a
//! block-constant sequence, a fully explicit triangular array, and a
//! macroscopic profile `a_m(i) = f(i/m)`.

use crate::error::{Error, Result};
use crate::measures::Measure1D;
use serde::{Deserialize, Serialize};

/// Continuous piecewise-linear function on `[0, 1]`, used by the macroscopic
/// profile family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    /// Breakpoints `(x, f(x))` with strictly increasing x spanning `[0, 1]`.
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 || points[0].0 != 0.0 || points[points.len() - 1].0 != 1.0 {
            return Err(Error::Domain(
                "profile breakpoints must span [0, 1] with at least two points".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::Domain(
                    "profile breakpoints must be strictly increasing".into(),
                ));
            }
        }
        if points.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Domain("profile breakpoints must be finite".into()));
        }
        Ok(PiecewiseLinear { points })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= 0.0 {
            return pts[0].1;
        }
        if x >= 1.0 {
            return pts[pts.len() - 1].1;
        }
        let k = pts.partition_point(|&(px, _)| px <= x);
        let (x0, y0) = pts[k - 1];
        let (x1, y1) = pts[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// The supported family shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `a_m(i) = values[i-1]`, independent of the row index.
    RowConstant(Vec<f64>),
    /// `a_m(i) = base[ceil(i/block)-1]`, independent of the row index.
    BlockConstant { base: Vec<f64>, block: usize },
    /// Explicit rows: `a_m(i) = rows[m-1][i-1]`.
    Triangular(Vec<Vec<f64>>),
    /// `a_m(i) = f(i/m)` for a continuous profile `f` on `[0, 1]`.
    MacroProfile(PiecewiseLinear),
}

/// A validated parameter family, materializable up to `cap`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamFamily {
    kind: FamilyKind,
    cap: usize,
}

impl ParamFamily {
    pub fn new(kind: FamilyKind, cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::OutOfRange {
                what: "cap",
                got: 0,
                limit: usize::MAX,
            });
        }
        match &kind {
            FamilyKind::RowConstant(values) => {
                if values.len() < cap {
                    return Err(Error::OutOfRange {
                        what: "row-constant length",
                        got: values.len(),
                        limit: cap,
                    });
                }
                check_finite(values.iter().copied())?;
            }
            FamilyKind::BlockConstant { base, block } => {
                if *block == 0 {
                    return Err(Error::Domain("block size must be at least 1".into()));
                }
                if base.len().saturating_mul(*block) < cap {
                    return Err(Error::OutOfRange {
                        what: "block-constant coverage",
                        got: base.len().saturating_mul(*block),
                        limit: cap,
                    });
                }
                check_finite(base.iter().copied())?;
            }
            FamilyKind::Triangular(rows) => {
                if rows.len() < cap {
                    return Err(Error::OutOfRange {
                        what: "triangular rows",
                        got: rows.len(),
                        limit: cap,
                    });
                }
                for (m, row) in rows.iter().enumerate().take(cap) {
                    if row.len() < m + 1 {
                        return Err(Error::OutOfRange {
                            what: "triangular row length",
                            got: row.len(),
                            limit: m + 1,
                        });
                    }
                    check_finite(row.iter().copied())?;
                }
            }
            FamilyKind::MacroProfile(_) => {}
        }
        Ok(ParamFamily { kind, cap })
    }

    /// Constant family `a_m(i) = value`.
    pub fn constant(value: f64, cap: usize) -> Result<Self> {
        Self::new(FamilyKind::RowConstant(vec![value; cap]), cap)
    }

    /// Row-independent sequence; `cap` is the sequence length.
    pub fn row_constant(values: Vec<f64>) -> Result<Self> {
        let cap = values.len();
        Self::new(FamilyKind::RowConstant(values), cap)
    }

    /// Constant family with finitely many sites overridden (1-based indices).
    pub fn constant_with_defects(value: f64, cap: usize, defects: &[(usize, f64)]) -> Result<Self> {
        let mut values = vec![value; cap];
        for &(i, v) in defects {
            if i == 0 || i > cap {
                return Err(Error::OutOfRange {
                    what: "defect index",
                    got: i,
                    limit: cap,
                });
            }
            values[i - 1] = v;
        }
        Self::new(FamilyKind::RowConstant(values), cap)
    }

    /// Block-constant family; `cap` defaults to the full covered range.
    pub fn block_constant(base: Vec<f64>, block: usize) -> Result<Self> {
        let cap = base.len().saturating_mul(block);
        Self::new(FamilyKind::BlockConstant { base, block }, cap)
    }

    /// Explicit triangular array built from a closure, for row-dependent
    /// families.
    pub fn triangular_from(cap: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let rows = (1..=cap)
            .map(|m| (1..=m).map(|i| f(m, i)).collect())
            .collect();
        Self::new(FamilyKind::Triangular(rows), cap)
    }

    /// Macroscopic profile family `a_m(i) = f(i/m)`.
    pub fn macro_profile(profile: PiecewiseLinear, cap: usize) -> Result<Self> {
        Self::new(FamilyKind::MacroProfile(profile), cap)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// Whether the family's rows ignore the extent index, i.e.
    /// `a_m(i) = a(i)` for every `m`. Such families admit one shared
    /// weight realization per seed; extent-dependent profiles need each
    /// target rectangle evaluated as its own corner process.
    pub fn extent_independent(&self) -> bool {
        matches!(
            self.kind,
            FamilyKind::RowConstant(_) | FamilyKind::BlockConstant { .. }
        )
    }

    /// `a_m(i)`.
    pub fn value(&self, m: usize, i: usize) -> Result<f64> {
        if m == 0 || m > self.cap {
            return Err(Error::OutOfRange {
                what: "row index m",
                got: m,
                limit: self.cap,
            });
        }
        if i == 0 || i > m {
            return Err(Error::OutOfRange {
                what: "index i",
                got: i,
                limit: m,
            });
        }
        Ok(self.value_unchecked(m, i))
    }

    #[inline]
    fn value_unchecked(&self, m: usize, i: usize) -> f64 {
        match &self.kind {
            FamilyKind::RowConstant(values) => values[i - 1],
            FamilyKind::BlockConstant { base, block } => base[(i - 1) / block],
            FamilyKind::Triangular(rows) => rows[m - 1][i - 1],
            FamilyKind::MacroProfile(f) => f.eval(i as f64 / m as f64),
        }
    }

    /// The row of values `a_m(1..=m)`.
    pub fn row(&self, m: usize) -> Result<Vec<f64>> {
        self.value(m, 1)?;
        Ok((1..=m).map(|i| self.value_unchecked(m, i)).collect())
    }

    /// `min_{i <= m} a_m(i)`.
    pub fn row_min(&self, m: usize) -> Result<f64> {
        self.value(m, 1)?;
        Ok((1..=m)
            .map(|i| self.value_unchecked(m, i))
            .fold(f64::INFINITY, f64::min))
    }

    /// `sup_{m <= cap} min_{i <= m} a_m(i)` and whether the value is exact
    /// for the untruncated family. Row-independent kinds have nonincreasing
    /// row minima, so their supremum is attained at the first row and is
    /// exact; row-dependent kinds are only certified up to `cap`.
    pub fn sup_row_min(&self) -> (f64, bool) {
        match &self.kind {
            FamilyKind::RowConstant(_) | FamilyKind::BlockConstant { .. } => {
                (self.value_unchecked(1, 1), true)
            }
            FamilyKind::Triangular(_) | FamilyKind::MacroProfile(_) => {
                let sup = (1..=self.cap)
                    .map(|m| self.row_min(m).expect("m <= cap"))
                    .fold(f64::NEG_INFINITY, f64::max);
                (sup, false)
            }
        }
    }

    /// Globally smallest entry with its earliest witness `(value, m, i)`.
    fn worst_entry(&self) -> (f64, usize, usize) {
        match &self.kind {
            FamilyKind::RowConstant(_) | FamilyKind::BlockConstant { .. } => {
                let mut best = (f64::INFINITY, 1, 1);
                for i in 1..=self.cap {
                    let v = self.value_unchecked(i, i);
                    if v < best.0 {
                        best = (v, i, i);
                    }
                }
                best
            }
            FamilyKind::Triangular(_) | FamilyKind::MacroProfile(_) => {
                let mut best = (f64::INFINITY, 1, 1);
                for m in 1..=self.cap {
                    for i in 1..=m {
                        let v = self.value_unchecked(m, i);
                        if v < best.0 {
                            best = (v, m, i);
                        }
                    }
                }
                best
            }
        }
    }

    /// Empirical measure `(1/m) Σ_{i<=m} δ_{a_m(i)}`; equal values merge into
    /// one atom with an exact rational mass `count/m`.
    pub fn empirical_measure(&self, m: usize) -> Result<Measure1D> {
        let mut row = self.row(m)?;
        row.sort_by(f64::total_cmp);
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut k = 0;
        while k < row.len() {
            let mut count = 1usize;
            while k + count < row.len() && row[k + count] == row[k] {
                count += 1;
            }
            atoms.push((row[k], count as f64 / m as f64));
            k += count;
        }
        Measure1D::new(atoms, Vec::new())
    }
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<()> {
    for v in values {
        if !v.is_finite() {
            return Err(Error::Domain(format!("parameter value {v} is not finite")));
        }
    }
    Ok(())
}

/// A validated pair of families with the joint positivity condition
/// `a_m(i) + b_n(j) > 0` certified for all indices up to the caps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamPair {
    a: ParamFamily,
    b: ParamFamily,
}

impl ParamPair {
    pub fn new(a: ParamFamily, b: ParamFamily) -> Result<Self> {
        let (wa, m, i) = a.worst_entry();
        let (wb, n, j) = b.worst_entry();
        if !(wa + wb > 0.0) {
            return Err(Error::InvalidParameters {
                m,
                n,
                i,
                j,
                sum: wa + wb,
            });
        }
        Ok(ParamPair { a, b })
    }

    pub fn a(&self) -> &ParamFamily {
        &self.a
    }

    pub fn b(&self) -> &ParamFamily {
        &self.b
    }

    /// The rate of the cell `(i, j)` in the `(m, n)` weight collection.
    pub fn rate(&self, m: usize, n: usize, i: usize, j: usize) -> Result<f64> {
        Ok(self.a.value(m, i)? + self.b.value(n, j)?)
    }

    /// Summary quantities at the grid size `(m, n)`.
    pub fn summary(&self, m: usize, n: usize) -> Result<ParamSummary> {
        let min_a = self.a.row_min(m)?;
        let min_b = self.b.row_min(n)?;
        let (sup_min_a, sup_min_a_exact) = self.a.sup_row_min();
        let (sup_min_b, sup_min_b_exact) = self.b.sup_row_min();
        Ok(ParamSummary {
            m,
            n,
            min_a,
            min_b,
            sup_min_a,
            sup_min_b,
            sup_min_a_exact,
            sup_min_b_exact,
        })
    }
}

/// Row minima and derived interval data for one grid size, plus the
/// per-family suprema of row minima over all materialized rows.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ParamSummary {
    pub m: usize,
    pub n: usize,
    /// `min_{i<=m} a_m(i)`.
    pub min_a: f64,
    /// `min_{j<=n} b_n(j)`.
    pub min_b: f64,
    /// `sup_{m<=cap} min a_m`; exact when the flag below is set.
    pub sup_min_a: f64,
    pub sup_min_b: f64,
    /// Whether the supremum is certified for the untruncated family.
    pub sup_min_a_exact: bool,
    pub sup_min_b_exact: bool,
}

impl ParamSummary {
    /// The open interval `I(m,n) = (-min a_m, min b_n)`.
    pub fn interval(&self) -> (f64, f64) {
        (-self.min_a, self.min_b)
    }

    /// `|I(m,n)| = min a_m + min b_n`.
    pub fn width(&self) -> f64 {
        self.min_a + self.min_b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1b_a(cap: usize) -> ParamFamily {
        ParamFamily::constant_with_defects(0.5, cap, &[(100, 0.0)]).unwrap()
    }

    #[test]
    fn row_constant_value_is_row_independent() {
        let fam = ParamFamily::constant(0.5, 10).unwrap();
        assert_eq!(fam.value(3, 2).unwrap(), 0.5);
        assert_eq!(fam.value(10, 2).unwrap(), 0.5);
        assert!(fam.value(11, 1).is_err());
        assert!(fam.value(3, 4).is_err());
        assert!(fam.value(3, 0).is_err());
    }

    #[test]
    fn block_constant_squares() {
        // base k^2 with block 2: value(4, 3) = ceil(3/2)^2 = 4.
        let fam = ParamFamily::block_constant(vec![1.0, 4.0, 9.0, 16.0], 2).unwrap();
        assert_eq!(fam.cap(), 8);
        assert_eq!(fam.value(4, 3).unwrap(), 4.0);
        assert_eq!(fam.value(8, 8).unwrap(), 16.0);
        let mu = fam.empirical_measure(4).unwrap();
        assert_eq!(mu.atoms(), &[(1.0, 0.5), (4.0, 0.5)]);
    }

    #[test]
    fn defect_family_matches_hand_values() {
        let fam = fig1b_a(200);
        assert_eq!(fam.value(200, 100).unwrap(), 0.0);
        assert_eq!(fam.value(200, 99).unwrap(), 0.5);
        assert_eq!(fam.row_min(200).unwrap(), 0.0);
        assert_eq!(fam.row_min(99).unwrap(), 0.5);
        let (sup, exact) = fam.sup_row_min();
        assert_eq!(sup, 0.5);
        assert!(exact);
    }

    #[test]
    fn empirical_measure_counts_defects() {
        let mu = fig1b_a(200).empirical_measure(200).unwrap();
        assert_eq!(mu.atoms().len(), 2);
        assert_eq!(mu.atoms()[0].0, 0.0);
        assert_relative_eq!(mu.atoms()[0].1, 1.0 / 200.0);
        assert_relative_eq!(mu.atoms()[1].1, 199.0 / 200.0);
        assert!((mu.total_mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn empirical_measure_mass_is_exact_at_scale() {
        let fam = ParamFamily::macro_profile(
            PiecewiseLinear::new(vec![(0.0, 1.0), (0.5, 2.0), (1.0, 0.5)]).unwrap(),
            10_000,
        )
        .unwrap();
        let mu = fam.empirical_measure(10_000).unwrap();
        assert!((mu.total_mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn row_constant_empirical_measures_share_prefix_atoms() {
        let fam = ParamFamily::row_constant(vec![0.5, 0.7, 0.5, 0.9, 0.5]).unwrap();
        let m3 = fam.empirical_measure(3).unwrap();
        let m5 = fam.empirical_measure(5).unwrap();
        // Prefix atoms persist; masses rescale by the row length.
        assert_eq!(m3.atoms().iter().map(|a| a.0).collect::<Vec<_>>(), vec![0.5, 0.7]);
        assert!(m5.atoms().iter().any(|&(loc, mass)| loc == 0.7 && (mass - 0.2).abs() < 1e-15));
    }

    #[test]
    fn macro_profile_evaluates_by_interpolation() {
        let f = PiecewiseLinear::new(vec![(0.0, 1.0), (1.0, 3.0)]).unwrap();
        let fam = ParamFamily::macro_profile(f, 100).unwrap();
        // a_m(i) = 1 + 2 i/m.
        assert_relative_eq!(fam.value(10, 5).unwrap(), 2.0);
        assert_relative_eq!(fam.value(100, 25).unwrap(), 1.5);
        let (sup, exact) = fam.sup_row_min();
        // Row minimum is at i = 1: 1 + 2/m, maximized at m = 1.
        assert_relative_eq!(sup, 3.0);
        assert!(!exact);
    }

    #[test]
    fn pair_positivity_violation_names_witness() {
        let a = ParamFamily::constant_with_defects(0.5, 10, &[(4, -0.6)]).unwrap();
        let b = ParamFamily::constant(0.5, 10).unwrap();
        match ParamPair::new(a, b) {
            Err(Error::InvalidParameters { m, n, i, j, sum }) => {
                assert_eq!((m, n, i, j), (4, 1, 4, 1));
                assert!(sum <= 0.0);
            }
            other => panic!("expected invalid parameters, got {other:?}"),
        }
    }

    #[test]
    fn pair_summary_interval() {
        let a = ParamFamily::constant(0.5, 5).unwrap();
        let b = ParamFamily::constant(0.5, 5).unwrap();
        let pp = ParamPair::new(a, b).unwrap();
        let s = pp.summary(5, 5).unwrap();
        assert_eq!(s.interval(), (-0.5, 0.5));
        assert_eq!(s.width(), 1.0);
        assert_eq!(s.sup_min_a, 0.5);
        assert_eq!(s.sup_min_b, 0.5);
    }

    #[test]
    fn asymmetric_interval_from_defect() {
        // a has a dip to -0.2; I = (0.2, 0.5).
        let a = ParamFamily::constant_with_defects(0.5, 10, &[(1, -0.2)]).unwrap();
        let b = ParamFamily::constant(0.5, 10).unwrap();
        let pp = ParamPair::new(a, b).unwrap();
        let s = pp.summary(10, 10).unwrap();
        assert_eq!(s.interval(), (0.2, 0.5));
        assert_relative_eq!(s.width(), 0.3);
    }

    #[test]
    fn grid_minimum_separates_into_row_minima() {
        let a = ParamFamily::row_constant(vec![0.9, 0.3, 0.7]).unwrap();
        let b = ParamFamily::row_constant(vec![0.4, 0.8, -0.1]).unwrap();
        let pp = ParamPair::new(a, b).unwrap();
        for m in 1..=3 {
            for n in 1..=3 {
                let mut grid_min = f64::INFINITY;
                for i in 1..=m {
                    for j in 1..=n {
                        grid_min = grid_min.min(pp.rate(m, n, i, j).unwrap());
                    }
                }
                let s = pp.summary(m, n).unwrap();
                assert_relative_eq!(grid_min, s.width());
                assert!(s.width() > 0.0);
            }
        }
    }
}
