//! Limit-shape analytics for the inhomogeneous corner growth model.
//!
//! The central object is the shape function `γ(x, y)`, computed as the
//! infimum over a tilt parameter `z` of `x·A(z) + y·B(z)` where `A` and `B`
//! are the Cauchy transforms of the limiting parameter measures. The argmin
//! follows a three-case rule: it clips to an interval endpoint when a
//! second-moment inequality holds there, and otherwise solves a strictly
//! decreasing balance equation in the interior. On top of `γ` this module
//! derives the region boundary (a curved arc parametrized by the tilt, plus
//! possible flat segments and axis spikes), membership tests for the limit
//! shape including its axis segments, spike/crevice features induced by
//! finite-size row minima, and the limiting height and flux profiles of the
//! associated particle system.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::TransformPair;
use crate::numeric::{bisect_decreasing, golden_section_min};
use crate::params::ParamPair;

/// Relative residual allowed for the interior argmin balance equation.
pub const ARGMIN_RESIDUAL_REL_TOL: f64 = 1e-10;
/// Initial bracket inset from the interval endpoints, relative to width.
const BRACKET_INSET_REL: f64 = 1e-12;
/// Bisection terminates at this bracket width relative to interval width.
const BISECT_WIDTH_REL: f64 = 1e-14;
/// Guarded Newton refinement steps after bisection. Near-endpoint roots
/// start with a residual dominated by the huge local slope; a few quadratic
/// steps push it below the relative tolerance.
const NEWTON_MAX_STEPS: usize = 8;
/// Inset used to sample the boundary curve next to an endpoint whose
/// derivative integrals diverge (the curve is only approached in the limit).
const EDGE_SAMPLE_INSET_REL: f64 = 1e-9;
/// Grid size of the coarse scan that brackets the height/flux maximizer.
const SUP_SCAN_POINTS: usize = 512;
/// Golden-section termination width for the height/flux maximizer,
/// relative to the tilt interval width.
const SUP_GOLDEN_WIDTH_REL: f64 = 1e-12;

/// Limiting description of a parameter family pair: the transform data
/// (measures and interval bounds) plus the suprema of the running row
/// minima, which control the axis segments of the limit shape.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub tp: TransformPair,
    /// Supremum over `m` of the row minima of the `a`-family; at least
    /// `tp.min_a`.
    pub sup_min_a: f64,
    /// Supremum over `n` of the row minima of the `b`-family; at least
    /// `tp.min_b`.
    pub sup_min_b: f64,
}

impl ShapeSpec {
    pub fn new(tp: TransformPair, sup_min_a: f64, sup_min_b: f64) -> Result<Self> {
        if !(sup_min_a >= tp.min_a) || !(sup_min_b >= tp.min_b) {
            return Err(Error::Domain(format!(
                "running-minimum suprema must dominate the limiting minima: \
                 got {sup_min_a} vs {} and {sup_min_b} vs {}",
                tp.min_a, tp.min_b
            )));
        }
        Ok(ShapeSpec {
            tp,
            sup_min_a,
            sup_min_b,
        })
    }

    /// Finite-size spec built from the empirical measures and row minima of
    /// a parameter pair at extent `(m, n)`. For families whose empirical
    /// measures already equal their limits, shape quantities computed from
    /// this spec agree exactly with finite-size centering quantities.
    pub fn from_params(pp: &ParamPair, m: usize, n: usize) -> Result<Self> {
        let alpha = pp.a().empirical_measure(m)?;
        let beta = pp.b().empirical_measure(n)?;
        let min_a = pp.a().row_min(m)?;
        let min_b = pp.b().row_min(n)?;
        let tp = TransformPair::new(alpha, beta, min_a, min_b)?;
        let sup_min_a = pp.a().sup_row_min().0.max(min_a);
        let sup_min_b = pp.b().sup_row_min().0.max(min_b);
        ShapeSpec::new(tp, sup_min_a, sup_min_b)
    }

    /// Tilt interval `(-min_a, min_b)`.
    pub fn interval(&self) -> (f64, f64) {
        (-self.tp.min_a, self.tp.min_b)
    }

    /// True when the shape function is identically zero: an infinite
    /// interval endpoint or two zero measures.
    fn gamma_vanishes(&self) -> bool {
        self.tp.min_a.is_infinite()
            || self.tp.min_b.is_infinite()
            || (self.tp.alpha.is_zero() && self.tp.beta.is_zero())
    }
}

/// Which of the three argmin cases applies at a direction `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionClass {
    /// Argmin clips to `-min_a`; the boundary is flat toward the y-axis.
    FlatV,
    /// Argmin clips to `min_b`; the boundary is flat toward the x-axis.
    FlatH,
    /// Interior argmin; the boundary is strictly curved here.
    Curved,
}

/// `∫ α(da)/(a+z)²` as an extended real (`+∞` when the edge integral
/// diverges); `0` for the zero measure.
fn second_moment_a(tp: &TransformPair, z: f64) -> Result<f64> {
    if tp.alpha.is_zero() {
        return Ok(0.0);
    }
    Ok(-tp.a_deriv(z, 1)?)
}

/// `∫ β(db)/(b-z)²` as an extended real.
fn second_moment_b(tp: &TransformPair, z: f64) -> Result<f64> {
    if tp.beta.is_zero() {
        return Ok(0.0);
    }
    Ok(tp.b_deriv(z, 1)?)
}

fn require_positive(v: f64, what: &'static str) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!(
            "{what} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

/// Case selection shared by `gamma`, `gamma_argmin`, and
/// `classify_region`. Assumes both measures are nonzero (hence a finite
/// tilt interval).
fn classify_nonzero(spec: &ShapeSpec, x: f64, y: f64) -> Result<RegionClass> {
    let tp = &spec.tp;
    let (lo, hi) = spec.interval();
    // The weighted second moments decide the clipping: products with an
    // infinite edge integral compare correctly in extended-real arithmetic.
    if x * second_moment_a(tp, lo)? <= y * second_moment_b(tp, lo)? {
        return Ok(RegionClass::FlatV);
    }
    if x * second_moment_a(tp, hi)? >= y * second_moment_b(tp, hi)? {
        return Ok(RegionClass::FlatH);
    }
    Ok(RegionClass::Curved)
}

/// Interior root of `g(z) = x·∫α/(a+z)² − y·∫β/(b−z)²`, which is strictly
/// decreasing with a sign change inside `(lo, hi)` once both clip tests
/// have failed. Bisection brackets the root; a guarded Newton loop then
/// drives the relative residual below [`ARGMIN_RESIDUAL_REL_TOL`].
fn interior_argmin(spec: &ShapeSpec, x: f64, y: f64) -> Result<f64> {
    let tp = &spec.tp;
    let (lo, hi) = spec.interval();
    let width = hi - lo;
    // Interior evaluations cannot leave the transform domain: the gap to
    // the support stays at least the distance to the interval end.
    let g = |z: f64| -> f64 {
        let a2 = second_moment_a(tp, z).expect("interior second moment");
        let b2 = second_moment_b(tp, z).expect("interior second moment");
        x * a2 - y * b2
    };

    // The sign is guaranteed strictly inside, but the crossing may hug an
    // endpoint; shrink the inset geometrically until the bracket sees it.
    let mut lo_br = lo + width * BRACKET_INSET_REL;
    let mut guard = 0;
    while g(lo_br) <= 0.0 {
        let inset = (lo_br - lo) / 8.0;
        if inset == 0.0 || guard > 200 {
            return Ok(lo);
        }
        lo_br = lo + inset;
        guard += 1;
    }
    let mut hi_br = hi - width * BRACKET_INSET_REL;
    guard = 0;
    while g(hi_br) >= 0.0 {
        let inset = (hi - hi_br) / 8.0;
        if inset == 0.0 || guard > 200 {
            return Ok(hi);
        }
        hi_br = hi - inset;
        guard += 1;
    }

    let mut root = bisect_decreasing(g, lo_br, hi_br, width * BISECT_WIDTH_REL);
    let mut best_abs = g(root).abs();
    for _ in 0..NEWTON_MAX_STEPS {
        if best_abs == 0.0 {
            break;
        }
        let slope = -(x * tp.a_deriv(root, 2)? + y * tp.b_deriv(root, 2)?);
        if !slope.is_finite() || !(slope < 0.0) {
            break;
        }
        let next = root - g(root) / slope;
        if !(next > lo && next < hi) {
            break;
        }
        let next_abs = g(next).abs();
        if next_abs < best_abs {
            root = next;
            best_abs = next_abs;
        } else {
            break;
        }
    }

    let scale = (x * second_moment_a(tp, root)?).max(y * second_moment_b(tp, root)?);
    if !(best_abs <= ARGMIN_RESIDUAL_REL_TOL * scale) {
        return Err(Error::Numerical(format!(
            "argmin residual {best_abs:e} exceeds {ARGMIN_RESIDUAL_REL_TOL:e} \
             relative at z = {root}"
        )));
    }
    Ok(root)
}

fn argmin_nonzero(spec: &ShapeSpec, x: f64, y: f64) -> Result<f64> {
    match classify_nonzero(spec, x, y)? {
        RegionClass::FlatV => Ok(spec.interval().0),
        RegionClass::FlatH => Ok(spec.interval().1),
        RegionClass::Curved => interior_argmin(spec, x, y),
    }
}

/// Shape function `γ(x, y) = inf_z [x·A(z) + y·B(z)]` over the tilt
/// interval, with degenerate sides evaluated in closed form: the infimum
/// is `x·A(min_b)` when `β = 0`, `y·B(-min_a)` when `α = 0`, and `0` when
/// an interval endpoint is infinite or both measures vanish.
pub fn gamma(spec: &ShapeSpec, x: f64, y: f64) -> Result<f64> {
    require_positive(x, "x")?;
    require_positive(y, "y")?;
    let tp = &spec.tp;
    if spec.gamma_vanishes() {
        return Ok(0.0);
    }
    if tp.beta.is_zero() {
        return Ok(x * tp.a(tp.min_b)?);
    }
    if tp.alpha.is_zero() {
        return Ok(y * tp.b(-tp.min_a)?);
    }
    let z = argmin_nonzero(spec, x, y)?;
    Ok(x * tp.a(z)? + y * tp.b(z)?)
}

/// The minimizing tilt `ζ(x, y)` of the shape-function infimum, as an
/// extended real in `[-min_a, min_b]`. Degenerate sides report the
/// endpoint the infimum clips to: `min_b` when `β = 0`, `-min_a` when
/// `α = 0` (also used when both vanish, where the objective is flat).
pub fn gamma_argmin(spec: &ShapeSpec, x: f64, y: f64) -> Result<f64> {
    require_positive(x, "x")?;
    require_positive(y, "y")?;
    let tp = &spec.tp;
    if tp.alpha.is_zero() {
        return Ok(-tp.min_a);
    }
    if tp.beta.is_zero() {
        return Ok(tp.min_b);
    }
    argmin_nonzero(spec, x, y)
}

/// Which argmin case the direction `(x, y)` falls in. Both measures must
/// be nonzero for the classification to be meaningful.
pub fn classify_region(spec: &ShapeSpec, x: f64, y: f64) -> Result<RegionClass> {
    require_positive(x, "x")?;
    require_positive(y, "y")?;
    if spec.tp.alpha.is_zero() || spec.tp.beta.is_zero() {
        return Err(Error::Domain(
            "region classification needs nonzero measures on both sides".to_string(),
        ));
    }
    classify_nonzero(spec, x, y)
}

/// Point of the unit-level boundary whose supporting line has tilt `z`:
/// `Φ(z) = (∂B, -∂A) / (A·∂B - B·∂A)`. Defined for interior tilts, and at
/// an endpoint exactly when the derivative integrals converge there.
pub fn curve_point(spec: &ShapeSpec, z: f64) -> Result<(f64, f64)> {
    let tp = &spec.tp;
    let av = tp.a(z)?;
    let bv = tp.b(z)?;
    let da = tp.a_deriv(z, 1)?;
    let db = tp.b_deriv(z, 1)?;
    if !(av.is_finite() && bv.is_finite() && da.is_finite() && db.is_finite()) {
        return Err(Error::Domain(format!(
            "boundary parametrization needs convergent transforms at z = {z}"
        )));
    }
    let den = av * db - bv * da;
    Ok((db / den, -da / den))
}

/// Closed segment between two points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub from: (f64, f64),
    pub to: (f64, f64),
}

/// Boundary decomposition of the limit shape in the open quadrant plus its
/// axis features. `curved` runs from the x-axis side toward the y-axis
/// side. A `None` flat means the corresponding derivative integral
/// diverges and the curve reaches the axis intercept in the limit; a
/// `None` spike means the running-minimum supremum equals the limiting
/// minimum on that side.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryGeometry {
    pub curved: Vec<(f64, f64)>,
    pub flat_v: Option<Segment>,
    pub flat_h: Option<Segment>,
    pub spike_v: Option<Segment>,
    pub spike_h: Option<Segment>,
    /// Set when a side is degenerate (zero measure or infinite bound): the
    /// region is then a half-line product without a curved boundary, and
    /// membership queries plus truncation describe it instead.
    pub degenerate: bool,
}

impl BoundaryGeometry {
    fn empty(degenerate: bool) -> Self {
        BoundaryGeometry {
            curved: Vec::new(),
            flat_v: None,
            flat_h: None,
            spike_v: None,
            spike_h: None,
            degenerate,
        }
    }
}

/// Samples the boundary of the limit shape: the curved arc `Φ(z)` on a
/// cosine-spaced tilt grid (denser near the ends), flat segments joining
/// the arc to the axis intercepts when the edge second moments converge,
/// and axis spikes when the running-minimum suprema exceed the limiting
/// minima. Every emitted curved point lies on the unit level set of the
/// shape function.
pub fn boundary(spec: &ShapeSpec, samples: usize) -> Result<BoundaryGeometry> {
    if samples < 2 {
        return Err(Error::Domain(format!(
            "boundary sampling needs at least 2 points, got {samples}"
        )));
    }
    let tp = &spec.tp;
    if tp.alpha.is_zero() || tp.beta.is_zero() || spec.gamma_vanishes() {
        return Ok(BoundaryGeometry::empty(true));
    }
    let (lo, hi) = spec.interval();
    let width = hi - lo;
    let a2_lo = second_moment_a(tp, lo)?;
    let b2_hi = second_moment_b(tp, hi)?;
    // Endpoints enter the grid exactly when the curve extends to them;
    // otherwise the grid stops a hair short of the divergence.
    let z_left = if a2_lo.is_finite() {
        lo
    } else {
        lo + width * EDGE_SAMPLE_INSET_REL
    };
    let z_right = if b2_hi.is_finite() {
        hi
    } else {
        hi - width * EDGE_SAMPLE_INSET_REL
    };
    let mid = 0.5 * (z_left + z_right);
    let rad = 0.5 * (z_right - z_left);
    let mut curved = Vec::with_capacity(samples);
    for k in 0..samples {
        let theta = PI * k as f64 / (samples - 1) as f64;
        curved.push(curve_point(spec, mid + rad * theta.cos())?);
    }

    let y_intercept = 1.0 / tp.b(lo)?;
    let flat_v = if a2_lo.is_finite() {
        Some(Segment {
            from: (0.0, y_intercept),
            to: curve_point(spec, lo)?,
        })
    } else {
        None
    };
    let x_intercept = 1.0 / tp.a(hi)?;
    let flat_h = if b2_hi.is_finite() {
        Some(Segment {
            from: (x_intercept, 0.0),
            to: curve_point(spec, hi)?,
        })
    } else {
        None
    };
    let spike_v = if spec.sup_min_a > tp.min_a {
        let rate = if spec.sup_min_a.is_infinite() {
            0.0
        } else {
            tp.b(-spec.sup_min_a)?
        };
        let top = if rate == 0.0 { f64::INFINITY } else { 1.0 / rate };
        Some(Segment {
            from: (0.0, y_intercept),
            to: (0.0, top),
        })
    } else {
        None
    };
    let spike_h = if spec.sup_min_b > tp.min_b {
        let rate = if spec.sup_min_b.is_infinite() {
            0.0
        } else {
            tp.a(spec.sup_min_b)?
        };
        let tip = if rate == 0.0 { f64::INFINITY } else { 1.0 / rate };
        Some(Segment {
            from: (x_intercept, 0.0),
            to: (tip, 0.0),
        })
    } else {
        None
    };
    Ok(BoundaryGeometry {
        curved,
        flat_v,
        flat_h,
        spike_v,
        spike_h,
        degenerate: false,
    })
}

/// Growth rate bounding the x-axis segment of the limit shape:
/// `A(sup_min_b)`, or `0` when the side is degenerate.
fn axis_rate_x(spec: &ShapeSpec) -> Result<f64> {
    if spec.tp.alpha.is_zero() || spec.sup_min_b.is_infinite() {
        return Ok(0.0);
    }
    spec.tp.a(spec.sup_min_b)
}

/// Mirror of [`axis_rate_x`] for the y-axis: `B(-sup_min_a)`.
fn axis_rate_y(spec: &ShapeSpec) -> Result<f64> {
    if spec.tp.beta.is_zero() || spec.sup_min_a.is_infinite() {
        return Ok(0.0);
    }
    spec.tp.b(-spec.sup_min_a)
}

/// Membership in the limit shape: `γ(x, y) ≤ 1` in the open quadrant, and
/// on each axis a segment governed by the running-minimum suprema
/// (`x·A(sup_min_b) ≤ 1` on the x-axis, `y·B(-sup_min_a) ≤ 1` on the
/// y-axis). Points with a negative coordinate are outside.
pub fn in_limit_shape(spec: &ShapeSpec, x: f64, y: f64) -> Result<bool> {
    if !(x >= 0.0) || !(y >= 0.0) {
        return Ok(false);
    }
    if x == 0.0 && y == 0.0 {
        return Ok(true);
    }
    if y == 0.0 {
        return Ok(x * axis_rate_x(spec)? <= 1.0);
    }
    if x == 0.0 {
        return Ok(y * axis_rate_y(spec)? <= 1.0);
    }
    Ok(gamma(spec, x, y)? <= 1.0)
}

/// Side caps of the truncation square applied before rasterizing a limit
/// shape: a direction is capped at `c` exactly when the region is
/// unbounded that way (zero measure on the matching side or an infinite
/// interval endpoint), and unconstrained otherwise.
pub fn truncation_bounds(spec: &ShapeSpec, c: f64) -> (f64, f64) {
    let x_cap = if spec.tp.alpha.is_zero() || spec.tp.min_b.is_infinite() {
        c
    } else {
        f64::INFINITY
    };
    let y_cap = if spec.tp.beta.is_zero() || spec.tp.min_a.is_infinite() {
        c
    } else {
        f64::INFINITY
    };
    (x_cap, y_cap)
}

/// Axis selector for finite-size axis features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Vertical,
    Horizontal,
}

/// Feature a finite-size row minimum carves on an axis, as a coordinate
/// range along that axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AxisFeature {
    /// The finite-size segment extends beyond the limiting intercept.
    Spike { lo: f64, hi: f64 },
    /// The finite-size segment stops short of the limiting intercept.
    Crevice { lo: f64, hi: f64 },
    /// The finite-size segment ends exactly at the limiting intercept.
    Flush,
}

/// Axis feature induced by a finite-size row minimum `finite_min`
/// (vertical: minimum of an `a`-row, compared against `min_a`; horizontal:
/// minimum of a `b`-row against `min_b`). A larger finite minimum pushes
/// the axis intercept outward (spike), a smaller one pulls it inward
/// (crevice).
pub fn spike_crevice_segment(
    spec: &ShapeSpec,
    finite_min: f64,
    axis: Axis,
) -> Result<AxisFeature> {
    let tp = &spec.tp;
    match axis {
        Axis::Vertical => {
            if tp.beta.is_zero() || !tp.min_a.is_finite() {
                return Err(Error::Domain(
                    "vertical axis feature needs a nonzero b-side measure and a finite a-minimum"
                        .to_string(),
                ));
            }
            if !(finite_min + tp.min_b > 0.0) {
                return Err(Error::Domain(format!(
                    "finite minimum {finite_min} is inadmissible against min_b = {}",
                    tp.min_b
                )));
            }
            let limit = 1.0 / tp.b(-tp.min_a)?;
            let finite = 1.0 / tp.b(-finite_min)?;
            Ok(if finite_min > tp.min_a {
                AxisFeature::Spike {
                    lo: limit,
                    hi: finite,
                }
            } else if finite_min < tp.min_a {
                AxisFeature::Crevice {
                    lo: finite,
                    hi: limit,
                }
            } else {
                AxisFeature::Flush
            })
        }
        Axis::Horizontal => {
            if tp.alpha.is_zero() || !tp.min_b.is_finite() {
                return Err(Error::Domain(
                    "horizontal axis feature needs a nonzero a-side measure and a finite b-minimum"
                        .to_string(),
                ));
            }
            if !(finite_min + tp.min_a > 0.0) {
                return Err(Error::Domain(format!(
                    "finite minimum {finite_min} is inadmissible against min_a = {}",
                    tp.min_a
                )));
            }
            let limit = 1.0 / tp.a(tp.min_b)?;
            let finite = 1.0 / tp.a(finite_min)?;
            Ok(if finite_min > tp.min_b {
                AxisFeature::Spike {
                    lo: limit,
                    hi: finite,
                }
            } else if finite_min < tp.min_b {
                AxisFeature::Crevice {
                    lo: finite,
                    hi: limit,
                }
            } else {
                AxisFeature::Flush
            })
        }
    }
}

/// Which objective the tilt supremum maximizes.
enum SupKind {
    /// `(t - c·B(z)) / A(z)`: limiting height profile.
    Height,
    /// `(t - c·A(z)) / (A(z) + B(z))`: limiting flux profile.
    Flux,
}

/// Maximizes the height/flux objective over the open tilt interval by a
/// coarse scan, a golden-section refinement around the best bracket, and
/// extended-real evaluations at the two endpoints; the result is clamped
/// at zero.
fn sup_over_tilt(spec: &ShapeSpec, coeff: f64, t: f64, kind: SupKind) -> Result<f64> {
    if spec.tp.alpha.is_zero() || spec.tp.beta.is_zero() {
        return Err(Error::Domain(
            "height/flux limits need nonzero measures on both sides".to_string(),
        ));
    }
    if !(coeff >= 0.0) || !coeff.is_finite() || !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "height/flux limits need nonnegative finite arguments, got ({coeff}, {t})"
        )));
    }
    let tp = &spec.tp;
    let (lo, hi) = spec.interval();
    let width = hi - lo;

    let objective = |av: f64, bv: f64| -> f64 {
        let (num, den) = match kind {
            // Skip the product when the coefficient vanishes so a divergent
            // transform cannot poison the numerator with 0·∞.
            SupKind::Height => (if coeff == 0.0 { t } else { t - coeff * bv }, av),
            SupKind::Flux => (if coeff == 0.0 { t } else { t - coeff * av }, av + bv),
        };
        let v = num / den;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    // Interior tilts keep both transforms finite and positive.
    let eval = |z: f64| -> f64 {
        let av = tp.a(z).expect("interior transform");
        let bv = tp.b(z).expect("interior transform");
        let v = objective(av, bv);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };

    let lo_s = lo + width * BRACKET_INSET_REL;
    let hi_s = hi - width * BRACKET_INSET_REL;
    let step = (hi_s - lo_s) / SUP_SCAN_POINTS as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=SUP_SCAN_POINTS {
        let v = eval(lo_s + step * i as f64);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let bracket_lo = lo_s + step * best_i.saturating_sub(1) as f64;
    let bracket_hi = lo_s + step * (best_i + 1).min(SUP_SCAN_POINTS) as f64;
    let (_, neg_min) = golden_section_min(
        |z| -eval(z),
        bracket_lo,
        bracket_hi,
        width * SUP_GOLDEN_WIDTH_REL,
    );
    let mut sup = (-neg_min).max(best_v);

    // Endpoint limits, evaluated in extended-real arithmetic: a divergent
    // transform sends the value to 0 or -∞ depending on where it sits.
    for z_end in [lo, hi] {
        let v = objective(tp.a(z_end)?, tp.b(z_end)?);
        if v > sup {
            sup = v;
        }
    }
    Ok(sup.max(0.0))
}

/// Limiting height profile: the largest `h ≥ 0` such that growth at tilt
/// `z` can reach column position `y` by time `t`, i.e.
/// `sup_z (t - y·B(z)) / A(z)` clamped at zero.
pub fn limit_height(spec: &ShapeSpec, y: f64, t: f64) -> Result<f64> {
    sup_over_tilt(spec, y, t, SupKind::Height)
}

/// Limiting particle flux across position `x` by time `t`:
/// `sup_z (t - x·A(z)) / (A(z) + B(z))` clamped at zero.
pub fn limit_flux(spec: &ShapeSpec, x: f64, t: f64) -> Result<f64> {
    sup_over_tilt(spec, x, t, SupKind::Flux)
}

/// Which side of a narrow rectangle stays bounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedSide {
    /// Column extent fixed; growth runs along the other axis at rate
    /// `A(fixed_min)` per unit.
    Column,
    /// Row extent fixed; growth rate `B(-fixed_min)` per unit.
    Row,
}

/// Per-unit growth rate of passage times along a narrow rectangle whose
/// bounded side has parameter minimum `fixed_min`. The reciprocal of the
/// column-case rate is the limiting height speed above a fixed column
/// range.
pub fn narrow_rate(spec: &ShapeSpec, fixed_min: f64, side: FixedSide) -> Result<f64> {
    match side {
        FixedSide::Column => {
            if !(spec.tp.alpha.inf_supp() + fixed_min > 0.0) {
                return Err(Error::Domain(format!(
                    "fixed minimum {fixed_min} is inadmissible: needs inf supp α + fixed_min > 0"
                )));
            }
            spec.tp.a(fixed_min)
        }
        FixedSide::Row => {
            if !(spec.tp.beta.inf_supp() + fixed_min > 0.0) {
                return Err(Error::Domain(format!(
                    "fixed minimum {fixed_min} is inadmissible: needs inf supp β + fixed_min > 0"
                )));
            }
            spec.tp.b(-fixed_min)
        }
    }
}
