//! Constructive steps that turn near-solutions into exact structure.
//!
//! Each routine here is the finite-precision analogue of one step in the
//! stability argument: extracting the homogeneous part of a restriction by
//! a scaling limit, splitting off the skew part of a two-variable function,
//! rebuilding a potential whose coboundary reproduces a near-cocycle on a
//! grid, and averaging a near-cocycle into a corrected value.
//!
//! All routines are deterministic and report enough intermediate data for a
//! caller to check convergence claims instead of trusting them.

use crate::defects::{projected_pairs, sup_entropy_defect, sup_symmetry_defect};
use crate::domain::{BinaryFn, Point3, Restriction, TernaryFn};
use crate::error::{Error, Result};
use crate::numeric::{leq_with_slack, pairwise_sum};
use serde::Serialize;

/// Where the scaling parameter is sent by a homogenization schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitDirection {
    TowardZero,
    TowardInfinity,
}

/// A monotone sequence of scale magnitudes for a fixed nonzero degree.
///
/// For degree `alpha > 0` the scale is `t = m` and the limit is taken toward
/// infinity; for `alpha < 0` the scale is `t = 1/m` and the limit is taken
/// toward zero. Degree zero has no contracting scaling and is rejected.
#[derive(Clone, Debug, Serialize)]
pub struct HomogenizationSchedule {
    alpha: f64,
    magnitudes: Vec<f64>,
    direction: LimitDirection,
}

impl HomogenizationSchedule {
    pub fn new(alpha: f64, magnitudes: Vec<f64>) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFiniteParameter {
                name: "alpha",
                value: alpha,
            });
        }
        if alpha == 0.0 {
            return Err(Error::InvalidSchedule(
                "degree zero has no contracting scaling limit; the flat regime \
                 is handled by averaging instead"
                    .to_owned(),
            ));
        }
        if magnitudes.is_empty() {
            return Err(Error::InvalidSchedule("no magnitudes given".to_owned()));
        }
        let mut prev = 0.0f64;
        for &m in &magnitudes {
            if !m.is_finite() || m <= prev {
                return Err(Error::InvalidSchedule(format!(
                    "magnitudes must be finite, positive and strictly increasing, got {m} after {prev}"
                )));
            }
            prev = m;
        }
        let direction = if alpha > 0.0 {
            LimitDirection::TowardInfinity
        } else {
            LimitDirection::TowardZero
        };
        Ok(Self {
            alpha,
            magnitudes,
            direction,
        })
    }

    #[must_use]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[must_use]
    pub fn direction(&self) -> LimitDirection {
        self.direction
    }

    #[must_use]
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// Scale factor applied at one magnitude step.
    #[must_use]
    pub fn effective_t(&self, magnitude: f64) -> f64 {
        match self.direction {
            LimitDirection::TowardInfinity => magnitude,
            LimitDirection::TowardZero => 1.0 / magnitude,
        }
    }
}

/// One evaluation of the rescaled restriction along a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub magnitude: f64,
    pub t: f64,
    /// `t^(-alpha) * H(t x, t y, 0)`.
    pub value: f64,
}

/// The full run of rescaled values along a schedule at a fixed pair.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTrace {
    pub alpha: f64,
    pub x: f64,
    pub y: f64,
    pub steps: Vec<TraceStep>,
}

impl ConvergenceTrace {
    /// Value at the largest magnitude; the schedule guarantees at least one step.
    #[must_use]
    pub fn limit_estimate(&self) -> f64 {
        self.steps.last().expect("schedule is never empty").value
    }
}

/// Evaluates `t^(-alpha) H(t x, t y, 0)` along the schedule. For a candidate
/// whose restriction is exactly homogeneous of the scheduled degree the trace
/// is constant; contaminations of other degrees decay along it.
pub fn homogenize<H: TernaryFn + ?Sized>(
    h: &H,
    schedule: &HomogenizationSchedule,
    x: f64,
    y: f64,
) -> Result<ConvergenceTrace> {
    if !x.is_finite() || !y.is_finite() || x <= 0.0 || y <= 0.0 {
        return Err(Error::InvalidPair { x, y });
    }
    let alpha = schedule.alpha();
    let mut steps = Vec::with_capacity(schedule.magnitudes().len());
    for &m in schedule.magnitudes() {
        let t = schedule.effective_t(m);
        let factor = t.powf(-alpha);
        if !factor.is_finite() || factor == 0.0 {
            return Err(Error::ScaleOutOfRange { t, alpha });
        }
        let raw = h.eval(Point3::new(t * x, t * y, 0.0)?)?;
        let value = factor * raw;
        if !value.is_finite() {
            return Err(Error::NonFiniteEval {
                x: t * x,
                y: t * y,
                z: 0.0,
            });
        }
        steps.push(TraceStep {
            magnitude: m,
            t,
            value,
        });
    }
    Ok(ConvergenceTrace {
        alpha,
        x,
        y,
        steps,
    })
}

/// Antisymmetric part of a two-variable function. Exactly antisymmetric in
/// IEEE arithmetic because `a - b` and `b - a` are negations of each other.
pub fn skew_part_at<F: BinaryFn + ?Sized>(f: &F, x: f64, y: f64) -> Result<f64> {
    Ok(0.5 * (f.eval(x, y)? - f.eval(y, x)?))
}

/// The antisymmetric part as a function.
#[derive(Clone, Copy, Debug)]
pub struct SkewPart<F> {
    f: F,
}

impl<F: BinaryFn> BinaryFn for SkewPart<F> {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        skew_part_at(&self.f, x, y)
    }
}

#[must_use]
pub fn skew_part<F: BinaryFn>(f: F) -> SkewPart<F> {
    SkewPart { f }
}

/// Finite-sample check that the asymmetry of the restriction is controlled
/// by the measured defects.
#[derive(Clone, Debug, Serialize)]
pub struct SkewBoundCheck {
    /// Largest observed `|F(x,y) - F(y,x)|` over the projected pairs.
    pub lhs: f64,
    /// Symmetry defect over the triples and the projected boundary points.
    pub eps1_hat: f64,
    /// Additivity defect over the triples.
    pub eps2_hat: f64,
    /// `4 eps2_hat + 9 eps1_hat`.
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `sup |F(x,y) - F(y,x)| <= 4 eps2 + 9 eps1` where `F` is the
/// boundary restriction of `h`. The symmetry defect is measured over the
/// given triples together with each projected pair embedded as `(x, y, 0)`,
/// which makes the inequality hold for every candidate, not only for
/// near-solutions: the swap gap at a pair is itself one of the permutation
/// gaps measured at the embedded point.
pub fn skew_bound_check<H: TernaryFn + ?Sized>(
    h: &H,
    triples: &[Point3],
) -> Result<SkewBoundCheck> {
    let pairs = projected_pairs(triples);
    if pairs.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let f = Restriction::new(h);
    let mut lhs = 0.0f64;
    let mut scale = 0.0f64;
    for &(x, y) in &pairs {
        let a = f.eval(x, y)?;
        let b = f.eval(y, x)?;
        scale = scale.max(a.abs()).max(b.abs());
        lhs = lhs.max((a - b).abs());
    }
    let mut augmented = triples.to_vec();
    for &(x, y) in &pairs {
        augmented.push(Point3::new(x, y, 0.0)?);
    }
    let eps1_hat = sup_symmetry_defect(h, &augmented, false)?.sup;
    let eps2_hat = sup_entropy_defect(h, triples, false)?.sup;
    let rhs = 4.0 * eps2_hat + 9.0 * eps1_hat;
    let holds = leq_with_slack(lhs, rhs, scale.max(rhs));
    Ok(SkewBoundCheck {
        lhs,
        eps1_hat,
        eps2_hat,
        rhs,
        holds,
    })
}

/// One residual of the grid decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridResidual {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

/// Decomposition of a two-variable function on the grid `{h, 2h, ..., nh}`
/// into a coboundary of a reconstructed potential plus a skew table.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub grid_step: f64,
    /// `potential[k]` approximates the potential at `(k+1) * grid_step`,
    /// in the gauge where the value at `grid_step` is zero.
    pub potential: Vec<f64>,
    /// `skew[i][j]` is the antisymmetric part at `((i+1) h, (j+1) h)`;
    /// the table satisfies `skew[i][j] == -skew[j][i]` exactly.
    pub skew: Vec<Vec<f64>>,
    /// `F - coboundary(potential) - skew` at every grid pair with `i + j <= n`.
    pub residuals: Vec<GridResidual>,
    pub residual_sup: f64,
}

/// Largest grid size accepted by [`reconstruct_potential`]; the residual
/// table grows quadratically and larger grids add no insight.
pub const MAX_RECONSTRUCTION_POINTS: usize = 512;

/// Rebuilds a potential from a near-cocycle by discrete integration along
/// the first grid row: the potential at `(k+1)h` is the potential at `kh`
/// plus `F(kh, h)`. For an exact cocycle the residuals vanish identically;
/// a defect of size `delta` can grow the residuals at most linearly in `n`.
pub fn reconstruct_potential<F: BinaryFn + ?Sized>(
    f: &F,
    grid_step: f64,
    n: usize,
) -> Result<Decomposition> {
    if !grid_step.is_finite() || grid_step <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "grid step must be positive and finite, got {grid_step}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "grid needs at least two points for one residual".to_owned(),
        ));
    }
    if n > MAX_RECONSTRUCTION_POINTS {
        return Err(Error::InvalidParameter(format!(
            "grid size {n} exceeds the cap of {MAX_RECONSTRUCTION_POINTS}"
        )));
    }
    let h = grid_step;
    let coord = |k: usize| k as f64 * h;

    let mut potential = vec![0.0f64; n];
    for k in 1..n {
        let step = f.eval(coord(k), h)?;
        if !step.is_finite() {
            return Err(Error::NonFiniteEval {
                x: coord(k),
                y: h,
                z: 0.0,
            });
        }
        potential[k] = potential[k - 1] + step;
    }

    let mut skew = vec![vec![0.0f64; n]; n];
    // Each pass writes both (i, j) and its transpose, so indexed loops stay.
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in (i + 1)..n {
            let s = skew_part_at(f, coord(i + 1), coord(j + 1))?;
            skew[i][j] = s;
            skew[j][i] = -s;
        }
    }

    let mut residuals = Vec::new();
    let mut residual_sup = 0.0f64;
    for i in 1..n {
        for j in 1..=(n - i) {
            let x = coord(i);
            let y = coord(j);
            let cobound = potential[i + j - 1] - potential[i - 1] - potential[j - 1];
            let r = f.eval(x, y)? - cobound - skew[i - 1][j - 1];
            if !r.is_finite() {
                return Err(Error::NonFiniteEval { x, y, z: 0.0 });
            }
            residual_sup = residual_sup.max(r.abs());
            residuals.push(GridResidual {
                i,
                j,
                x,
                y,
                residual: r,
            });
        }
    }
    Ok(Decomposition {
        grid_step,
        potential,
        skew,
        residuals,
        residual_sup,
    })
}

/// Averaged correction of a near-cocycle at one pair: the mean over a
/// uniform window of the combination that equals `F(x, y)` exactly whenever
/// the cocycle equation holds. A defect of size `delta` moves the result by
/// at most `4 delta`; oscillatory contamination averages out at rate `1/window`.
pub fn average_correct_cocycle<F: BinaryFn + ?Sized>(
    f: &F,
    x: f64,
    y: f64,
    window: f64,
    count: usize,
) -> Result<f64> {
    if !x.is_finite() || !y.is_finite() || x <= 0.0 || y <= 0.0 {
        return Err(Error::InvalidPair { x, y });
    }
    if !window.is_finite() || window <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "averaging window must be positive and finite, got {window}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidParameter(
            "averaging needs at least one sample".to_owned(),
        ));
    }
    let m = count as f64;
    let mut terms = Vec::with_capacity(count);
    for j in 1..=count {
        let z = (j as f64) * window / m;
        let term = f.eval(x, y + z)? + f.eval(y, z)? - f.eval(x + y, z)?;
        if !term.is_finite() {
            return Err(Error::NonFiniteEval { x, y, z });
        }
        terms.push(term);
    }
    Ok(pairwise_sum(&terms) / m)
}
