//! One-parameter fits of a candidate against the exact solution families,
//! and the stability bound that the best-fit residual is measured against.
//!
//! Every family is linear in its free coefficient, so a least-squares fit is
//! a single projection. The sup-norm objective is convex piecewise linear in
//! the coefficient, which makes ternary search on a bracket around the
//! least-squares coefficient exact up to the stopping width. The returned
//! coefficient is never worse than the least-squares one under the sup
//! objective, by construction.

use crate::domain::{EpsilonTriple, Point3, SolutionFamily, TernaryFn};
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use serde::Serialize;

/// Objective used to select the free coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMetric {
    SupNorm,
    LeastSquares,
}

/// Outcome of fitting one family to sampled values.
#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    /// The fitted member, coefficient included.
    pub family: SolutionFamily,
    pub metric: FitMetric,
    /// Largest absolute residual over the sample points.
    pub residual_sup: f64,
    /// Euclidean norm of the residual vector.
    pub residual_l2: f64,
}

impl FitResult {
    /// Free coefficient of the fitted member.
    #[must_use]
    pub fn parameter(&self) -> f64 {
        use crate::domain::FamilyKind::*;
        match self.family.kind() {
            Power { c, .. } => c,
            Shannon { c } => c,
            Constant { a } => a,
        }
    }
}

/// Relative threshold below which a basis value carries no information
/// about the coefficient.
const INFORMATIVE_REL: f64 = 1e-12;

fn residual_sup_at(values: &[f64], basis: &[f64], c: f64) -> f64 {
    values
        .iter()
        .zip(basis)
        .map(|(&v, &g)| (v - c * g).abs())
        .fold(0.0f64, f64::max)
}

fn residual_l2_at(values: &[f64], basis: &[f64], c: f64) -> f64 {
    let sq: Vec<f64> = values
        .iter()
        .zip(basis)
        .map(|(&v, &g)| (v - c * g) * (v - c * g))
        .collect();
    pairwise_sum(&sq).sqrt()
}

/// Scale fit of `values ~ c * basis` on matched slices.
fn fit_scale(values: &[f64], basis: &[f64], metric: FitMetric) -> Result<(f64, f64, f64)> {
    debug_assert_eq!(values.len(), basis.len());
    if values.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let max_abs = basis.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let floor = INFORMATIVE_REL * (1.0 + max_abs);
    let min_informative = basis
        .iter()
        .map(|g| g.abs())
        .filter(|a| *a > floor)
        .fold(f64::INFINITY, f64::min);
    if !min_informative.is_finite() {
        return Err(Error::DegenerateBasis { max_abs });
    }

    let vg: Vec<f64> = values.iter().zip(basis).map(|(&v, &g)| v * g).collect();
    let gg: Vec<f64> = basis.iter().map(|&g| g * g).collect();
    let c_ls = pairwise_sum(&vg) / pairwise_sum(&gg);
    if !c_ls.is_finite() {
        return Err(Error::DegenerateBasis { max_abs });
    }

    let c = match metric {
        FitMetric::LeastSquares => c_ls,
        FitMetric::SupNorm => {
            let l2_ls = residual_l2_at(values, basis, c_ls);
            if l2_ls == 0.0 {
                c_ls
            } else {
                // Any sup-optimal coefficient lies within 2 l2 / min|g| of the
                // least-squares one; widen to 3 for headroom. The objective is
                // convex in c, so ternary search converges on this bracket.
                let w = 3.0 * l2_ls / min_informative;
                let mut lo = c_ls - w;
                let mut hi = c_ls + w;
                for _ in 0..300 {
                    if (hi - lo) <= 1e-13 * (1.0 + (0.5 * (lo + hi)).abs()) {
                        break;
                    }
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if residual_sup_at(values, basis, m1)
                        <= residual_sup_at(values, basis, m2)
                    {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let c_t = 0.5 * (lo + hi);
                // Keep the least-squares coefficient unless the search made a
                // strict improvement; the sup residual of the result is then
                // never above the least-squares one.
                if residual_sup_at(values, basis, c_t) < residual_sup_at(values, basis, c_ls)
                {
                    c_t
                } else {
                    c_ls
                }
            }
        }
    };
    Ok((
        c,
        residual_sup_at(values, basis, c),
        residual_l2_at(values, basis, c),
    ))
}

fn sample_values<H: TernaryFn + ?Sized>(h: &H, points: &[Point3]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(points.len());
    for &p in points {
        let v = h.eval(p)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteEval {
                x: p.x(),
                y: p.y(),
                z: p.z(),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// Fits `c` in the power family of the given degree. Degrees 0 and 1 are
/// rejected: the degree-1 basis vanishes identically and the degree-0 case
/// belongs to the constant family.
pub fn fit_power<H: TernaryFn + ?Sized>(
    h: &H,
    points: &[Point3],
    alpha: f64,
    metric: FitMetric,
) -> Result<FitResult> {
    if alpha == 0.0 {
        return Err(Error::InvalidParameter(
            "degree-zero power fit is ill-posed; fit the constant family instead"
                .to_owned(),
        ));
    }
    let basis_member = SolutionFamily::power(1.0, alpha)?;
    let values = sample_values(h, points)?;
    let basis = sample_values(&basis_member, points)?;
    let (c, residual_sup, residual_l2) = fit_scale(&values, &basis, metric)?;
    Ok(FitResult {
        family: SolutionFamily::power(c, alpha)?,
        metric,
        residual_sup,
        residual_l2,
    })
}

/// Fits `c` in the family `c * (sum xlnx terms)`.
pub fn fit_shannon<H: TernaryFn + ?Sized>(
    h: &H,
    points: &[Point3],
    metric: FitMetric,
) -> Result<FitResult> {
    let basis_member = SolutionFamily::shannon(1.0)?;
    let values = sample_values(h, points)?;
    let basis = sample_values(&basis_member, points)?;
    let (c, residual_sup, residual_l2) = fit_scale(&values, &basis, metric)?;
    Ok(FitResult {
        family: SolutionFamily::shannon(c)?,
        metric,
        residual_sup,
        residual_l2,
    })
}

/// Fits the constant family. Under the sup objective the midrange is the
/// exact Chebyshev center; under least squares the mean is optimal.
pub fn fit_constant<H: TernaryFn + ?Sized>(
    h: &H,
    points: &[Point3],
    metric: FitMetric,
) -> Result<FitResult> {
    let values = sample_values(h, points)?;
    if values.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let min = values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let max = values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let a = match metric {
        FitMetric::SupNorm => 0.5 * (min + max),
        FitMetric::LeastSquares => pairwise_sum(&values) / values.len() as f64,
    };
    let residual_sup = values
        .iter()
        .map(|&v| (v - a).abs())
        .fold(0.0f64, f64::max);
    let sq: Vec<f64> = values.iter().map(|&v| (v - a) * (v - a)).collect();
    Ok(FitResult {
        family: SolutionFamily::constant(a)?,
        metric,
        residual_sup,
        residual_l2: pairwise_sum(&sq).sqrt(),
    })
}

/// Stability bound on the distance to the nearest exact member, as a
/// function of the measured defects, split by regime.
#[must_use]
pub fn stability_bound(alpha: f64, eps: EpsilonTriple) -> f64 {
    if alpha == 0.0 {
        8.0 * eps.eps3 + 25.0 * eps.eps2 + 49.0 * eps.eps1
    } else {
        eps.eps1 + eps.eps2
    }
}
