//! Pointwise defect functionals and their suprema over sample sets.
//!
//! Three defects quantify how far a candidate `H` is from the hypotheses of
//! the stability statement:
//!
//! * symmetry: `max over permutations s of |H(p) - H(s p)|`,
//! * additivity: `|H(x,y,z) - H(x+y,0,z) - H(x,y,0)|` on interior points,
//! * homogeneity: `|H(t x, t y, 0) - t^alpha H(x, y, 0)|`.
//!
//! A fourth defect measures how far a two-variable function is from the
//! cocycle equation `F(x,y) + F(x+y,z) = F(x,y+z) + F(y,z)`.
//!
//! Suprema over finite sample sets are reported together with the sample
//! achieving them; ties are broken toward the lexicographically smallest
//! sample so the argmax is deterministic.

use crate::domain::{BinaryFn, Permutation3, Point3, SampleSet, TernaryFn};
use crate::error::{Error, Result};
use serde::Serialize;

/// Which defect a report refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Symmetry,
    Entropy,
    Homogeneity,
    Cocycle,
}

impl DefectKind {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            DefectKind::Symmetry => "symmetry",
            DefectKind::Entropy => "entropy",
            DefectKind::Homogeneity => "homogeneity",
            DefectKind::Cocycle => "cocycle",
        }
    }
}

/// The sample location attached to a residual: a domain triple, or a
/// (scale factor, pair) combination for the homogeneity defect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DefectSample {
    Triple { x: f64, y: f64, z: f64 },
    ScaledPair { t: f64, x: f64, y: f64 },
}

impl DefectSample {
    fn key(&self) -> [f64; 3] {
        match *self {
            DefectSample::Triple { x, y, z } => [x, y, z],
            DefectSample::ScaledPair { t, x, y } => [t, x, y],
        }
    }

    fn lex_less(&self, other: &Self) -> bool {
        self.key() < other.key()
    }

    #[must_use]
    pub fn from_point(p: Point3) -> Self {
        DefectSample::Triple {
            x: p.x(),
            y: p.y(),
            z: p.z(),
        }
    }
}

/// One retained residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub at: DefectSample,
    pub residual: f64,
}

/// Supremum of a defect over a finite sample set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectReport {
    pub kind: DefectKind,
    /// Finite-sample maximum; a lower bound of the true supremum.
    pub sup: f64,
    /// Sample achieving the maximum (lexicographically smallest on ties).
    pub argmax: DefectSample,
    /// Number of samples inspected.
    pub count: usize,
    /// Per-sample residuals, retained only on request.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<ResidualRecord>>,
}

struct MaxTracker {
    sup: f64,
    at: Option<DefectSample>,
    count: usize,
    residuals: Option<Vec<ResidualRecord>>,
}

impl MaxTracker {
    fn new(retain: bool) -> Self {
        Self {
            sup: 0.0,
            at: None,
            count: 0,
            residuals: if retain { Some(Vec::new()) } else { None },
        }
    }

    fn update(&mut self, residual: f64, at: DefectSample) {
        self.count += 1;
        if let Some(rs) = &mut self.residuals {
            rs.push(ResidualRecord { at, residual });
        }
        let better = match &self.at {
            None => true,
            Some(cur) => {
                residual > self.sup || (residual == self.sup && at.lex_less(cur))
            }
        };
        if better {
            self.sup = residual;
            self.at = Some(at);
        }
    }

    fn finish(self, kind: DefectKind) -> Result<DefectReport> {
        match self.at {
            None => Err(Error::EmptySampleSet),
            Some(at) => Ok(DefectReport {
                kind,
                sup: self.sup,
                argmax: at,
                count: self.count,
                residuals: self.residuals,
            }),
        }
    }
}

/// Symmetry defect at one point: worst deviation of `H` from invariance
/// under the six coordinate permutations.
pub fn symmetry_defect_at<H: TernaryFn + ?Sized>(h: &H, p: Point3) -> Result<f64> {
    let base = h.eval(p)?;
    let mut worst = 0.0f64;
    for sigma in Permutation3::ALL {
        if sigma.is_identity() {
            continue;
        }
        let d = (base - h.eval(sigma.apply(p))?).abs();
        // f64::max drops NaN silently, so check each deviation by hand.
        if !d.is_finite() {
            return Err(Error::NonFiniteEval {
                x: p.x(),
                y: p.y(),
                z: p.z(),
            });
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Additivity defect `|H(x,y,z) - H(x+y,0,z) - H(x,y,0)|` at an interior point.
pub fn entropy_defect_at<H: TernaryFn + ?Sized>(h: &H, p: Point3) -> Result<f64> {
    if !p.is_interior() {
        return Err(Error::NotInterior {
            x: p.x(),
            y: p.y(),
            z: p.z(),
        });
    }
    let whole = h.eval(p)?;
    let merged = h.eval(Point3::new(p.x() + p.y(), 0.0, p.z())?)?;
    let split = h.eval(Point3::new(p.x(), p.y(), 0.0)?)?;
    let d = (whole - merged - split).abs();
    if !d.is_finite() {
        return Err(Error::NonFiniteEval {
            x: p.x(),
            y: p.y(),
            z: p.z(),
        });
    }
    Ok(d)
}

/// Homogeneity defect `|H(t x, t y, 0) - t^alpha H(x, y, 0)|` for `t > 0`
/// and a pair in the open positive quadrant.
pub fn homogeneity_defect_at<H: TernaryFn + ?Sized>(
    h: &H,
    alpha: f64,
    t: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "scale factor must be positive and finite, got {t}"
        )));
    }
    if !x.is_finite() || !y.is_finite() || x <= 0.0 || y <= 0.0 {
        return Err(Error::InvalidPair { x, y });
    }
    let factor = t.powf(alpha);
    if !factor.is_finite() || factor == 0.0 {
        return Err(Error::ScaleOutOfRange { t, alpha });
    }
    let scaled = h.eval(Point3::new(t * x, t * y, 0.0)?)?;
    let base = h.eval(Point3::new(x, y, 0.0)?)?;
    let d = scaled - factor * base;
    if !d.is_finite() {
        return Err(Error::NonFiniteEval {
            x: t * x,
            y: t * y,
            z: 0.0,
        });
    }
    Ok(d.abs())
}

/// Cocycle defect `|F(x+y,z) + F(x,y) - F(x,y+z) - F(y,z)|` for a
/// two-variable function and strictly positive arguments.
pub fn cocycle_defect_at<F: BinaryFn + ?Sized>(f: &F, x: f64, y: f64, z: f64) -> Result<f64> {
    for v in [x, y, z] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cocycle defect arguments must be positive and finite, got ({x}, {y}, {z})"
            )));
        }
    }
    let d = (f.eval(x + y, z)? + f.eval(x, y)? - f.eval(x, y + z)? - f.eval(y, z)?).abs();
    if !d.is_finite() {
        return Err(Error::NonFiniteEval { x, y, z });
    }
    Ok(d)
}

/// Supremum of the symmetry defect over explicit points.
pub fn sup_symmetry_defect<H: TernaryFn + ?Sized>(
    h: &H,
    points: &[Point3],
    retain: bool,
) -> Result<DefectReport> {
    let mut tracker = MaxTracker::new(retain);
    for &p in points {
        let r = symmetry_defect_at(h, p)?;
        tracker.update(r, DefectSample::from_point(p));
    }
    tracker.finish(DefectKind::Symmetry)
}

/// Supremum of the additivity defect over explicit interior points.
pub fn sup_entropy_defect<H: TernaryFn + ?Sized>(
    h: &H,
    points: &[Point3],
    retain: bool,
) -> Result<DefectReport> {
    let mut tracker = MaxTracker::new(retain);
    for &p in points {
        let r = entropy_defect_at(h, p)?;
        tracker.update(r, DefectSample::from_point(p));
    }
    tracker.finish(DefectKind::Entropy)
}

/// Supremum of the homogeneity defect over a scale-factor grid times a pair
/// set. Scale factors iterate slowest so the enumeration order is fixed.
pub fn sup_homogeneity_defect<H: TernaryFn + ?Sized>(
    h: &H,
    alpha: f64,
    scale_factors: &[f64],
    pairs: &[(f64, f64)],
    retain: bool,
) -> Result<DefectReport> {
    let mut tracker = MaxTracker::new(retain);
    for &t in scale_factors {
        for &(x, y) in pairs {
            let r = homogeneity_defect_at(h, alpha, t, x, y)?;
            tracker.update(r, DefectSample::ScaledPair { t, x, y });
        }
    }
    tracker.finish(DefectKind::Homogeneity)
}

/// Supremum of the cocycle defect, reading each triple as the argument list
/// `(x, y, z)` of the defect.
pub fn sup_cocycle_defect<F: BinaryFn + ?Sized>(
    f: &F,
    triples: &[Point3],
    retain: bool,
) -> Result<DefectReport> {
    let mut tracker = MaxTracker::new(retain);
    for &p in triples {
        let r = cocycle_defect_at(f, p.x(), p.y(), p.z())?;
        tracker.update(r, DefectSample::from_point(p));
    }
    tracker.finish(DefectKind::Cocycle)
}

/// Distinct `(x, y)` projections of the triples, first occurrence order.
#[must_use]
pub fn projected_pairs(triples: &[Point3]) -> Vec<(f64, f64)> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for p in triples {
        let key = (p.x().to_bits(), p.y().to_bits());
        if seen.insert(key) {
            out.push((p.x(), p.y()));
        }
    }
    out
}

/// Dispatching supremum over a sample set. The homogeneity kind requires a
/// degree; the cocycle kind acts on the restriction `H(., ., 0)`.
pub fn sup_defect<H: TernaryFn + ?Sized>(
    kind: DefectKind,
    h: &H,
    s: &SampleSet,
    alpha: Option<f64>,
    retain: bool,
) -> Result<DefectReport> {
    match kind {
        DefectKind::Symmetry => sup_symmetry_defect(h, &s.triples, retain),
        DefectKind::Entropy => sup_entropy_defect(h, &s.triples, retain),
        DefectKind::Homogeneity => {
            let alpha = alpha.ok_or_else(|| {
                Error::InvalidParameter(
                    "homogeneity defect requires a degree".to_owned(),
                )
            })?;
            let pairs = projected_pairs(&s.triples);
            sup_homogeneity_defect(h, alpha, &s.scale_factors, &pairs, retain)
        }
        DefectKind::Cocycle => {
            let f = crate::domain::Restriction::new(h);
            sup_cocycle_defect(&f, &s.triples, retain)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{
        make_sample_set, BinaryClosure, Restriction, SampleSpec, SolutionFamily,
        TernaryClosure,
    };
    use proptest::prelude::*;

    fn pt(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z).unwrap()
    }

    #[test]
    fn symmetry_defect_of_first_coordinate_projection() {
        // H = x at (1,2,3): permuted first coordinates are {1,2,3},
        // so the worst deviation is |1 - 3| = 2.
        let h = TernaryClosure(|p: Point3| p.x());
        assert_eq!(symmetry_defect_at(&h, pt(1.0, 2.0, 3.0)).unwrap(), 2.0);
    }

    #[test]
    fn symmetry_defect_vanishes_for_families() {
        let members = [
            SolutionFamily::power(1.3, 2.0).unwrap(),
            SolutionFamily::shannon(-0.7).unwrap(),
            SolutionFamily::constant(5.0).unwrap(),
        ];
        for m in members {
            // Permuted points sum in a different order, so the value can move
            // by rounding; the slack absorbs exactly that.
            let p = pt(0.2, 5.0, 11.0);
            let tol = crate::numeric::slack(1.0 + m.value_at(p).abs());
            assert!(symmetry_defect_at(&m, p).unwrap() <= tol);
        }
    }

    #[test]
    fn entropy_defect_of_constant_is_its_value() {
        let h = SolutionFamily::constant(5.0).unwrap();
        assert_eq!(entropy_defect_at(&h, pt(1.0, 1.0, 1.0)).unwrap(), 5.0);
        let g = SolutionFamily::constant(-5.0).unwrap();
        assert_eq!(entropy_defect_at(&g, pt(2.0, 3.0, 4.0)).unwrap(), 5.0);
    }

    #[test]
    fn entropy_defect_sees_an_additive_offset() {
        // H = exact member + 1 has defect exactly 1 everywhere.
        let base = SolutionFamily::power(1.0, 2.0).unwrap();
        let h = TernaryClosure(move |p: Point3| base.value_at(p) + 1.0);
        let d = entropy_defect_at(&h, pt(1.0, 2.0, 3.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn non_finite_candidates_error_instead_of_hiding_nan() {
        // inf - inf = NaN would otherwise vanish inside max-tracking.
        let h = TernaryClosure(|_p: Point3| f64::INFINITY);
        let p = pt(1.0, 2.0, 3.0);
        assert!(matches!(
            symmetry_defect_at(&h, p),
            Err(Error::NonFiniteEval { .. })
        ));
        assert!(matches!(
            entropy_defect_at(&h, p),
            Err(Error::NonFiniteEval { .. })
        ));
        let f = BinaryClosure(|_x, _y| f64::NEG_INFINITY);
        assert!(matches!(
            cocycle_defect_at(&f, 1.0, 1.0, 1.0),
            Err(Error::NonFiniteEval { .. })
        ));
    }

    #[test]
    fn entropy_defect_requires_interior() {
        let h = SolutionFamily::constant(0.0).unwrap();
        assert!(matches!(
            entropy_defect_at(&h, pt(1.0, 0.0, 1.0)),
            Err(Error::NotInterior { .. })
        ));
    }

    #[test]
    fn homogeneity_defect_detects_wrong_degree() {
        // H = power degree 2; probing with degree 1 at t=2, (1,1):
        // |H(2,2,0) - 2 * H(1,1,0)| = |8 - 4| = 4.
        let h = SolutionFamily::power(1.0, 2.0).unwrap();
        assert_eq!(
            homogeneity_defect_at(&h, 1.0, 2.0, 1.0, 1.0).unwrap(),
            4.0
        );
        let d = homogeneity_defect_at(&h, 2.0, 2.0, 1.0, 1.0).unwrap();
        assert!(d < 1e-12, "got {d}");
    }

    #[test]
    fn homogeneity_overflow_is_a_range_error() {
        let h = SolutionFamily::power(1.0, 2.0).unwrap();
        assert!(matches!(
            homogeneity_defect_at(&h, -800.0, 1e30, 1.0, 1.0),
            Err(Error::ScaleOutOfRange { .. })
        ));
    }

    #[test]
    fn cocycle_defect_of_first_projection() {
        // F(x,y) = x: |(x+y) + x - x - y| = x.
        let f = BinaryClosure(|x: f64, _y: f64| x);
        assert_eq!(cocycle_defect_at(&f, 3.0, 1.0, 5.0).unwrap(), 3.0);
        assert_eq!(cocycle_defect_at(&f, 0.25, 9.0, 2.0).unwrap(), 0.25);
    }

    #[test]
    fn cocycle_defect_vanishes_for_coboundaries() {
        // F = f(x+y) - f(x) - f(y) with f(u) = u^2 gives F = 2xy.
        let f = BinaryClosure(|x: f64, y: f64| 2.0 * x * y);
        assert_eq!(cocycle_defect_at(&f, 1.0, 2.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn sup_reports_argmax_and_count() {
        let h = TernaryClosure(|p: Point3| p.x());
        let points = [pt(1.0, 2.0, 3.0), pt(5.0, 1.0, 9.0), pt(2.0, 2.0, 2.0)];
        // Defect at (5,1,9) is max(|5-1|, |5-9|) = 4, the largest of the three.
        let rep = sup_symmetry_defect(&h, &points, true).unwrap();
        assert_eq!(rep.sup, 4.0);
        assert_eq!(
            rep.argmax,
            DefectSample::Triple {
                x: 5.0,
                y: 1.0,
                z: 9.0
            }
        );
        assert_eq!(rep.count, 3);
        assert_eq!(rep.residuals.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn sup_breaks_ties_lexicographically() {
        // Constant defect everywhere; the argmax must be the smallest point
        // even though it is visited last.
        let base = SolutionFamily::power(1.0, 2.0).unwrap();
        let h = TernaryClosure(move |p: Point3| base.value_at(p) + 1.0);
        let points = [pt(4.0, 4.0, 4.0), pt(2.0, 2.0, 2.0), pt(1.0, 1.0, 1.0)];
        let rep = sup_entropy_defect(&h, &points, false).unwrap();
        assert_eq!(
            rep.argmax,
            DefectSample::Triple {
                x: 1.0,
                y: 1.0,
                z: 1.0
            }
        );
    }

    #[test]
    fn sup_over_empty_set_is_an_error() {
        let h = SolutionFamily::constant(0.0).unwrap();
        assert!(matches!(
            sup_symmetry_defect(&h, &[], false),
            Err(Error::EmptySampleSet)
        ));
    }

    #[test]
    fn sup_defect_dispatch_matches_components() {
        let spec = SampleSpec {
            points_per_axis: 4,
            t_count: 3,
            ..SampleSpec::default()
        };
        let s = make_sample_set(&spec, 3).unwrap();
        let h = SolutionFamily::shannon(2.0).unwrap();
        let sym = sup_defect(DefectKind::Symmetry, &h, &s, None, false).unwrap();
        assert_eq!(sym.sup, sup_symmetry_defect(&h, &s.triples, false).unwrap().sup);
        let hom = sup_defect(DefectKind::Homogeneity, &h, &s, Some(1.0), false).unwrap();
        assert_eq!(hom.kind, DefectKind::Homogeneity);
        assert!(
            sup_defect(DefectKind::Homogeneity, &h, &s, None, false).is_err()
        );
        let coc = sup_defect(DefectKind::Cocycle, &h, &s, None, false).unwrap();
        assert!(coc.sup < 1e-9, "shannon restriction is an exact cocycle");
    }

    #[test]
    fn projected_pairs_dedupes_by_bits() {
        let points = [pt(1.0, 2.0, 3.0), pt(1.0, 2.0, 4.0), pt(2.0, 1.0, 3.0)];
        assert_eq!(projected_pairs(&points), vec![(1.0, 2.0), (2.0, 1.0)]);
    }

    // The pointwise inequality chain holds for arbitrary H; each side is
    // evaluated from the same candidate, so these are identities of the
    // defect algebra, not properties of any family.

    fn arb_coord() -> impl Strategy<Value = f64> {
        // Log-uniform over roughly [1e-2, 1e2].
        (-2.0f64..2.0).prop_map(|e| 10f64.powf(e))
    }

    fn wild_candidate(a: f64, b: f64, w: f64) -> impl Fn(Point3) -> f64 + Clone {
        move |p: Point3| {
            a * p.x() + b * (p.y() * w).sin() * (p.z() + 1.0).ln() + (a - b) * p.sum().sqrt()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn defects_are_nonnegative(x in arb_coord(), y in arb_coord(), z in arb_coord()) {
            let h = SolutionFamily::shannon(1.0).unwrap();
            let p = pt(x, y, z);
            prop_assert!(symmetry_defect_at(&h, p).unwrap() >= 0.0);
            prop_assert!(entropy_defect_at(&h, p).unwrap() >= 0.0);
        }

        #[test]
        fn split_consistency_chain_is_pointwise(
            x in arb_coord(), y in arb_coord(), z in arb_coord(),
            a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.5f64..4.0,
        ) {
            // |H(x+y,0,z) + H(x,y,0) - H(y+z,0,x) - H(z,y,0)|
            //   <= ent(x,y,z) + ent(z,y,x) + sym(x,y,z)
            let h = TernaryClosure(wild_candidate(a, b, w));
            let p = pt(x, y, z);
            let lhs = (h.eval(pt(x + y, 0.0, z)).unwrap() + h.eval(pt(x, y, 0.0)).unwrap()
                - h.eval(pt(y + z, 0.0, x)).unwrap()
                - h.eval(pt(z, y, 0.0)).unwrap())
            .abs();
            let rhs = entropy_defect_at(&h, p).unwrap()
                + entropy_defect_at(&h, pt(z, y, x)).unwrap()
                + symmetry_defect_at(&h, p).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(h.eval(p).unwrap().abs());
            prop_assert!(crate::numeric::leq_with_slack(lhs, rhs, scale),
                "lhs {lhs} rhs {rhs}");
        }

        #[test]
        fn cocycle_chain_is_pointwise(
            x in arb_coord(), y in arb_coord(), z in arb_coord(),
            a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.5f64..4.0,
        ) {
            // cocycle defect of the restriction at (x,y,z) is bounded by two
            // additivity defects plus four symmetry defects at the points the
            // rearrangement touches.
            let h = TernaryClosure(wild_candidate(a, b, w));
            let f = Restriction::new(&h);
            let lhs = cocycle_defect_at(&f, x, y, z).unwrap();
            let rhs = entropy_defect_at(&h, pt(x, y, z)).unwrap()
                + entropy_defect_at(&h, pt(z, y, x)).unwrap()
                + symmetry_defect_at(&h, pt(x, y, z)).unwrap()
                + symmetry_defect_at(&h, pt(x + y, 0.0, z)).unwrap()
                + symmetry_defect_at(&h, pt(y + z, 0.0, x)).unwrap()
                + symmetry_defect_at(&h, pt(z, y, 0.0)).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(h.eval(pt(x, y, z)).unwrap().abs());
            prop_assert!(crate::numeric::leq_with_slack(lhs, rhs, scale),
                "lhs {lhs} rhs {rhs}");
        }

        #[test]
        fn restriction_swap_is_bounded_by_symmetry(
            x in arb_coord(), y in arb_coord(),
            a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.5f64..4.0,
        ) {
            let h = TernaryClosure(wild_candidate(a, b, w));
            let f = Restriction::new(&h);
            let lhs = (f.eval(x, y).unwrap() - f.eval(y, x).unwrap()).abs();
            let rhs = symmetry_defect_at(&h, pt(x, y, 0.0)).unwrap();
            let scale = lhs.abs().max(rhs.abs());
            prop_assert!(crate::numeric::leq_with_slack(lhs, rhs, scale));
        }

        #[test]
        fn exact_families_have_vanishing_defects(
            x in arb_coord(), y in arb_coord(), z in arb_coord(),
            c in -2.0f64..2.0,
        ) {
            let p = pt(x, y, z);
            let power = SolutionFamily::power(c, 2.0).unwrap();
            let shannon = SolutionFamily::shannon(c).unwrap();
            let scale = power.value_at(p).abs().max(shannon.value_at(p).abs());
            let tol = crate::numeric::slack(scale);
            prop_assert!(symmetry_defect_at(&power, p).unwrap() <= tol);
            prop_assert!(entropy_defect_at(&power, p).unwrap() <= tol);
            prop_assert!(symmetry_defect_at(&shannon, p).unwrap() <= tol);
            prop_assert!(entropy_defect_at(&shannon, p).unwrap() <= tol);
        }
    }
}
