//! Perturbation harness, defect measurement, and bound verification.
//!
//! Candidates are exact family members plus a controlled perturbation with a
//! hard amplitude cap. Perturbations are deterministic functions of the point
//! and a seed, never of evaluation order, so every measurement is reproducible
//! bit for bit and perturbed evaluations can be revisited in any order.

use crate::defects::{
    cocycle_defect_at, homogeneity_defect_at, projected_pairs, sup_defect,
    sup_entropy_defect, sup_homogeneity_defect, sup_symmetry_defect, DefectKind,
    DefectReport,
};
use crate::domain::{
    BinaryFn, EpsilonTriple, Point3, Restriction, SampleSet, SolutionFamily,
    TernaryClosure, TernaryFn,
};
use crate::error::{Error, Result};
use crate::fitting::{fit_constant, fit_power, fit_shannon, stability_bound, FitMetric, FitResult};
use crate::numeric::leq_with_slack;
use crate::proofchain::skew_bound_check;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Shape of a perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    /// Seeded white noise, constant in law across the domain.
    UniformNoise,
    /// A single Gaussian bump; smooth, localized, and seed independent.
    SmoothBump {
        center_x: f64,
        center_y: f64,
        center_z: f64,
        width: f64,
    },
    /// `sin(omega * (x+y+z))`; symmetric, oscillating, seed independent.
    Oscillatory { omega: f64 },
}

impl NoiseKind {
    #[must_use]
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::UniformNoise => "uniform_noise",
            NoiseKind::SmoothBump { .. } => "smooth_bump",
            NoiseKind::Oscillatory { .. } => "oscillatory",
        }
    }
}

/// A perturbation with amplitude cap and seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationSpec {
    pub kind: NoiseKind,
    /// Hard cap: the perturbation never exceeds this in absolute value.
    pub amplitude: f64,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(kind: NoiseKind, amplitude: f64, seed: u64) -> Result<Self> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "perturbation amplitude must be finite and nonnegative, got {amplitude}"
            )));
        }
        match kind {
            NoiseKind::SmoothBump {
                center_x,
                center_y,
                center_z,
                width,
            } => {
                for (name, v) in [
                    ("center_x", center_x),
                    ("center_y", center_y),
                    ("center_z", center_z),
                ] {
                    if !v.is_finite() {
                        return Err(Error::NonFiniteParameter { name, value: v });
                    }
                }
                if !width.is_finite() || width <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "bump width must be positive and finite, got {width}"
                    )));
                }
            }
            NoiseKind::Oscillatory { omega } => {
                if !omega.is_finite() {
                    return Err(Error::NonFiniteParameter {
                        name: "omega",
                        value: omega,
                    });
                }
            }
            NoiseKind::UniformNoise => {}
        }
        Ok(Self {
            kind,
            amplitude,
            seed,
        })
    }

    /// Perturbation value at a point. Deterministic in `(kind, seed, point)`
    /// and exactly linear in the amplitude.
    #[must_use]
    pub fn perturbation_at(&self, p: Point3) -> f64 {
        let unit = match self.kind {
            NoiseKind::UniformNoise => {
                let mut state = avalanche(self.seed);
                for c in p.coords() {
                    state = avalanche(state ^ quantize_coord(c));
                }
                // 53 uniform bits in [0, 1), stretched to [-1, 1).
                2.0 * ((state >> 11) as f64 / (1u64 << 53) as f64) - 1.0
            }
            NoiseKind::SmoothBump {
                center_x,
                center_y,
                center_z,
                width,
            } => {
                let r2 = (p.x() - center_x).powi(2)
                    + (p.y() - center_y).powi(2)
                    + (p.z() - center_z).powi(2);
                (-r2 / (2.0 * width * width)).exp()
            }
            NoiseKind::Oscillatory { omega } => (omega * p.sum()).sin(),
        };
        (self.amplitude * unit).clamp(-self.amplitude, self.amplitude)
    }
}

/// Coordinate key for the hash chain: log-quantized so that the noise field
/// is well spread across the log-scaled domain, with a sentinel for zero.
fn quantize_coord(c: f64) -> u64 {
    if c == 0.0 {
        i64::MIN as u64
    } else {
        ((c.ln() * (1u64 << 30) as f64).round() as i64) as u64
    }
}

/// 64-bit finalizer with full avalanche.
fn avalanche(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An exact family member plus a capped perturbation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PerturbedSolution {
    base: SolutionFamily,
    spec: PerturbationSpec,
}

impl PerturbedSolution {
    #[must_use]
    pub fn base(&self) -> SolutionFamily {
        self.base
    }

    #[must_use]
    pub fn spec(&self) -> PerturbationSpec {
        self.spec
    }
}

#[must_use]
pub fn perturb(base: SolutionFamily, spec: PerturbationSpec) -> PerturbedSolution {
    PerturbedSolution { base, spec }
}

impl TernaryFn for PerturbedSolution {
    fn eval(&self, p: Point3) -> Result<f64> {
        let v = self.base.value_at(p) + self.spec.perturbation_at(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEval {
                x: p.x(),
                y: p.y(),
                z: p.z(),
            })
        }
    }
}

/// All three defect suprema over one sample set.
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonMeasurement {
    pub eps: EpsilonTriple,
    pub symmetry: DefectReport,
    pub entropy: DefectReport,
    /// Present only when a degree was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homogeneity: Option<DefectReport>,
}

/// Measures the defect suprema of `h` over the sample set. The homogeneity
/// defect needs a degree; without one it is skipped and reported as zero.
pub fn measure_defects<H: TernaryFn + ?Sized>(
    h: &H,
    s: &SampleSet,
    alpha: Option<f64>,
    retain: bool,
) -> Result<EpsilonMeasurement> {
    let symmetry = sup_defect(DefectKind::Symmetry, h, s, None, retain)?;
    let entropy = sup_defect(DefectKind::Entropy, h, s, None, retain)?;
    let homogeneity = match alpha {
        Some(a) => Some(sup_defect(DefectKind::Homogeneity, h, s, Some(a), retain)?),
        None => None,
    };
    let eps = EpsilonTriple::new(
        symmetry.sup,
        entropy.sup,
        homogeneity.as_ref().map_or(0.0, |r| r.sup),
    )?;
    Ok(EpsilonMeasurement {
        eps,
        symmetry,
        entropy,
        homogeneity,
    })
}

/// Convenience wrapper returning only the three suprema.
pub fn measure_epsilons<H: TernaryFn + ?Sized>(
    h: &H,
    s: &SampleSet,
    alpha: Option<f64>,
) -> Result<EpsilonTriple> {
    Ok(measure_defects(h, s, alpha, false)?.eps)
}

/// Outcome of comparing a fit residual against the stability bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    WithinBound,
    ExceedsBound,
}

/// Interpretation caveat attached to every report that contains measured
/// epsilon values. Kept as a constant so reports stay stable.
pub const EPSILON_SEMANTICS_NOTE: &str = "epsilon values are maxima over the finite \
sample set echoed in this report; they are lower bounds on the true suprema, so a \
withinBound verdict certifies the inequality relative to the sampled evidence only";

/// One full verification: measure defects, fit the declared family, compare
/// the residual against the regime bound.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    /// Regime the bound was evaluated in.
    pub alpha: f64,
    pub measurement: EpsilonMeasurement,
    pub fit: FitResult,
    pub bound: f64,
    /// `bound - residual_sup`; negative when the bound is exceeded.
    pub margin: f64,
    pub verdict: Verdict,
}

/// Runs the verification experiment for `h` against a declared family.
///
/// `regime` defaults to the natural degree of the declared family and must
/// match it exactly when given; the mismatch error exists so a config cannot
/// silently score a candidate against the wrong bound formula.
pub fn verify_stability<H: TernaryFn + ?Sized>(
    h: &H,
    s: &SampleSet,
    declared: &SolutionFamily,
    regime: Option<f64>,
    metric: FitMetric,
    retain: bool,
) -> Result<VerificationReport> {
    let natural = declared.degree();
    let alpha = match regime {
        None => natural,
        Some(a) if a == natural => a,
        Some(a) => {
            return Err(Error::RegimeMismatch {
                declared: a,
                family: declared.kind_name(),
                expected: format!("{natural}"),
            })
        }
    };
    let measurement = measure_defects(h, s, Some(alpha), retain)?;
    let fit = match declared.kind() {
        crate::domain::FamilyKind::Power { alpha: a, .. } => {
            fit_power(h, &s.triples, a, metric)?
        }
        crate::domain::FamilyKind::Shannon { .. } => fit_shannon(h, &s.triples, metric)?,
        crate::domain::FamilyKind::Constant { .. } => fit_constant(h, &s.triples, metric)?,
    };
    let bound = stability_bound(alpha, measurement.eps);
    let verdict = if leq_with_slack(fit.residual_sup, bound, bound) {
        Verdict::WithinBound
    } else {
        Verdict::ExceedsBound
    };
    Ok(VerificationReport {
        alpha,
        measurement,
        margin: bound - fit.residual_sup,
        fit,
        bound,
        verdict,
    })
}

/// One two-sided comparison from the property suite.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub holds: bool,
}

fn finish_check(lhs: f64, rhs: f64, eps: (f64, f64, f64), scale: f64) -> InequalityCheck {
    InequalityCheck {
        lhs,
        rhs,
        eps1: eps.0,
        eps2: eps.1,
        eps3: eps.2,
        holds: leq_with_slack(lhs, rhs, scale.max(rhs.abs()).max(lhs.abs())),
    }
}

fn reversed(p: Point3) -> Point3 {
    // Coordinates are merely permuted, so revalidation cannot fail.
    Point3::new(p.z(), p.y(), p.x()).expect("permuted point stays in the domain")
}

/// `sup |H(x+y,0,z) + H(x,y,0) - H(y+z,0,x) - H(z,y,0)| <= 2 eps2 + eps1`.
///
/// The two split forms equal `H` at `(x,y,z)` and at `(z,y,x)` up to one
/// additivity defect each, and those two values differ by at most one
/// symmetry defect. Measuring `eps2` over the triples and their reversals
/// makes the inequality unconditional.
pub fn check_split_consistency<H: TernaryFn + ?Sized>(
    h: &H,
    triples: &[Point3],
) -> Result<InequalityCheck> {
    if triples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let mut lhs = 0.0f64;
    let mut scale = 0.0f64;
    for &p in triples {
        let (x, y, z) = (p.x(), p.y(), p.z());
        let a = h.eval(Point3::new(x + y, 0.0, z)?)?;
        let b = h.eval(Point3::new(x, y, 0.0)?)?;
        let c = h.eval(Point3::new(y + z, 0.0, x)?)?;
        let d = h.eval(Point3::new(z, y, 0.0)?)?;
        scale = scale.max(a.abs()).max(b.abs()).max(c.abs()).max(d.abs());
        lhs = lhs.max((a + b - c - d).abs());
    }
    let mut ent_points = triples.to_vec();
    ent_points.extend(triples.iter().map(|&p| reversed(p)));
    let eps2 = sup_entropy_defect(h, &ent_points, false)?.sup;
    let eps1 = sup_symmetry_defect(h, triples, false)?.sup;
    let rhs = 2.0 * eps2 + eps1;
    Ok(finish_check(lhs, rhs, (eps1, eps2, 0.0), scale))
}

/// Symmetry points forced by rearranging one cocycle combination at `(x,y,z)`.
fn cocycle_symmetry_points(x: f64, y: f64, z: f64) -> Result<[Point3; 4]> {
    Ok([
        Point3::new(x, y, z)?,
        Point3::new(x + y, 0.0, z)?,
        Point3::new(y + z, 0.0, x)?,
        Point3::new(z, y, 0.0)?,
    ])
}

/// `sup coc(F; x,y,z) <= 2 eps2 + 4 eps1` for the boundary restriction `F`.
///
/// Each cocycle combination rearranges into two additivity defects (at the
/// triple and its reversal) plus four symmetry defects at explicit points;
/// all of those points are added to the measured sample, so the bound holds
/// for arbitrary candidates.
pub fn check_cocycle_bound<H: TernaryFn + ?Sized>(
    h: &H,
    triples: &[Point3],
) -> Result<InequalityCheck> {
    if triples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let f = Restriction::new(h);
    let mut lhs = 0.0f64;
    let mut scale = 0.0f64;
    let mut sym_points = triples.to_vec();
    for &p in triples {
        let (x, y, z) = (p.x(), p.y(), p.z());
        let d = cocycle_defect_at(&f, x, y, z)?;
        scale = scale.max(h.eval(p)?.abs());
        lhs = lhs.max(d);
        sym_points.extend(cocycle_symmetry_points(x, y, z)?);
    }
    let mut ent_points = triples.to_vec();
    ent_points.extend(triples.iter().map(|&p| reversed(p)));
    let eps2 = sup_entropy_defect(h, &ent_points, false)?.sup;
    let eps1 = sup_symmetry_defect(h, &sym_points, false)?.sup;
    let rhs = 2.0 * eps2 + 4.0 * eps1;
    Ok(finish_check(lhs, rhs, (eps1, eps2, 0.0), scale))
}

/// `sup |F(x,y) - F(y,x)| <= 4 eps2 + 9 eps1` via the skew bound.
pub fn check_skew<H: TernaryFn + ?Sized>(
    h: &H,
    triples: &[Point3],
) -> Result<InequalityCheck> {
    let c = skew_bound_check(h, triples)?;
    Ok(InequalityCheck {
        lhs: c.lhs,
        rhs: c.rhs,
        eps1: c.eps1_hat,
        eps2: c.eps2_hat,
        eps3: 0.0,
        holds: c.holds,
    })
}

/// `sup |F(x,y) - F(1,1)| <= 4 eps3 + 12 eps2 + 24 eps1` in the flat regime.
///
/// The doubling identity
/// `F(2x,2y) + F(x,x) + F(y,y) - F(x+y,x+y) - 2 F(x,y)` rearranges into three
/// cocycle combinations plus one swap, each bounded by measured defects; the
/// degree-zero homogeneity defect then moves `F(2x,2y)` to `F(x,y)` and the
/// diagonal values to `F(1,1)`. Every point and scale factor the argument
/// touches is included in the measurement, so the bound is unconditional.
pub fn check_flatness<H: TernaryFn + ?Sized>(h: &H, s: &SampleSet) -> Result<InequalityCheck> {
    let pairs = projected_pairs(&s.triples);
    if pairs.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let f = Restriction::new(h);
    let f11 = f.eval(1.0, 1.0)?;
    let mut lhs = 0.0f64;
    let mut scale = f11.abs();

    let mut eps3 = sup_homogeneity_defect(h, 0.0, &s.scale_factors, &pairs, false)?.sup;
    let mut ent_points = s.triples.clone();
    ent_points.extend(s.triples.iter().map(|&p| reversed(p)));
    let mut sym_points = s.triples.clone();

    for &(x, y) in &pairs {
        let v = f.eval(x, y)?;
        scale = scale.max(v.abs());
        lhs = lhs.max((v - f11).abs());

        eps3 = eps3.max(homogeneity_defect_at(h, 0.0, 2.0, x, y)?);
        for t in [x, y, x + y] {
            eps3 = eps3.max(homogeneity_defect_at(h, 0.0, t, 1.0, 1.0)?);
        }

        let combos = [(x, x, y), (x + y, x, y), (2.0 * x, y, y)];
        for &(a, b, c) in &combos {
            ent_points.push(Point3::new(a, b, c)?);
            ent_points.push(Point3::new(c, b, a)?);
            sym_points.extend(cocycle_symmetry_points(a, b, c)?);
        }
        sym_points.push(Point3::new(x, x + y, 0.0)?);
    }

    let eps2 = sup_entropy_defect(h, &ent_points, false)?.sup;
    let eps1 = sup_symmetry_defect(h, &sym_points, false)?.sup;
    let rhs = 4.0 * eps3 + 12.0 * eps2 + 24.0 * eps1;
    Ok(finish_check(lhs, rhs, (eps1, eps2, eps3), scale))
}

/// Name/result pair for one suite entry.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteLine {
    pub candidate: String,
    pub check: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Results of the full property suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub candidates: usize,
    pub lines: Vec<SuiteLine>,
    pub all_hold: bool,
}

fn draw_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn draw_power_alpha(rng: &mut ChaCha8Rng) -> f64 {
    // Stay away from the excluded exponent 1, and from 0 where the power
    // bracket degenerates toward the constant regime.
    loop {
        let a = draw_range(rng, -2.5, 2.5);
        if a.abs() >= 0.1 && (a - 1.0).abs() >= 0.1 {
            return a;
        }
    }
}

fn draw_coeff(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let c = draw_range(rng, -2.0, 2.0);
        if c.abs() >= 0.05 {
            return c;
        }
    }
}

fn noise_for_index(i: usize, amplitude: f64, seed: u64) -> Result<PerturbationSpec> {
    let kind = match i % 3 {
        0 => NoiseKind::UniformNoise,
        1 => NoiseKind::Oscillatory { omega: 7.0 },
        _ => NoiseKind::SmoothBump {
            center_x: 1.0,
            center_y: 1.0,
            center_z: 1.0,
            width: 1.0,
        },
    };
    PerturbationSpec::new(kind, amplitude, seed)
}

/// Runs all four inequality checks against seeded perturbed members of each
/// family plus one deliberately asymmetric candidate. Every check is an
/// unconditional consequence of the measured defects, so `all_hold` is the
/// expected outcome for arbitrary candidates; a failure indicates a defect
/// in the measurement itself.
pub fn run_property_suite(
    s: &SampleSet,
    seed: u64,
    per_regime: usize,
    amplitude: f64,
) -> Result<SuiteReport> {
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "suite amplitude must be finite and nonnegative, got {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(String, Box<dyn TernaryFn>)> = Vec::new();

    for i in 0..per_regime {
        let c = draw_coeff(&mut rng);
        let alpha = draw_power_alpha(&mut rng);
        let spec = noise_for_index(i, amplitude, rng.gen())?;
        let name = format!(
            "power(c={c}, alpha={alpha})+{}(amp={amplitude})",
            spec.kind.name()
        );
        candidates.push((
            name,
            Box::new(perturb(SolutionFamily::power(c, alpha)?, spec)),
        ));
    }
    for i in 0..per_regime {
        let c = draw_coeff(&mut rng);
        let spec = noise_for_index(i, amplitude, rng.gen())?;
        let name = format!("shannon(c={c})+{}(amp={amplitude})", spec.kind.name());
        candidates.push((name, Box::new(perturb(SolutionFamily::shannon(c)?, spec))));
    }
    for i in 0..per_regime {
        let a = draw_range(&mut rng, -5.0, 5.0);
        let spec = noise_for_index(i, amplitude, rng.gen())?;
        let name = format!("constant(a={a})+{}(amp={amplitude})", spec.kind.name());
        candidates.push((name, Box::new(perturb(SolutionFamily::constant(a)?, spec))));
    }
    candidates.push((
        "projection(x)".to_owned(),
        Box::new(TernaryClosure(|p: Point3| p.x())),
    ));

    let mut lines = Vec::with_capacity(candidates.len() * 4);
    let mut all_hold = true;
    for (name, h) in &candidates {
        let h = h.as_ref();
        let checks: [(&'static str, InequalityCheck); 4] = [
            ("split_consistency", check_split_consistency(h, &s.triples)?),
            ("cocycle", check_cocycle_bound(h, &s.triples)?),
            ("skew", check_skew(h, &s.triples)?),
            ("flatness", check_flatness(h, s)?),
        ];
        for (check, result) in checks {
            all_hold &= result.holds;
            lines.push(SuiteLine {
                candidate: name.clone(),
                check,
                lhs: result.lhs,
                rhs: result.rhs,
                holds: result.holds,
            });
        }
    }
    Ok(SuiteReport {
        candidates: candidates.len(),
        lines,
        all_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_sample_set, SampleSpec};
    use crate::numeric::slack;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z).unwrap()
    }

    fn small_spec() -> SampleSpec {
        SampleSpec {
            grid_lo: 1e-1,
            grid_hi: 1e1,
            points_per_axis: 4,
            t_lo: 0.5,
            t_hi: 2.0,
            t_count: 3,
            ..SampleSpec::default()
        }
    }

    #[test]
    fn uniform_noise_is_deterministic_and_seed_sensitive() {
        let spec = PerturbationSpec::new(NoiseKind::UniformNoise, 1e-3, 7).unwrap();
        let p = pt(1.0, 2.0, 3.0);
        assert_eq!(
            spec.perturbation_at(p).to_bits(),
            spec.perturbation_at(p).to_bits()
        );
        let other = PerturbationSpec::new(NoiseKind::UniformNoise, 1e-3, 8).unwrap();
        assert_ne!(spec.perturbation_at(p), other.perturbation_at(p));
        // Different points decorrelate too.
        assert_ne!(spec.perturbation_at(p), spec.perturbation_at(pt(1.0, 2.0, 4.0)));
    }

    #[test]
    fn uniform_noise_handles_zero_coordinates() {
        let spec = PerturbationSpec::new(NoiseKind::UniformNoise, 1e-3, 7).unwrap();
        let a = spec.perturbation_at(pt(1.0, 0.0, 3.0));
        assert!(a.is_finite());
        assert!(a.abs() <= 1e-3);
        assert_ne!(a, spec.perturbation_at(pt(1.0, 1e-9, 3.0)));
    }

    #[test]
    fn amplitude_scaling_is_exact_for_powers_of_two() {
        let base = PerturbationSpec::new(NoiseKind::UniformNoise, 1e-3, 7).unwrap();
        let double = PerturbationSpec::new(NoiseKind::UniformNoise, 2e-3, 7).unwrap();
        for (x, y, z) in [(1.0, 2.0, 3.0), (0.5, 0.5, 9.0), (7.0, 0.0, 1.0)] {
            let p = pt(x, y, z);
            assert_eq!(2.0 * base.perturbation_at(p), double.perturbation_at(p));
        }
    }

    #[test]
    fn all_kinds_respect_the_amplitude_cap() {
        let amp = 2.5e-3;
        let kinds = [
            NoiseKind::UniformNoise,
            NoiseKind::Oscillatory { omega: 7.0 },
            NoiseKind::SmoothBump {
                center_x: 1.0,
                center_y: 1.0,
                center_z: 1.0,
                width: 0.3,
            },
        ];
        let s = make_sample_set(&small_spec(), 5).unwrap();
        for kind in kinds {
            let spec = PerturbationSpec::new(kind, amp, 11).unwrap();
            for &p in &s.triples {
                assert!(spec.perturbation_at(p).abs() <= amp, "{kind:?} at {p:?}");
            }
        }
    }

    #[test]
    fn perturbation_spec_validation() {
        assert!(PerturbationSpec::new(NoiseKind::UniformNoise, -1.0, 0).is_err());
        assert!(PerturbationSpec::new(NoiseKind::UniformNoise, f64::NAN, 0).is_err());
        let bad_bump = NoiseKind::SmoothBump {
            center_x: 1.0,
            center_y: 1.0,
            center_z: 1.0,
            width: 0.0,
        };
        assert!(PerturbationSpec::new(bad_bump, 1.0, 0).is_err());
        assert!(PerturbationSpec::new(
            NoiseKind::Oscillatory { omega: f64::INFINITY },
            1.0,
            0
        )
        .is_err());
    }

    #[test]
    fn perturbed_solution_is_base_plus_noise() {
        let base = SolutionFamily::power(1.0, 2.0).unwrap();
        let spec = PerturbationSpec::new(NoiseKind::Oscillatory { omega: 7.0 }, 1e-2, 0)
            .unwrap();
        let h = perturb(base, spec);
        let p = pt(1.0, 2.0, 3.0);
        let expect = base.value_at(p) + spec.perturbation_at(p);
        assert_eq!(h.eval(p).unwrap(), expect);
    }

    #[test]
    fn epsilon_caps_hold_for_uniform_noise() {
        let delta = 1e-2;
        let s = make_sample_set(&small_spec(), 3).unwrap();
        let base = SolutionFamily::power(1.5, 2.0).unwrap();
        let spec = PerturbationSpec::new(NoiseKind::UniformNoise, delta, 99).unwrap();
        let h = perturb(base, spec);
        let m = s
            .triples
            .iter()
            .map(|&p| base.value_at(p).abs())
            .fold(0.0f64, f64::max);
        let eps = measure_epsilons(&h, &s, Some(2.0)).unwrap();
        // Symmetry touches two evaluations, additivity three; the slack
        // absorbs rounding in the exact base member.
        assert!(eps.eps1 <= 2.0 * delta + slack(1.0 + m), "eps1 {}", eps.eps1);
        assert!(eps.eps2 <= 3.0 * delta + slack(1.0 + m), "eps2 {}", eps.eps2);
        assert!(eps.eps1 > 0.0);
    }

    #[test]
    fn epsilons_grow_with_amplitude() {
        let s = make_sample_set(&small_spec(), 3).unwrap();
        let base = SolutionFamily::shannon(1.0).unwrap();
        let mut last = EpsilonTriple::ZERO;
        for delta in [0.0, 1e-4, 1e-3, 1e-2, 1e-1] {
            let spec = PerturbationSpec::new(NoiseKind::UniformNoise, delta, 5).unwrap();
            let eps = measure_epsilons(&perturb(base, spec), &s, Some(1.0)).unwrap();
            let tol = slack(1.0 + eps.eps1.max(last.eps1));
            assert!(eps.eps1 + tol >= last.eps1, "delta {delta}");
            assert!(eps.eps2 + tol >= last.eps2, "delta {delta}");
            last = eps;
        }
    }

    #[test]
    fn exact_members_measure_near_zero() {
        let s = make_sample_set(&small_spec(), 3).unwrap();
        for member in [
            SolutionFamily::power(1.0, 2.0).unwrap(),
            SolutionFamily::shannon(-1.0).unwrap(),
        ] {
            let eps = measure_epsilons(&member, &s, Some(member.degree())).unwrap();
            let m = s
                .triples
                .iter()
                .map(|&p| member.value_at(p).abs())
                .fold(0.0f64, f64::max);
            assert!(eps.eps1 <= slack(1.0 + m));
            assert!(eps.eps2 <= slack(1.0 + m));
        }
    }

    #[test]
    fn verdict_serialization_is_camel_case() {
        assert_eq!(
            serde_json::to_string(&Verdict::WithinBound).unwrap(),
            "\"withinBound\""
        );
        assert_eq!(
            serde_json::to_string(&Verdict::ExceedsBound).unwrap(),
            "\"exceedsBound\""
        );
    }

    #[test]
    fn verify_exact_member_is_within_bound() {
        let s = make_sample_set(&small_spec(), 3).unwrap();
        let member = SolutionFamily::power(1.0, 2.0).unwrap();
        let report =
            verify_stability(&member, &s, &member, None, FitMetric::SupNorm, false).unwrap();
        assert_eq!(report.verdict, Verdict::WithinBound);
        assert_eq!(report.fit.residual_sup, 0.0);
        assert_eq!(report.alpha, 2.0);
    }

    #[test]
    fn verify_uniform_perturbation_is_within_bound() {
        let s = make_sample_set(&small_spec(), 3).unwrap();
        let base = SolutionFamily::shannon(1.0).unwrap();
        let spec = PerturbationSpec::new(NoiseKind::UniformNoise, 1e-3, 17).unwrap();
        let h = perturb(base, spec);
        let report =
            verify_stability(&h, &s, &base, Some(1.0), FitMetric::SupNorm, false).unwrap();
        assert_eq!(report.verdict, Verdict::WithinBound, "{report:?}");
        assert!(report.bound > 0.0);
    }

    #[test]
    fn verify_rejects_regime_mismatch() {
        let s = make_sample_set(&small_spec(), 3).unwrap();
        let member = SolutionFamily::shannon(1.0).unwrap();
        assert!(matches!(
            verify_stability(&member, &s, &member, Some(2.0), FitMetric::SupNorm, false),
            Err(Error::RegimeMismatch { .. })
        ));
    }

    #[test]
    fn suite_holds_for_seeded_candidates_and_adversary() {
        let s = make_sample_set(&small_spec(), 3).unwrap();
        let report = run_property_suite(&s, 42, 2, 1e-3).unwrap();
        // 3 regimes * 2 candidates + the adversary, 4 checks each.
        assert_eq!(report.candidates, 7);
        assert_eq!(report.lines.len(), 28);
        assert!(report.all_hold, "{:#?}", report.lines);
    }

    #[test]
    fn suite_is_deterministic() {
        let s = make_sample_set(&small_spec(), 3).unwrap();
        let a = run_property_suite(&s, 9, 1, 1e-3).unwrap();
        let b = run_property_suite(&s, 9, 1, 1e-3).unwrap();
        for (la, lb) in a.lines.iter().zip(&b.lines) {
            assert_eq!(la.candidate, lb.candidate);
            assert_eq!(la.lhs.to_bits(), lb.lhs.to_bits());
            assert_eq!(la.rhs.to_bits(), lb.rhs.to_bits());
        }
    }

    fn wild(a: f64, b: f64, w: f64) -> impl Fn(Point3) -> f64 + Clone {
        move |p: Point3| {
            a * p.x() + b * (p.y() * w).cos() * (p.z() + 0.5).sqrt() - a * p.sum().ln_1p()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn all_checks_hold_for_arbitrary_candidates(
            a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.5f64..4.0, seed in 0u64..1000,
        ) {
            // The four suite inequalities hold unconditionally relative to
            // the measured defects, so any candidate must pass.
            let spec = SampleSpec {
                grid_lo: 0.3,
                grid_hi: 3.0,
                points_per_axis: 3,
                t_lo: 0.5,
                t_hi: 2.0,
                t_count: 2,
                ..SampleSpec::default()
            };
            let s = make_sample_set(&spec, seed).unwrap();
            let h = TernaryClosure(wild(a, b, w));
            prop_assert!(check_split_consistency(&h, &s.triples).unwrap().holds);
            prop_assert!(check_cocycle_bound(&h, &s.triples).unwrap().holds);
            prop_assert!(check_skew(&h, &s.triples).unwrap().holds);
            prop_assert!(check_flatness(&h, &s).unwrap().holds);
        }
    }
}
