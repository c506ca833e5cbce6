//! Domain model: validated points, coordinate permutations, the exact
//! solution families, evaluable function traits, and deterministic sampling.
//!
//! The domain is `D = { (x, y, z) : x, y, z >= 0, x + y + z > 0 }`; its
//! interior requires all three coordinates strictly positive. Every function
//! studied here is total on `D`, with the convention that a term whose single
//! argument is exactly zero contributes zero (the usual `0 ln 0 = 0` rule,
//! applied uniformly to all families).

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A point of the closed domain: nonnegative coordinates, positive sum.
///
/// Negative zero is normalized to positive zero at construction so equal
/// points always carry equal bit patterns (tabulated lookups and seeded
/// noise both key on the bits).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point3 {
    x: f64,
    y: f64,
    z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        for v in [x, y, z] {
            if !v.is_finite() {
                return Err(Error::InvalidPoint {
                    x,
                    y,
                    z,
                    reason: "coordinates must be finite",
                });
            }
            if v < 0.0 {
                return Err(Error::InvalidPoint {
                    x,
                    y,
                    z,
                    reason: "coordinates must be nonnegative",
                });
            }
        }
        if x + y + z <= 0.0 {
            return Err(Error::InvalidPoint {
                x,
                y,
                z,
                reason: "coordinate sum must be positive",
            });
        }
        Ok(Self {
            x: normalize_zero(x),
            y: normalize_zero(y),
            z: normalize_zero(z),
        })
    }

    #[must_use]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[must_use]
    pub fn y(&self) -> f64 {
        self.y
    }

    #[must_use]
    pub fn z(&self) -> f64 {
        self.z
    }

    #[must_use]
    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[must_use]
    pub fn sum(&self) -> f64 {
        self.x + self.y + self.z
    }

    /// True when every coordinate is strictly positive.
    #[must_use]
    pub fn is_interior(&self) -> bool {
        self.x > 0.0 && self.y > 0.0 && self.z > 0.0
    }

    /// Strict lexicographic order on (x, y, z); used only to break ties
    /// deterministically when two samples achieve the same residual.
    #[must_use]
    pub fn lex_less(&self, other: &Self) -> bool {
        self.coords() < other.coords()
    }
}

fn normalize_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// One of the six permutations of the three coordinate slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Permutation3 {
    map: [usize; 3],
}

impl Permutation3 {
    pub const IDENTITY: Self = Self { map: [0, 1, 2] };

    /// All six permutations, identity first.
    pub const ALL: [Self; 6] = [
        Self { map: [0, 1, 2] },
        Self { map: [0, 2, 1] },
        Self { map: [1, 0, 2] },
        Self { map: [1, 2, 0] },
        Self { map: [2, 0, 1] },
        Self { map: [2, 1, 0] },
    ];

    /// Applies the permutation; permuting coordinates preserves the domain
    /// invariants, so no re-validation is needed.
    #[must_use]
    pub fn apply(self, p: Point3) -> Point3 {
        let c = p.coords();
        Point3 {
            x: c[self.map[0]],
            y: c[self.map[1]],
            z: c[self.map[2]],
        }
    }

    /// Composition satisfying `a.compose(b).apply(p) == a.apply(b.apply(p))`.
    #[must_use]
    pub fn compose(self, other: Self) -> Self {
        Self {
            map: [
                other.map[self.map[0]],
                other.map[self.map[1]],
                other.map[self.map[2]],
            ],
        }
    }

    #[must_use]
    pub fn is_identity(self) -> bool {
        self.map == [0, 1, 2]
    }
}

/// `u^alpha` with the convention that a zero argument contributes zero.
#[must_use]
pub fn pow_or_zero(u: f64, alpha: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.powf(alpha)
    }
}

/// `u ln u` with `0 ln 0 = 0`.
#[must_use]
pub fn xlnx(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.ln()
    }
}

/// Parameters of a solution family member.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `c * ((x+y+z)^alpha - x^alpha - y^alpha - z^alpha)`, zero terms dropped.
    Power { c: f64, alpha: f64 },
    /// `c * ((x+y+z) ln(x+y+z) - x ln x - y ln y - z ln z)`, zero terms dropped.
    Shannon { c: f64 },
    /// The constant function `a`.
    Constant { a: f64 },
}

/// A member of one of the three exact solution families.
///
/// Values are constructed only through the checked constructors, so a held
/// member always satisfies the family constraints (in particular a power
/// member never carries exponent one).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SolutionFamily {
    kind: FamilyKind,
}

impl SolutionFamily {
    /// Power member `c * ((x+y+z)^alpha - x^alpha - y^alpha - z^alpha)`.
    ///
    /// The exponent one is rejected: the bracket vanishes identically there,
    /// and the degree-1 regime is covered by the shannon family instead.
    pub fn power(c: f64, alpha: f64) -> Result<Self> {
        require_finite("c", c)?;
        require_finite("alpha", alpha)?;
        if alpha == 1.0 {
            return Err(Error::PowerAlphaOne);
        }
        Ok(Self {
            kind: FamilyKind::Power { c, alpha },
        })
    }

    /// Shannon member built from `phi(u) = c u ln u`.
    pub fn shannon(c: f64) -> Result<Self> {
        require_finite("c", c)?;
        Ok(Self {
            kind: FamilyKind::Shannon { c },
        })
    }

    /// Constant member `a`.
    pub fn constant(a: f64) -> Result<Self> {
        require_finite("a", a)?;
        Ok(Self {
            kind: FamilyKind::Constant { a },
        })
    }

    #[must_use]
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    #[must_use]
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Power { .. } => "power",
            FamilyKind::Shannon { .. } => "shannon",
            FamilyKind::Constant { .. } => "constant",
        }
    }

    /// Homogeneity degree of the member's two-variable restriction:
    /// `alpha` for power, 1 for shannon, 0 for constant.
    #[must_use]
    pub fn degree(&self) -> f64 {
        match self.kind {
            FamilyKind::Power { alpha, .. } => alpha,
            FamilyKind::Shannon { .. } => 1.0,
            FamilyKind::Constant { .. } => 0.0,
        }
    }

    /// Total evaluation on the closed domain.
    #[must_use]
    pub fn value_at(&self, p: Point3) -> f64 {
        let s = p.sum();
        match self.kind {
            FamilyKind::Power { c, alpha } => {
                c * (pow_or_zero(s, alpha)
                    - pow_or_zero(p.x(), alpha)
                    - pow_or_zero(p.y(), alpha)
                    - pow_or_zero(p.z(), alpha))
            }
            FamilyKind::Shannon { c } => {
                c * (xlnx(s) - xlnx(p.x()) - xlnx(p.y()) - xlnx(p.z()))
            }
            FamilyKind::Constant { a } => a,
        }
    }
}

fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteParameter { name, value })
    }
}

/// An evaluable map on the closed domain.
///
/// Evaluation is fallible because some representations are only partially
/// defined (a tabulated function knows nothing outside its table).
pub trait TernaryFn {
    fn eval(&self, p: Point3) -> Result<f64>;
}

impl TernaryFn for SolutionFamily {
    fn eval(&self, p: Point3) -> Result<f64> {
        Ok(self.value_at(p))
    }
}

impl<T: TernaryFn + ?Sized> TernaryFn for &T {
    fn eval(&self, p: Point3) -> Result<f64> {
        (**self).eval(p)
    }
}

/// Adapter turning a plain closure into a [`TernaryFn`].
pub struct TernaryClosure<F>(pub F);

impl<F: Fn(Point3) -> f64> TernaryFn for TernaryClosure<F> {
    fn eval(&self, p: Point3) -> Result<f64> {
        Ok((self.0)(p))
    }
}

/// An evaluable map on the open positive quadrant.
pub trait BinaryFn {
    fn eval(&self, x: f64, y: f64) -> Result<f64>;
}

impl<T: BinaryFn + ?Sized> BinaryFn for &T {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        (**self).eval(x, y)
    }
}

/// Adapter turning a plain closure into a [`BinaryFn`].
pub struct BinaryClosure<F>(pub F);

impl<F: Fn(f64, f64) -> f64> BinaryFn for BinaryClosure<F> {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok((self.0)(x, y))
    }
}

/// The two-variable restriction `(x, y) -> H(x, y, 0)`.
pub struct Restriction<H> {
    h: H,
}

impl<H> Restriction<H> {
    pub fn new(h: H) -> Self {
        Self { h }
    }
}

impl<H: TernaryFn> BinaryFn for Restriction<H> {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !x.is_finite() || !y.is_finite() || x <= 0.0 || y <= 0.0 {
            return Err(Error::InvalidPair { x, y });
        }
        self.h.eval(Point3::new(x, y, 0.0)?)
    }
}

/// Measured or hypothesized defect magnitudes, in the order
/// (symmetry, additivity, homogeneity).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpsilonTriple {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
}

impl EpsilonTriple {
    pub const ZERO: Self = Self {
        eps1: 0.0,
        eps2: 0.0,
        eps3: 0.0,
    };

    pub fn new(eps1: f64, eps2: f64, eps3: f64) -> Result<Self> {
        for (name, v) in [("eps1", eps1), ("eps2", eps2), ("eps3", eps3)] {
            if !v.is_finite() {
                return Err(Error::NonFiniteParameter { name, value: v });
            }
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(Self { eps1, eps2, eps3 })
    }
}

/// Defect of the product rule `phi(x y) = x phi(y) + y phi(x)` at one pair.
///
/// The rule characterizes `phi(u) = c u ln u` among measurable functions; it
/// is exposed generically so that tests can also feed deliberately wrong
/// `phi` candidates through the same code path.
pub fn derivation_defect(phi: impl Fn(f64) -> f64, x: f64, y: f64) -> f64 {
    (phi(x * y) - x * phi(y) - y * phi(x)).abs()
}

/// Outcome of [`check_derivation`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivationCheck {
    /// Largest absolute defect seen over the sample pairs.
    pub max_defect: f64,
    /// Largest defect scaled by `1 + |phi(x y)|`.
    pub max_scaled_defect: f64,
    pub pass: bool,
}

/// Verifies the product rule for `phi(u) = c u ln u` on the given pairs,
/// comparing each defect against `tol * (1 + |phi(x y)|)`.
pub fn check_derivation(c: f64, sample_pairs: &[(f64, f64)], tol: f64) -> Result<DerivationCheck> {
    require_finite("c", c)?;
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if sample_pairs.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let phi = |u: f64| c * xlnx(u);
    let mut max_defect = 0.0f64;
    let mut max_scaled = 0.0f64;
    for &(x, y) in sample_pairs {
        if !x.is_finite() || !y.is_finite() || x <= 0.0 || y <= 0.0 {
            return Err(Error::InvalidPair { x, y });
        }
        let d = derivation_defect(phi, x, y);
        let scaled = d / (1.0 + phi(x * y).abs());
        max_defect = max_defect.max(d);
        max_scaled = max_scaled.max(scaled);
    }
    Ok(DerivationCheck {
        max_defect,
        max_scaled_defect: max_scaled,
        pass: max_scaled <= tol,
    })
}

/// Deterministic sampling plan: a log-spaced lattice in the interior, an
/// optional seeded Monte Carlo batch, and a log-spaced set of scale factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSpec {
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub points_per_axis: usize,
    pub mc_count: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_count: usize,
}

impl Default for SampleSpec {
    /// 16 points per axis over `[1e-3, 1e3]` (4096 triples) and 9 scale
    /// factors over `[1e-2, 1e2]`.
    fn default() -> Self {
        Self {
            grid_lo: 1e-3,
            grid_hi: 1e3,
            points_per_axis: 16,
            mc_count: 0,
            t_lo: 1e-2,
            t_hi: 1e2,
            t_count: 9,
        }
    }
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("grid_lo", self.grid_lo),
            ("grid_hi", self.grid_hi),
            ("t_lo", self.t_lo),
            ("t_hi", self.t_hi),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.grid_lo > self.grid_hi {
            return Err(Error::InvalidParameter(format!(
                "grid_lo ({}) must not exceed grid_hi ({})",
                self.grid_lo, self.grid_hi
            )));
        }
        if self.t_lo > self.t_hi {
            return Err(Error::InvalidParameter(format!(
                "t_lo ({}) must not exceed t_hi ({})",
                self.t_lo, self.t_hi
            )));
        }
        if self.points_per_axis == 0 && self.mc_count == 0 {
            return Err(Error::EmptySampleSet);
        }
        if self.t_count == 0 {
            return Err(Error::InvalidParameter(
                "t_count must be at least 1".to_owned(),
            ));
        }
        Ok(())
    }
}

/// A concrete sample set, reproducible bit-for-bit from `(spec, seed)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSet {
    pub spec: SampleSpec,
    pub seed: u64,
    /// Lattice triples in lexicographic axis order, then Monte Carlo triples
    /// in draw order. All triples are interior.
    pub triples: Vec<Point3>,
    /// Log-spaced scale factors, ascending.
    pub scale_factors: Vec<f64>,
}

/// `n` log-spaced values on `[lo, hi]`; endpoints are exact.
#[must_use]
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Builds the deterministic sample set for `(spec, seed)`.
///
/// The lattice is the cube of a log-spaced axis, enumerated with x slowest
/// and z fastest; Monte Carlo triples are log-uniform over the same cube and
/// depend only on the seed. Regenerating with equal inputs yields equal bits.
pub fn make_sample_set(spec: &SampleSpec, seed: u64) -> Result<SampleSet> {
    spec.validate()?;
    let axis = log_spaced(spec.grid_lo, spec.grid_hi, spec.points_per_axis);
    let mut triples =
        Vec::with_capacity(axis.len().pow(3).saturating_add(spec.mc_count));
    for &x in &axis {
        for &y in &axis {
            for &z in &axis {
                triples.push(Point3::new(x, y, z)?);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (llo, lhi) = (spec.grid_lo.ln(), spec.grid_hi.ln());
    for _ in 0..spec.mc_count {
        let mut c = [0.0; 3];
        for v in &mut c {
            *v = (llo + (lhi - llo) * rng.gen::<f64>()).exp();
        }
        triples.push(Point3::new(c[0], c[1], c[2])?);
    }
    if triples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let scale_factors = log_spaced(spec.t_lo, spec.t_hi, spec.t_count);
    Ok(SampleSet {
        spec: spec.clone(),
        seed,
        triples,
        scale_factors,
    })
}
