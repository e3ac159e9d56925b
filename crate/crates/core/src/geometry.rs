//! Unit vectors in R³ and violation witnesses for the Malus-law correlations.
//!
//! Given two preparation axes `a` and `b` and a measurement direction `α`,
//! spin-½ statistics fix the three correlations ⟨u,x⟩ = a·α, ⟨v,x⟩ = b·α and
//! ⟨u,v⟩ = a·b. Placing (u, v, x) into the three slots of
//! `|⟨f,g⟩ − ⟨f,h⟩| + ⟨g,h⟩` can be done three essentially different ways
//! (which sequence sits in the shared `f` slot); a witness is a direction for
//! which one of those placements exceeds 1.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// |a·b| at or above `1 − COLINEAR_TOL` counts as colinear.
pub const COLINEAR_TOL: f64 = 1e-9;

/// |a·b| at or below this is treated as a right angle.
pub const RIGHT_ANGLE_TOL: f64 = 1e-9;

/// Grid step of the in-plane search, in degrees.
pub const GRID_STEP_DEG: f64 = 0.1;

/// Golden-section iterations after the grid search.
pub const GOLDEN_ITERATIONS: usize = 30;

#[derive(Clone, Copy, PartialEq)]
pub struct UnitVector3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVector3 {
    /// Normalizes `(x, y, z)`.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::DegenerateVector);
        }
        Ok(Self { x: x / norm, y: y / norm, z: z / norm })
    }

    pub fn from_array(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    pub const X: Self = Self { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Self = Self { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Self = Self { x: 0.0, y: 0.0, z: 1.0 };

    /// `cos(φ)·e1 + sin(φ)·e2` for an orthonormal pair `(e1, e2)`.
    pub fn in_plane(e1: &Self, e2: &Self, phi: f64) -> Result<Self> {
        let (c, s) = (phi.cos(), phi.sin());
        Self::new(c * e1.x + s * e2.x, c * e1.y + s * e2.y, c * e1.z + s * e2.z)
    }

    /// Unit vector in the xy-plane at `deg` degrees from +x.
    pub fn from_xy_degrees(deg: f64) -> Self {
        let r = deg.to_radians();
        Self::new(r.cos(), r.sin(), 0.0).expect("unit circle point")
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> [f64; 3] {
        [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ]
    }

    /// det(self, b, c).
    pub fn triple_product(&self, b: &Self, c: &Self) -> f64 {
        let [x, y, z] = b.cross(c);
        self.x * x + self.y * y + self.z * z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn neg(&self) -> Self {
        Self { x: -self.x, y: -self.y, z: -self.z }
    }

    /// Component of `self` orthogonal to `axis`, normalized.
    pub fn orthogonalized_against(&self, axis: &Self) -> Result<Self> {
        let d = self.dot(axis);
        Self::new(self.x - d * axis.x, self.y - d * axis.y, self.z - d * axis.z)
    }

    /// Some unit vector orthogonal to `self`.
    pub fn any_orthogonal(&self) -> Self {
        let helper = if self.x.abs() < 0.9 { Self::X } else { Self::Y };
        helper.orthogonalized_against(self).expect("helper is not parallel")
    }

    /// Rodrigues rotation of `self` about `axis` by `angle` radians.
    pub fn rotated(&self, axis: &Self, angle: f64) -> Self {
        let (c, s) = (angle.cos(), angle.sin());
        let k = axis;
        let [cx, cy, cz] = k.cross(self);
        let kd = k.dot(self) * (1.0 - c);
        Self::new(
            self.x * c + cx * s + k.x * kd,
            self.y * c + cy * s + k.y * kd,
            self.z * c + cz * s + k.z * kd,
        )
        .expect("rotation preserves norm")
    }
}

impl fmt::Debug for UnitVector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.x, self.y, self.z)
    }
}

impl fmt::Display for UnitVector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6},{:.6},{:.6}]", self.x, self.y, self.z)
    }
}

impl Serialize for UnitVector3 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnitVector3 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = <[f64; 3]>::deserialize(deserializer)?;
        Self::from_array(v).map_err(serde::de::Error::custom)
    }
}

/// Smallest angle between two unit vectors, in [0, π].
pub fn angle_between(a: &UnitVector3, b: &UnitVector3) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// Which of u (values along a), v (values along b) or x (measured along α)
/// occupies the shared `f` slot of `|⟨f,g⟩ − ⟨f,h⟩| + ⟨g,h⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assignment {
    /// f = x, g = u, h = v: |a·α − b·α| + a·b
    PivotX,
    /// f = u, g = x, h = v: |a·α − a·b| + b·α
    PivotU,
    /// f = v, g = u, h = x: |a·b − b·α| + a·α
    PivotV,
}

impl Assignment {
    pub const ALL: [Assignment; 3] = [Assignment::PivotX, Assignment::PivotU, Assignment::PivotV];

    /// Evaluates this placement for correlations ⟨u,x⟩, ⟨v,x⟩, ⟨u,v⟩.
    pub fn evaluate(self, ux: f64, vx: f64, uv: f64) -> f64 {
        match self {
            Assignment::PivotX => (ux - vx).abs() + uv,
            Assignment::PivotU => (ux - uv).abs() + vx,
            Assignment::PivotV => (uv - vx).abs() + ux,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Assignment::PivotX => "pivot-x",
            Assignment::PivotU => "pivot-u",
            Assignment::PivotV => "pivot-v",
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MalusEvaluation {
    /// Values in [`Assignment::ALL`] order.
    pub values: [f64; 3],
    pub max_value: f64,
    pub assignment: Assignment,
}

/// All three Boole–Bell placements under Malus-law correlations; ties go to
/// the first maximum in [`Assignment::ALL`] order.
pub fn malus_lhs_all_assignments(a: &UnitVector3, b: &UnitVector3, alpha: &UnitVector3) -> MalusEvaluation {
    let (ux, vx, uv) = (a.dot(alpha), b.dot(alpha), a.dot(b));
    let values = Assignment::ALL.map(|s| s.evaluate(ux, vx, uv));
    let mut best = 0;
    for k in 1..3 {
        if values[k] > values[best] {
            best = k;
        }
    }
    MalusEvaluation { values, max_value: values[best], assignment: Assignment::ALL[best] }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseLabel {
    Acute,
    Right,
    Obtuse,
}

impl CaseLabel {
    pub fn classify(a: &UnitVector3, b: &UnitVector3) -> Self {
        let d = a.dot(b);
        if d.abs() <= RIGHT_ANGLE_TOL {
            CaseLabel::Right
        } else if d > 0.0 {
            CaseLabel::Acute
        } else {
            CaseLabel::Obtuse
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CaseLabel::Acute => "acute",
            CaseLabel::Right => "right",
            CaseLabel::Obtuse => "obtuse",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which axis the acute/obtuse witness is taken orthogonal to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    OrthogonalToA,
    OrthogonalToB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessReport {
    pub alpha: UnitVector3,
    pub case_label: CaseLabel,
    /// Angle between a and b, radians.
    pub theta: f64,
    pub lhs_value: f64,
    pub assignment: Assignment,
}

fn check_axes(a: &UnitVector3, b: &UnitVector3) -> Result<()> {
    let dot = a.dot(b);
    if dot.abs() >= 1.0 - COLINEAR_TOL {
        return Err(Error::ColinearAxes { dot });
    }
    Ok(())
}

fn report(a: &UnitVector3, b: &UnitVector3, alpha: UnitVector3) -> WitnessReport {
    let eval = malus_lhs_all_assignments(a, b, &alpha);
    WitnessReport {
        alpha,
        case_label: CaseLabel::classify(a, b),
        theta: angle_between(a, b),
        lhs_value: eval.max_value,
        assignment: eval.assignment,
    }
}

/// The three-case construction: α orthogonal to `a` in the plane of `a` and
/// `b`, on the side of `b` (acute and obtuse θ), or along the bisector of
/// `a` and `b` when θ is a right angle.
pub fn paper_witness(a: &UnitVector3, b: &UnitVector3) -> Result<WitnessReport> {
    paper_witness_oriented(a, b, Orientation::OrthogonalToA)
}

pub fn paper_witness_oriented(a: &UnitVector3, b: &UnitVector3, orientation: Orientation) -> Result<WitnessReport> {
    check_axes(a, b)?;
    let alpha = match CaseLabel::classify(a, b) {
        CaseLabel::Right => UnitVector3::new(a.x + b.x, a.y + b.y, a.z + b.z)?,
        CaseLabel::Acute | CaseLabel::Obtuse => match orientation {
            Orientation::OrthogonalToA => b.orthogonalized_against(a)?,
            Orientation::OrthogonalToB => a.orthogonalized_against(b)?,
        },
    };
    Ok(report(a, b, alpha))
}

/// In-plane optimum of a single placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementOptimum {
    pub assignment: Assignment,
    pub alpha: UnitVector3,
    /// In-plane angle of α measured from `a` towards `b`, radians.
    pub phi: f64,
    pub value: f64,
}

struct SpanPlane {
    e1: UnitVector3,
    e2: UnitVector3,
}

impl SpanPlane {
    fn new(a: &UnitVector3, b: &UnitVector3) -> Result<Self> {
        Ok(Self { e1: *a, e2: b.orthogonalized_against(a)? })
    }

    fn point(&self, phi: f64) -> UnitVector3 {
        UnitVector3::in_plane(&self.e1, &self.e2, phi).expect("orthonormal basis")
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iterations: usize) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iterations {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Maximizes one placement over α in the plane of `a` and `b`: a 0.1° grid
/// over the full circle followed by golden-section refinement around the
/// first grid maximum.
pub fn optimize_assignment(a: &UnitVector3, b: &UnitVector3, assignment: Assignment) -> Result<PlacementOptimum> {
    check_axes(a, b)?;
    let plane = SpanPlane::new(a, b)?;
    let value_at = |phi: f64| {
        let alpha = plane.point(phi);
        assignment.evaluate(a.dot(&alpha), b.dot(&alpha), a.dot(b))
    };

    let step = GRID_STEP_DEG.to_radians();
    let steps = (360.0 / GRID_STEP_DEG).round() as usize;
    let mut best_phi = 0.0;
    let mut best_value = f64::NEG_INFINITY;
    for k in 0..steps {
        let phi = k as f64 * step;
        let v = value_at(phi);
        if v > best_value {
            best_value = v;
            best_phi = phi;
        }
    }

    let refined = golden_section_max(value_at, best_phi - step, best_phi + step, GOLDEN_ITERATIONS);
    let refined_value = value_at(refined);
    if refined_value > best_value {
        best_value = refined_value;
        best_phi = refined;
    }
    let phi = best_phi.rem_euclid(TAU);
    Ok(PlacementOptimum { assignment, alpha: plane.point(phi), phi, value: best_value })
}

/// Numerically best witness over the plane of `a` and `b`, across all three
/// placements.
pub fn optimal_witness(a: &UnitVector3, b: &UnitVector3) -> Result<WitnessReport> {
    let mut best: Option<PlacementOptimum> = None;
    for assignment in Assignment::ALL {
        let opt = optimize_assignment(a, b, assignment)?;
        if best.is_none_or(|b| opt.value > b.value) {
            best = Some(opt);
        }
    }
    let best = best.expect("three placements");
    Ok(WitnessReport {
        alpha: best.alpha,
        case_label: CaseLabel::classify(a, b),
        theta: angle_between(a, b),
        lhs_value: best.value,
        assignment: best.assignment,
    })
}

/// Closed-form value of the three-case construction at angle θ: cosθ + sinθ
/// for acute θ, √2 at a right angle and sinθ + |cosθ| for obtuse θ.
pub fn paper_witness_closed_form(theta: f64) -> f64 {
    if theta.cos().abs() <= RIGHT_ANGLE_TOL {
        std::f64::consts::SQRT_2
    } else {
        theta.sin() + theta.cos().abs()
    }
}
