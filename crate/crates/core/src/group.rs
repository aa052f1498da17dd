//! Compact group arithmetic: the d-torus T^d and SU(2).
//!
//! Conventions
//! -----------
//! * **T^d** — elements are angle vectors θ ∈ [0, 2π)^d; the Lie algebra
//!   basis is the coordinate basis ∂/∂θ_i, orthonormal for the flat metric.
//!   exp is reduction mod 2π, log is the principal angle in (−π, π].
//! * **SU(2)** — elements are unit quaternions q = (w, x, y, z), identified
//!   with U(q) = w·I − i(x σ₁ + y σ₂ + z σ₃) so that quaternion
//!   multiplication agrees with matrix multiplication. The algebra basis is
//!   X_j = −i σ_j / 2, orthonormal under ⟨A, B⟩ = −2 tr(AB), with
//!   [X₁, X₂] = X₃ (cyclic). Then
//!   exp(Σ v_j X_j) ↔ quaternion (cos(|v|/2), sin(|v|/2)·v̂),
//!   and the principal logarithm has |log g| = 2·atan2(|q_vec|, q_w) ∈ [0, 2π).
//! * **Charts** — canonical (exponential) coordinates x(g) = log g are used
//!   on the ball U = { |x(g)| < radius } with radius < π, where the log is
//!   single-valued on both groups and x(g⁻¹) = −x(g).
//! * **Haar quadrature** — T^d uses the uniform tensor grid with `resolution`
//!   points per axis (total weight 1), which integrates characters e^{i n·θ}
//!   exactly whenever no component of n is a nonzero multiple of the
//!   resolution. SU(2) uses the Euler factorization
//!   g(α, β, γ) = exp(α X₃) · exp(β X₂) · exp(γ X₃),
//!   α ∈ [0, 2π), β ∈ [0, π], γ ∈ [0, 4π) (the γ range covers the double
//!   cover), with Haar measure sin β dα dβ dγ / (16π²). The rule is uniform
//!   in α and γ and Gauss–Legendre in cos β with `resolution` nodes per axis;
//!   it integrates products of two matrix coefficients of weight ≤ k exactly
//!   once `resolution ≥ 2k + 3`.

use crate::error::{LieflowError, Result};
use crate::linalg::{gauss_legendre, CMat};
use num_complex::Complex64;
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// Identifies a supported compact group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupId {
    Torus { dim: usize },
    Su2,
}

impl GroupId {
    /// Dimension of the Lie algebra (= manifold dimension).
    pub fn algebra_dim(&self) -> usize {
        match self {
            GroupId::Torus { dim } => *dim,
            GroupId::Su2 => 3,
        }
    }

    /// Growth order m of the dual: dimensions satisfy d_λ ≤ C·|λ|^m
    /// (0 for tori, 1 for SU(2)).
    pub fn dual_growth_order(&self) -> u32 {
        match self {
            GroupId::Torus { .. } => 0,
            GroupId::Su2 => 1,
        }
    }

    /// Rank r governing dual summability: Σ |λ|^{-2s} converges iff 2s > r.
    pub fn rank(&self) -> usize {
        match self {
            GroupId::Torus { dim } => *dim,
            GroupId::Su2 => 1,
        }
    }
}

impl std::fmt::Display for GroupId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupId::Torus { dim } => write!(f, "T^{dim}"),
            GroupId::Su2 => write!(f, "SU(2)"),
        }
    }
}

/// Tangent vector at the identity, expressed in the fixed orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVector {
    pub group: GroupId,
    pub coeffs: Vec<f64>,
}

impl AlgebraVector {
    pub fn new(group: GroupId, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != group.algebra_dim() {
            return Err(LieflowError::GroupMismatch {
                left: group.to_string(),
                right: format!("{}-vector", coeffs.len()),
            });
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(LieflowError::NonFinite);
        }
        Ok(Self { group, coeffs })
    }

    pub fn zero(group: GroupId) -> Self {
        Self {
            group,
            coeffs: vec![0.0; group.algebra_dim()],
        }
    }

    /// Euclidean norm in the orthonormal basis.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ElementData {
    Torus(Vec<f64>),
    Su2([f64; 4]), // (w, x, y, z), unit norm
}

/// A group element. Torus elements store reduced angles; SU(2) elements
/// store unit quaternions (renormalized after every product) and materialize
/// the 2×2 complex matrix only on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    group: GroupId,
    data: ElementData,
}

fn reduce_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r == TAU {
        0.0
    } else {
        r
    }
}

/// Principal angle in (-π, π].
pub(crate) fn principal_angle(t: f64) -> f64 {
    let r = (t + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

impl GroupElement {
    pub fn identity(group: GroupId) -> Self {
        match group {
            GroupId::Torus { dim } => Self {
                group,
                data: ElementData::Torus(vec![0.0; dim]),
            },
            GroupId::Su2 => Self {
                group,
                data: ElementData::Su2([1.0, 0.0, 0.0, 0.0]),
            },
        }
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    /// Torus angles in [0, 2π). Panics on SU(2) elements.
    pub fn angles(&self) -> &[f64] {
        match &self.data {
            ElementData::Torus(a) => a,
            _ => panic!("angles() called on a non-torus element"),
        }
    }

    /// Quaternion components (w, x, y, z). Panics on torus elements.
    pub fn quaternion(&self) -> [f64; 4] {
        match &self.data {
            ElementData::Su2(q) => *q,
            _ => panic!("quaternion() called on a non-SU(2) element"),
        }
    }

    /// Torus element from raw angles (reduced mod 2π).
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        if angles.iter().any(|v| !v.is_finite()) {
            return Err(LieflowError::NonFinite);
        }
        Ok(Self {
            group: GroupId::Torus { dim: angles.len() },
            data: ElementData::Torus(angles.iter().map(|&t| reduce_angle(t)).collect()),
        })
    }

    /// SU(2) element from a quaternion (normalized here).
    pub fn from_quaternion(q: [f64; 4]) -> Result<Self> {
        if q.iter().any(|v| !v.is_finite()) {
            return Err(LieflowError::NonFinite);
        }
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if n < 1e-14 {
            return Err(LieflowError::NonFinite);
        }
        Ok(Self {
            group: GroupId::Su2,
            data: ElementData::Su2([q[0] / n, q[1] / n, q[2] / n, q[3] / n]),
        })
    }

    /// Exponential map from the algebra.
    pub fn exp(v: &AlgebraVector) -> Self {
        match v.group {
            GroupId::Torus { .. } => Self {
                group: v.group,
                data: ElementData::Torus(v.coeffs.iter().map(|&t| reduce_angle(t)).collect()),
            },
            GroupId::Su2 => {
                let n = v.norm();
                let half = 0.5 * n;
                // sin(|v|/2)/|v| with a series branch near 0
                let factor = if n < 1e-8 {
                    0.5 * (1.0 - half * half / 6.0)
                } else {
                    half.sin() / n
                };
                let q = [
                    half.cos(),
                    factor * v.coeffs[0],
                    factor * v.coeffs[1],
                    factor * v.coeffs[2],
                ];
                Self {
                    group: GroupId::Su2,
                    data: ElementData::Su2(q),
                }
            }
        }
    }

    /// Principal logarithm. Always defined; the torus branch returns the
    /// per-axis principal angle, the SU(2) branch the rotation vector with
    /// |log g| ∈ [0, 2π). Chart membership is checked by `canonical_coords`.
    pub fn log(&self) -> AlgebraVector {
        match &self.data {
            ElementData::Torus(a) => AlgebraVector {
                group: self.group,
                coeffs: a.iter().map(|&t| principal_angle(t)).collect(),
            },
            ElementData::Su2(q) => {
                let vec_norm = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
                let angle = 2.0 * vec_norm.atan2(q[0]);
                let coeffs = if vec_norm < 1e-300 {
                    // identity (or the antipode, which no chart contains)
                    vec![0.0, 0.0, 0.0]
                } else {
                    let s = angle / vec_norm;
                    vec![s * q[1], s * q[2], s * q[3]]
                };
                AlgebraVector {
                    group: self.group,
                    coeffs,
                }
            }
        }
    }

    /// Geodesic distance from the identity, |log g|.
    pub fn log_norm(&self) -> f64 {
        match &self.data {
            ElementData::Torus(_) => self.log().norm(),
            ElementData::Su2(q) => {
                let vec_norm = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
                2.0 * vec_norm.atan2(q[0])
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.group, other.group,
            "group mismatch in multiplication"
        );
        match (&self.data, &other.data) {
            (ElementData::Torus(a), ElementData::Torus(b)) => Self {
                group: self.group,
                data: ElementData::Torus(
                    a.iter().zip(b).map(|(&x, &y)| reduce_angle(x + y)).collect(),
                ),
            },
            (ElementData::Su2(p), ElementData::Su2(q)) => {
                let mut r = [
                    p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
                    p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
                    p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
                    p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
                ];
                let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + r[3] * r[3]).sqrt();
                for v in &mut r {
                    *v /= n;
                }
                Self {
                    group: self.group,
                    data: ElementData::Su2(r),
                }
            }
            _ => unreachable!(),
        }
    }

    /// Checked multiplication (the panicking `mul` is preferred internally).
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(LieflowError::GroupMismatch {
                left: self.group.to_string(),
                right: other.group.to_string(),
            });
        }
        Ok(self.mul(other))
    }

    pub fn inverse(&self) -> Self {
        match &self.data {
            ElementData::Torus(a) => Self {
                group: self.group,
                data: ElementData::Torus(a.iter().map(|&t| reduce_angle(-t)).collect()),
            },
            ElementData::Su2(q) => Self {
                group: self.group,
                data: ElementData::Su2([q[0], -q[1], -q[2], -q[3]]),
            },
        }
    }

    /// The 2×2 unitary U(q) = w·I − i(x σ₁ + y σ₂ + z σ₃) for SU(2) elements.
    pub fn su2_matrix(&self) -> CMat {
        let q = self.quaternion();
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = Complex64::new(q[0], -q[3]);
        m[(0, 1)] = Complex64::new(-q[2], -q[1]);
        m[(1, 0)] = Complex64::new(q[2], -q[1]);
        m[(1, 1)] = Complex64::new(q[0], q[3]);
        m
    }

    /// Euler angles (α, β, γ) with g = exp(αX₃)·exp(βX₂)·exp(γX₃),
    /// β ∈ [0, π]. The reconstruction is exact for every input (phases are
    /// only ill-determined where the corresponding matrix entries vanish).
    pub fn euler_angles(&self) -> (f64, f64, f64) {
        let q = self.quaternion();
        // U00 = w - iz = cos(β/2) e^{-i(α+γ)/2}; U10 = y - ix = sin(β/2) e^{i(α-γ)/2}
        let u00 = Complex64::new(q[0], -q[3]);
        let u10 = Complex64::new(q[2], -q[1]);
        let beta = 2.0 * u10.norm().atan2(u00.norm());
        let sum = -u00.arg(); // (α+γ)/2
        let diff = u10.arg(); // (α-γ)/2
        (sum + diff, beta, sum - diff)
    }

    /// Geodesic distance d(g, h) = |log(g⁻¹h)|.
    pub fn distance(&self, other: &Self) -> f64 {
        self.inverse().mul(other).log_norm()
    }
}

/// Exponential chart around the identity: U = { g : |x(g)| < radius }.
/// Charts are always symmetric (U = U⁻¹, since x(g⁻¹) = −x(g)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub radius: f64,
    pub symmetric: bool,
}

impl Chart {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < PI) {
            return Err(LieflowError::InvalidChart { radius });
        }
        Ok(Self {
            radius,
            symmetric: true,
        })
    }

    /// Default radius 0.9π for both groups.
    pub fn default_for(_group: GroupId) -> Self {
        Self {
            radius: 0.9 * PI,
            symmetric: true,
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.log_norm() < self.radius
    }

    /// Canonical coordinates of g, or `OutOfChart`.
    pub fn canonical_coords(&self, g: &GroupElement) -> Result<AlgebraVector> {
        let norm = g.log_norm();
        if norm >= self.radius {
            return Err(LieflowError::OutOfChart {
                norm,
                radius: self.radius,
            });
        }
        Ok(g.log())
    }

    /// Coordinates with the hard cutoff used by compensated jump integrals:
    /// x(g) inside the chart, the zero vector outside.
    pub fn coords_or_zero(&self, g: &GroupElement) -> AlgebraVector {
        if self.contains(g) {
            g.log()
        } else {
            AlgebraVector::zero(g.group())
        }
    }
}

/// One quadrature node: a group element and its Haar weight.
#[derive(Debug, Clone)]
pub struct QuadratureNode {
    pub point: GroupElement,
    pub weight: f64,
}

/// Structured torus grid: `resolution` uniform angles per axis.
pub(crate) struct TorusGrid {
    pub dim: usize,
    pub resolution: usize,
}

impl TorusGrid {
    pub fn node_angle(&self, idx: usize) -> f64 {
        TAU * idx as f64 / self.resolution as f64
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    /// Multi-index of flat node `i`, little-endian in axes.
    pub fn angles(&self, mut i: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            out.push(self.node_angle(i % self.resolution));
            i /= self.resolution;
        }
        out
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }
}

/// Structured SU(2) Euler grid (see module docs for ranges and exactness).
pub(crate) struct Su2Grid {
    pub alphas: Vec<f64>,
    /// (β node, weight already including the 1/2 from dcosβ normalization)
    pub betas: Vec<(f64, f64)>,
    pub gammas: Vec<f64>,
}

impl Su2Grid {
    pub fn new(resolution: usize) -> Self {
        let n = resolution.max(1);
        let alphas = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        let gammas = (0..n).map(|i| 2.0 * TAU * i as f64 / n as f64).collect();
        let (nodes, weights) = gauss_legendre(n);
        let betas = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| (x.acos(), w / 2.0))
            .collect();
        Self {
            alphas,
            betas,
            gammas,
        }
    }

    pub fn element(alpha: f64, beta: f64, gamma: f64) -> GroupElement {
        let e3 = |t: f64| {
            GroupElement::exp(&AlgebraVector {
                group: GroupId::Su2,
                coeffs: vec![0.0, 0.0, t],
            })
        };
        let e2 = GroupElement::exp(&AlgebraVector {
            group: GroupId::Su2,
            coeffs: vec![0.0, beta, 0.0],
        });
        e3(alpha).mul(&e2).mul(&e3(gamma))
    }

    pub fn node_weight(&self, beta_w: f64) -> f64 {
        beta_w / (self.alphas.len() * self.gammas.len()) as f64
    }
}

/// Haar quadrature nodes for `group` at the given per-axis resolution.
/// Weights sum to 1. For T^d the rule integrates any function band-limited
/// to per-axis frequency < resolution exactly; for SU(2) it is exact on
/// products of two matrix coefficients of weight ≤ k when
/// resolution ≥ 2k + 3.
pub fn haar_quadrature(group: GroupId, resolution: usize) -> Vec<QuadratureNode> {
    assert!(resolution >= 1, "resolution must be positive");
    match group {
        GroupId::Torus { dim } => {
            let grid = TorusGrid { dim, resolution };
            let w = grid.weight();
            (0..grid.len())
                .map(|i| QuadratureNode {
                    point: GroupElement {
                        group,
                        data: ElementData::Torus(grid.angles(i)),
                    },
                    weight: w,
                })
                .collect()
        }
        GroupId::Su2 => {
            let grid = Su2Grid::new(resolution);
            let mut nodes = Vec::with_capacity(resolution.pow(3));
            for &(beta, bw) in &grid.betas {
                let w = grid.node_weight(bw);
                for &alpha in &grid.alphas {
                    for &gamma in &grid.gammas {
                        nodes.push(QuadratureNode {
                            point: Su2Grid::element(alpha, beta, gamma),
                            weight: w,
                        });
                    }
                }
            }
            nodes
        }
    }
}
