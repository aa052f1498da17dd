//! Irreducible unitary representations of T^d and SU(2), their derived
//! (Lie-algebra) representations, and weight enumeration.
//!
//! * **T^d** — irreps are the characters π_n(θ) = e^{i n·θ}, n ∈ ℤ^d, all
//!   1-dimensional; |λ| is the Euclidean norm of n and dπ_n(X_j) = i·n_j.
//! * **SU(2)** — irreps are labelled by the highest weight k = 2ℓ ∈ ℤ≥0
//!   (spin ℓ), with dim = k + 1 and |λ| = k. In the standard descending
//!   basis |ℓ, m⟩, m = ℓ, ℓ−1, …, −ℓ, the derived representation is
//!   dπ(X_j) = −i·J_j with the usual angular-momentum matrices, so that in
//!   the defining rep (k = 1) dπ(X_j) equals the algebra basis matrix
//!   X_j = −i σ_j/2 itself. Group matrices are assembled from the Euler
//!   factorization π(g) = e^{α dπ(X₃)} · e^{β dπ(X₂)} · e^{γ dπ(X₃)}, where
//!   the outer factors are diagonal phases e^{−i m α}, e^{−i m γ} and the
//!   middle factor is a small dense matrix exponential.
//!
//! Derived representations are skew-Hermitian and satisfy
//! [dπ(X₁), dπ(X₂)] = dπ(X₃) (cyclic); group matrices are unitary and
//! multiplicative. Both properties are enforced by tests at 1e-11/1e-10.

use crate::error::{LieflowError, Result};
use crate::group::{GroupElement, GroupId};
use crate::linalg::{expm, CMat};
use num_complex::Complex64;

/// Dual label: the frequency vector n for T^d, the singleton [k] for SU(2).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight {
    pub label: Vec<i64>,
}

impl Weight {
    pub fn new(label: Vec<i64>) -> Self {
        Self { label }
    }

    /// |λ|: Euclidean norm of the label (for SU(2) this is just k).
    pub fn norm(&self) -> f64 {
        self.label
            .iter()
            .map(|&v| (v * v) as f64)
            .sum::<f64>()
            .sqrt()
    }
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.label.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(";"))
    }
}

/// An irreducible representation of `group` with the given weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Irrep {
    pub group: GroupId,
    pub weight: Weight,
}

impl Irrep {
    pub fn new(group: GroupId, weight: Weight) -> Result<Self> {
        let ok = match group {
            GroupId::Torus { dim } => weight.label.len() == dim,
            GroupId::Su2 => weight.label.len() == 1 && weight.label[0] >= 0,
        };
        if !ok {
            return Err(LieflowError::GroupMismatch {
                left: group.to_string(),
                right: format!("weight {}", weight),
            });
        }
        Ok(Self { group, weight })
    }

    pub fn dim(&self) -> usize {
        match self.group {
            GroupId::Torus { .. } => 1,
            GroupId::Su2 => self.weight.label[0] as usize + 1,
        }
    }
}

/// All weights with |λ| ≤ max_norm, sorted by (|λ|, label).
pub fn enumerate_weights(group: GroupId, max_norm: f64) -> Vec<Weight> {
    assert!(max_norm >= 0.0);
    let mut out = Vec::new();
    match group {
        GroupId::Torus { dim } => {
            let cap = max_norm.floor() as i64;
            let mut label = vec![-cap; dim];
            loop {
                let w = Weight::new(label.clone());
                if w.norm() <= max_norm + 1e-12 {
                    out.push(w);
                }
                // odometer over the box [-cap, cap]^dim
                let mut axis = 0;
                loop {
                    if axis == dim {
                        // done
                        out.sort_by(|a, b| {
                            a.norm()
                                .partial_cmp(&b.norm())
                                .unwrap()
                                .then_with(|| a.label.cmp(&b.label))
                        });
                        return out;
                    }
                    label[axis] += 1;
                    if label[axis] > cap {
                        label[axis] = -cap;
                        axis += 1;
                    } else {
                        break;
                    }
                }
            }
        }
        GroupId::Su2 => {
            let cap = max_norm.floor() as i64;
            for k in 0..=cap {
                out.push(Weight::new(vec![k]));
            }
            out
        }
    }
}

/// The m-values ℓ, ℓ−1, …, −ℓ of the descending SU(2) basis.
fn su2_mvalues(k: i64) -> Vec<f64> {
    let ell = k as f64 / 2.0;
    (0..=k).map(|i| ell - i as f64).collect()
}

/// Derived representation matrices dπ(X₁), dπ(X₂), dπ(X₃).
#[derive(Debug, Clone)]
pub struct DerivedRep {
    pub mats: Vec<CMat>,
}

pub fn derived_rep(irrep: &Irrep) -> DerivedRep {
    match irrep.group {
        GroupId::Torus { .. } => {
            let mats = irrep
                .weight
                .label
                .iter()
                .map(|&n| {
                    let mut m = CMat::zeros(1, 1);
                    m[(0, 0)] = Complex64::new(0.0, n as f64);
                    m
                })
                .collect();
            DerivedRep { mats }
        }
        GroupId::Su2 => {
            let k = irrep.weight.label[0];
            let dim = k as usize + 1;
            let ell = k as f64 / 2.0;
            let ms = su2_mvalues(k);
            let mut jp = CMat::zeros(dim, dim); // J₊ |m⟩ = sqrt(ℓ(ℓ+1) − m(m+1)) |m+1⟩
            for i in 1..dim {
                let m = ms[i];
                jp[(i - 1, i)] = Complex64::new((ell * (ell + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
            }
            let jm = jp.transpose();
            let i = Complex64::new(0.0, 1.0);
            let jx = (&jp + &jm) * Complex64::new(0.5, 0.0);
            let jy = (&jp - &jm) * (-i * 0.5);
            let mut jz = CMat::zeros(dim, dim);
            for (idx, &m) in ms.iter().enumerate() {
                jz[(idx, idx)] = Complex64::new(m, 0.0);
            }
            DerivedRep {
                mats: vec![jx * (-i), jy * (-i), jz * (-i)],
            }
        }
    }
}

/// Diagonal phase factor e^{t·dπ(X₃)} = diag(e^{−i m t}) for SU(2).
fn su2_phase(k: i64, t: f64) -> CMat {
    let ms = su2_mvalues(k);
    let mut d = CMat::zeros(ms.len(), ms.len());
    for (i, &m) in ms.iter().enumerate() {
        d[(i, i)] = Complex64::new(0.0, -m * t).exp();
    }
    d
}

/// Middle Euler factor e^{β·dπ(X₂)}, exposed for grid-structured transforms
/// that reuse it across all (α, γ) pairs sharing a β node.
pub(crate) fn su2_beta_rotation(k: i64, beta: f64) -> CMat {
    let d = derived_rep(&Irrep::new(GroupId::Su2, Weight::new(vec![k])).unwrap());
    expm(&(&d.mats[1] * Complex64::new(beta, 0.0)))
}

pub(crate) fn su2_rep_from_euler(k: i64, alpha: f64, beta: f64, gamma: f64) -> CMat {
    su2_phase(k, alpha) * su2_beta_rotation(k, beta) * su2_phase(k, gamma)
}

/// The unitary matrix π_λ(g).
pub fn rep_matrix(irrep: &Irrep, g: &GroupElement) -> CMat {
    assert_eq!(irrep.group, g.group(), "group mismatch in rep_matrix");
    match irrep.group {
        GroupId::Torus { .. } => {
            let phase: f64 = irrep
                .weight
                .label
                .iter()
                .zip(g.angles())
                .map(|(&n, &t)| n as f64 * t)
                .sum();
            let mut m = CMat::zeros(1, 1);
            m[(0, 0)] = Complex64::new(0.0, phase).exp();
            m
        }
        GroupId::Su2 => {
            let (alpha, beta, gamma) = g.euler_angles();
            su2_rep_from_euler(irrep.weight.label[0], alpha, beta, gamma)
        }
    }
}

/// Casimir matrix Σ_i dπ(X_i)². For SU(2) with k = 2ℓ this equals
/// −ℓ(ℓ+1)·I; for T^d it is −|n|²·I (1×1).
pub fn casimir(irrep: &Irrep) -> CMat {
    let d = derived_rep(irrep);
    let dim = irrep.dim();
    let mut c = CMat::zeros(dim, dim);
    for m in &d.mats {
        c += m * m;
    }
    c
}

/// Conjugation intertwiner J with conj(π(g)) = J π(g) J⁻¹.
/// For SU(2) every irrep is self-conjugate and J = π(exp(π X₂)) is real
/// orthogonal; for T^d conjugation maps weight n to −n, so J is only the
/// trivial 1×1 identity (conjugate coefficients live at the negated weight).
pub fn conj_intertwiner(irrep: &Irrep) -> CMat {
    match irrep.group {
        GroupId::Torus { .. } => CMat::identity(1, 1),
        GroupId::Su2 => su2_beta_rotation(irrep.weight.label[0], std::f64::consts::PI),
    }
}
