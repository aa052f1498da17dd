//! Lévy-type operators A built from characteristics (c, b, a, μ):
//!
//!   Af(σ) = −c(σ)f(σ) + Σ_i b_i(σ)(X_i f)(σ) + Σ_{jk} a_jk(σ)(X_j X_k f)(σ)
//!           + ∫_G [ f(στ) − f(σ) − Σ_i x_i(τ)(X_i f)(σ) ] μ(σ, dτ),
//!
//! where x_i are canonical exponential coordinates inside the chart U and
//! x_i(τ) = 0 outside it (hard cutoff). The jump kernel is a fixed measure
//! modulated by a positive scalar field: μ(σ, dτ) = φ(σ)·μ(dτ).
//!
//! For f(σ) = Σ d_λ tr(f̂(λ)π_λ(σ)) all terms reduce to traces against
//! B_λ = f̂(λ)π_λ(σ):
//!
//!   f(σ)        = Σ d_λ tr(B_λ),
//!   (X_i f)(σ)  = Σ d_λ tr(B_λ·dπ_λ(X_i)),
//!   (X_jX_kf)(σ)= Σ d_λ tr(B_λ·dπ_λ(X_j)·dπ_λ(X_k)),
//!   f(στ)       = Σ d_λ tr(B_λ·π_λ(τ)).
//!
//! Measures combine finitely many atoms with an optional small-jump density
//! intensity·|x|^{−power} on the chart annulus ε ≤ |x| ≤ R, discretized by a
//! log-radial Gauss–Legendre × spherical product rule. The discretized
//! atoms ("effective atoms") are the single source of truth: generator
//! application, symbols and path simulation all consume the same list.

use crate::error::{LieflowError, Result};
use crate::fourier::FourierCoefficients;
use crate::group::{haar_quadrature, AlgebraVector, Chart, GroupElement, GroupId};
use crate::linalg::{gauss_legendre, CMat};
use crate::rep::{derived_rep, rep_matrix, Irrep};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Scalar coefficient field: a constant, or a band-limited synthesis.
#[derive(Debug, Clone)]
pub enum CharField {
    Const(f64),
    Field(FourierCoefficients),
}

impl CharField {
    pub fn eval(&self, g: &GroupElement) -> f64 {
        match self {
            CharField::Const(v) => *v,
            CharField::Field(f) => f.eval_real(g),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            CharField::Const(v) => Some(*v),
            CharField::Field(_) => None,
        }
    }
}

/// A single jump: mass `weight` at `point`.
#[derive(Debug, Clone)]
pub struct LevyAtom {
    pub point: GroupElement,
    pub weight: f64,
}

/// Rotation-invariant small-jump density intensity·|x|^{−power} dx on the
/// chart annulus inner_radius ≤ |x| ≤ outer_radius.
#[derive(Debug, Clone)]
pub struct SmallJumpDensity {
    pub intensity: f64,
    pub power: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// log-radial Gauss–Legendre node count
    pub radial_nodes: usize,
    /// per-angle node count for the spherical factor
    pub direction_nodes: usize,
}

impl SmallJumpDensity {
    pub fn new(intensity: f64, power: f64, inner_radius: f64, outer_radius: f64) -> Self {
        Self {
            intensity,
            power,
            inner_radius,
            outer_radius,
            radial_nodes: 48,
            direction_nodes: 16,
        }
    }
}

/// Jump measure: explicit atoms plus an optional small-jump density.
#[derive(Debug, Clone, Default)]
pub struct LevyMeasure {
    pub atoms: Vec<LevyAtom>,
    pub density: Option<SmallJumpDensity>,
}

/// Integrability diagnostics for a jump measure on a chart of dimension d.
#[derive(Debug, Clone, Copy)]
pub struct IntegrabilityReport {
    /// ∫ |x(τ)|² dμ over the truncated measure (atoms + density annulus)
    pub small_jump_integral: f64,
    /// total mass μ(G) of the truncated measure (= Poisson jump rate)
    pub total_mass: f64,
    /// ∫_{|x| < ε} |x|² dμ discarded by the inner cutoff (∞ if the
    /// un-truncated density is not Lévy-integrable)
    pub inner_cutoff_bias: f64,
    /// whether the un-truncated density satisfies the two-moment condition
    /// near the identity (power < d + 2) and all masses are finite
    pub ok: bool,
}

fn sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => TAU,
        3 => 2.0 * TAU,
        _ => unreachable!("charts are 1-, 2- or 3-dimensional"),
    }
}

/// Unit directions and weights summing to the sphere measure S_{d−1}.
fn direction_rule(dim: usize, n: usize) -> Vec<(Vec<f64>, f64)> {
    match dim {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                (vec![t.cos(), t.sin()], TAU / n as f64)
            })
            .collect(),
        3 => {
            // Gauss–Legendre in cos(polar) × uniform azimuth
            let (nodes, weights) = gauss_legendre(n);
            let n_az = 2 * n;
            let mut out = Vec::with_capacity(n * n_az);
            for (&cp, &pw) in nodes.iter().zip(&weights) {
                let sp = (1.0 - cp * cp).max(0.0).sqrt();
                for j in 0..n_az {
                    let t = TAU * j as f64 / n_az as f64;
                    out.push((
                        vec![sp * t.cos(), sp * t.sin(), cp],
                        2.0 * TAU * (pw / 2.0) / n_az as f64,
                    ));
                }
            }
            out
        }
        _ => unreachable!("charts are 1-, 2- or 3-dimensional"),
    }
}

impl LevyMeasure {
    /// Validate structure and discretize the density into atoms. The result
    /// is the measure actually used everywhere downstream.
    pub fn effective_atoms(&self, group: GroupId, chart: &Chart) -> Result<Vec<LevyAtom>> {
        let mut out = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            if a.point.group() != group {
                return Err(LieflowError::GroupMismatch {
                    left: a.point.group().to_string(),
                    right: group.to_string(),
                });
            }
            let dist = a.point.log_norm();
            if dist < 1e-9 {
                return Err(LieflowError::AtomAtIdentity { dist });
            }
            out.push(a.clone());
        }
        if let Some(d) = &self.density {
            let dim = group.algebra_dim();
            if d.inner_radius <= 0.0 {
                return Err(LieflowError::InfiniteJumpMass);
            }
            if d.outer_radius <= d.inner_radius {
                return Err(LieflowError::InvalidDensity {
                    reason: format!(
                        "outer radius {} must exceed inner radius {}",
                        d.outer_radius, d.inner_radius
                    ),
                });
            }
            if d.outer_radius > chart.radius + 1e-12 {
                return Err(LieflowError::InvalidDensity {
                    reason: format!(
                        "outer radius {} exceeds chart radius {}",
                        d.outer_radius, chart.radius
                    ),
                });
            }
            if d.intensity < 0.0 {
                return Err(LieflowError::InvalidDensity {
                    reason: format!("negative intensity {}", d.intensity),
                });
            }
            if d.radial_nodes == 0 || d.direction_nodes == 0 {
                return Err(LieflowError::InvalidDensity {
                    reason: "quadrature node counts must be positive".into(),
                });
            }
            // radial factor in log coordinates: r = e^u maps [ln ε, ln R]
            // onto the annulus and ∫ h(r) dr = ∫ h(e^u) e^u du
            let (u_nodes, u_weights) = gauss_legendre(d.radial_nodes);
            let (lo, hi) = (d.inner_radius.ln(), d.outer_radius.ln());
            let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
            let dirs = direction_rule(dim, d.direction_nodes);
            for (&un, &uw) in u_nodes.iter().zip(&u_weights) {
                let r = (mid + half * un).exp();
                // mass density against dr: intensity·r^{−power}·r^{d−1}·S-weight
                let radial_mass = d.intensity * r.powf(-d.power) * r.powi(dim as i32 - 1);
                let dr = uw * half * r; // GL weight × du/dr Jacobian
                for (v, dw) in &dirs {
                    let x: Vec<f64> = v.iter().map(|&vi| vi * r).collect();
                    let point =
                        GroupElement::exp(&AlgebraVector::new(group, x).expect("finite coords"));
                    out.push(LevyAtom {
                        point,
                        weight: radial_mass * dr * dw,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Analytic integrability diagnostics (atoms enter exactly; the density
    /// part is integrated in closed form).
    pub fn integrability(&self, group: GroupId, chart: &Chart) -> IntegrabilityReport {
        let dim = group.algebra_dim();
        let mut small = 0.0;
        let mut mass = 0.0;
        for a in &self.atoms {
            let x = chart.coords_or_zero(&a.point);
            small += a.weight * x.norm().powi(2);
            mass += a.weight;
        }
        let mut bias = 0.0;
        let mut ok = self.atoms.iter().all(|a| a.weight.is_finite());
        if let Some(d) = &self.density {
            let s = sphere_measure(dim);
            // ∫_ε^R r^{2+d−1−power} dr and ∫_ε^R r^{d−1−power} dr
            let power_int = |p: f64, lo: f64, hi: f64| -> f64 {
                if (p + 1.0).abs() < 1e-12 {
                    (hi / lo).ln()
                } else {
                    (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0)
                }
            };
            let (eps, r) = (d.inner_radius, d.outer_radius);
            small += s * d.intensity * power_int(2.0 + dim as f64 - 1.0 - d.power, eps, r);
            mass += s * d.intensity * power_int(dim as f64 - 1.0 - d.power, eps, r);
            let levy_ok = d.power < dim as f64 + 2.0;
            bias = if levy_ok {
                s * d.intensity * eps.powf(dim as f64 + 2.0 - d.power)
                    / (dim as f64 + 2.0 - d.power)
            } else {
                f64::INFINITY
            };
            ok = ok && levy_ok && eps > 0.0 && d.intensity >= 0.0;
        }
        IntegrabilityReport {
            small_jump_integral: small,
            total_mass: mass,
            inner_cutoff_bias: bias,
            ok,
        }
    }

    /// ∫_U x dμ over the effective atoms (chart coordinates, hard cutoff).
    pub fn compensator_drift(&self, group: GroupId, chart: &Chart) -> Result<Vec<f64>> {
        let atoms = self.effective_atoms(group, chart)?;
        let mut out = vec![0.0; group.algebra_dim()];
        for a in &atoms {
            let x = chart.coords_or_zero(&a.point);
            for (o, xi) in out.iter_mut().zip(&x.coeffs) {
                *o += a.weight * xi;
            }
        }
        Ok(out)
    }
}

/// Full characteristics (c, b, a, μ, φ) of a Lévy-type operator.
#[derive(Debug, Clone)]
pub struct Characteristics {
    pub group: GroupId,
    pub chart: Chart,
    pub c: CharField,
    pub b: Vec<CharField>,
    pub a: Vec<Vec<CharField>>,
    pub levy: LevyMeasure,
    /// positive scalar modulation φ of the jump kernel μ(σ,·) = φ(σ)·μ(·)
    pub modulation: CharField,
}

/// Constant-coefficient view used by symbols and path simulation.
#[derive(Debug, Clone)]
pub struct ConstantCharacteristics {
    pub c: f64,
    pub b: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub modulation: f64,
}

impl Characteristics {
    /// Constant-coefficient characteristics with the default chart.
    pub fn constant(group: GroupId, c: f64, b: Vec<f64>, a: Vec<Vec<f64>>, levy: LevyMeasure) -> Self {
        Self {
            group,
            chart: Chart::default_for(group),
            c: CharField::Const(c),
            b: b.into_iter().map(CharField::Const).collect(),
            a: a.into_iter()
                .map(|row| row.into_iter().map(CharField::Const).collect())
                .collect(),
            levy,
            modulation: CharField::Const(1.0),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.c.as_const().is_some()
            && self.modulation.as_const().is_some()
            && self.b.iter().all(|f| f.as_const().is_some())
            && self.a.iter().flatten().all(|f| f.as_const().is_some())
    }

    pub fn constant_view(&self) -> Result<ConstantCharacteristics> {
        let missing = |field: &str| LieflowError::NonConstantCharacteristics {
            field: field.to_string(),
        };
        Ok(ConstantCharacteristics {
            c: self.c.as_const().ok_or_else(|| missing("c"))?,
            b: self
                .b
                .iter()
                .map(|f| f.as_const().ok_or_else(|| missing("b")))
                .collect::<Result<_>>()?,
            a: self
                .a
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|f| f.as_const().ok_or_else(|| missing("a")))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<_>>()?,
            modulation: self.modulation.as_const().ok_or_else(|| missing("modulation"))?,
        })
    }

    fn check_shapes(&self) -> Result<()> {
        let n = self.group.algebra_dim();
        if self.b.len() != n || self.a.len() != n || self.a.iter().any(|r| r.len() != n) {
            return Err(LieflowError::InvalidCharacteristics {
                reason: format!(
                    "drift/diffusion shapes must match the algebra dimension {n}"
                ),
            });
        }
        Ok(())
    }

    /// Structural and positivity validation: c ≥ 0, φ > 0, a symmetric PSD
    /// (constants checked exactly; fields sampled on a Haar grid), jump
    /// atoms off the identity with finite nonnegative weights.
    pub fn validate(&self) -> Result<()> {
        self.check_shapes()?;
        let n = self.group.algebra_dim();
        let sample_points: Vec<GroupElement> = if self.is_constant() {
            vec![GroupElement::identity(self.group)]
        } else {
            haar_quadrature(self.group, 8)
                .into_iter()
                .map(|q| q.point)
                .collect()
        };
        for g in &sample_points {
            let c = self.c.eval(g);
            if !c.is_finite() || c < -1e-12 {
                return Err(LieflowError::InvalidCharacteristics {
                    reason: format!("killing rate c = {c} is negative"),
                });
            }
            let phi = self.modulation.eval(g);
            if !phi.is_finite() || phi <= 0.0 {
                return Err(LieflowError::InvalidCharacteristics {
                    reason: format!("jump modulation φ = {phi} is not positive"),
                });
            }
            for bi in &self.b {
                if !bi.eval(g).is_finite() {
                    return Err(LieflowError::NonFinite);
                }
            }
            let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                for k in 0..n {
                    m[(j, k)] = self.a[j][k].eval(g);
                }
            }
            let asym = (&m - m.transpose()).norm();
            if asym > 1e-9 * (1.0 + m.norm()) {
                return Err(LieflowError::InvalidCharacteristics {
                    reason: format!("diffusion matrix is not symmetric (‖a−aᵀ‖ = {asym})"),
                });
            }
            let sym = (&m + m.transpose()) * 0.5;
            let min_eig = sym
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min_eig < -1e-10 * (1.0 + m.norm()) {
                return Err(LieflowError::InvalidCharacteristics {
                    reason: format!("diffusion matrix has negative eigenvalue {min_eig}"),
                });
            }
        }
        let atoms = self.levy.effective_atoms(self.group, &self.chart)?;
        for a in &atoms {
            if !a.weight.is_finite() {
                return Err(LieflowError::NonFinite);
            }
            if a.weight < 0.0 {
                return Err(LieflowError::InvalidCharacteristics {
                    reason: format!("jump atom has negative mass {}", a.weight),
                });
            }
        }
        Ok(())
    }
}

/// The compensated increment H f(g, τ) = f(gτ) − f(g) − Σ x_i(τ)(X_i f)(g).
pub fn compensator_h(
    f: &FourierCoefficients,
    chart: &Chart,
    g: &GroupElement,
    tau: &GroupElement,
) -> f64 {
    let x = chart.coords_or_zero(tau);
    let mut out = f.eval_real(&g.mul(tau)) - f.eval_real(g);
    for (i, xi) in x.coeffs.iter().enumerate() {
        if *xi != 0.0 {
            out -= xi * f.derivative(i).eval_real(g);
        }
    }
    out
}

/// Convolution against a discrete measure: Σ_τ w(τ)·f(στ). For a
/// probability measure this is a Markov (Hunt) transition operator.
pub fn hunt_apply(f: &FourierCoefficients, measure: &[LevyAtom], sigma: &GroupElement) -> f64 {
    measure
        .iter()
        .map(|a| a.weight * f.eval_real(&sigma.mul(&a.point)))
        .sum()
}

/// Apply the operator to a (possibly complex-valued) function at several
/// points, sharing all per-weight work across the batch.
pub fn apply_generator_complex_many(
    chars: &Characteristics,
    f: &FourierCoefficients,
    sigmas: &[GroupElement],
) -> Result<Vec<Complex64>> {
    chars.check_shapes()?;
    if f.group != chars.group {
        return Err(LieflowError::GroupMismatch {
            left: f.group.to_string(),
            right: chars.group.to_string(),
        });
    }
    let n = chars.group.algebra_dim();
    let atoms = chars.levy.effective_atoms(chars.group, &chars.chart)?;
    let atom_coords: Vec<Vec<f64>> = atoms
        .iter()
        .map(|a| chars.chart.coords_or_zero(&a.point).coeffs)
        .collect();

    // per-weight static data: f̂, dπ(X_i), dπ(X_j)dπ(X_k), π(τ_atom)
    struct WeightData {
        irrep: Irrep,
        dim: f64,
        fhat: CMat,
        dmats: Vec<CMat>,
        second: Vec<CMat>, // row-major j·n + k
        atom_reps: Vec<CMat>,
    }
    let mut wdata = Vec::with_capacity(f.coeffs.len());
    for (w, m) in &f.coeffs {
        let ir = Irrep::new(chars.group, w.clone()).expect("stored weight is valid");
        let d = derived_rep(&ir);
        let mut second = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                second.push(&d.mats[j] * &d.mats[k]);
            }
        }
        wdata.push(WeightData {
            dim: ir.dim() as f64,
            fhat: m.clone(),
            dmats: d.mats.clone(),
            second,
            atom_reps: atoms.iter().map(|a| rep_matrix(&ir, &a.point)).collect(),
            irrep: ir,
        });
    }

    let mut out = Vec::with_capacity(sigmas.len());
    for sigma in sigmas {
        if sigma.group() != chars.group {
            return Err(LieflowError::GroupMismatch {
                left: sigma.group().to_string(),
                right: chars.group.to_string(),
            });
        }
        let mut value = Complex64::new(0.0, 0.0);
        let mut grad = vec![Complex64::new(0.0, 0.0); n];
        let mut hess = vec![Complex64::new(0.0, 0.0); n * n];
        let mut shifted = vec![Complex64::new(0.0, 0.0); atoms.len()];
        for wd in &wdata {
            let ir_dim = wd.dim;
            // B = f̂ · π(σ)
            let b = &wd.fhat * rep_matrix(&wd.irrep, sigma);
            value += b.trace() * ir_dim;
            for i in 0..n {
                grad[i] += (&b * &wd.dmats[i]).trace() * ir_dim;
            }
            for jk in 0..n * n {
                hess[jk] += (&b * &wd.second[jk]).trace() * ir_dim;
            }
            for (s, rep) in shifted.iter_mut().zip(&wd.atom_reps) {
                *s += (&b * rep).trace() * ir_dim;
            }
        }
        let mut acc = Complex64::new(-chars.c.eval(sigma), 0.0) * value;
        for i in 0..n {
            acc += grad[i] * chars.b[i].eval(sigma);
        }
        for j in 0..n {
            for k in 0..n {
                acc += hess[j * n + k] * chars.a[j][k].eval(sigma);
            }
        }
        let phi = chars.modulation.eval(sigma);
        for (ai, atom) in atoms.iter().enumerate() {
            let mut h = shifted[ai] - value;
            for i in 0..n {
                h -= grad[i] * atom_coords[ai][i];
            }
            acc += h * (phi * atom.weight);
        }
        if !acc.re.is_finite() || !acc.im.is_finite() {
            return Err(LieflowError::NonFinite);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Apply the operator to a real function at several points.
pub fn apply_generator_many(
    chars: &Characteristics,
    f: &FourierCoefficients,
    sigmas: &[GroupElement],
) -> Result<Vec<f64>> {
    let values = apply_generator_complex_many(chars, f, sigmas)?;
    Ok(values
        .into_iter()
        .map(|v| {
            debug_assert!(
                v.im.abs() < 1e-8 * (1.0 + v.re.abs()),
                "imaginary residue {} in generator application",
                v.im
            );
            v.re
        })
        .collect())
}

pub fn apply_generator(
    chars: &Characteristics,
    f: &FourierCoefficients,
    sigma: &GroupElement,
) -> Result<f64> {
    Ok(apply_generator_many(chars, f, std::slice::from_ref(sigma))?[0])
}
