//! Pseudo-differential symbols of Lévy-type operators.
//!
//! The symbol of A at (σ, π) is the d_π×d_π matrix
//!
//!   j_A(σ, π) = −c(σ)I + Σ_i b_i(σ)dπ(X_i) + Σ_{jk} a_jk(σ)dπ(X_j)dπ(X_k)
//!               + ∫_G [π(τ) − I − Σ_i x_i(τ)dπ(X_i)] μ(σ, dτ),
//!
//! equivalently j_A(σ, π) = π(σ)^{-1}·(Aπ)(σ) with A applied entrywise to
//! the coordinate functions π_ij ([`symbol_via_conjugation`]). The operator
//! acts spectrally through its symbol:
//!
//!   Af(σ) = Σ_λ d_λ tr( j_A(σ,λ) · f̂(λ) · π_λ(σ) )            (synthesis)
//!
//! and for constant ("Hunt") characteristics the semigroup evolves by
//!
//!   f̂_t(λ) = exp(t·j(λ)) · f̂(λ)        (symbol exponential on the LEFT),
//!
//! the multiplication order being fixed by (T_t f)^(π) = ρ̂_t(π)·f̂(π) for
//! the transition measures ρ_t and validated against the generator by a
//! Richardson derivative test.

use crate::error::{LieflowError, Result};
use crate::fourier::FourierCoefficients;
use crate::generator::Characteristics;
use crate::group::{haar_quadrature, GroupElement, GroupId};
use crate::linalg::{expm, hs_norm, CMat};
use crate::rep::{derived_rep, enumerate_weights, rep_matrix, Irrep, Weight};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// A symbol sampled on an evaluation grid of base points. Constant
/// characteristics yield a grid-independent ("Hunt") symbol stored at a
/// single index; variable ones are sampled densely over Haar quadrature
/// nodes.
#[derive(Debug, Clone)]
pub struct Symbol {
    pub group: GroupId,
    pub max_norm: f64,
    pub hunt_constant: bool,
    /// evaluation base points (length 1 when hunt_constant)
    pub sigma_grid: Vec<GroupElement>,
    /// per-grid-index weight → matrix maps, parallel to `sigma_grid`
    pub entries: Vec<BTreeMap<Weight, CMat>>,
}

impl Symbol {
    /// The matrix at (σ-index, weight), if stored.
    pub fn at(&self, sigma_index: usize, weight: &Weight) -> Option<&CMat> {
        let idx = if self.hunt_constant { 0 } else { sigma_index };
        self.entries.get(idx).and_then(|m| m.get(weight))
    }

    fn grid_index(&self, sigma: &GroupElement) -> Result<usize> {
        if self.hunt_constant {
            return Ok(0);
        }
        self.sigma_grid
            .iter()
            .position(|g| g.distance(sigma) < 1e-12)
            .ok_or(LieflowError::PointNotOnGrid)
    }
}

/// Direct assembly of j_A(σ, π) from the characteristics.
pub fn symbol_at(chars: &Characteristics, sigma: &GroupElement, irrep: &Irrep) -> Result<CMat> {
    if irrep.group != chars.group {
        return Err(LieflowError::GroupMismatch {
            left: irrep.group.to_string(),
            right: chars.group.to_string(),
        });
    }
    let n = chars.group.algebra_dim();
    let dim = irrep.dim();
    let d = derived_rep(irrep);
    let mut j = CMat::identity(dim, dim) * Complex64::new(-chars.c.eval(sigma), 0.0);
    for i in 0..n {
        j += &d.mats[i] * Complex64::new(chars.b[i].eval(sigma), 0.0);
    }
    for p in 0..n {
        for q in 0..n {
            let a = chars.a[p][q].eval(sigma);
            if a != 0.0 {
                j += &d.mats[p] * &d.mats[q] * Complex64::new(a, 0.0);
            }
        }
    }
    let atoms = chars.levy.effective_atoms(chars.group, &chars.chart)?;
    let phi = chars.modulation.eval(sigma);
    let eye = CMat::identity(dim, dim);
    for atom in &atoms {
        let mut h = rep_matrix(irrep, &atom.point) - &eye;
        let x = chars.chart.coords_or_zero(&atom.point);
        for i in 0..n {
            if x.coeffs[i] != 0.0 {
                h -= &d.mats[i] * Complex64::new(x.coeffs[i], 0.0);
            }
        }
        j += h * Complex64::new(phi * atom.weight, 0.0);
    }
    Ok(j)
}

/// Recover the symbol from a black-box operator evaluator:
/// j = π(σ)^{-1}·(Aπ)(σ), with (Aπ)(σ) built by applying A to each
/// coordinate function π_ij (coefficient matrix E_{ji}/d_λ) and π(σ)^{-1}
/// taken as the conjugate transpose (π is unitary).
pub fn symbol_via_conjugation<F>(op: &F, sigma: &GroupElement, irrep: &Irrep) -> Result<CMat>
where
    F: Fn(&FourierCoefficients, &GroupElement) -> Result<Complex64>,
{
    let dim = irrep.dim();
    let inv_d = 1.0 / dim as f64;
    let mut a_pi = CMat::zeros(dim, dim);
    for r in 0..dim {
        for s in 0..dim {
            let mut probe = FourierCoefficients::zero(irrep.group, irrep.weight.norm());
            let mut m = CMat::zeros(dim, dim);
            m[(s, r)] = Complex64::new(inv_d, 0.0);
            probe.coeffs.insert(irrep.weight.clone(), m);
            a_pi[(r, s)] = op(&probe, sigma)?;
        }
    }
    Ok(rep_matrix(irrep, sigma).adjoint() * a_pi)
}

/// Assemble a symbol over all weights |λ| ≤ max_norm. Constant
/// characteristics produce a Hunt (grid-independent) symbol; otherwise the
/// symbol is sampled on the Haar nodes at `sigma_resolution` per axis.
pub fn build_symbol(
    chars: &Characteristics,
    max_norm: f64,
    sigma_resolution: usize,
) -> Result<Symbol> {
    let weights = enumerate_weights(chars.group, max_norm);
    let hunt = chars.is_constant();
    let sigma_grid: Vec<GroupElement> = if hunt {
        vec![GroupElement::identity(chars.group)]
    } else {
        haar_quadrature(chars.group, sigma_resolution)
            .into_iter()
            .map(|q| q.point)
            .collect()
    };
    let entries: Vec<BTreeMap<Weight, CMat>> = sigma_grid
        .par_iter()
        .map(|sigma| {
            let mut map = BTreeMap::new();
            for w in &weights {
                let ir = Irrep::new(chars.group, w.clone())?;
                map.insert(w.clone(), symbol_at(chars, sigma, &ir)?);
            }
            Ok(map)
        })
        .collect::<Result<_>>()?;
    Ok(Symbol {
        group: chars.group,
        max_norm,
        hunt_constant: hunt,
        sigma_grid,
        entries,
    })
}

/// Operator application through the symbol:
/// Af(σ) = Σ d_λ tr(j(σ,λ)·f̂(λ)·π_λ(σ)). For non-Hunt symbols σ must be
/// one of the stored grid points.
pub fn synthesize(sym: &Symbol, f: &FourierCoefficients, sigma: &GroupElement) -> Result<f64> {
    if f.group != sym.group {
        return Err(LieflowError::GroupMismatch {
            left: f.group.to_string(),
            right: sym.group.to_string(),
        });
    }
    let idx = sym.grid_index(sigma)?;
    let map = &sym.entries[idx];
    let mut acc = Complex64::new(0.0, 0.0);
    for (w, m) in &f.coeffs {
        let j = map.get(w).ok_or_else(|| LieflowError::MissingWeight {
            label: w.label.clone(),
            max_norm: sym.max_norm,
        })?;
        let ir = Irrep::new(sym.group, w.clone()).expect("stored weight is valid");
        let d = ir.dim() as f64;
        acc += (j * m * rep_matrix(&ir, sigma)).trace() * d;
    }
    debug_assert!(
        acc.im.abs() < 1e-8 * (1.0 + acc.re.abs()),
        "imaginary residue {} in synthesis",
        acc.im
    );
    Ok(acc.re)
}

/// Spectral evolution of a Hunt semigroup: f̂_t(λ) = exp(t·j(λ))·f̂(λ).
pub fn evolve_semigroup(sym: &Symbol, f: &FourierCoefficients, t: f64) -> Result<FourierCoefficients> {
    if !sym.hunt_constant {
        return Err(LieflowError::NonConstantCharacteristics {
            field: "symbol".to_string(),
        });
    }
    if !(t >= 0.0) {
        return Err(LieflowError::NegativeTime { t });
    }
    if f.group != sym.group {
        return Err(LieflowError::GroupMismatch {
            left: f.group.to_string(),
            right: sym.group.to_string(),
        });
    }
    let map = &sym.entries[0];
    let mut out = f.clone();
    for (w, m) in &f.coeffs {
        let j = map.get(w).ok_or_else(|| LieflowError::MissingWeight {
            label: w.label.clone(),
            max_norm: sym.max_norm,
        })?;
        out.coeffs
            .insert(w.clone(), expm(&(j * Complex64::new(t, 0.0))) * m);
    }
    Ok(out)
}

/// Growth diagnostics: (|λ|, sup_σ ‖j(σ,λ)‖_HS / (1+|λ|^{m+2})) per weight,
/// with m the dual growth order of the group.
pub fn growth_bound_check(sym: &Symbol) -> Vec<(f64, f64)> {
    let exponent = sym.group.dual_growth_order() as i32 + 2;
    let mut weights: Vec<&Weight> = sym.entries[0].keys().collect();
    weights.sort();
    weights
        .iter()
        .map(|w| {
            let sup = sym
                .entries
                .iter()
                .filter_map(|m| m.get(w).map(hs_norm))
                .fold(0.0, f64::max);
            (w.norm(), sup / (1.0 + w.norm().powi(exponent)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{forward_ft_real, random_real_bandlimited};
    use crate::generator::{
        apply_generator, apply_generator_complex_many, CharField, LevyAtom, LevyMeasure,
        SmallJumpDensity,
    };
    use crate::group::AlgebraVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const T1: GroupId = GroupId::Torus { dim: 1 };

    fn torus_el(t: f64) -> GroupElement {
        GroupElement::from_angles(&[t]).unwrap()
    }

    fn su2_el(v: [f64; 3]) -> GroupElement {
        GroupElement::exp(&AlgebraVector::new(GroupId::Su2, v.to_vec()).unwrap())
    }

    fn random_su2_chars(rng: &mut ChaCha8Rng) -> Characteristics {
        let c: f64 = rng.random_range(0.0..1.0);
        let b: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        // a = L·Lᵀ is PSD by construction
        let l: Vec<f64> = (0..9).map(|_| rng.random_range(-0.6..0.6)).collect();
        let mut a = vec![vec![0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                for p in 0..3 {
                    a[j][k] += l[3 * j + p] * l[3 * k + p];
                }
            }
        }
        let atoms = (0..2)
            .map(|_| LevyAtom {
                point: su2_el([
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ]),
                weight: rng.random_range(0.1..1.0),
            })
            .collect();
        Characteristics::constant(
            GroupId::Su2,
            c,
            b,
            a,
            LevyMeasure {
                atoms,
                density: None,
            },
        )
    }

    #[test]
    fn test_symbol_closed_forms_torus() {
        // j(n) = −c + ibn − an² + w(e^{inθ₀} − 1 − inθ₀)
        let (c, b, a, w, theta0) = (0.3, 0.7, 0.5, 0.9, 1.1);
        let chars = Characteristics::constant(
            T1,
            c,
            vec![b],
            vec![vec![a]],
            LevyMeasure {
                atoms: vec![LevyAtom {
                    point: torus_el(theta0),
                    weight: w,
                }],
                density: None,
            },
        );
        for n in -5i64..=5 {
            let ir = Irrep::new(T1, Weight::new(vec![n])).unwrap();
            let got = symbol_at(&chars, &GroupElement::identity(T1), &ir).unwrap()[(0, 0)];
            let nn = n as f64;
            let want = Complex64::new(-c - a * nn * nn, b * nn)
                + Complex64::new(0.0, nn * theta0).exp() * w
                - Complex64::new(w, w * nn * theta0);
            assert!((got - want).norm() < 1e-13, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn test_killing_only_symbol() {
        let chars = Characteristics::constant(
            GroupId::Su2,
            0.8,
            vec![0.0; 3],
            vec![vec![0.0; 3]; 3],
            LevyMeasure::default(),
        );
        for k in [0i64, 1, 4] {
            let ir = Irrep::new(GroupId::Su2, Weight::new(vec![k])).unwrap();
            let j = symbol_at(&chars, &GroupElement::identity(GroupId::Su2), &ir).unwrap();
            let want = CMat::identity(ir.dim(), ir.dim()) * Complex64::new(-0.8, 0.0);
            assert!(hs_norm(&(j - want)) < 1e-14);
        }
    }

    #[test]
    fn test_casimir_symbol_su2() {
        let a = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let chars =
            Characteristics::constant(GroupId::Su2, 0.0, vec![0.0; 3], a, LevyMeasure::default());
        for k in 1i64..=8 {
            let ell = k as f64 / 2.0;
            let ir = Irrep::new(GroupId::Su2, Weight::new(vec![k])).unwrap();
            let j = symbol_at(&chars, &GroupElement::identity(GroupId::Su2), &ir).unwrap();
            let want = CMat::identity(ir.dim(), ir.dim()) * Complex64::new(-ell * (ell + 1.0), 0.0);
            assert!(hs_norm(&(j - want)) < 1e-10, "k={k}");
        }
    }

    #[test]
    fn test_dual_path_identity() {
        // symbol_via_conjugation(apply_generator) equals symbol_at,
        // σ-independently, for random constant characteristics
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let chars = random_su2_chars(&mut rng);
        let op = |f: &FourierCoefficients, s: &GroupElement| {
            Ok(apply_generator_complex_many(&chars, f, std::slice::from_ref(s))?[0])
        };
        for k in 0i64..=4 {
            let ir = Irrep::new(GroupId::Su2, Weight::new(vec![k])).unwrap();
            let want = symbol_at(&chars, &GroupElement::identity(GroupId::Su2), &ir).unwrap();
            for _ in 0..3 {
                let sigma = su2_el([
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ]);
                let got = symbol_via_conjugation(&op, &sigma, &ir).unwrap();
                assert!(
                    hs_norm(&(&got - &want)) < 1e-8,
                    "k={k}: ‖Δ‖ = {}",
                    hs_norm(&(got - want.clone()))
                );
            }
        }
    }

    #[test]
    fn test_synthesis_matches_generator() {
        // torus heat: synthesize = −cos σ = apply_generator to 1e−10
        let chars =
            Characteristics::constant(T1, 0.0, vec![0.0], vec![vec![1.0]], LevyMeasure::default());
        let f = forward_ft_real(|g| g.angles()[0].cos(), T1, 2.0, 16);
        let sym = build_symbol(&chars, 2.0, 0).unwrap();
        assert!(sym.hunt_constant);
        for s in [0.0, 0.9, 2.8, 5.1] {
            let got = synthesize(&sym, &f, &torus_el(s)).unwrap();
            assert!((got + s.cos()).abs() < 1e-10);
            let gen = apply_generator(&chars, &f, &torus_el(s)).unwrap();
            assert!((got - gen).abs() < 1e-10);
        }
        // with a small-jump density on both routes
        let chars = Characteristics::constant(
            T1,
            0.2,
            vec![0.4],
            vec![vec![0.3]],
            LevyMeasure {
                atoms: vec![],
                density: Some(SmallJumpDensity::new(0.5, 2.5, 1e-3, 2.0)),
            },
        );
        let sym = build_symbol(&chars, 2.0, 0).unwrap();
        for s in [0.3, 1.7, 4.2] {
            let got = synthesize(&sym, &f, &torus_el(s)).unwrap();
            let gen = apply_generator(&chars, &f, &torus_el(s)).unwrap();
            assert!((got - gen).abs() < 1e-10);
        }
    }

    #[test]
    fn test_synthesis_variable_coefficients_on_grid() {
        // non-Hunt symbols live on the Haar grid; synthesis there matches
        // the generator, and off-grid points are rejected
        let cfield = forward_ft_real(|g| 1.0 + 0.5 * g.angles()[0].cos(), T1, 2.0, 16);
        let mut chars =
            Characteristics::constant(T1, 0.0, vec![0.2], vec![vec![0.4]], LevyMeasure::default());
        chars.c = CharField::Field(cfield);
        let sym = build_symbol(&chars, 3.0, 12).unwrap();
        assert!(!sym.hunt_constant);
        assert_eq!(sym.sigma_grid.len(), 12);
        let f = forward_ft_real(|g| g.angles()[0].cos(), T1, 2.0, 16);
        for sigma in &sym.sigma_grid {
            let got = synthesize(&sym, &f, sigma).unwrap();
            let gen = apply_generator(&chars, &f, sigma).unwrap();
            assert!((got - gen).abs() < 1e-11);
        }
        assert!(matches!(
            synthesize(&sym, &f, &torus_el(0.123)).unwrap_err(),
            LieflowError::PointNotOnGrid
        ));
    }

    #[test]
    fn test_heat_evolution_torus() {
        let chars =
            Characteristics::constant(T1, 0.0, vec![0.0], vec![vec![0.5]], LevyMeasure::default());
        let sym = build_symbol(&chars, 2.0, 0).unwrap();
        let f = forward_ft_real(|g| g.angles()[0].cos(), T1, 2.0, 16);
        // t = 0 is the identity
        let f0 = evolve_semigroup(&sym, &f, 0.0).unwrap();
        for (w, m) in &f.coeffs {
            assert!(hs_norm(&(m - &f0.coeffs[w])) < 1e-14);
        }
        // T_t cos = e^{−t/2} cos
        for t in [0.1, 0.5, 2.0] {
            let ft = evolve_semigroup(&sym, &f, t).unwrap();
            for s in [0.4f64, 1.8, 3.3] {
                let want = (-t / 2.0).exp() * s.cos();
                assert!((ft.eval_real(&torus_el(s)) - want).abs() < 1e-12);
            }
        }
        // semigroup law
        let fst = evolve_semigroup(&sym, &evolve_semigroup(&sym, &f, 0.3).unwrap(), 0.7).unwrap();
        let direct = evolve_semigroup(&sym, &f, 1.0).unwrap();
        for (w, m) in &direct.coeffs {
            assert!(hs_norm(&(m - &fst.coeffs[w])) < 1e-10);
        }
    }

    #[test]
    fn test_evolution_derivative_consistency() {
        // Richardson: central differences of T_t f at t = 0 converge to Af
        // at second order in Δt — this pins the LEFT multiplication order
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let chars = random_su2_chars(&mut rng);
        let sym = build_symbol(&chars, 3.0, 0).unwrap();
        let f = random_real_bandlimited(GroupId::Su2, 3.0, 2.0, &mut rng);
        let sigma = su2_el([0.7, -0.3, 0.4]);
        let af = apply_generator(&chars, &f, &sigma).unwrap();
        let diff = |dt: f64| -> f64 {
            let plus = evolve_semigroup(&sym, &f, dt).unwrap();
            let minus = &f; // T_0 = id; forward difference at 0 has O(dt) bias,
                            // so use (T_{2dt} − T_0)/2dt vs (T_dt − T_0)/dt Richardson
            let g1 = (plus.eval_real(&sigma) - minus.eval_real(&sigma)) / dt;
            g1
        };
        let d1 = diff(1e-3);
        let d2 = diff(5e-4);
        // first-order bias halves; Richardson combination kills it
        let err1 = (d1 - af).abs();
        let err2 = (d2 - af).abs();
        assert!(err2 < 0.6 * err1 + 1e-12, "errors {err1} {err2}");
        let extrapolated = 2.0 * d2 - d1;
        assert!((extrapolated - af).abs() < 0.05 * err1.max(1e-12) + 1e-9);
    }

    #[test]
    fn test_contraction_and_positivity() {
        // c = 0 Hunt semigroup: grid max does not grow, grid min does not
        // fall below min f (up to tolerance)
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut chars = random_su2_chars(&mut rng);
        chars.c = CharField::Const(0.0);
        let sym = build_symbol(&chars, 3.0, 0).unwrap();
        let f = random_real_bandlimited(GroupId::Su2, 3.0, 1.5, &mut rng);
        let grid: Vec<GroupElement> = haar_quadrature(GroupId::Su2, 9)
            .into_iter()
            .map(|q| q.point)
            .collect();
        let bounds = |h: &FourierCoefficients| {
            let vals: Vec<f64> = grid.iter().map(|g| h.eval_real(g)).collect();
            (
                vals.iter().cloned().fold(f64::INFINITY, f64::min),
                vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        let (min0, max0) = bounds(&f);
        for t in [0.2, 1.0] {
            let ft = evolve_semigroup(&sym, &f, t).unwrap();
            let (min_t, max_t) = bounds(&ft);
            assert!(max_t <= max0 + 1e-8);
            assert!(min_t >= min0 - 1e-8);
        }
    }

    #[test]
    fn test_killed_constant_mass() {
        // with killing c, T_t 1 = e^{−ct}
        let chars = Characteristics::constant(
            T1,
            0.5,
            vec![0.0],
            vec![vec![0.3]],
            LevyMeasure::default(),
        );
        let sym = build_symbol(&chars, 1.0, 0).unwrap();
        let one = FourierCoefficients::constant(T1, 1.0);
        for t in [0.5, 1.0, 2.0] {
            let ft = evolve_semigroup(&sym, &one, t).unwrap();
            for s in [0.0, 2.1] {
                assert!((ft.eval_real(&torus_el(s)) - (-0.5 * t).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn test_growth_bound_rows() {
        // SU(2) Laplacian: ‖j(λ)‖_HS = ℓ(ℓ+1)√(2ℓ+1), so the m+2 = 3 ratio
        // decays like ℓ^{-1/2}
        let a = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let chars =
            Characteristics::constant(GroupId::Su2, 0.0, vec![0.0; 3], a, LevyMeasure::default());
        let sym = build_symbol(&chars, 8.0, 0).unwrap();
        let rows = growth_bound_check(&sym);
        for (norm, ratio) in &rows {
            if *norm == 0.0 {
                assert_eq!(*ratio, 0.0);
                continue;
            }
            let ell = norm / 2.0;
            let want = ell * (ell + 1.0) * (2.0 * ell + 1.0).sqrt() / (1.0 + norm.powi(3));
            assert!((ratio - want).abs() < 1e-12 * (1.0 + want));
        }
        // ratios decrease beyond the first few weights
        let ratios: Vec<f64> = rows.iter().skip(2).map(|(_, r)| *r).collect();
        for i in 1..ratios.len() {
            assert!(ratios[i] <= ratios[i - 1] + 1e-12);
        }
    }

    #[test]
    fn test_evolution_errors() {
        let chars =
            Characteristics::constant(T1, 0.0, vec![0.0], vec![vec![0.5]], LevyMeasure::default());
        let sym = build_symbol(&chars, 1.0, 0).unwrap();
        let f = forward_ft_real(|g| (2.0 * g.angles()[0]).cos(), T1, 2.0, 16);
        assert!(matches!(
            evolve_semigroup(&sym, &f, 1.0).unwrap_err(),
            LieflowError::MissingWeight { .. }
        ));
        let g = forward_ft_real(|g| g.angles()[0].cos(), T1, 1.0, 16);
        assert!(matches!(
            evolve_semigroup(&sym, &g, -0.5).unwrap_err(),
            LieflowError::NegativeTime { .. }
        ));
        // σ-dependent symbols refuse spectral evolution
        let mut vchars = chars.clone();
        vchars.c = CharField::Field(forward_ft_real(
            |g: &GroupElement| 1.0 + 0.1 * g.angles()[0].cos(),
            T1,
            1.0,
            8,
        ));
        let vsym = build_symbol(&vchars, 1.0, 8).unwrap();
        assert!(matches!(
            evolve_semigroup(&vsym, &g, 0.5).unwrap_err(),
            LieflowError::NonConstantCharacteristics { .. }
        ));
    }

    #[test]
    fn test_symbol_norm_closed_form() {
        // ‖j‖_HS for the SU(2) Laplacian in closed form, k = 2ℓ
        let a = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let chars =
            Characteristics::constant(GroupId::Su2, 0.0, vec![0.0; 3], a, LevyMeasure::default());
        for k in [1i64, 3, 6, 10] {
            let ell = k as f64 / 2.0;
            let ir = Irrep::new(GroupId::Su2, Weight::new(vec![k])).unwrap();
            let j = symbol_at(&chars, &GroupElement::identity(GroupId::Su2), &ir).unwrap();
            let want = ell * (ell + 1.0) * (2.0 * ell + 1.0).sqrt();
            assert!((hs_norm(&j) - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn test_hard_cutoff_in_symbol() {
        // an atom outside the chart contributes π(τ) − I with no
        // compensating derivative term
        let theta0 = 0.97 * PI;
        let chars = Characteristics::constant(
            T1,
            0.0,
            vec![0.0],
            vec![vec![0.0]],
            LevyMeasure {
                atoms: vec![LevyAtom {
                    point: torus_el(theta0),
                    weight: 1.3,
                }],
                density: None,
            },
        );
        let ir = Irrep::new(T1, Weight::new(vec![2])).unwrap();
        let got = symbol_at(&chars, &GroupElement::identity(T1), &ir).unwrap()[(0, 0)];
        let want = (Complex64::new(0.0, 2.0 * theta0).exp() - Complex64::new(1.0, 0.0)) * 1.3;
        assert!((got - want).norm() < 1e-13);
    }
}
