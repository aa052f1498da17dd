//! Monte Carlo simulation of (killed) Lévy processes with constant
//! characteristics, and empirical semigroup estimation.
//!
//! Per step of size h = t/steps, a path at g updates as
//!
//!   g ← g · exp( Σ_i (b̃_i h + √h η_i) X_i ),       η ~ N(0, 2a·h),
//!
//! where b̃_i = b_i − φ·∫_U x_i(τ) μ(dτ) folds the jump compensation into
//! the drift (the generator's integrand subtracts Σ x_i(τ)X_i f, which for
//! finite measures is exactly a drift correction). Jumps arrive as a
//! Poisson(φ·μ(G)·h) number of right-multiplications by atoms sampled from
//! the normalized effective measure; killing marks the path dead with
//! probability 1 − e^{−c·h} per step. Dead paths contribute 0 to
//! estimators (sub-probability semigroup convention, mass e^{−ct}).
//!
//! Reproducibility: each path uses an independent substream of a
//! counter-based generator (ChaCha8, stream id = path index), so results
//! are bit-identical for a fixed (config, seed) regardless of thread
//! count. Draw order within a step is fixed: Gaussian increments, then the
//! Poisson jump count, then one uniform per jump, then the killing
//! uniform; draws are skipped entirely (not consumed) when the matching
//! term is structurally absent (no diffusion axes, no atoms, c = 0).
//!
//! On T^d every ingredient of the scheme is exact in distribution
//! (increments commute), so the only Monte Carlo error is statistical; on
//! SU(2) the splitting carries the usual O(h) weak bias.

use crate::error::{LieflowError, Result};
use crate::fourier::FourierCoefficients;
use crate::generator::{Characteristics, LevyAtom};
use crate::group::{AlgebraVector, GroupElement, GroupId};
use crate::linalg::psd_sqrt;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Poisson, StandardNormal};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct PathConfig {
    pub t_end: f64,
    pub steps: usize,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub endpoints: Vec<GroupElement>,
    pub alive: Vec<bool>,
    pub meta: PathConfig,
}

/// Internal per-path state: raw angles on T^d (increments are exact
/// additions), quaternion-backed group elements on SU(2).
enum State {
    Torus(Vec<f64>),
    Su2(GroupElement),
}

impl State {
    fn advance(&mut self, v: &[f64]) {
        match self {
            State::Torus(angles) => {
                for (a, dv) in angles.iter_mut().zip(v) {
                    *a += dv;
                }
            }
            State::Su2(g) => {
                let inc = GroupElement::exp(
                    &AlgebraVector::new(GroupId::Su2, v.to_vec()).expect("finite increment"),
                );
                *g = g.mul(&inc);
            }
        }
    }

    fn jump(&mut self, atom: &GroupElement) {
        match self {
            State::Torus(angles) => {
                for (a, da) in angles.iter_mut().zip(atom.angles()) {
                    *a += da;
                }
            }
            State::Su2(g) => *g = g.mul(atom),
        }
    }

    fn into_element(self) -> GroupElement {
        match self {
            State::Torus(angles) => GroupElement::from_angles(&angles).expect("finite angles"),
            State::Su2(g) => g,
        }
    }
}

pub fn simulate_paths(
    chars: &Characteristics,
    cfg: &PathConfig,
    start: &GroupElement,
) -> Result<PathEnsemble> {
    let cc = chars.constant_view()?;
    if start.group() != chars.group {
        return Err(LieflowError::GroupMismatch {
            left: start.group().to_string(),
            right: chars.group.to_string(),
        });
    }
    if !(cfg.t_end > 0.0) {
        return Err(LieflowError::NegativeTime { t: cfg.t_end });
    }
    assert!(cfg.steps >= 1 && cfg.n_paths >= 1, "degenerate path config");
    let n = chars.group.algebra_dim();
    let h = cfg.t_end / cfg.steps as f64;

    // effective measure, scaled by the (constant) modulation
    let atoms: Vec<LevyAtom> = chars
        .levy
        .effective_atoms(chars.group, &chars.chart)?
        .into_iter()
        .map(|a| LevyAtom {
            point: a.point,
            weight: a.weight * cc.modulation,
        })
        .collect();
    let rate: f64 = atoms.iter().map(|a| a.weight).sum();
    if !rate.is_finite() {
        return Err(LieflowError::InfiniteJumpMass);
    }
    // cumulative weights for inverse-CDF atom sampling
    let cumulative: Vec<f64> = atoms
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a.weight;
            Some(*acc)
        })
        .collect();

    // compensated drift b̃ = b − ∫_U x dμ(effective, modulated)
    let mut drift = cc.b.clone();
    for a in &atoms {
        let x = chars.chart.coords_or_zero(&a.point);
        for (d, xi) in drift.iter_mut().zip(&x.coeffs) {
            *d -= a.weight * xi;
        }
    }
    let mut a_mat = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            a_mat[(j, k)] = 2.0 * h * cc.a[j][k];
        }
    }
    let noise = psd_sqrt(&a_mat); // increment covariance 2a·h per step
    let has_noise = noise.norm() > 0.0;
    let survive_step = (-cc.c * h).exp();
    let poisson = if rate > 0.0 {
        Some(Poisson::new(rate * h).expect("positive finite rate"))
    } else {
        None
    };

    let results: Vec<(GroupElement, bool)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path_idx| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path_idx as u64);
            let mut state = match chars.group {
                GroupId::Torus { .. } => State::Torus(start.angles().to_vec()),
                GroupId::Su2 => State::Su2(start.clone()),
            };
            let mut alive = true;
            let mut v = vec![0.0; n];
            let mut xi = vec![0.0; n];
            for _ in 0..cfg.steps {
                // 1. continuous part
                for (vi, di) in v.iter_mut().zip(&drift) {
                    *vi = di * h;
                }
                if has_noise {
                    for x in xi.iter_mut() {
                        *x = rng.sample(StandardNormal);
                    }
                    for i in 0..n {
                        for j in 0..n {
                            v[i] += noise[(i, j)] * xi[j];
                        }
                    }
                }
                state.advance(&v);
                // 2. jumps
                if let Some(p) = &poisson {
                    let count: f64 = rng.sample(*p);
                    for _ in 0..count as u64 {
                        let u: f64 = rng.random::<f64>() * rate;
                        let k = cumulative.partition_point(|&cw| cw < u);
                        state.jump(&atoms[k.min(atoms.len() - 1)].point);
                    }
                }
                // 3. killing
                if cc.c > 0.0 && rng.random::<f64>() > survive_step {
                    alive = false;
                    break;
                }
            }
            (state.into_element(), alive)
        })
        .collect();

    let (endpoints, alive) = results.into_iter().unzip();
    Ok(PathEnsemble {
        endpoints,
        alive,
        meta: *cfg,
    })
}

/// Mean and standard error of f over the ensemble, dead paths counting 0.
pub fn empirical_semigroup(f: &FourierCoefficients, ens: &PathEnsemble) -> (f64, f64) {
    let values: Vec<f64> = ens
        .endpoints
        .par_iter()
        .zip(&ens.alive)
        .map(|(g, &alive)| if alive { f.eval_real(g) } else { 0.0 })
        .collect();
    // fixed-order reduction, independent of the evaluation schedule
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Surviving fraction and its binomial standard error.
pub fn survival_fraction(ens: &PathEnsemble) -> (f64, f64) {
    let n = ens.alive.len() as f64;
    let p = ens.alive.iter().filter(|&&a| a).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct SmallTimeEstimate {
    pub t: f64,
    /// (1/t)·E[f(Y_t)]
    pub estimate: f64,
    pub std_error: f64,
}

/// Small-time limit scan: (1/t)·E[f(Y_t)] over a sequence of times, each
/// estimated from a fresh single-step ensemble (one step is exact in
/// distribution for finite-activity jump parts on T^d). For f vanishing
/// near the start point the sequence converges to Σ_k w_k f(g·τ_k).
pub fn small_time_limit(
    chars: &Characteristics,
    f: &FourierCoefficients,
    start: &GroupElement,
    ts: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<SmallTimeEstimate>> {
    let mut out = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let cfg = PathConfig {
            t_end: t,
            steps: 1,
            n_paths,
            seed: seed.wrapping_add(i as u64),
        };
        let ens = simulate_paths(chars, &cfg, start)?;
        let (est, se) = empirical_semigroup(f, &ens);
        out.push(SmallTimeEstimate {
            t,
            estimate: est / t,
            std_error: se / t,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{forward_ft_real, random_real_bandlimited};
    use crate::generator::{CharField, LevyMeasure};
    use crate::symbol::{build_symbol, evolve_semigroup};
    use rand::SeedableRng;

    const T1: GroupId = GroupId::Torus { dim: 1 };

    fn torus_el(t: f64) -> GroupElement {
        GroupElement::from_angles(&[t]).unwrap()
    }

    fn cos_coeffs() -> FourierCoefficients {
        forward_ft_real(|g| g.angles()[0].cos(), T1, 2.0, 16)
    }

    #[test]
    fn test_pure_drift_exact() {
        let chars =
            Characteristics::constant(T1, 0.0, vec![1.0], vec![vec![0.0]], LevyMeasure::default());
        let cfg = PathConfig {
            t_end: 1.0,
            steps: 7,
            n_paths: 5,
            seed: 1,
        };
        let ens = simulate_paths(&chars, &cfg, &GroupElement::identity(T1)).unwrap();
        for (g, alive) in ens.endpoints.iter().zip(&ens.alive) {
            assert!(alive);
            assert!((g.angles()[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn test_determinism_and_modulation_equivalence() {
        let levy = LevyMeasure {
            atoms: vec![LevyAtom {
                point: torus_el(0.9),
                weight: 0.4,
            }],
            density: None,
        };
        let chars = Characteristics::constant(T1, 0.3, vec![0.2], vec![vec![0.5]], levy.clone());
        let cfg = PathConfig {
            t_end: 0.7,
            steps: 20,
            n_paths: 64,
            seed: 99,
        };
        let e1 = simulate_paths(&chars, &cfg, &GroupElement::identity(T1)).unwrap();
        let e2 = simulate_paths(&chars, &cfg, &GroupElement::identity(T1)).unwrap();
        for (a, b) in e1.endpoints.iter().zip(&e2.endpoints) {
            assert_eq!(a.angles()[0].to_bits(), b.angles()[0].to_bits());
        }
        assert_eq!(e1.alive, e2.alive);
        // modulation φ = 2 is bitwise-identical to doubling the atom mass
        let mut modulated = chars.clone();
        modulated.modulation = CharField::Const(2.0);
        let doubled_levy = LevyMeasure {
            atoms: vec![LevyAtom {
                point: torus_el(0.9),
                weight: 0.8,
            }],
            density: None,
        };
        let doubled =
            Characteristics::constant(T1, 0.3, vec![0.2], vec![vec![0.5]], doubled_levy);
        let em = simulate_paths(&modulated, &cfg, &GroupElement::identity(T1)).unwrap();
        let ed = simulate_paths(&doubled, &cfg, &GroupElement::identity(T1)).unwrap();
        for (a, b) in em.endpoints.iter().zip(&ed.endpoints) {
            assert_eq!(a.angles()[0].to_bits(), b.angles()[0].to_bits());
        }
    }

    #[test]
    fn test_killing_survival_fraction() {
        let chars =
            Characteristics::constant(T1, 0.5, vec![0.0], vec![vec![0.0]], LevyMeasure::default());
        let cfg = PathConfig {
            t_end: 2.0,
            steps: 16,
            n_paths: 20_000,
            seed: 7,
        };
        let ens = simulate_paths(&chars, &cfg, &GroupElement::identity(T1)).unwrap();
        let (p, se) = survival_fraction(&ens);
        let want = (-1.0f64).exp();
        assert!(
            (p - want).abs() < 3.0 * se,
            "survival {p} vs {want} (se {se})"
        );
        // f ≡ 1 estimates the surviving mass with matching SE structure
        let one = FourierCoefficients::constant(T1, 1.0);
        let (est, _) = empirical_semigroup(&one, &ens);
        assert!((est - p).abs() < 1e-14);
    }

    #[test]
    fn test_diffusion_variance() {
        // a = 1, small t: endpoint variance ≈ 2·a·t
        let chars =
            Characteristics::constant(T1, 0.0, vec![0.0], vec![vec![1.0]], LevyMeasure::default());
        let cfg = PathConfig {
            t_end: 0.01,
            steps: 4,
            n_paths: 20_000,
            seed: 13,
        };
        let ens = simulate_paths(&chars, &cfg, &GroupElement::identity(T1)).unwrap();
        // endpoints are stored reduced to [0, 2π); fold back to (−π, π]
        let vals: Vec<f64> = ens
            .endpoints
            .iter()
            .map(|g| crate::group::principal_angle(g.angles()[0]))
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let want = 0.02;
        let se_var = want * (2.0 / (n - 1.0)).sqrt();
        assert!(
            (var - want).abs() < 3.0 * se_var,
            "variance {var} vs {want}"
        );
    }

    #[test]
    fn test_heat_mc_vs_spectral() {
        // exact-in-distribution on the torus: only statistical error
        let chars =
            Characteristics::constant(T1, 0.0, vec![0.0], vec![vec![1.0]], LevyMeasure::default());
        let f = cos_coeffs();
        let cfg = PathConfig {
            t_end: 0.5,
            steps: 50,
            n_paths: 20_000,
            seed: 21,
        };
        let ens = simulate_paths(&chars, &cfg, &GroupElement::identity(T1)).unwrap();
        let (est, se) = empirical_semigroup(&f, &ens);
        let want = (-0.5f64).exp(); // e^{t·j(±1)} with j = −1
        assert!((est - want).abs() < 3.0 * se, "{est} vs {want} (se {se})");
    }

    #[test]
    fn test_compound_poisson_vs_spectral() {
        let levy = LevyMeasure {
            atoms: vec![LevyAtom {
                point: torus_el(1.0),
                weight: 0.8,
            }],
            density: None,
        };
        let chars = Characteristics::constant(T1, 0.0, vec![0.0], vec![vec![0.0]], levy);
        let f = cos_coeffs();
        let t = 0.4;
        let sym = build_symbol(&chars, 2.0, 0).unwrap();
        let want = evolve_semigroup(&sym, &f, t)
            .unwrap()
            .eval_real(&GroupElement::identity(T1));
        let cfg = PathConfig {
            t_end: t,
            steps: 10,
            n_paths: 20_000,
            seed: 33,
        };
        let ens = simulate_paths(&chars, &cfg, &GroupElement::identity(T1)).unwrap();
        let (est, se) = empirical_semigroup(&f, &ens);
        assert!((est - want).abs() < 3.0 * se, "{est} vs {want} (se {se})");
    }

    #[test]
    fn test_left_invariance_in_law() {
        // ensemble from g matches L_g f ensemble from e in expectation
        let a = vec![
            vec![0.3, 0.0, 0.1],
            vec![0.0, 0.2, 0.0],
            vec![0.1, 0.0, 0.4],
        ];
        let chars = Characteristics::constant(
            GroupId::Su2,
            0.0,
            vec![0.1, -0.2, 0.05],
            a,
            LevyMeasure::default(),
        );
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let f = random_real_bandlimited(GroupId::Su2, 2.0, 2.0, &mut rng);
        let g = GroupElement::exp(
            &AlgebraVector::new(GroupId::Su2, vec![0.6, -0.4, 0.9]).unwrap(),
        );
        let cfg = PathConfig {
            t_end: 0.3,
            steps: 30,
            n_paths: 4000,
            seed: 55,
        };
        let from_g = simulate_paths(&chars, &cfg, &g).unwrap();
        let (est_g, se_g) = empirical_semigroup(&f, &from_g);
        let cfg2 = PathConfig { seed: 56, ..cfg };
        let from_e = simulate_paths(&chars, &cfg2, &GroupElement::identity(GroupId::Su2)).unwrap();
        let lf = f.translate_left(&g);
        let (est_e, se_e) = empirical_semigroup(&lf, &from_e);
        let se = (se_g * se_g + se_e * se_e).sqrt();
        assert!(
            (est_g - est_e).abs() < 3.0 * se,
            "{est_g} vs {est_e} (se {se})"
        );
    }

    #[test]
    fn test_small_time_two_atoms() {
        // (1/t)E[f(Y_t)] → w₁f(τ₁) + w₂f(τ₂) for f vanishing near e
        let levy = LevyMeasure {
            atoms: vec![
                LevyAtom {
                    point: torus_el(1.5),
                    weight: 2.0,
                },
                LevyAtom {
                    point: torus_el(2.5),
                    weight: 0.7,
                },
            ],
            density: None,
        };
        let chars = Characteristics::constant(T1, 0.0, vec![0.0], vec![vec![0.0]], levy);
        // f(θ) = (1−cos θ)²/4 vanishes to second order at e
        let f = forward_ft_real(
            |g| (1.0 - g.angles()[0].cos()).powi(2) / 4.0,
            T1,
            2.0,
            16,
        );
        let want = 2.0 * f.eval_real(&torus_el(1.5)) + 0.7 * f.eval_real(&torus_el(2.5));
        let rows = small_time_limit(
            &chars,
            &f,
            &GroupElement::identity(T1),
            &[1e-3],
            100_000,
            61,
        )
        .unwrap();
        let r = &rows[0];
        assert!(
            (r.estimate - want).abs() < 3.0 * r.std_error,
            "{} vs {want} (se {})",
            r.estimate,
            r.std_error
        );
    }

    #[test]
    fn test_nonconstant_rejected() {
        let mut chars =
            Characteristics::constant(T1, 0.0, vec![0.0], vec![vec![0.5]], LevyMeasure::default());
        chars.c = CharField::Field(forward_ft_real(
            |g: &GroupElement| 1.0 + 0.1 * g.angles()[0].cos(),
            T1,
            1.0,
            8,
        ));
        let cfg = PathConfig {
            t_end: 1.0,
            steps: 2,
            n_paths: 2,
            seed: 1,
        };
        assert!(matches!(
            simulate_paths(&chars, &cfg, &GroupElement::identity(T1)).unwrap_err(),
            LieflowError::NonConstantCharacteristics { .. }
        ));
    }

    #[test]
    fn test_compensation_drift_applied() {
        // pure-jump measure with hard cutoff inside the chart: an
        // atom at θ₀ with weight w adds compensation −w·θ₀ to the drift;
        // with no diffusion and jump rate ~0 impossible — instead verify
        // E[θ_t] for compound Poisson: E[θ_t] = (b − wθ₀)t + E[N_t]·θ₀ = bt
        let (theta0, w) = (0.8, 1.5);
        let levy = LevyMeasure {
            atoms: vec![LevyAtom {
                point: torus_el(theta0),
                weight: w,
            }],
            density: None,
        };
        let chars = Characteristics::constant(T1, 0.0, vec![0.3], vec![vec![0.0]], levy);
        // short horizon keeps paths away from the ±π wrap, so the
        // principal-value mean is the linear mean
        let cfg = PathConfig {
            t_end: 0.2,
            steps: 8,
            n_paths: 40_000,
            seed: 77,
        };
        let ens = simulate_paths(&chars, &cfg, &GroupElement::identity(T1)).unwrap();
        let vals: Vec<f64> = ens
            .endpoints
            .iter()
            .map(|g| crate::group::principal_angle(g.angles()[0]))
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let want = 0.3 * 0.2; // compensation cancels the jump mean drift
        assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want} (se {se})");
    }
}
