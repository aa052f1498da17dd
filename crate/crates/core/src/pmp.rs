//! Positive-maximum-principle verification and recovery of constant
//! characteristics from a black-box operator.
//!
//! A linear operator A on C(G) satisfies the positive maximum principle
//! (PMP) when for every real test function f and every global maximum
//! point ρ with f(ρ) = sup f ≥ 0 the value Af(ρ) is ≤ 0. Operators built
//! from admissible characteristics — killing rate c ≥ 0, arbitrary drift b,
//! positive-semidefinite diffusion a, nonnegative jump weights — satisfy
//! the principle, and violating any one of those sign conditions becomes
//! visible on a modest corpus of random band-limited test functions.
//! [`pmp_check`] automates the search: grid argmax, gradient-ascent polish
//! in exponential coordinates, then the sign test at the polished maximum.
//!
//! A consequence of the PMP, almost positivity, anchors the base point at
//! the identity: if f ≥ 0 and f(e) = 0 then Af(e) ≥ 0 (the value and
//! gradient terms vanish at e, the diffusion sees a local minimum, and the
//! jump integral averages a nonnegative function). [`almost_positive_check`]
//! tests exactly that on squared test functions vanishing at e.
//!
//! Finally, [`extract_characteristics`] inverts the decomposition for a
//! *constant-characteristic* black box: probing with radial bump functions
//! recovers c, the compensated drift, the diffusion matrix and the jump
//! mass outside a separation ball, together with measured residuals for
//! every recovered field.

use crate::error::{LieflowError, Result};
use crate::fourier::{
    forward_ft_real, random_real_bandlimited, required_resolution, FourierCoefficients,
};
use crate::group::{AlgebraVector, Chart, GroupElement, GroupId};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{PI, SQRT_2};

/// Black-box operator evaluator: anything that produces (Af)(σ) for a
/// band-limited f. Implemented for closures, so callers can wrap
/// [`crate::generator::apply_generator`], a symbol synthesis, or an
/// external oracle without exposing the characteristics.
pub trait BlackBoxOp: Sync {
    fn apply(&self, f: &FourierCoefficients, sigma: &GroupElement) -> Result<f64>;
}

impl<F> BlackBoxOp for F
where
    F: Fn(&FourierCoefficients, &GroupElement) -> Result<f64> + Sync,
{
    fn apply(&self, f: &FourierCoefficients, sigma: &GroupElement) -> Result<f64> {
        self(f, sigma)
    }
}

/// One recorded PMP violation: at the polished argmax of test function
/// `fn_id` the function value is nonnegative, yet the operator value
/// exceeds the tolerance.
#[derive(Debug, Clone)]
pub struct PmpViolation {
    pub fn_id: usize,
    pub argmax: GroupElement,
    pub f_max: f64,
    pub af_max: f64,
}

/// Outcome of a [`pmp_check`] run. Every recorded violation satisfies
/// `f_max ≥ 0` and `af_max > tol`; violations are sorted by function id.
#[derive(Debug, Clone)]
pub struct PmpReport {
    pub n_tested: usize,
    pub violations: Vec<PmpViolation>,
    pub tol: f64,
}

impl PmpReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Outcome of an [`almost_positive_check`] run; violations are
/// (function id, Af(e)) pairs with Af(e) < −tol.
#[derive(Debug, Clone)]
pub struct AlmostPositiveReport {
    pub n_tested: usize,
    pub violations: Vec<(usize, f64)>,
    pub tol: f64,
}

impl AlmostPositiveReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Deterministic corpus of random real band-limited test functions whose
/// coefficient entries are Gaussian with magnitude ~ (1 + |λ|)^{−4}.
pub fn standard_corpus(
    group: GroupId,
    n: usize,
    max_norm: f64,
    seed: u64,
) -> Vec<FourierCoefficients> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| random_real_bandlimited(group, max_norm, 4.0, &mut rng))
        .collect()
}

/// Squared-and-shifted corpus for the almost-positivity suite: each entry
/// is (g − g(e))² for a [`standard_corpus`] draw g, hence exactly
/// nonnegative with a double zero at the identity and band-limited to
/// 2·max_norm (products of band-limited functions stay band-limited, so the
/// transform below is exact).
pub fn almost_positive_corpus(
    group: GroupId,
    n: usize,
    max_norm: f64,
    seed: u64,
) -> Vec<FourierCoefficients> {
    let e = GroupElement::identity(group);
    let doubled = 2.0 * max_norm;
    let resolution = required_resolution(group, doubled);
    standard_corpus(group, n, max_norm, seed)
        .into_iter()
        .map(|g| {
            let g0 = g.eval_real(&e);
            forward_ft_real(
                |sigma: &GroupElement| {
                    let v = g.eval_real(sigma) - g0;
                    v * v
                },
                group,
                doubled,
                resolution,
            )
        })
        .collect()
}

/// Gradient-ascent polish iterations after the grid scan.
const POLISH_ITERS: usize = 20;
/// Initial ascent step in chart coordinates.
const POLISH_STEP: f64 = 0.25;
/// Cap on a single polish move so a steep gradient cannot leave the basin
/// located by the grid scan.
const POLISH_MAX_MOVE: f64 = 0.5;

/// Argmax of f: best grid node (ties broken by the first grid index),
/// refined by gradient ascent in exponential coordinates with step halving
/// on failed moves.
fn polish_argmax(f: &FourierCoefficients, grid: &[GroupElement]) -> (GroupElement, f64) {
    let mut best_idx = 0usize;
    let mut best = f64::NEG_INFINITY;
    for (i, g) in grid.iter().enumerate() {
        let v = f.eval_real(g);
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    let dim = f.group.algebra_dim();
    let grads: Vec<FourierCoefficients> = (0..dim).map(|i| f.derivative(i)).collect();
    let mut point = grid[best_idx].clone();
    let mut value = best;
    let mut step = POLISH_STEP;
    for _ in 0..POLISH_ITERS {
        let g: Vec<f64> = grads.iter().map(|d| d.eval_real(&point)).collect();
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(gnorm > 1e-14) {
            break;
        }
        let scale = step.min(POLISH_MAX_MOVE / gnorm);
        let ascent = AlgebraVector::new(f.group, g.iter().map(|v| v * scale).collect())
            .expect("finite ascent direction");
        let candidate = point.mul(&GroupElement::exp(&ascent));
        let candidate_value = f.eval_real(&candidate);
        if candidate_value > value {
            point = candidate;
            value = candidate_value;
        } else {
            step *= 0.5;
        }
    }
    (point, value)
}

/// Verify the positive maximum principle for a black-box operator over a
/// corpus of real band-limited test functions.
///
/// For each function the grid argmax is located (ties broken by the first
/// grid index) and polished by chart-coordinate gradient ascent; whenever
/// the polished maximum value is ≥ 0 the operator value there must not
/// exceed `tol`. Functions are checked independently in parallel and the
/// report lists violations sorted by function id.
pub fn pmp_check<A: BlackBoxOp + ?Sized>(
    op: &A,
    test_fns: &[FourierCoefficients],
    grid: &[GroupElement],
    tol: f64,
) -> Result<PmpReport> {
    assert!(!grid.is_empty(), "empty search grid");
    let checked: Vec<Option<PmpViolation>> = test_fns
        .par_iter()
        .enumerate()
        .map(|(fn_id, f)| {
            let (argmax, f_max) = polish_argmax(f, grid);
            if f_max >= 0.0 {
                let af_max = op.apply(f, &argmax)?;
                if af_max > tol {
                    return Ok(Some(PmpViolation {
                        fn_id,
                        argmax,
                        f_max,
                        af_max,
                    }));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    Ok(PmpReport {
        n_tested: test_fns.len(),
        violations: checked.into_iter().flatten().collect(),
        tol,
    })
}

/// Verify almost positivity at the identity: each test function must be
/// nonnegative with f(e) = 0, and then Af(e) ≥ −tol is required.
///
/// Errors with `InvalidTestFunction` if a test function has |f(e)| > tol
/// or dips below −tol on the validation grid.
pub fn almost_positive_check<A: BlackBoxOp + ?Sized>(
    op: &A,
    test_fns: &[FourierCoefficients],
    grid: &[GroupElement],
    tol: f64,
) -> Result<AlmostPositiveReport> {
    let checked: Vec<Option<(usize, f64)>> = test_fns
        .par_iter()
        .enumerate()
        .map(|(fn_id, f)| {
            let e = GroupElement::identity(f.group);
            let fe = f.eval_real(&e);
            if fe.abs() > tol {
                return Err(LieflowError::InvalidTestFunction {
                    reason: format!("test function {fn_id} has f(e) = {fe:.3e}, expected 0"),
                });
            }
            let min = grid
                .iter()
                .map(|g| f.eval_real(g))
                .fold(f64::INFINITY, f64::min);
            if min < -tol {
                return Err(LieflowError::InvalidTestFunction {
                    reason: format!("test function {fn_id} attains {min:.3e} < 0 on the grid"),
                });
            }
            let af = op.apply(f, &e)?;
            if af < -tol {
                return Ok(Some((fn_id, af)));
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    Ok(AlmostPositiveReport {
        n_tested: test_fns.len(),
        violations: checked.into_iter().flatten().collect(),
        tol,
    })
}

/// Constant characteristics recovered from a black-box operator along with
/// per-field residual estimates.
///
/// The drift is reported in the compensated convention: `b[i]` estimates
/// b_i − ∫_U x_i dμ, where U is the chart. Only that combination is
/// observable from local probes without resolving μ inside the chart; it
/// is also exactly the effective drift used by the path simulator.
#[derive(Debug, Clone)]
pub struct ExtractedCharacteristics {
    pub c: f64,
    pub b: Vec<f64>,
    pub a: DMatrix<f64>,
    /// Jump mass outside the separation ball, μ(G \ B_δ(e)). Under the
    /// separation precondition this is the total jump mass.
    pub jump_mass_outside: f64,
    pub residuals: ExtractionResiduals,
}

/// Nonnegative per-field error estimates, assembled from measured probe
/// imperfections: deviations of the synthesized probes from their ideal
/// jets at the identity, the worst synthesis error along radial rays
/// (which bounds the error of every jump-side quadrature), and the
/// disagreement between two independently shaped plateau profiles (which
/// measures jump mass inside the forbidden shell).
#[derive(Debug, Clone)]
pub struct ExtractionResiduals {
    pub c: f64,
    pub b: Vec<f64>,
    pub a: DMatrix<f64>,
    pub jump_mass: f64,
}

/// Smooth erf-profile step: ≈0 below r0, ≈1 above r1. The transition is a
/// Gaussian CDF with standard deviation (r1 − r0)/8, so the profile's
/// spectral tail decays like exp(−(Nσ)²/2) and is negligible at the
/// working band limits.
fn smooth_rise(r: f64, r0: f64, r1: f64) -> f64 {
    let sigma = (r1 - r0) / 8.0;
    let mid = 0.5 * (r0 + r1);
    0.5 * (1.0 + libm::erf((r - mid) / (sigma * SQRT_2)))
}

/// One extraction probe: synthesized coefficients, the exact closure they
/// approximate, and the ideal jet at the identity (value, gradient, second
/// derivatives) used to measure band-limit deviations.
struct Probe {
    name: String,
    coeffs: FourierCoefficients,
    exact: Box<dyn Fn(&GroupElement) -> f64 + Sync>,
    ideal_value: f64,
    ideal_grad: Vec<f64>,
    ideal_hess: DMatrix<f64>,
}

/// Largest band limit whose exactness rule the resolution satisfies.
fn band_for_resolution(group: GroupId, resolution: usize) -> Result<f64> {
    let band = match group {
        GroupId::Torus { .. } => resolution.saturating_sub(1) / 4,
        GroupId::Su2 => resolution.saturating_sub(3) / 2,
    };
    if band < 2 {
        return Err(LieflowError::ResolutionTooLow {
            resolution,
            required: required_resolution(group, 2.0),
        });
    }
    Ok(band as f64)
}

/// Deterministic radial sample used to measure probe synthesis error away
/// from the identity: points r·v for r ∈ [δ/2, 0.999π] along every signed
/// axis and every signed two-axis diagonal.
fn ray_samples(group: GroupId, delta: f64) -> Vec<GroupElement> {
    let dim = group.algebra_dim();
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for axis in 0..dim {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[axis] = sign;
            directions.push(v);
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0)] {
                let mut v = vec![0.0; dim];
                v[i] = si / SQRT_2;
                v[j] = sj / SQRT_2;
                directions.push(v);
            }
        }
    }
    let r_lo = 0.5 * delta;
    let r_hi = 0.999 * PI;
    let n = 96usize;
    let mut points = Vec::with_capacity(directions.len() * n);
    for dir in &directions {
        for k in 0..n {
            let r = r_lo + (r_hi - r_lo) * (k as f64 + 0.5) / n as f64;
            let v: Vec<f64> = dir.iter().map(|d| d * r).collect();
            points.push(GroupElement::exp(
                &AlgebraVector::new(group, v).expect("finite ray point"),
            ));
        }
    }
    points
}

/// Band-limit residual of one probe: measured jet deviations at e weighted
/// by the recovered coefficient magnitudes, plus the worst synthesis error
/// on the radial sample weighted by the recovered jump mass.
fn probe_residual(
    probe: &Probe,
    c_abs: f64,
    grad_coefs: &[f64],
    a_abs: &DMatrix<f64>,
    mass_abs: f64,
    rays: &[GroupElement],
    e: &GroupElement,
) -> f64 {
    let dim = grad_coefs.len();
    let mut res = c_abs * (probe.coeffs.eval_real(e) - probe.ideal_value).abs();
    let first: Vec<FourierCoefficients> = (0..dim).map(|i| probe.coeffs.derivative(i)).collect();
    for i in 0..dim {
        res += grad_coefs[i] * (first[i].eval_real(e) - probe.ideal_grad[i]).abs();
    }
    for l in 0..dim {
        for m in 0..dim {
            if a_abs[(l, m)] == 0.0 {
                continue;
            }
            let h = first[m].derivative(l).eval_real(e);
            res += a_abs[(l, m)] * (h - probe.ideal_hess[(l, m)]).abs();
        }
    }
    let leak = rays
        .iter()
        .map(|g| (probe.coeffs.eval_real(g) - (probe.exact)(g)).abs())
        .fold(0.0f64, f64::max);
    res + mass_abs * leak
}

/// Recover constant characteristics from a black-box, left-invariant PMP
/// operator whose jump measure is separated from the identity by more than
/// `delta` in chart distance.
///
/// Probe recipe, with ε a bump equal to 1 on the δ-ball decaying to 0 on
/// [δ, 0.95·radius] and χ a plateau equal to 1 outside the δ-ball and 0
/// near e (transition on [0.3δ, δ]):
///
/// * c = −A1(e): for f ≡ 1 every derivative and every compensated jump
///   term vanishes identically, so the recovery is exact.
/// * jump_mass_outside = A(χ)(e): the jet of χ vanishes at e, leaving the
///   jump integral ∫χ dμ = μ(G \ B_δ).
/// * a_jk = ½[A(ε·f_{e_j+e_k})(e) − A(ε·f_{e_j})(e) − A(ε·f_{e_k})(e)
///   − A(ε·x_j·x_k·χ)(e)] with f_ξ = ½(Σᵢ ξᵢxᵢ)²: the quadratic probes
///   leave ξᵀaξ plus a jump term, the polarization isolates 2a_jk +
///   ∫ε·x_j·x_k dμ, and the χ-masked probe measures that same jump
///   quadrature through the operator itself. Diagonal entries use the
///   ξ = e_j case directly: a_jj = A(ε·f_{e_j})(e) − ½A(ε·x_j²·χ)(e).
/// * b_i = A(ε·xᵢ)(e) − A(ε·xᵢ·χ)(e): the first call returns
///   b_i + ∫(ε·xᵢ − xᵢ·1_U) dμ, the second the jump part ∫ε·xᵢ dμ, so the
///   difference is the compensated drift b_i − ∫_U xᵢ dμ.
///
/// Every correction probe is recomputed with an independently shaped
/// plateau χ′ (transition on [0.25δ, 0.95δ]). Under the separation
/// precondition both plateaus equal 1 on the jump support and the probed
/// values agree up to band-limit error; any excess disagreement measures
/// jump mass inside the forbidden shell and triggers `SeparationViolated`
/// when it exceeds 10% of the correction value.
pub fn extract_characteristics<A: BlackBoxOp + ?Sized>(
    op: &A,
    group: GroupId,
    chart: &Chart,
    delta: f64,
    resolution: usize,
) -> Result<ExtractedCharacteristics> {
    let dim = group.algebra_dim();
    let eps_outer = 0.95 * chart.radius;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(LieflowError::SeparationViolated {
            reason: format!("separation radius {delta} must be positive and finite"),
        });
    }
    if delta >= eps_outer - 0.05 * chart.radius {
        return Err(LieflowError::SeparationViolated {
            reason: format!(
                "separation radius {delta:.3} leaves no bump transition inside chart radius {:.3}",
                chart.radius
            ),
        });
    }
    let band = band_for_resolution(group, resolution)?;
    let e = GroupElement::identity(group);
    let chart_c = *chart;

    let chi = move |g: &GroupElement| smooth_rise(g.log_norm(), 0.3 * delta, delta);
    let chi_p = move |g: &GroupElement| smooth_rise(g.log_norm(), 0.25 * delta, 0.95 * delta);
    let eps = move |g: &GroupElement| 1.0 - smooth_rise(g.log_norm(), delta, eps_outer);
    let coord = move |g: &GroupElement, i: usize| chart_c.coords_or_zero(g).coeffs[i];

    // Second derivatives of the coordinate functions at e are antisymmetric
    // (half the structure constants), so they contract to zero against the
    // symmetric diffusion matrix; the ideal jets below record them exactly
    // so that only genuine band-limit error enters the residuals.
    let structure = |l: usize, m: usize, i: usize| -> f64 {
        match group {
            GroupId::Torus { .. } => 0.0,
            GroupId::Su2 => {
                // Levi-Civita symbol for [X_l, X_m] = Σ ε_{lmi} X_i.
                if l == m || l == i || m == i {
                    0.0
                } else if (l, m, i) == (0, 1, 2) || (l, m, i) == (1, 2, 0) || (l, m, i) == (2, 0, 1)
                {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    };

    let mut probes: Vec<Probe> = Vec::new();
    let zeros_v = vec![0.0; dim];
    let zeros_m = DMatrix::<f64>::zeros(dim, dim);
    let add = |name: String,
                   exact: Box<dyn Fn(&GroupElement) -> f64 + Sync>,
                   ideal_value: f64,
                   ideal_grad: Vec<f64>,
                   ideal_hess: DMatrix<f64>,
                   probes: &mut Vec<Probe>|
     -> usize {
        let coeffs = forward_ft_real(|g: &GroupElement| exact(g), group, band, resolution);
        probes.push(Probe {
            name,
            coeffs,
            exact,
            ideal_value,
            ideal_grad,
            ideal_hess,
        });
        probes.len() - 1
    };

    // f ≡ 1 is represented exactly by a single coefficient; no transform.
    let i_one = {
        probes.push(Probe {
            name: "one".to_string(),
            coeffs: FourierCoefficients::constant(group, 1.0),
            exact: Box::new(|_: &GroupElement| 1.0),
            ideal_value: 1.0,
            ideal_grad: zeros_v.clone(),
            ideal_hess: zeros_m.clone(),
        });
        probes.len() - 1
    };
    let i_chi = add(
        "chi".to_string(),
        Box::new(chi),
        0.0,
        zeros_v.clone(),
        zeros_m.clone(),
        &mut probes,
    );
    let i_chi_p = add(
        "chi_prime".to_string(),
        Box::new(chi_p),
        0.0,
        zeros_v.clone(),
        zeros_m.clone(),
        &mut probes,
    );
    let mut i_eps_x = Vec::with_capacity(dim);
    let mut i_eps_x_chi = Vec::with_capacity(dim);
    let mut i_eps_x_chi_p = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut grad = zeros_v.clone();
        grad[i] = 1.0;
        let mut hess = zeros_m.clone();
        for l in 0..dim {
            for m in 0..dim {
                hess[(l, m)] = 0.5 * structure(l, m, i);
            }
        }
        i_eps_x.push(add(
            format!("eps_x{i}"),
            Box::new(move |g: &GroupElement| eps(g) * coord(g, i)),
            0.0,
            grad,
            hess,
            &mut probes,
        ));
        i_eps_x_chi.push(add(
            format!("eps_x{i}_chi"),
            Box::new(move |g: &GroupElement| eps(g) * coord(g, i) * chi(g)),
            0.0,
            zeros_v.clone(),
            zeros_m.clone(),
            &mut probes,
        ));
        i_eps_x_chi_p.push(add(
            format!("eps_x{i}_chi_prime"),
            Box::new(move |g: &GroupElement| eps(g) * coord(g, i) * chi_p(g)),
            0.0,
            zeros_v.clone(),
            zeros_m.clone(),
            &mut probes,
        ));
    }
    // Quadratic probes ε·f_ξ for ξ = e_j and ξ = e_j + e_k (j < k).
    let mut i_quad_single = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut hess = zeros_m.clone();
        hess[(j, j)] = 1.0;
        i_quad_single.push(add(
            format!("eps_quad{j}"),
            Box::new(move |g: &GroupElement| {
                let x = coord(g, j);
                eps(g) * 0.5 * x * x
            }),
            0.0,
            zeros_v.clone(),
            hess,
            &mut probes,
        ));
    }
    let mut i_quad_pair = vec![vec![usize::MAX; dim]; dim];
    let mut i_corr = vec![vec![usize::MAX; dim]; dim];
    let mut i_corr_p = vec![vec![usize::MAX; dim]; dim];
    for j in 0..dim {
        for k in j..dim {
            if k > j {
                let mut hess = zeros_m.clone();
                hess[(j, j)] = 1.0;
                hess[(k, k)] = 1.0;
                hess[(j, k)] = 1.0;
                hess[(k, j)] = 1.0;
                i_quad_pair[j][k] = add(
                    format!("eps_quad{j}{k}"),
                    Box::new(move |g: &GroupElement| {
                        let s = coord(g, j) + coord(g, k);
                        eps(g) * 0.5 * s * s
                    }),
                    0.0,
                    zeros_v.clone(),
                    hess,
                    &mut probes,
                );
            }
            i_corr[j][k] = add(
                format!("corr{j}{k}"),
                Box::new(move |g: &GroupElement| eps(g) * coord(g, j) * coord(g, k) * chi(g)),
                0.0,
                zeros_v.clone(),
                zeros_m.clone(),
                &mut probes,
            );
            i_corr_p[j][k] = add(
                format!("corr{j}{k}_prime"),
                Box::new(move |g: &GroupElement| eps(g) * coord(g, j) * coord(g, k) * chi_p(g)),
                0.0,
                zeros_v.clone(),
                zeros_m.clone(),
                &mut probes,
            );
        }
    }

    let values: Vec<f64> = probes
        .iter()
        .map(|p| op.apply(&p.coeffs, &e))
        .collect::<Result<_>>()?;

    let c_hat = -values[i_one];
    let mass = values[i_chi];
    let b_hat: Vec<f64> = (0..dim)
        .map(|i| values[i_eps_x[i]] - values[i_eps_x_chi[i]])
        .collect();
    let mut a_hat = DMatrix::<f64>::zeros(dim, dim);
    for j in 0..dim {
        a_hat[(j, j)] = values[i_quad_single[j]] - 0.5 * values[i_corr[j][j]];
        for k in (j + 1)..dim {
            let combo = values[i_quad_pair[j][k]]
                - values[i_quad_single[j]]
                - values[i_quad_single[k]]
                - values[i_corr[j][k]];
            a_hat[(j, k)] = 0.5 * combo;
            a_hat[(k, j)] = 0.5 * combo;
        }
    }

    // Residuals: weight measured probe imperfections by the recovered
    // coefficient magnitudes. The drift weight allows for the compensation
    // ambiguity (|b| ≤ |b̂| + radius·mass, and the compensator itself
    // contributes once more).
    let grad_coefs: Vec<f64> = b_hat
        .iter()
        .map(|b| b.abs() + 2.0 * chart.radius * mass.abs())
        .collect();
    let a_abs = a_hat.map(f64::abs);
    let rays = ray_samples(group, delta);
    let res: Vec<f64> = probes
        .par_iter()
        .map(|p| probe_residual(p, c_hat.abs(), &grad_coefs, &a_abs, mass.abs(), &rays, &e))
        .collect();

    // Disagreement between the χ and χ′ versions of each correction, beyond
    // what band-limit error explains, measures jump mass inside the
    // forbidden shell (0, δ).
    let mut unstable: Vec<String> = Vec::new();
    let mut excess = |i: usize, i_p: usize| -> f64 {
        let disagreement = (values[i] - values[i_p]).abs();
        let explained = res[i] + res[i_p];
        let ex = (disagreement - explained).max(0.0);
        if ex > 0.1 * values[i].abs() + 1e-9 {
            unstable.push(format!(
                "{}: disagreement {ex:.3e} vs value {:.3e}",
                probes[i].name, values[i]
            ));
        }
        ex
    };
    let mass_excess = excess(i_chi, i_chi_p);
    let b_excess: Vec<f64> = (0..dim)
        .map(|i| excess(i_eps_x_chi[i], i_eps_x_chi_p[i]))
        .collect();
    let mut corr_excess = vec![vec![0.0; dim]; dim];
    for j in 0..dim {
        for k in j..dim {
            corr_excess[j][k] = excess(i_corr[j][k], i_corr_p[j][k]);
        }
    }
    if !unstable.is_empty() {
        return Err(LieflowError::SeparationViolated {
            reason: unstable.join("; "),
        });
    }

    let res_c = res[i_one];
    let res_mass = res[i_chi] + mass_excess;
    let res_b: Vec<f64> = (0..dim)
        .map(|i| res[i_eps_x[i]] + res[i_eps_x_chi[i]] + b_excess[i])
        .collect();
    let mut res_a = DMatrix::<f64>::zeros(dim, dim);
    for j in 0..dim {
        res_a[(j, j)] = res[i_quad_single[j]] + 0.5 * (res[i_corr[j][j]] + corr_excess[j][j]);
        for k in (j + 1)..dim {
            let r = 0.5
                * (res[i_quad_pair[j][k]]
                    + res[i_quad_single[j]]
                    + res[i_quad_single[k]]
                    + res[i_corr[j][k]]
                    + corr_excess[j][k]);
            res_a[(j, k)] = r;
            res_a[(k, j)] = r;
        }
    }

    Ok(ExtractedCharacteristics {
        c: c_hat,
        b: b_hat,
        a: a_hat,
        jump_mass_outside: mass,
        residuals: ExtractionResiduals {
            c: res_c,
            b: res_b,
            a: res_a,
            jump_mass: res_mass,
        },
    })
}
