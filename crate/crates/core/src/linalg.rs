//! Small dense complex linear algebra shared by the representation,
//! symbol and semigroup modules.
//!
//! Matrices here are tiny (the largest irreducible representation in scope is
//! 17-dimensional), so everything below favours robustness over asymptotics.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximum absolute column sum (operator 1-norm), used for exponent scaling.
fn one_norm(m: &CMat) -> f64 {
    let (rows, cols) = m.shape();
    let mut best = 0.0f64;
    for j in 0..cols {
        let mut s = 0.0;
        for i in 0..rows {
            s += m[(i, j)].norm();
        }
        best = best.max(s);
    }
    best
}

/// Matrix exponential by scaling-and-squaring with a degree-13 Padé
/// approximant (Higham's method). Accurate to ~1e-15 for the well-conditioned
/// skew-Hermitian-dominated matrices this crate produces.
pub fn expm(a: &CMat) -> CMat {
    const THETA_13: f64 = 5.371_920_351_148_152;
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    let dim = a.nrows();
    assert_eq!(dim, a.ncols(), "expm requires a square matrix");
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = Complex64::new((0.5f64).powi(s as i32), 0.0);
    let a = a.map(|z| z * scale);

    let cb = |i: usize| Complex64::new(B[i], 0.0);
    let id = CMat::identity(dim, dim);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * (&a6 * cb(13) + &a4 * cb(11) + &a2 * cb(9))
        + &a6 * cb(7)
        + &a4 * cb(5)
        + &a2 * cb(3)
        + &id * cb(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * cb(12) + &a4 * cb(10) + &a2 * cb(8))
        + &a6 * cb(6)
        + &a4 * cb(4)
        + &a2 * cb(2)
        + &id * cb(0);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = lhs
        .lu()
        .solve(&rhs)
        .expect("Pade denominator is nonsingular for scaled input");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// For symmetric positive semidefinite `a`, a real factor `l` with
/// `l * l^T = a`. Eigenvalues below zero (roundoff) are clamped.
pub fn psd_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = a.nrows();
    assert_eq!(dim, a.ncols());
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut l = eig.eigenvectors.clone();
    for j in 0..dim {
        let lam = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..dim {
            l[(i, j)] *= lam;
        }
    }
    l
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Exact for polynomials of degree <= 2n - 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi-style initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
