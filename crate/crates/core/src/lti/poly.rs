//! Real polynomials stored as coefficient vectors in descending powers.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

const SCHUR_MAX_ITER: usize = 1000;

/// Eigenvalues of a real square matrix.
///
/// The Schur iteration is bounded; when it does not converge (defective
/// matrices such as nilpotent companion blocks) the roots of the
/// characteristic polynomial are used instead.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    match Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => roots(&charpoly(a)),
    }
}

/// Characteristic polynomial `det(zI - A)` by Faddeev-LeVerrier.
pub fn charpoly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        let prev = *coeffs.last().unwrap();
        m = a * &m;
        for i in 0..n {
            m[(i, i)] += prev;
        }
        let c = -(a * &m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// Drops leading zero coefficients. The zero polynomial becomes `[]`.
pub fn trim(p: &[f64]) -> Vec<f64> {
    let first = p.iter().position(|&c| c != 0.0).unwrap_or(p.len());
    p[first..].to_vec()
}

/// Degree of a trimmed polynomial; `None` for the zero polynomial.
pub fn degree(p: &[f64]) -> Option<usize> {
    let t = trim(p);
    if t.is_empty() {
        None
    } else {
        Some(t.len() - 1)
    }
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, &x) in a.iter().enumerate() {
        out[n - a.len() + i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[n - b.len() + i] += y;
    }
    out
}

pub fn scale(p: &[f64], k: f64) -> Vec<f64> {
    p.iter().map(|c| c * k).collect()
}

pub fn pow(p: &[f64], n: usize) -> Vec<f64> {
    (0..n).fold(vec![1.0], |acc, _| mul(&acc, p))
}

/// Left-pads with zeros to `len` coefficients.
pub fn pad(p: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len.saturating_sub(p.len())];
    out.extend_from_slice(p);
    out
}

pub fn eval(p: &[f64], z: Complex64) -> Complex64 {
    p.iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn eval_real(p: &[f64], x: f64) -> f64 {
    p.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Monic polynomial with the given roots. Complex roots are expected in
/// conjugate pairs; the imaginary residue of the product is discarded.
pub fn from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
        for (i, &c) in acc.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        acc = next;
    }
    acc.into_iter().map(|c| c.re).collect()
}

/// Roots via eigenvalues of the companion matrix. Exact zero trailing
/// coefficients are returned as exact roots at the origin.
pub fn roots(p: &[f64]) -> Vec<Complex64> {
    let t = trim(p);
    if t.len() <= 1 {
        return Vec::new();
    }
    let zeros_at_origin = t.iter().rev().take_while(|&&c| c == 0.0).count();
    let core = &t[..t.len() - zeros_at_origin];
    let mut out = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    let n = core.len() - 1;
    if n == 0 {
        return out;
    }
    let lead = core[0];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        companion[(0, j)] = -core[j + 1] / lead;
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    match Schur::try_new(companion, f64::EPSILON, SCHUR_MAX_ITER) {
        Some(schur) => out.extend(schur.complex_eigenvalues().iter().copied()),
        None => out.extend(aberth(core)),
    }
    out
}

/// Aberth-Ehrlich simultaneous root iteration, used when the companion
/// eigenvalue iteration fails to converge.
fn aberth(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    let dp: Vec<f64> = p[..n]
        .iter()
        .enumerate()
        .map(|(i, c)| c * (n - i) as f64)
        .collect();
    let bound = 1.0 + p[1..].iter().map(|c| (c / p[0]).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            Complex64::from_polar(
                0.5 * bound,
                2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64,
            )
        })
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0_f64;
        for k in 0..n {
            let ratio = eval(p, z[k]) / eval(&dp, z[k]);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| 1.0 / (z[k] - z[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm());
            }
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    z
}
