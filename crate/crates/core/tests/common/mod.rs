#![allow(dead_code)]

/// Dense linear solve by Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| {
            let mut r = r.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for c in col..=n {
                m[row][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// `sf2 * exp(-2 sin^2(pi (a - b) / period) / l^2)`, written out directly.
pub fn kernel(a: f64, b: f64, sf: f64, period: f64, l: f64) -> f64 {
    let s = (std::f64::consts::PI * (a - b) / period).sin();
    sf * sf * (-2.0 * s * s / (l * l)).exp()
}

/// Direct-form posterior mean and variance with an explicit inverse.
pub fn dense_posterior(
    x: &[f64],
    y: &[f64],
    q: f64,
    sf: f64,
    sn2: f64,
    period: f64,
    l: f64,
) -> (f64, f64) {
    let n = x.len();
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| kernel(x[i], x[j], sf, period, l) + if i == j { sn2 } else { 0.0 })
                .collect()
        })
        .collect();
    // columns of the inverse
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        let col = dense_solve(&k, &e);
        for r in 0..n {
            inv[r][c] = col[r];
        }
    }
    let ks: Vec<f64> = x.iter().map(|&xi| kernel(q, xi, sf, period, l)).collect();
    let w: Vec<f64> = (0..n)
        .map(|r| (0..n).map(|c| inv[r][c] * y[c]).sum())
        .collect();
    let mean = ks.iter().zip(&w).map(|(a, b)| a * b).sum();
    let quad: f64 = (0..n)
        .map(|r| ks[r] * (0..n).map(|c| inv[r][c] * ks[c]).sum::<f64>())
        .sum();
    (mean, sf * sf - quad)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
