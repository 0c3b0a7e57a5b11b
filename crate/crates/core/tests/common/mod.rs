//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature on [a, b].
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Adaptive Simpson over consecutive intervals given by `edges`.
pub fn simpson_pieces(f: &dyn Fn(f64) -> f64, edges: &[f64], tol: f64) -> f64 {
    edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| adaptive_simpson(f, w[0], w[1], tol))
        .sum()
}

/// Hermite polynomial coefficients in exact integers, lowest power first.
pub fn hermite_integer_coefficients(n: usize) -> Vec<i128> {
    let mut prev = vec![1i128];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0i128, 2];
    for k in 1..n {
        let mut next = vec![0i128; k + 2];
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] += 2 * c;
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] -= 2 * k as i128 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// ∫ e^{−y²} H_n H_{n'} y⁴ dy, using ∫ e^{−y²} y^{2k} dy = √π (2k−1)!!/2^k.
/// The sum is carried as an exact integer numerator over 2^K.
pub fn alpha_oracle(n: usize, nprime: usize) -> f64 {
    let a = hermite_integer_coefficients(n);
    let b = hermite_integer_coefficients(nprime);
    let top = (n + nprime + 4) / 2;
    let mut numerator: i128 = 0;
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            let p = i + j + 4;
            if p % 2 == 1 || *ca == 0 || *cb == 0 {
                continue;
            }
            let k = p / 2;
            let double_factorial: i128 = (1..=k as i128).map(|m| 2 * m - 1).product();
            numerator += ca * cb * double_factorial * (1i128 << (top - k));
        }
    }
    numerator as f64 / 2f64.powi(top as i32) * PI.sqrt()
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}
