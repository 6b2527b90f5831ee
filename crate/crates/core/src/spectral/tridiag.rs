//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for
//! eigenvalues, inverse iteration with partial-pivoting LU for vectors.

use crate::{Error, Result};

/// Number of eigenvalues strictly below `lambda` (LDLT pivot signs).
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let mut count = 0usize;
    let mut d = diag[0] - lambda;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let safe = if d.abs() < 1e-300 { 1e-300_f64.copysign(d + 1e-300) } else { d };
        d = (diag[i] - lambda) - off[i - 1] * off[i - 1] / safe;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The k smallest eigenvalues by bisection to absolute tolerance ~1e-13·scale.
pub fn smallest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = diag.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = off.get(i.wrapping_sub(1)).map_or(0.0, |v| v.abs())
            + off.get(i).map_or(0.0, |v| v.abs());
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let tol = 1e-14 * scale;
    let mut out = Vec::with_capacity(k);
    for idx in 0..k {
        let (mut a, mut b) = (lo, hi);
        // invariant: count(a) <= idx < count(b)
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if sturm_count(diag, off, mid) > idx {
                b = mid;
            } else {
                a = mid;
            }
            if b - a < tol {
                break;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Solve (T - λI) x = b by tridiagonal LU with partial pivoting (the upper
/// factor gains a second superdiagonal); near-singular pivots are nudged,
/// which is exactly what inverse iteration wants.
fn shifted_solve(diag: &[f64], off: &[f64], lambda: f64, b: &mut [f64]) {
    let n = diag.len();
    let mut d: Vec<f64> = diag.iter().map(|v| v - lambda).collect();
    let mut du: Vec<f64> = off.to_vec();
    let mut dl: Vec<f64> = off.to_vec();
    let mut du2 = vec![0.0f64; n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];

    let guard = |v: f64| if v.abs() < 1e-300 { 1e-300_f64.copysign(v + 1e-300) } else { v };

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let fact = dl[i] / guard(d[i]);
            d[i + 1] -= fact * du[i];
            dl[i] = fact;
        } else {
            let fact = d[i] / guard(dl[i]);
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            du[i] = tmp;
            dl[i] = fact;
            swapped[i] = true;
        }
    }
    // forward substitution
    for i in 0..n - 1 {
        if swapped[i] {
            let tmp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tmp - dl[i] * b[i];
        } else {
            b[i + 1] -= dl[i] * b[i];
        }
    }
    // back substitution
    b[n - 1] /= guard(d[n - 1]);
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / guard(d[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / guard(d[i]);
    }
}

/// Inverse iteration for the eigenvector at (approximately) eigenvalue
/// `lambda`, reorthogonalized against `previous` vectors; returns the
/// normalized vector (discrete 2-norm).
pub fn inverse_iteration(
    diag: &[f64],
    off: &[f64],
    lambda: f64,
    previous: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let n = diag.len();
    // deterministic pseudo-random start
    let mut v: Vec<f64> = (0..n)
        .map(|i| ((i as f64 * 0.7548776662466927 + 0.2) % 1.0) - 0.5)
        .collect();
    normalize(&mut v);
    let mut res_prev = f64::INFINITY;
    for it in 0..60 {
        shifted_solve(diag, off, lambda, &mut v);
        for p in previous {
            let ip: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, pi) in v.iter_mut().zip(p) {
                *vi -= ip * pi;
            }
        }
        normalize(&mut v);
        let res = residual(diag, off, lambda, &v);
        if res < 1e-11 * lambda.abs().max(1.0) {
            return Ok(v);
        }
        if it > 6 && res >= res_prev * 0.5 {
            // stagnated; accept if reasonable
            if res < 1e-8 * lambda.abs().max(1.0) {
                return Ok(v);
            }
        }
        res_prev = res;
    }
    let res = residual(diag, off, lambda, &v);
    if res < 1e-8 * lambda.abs().max(1.0) {
        Ok(v)
    } else {
        Err(Error::NonConvergence(format!(
            "inverse iteration stalled at residual {res:.3e} for λ = {lambda}"
        )))
    }
}

fn normalize(v: &mut [f64]) {
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v {
            *x /= n;
        }
    }
}

/// ‖(T - λ)v‖ for a unit vector v.
pub fn residual(diag: &[f64], off: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = diag.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut r = (diag[i] - lambda) * v[i];
        if i > 0 {
            r += off[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            r += off[i] * v[i + 1];
        }
        s += r * r;
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_eigenvalues_of_known_matrix() {
        // free Laplacian on n points: eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 60;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        let got = smallest_eigenvalues(&diag, &off, 5).unwrap();
        for i in 0..5 {
            assert!((got[i] - exact[i]).abs() < 1e-12, "λ_{i}: {} vs {}", got[i], exact[i]);
        }
        assert_eq!(sturm_count(&diag, &off, exact[2] + 1e-9), 3);
    }

    #[test]
    fn inverse_iteration_gets_eigenvectors() {
        let n = 80;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let lams = smallest_eigenvalues(&diag, &off, 3).unwrap();
        let mut prev: Vec<Vec<f64>> = Vec::new();
        for &l in &lams {
            let v = inverse_iteration(&diag, &off, l, &prev).unwrap();
            assert!(residual(&diag, &off, l, &v) < 1e-9);
            prev.push(v);
        }
        // orthogonality
        let ip: f64 = prev[0].iter().zip(&prev[1]).map(|(a, b)| a * b).sum();
        assert!(ip.abs() < 1e-10);
    }
}
